"""Executes concept-unit operations against a simulated world.

The world holds entities, their spatial arrangement by group, and named
ordered containers. Execution walks operation bodies, enforces member
visibility between units, emits a trace of observable events, and
returns the result value plus a mutated copy of the world. The input
world is never changed.

Binding rules, applied when a unit's attribute frame materializes:

* a const attribute takes its bound literal (symbol lists become
  ordered sequences with a fresh cursor);
* a set-typed variable snapshots the world's first container, and the
  container's entities must all match the declared element kind;
* a list-typed variable starts empty;
* an agent-typed variable binds the world's first Person entity;
* a unit-typed variable binds the container matching its own name, or
  the next unused container in insertion order. Unit values built from
  the same container are shared within one execution, so two units
  naming the same container see the same object.

Sequences pass by value at operation calls (fresh cursor, own items);
unit values pass by reference, with their list fields' cursors reset
at entry so every operation gets a fresh view of the collections.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import ir
from .ir import (
    ActionStmt,
    AssignStmt,
    BinExpr,
    BlockStmt,
    BoolExpr,
    CallExpr,
    CallStmt,
    ConceptUnit,
    Expr,
    FieldExpr,
    IfStmt,
    IntExpr,
    ListExpr,
    LocalDecl,
    NameExpr,
    NotExpr,
    NullExpr,
    ReturnStmt,
    SetupStmt,
    Stmt,
    WhileStmt,
)

ARRANGEMENTS = ("Line", "Square", "Circle", "Scattered")

DEFAULT_STEP_LIMIT = 10_000
_CALL_DEPTH_LIMIT = 128


# ---------------------------------------------------------------------------
# World

@dataclass(frozen=True)
class World:
    """Immutable scene snapshot.

    entities maps id to (kind, group or None); arrangements maps group
    to one of ARRANGEMENTS; containers maps name to an ordered entity
    id tuple. Container insertion order is meaningful: the first
    container is the default binding target.
    """

    entities: Mapping[str, tuple[str, str | None]]
    arrangements: Mapping[str, str]
    containers: Mapping[str, tuple[str, ...]]
    rng_seed: int = 0


def validate_world(world: World) -> list[str]:
    problems = []
    for cname, members in world.containers.items():
        for eid in members:
            if eid not in world.entities:
                problems.append(f"container {cname!r} holds unknown entity {eid!r}")
    groups = {group for (_, group) in world.entities.values() if group is not None}
    for group, arrangement in world.arrangements.items():
        if group not in groups:
            problems.append(f"arrangement for unknown group {group!r}")
        if arrangement not in ARRANGEMENTS:
            problems.append(f"unknown arrangement {arrangement!r} for group {group!r}")
    return problems


# ---------------------------------------------------------------------------
# Values

@dataclass(frozen=True)
class IntVal:
    value: int


@dataclass(frozen=True)
class BoolVal:
    value: bool


@dataclass(frozen=True)
class TokenVal:
    token: str


@dataclass(frozen=True)
class EntityVal:
    entity: str


class SeqVal:
    """Ordered collection with one implicit cursor.

    next() returns the element under the cursor and advances, or None
    at the end (the cursor stays put, matching a != NULL loop test).
    first() resets to the front and returns the first element.
    """

    __slots__ = ("items", "pos")

    def __init__(self, items: list | None = None):
        self.items = items if items is not None else []
        self.pos = 0

    def copy(self) -> "SeqVal":
        return SeqVal(list(self.items))

    def next(self):
        if self.pos >= len(self.items):
            return None
        item = self.items[self.pos]
        self.pos += 1
        return item

    def first(self):
        if not self.items:
            return None
        self.pos = 1
        return self.items[0]

    def delete(self, value) -> None:
        for i, item in enumerate(self.items):
            if values_equal(item, value):
                del self.items[i]
                if i < self.pos:
                    self.pos -= 1
                return

    def __repr__(self) -> str:
        return f"SeqVal({self.items!r}, pos={self.pos})"


class UnitVal:
    """Reference-semantics instance of a class unit (its field record)."""

    __slots__ = ("cls", "fields")

    def __init__(self, cls: str, fields: dict):
        self.cls = cls
        self.fields = fields

    def __repr__(self) -> str:
        return f"UnitVal({self.cls}, {sorted(self.fields)})"


class Nothing:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Nothing"


NOTHING = Nothing()

Value = IntVal | BoolVal | TokenVal | EntityVal | SeqVal | UnitVal | Nothing


def values_equal(a: Value, b: Value) -> bool:
    """Equality used by == and Delete: same kind and same payload.

    Cross-kind comparison is False, not an error; `item != NULL` relies
    on an entity never equalling Nothing.
    """
    if isinstance(a, Nothing) or isinstance(b, Nothing):
        return isinstance(a, Nothing) and isinstance(b, Nothing)
    if type(a) is not type(b):
        return False
    if isinstance(a, (IntVal, BoolVal, TokenVal, EntityVal)):
        return a == b
    return a is b


# ---------------------------------------------------------------------------
# Trace and results

@dataclass(frozen=True)
class TraceEvent:
    seq: int
    verb: str  # PointedTo | Said | Moved | TookAway
    arg: str | None = None


def format_trace(trace: Sequence[TraceEvent]) -> str:
    lines = [f"{e.seq}\t{e.verb}\t{e.arg if e.arg is not None else ''}" for e in trace]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ExecResult:
    trace: tuple[TraceEvent, ...]
    value: Value
    steps: int
    world: World  # post-execution snapshot; the input world is untouched


# ---------------------------------------------------------------------------
# Errors

class ExecError(Exception):
    """Base of all execution failures."""


class AccessViolation(ExecError):
    pass


class UnboundName(ExecError):
    pass


class TypeMismatch(ExecError):
    pass


class BindingMismatch(TypeMismatch):
    """Nominal rejection while binding a unit's frame to the world."""


class SetupMismatch(ExecError):
    pass


class StepLimitExceeded(ExecError):
    pass


class EmptyCollection(ExecError):
    pass


class _Return(Exception):
    def __init__(self, value: Value):
        self.value = value


# ---------------------------------------------------------------------------
# Machine

@dataclass
class _Frame:
    unit: ConceptUnit
    locals: dict


class _Machine:
    def __init__(
        self,
        kb: Sequence[ConceptUnit],
        world: World,
        caller_domain: str,
        step_limit: int,
    ):
        self.units: dict[str, ConceptUnit] = {u.name: u for u in kb}
        self.entities = dict(world.entities)
        self.arrangements = dict(world.arrangements)
        self.containers = {name: list(members) for name, members in world.containers.items()}
        self.rng_seed = world.rng_seed
        self.rng = random.Random(world.rng_seed)
        self.caller_domain = caller_domain
        self.step_limit = step_limit
        self.steps = 0
        self.trace: list[TraceEvent] = []
        self.frames: dict[str, dict] = {}
        self.container_vals: dict[str, UnitVal] = {}
        self.call_depth = 0

    # -- bookkeeping

    def snapshot_world(self) -> World:
        return World(
            entities=dict(self.entities),
            arrangements=dict(self.arrangements),
            containers={name: tuple(members) for name, members in self.containers.items()},
            rng_seed=self.rng_seed,
        )

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.step_limit:
            raise StepLimitExceeded(f"exceeded {self.step_limit} steps")

    def emit(self, verb: str, arg: str | None) -> None:
        self.trace.append(TraceEvent(len(self.trace) + 1, verb, arg))

    # -- frame binding

    def unit_frame(self, unit: ConceptUnit) -> dict:
        frame = self.frames.get(unit.name)
        if frame is None:
            frame = {}
            self.frames[unit.name] = frame
            used: set[str] = set()
            for attr in unit.attributes:
                frame[attr.name] = self._bind_attribute(unit, attr, used)
        return frame

    def _literal_value(self, attr: ir.Attribute) -> Value:
        lit = attr.const
        assert lit is not None
        if lit.is_int:
            return IntVal(lit.value)
        if lit.is_symbols:
            return SeqVal([TokenVal(sym) for sym in lit.value])
        if attr.type_ref in ir.TOKEN_TYPES or attr.type_ref in ir.SCALAR_TYPES:
            return TokenVal(lit.value)
        return EntityVal(lit.value)

    def _bind_attribute(self, unit: ConceptUnit, attr: ir.Attribute, used: set[str]):
        if attr.is_const:
            return self._literal_value(attr)
        t = attr.type_ref
        if t in ir.SET_TYPES:
            if not self.containers:
                raise BindingMismatch(f"{unit.name}.{attr.name}: no container to bind")
            cname = next(iter(self.containers))
            members = self.containers[cname]
            elem = ir.SET_TYPES[t]
            if elem is not None:
                for eid in members:
                    kind = self.entities.get(eid, ("?", None))[0]
                    if kind != elem:
                        raise BindingMismatch(
                            f"{unit.name}.{attr.name}: container {cname!r} holds "
                            f"{kind} entities, not {elem}"
                        )
            return SeqVal([EntityVal(eid) for eid in members])
        if t in ir.LIST_TYPES:
            return SeqVal([])
        if t in ir.AGENT_TYPES:
            for eid, (kind, _) in self.entities.items():
                if kind == "Person":
                    return EntityVal(eid)
            raise BindingMismatch(f"{unit.name}.{attr.name}: world has no Person")
        if t == "int":
            return IntVal(0)
        if t == "Boolean":
            return BoolVal(False)
        if t in ir.TOKEN_TYPES:
            return NOTHING
        if t in self.units:
            cls = self.units[t]
            cname = None
            if attr.name in self.containers and attr.name not in used:
                cname = attr.name
            else:
                for candidate in self.containers:
                    if candidate not in used:
                        cname = candidate
                        break
            if cname is None:
                return self.build_unit_value(cls, ())
            used.add(cname)
            return self.container_unit_value(cls, cname)
        raise BindingMismatch(f"{unit.name}.{attr.name}: cannot bind type {t!r}")

    def container_unit_value(self, cls: ConceptUnit, container: str) -> UnitVal:
        val = self.container_vals.get(container)
        if val is None:
            val = self.build_unit_value(cls, tuple(self.containers[container]))
            self.container_vals[container] = val
        return val

    def build_unit_value(self, cls: ConceptUnit, members: tuple[str, ...]) -> UnitVal:
        fields: dict = {}
        for attr in cls.attributes:
            if attr.is_const:
                fields[attr.name] = self._literal_value(attr)
            elif ir.is_collection_type(attr.type_ref):
                fields[attr.name] = SeqVal([EntityVal(eid) for eid in members])
            elif attr.type_ref == "int":
                fields[attr.name] = IntVal(0)
            elif attr.type_ref == "Boolean":
                fields[attr.name] = BoolVal(False)
            else:
                fields[attr.name] = NOTHING
        return UnitVal(cls.name, fields)

    # -- name resolution

    def lookup(self, frame: _Frame, name: str) -> Value:
        if name in frame.locals:
            return frame.locals[name]
        attrs = self.unit_frame(frame.unit)
        if name in attrs:
            return attrs[name]
        globals_unit = self.units.get(ir.GLOBALS_UNIT)
        if globals_unit is not None and frame.unit.name != ir.GLOBALS_UNIT:
            try:
                shared = self.unit_frame(globals_unit)
            except BindingMismatch:
                shared = {}
            if name in shared:
                self._require_access(frame.unit, globals_unit, name)
                return shared[name]
        raise UnboundName(f"{name!r} is not bound in {frame.unit.name}")

    def assign(self, frame: _Frame, name: str, value: Value) -> None:
        if name in frame.locals:
            frame.locals[name] = value
            return
        attrs = self.unit_frame(frame.unit)
        if name in attrs:
            if frame.unit.attribute(name).is_const:
                raise TypeMismatch(f"{frame.unit.name}.{name} is constant")
            attrs[name] = value
            return
        raise UnboundName(f"{name!r} is not assignable in {frame.unit.name}")

    def _require_access(self, caller: ConceptUnit, target: ConceptUnit, member: str) -> None:
        access = ir.check_access(caller.domain, caller.name, target, member)
        if not access:
            raise AccessViolation(access.reason)

    # -- primitives

    def eval_primitive(self, verb: str, recv: Value, args: list[Value]) -> Value:
        if verb == "Move":
            self.emit("Moved", None)
            return NOTHING
        if verb == "PointTo":
            target = self._entity_arg(verb, args)
            self.emit("PointedTo", target.entity)
            return NOTHING
        if verb == "Say":
            if len(args) != 1 or not isinstance(args[0], TokenVal):
                raise TypeMismatch("Say takes one sound token")
            self.emit("Said", args[0].token)
            return NOTHING
        if verb == "TakeAway":
            target = self._entity_arg(verb, args)
            for members in self.containers.values():
                if target.entity in members:
                    members.remove(target.entity)
                    self.emit("TookAway", target.entity)
                    return NOTHING
            raise UnboundName(f"{target.entity!r} is not in any container")
        if not isinstance(recv, SeqVal):
            raise TypeMismatch(f"{verb} needs an ordered collection receiver")
        if verb == "Empty":
            return BoolVal(not recv.items)
        if verb == "First":
            item = recv.first()
            if item is None:
                raise EmptyCollection("First on an empty collection")
            return item
        if verb == "Next":
            item = recv.next()
            return item if item is not None else NOTHING
        if verb == "Append":
            if len(args) != 1:
                raise TypeMismatch("Append takes one element")
            recv.items.append(args[0])
            return NOTHING
        if verb == "Delete":
            if len(args) != 1:
                raise TypeMismatch("Delete takes one element")
            recv.delete(args[0])
            return NOTHING
        if verb == "SelectOneRandom":
            if not recv.items:
                raise EmptyCollection("SelectOneRandom on an empty collection")
            return self.rng.choice(recv.items)
        raise TypeMismatch(f"unknown primitive {verb!r}")

    def _entity_arg(self, verb: str, args: list[Value]) -> EntityVal:
        if len(args) != 1 or not isinstance(args[0], EntityVal):
            raise TypeMismatch(f"{verb} takes one entity")
        target = args[0]
        if target.entity not in self.entities:
            raise UnboundName(f"{verb}: unknown entity {target.entity!r}")
        return target

    # -- setup facts

    def check_setup(self, stmt: SetupStmt, frame: _Frame) -> None:
        ids = []
        for name in stmt.args:
            value = self.lookup(frame, name)
            if not isinstance(value, EntityVal):
                raise SetupMismatch(f"{stmt.pred}: {name!r} is not an entity")
            ids.append(value.entity)
        if stmt.pred in ("In", "On"):
            for eid in ids:
                if eid not in self.entities:
                    raise SetupMismatch(f"{stmt.pred}: {eid!r} is not in the scene")
            return
        # InLine holds only for the whole container, in order, arranged in a line
        if not ids:
            raise SetupMismatch("InLine needs entities")
        home = None
        for cname, members in self.containers.items():
            if ids[0] in members:
                home = cname
                break
        if home is None:
            raise SetupMismatch(f"InLine: {ids[0]!r} is not in any container")
        if list(ids) != self.containers[home]:
            raise SetupMismatch(
                f"InLine: container {home!r} does not hold exactly these entities in order"
            )
        group = self.entities[ids[0]][1]
        if group is None or self.arrangements.get(group) != "Line":
            raise SetupMismatch(f"InLine: group {group!r} is not arranged in a line")

    # -- expressions

    def eval(self, frame: _Frame, expr: Expr) -> Value:
        if isinstance(expr, IntExpr):
            return IntVal(expr.value)
        if isinstance(expr, BoolExpr):
            return BoolVal(expr.value)
        if isinstance(expr, NullExpr):
            return NOTHING
        if isinstance(expr, NameExpr):
            return self.lookup(frame, expr.name)
        if isinstance(expr, ListExpr):
            return SeqVal([self._list_element(frame, name) for name in expr.names])
        if isinstance(expr, FieldExpr):
            return self._field(frame, expr)[0]
        if isinstance(expr, CallExpr):
            return self._eval_call(frame, expr)
        if isinstance(expr, NotExpr):
            operand = self.eval(frame, expr.operand)
            if not isinstance(operand, BoolVal):
                raise TypeMismatch("! needs a Boolean operand")
            return BoolVal(not operand.value)
        if isinstance(expr, BinExpr):
            return self._binop(frame, expr)
        raise TypeMismatch(f"cannot evaluate {expr!r}")

    def _list_element(self, frame: _Frame, name: str) -> Value:
        try:
            return self.lookup(frame, name)
        except UnboundName:
            if name in self.entities:
                return EntityVal(name)
            return TokenVal(name)

    def _field(self, frame: _Frame, expr: FieldExpr) -> tuple[Value, UnitVal]:
        recv = self.eval(frame, expr.recv)
        if not isinstance(recv, UnitVal):
            raise TypeMismatch(f"field {expr.name!r} needs a unit value receiver")
        cls = self.units.get(recv.cls)
        if cls is not None:
            self._require_access(frame.unit, cls, expr.name)
        if expr.name not in recv.fields:
            raise UnboundName(f"{recv.cls} has no field {expr.name!r}")
        return recv.fields[expr.name], recv

    def _binop(self, frame: _Frame, expr: BinExpr) -> Value:
        left = self.eval(frame, expr.left)
        right = self.eval(frame, expr.right)
        op = expr.op
        if op == "==":
            return BoolVal(values_equal(left, right))
        if op == "!=":
            return BoolVal(not values_equal(left, right))
        if not (isinstance(left, IntVal) and isinstance(right, IntVal)):
            raise TypeMismatch(f"{op} needs integer operands")
        if op == "+":
            return IntVal(left.value + right.value)
        if op == "-":
            return IntVal(left.value - right.value)
        if op == "<":
            return BoolVal(left.value < right.value)
        if op == ">":
            return BoolVal(left.value > right.value)
        if op == "<=":
            return BoolVal(left.value <= right.value)
        if op == ">=":
            return BoolVal(left.value >= right.value)
        raise TypeMismatch(f"unknown operator {op!r}")

    def _eval_call(self, frame: _Frame, expr: CallExpr) -> Value:
        if expr.op in ir.PRIMITIVE_VERBS:
            if expr.recv is None:
                raise TypeMismatch(f"{expr.op} needs a receiver")
            recv = self.eval(frame, expr.recv)
            args = [self.eval(frame, a) for a in expr.args]
            return self.eval_primitive(expr.op, recv, args)
        if expr.recv is None:
            target = frame.unit
        elif isinstance(expr.recv, NameExpr) and self._names_unit(frame, expr.recv.name):
            target = self.units[expr.recv.name]
        else:
            raise UnboundName(f"operation {expr.op!r} needs a unit receiver")
        args = [self.eval(frame, a) for a in expr.args]
        return self.call_operation(frame.unit, target, expr.op, args)

    def _names_unit(self, frame: _Frame, name: str) -> bool:
        # A local binding shadows a unit name.
        if name in frame.locals or name in self.unit_frame(frame.unit):
            return False
        return name in self.units

    # -- statements

    def exec_block(self, frame: _Frame, body: Sequence[Stmt]) -> None:
        for stmt in body:
            self.exec_stmt(frame, stmt)

    def exec_stmt(self, frame: _Frame, stmt: Stmt) -> None:
        self.tick()
        if isinstance(stmt, SetupStmt):
            self.check_setup(stmt, frame)
        elif isinstance(stmt, ActionStmt):
            recv = self.eval(frame, stmt.recv)
            args = [self.eval(frame, a) for a in stmt.args]
            self.eval_primitive(stmt.verb, recv, args)
        elif isinstance(stmt, AssignStmt):
            value = self.eval(frame, stmt.value)
            if isinstance(stmt.target, NameExpr):
                self.assign(frame, stmt.target.name, value)
            else:
                _, recv = self._field(frame, stmt.target)
                cls = self.units.get(recv.cls)
                if cls is not None and cls.attribute(stmt.target.name).is_const:
                    raise TypeMismatch(f"{recv.cls}.{stmt.target.name} is constant")
                recv.fields[stmt.target.name] = value
        elif isinstance(stmt, LocalDecl):
            frame.locals[stmt.name] = self._default_local(stmt.type_ref)
        elif isinstance(stmt, WhileStmt):
            while True:
                self.tick()
                cond = self.eval(frame, stmt.cond)
                if not isinstance(cond, BoolVal):
                    raise TypeMismatch("while needs a Boolean condition")
                if not cond.value:
                    break
                self.exec_block(frame, stmt.body)
        elif isinstance(stmt, IfStmt):
            cond = self.eval(frame, stmt.cond)
            if not isinstance(cond, BoolVal):
                raise TypeMismatch("if needs a Boolean condition")
            self.exec_block(frame, stmt.then if cond.value else stmt.orelse)
        elif isinstance(stmt, CallStmt):
            if stmt.recv is None:
                target = frame.unit
            elif stmt.recv in self.units and not (
                stmt.recv in frame.locals or stmt.recv in self.unit_frame(frame.unit)
            ):
                target = self.units[stmt.recv]
            else:
                raise UnboundName(f"unknown unit {stmt.recv!r}")
            args = [self.eval(frame, a) for a in stmt.args]
            self.call_operation(frame.unit, target, stmt.op, args)
        elif isinstance(stmt, ReturnStmt):
            value = self.eval(frame, stmt.value) if stmt.value is not None else NOTHING
            raise _Return(value)
        elif isinstance(stmt, BlockStmt):
            self.exec_block(frame, stmt.body)
        else:
            raise TypeMismatch(f"cannot execute {stmt!r}")

    @staticmethod
    def _default_local(type_ref: str) -> Value:
        if ir.is_collection_type(type_ref):
            return SeqVal([])
        if type_ref == "int":
            return IntVal(0)
        if type_ref == "Boolean":
            return BoolVal(False)
        return NOTHING

    # -- operation calls

    def call_operation(
        self,
        caller: ConceptUnit | None,
        target: ConceptUnit,
        op_name: str,
        args: list[Value],
    ) -> Value:
        if caller is not None:
            self._require_access(caller, target, op_name)
        try:
            op = target.operation(op_name)
        except ir.UnknownMember as exc:
            raise UnboundName(str(exc)) from exc
        if len(args) != len(op.params):
            raise TypeMismatch(
                f"{target.name}.{op_name} takes {len(op.params)} arguments, got {len(args)}"
            )
        self.unit_frame(target)
        locals_map: dict = {}
        for param, value in zip(op.params, args):
            self._check_param(target, op_name, param, value)
            if isinstance(value, SeqVal):
                value = value.copy()
            elif isinstance(value, UnitVal):
                for fval in value.fields.values():
                    if isinstance(fval, SeqVal):
                        fval.pos = 0
            locals_map[param.name] = value
        self.call_depth += 1
        if self.call_depth > _CALL_DEPTH_LIMIT:
            self.call_depth -= 1
            raise StepLimitExceeded("operation call depth exceeded")
        try:
            self.exec_block(_Frame(target, locals_map), op.body)
            return NOTHING
        except _Return as ret:
            return ret.value
        finally:
            self.call_depth -= 1

    def _check_param(self, target: ConceptUnit, op_name: str, param: ir.Param, value: Value) -> None:
        t = param.type_ref
        where = f"{target.name}.{op_name}({param.name}: {t})"

        def reject(got: str) -> None:
            raise TypeMismatch(f"{where} does not accept {got}")

        if t == "int":
            if not isinstance(value, IntVal):
                reject(type(value).__name__)
        elif t == "Boolean":
            if not isinstance(value, BoolVal):
                reject(type(value).__name__)
        elif t in ir.TOKEN_TYPES:
            if not isinstance(value, TokenVal):
                reject(type(value).__name__)
        elif t in ir.AGENT_TYPES or t in ir.ELEMENT_TYPES:
            if not isinstance(value, EntityVal):
                reject(type(value).__name__)
            else:
                kind = self.entities.get(value.entity, ("?", None))[0]
                want = "Person" if t in ir.AGENT_TYPES else ir.ELEMENT_TYPES[t]
                if want is not None and kind != want:
                    reject(f"a {kind} entity")
        elif t in ir.SET_TYPES or t in ir.LIST_TYPES:
            if not isinstance(value, SeqVal):
                reject(type(value).__name__)
            else:
                elem = ir.collection_element(t)
                if elem == ir.TOKEN_ELEM:
                    if any(not isinstance(item, TokenVal) for item in value.items):
                        reject("a collection of non-tokens")
                elif elem is not None:
                    for item in value.items:
                        if not isinstance(item, EntityVal):
                            reject("a collection of non-entities")
                        kind = self.entities.get(item.entity, ("?", None))[0]
                        if kind != elem:
                            reject(f"a collection holding {kind} entities")
        elif t in self.units:
            if not isinstance(value, UnitVal) or value.cls != t:
                reject(type(value).__name__)
        else:
            raise TypeMismatch(f"{where}: unknown parameter type")


# ---------------------------------------------------------------------------
# Public entry points

def execute(
    kb: Sequence[ConceptUnit],
    target: ConceptUnit,
    op: str,
    args: Sequence[Value],
    world: World,
    caller_domain: str,
    step_limit: int = DEFAULT_STEP_LIMIT,
    *,
    caller_unit: str | None = None,
) -> ExecResult:
    """Run target.op(args) against a copy of the world.

    caller_unit defaults to a synthetic outsider in caller_domain;
    passing the target's own name models a unit activating itself,
    which is how a recorded instance replays.
    """
    if step_limit <= 0:
        raise ValueError("step_limit must be positive")
    machine = _Machine(kb, world, caller_domain, step_limit)
    if target.name not in machine.units:
        machine.units[target.name] = target
    caller_name = caller_unit if caller_unit is not None else f"<{caller_domain}>"
    try:
        visibility_probe = ir.check_access(caller_domain, caller_name, target, op)
    except ir.UnknownMember as exc:
        raise UnboundName(str(exc)) from exc
    if not visibility_probe:
        raise AccessViolation(visibility_probe.reason)
    value = machine.call_operation(None, target, op, list(args))
    return ExecResult(
        trace=tuple(machine.trace),
        value=value,
        steps=machine.steps,
        world=machine.snapshot_world(),
    )


def replay_instance(
    kb: Sequence[ConceptUnit],
    instance: ConceptUnit,
    world: World,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ExecResult:
    """Self-activate a recorded instance on a world."""
    return execute(
        kb,
        instance,
        ir.IMPLICIT_OP,
        [],
        world,
        caller_domain=instance.domain,
        step_limit=step_limit,
        caller_unit=instance.name,
    )


def eval_primitive(
    verb: str,
    recv: Value,
    args: Sequence[Value],
    world: World,
) -> tuple[TraceEvent | None, Value]:
    """Run one primitive in isolation; the world is only consulted, and
    TakeAway mutates a throwaway copy. Collection receivers mutate in
    place. The draw sequence restarts from world.rng_seed each call."""
    machine = _Machine((), world, "<primitive>", DEFAULT_STEP_LIMIT)
    value = machine.eval_primitive(verb, recv, list(args))
    event = machine.trace[0] if machine.trace else None
    return event, value


def build_unit_value(
    kb: Sequence[ConceptUnit],
    cls_name: str,
    world: World,
    container: str,
) -> UnitVal:
    """Construct a unit value over one named container, outside any run."""
    for unit in kb:
        if unit.name == cls_name:
            members = world.containers.get(container)
            if members is None:
                raise UnboundName(f"world has no container {container!r}")
            machine = _Machine(kb, world, "<builder>", DEFAULT_STEP_LIMIT)
            return machine.build_unit_value(unit, tuple(members))
    raise UnboundName(f"no class {cls_name!r} in the knowledge base")
