"""Core data model for leveled concept units.

A concept unit is an instance or class with attributes, operations, and
friend declarations. Units sit on a four-step representational ladder
(I, E1, E2, E3); each level carries a structural discipline that
``validate`` checks. ``check_access`` decides member visibility between
units, and ``level_metrics`` summarizes a unit set for the growth
invariants.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence


class Level(Enum):
    I = "I"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"

    @property
    def rank(self) -> int:
        return _LEVEL_RANK[self]

    def __lt__(self, other: "Level") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "Level") -> bool:
        return self.rank <= other.rank


_LEVEL_RANK = {Level.I: 0, Level.E1: 1, Level.E2: 2, Level.E3: 3}

LEVELS: tuple[Level, ...] = (Level.I, Level.E1, Level.E2, Level.E3)


class Visibility(Enum):
    PRIVATE = "private"
    PROTECTED = "protected"
    PUBLIC = "public"


class UnitKind(Enum):
    INSTANCE = "instance"
    CLASS = "class"


# ---------------------------------------------------------------------------
# Literals and types

@dataclass(frozen=True)
class Literal:
    """A bound constant value: an int, a symbol, or an ordered symbol list."""

    value: int | str | tuple[str, ...]

    @property
    def is_int(self) -> bool:
        return isinstance(self.value, int)

    @property
    def is_symbol(self) -> bool:
        return isinstance(self.value, str)

    @property
    def is_symbols(self) -> bool:
        return isinstance(self.value, tuple)


# Type references are nominal tags resolved against a flat registry.
TypeRef = str

TOKEN_ELEM = "@token"

# Set types bind from the world at execution entry; list types start empty.
SET_TYPES: dict[str, str | None] = {"APP_Set": "Apple", "objectSet": None}
LIST_TYPES: dict[str, str | None] = {
    "APP_List": "Apple",
    "objectList": None,
    "intList": TOKEN_ELEM,
}
# Element-type aliases used in declarations; None means any entity kind.
ELEMENT_TYPES: dict[str, str | None] = {"APPLE": "Apple", "OBJECT": None}
TOKEN_TYPES = frozenset({"Sound"})
AGENT_TYPES = frozenset({"Person"})
SCALAR_TYPES = frozenset({"int", "Boolean"})

# Flat widening registry applied when a representation leaves its home field.
WIDENINGS: dict[str, str] = {
    "APP_Set": "objectSet",
    "APP_List": "objectList",
    "APPLE": "OBJECT",
}

SETUP_PREDICATES = frozenset({"In", "On", "InLine"})
ACTION_VERBS = frozenset({"Move", "PointTo", "Say", "TakeAway"})
COLLECTION_VERBS = frozenset(
    {"SelectOneRandom", "Append", "Delete", "Empty", "First", "Next"}
)
PRIMITIVE_VERBS = ACTION_VERBS | COLLECTION_VERBS

GLOBALS_UNIT = "Globals"

# The count-word succession every numeral list draws from, in order.
NUMERALS: tuple[str, ...] = (
    "ONE", "TWO", "THREE", "FOUR", "FIVE",
    "SIX", "SEVEN", "EIGHT", "NINE", "TEN",
    "ELEVEN", "TWELVE", "THIRTEEN", "FOURTEEN", "FIFTEEN",
    "SIXTEEN", "SEVENTEEN", "EIGHTEEN", "NINETEEN", "TWENTY",
)


def is_collection_type(type_ref: TypeRef) -> bool:
    return type_ref in SET_TYPES or type_ref in LIST_TYPES


def collection_element(type_ref: TypeRef) -> str | None:
    """Declared element kind of a collection type, None for unconstrained."""
    if type_ref in SET_TYPES:
        return SET_TYPES[type_ref]
    if type_ref in LIST_TYPES:
        return LIST_TYPES[type_ref]
    raise KeyError(type_ref)


def widen_type(type_ref: TypeRef) -> TypeRef:
    return WIDENINGS.get(type_ref, type_ref)


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class IntExpr:
    value: int


@dataclass(frozen=True)
class BoolExpr:
    value: bool


@dataclass(frozen=True)
class NullExpr:
    pass


@dataclass(frozen=True)
class NameExpr:
    name: str


@dataclass(frozen=True)
class ListExpr:
    names: tuple[str, ...]


@dataclass(frozen=True)
class FieldExpr:
    recv: "Expr"
    name: str


@dataclass(frozen=True)
class CallExpr:
    """Method-style call in expression position; recv None means self."""

    recv: "Expr | None"
    op: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class NotExpr:
    operand: "Expr"


@dataclass(frozen=True)
class BinExpr:
    op: str  # one of == != < > <= >= + -
    left: "Expr"
    right: "Expr"


Expr = (
    IntExpr
    | BoolExpr
    | NullExpr
    | NameExpr
    | ListExpr
    | FieldExpr
    | CallExpr
    | NotExpr
    | BinExpr
)


# ---------------------------------------------------------------------------
# Statements

@dataclass(frozen=True)
class SetupStmt:
    """Scene fact recorded in a level-I body, checked against the world."""

    pred: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class ActionStmt:
    """Primitive action or collection manipulation in statement position."""

    verb: str
    recv: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class AssignStmt:
    target: NameExpr | FieldExpr
    value: Expr


@dataclass(frozen=True)
class LocalDecl:
    name: str
    type_ref: TypeRef


@dataclass(frozen=True)
class WhileStmt:
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class IfStmt:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]


@dataclass(frozen=True)
class CallStmt:
    """Operation call in statement position; recv None means self."""

    recv: str | None
    op: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class ReturnStmt:
    value: Expr | None


@dataclass(frozen=True)
class BlockStmt:
    """Inline labeled block, the E1 shape of a not-yet-split operation."""

    label: str
    args: tuple[str, ...]
    body: tuple["Stmt", ...]


Stmt = (
    SetupStmt
    | ActionStmt
    | AssignStmt
    | LocalDecl
    | WhileStmt
    | IfStmt
    | CallStmt
    | ReturnStmt
    | BlockStmt
)


# ---------------------------------------------------------------------------
# Members and units

@dataclass(frozen=True)
class Attribute:
    """Named member datum. Consts carry exactly one literal, vars none."""

    name: str
    type_ref: TypeRef
    visibility: Visibility
    const: Literal | None = None

    @property
    def is_const(self) -> bool:
        return self.const is not None


@dataclass(frozen=True)
class Param:
    name: str
    type_ref: TypeRef


IMPLICIT_OP = "Replay"


@dataclass(frozen=True)
class Operation:
    name: str
    params: tuple[Param, ...]
    returns: TypeRef | None  # None prints as void
    visibility: Visibility
    body: tuple[Stmt, ...]
    implicit: bool = False  # bare recorded script of an instance


@dataclass(frozen=True)
class ConceptUnit:
    name: str
    kind: UnitKind
    level: Level
    domain: str
    attributes: tuple[Attribute, ...] = ()
    operations: tuple[Operation, ...] = ()
    friends: tuple[str, ...] = ()

    def attribute(self, name: str) -> Attribute:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise UnknownMember(f"{self.name} has no attribute {name!r}")

    def operation(self, name: str) -> Operation:
        for op in self.operations:
            if op.name == name:
                return op
        raise UnknownMember(f"{self.name} has no operation {name!r}")

    def member_visibility(self, name: str) -> Visibility:
        for attr in self.attributes:
            if attr.name == name:
                return attr.visibility
        for op in self.operations:
            if op.name == name:
                return op.visibility
        raise UnknownMember(f"{self.name} has no member {name!r}")


class UnknownMember(KeyError):
    """Lookup of a member name the unit does not declare."""


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    unit: str
    member: str | None = None

    def __str__(self) -> str:
        where = f"{self.unit}.{self.member}" if self.member else self.unit
        return f"[{self.rule}] {where}: {self.message}"


def _walk(body: Iterable[Stmt]):
    for stmt in body:
        yield stmt
        if isinstance(stmt, WhileStmt):
            yield from _walk(stmt.body)
        elif isinstance(stmt, IfStmt):
            yield from _walk(stmt.then)
            yield from _walk(stmt.orelse)
        elif isinstance(stmt, BlockStmt):
            yield from _walk(stmt.body)


def iter_statements(unit: ConceptUnit):
    for op in unit.operations:
        yield from _walk(op.body)


def loop_count(unit: ConceptUnit) -> int:
    return sum(1 for s in iter_statements(unit) if isinstance(s, WhileStmt))


def validate(unit: ConceptUnit) -> list[Diagnostic]:
    """Check one unit against the shared rules and its level discipline.

    Returns an empty list when the unit is well formed. The synthetic
    Globals unit has its own shape (const public data, no operations)
    and skips the per-level rules.
    """
    out: list[Diagnostic] = []

    def bad(rule: str, message: str, member: str | None = None) -> None:
        out.append(Diagnostic(rule, message, unit.name, member))

    seen: set[str] = set()
    for attr in unit.attributes:
        if attr.name in seen:
            bad("duplicate-member", "attribute name reused", attr.name)
        seen.add(attr.name)
    for op in unit.operations:
        if op.name in seen:
            bad("duplicate-member", "operation name reuses a member name", op.name)
        seen.add(op.name)
        params = [p.name for p in op.params]
        if len(params) != len(set(params)):
            bad("duplicate-param", "parameter names must be distinct", op.name)
        for stmt in _walk(op.body):
            if isinstance(stmt, ReturnStmt) and stmt.value is not None:
                if op.returns is None:
                    bad("return-in-void", "returns a value from a void operation", op.name)
            if isinstance(stmt, WhileStmt) and not stmt.body:
                bad("empty-loop", "loop body is empty", op.name)
            if isinstance(stmt, SetupStmt) and unit.level is not Level.I:
                bad("setup-above-i", "setup facts belong to level I recordings", op.name)
            if isinstance(stmt, BlockStmt) and unit.level is not Level.E1:
                bad("block-outside-e1", "inline labeled blocks are an E1-only form", op.name)

    if unit.friends and unit.level.rank < Level.E2.rank:
        bad("friends-below-e2", "friend declarations appear first at E2")

    if unit.name == GLOBALS_UNIT:
        if unit.operations:
            bad("globals-shape", "shared constants carry no operations")
        for attr in unit.attributes:
            if not attr.is_const:
                bad("globals-shape", "shared data must be constant", attr.name)
            if attr.visibility is not Visibility.PUBLIC:
                bad("globals-shape", "shared constants are public", attr.name)
        return out

    if unit.level is Level.I:
        if unit.kind is not UnitKind.INSTANCE:
            bad("i-kind", "level I units are recorded instances")
        for attr in unit.attributes:
            if not attr.is_const:
                bad("i-const", "level I attributes are bound constants", attr.name)
            if attr.visibility is not Visibility.PRIVATE:
                bad("i-private", "level I members are private", attr.name)
        for op in unit.operations:
            if op.visibility is not Visibility.PRIVATE:
                bad("i-private", "level I members are private", op.name)
            if op.params or op.returns is not None:
                bad("i-script", "a recording takes no parameters and returns nothing", op.name)
            for stmt in _walk(op.body):
                if not isinstance(stmt, (SetupStmt, ActionStmt)):
                    bad(
                        "i-straight-line",
                        "recordings hold only setup facts and atomic actions",
                        op.name,
                    )
                    break
    elif unit.level is Level.E1:
        if unit.kind is not UnitKind.CLASS:
            bad("e1-kind", "level E1 units are classes")
        for op in unit.operations:
            if op.visibility is Visibility.PUBLIC:
                bad("e1-op-visibility", "E1 operations stay at most protected", op.name)
        if not any(not a.is_const for a in unit.attributes):
            bad("e1-var", "an E1 class abstracts at least one attribute into a variable")
        if loop_count(unit) < 1:
            bad("e1-loop", "an E1 class compresses repetition into at least one loop")
    elif unit.level is Level.E2:
        if unit.kind is not UnitKind.CLASS:
            bad("e2-kind", "level E2 units are classes")
        for op in unit.operations:
            if op.visibility is not Visibility.PUBLIC:
                bad("e2-op-visibility", "E2 operations are public", op.name)
        for attr in unit.attributes:
            if attr.visibility is Visibility.PUBLIC:
                bad("e2-attr-visibility", "E2 attributes stay at most protected", attr.name)
        if len({op.name for op in unit.operations}) < 2:
            bad("e2-modularity", "an E2 class splits its work into at least two operations")
    elif unit.level is Level.E3:
        for attr in unit.attributes:
            if attr.visibility is not Visibility.PUBLIC:
                bad("e3-public", "E3 members are public", attr.name)
        for op in unit.operations:
            if op.visibility is not Visibility.PUBLIC:
                bad("e3-public", "E3 members are public", op.name)

    return out


def validate_set(units: Sequence[ConceptUnit]) -> list[Diagnostic]:
    """Cross-unit checks: key uniqueness, friend resolution, E3 cooperation."""
    out: list[Diagnostic] = []
    keys: set[tuple[str, Level]] = set()
    names = {u.name for u in units}
    for unit in units:
        key = (unit.name, unit.level)
        if key in keys:
            out.append(Diagnostic("duplicate-unit", "unit key (name, level) reused", unit.name))
        keys.add(key)
        for friend in unit.friends:
            if friend not in names:
                out.append(
                    Diagnostic("unknown-friend", f"friend {friend!r} is not in the set", unit.name)
                )
    by_domain: dict[str, list[ConceptUnit]] = {}
    for unit in units:
        if unit.level is Level.E3 and unit.name != GLOBALS_UNIT:
            by_domain.setdefault(unit.domain, []).append(unit)
    for domain, members in sorted(by_domain.items()):
        if len(members) < 2:
            out.append(
                Diagnostic(
                    "e3-cooperation",
                    f"an E3 concept decomposes into cooperating units; domain {domain!r} has one",
                    members[0].name,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class LevelMetrics:
    unit_count: int
    operation_count: int
    param_count: int
    const_count: int
    visibility_histogram: Mapping[Visibility, int]
    loop_count: int

    def public_fraction(self) -> float:
        total = sum(self.visibility_histogram.values())
        if total == 0:
            return 0.0
        return self.visibility_histogram.get(Visibility.PUBLIC, 0) / total

    def private_count(self) -> int:
        return self.visibility_histogram.get(Visibility.PRIVATE, 0)


def level_metrics(units: Sequence[ConceptUnit]) -> LevelMetrics:
    histogram: Counter[Visibility] = Counter()
    ops = 0
    params = 0
    consts = 0
    loops = 0
    for unit in units:
        for attr in unit.attributes:
            histogram[attr.visibility] += 1
            if attr.is_const:
                consts += 1
        for op in unit.operations:
            histogram[op.visibility] += 1
            ops += 1
            params += len(op.params)
        loops += loop_count(unit)
    return LevelMetrics(
        unit_count=len(units),
        operation_count=ops,
        param_count=params,
        const_count=consts,
        visibility_histogram=dict(histogram),
        loop_count=loops,
    )


def entity_const_count(units: Sequence[ConceptUnit]) -> int:
    """Constants bound to world entities (the episodic residue of a recording)."""
    count = 0
    for unit in units:
        for attr in unit.attributes:
            if not attr.is_const:
                continue
            if attr.type_ref in TOKEN_TYPES or attr.type_ref in SCALAR_TYPES:
                continue
            if is_collection_type(attr.type_ref):
                continue
            count += 1
    return count


# ---------------------------------------------------------------------------
# Access control

@dataclass(frozen=True)
class Access:
    allowed: bool
    reason: str

    def __bool__(self) -> bool:
        return self.allowed


def check_access(
    caller_domain: str,
    caller_unit: str,
    target: ConceptUnit,
    member: str,
) -> Access:
    """Decide whether caller may touch target.member.

    Private admits the owner and the owner's declared friends. Protected
    additionally admits units sharing the owner's domain tag. Public admits
    everyone. Raises UnknownMember for names the target does not declare.
    """
    visibility = target.member_visibility(member)
    if visibility is Visibility.PUBLIC:
        return Access(True, "public member")
    if caller_unit == target.name:
        return Access(True, "owning unit")
    if caller_unit in target.friends:
        return Access(True, f"declared friend of {target.name}")
    if visibility is Visibility.PROTECTED and caller_domain == target.domain:
        return Access(True, f"same domain {target.domain!r}")
    return Access(
        False,
        f"{visibility.value} member of {target.name} "
        f"(domain {target.domain!r}) is hidden from {caller_unit} (domain {caller_domain!r})",
    )


# ---------------------------------------------------------------------------
# Structural comparison

def _expr_calls(expr: Expr):
    if isinstance(expr, CallExpr):
        yield expr
        if expr.recv is not None:
            yield from _expr_calls(expr.recv)
        for arg in expr.args:
            yield from _expr_calls(arg)
    elif isinstance(expr, FieldExpr):
        yield from _expr_calls(expr.recv)
    elif isinstance(expr, NotExpr):
        yield from _expr_calls(expr.operand)
    elif isinstance(expr, BinExpr):
        yield from _expr_calls(expr.left)
        yield from _expr_calls(expr.right)


def _stmt_exprs(stmt: Stmt):
    if isinstance(stmt, ActionStmt):
        yield stmt.recv
        yield from stmt.args
    elif isinstance(stmt, AssignStmt):
        yield stmt.target
        yield stmt.value
    elif isinstance(stmt, WhileStmt):
        yield stmt.cond
    elif isinstance(stmt, IfStmt):
        yield stmt.cond
    elif isinstance(stmt, CallStmt):
        yield from stmt.args
    elif isinstance(stmt, ReturnStmt):
        if stmt.value is not None:
            yield stmt.value


def call_graph(units: Sequence[ConceptUnit]) -> set[tuple[str, str, str, str]]:
    """Edges (caller unit, caller op, callee unit, callee op).

    Self-calls and calls through an explicit unit-name receiver are edges;
    primitive verbs are not.
    """
    unit_names = {u.name for u in units}
    edges: set[tuple[str, str, str, str]] = set()
    for unit in units:
        for op in unit.operations:
            for stmt in _walk(op.body):
                if isinstance(stmt, CallStmt):
                    callee_unit = stmt.recv if stmt.recv is not None else unit.name
                    if callee_unit in unit_names or stmt.recv is None:
                        edges.add((unit.name, op.name, callee_unit, stmt.op))
                for expr in _stmt_exprs(stmt):
                    for call in _expr_calls(expr):
                        if call.op in PRIMITIVE_VERBS:
                            continue
                        if call.recv is None:
                            edges.add((unit.name, op.name, unit.name, call.op))
                        elif isinstance(call.recv, NameExpr) and call.recv.name in unit_names:
                            edges.add((unit.name, op.name, call.recv.name, call.op))
    return edges


def unit_signature(unit: ConceptUnit, *, anonymize: bool = False):
    """Structural fingerprint: names, member shapes, visibilities.

    With anonymize=True the unit's own name is masked, for comparing a
    synthesized unit against a hand-written twin that differs only in name.
    """
    name = "<unit>" if anonymize else unit.name
    return (
        name,
        unit.kind.value,
        unit.level.value,
        unit.domain,
        tuple(
            (a.name, a.type_ref, a.is_const, a.const.value if a.const else None, a.visibility.value)
            for a in unit.attributes
        ),
        tuple(
            (o.name, tuple(p.type_ref for p in o.params), o.returns, o.visibility.value)
            for o in unit.operations
        ),
        unit.friends,
    )


def units_equal(a: ConceptUnit, b: ConceptUnit, *, ignore_names: bool = False) -> bool:
    if ignore_names:
        sa = unit_signature(a, anonymize=True)
        sb = unit_signature(b, anonymize=True)
        same_ops = tuple(op.body for op in a.operations) == tuple(op.body for op in b.operations)
        return sa == sb and same_ops
    return a == b


def set_signature(units: Sequence[ConceptUnit]):
    """Order-insensitive structural fingerprint of a unit set plus call graph."""
    return (
        tuple(sorted(unit_signature(u) for u in units)),
        tuple(sorted(call_graph(units))),
    )
