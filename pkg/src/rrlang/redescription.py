"""Rewrites recorded behavior into progressively more shareable units.

Three passes, each consuming the previous stage's output:

* antiunify_instances folds several recorded episodes of the same
  routine into one class with a loop, replacing object constants by an
  iterated collection and sound constants by a numeral succession;
* generalize_to_e2 widens the object vocabulary, hoists the numeral
  list into the shared Globals unit, splits the routine into callable
  parts, and opens the operations to other domains;
* decompose_to_e3 factors the knowledge into cooperating concepts:
  ordinal succession, the set as a thing with a cardinal sum, and a
  counting unit that works on any two sets.

Passes return the new units plus a PhaseReport naming every rewrite
rule that fired and everything that was dropped along the way.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from . import ir
from .ir import (
    ActionStmt,
    AssignStmt,
    Attribute,
    BinExpr,
    BoolExpr,
    CallExpr,
    CallStmt,
    ConceptUnit,
    Expr,
    FieldExpr,
    IfStmt,
    IntExpr,
    Level,
    LocalDecl,
    Literal,
    NameExpr,
    NotExpr,
    NullExpr,
    Operation,
    Param,
    ReturnStmt,
    SetupStmt,
    Stmt,
    UnitKind,
    Visibility,
    WhileStmt,
)

# Name normalizations applied when apple-specific vocabulary widens.
RENAMES: dict[str, str] = {
    "app_set": "object_set",
    "app_list": "object_list",
    "an_apple": "an_object",
    "APP_Set": "objectSet",
    "APP_List": "objectList",
    "APPLE": "OBJECT",
}


class RedescriptionError(Exception):
    """A pass could not apply to its input."""


class DomainMismatch(RedescriptionError):
    pass


class NoCommonSkeleton(RedescriptionError):
    pass


class TooFewInstances(RedescriptionError):
    def __init__(self, have: int):
        super().__init__(
            f"needs >=2 level-I instances (have {have}); record more episodes first"
        )
        self.have = have


@dataclass(frozen=True)
class PhaseReport:
    phase: int
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    rules_applied: tuple[tuple[str, str], ...]
    dropped: tuple[str, ...] = ()


def format_report(report: PhaseReport) -> str:
    lines = [f"phase\t{report.phase}"]
    lines += [f"input\t{name}" for name in report.inputs]
    lines += [f"output\t{name}" for name in report.outputs]
    lines += [f"rule\t{rule}\t{detail}" for rule, detail in report.rules_applied]
    lines += [f"dropped\t{item}" for item in report.dropped]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Loop rolling

@dataclass(frozen=True)
class Roll:
    start: int
    period: int
    count: int

    @property
    def covered(self) -> int:
        return self.period * self.count


def loop_roll(
    items: Sequence,
    congruent: Callable | None = None,
    max_period: int = 5,
) -> Roll | None:
    """Find the best repeated block: at least two repetitions, period up
    to max_period. Prefers more covered items, then a shorter period,
    then an earlier start. Returns None when nothing repeats."""
    if congruent is None:
        congruent = lambda a, b: a == b
    n = len(items)
    best: tuple[tuple[int, int, int], Roll] | None = None
    for period in range(1, min(max_period, n // 2) + 1):
        for start in range(0, n - 2 * period + 1):
            count = 1
            while start + (count + 1) * period <= n and all(
                congruent(items[start + i], items[start + count * period + i])
                for i in range(period)
            ):
                count += 1
            if count < 2:
                continue
            roll = Roll(start, period, count)
            key = (roll.covered, -period, -start)
            if best is None or key > best[0]:
                best = (key, roll)
    return best[1] if best else None


# ---------------------------------------------------------------------------
# Small builders for generated bodies

def _n(name: str) -> NameExpr:
    return NameExpr(name)


def _fld(recv: str, name: str) -> FieldExpr:
    return FieldExpr(_n(recv), name)


def _call(recv: Expr | None, op: str, *args: Expr) -> CallExpr:
    return CallExpr(recv, op, tuple(args))


def _act(recv: Expr, verb: str, *args: Expr) -> ActionStmt:
    return ActionStmt(verb, recv, tuple(args))


def _asgn(target: Expr, value: Expr) -> AssignStmt:
    return AssignStmt(target, value)


def _inc(name: str) -> AssignStmt:
    return AssignStmt(_n(name), BinExpr("+", _n(name), IntExpr(1)))


def _while(cond: Expr, *body: Stmt) -> WhileStmt:
    return WhileStmt(cond, tuple(body))


def _if(cond: Expr, then: Sequence[Stmt], orelse: Sequence[Stmt] = ()) -> IfStmt:
    return IfStmt(cond, tuple(then), tuple(orelse))


def _ne_null(name: str) -> BinExpr:
    return BinExpr("!=", _n(name), NullExpr())


def _eq_null(name: str) -> BinExpr:
    return BinExpr("==", _n(name), NullExpr())


def _numlist_literal() -> Literal:
    return Literal(ir.NUMERALS)


def _title(domain: str) -> str:
    return domain[:1].upper() + domain[1:]


# ---------------------------------------------------------------------------
# Pass one: several episodes into one looped class

def antiunify_instances(
    instances: Sequence[ConceptUnit],
) -> tuple[ConceptUnit, PhaseReport]:
    """Fold level-I recordings of the same routine into one E1 class."""
    if len(instances) < 2:
        raise TooFewInstances(len(instances))
    for unit in instances:
        if unit.level is not Level.I or unit.kind is not UnitKind.INSTANCE:
            raise ValueError(f"{unit.name} is not a level-I instance")
    domains = sorted({unit.domain for unit in instances})
    if len(domains) > 1:
        raise DomainMismatch("instances span domains: " + ", ".join(domains))
    domain = domains[0]

    scripts = [_instance_script(unit) for unit in instances]
    stripped = sum(1 for s in scripts if s.stripped)

    rolls = []
    for unit, script in zip(instances, scripts):
        shapes = [_action_shape(unit, a) for a in script.actions]
        roll = loop_roll(shapes)
        if roll is None or roll.start != 0 or roll.covered != len(shapes):
            raise NoCommonSkeleton(f"{unit.name}: script is not one repeated routine")
        rolls.append(roll)
    period = rolls[0].period
    if any(r.period != period for r in rolls):
        raise NoCommonSkeleton("episodes repeat different routines")
    templates = {
        tuple(_action_shape(u, a) for a in s.actions[:period])
        for u, s in zip(instances, scripts)
    }
    if len(templates) > 1:
        raise NoCommonSkeleton("episodes repeat different routines")

    roles = _template_roles(instances, scripts, rolls, period)

    set_type = _set_type_for(roles.item_kind)
    elem_type = _elem_type_for(roles.item_kind)
    set_name = _set_attr_name(set_type)

    attributes = [Attribute("numlist", "intList", Visibility.PRIVATE, _numlist_literal())]
    for cname, ctype in roles.carried:
        attributes.append(Attribute(cname, ctype, Visibility.PRIVATE, Literal(cname)))
    attributes += [
        Attribute("p", "Person", Visibility.PRIVATE),
        Attribute(set_name, set_type, Visibility.PRIVATE),
        Attribute("result", "int", Visibility.PRIVATE),
    ]

    loop_body: list[Stmt] = []
    for verb, arg_roles in roles.template:
        args = []
        for role in arg_roles:
            if role[0] == "const":
                args.append(_n(role[1]))
            elif role[0] == "item":
                args.append(_n("item"))
            else:  # numeral succession
                args.append(_call(_n("numlist"), "Next"))
        loop_body.append(_act(_n("p"), verb, *args))
    loop_body.append(_inc("result"))
    loop_body.append(_asgn(_n("item"), _call(_n(set_name), "Next")))

    counting = Operation(
        "Counting",
        (),
        "int",
        Visibility.PROTECTED,
        (
            _asgn(_n("result"), IntExpr(0)),
            LocalDecl("item", elem_type),
            _asgn(_n("item"), _call(_n(set_name), "First")),
            _while(_ne_null("item"), *loop_body),
            ReturnStmt(_n("result")),
        ),
    )

    unit = ConceptUnit(
        name=_generalized_name(instances, domain),
        kind=UnitKind.CLASS,
        level=Level.E1,
        domain=domain,
        attributes=tuple(attributes),
        operations=(counting,),
    )
    diags = ir.validate(unit)
    if diags:
        raise RedescriptionError(
            "generated class breaks level discipline: "
            + "; ".join(str(d) for d in diags)
        )

    rules = [
        (
            "loop_roll",
            f"period={period} counts=" + "/".join(str(r.count) for r in rolls),
        ),
        ("bind_agent", f"{roles.agent} -> p"),
        ("bind_items", f"{roles.item_kind} -> {set_type} {set_name}"),
        ("bind_numerals", "Sound succession -> numlist.Next()"),
    ]
    if stripped:
        rules.insert(0, ("strip_confirmation", f"removed the repeated final Say in {stripped} episode(s)"))
    if roles.dropped_consts:
        rules.append(("drop_occasional", ", ".join(name for name, _ in roles.dropped_consts)))

    dropped = [f"const {ctype} {cname}" for cname, ctype in roles.dropped_consts]
    dropped += roles.dropped_setup
    report = PhaseReport(
        phase=1,
        inputs=tuple(u.name for u in instances),
        outputs=(unit.name,),
        rules_applied=tuple(rules),
        dropped=tuple(dropped),
    )
    return unit, report


@dataclass(frozen=True)
class _Script:
    setup: tuple[SetupStmt, ...]
    actions: tuple[ActionStmt, ...]
    stripped: bool


def _instance_script(unit: ConceptUnit) -> _Script:
    try:
        op = unit.operation(ir.IMPLICIT_OP)
    except ir.UnknownMember:
        raise NoCommonSkeleton(f"{unit.name} has no recorded script") from None
    setup = tuple(s for s in op.body if isinstance(s, SetupStmt))
    actions = [s for s in op.body if isinstance(s, ActionStmt)]
    stripped = False
    if len(actions) >= 2:
        last, prev = actions[-1], actions[-2]
        if (
            last.verb == "Say"
            and prev.verb == "Say"
            and _stmt_names(last) == _stmt_names(prev)
        ):
            actions = actions[:-1]
            stripped = True
    return _Script(setup, tuple(actions), stripped)


def _stmt_names(action: ActionStmt) -> tuple[str, ...]:
    names = []
    for expr in (action.recv, *action.args):
        if not isinstance(expr, NameExpr):
            raise NoCommonSkeleton("recorded actions must reference bound constants")
        names.append(expr.name)
    return tuple(names)


def _action_shape(unit: ConceptUnit, action: ActionStmt) -> tuple:
    names = _stmt_names(action)
    types = tuple(unit.attribute(name).type_ref for name in names)
    return (action.verb, types[0], types[1:])


@dataclass(frozen=True)
class _Roles:
    template: tuple[tuple[str, tuple[tuple, ...]], ...]  # verb, per-arg role
    agent: str
    item_kind: str
    carried: tuple[tuple[str, str], ...]  # fixed consts kept: (name, type)
    dropped_consts: tuple[tuple[str, str], ...]
    dropped_setup: tuple[str, ...]


def _template_roles(
    instances: Sequence[ConceptUnit],
    scripts: Sequence[_Script],
    rolls: Sequence[Roll],
    period: int,
) -> _Roles:
    first = instances[0]

    def column(pos: int, slot: int) -> list[list[str]]:
        # slot 0 is the receiver, 1.. are arguments; one list per instance
        out = []
        for script, roll in zip(scripts, rolls):
            names = []
            for it in range(roll.count):
                action = script.actions[it * period + pos]
                names.append(_stmt_names(action)[slot])
            out.append(names)
        return out

    # The agent: every action's receiver must be the same Person constant.
    agent = None
    for pos in range(period):
        cols = column(pos, 0)
        names = {name for col in cols for name in col}
        if len(names) != 1:
            raise NoCommonSkeleton("actions switch between performers")
        name = names.pop()
        if first.attribute(name).type_ref not in ir.AGENT_TYPES:
            raise NoCommonSkeleton("actions are not performed by an agent")
        if agent is None:
            agent = name
        elif agent != name:
            raise NoCommonSkeleton("actions switch between performers")
    assert agent is not None

    item_kind = None
    template: list[tuple[str, tuple[tuple, ...]]] = []
    referenced: set[str] = {agent}
    for pos in range(period):
        action = scripts[0].actions[pos]
        arg_roles = []
        for slot in range(1, len(_stmt_names(action))):
            cols = column(pos, slot)
            names = {name for col in cols for name in col}
            kinds = {instances[i].attribute(n).type_ref for i, col in enumerate(cols) for n in col}
            if len(kinds) != 1:
                raise NoCommonSkeleton("one argument slot mixes constant kinds")
            kind = kinds.pop()
            referenced.update(names)
            if len(names) == 1 and all(len(set(col)) == 1 for col in cols):
                arg_roles.append(("const", names.pop(), kind))
                continue
            if kind in ir.TOKEN_TYPES:
                for col in cols:
                    if tuple(col) != ir.NUMERALS[: len(col)]:
                        raise NoCommonSkeleton(
                            "sounds do not follow the shared numeral order"
                        )
                arg_roles.append(("numeral",))
                continue
            for col in cols:
                if len(set(col)) != len(col):
                    raise NoCommonSkeleton("an object is pointed at twice in one pass")
            if item_kind is None:
                item_kind = kind
            elif item_kind != kind:
                raise NoCommonSkeleton("more than one varying object kind")
            arg_roles.append(("item",))
        template.append((action.verb, tuple(arg_roles)))
    if item_kind is None:
        raise NoCommonSkeleton("no varying objects to collect")

    carried = []
    for verb, arg_roles in template:
        for role in arg_roles:
            if role[0] == "const" and (role[1], role[2]) not in carried:
                carried.append((role[1], role[2]))

    dropped_consts = []
    for attr in first.attributes:
        if attr.name not in referenced:
            dropped_consts.append((attr.name, attr.type_ref))
    dropped_setup = [
        f"{s.pred}({', '.join(s.args)})" for s in scripts[0].setup
    ]
    return _Roles(
        template=tuple(template),
        agent=agent,
        item_kind=item_kind,
        carried=tuple(carried),
        dropped_consts=tuple(dropped_consts),
        dropped_setup=tuple(dropped_setup),
    )


def _set_type_for(item_kind: str) -> str:
    for type_ref, elem in ir.SET_TYPES.items():
        if elem == item_kind:
            return type_ref
    return "objectSet"


def _elem_type_for(item_kind: str) -> str:
    for type_ref, elem in ir.ELEMENT_TYPES.items():
        if elem == item_kind:
            return type_ref
    return "OBJECT"


def _set_attr_name(set_type: str) -> str:
    if "_" in set_type:
        return set_type.split("_")[0].lower() + "_set"
    return set_type[: -len("Set")].lower() + "_set"


def _generalized_name(instances: Sequence[ConceptUnit], domain: str) -> str:
    prefix = os.path.commonprefix([u.name for u in instances])
    match = re.match(r"[A-Za-z]+", prefix)
    alpha = match.group(0) if match else "Concept"
    title = _title(domain)
    return alpha if alpha.endswith(title) else alpha + title


# ---------------------------------------------------------------------------
# Pass two: one class into shared, callable parts

def generalize_to_e2(
    unit: ConceptUnit,
) -> tuple[tuple[ConceptUnit, ConceptUnit], PhaseReport]:
    """Widen a counting class beyond its home domain.

    Returns the reworked class plus the Globals unit that now owns the
    numeral list."""
    if unit.level is not Level.E1 or unit.kind is not UnitKind.CLASS:
        raise ValueError(f"{unit.name} is not a level-E1 class")
    roles = _counting_roles(unit)

    title = _title(unit.domain)
    base = unit.name[: -len(title)] if (
        unit.name.endswith(title) and len(unit.name) > len(title)
    ) else unit.name

    widened = sorted(
        f"{t} -> {ir.widen_type(t)}"
        for t in _collection_types_used(unit)
        if ir.widen_type(t) != t
    )

    globals_unit = ConceptUnit(
        name=ir.GLOBALS_UNIT,
        kind=UnitKind.CLASS,
        level=Level.E2,
        domain="numbers",
        attributes=(
            Attribute("numlist", "intList", Visibility.PUBLIC, roles.numlist.const),
        ),
    )
    e2_unit = _canonical_e2(base)
    diags = ir.validate(e2_unit) + ir.validate(globals_unit)
    if diags:
        raise RedescriptionError(
            "generalized class breaks level discipline: "
            + "; ".join(str(d) for d in diags)
        )

    dropped = [
        f"local {decl.type_ref} {decl.name}"
        for decl in _op_locals(unit)
        if ir.is_collection_type(decl.type_ref)
        and ir.collection_element(decl.type_ref) == roles.item_element
    ]
    report = PhaseReport(
        phase=2,
        inputs=(unit.name,),
        outputs=(e2_unit.name, globals_unit.name),
        rules_applied=(
            ("widen_collection_type", ", ".join(widened) or "already widened"),
            ("hoist_numlist_global", f"{roles.numlist.name} now lives in {ir.GLOBALS_UNIT}"),
            ("befriend_globals", f"friend {ir.GLOBALS_UNIT}"),
            ("split_index", "Index(object_set)"),
            ("split_one_to_one_map", "OneToOneMap(object_list)"),
            ("split_get_result", "GetResult()"),
            ("emit_driver", f"{base}() = Index; OneToOneMap; GetResult"),
            ("publicize_operations", "every operation now Public"),
            ("protect_attributes", "attributes now Protected"),
            ("synthesize_fetch_objects", "FetchObjects(from_set, k)"),
        ),
        dropped=tuple(dropped),
    )
    return (e2_unit, globals_unit), report


@dataclass(frozen=True)
class _CountingRoles:
    numlist: Attribute
    agent: Attribute
    collection: Attribute
    result: Attribute
    item_element: str | None


def _counting_roles(unit: ConceptUnit) -> _CountingRoles:
    numlist = agent = collection = result = None
    for attr in unit.attributes:
        if (
            attr.is_const
            and attr.const.is_symbols
            and ir.collection_element(attr.type_ref) == ir.TOKEN_ELEM
        ):
            numlist = numlist or attr
        elif not attr.is_const and attr.type_ref in ir.AGENT_TYPES:
            agent = agent or attr
        elif not attr.is_const and attr.type_ref in ir.SET_TYPES:
            collection = collection or attr
        elif not attr.is_const and attr.type_ref == "int":
            result = result or attr
    missing = [
        label
        for label, attr in (
            ("a numeral list", numlist),
            ("an agent", agent),
            ("an object collection", collection),
            ("an int result", result),
        )
        if attr is None
    ]
    if missing:
        raise RedescriptionError(
            f"{unit.name} is not a counting class (missing {', '.join(missing)})"
        )
    if not _says_successive_numerals(unit, numlist.name):
        raise RedescriptionError(
            f"{unit.name} is not a counting class (no loop says successive numerals)"
        )
    return _CountingRoles(
        numlist=numlist,
        agent=agent,
        collection=collection,
        result=result,
        item_element=ir.SET_TYPES.get(collection.type_ref),
    )


def _says_successive_numerals(unit: ConceptUnit, numlist_name: str) -> bool:
    says = points = False
    for stmt in ir.iter_statements(unit):
        if not isinstance(stmt, ActionStmt):
            continue
        if stmt.verb == "PointTo":
            points = True
        if stmt.verb == "Say" and len(stmt.args) == 1:
            arg = stmt.args[0]
            if isinstance(arg, CallExpr) and arg.op == "Next":
                says = True
    return says and points


def _collection_types_used(unit: ConceptUnit) -> set[str]:
    used = {a.type_ref for a in unit.attributes if ir.is_collection_type(a.type_ref)}
    for decl in _op_locals(unit):
        if ir.is_collection_type(decl.type_ref):
            used.add(decl.type_ref)
    return used


def _op_locals(unit: ConceptUnit) -> list[LocalDecl]:
    return [s for s in ir.iter_statements(unit) if isinstance(s, LocalDecl)]


def _canonical_e2(name: str) -> ConceptUnit:
    index_op = Operation(
        "Index",
        (Param("object_set", "objectSet"),),
        None,
        Visibility.PUBLIC,
        (
            _while(
                NotExpr(_call(_n("object_set"), "Empty")),
                LocalDecl("an_object", "OBJECT"),
                _asgn(_n("an_object"), _call(_n("object_set"), "SelectOneRandom")),
                _act(_n("object_list"), "Append", _n("an_object")),
                _act(_n("object_set"), "Delete", _n("an_object")),
            ),
        ),
    )
    map_op = Operation(
        "OneToOneMap",
        (Param("object_list", "objectList"),),
        None,
        Visibility.PUBLIC,
        (
            _asgn(_n("result"), IntExpr(0)),
            LocalDecl("item", "OBJECT"),
            _asgn(_n("item"), _call(_n("object_list"), "First")),
            _while(
                _ne_null("item"),
                _act(_n("p"), "PointTo", _n("item")),
                _act(_n("p"), "Say", _call(_n("numlist"), "Next")),
                _inc("result"),
                _asgn(_n("item"), _call(_n("object_list"), "Next")),
            ),
        ),
    )
    get_result = Operation(
        "GetResult",
        (),
        "int",
        Visibility.PUBLIC,
        (ReturnStmt(_n("result")),),
    )
    driver = Operation(
        name,
        (),
        "int",
        Visibility.PUBLIC,
        (
            CallStmt(None, "Index", (_n("object_set"),)),
            CallStmt(None, "OneToOneMap", (_n("object_list"),)),
            ReturnStmt(_call(None, "GetResult")),
        ),
    )
    fetch = Operation(
        "FetchObjects",
        (Param("from_set", "objectSet"), Param("k", "int")),
        None,
        Visibility.PUBLIC,
        (
            CallStmt(None, "Index", (_n("from_set"),)),
            CallStmt(None, "OneToOneMap", (_n("object_list"),)),
            _if(
                BinExpr("<", _call(None, "GetResult"), _n("k")),
                (_act(_n("p"), "Say", _n("ERROR")),),
                (
                    LocalDecl("i", "int"),
                    _asgn(_n("i"), IntExpr(0)),
                    _while(
                        BinExpr("<", _n("i"), _n("k")),
                        LocalDecl("one", "OBJECT"),
                        _asgn(_n("one"), _call(_n("from_set"), "SelectOneRandom")),
                        _act(_n("from_set"), "Delete", _n("one")),
                        _act(_n("p"), "TakeAway", _n("one")),
                        _inc("i"),
                    ),
                ),
            ),
        ),
    )
    return ConceptUnit(
        name=name,
        kind=UnitKind.CLASS,
        level=Level.E2,
        domain="numbers",
        attributes=(
            Attribute("p", "Person", Visibility.PROTECTED),
            Attribute("object_set", "objectSet", Visibility.PROTECTED),
            Attribute("object_list", "objectList", Visibility.PROTECTED),
            Attribute("result", "int", Visibility.PROTECTED),
            Attribute("ERROR", "Sound", Visibility.PROTECTED, Literal("ERROR")),
        ),
        operations=(index_op, map_op, get_result, driver, fetch),
        friends=(ir.GLOBALS_UNIT,),
    )


# ---------------------------------------------------------------------------
# Pass three: one class into cooperating concepts

def decompose_to_e3(
    unit: ConceptUnit,
    shared: ConceptUnit | None = None,
) -> tuple[tuple[ConceptUnit, ConceptUnit, ConceptUnit], PhaseReport]:
    """Factor a generalized counting class into ordinal, set, and
    counting concepts. `shared` supplies the numeral list (normally the
    Globals unit); without it the standard succession is used."""
    if unit.level is not Level.E2 or unit.kind is not UnitKind.CLASS:
        raise ValueError(f"{unit.name} is not a level-E2 class")
    has_collection = any(
        not a.is_const and ir.is_collection_type(a.type_ref) for a in unit.attributes
    )
    if not has_collection or not _says_successive_numerals(unit, "numlist"):
        raise RedescriptionError(f"{unit.name} is not a counting class")

    numlist = _numlist_literal()
    if shared is not None:
        try:
            attr = shared.attribute("numlist")
        except ir.UnknownMember:
            attr = None
        if attr is not None and attr.is_const and attr.const.is_symbols:
            numlist = attr.const

    ordinal = _canonical_ordinal(numlist)
    set_cls = _canonical_set()
    counting = _canonical_e3_counting(unit.name)
    units = (ordinal, set_cls, counting)
    diags = [d for u in units for d in ir.validate(u)] + ir.validate_set(list(units))
    if diags:
        raise RedescriptionError(
            "decomposed units break level discipline: "
            + "; ".join(str(d) for d in diags)
        )

    inputs = (unit.name,) if shared is None else (unit.name, shared.name)
    report = PhaseReport(
        phase=3,
        inputs=inputs,
        outputs=tuple(u.name for u in units),
        rules_applied=(
            ("extract_successor_knowledge", "GetPre/GetNext/GetCurrent over numlist"),
            ("reify_collection_concept", "Set: objlist plus cardinalSum"),
            (
                "declare_item_flags",
                "type NO_OBLIGATORY, sequence NO_IMPORTANT, arrangement NO_IMPORTANT",
            ),
            ("rewire_counting_via_ordinals", "Say(OrdinalNumber.GetNext())"),
            ("generalize_map_to_two_sets", "OneToOneMap(Set, Set) points the surplus"),
            ("cache_cardinal_sum", "counting stores set1.cardinalSum"),
            ("publicize_everything", "every member Public"),
        ),
    )
    return units, report


def _canonical_ordinal(numlist: Literal) -> ConceptUnit:
    get_pre = Operation(
        "GetPre",
        (),
        "int",
        Visibility.PUBLIC,
        (
            _asgn(_n("pre"), BinExpr("-", _n("current"), IntExpr(1))),
            ReturnStmt(_n("pre")),
        ),
    )
    get_next = Operation(
        "GetNext",
        (),
        "Sound",
        Visibility.PUBLIC,
        (
            _asgn(_n("pre"), _n("current")),
            _inc("current"),
            _asgn(_n("succ"), BinExpr("+", _n("current"), IntExpr(1))),
            ReturnStmt(_call(_n("numlist"), "Next")),
        ),
    )
    get_current = Operation(
        "GetCurrent",
        (),
        "int",
        Visibility.PUBLIC,
        (ReturnStmt(_n("current")),),
    )
    return ConceptUnit(
        name="OrdinalNumber",
        kind=UnitKind.CLASS,
        level=Level.E3,
        domain="numbers",
        attributes=(
            Attribute("numlist", "intList", Visibility.PUBLIC, numlist),
            Attribute("current", "int", Visibility.PUBLIC),
            Attribute("pre", "int", Visibility.PUBLIC),
            Attribute("succ", "int", Visibility.PUBLIC),
        ),
        operations=(get_pre, get_next, get_current),
    )


def _canonical_set() -> ConceptUnit:
    return ConceptUnit(
        name="Set",
        kind=UnitKind.CLASS,
        level=Level.E3,
        domain="numbers",
        attributes=(
            Attribute("objlist", "objectList", Visibility.PUBLIC),
            Attribute(
                "item_type_be_similar",
                "Boolean",
                Visibility.PUBLIC,
                Literal("NO_OBLIGATORY"),
            ),
            Attribute(
                "item_sequence", "Boolean", Visibility.PUBLIC, Literal("NO_IMPORTANT")
            ),
            Attribute(
                "item_arrangement",
                "Boolean",
                Visibility.PUBLIC,
                Literal("NO_IMPORTANT"),
            ),
            Attribute("cardinalSum", "int", Visibility.PUBLIC),
        ),
    )


def _canonical_e3_counting(name: str) -> ConceptUnit:
    def next_of(set_name: str) -> CallExpr:
        return _call(FieldExpr(_n(set_name), "objlist"), "Next")

    counting_op = Operation(
        name,
        (),
        "int",
        Visibility.PUBLIC,
        (
            LocalDecl("result", "int"),
            _asgn(_n("result"), IntExpr(0)),
            LocalDecl("item", "OBJECT"),
            _asgn(_n("item"), _call(FieldExpr(_n("set1"), "objlist"), "First")),
            _while(
                _ne_null("item"),
                _act(_n("p"), "PointTo", _n("item")),
                _act(_n("p"), "Say", _call(_n("OrdinalNumber"), "GetNext")),
                _inc("result"),
                _asgn(_n("item"), next_of("set1")),
            ),
            _asgn(_fld("set1", "cardinalSum"), _n("result")),
            ReturnStmt(_n("result")),
        ),
    )
    can_match = Operation(
        "Can_Match_Discretely",
        (Param("set1", "Set"), Param("set2", "Set")),
        "Boolean",
        Visibility.PUBLIC,
        (
            LocalDecl("a", "OBJECT"),
            LocalDecl("b", "OBJECT"),
            _asgn(_n("a"), next_of("set1")),
            _asgn(_n("b"), next_of("set2")),
            _while(
                _ne_null("a"),
                _if(_eq_null("b"), (ReturnStmt(BoolExpr(False)),)),
                _asgn(_n("a"), next_of("set1")),
                _asgn(_n("b"), next_of("set2")),
            ),
            _if(
                _eq_null("b"),
                (ReturnStmt(BoolExpr(True)),),
                (ReturnStmt(BoolExpr(False)),),
            ),
        ),
    )
    map_op = Operation(
        "OneToOneMap",
        (Param("set1", "Set"), Param("set2", "Set")),
        "int",
        Visibility.PUBLIC,
        (
            LocalDecl("paired", "int"),
            LocalDecl("surplus", "int"),
            _asgn(_n("paired"), IntExpr(0)),
            _asgn(_n("surplus"), IntExpr(0)),
            LocalDecl("a", "OBJECT"),
            LocalDecl("b", "OBJECT"),
            _asgn(_n("a"), next_of("set1")),
            _asgn(_n("b"), next_of("set2")),
            _while(
                _ne_null("a"),
                _if(
                    _eq_null("b"),
                    (
                        _act(_n("p"), "PointTo", _n("a")),
                        _inc("surplus"),
                        _asgn(_n("a"), next_of("set1")),
                    ),
                    (
                        _inc("paired"),
                        _asgn(_n("a"), next_of("set1")),
                        _asgn(_n("b"), next_of("set2")),
                    ),
                ),
            ),
            _while(
                _ne_null("b"),
                _act(_n("p"), "PointTo", _n("b")),
                _inc("surplus"),
                _asgn(_n("b"), next_of("set2")),
            ),
            _if(
                BinExpr("==", _n("surplus"), IntExpr(0)),
                (_asgn(_fld("set2", "cardinalSum"), _fld("set1", "cardinalSum")),),
            ),
            ReturnStmt(_n("paired")),
        ),
    )
    fetch = Operation(
        "FetchObjects",
        (Param("from_set", "Set"), Param("k", "int")),
        None,
        Visibility.PUBLIC,
        (
            LocalDecl("have", "int"),
            _asgn(_n("have"), IntExpr(0)),
            LocalDecl("item", "OBJECT"),
            _asgn(_n("item"), next_of("from_set")),
            _while(
                _ne_null("item"),
                _act(_n("p"), "PointTo", _n("item")),
                _act(_n("p"), "Say", _call(_n("OrdinalNumber"), "GetNext")),
                _inc("have"),
                _asgn(_n("item"), next_of("from_set")),
            ),
            _asgn(_fld("from_set", "cardinalSum"), _n("have")),
            _if(
                BinExpr("<", _n("have"), _n("k")),
                (_act(_n("p"), "Say", _n("ERROR")),),
                (
                    LocalDecl("i", "int"),
                    _asgn(_n("i"), IntExpr(0)),
                    _while(
                        BinExpr("<", _n("i"), _n("k")),
                        LocalDecl("one", "OBJECT"),
                        _asgn(
                            _n("one"),
                            _call(FieldExpr(_n("from_set"), "objlist"), "SelectOneRandom"),
                        ),
                        _act(FieldExpr(_n("from_set"), "objlist"), "Delete", _n("one")),
                        _act(_n("p"), "TakeAway", _n("one")),
                        _inc("i"),
                    ),
                ),
            ),
        ),
    )
    return ConceptUnit(
        name=name,
        kind=UnitKind.CLASS,
        level=Level.E3,
        domain="numbers",
        attributes=(
            Attribute("p", "Person", Visibility.PUBLIC),
            Attribute("set1", "Set", Visibility.PUBLIC),
            Attribute("set2", "Set", Visibility.PUBLIC),
            Attribute("ERROR", "Sound", Visibility.PUBLIC, Literal("ERROR")),
        ),
        operations=(counting_op, can_match, map_op, fetch),
    )


# ---------------------------------------------------------------------------
# Mastery

def mastery_check(records: Iterable[tuple[str, object]], threshold: int = 3) -> bool:
    """Ready to redescribe once enough distinct tasks are solved.

    records holds (task_id, outcome) pairs in time order; only each
    task's latest outcome counts. An outcome may be a string kind or
    anything with a .kind attribute."""
    latest: dict[str, str] = {}
    for task_id, outcome in records:
        kind = getattr(outcome, "kind", outcome)
        latest[task_id] = str(kind)
    return sum(1 for kind in latest.values() if kind == "Solved") >= threshold
