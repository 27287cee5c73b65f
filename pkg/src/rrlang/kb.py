"""Knowledge base: every unit the agent has, at every level it ever
reached, plus the experience log that drives advancement.

Redescription appends; it never replaces. A knowledge base therefore
keeps an instance recording alongside the class that grew out of it,
keyed by (name, level).

On disk a knowledge base is a directory: one canonical .rr file per
unit and a manifest.tsv index whose rows are either
``unit<TAB>name<TAB>level<TAB>domain<TAB>file`` or
``log<TAB>unit<TAB>task<TAB>outcome<TAB>tick``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import dsl, interpreter as itp, ir, redescription
from .redescription import PhaseReport

MANIFEST = "manifest.tsv"


class KbError(Exception):
    pass


class EmptyTrace(KbError):
    pass


class DuplicateUnit(KbError):
    pass


class InvalidUnit(KbError):
    def __init__(self, diagnostics: Sequence[ir.Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in diagnostics))


class IoFailure(KbError):
    pass


class ManifestError(dsl.ParseFailure):
    """The on-disk index contradicts itself."""

    def __init__(self, message: str, origin: str):
        super().__init__([dsl.ParseError(0, 0, "a consistent manifest", message)], origin)


@dataclass(frozen=True)
class LogEntry:
    unit: str
    task: str
    outcome: str
    tick: int


# Trace verbs and the action statements they record to.
_VERB_FOR_EVENT = {
    "Moved": "Move",
    "PointedTo": "PointTo",
    "Said": "Say",
    "TookAway": "TakeAway",
}


class KnowledgeBase:
    """Mutable store of concept units plus the mastery log."""

    type_registry = ir.WIDENINGS

    def __init__(self) -> None:
        self._units: dict[tuple[str, ir.Level], ir.ConceptUnit] = {}
        self.log: list[LogEntry] = []

    # -- access ------------------------------------------------------

    def __iter__(self) -> Iterator[ir.ConceptUnit]:
        return iter(self._units.values())

    def __len__(self) -> int:
        return len(self._units)

    def units_at(self, level: ir.Level) -> tuple[ir.ConceptUnit, ...]:
        return tuple(u for u in self._units.values() if u.level is level)

    def unit(self, name: str, level: ir.Level | None = None) -> ir.ConceptUnit | None:
        """Find a unit by name; with no level, the most redescribed one."""
        if level is not None:
            return self._units.get((name, level))
        found = [u for u in self._units.values() if u.name == name]
        if not found:
            return None
        return max(found, key=lambda u: u.level.rank)

    @property
    def globals_unit(self) -> ir.ConceptUnit | None:
        return self.unit(ir.GLOBALS_UNIT)

    def domains(self) -> tuple[str, ...]:
        return tuple(sorted({
            u.domain for u in self._units.values() if u.name != ir.GLOBALS_UNIT
        }))

    def kb_by_level(self) -> dict[ir.Level, list[ir.ConceptUnit]]:
        """Level slices for the matrix. Shared Globals data joins every
        slice from E2 up."""
        slices: dict[ir.Level, list[ir.ConceptUnit]] = {}
        shared = self.globals_unit
        for level in ir.Level:
            units = list(self.units_at(level))
            if (
                shared is not None
                and level.rank >= ir.Level.E2.rank
                and all(u.name != ir.GLOBALS_UNIT for u in units)
            ):
                units.append(shared)
            slices[level] = units
        return slices

    # -- mutation ----------------------------------------------------

    def add_unit(self, unit: ir.ConceptUnit) -> ir.ConceptUnit:
        problems = ir.validate(unit)
        if problems:
            raise InvalidUnit(problems)
        key = (unit.name, unit.level)
        if key in self._units:
            raise DuplicateUnit(f"{unit.name} at {unit.level.name} already stored")
        self._units[key] = unit
        return unit

    def record_outcome(self, unit_name: str, task_id: str, outcome: object) -> LogEntry:
        kind = str(getattr(outcome, "kind", outcome))
        entry = LogEntry(unit_name, task_id, kind, tick=len(self.log) + 1)
        self.log.append(entry)
        return entry

    def record_instance(
        self,
        trace: Sequence[itp.TraceEvent],
        world: itp.World,
        domain: str,
        concept: str = "Counting",
    ) -> ir.ConceptUnit:
        """Code one episode independently: constants for everything the
        episode touched, setup predicates from the scene, and the
        actions verbatim."""
        if not trace:
            raise EmptyTrace("nothing happened; there is no episode to record")
        said: list[str] = []
        pointed: list[str] = []
        for event in trace:
            if event.verb == "Said" and event.arg not in said:
                said.append(event.arg)
            elif event.verb == "PointedTo" and event.arg not in pointed:
                pointed.append(event.arg)
        agent = next(
            (e for e, (kind, _) in world.entities.items() if kind in ir.AGENT_TYPES),
            None,
        )
        hand = next(
            (e for e, (kind, _) in world.entities.items() if kind == "Hand"), None
        )
        if agent is None or hand is None:
            raise KbError("the scene lacks an agent to attribute the actions to")
        rooms = [e for e, (kind, _) in world.entities.items() if kind == "Room"]
        tables = [e for e, (kind, _) in world.entities.items() if kind == "Table"]

        attrs = [
            ir.Attribute(tok, "Sound", ir.Visibility.PRIVATE, ir.Literal(tok))
            for tok in said
        ]
        attrs.append(
            ir.Attribute(agent, "Person", ir.Visibility.PRIVATE, ir.Literal(agent))
        )
        for room in rooms:
            attrs.append(
                ir.Attribute(room, "Room", ir.Visibility.PRIVATE, ir.Literal(room))
            )
        for table in tables:
            attrs.append(
                ir.Attribute(table, "Table", ir.Visibility.PRIVATE, ir.Literal(table))
            )
        for eid in pointed:
            kind = world.entities[eid][0]
            attrs.append(
                ir.Attribute(eid, kind, ir.Visibility.PRIVATE, ir.Literal(eid))
            )
        attrs.append(
            ir.Attribute(hand, "Hand", ir.Visibility.PRIVATE, ir.Literal(hand))
        )

        body: list[ir.SetupStmt | ir.ActionStmt] = []
        for room in rooms:
            body.append(ir.SetupStmt("In", (agent, room)))
        for eid in pointed:
            for table in tables:
                body.append(ir.SetupStmt("On", (eid, table)))
        group = world.entities[pointed[0]][1] if pointed else None
        if group is not None and world.arrangements.get(group) == "Line":
            body.append(ir.SetupStmt("InLine", tuple(world.containers[group])))
        me = ir.NameExpr(agent)
        for event in trace:
            verb = _VERB_FOR_EVENT.get(event.verb)
            if verb is None:
                raise KbError(f"cannot code a {event.verb} event into an episode")
            arg = event.arg if event.arg is not None else hand
            body.append(ir.ActionStmt(verb, me, (ir.NameExpr(arg),)))

        ordinal = 1 + sum(
            1
            for u in self._units.values()
            if u.kind is ir.UnitKind.INSTANCE and u.domain == domain
        )
        unit = ir.ConceptUnit(
            name=f"{concept}_{domain}_{ordinal}",
            kind=ir.UnitKind.INSTANCE,
            level=ir.Level.I,
            domain=domain,
            attributes=tuple(attrs),
            operations=(
                ir.Operation(
                    ir.IMPLICIT_OP,
                    params=(),
                    returns=None,
                    visibility=ir.Visibility.PRIVATE,
                    body=tuple(body),
                    implicit=True,
                ),
            ),
        )
        return self.add_unit(unit)

    # -- advancement -------------------------------------------------

    @staticmethod
    def _base_name(unit_name: str, domain: str) -> str:
        """The concept a unit carries, shorn of recording ordinals and
        the domain suffix generalization appends."""
        name = unit_name
        if f"_{domain}_" in name:
            name = name.split("_", 1)[0]
        title = domain.title()
        if name.endswith(title) and len(name) > len(title):
            name = name[: -len(title)]
        return name

    def _chain(self, domain: str):
        """A domain's redescription chain. Instances and the E1 class
        keep the domain tag; the later levels are tied to the chain by
        the concept's base name, since generalization moves them into
        the shared numbers domain."""
        instances = [
            u for u in self._units.values()
            if u.kind is ir.UnitKind.INSTANCE and u.domain == domain
        ]
        e1 = [
            u for u in self._units.values()
            if u.level is ir.Level.E1
            and u.kind is ir.UnitKind.CLASS
            and u.domain == domain
        ]
        heads = e1 or instances
        if not heads:
            return None
        base = self._base_name(heads[0].name, domain)
        e2 = self.unit(base, ir.Level.E2)
        e3 = self.unit(base, ir.Level.E3)
        names = {u.name for u in instances} | {u.name for u in e1}
        names.update(u.name for u in (e2, e3) if u is not None)
        return instances, e1, e2, e3, names

    def advance(self, threshold: int = 3) -> list[PhaseReport]:
        """Fire at most one redescription phase per mastered domain.

        Chains are rooted at recorded experience: a domain with neither
        instances nor an E1 class does not advance on its own. Inputs
        stay stored; only new units are appended."""
        reports: list[PhaseReport] = []
        for domain in self.domains():
            chain = self._chain(domain)
            if chain is None:
                continue
            instances, e1, e2, e3, names = chain
            records = [
                (entry.task, entry.outcome)
                for entry in self.log
                if entry.unit in names
            ]
            if not redescription.mastery_check(records, threshold):
                continue
            if not e1:
                if len(instances) < 2:
                    continue
                unit, report = redescription.antiunify_instances(instances)
                self.add_unit(unit)
                reports.append(report)
            elif e2 is None:
                (unit, shared), report = redescription.generalize_to_e2(e1[0])
                self.add_unit(unit)
                if self.unit(shared.name, shared.level) is None:
                    self.add_unit(shared)
                reports.append(report)
            elif e3 is None:
                units, report = redescription.decompose_to_e3(
                    e2, shared=self.globals_unit
                )
                for unit in units:
                    if self.unit(unit.name, unit.level) is None:
                        self.add_unit(unit)
                reports.append(report)
        return reports

    # -- integrity ---------------------------------------------------

    def validate(self) -> list[ir.Diagnostic]:
        problems = [d for u in self._units.values() for d in ir.validate(u)]
        problems.extend(ir.validate_set(list(self._units.values())))
        return problems

    # -- persistence -------------------------------------------------

    def save(self, path: str | Path) -> Path:
        problems = self.validate()
        if problems:
            raise InvalidUnit(problems)
        root = Path(path)
        try:
            root.mkdir(parents=True, exist_ok=True)
            rows = []
            for unit in sorted(
                self._units.values(), key=lambda u: (u.level.rank, u.name)
            ):
                filename = f"{unit.name}_{unit.level.name}.rr"
                text = dsl.print_canonical([unit]).text
                (root / filename).write_text(text, encoding="utf-8", newline="")
                rows.append(
                    f"unit\t{unit.name}\t{unit.level.name}\t{unit.domain}\t{filename}"
                )
            for entry in self.log:
                rows.append(
                    f"log\t{entry.unit}\t{entry.task}\t{entry.outcome}\t{entry.tick}"
                )
            (root / MANIFEST).write_text(
                "\n".join(rows) + ("\n" if rows else ""), encoding="utf-8", newline=""
            )
        except OSError as exc:
            raise IoFailure(f"cannot write knowledge base at {root}: {exc}") from exc
        return root

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        root = Path(path)
        kb = cls()
        manifest = root / MANIFEST
        if not manifest.exists():
            if root.exists():
                return kb
            raise IoFailure(f"no knowledge base at {root}")
        try:
            lines = manifest.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoFailure(f"cannot read {manifest}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if parts[0] == "unit" and len(parts) == 5:
                _, name, level_name, domain, filename = parts
                try:
                    text = (root / filename).read_text(encoding="utf-8")
                except OSError as exc:
                    raise IoFailure(f"cannot read {root / filename}: {exc}") from exc
                units = dsl.parse(dsl.SourceText(text, origin=filename))
                match = [u for u in units if u.name == name]
                if not match:
                    raise ManifestError(
                        f"{filename} does not define unit {name!r}", str(manifest)
                    )
                unit = match[0]
                if unit.level.name != level_name or unit.domain != domain:
                    raise ManifestError(
                        f"{filename} disagrees with the manifest about {name!r}",
                        str(manifest),
                    )
                try:
                    kb.add_unit(unit)
                except DuplicateUnit as exc:
                    raise ManifestError(str(exc), str(manifest)) from exc
            elif parts[0] == "log" and len(parts) == 5:
                _, unit_name, task, outcome, tick = parts
                kb.log.append(LogEntry(unit_name, task, outcome, int(tick)))
            else:
                raise ManifestError(
                    f"line {lineno}: unrecognized row {line!r}", str(manifest)
                )
        return kb

    @classmethod
    def canonical(cls) -> "KnowledgeBase":
        """The fixture chain: one counting concept at every level."""
        kb = cls()
        for fixture in dsl.FIXTURE_NAMES:
            if fixture in ("fetch_objects", "bus_seats", "conservation"):
                continue  # task apparatus, not knowledge
            for unit in dsl.load_fixture(fixture):
                if kb.unit(unit.name, unit.level) is None:
                    kb.add_unit(unit)
        return kb


def canonical_kb_by_level() -> dict[ir.Level, list[ir.ConceptUnit]]:
    return KnowledgeBase.canonical().kb_by_level()
