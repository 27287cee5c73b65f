"""Command line for the concept engine.

Subcommands: parse a source file, run redescription passes, run one
task, print the capability matrix, dump a task trace, and verbalize a
fully public unit. Exit codes: 0 success, 1 diagnostics or diffs
present, 2 usage error, 3 I/O error.

The knowledge base defaults to the built-in fixture chain; point --kb
(or the RR_KB environment variable) at a saved directory to use your
own.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import capability, dsl, interpreter as itp, ir, kb as kbmod, redescription, tasks

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_IO = 3


@dataclass(frozen=True)
class CliConfig:
    kb_path: Path | None
    seed: int
    step_limit: int
    threshold: int
    output: str

    def __post_init__(self) -> None:
        if self.step_limit <= 0:
            raise ValueError("step limit must be positive")
        if self.threshold < 1:
            raise ValueError("threshold must be at least 1")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _add_kb_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--kb",
        metavar="DIR",
        default=None,
        help="knowledge base directory (default: $RR_KB, else built-in fixtures)",
    )


def _config(args: argparse.Namespace) -> CliConfig:
    raw = getattr(args, "kb", None) or os.environ.get("RR_KB")
    return CliConfig(
        kb_path=Path(raw) if raw else None,
        seed=getattr(args, "seed", 0),
        step_limit=itp.DEFAULT_STEP_LIMIT,
        threshold=getattr(args, "threshold", 3),
        output=getattr(args, "output", "text"),
    )


def _load_kb(config: CliConfig) -> kbmod.KnowledgeBase:
    if config.kb_path is None:
        return kbmod.KnowledgeBase.canonical()
    return kbmod.KnowledgeBase.load(config.kb_path)


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_parse(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        units = dsl.parse(dsl.SourceText(text, origin=str(path)))
    except dsl.ParseFailure as exc:
        for error in exc.errors:
            print(f"{exc.origin}:{error}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    sys.stdout.write(dsl.print_canonical(units).text)
    return EXIT_OK


def _print_phase(report, units) -> None:
    sys.stdout.write(redescription.format_report(report))
    for unit in units:
        sys.stdout.write("\n")
        sys.stdout.write(dsl.print_canonical([unit]).text)


def _cmd_redescribe(args: argparse.Namespace, config: CliConfig) -> int:
    try:
        kb = _load_kb(config)
    except kbmod.IoFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    except dsl.ParseFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS

    produced: list[ir.ConceptUnit] = []
    try:
        if args.auto:
            reports = kb.advance(threshold=config.threshold)
            if not reports:
                print("nothing to redescribe: mastery not reached or chain complete")
            for report in reports:
                sys.stdout.write(redescription.format_report(report))
        elif args.phase == 1:
            by_domain: dict[str, list[ir.ConceptUnit]] = {}
            for unit in kb:
                if unit.kind is ir.UnitKind.INSTANCE:
                    by_domain.setdefault(unit.domain, []).append(unit)
            pool = max(by_domain.values(), key=len, default=[])
            unit, report = redescription.antiunify_instances(pool)
            produced = [unit]
            _print_phase(report, produced)
        elif args.phase == 2:
            sources = [
                u for u in kb
                if u.level is ir.Level.E1 and u.kind is ir.UnitKind.CLASS
            ]
            if not sources:
                print("no E1 class to generalize", file=sys.stderr)
                return EXIT_DIAGNOSTICS
            (unit, shared), report = redescription.generalize_to_e2(sources[0])
            produced = [unit, shared]
            _print_phase(report, produced)
        else:
            sources = [
                u for u in kb
                if u.level is ir.Level.E2
                and u.kind is ir.UnitKind.CLASS
                and u.name != ir.GLOBALS_UNIT
            ]
            if not sources:
                print("no E2 class to decompose", file=sys.stderr)
                return EXIT_DIAGNOSTICS
            units, report = redescription.decompose_to_e3(
                sources[0], shared=kb.globals_unit
            )
            produced = list(units)
            _print_phase(report, produced)
    except redescription.RedescriptionError as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS

    if args.out is not None:
        try:
            for unit in produced:
                if kb.unit(unit.name, unit.level) is None:
                    kb.add_unit(unit)
            kb.save(args.out)
        except kbmod.IoFailure as exc:
            print(exc, file=sys.stderr)
            return EXIT_IO
        except kbmod.KbError as exc:
            print(exc, file=sys.stderr)
            return EXIT_DIAGNOSTICS
    return EXIT_OK


def _resolve_run(args: argparse.Namespace, config: CliConfig):
    kb = _load_kb(config)
    level = ir.Level[args.level]
    task = tasks.build_task(args.task, config.seed)
    outcome, trace = tasks._run(task, list(kb), level)
    return task, level, outcome, trace


def _cmd_run(args: argparse.Namespace, config: CliConfig) -> int:
    try:
        task, level, outcome, trace = _resolve_run(args, config)
    except kbmod.IoFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    except (tasks.UnknownTaskId, dsl.ParseFailure) as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    suffix = f" ({outcome.reason})" if outcome.reason else ""
    print(f"{task.id} at {level.name} (seed {config.seed}): {outcome.kind}{suffix}")
    try:
        fd, path = tempfile.mkstemp(
            prefix=f"rr-{task.id}-{level.name}-", suffix=".tsv"
        )
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(itp.format_trace(trace))
    except OSError as exc:
        print(f"cannot write trace: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"trace: {path}")
    return EXIT_OK


def _cmd_trace(args: argparse.Namespace, config: CliConfig) -> int:
    try:
        _, _, _, trace = _resolve_run(args, config)
    except kbmod.IoFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    except (tasks.UnknownTaskId, dsl.ParseFailure) as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    sys.stdout.write(itp.format_trace(trace))
    return EXIT_OK


def _cmd_matrix(args: argparse.Namespace, config: CliConfig) -> int:
    try:
        kb = _load_kb(config)
        matrix = capability.build_matrix(kb.kb_by_level())
    except kbmod.IoFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    except (capability.MissingLevel, dsl.ParseFailure) as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    if args.diff:
        diffs = capability.compare_expected(matrix)
        if diffs:
            for line in diffs:
                print(line, file=sys.stderr)
            return EXIT_DIAGNOSTICS
        cells = len(matrix.cells)
        print(f"matrix matches golden ({cells} cells)")
        return EXIT_OK
    if config.output == "tsv":
        sys.stdout.write(capability.render_tsv(matrix))
    else:
        sys.stdout.write(capability.render_text(matrix))
    return EXIT_OK


def _cmd_verbalize(args: argparse.Namespace, config: CliConfig) -> int:
    try:
        kb = _load_kb(config)
    except kbmod.IoFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    except dsl.ParseFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    unit = kb.unit(args.unit)
    if unit is None:
        print(f"no unit named {args.unit!r} in the knowledge base", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    try:
        text = capability.verbalize(unit)
    except capability.NotE3 as exc:
        print(exc, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrlang",
        description="concept units, their interpreter, and their redescription",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a source file and print it canonically")
    p.add_argument("file", help="path to a .rr source file")

    p = sub.add_parser("redescribe", help="run redescription passes over the knowledge base")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--phase", type=int, choices=(1, 2, 3))
    group.add_argument("--auto", action="store_true",
                       help="fire whichever phases mastery allows")
    p.add_argument("--threshold", type=_positive_int, default=3,
                   help="solved tasks needed before --auto fires a phase")
    p.add_argument("--out", metavar="DIR", default=None,
                   help="save the grown knowledge base to this directory")
    _add_kb_option(p)

    p = sub.add_parser("run", help="run one task at one level")
    p.add_argument("--task", required=True, choices=tasks.TASK_IDS)
    p.add_argument("--level", required=True, choices=tuple(l.name for l in ir.Level))
    p.add_argument("--seed", type=int, default=0)
    _add_kb_option(p)

    p = sub.add_parser("matrix", help="print the level by task capability matrix")
    p.add_argument("--diff", action="store_true",
                   help="compare against the golden matrix; nonzero exit on drift")
    p.add_argument("--output", choices=("text", "tsv"), default="text")
    _add_kb_option(p)

    p = sub.add_parser("trace", help="dump one task's trace as TSV")
    p.add_argument("--task", required=True, choices=tasks.TASK_IDS)
    p.add_argument("--level", required=True, choices=tuple(l.name for l in ir.Level))
    p.add_argument("--seed", type=int, default=0)
    _add_kb_option(p)

    p = sub.add_parser("verbalize", help="render a fully public unit as sentences")
    p.add_argument("unit", help="unit name to look up in the knowledge base")
    _add_kb_option(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = _config(args)
    if args.command == "parse":
        return _cmd_parse(args)
    if args.command == "redescribe":
        return _cmd_redescribe(args, config)
    if args.command == "run":
        return _cmd_run(args, config)
    if args.command == "matrix":
        return _cmd_matrix(args, config)
    if args.command == "trace":
        return _cmd_trace(args, config)
    return _cmd_verbalize(args, config)


if __name__ == "__main__":
    sys.exit(main())
