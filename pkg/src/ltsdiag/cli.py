"""Command-line surface: validate, compose, reduce, export, check, bench.

Exit codes for `check` and `bench`: 0 diagnosable, 1 non-diagnosable,
2 inconclusive; anything above 2 is an error (usage, parsing, soundness).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .aut import (
    Manifest,
    load_manifest,
    manifest_for,
    manifest_to_json,
    parse_aut,
    to_dot,
    write_aut,
)
from .compose import sync_product_n
from .diagnose import Status
from .lts import Lts, LtsError, validate_live, validate_no_unobservable_cycles
from .orchestrate import (
    AnalysisError,
    AnalysisPlan,
    Method,
    SoundnessError,
    bench_compare,
    render_bench,
    render_report,
    report_to_json,
    run_plan,
)
from .reduction import fault_free

EXIT_DIAGNOSABLE = 0
EXIT_NON_DIAGNOSABLE = 1
EXIT_INCONCLUSIVE = 2
EXIT_ERROR = 3

_STATUS_EXIT = {
    Status.DIAGNOSABLE: EXIT_DIAGNOSABLE,
    Status.NON_DIAGNOSABLE: EXIT_NON_DIAGNOSABLE,
    Status.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must not collide with verdicts
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common_io(sub: argparse.ArgumentParser, many: bool) -> None:
    sub.add_argument(
        "--component",
        nargs="+" if many else 1,
        required=True,
        metavar="FILE.aut",
        help="component automata in .aut format",
    )
    sub.add_argument(
        "--manifest",
        nargs="+",
        required=True,
        metavar="FILE.json",
        help="alphabet manifest(s): one for all components, or one per component",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ltsdiag", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    check = subs.add_parser("check", parents=[], help="decide diagnosability")
    _common_io(check, many=True)
    check.add_argument(
        "--method",
        choices=[m.value for m in Method],
        default=Method.DISTRIBUTED.value,
    )
    check.add_argument("--faults", help="comma-separated fault subset to check")
    check.add_argument("--parallelism", type=int, default=0)
    check.add_argument(
        "--fallback",
        action="store_true",
        help="fall back to the classic method on an inconclusive outcome",
    )
    check.add_argument("--max-states", type=int, default=None)
    check.add_argument(
        "--no-symmetry", action="store_true", help="disable twin-plant symmetry reduction"
    )
    check.add_argument("--json", metavar="OUT.json", help="write the report as JSON")

    product = subs.add_parser("product", help="write the synchronous product")
    _common_io(product, many=True)
    product.add_argument("--out", metavar="OUT.aut")
    product.add_argument("--out-manifest", metavar="OUT.json")

    reduce_p = subs.add_parser("reduce", help="write a fault-free version")
    _common_io(reduce_p, many=False)
    reduce_p.add_argument("--fault", required=True)
    reduce_p.add_argument("--out", metavar="OUT.aut")
    reduce_p.add_argument("--out-manifest", metavar="OUT.json")

    validate = subs.add_parser("validate", help="check the standing assumptions")
    _common_io(validate, many=True)

    dot = subs.add_parser("dot", help="export to Graphviz DOT")
    _common_io(dot, many=False)
    dot.add_argument("--out", metavar="OUT.dot")

    bench = subs.add_parser("bench", help="compare both methods, timing table")
    _common_io(bench, many=True)
    bench.add_argument("--reps", type=int, required=True)
    bench.add_argument("--parallelism", type=int, default=0)
    bench.add_argument("--max-states", type=int, default=None)
    bench.add_argument("--json", metavar="OUT.json")

    return parser


def _load_components(args) -> list[Lts]:
    paths = [Path(p) for p in args.component]
    manifest_paths = [Path(p) for p in args.manifest]
    if len(manifest_paths) not in (1, len(paths)):
        raise LtsError(
            f"expected 1 or {len(paths)} manifests, got {len(manifest_paths)}"
        )
    manifests: list[Manifest] = []
    for mp in manifest_paths:
        manifests.append(load_manifest(mp.read_text()))
    if len(manifests) == 1:
        manifests = manifests * len(paths)
    components = []
    for path, manifest in zip(paths, manifests):
        if manifest.name is None:
            manifest = replace(manifest, name=path.stem)
        try:
            components.append(parse_aut(path.read_text(), manifest))
        except LtsError as exc:
            raise LtsError(f"{path}: {exc}") from exc
    return components


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_check(args) -> int:
    components = _load_components(args)
    faults = None
    if args.faults:
        faults = frozenset(x for x in args.faults.split(",") if x)
    plan = AnalysisPlan(
        components=tuple(components),
        faults=faults,
        method=Method(args.method),
        parallelism=args.parallelism,
        fallback_on_inconclusive=args.fallback,
        max_states=args.max_states,
        symmetry_reduction=not args.no_symmetry,
    )
    try:
        report = run_plan(plan)
    except AnalysisError as exc:
        sys.stderr.write(f"ltsdiag: error: {exc}\n")
        if exc.report is not None:
            print(render_report(exc.report))
        return EXIT_ERROR
    print(render_report(report))
    if args.json:
        Path(args.json).write_text(report_to_json(report))
    return _STATUS_EXIT[report.overall]


def _cmd_product(args) -> int:
    components = _load_components(args)
    product = sync_product_n(components)
    _emit(write_aut(product), args.out)
    if args.out_manifest:
        Path(args.out_manifest).write_text(manifest_to_json(manifest_for(product)))
    return 0


def _cmd_reduce(args) -> int:
    (component,) = _load_components(args)
    reduced = fault_free(component, args.fault)
    _emit(write_aut(reduced), args.out)
    if args.out_manifest:
        Path(args.out_manifest).write_text(manifest_to_json(manifest_for(reduced)))
    return 0


def _cmd_validate(args) -> int:
    components = _load_components(args)
    failed = False
    for comp in components:
        for report in (validate_live(comp), validate_no_unobservable_cycles(comp)):
            state = "ok" if report.ok else "FAIL"
            line = f"{comp.name}: {report.check}: {state}"
            if not report.ok:
                line += f" ({report.message})"
                failed = True
            print(line)
    return EXIT_NON_DIAGNOSABLE if failed else 0


def _cmd_dot(args) -> int:
    (component,) = _load_components(args)
    _emit(to_dot(component), args.out)
    return 0


def _cmd_bench(args) -> int:
    if args.reps < 1:
        raise LtsError("--reps must be >= 1")
    components = _load_components(args)
    plan = AnalysisPlan(
        components=tuple(components),
        parallelism=args.parallelism,
        max_states=args.max_states,
    )
    report = bench_compare(plan, args.reps)
    print(render_bench(report))
    if args.json:
        import json

        doc = {
            "system": report.system,
            "verdict": report.verdict.value,
            "agreement": report.agreement,
            "distributed_mean_seconds": report.distributed_mean,
            "classic_mean_seconds": report.classic_mean,
            "speedup": report.speedup,
            "rows": [
                {
                    "rep": r.rep,
                    "distributed_seconds": r.distributed_seconds,
                    "classic_seconds": r.classic_seconds,
                    "distributed_status": r.distributed_status.value,
                    "classic_status": r.classic_status.value,
                }
                for r in report.rows
            ],
        }
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
    return _STATUS_EXIT[report.verdict]


_COMMANDS = {
    "check": _cmd_check,
    "product": _cmd_product,
    "reduce": _cmd_reduce,
    "validate": _cmd_validate,
    "dot": _cmd_dot,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SoundnessError as exc:
        sys.stderr.write(f"ltsdiag: soundness alarm: {exc}\n")
        return EXIT_ERROR + 1
    except (LtsError, OSError) as exc:
        sys.stderr.write(f"ltsdiag: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
