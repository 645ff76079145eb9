"""Analysis pipelines: classic full-product check and the distributed one.

The distributed method decides the diagnosability of G_1 x ... x G_n from
per-component work only: for every fault f and every component i it checks
the product of G_i with the f-free versions of all the others, plus each
component on its own.  Any non-diagnosable reduced product settles the
whole question negatively, so sibling tasks are cancelled as soon as one
task returns non-diagnosable; if every reduced product and every
self-check is diagnosable the composed system is diagnosable.  When the
reduced products pass but some component fails its own check the theorems
decide nothing: the run reports inconclusive with an alert, optionally
falling back to the classic method.

Verdict determinism: tasks carry a fixed index (reduced products first,
then self-checks) and the reported deciding task is always the lowest
indexed non-diagnosable one.  Tasks above the deciding index are reported
as cancelled whether or not the scheduler happened to finish them, which
makes reports independent of parallelism and interleaving; wall-clock
fields are the only schedule-dependent content.
"""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

from .compose import sync_product_n
from .control import CancelToken, CheckCancelled
from .diagnose import (
    Status,
    Verdict,
    Witness,
    check_diagnosable,
    lasso_to_dict,
)
from .lts import Lts, LtsError, StateBudgetExceeded
from .reduction import fault_free


class Method(str, Enum):
    DISTRIBUTED = "distributed"
    CLASSIC = "classic"

    def __str__(self) -> str:
        return self.value


class AnalysisError(RuntimeError):
    """A task failed for a non-verdict reason; partial report attached."""

    def __init__(self, message: str, report: "AnalysisReport | None" = None):
        super().__init__(message)
        self.report = report


class SoundnessError(RuntimeError):
    """The two methods produced conclusive but different verdicts."""


@dataclass(frozen=True)
class AnalysisPlan:
    components: tuple[Lts, ...]
    faults: frozenset[str] | None = None  # None: union of component fault sets
    method: Method = Method.DISTRIBUTED
    parallelism: int = 0  # 0: one worker per task, capped by CPU count
    fallback_on_inconclusive: bool = False
    max_states: int | None = None  # per-task exploration budget
    symmetry_reduction: bool = True

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise LtsError("a plan needs at least one component")
        declared = frozenset().union(*(c.alphabet.faults for c in self.components))
        if self.faults is None:
            object.__setattr__(self, "faults", declared)
        else:
            object.__setattr__(self, "faults", frozenset(self.faults))
            stray = self.faults - declared
            if stray:
                raise LtsError(
                    f"faults not declared by any component: {sorted(stray)}"
                )

    def component_names(self) -> tuple[str, ...]:
        return tuple(
            c.name or f"G{i + 1}" for i, c in enumerate(self.components)
        )


@dataclass(frozen=True)
class TaskSpec:
    index: int
    kind: str  # "product" or "self-check"
    fault: str
    component: int  # the faulty component (product) or the checked one
    label: str
    estimated_size: int


@dataclass(frozen=True)
class TaskResult:
    index: int
    kind: str
    fault: str
    label: str
    status: str  # Status value, or "cancelled" / "error"
    states_explored: int = 0
    elapsed: float = 0.0
    note: str = ""
    witness: Witness | None = None
    error: str | None = None


@dataclass(frozen=True)
class AnalysisReport:
    method: Method
    overall: Status
    tasks: tuple[TaskResult, ...]
    witness: Witness | None = None
    witness_fault: str | None = None
    witness_task: str | None = None
    elapsed: float = 0.0
    cancellation_count: int = 0
    effective_time_model: str = "max"  # min on non-diagnosable, max otherwise
    effective_time: float = 0.0
    alerts: tuple[str, ...] = ()
    fallback_used: bool = False
    fallback: "AnalysisReport | None" = None

    def self_checks(self) -> tuple[TaskResult, ...]:
        return tuple(t for t in self.tasks if t.kind == "self-check")

    def product_tasks(self) -> tuple[TaskResult, ...]:
        return tuple(t for t in self.tasks if t.kind == "product")


@dataclass
class _RawOutcome:
    verdict: Verdict | None = None
    cancelled: bool = False
    error: str | None = None
    elapsed: float = 0.0


def _effective_time(overall: Status, times: Sequence[float]) -> tuple[str, float]:
    if overall is Status.NON_DIAGNOSABLE:
        return "min", (min(times) if times else 0.0)
    return "max", (max(times) if times else 0.0)


def _run_scheduled(
    tasks: Sequence[TaskSpec],
    runner: Callable[[TaskSpec, CancelToken], Verdict],
    parallelism: int,
) -> dict[int, _RawOutcome]:
    """Run tasks largest-first; first non-diagnosable reduced product
    cancels everything with a higher index."""
    outcomes: dict[int, _RawOutcome] = {}
    tokens = {t.index: CancelToken() for t in tasks}
    lock = threading.Lock()
    threshold = [len(tasks) + 1]  # lowest non-diagnosable product index so far

    def work(task: TaskSpec) -> None:
        token = tokens[task.index]
        with lock:
            doomed = task.index > threshold[0]
        if doomed or token.cancelled():
            outcomes[task.index] = _RawOutcome(cancelled=True)
            return
        start = time.perf_counter()
        try:
            verdict = runner(task, token)
        except CheckCancelled:
            outcomes[task.index] = _RawOutcome(
                cancelled=True, elapsed=time.perf_counter() - start
            )
            return
        except LtsError as exc:
            outcomes[task.index] = _RawOutcome(
                error=str(exc), elapsed=time.perf_counter() - start
            )
            return
        outcomes[task.index] = _RawOutcome(
            verdict=verdict, elapsed=time.perf_counter() - start
        )
        if task.kind == "product" and verdict.status is Status.NON_DIAGNOSABLE:
            with lock:
                if task.index < threshold[0]:
                    threshold[0] = task.index
                    for other in tasks:
                        if other.index > task.index:
                            tokens[other.index].cancel()

    schedule = sorted(tasks, key=lambda t: (-t.estimated_size, t.index))
    if parallelism <= 0:
        parallelism = max(1, min(len(tasks) or 1, os.cpu_count() or 4))
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(work, t) for t in schedule]
        for fut in futures:
            fut.result()
    return outcomes


def _subject_factors(
    plan: AnalysisPlan, reduced: dict[tuple[int, str], Lts], fault: str, faulty: int
) -> list[Lts]:
    factors = []
    for j, comp in enumerate(plan.components):
        if j == faulty:
            factors.append(comp)
        else:
            factors.append(reduced.get((j, fault), comp))
    return factors


def _plan_tasks(
    plan: AnalysisPlan, reduced: dict[tuple[int, str], Lts]
) -> list[TaskSpec]:
    names = plan.component_names()
    tasks: list[TaskSpec] = []
    idx = 0
    for fault in sorted(plan.faults):
        for i in range(len(plan.components)):
            factors = _subject_factors(plan, reduced, fault, i)
            size = 1
            for fac in factors:
                size *= fac.n_states
            parts = [
                names[j] if j == i else f"{names[j]}^{fault}"
                for j in range(len(plan.components))
            ]
            tasks.append(
                TaskSpec(
                    index=idx,
                    kind="product",
                    fault=fault,
                    component=i,
                    label=" x ".join(parts),
                    estimated_size=size,
                )
            )
            idx += 1
    for fault in sorted(plan.faults):
        for i, comp in enumerate(plan.components):
            tasks.append(
                TaskSpec(
                    index=idx,
                    kind="self-check",
                    fault=fault,
                    component=i,
                    label=names[i],
                    estimated_size=comp.n_states,
                )
            )
            idx += 1
    return tasks


def distributed_check(plan: AnalysisPlan) -> AnalysisReport:
    """Per-component diagnosability analysis with early cancellation."""
    start = time.perf_counter()
    reduced: dict[tuple[int, str], Lts] = {}
    for fault in sorted(plan.faults):
        for j, comp in enumerate(plan.components):
            if fault in comp.alphabet.faults:
                reduced[(j, fault)] = fault_free(comp, fault)
    tasks = _plan_tasks(plan, reduced)

    def runner(task: TaskSpec, token: CancelToken) -> Verdict:
        comp = plan.components[task.component]
        has_fault_edges = any(a == task.fault for (_, a, _) in comp.transitions)
        if not has_fault_edges:
            return Verdict(
                Status.DIAGNOSABLE, task.fault, note="no fault transitions in subject"
            )
        if task.kind == "self-check":
            return check_diagnosable(
                comp,
                task.fault,
                symmetry_reduction=plan.symmetry_reduction,
                max_states=plan.max_states,
                cancel=token,
            )
        factors = _subject_factors(plan, reduced, task.fault, task.component)
        try:
            subject = sync_product_n(
                factors, max_states=plan.max_states, cancel=token
            )
        except StateBudgetExceeded as exc:
            return Verdict(Status.INCONCLUSIVE, task.fault, note=str(exc))
        return check_diagnosable(
            subject,
            task.fault,
            symmetry_reduction=plan.symmetry_reduction,
            max_states=plan.max_states,
            cancel=token,
        )

    outcomes = _run_scheduled(tasks, runner, plan.parallelism)
    elapsed = time.perf_counter() - start
    return _assemble(plan, tasks, outcomes, elapsed)


def _assemble(
    plan: AnalysisPlan,
    tasks: list[TaskSpec],
    outcomes: dict[int, _RawOutcome],
    elapsed: float,
) -> AnalysisReport:
    deciding: int | None = None
    for task in tasks:
        out = outcomes[task.index]
        if (
            task.kind == "product"
            and out.verdict is not None
            and out.verdict.status is Status.NON_DIAGNOSABLE
        ):
            deciding = task.index
            break

    results: list[TaskResult] = []
    masked = 0
    for task in tasks:
        out = outcomes[task.index]
        if deciding is not None and task.index > deciding:
            results.append(
                TaskResult(task.index, task.kind, task.fault, task.label, "cancelled")
            )
            masked += 1
            continue
        if out.cancelled:  # pragma: no cover - only reachable via masking races
            results.append(
                TaskResult(task.index, task.kind, task.fault, task.label, "cancelled")
            )
            masked += 1
            continue
        if out.error is not None:
            results.append(
                TaskResult(
                    task.index,
                    task.kind,
                    task.fault,
                    task.label,
                    "error",
                    elapsed=out.elapsed,
                    error=out.error,
                )
            )
            continue
        v = out.verdict
        results.append(
            TaskResult(
                task.index,
                task.kind,
                task.fault,
                task.label,
                v.status.value,
                states_explored=v.states_explored,
                elapsed=out.elapsed,
                note=v.note,
                witness=v.witness,
            )
        )

    alerts: list[str] = []
    for res in results:
        if res.kind == "self-check" and res.status == Status.NON_DIAGNOSABLE.value:
            alerts.append(
                f"component {res.label} is not diagnosable for fault {res.fault!r}"
            )

    witness = witness_fault = witness_task = None
    errors = [r for r in results if r.status == "error"]
    if deciding is not None:
        overall = Status.NON_DIAGNOSABLE
        dec = next(r for r in results if r.index == deciding)
        witness, witness_fault, witness_task = dec.witness, dec.fault, dec.label
    elif errors:
        report = _finish_report(
            plan, Status.INCONCLUSIVE, results, None, None, None, elapsed, masked, alerts
        )
        if plan.fallback_on_inconclusive:
            return _with_fallback(plan, report)
        raise AnalysisError(
            f"task {errors[0].label!r} failed: {errors[0].error}", report
        )
    else:
        statuses = {r.status for r in results}
        if Status.INCONCLUSIVE.value in statuses:
            overall = Status.INCONCLUSIVE
        elif alerts:
            overall = Status.INCONCLUSIVE  # theorems need diagnosable components
        else:
            overall = Status.DIAGNOSABLE

    report = _finish_report(
        plan, overall, results, witness, witness_fault, witness_task,
        elapsed, masked, alerts,
    )
    if overall is Status.INCONCLUSIVE and plan.fallback_on_inconclusive:
        return _with_fallback(plan, report)
    return report


def _finish_report(
    plan: AnalysisPlan,
    overall: Status,
    results: list[TaskResult],
    witness: Witness | None,
    witness_fault: str | None,
    witness_task: str | None,
    elapsed: float,
    masked: int,
    alerts: list[str],
) -> AnalysisReport:
    times = [r.elapsed for r in results if r.status not in ("cancelled",)]
    model, eff = _effective_time(overall, times)
    return AnalysisReport(
        method=Method.DISTRIBUTED,
        overall=overall,
        tasks=tuple(results),
        witness=witness,
        witness_fault=witness_fault,
        witness_task=witness_task,
        elapsed=elapsed,
        cancellation_count=masked,
        effective_time_model=model,
        effective_time=eff,
        alerts=tuple(alerts),
    )


def _with_fallback(plan: AnalysisPlan, report: AnalysisReport) -> AnalysisReport:
    classic = classic_check(replace(plan, method=Method.CLASSIC))
    return replace(
        report,
        overall=classic.overall,
        witness=classic.witness,
        witness_fault=classic.witness_fault,
        witness_task=classic.witness_task,
        fallback_used=True,
        fallback=classic,
    )


def classic_check(plan: AnalysisPlan) -> AnalysisReport:
    """Build the full product, then check every fault on it."""
    start = time.perf_counter()
    names = plan.component_names()
    label = " x ".join(names)
    results: list[TaskResult] = []
    witness = witness_fault = None
    product = None
    build_error: str | None = None
    try:
        product = sync_product_n(list(plan.components), max_states=plan.max_states)
    except StateBudgetExceeded as exc:
        build_error = str(exc)

    for idx, fault in enumerate(sorted(plan.faults)):
        if build_error is not None:
            results.append(
                TaskResult(
                    idx, "classic", fault, label, Status.INCONCLUSIVE.value,
                    note=build_error,
                )
            )
            continue
        t0 = time.perf_counter()
        verdict = check_diagnosable(
            product,
            fault,
            symmetry_reduction=plan.symmetry_reduction,
            max_states=plan.max_states,
        )
        results.append(
            TaskResult(
                idx, "classic", fault, label, verdict.status.value,
                states_explored=verdict.states_explored,
                elapsed=time.perf_counter() - t0,
                note=verdict.note,
                witness=verdict.witness,
            )
        )
        if verdict.status is Status.NON_DIAGNOSABLE and witness is None:
            witness, witness_fault = verdict.witness, fault

    statuses = {r.status for r in results}
    if Status.NON_DIAGNOSABLE.value in statuses:
        overall = Status.NON_DIAGNOSABLE
    elif Status.INCONCLUSIVE.value in statuses:
        overall = Status.INCONCLUSIVE
    else:
        overall = Status.DIAGNOSABLE
    elapsed = time.perf_counter() - start
    times = [r.elapsed for r in results]
    model, eff = _effective_time(overall, times)
    return AnalysisReport(
        method=Method.CLASSIC,
        overall=overall,
        tasks=tuple(results),
        witness=witness,
        witness_fault=witness_fault,
        witness_task=label if witness is not None else None,
        elapsed=elapsed,
        cancellation_count=0,
        effective_time_model=model,
        effective_time=eff,
    )


def run_plan(plan: AnalysisPlan) -> AnalysisReport:
    if plan.method is Method.CLASSIC:
        return classic_check(plan)
    return distributed_check(plan)


@dataclass(frozen=True)
class BenchRow:
    rep: int
    distributed_seconds: float
    classic_seconds: float
    distributed_status: Status
    classic_status: Status


@dataclass(frozen=True)
class BenchReport:
    system: str
    rows: tuple[BenchRow, ...]
    agreement: bool
    verdict: Status
    distributed_mean: float
    classic_mean: float

    @property
    def speedup(self) -> float:
        if self.distributed_mean == 0.0:
            return float("inf")
        return self.classic_mean / self.distributed_mean


def bench_compare(plan: AnalysisPlan, repetitions: int) -> BenchReport:
    """Run both methods repeatedly and compare outcomes and wall time.

    A conclusive verdict disagreement between the methods is a soundness
    violation and raises instead of reporting.
    """
    if repetitions < 1:
        raise LtsError("repetitions must be >= 1")
    rows: list[BenchRow] = []
    verdict = Status.INCONCLUSIVE
    for rep in range(repetitions):
        dist = distributed_check(replace(plan, method=Method.DISTRIBUTED))
        classic = classic_check(replace(plan, method=Method.CLASSIC))
        ds, cs = dist.overall, classic.overall
        if (
            Status.INCONCLUSIVE not in (ds, cs)
            and ds is not cs
        ):
            raise SoundnessError(
                f"method disagreement on rep {rep}: distributed={ds}, classic={cs}"
            )
        if ds is not Status.INCONCLUSIVE:
            verdict = ds
        elif cs is not Status.INCONCLUSIVE:
            verdict = cs
        rows.append(BenchRow(rep, dist.elapsed, classic.elapsed, ds, cs))
    names = " x ".join(plan.component_names())
    return BenchReport(
        system=names,
        rows=tuple(rows),
        agreement=True,
        verdict=verdict,
        distributed_mean=sum(r.distributed_seconds for r in rows) / len(rows),
        classic_mean=sum(r.classic_seconds for r in rows) / len(rows),
    )


def report_to_dict(report: AnalysisReport) -> dict:
    doc: dict = {
        "method": report.method.value,
        "overall": report.overall.value,
        "elapsed_seconds": report.elapsed,
        "cancellation_count": report.cancellation_count,
        "effective_time": {
            "model": report.effective_time_model,
            "seconds": report.effective_time,
        },
        "alerts": list(report.alerts),
        "fallback_used": report.fallback_used,
        "tasks": [
            {
                "index": t.index,
                "kind": t.kind,
                "fault": t.fault,
                "subject": t.label,
                "status": t.status,
                "states_explored": t.states_explored,
                "elapsed_seconds": t.elapsed,
                **({"note": t.note} if t.note else {}),
                **({"error": t.error} if t.error else {}),
                **(
                    {
                        "witness": {
                            "faulty": lasso_to_dict(t.witness.faulty),
                            "fault_free": lasso_to_dict(t.witness.fault_free),
                        }
                    }
                    if t.witness is not None
                    else {}
                ),
            }
            for t in report.tasks
        ],
    }
    if report.witness is not None:
        doc["witness"] = {
            "fault": report.witness_fault,
            "task": report.witness_task,
            "faulty": lasso_to_dict(report.witness.faulty),
            "fault_free": lasso_to_dict(report.witness.fault_free),
        }
    if report.fallback is not None:
        doc["fallback"] = report_to_dict(report.fallback)
    return doc


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_fingerprint(report: AnalysisReport) -> dict:
    """Schedule-invariant content of a report: verdicts, no wall-clock."""
    doc = report_to_dict(report)
    doc.pop("elapsed_seconds", None)
    doc["effective_time"] = doc["effective_time"]["model"]
    for task in doc["tasks"]:
        task.pop("elapsed_seconds", None)
    if "fallback" in doc:
        doc["fallback"].pop("elapsed_seconds", None)
        doc["fallback"]["effective_time"] = doc["fallback"]["effective_time"]["model"]
        for task in doc["fallback"]["tasks"]:
            task.pop("elapsed_seconds", None)
    return doc


def render_report(report: AnalysisReport) -> str:
    lines = [f"method: {report.method}", f"overall: {report.overall}"]
    if report.witness is not None:
        lines.append(
            f"witness: fault {report.witness_fault!r} in task {report.witness_task}"
        )
        lines.append(
            "  faulty:     "
            + _lasso_str(report.witness.faulty)
        )
        lines.append(
            "  fault-free: "
            + _lasso_str(report.witness.fault_free)
        )
    for alert in report.alerts:
        lines.append(f"alert: {alert}")
    header = f"{'#':>3}  {'kind':<10} {'fault':<6} {'subject':<28} {'status':<16} {'time (s)':>10}  {'states':>8}"
    lines.append(header)
    for t in report.tasks:
        lines.append(
            f"{t.index:>3}  {t.kind:<10} {t.fault:<6} {t.label:<28} {t.status:<16} "
            f"{t.elapsed:>10.6f}  {t.states_explored:>8}"
        )
    lines.append(
        f"elapsed: {report.elapsed:.6f} s, "
        f"effective time ({report.effective_time_model}): {report.effective_time:.6f} s, "
        f"cancelled: {report.cancellation_count}"
    )
    if report.fallback is not None:
        lines.append("--- classic fallback ---")
        lines.append(render_report(report.fallback))
    return "\n".join(lines)


def render_bench(report: BenchReport) -> str:
    lines = [
        f"{'System':<20} {'Diagnosable':<12} {'Distributed (s)':>16} {'Classic (s)':>14}"
    ]
    verdict = {
        Status.DIAGNOSABLE: "yes",
        Status.NON_DIAGNOSABLE: "no",
        Status.INCONCLUSIVE: "inconclusive",
    }[report.verdict]
    for row in report.rows:
        lines.append(
            f"{report.system:<20} {verdict:<12} "
            f"{row.distributed_seconds:>16.9f} {row.classic_seconds:>14.9f}"
        )
    lines.append(
        f"mean: distributed {report.distributed_mean:.9f} s, "
        f"classic {report.classic_mean:.9f} s, speedup x{report.speedup:.2f}"
    )
    return "\n".join(lines)


def _lasso_str(lasso) -> str:
    pre = ".".join(lasso.prefix) if lasso.prefix else "(empty)"
    return f"{pre} ({'.'.join(lasso.cycle)})^w"
