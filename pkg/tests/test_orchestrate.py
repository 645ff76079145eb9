"""Analysis pipelines: classic, distributed, cancellation, benching."""

import pytest

from ltsdiag import (
    AnalysisPlan,
    Method,
    Status,
    bench_compare,
    check_all_faults,
    classic_check,
    distributed_check,
    sync_product,
    validate_witness,
)
from ltsdiag.lts import LtsError
from ltsdiag.orchestrate import SoundnessError, render_report, report_fingerprint, run_plan
from ltsdiag.randsys import RandomSystemParams, cancellation_family, generate_random_system

from .conftest import make_lts


class TestClassic:
    def test_ab_diagnosable(self, A, B):
        report = classic_check(AnalysisPlan(components=(A, B), method=Method.CLASSIC))
        assert report.overall is Status.DIAGNOSABLE
        assert report.effective_time_model == "max"

    def test_cd_non_diagnosable(self, C, D):
        report = classic_check(AnalysisPlan(components=(C, D), method=Method.CLASSIC))
        assert report.overall is Status.NON_DIAGNOSABLE
        assert report.witness is not None
        validate_witness(sync_product(C, D), "f", report.witness)
        assert report.effective_time_model == "min"

    def test_single_component_matches_direct_check(self, C):
        report = classic_check(AnalysisPlan(components=(C,), method=Method.CLASSIC))
        direct = check_all_faults(C)
        assert report.overall.value == direct["f"].status.value

    def test_budget_gives_inconclusive(self, C, D):
        report = classic_check(
            AnalysisPlan(components=(C, D), method=Method.CLASSIC, max_states=4)
        )
        assert report.overall is Status.INCONCLUSIVE


class TestDistributed:
    def test_cd_non_diagnosable_via_reduced_task(self, C, D):
        report = distributed_check(AnalysisPlan(components=(C, D)))
        assert report.overall is Status.NON_DIAGNOSABLE
        deciding = [t for t in report.tasks if t.status == "non_diagnosable"]
        assert len(deciding) == 1
        assert deciding[0].kind == "product"
        assert "^f" in deciding[0].label
        # the witness certifies the full product as well
        validate_witness(sync_product(C, D), "f", report.witness)

    def test_ab_diagnosable_with_self_checks(self, A, B):
        report = distributed_check(AnalysisPlan(components=(A, B)))
        assert report.overall is Status.DIAGNOSABLE
        assert all(t.status == "diagnosable" for t in report.tasks)
        assert len(report.product_tasks()) == 2
        assert len(report.self_checks()) == 2
        assert report.cancellation_count == 0
        assert report.effective_time_model == "max"

    def test_no_faults_vacuous(self):
        g1 = make_lts(1, [(0, "a", 0)], observable={"a"})
        g2 = make_lts(1, [(0, "b", 0)], observable={"b"})
        report = distributed_check(AnalysisPlan(components=(g1, g2)))
        assert report.overall is Status.DIAGNOSABLE
        assert report.tasks == ()

    def test_inconclusive_on_failed_self_check(self):
        # `noisy` alone cannot tell f.(a)^w from u.(a)^w, but the shared
        # action a only becomes available after the partner's own fault,
        # so both reduced products are diagnosable and the theorems
        # decide nothing: the run must alert and stay inconclusive.
        noisy = make_lts(
            3,
            [(0, "f", 1), (1, "a", 1), (0, "u", 2), (2, "a", 2)],
            observable={"a"},
            unobservable={"f", "u"},
            faults={"f"},
        )
        partner = make_lts(
            2,
            [(0, "f", 1), (1, "a", 1)],
            observable={"a"},
            unobservable={"f"},
            faults={"f"},
        )
        plan = AnalysisPlan(components=(partner, noisy), parallelism=1)
        report = distributed_check(plan)
        assert report.overall is Status.INCONCLUSIVE
        assert report.alerts
        assert all(t.status == "diagnosable" for t in report.product_tasks())
        fb = distributed_check(
            AnalysisPlan(components=(partner, noisy), fallback_on_inconclusive=True)
        )
        assert fb.fallback_used
        classic = classic_check(
            AnalysisPlan(components=(partner, noisy), method=Method.CLASSIC)
        )
        # every infinite behavior of the composition needs the partner's
        # fault first, so the composed system is in fact diagnosable
        assert classic.overall is Status.DIAGNOSABLE
        assert fb.overall is classic.overall

    def test_restricted_fault_set(self, C, D):
        report = distributed_check(AnalysisPlan(components=(C, D), faults=frozenset()))
        assert report.overall is Status.DIAGNOSABLE
        with pytest.raises(LtsError):
            AnalysisPlan(components=(C, D), faults=frozenset({"zz"}))


class TestCancellation:
    def test_family_cancels_and_stays_correct(self):
        family = cancellation_family(depth=5)
        report = distributed_check(AnalysisPlan(components=tuple(family), parallelism=8))
        assert report.overall is Status.NON_DIAGNOSABLE
        assert report.cancellation_count >= 1
        assert report.effective_time_model == "min"
        # the same overall verdict without any cancellation pressure
        calm = distributed_check(AnalysisPlan(components=tuple(family), parallelism=1))
        assert calm.overall is Status.NON_DIAGNOSABLE
        assert report_fingerprint(calm) == report_fingerprint(report)

    def test_cancelled_tasks_do_not_contribute(self):
        family = cancellation_family(depth=4)
        report = distributed_check(AnalysisPlan(components=tuple(family), parallelism=8))
        cancelled = [t for t in report.tasks if t.status == "cancelled"]
        assert cancelled
        assert all(t.witness is None for t in cancelled)
        deciding = min(
            t.index for t in report.tasks if t.status == "non_diagnosable"
        )
        assert all(t.index > deciding for t in cancelled)


class TestDeterminism:
    def test_reports_equal_across_parallelism(self):
        params = RandomSystemParams(
            n_components=2, max_states=5, fault_probability=0.7
        )
        for seed in range(25):
            comps = generate_random_system(seed, params)
            plan1 = AnalysisPlan(components=tuple(comps), parallelism=1)
            plan8 = AnalysisPlan(components=tuple(comps), parallelism=8)
            assert report_fingerprint(distributed_check(plan1)) == report_fingerprint(
                distributed_check(plan8)
            )

    def test_time_model_bookkeeping(self, A, B, C, D):
        nondiag = distributed_check(AnalysisPlan(components=(C, D)))
        considered = [t for t in nondiag.tasks if t.status != "cancelled"]
        assert nondiag.effective_time == min(t.elapsed for t in considered)
        diag = distributed_check(AnalysisPlan(components=(A, B)))
        assert diag.effective_time == max(t.elapsed for t in diag.tasks)


class TestTheoremsAgree:
    def test_distributed_and_classic_agree_on_random_plans(self):
        params = RandomSystemParams(
            n_components=2,
            max_states=5,
            fault_probability=0.7,
            diagnosable_only=True,
        )
        for seed in range(40):
            comps = generate_random_system(seed, params)
            dist = distributed_check(AnalysisPlan(components=tuple(comps)))
            classic = classic_check(
                AnalysisPlan(components=tuple(comps), method=Method.CLASSIC)
            )
            assert dist.overall is not Status.INCONCLUSIVE
            assert dist.overall is classic.overall, seed


class TestBench:
    def test_ab_rows_and_agreement(self, A, B):
        report = bench_compare(AnalysisPlan(components=(A, B)), 5)
        assert len(report.rows) == 5
        assert report.agreement
        assert report.verdict is Status.DIAGNOSABLE

    def test_cd_agreement(self, C, D):
        report = bench_compare(AnalysisPlan(components=(C, D)), 2)
        assert report.verdict is Status.NON_DIAGNOSABLE

    def test_zero_reps_rejected(self, A, B):
        with pytest.raises(LtsError):
            bench_compare(AnalysisPlan(components=(A, B)), 0)

    def test_family_speedup_direction(self):
        family = cancellation_family(depth=5)
        report = bench_compare(
            AnalysisPlan(components=tuple(family), parallelism=8, max_states=60_000),
            2,
        )
        assert report.distributed_mean < report.classic_mean


class TestRendering:
    def test_render_mentions_key_facts(self, C, D):
        report = distributed_check(AnalysisPlan(components=(C, D)))
        text = render_report(report)
        assert "non_diagnosable" in text
        assert "cancelled" in text
        assert "^f" in text

    def test_run_plan_dispatch(self, A, B):
        classic = run_plan(AnalysisPlan(components=(A, B), method=Method.CLASSIC))
        dist = run_plan(AnalysisPlan(components=(A, B), method=Method.DISTRIBUTED))
        assert classic.method is Method.CLASSIC
        assert dist.method is Method.DISTRIBUTED
