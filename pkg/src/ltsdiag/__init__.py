"""Diagnosability analysis for networks of communicating LTSs."""

from .aut import (
    AutFormatWarning,
    AutParseError,
    Manifest,
    ManifestError,
    load_manifest,
    manifest_for,
    parse_aut,
    to_dot,
    write_aut,
)
from .compose import (
    CompositionError,
    Path,
    ProductLts,
    project_path,
    project_trace,
    sync_product,
    sync_product_n,
)
from .control import CancelToken, CheckCancelled
from .diagnose import (
    Status,
    Verdict,
    Witness,
    brute_force_diagnosable,
    check_all_faults,
    check_diagnosable,
    overall_status,
    validate_witness,
    verdict_to_dict,
)
from .lts import (
    Alphabet,
    Lasso,
    Lts,
    LtsError,
    StateBudgetExceeded,
    Trace,
    ValidationReport,
    canonical_lasso,
    isomorphic,
    lasso_realizable,
    observe,
    observe_lasso,
    reachable,
    replay,
    traces_up_to,
    validate_live,
    validate_no_unobservable_cycles,
)
from .orchestrate import (
    AnalysisError,
    AnalysisPlan,
    AnalysisReport,
    BenchReport,
    Method,
    SoundnessError,
    TaskResult,
    bench_compare,
    classic_check,
    distributed_check,
    report_to_dict,
    report_to_json,
    run_plan,
)
from .randsys import GenerationError, RandomSystemParams, generate_random_system
from .reduction import fault_free, fault_free_all
from .twin import TwinPlant, annotate_faults, build_twin_plant, find_ambiguous_cycle

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
