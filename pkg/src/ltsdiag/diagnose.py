"""Diagnosability verdicts: twin-plant check, witnesses, brute-force oracle.

A fault class is diagnosable when no two infinite behaviors share the same
observation while disagreeing on the fault.  The twin-plant check decides
this in polynomial time; `brute_force_diagnosable` re-decides it for small
systems by enumerating lassos directly and grouping them by observed
infinite word, serving as an independent cross-check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .control import CancelToken
from .lts import (
    Lasso,
    Lts,
    LtsError,
    StateBudgetExceeded,
    canonical_lasso,
    iter_lassos,
    lasso_realizable,
    observe_lasso,
)
from .twin import build_twin_plant, extract_witness, find_ambiguous_cycle


class Status(str, Enum):
    DIAGNOSABLE = "diagnosable"
    NON_DIAGNOSABLE = "non_diagnosable"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:  # keep CLI tables compact
        return self.value


@dataclass(frozen=True)
class Witness:
    """Certificate of non-diagnosability: same observation, fault differs."""

    faulty: Lasso
    fault_free: Lasso


@dataclass(frozen=True)
class Verdict:
    status: Status
    fault: str
    witness: Witness | None = None
    states_explored: int = 0
    elapsed: float = 0.0
    note: str = ""


class WitnessError(RuntimeError):
    """An emitted witness failed its validity check (internal soundness bug)."""


def validate_witness(lts: Lts, fault: str, witness: Witness) -> None:
    """Check the witness invariant against the analyzed system.

    Both lassos must replay in the LTS, their observations must denote the
    same infinite word with a non-empty observed cycle, and exactly the
    faulty one may contain the fault.
    """
    if fault not in witness.faulty:
        raise WitnessError("faulty lasso does not contain the fault")
    if fault in witness.fault_free:
        raise WitnessError("fault-free lasso contains the fault")
    obs_f = observe_lasso(witness.faulty, lts.alphabet)
    obs_n = observe_lasso(witness.fault_free, lts.alphabet)
    if not isinstance(obs_f, Lasso) or not isinstance(obs_n, Lasso):
        raise WitnessError("witness observation is finite")
    if canonical_lasso(obs_f) != canonical_lasso(obs_n):
        raise WitnessError("witness observations differ")
    if not lasso_realizable(lts, witness.faulty):
        raise WitnessError("faulty lasso does not replay in the system")
    if not lasso_realizable(lts, witness.fault_free):
        raise WitnessError("fault-free lasso does not replay in the system")


def check_diagnosable(
    lts: Lts,
    fault: str,
    *,
    symmetry_reduction: bool = True,
    max_states: int | None = None,
    cancel: CancelToken | None = None,
) -> Verdict:
    """Twin-plant diagnosability check for one fault class.

    Requires the system to have no unobservable cycles.  Deadlocked states
    are allowed: only infinite behaviors matter, so they are search leaves.
    """
    start = time.perf_counter()
    try:
        tp = build_twin_plant(
            lts,
            fault,
            symmetry_reduction=symmetry_reduction,
            max_states=max_states,
            cancel=cancel,
        )
    except StateBudgetExceeded as exc:
        return Verdict(
            Status.INCONCLUSIVE,
            fault,
            states_explored=exc.explored,
            elapsed=time.perf_counter() - start,
            note=str(exc),
        )
    amb = find_ambiguous_cycle(tp)
    elapsed = time.perf_counter() - start
    if amb is None:
        return Verdict(
            Status.DIAGNOSABLE, fault, states_explored=tp.n_states, elapsed=elapsed
        )
    faulty, clean = extract_witness(tp, amb)
    witness = Witness(faulty=faulty, fault_free=clean)
    validate_witness(lts, fault, witness)
    return Verdict(
        Status.NON_DIAGNOSABLE,
        fault,
        witness=witness,
        states_explored=tp.n_states,
        elapsed=time.perf_counter() - start,
    )


def check_all_faults(
    lts: Lts,
    faults: frozenset[str] | None = None,
    *,
    symmetry_reduction: bool = True,
    max_states: int | None = None,
    cancel: CancelToken | None = None,
) -> dict[str, Verdict]:
    """Per-fault verdicts; the system is diagnosable iff all of them are."""
    if faults is None:
        faults = lts.alphabet.faults
    out: dict[str, Verdict] = {}
    for f in sorted(faults):
        out[f] = check_diagnosable(
            lts,
            f,
            symmetry_reduction=symmetry_reduction,
            max_states=max_states,
            cancel=cancel,
        )
    return out


def overall_status(verdicts: Mapping[str, Verdict]) -> Status:
    statuses = {v.status for v in verdicts.values()}
    if Status.NON_DIAGNOSABLE in statuses:
        return Status.NON_DIAGNOSABLE
    if Status.INCONCLUSIVE in statuses:
        return Status.INCONCLUSIVE
    return Status.DIAGNOSABLE


def brute_force_diagnosable(
    lts: Lts,
    fault: str,
    max_len: int = 14,
    *,
    max_nodes: int = 2_000_000,
    state_limit: int = 64,
) -> Verdict:
    """Oracle by explicit lasso enumeration, for small systems only.

    Enumerates every lasso up to `max_len` actions, groups them by the
    infinite word of their observation (canonical prefix/cycle form), and
    reports non-diagnosability iff some group mixes fault-containing and
    fault-free lassos.  Shares no code path with the twin-plant check.
    A blown node budget yields an inconclusive verdict.
    """
    if fault not in lts.alphabet.faults:
        raise LtsError(f"{fault!r} is not a declared fault")
    if lts.n_states > state_limit:
        raise LtsError(
            f"brute-force oracle limited to {state_limit} states, got {lts.n_states}"
        )
    start = time.perf_counter()
    groups: dict[tuple, list[Lasso | None]] = {}
    seen = 0
    try:
        for lasso in iter_lassos(lts, max_len, max_nodes=max_nodes):
            seen += 1
            obs = observe_lasso(lasso, lts.alphabet)
            if not isinstance(obs, Lasso):
                continue  # finite observation: outside the omega reading
            canon = canonical_lasso(obs)
            key = (canon.prefix, canon.cycle)
            slot = groups.setdefault(key, [None, None])
            has_fault = fault in lasso
            if slot[has_fault] is None:
                slot[has_fault] = lasso
            clean, faulty = slot
            if clean is not None and faulty is not None:
                witness = Witness(faulty=faulty, fault_free=clean)
                validate_witness(lts, fault, witness)
                return Verdict(
                    Status.NON_DIAGNOSABLE,
                    fault,
                    witness=witness,
                    states_explored=seen,
                    elapsed=time.perf_counter() - start,
                )
    except StateBudgetExceeded as exc:
        return Verdict(
            Status.INCONCLUSIVE,
            fault,
            states_explored=seen,
            elapsed=time.perf_counter() - start,
            note=str(exc),
        )
    return Verdict(
        Status.DIAGNOSABLE,
        fault,
        states_explored=seen,
        elapsed=time.perf_counter() - start,
        note=f"no ambiguity among lassos up to length {max_len}",
    )


def lasso_to_dict(lasso: Lasso) -> dict:
    return {"prefix": list(lasso.prefix), "cycle": list(lasso.cycle)}


def verdict_to_dict(verdict: Verdict) -> dict:
    doc: dict = {
        "status": verdict.status.value,
        "fault": verdict.fault,
        "stats": {
            "states_explored": verdict.states_explored,
            "elapsed_seconds": verdict.elapsed,
        },
    }
    if verdict.note:
        doc["note"] = verdict.note
    if verdict.witness is not None:
        doc["witness"] = {
            "faulty": lasso_to_dict(verdict.witness.faulty),
            "fault_free": lasso_to_dict(verdict.witness.fault_free),
        }
    return doc
