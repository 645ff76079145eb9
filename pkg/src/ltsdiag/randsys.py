"""Seeded random component families for property campaigns.

Generated components satisfy the two standing assumptions: dead states are
repaired with an observable self-loop and unobservable cycles are broken by
relabeling one of their edges to an observable action.  Components of one
family share the shared-observable pool and the fault labels; all other
labels are component-private, so families compose without alphabet clashes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .diagnose import Status, check_all_faults
from .lts import Alphabet, Lts, validate_no_unobservable_cycles


@dataclass(frozen=True)
class RandomSystemParams:
    n_components: int = 2
    min_states: int = 2
    max_states: int = 5
    n_shared_observable: int = 2
    n_private_observable: int = 1
    n_private_unobservable: int = 1
    fault_labels: tuple[str, ...] = ("f",)
    fault_probability: float = 0.6
    density: float = 0.8  # extra random edges per state on top of the spanning tree
    diagnosable_only: bool = False
    rejection_budget: int = 300

    def __post_init__(self):
        if self.n_components < 1:
            raise ValueError("need at least one component")
        if not 1 <= self.min_states <= self.max_states:
            raise ValueError("bad state count range")
        if not 0.0 <= self.fault_probability <= 1.0:
            raise ValueError("fault probability must be in [0, 1]")


class GenerationError(RuntimeError):
    """Rejection sampling could not find a diagnosable component in budget."""


def _build_component(rng: random.Random, params: RandomSystemParams, idx: int) -> Lts:
    n = rng.randint(params.min_states, params.max_states)
    shared = [f"s{k}" for k in range(params.n_shared_observable)]
    private_obs = [f"o{idx}_{k}" for k in range(params.n_private_observable)]
    private_unob = [f"u{idx}_{k}" for k in range(params.n_private_unobservable)]
    observable_pool = shared + private_obs
    unobservable_pool = list(private_unob)

    edges: set[tuple[int, str, int]] = set()

    def pick_label() -> str:
        if unobservable_pool and rng.random() < 0.25:
            return rng.choice(unobservable_pool)
        return rng.choice(observable_pool)

    for q in range(1, n):
        edges.add((rng.randrange(q), pick_label(), q))
    for _ in range(round(params.density * n)):
        edges.add((rng.randrange(n), pick_label(), rng.randrange(n)))

    faults: list[str] = []
    for f in params.fault_labels:
        if rng.random() < params.fault_probability:
            faults.append(f)
            for _ in range(rng.randint(1, 2)):
                edges.add((rng.randrange(n), f, rng.randrange(n)))

    unobservable = set(private_unob) | set(faults)

    # break unobservable cycles by relabeling one edge per cycle found
    while True:
        cycle_edge = _find_unobservable_cycle_edge(n, edges, unobservable)
        if cycle_edge is None:
            break
        edges.discard(cycle_edge)
        (s, _, t) = cycle_edge
        edges.add((s, rng.choice(observable_pool), t))

    # liveness repair: observable self-loop on dead states
    out_degree = [0] * n
    for (s, _, _) in edges:
        out_degree[s] += 1
    for q in range(n):
        if out_degree[q] == 0:
            edges.add((q, rng.choice(observable_pool), q))

    used = {a for (_, a, _) in edges}
    alphabet = Alphabet(
        observable=frozenset(used - unobservable),
        unobservable=frozenset(used & unobservable),
        faults=frozenset(used & set(faults)),
    )
    lts = Lts(
        n_states=n,
        alphabet=alphabet,
        transitions=tuple(edges),
        initial=0,
        name=f"G{idx + 1}",
    )
    assert validate_no_unobservable_cycles(lts).ok
    return lts


def _find_unobservable_cycle_edge(
    n: int, edges: set[tuple[int, str, int]], unobservable: set[str]
) -> tuple[int, str, int] | None:
    succ: dict[int, list[tuple[int, str, int]]] = {q: [] for q in range(n)}
    for e in sorted(edges):
        if e[1] in unobservable:
            succ[e[0]].append(e)
    color = [0] * n  # 0 white, 1 gray, 2 black
    for root in range(n):
        if color[root]:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        color[root] = 1
        while stack:
            node, pos = stack[-1]
            if pos < len(succ[node]):
                stack[-1] = (node, pos + 1)
                edge = succ[node][pos]
                t = edge[2]
                if color[t] == 1:
                    return edge
                if color[t] == 0:
                    color[t] = 1
                    stack.append((t, 0))
            else:
                color[node] = 2
                stack.pop()
    return None


def generate_random_system(seed: int, params: RandomSystemParams) -> list[Lts]:
    """Deterministic-from-seed component family satisfying the assumptions."""
    rng = random.Random(seed)
    components: list[Lts] = []
    for idx in range(params.n_components):
        attempts = 0
        while True:
            lts = _build_component(rng, params, idx)
            if not params.diagnosable_only:
                break
            verdicts = check_all_faults(lts)
            if all(v.status is Status.DIAGNOSABLE for v in verdicts.values()):
                break
            attempts += 1
            if attempts >= params.rejection_budget:
                raise GenerationError(
                    f"component {idx}: no diagnosable sample within "
                    f"{params.rejection_budget} attempts"
                )
        components.append(lts)
    return components


def vary(params: RandomSystemParams, **changes) -> RandomSystemParams:
    """Convenience copy-with-changes for campaign scripts."""
    return replace(params, **changes)


def cancellation_family(depth: int = 9) -> list[Lts]:
    """Three-component family showcasing early cancellation.

    The first component alone is ambiguous for fault f, so the reduced
    product G1 x G2^f x G3^f is a three-state non-diagnosable subject that
    any checker settles instantly.  The other two components hide a
    2^(depth+1)-state observable tree behind their own f, which makes
    every other task and the full product expensive: component alphabets
    share nothing but f, so the full product is exactly the cube
    3 * 2^(depth+1) * 2^(depth+1) states.
    """
    alph1 = Alphabet(
        observable=frozenset({"go"}),
        unobservable=frozenset({"u_amb", "f"}),
        faults=frozenset({"f"}),
    )
    core = Lts(
        3,
        alph1,
        ((0, "u_amb", 1), (0, "f", 2), (1, "go", 1), (2, "go", 2)),
        name="G1",
    )

    def tree(idx: int) -> Lts:
        label = f"b{idx}"
        n_nodes = 2 ** (depth + 1) - 1
        edges = [(0, "f", 1)]
        for k in range(1, n_nodes + 1):
            if 2 * k <= n_nodes:
                edges.append((k, label, 2 * k))
                edges.append((k, label, 2 * k + 1))
            else:
                edges.append((k, label, k))
        alph = Alphabet(
            observable=frozenset({label}),
            unobservable=frozenset({"f"}),
            faults=frozenset({"f"}),
        )
        return Lts(n_nodes + 1, alph, tuple(edges), name=f"G{idx}")

    return [core, tree(2), tree(3)]
