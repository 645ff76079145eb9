"""Synchronous product of components and projection back to components.

Components synchronize on every shared observable action: all components
whose alphabet contains the action move together, so an action private to
one component moves that component alone.  A fault label shared by several
components does NOT synchronize; each occurrence advances exactly one
component, since the same fault class may occur independently in each.
Shared unobservable non-fault labels are rejected: unobservable
communication is out of scope.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .control import POLL_MASK, CancelToken
from .lts import (
    Alphabet,
    Lasso,
    Lts,
    LtsError,
    StateBudgetExceeded,
    Trace,
)

MoverSet = tuple[int, ...]


class CompositionError(LtsError):
    """Factor alphabets cannot be combined consistently."""


@dataclass(frozen=True)
class Path:
    """Alternating state/action sequence; len(states) == len(actions) + 1."""

    states: tuple[int, ...]
    actions: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(self.actions))
        if len(self.states) != len(self.actions) + 1:
            raise LtsError("path must have one more state than actions")

    def steps(self) -> Iterable[tuple[int, str, int]]:
        for i, a in enumerate(self.actions):
            yield (self.states[i], a, self.states[i + 1])


def validate_path(lts: Lts, path: Path) -> None:
    edges = set(lts.transitions)
    for step in path.steps():
        if step not in edges:
            raise LtsError(f"path step {step} is not a transition")
    if path.states and path.states[0] != lts.initial:
        raise LtsError("path must start at the initial state")


@dataclass(frozen=True)
class ProductLts(Lts):
    """Reachable synchronous product; product states carry factor tuples.

    `movers` maps each transition to the sets of factor indices that may
    have moved in that step.  It is normally a single set; a fault
    self-loop enabled in two factors at once yields several candidates.
    """

    coords: tuple[tuple[int, ...], ...] = ()
    factors: tuple[Alphabet, ...] = ()
    movers: dict = field(default_factory=dict, compare=False, repr=False)

    def mover_sets(self, step: tuple[int, str, int]) -> tuple[MoverSet, ...]:
        try:
            return self.movers[step]
        except KeyError:
            raise LtsError(f"{step} is not a product transition") from None


def merge_alphabets(factors: Sequence[Alphabet]) -> Alphabet:
    """Union alphabet; rejects inconsistent partitions across factors."""
    observable: set[str] = set()
    unobservable: set[str] = set()
    faults: set[str] = set()
    for alph in factors:
        observable |= alph.observable
        unobservable |= alph.unobservable
        faults |= alph.faults
    clash = observable & unobservable
    if clash:
        raise CompositionError(
            f"labels observable in one factor, unobservable in another: {sorted(clash)}"
        )
    for label in unobservable - faults:
        holders = [i for i, alph in enumerate(factors) if label in alph]
        if len(holders) > 1:
            raise CompositionError(
                f"unobservable non-fault label {label!r} shared by factors {holders}"
            )
        if any(label in factors[i].faults for i in holders):
            raise CompositionError(
                f"label {label!r} is a fault in one factor but not in another"
            )
    for label in faults:
        for i, alph in enumerate(factors):
            if label in alph and label not in alph.faults:
                raise CompositionError(
                    f"label {label!r} is a fault in one factor but not in factor {i}"
                )
    return Alphabet(frozenset(observable), frozenset(unobservable), frozenset(faults))


def sync_product_n(
    components: Sequence[Lts],
    *,
    max_states: int | None = None,
    cancel: CancelToken | None = None,
    name: str | None = None,
) -> ProductLts:
    """Reachable n-ary synchronous product, breadth-first and deterministic."""
    if not components:
        raise CompositionError("product of zero components")
    factors = tuple(c.alphabet for c in components)
    alphabet = merge_alphabets(factors)
    n = len(components)
    owners: dict[str, tuple[int, ...]] = {
        a: tuple(i for i in range(n) if a in factors[i]) for a in alphabet.actions
    }

    init = tuple(c.initial for c in components)
    index: dict[tuple[int, ...], int] = {init: 0}
    coords: list[tuple[int, ...]] = [init]
    transitions: list[tuple[int, str, int]] = []
    movers: dict[tuple[int, str, int], set[MoverSet]] = {}
    queue = deque([0])
    explored = 0

    def intern(tup: tuple[int, ...]) -> int:
        got = index.get(tup)
        if got is None:
            got = len(coords)
            if max_states is not None and got >= max_states:
                raise StateBudgetExceeded(got, "product state budget exceeded")
            index[tup] = got
            coords.append(tup)
            queue.append(got)
        return got

    while queue:
        sid = queue.popleft()
        explored += 1
        if cancel is not None and (explored & POLL_MASK) == 0:
            cancel.checkpoint()
        tup = coords[sid]
        enabled = sorted({a for i in range(n) for a in components[i].action_map[tup[i]]})
        for a in enabled:
            own = owners[a]
            if a in alphabet.observable:
                # all owners move together; blocked unless each can
                choices = [components[i].successors(tup[i], a) for i in own]
                if any(not c for c in choices):
                    continue
                for combo in itertools.product(*choices):
                    nxt = list(tup)
                    for i, t in zip(own, combo):
                        nxt[i] = t
                    tid = intern(tuple(nxt))
                    step = (sid, a, tid)
                    if step not in movers:
                        transitions.append(step)
                        movers[step] = set()
                    movers[step].add(own)
            else:
                # unobservable (fault or private): one owner moves at a time
                for i in own:
                    for t in components[i].successors(tup[i], a):
                        nxt = list(tup)
                        nxt[i] = t
                        tid = intern(tuple(nxt))
                        step = (sid, a, tid)
                        if step not in movers:
                            transitions.append(step)
                            movers[step] = set()
                        movers[step].add((i,))

    if name is None:
        parts = [c.name or f"G{i + 1}" for i, c in enumerate(components)]
        name = " x ".join(parts)
    return ProductLts(
        n_states=len(coords),
        alphabet=alphabet,
        transitions=tuple(transitions),
        initial=0,
        name=name,
        coords=tuple(coords),
        factors=factors,
        movers={step: tuple(sorted(sets)) for step, sets in movers.items()},
    )


def sync_product(
    g1: Lts,
    g2: Lts,
    *,
    max_states: int | None = None,
    cancel: CancelToken | None = None,
) -> ProductLts:
    """Binary synchronous product."""
    return sync_product_n((g1, g2), max_states=max_states, cancel=cancel)


def project_path(product: ProductLts, path: Path, component: int) -> Path:
    """Keep exactly the steps in which the component moved.

    When a step admits several mover sets (fault self-loops aligned in two
    factors) the smallest mover set is chosen, so the projection of a fixed
    path is deterministic; project_trace enumerates the alternatives.
    """
    validate_path(product, path)
    _check_component(product, component)
    states = [product.coords[path.states[0]][component]]
    actions: list[str] = []
    for (s, a, t) in path.steps():
        chosen = min(product.mover_sets((s, a, t)))
        if component in chosen:
            actions.append(a)
            states.append(product.coords[t][component])
    return Path(tuple(states), tuple(actions))


def project_trace(
    product: ProductLts,
    sigma: Union[Trace, Sequence[str], Lasso],
    component: int,
    *,
    max_steps: int | None = None,
    max_paths: int = 100_000,
) -> frozenset:
    """All projections of a product trace onto one component.

    The projection is existential over the product paths realizing the
    trace, so nondeterminism (including ambiguous fault self-loop movers)
    can yield several results.  Finite traces project to finite traces; a
    lasso is unrolled until every realization closes a product cycle at a
    period boundary, giving a projected lasso, or a projected finite trace
    when the component stops participating.
    """
    _check_component(product, component)
    if isinstance(sigma, Lasso):
        return _project_lasso(product, sigma, component, max_steps, max_paths)
    word = tuple(sigma)
    results: set[Trace] = set()
    found = False
    for proj in _walk(product, word, component, max_paths):
        found = True
        results.add(tuple(proj))
    if not found:
        raise LtsError("trace is not realizable in the product")
    return frozenset(results)


def _check_component(product: ProductLts, component: int) -> None:
    if not product.coords:
        raise LtsError("not a product LTS (no factor annotations)")
    if not 0 <= component < len(product.factors):
        raise LtsError(f"component index {component} out of range")


def _proj_steps(
    product: ProductLts, state: int, action: str, component: int
) -> list[tuple[int, bool]]:
    """Distinct (successor, component-moved) branches for one action."""
    options = set()
    for t in product.successors(state, action):
        for mov in product.mover_sets((state, action, t)):
            options.add((t, component in mov))
    return sorted(options)


def _walk(product: ProductLts, word: Trace, component: int, max_paths: int):
    """DFS over realizations of `word`, yielding the projected actions."""
    expanded = 0
    stack: list[tuple[int, int, tuple[str, ...]]] = [(product.initial, 0, ())]
    while stack:
        state, pos, proj = stack.pop()
        if pos == len(word):
            yield proj
            continue
        a = word[pos]
        for (t, moved) in reversed(_proj_steps(product, state, a, component)):
            expanded += 1
            if expanded > max_paths:
                raise StateBudgetExceeded(expanded, "projection path budget exceeded")
            stack.append((t, pos + 1, proj + (a,) if moved else proj))


def _project_lasso(
    product: ProductLts,
    sigma: Lasso,
    component: int,
    max_steps: int | None,
    max_paths: int,
) -> frozenset:
    n = product.n_states
    if max_steps is None:
        # enough unrollings for every realization to revisit a product
        # state at a period boundary
        max_steps = max(2 * n, len(sigma.prefix) + (n + 1) * len(sigma.cycle))
    reps = max(1, (max_steps - len(sigma.prefix)) // len(sigma.cycle))
    word = sigma.prefix + sigma.cycle * reps
    boundaries = {len(sigma.prefix) + k * len(sigma.cycle) for k in range(reps + 1)}

    results: set = set()
    expanded = 0
    # frames: (state, position, projected prefix, boundary history);
    # a branch is cut once it revisits a product state at a period
    # boundary, which is exactly when it has produced a lasso
    stack: list[tuple[int, int, tuple[str, ...], tuple[tuple[int, int], ...]]] = [
        (product.initial, 0, (), ())
    ]
    while stack:
        state, pos, proj, hist = stack.pop()
        if pos in boundaries:
            closed = False
            for (st, plen) in hist:
                if st == state:
                    pump = proj[plen:]
                    results.add(Lasso(proj[:plen], pump) if pump else proj[:plen])
                    closed = True
            if closed:
                continue
            hist = hist + ((state, len(proj)),)
        if pos == len(word):
            continue
        a = word[pos]
        for (t, moved) in reversed(_proj_steps(product, state, a, component)):
            expanded += 1
            if expanded > max_paths:
                raise StateBudgetExceeded(expanded, "projection path budget exceeded")
            stack.append((t, pos + 1, proj + (a,) if moved else proj, hist))
    if not results:
        # with the default bound every realizable lasso closes a cycle
        raise LtsError("lasso is not realizable in the product (within the unrolling bound)")
    return frozenset(results)
