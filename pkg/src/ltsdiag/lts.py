"""Core model: labeled transition systems with a partitioned action alphabet.

States are dense 0-based integers.  Actions are plain (interned) strings.
The transition relation is stored explicitly; nondeterminism is allowed.
All objects are immutable and safe to share across threads.
"""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Union

Trace = tuple[str, ...]
Transition = tuple[int, str, int]

EPSILON: Trace = ()


class LtsError(ValueError):
    """Malformed model or input outside an operation's domain."""


class AlphabetError(LtsError):
    """Inconsistent alphabet partition."""


@dataclass(frozen=True)
class Alphabet:
    """Action set split into observable / unobservable, with fault classes.

    Faults are always unobservable: an observable fault would be trivially
    detectable and is rejected here.
    """

    observable: frozenset[str] = frozenset()
    unobservable: frozenset[str] = frozenset()
    faults: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "observable", frozenset(sys.intern(a) for a in self.observable))
        object.__setattr__(self, "unobservable", frozenset(sys.intern(a) for a in self.unobservable))
        object.__setattr__(self, "faults", frozenset(sys.intern(a) for a in self.faults))
        for a in self.observable | self.unobservable:
            if not a:
                raise AlphabetError("empty action label")
        overlap = self.observable & self.unobservable
        if overlap:
            raise AlphabetError(f"labels both observable and unobservable: {sorted(overlap)}")
        stray = self.faults - self.unobservable
        if stray:
            raise AlphabetError(f"fault labels must be unobservable: {sorted(stray)}")

    @property
    def actions(self) -> frozenset[str]:
        return self.observable | self.unobservable

    def __contains__(self, action: str) -> bool:
        return action in self.observable or action in self.unobservable

    def is_observable(self, action: str) -> bool:
        return action in self.observable

    def is_fault(self, action: str) -> bool:
        return action in self.faults


@dataclass(frozen=True)
class Lasso:
    """Infinite trace as finite prefix plus infinitely repeated cycle."""

    prefix: Trace
    cycle: Trace

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise LtsError("lasso cycle must be non-empty")

    def __contains__(self, action: str) -> bool:
        return action in self.prefix or action in self.cycle

    def actions(self) -> frozenset[str]:
        return frozenset(self.prefix) | frozenset(self.cycle)


@dataclass(frozen=True)
class ValidationReport:
    check: str
    ok: bool
    offenders: tuple[int, ...] = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Lts:
    """Finite LTS: dense states, transition relation, one initial state.

    `name` and `state_names` are presentation-only side tables and do not
    take part in equality.
    """

    n_states: int
    alphabet: Alphabet
    transitions: tuple[Transition, ...]
    initial: int = 0
    name: str | None = field(default=None, compare=False)
    state_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_states <= 0:
            raise LtsError("an LTS needs at least one state")
        seen = sorted({(s, sys.intern(a), t) for (s, a, t) in self.transitions})
        object.__setattr__(self, "transitions", tuple(seen))
        if not 0 <= self.initial < self.n_states:
            raise LtsError(f"initial state {self.initial} out of range")
        for (s, a, t) in self.transitions:
            if not (0 <= s < self.n_states and 0 <= t < self.n_states):
                raise LtsError(f"transition ({s},{a},{t}) endpoint out of range")
            if a not in self.alphabet:
                raise LtsError(f"transition action {a!r} not in alphabet")
        if self.state_names is not None:
            object.__setattr__(self, "state_names", tuple(self.state_names))
            if len(self.state_names) != self.n_states:
                raise LtsError("state_names length must equal n_states")

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[str, int], ...], ...]:
        """Per-state outgoing (action, target) pairs, sorted."""
        out: list[list[tuple[str, int]]] = [[] for _ in range(self.n_states)]
        for (s, a, t) in self.transitions:
            out[s].append((a, t))
        return tuple(tuple(sorted(row)) for row in out)

    @cached_property
    def action_map(self) -> tuple[dict[str, tuple[int, ...]], ...]:
        """Per-state map action -> sorted targets."""
        maps: list[dict[str, tuple[int, ...]]] = []
        for row in self.adjacency:
            m: dict[str, list[int]] = {}
            for (a, t) in row:
                m.setdefault(a, []).append(t)
            maps.append({a: tuple(ts) for a, ts in m.items()})
        return tuple(maps)

    def successors(self, state: int, action: str) -> tuple[int, ...]:
        return self.action_map[state].get(action, ())

    def enabled(self, state: int) -> tuple[str, ...]:
        return tuple(sorted(self.action_map[state]))

    def state_label(self, state: int) -> str:
        if self.state_names is not None:
            return self.state_names[state]
        return str(state)


def observe(trace: Iterable[str], alphabet: Alphabet) -> Trace:
    """Project a trace onto the observable actions, order preserved."""
    out = []
    for a in trace:
        if a not in alphabet:
            raise LtsError(f"unknown action {a!r}")
        if a in alphabet.observable:
            out.append(a)
    return tuple(out)


def observe_lasso(lasso: Lasso, alphabet: Alphabet) -> Union[Lasso, Trace]:
    """Observe prefix and cycle separately.

    If the observed cycle is empty the infinite trace has a finite
    observation and a plain trace (the observed prefix) is returned.
    """
    prefix = observe(lasso.prefix, alphabet)
    cycle = observe(lasso.cycle, alphabet)
    if not cycle:
        return prefix
    return Lasso(prefix, cycle)


def reachable_states(lts: Lts) -> list[int]:
    """States reachable from the initial state, in BFS discovery order."""
    seen = {lts.initial}
    order = [lts.initial]
    queue = deque(order)
    while queue:
        q = queue.popleft()
        for (_, t) in lts.adjacency[q]:
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def reachable(lts: Lts) -> Lts:
    """Restrict to the part reachable from the initial state.

    States are renumbered in BFS discovery order, which makes the operation
    idempotent (a second application is the identity).
    """
    order = reachable_states(lts)
    remap = {old: new for new, old in enumerate(order)}
    transitions = tuple(
        (remap[s], a, remap[t]) for (s, a, t) in lts.transitions if s in remap and t in remap
    )
    names = None
    if lts.state_names is not None:
        names = tuple(lts.state_names[old] for old in order)
    return Lts(
        n_states=len(order),
        alphabet=lts.alphabet,
        transitions=transitions,
        initial=0,
        name=lts.name,
        state_names=names,
    )


def validate_live(lts: Lts) -> ValidationReport:
    """Check that every reachable state has an outgoing transition."""
    dead = tuple(q for q in reachable_states(lts) if not lts.adjacency[q])
    if dead:
        msg = "dead states: " + ", ".join(lts.state_label(q) for q in dead)
        return ValidationReport("live", False, dead, msg)
    return ValidationReport("live", True)


def validate_no_unobservable_cycles(lts: Lts) -> ValidationReport:
    """Check the unobservable-transition subgraph is acyclic (reachable part).

    On failure the witness cycle is reported as a state sequence
    q0, ..., qk with qk = q0.
    """
    reach = set(reachable_states(lts))
    succ: dict[int, list[int]] = {q: [] for q in reach}
    for (s, a, t) in lts.transitions:
        if s in reach and a in lts.alphabet.unobservable:
            succ[s].append(t)
    # iterative DFS with colors; on back edge reconstruct the cycle
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {q: WHITE for q in reach}
    parent: dict[int, int] = {}
    for root in sorted(reach):
        if color[root] != WHITE:
            continue
        stack: list[tuple[int, Iterator[int]]] = [(root, iter(sorted(succ[root])))]
        color[root] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    parent[nxt] = node
                    stack.append((nxt, iter(sorted(succ[nxt]))))
                    advanced = True
                    break
                if color[nxt] == GRAY:
                    cycle = [nxt]
                    cur = node
                    while cur != nxt:
                        cycle.append(cur)
                        cur = parent[cur]
                    cycle.append(nxt)
                    cycle.reverse()
                    witness = tuple(cycle)
                    msg = "unobservable cycle: " + " -> ".join(
                        lts.state_label(q) for q in witness
                    )
                    return ValidationReport("no-unobservable-cycles", False, witness, msg)
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return ValidationReport("no-unobservable-cycles", True)


def replay(lts: Lts, trace: Iterable[str]) -> frozenset[int]:
    """States reachable from the initial state by spelling `trace` exactly."""
    current = {lts.initial}
    for a in trace:
        current = {t for q in current for t in lts.successors(q, a)}
        if not current:
            return frozenset()
    return frozenset(current)


def trace_realizable(lts: Lts, trace: Iterable[str]) -> bool:
    return bool(replay(lts, trace)) if trace else True


def lasso_realizable(lts: Lts, lasso: Lasso) -> bool:
    """Whether prefix . cycle^omega labels some infinite path of the LTS."""
    start = replay(lts, lasso.prefix)
    if not start:
        return False
    # one-full-cycle step relation
    step: dict[int, frozenset[int]] = {}

    def cycle_step(q: int) -> frozenset[int]:
        got = step.get(q)
        if got is None:
            cur = {q}
            for a in lasso.cycle:
                cur = {t for s in cur for t in lts.successors(s, a)}
                if not cur:
                    break
            got = frozenset(cur)
            step[q] = got
        return got

    # infinite repetition exists iff a cycle of the step relation is
    # reachable from some prefix end state
    seen: set[int] = set()
    stack: list[int] = []
    on_stack: set[int] = set()

    def dfs(q: int) -> bool:
        stack.append(q)
        on_stack.add(q)
        for t in cycle_step(q):
            if t in on_stack:
                return True
            if t not in seen:
                seen.add(t)
                if dfs(t):
                    return True
        stack.pop()
        on_stack.remove(q)
        return False

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * lts.n_states + 100))
    return any(dfs(q) for q in sorted(start) if q not in seen)


def _primitive_cycle(cycle: Trace) -> Trace:
    """Smallest word whose repetition gives the same infinite repetition."""
    n = len(cycle)
    fail = [0] * n
    k = 0
    for i in range(1, n):
        while k and cycle[i] != cycle[k]:
            k = fail[k - 1]
        if cycle[i] == cycle[k]:
            k += 1
        fail[i] = k
    period = n - fail[-1]
    if n % period == 0:
        return cycle[:period]
    return cycle


def canonical_lasso(lasso: Lasso) -> Lasso:
    """Canonical form for equality of the induced infinite words.

    Two lassos denote the same infinite word iff their canonical forms are
    equal: the cycle is reduced to its primitive root and the prefix is
    shortened by rolling shared tail symbols into the cycle phase.
    """
    prefix = tuple(lasso.prefix)
    cycle = _primitive_cycle(tuple(lasso.cycle))
    while prefix and prefix[-1] == cycle[-1]:
        prefix = prefix[:-1]
        cycle = (cycle[-1],) + cycle[:-1]
    return Lasso(prefix, cycle)


def same_omega_word(a: Lasso, b: Lasso) -> bool:
    return canonical_lasso(a) == canonical_lasso(b)


def traces_up_to(lts: Lts, max_len: int) -> set[Trace]:
    """All finite traces from the initial state of length <= max_len."""
    out: set[Trace] = {()}
    frontier: list[tuple[int, Trace]] = [(lts.initial, ())]
    for _ in range(max_len):
        nxt: list[tuple[int, Trace]] = []
        for (q, tr) in frontier:
            for (a, t) in lts.adjacency[q]:
                tr2 = tr + (a,)
                if tr2 not in out:
                    out.add(tr2)
                nxt.append((t, tr2))
        frontier = nxt
        if not frontier:
            break
    return out


def iter_lassos(lts: Lts, max_len: int, max_nodes: int | None = None) -> Iterator[Lasso]:
    """Enumerate lassos by closing state revisits along all paths <= max_len.

    Every path that returns to a previously visited state yields one lasso
    per earlier occurrence, so composite cycles (state revisited inside one
    period) are produced as well.  Raises StateBudgetExceeded when more than
    `max_nodes` path nodes are expanded.
    """
    path_states = [lts.initial]
    path_actions: list[str] = []
    iters: list[Iterator[tuple[str, int]]] = [iter(lts.adjacency[lts.initial])]
    nodes = 0
    while iters:
        advanced = False
        for (a, t) in iters[-1]:
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                raise StateBudgetExceeded(nodes, "lasso enumeration budget exceeded")
            path_actions.append(a)
            path_states.append(t)
            for j in range(len(path_states) - 1):
                if path_states[j] == t:
                    yield Lasso(tuple(path_actions[:j]), tuple(path_actions[j:]))
            if len(path_actions) < max_len:
                iters.append(iter(lts.adjacency[t]))
            else:
                path_actions.pop()
                path_states.pop()
            advanced = True
            break
        if not advanced:
            iters.pop()
            if path_actions:
                path_actions.pop()
                path_states.pop()


class StateBudgetExceeded(RuntimeError):
    """Raised when an exploration exceeds its configured state budget."""

    def __init__(self, explored: int, message: str = ""):
        super().__init__(message or f"state budget exceeded after {explored} states")
        self.explored = explored


def isomorphic(a: Lts, b: Lts) -> bool:
    """Initial-state-anchored labeled-digraph isomorphism.

    Exact backtracking search with color-refinement pruning; meant for the
    small systems used in tests and validation, not for large products.
    """
    if a.n_states != b.n_states or len(a.transitions) != len(b.transitions):
        return False
    if a.alphabet != b.alphabet:
        return False

    def refine(l: Lts) -> list[int]:
        colors = [0] * l.n_states
        colors[l.initial] = 1
        rin: list[list[tuple[str, int]]] = [[] for _ in range(l.n_states)]
        for (s, act, t) in l.transitions:
            rin[t].append((act, s))
        for _ in range(l.n_states):
            sig = []
            for q in range(l.n_states):
                out_sig = tuple(sorted((act, colors[t]) for (act, t) in l.adjacency[q]))
                in_sig = tuple(sorted((act, colors[s]) for (act, s) in rin[q]))
                sig.append((colors[q], out_sig, in_sig))
            ranks = {v: i for i, v in enumerate(sorted(set(sig)))}
            new = [ranks[v] for v in sig]
            if new == colors:
                break
            colors = new
        return colors

    ca, cb = refine(a), refine(b)
    if sorted(ca) != sorted(cb):
        return False
    if ca[a.initial] != cb[b.initial]:
        return False

    candidates = [
        [qb for qb in range(b.n_states) if cb[qb] == ca[qa]] for qa in range(a.n_states)
    ]
    order = sorted(range(a.n_states), key=lambda q: len(candidates[q]))
    b_edges = set(b.transitions)
    a_out: list[list[tuple[str, int]]] = [list(a.adjacency[q]) for q in range(a.n_states)]

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(qa: int, qb: int) -> bool:
        for (act, ta) in a_out[qa]:
            if ta in mapping and (qb, act, mapping[ta]) not in b_edges:
                return False
        for (s, act, t) in a.transitions:
            if t == qa and s in mapping and (mapping[s], act, qb) not in b_edges:
                return False
        return True

    def solve(i: int) -> bool:
        if i == len(order):
            return True
        qa = order[i]
        for qb in candidates[qa]:
            if qb in used:
                continue
            if qa == a.initial and qb != b.initial:
                continue
            if not consistent(qa, qb):
                continue
            mapping[qa] = qb
            used.add(qb)
            if solve(i + 1):
                return True
            del mapping[qa]
            used.remove(qb)
        return False

    # anchor the initial state first
    order.remove(a.initial)
    order.insert(0, a.initial)
    return solve(0)
