"""Twin-plant construction and ambiguous-cycle search.

The check for one fault class f works in three steps:

1. annotate states with whether f has occurred on the run so far;
2. build the self-product of the annotated system, synchronizing the two
   copies on observable actions only and interleaving unobservable moves;
3. look for a reachable cycle, containing at least one observable
   transition, whose states pair a fault-tagged copy with a fault-free
   one.  Such a cycle plus its access path is a finite certificate of two
   infinite behaviors with identical observations that disagree on f.

Because the two sides play symmetric roles, the pair graph may be
quotiented by the swap automorphism; edges then carry a swap bit so a
concrete run can be reconstructed.  Monotonicity of the fault tags
guarantees that every cycle through tag-distinct states has even swap
parity, so a single loop is always a concrete cycle.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from .control import POLL_MASK, CancelToken
from .lts import Lasso, Lts, LtsError, StateBudgetExceeded, validate_no_unobservable_cycles

LEFT, RIGHT, JOINT = "L", "R", "J"


@dataclass(frozen=True)
class AnnotatedLts(Lts):
    """LTS whose states carry a monotone has-the-fault-occurred tag."""

    base_states: tuple[int, ...] = ()
    fault_tags: tuple[bool, ...] = ()
    fault: str = ""


def annotate_faults(lts: Lts, fault: str) -> AnnotatedLts:
    """Tag each reachable state with whether `fault` precedes it."""
    if fault not in lts.alphabet.faults:
        raise LtsError(f"{fault!r} is not a declared fault")
    init = (lts.initial, False)
    index: dict[tuple[int, bool], int] = {init: 0}
    order: list[tuple[int, bool]] = [init]
    transitions: list[tuple[int, str, int]] = []
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        base, tag = order[sid]
        for (a, t) in lts.adjacency[base]:
            nxt = (t, tag or a == fault)
            tid = index.get(nxt)
            if tid is None:
                tid = len(order)
                index[nxt] = tid
                order.append(nxt)
                queue.append(tid)
            transitions.append((sid, a, tid))
    names = tuple(
        f"{lts.state_label(q)}:{'F' if tag else 'N'}" for (q, tag) in order
    )
    return AnnotatedLts(
        n_states=len(order),
        alphabet=lts.alphabet,
        transitions=tuple(transitions),
        initial=0,
        name=lts.name,
        state_names=names,
        base_states=tuple(q for (q, _) in order),
        fault_tags=tuple(tag for (_, tag) in order),
        fault=fault,
    )


class TwinEdge(NamedTuple):
    action: str
    side: str  # LEFT / RIGHT mover, or JOINT observable move
    dst: int
    swap: bool  # destination stored with sides exchanged


@dataclass
class TwinPlant:
    """Reachable pair graph of the annotated system (possibly quotiented)."""

    annotated: AnnotatedLts
    pairs: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[TwinEdge, ...], ...]
    initial: int = 0
    symmetry_reduced: bool = True

    @property
    def n_states(self) -> int:
        return len(self.pairs)

    def ambiguous(self, sid: int) -> bool:
        l, r = self.pairs[sid]
        tags = self.annotated.fault_tags
        return tags[l] != tags[r]


def build_twin_plant(
    lts: Lts,
    fault: str,
    *,
    symmetry_reduction: bool = True,
    max_states: int | None = None,
    cancel: CancelToken | None = None,
) -> TwinPlant:
    """Self-product of the fault-annotated system, observables synchronized."""
    rep = validate_no_unobservable_cycles(lts)
    if not rep.ok:
        raise LtsError(f"twin plant requires assumption 2: {rep.message}")
    ann = annotate_faults(lts, fault)
    amap = ann.action_map
    observable = ann.alphabet.observable

    init = (ann.initial, ann.initial)
    index: dict[tuple[int, int], int] = {init: 0}
    pairs: list[tuple[int, int]] = [init]
    adjacency: list[list[TwinEdge]] = [[]]
    queue = deque([0])
    explored = 0

    def intern(l: int, r: int) -> tuple[int, bool]:
        if symmetry_reduction and r < l:
            key, swap = (r, l), True
        else:
            key, swap = (l, r), False
        sid = index.get(key)
        if sid is None:
            sid = len(pairs)
            if max_states is not None and sid >= max_states:
                raise StateBudgetExceeded(sid, "twin plant state budget exceeded")
            index[key] = sid
            pairs.append(key)
            adjacency.append([])
            queue.append(sid)
        return sid, swap

    while queue:
        sid = queue.popleft()
        explored += 1
        if cancel is not None and (explored & POLL_MASK) == 0:
            cancel.checkpoint()
        l, r = pairs[sid]
        out = adjacency[sid]
        enabled = sorted(set(amap[l]) | set(amap[r]))
        for a in enabled:
            if a in observable:
                for (lt, rt) in itertools.product(
                    amap[l].get(a, ()), amap[r].get(a, ())
                ):
                    tid, swap = intern(lt, rt)
                    out.append(TwinEdge(a, JOINT, tid, swap))
            else:
                for lt in amap[l].get(a, ()):
                    tid, swap = intern(lt, r)
                    out.append(TwinEdge(a, LEFT, tid, swap))
                if symmetry_reduction and l == r:
                    continue  # right moves mirror the left ones exactly
                for rt in amap[r].get(a, ()):
                    tid, swap = intern(l, rt)
                    out.append(TwinEdge(a, RIGHT, tid, swap))

    return TwinPlant(
        annotated=ann,
        pairs=tuple(pairs),
        adjacency=tuple(tuple(row) for row in adjacency),
        initial=0,
        symmetry_reduced=symmetry_reduction,
    )


@dataclass(frozen=True)
class AmbiguousCycle:
    """Access path plus cycle, as (source state, edge) sequences."""

    entry: int
    access: tuple[tuple[int, TwinEdge], ...]
    cycle: tuple[tuple[int, TwinEdge], ...]


def _tarjan_sccs(n: int, successors: list[list[int]]) -> list[list[int]]:
    """Strongly connected components, iterative, in deterministic order."""
    UNSET = -1
    index = [UNSET] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != UNSET:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            node, pos = work[-1]
            if pos == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for i in range(pos, len(successors[node])):
                nxt = successors[node][i]
                if index[nxt] == UNSET:
                    work[-1] = (node, i + 1)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    top = stack.pop()
                    on_stack[top] = False
                    comp.append(top)
                    if top == node:
                        break
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return sccs


def _bfs_path(
    tp: TwinPlant,
    sources: list[int],
    goal: set[int],
    within: set[int] | None = None,
) -> list[tuple[int, TwinEdge]]:
    """Deterministic BFS edge path from the first source to any goal state."""
    parent: dict[int, tuple[int, TwinEdge]] = {}
    seen = set(sources)
    queue = deque(sources)
    hit = None
    for s in sources:
        if s in goal:
            hit = s
            break
    while hit is None and queue:
        node = queue.popleft()
        for edge in tp.adjacency[node]:
            if within is not None and edge.dst not in within:
                continue
            if edge.dst in seen:
                continue
            seen.add(edge.dst)
            parent[edge.dst] = (node, edge)
            if edge.dst in goal:
                hit = edge.dst
                break
            queue.append(edge.dst)
        else:
            continue
        break
    if hit is None:
        raise LtsError("internal error: goal not reachable")  # pragma: no cover
    path: list[tuple[int, TwinEdge]] = []
    cur = hit
    while cur in parent:
        src, edge = parent[cur]
        path.append((src, edge))
        cur = src
    path.reverse()
    return path


def find_ambiguous_cycle(tp: TwinPlant) -> AmbiguousCycle | None:
    """Lowest-discovery ambiguous cycle with an observable transition.

    Looks for a nontrivial SCC over tag-distinct pair states that contains
    an internal observable (joint) edge, then assembles entry access path
    and an in-SCC cycle passing through such an edge.
    """
    n = tp.n_states
    succ = [[e.dst for e in row] for row in tp.adjacency]
    comp_of = [-1] * n
    sccs = _tarjan_sccs(n, succ)
    for cid, comp in enumerate(sccs):
        for q in comp:
            comp_of[q] = cid

    best: tuple[int, list[int], tuple[int, TwinEdge]] | None = None
    for comp in sccs:
        members = set(comp)
        if not all(tp.ambiguous(q) for q in comp):
            continue
        inner_obs = None
        cyclic = len(comp) > 1
        for q in sorted(comp):
            for edge in tp.adjacency[q]:
                if edge.dst in members:
                    if edge.dst == q:
                        cyclic = True
                    if edge.side == JOINT and inner_obs is None:
                        inner_obs = (q, edge)
            if inner_obs is not None and cyclic:
                break
        if inner_obs is None or not cyclic:
            continue
        key = min(comp)
        if best is None or key < best[0]:
            best = (key, sorted(members), inner_obs)

    if best is None:
        return None
    _, members_sorted, (obs_src, obs_edge) = best
    members = set(members_sorted)

    access = _bfs_path(tp, [tp.initial], members)
    entry = access[-1][1].dst if access else tp.initial
    to_obs = _bfs_path(tp, [entry], {obs_src}, within=members)
    after = obs_edge.dst
    if after == entry:
        back: list[tuple[int, TwinEdge]] = []
    else:
        back = _bfs_path(tp, [after], {entry}, within=members)
    cycle = tuple(to_obs) + ((obs_src, obs_edge),) + tuple(back)
    return AmbiguousCycle(entry=entry, access=tuple(access), cycle=cycle)


def _walk_edges(
    tp: TwinPlant, steps: tuple[tuple[int, TwinEdge], ...], orientation: int
) -> tuple[list[str], list[str], int]:
    """Replay quotient edges into concrete per-side action sequences."""
    left: list[str] = []
    right: list[str] = []
    o = orientation
    for (_, edge) in steps:
        if edge.side == JOINT:
            left.append(edge.action)
            right.append(edge.action)
        else:
            moved_left = (edge.side == LEFT) == (o == 0)
            (left if moved_left else right).append(edge.action)
        o ^= 1 if edge.swap else 0
    return left, right, o


def extract_witness(tp: TwinPlant, amb: AmbiguousCycle) -> tuple[Lasso, Lasso]:
    """Concrete (faulty, fault-free) lasso pair for an ambiguous cycle."""
    left_pre, right_pre, o_entry = _walk_edges(tp, amb.access, 0)
    left_cyc, right_cyc, o_exit = _walk_edges(tp, amb.cycle, o_entry)
    if o_exit != o_entry:  # pragma: no cover - excluded by tag monotonicity
        raise LtsError("internal error: ambiguous cycle flips orientation")
    l, r = tp.pairs[amb.entry]
    tags = tp.annotated.fault_tags
    left_tag = tags[l] if o_entry == 0 else tags[r]
    faulty_is_left = left_tag
    faulty = Lasso(tuple(left_pre), tuple(left_cyc))
    clean = Lasso(tuple(right_pre), tuple(right_cyc))
    if not faulty_is_left:
        faulty, clean = clean, faulty
    return faulty, clean


def iter_twin_edges(tp: TwinPlant) -> Iterator[tuple[int, TwinEdge]]:
    for src, row in enumerate(tp.adjacency):
        for edge in row:
            yield (src, edge)
