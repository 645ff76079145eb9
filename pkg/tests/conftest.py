"""Shared fixtures and independent reference implementations.

The naive_* helpers re-derive product and twin-plant state spaces with
plain set-based searches that share no code with the package, so tests can
compare the real constructions against them.
"""

from __future__ import annotations

import pytest

from ltsdiag import Alphabet, Lts
from ltsdiag.fixtures import component_a, component_b, component_c, component_d


@pytest.fixture(scope="session")
def A() -> Lts:
    return component_a()


@pytest.fixture(scope="session")
def B() -> Lts:
    return component_b()


@pytest.fixture(scope="session")
def C() -> Lts:
    return component_c()


@pytest.fixture(scope="session")
def D() -> Lts:
    return component_d()


def make_lts(
    n: int,
    transitions,
    observable=(),
    unobservable=(),
    faults=(),
    initial: int = 0,
    name: str | None = None,
) -> Lts:
    """Compact constructor for hand-written test systems."""
    alphabet = Alphabet(
        observable=frozenset(observable),
        unobservable=frozenset(unobservable),
        faults=frozenset(faults),
    )
    return Lts(n, alphabet, tuple(transitions), initial=initial, name=name)


def _succ(lts: Lts, state: int, action: str) -> list[int]:
    return [t for (s, a, t) in lts.transitions if s == state and a == action]


def naive_pair_product(g1: Lts, g2: Lts):
    """Set-based reachability over Q1 x Q2 under the composition rule.

    Shared observable actions move both sides, everything else (privates
    and shared faults) moves one side at a time.  Returns (pairs, steps).
    """
    shared_obs = g1.alphabet.observable & g2.alphabet.observable
    init = (g1.initial, g2.initial)
    pairs = {init}
    steps = set()
    work = [init]
    while work:
        (x, y) = work.pop()
        moves = []
        for a in sorted(g1.alphabet.actions | g2.alphabet.actions):
            if a in shared_obs:
                for t1 in _succ(g1, x, a):
                    for t2 in _succ(g2, y, a):
                        moves.append((a, (t1, t2)))
            else:
                if a in g1.alphabet:
                    for t1 in _succ(g1, x, a):
                        moves.append((a, (t1, y)))
                if a in g2.alphabet:
                    for t2 in _succ(g2, y, a):
                        moves.append((a, (x, t2)))
        for (a, nxt) in moves:
            steps.add(((x, y), a, nxt))
            if nxt not in pairs:
                pairs.add(nxt)
                work.append(nxt)
    return pairs, steps


def naive_annotated(lts: Lts, fault: str):
    """(states, steps) of the fault-tagged copy, as ((q, tag), a, (q', tag'))."""
    init = (lts.initial, False)
    states = {init}
    steps = set()
    work = [init]
    while work:
        (q, tag) = work.pop()
        for (s, a, t) in lts.transitions:
            if s != q:
                continue
            nxt = (t, tag or a == fault)
            steps.add(((q, tag), a, nxt))
            if nxt not in states:
                states.add(nxt)
                work.append(nxt)
    return states, steps


def naive_twin_pairs(lts: Lts, fault: str):
    """Set-based twin-plant state space: pairs of annotated states
    synchronized on observable actions, interleaved otherwise."""
    ann_states, ann_steps = naive_annotated(lts, fault)
    by_src: dict = {}
    for (src, a, dst) in ann_steps:
        by_src.setdefault(src, []).append((a, dst))
    init = ((lts.initial, False), (lts.initial, False))
    pairs = {init}
    work = [init]
    while work:
        (l, r) = work.pop()
        nxts = []
        for (a, lt) in by_src.get(l, []):
            if a in lts.alphabet.observable:
                for (a2, rt) in by_src.get(r, []):
                    if a2 == a:
                        nxts.append((lt, rt))
            else:
                nxts.append((lt, r))
        for (a, rt) in by_src.get(r, []):
            if a not in lts.alphabet.observable:
                nxts.append((l, rt))
        for nxt in nxts:
            if nxt not in pairs:
                pairs.add(nxt)
                work.append(nxt)
    return pairs
