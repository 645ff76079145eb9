"""Fault-free versions of a component: delete fault transitions, keep the
part still reachable without them.

The alphabet is left untouched, so synchronization behavior against other
components is unchanged even when the reduced system no longer uses some
labels.  The result may be non-live (states can lose all their outgoing
transitions); liveness is only a concern for the object finally handed to
a diagnosability check.
"""

from __future__ import annotations

from collections import deque

from .lts import Lts, LtsError


def _prune(lts: Lts, banned: frozenset[str], name: str | None) -> Lts:
    """Sub-LTS reachable without traversing any `banned` action."""
    seen = {lts.initial}
    order = [lts.initial]
    queue = deque(order)
    while queue:
        q = queue.popleft()
        for (a, t) in lts.adjacency[q]:
            if a in banned or t in seen:
                continue
            seen.add(t)
            order.append(t)
            queue.append(t)
    remap = {old: new for new, old in enumerate(order)}
    transitions = tuple(
        (remap[s], a, remap[t])
        for (s, a, t) in lts.transitions
        if a not in banned and s in remap and t in remap
    )
    names = None
    if lts.state_names is not None:
        names = tuple(lts.state_names[old] for old in order)
    return Lts(
        n_states=len(order),
        alphabet=lts.alphabet,
        transitions=transitions,
        initial=0,
        name=name,
        state_names=names,
    )


def fault_free(lts: Lts, fault: str) -> Lts:
    """Remove one fault class and restrict to what stays reachable."""
    if fault not in lts.alphabet.faults:
        raise LtsError(f"{fault!r} is not a declared fault")
    name = f"{lts.name}^{fault}" if lts.name else None
    return _prune(lts, frozenset((fault,)), name)


def fault_free_all(lts: Lts) -> Lts:
    """Remove every fault class at once.

    Equals folding fault_free over the fault set in any order; with no
    faults declared this is just the reachable restriction.
    """
    name = f"{lts.name}^F" if lts.name else None
    return _prune(lts, lts.alphabet.faults, name)
