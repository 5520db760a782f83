"""Smallest optimistically lock-closed set of a conflicting pair.

Every set handled here is downward closed under (generalized) thread order,
so it is stored as a per-thread cut: the first ``cut[t]`` events of thread
``t`` are in the set. Union is a pointwise max and membership is a single
comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .index import TraceIndex


@dataclass(frozen=True)
class Frontier:
    cut: Tuple[int, ...]
    # lock id -> acquires inside the cut whose release is outside it
    open_acqs: Dict[int, List[int]] = field(default_factory=dict, compare=False)

    def size(self) -> int:
        return sum(self.cut)

    def events(self, index: TraceIndex) -> List[int]:
        out = []
        for t, c in enumerate(self.cut):
            out.extend(index.per_thread[t][:c])
        return sorted(out)

    def leq(self, other: "Frontier") -> bool:
        return all(a <= b for a, b in zip(self.cut, other.cut))


def open_acquires(index: TraceIndex, cut: Sequence[int]) -> Dict[int, List[int]]:
    """Recompute the open acquires of a cut from scratch."""
    out: Dict[int, List[int]] = {}
    obj = index.obj
    for t, c in enumerate(cut):
        if c:
            for a in index.held[index.per_thread[t][c - 1]]:
                out.setdefault(obj[a], []).append(a)
    for acqs in out.values():
        acqs.sort()
    return out


def empty_frontier(index: TraceIndex) -> Frontier:
    return Frontier((0,) * index.T, {})


def make_frontier(index: TraceIndex, cut: Sequence[int]) -> Frontier:
    cut = tuple(cut)
    return Frontier(cut, open_acquires(index, cut))


def frontier_of_events(index: TraceIndex, events) -> Frontier:
    """Smallest cut containing ``events`` (not closed under reads-from)."""
    cut = [0] * index.T
    for e in events:
        t = index.tid[e]
        cut[t] = max(cut[t], index.pos[e])
    return make_frontier(index, cut)


def frontier_contains(f: Frontier, index: TraceIndex, e: int) -> bool:
    return index.pos[e] <= f.cut[index.tid[e]]


@dataclass
class ClosureResult:
    frontier: Optional[Frontier]
    absorbed: bool


@dataclass
class ClosureStats:
    """Work counters, used to check the amortized cost of incremental sweeps."""

    calls: int = 0
    releases_added: int = 0
    events_added: int = 0


def closure(
    index: TraceIndex,
    e1: int,
    e2: int,
    seed: Optional[Frontier] = None,
    stats: Optional[ClosureStats] = None,
) -> ClosureResult:
    """Grow ``seed`` into the smallest optimistically lock-closed set for (e1, e2).

    ``seed`` must be empty or the closure of (e1, e2') for some e2' that
    thread-precedes e2 (or e1' thread-preceding e1). Same-thread pairs, and
    pairs where one event is forced in by the other's predecessor, come back
    absorbed. A read may still race with the write it reads from.
    """
    tid, pos, clock = index.tid, index.pos, index.clock
    t1, p1 = tid[e1], pos[e1]
    t2, p2 = tid[e2], pos[e2]
    if t1 == t2:
        return ClosureResult(None, True)

    T = index.T
    cut = list(seed.cut) if seed is not None else [0] * T
    start = sum(cut)
    for pv in (index.prev[e1], index.prev[e2]):
        if pv is not None:
            cp = clock[pv]
            for t in range(T):
                if cp[t] > cut[t]:
                    cut[t] = cp[t]
    if cut[t1] >= p1 or cut[t2] >= p2:
        return ClosureResult(None, True)

    match, held, per_thread = index.match, index.held, index.per_thread
    blocked = set()
    n_added = 0
    changed = True
    while changed:
        changed = False
        for t in range(T):
            c = cut[t]
            if not c:
                continue
            for a in held[per_thread[t][c - 1]]:
                if a in blocked:
                    continue
                r = match[a]
                if r is None:
                    blocked.add(a)
                    continue
                if pos[r] <= cut[tid[r]]:
                    continue
                cr = clock[r]
                if cr[t1] >= p1 or cr[t2] >= p2:
                    blocked.add(a)
                    continue
                for u in range(T):
                    if cr[u] > cut[u]:
                        cut[u] = cr[u]
                n_added += 1
                changed = True
    if stats is not None:
        stats.calls += 1
        stats.releases_added += n_added
        stats.events_added += sum(cut) - start
    return ClosureResult(make_frontier(index, cut), False)


def closure_events(index: TraceIndex, e1: int, e2: int) -> Optional[List[int]]:
    """Event set of the closure from scratch, or None if absorbed."""
    res = closure(index, e1, e2)
    return None if res.absorbed else res.frontier.events(index)
