"""Brute-force deciders for small traces, straight from the definitions.

Nothing here uses vector clocks, the closure fixpoint or the reordering
graphs; closures are recomputed by naive saturation and reorderings are
found by exhaustive search. Both deciders give up with ``UNKNOWN`` rather
than guess once a budget is exceeded.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .index import TraceIndex
from .trace import ACQUIRE, READ, RELEASE, WRITE


class Outcome(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OracleBudget:
    max_events: int = 64
    max_states: int = 2_000_000

    def __post_init__(self):
        if self.max_events <= 0 or self.max_states <= 0:
            raise ValueError("budget limits must be positive")


class _OutOfBudget(Exception):
    pass


def _deps(index: TraceIndex, e: int) -> List[int]:
    return [d for d in (index.prev[e], index.lw[e], index.join_src[e]) if d is not None]


def naive_closure(index: TraceIndex, seeds) -> Set[int]:
    """Thread-order/reads-from closure by saturation."""
    out: Set[int] = set()
    todo = [s for s in seeds if s is not None]
    while todo:
        e = todo.pop()
        if e in out:
            continue
        out.add(e)
        todo.extend(_deps(index, e))
        # every earlier event of the same thread, not just the predecessor
        t = index.tid[e]
        todo.extend(x for x in index.per_thread[t] if x < e)
    return out


def _conflict(index: TraceIndex, a: int, b: int) -> bool:
    op, obj = index.op, index.obj
    return (
        a != b
        and op[a] in (READ, WRITE)
        and op[b] in (READ, WRITE)
        and obj[a] == obj[b]
        and WRITE in (op[a], op[b])
    )


class _Counter:
    def __init__(self, limit: int):
        self.limit = limit
        self.n = 0

    def tick(self):
        self.n += 1
        if self.n > self.limit:
            raise _OutOfBudget


def _cuts(index: TraceIndex, reverse: bool):
    ranges = [range(n + 1) for n in index.thread_len]
    if reverse:
        ranges = [r[::-1] for r in ranges]
    return itertools.product(*ranges)


def _members(index: TraceIndex, cut) -> FrozenSet[int]:
    return frozenset(x for t, c in enumerate(cut) for x in index.per_thread[t][:c])


def _optimistically_lock_closed(index, X: FrozenSet[int], e1, e2, tlc_cache) -> bool:
    if e1 in X or e2 in X:
        return False
    for f in (e1, e2):
        pv = index.prev[f]
        if pv is not None and pv not in X:
            return False
    for e in X:
        if any(d not in X for d in _deps(index, e)):
            return False
    for e in X:
        if index.op[e] == ACQUIRE:
            r = index.match[e]
            if r is None or r in X:
                continue
            tl = tlc_cache.get(r)
            if tl is None:
                tl = tlc_cache[r] = naive_closure(index, [r])
            if e1 not in tl and e2 not in tl:
                return False
    return True


def _linearize_optimistic(index, X: FrozenSet[int], counter: _Counter, reverse: bool) -> bool:
    """Is there an optimistic correct reordering whose event set is X?"""
    op, obj, match = index.op, index.obj, index.match
    T = index.T
    target = [0] * T
    for e in X:
        target[index.tid[e]] = max(target[index.tid[e]], index.pos[e])
    accesses = sorted(e for e in X if op[e] in (READ, WRITE))
    earlier_conf = {e: [a for a in accesses if a < e and _conflict(index, a, e)] for e in accesses}
    matched_acq = sorted(e for e in X if op[e] == ACQUIRE and match[e] in X)
    earlier_cs = {a: [b for b in matched_acq if b < a and obj[b] == obj[a]] for a in matched_acq}
    threads = list(range(T))[::-1] if reverse else list(range(T))
    dead: Set[Tuple[int, ...]] = set()

    def placed_set(cut):
        return _members(index, cut)

    def ok(e, placed, held):
        if any(d not in placed for d in _deps(index, e)):
            return False
        k = op[e]
        if k in (READ, WRITE):
            if any(a not in placed for a in earlier_conf[e]):
                return False
            if k == READ:
                writes = [w for w in placed if op[w] == WRITE and obj[w] == obj[e]]
                last = max(writes) if writes else None
                if last != index.lw[e]:
                    return False
        elif k == ACQUIRE:
            if obj[e] in held:
                return False
            if e in earlier_cs and any(b not in placed for b in earlier_cs[e]):
                return False
        elif k == RELEASE:
            if held.get(obj[e]) != match[e]:
                return False
        return True

    def dfs(cut) -> bool:
        if list(cut) == target:
            return True
        if cut in dead:
            return False
        counter.tick()
        placed = placed_set(cut)
        held = {}
        for a in placed:
            if op[a] == ACQUIRE and match[a] not in placed:
                held[obj[a]] = a
        for t in threads:
            if cut[t] < target[t]:
                e = index.per_thread[t][cut[t]]
                if ok(e, placed, held):
                    nxt = list(cut)
                    nxt[t] += 1
                    if dfs(tuple(nxt)):
                        return True
        dead.add(cut)
        return False

    return dfs((0,) * T)


def oracle_osr_race(
    index: TraceIndex,
    e1: int,
    e2: int,
    budget: OracleBudget = OracleBudget(),
    reverse: bool = False,
) -> Outcome:
    """Search every optimistically lock-closed set for an optimistic
    correct reordering over it in which both events are enabled."""
    if not _conflict(index, e1, e2):
        raise ValueError("not a conflicting pair")
    if index.n > budget.max_events:
        return Outcome.UNKNOWN
    counter = _Counter(budget.max_states)
    tlc_cache: Dict[int, Set[int]] = {}
    try:
        for cut in _cuts(index, reverse):
            counter.tick()
            X = _members(index, cut)
            if not _optimistically_lock_closed(index, X, e1, e2, tlc_cache):
                continue
            if _linearize_optimistic(index, X, counter, reverse):
                return Outcome.YES
    except _OutOfBudget:
        return Outcome.UNKNOWN
    return Outcome.NO


def oracle_predictable_race(
    index: TraceIndex,
    e1: int,
    e2: int,
    budget: OracleBudget = OracleBudget(),
    reverse: bool = False,
) -> Outcome:
    """Search all correct reorderings (as prefixes) for one in which both
    events are enabled."""
    if not _conflict(index, e1, e2):
        raise ValueError("not a conflicting pair")
    if index.n > budget.max_events:
        return Outcome.UNKNOWN
    op, obj, match = index.op, index.obj, index.match
    T = index.T
    lens = index.thread_len
    counter = _Counter(budget.max_states)
    threads = list(range(T))[::-1] if reverse else list(range(T))
    need = [p for p in (index.prev[e1], index.prev[e2]) if p is not None]
    seen: Set = set()

    def enabled_both(placed) -> bool:
        return all(p in placed for p in need)

    def dfs(cut, writers: Tuple[Tuple[int, int], ...]) -> bool:
        key = (cut, writers)
        if key in seen:
            return False
        seen.add(key)
        counter.tick()
        placed = _members(index, cut)
        if enabled_both(placed):
            return True
        lastw = dict(writers)
        held = {}
        for a in placed:
            if op[a] == ACQUIRE and match[a] not in placed:
                held[obj[a]] = a
        for t in threads:
            if cut[t] >= lens[t]:
                continue
            e = index.per_thread[t][cut[t]]
            if e == e1 or e == e2:
                continue
            if any(d not in placed for d in (index.prev[e], index.join_src[e]) if d is not None):
                continue
            k = op[e]
            nw = writers
            if k == READ:
                if lastw.get(obj[e]) != index.lw[e]:
                    continue
            elif k == WRITE:
                d = dict(lastw)
                d[obj[e]] = e
                nw = tuple(sorted(d.items()))
            elif k == ACQUIRE:
                if obj[e] in held:
                    continue
            elif k == RELEASE:
                if held.get(obj[e]) != match[e]:
                    continue
            nxt = list(cut)
            nxt[t] += 1
            if dfs(tuple(nxt), nw):
                return True
        return False

    try:
        return Outcome.YES if dfs((0,) * T, ()) else Outcome.NO
    except _OutOfBudget:
        return Outcome.UNKNOWN
