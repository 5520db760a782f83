"""Race detection: single pairs, incremental per-event sweeps, whole traces."""
from __future__ import annotations

import multiprocessing as mp
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .abstract import EisTables, has_backward_cycle, precompute_eis
from .closure import ClosureStats, Frontier, closure
from .graph import Witness, witness_for_frontier
from .index import TraceIndex, build_indices
from .trace import READ, WRITE, Trace

ABSORBED = "absorbed"
LOCK_INFEASIBLE = "lock-infeasible"
CYCLIC = "cyclic"
RACE = "race"

MODES = ("events", "locations", "variables")


@dataclass
class PairVerdict:
    race: bool
    reason: str
    witness: Optional[Witness] = None
    frontier: Optional[Frontier] = None


def lock_feasible(index: TraceIndex, f: Frontier) -> bool:
    return all(len(acqs) <= 1 for acqs in f.open_acqs.values())


def _verdict(index, eis, res, e1, e2, want_witness) -> PairVerdict:
    if res.absorbed:
        return PairVerdict(False, ABSORBED)
    f = res.frontier
    if not lock_feasible(index, f):
        return PairVerdict(False, LOCK_INFEASIBLE, frontier=f)
    if has_backward_cycle(eis, index, f):
        return PairVerdict(False, CYCLIC, frontier=f)
    w = witness_for_frontier(index, f, e1, e2) if want_witness else None
    return PairVerdict(True, RACE, w, f)


def check_pair(
    index: TraceIndex,
    eis: EisTables,
    e1: int,
    e2: int,
    want_witness: bool = False,
) -> PairVerdict:
    """Decide whether (e1, e2) is an optimistic sync-reversal race."""
    if not (0 <= e1 < index.n and 0 <= e2 < index.n):
        raise IndexError(f"event index out of range: {e1}, {e2}")
    if e1 > e2:
        e1, e2 = e2, e1
    if not index.conflicting(e1, e2):
        raise ValueError(f"e{e1 + 1} and e{e2 + 1} are not a conflicting pair")
    return _verdict(index, eis, closure(index, e1, e2), e1, e2, want_witness)


def partners(index: TraceIndex, e: int, t: int) -> Tuple[List[int], List[int]]:
    """Accesses of thread ``t`` conflicting with ``e`` (all of them, in
    thread order) as parallel (idx, pos) lists."""
    v = index.obj[e]
    if index.op[e] == WRITE:
        return index.acc_idx[t].get(v, []), index.acc_pos[t].get(v, [])
    return index.wr_idx[t].get(v, []), index.wr_pos[t].get(v, [])


def detect_inc(
    index: TraceIndex,
    eis: EisTables,
    e: int,
    t: int,
    first_only: bool = False,
    want_witness: bool = False,
    stats: Optional[ClosureStats] = None,
    verdicts: Optional[Dict[int, PairVerdict]] = None,
) -> List[Tuple[int, Optional[Witness]]]:
    """Partners ``e'`` of thread ``t`` (``e'`` before ``e``) racing with ``e``.

    Candidates are visited earliest first and each closure seeds the next.
    Candidates already inside the running set are absorbed without a
    closure call. ``verdicts``, when given, collects every candidate's verdict.
    """
    if index.op[e] not in (READ, WRITE) or index.tid[e] == t:
        return []
    idxs, poss = partners(index, e, t)
    if not idxs:
        return []
    k_end = bisect_right(idxs, e)
    pv = index.prev[e]
    floor = index.clock[pv][t] if pv is not None else 0
    k = bisect_right(poss, floor, 0, k_end)
    if verdicts is not None:
        for j in range(k):
            verdicts[idxs[j]] = PairVerdict(False, ABSORBED)
    found = []
    seed: Optional[Frontier] = None
    while k < k_end:
        e2 = idxs[k]
        if seed is not None and poss[k] <= seed.cut[t]:
            if verdicts is not None:
                verdicts[e2] = PairVerdict(False, ABSORBED)
            k += 1
            continue
        res = closure(index, e2, e, seed, stats)
        v = _verdict(index, eis, res, e2, e, want_witness)
        if verdicts is not None:
            verdicts[e2] = v
        if not res.absorbed:
            seed = res.frontier
        if v.race:
            found.append((e2, v.witness))
            if first_only:
                break
        k += 1
    return found


@dataclass
class DetectOptions:
    all_pairs: bool = False
    witness: bool = False
    prune_threads: bool = True
    workers: int = 1


@dataclass
class RaceReport:
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    racy_events: Set[int] = field(default_factory=set)
    racy_locations: Set[int] = field(default_factory=set)
    racy_variables: Set[str] = field(default_factory=set)
    witnesses: Dict[Tuple[int, int], Witness] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, index: TraceIndex, pairs, witnesses=None) -> "RaceReport":
        rep = cls(sorted(set(pairs)))
        ev = index.trace.events
        for _, b in rep.pairs:
            rep.racy_events.add(b)
            rep.racy_locations.add(ev[b].loc)
            rep.racy_variables.add(ev[b].target)
        rep.witnesses = dict(witnesses or {})
        return rep

    def count(self, mode: str) -> int:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        return len({"events": self.racy_events, "locations": self.racy_locations,
                    "variables": self.racy_variables}[mode])


def aggregate_report(pairs, mode: str, index: TraceIndex) -> int:
    """Distinct racy events, source locations or variables among ``pairs``."""
    return RaceReport.from_pairs(index, pairs).count(mode)


def _threads_for(index: TraceIndex, e: int, prune: bool) -> List[int]:
    if not prune:
        return [t for t in range(index.T) if t != index.tid[e]]
    v = index.obj[e]
    table = index.acc_idx if index.op[e] == WRITE else index.wr_idx
    out = []
    for t in range(index.T):
        if t == index.tid[e]:
            continue
        lst = table[t].get(v)
        if lst and lst[0] < e:
            out.append(t)
    return out


def _scan(index, eis, events: Sequence[int], opts: DetectOptions):
    pairs, wits = [], {}
    op = index.op
    for e in events:
        if op[e] != READ and op[e] != WRITE:
            continue
        for t in _threads_for(index, e, opts.prune_threads):
            for e2, w in detect_inc(index, eis, e, t, not opts.all_pairs, opts.witness):
                pairs.append((e2, e))
                if w is not None:
                    wits[(e2, e)] = w
    return pairs, wits


_SHARED = None


def _worker(chunk):
    index, eis, opts = _SHARED
    return _scan(index, eis, chunk, opts)


def osr_detect(
    index: TraceIndex, eis: Optional[EisTables] = None, opts: Optional[DetectOptions] = None
) -> RaceReport:
    """Report all races (or one partner per event and thread unless ``all_pairs``)."""
    global _SHARED
    opts = opts or DetectOptions()
    eis = eis if eis is not None else precompute_eis(index)
    events = range(index.n)
    workers = max(1, opts.workers)
    if workers == 1 or index.n < 2000 or "fork" not in mp.get_all_start_methods():
        pairs, wits = _scan(index, eis, events, opts)
    else:
        step = max(1, index.n // (workers * 8))
        chunks = [range(i, min(i + step, index.n)) for i in range(0, index.n, step)]
        _SHARED = (index, eis, opts)
        try:
            with mp.get_context("fork").Pool(workers) as pool:
                parts = pool.map(_worker, chunks)
        finally:
            _SHARED = None
        pairs, wits = [], {}
        for p, w in parts:
            pairs.extend(p)
            wits.update(w)
    return RaceReport.from_pairs(index, pairs, wits)


def detect_trace(trace: Trace, **kw) -> RaceReport:
    index = build_indices(trace)
    return osr_detect(index, precompute_eis(index), DetectOptions(**kw))
