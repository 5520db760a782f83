"""Derived relations over a trace, built in one left-to-right pass.

Events are referred to by their 0-based trace index everywhere below the
parsing layer. Threads, variables and locks are interned to dense ints.

Thread order is *generalized*: the fork event of a thread acts as the
thread-order predecessor of that thread's first event, and a join event
additionally depends on the last event of the joined thread.
"""
from __future__ import annotations

from bisect import bisect_right
from typing import Dict, List, Optional, Sequence, Tuple

from .trace import ACQUIRE, FORK, JOIN, READ, RELEASE, WRITE, Trace


class TraceIndex:
    """Immutable index over a validated trace.

    ``clock[e]`` is a per-thread vector such that event ``f`` lies in the
    thread-order/reads-from closure of ``{e}`` iff
    ``pos[f] <= clock[e][tid[f]]``. Positions are 1-based within a thread.
    """

    def __init__(self, trace: Trace):
        self.trace = trace
        events = trace.events
        n = len(events)
        self.n = n
        self.threads: List[str] = list(trace.threads)
        self.vars: List[str] = list(trace.vars)
        self.locks: List[str] = list(trace.locks)
        self.thread_id = {t: i for i, t in enumerate(self.threads)}
        self.var_id = {v: i for i, v in enumerate(self.vars)}
        self.lock_id = {l: i for i, l in enumerate(self.locks)}
        T = len(self.threads)
        self.T = T
        L = len(self.locks)

        self.op: List[str] = [e.op for e in events]
        self.tid: List[int] = [0] * n
        self.pos: List[int] = [0] * n
        # var id for accesses, lock id for acq/rel, thread id for fork/join
        self.obj: List[int] = [0] * n
        self.prev: List[Optional[int]] = [None] * n
        self.lw: List[Optional[int]] = [None] * n
        self.match: List[Optional[int]] = [None] * n
        self.join_src: List[Optional[int]] = [None] * n
        self.clock: List[Tuple[int, ...]] = [()] * n
        self.held: List[Tuple[int, ...]] = [()] * n
        self.per_thread: List[List[int]] = [[] for _ in range(T)]
        self.per_var: List[List[int]] = [[] for _ in self.vars]
        self.per_lock: List[List[Tuple[int, Optional[int]]]] = [[] for _ in range(L)]
        # per (thread, var): accesses and writes, as parallel idx/pos lists
        self.acc_idx: List[Dict[int, List[int]]] = [{} for _ in range(T)]
        self.acc_pos: List[Dict[int, List[int]]] = [{} for _ in range(T)]
        self.wr_idx: List[Dict[int, List[int]]] = [{} for _ in range(T)]
        self.wr_pos: List[Dict[int, List[int]]] = [{} for _ in range(T)]
        # per (thread, lock): releases, as parallel idx/pos lists
        self.rel_idx: List[Dict[int, List[int]]] = [{} for _ in range(T)]
        self.rel_pos: List[Dict[int, List[int]]] = [{} for _ in range(T)]

        last_write: Dict[int, int] = {}
        open_acq: Dict[int, int] = {}  # lock -> pending acquire idx
        fork_of: Dict[int, int] = {}  # child tid -> fork idx
        held_now: List[Tuple[int, ...]] = [()] * T
        cs_slot: Dict[int, int] = {}  # acquire idx -> slot in per_lock
        zero = (0,) * T

        for i, e in enumerate(events):
            t = self.thread_id[e.thread]
            self.tid[i] = t
            mine = self.per_thread[t]
            mine.append(i)
            p = len(mine)
            self.pos[i] = p
            if p > 1:
                pv = mine[-2]
            else:
                pv = fork_of.get(t)
            self.prev[i] = pv
            c = list(self.clock[pv]) if pv is not None else list(zero)
            op = e.op
            if op == READ or op == WRITE:
                v = self.var_id[e.target]
                self.obj[i] = v
                self.per_var[v].append(i)
                self.acc_idx[t].setdefault(v, []).append(i)
                self.acc_pos[t].setdefault(v, []).append(p)
                if op == READ:
                    w = last_write.get(v)
                    self.lw[i] = w
                    if w is not None:
                        cw = self.clock[w]
                        c = [a if a >= b else b for a, b in zip(c, cw)]
                else:
                    last_write[v] = i
                    self.wr_idx[t].setdefault(v, []).append(i)
                    self.wr_pos[t].setdefault(v, []).append(p)
            elif op == ACQUIRE:
                l = self.lock_id[e.target]
                self.obj[i] = l
                open_acq[l] = i
                cs_slot[i] = len(self.per_lock[l])
                self.per_lock[l].append((i, None))
                held_now[t] = held_now[t] + (i,)
            elif op == RELEASE:
                l = self.lock_id[e.target]
                self.obj[i] = l
                a = open_acq.pop(l, None)
                if a is not None:
                    self.match[a] = i
                    self.match[i] = a
                    self.per_lock[l][cs_slot[a]] = (a, i)
                    held_now[t] = tuple(x for x in held_now[t] if x != a)
                self.rel_idx[t].setdefault(l, []).append(i)
                self.rel_pos[t].setdefault(l, []).append(p)
            elif op == FORK:
                child = self.thread_id[e.target]
                self.obj[i] = child
                fork_of[child] = i
            elif op == JOIN:
                child = self.thread_id[e.target]
                self.obj[i] = child
                theirs = self.per_thread[child]
                if theirs:
                    src = theirs[-1]
                    self.join_src[i] = src
                    cj = self.clock[src]
                    c = [a if a >= b else b for a, b in zip(c, cj)]
            c[t] = p
            self.clock[i] = tuple(c)
            self.held[i] = held_now[t]

        self.thread_len: List[int] = [len(x) for x in self.per_thread]

    # -- small queries -------------------------------------------------

    def tlc_contains(self, anchor: Optional[int], query: int) -> bool:
        if anchor is None:
            return False
        return self.pos[query] <= self.clock[anchor][self.tid[query]]

    def event_at(self, t: int, p: int) -> int:
        """Trace index of the ``p``-th (1-based) event of thread ``t``."""
        return self.per_thread[t][p - 1]

    def last_release(self, cut: Sequence[int], lock: int) -> Optional[int]:
        """Last release of ``lock`` (in trace order) inside the cut."""
        best = None
        for t in range(self.T):
            ps = self.rel_pos[t].get(lock)
            if not ps:
                continue
            k = bisect_right(ps, cut[t])
            if k:
                r = self.rel_idx[t][lock][k - 1]
                if best is None or r > best:
                    best = r
        return best

    def conflicting(self, a: int, b: int) -> bool:
        op = self.op
        return (
            a != b
            and op[a] in (READ, WRITE)
            and op[b] in (READ, WRITE)
            and self.obj[a] == self.obj[b]
            and (op[a] == WRITE or op[b] == WRITE)
        )

    def var_name(self, i: int) -> str:
        return self.trace.events[i].target


def build_indices(trace: Trace) -> TraceIndex:
    return TraceIndex(trace)


def tlc_contains(index: TraceIndex, anchor: int, query: int) -> bool:
    """Whether ``query`` is in the thread-order/reads-from closure of ``anchor``."""
    return index.tlc_contains(anchor, query)
