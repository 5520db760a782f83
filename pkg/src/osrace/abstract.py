"""Constant-size cycle detection over a closure set.

The explicit reordering graph over a set S has O(|S|) nodes, but a cycle
must use a backward edge from the last release of some lock to an open
acquire of that lock. So it suffices to keep those events as nodes and to
know which of them reach which via forward edges. Forward reachability is
answered from per-thread-pair tables of earliest single-edge successors
(``EisTables``) with range-minimum queries and a Dijkstra-style relaxation
over threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .closure import Frontier
from .index import TraceIndex
from .rmq import SparseTable
from .trace import ACQUIRE, FORK, READ, RELEASE, WRITE


class EisTables:
    """``raw[t1][t2][p-1]``: earliest position in ``t2`` with a direct
    forward edge from the ``p``-th event of ``t1``; ``inf[t2]`` if none."""

    def __init__(self, raw: List[List[List[int]]], inf: List[int]):
        self.raw = raw
        self.inf = inf
        T = len(raw)
        self.tables: List[List[Optional[SparseTable]]] = [
            [SparseTable(raw[a][b]) if raw[a][b] else None for b in range(T)] for a in range(T)
        ]

    def entry(self, t1: int, t2: int, p: int) -> int:
        return self.raw[t1][t2][p - 1]

    def rmq(self, t1: int, t2: int, lo: int, hi: int) -> int:
        """Minimum over positions ``lo..hi`` (1-based, inclusive) of thread ``t1``."""
        return self.tables[t1][t2].query(lo - 1, hi - 1)


def precompute_eis(index: TraceIndex) -> EisTables:
    T = index.T
    lens = index.thread_len
    inf = [n + 1 for n in lens]
    raw = [[[0] * lens[a] for _ in range(T)] for a in range(T)]
    op, tid, pos, obj = index.op, index.tid, index.pos, index.obj
    next_acc: Dict[int, List[int]] = {}
    next_wr: Dict[int, List[int]] = {}
    next_acq: Dict[int, List[int]] = {}
    # last event of a joined thread -> (parent thread, join position)
    join_edge: Dict[int, Tuple[int, int]] = {}
    for j, src in enumerate(index.join_src):
        if src is not None:
            join_edge[src] = (tid[j], pos[j])

    for i in range(index.n - 1, -1, -1):
        t1, p, o, kind = tid[i], pos[i], obj[i], op[i]
        if kind == READ:
            nxt = next_wr.get(o)
        elif kind == WRITE:
            nxt = next_acc.get(o)
        elif kind == RELEASE:
            nxt = next_acq.get(o)
        else:
            nxt = None
        for t2 in range(T):
            best = inf[t2] if nxt is None else nxt[t2]
            if t2 == t1 and p + 1 < best:
                best = p + 1
            raw[t1][t2][p - 1] = best
        if kind == FORK and lens[o]:
            raw[t1][o][p - 1] = 1
        je = join_edge.get(i)
        if je is not None:
            pt, pp = je
            if pp < raw[t1][pt][p - 1]:
                raw[t1][pt][p - 1] = pp

        if kind == READ or kind == WRITE:
            acc = next_acc.get(o)
            if acc is None:
                acc = next_acc[o] = list(inf)
            acc[t1] = p
            if kind == WRITE:
                wr = next_wr.get(o)
                if wr is None:
                    wr = next_wr[o] = list(inf)
                wr[t1] = p
        elif kind == ACQUIRE:
            aq = next_acq.get(o)
            if aq is None:
                aq = next_acq[o] = list(inf)
            aq[t1] = p
    return EisTables(raw, inf)


def earliest_successors(
    eis: EisTables, index: TraceIndex, f: Frontier, e: int, tie_break: str = "low"
) -> List[int]:
    """Per thread, the earliest position reachable from ``e`` by forward
    edges of the reordering graph over ``f``; ``eis.inf[t]`` when none.

    ``e`` itself counts as reachable in its own thread.
    """
    T = index.T
    cut = f.cut
    inf = eis.inf
    per_thread = index.per_thread
    te, pe = index.tid[e], index.pos[e]
    succ = list(inf)
    succ[te] = pe
    hi = cut[te]
    row = eis.tables[te]
    for t in range(T):
        if t != te and row[t] is not None:
            v = row[t].query(pe - 1, hi - 1)
            if v <= cut[t]:
                succ[t] = v

    visited = [False] * T
    order = range(T) if tie_break == "low" else range(T - 1, -1, -1)
    big = index.n
    for _ in range(T):
        pick, pick_key = -1, big + 1
        for t in order:
            if visited[t]:
                continue
            s = succ[t]
            key = per_thread[t][s - 1] if s < inf[t] else big
            if key < pick_key:
                pick, pick_key = t, key
        if pick < 0 or pick_key == big:
            break
        visited[pick] = True
        lo, hi = succ[pick], cut[pick]
        row = eis.tables[pick]
        for t2 in range(T):
            if t2 == pick or row[t2] is None:
                continue
            v = row[t2].query(lo - 1, hi - 1)
            if v < succ[t2] and v <= cut[t2]:
                succ[t2] = v
    return succ


def reaches(succ: List[int], index: TraceIndex, v: int) -> bool:
    return succ[index.tid[v]] <= index.pos[v]


@dataclass
class AbsGraph:
    nodes: List[int] = field(default_factory=list)
    edges: Set[Tuple[int, int]] = field(default_factory=set)
    last_rel: Dict[int, int] = field(default_factory=dict)  # lock -> release
    open_acq: Dict[int, List[int]] = field(default_factory=dict)  # lock -> acquires

    def backward_edges(self) -> List[Tuple[int, int]]:
        return sorted((u, v) for u, v in self.edges if v < u)


def build_abstract_graph(eis: EisTables, index: TraceIndex, f: Frontier) -> AbsGraph:
    g = AbsGraph()
    for lock in range(len(index.locks)):
        r = index.last_release(f.cut, lock)
        if r is not None:
            g.last_rel[lock] = r
    g.open_acq = {l: list(a) for l, a in f.open_acqs.items()}
    nodes = set(g.last_rel.values())
    for acqs in g.open_acq.values():
        nodes.update(acqs)
    g.nodes = sorted(nodes)
    for u in g.nodes:
        succ = earliest_successors(eis, index, f, u)
        for v in g.nodes:
            if v != u and reaches(succ, index, v):
                g.edges.add((u, v))
    for lock, acqs in g.open_acq.items():
        r = g.last_rel.get(lock)
        if r is not None:
            for a in acqs:
                g.edges.add((r, a))
    return g


def _has_cycle(nodes, adj: Dict[int, List[int]]) -> bool:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {u: WHITE for u in nodes}
    for root in nodes:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adj.get(root, ())))]
        color[root] = GREY
        while stack:
            u, it = stack[-1]
            for v in it:
                if color[v] == GREY:
                    return True
                if color[v] == WHITE:
                    color[v] = GREY
                    stack.append((v, iter(adj.get(v, ()))))
                    break
            else:
                color[u] = BLACK
                stack.pop()
    return False


def abs_acyclic(g: AbsGraph) -> bool:
    adj: Dict[int, List[int]] = {}
    for u, v in sorted(g.edges):
        adj.setdefault(u, []).append(v)
    return not _has_cycle(g.nodes, adj)


def has_backward_cycle(eis: EisTables, index: TraceIndex, f: Frontier) -> bool:
    """Cycle test equivalent to ``not abs_acyclic(build_abstract_graph(...))``.

    Every cycle passes through a backward edge (last release -> earlier open
    acquire), and forward reachability composes, so it is enough to run the
    successor computation from the targets of backward edges and look for a
    cycle among those edges.
    """
    back: List[Tuple[int, int]] = []
    for lock, acqs in f.open_acqs.items():
        r = index.last_release(f.cut, lock)
        if r is None:
            continue
        for a in acqs:
            if a < r:
                back.append((r, a))
    if not back:
        return False
    adj: Dict[int, List[int]] = {}
    for k, (_, a) in enumerate(back):
        succ = earliest_successors(eis, index, f, a)
        adj[k] = [m for m, (r, _) in enumerate(back) if reaches(succ, index, r)]
    return _has_cycle(range(len(back)), adj)


def to_dot(g: AbsGraph, index: TraceIndex) -> str:
    lines = ["digraph abstract {"]
    for u in g.nodes:
        lines.append(f'  e{u + 1} [label="e{u + 1} {index.op[u]}({index.trace[u].target})"];')
    for u, v in sorted(g.edges):
        style = ' [style=dashed]' if v < u else ""
        lines.append(f"  e{u + 1} -> e{v + 1}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
