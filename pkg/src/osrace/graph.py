"""Explicit optimistic-reordering graph, witness linearization and checking."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .closure import Frontier, frontier_of_events
from .index import TraceIndex
from .trace import ACQUIRE, READ, RELEASE, WRITE, Trace

TO, CONF, MATCH, UNMATCH = "to", "conf", "match", "unmatch"
FAMILIES = (TO, CONF, MATCH, UNMATCH)


@dataclass
class OptGraph:
    nodes: List[int] = field(default_factory=list)
    edges: Dict[str, List[Tuple[int, int]]] = field(
        default_factory=lambda: {k: [] for k in FAMILIES}
    )

    def all_edges(self) -> List[Tuple[int, int]]:
        return [e for fam in FAMILIES for e in self.edges[fam]]


@dataclass
class Witness:
    order: List[int]
    focal: Optional[Tuple[int, int]] = None

    def to_text(self, trace: Trace) -> str:
        a, b = self.focal if self.focal else (-1, -1)
        lines = [f"# witness for ({a + 1},{b + 1})"]
        lines.extend(trace[i].to_line() for i in self.order)
        return "\n".join(lines) + "\n"


def build_opt_graph(index: TraceIndex, f: Frontier) -> OptGraph:
    """Reordering graph over the events of ``f``.

    Conflict and critical-section edges link events that are consecutive
    among the *in-set* events, not among all of the trace. Unmatched edges
    run from every release of a lock to each open acquire of that lock.
    """
    g = OptGraph()
    nodes = f.events(index)
    g.nodes = nodes
    cut, tid, pos, op, obj = f.cut, index.tid, index.pos, index.op, index.obj

    def inside(e: Optional[int]) -> bool:
        return e is not None and pos[e] <= cut[tid[e]]

    E = g.edges
    for e in nodes:
        pv = index.prev[e]
        if inside(pv):
            E[TO].append((pv, e))
        js = index.join_src[e]
        if inside(js):
            E[TO].append((js, e))

    last_w: Dict[int, int] = {}
    reads_since: Dict[int, List[int]] = {}
    cs: Dict[int, List[Tuple[int, int]]] = {}
    rels: Dict[int, List[int]] = {}
    for e in nodes:
        k = op[e]
        if k == READ:
            v = obj[e]
            w = last_w.get(v)
            if w is not None:
                E[CONF].append((w, e))
            reads_since.setdefault(v, []).append(e)
        elif k == WRITE:
            v = obj[e]
            rs = reads_since.pop(v, None)
            if rs:
                E[CONF].extend((r, e) for r in rs)
            elif v in last_w:
                E[CONF].append((last_w[v], e))
            last_w[v] = e
        elif k == ACQUIRE:
            r = index.match[e]
            if inside(r):
                cs.setdefault(obj[e], []).append((e, r))
        elif k == RELEASE:
            rels.setdefault(obj[e], []).append(e)
    for lock, sections in cs.items():
        for (_, r), (a2, _) in zip(sections, sections[1:]):
            E[MATCH].append((r, a2))
    # every in-set release of the lock precedes each of its open acquires
    for lock, acqs in f.open_acqs.items():
        for r in rels.get(lock, ()):
            E[UNMATCH].extend((r, a) for a in acqs)
    return g


def check_acyclic_and_linearize(
    g: OptGraph, focal: Optional[Tuple[int, int]] = None
) -> Optional[Witness]:
    """Topological order, smallest trace index first among ready nodes."""
    indeg = {u: 0 for u in g.nodes}
    adj: Dict[int, List[int]] = {u: [] for u in g.nodes}
    for u, v in g.all_edges():
        adj[u].append(v)
        indeg[v] += 1
    ready = [u for u, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in adj[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != len(g.nodes):
        return None
    return Witness(order, focal)


@dataclass
class ValidationReport:
    ok: bool
    clause: Optional[str] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _fail(clause: str, detail: str) -> ValidationReport:
    return ValidationReport(False, clause, detail)


def validate_witness(index: TraceIndex, w: Witness, e1: int, e2: int) -> ValidationReport:
    """Check that ``w`` is an optimistic correct reordering over an
    optimistically lock-closed set in which both ``e1`` and ``e2`` are enabled.

    Clauses are checked in a fixed order and the first failure is reported.
    """
    order = w.order
    n = index.n
    if any(not (0 <= e < n) for e in order) or len(set(order)) != len(order):
        return _fail("events", "unknown or repeated events")
    where = {e: k for k, e in enumerate(order)}
    op, obj, tid = index.op, index.obj, index.tid

    # (thread order, reads-from)-closed
    for e in order:
        for dep in (index.prev[e], index.lw[e], index.join_src[e]):
            if dep is not None and dep not in where:
                return _fail("closed", f"e{e + 1} needs e{dep + 1}")

    # thread order preserved
    for e in order:
        for dep in (index.prev[e], index.join_src[e]):
            if dep is not None and where[dep] > where[e]:
                return _fail("thread-order", f"e{dep + 1} must precede e{e + 1}")

    # reads-from preserved
    last_write: Dict[int, int] = {}
    for e in order:
        if op[e] == WRITE:
            last_write[obj[e]] = e
        elif op[e] == READ:
            seen = last_write.get(obj[e])
            if seen != index.lw[e]:
                got = "no write" if seen is None else f"e{seen + 1}"
                return _fail("reads-from", f"e{e + 1} observes {got}")

    # lock semantics, at most one trailing unmatched acquire per lock
    holder: Dict[int, int] = {}
    for e in order:
        if op[e] == ACQUIRE:
            if obj[e] in holder:
                return _fail("lock", f"e{e + 1} acquires a held lock")
            holder[obj[e]] = e
        elif op[e] == RELEASE:
            if holder.get(obj[e]) != index.match[e]:
                return _fail("lock", f"e{e + 1} releases a lock it does not hold")
            del holder[obj[e]]

    # focal events enabled
    for e in (e1, e2):
        if e in where:
            return _fail("enabled", f"focal e{e + 1} is in the reordering")
        pv = index.prev[e]
        if pv is not None and pv not in where:
            return _fail("enabled", f"e{pv + 1} (predecessor of e{e + 1}) missing")

    # optimism: conflicting accesses keep their order
    accesses: Dict[int, List[int]] = {}
    for e in order:
        if op[e] == READ or op[e] == WRITE:
            accesses.setdefault(obj[e], []).append(e)
    for v, seq in accesses.items():
        max_any = max_w = -1
        for e in seq:
            if e < (max_any if op[e] == WRITE else max_w):
                return _fail("conflict-order", f"e{e + 1} reordered against a conflicting access")
            max_any = max(max_any, e)
            if op[e] == WRITE:
                max_w = max(max_w, e)

    # optimism: fully matched critical sections keep their order
    matched_acqs: Dict[int, List[int]] = {}
    for e in order:
        if op[e] == ACQUIRE and index.match[e] is not None and index.match[e] in where:
            matched_acqs.setdefault(obj[e], []).append(e)
    for l, seq in matched_acqs.items():
        if seq != sorted(seq):
            return _fail("cs-order", f"critical sections on {index.locks[l]} reversed")

    # optimistically lock-closed
    for l, a in holder.items():
        r = index.match[a]
        if r is not None and not (index.tlc_contains(r, e1) or index.tlc_contains(r, e2)):
            return _fail("lock-closed", f"release e{r + 1} of open acquire e{a + 1} could be added")
    return ValidationReport(True)


def witness_for_frontier(index: TraceIndex, f: Frontier, e1: int, e2: int) -> Optional[Witness]:
    return check_acyclic_and_linearize(build_opt_graph(index, f), (e1, e2))


def graph_of_events(index: TraceIndex, events) -> OptGraph:
    return build_opt_graph(index, frontier_of_events(index, events))
