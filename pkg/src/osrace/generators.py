"""Trace generators: the orthogonal-vectors encoding and seeded random traces."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, TextIO, Tuple, Union

from .trace import ACQUIRE, FORK, JOIN, READ, RELEASE, WRITE, Event, Trace

Vector = Tuple[int, ...]


@dataclass
class OvInstance:
    A: List[Vector] = field(default_factory=list)
    B: List[Vector] = field(default_factory=list)
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        self.A = [tuple(v) for v in self.A]
        self.B = [tuple(v) for v in self.B]
        for v in self.A + self.B:
            if len(v) != self.d or any(b not in (0, 1) for b in v):
                raise ValueError(f"bad vector {v!r} for dimension {self.d}")

    def has_orthogonal_pair(self) -> bool:
        return any(
            all(x * y == 0 for x, y in zip(a, b)) for a in self.A for b in self.B
        )


def parse_ov(src: Union[str, TextIO]) -> OvInstance:
    """One 0/1 string per line; the two sets are separated by a ``--`` line."""
    text = src if isinstance(src, str) else src.read()
    sets: List[List[Vector]] = [[]]
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "--":
            if len(sets) == 2:
                raise ValueError(f"line {ln}: more than one separator")
            sets.append([])
            continue
        if set(line) - {"0", "1"}:
            raise ValueError(f"line {ln}: expected a 0/1 string, got {line!r}")
        sets[-1].append(tuple(int(c) for c in line))
    if len(sets) != 2:
        raise ValueError("missing '--' separator")
    A, B = sets
    dims = {len(v) for v in A + B}
    if len(dims) > 1:
        raise ValueError("vectors of different lengths")
    return OvInstance(A, B, dims.pop() if dims else 1)


def gen_ov_trace(inst: OvInstance) -> Trace:
    """Thread ``tA`` runs one clause per vector of A, then ``tB`` one per
    vector of B. A clause takes the locks of the vector's set coordinates in
    ascending order, writes ``x`` and releases in reverse order."""
    rows = []
    for thread, vecs in (("tA", inst.A), ("tB", inst.B)):
        for v in vecs:
            held = [f"l{j + 1}" for j, bit in enumerate(v) if bit]
            rows.extend((thread, ACQUIRE, l) for l in held)
            rows.append((thread, WRITE, "x"))
            rows.extend((thread, RELEASE, l) for l in reversed(held))
    events = [Event(i, t, op, x, i + 1) for i, (t, op, x) in enumerate(rows)]
    return Trace(events)


@dataclass
class RandomTraceConfig:
    threads: int = 4
    locks: int = 2
    vars: int = 4
    events: int = 100
    lock_density: float = 0.2
    read_ratio: float = 0.5
    max_nesting: int = 2
    close_all: bool = True

    def __post_init__(self):
        if self.threads < 1 or self.locks < 0 or self.vars < 1 or self.events < 0:
            raise ValueError("dimensions must be positive")
        if not (0.0 <= self.lock_density <= 1.0 and 0.0 <= self.read_ratio <= 1.0):
            raise ValueError("ratios must lie in [0, 1]")


def gen_random_trace(cfg: RandomTraceConfig, seed: int = 0) -> Trace:
    """Well-formed random trace with exactly ``cfg.events`` events.

    Critical sections nest properly per thread, a lock is never taken while
    another thread holds it, and every section is closed before the event
    budget runs out, so there are no open acquires at the end. With
    ``close_all=False`` the trace may stop inside critical sections.
    """
    rng = random.Random(seed)
    T = cfg.threads
    names = [f"T{i}" for i in range(T)]
    stacks: List[List[str]] = [[] for _ in range(T)]
    owner = {}
    rows: List[Tuple[str, str, str]] = []
    remaining = cfg.events
    while remaining > 0:
        t = rng.randrange(T)
        st = stacks[t]
        pending = sum(len(s) for s in stacks) if cfg.close_all else 0
        if pending >= remaining:
            # only releases fit in the budget now
            t = next(i for i in range(T) if stacks[i])
            rows.append((names[t], RELEASE, stacks[t].pop()))
            del owner[rows[-1][2]]
            remaining -= 1
            continue
        r = rng.random()
        if st and r < cfg.lock_density / 2:
            l = st.pop()
            del owner[l]
            rows.append((names[t], RELEASE, l))
        elif (
            r < cfg.lock_density
            and cfg.locks
            and len(st) < cfg.max_nesting
            and pending + 2 <= remaining
        ):
            free = [f"l{k}" for k in range(cfg.locks) if f"l{k}" not in owner]
            if not free:
                continue
            l = rng.choice(free)
            owner[l] = t
            st.append(l)
            rows.append((names[t], ACQUIRE, l))
        else:
            v = f"x{rng.randrange(cfg.vars)}"
            rows.append((names[t], READ if rng.random() < cfg.read_ratio else WRITE, v))
        remaining -= 1
    events = [Event(i, t, op, x, i + 1) for i, (t, op, x) in enumerate(rows)]
    return Trace(events)


def add_fork_join(trace: Trace, seed: int = 0, p: float = 0.5) -> Trace:
    """Let the first thread fork (and later join) some of the others.

    Each other thread is, with probability ``p`` each, forked right before
    its first event and joined right after its last one. The result has up
    to two extra events per thread and stays well formed.
    """
    rng = random.Random(seed)
    if not trace.events:
        return trace
    main = trace.events[0].thread
    first, last = {}, {}
    for e in trace.events:
        first.setdefault(e.thread, e.idx)
        last[e.thread] = e.idx
    before, after = {}, {}
    for t in first:
        if t == main:
            continue
        if rng.random() < p:
            before.setdefault(first[t], []).append(t)
        if rng.random() < p:
            after.setdefault(last[t], []).append(t)
    rows = []
    for e in trace.events:
        rows.extend((main, FORK, t) for t in before.get(e.idx, ()))
        rows.append((e.thread, e.op, e.target))
        rows.extend((main, JOIN, t) for t in after.get(e.idx, ()))
    return Trace([Event(i, t, op, x, i + 1) for i, (t, op, x) in enumerate(rows)])
