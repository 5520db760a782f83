"""Acceptance criteria, one test each, with one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline, or
``python tests/test_acceptance.py`` for just the summary.
"""
import math
import random
import sys
import time
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from osrace.abstract import abs_acyclic, build_abstract_graph, has_backward_cycle, precompute_eis
from osrace.closure import closure
from osrace.detector import CYCLIC, LOCK_INFEASIBLE, DetectOptions, check_pair, detect_inc, osr_detect
from osrace.generators import (
    OvInstance, RandomTraceConfig, gen_ov_trace, gen_random_trace,
)
from osrace.graph import build_opt_graph, check_acyclic_and_linearize, validate_witness
from osrace.index import build_indices
from osrace.oracle import Outcome, oracle_osr_race, oracle_predictable_race
from osrace.rmq import SparseTable

from conftest import load, medium_trace, small_trace
from test_rmq_eis import naive_eis

RESULTS = {}


def report(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[num] = line
    print("\n" + line, flush=True)
    return ok


def _pairs(ix):
    return [(a, b) for b in range(ix.n) for a in range(b) if ix.conflicting(a, b)]


# -- corpora ------------------------------------------------------------

def oracle_corpus():
    """1000 small traces: 800 plain seeds, then 100 traces holding a cyclic
    pair and 100 holding a lock-infeasible pair, each picked from its own
    seeded stream so that those rarer verdicts are exercised too."""
    traces = [small_trace(s) for s in range(800)]

    def stream(start, want, quota, cfg_of):
        s, got = start, []
        while len(got) < quota:
            tr = gen_random_trace(cfg_of(random.Random(s), s), s)
            ix = build_indices(tr)
            eis = precompute_eis(ix)
            if any(check_pair(ix, eis, a, b).reason == want for a, b in _pairs(ix)):
                got.append(tr)
            s += 1
        return got

    traces += stream(10_000, CYCLIC, 100, lambda rng, s: RandomTraceConfig(
        threads=2, locks=rng.randint(1, 2), vars=rng.randint(1, 2), events=12,
        lock_density=rng.choice([0.5, 0.7]), close_all=bool(s % 2)))
    traces += stream(200_000, LOCK_INFEASIBLE, 100, lambda rng, s: RandomTraceConfig(
        threads=rng.randint(2, 3), locks=2, vars=rng.randint(1, 2), events=12,
        lock_density=rng.choice([0.5, 0.7, 0.9]), read_ratio=rng.choice([0.3, 0.5]),
        close_all=bool(s % 3)))
    return traces


# -- criteria -----------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    fails = []
    _, ix, eis = load("sigma1")
    v = check_pair(ix, eis, 0, 11, want_witness=True)
    if not v.race or [x + 1 for x in v.frontier.events(ix)] != [3, 4, 7, 8, 9, 10, 11]:
        fails.append("sigma1 closure/verdict")
    if v.witness is None or len(v.witness.order) != 7 or not validate_witness(ix, v.witness, 0, 11).ok:
        fails.append("sigma1 witness")
    _, ix, eis = load("sigma2")
    v = check_pair(ix, eis, 0, 4)
    if not v.race or [x + 1 for x in v.frontier.events(ix)] != [4]:
        fails.append("sigma2")
    _, ix, eis = load("sigma3")
    if check_pair(ix, eis, 3, 8).reason != CYCLIC:
        fails.append("sigma3")
    _, ix, eis = load("sync_preserving_only")
    if check_pair(ix, eis, 0, 20).race:
        fails.append("sync_preserving_only")
    _, ix, eis = load("memory_reversal")
    if check_pair(ix, eis, 9, 18).race or oracle_predictable_race(ix, 9, 18) != Outcome.YES:
        fails.append("memory_reversal")
    dt = time.perf_counter() - t0
    ok = not fails and dt < 1.0
    return report(1, ok, f"{dt:.3f}s" + (f", failed: {fails}" if fails else ""))


def criterion_2():
    t0 = time.perf_counter()
    corpus = oracle_corpus()
    decided = disagree = unknown = 0
    reasons = Counter()
    examples = []
    for k, tr in enumerate(corpus):
        assert len(tr) <= 12
        ix = build_indices(tr)
        eis = precompute_eis(ix)
        for a, b in _pairs(ix):
            o = oracle_osr_race(ix, a, b)
            if o == Outcome.UNKNOWN:
                unknown += 1
                continue
            decided += 1
            v = check_pair(ix, eis, a, b)
            reasons[v.reason] += 1
            if v.race != (o == Outcome.YES):
                disagree += 1
                examples.append((k, a + 1, b + 1))
    dt = time.perf_counter() - t0
    ok = disagree == 0 and decided > 0 and dt < 300
    return report(2, ok, f"{len(corpus)} traces, {decided} decided pairs, {unknown} unknown, "
                         f"{disagree} disagreements, verdicts {dict(reasons)}, {dt:.1f}s"
                         + (f", e.g. {examples[:3]}" if examples else ""))


def criterion_3():
    t0 = time.perf_counter()
    examined = disagree = cyclic = 0
    for seed in range(500):
        rng = random.Random(seed)
        ix = build_indices(medium_trace(seed, n=rng.randint(10, 300)))
        assert ix.n <= 320  # fork/join may add a few events on top
        eis = precompute_eis(ix)
        pairs = [(a, b) for a, b in _pairs(ix) if ix.tid[a] != ix.tid[b]]
        rng.shuffle(pairs)
        for a, b in pairs[:25]:
            res = closure(ix, a, b)
            if res.absorbed:
                continue
            f = res.frontier
            explicit = check_acyclic_and_linearize(build_opt_graph(ix, f)) is not None
            abstract = abs_acyclic(build_abstract_graph(eis, ix, f))
            fast = not has_backward_cycle(eis, ix, f)
            examined += 1
            cyclic += not explicit
            if not (explicit == abstract == fast):
                disagree += 1
    dt = time.perf_counter() - t0
    ok = disagree == 0 and examined > 0 and dt < 600
    return report(3, ok, f"{examined} frontiers ({cyclic} cyclic), {disagree} disagreements, {dt:.1f}s")


def criterion_4():
    t0 = time.perf_counter()
    sweeps = mismatches = frontiers = frontier_mismatch = 0
    for seed in range(200):
        ix = build_indices(medium_trace(1000 + seed, n=random.Random(seed).randint(20, 150)))
        eis = precompute_eis(ix)
        for e in range(ix.n):
            if ix.op[e] not in ("r", "w"):
                continue
            for t in range(ix.T):
                if t == ix.tid[e]:
                    continue
                cands = [c for c in ix.per_thread[t] if c < e and ix.conflicting(c, e)]
                if not cands:
                    continue
                sweeps += 1
                got = [c for c, _ in detect_inc(ix, eis, e, t)]
                want = [c for c in cands if check_pair(ix, eis, c, e).race]
                mismatches += got != want
                seedf = None
                for c in cands:
                    scratch = closure(ix, c, e)
                    if seedf is not None and not scratch.absorbed:
                        frontiers += 1
                        inc = closure(ix, c, e, seed=seedf)
                        if inc.absorbed or inc.frontier != scratch.frontier:
                            frontier_mismatch += 1
                    if not scratch.absorbed:
                        seedf = scratch.frontier
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and frontier_mismatch == 0 and sweeps > 0
    return report(4, ok, f"{sweeps} sweeps, {mismatches} pair mismatches, "
                         f"{frontiers} seeded closures, {frontier_mismatch} frontier mismatches, {dt:.1f}s")


def criterion_5():
    t0 = time.perf_counter()
    traces = [load(n)[0] for n in ("sigma1", "sigma2", "sigma3", "sync_preserving_only", "memory_reversal")]
    traces += [small_trace(s) for s in range(300)]
    traces += [medium_trace(s) for s in range(100)]
    rng = random.Random(5)
    for _ in range(30):
        d = rng.randint(1, 6)
        p = rng.uniform(0.2, 0.8)
        vec = lambda: tuple(int(rng.random() < p) for _ in range(d))
        traces.append(gen_ov_trace(OvInstance([vec() for _ in range(rng.randint(1, 10))],
                                              [vec() for _ in range(rng.randint(1, 10))], d)))
    races = bad = 0
    for tr in traces:
        ix = build_indices(tr)
        rep = osr_detect(ix, precompute_eis(ix), DetectOptions(all_pairs=True, witness=True))
        for pair in rep.pairs:
            races += 1
            w = rep.witnesses.get(pair)
            if w is None or not validate_witness(ix, w, *pair).ok:
                bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and races > 0
    return report(5, ok, f"{len(traces)} traces, {races} races, {bad} invalid witnesses, {dt:.1f}s")


def criterion_6():
    t0 = time.perf_counter()
    rng = random.Random(6)
    wrong = pos = 0
    for _ in range(200):
        d = rng.randint(1, 8)
        n = rng.randint(1, 50)
        p = rng.uniform(0.3, 0.95)
        vec = lambda: tuple(int(rng.random() < p) for _ in range(d))
        inst = OvInstance([vec() for _ in range(n)], [vec() for _ in range(n)], d)
        truth = inst.has_orthogonal_pair()
        pos += truth
        tr = gen_ov_trace(inst)
        ix = build_indices(tr)
        found = bool(osr_detect(ix, precompute_eis(ix)).pairs)
        wrong += found != truth
    dt = time.perf_counter() - t0
    ok = wrong == 0 and 0 < pos < 200 and dt < 120
    return report(6, ok, f"200 instances ({pos} with an orthogonal pair), {wrong} wrong, {dt:.1f}s")


def criterion_7():
    sizes = [10_000, 30_000, 100_000]
    times = []
    for n in sizes:
        cfg = RandomTraceConfig(threads=8, locks=8, vars=64, events=n, lock_density=0.2, read_ratio=0.5)
        tr = gen_random_trace(cfg, 7)
        t0 = time.perf_counter()
        ix = build_indices(tr)
        osr_detect(ix, precompute_eis(ix))
        times.append(time.perf_counter() - t0)
    xs = [math.log(n) for n in sizes]
    ys = [math.log(t) for t in times]
    per_m = [math.log(t / n * 1e6) for t, n in zip(times, sizes)]

    def slope(us):
        mx, mu = sum(xs) / 3, sum(us) / 3
        return sum((x - mx) * (u - mu) for x, u in zip(xs, us)) / sum((x - mx) ** 2 for x in xs)

    s_total, s_per = slope(ys), slope(per_m)
    ok = times[-1] < 300 and s_total <= 2.2
    return report(7, ok, "times " + ", ".join(f"{n}: {t:.2f}s" for n, t in zip(sizes, times))
                  + f"; slope total {s_total:.2f}, per-event {s_per:.2f}")


def criterion_8():
    t0 = time.perf_counter()
    rng = random.Random(8)
    bad_rmq = 0
    probes = 0
    while probes < 10_000:
        data = [rng.randint(-10**6, 10**6) for _ in range(rng.randint(1, 300))]
        tab = SparseTable(data)
        for _ in range(100):
            lo = rng.randrange(len(data))
            hi = rng.randrange(lo, len(data))
            bad_rmq += tab.query(lo, hi) != min(data[lo:hi + 1])
            probes += 1
    bad_eis = 0
    for seed in range(20):
        ix = build_indices(medium_trace(seed, n=random.Random(seed).randint(50, 480)))
        assert ix.n <= 500
        bad_eis += precompute_eis(ix).raw != naive_eis(ix)
    dt = time.perf_counter() - t0
    ok = bad_rmq == 0 and bad_eis == 0
    return report(8, ok, f"{probes} probes with {bad_rmq} wrong, 20 traces with {bad_eis} EIS mismatches, {dt:.1f}s")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_acceptance(crit, capsys):
    ok = crit()
    with capsys.disabled():
        print(RESULTS[int(crit.__name__.split("_")[1])])
    assert ok


if __name__ == "__main__":
    for crit in CRITERIA:
        crit()
    print("\nsummary")
    for k in sorted(RESULTS):
        print(RESULTS[k])
