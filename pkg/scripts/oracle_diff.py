"""Differential fuzzing of the detector against the brute-force oracles.

    python scripts/oracle_diff.py --traces 5000 --max-events 12
"""
import argparse
import random
import sys
from collections import Counter

from osrace.abstract import precompute_eis
from osrace.detector import check_pair
from osrace.generators import RandomTraceConfig, add_fork_join, gen_random_trace
from osrace.index import build_indices
from osrace.oracle import OracleBudget, Outcome, oracle_osr_race, oracle_predictable_race
from osrace.trace import format_trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--traces", type=int, default=1000)
    ap.add_argument("--max-events", type=int, default=12)
    ap.add_argument("--max-threads", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=2_000_000)
    a = ap.parse_args(argv)

    budget = OracleBudget(max_events=max(64, a.max_events + 10), max_states=a.budget)
    tally = Counter()
    bad = 0
    for s in range(a.seed, a.seed + a.traces):
        rng = random.Random(s)
        cfg = RandomTraceConfig(threads=rng.randint(2, a.max_threads), locks=rng.randint(1, 2),
                                vars=rng.randint(1, 2), events=rng.randint(2, a.max_events),
                                lock_density=rng.choice([0.3, 0.5, 0.7]),
                                close_all=rng.random() < 0.7)
        tr = gen_random_trace(cfg, s)
        if rng.random() < 0.3:
            tr = add_fork_join(tr, s)
        ix = build_indices(tr)
        eis = precompute_eis(ix)
        for b in range(ix.n):
            for x in range(b):
                if not ix.conflicting(x, b):
                    continue
                v = check_pair(ix, eis, x, b)
                o = oracle_osr_race(ix, x, b, budget)
                p = oracle_predictable_race(ix, x, b, budget)
                tally[(v.reason, o.value, p.value)] += 1
                if o != Outcome.UNKNOWN and v.race != (o == Outcome.YES):
                    bad += 1
                    print(f"mismatch seed={s} pair=({x + 1},{b + 1}) fast={v.reason} oracle={o.value}")
                    print(format_trace(tr))
    for key, c in sorted(tally.items()):
        print(f"{c:>7}  fast={key[0]:<16} osr={key[1]:<8} predictable={key[2]}")
    print(f"mismatches: {bad}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
