"""Orthogonal-vectors encoding: check race existence against a direct scan
and time detection as the instance grows.

    python scripts/ov_experiment.py --instances 200 --max-n 50 --max-d 8
"""
import argparse
import random
import sys
import time

from osrace.abstract import precompute_eis
from osrace.detector import osr_detect
from osrace.generators import OvInstance, gen_ov_trace
from osrace.index import build_indices


def random_instance(rng, n, d, p):
    vec = lambda: tuple(int(rng.random() < p) for _ in range(d))
    return OvInstance([vec() for _ in range(n)], [vec() for _ in range(n)], d)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--max-n", type=int, default=50)
    ap.add_argument("--max-d", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sweep", type=int, nargs="*", default=[50, 100, 200, 400],
                    help="set sizes for the timing sweep (no orthogonal pair)")
    a = ap.parse_args(argv)

    rng = random.Random(a.seed)
    wrong = with_pair = 0
    for _ in range(a.instances):
        inst = random_instance(rng, rng.randint(1, a.max_n), rng.randint(1, a.max_d),
                               rng.uniform(0.3, 0.95))
        truth = inst.has_orthogonal_pair()
        with_pair += truth
        ix = build_indices(gen_ov_trace(inst))
        wrong += bool(osr_detect(ix, precompute_eis(ix)).pairs) != truth
    print(f"{a.instances} instances, {with_pair} with an orthogonal pair, {wrong} mismatches")

    # all-ones vectors never have an orthogonal pair, so every candidate is examined
    d = a.max_d
    for n in a.sweep:
        inst = OvInstance([(1,) * d] * n, [(1,) * d] * n, d)
        ix = build_indices(gen_ov_trace(inst))
        t0 = time.perf_counter()
        rep = osr_detect(ix, precompute_eis(ix))
        print(f"n={n:>5}  events={ix.n:>7}  {time.perf_counter() - t0:.2f}s  races={len(rep.pairs)}")
    return 1 if wrong else 0


if __name__ == "__main__":
    sys.exit(main())
