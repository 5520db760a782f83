"""Time full detection on seeded random traces of growing size.

    python scripts/scaling.py --sizes 10000 30000 100000 --threads 8 --locks 8
"""
import argparse
import csv
import math
import sys
import time
from dataclasses import asdict

from osrace.abstract import precompute_eis
from osrace.detector import DetectOptions, osr_detect
from osrace.generators import RandomTraceConfig, gen_random_trace
from osrace.index import build_indices


def fit_slope(xs, ys):
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx, my = sum(lx) / len(lx), sum(ly) / len(ly)
    return sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / sum((a - mx) ** 2 for a in lx)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[10_000, 30_000, 100_000])
    p.add_argument("--threads", type=int, default=8)
    p.add_argument("--locks", type=int, default=8)
    p.add_argument("--vars", type=int, default=64)
    p.add_argument("--lock-density", type=float, default=0.2)
    p.add_argument("--read-ratio", type=float, default=0.5)
    p.add_argument("--all-pairs", action="store_true")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--csv", default=None)
    a = p.parse_args(argv)

    rows = []
    for n in a.sizes:
        cfg = RandomTraceConfig(a.threads, a.locks, a.vars, n, a.lock_density, a.read_ratio)
        tr = gen_random_trace(cfg, a.seed)
        t0 = time.perf_counter()
        ix = build_indices(tr)
        t1 = time.perf_counter()
        eis = precompute_eis(ix)
        t2 = time.perf_counter()
        rep = osr_detect(ix, eis, DetectOptions(all_pairs=a.all_pairs))
        t3 = time.perf_counter()
        row = dict(asdict(cfg), index_s=t1 - t0, eis_s=t2 - t1, detect_s=t3 - t2,
                   total_s=t3 - t0, pairs=len(rep.pairs), racy_events=rep.count("events"))
        rows.append(row)
        print(f"N={n:>8}  index {row['index_s']:.2f}s  eis {row['eis_s']:.2f}s  "
              f"detect {row['detect_s']:.2f}s  racy events {row['racy_events']}", flush=True)
    if len(rows) > 1:
        s = fit_slope(a.sizes, [r["total_s"] for r in rows])
        print(f"log-log slope of total time: {s:.2f} (per event: {s - 1:.2f})")
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
