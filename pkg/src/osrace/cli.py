"""Command-line front end.

Exit status: 0 when the command completed and found no race (or generated
its output), 1 when at least one race was found, 2 on any input error.
Event indices on the command line are 1-based.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .abstract import build_abstract_graph, precompute_eis, to_dot
from .detector import MODES, DetectOptions, RaceReport, check_pair, osr_detect
from .generators import RandomTraceConfig, gen_ov_trace, gen_random_trace, parse_ov
from .index import TraceIndex, build_indices
from .oracle import OracleBudget, Outcome, oracle_osr_race, oracle_predictable_race
from .trace import TraceParseError, format_trace, read_trace, validate

EXIT_OK, EXIT_RACE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class CliConfig:
    command: str
    args: argparse.Namespace


def _default_workers() -> int:
    env = os.environ.get("OSR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"OSR_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _load(path: str) -> TraceIndex:
    try:
        trace = read_trace(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}")
    except TraceParseError as exc:
        raise InputError(f"{path}: {exc}")
    rep = validate(trace)
    if not rep.ok:
        raise InputError(f"{path}: not well formed: {rep.violations[0]}")
    return build_indices(trace)


def _event_arg(index: TraceIndex, raw: str) -> int:
    try:
        i = int(raw)
    except ValueError:
        raise InputError(f"event index must be an integer, got {raw!r}")
    if not 1 <= i <= index.n:
        raise InputError(f"event index {i} out of range 1..{index.n}")
    return i - 1


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def pair_record(index: TraceIndex, a: int, b: int) -> dict:
    ev = index.trace.events
    return {
        "e1": a + 1,
        "e2": b + 1,
        "thread1": ev[a].thread,
        "thread2": ev[b].thread,
        "var": ev[a].target,
        "loc1": ev[a].loc,
        "loc2": ev[b].loc,
    }


def format_output(report: RaceReport, mode: str, index: Optional[TraceIndex] = None):
    """Human summary line plus the JSON Lines body (empty without an index)."""
    label = {"events": "racy events", "locations": "racy locations",
             "variables": "racy variables"}[mode]
    summary = f"{label}: {report.count(mode)}\n"
    lines = []
    if index is not None:
        for a, b in report.pairs:
            lines.append(json.dumps(pair_record(index, a, b)))
        lines.append(json.dumps({
            "summary": True,
            "pairs": len(report.pairs),
            "racy_events": report.count("events"),
            "racy_locations": report.count("locations"),
            "racy_variables": report.count("variables"),
        }))
    return summary, "".join(l + "\n" for l in lines)


def cmd_detect(a) -> int:
    index = _load(a.trace)
    eis = precompute_eis(index)
    opts = DetectOptions(all_pairs=a.all_pairs, witness=a.witness, workers=_default_workers())
    rep = osr_detect(index, eis, opts)
    summary, body = format_output(rep, a.mode, index)
    sys.stdout.write(summary)
    if a.out:
        _write(a.out, body)
    if a.witness and a.witness_dir:
        os.makedirs(a.witness_dir, exist_ok=True)
        for (x, y), w in sorted(rep.witnesses.items()):
            _write(os.path.join(a.witness_dir, f"witness_{x + 1}_{y + 1}.trace"),
                   w.to_text(index.trace))
    return EXIT_RACE if rep.pairs else EXIT_OK


def cmd_pair(a) -> int:
    index = _load(a.trace)
    e1, e2 = _event_arg(index, a.i), _event_arg(index, a.j)
    if e1 > e2:
        e1, e2 = e2, e1
    if not index.conflicting(e1, e2):
        raise InputError(f"e{e1 + 1} and e{e2 + 1} are not a conflicting pair")
    eis = precompute_eis(index)
    v = check_pair(index, eis, e1, e2, want_witness=a.witness or bool(a.out))
    print(f"(e{e1 + 1}, e{e2 + 1}): {'race' if v.race else 'no race'} ({v.reason})")
    if v.frontier is not None:
        print("closure:", " ".join(f"e{x + 1}" for x in v.frontier.events(index)))
    if v.witness is not None:
        text = v.witness.to_text(index.trace)
        if a.out:
            _write(a.out, text)
        else:
            sys.stdout.write(text)
    if a.dot and v.frontier is not None:
        _write(a.dot, to_dot(build_abstract_graph(eis, index, v.frontier), index))
    return EXIT_RACE if v.race else EXIT_OK


def cmd_oracle(a) -> int:
    index = _load(a.trace)
    e1, e2 = _event_arg(index, a.i), _event_arg(index, a.j)
    if e1 > e2:
        e1, e2 = e2, e1
    if not index.conflicting(e1, e2):
        raise InputError(f"e{e1 + 1} and e{e2 + 1} are not a conflicting pair")
    budget = OracleBudget(max_states=a.budget) if a.budget else OracleBudget()
    osr = oracle_osr_race(index, e1, e2, budget)
    pred = oracle_predictable_race(index, e1, e2, budget)
    print(f"osr race: {osr.value}")
    print(f"predictable race: {pred.value}")
    return EXIT_RACE if osr == Outcome.YES else EXIT_OK


def cmd_validate(a) -> int:
    try:
        trace = read_trace(a.trace)
    except OSError as exc:
        raise InputError(f"cannot read {a.trace}: {exc.strerror or exc}")
    except TraceParseError as exc:
        raise InputError(f"{a.trace}: {exc}")
    rep = validate(trace)
    for v in rep.violations:
        print(f"violation: {v}")
    for i in rep.info:
        print(f"note: {i}")
    print("ok" if rep.ok else "not well formed")
    return EXIT_OK if rep.ok else EXIT_INPUT


def cmd_gen_ov(a) -> int:
    try:
        with open(a.instance) as fh:
            inst = parse_ov(fh)
    except OSError as exc:
        raise InputError(f"cannot read {a.instance}: {exc.strerror or exc}")
    except ValueError as exc:
        raise InputError(f"{a.instance}: {exc}")
    _write(a.out, format_trace(gen_ov_trace(inst)))
    return EXIT_OK


def cmd_gen_random(a) -> int:
    try:
        cfg = RandomTraceConfig(a.threads, a.locks, a.vars, a.events, a.lock_density, a.read_ratio)
    except ValueError as exc:
        raise InputError(str(exc))
    _write(a.out, format_trace(gen_random_trace(cfg, a.seed)))
    return EXIT_OK


def trace_stats(index: TraceIndex) -> dict:
    ops = Counter(index.op)
    return {
        "events": index.n,
        "threads": index.T,
        "vars": len(index.vars),
        "locks": len(index.locks),
        "reads": ops.get("r", 0),
        "writes": ops.get("w", 0),
        "acquires": ops.get("acq", 0),
        "releases": ops.get("rel", 0),
        "forks": ops.get("fork", 0),
        "joins": ops.get("join", 0),
    }


def cmd_stats(a) -> int:
    st = trace_stats(_load(a.trace))
    for k, v in st.items():
        print(f"{k}: {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="osrace", description="Optimistic sync-reversal race prediction")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="report all races in a trace")
    d.add_argument("trace")
    d.add_argument("--mode", choices=MODES, default="events")
    d.add_argument("--witness", action="store_true")
    d.add_argument("--witness-dir", default=None, help="write one witness file per race")
    d.add_argument("--all-pairs", action="store_true",
                   help="report every racy partner, not just the first per thread")
    d.add_argument("--out", default=None, help="JSON Lines report path")
    d.set_defaults(func=cmd_detect)

    q = sub.add_parser("pair", help="check one pair of events")
    q.add_argument("trace")
    q.add_argument("i")
    q.add_argument("j")
    q.add_argument("--witness", action="store_true")
    q.add_argument("--out", default=None, help="witness output path")
    q.add_argument("--dot", default=None, help="abstract graph in DOT format")
    q.set_defaults(func=cmd_pair)

    o = sub.add_parser("oracle", help="brute-force decision for one pair")
    o.add_argument("trace")
    o.add_argument("i")
    o.add_argument("j")
    o.add_argument("--budget", type=int, default=None, help="state budget")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("validate", help="check well-formedness")
    v.add_argument("trace")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen-ov", help="trace for an orthogonal-vectors instance")
    g.add_argument("instance")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen_ov)

    r = sub.add_parser("gen-random", help="seeded random trace")
    r.add_argument("--threads", type=int, default=4)
    r.add_argument("--locks", type=int, default=2)
    r.add_argument("--vars", type=int, default=4)
    r.add_argument("--events", type=int, default=100)
    r.add_argument("--lock-density", type=float, default=0.2)
    r.add_argument("--read-ratio", type=float, default=0.5)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_gen_random)

    s = sub.add_parser("stats", help="trace statistics")
    s.add_argument("trace")
    s.set_defaults(func=cmd_stats)
    return p


def run(cfg: CliConfig) -> int:
    try:
        return cfg.args.func(cfg.args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return run(CliConfig(args.command, args))


if __name__ == "__main__":
    sys.exit(main())
