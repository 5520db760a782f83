"""Execution traces: events, the text file format, and well-formedness checks.

A trace file has one event per line::

    <thread>|<op>(<operand>)|<loc>

with ``op`` one of ``r``, ``w``, ``acq``, ``rel``, ``fork``, ``join``. The
``|<loc>`` suffix is optional; blank lines and ``#`` comments are skipped.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, TextIO, Union

READ = "r"
WRITE = "w"
ACQUIRE = "acq"
RELEASE = "rel"
FORK = "fork"
JOIN = "join"

OPS = (READ, WRITE, ACQUIRE, RELEASE, FORK, JOIN)
ACCESS_OPS = (READ, WRITE)
LOCK_OPS = (ACQUIRE, RELEASE)
THREAD_OPS = (FORK, JOIN)

_IDENT = r"[A-Za-z0-9_.]+"
_LINE_RE = re.compile(
    rf"^(?P<thread>{_IDENT})\|(?P<op>[A-Za-z]+)\((?P<operand>[^()]*)\)(?:\|(?P<loc>.*))?$"
)
_IDENT_RE = re.compile(rf"^{_IDENT}$")


class TraceParseError(ValueError):
    """Raised for malformed trace text; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Event:
    idx: int
    thread: str
    op: str
    target: str
    loc: int = 0

    @property
    def is_access(self) -> bool:
        return self.op in ACCESS_OPS

    def conflicts_with(self, other: "Event") -> bool:
        """Accesses to the same variable, at least one a write.

        Thread identity is not part of the relation; same-thread pairs are
        conflicting but can never race.
        """
        return (
            self.idx != other.idx
            and self.is_access
            and other.is_access
            and self.target == other.target
            and WRITE in (self.op, other.op)
        )

    def to_line(self) -> str:
        return f"{self.thread}|{self.op}({self.target})|{self.loc}"

    def __str__(self) -> str:
        return f"e{self.idx + 1}:{self.thread}:{self.op}({self.target})"


@dataclass
class Trace:
    events: List[Event]
    threads: List[str] = field(default_factory=list)
    vars: List[str] = field(default_factory=list)
    locks: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not (self.threads or self.vars or self.locks):
            threads, vars_, locks = {}, {}, {}
            for e in self.events:
                threads.setdefault(e.thread, None)
                if e.op in ACCESS_OPS:
                    vars_.setdefault(e.target, None)
                elif e.op in LOCK_OPS:
                    locks.setdefault(e.target, None)
                else:
                    threads.setdefault(e.target, None)
            self.threads = list(threads)
            self.vars = list(vars_)
            self.locks = list(locks)

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, i: int) -> Event:
        return self.events[i]

    def __iter__(self):
        return iter(self.events)

    @classmethod
    def from_tuples(cls, rows: Iterable[tuple]) -> "Trace":
        """Build a trace from ``(thread, op, target[, loc])`` rows."""
        events = []
        for i, row in enumerate(rows):
            thread, op, target = row[:3]
            loc = row[3] if len(row) > 3 else i + 1
            events.append(Event(i, thread, op, target, loc))
        return cls(events)


def parse_trace(source: Union[str, TextIO]) -> Trace:
    """Parse trace text (a string or an open text stream)."""
    text = source if isinstance(source, str) else source.read()
    events: List[Event] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE_RE.match(line)
        if m is None:
            if "|" not in line:
                raise TraceParseError(lineno, f"expected '<thread>|<op>(<operand>)', got {line!r}")
            head = line.split("|", 1)[1]
            if "(" not in head or ")" not in head:
                raise TraceParseError(lineno, f"missing operand in {line!r}")
            raise TraceParseError(lineno, f"syntax error in {line!r}")
        op = m.group("op")
        if op not in OPS:
            raise TraceParseError(lineno, f"unknown operation token {op!r}")
        operand = m.group("operand")
        if not operand:
            raise TraceParseError(lineno, f"missing operand for {op}")
        if not _IDENT_RE.match(operand):
            raise TraceParseError(lineno, f"bad identifier {operand!r}")
        loc_text = m.group("loc")
        if loc_text is None:
            loc = lineno
        else:
            if not loc_text.isdigit():
                raise TraceParseError(lineno, f"location must be a non-negative integer, got {loc_text!r}")
            loc = int(loc_text)
        events.append(Event(len(events), m.group("thread"), op, operand, loc))
    return Trace(events)


def read_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh)


def format_trace(trace: Trace, header: Optional[str] = None) -> str:
    lines = [f"# {header}"] if header else []
    lines.extend(e.to_line() for e in trace.events)
    return "\n".join(lines) + "\n"


@dataclass
class WellFormedReport:
    violations: List[str] = field(default_factory=list)
    info: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(trace: Trace) -> WellFormedReport:
    """Check lock semantics and fork/join discipline.

    Acquires still held at the end of the trace are legal (the trace may be
    a prefix of a longer run) and are reported under ``info``.
    """
    report = WellFormedReport()
    holder = {}  # lock -> (thread, acquire idx)
    forked, joined = {}, {}
    seen = set()  # threads that have executed at least one event

    for e in trace.events:
        where = f"e{e.idx + 1}"
        t = e.thread
        if t in joined:
            report.violations.append(f"{where}: event of thread {t} after its join (e{joined[t] + 1})")
        seen.add(t)
        if e.op == ACQUIRE:
            if e.target in holder:
                ht, hi = holder[e.target]
                report.violations.append(
                    f"{where}: acquire of lock {e.target} already held by {ht} (e{hi + 1})"
                )
            else:
                holder[e.target] = (t, e.idx)
        elif e.op == RELEASE:
            held = holder.get(e.target)
            if held is None or held[0] != t:
                report.violations.append(
                    f"{where}: release of lock {e.target} without matching acquire by {t}"
                )
            else:
                del holder[e.target]
        elif e.op == FORK:
            c = e.target
            if c == t:
                report.violations.append(f"{where}: thread {t} forks itself")
            elif c in forked:
                report.violations.append(f"{where}: thread {c} forked twice")
            elif c in seen:
                report.violations.append(f"{where}: thread {c} has events before its fork")
            else:
                forked[c] = e.idx
        elif e.op == JOIN:
            c = e.target
            if c == t:
                report.violations.append(f"{where}: thread {t} joins itself")
            elif c in joined:
                report.violations.append(f"{where}: thread {c} joined twice")
            else:
                joined[c] = e.idx
    for lock, (t, i) in holder.items():
        report.info.append(f"lock {lock} still held by {t} at end of trace (e{i + 1})")
    return report
