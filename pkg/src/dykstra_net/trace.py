"""Run traces and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

HEADER = ("iter", "F", "gap_lb", "dist_ref", "sumz_sqrtn", "wall_ns")


@dataclass(frozen=True)
class TraceRow:
    iter: int
    F: float
    gap_lb: float
    dist_ref: float = math.nan
    sumz_sqrtn: float = math.nan
    wall_ns: int = 0


@dataclass
class Trace:
    rows: list[TraceRow] = field(default_factory=list)
    # "converged", "max_iter", "stuck", ...
    status: str = ""

    def append(self, row: TraceRow) -> None:
        if self.rows and row.iter <= self.rows[-1].iter:
            raise ValueError("trace iterations must be strictly increasing")
        self.rows.append(row)

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]

    @property
    def last(self) -> TraceRow:
        return self.rows[-1]

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace) or self.status != other.status:
            return False
        if len(self.rows) != len(other.rows):
            return False
        for a, b in zip(self.rows, other.rows):
            for f in fields(TraceRow):
                u, v = getattr(a, f.name), getattr(b, f.name)
                if not (u == v or (isinstance(u, float) and math.isnan(u) and math.isnan(v))):
                    return False
        return True


def to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in trace.rows:
        w.writerow([r.iter, repr(float(r.F)), repr(float(r.gap_lb)), repr(float(r.dist_ref)),
                    repr(float(r.sumz_sqrtn)), r.wall_ns])
    if trace.status:
        buf.write(f"# status: {trace.status}\n")
    return buf.getvalue()


def from_csv(text: str) -> Trace:
    lines = text.splitlines()
    status = ""
    body = []
    for line in lines:
        if line.startswith("# status:"):
            status = line.split(":", 1)[1].strip()
        elif line.strip() and not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    header = tuple(next(reader))
    if header != HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    trace = Trace(status=status)
    for rec in reader:
        trace.append(TraceRow(int(rec[0]), float(rec[1]), float(rec[2]), float(rec[3]),
                              float(rec[4]), int(rec[5])))
    return trace


def write_csv(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(to_csv(trace))


def read_csv(path: str | Path) -> Trace:
    return from_csv(Path(path).read_text())
