"""Mean and standard error per (env, algorithm, budget) group."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .experiment import ResultRow, _atomic_write

SUMMARY_COLUMNS = ("env", "algorithm", "budget", "mean", "stderr", "n_runs")


@dataclass(frozen=True)
class SummaryRow:
    """``stderr`` is the sample standard deviation (n - 1 denominator) over sqrt(n); None for one run."""

    env: str
    algorithm: str
    budget: int
    mean: float
    stderr: float | None
    n_runs: int


def aggregate(rows: Iterable[ResultRow]) -> list[SummaryRow]:
    """Group successful rows by (env, algorithm, budget), sorted by that key."""
    groups: dict[tuple[str, str, int], list[float]] = {}
    for row in rows:
        if row.ok:
            groups.setdefault((row.env, row.algorithm, int(row.budget)), []).append(float(row.discounted_return))
    out = []
    for (env, algo, budget) in sorted(groups):
        x = np.asarray(groups[env, algo, budget])
        se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else None
        out.append(SummaryRow(env, algo, budget, float(np.mean(x)), se, int(x.size)))
    return out


def write_summary(path, summary: Iterable[SummaryRow]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for s in summary:
        writer.writerow([s.env, s.algorithm, s.budget, repr(s.mean), "" if s.stderr is None else repr(s.stderr),
                         s.n_runs])
    path = Path(path)
    _atomic_write(path, buf.getvalue())
    return path


def read_summary(path) -> list[SummaryRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        unknown = [c for c in (reader.fieldnames or ()) if c not in SUMMARY_COLUMNS]
        if unknown:
            raise ValueError(f"{path}: unknown column(s) {', '.join(unknown)}")
        missing = [c for c in SUMMARY_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
        return [SummaryRow(r["env"], r["algorithm"], int(r["budget"]), float(r["mean"]),
                           float(r["stderr"]) if r["stderr"] else None, int(r["n_runs"])) for r in reader]
