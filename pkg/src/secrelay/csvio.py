"""CSV contract shared by the simulator, analytic batch mode and optimizer.

Dialect: comma separated, ``.`` decimal, no quoting, ``\\n`` line endings,
``#``-prefixed provenance lines before a single header row. Floats are
written with ``repr`` so a value round-trips exactly and identical inputs
give byte-identical files.

Column order for a metric row is fixed:

    mode, gamma_ar_db, gamma_rb_db, gamma_ae_db, gamma_re_db,
    alpha, beta, r_s, r_a,
    rho_a, rho_a_ci, rho_r, rho_r_ci, ..., soct, soct_ci

Analytic rows carry ``_ci`` columns of ``0.0`` so both producers share one
layout.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

from .analytic import METRIC_COLUMNS

__all__ = [
    "PARAM_COLUMNS",
    "METRIC_CI_COLUMNS",
    "SOLUTION_COLUMNS",
    "format_value",
    "check_metric_row",
    "write_table",
    "read_table",
]

PARAM_COLUMNS = (
    "mode",
    "gamma_ar_db",
    "gamma_rb_db",
    "gamma_ae_db",
    "gamma_re_db",
    "alpha",
    "beta",
    "r_s",
    "r_a",
)

METRIC_CI_COLUMNS = tuple(c for m in METRIC_COLUMNS for c in (m, m + "_ci"))

SOLUTION_COLUMNS = (
    "kind",
    "branch",
    "mu",
    "nu",
    "theta",
    "r_a",
    "feasible",
    "alpha",
    "beta",
    "r_s",
    "objective",
    "grid_best",
    "residual_min",
    "residuals",
    "iterations",
    "status",
    "soct",
    "sop_e2e",
    "rho_id",
    "tau_ar",
    "tau_rb",
)


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    s = str(v)
    if any(ch in s for ch in ',"\n\r'):
        raise ValueError(f"value {s!r} needs quoting, which the dialect forbids")
    return s


def check_metric_row(row: dict, tol: float = 1e-9) -> None:
    """Probabilities in [0, 1] and ``rho_a + rho_r + rho_id == 1``; raises ValueError."""
    for k in ("rho_a", "rho_r", "rho_id", "sop1", "sop2", "sop_e2e"):
        v = float(row[k])
        if math.isnan(v) or not -tol <= v <= 1 + tol:
            raise ValueError(f"column {k}={v} is not a probability")
    total = float(row["rho_a"]) + float(row["rho_r"]) + float(row["rho_id"])
    if abs(total - 1.0) > tol:
        raise ValueError(f"rho_a + rho_r + rho_id = {total!r}, expected 1")
    for k in ("tau_ar", "tau_rb", "soct"):
        if not float(row[k]) >= -tol:
            raise ValueError(f"column {k}={row[k]} is negative")


def write_table(stream, columns: Sequence[str], rows: Iterable[dict], provenance: Sequence[str] = ()) -> None:
    for line in provenance:
        stream.write("# " + line.replace("\n", " ") + "\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(format_value(row.get(c)) for c in columns) + "\n")


def read_table(text: str) -> tuple[list[str], list[dict]]:
    """Parse a CSV in the shared dialect; ``#`` lines and blank lines are skipped."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("CSV has no header row")
    reader = csv.reader(io.StringIO("\n".join(lines)))
    header = [h.strip() for h in next(reader)]
    if len(set(header)) != len(header):
        raise ValueError(f"duplicate column names in header {header}")
    rows = []
    for n, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise ValueError(f"data row {n - 1} has {len(rec)} fields, header has {len(header)}")
        rows.append({h: v.strip() for h, v in zip(header, rec)})
    return header, rows
