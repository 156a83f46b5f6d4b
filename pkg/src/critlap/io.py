"""Report and field-dump formats.

Reports are UTF-8 text: the header line ``critlap-report 1`` followed by one
``key = value`` line per entry, in insertion order.  Floats are written with
17 significant digits so they round-trip exactly.

Field dumps are CSV with header ``x1,...,xn,comp1,...,compd`` and one row
per interior node in lexicographic node order.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .grid import GridDomain

__all__ = [
    "REPORT_HEADER",
    "format_value",
    "flatten",
    "write_report",
    "read_report",
    "dump_field",
    "load_field",
]

REPORT_HEADER = "critlap-report 1"


def format_value(v) -> str:
    """Text form of a report value."""
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(format_value(x) for x in np.asarray(v, dtype=object).ravel()) + "]"
    return str(v).replace("\n", " ")


def flatten(prefix: str, obj) -> dict:
    """Flatten nested dictionaries into dotted keys."""
    out: dict = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            key = f"{prefix}.{k}" if prefix else str(k)
            out.update(flatten(key, v))
    else:
        out[prefix] = obj
    return out


def write_report(path: str | Path, entries: dict) -> str:
    """Write a report; returns the text written."""
    lines = [REPORT_HEADER]
    for k, v in flatten("", entries).items():
        lines.append(f"{k} = {format_value(v)}")
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return text


def read_report(path: str | Path) -> dict:
    """Parse a report into a dictionary of strings."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != REPORT_HEADER:
        raise ValueError("not a critlap report")
    out = {}
    for ln in lines[1:]:
        k, _, v = ln.partition(" = ")
        out[k] = v
    return out


def dump_field(path: str | Path, u: np.ndarray, dom: GridDomain) -> None:
    """Write the interior values of ``u`` (shape ``(d, *dom.shape)``) as CSV."""
    u = np.asarray(u, float)
    if u.ndim == dom.n:
        u = u[None]
    pts = dom.interior_points()
    vals = u[:, dom.mask].T
    header = [f"x{i + 1}" for i in range(dom.n)] + [f"comp{j + 1}" for j in range(u.shape[0])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, v in zip(pts, vals):
            w.writerow([f"{t:.17g}" for t in x] + [f"{t:.17g}" for t in v])


def load_field(path: str | Path, dom: GridDomain) -> np.ndarray:
    """Read a CSV dump back onto the lattice of ``dom``.

    Raises
    ------
    DomainError
        If a row does not sit on an interior node of ``dom``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    n = sum(1 for c in header if c.startswith("x"))
    if n != dom.n:
        raise DomainError("dump dimension does not match the domain")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(header))
    d = len(header) - n
    idx = np.rint((data[:, :n] - dom.lo) / dom.h).astype(int)
    if np.any(idx < 0) or np.any(idx >= np.array(dom.shape)):
        raise DomainError("dump nodes fall outside the lattice")
    if not np.allclose(dom.lo + dom.h * idx, data[:, :n], atol=1e-9 * dom.h):
        raise DomainError("dump nodes are not lattice nodes")
    if not np.all(dom.mask[tuple(idx.T)]):
        raise DomainError("dump contains exterior nodes")
    u = np.zeros((d,) + dom.shape)
    for j in range(d):
        u[j][tuple(idx.T)] = data[:, n + j]
    return u
