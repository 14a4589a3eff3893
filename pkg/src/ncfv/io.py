"""CSV output for snapshots and error tables, plus gnuplot scripts."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IoError

__all__ = [
    "Snapshot",
    "ErrorTable",
    "fmt",
    "write_snapshot_csv",
    "read_snapshot_csv",
    "write_error_table",
    "read_error_table",
    "write_gnuplot",
]


def fmt(v):
    """17 significant digits, enough to round-trip any double."""
    return format(float(v), ".17g")


@dataclass
class Snapshot:
    """Cell centres, averages ``(m, N)`` and an optional reference."""

    x: np.ndarray
    values: np.ndarray
    exact: Optional[np.ndarray] = None
    time: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=float).reshape(self.x.size, -1)
        if self.exact is not None:
            self.exact = np.asarray(self.exact, dtype=float).reshape(self.values.shape)

    @property
    def n_vars(self):
        return self.values.shape[1]


@dataclass
class ErrorTable:
    """Per-grid L1 errors ``dx * sum_j |u_j - ref_j|``, one column per component."""

    cells: list
    errors: np.ndarray

    def __post_init__(self):
        self.cells = [int(c) for c in self.cells]
        self.errors = np.asarray(self.errors, dtype=float).reshape(len(self.cells), -1)

    @property
    def orders(self):
        """``log2(e_N / e_2N)`` on the row of ``2N`` when row ``N`` exists; else nan."""
        out = np.full(self.errors.shape, np.nan)
        index = {c: i for i, c in enumerate(self.cells)}
        for i, c in enumerate(self.cells):
            if c % 2 == 0 and c // 2 in index:
                coarse = self.errors[index[c // 2]]
                with np.errstate(divide="ignore", invalid="ignore"):
                    out[i] = np.log2(coarse / self.errors[i])
        return out


def _open(path):
    try:
        parent = os.path.dirname(os.fspath(path))
        if parent:
            os.makedirs(parent, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def write_snapshot_csv(snapshot, path, n_vars=None):
    """Columns ``x,u1..uN[,exact1..exactN]``.

    ``snapshot`` may be ``None`` for a header-only file, in which case
    ``n_vars`` sets the header width.
    """
    n = snapshot.n_vars if snapshot is not None else int(n_vars or 1)
    with_exact = snapshot is not None and snapshot.exact is not None
    header = ["x"] + [f"u{k + 1}" for k in range(n)]
    if with_exact:
        header += [f"exact{k + 1}" for k in range(n)]
    try:
        with _open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            if snapshot is None:
                return
            cols = [snapshot.x[:, None], snapshot.values]
            if with_exact:
                cols.append(snapshot.exact)
            for row in np.hstack(cols):
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def read_snapshot_csv(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    header = rows[0]
    n = sum(1 for h in header if h.startswith("u"))
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(header))
    exact = data[:, 1 + n:] if len(header) > 1 + n else None
    return Snapshot(data[:, 0], data[:, 1:1 + n], exact)


def write_error_table(table, path):
    """Columns ``cells,err_1..err_N,order_1..order_N``; missing orders are blank."""
    n = table.errors.shape[1]
    header = (["cells"] + [f"err_{k + 1}" for k in range(n)]
              + [f"order_{k + 1}" for k in range(n)])
    orders = table.orders
    try:
        with _open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for c, e, o in zip(table.cells, table.errors, orders):
                w.writerow([str(c)] + [fmt(v) for v in e]
                           + ["" if np.isnan(v) else fmt(v) for v in o])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def read_error_table(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    n = (len(rows[0]) - 1) // 2
    cells = [int(r[0]) for r in rows[1:]]
    errors = [[float(v) for v in r[1:1 + n]] for r in rows[1:]]
    return ErrorTable(cells, np.array(errors).reshape(len(cells), n))


def write_gnuplot(path, csv_files, names, title="", with_exact=False):
    """Plot script drawing every component of every snapshot CSV.

    ``csv_files`` are paths relative to the script location.
    """
    lines = ["set datafile separator ','", "set key outside", "set grid",
             f'set title "{title}"']
    lines.append("set term pngcairo size 1000,600")
    for k, name in enumerate(names):
        lines.append(f"set output '{os.path.splitext(os.path.basename(path))[0]}_{name}.png'")
        lines.append(f"set ylabel '{name}'")
        parts = []
        for i, f in enumerate(csv_files):
            label = os.path.splitext(os.path.basename(f))[0]
            parts.append(f"'{f}' using 1:{k + 2} with linespoints pt 7 ps 0.3 title '{label}'")
            if i == 0 and with_exact:
                parts.append(f"'{f}' using 1:(column('exact{k + 1}')) with lines lw 2 "
                             f"title 'exact'")
        lines.append("plot " + ", \\\n     ".join(parts))
    try:
        with _open(path) as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
