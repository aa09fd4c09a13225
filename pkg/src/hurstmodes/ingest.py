"""Panel ingestion from CSV and the first-difference standardization used
before analyzing real data.

CSV layout: first row holds series identifiers, columns are series, rows
are time.  An optional leading time-index column is detected (header empty
or body cells non-numeric) or forced via the time_column argument.  Missing
cells are rejected outright; no imputation.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import DataError
from .synth import Panel

__all__ = ["read_panel_csv", "standardize"]

_NA_STRINGS = {"", "na", "nan", "n/a", "null", "none", "."}


def _parse_cell(text: str, row: int, col: int, name: str) -> float:
    cell = text.strip()
    if cell.lower() in _NA_STRINGS:
        raise DataError(f"missing value at data row {row}, column {name!r} (col {col}); no imputation is performed")
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"cell at data row {row}, column {name!r} (col {col}) is not numeric: {cell!r}") from None


def read_panel_csv(path, time_column: bool | str = "auto") -> Panel:
    """Read a series-per-column CSV into a p x n panel (rows = series).

    time_column: True drops the first column, False keeps it as data, and
    "auto" drops it when its header is empty or any body cell fails numeric
    parsing.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if len(rows) < 3:
        raise DataError(f"{path}: need a header row and at least 2 data rows, found {len(rows)} non-empty rows")
    header, body = rows[0], rows[1:]
    width = len(header)
    for i, row in enumerate(body, start=1):
        if len(row) != width:
            raise DataError(f"{path}: row {i} has {len(row)} cells, header has {width} (panel must be rectangular)")

    drop_first = False
    if time_column is True:
        drop_first = True
    elif time_column == "auto" and width > 1:
        if not header[0].strip():
            drop_first = True
        else:
            # a time index is non-numeric but never missing; empty cells stay
            # data cells so they are reported instead of silently dropped
            first = [row[0].strip() for row in body]
            if all(first):
                def _is_number(cell):
                    try:
                        float(cell)
                        return True
                    except ValueError:
                        return False

                drop_first = not all(_is_number(cell) for cell in first)
    start = 1 if drop_first else 0
    names = tuple(h.strip() or f"col{j}" for j, h in enumerate(header[start:], start=start))
    if not names:
        raise DataError(f"{path}: no data columns after removing the time index")

    data = np.empty((len(names), len(body)))
    for i, row in enumerate(body, start=1):
        for j, name in enumerate(names):
            data[j, i - 1] = _parse_cell(row[start + j], i, start + j, name)
    return Panel(data, kind="observed", series=names)


def standardize(panel: Panel) -> Panel:
    """Divide each series by the sample standard deviation of its first
    differences.  Constant (zero-difference-variance) series are rejected
    by name rather than silently producing infinities."""
    if panel.n < 3:
        raise DataError(f"standardization needs n >= 3 per series, got n={panel.n}")
    diffs = np.diff(panel.data, axis=1)
    sd = diffs.std(axis=1, ddof=1)
    bad = np.flatnonzero(sd <= 0.0)
    if len(bad):
        names = [panel.series[i] if panel.series else f"row {i}" for i in bad]
        raise DataError(f"series with zero first-difference variance: {', '.join(map(str, names))}")
    return Panel(panel.data / sd[:, None], kind=panel.kind, seed=panel.seed, series=panel.series)
