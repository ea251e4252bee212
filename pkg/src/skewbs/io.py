"""Comma-separated input and output.

Dialect: comma separator, mandatory header row, '.' decimal point.  Floats
are written with 17 significant digits so that a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .regression import Dataset

__all__ = ["fmt", "read_table", "read_csv_dataset", "write_csv"]


def fmt(x) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _read(path):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = None
        header_line = 1
        for record in reader:
            if record and not record[0].lstrip().startswith("#"):
                header = [h.strip() for h in record]
                header_line = reader.line_num
                break
        if header is None:
            raise ParseError("empty file", line=1)
        if any(h == "" for h in header):
            raise ParseError("header row has empty column names", line=header_line)
        if len(set(header)) != len(header):
            raise ParseError("duplicate column names in header", line=header_line)
        rows, lines = [], []
        for record in reader:
            line = reader.line_num
            if not record or all(not f.strip() for f in record) or record[0].lstrip().startswith("#"):
                continue
            if len(record) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(record)}", line=line)
            try:
                rows.append([float(f) for f in record])
            except ValueError:
                raise ParseError(f"non-numeric field in {record!r}", line=line) from None
            lines.append(line)
    if not rows:
        raise ParseError("no data rows", line=header_line + 1)
    return header, np.array(rows, dtype=float), lines, header_line


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV file; returns the header and an ``(rows, cols)`` array.

    Lines whose first field starts with ``#`` are comments and are skipped.
    """
    header, table, _, _ = _read(path)
    return header, table


def read_csv_dataset(
    path,
    response: str,
    covariates: list[str],
    log_response: bool = False,
    log_covariates: list[str] = (),
    intercept: bool = True,
    weights: str | None = None,
) -> Dataset:
    """Build a :class:`Dataset` from a CSV file, applying natural-log transforms per flag."""
    header, table, lines, header_line = _read(path)
    names = [response, *covariates] + ([weights] if weights else [])
    for name in names:
        if name not in header:
            raise ParseError(f"column {name!r} not found in header {header}", line=header_line)
    if response in covariates:
        raise DomainError("response column must not also be a covariate")
    for name in log_covariates:
        if name not in covariates:
            raise DomainError(f"log transform requested for {name!r}, which is not a covariate")

    def column(name, take_log):
        x = table[:, header.index(name)]
        if take_log:
            bad = np.flatnonzero(~(x > 0))
            if bad.size:
                i = int(bad[0])
                raise DomainError(
                    f"column {name!r} has non-positive value {x[i]!r} at data row {i + 1} "
                    f"(line {lines[i]}); cannot take log"
                )
            x = np.log(x)
        return x

    y = column(response, log_response)
    cols = [column(c, c in log_covariates) for c in covariates]
    if intercept:
        cols.insert(0, np.ones(y.size))
    if not cols:
        raise DomainError("design matrix has no columns (no covariates and no intercept)")
    w = table[:, header.index(weights)] if weights else None
    return Dataset(y, np.column_stack(cols), w)


def write_csv(path, header: list[str], columns) -> None:
    columns = [np.asarray(c) for c in columns]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([fmt(v) for v in row])
