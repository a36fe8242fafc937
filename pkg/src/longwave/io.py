"""CSV input and output.

Files carry a mandatory header row.  Numbers are written with 17
significant digits so that a write/read round trip is lossless.
"""

from __future__ import annotations

import csv
import sys

import numpy as np

from .errors import DomainError, UserError

__all__ = ["CsvFormatError", "read_matrix", "write_matrix", "write_rows"]


class CsvFormatError(UserError):
    pass


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_matrix(path):
    """Read a numeric table.

    Returns
    -------
    header : list of str
    data : ndarray, shape (rows, columns)
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise CsvFormatError(f"{path} is empty")
    header = [c.strip() for c in rows[0]]
    if all(_is_number(c) for c in header):
        raise CsvFormatError(f"{path} has no header row")
    width = len(header)
    data = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise CsvFormatError(f"{path}:{i}: expected {width} fields, got {len(row)}")
        try:
            data[i - 2] = [float(c) for c in row]
        except ValueError:
            raise CsvFormatError(f"{path}:{i}: non-numeric field") from None
    return header, data


def write_matrix(path, header, data) -> None:
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != len(header):
        raise DomainError("header and data widths differ")
    write_rows(path, header, data.tolist())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.17g}"
    return str(v)


def write_rows(path, header, rows) -> None:
    """Write ``rows`` (mixed strings and numbers) under ``header``.

    ``path=None`` or ``'-'`` writes to standard output.
    """
    if path in (None, "-"):
        _emit(sys.stdout, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _emit(fh, header, rows)


def _emit(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
