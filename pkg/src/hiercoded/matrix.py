"""Dense real matrices and the primitives the coding layers build on.

Matrices are plain ``numpy.ndarray`` objects of dtype float64, two
dimensional, finite, and flagged read-only once they pass through
:func:`as_matrix`. Index intervals in the public API are 1-based and
closed, so ``Interval(1, n)`` covers a full axis of length ``n``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeError

__all__ = [
    "Interval",
    "as_matrix",
    "multiply",
    "submatrix",
    "basic_op_count",
    "read_matrix",
    "write_matrix",
    "format_matrix",
]


@dataclass(frozen=True, order=True)
class Interval:
    """Closed 1-based index interval ``[lo, hi]``."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    def __len__(self):
        return self.hi - self.lo + 1

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __getitem__(self, i):
        # i-th element, 1-based, as in x_l(i)
        if not 1 <= i <= len(self):
            raise IndexError(i)
        return self.lo + i - 1

    @property
    def slice(self):
        return slice(self.lo - 1, self.hi)

    def sub(self, part, parts):
        """The ``part``-th of ``parts`` equal consecutive pieces (both 1-based)."""
        size = len(self) // parts
        lo = self.lo + (part - 1) * size
        return Interval(lo, lo + size - 1)

    def to_list(self):
        return [self.lo, self.hi]

    @classmethod
    def coerce(cls, value):
        if isinstance(value, Interval):
            return value
        lo, hi = value
        return cls(int(lo), int(hi))


def as_matrix(data) -> np.ndarray:
    """Copy ``data`` into an immutable float64 matrix, rejecting NaN/Inf."""
    m = np.array(data, dtype=np.float64, order="C", copy=True)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a nonempty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.flags.writeable = False
    return m


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    out = np.matmul(a, b)
    out.flags.writeable = False
    return out


def submatrix(m: np.ndarray, rows, cols) -> np.ndarray:
    """Copy of the block ``m[rows x cols]`` for 1-based closed intervals."""
    rows = Interval.coerce(rows)
    cols = Interval.coerce(cols)
    if rows.hi > m.shape[0] or cols.hi > m.shape[1]:
        raise IndexError(
            f"block rows {rows.to_list()} cols {cols.to_list()} outside matrix {m.shape}"
        )
    out = m[rows.slice, cols.slice].copy()
    out.flags.writeable = False
    return out


def basic_op_count(nx: int, nz: int, ny: int) -> int:
    """Number of multiply-accumulate steps in an ``nx x nz`` by ``nz x ny`` product."""
    return nx * nz * ny


def format_matrix(m: np.ndarray) -> str:
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def write_matrix(m: np.ndarray, path) -> None:
    Path(path).write_text(format_matrix(m))


def read_matrix(source) -> np.ndarray:
    """Parse the text format: a ``rows cols`` header, then one line per row.

    ``source`` is a path or an open text stream.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    lines = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix document")
    try:
        rows, cols = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad header line: {lines[0]!r}") from exc
    if len(lines) - 1 != rows:
        raise ShapeError(f"header says {rows} rows, found {len(lines) - 1}")
    data = []
    for lineno, ln in enumerate(lines[1:], start=2):
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != cols:
            raise ShapeError(f"line {lineno}: expected {cols} values, found {len(vals)}")
        data.append(vals)
    return as_matrix(data)
