"""Geometric model of a matrix product as a cuboid of basic operations.

The product of an ``nx x nz`` matrix A and an ``nz x ny`` matrix B is a
lattice of ``nx*nz*ny`` multiply-accumulate steps. Unit cube ``(ix, iz, iy)``
reads ``A[ix, iz]`` and ``B[iz, iy]`` and contributes to ``(AB)[ix, iy]``.
Work division schemes are axis-aligned partitions of this lattice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DivisibilityError, ShapeError
from .matrix import Interval, submatrix

__all__ = [
    "AXES",
    "Cuboid",
    "CutSpec",
    "TaskBlock",
    "InformationBlock",
    "slice_cuboid",
    "partition_task_block",
    "classify",
    "category_label",
    "extract_block_operands",
]

# Canonical axis order used everywhere: x (rows of A), z (inner), y (cols of B).
AXES = ("x", "z", "y")


@dataclass(frozen=True)
class Cuboid:
    nx: int
    nz: int
    ny: int

    def __post_init__(self):
        for axis, n in zip(AXES, self.dims):
            if int(n) != n or n < 1:
                raise ValueError(f"cuboid edge {axis} must be a positive integer, got {n}")

    @property
    def dims(self):
        return (self.nx, self.nz, self.ny)

    @property
    def volume(self):
        return self.nx * self.nz * self.ny

    def whole(self, layer_id=1):
        return TaskBlock(Interval(1, self.nx), Interval(1, self.nz), Interval(1, self.ny), layer_id)

    def to_list(self):
        return list(self.dims)


@dataclass(frozen=True)
class CutSpec:
    """Number of equal pieces along each axis; 1 means the axis is not cut."""

    mx: int = 1
    mz: int = 1
    my: int = 1

    def __post_init__(self):
        for axis, m in zip(AXES, self.counts):
            if int(m) != m or m < 1:
                raise ValueError(f"cut multiplicity along {axis} must be >= 1, got {m}")

    @property
    def counts(self):
        return (self.mx, self.mz, self.my)

    @property
    def k(self):
        """Information dimension: the number of pieces the cut produces."""
        return self.mx * self.mz * self.my

    def to_list(self):
        return list(self.counts)


@dataclass(frozen=True)
class TaskBlock:
    """Sub-cuboid ``x x z x y`` of consecutive global indices, owned by one layer."""

    x: Interval
    z: Interval
    y: Interval
    layer_id: int = 1

    @property
    def dims(self):
        return (len(self.x), len(self.z), len(self.y))

    @property
    def volume(self):
        nx, nz, ny = self.dims
        return nx * nz * ny

    def intervals(self):
        return (self.x, self.z, self.y)

    def within(self, c: Cuboid):
        return all(iv.hi <= n for iv, n in zip(self.intervals(), c.dims))

    def to_dict(self):
        return {"layer": self.layer_id, "x": self.x.to_list(), "z": self.z.to_list(),
                "y": self.y.to_list()}

    @classmethod
    def from_dict(cls, d):
        return cls(Interval.coerce(d["x"]), Interval.coerce(d["z"]), Interval.coerce(d["y"]),
                   int(d.get("layer", 1)))


@dataclass(frozen=True)
class InformationBlock:
    """One equal-sized piece of a task block.

    ``index`` is the 1-based ``(m_x, m_z, m_y)`` position inside the parent
    block; the ranges are already resolved to global cuboid indices.
    """

    index: tuple
    x: Interval
    z: Interval
    y: Interval

    @property
    def dims(self):
        return (len(self.x), len(self.z), len(self.y))

    @property
    def volume(self):
        nx, nz, ny = self.dims
        return nx * nz * ny


def _check_divisible(dims, cut):
    for axis, n, m in zip(AXES, dims, cut.counts):
        if n % m:
            raise DivisibilityError(axis, n, m)


def partition_task_block(tb: TaskBlock, cut: CutSpec) -> list[InformationBlock]:
    """Split ``tb`` into ``cut.k`` equal blocks in lexicographic ``(m_x, m_z, m_y)`` order."""
    _check_divisible(tb.dims, cut)
    blocks = []
    for mx, mz, my in itertools.product(range(1, cut.mx + 1), range(1, cut.mz + 1),
                                        range(1, cut.my + 1)):
        blocks.append(InformationBlock(
            (mx, mz, my),
            tb.x.sub(mx, cut.mx),
            tb.z.sub(mz, cut.mz),
            tb.y.sub(my, cut.my),
        ))
    return blocks


def slice_cuboid(c: Cuboid, cut: CutSpec) -> list[TaskBlock]:
    """Equal-volume sub-cuboids of ``c``, x varying slowest, numbered 1..k."""
    ibs = partition_task_block(c.whole(), cut)
    return [TaskBlock(ib.x, ib.z, ib.y, layer_id=i) for i, ib in enumerate(ibs, start=1)]


def classify(cut: CutSpec) -> frozenset:
    """Subset of axes the cut actually slices (one of eight categories)."""
    return frozenset(axis for axis, m in zip(AXES, cut.counts) if m > 1)


def category_label(category) -> str:
    return "{" + ",".join(a for a in AXES if a in category) + "}"


def extract_block_operands(a: np.ndarray, b: np.ndarray, block, cuboid: Cuboid | None = None):
    """Return ``(A[x, z], B[z, y])`` for a task or information block.

    When ``cuboid`` is given the operands must match its dimensions exactly.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"operands {a.shape} and {b.shape} do not form a product")
    if cuboid is not None and (a.shape != (cuboid.nx, cuboid.nz) or b.shape != (cuboid.nz, cuboid.ny)):
        raise ShapeError(
            f"operands {a.shape} x {b.shape} inconsistent with cuboid {cuboid.dims}"
        )
    return submatrix(a, block.x, block.z), submatrix(b, block.z, block.y)
