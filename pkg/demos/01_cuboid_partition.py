"""Cutting a matrix product into blocks of basic operations.

The product of an ``nx x nz`` matrix A with an ``nz x ny`` matrix B is a
cuboid of ``nx * nz * ny`` multiply-accumulates. Cutting that cuboid along
some of its axes gives equal sub-products; which axes are cut decides which
code can protect them.

Run: python demos/01_cuboid_partition.py
"""

import numpy as np

from hiercoded import Cuboid, CutSpec, basic_op_count
from hiercoded.cuboid import (
    category_label,
    classify,
    extract_block_operands,
    partition_task_block,
    slice_cuboid,
)

c = Cuboid(10, 8, 6)
print(f"cuboid {c.dims}: {basic_op_count(*c.dims)} basic operations")

# %% an x/y cut: four independent output blocks
cut = CutSpec(2, 1, 2)
blocks = slice_cuboid(c, cut)
print(f"cut {cut.counts} is category {category_label(classify(cut))}, k = {cut.k}")
for tb in blocks:
    print(f"  block {tb.layer_id}: x {tb.x.to_list()} z {tb.z.to_list()} y {tb.y.to_list()}")

# %% a z cut: partial products that have to be summed
print("category of (1, 4, 1):", category_label(classify(CutSpec(1, 4, 1))))

# %% every cut reconstructs the product
rng = np.random.default_rng(0)
a = rng.standard_normal((c.nx, c.nz))
b = rng.standard_normal((c.nz, c.ny))
for counts in [(2, 1, 2), (5, 2, 1), (1, 4, 3), (2, 2, 2)]:
    out = np.zeros((c.nx, c.ny))
    for ib in partition_task_block(c.whole(), CutSpec(*counts)):
        sa, sb = extract_block_operands(a, b, ib, c)
        out[ib.x.slice, ib.y.slice] += sa @ sb
    print(f"cut {counts}: max deviation from A @ B = {np.abs(out - a @ b).max():.1e}")

# %% edges must divide evenly; pad first if they do not
try:
    slice_cuboid(c, CutSpec(3, 1, 1))
except ValueError as exc:
    print("rejected:", exc)
