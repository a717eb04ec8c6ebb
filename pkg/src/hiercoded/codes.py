"""Polynomial-family erasure codes for matrix products over the reals.

Every scheme here encodes a list of A-blocks and a list of B-blocks as
matrix polynomials

    A~(t) = sum_i A_i t**a_i        B~(t) = sum_j B_j t**b_j

and hands worker ``n`` the pair ``(A~(t_n), B~(t_n))``. The product
``A~(t) B~(t)`` is a matrix polynomial of degree ``max(a) + max(b)``; once
that many plus one evaluations arrive the master interpolates every
coefficient and reads the wanted products ``A_i B_j`` off the exponents
``a_i + b_j`` reserved for them.

* polynomial: ``a_i = i - 1``, ``b_j = (j - 1) * mx``; all ``mx * my``
  coefficients are wanted.
* matdot: ``a_j = j - 1``, ``b_j = mz - j``; only the coefficient of
  ``t**(mz - 1)``, which equals ``sum_j A_j B_j``, is wanted.
* sum-rate: one code over the blocks of several layers; exponents are
  assigned greedily so each wanted pair gets a coefficient that no other
  product term touches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cuboid import CutSpec
from .errors import (
    ConditioningError,
    InsufficientResultsError,
    ShapeError,
    UnsupportedConfigurationError,
)

__all__ = [
    "SCHEMES",
    "COND_LIMIT",
    "chebyshev_points",
    "integer_points",
    "interleaved_chebyshev_points",
    "CodeSpec",
    "SumRateLayout",
    "EncodedJob",
    "CodedResult",
    "polynomial_spec",
    "matdot_spec",
    "sum_rate_layout",
    "sum_rate_spec",
    "recovery_threshold",
    "polynomial_encode",
    "matdot_encode",
    "sum_rate_encode",
    "encode",
    "fit_coefficients",
    "decode",
]

SCHEMES = ("polynomial", "matdot", "sum_rate_polynomial")

# Largest 2-norm condition number of the interpolation system we accept.
COND_LIMIT = 1e10


def chebyshev_points(n):
    """Chebyshev nodes of the first kind on [-1, 1]: ``cos((2i - 1) pi / 2n)``."""
    i = np.arange(1, n + 1)
    return tuple(float(v) for v in np.cos((2 * i - 1) * np.pi / (2 * n)))


def integer_points(n):
    return tuple(float(v) for v in range(1, n + 1))


def interleaved_chebyshev_points(n_workers, jobs_per_worker):
    """Chebyshev nodes for ``n_workers * jobs_per_worker`` jobs, spread per slot.

    Job ``(worker n, slot s)`` takes node ``(n - 1) * jobs_per_worker + s``,
    so the results of any leading slots cover the whole interval instead of
    one end of it.
    """
    nodes = chebyshev_points(n_workers * jobs_per_worker)
    return tuple(nodes[(j % n_workers) * jobs_per_worker + j // n_workers]
                 for j in range(n_workers * jobs_per_worker))


@dataclass(frozen=True)
class SumRateLayout:
    """Block bookkeeping for one sum-rate code spanning several layers.

    Distinct A-blocks and B-blocks are numbered globally; ``a_index[l][m]``
    is the global number of layer ``l``'s ``m``-th A-block (by ``m_x``) and
    likewise for ``b_index`` (by ``m_y``). ``pairs`` lists the wanted
    products in global order: layer by layer, each layer lexicographic in
    ``(m_x, m_y)``.
    """

    a_index: tuple
    b_index: tuple
    a_shapes: tuple
    b_shapes: tuple
    a_exponents: tuple
    b_exponents: tuple

    @property
    def pairs(self):
        out = []
        for ai, bi in zip(self.a_index, self.b_index):
            out.extend((a, b) for a in ai for b in bi)
        return tuple(out)

    @property
    def layer_sizes(self):
        return tuple(len(ai) * len(bi) for ai, bi in zip(self.a_index, self.b_index))

    @property
    def padded_a_shape(self):
        inner = self.inner
        return (max(s[0] for s in self.a_shapes), inner)

    @property
    def padded_b_shape(self):
        return (self.inner, max(s[1] for s in self.b_shapes))

    @property
    def inner(self):
        return max(max(s[1] for s in self.a_shapes), max(s[0] for s in self.b_shapes))

    @property
    def threshold(self):
        return max(self.a_exponents) + max(self.b_exponents) + 1

    def product_shape(self, pair):
        a, b = pair
        return (self.a_shapes[a][0], self.b_shapes[b][1])

    def to_dict(self):
        return {
            "a_index": [list(v) for v in self.a_index],
            "b_index": [list(v) for v in self.b_index],
            "a_shapes": [list(s) for s in self.a_shapes],
            "b_shapes": [list(s) for s in self.b_shapes],
            "a_exponents": list(self.a_exponents),
            "b_exponents": list(self.b_exponents),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            a_index=tuple(tuple(v) for v in d["a_index"]),
            b_index=tuple(tuple(v) for v in d["b_index"]),
            a_shapes=tuple(tuple(s) for s in d["a_shapes"]),
            b_shapes=tuple(tuple(s) for s in d["b_shapes"]),
            a_exponents=tuple(d["a_exponents"]),
            b_exponents=tuple(d["b_exponents"]),
        )


@dataclass(frozen=True)
class CodeSpec:
    """One erasure-coded group of jobs.

    ``eval_points`` holds ``n_workers * jobs_per_worker`` distinct reals;
    point ``j`` (0-based) belongs to worker ``j % n_workers + 1`` as that
    worker's job number ``j // n_workers + 1``. Only sum-rate codes use more
    than one job per worker.
    """

    scheme: str
    cut: CutSpec | None
    n_workers: int
    eval_points: tuple
    jobs_per_worker: int = 1
    layout: SumRateLayout | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise UnsupportedConfigurationError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "eval_points", tuple(float(t) for t in self.eval_points))
        if self.n_workers < 1 or self.jobs_per_worker < 1:
            raise ValueError("n_workers and jobs_per_worker must be positive")
        if len(self.eval_points) != self.n_workers * self.jobs_per_worker:
            raise ValueError(
                f"need {self.n_workers * self.jobs_per_worker} evaluation points, "
                f"got {len(self.eval_points)}"
            )
        if len(set(self.eval_points)) != len(self.eval_points):
            raise ValueError("evaluation points must be pairwise distinct")
        if self.scheme == "sum_rate_polynomial":
            if self.layout is None:
                raise ValueError("sum-rate code needs a block layout")
        elif self.cut is None:
            raise ValueError(f"{self.scheme} code needs a cut")
        elif self.scheme == "polynomial" and self.cut.mz != 1:
            raise UnsupportedConfigurationError("polynomial codes cut only along x and y (mz must be 1)")
        elif self.scheme == "matdot" and (self.cut.mx != 1 or self.cut.my != 1):
            raise UnsupportedConfigurationError("MatDot codes cut only along z (mx = my = 1)")
        r = recovery_threshold(self)
        if r > len(self.eval_points):
            raise UnsupportedConfigurationError(
                f"recovery threshold {r} exceeds the {len(self.eval_points)} available jobs"
            )

    @property
    def k(self):
        if self.scheme == "sum_rate_polynomial":
            return len(self.layout.pairs)
        return self.cut.k

    @property
    def n_jobs(self):
        return len(self.eval_points)

    def owner(self, j):
        """``(worker_id, slot)`` for 0-based evaluation point index ``j``."""
        return j % self.n_workers + 1, j // self.n_workers + 1

    def exponents(self):
        """``(a_exponents, b_exponents, wanted)``; wanted maps output slot to coefficient index."""
        if self.scheme == "polynomial":
            mx, my = self.cut.mx, self.cut.my
            a = tuple(range(mx))
            b = tuple(j * mx for j in range(my))
            wanted = tuple(i + j * mx for i in range(mx) for j in range(my))
        elif self.scheme == "matdot":
            mz = self.cut.mz
            a = tuple(range(mz))
            b = tuple(mz - 1 - j for j in range(mz))
            wanted = (mz - 1,)
        else:
            lay = self.layout
            a, b = lay.a_exponents, lay.b_exponents
            wanted = tuple(a[i] + b[j] for i, j in lay.pairs)
        return a, b, wanted

    def to_dict(self):
        d = {
            "scheme": self.scheme,
            "cut": None if self.cut is None else self.cut.to_list(),
            "n_workers": self.n_workers,
            "jobs_per_worker": self.jobs_per_worker,
            "eval_points": list(self.eval_points),
        }
        if self.layout is not None:
            d["layout"] = self.layout.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            scheme=d["scheme"],
            cut=None if d.get("cut") is None else CutSpec(*d["cut"]),
            n_workers=int(d["n_workers"]),
            eval_points=tuple(d["eval_points"]),
            jobs_per_worker=int(d.get("jobs_per_worker", 1)),
            layout=SumRateLayout.from_dict(d["layout"]) if d.get("layout") else None,
        )


@dataclass(frozen=True)
class EncodedJob:
    worker_id: int
    eval_point: float
    a_tilde: np.ndarray = field(repr=False)
    b_tilde: np.ndarray = field(repr=False)
    slot: int = 1

    def __post_init__(self):
        if self.a_tilde.shape[1] != self.b_tilde.shape[0]:
            raise ShapeError(f"encoded pair {self.a_tilde.shape} x {self.b_tilde.shape} does not multiply")

    def compute(self):
        return CodedResult(self.worker_id, self.eval_point, self.a_tilde @ self.b_tilde, self.slot)


@dataclass(frozen=True)
class CodedResult:
    worker_id: int
    eval_point: float
    product: np.ndarray = field(repr=False)
    slot: int = 1


def _points(n, eval_points):
    return chebyshev_points(n) if eval_points is None else tuple(eval_points)


def polynomial_spec(cut, n_workers, eval_points=None):
    return CodeSpec("polynomial", cut, n_workers, _points(n_workers, eval_points))


def matdot_spec(cut, n_workers, eval_points=None):
    return CodeSpec("matdot", cut, n_workers, _points(n_workers, eval_points))


def recovery_threshold(spec: CodeSpec) -> int:
    if spec.scheme == "polynomial":
        return spec.cut.mx * spec.cut.my
    if spec.scheme == "matdot":
        return 2 * spec.cut.mz - 1
    return spec.layout.threshold


def _assign_exponents(n_a, n_b, layer_pairs):
    """Exponents that give every wanted (a, b) pair a private coefficient.

    A-blocks take ``0..n_a-1``; each B-block then takes the smallest
    exponent keeping wanted sums pairwise distinct and clear of every
    unwanted cross-term sum. On a full grid this reproduces the polynomial
    code exponents.
    """
    wanted = set(layer_pairs)
    a_exp = list(range(n_a))
    b_exp = []
    for j in range(n_b):
        e = 0
        while True:
            trial = b_exp + [e]
            w_sums, u_sums = [], set()
            for jj, be in enumerate(trial):
                for i, ae in enumerate(a_exp):
                    (w_sums.append if (i, jj) in wanted else u_sums.add)(ae + be)
            if len(set(w_sums)) == len(w_sums) and not u_sums.intersection(w_sums):
                break
            e += 1
        b_exp.append(e)
    return tuple(a_exp), tuple(b_exp)


def sum_rate_layout(a_index, b_index, a_shapes, b_shapes):
    """Build a layout from global block numbering and block shapes."""
    a_index = tuple(tuple(v) for v in a_index)
    b_index = tuple(tuple(v) for v in b_index)
    pairs = [(a, b) for ai, bi in zip(a_index, b_index) for a in ai for b in bi]
    if len(set(pairs)) != len(pairs):
        raise UnsupportedConfigurationError("the same block product appears in two layers")
    a_exp, b_exp = _assign_exponents(len(a_shapes), len(b_shapes), pairs)
    return SumRateLayout(a_index, b_index, tuple(map(tuple, a_shapes)), tuple(map(tuple, b_shapes)),
                         a_exp, b_exp)


def _dedupe(blocks_per_layer):
    distinct, index = [], []
    for blocks in blocks_per_layer:
        idx = []
        for blk in blocks:
            for n, seen in enumerate(distinct):
                if seen.shape == blk.shape and np.array_equal(seen, blk):
                    idx.append(n)
                    break
            else:
                distinct.append(blk)
                idx.append(len(distinct) - 1)
        index.append(tuple(idx))
    return distinct, tuple(index)


def sum_rate_spec(all_blocks, n_workers, jobs_per_worker=1, eval_points=None, layer_cuts=None):
    """Layout and code spec for a sum-rate code over ``all_blocks``.

    ``all_blocks`` is a per-layer list of ``(a_blocks, b_blocks)``, A-blocks
    indexed by ``m_x`` and B-blocks by ``m_y``. Blocks equal in value are
    shared, so layers reading the same operand region collapse into one
    polynomial-code grid.
    """
    if layer_cuts is not None and any(c.mz != 1 for c in layer_cuts):
        raise UnsupportedConfigurationError("sum-rate codes need every layer cut along x/y only (mz == 1)")
    a_distinct, a_index = _dedupe([a for a, _ in all_blocks])
    b_distinct, b_index = _dedupe([b for _, b in all_blocks])
    layout = sum_rate_layout(a_index, b_index, [m.shape for m in a_distinct],
                             [m.shape for m in b_distinct])
    if eval_points is None:
        eval_points = interleaved_chebyshev_points(n_workers, jobs_per_worker)
    return CodeSpec("sum_rate_polynomial", None, n_workers, tuple(eval_points),
                    jobs_per_worker=jobs_per_worker, layout=layout)


def _same_shape(blocks, what):
    shapes = {b.shape for b in blocks}
    if len(shapes) != 1:
        raise ShapeError(f"{what} blocks have differing shapes {sorted(shapes)}")
    return shapes.pop()


def _evaluate(blocks, exponents, points):
    """Stack of ``sum_i blocks[i] * t**exponents[i]`` for every ``t`` in ``points``."""
    stack = np.stack(blocks)
    t = np.asarray(points, dtype=np.float64)
    powers = t[:, None] ** np.asarray(exponents, dtype=np.float64)[None, :]
    return np.tensordot(powers, stack, axes=(1, 0))


def _encoded(blocks, exponents, points):
    if len(blocks) == 1 and exponents[0] == 0:
        # constant polynomial: every job shares the one read-only block
        blk = np.asarray(blocks[0], dtype=np.float64)
        if blk.flags.writeable:
            blk = blk.copy()
            blk.flags.writeable = False
        return [blk] * len(points)
    vals = _evaluate(blocks, exponents, points)
    vals.flags.writeable = False
    return list(vals)


def _jobs(spec, a_blocks, b_blocks, a_exp, b_exp):
    a_vals = _encoded(a_blocks, a_exp, spec.eval_points)
    b_vals = _encoded(b_blocks, b_exp, spec.eval_points)
    jobs = []
    for j, t in enumerate(spec.eval_points):
        worker, slot = spec.owner(j)
        jobs.append(EncodedJob(worker, t, a_vals[j], b_vals[j], slot))
    return jobs


def polynomial_encode(a_blocks, b_blocks, spec: CodeSpec) -> list[EncodedJob]:
    """Jobs carrying ``sum A_mx t**(mx-1)`` and ``sum B_my t**((my-1)*Mx)``."""
    if spec.scheme != "polynomial":
        raise UnsupportedConfigurationError(f"expected a polynomial spec, got {spec.scheme}")
    if len(a_blocks) != spec.cut.mx or len(b_blocks) != spec.cut.my:
        raise ShapeError(f"expected {spec.cut.mx} A-blocks and {spec.cut.my} B-blocks, "
                         f"got {len(a_blocks)} and {len(b_blocks)}")
    sa = _same_shape(a_blocks, "A")
    sb = _same_shape(b_blocks, "B")
    if sa[1] != sb[0]:
        raise ShapeError(f"A-blocks {sa} and B-blocks {sb} do not multiply")
    a_exp, b_exp, _ = spec.exponents()
    return _jobs(spec, a_blocks, b_blocks, a_exp, b_exp)


def matdot_encode(a_blocks, b_blocks, spec: CodeSpec) -> list[EncodedJob]:
    """Jobs carrying ``sum A_j t**(j-1)`` and ``sum B_j t**(mz-j)``.

    ``a_blocks`` are the column pieces of A and ``b_blocks`` the matching
    row pieces of B, both indexed by ``m_z``.
    """
    if spec.scheme != "matdot":
        raise UnsupportedConfigurationError(f"expected a matdot spec, got {spec.scheme}")
    if len(a_blocks) != spec.cut.mz or len(b_blocks) != spec.cut.mz:
        raise ShapeError(f"expected {spec.cut.mz} blocks on each side")
    sa = _same_shape(a_blocks, "A")
    sb = _same_shape(b_blocks, "B")
    if sa[1] != sb[0]:
        raise ShapeError(f"A-blocks {sa} and B-blocks {sb} do not multiply")
    a_exp, b_exp, _ = spec.exponents()
    return _jobs(spec, a_blocks, b_blocks, a_exp, b_exp)


def _pad(m, shape):
    if m.shape == shape:
        return m
    out = np.zeros(shape)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def sum_rate_encode(all_blocks, spec: CodeSpec, k_total: int) -> list[EncodedJob]:
    """Encode every layer's blocks into one code, zero-padding to common shapes."""
    if spec.scheme != "sum_rate_polynomial":
        raise UnsupportedConfigurationError(f"expected a sum-rate spec, got {spec.scheme}")
    lay = spec.layout
    if k_total != len(lay.pairs):
        raise ValueError(f"k_total {k_total} does not match the layout's {len(lay.pairs)} blocks")
    if len(all_blocks) != len(lay.a_index):
        raise ShapeError(f"layout has {len(lay.a_index)} layers, got {len(all_blocks)}")
    a_distinct = [None] * len(lay.a_shapes)
    b_distinct = [None] * len(lay.b_shapes)
    for (a_blocks, b_blocks), ai, bi in zip(all_blocks, lay.a_index, lay.b_index):
        if len(a_blocks) != len(ai) or len(b_blocks) != len(bi):
            raise ShapeError("layer block counts do not match the layout")
        for blk, n in zip(a_blocks, ai):
            if blk.shape != lay.a_shapes[n]:
                raise ShapeError(f"A-block shape {blk.shape} != layout {lay.a_shapes[n]}")
            a_distinct[n] = blk
        for blk, n in zip(b_blocks, bi):
            if blk.shape != lay.b_shapes[n]:
                raise ShapeError(f"B-block shape {blk.shape} != layout {lay.b_shapes[n]}")
            b_distinct[n] = blk
    a_pad = [_pad(m, lay.padded_a_shape) for m in a_distinct]
    b_pad = [_pad(m, lay.padded_b_shape) for m in b_distinct]
    return _jobs(spec, a_pad, b_pad, lay.a_exponents, lay.b_exponents)


def encode(spec: CodeSpec, a_blocks, b_blocks):
    """Dispatch to the scheme's encoder (sum-rate takes per-layer block lists in ``a_blocks``)."""
    if spec.scheme == "polynomial":
        return polynomial_encode(a_blocks, b_blocks, spec)
    if spec.scheme == "matdot":
        return matdot_encode(a_blocks, b_blocks, spec)
    return sum_rate_encode(a_blocks, spec, spec.k)


def fit_coefficients(points, values, n_coeffs, cond_limit=COND_LIMIT, use_all=False):
    """Monomial coefficients of the degree ``n_coeffs - 1`` polynomial through the data.

    ``values`` is a stack of equally shaped matrices; the fit is entrywise
    and shares one factorization of the Vandermonde system. By default
    exactly the first ``n_coeffs`` points are used; with ``use_all`` every
    point enters a least-squares fit, which is better conditioned when the
    first ``n_coeffs`` points are bunched together.
    """
    m = len(points) if use_all else n_coeffs
    t = np.asarray(points[:m], dtype=np.float64)
    if len(t) < n_coeffs:
        raise InsufficientResultsError(len(t), n_coeffs)
    vander = np.vander(t, n_coeffs, increasing=True)
    cond = np.linalg.cond(vander)
    if not math.isfinite(cond) or cond > cond_limit:
        raise ConditioningError(cond, cond_limit)
    y = np.stack([np.asarray(v, dtype=np.float64) for v in values[:m]])
    shape = y.shape[1:]
    if m == n_coeffs:
        coeffs = np.linalg.solve(vander, y.reshape(m, -1))
    else:
        coeffs = np.linalg.lstsq(vander, y.reshape(m, -1), rcond=None)[0]
    return coeffs.reshape((n_coeffs,) + shape)


def decode(results, spec: CodeSpec, cond_limit=COND_LIMIT, use_all=False) -> list[np.ndarray]:
    """Recover the wanted block products from any ``R`` coded results.

    ``use_all`` fits through every distinct result instead of the first ``R``.

    Output order: polynomial codes list ``(m_x, m_y)`` lexicographically;
    MatDot returns the single full product; sum-rate follows the layout's
    global pair order with padding removed.
    """
    need = recovery_threshold(spec)
    seen, pts, vals = set(), [], []
    for res in results:
        if res.eval_point in seen:
            continue
        seen.add(res.eval_point)
        pts.append(res.eval_point)
        vals.append(res.product)
    if len(pts) < need:
        raise InsufficientResultsError(len(pts), need)
    if len({v.shape for v in (vals if use_all else vals[:need])}) != 1:
        raise ShapeError("coded results have differing shapes")
    coeffs = fit_coefficients(pts, vals, need, cond_limit, use_all)
    _, _, wanted = spec.exponents()
    out = []
    for n, d in enumerate(wanted):
        block = coeffs[d]
        if spec.scheme == "sum_rate_polynomial":
            rows, cols = spec.layout.product_shape(spec.layout.pairs[n])
            block = block[:rows, :cols].copy()
        block.flags.writeable = False
        out.append(block)
    return out
