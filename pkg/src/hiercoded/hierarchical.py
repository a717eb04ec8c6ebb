"""Hierarchical (layered) coded matrix multiplication.

The cuboid is first split into ``L`` task blocks, one per layer. Each
layer is cut into ``k`` equal information blocks and encoded with its own
code, and every worker runs its ``L`` encoded jobs in order. The master
decodes a layer once ``r`` of that layer's results are in, then adds the
layer products into place.

A sum-rate counterpart uses the same geometry but a single code across all
layers, so each worker's ``L`` jobs are ``L`` evaluations of one code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import codes
from .codes import CodeSpec, recovery_threshold
from .cuboid import AXES, Cuboid, CutSpec, TaskBlock, category_label, classify, partition_task_block
from .errors import (
    ConfigError,
    DivisibilityError,
    IncompleteAssemblyError,
    ShapeError,
    UnsupportedConfigurationError,
)
from .matrix import Interval, submatrix

__all__ = [
    "LayerSpec",
    "HierarchicalPlan",
    "SumRatePlan",
    "WorkerQueue",
    "Explicit",
    "Uniform",
    "Geometric",
    "build_plan",
    "slab_layers",
    "geometric_sizes",
    "layer_operands",
    "encode_plan",
    "layer_decodable",
    "decode_layer",
    "assemble",
    "sum_rate_counterpart",
    "encode_sum_rate",
    "decode_sum_rate",
]


def _make_code(scheme, cut, n_workers, eval_points):
    if scheme == "polynomial":
        return codes.polynomial_spec(cut, n_workers, eval_points)
    if scheme == "matdot":
        return codes.matdot_spec(cut, n_workers, eval_points)
    raise UnsupportedConfigurationError(f"layers are coded with polynomial or matdot, not {scheme!r}")


@dataclass(frozen=True)
class LayerSpec:
    task_block: TaskBlock
    cut: CutSpec
    code: CodeSpec

    def __post_init__(self):
        if self.code.cut != self.cut:
            raise ValueError("layer cut and code cut disagree")
        if self.code.jobs_per_worker != 1:
            raise ValueError("a layer code gives each worker exactly one job")
        # raises DivisibilityError if the cut does not fit
        partition_task_block(self.task_block, self.cut)

    @property
    def layer_id(self):
        return self.task_block.layer_id

    @property
    def k(self):
        return self.cut.k

    @property
    def r(self):
        return recovery_threshold(self.code)

    @property
    def scheme(self):
        return self.code.scheme

    @property
    def info_blocks(self):
        return partition_task_block(self.task_block, self.cut)

    @property
    def job_shape(self):
        """Dims ``(x, z, y)`` of one information block, i.e. one encoded job."""
        nx, nz, ny = self.task_block.dims
        return (nx // self.cut.mx, nz // self.cut.mz, ny // self.cut.my)

    def to_dict(self):
        d = {"task_block": self.task_block.to_dict(), "cut": self.cut.to_list(), "k": self.k,
             "r": self.r, "category": category_label(classify(self.cut))}
        d.update({key: self.code.to_dict()[key] for key in ("scheme", "eval_points")})
        return d

    @classmethod
    def from_dict(cls, d, n_workers):
        cut = CutSpec(*d["cut"])
        tb = TaskBlock.from_dict(d["task_block"])
        code = CodeSpec(d["scheme"], cut, n_workers, tuple(d["eval_points"]))
        layer = cls(tb, cut, code)
        for key in ("k", "r"):
            if key in d and d[key] != getattr(layer, key):
                raise ConfigError(f"layer {tb.layer_id}: stored {key}={d[key]} but cut gives {getattr(layer, key)}")
        return layer


def _overlap(p: Interval, q: Interval):
    return p.lo <= q.hi and q.lo <= p.hi


def _check_tiling(cuboid, blocks):
    for tb in blocks:
        if not tb.within(cuboid):
            raise ShapeError(f"task block {tb.to_dict()} leaves cuboid {cuboid.dims}")
    for i, p in enumerate(blocks):
        for q in blocks[i + 1:]:
            if all(_overlap(u, v) for u, v in zip(p.intervals(), q.intervals())):
                raise ShapeError(f"task blocks {p.layer_id} and {q.layer_id} overlap")
    covered = sum(tb.volume for tb in blocks)
    if covered != cuboid.volume:
        raise ShapeError(f"task blocks cover {covered} of {cuboid.volume} basic operations")


@dataclass(frozen=True)
class HierarchicalPlan:
    cuboid: Cuboid
    n_workers: int
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ConfigError("a plan needs at least one layer")
        for layer in self.layers:
            if layer.code.n_workers != self.n_workers:
                raise ValueError("layer code worker count differs from the plan's")
        _check_tiling(self.cuboid, [layer.task_block for layer in self.layers])

    @property
    def L(self):
        return len(self.layers)

    @property
    def thresholds(self):
        return [layer.r for layer in self.layers]

    def to_dict(self):
        return {"cuboid": self.cuboid.to_list(), "n_workers": self.n_workers,
                "layers": [layer.to_dict() for layer in self.layers]}

    @classmethod
    def from_dict(cls, d):
        n = int(d["n_workers"])
        return cls(Cuboid(*d["cuboid"]), n, tuple(LayerSpec.from_dict(x, n) for x in d["layers"]))

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class WorkerQueue:
    worker_id: int
    jobs: tuple = field(repr=False)


# --- layer strategies -------------------------------------------------------

@dataclass(frozen=True)
class Explicit:
    """User-chosen layering.

    Either ``k``: a list of per-layer information dimensions laid out as
    consecutive slabs along ``slab_axis`` with extents proportional to
    ``k``, each cut ``k`` ways along ``cut_axis``; or ``layers``: explicit
    ``(TaskBlock, CutSpec)`` pairs.
    """

    k: tuple | None = None
    slab_axis: str = "x"
    cut_axis: str | None = None
    layers: tuple | None = None


@dataclass(frozen=True)
class Uniform:
    n_layers: int
    cut: CutSpec
    axis: str = "x"


@dataclass(frozen=True)
class Geometric:
    """``k_l = max(1, round(k_first * ratio**(l-1)))`` laid out as slabs."""

    n_layers: int
    k_first: int
    ratio: float = 0.5
    slab_axis: str = "x"
    cut_axis: str | None = None


def geometric_sizes(n_layers, k_first, ratio):
    return tuple(max(1, int(round(k_first * ratio ** i))) for i in range(n_layers))


def _axis_index(axis):
    if axis not in AXES:
        raise ConfigError(f"unknown axis {axis!r}; expected one of {AXES}")
    return AXES.index(axis)


def _slab(c: Cuboid, axis, lo, hi, layer_id):
    ivs = [Interval(1, n) for n in c.dims]
    ivs[_axis_index(axis)] = Interval(lo, hi)
    return TaskBlock(*ivs, layer_id=layer_id)


def slab_layers(c: Cuboid, extents, axis):
    """Consecutive slabs along ``axis`` with the given extents."""
    if sum(extents) != c.dims[_axis_index(axis)]:
        raise ShapeError(f"slab extents {list(extents)} do not sum to the {axis} edge")
    blocks, lo = [], 1
    for lid, ext in enumerate(extents, start=1):
        blocks.append(_slab(c, axis, lo, lo + ext - 1, lid))
        lo += ext
    return blocks


def _default_cut_axis(scheme):
    return "z" if scheme == "matdot" else "x"


def _k_slabs(c, ks, slab_axis, cut_axis):
    n = c.dims[_axis_index(slab_axis)]
    total = sum(ks)
    if n % total:
        raise DivisibilityError(slab_axis, n, total)
    unit = n // total
    blocks = slab_layers(c, [k * unit for k in ks], slab_axis)
    pairs = []
    for tb, k in zip(blocks, ks):
        counts = [1, 1, 1]
        counts[_axis_index(cut_axis)] = k
        pairs.append((tb, CutSpec(*counts)))
    return pairs


def _resolve(c, strategy, scheme):
    if isinstance(strategy, Explicit):
        if strategy.layers is not None:
            return [(TaskBlock(tb.x, tb.z, tb.y, i), cut)
                    for i, (tb, cut) in enumerate(strategy.layers, start=1)]
        if not strategy.k:
            raise ConfigError("explicit strategy needs a k list or layers")
        cut_axis = strategy.cut_axis or _default_cut_axis(scheme)
        return _k_slabs(c, list(strategy.k), strategy.slab_axis, cut_axis)
    if isinstance(strategy, Uniform):
        n = c.dims[_axis_index(strategy.axis)]
        if strategy.n_layers < 1:
            raise ConfigError("uniform strategy needs at least one layer")
        if n % strategy.n_layers:
            raise DivisibilityError(strategy.axis, n, strategy.n_layers)
        ext = n // strategy.n_layers
        blocks = slab_layers(c, [ext] * strategy.n_layers, strategy.axis)
        return [(tb, strategy.cut) for tb in blocks]
    if isinstance(strategy, Geometric):
        ks = geometric_sizes(strategy.n_layers, strategy.k_first, strategy.ratio)
        cut_axis = strategy.cut_axis or _default_cut_axis(scheme)
        return _k_slabs(c, ks, strategy.slab_axis, cut_axis)
    raise ConfigError(f"unknown layer strategy {strategy!r}")


def build_plan(c: Cuboid, n_workers: int, strategy, scheme="polynomial", eval_points=None):
    """Layered plan for ``c`` on ``n_workers`` workers.

    ``eval_points`` defaults to Chebyshev nodes; pass ``"integer"`` for
    ``1..N`` or an explicit sequence of ``N`` reals. Every layer shares the
    same points.
    """
    if isinstance(eval_points, str):
        if eval_points == "integer":
            eval_points = codes.integer_points(n_workers)
        elif eval_points == "chebyshev":
            eval_points = None
        else:
            raise ConfigError(f"unknown evaluation point family {eval_points!r}")
    layers = []
    for tb, cut in _resolve(c, strategy, scheme):
        layers.append(LayerSpec(tb, cut, _make_code(scheme, cut, n_workers, eval_points)))
    return HierarchicalPlan(c, n_workers, tuple(layers))


# --- encode / decode -------------------------------------------------------

def layer_operands(layer: LayerSpec, a, b):
    """Input blocks for the layer's encoder.

    Polynomial layers: A-blocks by ``m_x`` and B-blocks by ``m_y``.
    MatDot layers: matching column/row pieces by ``m_z``.
    """
    tb, cut = layer.task_block, layer.cut
    if layer.scheme == "matdot":
        zs = [tb.z.sub(j, cut.mz) for j in range(1, cut.mz + 1)]
        return ([submatrix(a, tb.x, z) for z in zs], [submatrix(b, z, tb.y) for z in zs])
    a_blocks = [submatrix(a, tb.x.sub(i, cut.mx), tb.z) for i in range(1, cut.mx + 1)]
    b_blocks = [submatrix(b, tb.z, tb.y.sub(j, cut.my)) for j in range(1, cut.my + 1)]
    return a_blocks, b_blocks


def _check_operands(c, a, b):
    if a.shape != (c.nx, c.nz) or b.shape != (c.nz, c.ny):
        raise ShapeError(f"operands {a.shape} x {b.shape} do not match cuboid {c.dims}")


def encode_plan(plan: HierarchicalPlan, a, b) -> list[WorkerQueue]:
    _check_operands(plan.cuboid, a, b)
    per_layer = []
    for layer in plan.layers:
        a_blocks, b_blocks = layer_operands(layer, a, b)
        per_layer.append(codes.encode(layer.code, a_blocks, b_blocks))
    return [WorkerQueue(n + 1, tuple(jobs[n] for jobs in per_layer)) for n in range(plan.n_workers)]


def layer_decodable(received, plan) -> list[bool]:
    """Whether each layer has at least ``r`` results; ``received`` holds counts per layer."""
    return [count >= layer.r for count, layer in zip(received, plan.layers)]


def _stitch(products, mx, my):
    rows = [[products[i * my + j] for j in range(my)] for i in range(mx)]
    return np.block(rows)


def decode_layer(results, layer: LayerSpec) -> np.ndarray:
    """Product ``A[X, Z] B[Z, Y]`` of the layer's task block."""
    products = codes.decode(results, layer.code)
    if layer.scheme == "matdot":
        out = products[0]
    else:
        out = _stitch(products, layer.cut.mx, layer.cut.my)
    out.flags.writeable = False
    return out


def assemble(layer_products, c: Cuboid) -> np.ndarray:
    """Add each task block's product into its ``x by y`` footprint.

    ``layer_products`` holds ``(TaskBlock, product)`` pairs; a ``None``
    product marks a layer that was never decoded.
    """
    out = np.zeros((c.nx, c.ny))
    missing, covered = [], 0
    for tb, prod in layer_products:
        if prod is None:
            missing.append(tb.layer_id)
            continue
        if prod.shape != (len(tb.x), len(tb.y)):
            raise ShapeError(f"layer {tb.layer_id} product {prod.shape} does not fit its block")
        out[tb.x.slice, tb.y.slice] += prod
        covered += tb.volume
    if missing:
        raise IncompleteAssemblyError(missing)
    if covered != c.volume:
        raise IncompleteAssemblyError([], f"blocks cover {covered} of {c.volume} basic operations")
    out.flags.writeable = False
    return out


# --- sum-rate counterpart --------------------------------------------------

@dataclass(frozen=True)
class SumRatePlan:
    """Same task blocks as a hierarchical plan, one code across all layers.

    Worker ``n`` runs ``L`` jobs; job ``l`` evaluates the code at point
    ``(l - 1) * N + n``.
    """

    cuboid: Cuboid
    n_workers: int
    layers: tuple
    code: CodeSpec

    @property
    def L(self):
        return len(self.layers)

    @property
    def k_total(self):
        return self.code.k

    @property
    def r(self):
        return recovery_threshold(self.code)

    @property
    def job_shape(self):
        """Padded ``(x, z, y)`` dims of every sum-rate job."""
        lay = self.code.layout
        (rows, inner), (_, cols) = lay.padded_a_shape, lay.padded_b_shape
        return (rows, inner, cols)

    def to_dict(self):
        return {"cuboid": self.cuboid.to_list(), "n_workers": self.n_workers,
                "layers": [{"task_block": layer.task_block.to_dict(), "cut": layer.cut.to_list(),
                            "k": layer.k} for layer in self.layers],
                "k_total": self.k_total, "r": self.r, "code": self.code.to_dict()}


def sum_rate_counterpart(plan: HierarchicalPlan, eval_points=None) -> SumRatePlan:
    """Single code over every information block of ``plan``.

    Layers reading the same A rows (or the same B columns) share operand
    blocks, which is what keeps the threshold at ``sum(k)`` for slab plans.
    """
    for layer in plan.layers:
        if layer.cut.mz != 1:
            raise UnsupportedConfigurationError(
                f"layer {layer.layer_id} cuts along z; sum-rate codes need x/y cuts only"
            )
    a_keys, b_keys, a_index, b_index = {}, {}, [], []
    for layer in plan.layers:
        tb, cut = layer.task_block, layer.cut
        ai = []
        for i in range(1, cut.mx + 1):
            key = (tb.x.sub(i, cut.mx), tb.z)
            ai.append(a_keys.setdefault(key, len(a_keys)))
        bi = []
        for j in range(1, cut.my + 1):
            key = (tb.z, tb.y.sub(j, cut.my))
            bi.append(b_keys.setdefault(key, len(b_keys)))
        a_index.append(ai)
        b_index.append(bi)
    a_shapes = [(len(x), len(z)) for x, z in a_keys]
    b_shapes = [(len(z), len(y)) for z, y in b_keys]
    layout = codes.sum_rate_layout(a_index, b_index, a_shapes, b_shapes)
    if eval_points is None:
        pts = codes.interleaved_chebyshev_points(plan.n_workers, plan.L)
    else:
        pts = tuple(eval_points)
    spec = CodeSpec("sum_rate_polynomial", None, plan.n_workers, pts, jobs_per_worker=plan.L,
                    layout=layout)
    return SumRatePlan(plan.cuboid, plan.n_workers, plan.layers, spec)


def encode_sum_rate(sp: SumRatePlan, a, b) -> list[WorkerQueue]:
    _check_operands(sp.cuboid, a, b)
    all_blocks = [layer_operands(layer, a, b) for layer in sp.layers]
    jobs = codes.sum_rate_encode(all_blocks, sp.code, sp.k_total)
    queues = {n: [] for n in range(1, sp.n_workers + 1)}
    for job in sorted(jobs, key=lambda j: (j.worker_id, j.slot)):
        queues[job.worker_id].append(job)
    return [WorkerQueue(n, tuple(q)) for n, q in queues.items()]


def decode_sum_rate(results, sp: SumRatePlan, use_all=False) -> list[np.ndarray]:
    """Per-layer task-block products, in layer order."""
    products = codes.decode(results, sp.code, use_all=use_all)
    out, pos = [], 0
    for layer, size in zip(sp.layers, sp.code.layout.layer_sizes):
        chunk = products[pos:pos + size]
        pos += size
        out.append(_stitch(chunk, layer.cut.mx, layer.cut.my))
    return out
