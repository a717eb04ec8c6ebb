"""JSON run configuration shared by the ``plan``, ``roundtrip`` and ``sweep`` commands.

Example::

    {
      "matrix": {"nx": 32, "nz": 8, "ny": 6},
      "n_workers": 16,
      "scheme": "polynomial",
      "strategy": {"name": "explicit", "k": [8, 4, 3, 1]},
      "sim": {"straggler_prob": 0.5, "straggler_slowdown": 2.0,
              "time_model": {"kind": "deterministic", "seconds_per_op": 1e-9},
              "seed": 0, "trials": 10}
    }

``scheme`` is ``polynomial``, ``matdot`` or ``sum_rate`` (polynomial
layers coded jointly). Strategies: ``explicit`` (``k`` list or ``layers``
with ranges), ``uniform``, ``geometric`` and ``profile``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cuboid import AXES, Cuboid, CutSpec, TaskBlock
from .errors import ConfigError
from .hierarchical import Explicit, Geometric, Uniform, build_plan, geometric_sizes
from .matrix import Interval
from .sim import SimConfig, profile_layer_sizes, time_model_from_dict

__all__ = [
    "RunConfig",
    "load_config",
    "parse_config",
    "required_divisors",
    "padded_dims",
    "pad_to_divisible",
    "unpad",
]

SCHEME_NAMES = {"polynomial": "polynomial", "matdot": "matdot", "sum_rate": "polynomial"}


@dataclass(frozen=True)
class RunConfig:
    dims: tuple
    n_workers: int
    scheme: str
    strategy: dict
    sim: SimConfig
    eval_points: str = "chebyshev"
    pad: bool = False
    sweep: dict = field(default_factory=dict)

    @property
    def layer_scheme(self):
        return SCHEME_NAMES[self.scheme]

    def resolve_strategy(self, strategy=None):
        """Turn the strategy section into a hierarchical strategy object."""
        s = dict(self.strategy if strategy is None else strategy)
        name = s.pop("name", None)
        try:
            if name == "explicit":
                if "layers" in s:
                    layers = tuple(
                        (TaskBlock(Interval.coerce(d["x"]), Interval.coerce(d["z"]),
                                   Interval.coerce(d["y"])), CutSpec(*d["cut"]))
                        for d in s["layers"]
                    )
                    return Explicit(layers=layers)
                return Explicit(k=tuple(int(k) for k in s["k"]), slab_axis=s.get("slab_axis", "x"),
                                cut_axis=s.get("cut_axis"))
            if name == "uniform":
                return Uniform(int(s["L"]), CutSpec(*s.get("cut", (1, 1, 1))), s.get("axis", "x"))
            if name == "geometric":
                return Geometric(int(s["L"]), int(s["k_first"]), float(s.get("ratio", 0.5)),
                                 s.get("slab_axis", "x"), s.get("cut_axis"))
            if name == "profile":
                ks = profile_layer_sizes(int(s["L"]), int(s["k_mean"]), self.sim)
                return Explicit(k=ks, slab_axis=s.get("slab_axis", "x"), cut_axis=s.get("cut_axis"))
        except KeyError as exc:
            raise ConfigError(f"strategy {name!r} is missing field {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigError(f"strategy {name!r}: {exc}") from None
        raise ConfigError(f"unknown strategy name {name!r}")

    def cuboid(self, strategy=None):
        dims = self.dims
        if self.pad:
            dims = padded_dims(dims, required_divisors(self.resolve_strategy(strategy), self.layer_scheme))
        return Cuboid(*dims)

    def build(self, strategy=None):
        return build_plan(self.cuboid(strategy), self.n_workers, self.resolve_strategy(strategy),
                          self.layer_scheme, self.eval_points)


def _line_context(text, lineno):
    lines = text.splitlines()
    return lines[lineno - 1] if 0 < lineno <= len(lines) else ""


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}: {_line_context(text, exc.lineno)!r}"
        ) from None
    return parse_config(raw, source=str(path))


def parse_config(raw, source="<config>") -> RunConfig:
    if not isinstance(raw, dict) or not raw:
        raise ConfigError(f"{source}: configuration is empty")
    try:
        m = raw["matrix"]
        dims = (int(m["nx"]), int(m["nz"]), int(m["ny"]))
        n = int(raw["n_workers"])
        scheme = raw.get("scheme", "polynomial")
        strategy = raw["strategy"]
    except KeyError as exc:
        raise ConfigError(f"{source}: missing required field {exc.args[0]!r}") from None
    if scheme not in SCHEME_NAMES:
        raise ConfigError(f"{source}: scheme must be one of {sorted(SCHEME_NAMES)}, got {scheme!r}")
    if not isinstance(strategy, dict) or "name" not in strategy:
        raise ConfigError(f"{source}: strategy must be an object with a 'name'")
    s = raw.get("sim", {})
    try:
        sim = SimConfig(
            n_workers=n,
            straggler_prob=float(s.get("straggler_prob", 0.5)),
            straggler_slowdown=float(s.get("straggler_slowdown", 2.0)),
            time_model=time_model_from_dict(s.get("time_model", {})),
            seed=int(s.get("seed", 0)),
            trials=int(s.get("trials", 10)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: sim section: {exc}") from None
    return RunConfig(dims, n, scheme, strategy, sim, raw.get("eval_points", "chebyshev"),
                     bool(raw.get("pad", False)), raw.get("sweep", {}))


# --- zero padding -----------------------------------------------------------

def required_divisors(strategy, scheme="polynomial"):
    """Per-axis integers each cuboid edge must be a multiple of for ``strategy``."""
    div = {a: 1 for a in AXES}

    def need(axis, d):
        div[axis] = math.lcm(div[axis], int(d))

    if isinstance(strategy, Uniform):
        for axis, m in zip(AXES, strategy.cut.counts):
            need(axis, m * (strategy.n_layers if axis == strategy.axis else 1))
        need(strategy.axis, strategy.n_layers)
    elif isinstance(strategy, (Explicit, Geometric)) and getattr(strategy, "layers", None) is None:
        ks = strategy.k if isinstance(strategy, Explicit) else geometric_sizes(
            strategy.n_layers, strategy.k_first, strategy.ratio)
        cut_axis = strategy.cut_axis or ("z" if scheme == "matdot" else "x")
        need(strategy.slab_axis, sum(ks))
        if cut_axis != strategy.slab_axis:
            for k in ks:
                need(cut_axis, k)
    return tuple(div[a] for a in AXES)


def padded_dims(dims, divisors):
    return tuple(-(-n // d) * d for n, d in zip(dims, divisors))


def pad_to_divisible(a, b, divisors):
    """Zero-pad ``A`` and ``B`` so ``nx, nz, ny`` are multiples of ``divisors``.

    Returns ``(A_padded, B_padded, (nx, nz, ny))`` with the original dims;
    :func:`unpad` trims a product of the padded operands back.
    """
    nx, nz = a.shape
    ny = b.shape[1]
    px, pz, py = padded_dims((nx, nz, ny), divisors)
    if (px, pz, py) == (nx, nz, ny):
        return a, b, (nx, nz, ny)
    ap = np.zeros((px, pz))
    ap[:nx, :nz] = a
    bp = np.zeros((pz, py))
    bp[:nz, :ny] = b
    ap.flags.writeable = False
    bp.flags.writeable = False
    return ap, bp, (nx, nz, ny)


def unpad(product, dims):
    nx, _, ny = dims
    return product[:nx, :ny]
