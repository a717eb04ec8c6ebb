"""Command-line front end.

    hiercoded plan CONFIG [--out FILE]
    hiercoded roundtrip CONFIG [--seed S] [--max-results M]
    hiercoded sweep CONFIG [--layers 1,2,4,8,12] [--out FILE]

Exit status: 0 on success, 1 for invalid input, 2 for numerical failure
(too few results, ill-conditioned decode, or a roundtrip error above
tolerance). ``HIERCODED_LOG`` sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import hierarchical as hier
from .config import RunConfig, load_config, pad_to_divisible, unpad
from .cuboid import Cuboid, CutSpec
from .errors import (
    CodedMatmulError,
    ConditioningError,
    InsufficientResultsError,
    UnsupportedConfigurationError,
)
from .matrix import multiply
from .sim import arrival_order, average_finishing_time, simulate_trial, write_summary_csv

__all__ = ["main", "cmd_plan", "cmd_roundtrip", "cmd_sweep", "pad_to_divisible"]

log = logging.getLogger("hiercoded")

ROUNDTRIP_TOL = 1e-6
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def plan_document(cfg: RunConfig) -> dict:
    plan = cfg.build()
    doc = plan.to_dict()
    doc["L"] = plan.L
    doc["scheme"] = cfg.scheme
    doc["k_r"] = [[layer.k, layer.r] for layer in plan.layers]
    try:
        sp = hier.sum_rate_counterpart(plan)
        doc["sum_rate"] = {"k_total": sp.k_total, "r": sp.r}
    except UnsupportedConfigurationError as exc:
        doc["sum_rate"] = None
        log.info("no sum-rate counterpart: %s", exc)
    return doc


def cmd_plan(path, out=None) -> dict:
    doc = plan_document(load_config(path))
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return doc


def _received(trace, queues, max_results=None):
    """Coded results the master holds when the trace ends, grouped by layer (or slot)."""
    groups = {}
    for _, worker, layer in trace.events:
        job = queues[worker - 1].jobs[layer - 1]
        groups.setdefault(layer, []).append(job.compute())
    if max_results is not None:
        groups = {k: v[:max_results] for k, v in groups.items()}
    return groups


def _decode_waiting(results, order, queues, sp):
    """Decode the sum-rate code, waiting for further arrivals while the fit is ill-conditioned.

    ``results`` grows in place with each extra result taken from ``order``.
    """
    try:
        return hier.decode_sum_rate(results, sp)
    except ConditioningError as exc:
        last = exc
    for _, w, slot in order[len(results):]:
        results.append(queues[w - 1].jobs[slot - 1].compute())
        try:
            products = hier.decode_sum_rate(results, sp, use_all=True)
        except ConditioningError as exc:
            last = exc
            continue
        log.info("sum-rate decode needed %d results for R = %d", len(results), sp.r)
        return products
    raise last


def roundtrip(cfg: RunConfig, seed=0, max_results=None) -> dict:
    """Encode, simulate arrivals, decode and assemble random ``A``, ``B``; compare to ``A @ B``."""
    rng = np.random.default_rng(seed)
    nx, nz, ny = cfg.dims
    a = rng.standard_normal((nx, nz))
    b = rng.standard_normal((nz, ny))
    plan = cfg.build()
    # the plan cuboid is the configured one, zero-padded if the config asks for it
    ap, bp, dims = pad_to_divisible(a, b, plan.cuboid.dims)
    sim_cfg = cfg.sim
    used = []
    if cfg.scheme == "sum_rate":
        sp = hier.sum_rate_counterpart(plan)
        queues = hier.encode_sum_rate(sp, ap, bp)
        trace = simulate_trial(sp, sim_cfg, seed + 1)
        # one code: every completion counts, in arrival order
        order = arrival_order(sp, sim_cfg, seed + 1)
        if max_results is not None:
            order = order[:max_results]
        results = [queues[w - 1].jobs[slot - 1].compute() for _, w, slot in order[:len(trace.events)]]
        products = _decode_waiting(results, order, queues, sp)
        used.append(len(results))
    else:
        queues = hier.encode_plan(plan, ap, bp)
        trace = simulate_trial(plan, sim_cfg, seed + 1)
        got = _received(trace, queues, max_results)
        products = []
        for lid, layer in enumerate(plan.layers, start=1):
            res = got.get(lid, [])
            used.append(len(res))
            products.append(hier.decode_layer(res, layer))
    out = hier.assemble([(layer.task_block, p) for layer, p in zip(plan.layers, products)],
                        plan.cuboid)
    got_c = unpad(out, dims)
    want = multiply(a, b)
    err = float(np.linalg.norm(got_c - want) / np.linalg.norm(want))
    return {"relative_error": err, "passed": err < ROUNDTRIP_TOL, "results_used": used,
            "thresholds": plan.thresholds if cfg.scheme != "sum_rate" else [sp.r],
            "finishing_time": trace.finishing_time}


def cmd_roundtrip(path, seed=0, max_results=None) -> int:
    report = roundtrip(load_config(path), seed, max_results)
    print(json.dumps(report))
    return EXIT_OK if report["passed"] else EXIT_NUMERICAL


def sweep_rows(cfg: RunConfig, layer_counts):
    """Summary rows ``(scheme, L, mean, stderr, trials)`` for every ``L``.

    Per-layer information dimension ``k_mean`` (``sweep.k_mean``) is held
    fixed: the flat code uses ``k_mean`` blocks, and each ``L``-layer
    hierarchical or sum-rate plan uses ``L * k_mean`` blocks in total.
    """
    sw = cfg.sweep
    k_mean = int(sw.get("k_mean", 11))
    strategy_name = sw.get("strategy", "profile")
    n = cfg.n_workers
    sim_cfg = cfg.sim
    valid = [L for L in layer_counts if L >= 1]
    lcm = math.lcm(n, k_mean, *(k_mean * L for L in valid))
    nx, nz, ny = cfg.dims
    cuboid = Cuboid(-(-nx // lcm) * lcm, nz, ny)
    log.info("sweep cuboid %s (configured %s)", cuboid.dims, cfg.dims)

    trials = sim_cfg.trials
    unc = average_finishing_time(cuboid, sim_cfg)
    flat_plan = hier.build_plan(cuboid, n, hier.Uniform(1, CutSpec(k_mean, 1, 1)), "polynomial",
                                cfg.eval_points)
    flat = average_finishing_time(flat_plan, sim_cfg)
    rows = []
    for L in layer_counts:
        try:
            if L < 1:
                raise UnsupportedConfigurationError(f"L must be positive, got {L}")
            if strategy_name == "profile":
                strategy = {"name": "profile", "L": L, "k_mean": k_mean}
            elif strategy_name == "uniform":
                strategy = {"name": "uniform", "L": L, "cut": [k_mean, 1, 1]}
            else:
                raise UnsupportedConfigurationError(f"sweep strategy {strategy_name!r} is not rate matched")
            plan = hier.build_plan(cuboid, n, cfg.resolve_strategy(strategy), "polynomial",
                                   cfg.eval_points)
            sp = hier.sum_rate_counterpart(plan)
            h = average_finishing_time(plan, sim_cfg)
            s = average_finishing_time(sp, sim_cfg)
        except CodedMatmulError as exc:
            log.warning("skipping L=%s: %s", L, exc)
            rows.append(("skipped", L, float("nan"), float("nan"), 0))
            continue
        rows += [("uncoded", L, *unc, trials), ("polynomial", L, *flat, trials),
                 ("hierarchical", L, *h, trials), ("sum_rate", L, *s, trials)]
    return rows


def cmd_sweep(path, layers=None, out=None) -> list:
    cfg = load_config(path)
    if layers is None:
        layers = cfg.sweep.get("layers", [1, 2, 4, 8, 12])
    rows = sweep_rows(cfg, layers)
    if out and out != "-":
        with open(out, "w", newline="") as fh:
            write_summary_csv(rows, fh)
    else:
        write_summary_csv(rows, sys.stdout)
    return rows


def _int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="hiercoded", description="Hierarchical coded matrix multiplication")
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("plan", help="build and print the layered plan")
    pp.add_argument("config")
    pp.add_argument("--out", help="write the plan document here instead of stdout")

    pr = sub.add_parser("roundtrip", help="encode, simulate, decode and check against A @ B")
    pr.add_argument("config")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--max-results", type=int, default=None,
                    help="keep at most this many results per layer")

    ps = sub.add_parser("sweep", help="average finishing time against the number of layers")
    ps.add_argument("config")
    ps.add_argument("--layers", type=_int_list, default=None)
    ps.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HIERCODED_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plan":
            cmd_plan(args.config, args.out)
            return EXIT_OK
        if args.command == "roundtrip":
            return cmd_roundtrip(args.config, args.seed, args.max_results)
        cmd_sweep(args.config, args.layers, args.out)
        return EXIT_OK
    except (InsufficientResultsError, ConditioningError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CodedMatmulError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
