"""Event-driven master/worker simulation of coded matrix multiplication.

Each trial draws which workers straggle, runs every worker through its
job queue in order, and feeds completions to a master that tracks, per
layer (or per code), how many results have arrived. The trial ends the
moment every layer has reached its recovery threshold. Only computation
time counts; communication and decoding are not simulated.

Randomness comes from ``numpy.random.SeedSequence([seed, trial_index])``,
so a trial is reproducible on its own and matched across schemes: the
straggler flags are always the first ``N`` draws of the trial stream.
"""

from __future__ import annotations

import csv
import heapq
import math
import statistics
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .cuboid import Cuboid
from .errors import ConfigError, DivisibilityError
from .hierarchical import LayerSpec, SumRatePlan

__all__ = [
    "Deterministic",
    "ShiftedExponential",
    "SimConfig",
    "SimTrace",
    "job_cost",
    "simulate_trial",
    "simulate_uncoded",
    "arrival_order",
    "trial_times",
    "average_finishing_time",
    "profile_layer_sizes",
    "write_trace_csv",
    "write_summary_csv",
]


@dataclass(frozen=True)
class Deterministic:
    """Every basic operation takes ``seconds_per_op`` seconds."""

    seconds_per_op: float = 1.0

    stochastic = False

    def job_time(self, cost, noise=None):
        return cost * self.seconds_per_op

    def to_dict(self):
        return {"kind": "deterministic", "seconds_per_op": self.seconds_per_op}


@dataclass(frozen=True)
class ShiftedExponential:
    """Job of ``c`` operations takes ``c * (shift + E / rate)`` seconds, ``E ~ Exp(1)``.

    ``shift`` is seconds per operation; ``1 / rate`` is the mean extra
    seconds per operation.
    """

    shift: float = 1.0
    rate: float = 1.0

    stochastic = True

    def job_time(self, cost, noise):
        return cost * (self.shift + noise / self.rate)

    def to_dict(self):
        return {"kind": "shifted_exponential", "shift": self.shift, "rate": self.rate}


def time_model_from_dict(d):
    kind = d.get("kind", "deterministic")
    if kind == "deterministic":
        return Deterministic(float(d.get("seconds_per_op", 1.0)))
    if kind == "shifted_exponential":
        return ShiftedExponential(float(d.get("shift", 1.0)), float(d.get("rate", 1.0)))
    raise ConfigError(f"unknown time model {kind!r}")


@dataclass(frozen=True)
class SimConfig:
    n_workers: int
    straggler_prob: float = 0.5
    # a straggler does one extra job of equal size per layer
    straggler_slowdown: float = 2.0
    time_model: Deterministic | ShiftedExponential = field(default_factory=Deterministic)
    seed: int = 0
    trials: int = 10

    def __post_init__(self):
        if not 0.0 <= self.straggler_prob <= 1.0:
            raise ConfigError(f"straggler_prob must lie in [0, 1], got {self.straggler_prob}")
        if self.straggler_slowdown < 1.0:
            raise ConfigError(f"straggler_slowdown must be >= 1, got {self.straggler_slowdown}")
        if self.trials < 1 or self.n_workers < 1:
            raise ConfigError("trials and n_workers must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass(frozen=True)
class SimTrace:
    events: tuple
    finishing_time: float
    per_layer_done_time: tuple
    stragglers: tuple = ()
    # size R of each interpolation system the master would solve
    interpolation_sizes: tuple = ()


def job_cost(layer: LayerSpec, n_workers: int = None) -> int:
    """Basic operations in one encoded job of ``layer`` (one information block)."""
    nx, nz, ny = layer.job_shape
    return nx * nz * ny


def _trial_rng(cfg, trial_index):
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, trial_index]))


def _run(costs, groups, thresholds, cfg, trial_index):
    """Simulate one trial.

    ``costs[j]`` is the operation count of every worker's ``j``-th job,
    ``groups[j]`` the decoding group that job feeds, and
    ``thresholds[g]`` the number of results group ``g`` needs.
    """
    n = cfg.n_workers
    rng = _trial_rng(cfg, trial_index)
    stragglers = rng.random(n) < cfg.straggler_prob
    noise = rng.standard_exponential((n, len(costs))) if cfg.time_model.stochastic else None
    speed = np.where(stragglers, cfg.straggler_slowdown, 1.0)

    def duration(w, j):
        t = cfg.time_model.job_time(costs[j], None if noise is None else noise[w, j])
        return float(t * speed[w])

    heap = [(duration(w, 0), w + 1, 1) for w in range(n)]
    heapq.heapify(heap)
    counts = [0] * len(thresholds)
    done = [None] * len(thresholds)
    for g, r in enumerate(thresholds):
        if r <= 0:
            done[g] = 0.0
    events = []
    remaining = sum(d is None for d in done)
    while heap and remaining:
        t, worker, job = heapq.heappop(heap)
        events.append((t, worker, job))
        g = groups[job - 1]
        counts[g] += 1
        if done[g] is None and counts[g] >= thresholds[g]:
            done[g] = t
            remaining -= 1
        if job < len(costs):
            heapq.heappush(heap, (t + duration(worker - 1, job), worker, job + 1))
    if remaining:
        raise RuntimeError("simulation ran out of jobs before every group was decodable")
    return SimTrace(tuple(events), max(done), tuple(done), tuple(bool(s) for s in stragglers))


def simulate_trial(plan, cfg: SimConfig, trial_index: int) -> SimTrace:
    """One trial of a hierarchical (or flat, ``L = 1``) plan, or of a sum-rate plan."""
    if plan.n_workers != cfg.n_workers:
        raise ConfigError(f"plan has {plan.n_workers} workers, config {cfg.n_workers}")
    if isinstance(plan, SumRatePlan):
        x, z, y = plan.job_shape
        costs = [x * z * y] * plan.L
        trace = _run(costs, [0] * plan.L, [plan.r], cfg, trial_index)
        sizes = (plan.r,)
    else:
        costs = [job_cost(layer) for layer in plan.layers]
        thresholds = [layer.r for layer in plan.layers]
        trace = _run(costs, list(range(plan.L)), thresholds, cfg, trial_index)
        sizes = tuple(thresholds)
    return SimTrace(trace.events, trace.finishing_time, trace.per_layer_done_time,
                    trace.stragglers, sizes)


def arrival_order(plan: SumRatePlan, cfg: SimConfig, trial_index: int) -> tuple:
    """Every ``(time, worker, slot)`` completion of a sum-rate trial, had no job been cancelled.

    Shares the trial's random draws with :func:`simulate_trial`, so its
    prefix is that trial's event list.
    """
    x, z, y = plan.job_shape
    n_jobs = cfg.n_workers * plan.L
    return _run([x * z * y] * plan.L, [0] * plan.L, [n_jobs], cfg, trial_index).events


def simulate_uncoded(cuboid: Cuboid, cfg: SimConfig, trial_index: int) -> SimTrace:
    """Rows of A split evenly over the workers, no redundancy: wait for everyone."""
    n = cfg.n_workers
    if cuboid.nx % n:
        raise DivisibilityError("x", cuboid.nx, n)
    return _run([cuboid.volume // n], [0], [n], cfg, trial_index)


def _simulate(target, cfg, trial_index):
    if isinstance(target, Cuboid):
        return simulate_uncoded(target, cfg, trial_index)
    return simulate_trial(target, cfg, trial_index)


def trial_times(target, cfg: SimConfig) -> list[float]:
    """Finishing time of trials ``1..cfg.trials`` for a plan or, given a Cuboid, the uncoded baseline."""
    return [_simulate(target, cfg, i).finishing_time for i in range(1, cfg.trials + 1)]


def average_finishing_time(target, cfg: SimConfig):
    """``(mean, standard error)`` of the finishing time over ``cfg.trials`` trials."""
    times = sorted(trial_times(target, cfg))
    mean = math.fsum(times) / len(times)
    if len(times) < 2:
        return mean, 0.0
    return mean, statistics.stdev(times) / math.sqrt(len(times))


def _completion_fraction(model, slowdown, p, n_jobs, tau):
    """Probability a worker has finished ``n_jobs`` unit-cost jobs by ``tau``."""
    out = 0.0
    for s, prob in ((1.0, 1.0 - p), (slowdown, p)):
        if prob == 0.0:
            continue
        if isinstance(model, Deterministic):
            frac = float(n_jobs * model.seconds_per_op * s <= tau)
        else:
            x = (tau / s - n_jobs * model.shift) * model.rate
            frac = float(stats.gamma.cdf(x, n_jobs)) if x > 0 else 0.0
        out += prob * frac
    return out


def profile_layer_sizes(n_layers: int, k_mean: int, cfg: SimConfig) -> tuple:
    """Non-increasing layer sizes matched to the expected completion profile.

    Picks the earliest time ``tau`` at which the expected number of
    workers done with their ``l``-th job, rounded to the nearest integer, sums to
    ``n_layers * k_mean`` over the layers, and uses those counts as the
    ``k_l``. All jobs are taken to be equal-sized, which holds for plans
    whose information blocks all have the same volume.
    """
    n = cfg.n_workers
    if not 1 <= k_mean <= n:
        raise ConfigError(f"k_mean must lie in [1, {n}], got {k_mean}")
    target = n_layers * k_mean
    model, p, s = cfg.time_model, cfg.straggler_prob, cfg.straggler_slowdown

    def sizes(tau):
        ks = [int(round(n * _completion_fraction(model, s, p, j, tau)))
              for j in range(1, n_layers + 1)]
        return [min(n, max(1, k)) for k in ks]

    hi = 1.0
    while sum(sizes(hi)) < target:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sum(sizes(mid)) >= target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    ks = sizes(hi)
    while sum(ks) > target:
        ks[ks.index(max(ks))] -= 1
    return tuple(sorted(ks, reverse=True))


def write_trace_csv(rows, path):
    """Rows of ``(trial, scheme, L, time_seconds)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "scheme", "L", "time_seconds"])
        for trial, scheme, L, t in rows:
            w.writerow([trial, scheme, L, repr(float(t))])


def write_summary_csv(rows, fh):
    """Rows of ``(scheme, L, mean, stderr, trials)`` to an open text stream."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["scheme", "L", "mean", "stderr", "trials"])
    for scheme, L, mean, se, trials in rows:
        w.writerow([scheme, L, repr(float(mean)), repr(float(se)), trials])
