import io
from collections import Counter

import numpy as np
import pytest

from hiercoded import hierarchical as hier
from hiercoded.cuboid import Cuboid, CutSpec, TaskBlock
from hiercoded.errors import ConfigError, DivisibilityError
from hiercoded.hierarchical import Explicit, Uniform, build_plan
from hiercoded.matrix import Interval
from hiercoded.sim import (
    Deterministic,
    ShiftedExponential,
    SimConfig,
    arrival_order,
    average_finishing_time,
    job_cost,
    profile_layer_sizes,
    simulate_trial,
    simulate_uncoded,
    trial_times,
    write_summary_csv,
    write_trace_csv,
)

EXP = ShiftedExponential(shift=2e-9, rate=1e9)


def cfg(n, p=0.0, **kw):
    return SimConfig(n_workers=n, straggler_prob=p, **kw)


def trial_with_stragglers(c, count):
    """First trial index whose draw makes exactly ``count`` stragglers."""
    for i in range(1, 200):
        if sum(simulate_uncoded(Cuboid(c.n_workers, 1, 1), c, i).stragglers) == count:
            return i
    raise AssertionError("no such trial")


def test_job_cost_examples():
    rep = build_plan(Cuboid(10, 8, 6), 2, Uniform(1, CutSpec()))
    assert job_cost(rep.layers[0]) == 480
    cube = build_plan(Cuboid(8, 8, 8), 8, Uniform(1, CutSpec(2, 1, 2)))
    assert job_cost(cube.layers[0]) == 4 * 8 * 4
    md = build_plan(Cuboid(4, 6, 4), 3, Uniform(1, CutSpec(1, 2, 1)), "matdot")
    assert job_cost(md.layers[0]) == 48


def test_info_block_cost_8_cube():
    # no code cuts all three axes, so check the block volume directly
    from hiercoded.cuboid import partition_task_block
    tb = TaskBlock(Interval(1, 8), Interval(1, 8), Interval(1, 8))
    assert {ib.volume for ib in partition_task_block(tb, CutSpec(2, 2, 2))} == {64}


def test_single_fast_worker():
    plan = build_plan(Cuboid(5, 1, 1), 2, Uniform(1, CutSpec()))
    assert simulate_trial(plan, cfg(2), 1).finishing_time == 5.0


def test_wait_for_straggler():
    c = cfg(2, 0.5)
    i = trial_with_stragglers(c, 1)
    plan = build_plan(Cuboid(10, 1, 1), 2, Uniform(1, CutSpec(2, 1, 1)))
    assert simulate_trial(plan, c, i).finishing_time == 10.0


def test_sequential_layers():
    c = Cuboid(8, 1, 1)
    layers = ((TaskBlock(Interval(1, 5), Interval(1, 1), Interval(1, 1)), CutSpec()),
              (TaskBlock(Interval(6, 8), Interval(1, 1), Interval(1, 1)), CutSpec()))
    plan = build_plan(c, 1, Explicit(layers=layers))
    trace = simulate_trial(plan, cfg(1), 1)
    assert trace.per_layer_done_time == (5.0, 8.0)
    assert trace.finishing_time == 8.0


def test_uncoded_examples():
    c = Cuboid(10, 1, 1)
    assert simulate_uncoded(c, cfg(2), 1).finishing_time == 5.0
    s = cfg(2, 0.5)
    assert simulate_uncoded(c, s, trial_with_stragglers(s, 1)).finishing_time == 10.0
    assert simulate_uncoded(c, cfg(1), 1).finishing_time == 10.0
    with pytest.raises(DivisibilityError):
        simulate_uncoded(Cuboid(9, 1, 1), cfg(2), 1)


def test_average_degenerate_cases():
    plan = build_plan(Cuboid(4, 3, 2), 4, Uniform(1, CutSpec(2, 1, 1)))
    mean, se = average_finishing_time(plan, cfg(4, 0.0, trials=20))
    assert se == 0.0 and mean == simulate_trial(plan, cfg(4), 1).finishing_time
    mean, se = average_finishing_time(plan, cfg(4, 1.0, trials=20))
    assert se == 0.0 and mean == 2 * simulate_trial(plan, cfg(4), 1).finishing_time


def test_average_two_workers_closed_form():
    plan = build_plan(Cuboid(2, 1, 1), 2, Uniform(1, CutSpec(2, 1, 1)))
    mean, _ = average_finishing_time(plan, cfg(2, 0.5, trials=10000, seed=1))
    assert mean == pytest.approx(1.75, rel=0.02)


def test_trials_are_deterministic():
    plan = build_plan(Cuboid(16, 8, 6), 16, Explicit(k=(8, 4, 3, 1)))
    c = cfg(16, 0.5, time_model=EXP, seed=9, trials=30)
    assert trial_times(plan, c) == trial_times(plan, c)
    assert simulate_trial(plan, c, 4) == simulate_trial(plan, c, 4)
    other = cfg(16, 0.5, time_model=EXP, seed=10, trials=30)
    assert trial_times(plan, c) != trial_times(plan, other)


def test_layering_never_slower_than_flat_deterministic():
    cub = Cuboid(96, 4, 4)
    c = cfg(12, 0.5, trials=50)
    flat = build_plan(cub, 12, Uniform(1, CutSpec(8, 1, 1)))
    for n_layers in (2, 3, 4):
        layered = build_plan(cub, 12, Uniform(n_layers, CutSpec(8, 1, 1)))
        for i in range(1, 51):
            h = simulate_trial(layered, c, i).finishing_time
            f = simulate_trial(flat, c, i).finishing_time
            assert h <= f * (1 + 1e-12)


@pytest.mark.parametrize("time_model", [Deterministic(1e-9), EXP])
def test_sum_rate_lower_bounds_hierarchical(time_model):
    c = cfg(16, 0.5, time_model=time_model, trials=200)
    ks = profile_layer_sizes(4, 11, cfg(16, 0.5, time_model=EXP))
    plan = build_plan(Cuboid(44 * 16, 20, 10), 16, Explicit(k=ks))
    sp = hier.sum_rate_counterpart(plan)
    assert sp.r == sum(ks)
    for i in range(1, 201):
        assert simulate_trial(sp, c, i).finishing_time <= simulate_trial(plan, c, i).finishing_time


def test_trace_invariants():
    plan = build_plan(Cuboid(16, 8, 6), 16, Explicit(k=(8, 4, 3, 1)))
    c = cfg(16, 0.5, time_model=EXP)
    for i in range(1, 40):
        tr = simulate_trial(plan, c, i)
        times = [e[0] for e in tr.events]
        assert times == sorted(times)
        per_worker = Counter(w for _, w, _ in tr.events)
        assert max(per_worker.values()) <= plan.L
        per_layer = Counter(layer for _, _, layer in tr.events)
        for lid, layer in enumerate(plan.layers, start=1):
            assert per_layer[lid] >= layer.r
        assert max(tr.per_layer_done_time) == tr.finishing_time == times[-1]
        assert tr.interpolation_sizes == (8, 4, 3, 1)


def test_arrival_order_extends_trace():
    plan = build_plan(Cuboid(16, 8, 6), 16, Explicit(k=(8, 4, 3, 1)))
    sp = hier.sum_rate_counterpart(plan)
    c = cfg(16, 0.5, time_model=EXP)
    tr = simulate_trial(sp, c, 3)
    full = arrival_order(sp, c, 3)
    assert len(full) == 64
    assert full[:len(tr.events)] == tr.events


def test_profile_layer_sizes():
    c = cfg(16, 0.5, time_model=EXP)
    assert profile_layer_sizes(1, 11, c) == (11,)
    for n_layers in (2, 4, 8, 12):
        ks = profile_layer_sizes(n_layers, 11, c)
        assert sum(ks) == 11 * n_layers
        assert list(ks) == sorted(ks, reverse=True)
        assert all(1 <= k <= 16 for k in ks)
    with pytest.raises(ConfigError):
        profile_layer_sizes(2, 17, c)


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(4, straggler_prob=1.5)
    with pytest.raises(ConfigError):
        SimConfig(4, straggler_slowdown=0.5)
    with pytest.raises(ConfigError):
        SimConfig(4, trials=0)


def test_plan_worker_mismatch():
    plan = build_plan(Cuboid(4, 1, 1), 2, Uniform(1, CutSpec()))
    with pytest.raises(ConfigError):
        simulate_trial(plan, cfg(3), 1)


def test_csv_writers(tmp_path):
    path = tmp_path / "trace.csv"
    write_trace_csv([(1, "uncoded", 1, 0.5)], path)
    assert path.read_text() == "trial,scheme,L,time_seconds\n1,uncoded,1,0.5\n"
    buf = io.StringIO()
    write_summary_csv([("hierarchical", 4, 1.25, 0.01, 100)], buf)
    assert buf.getvalue() == "scheme,L,mean,stderr,trials\nhierarchical,4,1.25,0.01,100\n"
