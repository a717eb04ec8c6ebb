"""A layered plan from build to assembled product.

Workers run their layers in order. Layer 1 is cut the most, so it needs
the most results, and it is also the layer every worker reaches first.
Later layers need fewer results, so slow workers can be left out of
them.

Run: python demos/03_hierarchical_roundtrip.py
"""

import numpy as np

from hiercoded import (
    Cuboid,
    Explicit,
    SimConfig,
    ShiftedExponential,
    assemble,
    build_plan,
    decode_layer,
    decode_sum_rate,
    encode_plan,
    encode_sum_rate,
    simulate_trial,
    sum_rate_counterpart,
)

plan = build_plan(Cuboid(16, 8, 6), 16, Explicit(k=(8, 4, 3, 1)))
for layer in plan.layers:
    print(f"layer {layer.layer_id}: rows {layer.task_block.x.to_list()}, k = {layer.k}, r = {layer.r}")

rng = np.random.default_rng(7)
a = rng.standard_normal((16, 8))
b = rng.standard_normal((8, 6))
queues = encode_plan(plan, a, b)

# %% simulate who finishes what, then decode from exactly those results
cfg = SimConfig(16, straggler_prob=0.5, time_model=ShiftedExponential(2.0, 1.0), seed=3)
trace = simulate_trial(plan, cfg, 1)
print("stragglers:", [w + 1 for w, s in enumerate(trace.stragglers) if s])
received = {}
for _, worker, lid in trace.events:
    received.setdefault(lid, []).append(queues[worker - 1].jobs[lid - 1].compute())
for lid, done in enumerate(trace.per_layer_done_time, start=1):
    print(f"layer {lid} decodable at t = {done:.1f}; {len(received[lid])} results in by the end")

products = [decode_layer(received[layer.layer_id], layer) for layer in plan.layers]
out = assemble([(layer.task_block, p) for layer, p in zip(plan.layers, products)], plan.cuboid)
print(f"relative error vs A @ B: {np.linalg.norm(out - a @ b) / np.linalg.norm(a @ b):.1e}")

# %% the same blocks under one sum-rate code
sp = sum_rate_counterpart(plan)
print(f"sum-rate: K = {sp.k_total}, R = {sp.r}, every worker runs {sp.L} jobs")
sq = encode_sum_rate(sp, a, b)
first_slot = [q.jobs[0].compute() for q in sq]
products = decode_sum_rate(first_slot, sp)
out = assemble([(layer.task_block, p) for layer, p in zip(plan.layers, products)], plan.cuboid)
print(f"sum-rate from the 16 first jobs: error {np.linalg.norm(out - a @ b) / np.linalg.norm(a @ b):.1e}")
