"""Polynomial, MatDot and sum-rate codes on tiny matrices.

Each worker multiplies one pair of encoded matrices. The master decodes
from any R of the results by interpolating the product polynomial.

Run: python demos/02_codes.py
"""

import itertools

import numpy as np

from hiercoded import codes
from hiercoded.cuboid import CutSpec
from hiercoded.errors import ConditioningError, InsufficientResultsError

# %% polynomial code, scalar blocks: A = [1; 2], B = [3 4]
spec = codes.polynomial_spec(CutSpec(2, 1, 2), 4, eval_points=(1.0, 2.0, 3.0, 4.0))
a_blocks = [np.array([[1.0]]), np.array([[2.0]])]
b_blocks = [np.array([[3.0]]), np.array([[4.0]])]
jobs = codes.polynomial_encode(a_blocks, b_blocks, spec)
results = [job.compute() for job in jobs]
print("worker results:", [float(r.product[0, 0]) for r in results])
print("decoded blocks:", [round(float(m[0, 0]), 9) for m in codes.decode(results, spec)])

# %% MatDot: cut the inner dimension, recover A @ B from any 2*mz - 1 results
a = np.array([[1.0, 2.0]])
b = np.array([[3.0], [4.0]])
spec = codes.matdot_spec(CutSpec(1, 2, 1), 5)
jobs = codes.matdot_encode([a[:, :1], a[:, 1:]], [b[:1], b[1:]], spec)
results = [job.compute() for job in jobs]
for sub in itertools.combinations(range(5), 3):
    (prod,) = codes.decode([results[i] for i in sub], spec)
    print(f"workers {sub}: A @ B = {prod[0, 0]:.12f}")

# %% too few results is an error, not a wrong answer
try:
    codes.decode(results[:2], spec)
except InsufficientResultsError as exc:
    print("two results:", exc)

# %% integer evaluation points break down well before R = 24
rng = np.random.default_rng(1)
for family in ("chebyshev", "integer"):
    pts = codes.chebyshev_points(24) if family == "chebyshev" else codes.integer_points(24)
    spec = codes.polynomial_spec(CutSpec(24, 1, 1), 24, pts)
    blocks = [rng.standard_normal((2, 2)) for _ in range(24)]
    other = rng.standard_normal((2, 2))
    results = [j.compute() for j in codes.polynomial_encode(blocks, [other], spec)]
    try:
        out = codes.decode(results, spec)
        err = max(np.abs(o - x @ other).max() for o, x in zip(out, blocks))
        print(f"{family} points, R = 24: max error {err:.1e}")
    except ConditioningError as exc:
        print(f"{family} points, R = 24: {exc}")

# %% sum-rate: two layers sharing B need only K = 3 results
shared_b = rng.standard_normal((2, 2))
layers = [([rng.standard_normal((1, 2)) for _ in range(2)], [shared_b]),
          ([rng.standard_normal((1, 2))], [shared_b])]
spec = codes.sum_rate_spec(layers, 2, jobs_per_worker=2)
print("sum-rate K, R:", spec.k, codes.recovery_threshold(spec))
