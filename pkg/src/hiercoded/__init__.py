"""Hierarchical coded distributed matrix multiplication.

Cuboid partitioning of a matrix product, polynomial / MatDot / sum-rate
erasure codes with real-valued interpolation decoding, layered plans, and
a straggler simulator for finishing-time comparisons.
"""

from .codes import (
    CodedResult,
    CodeSpec,
    EncodedJob,
    chebyshev_points,
    decode,
    matdot_encode,
    matdot_spec,
    polynomial_encode,
    polynomial_spec,
    recovery_threshold,
    sum_rate_encode,
    sum_rate_spec,
)
from .cuboid import (
    Cuboid,
    CutSpec,
    InformationBlock,
    TaskBlock,
    classify,
    extract_block_operands,
    partition_task_block,
    slice_cuboid,
)
from .errors import (
    CodedMatmulError,
    ConditioningError,
    ConfigError,
    DivisibilityError,
    IncompleteAssemblyError,
    InsufficientResultsError,
    ShapeError,
    UnsupportedConfigurationError,
)
from .hierarchical import (
    Explicit,
    Geometric,
    HierarchicalPlan,
    LayerSpec,
    SumRatePlan,
    Uniform,
    WorkerQueue,
    assemble,
    build_plan,
    decode_layer,
    decode_sum_rate,
    encode_plan,
    encode_sum_rate,
    layer_decodable,
    sum_rate_counterpart,
)
from .matrix import Interval, as_matrix, basic_op_count, multiply, read_matrix, submatrix, write_matrix
from .sim import (
    Deterministic,
    ShiftedExponential,
    SimConfig,
    SimTrace,
    average_finishing_time,
    job_cost,
    profile_layer_sizes,
    simulate_trial,
    simulate_uncoded,
)

__version__ = "0.1.0"
