"""Code-rate analysis of linear stochastic systems and data-based emulation.

The package computes the minimum number of bits per sample needed to
describe the state changes of a noisy linear system to a mean-square
fidelity, locates the sampling rate required by a fixed-capacity channel,
and emulates trajectories of unknown systems from observed data through
vector-field source codes.
"""

from .coderate import (
    NotNeeded,
    RateCurve,
    RateQuery,
    increment_rate,
    is_hurwitz,
    min_sampling_rate,
    model_fingerprint,
    rate_ceiling,
    rate_curve,
)
from .emulation import (
    AffineField,
    ConstantField,
    EmulationResult,
    IntegerCode,
    OneHotSchedule,
    PiecewiseSchedule,
    SimplexCode,
    SourceFamily,
    StepCodes,
    compress_dataset,
    emulate,
    emulate_steps,
    endpoint_map,
    integer_code_count,
    integer_decompress,
    integer_quantize,
    onehot_code_rate_bits,
    onehot_compress,
    simplex_compress,
    simplex_decompress,
)
from .errors import (
    CapacityInfeasibleError,
    FastPathDomainError,
    InfeasibleTargetError,
    LincoderError,
    NoEquilibriumError,
    NotPositiveDefiniteError,
    SingularMatrixError,
)
from .linalg import SymmetricEigen, logdet_psd, lu_solve, lyapunov_solve, mat_exp, sym_eig
from .linearsystem import (
    ConstantDrift,
    IncrementDistribution,
    LinearSystemModel,
    TimeVaryingDrift,
    gramian_derivative_residual,
    increment_distribution,
    sample_paths,
    state_transition,
)
from .presets import demo_model, demo_names, planar_grid_family
from .ratedistortion import GaussianSource, RdfResult, rdf, rdf_small_distortion
from .trajectories import TrajectoryDataset

__version__ = "0.1.0"

__all__ = [
    "AffineField",
    "CapacityInfeasibleError",
    "ConstantDrift",
    "ConstantField",
    "EmulationResult",
    "FastPathDomainError",
    "GaussianSource",
    "IncrementDistribution",
    "InfeasibleTargetError",
    "IntegerCode",
    "LinearSystemModel",
    "LincoderError",
    "NoEquilibriumError",
    "NotNeeded",
    "NotPositiveDefiniteError",
    "OneHotSchedule",
    "PiecewiseSchedule",
    "RateCurve",
    "RateQuery",
    "RdfResult",
    "SimplexCode",
    "SingularMatrixError",
    "SourceFamily",
    "StepCodes",
    "SymmetricEigen",
    "TimeVaryingDrift",
    "TrajectoryDataset",
    "compress_dataset",
    "demo_model",
    "demo_names",
    "emulate",
    "emulate_steps",
    "endpoint_map",
    "gramian_derivative_residual",
    "increment_distribution",
    "increment_rate",
    "integer_code_count",
    "integer_decompress",
    "integer_quantize",
    "is_hurwitz",
    "logdet_psd",
    "lu_solve",
    "lyapunov_solve",
    "mat_exp",
    "min_sampling_rate",
    "model_fingerprint",
    "onehot_code_rate_bits",
    "onehot_compress",
    "planar_grid_family",
    "rate_ceiling",
    "rate_curve",
    "rdf",
    "rdf_small_distortion",
    "sample_paths",
    "simplex_compress",
    "simplex_decompress",
    "state_transition",
    "sym_eig",
]
