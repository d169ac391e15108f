"""Volume sampling for sample-based subspace approximation in weighted L2 spaces."""

__version__ = "0.1.0"

from .errors import (
    CombinatorialBlowup,
    ConvergenceFailure,
    IndexOutOfRange,
    NonFiniteEntry,
    NonPositiveWeight,
    NoNonzeroStart,
    RankDeficient,
    ShapeMismatch,
    UnknownStrategy,
    VolsampleError,
)
from .generators import InstanceSpec, gen_gaussian, gen_kernel_snapshot, gen_prescribed_spectrum, generate
from .measure import DiscretizedFunction, GramMatrix, gram_matrix, new_discretized_function, refine, total_l2_norm_squared
from .samplers import (
    SamplerConfig,
    SubsetDistribution,
    VolumeSampler,
    enumerate_distribution,
    mcmc_trace,
    sample_kdpp,
    sample_mcmc,
)
from .schmidt import SchmidtDecomposition, numerical_rank, schmidt_decompose, tail_width
from .selection import (
    BoundCertificate,
    SelectionResult,
    certify_bound,
    projection_error,
    select_exhaustive,
    select_greedy_max_volume,
    select_greedy_residual,
    select_volume_best_of,
)
from .volumes import (
    GramVolume,
    elementary_symmetric,
    expected_projection_error,
    expected_volume,
    log_det_gram,
    residual_volume,
)
