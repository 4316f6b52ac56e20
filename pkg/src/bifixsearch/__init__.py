"""Exact waiting-time statistics for sliding-window search of sequence sets
in a memoryless non-uniform symbol stream, with independent oracles and a
marker-set designer."""

from .errors import (
    BadDistribution,
    BifixSearchError,
    ComputationError,
    DuplicateSequence,
    InsufficientTruncation,
    NegativeVariance,
    NoFeasibleSet,
    SingularSystem,
    TooLarge,
    TruncationWarning,
    UnequalLengths,
    UnknownSymbol,
    UnreachableSet,
    ValidationError,
)
from .exact import (
    MomentReport,
    SearchDistribution,
    SplitSystem,
    coefficients,
    distribution,
    expected_duration,
    mean_single,
    moments,
    moments_from_distribution,
    partial_means,
    second_moment,
    second_moment_single,
    second_moment_single_uncorrected,
    split_system,
    termination_split,
    variance,
    variance_single,
    variance_single_uncorrected,
)
from .model import Problem, SymbolDistribution, load_problem, sequence_probability, validate_problem
from .spectrum import (
    CrossBifixSpectrum,
    TailVectors,
    build_spectrum,
    build_tail_vectors,
    cross_bifix_indicator,
    is_cross_bifix_free,
)

__version__ = "0.1.0"
