"""Randomization significance testing for chain joins over binary relations."""

from .relations import (
    AttributeDomain,
    BinaryRelation,
    BOOLEAN,
    ChainQuery,
    DomainError,
    EngineError,
    JoinCompatibilityError,
    PATH_COUNT,
    PathMatrix,
    RelationFormatError,
    UnknownLabelError,
    boolean_product,
    evaluate_chain,
    identity_relation,
    load_relation,
    path_product,
    save_relation,
    transpose,
)
from .randomize import (
    EnumeratedPoint,
    KIND_JUNCTION,
    KIND_RELATION,
    RandomizationPoint,
    SwapChainConfig,
    column_permute,
    enumerate_randomization_points,
    has_legal_swap,
    point_is_degenerate,
    randomize_chain,
    row_permute,
    swap_randomize,
)
from .stats import (
    StatisticError,
    StatisticSpec,
    UndefinedStatisticError,
    l1_distribution_distance,
    l1_group_vs_rest,
    proportion_difference,
    register_statistic,
    registered_statistics,
    tuple_count,
    weighted_average_destination,
)
from .significance import (
    DEFAULT_SAMPLES,
    HypothesisSpec,
    LOWER,
    PointResult,
    QUICK_SAMPLES,
    SignificanceReport,
    TWO_SIDED,
    UPPER,
    empirical_p_value,
    expected_path_matrix,
    point_label,
    run_hypothesis,
    run_hypothesis_batch,
)
from .synthetic import SyntheticConfig, generate_anti, generate_structured
from .movielens import IngestError, MovieLensTables, load_movielens

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
