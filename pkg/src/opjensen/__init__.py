"""Refined operator Jensen inequalities over finite-dimensional Hermitian matrices."""

from .functions import Interval, ScalarFunction
from .hermitian import (
    NormSpec,
    Order,
    ToleranceConfig,
    apply_function,
    hermitian,
    loewner_compare,
    quadratic_form,
    spectral_decompose,
    ui_norm,
    unit_vector,
)
from .linear_maps import (
    ContractionFamily,
    IdentityMap,
    IsometryConjugation,
    Pinching,
    UnitaryMixture,
    apply_map,
    verify_map,
)
from .means import OperatorMean, kubo_ando_mean, perspective, weighted_geometric
from .partition_search import PartitionObjective, exhaustive_best_partition, greedy_partition
from .refinements import (
    ChainReport,
    Partition,
    agh_scalar_chains,
    cdj_map_chain,
    check_chain,
    holder_chain,
    jensen_functional_chain,
    mean_subadditivity_chain,
    operator_norm_chain,
    perspective_chain,
    ui_norm_chain,
)

__version__ = "0.1.0"
