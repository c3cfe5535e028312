"""Weight sequences and weight functions, their growth indices, sectorially
flat functions, and the explicit right inverse of the asymptotic Borel map
on unbounded sectors."""

from __future__ import annotations

from .sequences import (
    DEFAULT_HORIZON,
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    ComparisonReport,
    MixedGammaTrace,
    PropertyReport,
    SequenceError,
    WeightSequence,
    check_property,
    compare_sequences,
    gevrey_sequence,
    growth_exponent,
    mixed_gamma_statistic,
    sequence_from_quotients,
    tail_sum,
    transform_sequence,
)
from .weights import (
    OutOfHorizonError,
    WeightError,
    WeightFunction,
    WeightMatrix,
    associated_matrix,
    biconjugate,
    builtin_weight,
    h_log_from_sequence,
    kappa_heir,
    legendre_conjugate,
    omega_from_sequence,
    transform_weight,
    weight_condition_report,
    weight_from_descriptor,
)
from .indices import (
    IndexEstimate,
    gamma_mixed_sequences,
    gamma_mixed_weights,
    mu_of_sequence,
    mu_of_weight,
)
from .constructions import (
    DescendantResult,
    descendant,
    descendant_mg_check,
    factorial_block_example,
    heir_pair_for_sector,
    langenbruch_example,
    mixed_pair_example,
)
from .extension import (
    BorelSeries,
    ExtensionError,
    ExtensionResult,
    FlatFunctionHandle,
    MomentTable,
    RamificationParams,
    RemainderReport,
    SandwichReport,
    SectorSpec,
    borel_series,
    choose_ramification,
    extend,
    flat_function,
    flat_sandwich,
    flat_sandwich_sequences,
    kernel_bound,
    make_handle,
    moment_sandwich_rows,
    moment_table,
    outer_function,
    outer_sandwich,
    recover_coefficients,
    remainder_report,
)
from .quadrature import (
    DEFAULT_QUAD,
    QuadratureConfig,
    QuadratureError,
    integrate_geometric,
    integrate_linear,
    integrate_with_tail,
    power_tail,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
