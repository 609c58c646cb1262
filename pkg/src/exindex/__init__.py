"""Extremal index estimation with data-driven selection of the local dependence order."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DataError,
    InsufficientExceedancesError,
    ParameterError,
    Series,
    Threshold,
    exceedance_indices,
    order_statistic,
)
from .estimate import (  # noqa: E402
    DSelectionResult,
    EstimateResult,
    expected_duration,
    intervals_estimator,
    runs_estimator,
    select_d_star,
    sliding_blocks_mle,
    theta_hat,
    theta_hat_auto,
    theta_hat_segmented,
    theta_profile,
)
from .simulate import BENCHMARKS, Family, ModelSpec, make_model, simulate  # noqa: E402
