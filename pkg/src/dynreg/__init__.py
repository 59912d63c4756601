"""Lag-order selection and regularized estimation for dynamic regression models.

A dynamic regression (DR) model predicts one variable of a multivariate
time series from ``k_i`` lags of every variable ``i``.  The package offers
order selection (backward-in-time selection and the exhaustive, uniform,
component-wise and maximal baselines), SVD-based OLS/PCR/PLS/ridge
estimation with cross-validated tuning, simulation of benchmark systems
and forecast evaluation.  The Python API uses 0-based variable indices.
"""

from .regression import (
    EstimatorSpec,
    FittedModel,
    InsufficientLengthError,
    PredictionRangeError,
    RankDeficientError,
    build_design,
    centralize,
    fit,
    predict,
    svd_fit,
)
from .selection import (
    FullIntractableError,
    select_bts,
    select_cw,
    select_full,
    select_max,
    select_orders,
    select_varb,
)
from .simulation import (
    CollinearSystemSpec,
    LinearSystemSpec,
    NonStationaryError,
    builtin_var2,
    simulate,
)
from .tuning import CvConfig, cv_sse, tune_estimator, tune_q, tune_ridge
from .evaluation import (
    ForecastRecord,
    diebold_mariano,
    efficiency_score,
    evident_difference,
    nmse,
    percent_change_vs_reference,
    roc_auc,
    rolling_window_protocol,
    select_and_fit,
    train_test_protocol,
)

__version__ = "0.1.0"
