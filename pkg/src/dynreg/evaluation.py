"""Forecast accuracy measures and evaluation protocols.

Measures: NMSE, the Diebold-Mariano test for one-step squared-error
losses, the evident-difference rule over many realizations, the efficiency
score against the noise floor, and ROC AUC between two NMSE samples.

Protocols: a single train/test split, rolling windows (fit on one window,
predict the next) and consecutive periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .regression import (
    EstimatorSpec,
    RankDeficientError,
    as_series,
    build_design,
    centralize,
    fit_zero_order,
    predict,
    svd_fit,
)
from .selection import select_orders
from .tuning import CvConfig, tune_estimator


@dataclass
class ForecastRecord:
    """Aligned one-step-ahead actuals and predictions of one method."""

    actuals: np.ndarray
    predictions: np.ndarray
    method_id: str = ""
    orders: tuple = ()
    estimator: EstimatorSpec | None = None
    flags: tuple = ()

    def __post_init__(self):
        self.actuals = np.asarray(self.actuals, dtype=float)
        self.predictions = np.asarray(self.predictions, dtype=float)
        if self.actuals.shape != self.predictions.shape or self.actuals.ndim != 1:
            raise ValueError("actuals and predictions must be 1-D of equal length")
        if self.actuals.size < 2:
            raise ValueError("a forecast record needs at least 2 points")

    @property
    def errors(self):
        return self.actuals - self.predictions


def nmse(rec: ForecastRecord) -> float:
    """Squared prediction error normalized by the spread of the actuals."""
    dev = rec.actuals - rec.actuals.mean()
    denom = float(dev @ dev)
    if denom == 0:
        raise ValueError("constant actuals")
    err = rec.errors
    return float(err @ err) / denom


@dataclass(frozen=True)
class DMResult:
    statistic: float
    p_value: float
    rejected: bool
    winner: str | None


def diebold_mariano(rec_a: ForecastRecord, rec_b: ForecastRecord, alpha=0.05) -> DMResult:
    """Diebold-Mariano test of equal one-step squared-error accuracy.

    ``d_t = e_a^2 - e_b^2`` and ``DM = mean(d) / sqrt(var(d) / m)`` with the
    lag-0 variance (no autocovariance terms at horizon 1), referred to the
    standard normal.  ``winner`` is the ``method_id`` (or ``"a"``/``"b"``)
    of the lower-loss forecast when the null is rejected.
    """
    if not np.array_equal(rec_a.actuals, rec_b.actuals):
        raise ValueError("records must share the same actuals")
    m = rec_a.actuals.size
    if m < 10:
        raise ValueError("the Diebold-Mariano test needs at least 10 points")
    d = rec_a.errors**2 - rec_b.errors**2
    dbar = d.mean()
    gamma0 = float(np.mean((d - dbar) ** 2))
    if gamma0 == 0:
        if dbar == 0:
            return DMResult(0.0, 1.0, False, None)
        stat = math.copysign(math.inf, dbar)
    else:
        stat = float(dbar / math.sqrt(gamma0 / m))
    p = float(2 * stats.norm.sf(abs(stat)))
    rejected = p < alpha
    winner = None
    if rejected:
        winner = (rec_b.method_id or "b") if stat > 0 else (rec_a.method_id or "a")
    return DMResult(stat, p, rejected, winner)


@dataclass(frozen=True)
class MethodComparison:
    """DM outcomes of one method pair over many realizations."""

    first_better: int
    second_better: int
    non_rejections: int
    evident_difference: bool

    @property
    def realizations(self):
        return self.first_better + self.second_better + self.non_rejections


def evident_difference(first_better, second_better, realizations, alpha=0.05,
                       margin_per_1000=50) -> MethodComparison:
    """Two methods differ evidently when rejections exceed chance by a margin.

    With ``R`` realizations the chance level is ``alpha * R`` and the margin
    ``margin_per_1000 * R / 1000``.
    """
    if realizations < 1:
        raise ValueError("need at least one realization")
    non = realizations - first_better - second_better
    if non < 0:
        raise ValueError("more rejections than realizations")
    threshold = alpha * realizations + margin_per_1000 * realizations / 1000.0
    evident = first_better + second_better >= threshold - 1e-9
    return MethodComparison(int(first_better), int(second_better), int(non), bool(evident))


def efficiency_score(cases) -> float:
    """Sum over cases of ``(s_e^2 - s_ehat^2)^2 / (s_y * s_e)^2``.

    ``cases`` holds ``(noise_sd, series_sd, residual_sd)`` triples.
    """
    total = 0.0
    for sigma_e, sigma_y, sigma_hat in cases:
        if sigma_e <= 0 or sigma_y <= 0:
            raise ValueError("noise and series standard deviations must be positive")
        total += (sigma_e**2 - sigma_hat**2) ** 2 / (sigma_y * sigma_e) ** 2
    return total


def roc_auc(scores_a, scores_b) -> float:
    """Mann-Whitney AUC: probability that a draw from B exceeds one from A.

    Ties count one half.  0.5 means no separation, 1.0 means every value of
    B is larger than every value of A.
    """
    a = np.asarray(scores_a, dtype=float).ravel()
    b = np.asarray(scores_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    a_sorted = np.sort(a)
    below = np.searchsorted(a_sorted, b, side="left")
    below_or_equal = np.searchsorted(a_sorted, b, side="right")
    # twice the Mann-Whitney count keeps everything integral
    twice_u = int(np.sum(below + below_or_equal))
    return twice_u / (2 * a.size * b.size)


def percent_change_vs_reference(medians: dict, reference) -> dict:
    """Percent change of each method's median NMSE relative to ``reference``."""
    if reference not in medians:
        raise KeyError(f"reference method {reference!r} missing")
    ref = medians[reference]
    if ref == 0:
        raise ValueError("reference NMSE is zero")
    return {k: (v - ref) / ref * 100.0 for k, v in medians.items()}


@dataclass
class SelectedFit:
    model: object
    orders: tuple
    trace: object
    estimator: EstimatorSpec


def select_and_fit(series, target, method, estimator, k_max, cv=None,
                   rank_deficient="skip") -> SelectedFit:
    """Center, select orders, tune the estimator and fit on ``series``.

    OLS on a rank-deficient final design falls back to the minimum-norm
    solution and the model carries the ``"pinv"`` flag.
    """
    arr, means = centralize(series)
    kind = estimator.kind if isinstance(estimator, EstimatorSpec) else str(estimator).upper()
    orders, trace = select_orders(method, arr, target, k_max, rank_deficient=rank_deficient)
    if sum(orders) == 0:
        model = fit_zero_order(arr, target, means=means)
        return SelectedFit(model, orders, trace, EstimatorSpec.ols())
    design = build_design(arr, orders, target)
    spec = estimator if isinstance(estimator, EstimatorSpec) else EstimatorSpec(kind)
    if not spec.is_tuned:
        spec = tune_estimator(design, spec.kind, cv or CvConfig())
    model = svd_fit(design, spec, on_rank_deficient="pinv", means=means)
    return SelectedFit(model, orders, trace, model.estimator)


def _label(method, estimator):
    kind = estimator.kind if isinstance(estimator, EstimatorSpec) else str(estimator).upper()
    return f"{method.upper()}_{kind.lower()}"


def train_test_protocol(series, target, method, estimator, k_max, split=0.75, cv=None,
                        rank_deficient="skip") -> ForecastRecord:
    """Fit on the first ``floor(split * N)`` rows, predict the rest one step ahead."""
    arr = as_series(series)
    N = arr.shape[0]
    if N < 16:
        raise ValueError("train/test protocol needs N >= 16")
    n_train = int(math.floor(split * N))
    sel = select_and_fit(arr[:n_train], target, method, estimator, k_max, cv, rank_deficient)
    times = np.arange(n_train - 1, N - 1)
    return ForecastRecord(
        actuals=arr[times + 1, target],
        predictions=predict(sel.model, arr, times),
        method_id=_label(method, estimator),
        orders=sel.orders,
        estimator=sel.estimator,
        flags=sel.model.flags,
    )


@dataclass
class WindowedResult:
    """NMSE per evaluated segment; ``failed`` marks segments scored as 1."""

    nmse: np.ndarray
    failed: np.ndarray
    orders: list = field(default_factory=list)

    @property
    def median(self) -> float:
        return float(np.median(self.nmse))


def _fit_then_score(arr, fit_rows, eval_rows, target, method, estimator, k_max, cv,
                    rank_deficient):
    try:
        sel = select_and_fit(arr[fit_rows], target, method, estimator, k_max, cv,
                             rank_deficient)
        times = np.arange(eval_rows.start - 1, eval_rows.stop - 1)
        rec = ForecastRecord(arr[times + 1, target], predict(sel.model, arr, times))
        return nmse(rec), False, sel.orders
    except (ValueError, RankDeficientError, np.linalg.LinAlgError):
        return 1.0, True, None


def rolling_window_protocol(series, target, method, estimator, window_len, k_max, cv=None,
                            rank_deficient="skip") -> WindowedResult:
    """Fit on window ``w`` and score one-step predictions over window ``w + 1``.

    Yields ``floor(N / window_len) - 1`` NMSE values.  A window whose fit
    fails is scored 1 (the NMSE of predicting the mean) and flagged.
    """
    arr = as_series(series)
    N = arr.shape[0]
    if N < 2 * window_len:
        raise ValueError("rolling protocol needs N >= 2 * window_len")
    n_windows = N // window_len
    values, failed, orders = [], [], []
    for w in range(n_windows - 1):
        fit_rows = slice(w * window_len, (w + 1) * window_len)
        eval_rows = slice((w + 1) * window_len, (w + 2) * window_len)
        v, f, o = _fit_then_score(arr, fit_rows, eval_rows, target, method, estimator,
                                  k_max, cv, rank_deficient)
        values.append(v)
        failed.append(f)
        orders.append(o)
    return WindowedResult(np.array(values), np.array(failed, dtype=bool), orders)


def period_protocol(series, target, method, estimator, period_len, k_max, cv=None,
                    rank_deficient="skip") -> WindowedResult:
    """Fit on period ``p`` and score one-step predictions over period ``p + 1``.

    Periods come from :func:`dynreg.io.split_periods`, so the last period
    absorbs any short remainder.
    """
    from .io import period_bounds

    arr = as_series(series)
    bounds = period_bounds(arr.shape[0], period_len, k_max)
    values, failed, orders = [], [], []
    for (a0, a1), (b0, b1) in zip(bounds[:-1], bounds[1:]):
        v, f, o = _fit_then_score(arr, slice(a0, a1), slice(b0, b1), target, method,
                                  estimator, k_max, cv, rank_deficient)
        values.append(v)
        failed.append(f)
        orders.append(o)
    return WindowedResult(np.array(values), np.array(failed, dtype=bool), orders)
