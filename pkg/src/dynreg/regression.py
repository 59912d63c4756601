"""Lag design matrices and SVD-based estimation of dynamic regression models.

A dynamic regression (DR) model predicts one variable of a multivariate
series one step ahead from lags of all variables, each variable ``i``
entering with its own number of lags ``k_i``::

    y[target, t+1] = sum_i sum_{l=0}^{k_i-1} b_{i,l} * y[i, t-l] + e[t+1]

Series are arrays of shape ``(N, n)`` (time along rows, oldest first).
Variable indices are 0-based throughout the Python API.

All estimators share one pathway: with ``X = U diag(s) V^T``,
``b = V diag(lam / s) U^T y`` where ``lam`` is the shrinkage diagonal of
OLS (ones), PCR (first ``q`` ones), PLS (Krylov filter factors) or ridge
(``s^2 / (s^2 + a)``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

RANK_TOL = 1e-10
KRYLOV_TOL = 1e-12

ESTIMATOR_KINDS = ("OLS", "PCR", "PLS", "RR")


class InsufficientLengthError(ValueError):
    """The series is too short for the requested lag orders."""


class RankDeficientError(ValueError):
    """OLS was requested on a numerically rank-deficient design."""


class PredictionRangeError(IndexError):
    """A prediction was requested at a time the model cannot reach."""


@dataclass(frozen=True)
class EstimatorSpec:
    """Estimator choice with its regularization parameter.

    ``q`` is the number of components for PCR/PLS and ``a`` the ridge
    parameter for RR.  A regularized kind with its parameter left as
    ``None`` is *untuned*; :func:`dynreg.tuning.tune_estimator` fills it in
    by cross-validation.
    """

    kind: str = "OLS"
    q: int | None = None
    a: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.q is not None and kind not in ("PCR", "PLS"):
            raise ValueError("q is only defined for PCR and PLS")
        if self.a is not None and kind != "RR":
            raise ValueError("a is only defined for RR")
        if self.q is not None and self.q < 1:
            raise ValueError("q must be >= 1")
        if self.a is not None and self.a < 0:
            raise ValueError("ridge parameter must be non-negative")

    @classmethod
    def ols(cls):
        return cls("OLS")

    @classmethod
    def pcr(cls, q=None):
        return cls("PCR", q=q)

    @classmethod
    def pls(cls, q=None):
        return cls("PLS", q=q)

    @classmethod
    def ridge(cls, a=None):
        return cls("RR", a=a)

    @property
    def is_tuned(self) -> bool:
        if self.kind in ("PCR", "PLS"):
            return self.q is not None
        if self.kind == "RR":
            return self.a is not None
        return True

    def __str__(self):
        if self.kind in ("PCR", "PLS") and self.q is not None:
            return f"{self.kind}(q={self.q})"
        if self.kind == "RR" and self.a is not None:
            return f"RR(a={self.a:.6g})"
        return self.kind


@dataclass(frozen=True)
class DesignPair:
    """Lag matrix ``X`` and aligned one-step-ahead response ``y``.

    ``times[j]`` is the 0-based time index ``t`` of row ``j``; the row holds
    values observed up to ``t`` and ``y[j]`` is ``series[t + 1, target]``.
    """

    X: np.ndarray
    y: np.ndarray
    orders: tuple
    target: int
    times: np.ndarray

    @property
    def n_effective(self) -> int:
        return self.X.shape[0]

    @property
    def n_coef(self) -> int:
        return self.X.shape[1]


@dataclass
class FittedModel:
    """A fitted DR model for one target variable.

    ``means`` holds the column means removed before fitting (``None`` when
    the model was fitted on data used as-is).  ``flags`` collects
    non-fatal diagnostics, e.g. ``"pinv"`` when OLS fell back to the
    minimum-norm solution or ``"pls_q_capped"``.
    """

    orders: tuple
    target: int
    coef: np.ndarray
    estimator: EstimatorSpec
    sse: float
    bic: float
    n_effective: int
    rank: int = 0
    means: np.ndarray | None = None
    flags: tuple = ()
    lam: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_coef(self) -> int:
        return int(sum(self.orders))


def as_series(series) -> np.ndarray:
    """Validate and return a float array of shape ``(N, n)``."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise ValueError("empty input")
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"series must be 2-D (N, n), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains missing or non-finite entries")
    return arr


def centralize(series):
    """Remove column means.

    Returns ``(centered, means)``; add ``means`` back to de-center.
    """
    arr = as_series(series)
    if arr.shape[0] < 2:
        raise ValueError("centralize needs at least 2 observations")
    means = arr.mean(axis=0)
    return arr - means, means


def _check_orders(orders, n):
    orders = tuple(int(k) for k in orders)
    if len(orders) != n:
        raise ValueError(f"order vector has {len(orders)} entries for {n} variables")
    if any(k < 0 for k in orders):
        raise ValueError("orders must be non-negative")
    return orders


def build_design(series, orders, target, first_time=None) -> DesignPair:
    """Build the lag matrix for ``orders`` predicting variable ``target``.

    Columns are variable-major and lag-ascending:
    ``[y0[t], y0[t-1], ..., y1[t], ...]``; variables with order 0 add no
    columns.  Rows run over ``t = first_time, ..., N - 2``, with
    ``first_time`` defaulting to ``max(orders) - 1`` so that
    ``N' = N - max(orders)``.  Passing a larger ``first_time`` aligns
    designs of different orders on a common sample.
    """
    arr = as_series(series)
    N, n = arr.shape
    orders = _check_orders(orders, n)
    if not 0 <= target < n:
        raise IndexError(f"target {target} out of range for {n} variables")
    K = sum(orders)
    if K == 0:
        raise ValueError("empty order vector; use fit_zero_order")
    kmax = max(orders)
    if first_time is None:
        first_time = kmax - 1
    if first_time < kmax - 1:
        raise ValueError("first_time too early for the requested orders")
    if N < first_time + 3 or N <= kmax + 1:
        raise InsufficientLengthError(
            f"insufficient length: N={N} for orders {orders}"
        )
    times = np.arange(first_time, N - 1)
    cols = []
    for i, k in enumerate(orders):
        for lag in range(k):
            cols.append(arr[times - lag, i])
    X = np.column_stack(cols)
    y = arr[times + 1, target].copy()
    return DesignPair(X=X, y=y, orders=orders, target=target, times=times)


def bic(sse, n_effective, n_coef) -> float:
    """Schwarz criterion ``N' ln(SSE/N') + K ln(N')``; ``-inf`` when SSE is 0."""
    if n_effective < 1:
        raise ValueError("n_effective must be >= 1")
    if sse < 0 or n_coef < 0:
        raise ValueError("sse and n_coef must be non-negative")
    if sse == 0:
        return -np.inf
    return n_effective * np.log(sse / n_effective) + n_coef * np.log(n_effective)


def rank_cut(s, tol=RANK_TOL) -> int:
    """Number of singular values at or above ``tol * s[0]``."""
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s >= tol * s[0]))


def pls_factors(s, g, q, tol=KRYLOV_TOL):
    """PLS filter factors from the SVD of the design.

    ``s`` are the retained singular values and ``g = U^T y``.  Works in the
    right-singular basis where ``X^T X`` is ``diag(s^2)`` and ``X^T y`` is
    ``s * g``.  Returns ``(lam, q_eff)``; ``q_eff < q`` when the Krylov
    space stops growing.
    """
    d = s**2
    h = s * g
    r = s.size
    W = np.zeros((r, min(q, r)))
    v = h
    q_eff = 0
    for j in range(min(q, r)):
        norm_in = np.linalg.norm(v)
        if norm_in == 0:
            break
        w = v.copy()
        for _ in range(2):
            w -= W[:, :j] @ (W[:, :j].T @ w)
        norm_out = np.linalg.norm(w)
        if norm_out < tol * norm_in:
            break
        W[:, j] = w / norm_out
        q_eff = j + 1
        v = d * W[:, j]
    if q_eff == 0:
        return np.zeros(r), 0
    Wq = W[:, :q_eff]
    theta = np.linalg.eigvalsh(Wq.T @ (d[:, None] * Wq))
    lam = 1.0 - np.prod(1.0 - d[:, None] / theta[None, :], axis=1)
    return lam, q_eff


def shrinkage(s, g, spec: EstimatorSpec):
    """Shrinkage diagonal for ``spec`` given retained singular values.

    Returns ``(lam, q_eff)`` where ``q_eff`` is the number of PLS/PCR
    components actually used (``None`` for OLS and RR).
    """
    if spec.kind == "OLS":
        return np.ones_like(s), None
    if spec.kind == "PCR":
        q = min(spec.q, s.size)
        lam = np.zeros_like(s)
        lam[:q] = 1.0
        return lam, q
    if spec.kind == "PLS":
        return pls_factors(s, g, spec.q)
    if spec.kind == "RR":
        d = s**2
        return d / (d + spec.a), None
    raise ValueError(spec.kind)


def _solve_from_svd(Vt, s, g, spec):
    lam, q_eff = shrinkage(s, g, spec)
    coef = Vt.T @ (lam * g / s) if s.size else np.zeros(Vt.shape[1])
    return coef, lam, q_eff


def svd_fit(design: DesignPair, spec: EstimatorSpec, *, on_rank_deficient="raise",
            means=None) -> FittedModel:
    """Estimate DR coefficients via the shared SVD pathway.

    Singular values below ``RANK_TOL * s[0]`` are treated as zero.  OLS on
    such a design raises :class:`RankDeficientError` unless
    ``on_rank_deficient="pinv"``, which returns the minimum-norm least
    squares solution and flags the model.
    """
    if not spec.is_tuned:
        raise ValueError(f"{spec.kind} needs its regularization parameter; tune it first")
    X, y = design.X, design.y
    if spec.q is not None and spec.q > X.shape[1]:
        raise ValueError(f"q={spec.q} exceeds the number of coefficients {X.shape[1]}")
    U, s_all, Vt = np.linalg.svd(X, full_matrices=False)
    r = rank_cut(s_all)
    flags = []
    if r < X.shape[1] and spec.kind == "OLS":
        if on_rank_deficient != "pinv":
            raise RankDeficientError("rank-deficient design; use regularization")
        flags.append("pinv")
    s = s_all[:r]
    g = U[:, :r].T @ y
    coef, lam, q_eff = _solve_from_svd(Vt[:r], s, g, spec)
    if spec.kind == "PLS" and q_eff < spec.q:
        flags.append("pls_q_capped")
        spec = replace(spec, q=max(q_eff, 1))
    resid = y - X @ coef
    sse = float(resid @ resid)
    N_eff, K = X.shape
    return FittedModel(
        orders=design.orders,
        target=design.target,
        coef=coef,
        estimator=spec,
        sse=sse,
        bic=bic(sse, N_eff, K),
        n_effective=N_eff,
        rank=r,
        means=means,
        flags=tuple(flags),
        lam=lam,
    )


def fit_zero_order(series, target, means=None) -> FittedModel:
    """The model with no regressors: predicts 0 on the (centered) scale."""
    arr = as_series(series)
    y = arr[:, target]
    sse = float(y @ y)
    N_eff = y.size
    return FittedModel(
        orders=(0,) * arr.shape[1],
        target=target,
        coef=np.zeros(0),
        estimator=EstimatorSpec.ols(),
        sse=sse,
        bic=bic(sse, N_eff, 0),
        n_effective=N_eff,
        rank=0,
        means=means,
    )


def fit(series, orders, target, spec=None, *, center=True, on_rank_deficient="raise",
        cv=None) -> FittedModel:
    """Convenience: optionally center, build the design, tune and fit.

    An untuned regularized ``spec`` is tuned by cross-validation with
    ``cv`` (a :class:`dynreg.tuning.CvConfig`).  Zero order vectors give
    the zero-order model.
    """
    arr = as_series(series)
    spec = spec or EstimatorSpec.ols()
    means = None
    if center:
        arr, means = centralize(arr)
    orders = _check_orders(orders, arr.shape[1])
    if sum(orders) == 0:
        return fit_zero_order(arr, target, means=means)
    design = build_design(arr, orders, target)
    if not spec.is_tuned:
        from .tuning import tune_estimator

        spec = tune_estimator(design, spec.kind, cv)
    return svd_fit(design, spec, on_rank_deficient=on_rank_deficient, means=means)


def predict(model: FittedModel, series, times) -> np.ndarray:
    """One-step predictions ``yhat[t + 1]`` for each 0-based ``t`` in ``times``.

    ``series`` is on the original scale; the model's centering means are
    removed before forming lag vectors and the target mean is added back.
    Only rows ``<= t`` are read for the prediction at ``t + 1``.
    """
    arr = as_series(series)
    N, n = arr.shape
    if len(model.orders) != n:
        raise ValueError("series has a different number of variables than the model")
    times = np.atleast_1d(np.asarray(times, dtype=int))
    kmax = max(model.orders) if model.orders else 0
    lo = max(kmax - 1, 0)
    if times.size and (times.min() < lo or times.max() > N - 1):
        raise PredictionRangeError(
            f"prediction index out of range: t must lie in [{lo}, {N - 1}]"
        )
    if model.means is not None:
        arr = arr - model.means
    out = np.zeros(times.size)
    col = 0
    for i, k in enumerate(model.orders):
        for lag in range(k):
            out += model.coef[col] * arr[times - lag, i]
            col += 1
    if model.means is not None:
        out += model.means[model.target]
    return out
