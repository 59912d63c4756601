"""Cross-validated choice of the PCR/PLS dimension and the ridge parameter.

Rows of the design are split into consecutive segments (the last one takes
the remainder).  Each segment is predicted from a fit on all other rows and
the squared errors are summed.  Fold SVDs are computed once per design and
reused for every candidate parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .regression import (
    DesignPair,
    EstimatorSpec,
    RankDeficientError,
    _solve_from_svd,
    rank_cut,
)


@dataclass(frozen=True)
class CvConfig:
    folds: int = 10
    rr_rel_tol: float = 1e-6
    rr_grid_points: int = 11
    rr_max_iter: int = 50

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.rr_rel_tol <= 0:
            raise ValueError("rr_rel_tol must be positive")
        if self.rr_grid_points < 3:
            raise ValueError("rr_grid_points must be >= 3")


def fold_bounds(n_rows, folds):
    """``(start, stop)`` of each consecutive segment; remainder goes last."""
    if n_rows < folds:
        raise ValueError(f"need at least {folds} rows for {folds}-fold CV, got {n_rows}")
    size = n_rows // folds
    bounds = [(f * size, (f + 1) * size) for f in range(folds)]
    bounds[-1] = (bounds[-1][0], n_rows)
    return bounds


class FoldCache:
    """SVD of every training split of a design."""

    def __init__(self, design: DesignPair, cfg: CvConfig | None = None):
        cfg = cfg or CvConfig()
        X, y = design.X, design.y
        self.design = design
        self.bounds = fold_bounds(X.shape[0], cfg.folds)
        self.folds = []
        for lo, hi in self.bounds:
            train = np.r_[0:lo, hi : X.shape[0]]
            U, s, Vt = np.linalg.svd(X[train], full_matrices=False)
            r = rank_cut(s)
            g = U[:, :r].T @ y[train]
            self.folds.append((Vt[:r], s[:r], g, r < X.shape[1], X[lo:hi], y[lo:hi]))

    def predictions(self, spec: EstimatorSpec):
        out = []
        for Vt, s, g, deficient, X_test, _ in self.folds:
            if deficient and spec.kind == "OLS":
                raise RankDeficientError("rank-deficient design; use regularization")
            coef, _, _ = _solve_from_svd(Vt, s, g, spec)
            out.append(X_test @ coef)
        return np.concatenate(out)

    def sse(self, spec: EstimatorSpec) -> float:
        err = self.design.y - self.predictions(spec)
        return float(err @ err)


def cv_sse(design: DesignPair, spec: EstimatorSpec, cfg: CvConfig | None = None) -> float:
    """Total squared error of the segment-wise out-of-sample predictions."""
    return FoldCache(design, cfg).sse(spec)


def tune_q(design: DesignPair, kind, cfg: CvConfig | None = None, cache=None) -> int:
    """Best number of components for PCR or PLS; ties go to the smaller ``q``."""
    kind = kind.upper()
    if kind not in ("PCR", "PLS"):
        raise ValueError("tune_q handles PCR and PLS only")
    cache = cache or FoldCache(design, cfg)
    K = design.n_coef
    sses = [cache.sse(EstimatorSpec(kind, q=q)) for q in range(1, K + 1)]
    return int(np.argmin(sses)) + 1


@dataclass
class RidgeSearch:
    """Outcome of the interval-refinement search for the ridge parameter."""

    a: float
    sse: float
    iterations: int
    converged: bool
    sigma1: float
    intervals: list = field(default_factory=list)

    @property
    def warning(self):
        if self.converged:
            return None
        return f"ridge search stopped at the iteration cap ({self.iterations})"


def tune_ridge(design: DesignPair, cfg: CvConfig | None = None, cache=None) -> RidgeSearch:
    """Ridge parameter by repeated grid refinement on ``[0, s_1]``.

    Each pass evaluates ``rr_grid_points`` equally spaced values, keeps the
    minimizer ``a'`` and narrows the interval to its grid neighbours (``a'``
    itself when it sits on an edge).  Stops when the relative drop of the
    minimal SSE between passes is below ``rr_rel_tol``.
    """
    cfg = cfg or CvConfig()
    cache = cache or FoldCache(design, cfg)
    sigma1 = float(np.linalg.norm(design.X, 2))
    lo, hi = 0.0, sigma1
    prev = None
    intervals = []
    best_a, best_sse = 0.0, np.inf
    converged = False
    for it in range(1, cfg.rr_max_iter + 1):
        intervals.append((lo, hi))
        grid = np.linspace(lo, hi, cfg.rr_grid_points)
        sses = np.array([cache.sse(EstimatorSpec("RR", a=float(a))) for a in grid])
        j = int(np.argmin(sses))
        if sses[j] <= best_sse:
            best_a, best_sse = float(grid[j]), float(sses[j])
        lo = grid[max(j - 1, 0)]
        hi = grid[min(j + 1, grid.size - 1)]
        if prev is not None:
            if prev == 0 or (prev - best_sse) / prev < cfg.rr_rel_tol:
                converged = True
                break
        prev = best_sse
    return RidgeSearch(
        a=best_a,
        sse=best_sse,
        iterations=it,
        converged=converged,
        sigma1=sigma1,
        intervals=intervals,
    )


def tune_estimator(design: DesignPair, kind, cfg: CvConfig | None = None) -> EstimatorSpec:
    """Return a fully parameterized spec of ``kind`` for ``design``."""
    kind = kind.upper()
    if kind == "OLS":
        return EstimatorSpec.ols()
    cache = FoldCache(design, cfg)
    if kind in ("PCR", "PLS"):
        return EstimatorSpec(kind, q=tune_q(design, kind, cfg, cache=cache))
    if kind == "RR":
        return EstimatorSpec.ridge(tune_ridge(design, cfg, cache=cache).a)
    raise ValueError(f"unknown estimator kind {kind!r}")
