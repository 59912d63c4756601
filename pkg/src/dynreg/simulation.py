"""Seeded generators for the benchmark systems.

Two families are covered:

* linear VAR systems ``y[t+1] = A_1 y[t] + ... + A_p y[t-p+1] + e[t+1]``
  with Gaussian noise of given standard deviations and correlation matrix;
* the 8-variable multi-collinear systems built from seven independent
  autoregressions, the first acting as a common component.

Every generator is a pure function of ``(spec, N, seed)``.  Simulation
starts from a zero state and discards ``burn_in`` steps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

NOISE_VAR = 0.1

VAR2_A1 = np.array([
    [0.3, 0.0, 0.0, 0.0],
    [0.4, 0.0, 0.7, -0.9],
    [0.7, -0.6, -0.5, 0.0],
    [0.3, -0.2, 0.0, -0.4],
])
VAR2_A2 = np.array([
    [-0.5, 0.0, 0.0, 0.2],
    [0.0, -0.3, -0.1, 0.0],
    [0.0, -0.1, 0.2, 0.4],
    [0.0, 0.0, 0.0, 0.6],
])
VAR2_R = np.array([
    [1.0, 0.6, -0.1, 0.2],
    [0.6, 1.0, -0.3, 0.4],
    [-0.1, -0.3, 1.0, 0.0],
    [0.2, 0.4, 0.0, 1.0],
])

COLLINEAR_AR = (-0.76, -0.89, 0.59, 0.62, 0.87, -0.72, -0.61)
COMMON_AR2 = (-0.76, -0.60)


class NonStationaryError(ValueError):
    """The system's companion matrix has spectral radius >= 1."""


def companion(coefs):
    """Companion matrix of a VAR with coefficient stack ``coefs`` (p, n, n)."""
    coefs = np.asarray(coefs, dtype=float)
    p, n, _ = coefs.shape
    C = np.zeros((n * p, n * p))
    C[:n] = np.hstack(list(coefs))
    if p > 1:
        C[n:, :-n] = np.eye(n * (p - 1))
    return C


def spectral_radius(coefs) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(companion(coefs)))))


@dataclass
class LinearSystemSpec:
    """Gaussian VAR(p) system.

    ``coefs[j]`` is the lag-``j+1`` coefficient matrix.  ``noise_corr``
    defaults to the identity.
    """

    coefs: np.ndarray
    noise_sd: np.ndarray
    noise_corr: np.ndarray | None = None
    burn_in: int = 500
    name: str = ""

    def __post_init__(self):
        self.coefs = np.asarray(self.coefs, dtype=float)
        if self.coefs.ndim == 2:
            self.coefs = self.coefs[None]
        p, n, m = self.coefs.shape
        if n != m:
            raise ValueError("coefficient matrices must be square")
        self.noise_sd = np.broadcast_to(np.asarray(self.noise_sd, dtype=float), (n,)).copy()
        if self.noise_corr is None:
            self.noise_corr = np.eye(n)
        self.noise_corr = np.asarray(self.noise_corr, dtype=float)
        R = self.noise_corr
        if R.shape != (n, n):
            raise ValueError("noise_corr must be n x n")
        if not np.allclose(R, R.T) or not np.allclose(np.diag(R), 1.0):
            raise ValueError("noise_corr must be symmetric with unit diagonal")
        if np.linalg.eigvalsh(R).min() < -1e-10:
            raise ValueError("noise_corr must be positive semi-definite")
        if np.any(self.noise_sd < 0):
            raise ValueError("noise_sd must be non-negative")

    @property
    def n(self) -> int:
        return self.coefs.shape[1]

    @property
    def p(self) -> int:
        return self.coefs.shape[0]

    @property
    def noise_cov(self):
        return self.noise_sd[:, None] * self.noise_corr * self.noise_sd[None, :]

    def spectral_radius(self) -> float:
        return spectral_radius(self.coefs)

    def true_orders(self, target):
        """Per-variable lag counts of the target's equation."""
        orders = []
        for j in range(self.n):
            nz = np.flatnonzero(self.coefs[:, target, j])
            orders.append(int(nz[-1]) + 1 if nz.size else 0)
        return tuple(orders)

    def stationary_cov(self):
        """Stationary covariance of ``y_t`` (discrete Lyapunov equation)."""
        C = companion(self.coefs)
        Qn = np.zeros_like(C)
        Qn[: self.n, : self.n] = self.noise_cov
        S = linalg.solve_discrete_lyapunov(C, Qn)
        return S[: self.n, : self.n]

    def to_dict(self):
        return {
            "kind": "linear",
            "name": self.name,
            "coefs": self.coefs.tolist(),
            "noise_sd": self.noise_sd.tolist(),
            "noise_corr": self.noise_corr.tolist(),
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            coefs=np.asarray(d["coefs"], dtype=float),
            noise_sd=np.asarray(d["noise_sd"], dtype=float),
            noise_corr=None if d.get("noise_corr") is None else np.asarray(d["noise_corr"]),
            burn_in=int(d.get("burn_in", 500)),
            name=d.get("name", ""),
        )


@dataclass
class CollinearSystemSpec:
    """Eight series sharing a common component.

    ``y_1 .. y_7`` are independent autoregressions with unit-lag
    coefficients ``ar_coefs``; ``y_1`` instead follows ``common_ar`` when
    given.  Observed columns are ``x_1 = y_1``, ``x_i = y_i + c * y_1``
    (i = 2..7) and ``x_8 = (x_2 + x_3 + x_4) / 3``.
    """

    c: float = 0.0
    common_component_order: int = 1
    ar_coefs: tuple = COLLINEAR_AR
    noise_var: float = NOISE_VAR
    burn_in: int = 500
    common_ar: tuple = field(default=None)

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("collinearity coefficient c must be >= 0")
        if self.common_component_order not in (1, 2):
            raise ValueError("common_component_order must be 1 or 2")
        if len(self.ar_coefs) != 7:
            raise ValueError("seven AR coefficients are required")
        if self.common_ar is None:
            self.common_ar = (
                (self.ar_coefs[0],) if self.common_component_order == 1 else COMMON_AR2
            )
        self.ar_coefs = tuple(float(a) for a in self.ar_coefs)
        self.common_ar = tuple(float(a) for a in self.common_ar)
        for poly in [self.common_ar] + [(a,) for a in self.ar_coefs[1:]]:
            if spectral_radius(np.array(poly)[:, None, None]) >= 1:
                raise NonStationaryError(f"spectral radius >= 1 for AR{poly}")

    def to_dict(self):
        return {
            "kind": "collinear",
            "c": self.c,
            "common_component_order": self.common_component_order,
            "ar_coefs": list(self.ar_coefs),
            "common_ar": list(self.common_ar),
            "noise_var": self.noise_var,
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            c=float(d.get("c", 0.0)),
            common_component_order=int(d.get("common_component_order", 1)),
            ar_coefs=tuple(d.get("ar_coefs", COLLINEAR_AR)),
            noise_var=float(d.get("noise_var", NOISE_VAR)),
            burn_in=int(d.get("burn_in", 500)),
            common_ar=None if d.get("common_ar") is None else tuple(d["common_ar"]),
        )


def _noise_factor(cov):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(cov)
        return V * np.sqrt(np.clip(w, 0, None))


def simulate_linear(spec: LinearSystemSpec, N, seed) -> np.ndarray:
    """Realization of ``N`` rows from a linear system."""
    if spec.spectral_radius() >= 1:
        raise NonStationaryError("spectral radius >= 1")
    rng = np.random.default_rng(seed)
    n, p = spec.n, spec.p
    total = spec.burn_in + N
    L = _noise_factor(spec.noise_cov)
    e = rng.standard_normal((total, n)) @ L.T
    A = np.hstack(list(spec.coefs))
    state = np.zeros(n * p)
    out = np.empty((total, n))
    for t in range(total):
        y = A @ state + e[t]
        out[t] = y
        state = np.concatenate([y, state[:-n]]) if p > 1 else y
    return out[spec.burn_in:]


def builtin_var2(correlated=False) -> LinearSystemSpec:
    """The 4-variable VAR(2) benchmark, optionally with correlated noise."""
    return LinearSystemSpec(
        coefs=np.stack([VAR2_A1, VAR2_A2]),
        noise_sd=np.full(4, np.sqrt(NOISE_VAR)),
        noise_corr=VAR2_R.copy() if correlated else np.eye(4),
        name="var2_corr" if correlated else "var2",
    )


def bivariate_example() -> LinearSystemSpec:
    """Two-variable system with ``y_1`` of orders (2, 1) and ``y_2`` of (0, 1)."""
    A1 = np.array([[0.7, 0.5], [0.0, 0.6]])
    A2 = np.array([[-0.2, 0.0], [0.0, 0.0]])
    return LinearSystemSpec(
        coefs=np.stack([A1, A2]),
        noise_sd=np.full(2, np.sqrt(NOISE_VAR)),
        name="bivariate",
    )


def sample_random_dr_pair(k11, k12, k21, k22, seed, radius=0.95, max_draws=1000):
    """Random stationary bivariate system with the given lag structure.

    ``k_ij`` is the number of lags of variable ``j`` in the equation of
    variable ``i``.  Coefficients inside the structure are uniform on
    ``[-1, 1]``; draws are rejected until the spectral radius is below
    ``radius``.
    """
    ks = np.array([[k11, k12], [k21, k22]])
    if not np.all(np.isin(ks, (1, 2, 3))):
        raise ValueError("lag counts must be in {1, 2, 3}")
    p = int(ks.max())
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        coefs = np.zeros((p, 2, 2))
        for i in range(2):
            for j in range(2):
                coefs[: ks[i, j], i, j] = rng.uniform(-1.0, 1.0, ks[i, j])
        if spectral_radius(coefs) < radius:
            return LinearSystemSpec(
                coefs=coefs,
                noise_sd=np.full(2, np.sqrt(NOISE_VAR)),
                name=f"dr{k11}{k12}{k21}{k22}",
            )
    raise RuntimeError(
        f"no stationary draw for structure {(k11, k12, k21, k22)} in {max_draws} tries"
    )


def dr_suite_structures():
    """The 81 lag structures ``(k11, k12, k21, k22)`` with entries in {1, 2, 3}."""
    return list(itertools.product((1, 2, 3), repeat=4))


def dr_suite(base_seed=0):
    """The 81 random bivariate systems, one per structure (162 target equations)."""
    return [
        sample_random_dr_pair(*ks, seed=base_seed + idx)
        for idx, ks in enumerate(dr_suite_structures())
    ]


def _ar_path(coefs, e, burn_in):
    y = signal.lfilter([1.0], np.concatenate([[1.0], -np.asarray(coefs)]), e)
    return y[burn_in:]


def simulate_collinear(spec: CollinearSystemSpec, N, seed) -> np.ndarray:
    """Realization of ``N`` rows (8 columns) from a multi-collinear system."""
    rng = np.random.default_rng(seed)
    total = spec.burn_in + N
    e = rng.standard_normal((total, 7)) * np.sqrt(spec.noise_var)
    base = np.empty((N, 7))
    base[:, 0] = _ar_path(spec.common_ar, e[:, 0], spec.burn_in)
    for i in range(1, 7):
        base[:, i] = _ar_path((spec.ar_coefs[i],), e[:, i], spec.burn_in)
    x = np.empty((N, 8))
    x[:, 0] = base[:, 0]
    x[:, 1:7] = base[:, 1:7] + spec.c * base[:, [0]]
    x[:, 7] = (x[:, 1] + x[:, 2] + x[:, 3]) / 3.0
    return x


def collinear_noise_var(spec: CollinearSystemSpec, column):
    """Innovation variance of the one-step prediction of ``column`` (0-based).

    Column 8 mixes three innovations; its one-step noise variance given the
    past of all series is ``(1 + 1 + 1) * var / 9`` plus ``c``-weighted
    common-component noise.
    """
    v = spec.noise_var
    if column == 0:
        return v
    if 1 <= column <= 6:
        return v * (1 + spec.c**2)
    return v * (3 + 9 * spec.c**2) / 9.0


def simulate(spec, N, seed):
    """Dispatch on spec type."""
    if isinstance(spec, LinearSystemSpec):
        return simulate_linear(spec, N, seed)
    if isinstance(spec, CollinearSystemSpec):
        return simulate_collinear(spec, N, seed)
    raise TypeError(f"unsupported system spec {type(spec).__name__}")


def spec_from_dict(d):
    kind = d.get("kind", "linear")
    if kind == "linear":
        return LinearSystemSpec.from_dict(d)
    if kind == "collinear":
        return CollinearSystemSpec.from_dict(d)
    raise ValueError(f"unknown system kind {kind!r}")
