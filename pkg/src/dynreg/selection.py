"""Order selection for dynamic regression models.

Five schemes choose the order vector ``(k_1, ..., k_n)`` for a target
variable, all scoring OLS fits by BIC:

* ``BTS``  -- backward-in-time selection: greedy one-variable increments
  from the zero-order model, with escalating increment size on stagnation;
* ``FULL`` -- exhaustive search over all ``(k_max + 1) ** n`` vectors;
* ``VARB`` -- best uniform order ``(k, ..., k)``;
* ``CW``   -- per-variable scans of the target on one regressor at a time;
* ``MAX``  -- ``(k_max, ..., k_max)``.

Every candidate within one run is fitted on the same sample (rows
``t = k_max - 1, ..., N - 2``) so BIC values are comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .regression import RANK_TOL, as_series, bic

__all__ = [
    "METHODS",
    "FullIntractableError",
    "LagScorer",
    "SelectionTrace",
    "bic",
    "select_bts",
    "select_cw",
    "select_full",
    "select_max",
    "select_orders",
    "select_varb",
]

METHODS = ("BTS", "FULL", "VARB", "CW", "MAX")
TIE_TOL = 1e-12
FULL_BUDGET = 10**6


class FullIntractableError(ValueError):
    """Exhaustive search would visit more order vectors than allowed."""


@dataclass
class SelectionTrace:
    """Search path of one selection run.

    ``visited`` lists every scored candidate in evaluation order,
    ``accepted`` the vectors the search moved to (BTS) or the winner,
    ``skipped`` the candidates dropped as rank-deficient.
    """

    method: str
    visited: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    chosen: tuple = ()
    chosen_bic: float = np.nan


def _less(a, b):
    return a < b - TIE_TOL * max(1.0, abs(b)) if np.isfinite(b) else a < b


class LagScorer:
    """OLS sums of squares for lag subsets on a fixed common sample.

    Keeps every lag block of every variable (``k_max`` columns each) and
    scores order vectors by growing an orthonormal basis one variable block
    at a time, so nested candidates share work.  A column whose residual
    after projection falls below ``RANK_TOL`` of its own norm makes the
    design rank-deficient.  With ``rank_deficient="skip"`` such candidates
    are dropped; with ``"pinv"`` the dependent column is ignored (the
    minimum-norm least squares fit) while still counted in ``K``.
    """

    def __init__(self, series, target, k_max, rank_deficient="skip"):
        arr = as_series(series)
        N, n = arr.shape
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        if N <= k_max + 1:
            raise ValueError(f"insufficient length: N={N} for k_max={k_max}")
        if rank_deficient not in ("skip", "pinv"):
            raise ValueError("rank_deficient must be 'skip' or 'pinv'")
        self.n = n
        self.k_max = k_max
        self.target = target
        self.mode = rank_deficient
        times = np.arange(k_max - 1, N - 1)
        self.n_eff = times.size
        Z = np.column_stack(
            [arr[times - lag, i] for i in range(n) for lag in range(k_max)]
        )
        y = arr[times + 1, target]
        # rotate into the column space of [Z, y]: inner products are kept and
        # vectors shrink from N' to at most n * k_max + 1 entries
        Q0, R0 = np.linalg.qr(np.column_stack([Z, y]))
        self.y = R0[:, -1].copy()
        self.blocks = [R0[:, i * k_max : (i + 1) * k_max] for i in range(n)]
        self.empty = np.zeros((self.y.size, 0))

    def bic(self, sse, K):
        return bic(max(sse, 0.0), self.n_eff, K)

    def bic_many(self, sses, K0):
        """Vectorized :meth:`bic` for ``sses[m]`` with ``K0 + m`` coefficients."""
        sses = np.maximum(np.asarray(sses, dtype=float), 0.0)
        K = K0 + np.arange(sses.size)
        with np.errstate(divide="ignore"):
            return self.n_eff * np.log(sses / self.n_eff) + K * np.log(self.n_eff)

    def extend(self, Q, r, var, start, stop, need_resid=True):
        """Add lags ``start .. stop-1`` of ``var`` to the basis ``Q``.

        Returns ``(Qb, used, resids, sses)``: ``Qb`` holds the new
        orthonormal directions, and after adding the first ``m`` lags the
        basis is ``[Q, Qb[:, :used[m]]]`` with residual ``resids[m]`` and
        SSE ``sses[m]`` (index 0 is the current state).  In ``"skip"`` mode
        the lists stop before the first dependent column.
        """
        block = self.blocks[var][:, start:stop]
        if Q.shape[1]:
            P = block - Q @ (Q.T @ block)
            P -= Q @ (Q.T @ P)
        else:
            P = block.copy()
        m_all = block.shape[1]
        Qb = np.empty_like(P)
        used = [0]
        resids = [r]
        sses = [float(r @ r)]
        u = 0
        cur = r
        for j in range(m_all):
            v = P[:, j]
            norm0 = np.sqrt(block[:, j] @ block[:, j])
            if u:
                B = Qb[:, :u]
                v = v - B @ (B.T @ v)
                v -= B @ (B.T @ v)
            nv = np.sqrt(v @ v)
            if nv <= RANK_TOL * norm0:
                if self.mode == "skip":
                    break
            else:
                q = v / nv
                Qb[:, u] = q
                u += 1
                cur = cur - q * (q @ cur)
            used.append(u)
            if need_resid:
                resids.append(cur)
            sses.append(float(cur @ cur))
        return Qb[:, :u], used, resids, sses

    def basis(self, orders):
        """Basis and residual for ``orders``; ``None`` if skipped as deficient."""
        Q, r = self.empty, self.y.copy()
        for i, k in enumerate(orders):
            if k == 0:
                continue
            Qb, used, resids, _ = self.extend(Q, r, i, 0, k)
            if len(used) <= k:
                return None
            Q, r = np.hstack([Q, Qb[:, : used[k]]]), resids[k]
        return Q, r

    def score(self, orders):
        """BIC of ``orders`` or ``None`` when rank-deficient in skip mode."""
        res = self.basis(orders)
        if res is None:
            return None
        _, r = res
        return self.bic(float(r @ r), int(sum(orders)))


def _finish(trace, orders, value):
    trace.chosen = tuple(int(k) for k in orders)
    trace.chosen_bic = float(value)
    return trace.chosen, trace


def select_bts(series, target, k_max, rank_deficient="skip"):
    """Backward-in-time selection.

    From the current vector ``c`` and increment ``d`` (initially 1), every
    variable with ``c_i + d <= k_max`` proposes ``c`` with ``c_i`` raised by
    ``d``.  The lowest-BIC proposal is accepted if it strictly improves on
    the current BIC, after which ``d`` resets to 1; otherwise ``d`` grows.
    The search stops once no variable can take an increment of size ``d``.
    Ties go to the lowest variable index.
    """
    sc = LagScorer(series, target, k_max, rank_deficient)
    trace = SelectionTrace("BTS")
    c = [0] * sc.n
    cur = sc.bic(float(sc.y @ sc.y), 0)
    trace.visited.append((tuple(c), cur))
    trace.accepted.append((tuple(c), cur))
    Q, r = sc.empty, sc.y.copy()
    ext = {}
    d = 1
    while d <= max(k_max - ci for ci in c):
        best = None
        for i in range(sc.n):
            if c[i] + d > k_max:
                continue
            if i not in ext:
                ext[i] = sc.extend(Q, r, i, c[i], k_max)
            cand = list(c)
            cand[i] += d
            cand = tuple(cand)
            sses = ext[i][3]
            if d >= len(sses):
                trace.skipped.append(cand)
                continue
            value = sc.bic(sses[d], sum(cand))
            trace.visited.append((cand, value))
            if best is None or _less(value, best[1]):
                best = (i, value)
        if best is not None and _less(best[1], cur):
            i, cur = best
            Qb, used, resids, _ = ext[i]
            Q, r = np.hstack([Q, Qb[:, : used[d]]]), resids[d]
            c[i] += d
            trace.accepted.append((tuple(c), cur))
            ext = {}
            d = 1
        else:
            d += 1
    return _finish(trace, c, cur)


def _full_sse_table(sc, max_batch=2048):
    """SSE of every order vector, in lexicographic order.

    Processes all prefixes of one depth as a batch: each state carries a
    zero-padded orthonormal basis, and zero columns leave projections
    unchanged, so states of different sizes share one array.  Returns
    ``(orders, sse)`` for the candidates kept (rank-deficient ones are
    dropped in skip mode) plus the list of skipped prefixes.
    """
    n, Ne, k = sc.n, sc.y.size, sc.k_max
    skip = sc.mode == "skip"
    out_orders, out_sse, skipped = [], [], []

    def run(i, Q, r, prefix):
        B = r.shape[0]
        block = sc.blocks[i]
        norms0 = np.sqrt(np.einsum("nj,nj->j", block, block))
        if Q.shape[2]:
            P = block[None] - Q @ (Q.transpose(0, 2, 1) @ block)
            P -= Q @ (Q.transpose(0, 2, 1) @ P)
        else:
            P = np.repeat(block[None], B, axis=0)
        newQ = np.zeros((B, Ne, k))
        resid = np.empty((k + 1, B, Ne))
        sse = np.empty((B, k + 1))
        ok = np.ones((B, k + 1), dtype=bool)
        cur = r
        resid[0] = cur
        sse[:, 0] = np.einsum("bn,bn->b", cur, cur)
        alive = np.ones(B, dtype=bool)
        for j in range(k):
            v = P[:, :, j]
            if j:
                W = newQ[:, :, :j]
                v = v - np.einsum("bnj,bj->bn", W, np.einsum("bnj,bn->bj", W, v))
                v -= np.einsum("bnj,bj->bn", W, np.einsum("bnj,bn->bj", W, v))
            nv = np.sqrt(np.einsum("bn,bn->b", v, v))
            dep = nv <= RANK_TOL * norms0[j]
            scale = np.where(dep, 0.0, 1.0 / np.where(dep, 1.0, nv))
            q = v * scale[:, None]
            newQ[:, :, j] = q
            cur = cur - q * np.einsum("bn,bn->b", q, cur)[:, None]
            resid[j + 1] = cur
            sse[:, j + 1] = np.einsum("bn,bn->b", cur, cur)
            if skip:
                alive &= ~dep
            ok[:, j + 1] = alive
        if skip:
            for b in np.flatnonzero(~ok[:, k]):
                m = int(np.argmin(ok[b]))
                skipped.append(tuple(prefix[b]) + (m,) + (None,) * (n - i - 1))
        if i == n - 1:
            rows = np.repeat(prefix, k + 1, axis=0)
            ms = np.tile(np.arange(k + 1), B)
            keep = ok.ravel()
            out_orders.append(np.column_stack([rows, ms])[keep])
            out_sse.append(sse.ravel()[keep])
            return
        # children in lexicographic order: parent-major, m-minor
        Kt = Q.shape[2]
        child_Q = np.zeros((B, k + 1, Ne, Kt + k))
        child_Q[:, :, :, :Kt] = Q[:, None]
        for m in range(1, k + 1):
            child_Q[:, m, :, Kt : Kt + m] = newQ[:, :, :m]
        child_Q = child_Q.reshape(B * (k + 1), Ne, Kt + k)
        child_r = resid.transpose(1, 0, 2).reshape(B * (k + 1), Ne)
        child_prefix = np.column_stack(
            [np.repeat(prefix, k + 1, axis=0), np.tile(np.arange(k + 1), B)]
        )
        keep = np.flatnonzero(ok.ravel())
        for lo in range(0, keep.size, max_batch):
            idx = keep[lo : lo + max_batch]
            run(i + 1, child_Q[idx], child_r[idx], child_prefix[idx])

    run(0, np.zeros((1, Ne, 0)), sc.y[None].copy(), np.zeros((1, 0), dtype=int))
    orders = np.vstack(out_orders)
    sse = np.concatenate(out_sse)
    return orders, sse, skipped


def select_full(series, target, k_max, rank_deficient="skip", budget=FULL_BUDGET):
    """Exhaustive BIC search over every order vector in ``{0..k_max}^n``.

    Enumeration is lexicographic; ties keep the first vector found.
    """
    sc = LagScorer(series, target, k_max, rank_deficient)
    count = (k_max + 1) ** sc.n
    if count > budget:
        raise FullIntractableError(
            f"FULL intractable: {k_max + 1}^{sc.n} = {count} order vectors exceed "
            f"the budget of {budget}"
        )
    trace = SelectionTrace("FULL")
    orders, sse, trace.skipped = _full_sse_table(sc)
    with np.errstate(divide="ignore"):
        values = sc.n_eff * np.log(np.maximum(sse, 0.0) / sc.n_eff)
    values = values + orders.sum(axis=1) * np.log(sc.n_eff)
    trace.visited = [(tuple(o), v) for o, v in zip(orders.tolist(), values.tolist())]
    best_value = values.min()
    if np.isfinite(best_value):
        tol = TIE_TOL * max(1.0, abs(best_value))
        best = int(np.flatnonzero(values <= best_value + tol)[0])
    else:
        best = int(np.argmin(values))
    chosen = tuple(orders[best].tolist())
    trace.accepted.append((chosen, float(values[best])))
    return _finish(trace, chosen, values[best])


def select_varb(series, target, k_max, rank_deficient="skip"):
    """Best uniform order ``(k, ..., k)`` for ``k = 0..k_max``, per target equation."""
    sc = LagScorer(series, target, k_max, rank_deficient)
    trace = SelectionTrace("VARB")
    best = None
    for k in range(k_max + 1):
        orders = (k,) * sc.n
        value = sc.score(orders)
        if value is None:
            trace.skipped.append(orders)
            continue
        trace.visited.append((orders, value))
        if best is None or _less(value, best[1]):
            best = (orders, value)
    trace.accepted.append(best)
    return _finish(trace, *best)


def select_cw(series, target, k_max, rank_deficient="skip"):
    """Component-wise orders: each variable's lag count chosen on its own.

    For variable ``i`` the target is regressed on lags of ``i`` alone for
    orders ``0..k_max`` and the BIC-minimal order kept (ties: smaller
    order).  ``chosen_bic`` is the BIC of the assembled vector, or NaN if
    that design is rank-deficient.
    """
    sc = LagScorer(series, target, k_max, rank_deficient)
    trace = SelectionTrace("CW")
    orders = []
    for i in range(sc.n):
        sses = sc.extend(sc.empty, sc.y, i, 0, k_max, need_resid=False)[3]
        best_k, best_v = 0, None
        for m, sse in enumerate(sses):
            value = sc.bic(sse, m)
            cand = tuple(m if j == i else 0 for j in range(sc.n))
            trace.visited.append((cand, value))
            if best_v is None or _less(value, best_v):
                best_k, best_v = m, value
        for m in range(len(sses), k_max + 1):
            trace.skipped.append(tuple(m if j == i else 0 for j in range(sc.n)))
        orders.append(best_k)
    value = sc.score(orders)
    value = np.nan if value is None else value
    trace.accepted.append((tuple(orders), value))
    return _finish(trace, orders, value)


def select_max(n, k_max):
    """``(k_max, ..., k_max)``."""
    if n < 1 or k_max < 1:
        raise ValueError("n and k_max must be >= 1")
    return (int(k_max),) * int(n)


def select_orders(method, series, target, k_max, rank_deficient="skip", **kwargs):
    """Dispatch on ``method`` (one of :data:`METHODS`); returns ``(orders, trace)``."""
    method = method.upper()
    if method == "MAX":
        arr = as_series(series)
        orders = select_max(arr.shape[1], k_max)
        trace = SelectionTrace("MAX")
        value = LagScorer(arr, target, k_max, rank_deficient).score(orders)
        value = np.nan if value is None else value
        trace.visited.append((orders, value))
        trace.accepted.append((orders, value))
        return _finish(trace, orders, value)
    funcs = {
        "BTS": select_bts,
        "FULL": select_full,
        "VARB": select_varb,
        "CW": select_cw,
    }
    if method not in funcs:
        raise ValueError(f"unknown selection method {method!r}")
    return funcs[method](series, target, k_max, rank_deficient=rank_deficient, **kwargs)

