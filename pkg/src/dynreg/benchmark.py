"""Monte Carlo benchmark driver.

Realization ``i`` is simulated with seed ``base_seed + i``.  Realizations
are independent and may be fanned out to a process pool; results are
reduced in realization order so the output does not depend on ``jobs``.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .evaluation import (
    diebold_mariano,
    efficiency_score,
    evident_difference,
    nmse,
    train_test_protocol,
)
from .io import ExperimentConfig, ResultRow, ResultTable, order_key
from .simulation import (
    CollinearSystemSpec,
    LinearSystemSpec,
    builtin_var2,
    bivariate_example,
    collinear_noise_var,
    dr_suite,
    simulate,
    spec_from_dict,
)


def resolve_systems(config: ExperimentConfig):
    """List of ``(spec, targets)`` with 0-based targets."""
    sys = config.system
    if sys == "dr_suite":
        return [(s, [0, 1]) for s in dr_suite(config.base_seed)]
    if sys == "var2":
        spec = builtin_var2(False)
    elif sys == "var2_correlated":
        spec = builtin_var2(True)
    elif sys == "bivariate":
        spec = bivariate_example()
    elif sys == "collinear":
        spec = CollinearSystemSpec(c=config.c, common_component_order=1)
    elif sys == "collinear2":
        spec = CollinearSystemSpec(c=config.c, common_component_order=2)
    else:
        spec = spec_from_dict(sys)
    n = spec.n if isinstance(spec, LinearSystemSpec) else 8
    if config.targets is None:
        targets = [7] if isinstance(spec, CollinearSystemSpec) else list(range(n))
    else:
        targets = [t - 1 for t in config.targets]
        if any(t >= n for t in targets):
            raise ValueError(f"target out of range for a {n}-variable system")
    return [(spec, targets)]


def noise_variance(spec, target):
    """One-step innovation variance of ``target`` (0-based) under ``spec``."""
    if isinstance(spec, LinearSystemSpec):
        return float(spec.noise_cov[target, target])
    return collinear_noise_var(spec, target)


def _one_realization(args):
    """Every method pair on one realization of one system.

    Returns, per target, NMSEs, test MSEs, selected orders, DM outcomes
    (+1 first better, -1 second better, 0 no rejection) for every method
    pair, and the variance of the full realization.
    """
    spec, targets, N, seed, cfg = args
    x = simulate(spec, N, seed)
    out = []
    for t in targets:
        recs = [
            train_test_protocol(
                x, t, m, e, cfg["k_max"], split=cfg["split"],
                rank_deficient=cfg["rank_deficient"],
            )
            for m, e in cfg["methods"]
        ]
        nm = [nmse(r) for r in recs]
        mse = [float(np.mean(r.errors**2)) for r in recs]
        dm = {}
        for j in range(len(recs)):
            for k in range(j + 1, len(recs)):
                res = diebold_mariano(recs[j], recs[k], cfg["alpha"])
                dm[(j, k)] = 0 if not res.rejected else (1 if res.statistic < 0 else -1)
        out.append(
            {
                "nmse": nm,
                "mse": mse,
                "orders": [order_key(r.orders) for r in recs],
                "dm": dm,
                "var_y": float(np.var(x[:, t])),
            }
        )
    return out


def _label(pair):
    return f"{pair[0]}+{pair[1]}"


def run_benchmark(config: ExperimentConfig, jobs=1, record_time=False, progress=None):
    """Run the Monte Carlo benchmark described by ``config``.

    Single systems yield one row per (method, estimator, N, target).  The
    ``dr_suite`` system yields one aggregate row per (method, estimator, N)
    with ``target = 0``, the mean NMSE over all 162 equations and the
    efficiency score in ``score``; its ``order_freq`` is empty because each
    equation has its own order space.
    """
    systems = resolve_systems(config)
    cfg = {
        "k_max": config.k_max,
        "split": config.split,
        "rank_deficient": config.rank_deficient,
        "alpha": config.alpha,
        "methods": config.methods,
    }
    R = config.realizations
    M = len(config.methods)
    suite = config.system == "dr_suite"
    table = ResultTable(config=config.to_dict())
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for N in config.N_list:
            t0 = time.perf_counter()
            per_system = []
            for s_idx, (spec, targets) in enumerate(systems):
                tasks = [(spec, targets, N, config.base_seed + i, cfg) for i in range(R)]
                if pool is None:
                    results = [_one_realization(a) for a in tasks]
                else:
                    results = list(pool.map(_one_realization, tasks, chunksize=max(1, R // (4 * jobs))))
                per_system.append((spec, targets, results))
                if progress:
                    progress(f"N={N} system {s_idx + 1}/{len(systems)} done")
            elapsed = time.perf_counter() - t0 if record_time else None
            if suite:
                table.rows.extend(_suite_rows(config, N, per_system, elapsed))
            else:
                spec, targets, results = per_system[0]
                for ti, t in enumerate(targets):
                    table.rows.extend(
                        _target_rows(config, N, t, [r[ti] for r in results], M, R, elapsed)
                    )
    finally:
        if pool is not None:
            pool.shutdown()
    return table


def _target_rows(config, N, target, reals, M, R, elapsed):
    nm = np.array([r["nmse"] for r in reals])  # (R, M)
    means = nm.mean(axis=0)
    stds = nm.std(axis=0)
    wins = np.zeros((M, M), dtype=int)
    for r in reals:
        for (j, k), v in r["dm"].items():
            if v == 1:
                wins[j, k] += 1
            elif v == -1:
                wins[k, j] += 1
    best = int(np.argmin(means))
    labels = [_label(p) for p in config.methods]
    rows = []
    for j, (m, e) in enumerate(config.methods):
        equivalent = j == best or not evident_difference(
            wins[best, j], wins[j, best], R, config.alpha
        ).evident_difference
        rows.append(
            ResultRow(
                method=m,
                estimator=e,
                N=N,
                target=target + 1,
                mean_nmse=float(means[j]),
                std_nmse=float(stds[j]),
                order_freq=dict(Counter(r["orders"][j] for r in reals)),
                best_or_equivalent=bool(equivalent),
                dm_first_better={labels[k]: int(wins[j, k]) for k in range(M) if k != j},
                wall_time=elapsed,
            )
        )
    return rows


def _suite_rows(config, N, per_system, elapsed):
    rows = []
    for j, (m, e) in enumerate(config.methods):
        cases, nmses = [], []
        for spec, targets, results in per_system:
            for ti, t in enumerate(targets):
                mse = np.mean([r[ti]["mse"][j] for r in results])
                var_y = np.mean([r[ti]["var_y"] for r in results])
                sigma_e = np.sqrt(noise_variance(spec, t))
                cases.append((sigma_e, np.sqrt(var_y), np.sqrt(mse)))
                nmses.extend(r[ti]["nmse"][j] for r in results)
        rows.append(
            ResultRow(
                method=m,
                estimator=e,
                N=N,
                target=0,
                mean_nmse=float(np.mean(nmses)),
                std_nmse=float(np.std(nmses)),
                order_freq={},
                score=efficiency_score(cases),
                wall_time=elapsed,
            )
        )
    return rows
