"""Command-line front end.

Variable indices on the command line and in every file are 1-based.
Exit status: 0 on success, 1 on usage or input errors, 2 on numerical
failure.  Progress goes to standard error, data to standard output or
``--output``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .benchmark import run_benchmark
from .evaluation import period_protocol, roc_auc, rolling_window_protocol
from .regression import ESTIMATOR_KINDS, EstimatorSpec, fit, predict
from .selection import METHODS, select_orders
from .simulation import CollinearSystemSpec, builtin_var2, bivariate_example, simulate

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_series(args):
    try:
        return io.ingest_csv(args.input, has_header=args.header, log_returns=args.log_returns)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror or exc}") from exc
    except io.CsvFormatError as exc:
        raise UsageError(f"{args.input}: {exc}") from exc


def _target(args, n):
    if not 1 <= args.target <= n:
        raise UsageError(f"--target must lie in 1..{n}")
    return args.target - 1


def _estimator(args):
    spec = EstimatorSpec(args.estimator)
    if args.q is not None:
        spec = EstimatorSpec(spec.kind, q=args.q)
    if args.ridge is not None:
        spec = EstimatorSpec(spec.kind, a=args.ridge)
    return spec


def _system(name, c):
    if name == "var2":
        return builtin_var2(False)
    if name == "var2_correlated":
        return builtin_var2(True)
    if name == "bivariate":
        return bivariate_example()
    if name == "collinear":
        return CollinearSystemSpec(c=c, common_component_order=1)
    if name == "collinear2":
        return CollinearSystemSpec(c=c, common_component_order=2)
    raise UsageError(f"unknown system {name!r}")


def cmd_simulate(args):
    if args.system.endswith(".json"):
        from .simulation import spec_from_dict

        spec = spec_from_dict(json.loads(Path(args.system).read_text(encoding="utf-8")))
    else:
        spec = _system(args.system, args.c)
    x = simulate(spec, args.length, args.seed)
    labels = [f"x{i + 1}" for i in range(x.shape[1])]
    _emit(io.format_series_csv(x, labels), args.output)


def _trace_dict(trace, labels):
    return {
        "method": trace.method,
        "chosen": dict(zip(labels, trace.chosen)),
        "orders": list(trace.chosen),
        "bic": trace.chosen_bic,
        "accepted": [[list(o), v] for o, v in trace.accepted],
        "visited": len(trace.visited),
        "skipped": len(trace.skipped),
    }


def cmd_select(args):
    ts = _load_series(args)
    t = _target(args, ts.shape[1])
    arr = ts.values - ts.values.mean(axis=0)
    _, trace = select_orders(args.method, arr, t, args.kmax, rank_deficient=args.rank_deficient)
    if args.format == "json":
        _emit(json.dumps(_trace_dict(trace, ts.labels), indent=2) + "\n", args.output)
        return
    lines = [f"target {ts.labels[t]} ({args.target}), method {trace.method}"]
    lines.append("orders " + " ".join(f"{lab}={k}" for lab, k in zip(ts.labels, trace.chosen)))
    lines.append(f"bic {trace.chosen_bic:.6g}")
    lines.append("accepted path:")
    lines += [f"  ({','.join(map(str, o))}) bic={v:.6g}" for o, v in trace.accepted]
    lines.append(f"{len(trace.visited)} candidates scored, {len(trace.skipped)} rank-deficient skipped")
    _emit("\n".join(lines) + "\n", args.output)


def _parse_orders(text, n):
    try:
        orders = tuple(int(k) for k in text.split(","))
    except ValueError as exc:
        raise UsageError("--orders must be comma-separated integers") from exc
    if len(orders) != n:
        raise UsageError(f"--orders needs {n} entries")
    return orders


def cmd_fit(args):
    ts = _load_series(args)
    t = _target(args, ts.shape[1])
    spec = _estimator(args)
    if args.orders:
        orders = _parse_orders(args.orders, ts.shape[1])
        model = fit(ts.values, orders, t, spec)
    else:
        from .evaluation import select_and_fit

        model = select_and_fit(ts.values, t, args.method, spec, args.kmax,
                               rank_deficient=args.rank_deficient).model
    d = io.model_to_dict(model)
    d["labels"] = ts.labels
    _emit(json.dumps(d, indent=2) + "\n", args.output)


def cmd_predict(args):
    try:
        model = io.model_from_dict(json.loads(Path(args.model).read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load model {args.model}: {exc}") from exc
    ts = _load_series(args)
    kmax = max(model.orders) if model.orders else 0
    times = np.arange(max(kmax - 1, 0), ts.shape[0])
    yhat = predict(model, ts.values, times)
    rows = ["time,prediction"] + [f"{tt + 2},{v!r}" for tt, v in zip(times, map(float, yhat))]
    _emit("\n".join(rows) + "\n", args.output)


def cmd_benchmark(args):
    try:
        d = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{args.config} is not valid JSON: {exc}") from exc
    if args.seed is not None:
        d["base_seed"] = args.seed
    try:
        config = io.ExperimentConfig.from_dict(d)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid config {args.config}: {exc}") from exc
    table = run_benchmark(
        config,
        jobs=args.jobs,
        record_time=args.timing,
        progress=lambda msg: print(msg, file=sys.stderr),
    )
    _emit(io.emit_results(table, None, args.format), args.output or config.output_path)


def cmd_rolling(args):
    ts = _load_series(args)
    t = _target(args, ts.shape[1])
    spec = _estimator(args)
    if args.periods:
        res = period_protocol(ts.values, t, args.method, spec, args.window, args.kmax,
                              rank_deficient=args.rank_deficient)
    else:
        res = rolling_window_protocol(ts.values, t, args.method, spec, args.window, args.kmax,
                                      rank_deficient=args.rank_deficient)
    rows = ["segment,nmse,failed"]
    rows += [f"{i + 1},{v:.6g},{int(f)}" for i, (v, f) in enumerate(zip(res.nmse, res.failed))]
    _emit("\n".join(rows) + "\n", args.output)
    print(f"median NMSE {res.median:.6g} over {res.nmse.size} segments, "
          f"{int(res.failed.sum())} failed", file=sys.stderr)


def _read_samples(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        cells = [c.strip() for c in line.split(",") if c.strip()]
        if not cells:
            continue
        cell = cells[1] if len(cells) >= 2 else cells[0]
        try:
            values.append(float(cell))
        except ValueError:
            if line_no == 1:
                continue  # header
            raise UsageError(f"{path}: line {line_no}: non-numeric value {cell!r}") from None
    if not values:
        raise UsageError(f"{path}: no values")
    return values


def cmd_roc(args):
    auc = roc_auc(_read_samples(args.scores_a), _read_samples(args.scores_b))
    _emit(f"{auc:.6g}\n", args.output)


def build_parser():
    p = _Parser(prog="dynreg", description="Lag-order selection and prediction for "
                "dynamic regression models (variable indices are 1-based).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, target=True):
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")
        if target:
            sp.add_argument("--target", type=int, required=True, help="1-based target variable")
            sp.add_argument("--kmax", type=int, default=5, help="largest lag per variable")
            sp.add_argument("--method", type=str.upper, choices=METHODS, default="BTS")
            sp.add_argument("--rank-deficient", choices=("skip", "pinv"), default="skip",
                            help="how selection treats rank-deficient candidates")

    def data(sp):
        sp.add_argument("input", help="CSV file, one column per variable")
        sp.add_argument("--header", action="store_true", help="first row holds labels")
        sp.add_argument("--log-returns", action="store_true",
                        help="use differences of logarithms of the values")

    def estimator(sp):
        sp.add_argument("--estimator", type=str.upper, choices=ESTIMATOR_KINDS, default="OLS")
        sp.add_argument("--q", type=int, help="PCR/PLS components (default: cross-validated)")
        sp.add_argument("--ridge", type=float, help="ridge parameter (default: cross-validated)")

    sp = sub.add_parser("simulate", help="emit one realization as CSV")
    sp.add_argument("system", help="var2, var2_correlated, bivariate, collinear, collinear2 "
                    "or a JSON system spec file")
    sp.add_argument("--length", "-N", type=int, default=400)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--c", type=float, default=0.0, help="collinearity coefficient")
    common(sp, target=False)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("select", help="select lag orders and print the search trace")
    data(sp)
    common(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("fit", help="select orders (or take --orders) and fit; prints model JSON")
    data(sp)
    common(sp)
    estimator(sp)
    sp.add_argument("--orders", help="comma-separated order vector; skips selection")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("predict", help="one-step predictions from a fitted model")
    sp.add_argument("model", help="model JSON written by 'fit'")
    data(sp)
    common(sp, target=False)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("benchmark", help="run a Monte Carlo experiment config")
    sp.add_argument("config", help="experiment config JSON")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp.add_argument("--seed", type=int, help="override base_seed of the config")
    sp.add_argument("--timing", action="store_true",
                    help="record wall time (results are then no longer byte-reproducible)")
    common(sp, target=False)
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("rolling", help="windowed one-step evaluation on a CSV")
    data(sp)
    common(sp)
    estimator(sp)
    sp.add_argument("--window", type=int, required=True, help="window or period length")
    sp.add_argument("--periods", action="store_true",
                    help="period split: the last period absorbs the remainder")
    sp.set_defaults(func=cmd_rolling)

    sp = sub.add_parser("roc", help="AUC between two NMSE sample files")
    sp.add_argument("scores_a", help="NMSE samples of condition A")
    sp.add_argument("scores_b", help="NMSE samples of condition B")
    common(sp, target=False)
    sp.set_defaults(func=cmd_roc)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"dynreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"dynreg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
