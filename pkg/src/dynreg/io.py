"""CSV ingestion, period splitting, experiment configs and result files.

Variable indices in configs, CSV headers and result files are 1-based;
the Python API elsewhere in the package is 0-based.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .regression import ESTIMATOR_KINDS, as_series
from .selection import METHODS

SCHEMA_VERSION = 1


class CsvFormatError(ValueError):
    """Malformed input CSV; the message names the offending line."""


@dataclass
class TimeSeriesMatrix:
    """Rows are time points, columns are variables."""

    values: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.values = as_series(self.values)
        if not self.labels:
            self.labels = [f"x{i + 1}" for i in range(self.values.shape[1])]
        if len(self.labels) != self.values.shape[1]:
            raise ValueError("one label per column is required")

    @property
    def shape(self):
        return self.values.shape


def ingest_csv(path, has_header=False, log_returns=False) -> TimeSeriesMatrix:
    """Read a rectangular numeric CSV.

    With ``log_returns`` each row becomes ``ln(v_t) - ln(v_{t-1})`` and the
    matrix loses its first row.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_rows(csv.reader(fh), has_header, log_returns)


def parse_csv_text(text, has_header=False, log_returns=False) -> TimeSeriesMatrix:
    return _parse_rows(csv.reader(_io.StringIO(text)), has_header, log_returns)


def _parse_rows(reader, has_header, log_returns):
    labels = []
    rows = []
    width = None
    for line_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if has_header and not labels and not rows:
            labels = [c.strip() for c in row]
            width = len(labels)
            continue
        if width is None:
            width = len(row)
        if len(row) != width:
            raise CsvFormatError(
                f"line {line_no}: expected {width} fields, found {len(row)}"
            )
        try:
            values = [float(c) for c in row]
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            raise CsvFormatError(f"line {line_no}: non-numeric cell {bad!r}") from None
        if log_returns:
            for c, v in enumerate(values, start=1):
                if not v > 0:
                    raise CsvFormatError(
                        f"line {line_no}: non-positive value {v!r} in column {c} "
                        "cannot be log-transformed"
                    )
        rows.append(values)
    if not rows:
        raise CsvFormatError("no data rows")
    arr = np.array(rows, dtype=float)
    if log_returns:
        if arr.shape[0] < 2:
            raise CsvFormatError("log returns need at least two rows")
        arr = np.diff(np.log(arr), axis=0)
    return TimeSeriesMatrix(arr, labels)


def _is_float(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def format_series_csv(series, labels=None) -> str:
    """CSV text of a series matrix; floats use the shortest exact repr."""
    arr = as_series(series)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if labels:
        writer.writerow(labels)
    for row in arr:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_series_csv(series, path, labels=None):
    Path(path).write_text(format_series_csv(series, labels), encoding="utf-8")


def period_bounds(n_rows, period_len, k_max=0):
    """``(start, stop)`` of consecutive periods; the remainder joins the last."""
    if period_len < k_max + 2:
        raise ValueError(f"period_len must be >= k_max + 2 = {k_max + 2}")
    if n_rows < 2 * period_len:
        raise ValueError("need N >= 2 * period_len")
    count = n_rows // period_len
    bounds = [(p * period_len, (p + 1) * period_len) for p in range(count)]
    bounds[-1] = (bounds[-1][0], n_rows)
    return bounds


def split_periods(series, period_len, k_max=0):
    """Consecutive non-overlapping blocks of ``period_len`` rows."""
    arr = as_series(series)
    return [arr[a:b] for a, b in period_bounds(arr.shape[0], period_len, k_max)]


BUILTIN_SYSTEMS = (
    "var2",
    "var2_correlated",
    "bivariate",
    "collinear",
    "collinear2",
    "dr_suite",
)


@dataclass
class ExperimentConfig:
    """A Monte Carlo benchmark.

    ``system`` is a builtin name (see ``BUILTIN_SYSTEMS``) or an inline
    system dict as produced by ``LinearSystemSpec.to_dict`` or
    ``CollinearSystemSpec.to_dict``.  ``targets`` are 1-based; ``None``
    means the system default.  ``c`` parameterizes the collinear builtins.
    """

    system: object
    N_list: list
    realizations: int
    k_max: int
    methods: list
    base_seed: int = 0
    targets: list | None = None
    c: float = 0.0
    split: float = 0.75
    alpha: float = 0.05
    rank_deficient: str = "skip"
    output_path: str | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")
        if int(self.realizations) < 1:
            raise ValueError("realizations must be >= 1")
        if int(self.k_max) < 1:
            raise ValueError("k_max must be >= 1")
        if not self.N_list:
            raise ValueError("N_list must not be empty")
        if not self.methods:
            raise ValueError("methods must not be empty")
        pairs = []
        for pair in self.methods:
            m, e = (pair.split("+") if isinstance(pair, str) else pair)
            m, e = str(m).upper(), str(e).upper()
            if m not in METHODS:
                raise ValueError(f"unknown selection method {m!r}")
            if e not in ESTIMATOR_KINDS:
                raise ValueError(f"unknown estimator {e!r}")
            pairs.append((m, e))
        self.methods = pairs
        self.N_list = [int(n) for n in self.N_list]
        if any(n < 16 for n in self.N_list):
            raise ValueError("every N must be >= 16")
        if isinstance(self.system, str) and self.system not in BUILTIN_SYSTEMS:
            raise ValueError(f"unknown builtin system {self.system!r}")
        if isinstance(self.system, dict):
            from .simulation import spec_from_dict

            spec_from_dict(self.system)  # fail fast on an invalid inline spec
        if self.rank_deficient not in ("skip", "pinv"):
            raise ValueError("rank_deficient must be 'skip' or 'pinv'")
        if self.targets is not None:
            self.targets = [int(t) for t in self.targets]
            if any(t < 1 for t in self.targets):
                raise ValueError("targets are 1-based")

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "system": self.system,
            "N_list": list(self.N_list),
            "realizations": int(self.realizations),
            "k_max": int(self.k_max),
            "methods": [list(p) for p in self.methods],
            "base_seed": int(self.base_seed),
            "targets": self.targets,
            "c": self.c,
            "split": self.split,
            "alpha": self.alpha,
            "rank_deficient": self.rank_deficient,
            "output_path": self.output_path,
        }

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class ResultRow:
    """One (method, estimator, N, target) cell of a benchmark; target is 1-based."""

    method: str
    estimator: str
    N: int
    target: int
    mean_nmse: float
    std_nmse: float
    order_freq: dict
    best_or_equivalent: bool = False
    dm_first_better: dict = field(default_factory=dict)
    score: float | None = None
    wall_time: float | None = None


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    config: dict | None = None

    def find(self, method, estimator, N, target):
        for r in self.rows:
            if (r.method, r.estimator, r.N, r.target) == (method, estimator, N, target):
                return r
        raise KeyError((method, estimator, N, target))


CSV_COLUMNS = (
    "method",
    "estimator",
    "N",
    "target",
    "mean_nmse",
    "std_nmse",
    "modal_order",
    "modal_freq",
    "best_or_equivalent",
    "score",
    "wall_time",
)


def _sig6(x):
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.6g}")


def _fmt6(x):
    return "" if x is None else f"{float(x):.6g}"


def modal_order(freq: dict):
    """Most frequent order key; ties go to the lexicographically smallest."""
    if not freq:
        return None, 0
    top = max(freq.values())
    key = min(k for k, v in freq.items() if v == top)
    return key, top


def order_key(orders):
    """Text key of an order vector, e.g. ``"1,1,0,2"``."""
    return ",".join(str(int(k)) for k in orders)


def results_to_json(table: ResultTable) -> str:
    rows = []
    for r in table.rows:
        rows.append(
            {
                "method": r.method,
                "estimator": r.estimator,
                "N": int(r.N),
                "target": int(r.target),
                "mean_nmse": _sig6(r.mean_nmse),
                "std_nmse": _sig6(r.std_nmse),
                "order_freq": {k: int(v) for k, v in sorted(r.order_freq.items())},
                "best_or_equivalent": bool(r.best_or_equivalent),
                "dm_first_better": {
                    k: int(v) for k, v in sorted(r.dm_first_better.items())
                },
                "score": _sig6(r.score),
                "wall_time": _sig6(r.wall_time),
            }
        )
    doc = {"schema_version": SCHEMA_VERSION, "config": table.config, "rows": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def results_from_json(text) -> ResultTable:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')}")
    rows = [ResultRow(**r) for r in doc["rows"]]
    return ResultTable(rows=rows, config=doc.get("config"))


def results_to_csv(table: ResultTable) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in table.rows:
        key, count = modal_order(r.order_freq)
        total = sum(r.order_freq.values())
        writer.writerow(
            [
                r.method,
                r.estimator,
                r.N,
                r.target,
                _fmt6(r.mean_nmse),
                _fmt6(r.std_nmse),
                "" if key is None else f"({key})",
                "" if not total else _fmt6(count / total),
                int(bool(r.best_or_equivalent)),
                _fmt6(r.score),
                _fmt6(r.wall_time),
            ]
        )
    return buf.getvalue()


def emit_results(table: ResultTable, path=None, fmt="json") -> str:
    """Serialize ``table`` as ``"json"`` or ``"csv"``; write it when ``path`` is given."""
    if fmt == "json":
        text = results_to_json(table)
    elif fmt == "csv":
        text = results_to_csv(table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


def model_to_dict(model) -> dict:
    """JSON-ready dict of a :class:`FittedModel`; the target is stored 1-based."""
    est = model.estimator
    return {
        "schema_version": SCHEMA_VERSION,
        "orders": [int(k) for k in model.orders],
        "target": int(model.target) + 1,
        "coef": [float(c) for c in model.coef],
        "estimator": {"kind": est.kind, "q": est.q, "a": est.a},
        "sse": float(model.sse),
        "bic": float(model.bic),
        "n_effective": int(model.n_effective),
        "rank": int(model.rank),
        "means": None if model.means is None else [float(m) for m in model.means],
        "flags": list(model.flags),
    }


def model_from_dict(d):
    from .regression import EstimatorSpec, FittedModel

    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')}")
    return FittedModel(
        orders=tuple(int(k) for k in d["orders"]),
        target=int(d["target"]) - 1,
        coef=np.array(d["coef"], dtype=float),
        estimator=EstimatorSpec(**d["estimator"]),
        sse=float(d["sse"]),
        bic=float(d["bic"]),
        n_effective=int(d["n_effective"]),
        rank=int(d.get("rank", 0)),
        means=None if d.get("means") is None else np.array(d["means"], dtype=float),
        flags=tuple(d.get("flags", ())),
    )
