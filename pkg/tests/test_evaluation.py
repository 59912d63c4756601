import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from dynreg import evaluation
from dynreg.evaluation import (
    ForecastRecord,
    diebold_mariano,
    efficiency_score,
    evident_difference,
    nmse,
    percent_change_vs_reference,
    period_protocol,
    roc_auc,
    rolling_window_protocol,
    train_test_protocol,
)
from dynreg.regression import predict as real_predict
from dynreg.simulation import builtin_var2, simulate

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_nmse_reference_points(rng):
    y = rng.standard_normal(50)
    assert nmse(ForecastRecord(y, np.full(50, y.mean()))) == pytest.approx(1.0)
    assert nmse(ForecastRecord(y, y)) == 0.0
    with pytest.raises(ValueError, match="constant actuals"):
        nmse(ForecastRecord(np.ones(5), np.zeros(5)))


def test_forecast_record_validation():
    with pytest.raises(ValueError):
        ForecastRecord([1.0], [1.0])
    with pytest.raises(ValueError):
        ForecastRecord([1.0, 2.0], [1.0])


@given(hnp.arrays(float, 20, elements=finite), hnp.arrays(float, 20, elements=finite),
       st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3))
def test_nmse_scale_invariant(a, p, s):
    if np.ptp(a) < 1e-6:
        return
    base = nmse(ForecastRecord(a, p))
    assert nmse(ForecastRecord(s * a, s * p)) == pytest.approx(base, rel=1e-12, abs=1e-300)


def test_dm_identical_records(rng):
    y = rng.standard_normal(30)
    rec = ForecastRecord(y, y + rng.standard_normal(30))
    res = diebold_mariano(rec, rec)
    assert res.statistic == 0 and not res.rejected and res.winner is None


def test_dm_preconditions(rng):
    y = rng.standard_normal(9)
    with pytest.raises(ValueError):
        diebold_mariano(ForecastRecord(y, y), ForecastRecord(y, y))
    y = rng.standard_normal(20)
    with pytest.raises(ValueError):
        diebold_mariano(ForecastRecord(y, y), ForecastRecord(y + 1, y))


@given(st.integers(0, 10**6))
def test_dm_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(40)
    a = ForecastRecord(y, y + rng.standard_normal(40), "a")
    b = ForecastRecord(y, y + 1.2 * rng.standard_normal(40), "b")
    assert diebold_mariano(a, b).statistic == -diebold_mariano(b, a).statistic


def test_dm_statistic_formula(rng):
    y = rng.standard_normal(25)
    pa, pb = y + rng.standard_normal(25), y + rng.standard_normal(25)
    d = (y - pa) ** 2 - (y - pb) ** 2
    expected = d.mean() / np.sqrt(d.var() / 25)
    res = diebold_mariano(ForecastRecord(y, pa), ForecastRecord(y, pb))
    assert res.statistic == pytest.approx(expected)
    from scipy.stats import norm

    assert res.p_value == pytest.approx(2 * norm.sf(abs(expected)))


def test_dm_detects_added_noise():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        y = rng.standard_normal(200)
        ea = 0.3 * rng.standard_normal(200)
        eb = ea + rng.normal(0, np.sqrt(10 * ea.var()), 200)
        res = diebold_mariano(ForecastRecord(y, y - ea, "clean"), ForecastRecord(y, y - eb, "noisy"))
        hits += res.rejected and res.winner == "clean"
    assert hits > 95


def test_evident_difference_rule():
    assert not evident_difference(30, 19, 1000).evident_difference
    assert evident_difference(60, 40, 1000).evident_difference
    c = evident_difference(12, 8, 200)
    assert c.evident_difference and c.non_rejections == 180 and c.realizations == 200
    with pytest.raises(ValueError):
        evident_difference(5, 5, 8)


def test_efficiency_score_examples():
    assert efficiency_score([(0.3, 1.0, 0.3), (1.0, 2.0, 1.0)]) == 0.0
    assert efficiency_score([(np.sqrt(0.1), 1.0, np.sqrt(0.2))]) == pytest.approx(0.1)


@given(st.lists(st.tuples(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0, 10)), min_size=1))
def test_efficiency_score_non_negative(cases):
    s = efficiency_score(cases)
    assert s >= 0
    if all(e == h for e, _, h in cases):
        assert s == 0


def test_auc_examples():
    assert roc_auc([1, 2, 3], [1, 2, 3]) == 0.5
    assert roc_auc([1, 2], [3, 4, 5]) == 1.0
    assert roc_auc([1, 2], [1.5, 3]) == 0.75
    with pytest.raises(ValueError):
        roc_auc([], [1])


def pairwise_auc(a, b):
    wins = sum((bj > ai) + 0.5 * (bj == ai) for ai in a for bj in b)
    return wins / (len(a) * len(b))


@given(st.lists(st.integers(0, 6), min_size=1, max_size=15),
       st.lists(st.integers(0, 6), min_size=1, max_size=15))
def test_auc_complement_and_pair_count(a, b):
    assert roc_auc(a, b) + roc_auc(b, a) == 1.0
    assert roc_auc(a, b) == pytest.approx(pairwise_auc(a, b), abs=1e-15)


def test_percent_change():
    out = percent_change_vs_reference({"BTS+OLS": 0.1, "VARB+OLS": 0.115}, "BTS+OLS")
    assert out["BTS+OLS"] == 0.0 and out["VARB+OLS"] == pytest.approx(15.0)
    with pytest.raises(ValueError):
        percent_change_vs_reference({"a": 0.0}, "a")
    with pytest.raises(KeyError):
        percent_change_vs_reference({"a": 1.0}, "b")


# protocols ---------------------------------------------------------------

class Spy:
    """Records what the protocols hand to fitting and prediction."""

    def __init__(self, monkeypatch):
        self.fit_lengths = []
        self.predicted = []
        real_select = evaluation.select_and_fit

        def select(series, *args, **kwargs):
            self.fit_lengths.append(len(series))
            self.fit_data = np.array(series)
            return real_select(series, *args, **kwargs)

        def predict(model, series, times):
            series = np.asarray(series)
            out = real_predict(model, series, times)
            for t, v in zip(np.atleast_1d(times), out):
                # the same prediction from a series truncated after row t
                assert real_predict(model, series[: t + 1], [t])[0] == v
                self.predicted.append(int(t))
            return out

        monkeypatch.setattr(evaluation, "select_and_fit", select)
        monkeypatch.setattr(evaluation, "predict", predict)


def test_train_test_split_and_causality(monkeypatch):
    spy = Spy(monkeypatch)
    x = simulate(builtin_var2(), 100, seed=1)
    rec = train_test_protocol(x, 3, "BTS", "RR", 3)
    assert spy.fit_lengths == [75]
    assert np.array_equal(spy.fit_data, x[:75])
    assert rec.actuals.size == 25 and min(spy.predicted) == 74
    assert np.array_equal(rec.actuals, x[75:, 3])


def test_train_test_ignores_test_rows_when_fitting():
    x = simulate(builtin_var2(), 120, seed=2)
    damaged = x.copy()
    damaged[90:] *= 50
    a = train_test_protocol(x, 1, "FULL", "PLS", 3)
    b = train_test_protocol(damaged, 1, "FULL", "PLS", 3)
    assert a.orders == b.orders and a.estimator == b.estimator
    assert np.array_equal(a.predictions[:1], b.predictions[:1])


def test_train_test_needs_sixteen_rows():
    with pytest.raises(ValueError):
        train_test_protocol(np.random.default_rng(0).standard_normal((15, 2)), 0, "BTS", "OLS", 2)


def test_rolling_window_count_and_causality(monkeypatch):
    spy = Spy(monkeypatch)
    x = simulate(builtin_var2(), 300, seed=3)
    res = rolling_window_protocol(x, 0, "BTS", "OLS", 100, 3)
    assert res.nmse.size == 2 and not res.failed.any()
    assert spy.fit_lengths == [100, 100]
    assert sorted(spy.predicted) == list(range(99, 299))


def test_period_protocol_blocks(monkeypatch):
    spy = Spy(monkeypatch)
    x = np.random.default_rng(4).standard_normal((1305, 2))
    res = period_protocol(x, 0, "VARB", "OLS", 260, 3)
    assert res.nmse.size == 4
    assert spy.fit_lengths == [260, 260, 260, 260]
    assert max(spy.predicted) == 1303


def test_failed_window_scores_one():
    x = np.random.default_rng(5).standard_normal((300, 2))
    x[100:200, 0] = 2.0  # constant actuals in the second window
    res = rolling_window_protocol(x, 0, "BTS", "OLS", 100, 2)
    assert res.nmse[0] == 1.0 and res.failed[0]
    assert not res.failed[1]


def test_rolling_on_pure_noise():
    medians = []
    for seed in range(200):
        x = np.random.default_rng(seed).standard_normal((600, 2))
        medians.append(rolling_window_protocol(x, 0, "BTS", "OLS", 100, 2).median)
    medians = np.array(medians)
    # predicting white noise from its past cannot beat the mean on average
    assert medians.mean() >= 1.0 - 2 * medians.std() / np.sqrt(200)


@pytest.mark.slow
def test_rolling_agrees_with_train_test_on_stationary_system():
    # NMSE depends on the length of the evaluated segment (the spread of a
    # short segment underestimates the series variance), so both protocols
    # fit on 400 rows and score the next 400.
    spec = builtin_var2()
    rolling, split = [], []
    for seed in range(50):
        x = simulate(spec, 2000, seed)
        rolling.append(rolling_window_protocol(x, 3, "BTS", "OLS", 400, 5).median)
        split.append(nmse(train_test_protocol(x[:800], 3, "BTS", "OLS", 5, split=0.5)))
    rolling, split = np.array(rolling), np.array(split)
    se = np.sqrt(rolling.var() / 50 + split.var() / 50)
    assert abs(np.median(rolling) - np.median(split)) < 3 * se
