import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from sympcast.errors import EmptyInput, ShapeMismatch, ValidationError
from sympcast.evalharness import (
    EvalMetrics,
    NegativeActualWarning,
    ablate_all_but_one,
    ablate_cumulative,
    confidence_interval,
    evaluate_features,
    forecast_backtest,
    mae,
    mre,
    repeated_eval,
    top_n_sweep,
)
from sympcast.panel import ColumnMeta, PanelDataset, SyntheticSpec, generate_synthetic
from sympcast.rankcorr import f_regression
from sympcast.regress import ModelSpec

FAST = ModelSpec("gbt", gbt_stages=20)


class TestMetrics:
    def test_examples(self):
        assert mae([2, 4], [1, 2]) == 1.5
        assert mae([0], [5]) == 5.0
        assert mre([2], [1]) == 50.0
        assert mre([1], [0]) == 100.0
        assert mae([1, 2], [1, 2]) == mre([1, 2], [1, 2]) == 0.0

    def test_random_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 50))
            a = rng.uniform(0, 100, n)
            a[rng.uniform(size=n) < 0.2] = 0.0
            p = a + rng.normal(size=n)
            assert_allclose(mae(p, a), sum(abs(x - y) for x, y in zip(p, a)) / n, rtol=1e-12)
            assert_allclose(mre(p, a), 100.0 / n * sum(abs(x - y) / (y + 1) for x, y in zip(p, a)), rtol=1e-12)

    def test_additive_contributions(self, rng):
        a = rng.uniform(0, 10, 20)
        p = a + rng.normal(size=20)
        # appending an exact pair adds a zero term to the sum
        assert_allclose(mre(np.r_[p, 3.0], np.r_[a, 3.0]) * 21, mre(p, a) * 20, rtol=1e-12)

    def test_errors(self):
        with pytest.raises(ShapeMismatch):
            mae([1, 2], [1])
        with pytest.raises(EmptyInput):
            mre([], [])
        with pytest.warns(NegativeActualWarning):
            assert mre([0.0], [-0.5]) == 100.0

    def test_zero_iff_equal(self, rng):
        a = rng.uniform(0, 5, 10)
        m = EvalMetrics.of(a.copy(), a)
        assert m.mae == 0 and m.mre_percent == 0
        b = a.copy()
        b[3] += 1e-9
        m = EvalMetrics.of(b, a)
        assert m.mae > 0 and m.mre_percent > 0


class TestConfidenceInterval:
    def test_t_quantile(self):
        assert round(stats.t.ppf(0.975, 19), 3) == 2.093
        v = np.arange(20.0)
        lo, hi, deg = confidence_interval(v)
        half = stats.t.ppf(0.975, 19) * v.std(ddof=1) / math.sqrt(20)
        assert_allclose([lo, hi], [v.mean() - half, v.mean() + half], rtol=1e-12)
        assert not deg

    def test_degenerate(self):
        assert confidence_interval([4.2]) == (4.2, 4.2, True)
        assert confidence_interval([3.0, 3.0, 3.0])[:2] == (3.0, 3.0)

    def test_width_shrinks(self, rng):
        base = rng.normal(size=20)
        v20 = (base - base.mean()) / base.std(ddof=1)
        v40 = np.r_[v20, v20]
        v40 = (v40 - v40.mean()) / v40.std(ddof=1)
        w = lambda v: np.subtract(*confidence_interval(v)[1::-1])  # noqa: E731
        assert w(v40) <= w(v20)

    def test_normal_mode(self):
        lo, hi, _ = confidence_interval(np.arange(20.0), method="normal")
        lo_t, hi_t, _ = confidence_interval(np.arange(20.0))
        assert hi - lo < hi_t - lo_t
        with pytest.raises(ValidationError):
            confidence_interval([1, 2], method="boot")


class TestRepeatedEval:
    def test_structure_and_determinism(self, planted):
        rk = f_regression(planted, planted.feature_names)
        a = repeated_eval(planted, rk, 3, FAST, runs=20, base_seed=7)
        b = repeated_eval(planted, rk, 3, FAST, runs=20, base_seed=7)
        assert len(a.runs) == 20
        lo, hi = a.mre_ci_95
        assert lo <= a.mean_mre <= hi
        assert a.to_dict() == b.to_dict()
        assert a.features == tuple(rk.names[:3])

    def test_single_run_flag(self, planted):
        ev = repeated_eval(planted, ["signal_0"], 1, FAST, runs=1)
        assert ev.degenerate_ci and ev.mre_ci_95 == (ev.mean_mre, ev.mean_mre)

    def test_zero_variance(self):
        # a constant target is fit exactly by a single-leaf tree on every split
        n = 40
        x = np.linspace(0, 10, n)
        ds = PanelDataset(
            region=np.array(["A"] * n, dtype=object),
            date=np.datetime64("2020-01-01") + np.arange(n),
            columns=(ColumnMeta("x"), ColumnMeta("y", "target", "percent")),
            values=np.column_stack([x, np.full(n, 5.0)]),
            target="y",
        )
        ev = repeated_eval(ds, ["x"], 1, ModelSpec("tree"), runs=5)
        assert ev.mre_ci_95 == (0.0, 0.0) and ev.mean_mre == 0.0

    def test_seed_per_run(self, planted):
        # run i depends only on base_seed + i
        a = repeated_eval(planted, ["signal_0"], 1, FAST, runs=3, base_seed=0)
        b = repeated_eval(planted, ["signal_0"], 1, FAST, runs=2, base_seed=1)
        assert a.runs[1:] == b.runs

    def test_parallel_matches_serial(self, planted, monkeypatch):
        serial = repeated_eval(planted, ["signal_0", "signal_1"], 2, FAST, runs=4)
        monkeypatch.setenv("SYMPCAST_THREADS", "3")
        threaded = repeated_eval(planted, ["signal_0", "signal_1"], 2, FAST, runs=4)
        assert serial.to_dict() == threaded.to_dict()

    def test_errors(self, planted):
        with pytest.raises(ValidationError):
            repeated_eval(planted, ["signal_0"], 2, FAST)

    def test_run_index_annotation(self):
        ds = PanelDataset(
            region=np.array(["A"] * 2, dtype=object),
            date=np.datetime64("2020-01-01") + np.arange(2),
            columns=(ColumnMeta("x"), ColumnMeta("y", "target", "percent")),
            values=np.array([[1.0, 1], [2, 2]]),
            target="y",
        )
        with pytest.raises(ShapeMismatch, match="run 0"):
            evaluate_features(ds, ["x"], ModelSpec("linear"), runs=2)


class TestSweep:
    def test_single_feature(self, planted):
        rep = top_n_sweep(planted, ["signal_0"], FAST, runs=2)
        assert len(rep.per_n) == 1 and rep.best_n == 1

    def test_k_entries_and_argmin(self, planted):
        rk = f_regression(planted, planted.feature_names)
        rep = top_n_sweep(planted, rk, FAST, n_range=range(1, 5), runs=2)
        assert [n for n, _ in rep.per_n] == [1, 2, 3, 4]
        mres = [ev.mean_mre for _, ev in rep.per_n]
        assert rep.best_n == 1 + int(np.argmin(mres))

    def test_more_informative_features_help(self):
        for seed in range(10):
            ds = generate_synthetic(SyntheticSpec(seed=seed))
            rk = f_regression(ds, ds.feature_names)
            rep = top_n_sweep(ds, rk, FAST, n_range=[1, 3], runs=3, base_seed=seed)
            assert rep.per_n[1][1].mean_mre <= rep.per_n[0][1].mean_mre


class TestAblation:
    @pytest.mark.parametrize("N", range(2, 11))
    def test_step_counts(self, planted, N):
        feats = planted.feature_names[:N]
        spec = ModelSpec("linear")
        assert len(ablate_all_but_one(planted, feats, spec, runs=1).steps) == N
        cum = ablate_cumulative(planted, feats, spec, runs=1)
        assert len(cum.steps) == N - 1
        assert [len(d) for d, _ in cum.steps] == list(range(1, N))

    def test_cumulative_sizes(self, planted):
        rep = ablate_cumulative(planted, ["signal_0", "signal_1", "signal_2"], FAST, runs=1)
        assert [ev.n_features for _, ev in rep.steps] == [2, 1]
        assert rep.steps[0][0] == ("signal_2",)

    def test_planted_shapes(self, planted):
        rk = f_regression(planted, planted.feature_names)
        top = rk.top(5)
        abo = ablate_all_but_one(planted, top, FAST, runs=2)
        m = abo.step_mres()
        assert abo.steps[int(m.argmax())][0] == ("signal_0",)
        # dropping a noise feature moves the error much less than dropping rank 1
        assert np.all(np.abs(m[2:] - abo.baseline.mean_mre) < m[0] - abo.baseline.mean_mre)
        least = ablate_cumulative(planted, top, FAST, runs=2)
        inc = np.diff(np.r_[least.baseline.mean_mre, least.step_mres()])
        assert int(inc.argmax()) == len(inc) - 1
        most = ablate_cumulative(planted, top, FAST, runs=2, order="most_first")
        inc = np.diff(np.r_[most.baseline.mean_mre, most.step_mres()])
        assert int(inc.argmax()) == 0

    def test_trajectory_rows(self, planted):
        rep = ablate_all_but_one(planted, ["signal_0", "signal_1"], FAST, runs=2)
        rows = rep.trajectory()
        assert [r[0] for r in rows] == [0, 1, 2]
        assert all(r[2] <= r[1] <= r[3] for r in rows)

    def test_errors(self, planted):
        with pytest.raises(ValidationError):
            ablate_all_but_one(planted, ["signal_0"], FAST)
        with pytest.raises(ValidationError):
            ablate_cumulative(planted, ["signal_0", "signal_1"], FAST, order="sideways")


def _var1_panel(T=120):
    A = np.array([[0.9, -0.3], [0.3, 0.9]]) * 0.98 / np.hypot(0.9, 0.3)
    c = np.array([1.0, 2.0])
    Y = np.zeros((T, 2))
    Y[0] = [5.0, -3.0]
    for t in range(1, T):
        Y[t] = c + A @ Y[t - 1]
    Y = Y + 20.0
    return PanelDataset(
        region=np.array(["A"] * T, dtype=object),
        date=np.datetime64("2020-01-01") + np.arange(T),
        columns=(ColumnMeta("s", "other", "percent"), ColumnMeta("y", "target", "percent")),
        values=Y,
        target="y",
    )


class TestBacktest:
    def test_noiseless_var(self):
        res = forecast_backtest(_var1_panel(), "A", ["s"], "var", horizon=30)
        assert res.mre < 1e-6
        assert res.forecast.shape == (30, 2) and len(res.dates) == 30

    def test_horizon_zero(self, planted):
        res = forecast_backtest(planted, "R0", ["signal_0"], "var", horizon=0)
        assert res.horizon == 0 and not res.metrics_defined and res.mre is None

    def test_deterministic(self, planted):
        a = forecast_backtest(planted, "R1", ["signal_0"], "var")
        b = forecast_backtest(planted, "R1", ["signal_0"], "var")
        assert a.to_dict() == b.to_dict()

    def test_lstm_same_schema(self, planted):
        from sympcast.tseries import LstmConfig

        cfg = LstmConfig(hidden=4, epochs=5)
        a = forecast_backtest(planted, "R1", ["signal_0"], "lstm", lstm_config=cfg).to_dict()
        b = forecast_backtest(planted, "R1", ["signal_0"], "var").to_dict()
        assert a.keys() == b.keys() and len(a["per_step"]) == 30

    def test_percent_forecasts_clipped(self):
        ds = _var1_panel()
        res = forecast_backtest(ds, "A", ["s"], "var", horizon=30)
        assert np.all((res.target_forecast >= 0) & (res.target_forecast <= 100))

    def test_non_stationary_warning(self):
        T = 150
        walk = np.cumsum(np.random.default_rng(0).normal(size=T)) + 50
        noise = np.random.default_rng(1).normal(size=T) + 50
        ds = PanelDataset(
            region=np.array(["A"] * T, dtype=object),
            date=np.datetime64("2020-01-01") + np.arange(T),
            columns=(ColumnMeta("s", "other", "percent"), ColumnMeta("y", "target", "percent")),
            values=np.column_stack([noise, walk]),
            target="y",
        )
        res = forecast_backtest(ds, "A", ["s"], "var")
        assert any("not stationary" in w for w in res.warnings)

    def test_unknown_model(self, planted):
        with pytest.raises(ValidationError):
            forecast_backtest(planted, "R0", [], "arima")
