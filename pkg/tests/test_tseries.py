import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from statsmodels.tsa.api import VAR
from statsmodels.tsa.stattools import adfuller

from sympcast.errors import (
    ConstantSeries,
    InsufficientHistory,
    NonFiniteLoss,
    SeriesTooShort,
    SingularDesign,
    ValidationError,
)
from sympcast.tseries import (
    ForecastResult,
    LstmConfig,
    adf_test,
    lstm_fit,
    lstm_rollout,
    schwert_max_lag,
    var_fit,
    var_forecast,
    var_rollout,
)
from sympcast.tseries.lstm import PARAM_NAMES, init_params, loss_and_grad, make_windows
from sympcast.tseries.var import VarModel

# seeds documented for the white-noise / random-walk discrimination check
ADF_SEEDS = range(10)


def simulate_var(coefs, T, seed, c=None, noise=0.0, y0=None):
    rng = np.random.default_rng(seed)
    p, k, _ = coefs.shape
    c = np.zeros(k) if c is None else c
    Y = np.zeros((T, k))
    Y[:p] = rng.normal(size=(p, k)) if y0 is None else y0
    for t in range(p, T):
        Y[t] = c + sum(coefs[i] @ Y[t - 1 - i] for i in range(p)) + noise * rng.normal(size=k)
    return Y


class TestAdf:
    def test_white_noise_rejects(self):
        for s in ADF_SEEDS:
            e = np.random.default_rng(s).normal(size=500)
            assert adf_test(e).reject_at_5pct

    def test_random_walk_fails_to_reject(self):
        for s in ADF_SEEDS:
            e = np.random.default_rng(s).normal(size=500)
            assert not adf_test(np.cumsum(e)).reject_at_5pct

    @pytest.mark.parametrize("seed", [0, 3, 7])
    @pytest.mark.parametrize("kind", ["noise", "walk", "ar"])
    def test_statsmodels_oracle(self, seed, kind):
        rng = np.random.default_rng(seed)
        e = rng.normal(size=300)
        y = {"noise": e, "walk": np.cumsum(e), "ar": np.convolve(e, 0.8 ** np.arange(30))[:300]}[kind]
        r = adf_test(y)
        ref = adfuller(y, maxlag=r.max_lag, regression="c", autolag="AIC")
        assert_allclose(r.statistic, ref[0], rtol=1e-8)
        assert r.lags_used == ref[2]
        assert r.n_effective == ref[3]

    def test_schwert(self):
        assert schwert_max_lag(100) == 12
        assert schwert_max_lag(500) == 17

    def test_constant(self):
        with pytest.raises(ConstantSeries):
            adf_test(np.full(100, 3.0))

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            adf_test(np.arange(10.0) ** 2)


class TestVar:
    A1 = np.array([[[0.5, 0.0], [0.0, 0.3]]])

    def test_noiseless_recovery(self):
        Y = simulate_var(self.A1, 50, 0, y0=np.array([[1.0, 2.0]]))
        m = var_fit(Y)
        assert m.p == 1
        assert_allclose(m.coefs[0], self.A1[0], atol=1e-8)
        assert np.all(np.abs(m.intercept) < 1e-8)

    def test_aic_selects_true_lag_noiseless_var2(self):
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            A = np.stack([np.diag(rng.uniform(0.2, 0.4, 2)), np.diag(rng.uniform(-0.3, -0.1, 2))])
            A[0, 0, 1] = 0.1
            Y = simulate_var(A, 120, seed, c=np.array([1.0, -0.5]))
            m = var_fit(Y)
            assert m.p == 2

    def test_statsmodels_oracle(self):
        A = np.array([[[0.4, 0.1], [-0.2, 0.5]], [[0.1, 0.0], [0.05, -0.2]]])
        Y = simulate_var(A, 300, 1, c=np.array([0.3, 1.0]), noise=1.0)
        m = var_fit(Y, p_max=5)
        ref = VAR(Y).fit(maxlags=5, ic="aic", trend="c")
        assert m.p == ref.k_ar
        assert_allclose(m.coefs, ref.coefs, rtol=1e-8, atol=1e-12)
        assert_allclose(m.intercept, ref.intercept, rtol=1e-8)

    def test_forecast_converges_to_implied_mean(self):
        A = np.array([[[0.6, 0.2], [0.1, 0.5]]])
        c = np.array([1.0, 2.0])
        Y = simulate_var(A, 200, 2, c=c, noise=0.5)
        m = var_fit(Y, p_max=3)
        far = var_rollout(m, Y, 400)[-1]
        assert_allclose(far, m.implied_mean(), atol=1e-6)

    def test_identical_columns_singular(self):
        x = np.random.default_rng(0).normal(size=100)
        with pytest.raises(SingularDesign) as exc:
            var_fit(np.column_stack([x, x]))
        assert exc.value.lag == 1

    def test_white_noise_small_coefficients(self):
        Y = np.random.default_rng(5).normal(size=(2000, 2))
        m = var_fit(Y, p_max=1)
        assert np.all(np.abs(m.coefs) < 0.1)

    def test_rollout_examples(self):
        m = VarModel(1, 2, np.zeros(2), self.A1.copy(), 0.0)
        assert_allclose(var_rollout(m, np.array([[4.0, 10.0]]), 1), [[2.0, 3.0]])
        assert var_rollout(m, np.array([[4.0, 10.0]]), 0).shape == (0, 2)
        c = np.array([1.5, -2.0])
        z = VarModel(2, 2, c, np.zeros((2, 2, 2)), 0.0)
        assert_array_equal(var_rollout(z, np.ones((5, 2)), 3), np.tile(c, (3, 1)))
        with pytest.raises(InsufficientHistory):
            var_rollout(z, np.ones((1, 2)), 3)

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            var_fit(np.random.default_rng(0).normal(size=(20, 3)), p_max=7)

    def test_forecast_result_wrapper(self):
        Y = simulate_var(self.A1, 50, 0, y0=np.array([[1.0, 2.0]]))
        r = var_forecast(var_fit(Y), Y, 4, target_index=1)
        assert isinstance(r, ForecastResult) and r.forecast.shape == (4, 2)
        assert r.target_forecast.shape == (4,)


def _relative_errors(analytic, numeric):
    return np.abs(analytic - numeric) / np.maximum(np.abs(analytic) + np.abs(numeric), 1e-7)


class TestLstm:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_gradient_check(self, seed):
        rng = np.random.default_rng(seed)
        params = init_params(2, 3, seed)
        X, Y = make_windows(rng.uniform(size=(12, 2)), 4)
        _, grads = loss_and_grad(params, X, Y)
        eps = 1e-5
        for name in PARAM_NAMES:
            num = np.zeros_like(params[name])
            it = np.nditer(params[name], flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = params[name][idx]
                params[name][idx] = orig + eps
                lp, _ = loss_and_grad(params, X, Y)
                params[name][idx] = orig - eps
                lm, _ = loss_and_grad(params, X, Y)
                params[name][idx] = orig
                num[idx] = (lp - lm) / (2 * eps)
            assert _relative_errors(grads[name], num).max() < 1e-4, name

    def test_init_scheme(self):
        p = init_params(3, 8, 0)
        bound = 1 / np.sqrt(8)
        assert np.abs(p["W_x"]).max() <= bound
        assert np.all(p["b"][8:16] >= 1 - bound) and np.all(p["b"][8:16] <= 1 + bound)

    def test_zero_epochs_is_init(self):
        Y = np.random.default_rng(0).normal(size=(30, 2))
        m = lstm_fit(Y, LstmConfig(hidden=4, window=5, epochs=0, seed=3))
        ref = init_params(2, 4, 3)
        for k in PARAM_NAMES:
            assert_array_equal(m.params[k], ref[k])

    def test_constant_series(self):
        Y = np.tile([3.0, 7.0], (60, 1))
        m = lstm_fit(Y, LstmConfig(hidden=8, window=5, epochs=300))
        X, T = make_windows(m.normalize(Y), 5)
        from sympcast.tseries.lstm import forward

        pred, _, _ = forward(m.params, X[:1])
        assert np.abs(pred - T[:1]).max() < 1e-3
        fc = lstm_rollout(m, Y, 5)
        assert fc.shape == (5, 2)
        assert np.abs(fc - Y[0]).max() < 1e-2

    def test_deterministic(self):
        Y = np.random.default_rng(2).normal(size=(40, 2)).cumsum(axis=0)
        cfg = LstmConfig(hidden=6, window=5, epochs=20)
        a = lstm_rollout(lstm_fit(Y, cfg), Y, 7)
        b = lstm_rollout(lstm_fit(Y, cfg), Y, 7)
        assert_array_equal(a, b)
        assert lstm_rollout(lstm_fit(Y, cfg), Y, 0).shape == (0, 2)

    def test_loss_decreases(self):
        Y = np.sin(np.arange(80) / 5.0)[:, None]
        m = lstm_fit(Y, LstmConfig(hidden=8, window=6, epochs=150))
        assert m.loss_history[-1] < 0.1 * m.loss_history[0]

    def test_divergence_reports_epoch(self, monkeypatch):
        from sympcast.tseries import lstm

        real = lstm.loss_and_grad
        calls = []

        def flaky(params, X, Y):
            calls.append(1)
            loss, grads = real(params, X, Y)
            return (np.nan if len(calls) == 3 else loss), grads

        monkeypatch.setattr(lstm, "loss_and_grad", flaky)
        Y = np.random.default_rng(0).normal(size=(30, 1))
        with pytest.raises(NonFiniteLoss) as exc:
            lstm_fit(Y, LstmConfig(hidden=2, window=3, epochs=5))
        assert exc.value.epoch == 3

    def test_non_finite_input(self):
        Y = np.random.default_rng(0).normal(size=(30, 1))
        Y[4] = np.inf
        with pytest.raises(ValidationError):
            lstm_fit(Y, LstmConfig(hidden=2, window=3, epochs=1))

    def test_errors(self):
        with pytest.raises(SeriesTooShort):
            lstm_fit(np.ones((10, 1)), LstmConfig(window=14))
        m = lstm_fit(np.random.default_rng(0).normal(size=(30, 1)), LstmConfig(hidden=2, window=5, epochs=1))
        with pytest.raises(InsufficientHistory):
            lstm_rollout(m, np.ones((3, 1)), 2)
