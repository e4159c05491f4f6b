"""Single-layer LSTM forecaster trained with full-batch Adam and exact BPTT.

Gate pre-activations are stacked as ``[input, forget, cell, output]`` along
the first axis of ``W_x`` (4H x k), ``W_h`` (4H x H) and ``b`` (4H).  A linear
head ``V`` (k x H), ``d`` (k) maps the final hidden state to the next row.
Everything runs on min-max normalised data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientHistory, NonFiniteLoss, SeriesTooShort, ValidationError

PARAM_NAMES = ("W_x", "W_h", "b", "V", "d")


@dataclass(frozen=True)
class LstmConfig:
    hidden: int = 32
    window: int = 14
    epochs: int = 500
    step_size: float = 1e-2
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.hidden < 1 or self.window < 1 or self.epochs < 0:
            raise ValidationError("hidden and window must be positive, epochs nonnegative")
        if self.step_size <= 0:
            raise ValidationError("step_size must be positive")


@dataclass(frozen=True, eq=False)
class LstmModel:
    config: LstmConfig
    k: int
    params: dict
    data_min: np.ndarray
    data_scale: np.ndarray
    adam_m: dict = field(default_factory=dict)
    adam_v: dict = field(default_factory=dict)
    loss_history: tuple[float, ...] = ()

    @property
    def hidden(self) -> int:
        return self.config.hidden

    @property
    def window(self) -> int:
        return self.config.window

    def normalize(self, Y):
        return (np.asarray(Y, dtype=float) - self.data_min) / self.data_scale

    def denormalize(self, Z):
        return np.asarray(Z, dtype=float) * self.data_scale + self.data_min


def init_params(k: int, hidden: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(hidden)
    u = lambda *shape: rng.uniform(-bound, bound, size=shape)  # noqa: E731
    params = {
        "W_x": u(4 * hidden, k),
        "W_h": u(4 * hidden, hidden),
        "b": u(4 * hidden),
        "V": u(k, hidden),
        "d": u(k),
    }
    params["b"][hidden : 2 * hidden] += 1.0
    return params


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def make_windows(Z: np.ndarray, window: int):
    """Sliding windows ``(N, W, k)`` and their next rows ``(N, k)``."""
    T = len(Z)
    n = T - window
    idx = np.arange(window)[None, :] + np.arange(n)[:, None]
    return Z[idx], Z[window:]


def forward(params, X):
    """Run the cell over ``X`` (N, W, k); return predictions and the tape."""
    N, W, _ = X.shape
    H = params["W_h"].shape[1]
    h = np.zeros((N, H))
    c = np.zeros((N, H))
    tape = []
    for s in range(W):
        z = X[:, s] @ params["W_x"].T + h @ params["W_h"].T + params["b"]
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c_prev, h_prev = c, h
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        tape.append((h_prev, c_prev, i, f, g, o, tc))
    pred = h @ params["V"].T + params["d"]
    return pred, h, tape


def loss_and_grad(params, X, Y):
    """Mean squared error over all windows and features, with its gradient."""
    N, W, _ = X.shape
    pred, h_last, tape = forward(params, X)
    err = pred - Y
    loss = float(np.mean(err * err))
    dpred = 2.0 * err / err.size
    grads = {name: np.zeros_like(v) for name, v in params.items()}
    grads["V"] = dpred.T @ h_last
    grads["d"] = dpred.sum(axis=0)
    dh = dpred @ params["V"]
    dc = np.zeros_like(dh)
    W_h = params["W_h"]
    for s in range(W - 1, -1, -1):
        h_prev, c_prev, i, f, g, o, tc = tape[s]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dc * i * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        grads["W_x"] += dz.T @ X[:, s]
        grads["W_h"] += dz.T @ h_prev
        grads["b"] += dz.sum(axis=0)
        dh = dz @ W_h
        dc = dc * f
    return loss, grads


def _min_max(Y):
    lo = Y.min(axis=0)
    span = Y.max(axis=0) - lo
    return lo, np.where(span > 0, span, 1.0)


def lstm_fit(Y, config: LstmConfig | None = None) -> LstmModel:
    config = config or LstmConfig()
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    T, k = Y.shape
    if T <= config.window + 1:
        raise SeriesTooShort(f"need more than window + 1 = {config.window + 1} rows, have {T}")
    if not np.isfinite(Y).all():
        raise ValidationError("LSTM input contains missing or infinite values")
    lo, scale = _min_max(Y)
    X, target = make_windows((Y - lo) / scale, config.window)

    params = init_params(k, config.hidden, config.seed)
    m = {name: np.zeros_like(v) for name, v in params.items()}
    v = {name: np.zeros_like(p) for name, p in params.items()}
    history = []
    b1, b2 = config.beta1, config.beta2
    for epoch in range(1, config.epochs + 1):
        loss, grads = loss_and_grad(params, X, target)
        if not math.isfinite(loss):
            raise NonFiniteLoss(f"loss became non-finite at epoch {epoch}", epoch=epoch)
        history.append(loss)
        corr1 = 1.0 - b1**epoch
        corr2 = 1.0 - b2**epoch
        for name in PARAM_NAMES:
            gr = grads[name]
            m[name] = b1 * m[name] + (1.0 - b1) * gr
            v[name] = b2 * v[name] + (1.0 - b2) * gr * gr
            params[name] = params[name] - config.step_size * (m[name] / corr1) / (
                np.sqrt(v[name] / corr2) + config.eps
            )
    return LstmModel(config, k, params, lo, scale, m, v, tuple(history))


def lstm_rollout(model: LstmModel, history, h: int) -> np.ndarray:
    """Recursive ``h``-step forecast in normalised space, returned denormalised."""
    history = np.asarray(history, dtype=float)
    if history.ndim == 1:
        history = history[:, None]
    if h < 0:
        raise ValidationError("horizon must be nonnegative")
    W = model.window
    if len(history) < W:
        raise InsufficientHistory(f"need {W} history rows, have {len(history)}")
    buf = model.normalize(history[-W:])
    out = np.empty((h, model.k))
    for s in range(h):
        pred, _, _ = forward(model.params, buf[None])
        out[s] = pred[0]
        buf = np.vstack([buf[1:], pred])
    return model.denormalize(out)
