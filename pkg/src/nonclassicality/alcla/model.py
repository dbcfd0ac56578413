"""Encoder, decoder, loss and reverse-mode gradients of the algebraic classifier.

Encoder for one state with samples ``x`` of shape ``(M, d_x)``::

    s1 = x
    si = x * (s_{i-1} @ K_i.T)          i = 2..L
    x^(i) = mean over samples of si

Decoder: ``f = sum_t theta_t * monomial_t(x^(1..L))`` and the output
``y = 1 - sigmoid(theta_amp * f)``, so ``y > 0.5`` (nonclassical) exactly
when ``f < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .basis import DecoderBasis

Y_CLAMP = 1e-7


@dataclass(frozen=True)
class AlClaConfig:
    d_x: int = 1
    L: int = 2
    lam: float = 0.0
    lam_K: float = 0.0
    epochs: int = 900
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    K_clip: tuple[float, float] = (-10.0, 10.0)
    theta_clip: tuple[float, float] = (-10.0, 10.0)
    amp_clip: tuple[float, float] = (1.0, 50.0)
    scheduler: str = "plateau"
    patience: int = 50
    min_lr: float = 1e-5
    upper_triangular_K: bool = False
    normalize_encoder: bool = True
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.L < 1 or self.d_x < 1:
            raise ValueError(f"need L >= 1 and d_x >= 1, got L={self.L}, d_x={self.d_x}")
        if self.lam < 0 or self.lam_K < 0:
            raise ValueError("regularization weights must be nonnegative")
        if self.scheduler not in ("plateau", "constant"):
            raise ValueError(f"scheduler must be 'plateau' or 'constant', got {self.scheduler!r}")
        for name in ("K_clip", "theta_clip", "amp_clip"):
            lo, hi = getattr(self, name)
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.amp_clip[0] <= 0:
            raise ValueError("amplification must stay positive")

    @property
    def basis(self) -> DecoderBasis:
        return DecoderBasis(self.d_x, self.L)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("K_clip", "theta_clip", "amp_clip"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "AlClaConfig":
        data = dict(data)
        for k in ("K_clip", "theta_clip", "amp_clip"):
            if k in data:
                data[k] = tuple(data[k])
        return cls(**data)


@dataclass
class AlClaParams:
    """``K[i]`` is the mixing matrix of encoder order ``i + 2``."""

    K: list[np.ndarray]
    theta: np.ndarray
    amp: float = 1.0

    def copy(self) -> "AlClaParams":
        return AlClaParams([k.copy() for k in self.K], self.theta.copy(), float(self.amp))

    @classmethod
    def zeros(cls, config: AlClaConfig) -> "AlClaParams":
        d = config.d_x
        return cls([np.zeros((d, d)) for _ in range(config.L - 1)], np.zeros(len(config.basis)), 1.0)

    @classmethod
    def initialize(cls, config: AlClaConfig, seed: int | np.random.Generator) -> "AlClaParams":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        d = config.d_x
        K = [rng.uniform(-0.5, 0.5, size=(d, d)) for _ in range(config.L - 1)]
        if config.upper_triangular_K:
            K = [np.triu(k) for k in K]
        theta = rng.uniform(-0.1, 0.1, size=len(config.basis))
        return cls(K, theta, 1.0)

    def check_shapes(self, config: AlClaConfig) -> None:
        if len(self.K) != config.L - 1:
            raise ValueError(f"expected {config.L - 1} encoder matrices, got {len(self.K)}")
        for k in self.K:
            if k.shape != (config.d_x, config.d_x):
                raise ValueError(f"encoder matrix shape {k.shape} != ({config.d_x}, {config.d_x})")
        if self.theta.shape != (len(config.basis),):
            raise ValueError(f"theta has {self.theta.size} entries, basis has {len(config.basis)}")

    def clip(self, config: AlClaConfig) -> None:
        for k in self.K:
            np.clip(k, *config.K_clip, out=k)
        np.clip(self.theta, *config.theta_clip, out=self.theta)
        self.amp = float(np.clip(self.amp, *config.amp_clip))

    def flat(self) -> np.ndarray:
        return np.concatenate([k.ravel() for k in self.K] + [self.theta, [self.amp]])

    def with_flat(self, vec: np.ndarray) -> "AlClaParams":
        out = self.copy()
        pos = 0
        for k in out.K:
            k[...] = vec[pos : pos + k.size].reshape(k.shape)
            pos += k.size
        out.theta[...] = vec[pos : pos + out.theta.size]
        out.amp = float(vec[-1])
        return out

    def to_dict(self) -> dict:
        return {"K": [k.tolist() for k in self.K], "theta": self.theta.tolist(), "theta_amplify": self.amp}

    @classmethod
    def from_dict(cls, data: dict) -> "AlClaParams":
        return cls([np.array(k, dtype=float) for k in data["K"]], np.array(data["theta"], dtype=float), float(data["theta_amplify"]))


@dataclass(frozen=True)
class Batch:
    """States stacked into ``(S, M_max, d_x)``; shorter states are padded
    with zero rows, which contribute nothing to any encoder sum."""

    x: np.ndarray
    counts: np.ndarray
    labels: np.ndarray

    @classmethod
    def from_samples(cls, states: Sequence) -> "Batch":
        if len(states) == 0:
            raise ValueError("empty dataset")
        arrays = [np.asarray(getattr(s, "samples", s), dtype=float) for s in states]
        arrays = [a[:, None] if a.ndim == 1 else a for a in arrays]
        d = arrays[0].shape[1]
        if any(a.shape[1] != d for a in arrays):
            raise ValueError("all states must have the same number of modes")
        m_max = max(a.shape[0] for a in arrays)
        x = np.zeros((len(arrays), m_max, d))
        for s, a in enumerate(arrays):
            x[s, : a.shape[0]] = a
        counts = np.array([a.shape[0] for a in arrays], dtype=float)
        labels = np.array([int(getattr(s, "label", 0)) for s in states], dtype=float)
        return cls(x, counts, labels)

    @property
    def d_x(self) -> int:
        return self.x.shape[2]

    def subset(self, idx) -> "Batch":
        idx = np.asarray(idx, dtype=int)
        return Batch(self.x[idx], self.counts[idx], self.labels[idx])


@dataclass
class Forward:
    layers: list[np.ndarray]  # s^(i), each (S, M, d)
    X: np.ndarray  # encoder outputs (S, L, d)
    f: np.ndarray
    y: np.ndarray


def _norm(batch: Batch, config: AlClaConfig) -> np.ndarray:
    return 1.0 / batch.counts if config.normalize_encoder else np.ones_like(batch.counts)


def encode(batch: Batch, params: AlClaParams, config: AlClaConfig) -> tuple[np.ndarray, list[np.ndarray]]:
    """Encoder outputs ``X[s, i-1, nu] = x^(i)_nu`` and the per-sample layers."""
    if batch.d_x != config.d_x:
        raise ValueError(f"samples have {batch.d_x} modes, model expects {config.d_x}")
    params.check_shapes(config)
    x = batch.x
    layers = [x]
    for K in params.K:
        layers.append(x * (layers[-1] @ K.T))
    w = _norm(batch, config)
    X = np.stack([s.sum(axis=1) for s in layers], axis=1) * w[:, None, None]
    return X, layers


def encoder_outputs(states, params: AlClaParams, config: AlClaConfig) -> np.ndarray:
    batch = states if isinstance(states, Batch) else Batch.from_samples(states)
    return encode(batch, params, config)[0]


def monomial_values(X: np.ndarray, config: AlClaConfig) -> np.ndarray:
    """``(S, T)`` values of every decoder monomial."""
    var, exp = config.basis.slots()
    flat = X.reshape(X.shape[0], -1)
    ext = np.concatenate([flat, np.ones((flat.shape[0], 1))], axis=1)
    return np.prod(ext[:, var] ** exp, axis=2)


def decode(X: np.ndarray, params: AlClaParams, config: AlClaConfig) -> np.ndarray:
    """Pre-sigmoid polynomial value ``f`` per state."""
    return monomial_values(X, config) @ params.theta


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Logistic function evaluated without overflow for any sign of ``z``."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def output(f: np.ndarray, amp: float) -> np.ndarray:
    # 1 - sigmoid(z) = sigmoid(-z)
    return sigmoid(-amp * np.asarray(f, dtype=float))


def forward(states, params: AlClaParams, config: AlClaConfig) -> Forward:
    batch = states if isinstance(states, Batch) else Batch.from_samples(states)
    X, layers = encode(batch, params, config)
    f = decode(X, params, config)
    return Forward(layers, X, f, output(f, params.amp))


def predict_labels(y: np.ndarray) -> np.ndarray:
    """Nonclassical (1) iff y > 0.5; the boundary counts as classical."""
    return (np.asarray(y) > 0.5).astype(int)


def predict(states, params: AlClaParams, config: AlClaConfig) -> np.ndarray:
    return predict_labels(forward(states, params, config).y)


def loss_terms(y: np.ndarray, target: np.ndarray, lam: float) -> np.ndarray:
    """Per-state cross entropy plus the false-positive penalty."""
    y = np.asarray(y, dtype=float)
    t = np.asarray(target, dtype=float)
    yc = np.clip(y, Y_CLAMP, 1.0 - Y_CLAMP)
    bce = -t * np.log(yc) - (1.0 - t) * np.log1p(-yc)
    return bce + lam * (1.0 - t) * np.abs(t - y)


def l1_penalty(params: AlClaParams) -> float:
    return float(sum(np.abs(k).sum() for k in params.K))


def loss(y, target, params: AlClaParams, config: AlClaConfig) -> float:
    """Batch mean of the per-state terms plus ``lam_K`` times the L1 norm of all K."""
    return float(np.mean(loss_terms(y, target, config.lam))) + config.lam_K * l1_penalty(params)


def _monomial_jacobian_apply(X: np.ndarray, g_f: np.ndarray, theta: np.ndarray, config: AlClaConfig) -> np.ndarray:
    """Accumulate ``sum_s g_f[s] * df_s/dX_s`` into an array shaped like X."""
    var, exp = config.basis.slots()
    S = X.shape[0]
    flat = X.reshape(S, -1)
    n = flat.shape[1]
    ext = np.concatenate([flat, np.ones((S, 1))], axis=1)
    base = ext[:, var]  # (S, T, 3)
    powered = base**exp
    g_ext = np.zeros((S, n + 1))
    for slot in range(var.shape[1]):
        others = np.prod(np.delete(powered, slot, axis=2), axis=2)
        deriv = exp[:, slot] * base[:, :, slot] ** (exp[:, slot] - 1) * others  # (S, T)
        contrib = deriv * theta[None, :] * g_f[:, None]
        np.add.at(g_ext.T, var[:, slot], contrib.T)
    return g_ext[:, :n].reshape(X.shape)


def loss_and_gradients(batch: Batch, params: AlClaParams, config: AlClaConfig) -> tuple[float, AlClaParams, Forward]:
    """Batch loss and its exact gradient, accumulated in reverse through
    sigmoid, decoder polynomial and encoder recursion."""
    fw = forward(batch, params, config)
    t = batch.labels
    S = t.size
    y, f = fw.y, fw.f
    value = loss(y, t, params, config)

    inside = (y >= Y_CLAMP) & (y <= 1.0 - Y_CLAMP)
    # d(bce)/dz with z = amp * f and y = sigmoid(-z) simplifies to t - y
    g_z = np.where(inside, t - y, 0.0)
    g_z = g_z + config.lam * (1.0 - t) * np.sign(y - t) * (-y * (1.0 - y))
    g_z /= S
    g_amp = float(np.sum(g_z * f))
    g_f = g_z * params.amp

    mono = monomial_values(fw.X, config)
    g_theta = mono.T @ g_f
    g_X = _monomial_jacobian_apply(fw.X, g_f, params.theta, config)

    w = _norm(batch, config)
    x = batch.x
    g_K = [np.zeros_like(k) for k in params.K]
    g_S = np.zeros_like(x)
    for i in range(config.L, 1, -1):
        # x^(i) = w * sum_alpha s_i
        g_S = g_S + (w[:, None] * g_X[:, i - 1, :])[:, None, :]
        g_P = g_S * x
        K = params.K[i - 2]
        prev = fw.layers[i - 2]
        g_K[i - 2] = np.einsum("sav,sae->ve", g_P, prev)
        g_S = g_P @ K
    for j, k in enumerate(params.K):
        g_K[j] = g_K[j] + config.lam_K * np.sign(k)
        if config.upper_triangular_K:
            g_K[j] = np.triu(g_K[j])
    return value, AlClaParams(g_K, g_theta, g_amp), fw


def gradients(states, params: AlClaParams, config: AlClaConfig) -> AlClaParams:
    batch = states if isinstance(states, Batch) else Batch.from_samples(states)
    return loss_and_gradients(batch, params, config)[1]


def batch_loss(states, params: AlClaParams, config: AlClaConfig) -> float:
    batch = states if isinstance(states, Batch) else Batch.from_samples(states)
    return loss(forward(batch, params, config).y, batch.labels, params, config)
