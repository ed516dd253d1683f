"""The income predictor: a fully connected net with two 200-unit relu
hidden layers and a sigmoid output, trained with Adam on sigmoid
cross-entropy. All arithmetic is float64 and every run is deterministic
given its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np
from scipy.special import expit

from . import backends
from .data import Dataset

DEFAULT_LAYERS = (5, 200, 200, 1)

# Distinct RNG stream tags so init and shuffle draws never alias.
_SHUFFLE_STREAM = 1


class TrainingDiverged(RuntimeError):
    """Raised when a non-finite loss shows up mid-training."""


@dataclass(frozen=True)
class MlpParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    @property
    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.W1, self.b1, self.W2, self.b2, self.W3, self.b3)

    @classmethod
    def from_arrays(cls, arrays) -> "MlpParams":
        return cls(*arrays)

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays])

    def unflatten(self, flat: np.ndarray) -> "MlpParams":
        out, pos = [], 0
        for a in self.arrays:
            out.append(flat[pos:pos + a.size].reshape(a.shape).copy())
            pos += a.size
        return MlpParams.from_arrays(out)


@dataclass(frozen=True)
class AdamState:
    m: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    t: int = 0

    @classmethod
    def zeros_like(cls, p: MlpParams) -> "AdamState":
        return cls(
            m=tuple(np.zeros_like(a) for a in p.arrays),
            v=tuple(np.zeros_like(a) for a in p.arrays),
            t=0,
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 128
    learning_rate: float = 0.001
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_params(seed: int, layers: tuple[int, ...] = DEFAULT_LAYERS) -> MlpParams:
    """Fan-in-scaled normal weights (variance 2/fan_in, the relu-friendly
    choice), zero biases."""
    rng = np.random.default_rng(seed)
    arrays = []
    for fan_in, fan_out in zip(layers[:-1], layers[1:]):
        arrays.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        arrays.append(np.zeros(fan_out))
    return MlpParams.from_arrays(arrays)


def forward(p: MlpParams, X: np.ndarray) -> np.ndarray:
    """Per-row output logits."""
    _, _, z = backends.active().mlp_forward(*p.arrays, np.ascontiguousarray(X))
    return z


def predict_proba(p: MlpParams, X: np.ndarray) -> np.ndarray:
    return expit(forward(p, X))


def bce_loss(z: np.ndarray, y: np.ndarray) -> float:
    """Sigmoid cross-entropy in the stable logit form."""
    return float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))


def loss_and_grad(p: MlpParams, X: np.ndarray, y: np.ndarray):
    """Mean sigmoid cross-entropy and its exact analytic gradients."""
    kern = backends.active()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    H1, H2, z = kern.mlp_forward(*p.arrays, X)
    loss = bce_loss(z, y)
    dz = (expit(z) - y) / len(y)
    grads = kern.mlp_backward(p.W2, p.W3, X, H1, H2, dz)
    return loss, MlpParams.from_arrays(grads)


def adam_step(p: MlpParams, state: AdamState, grads: MlpParams,
              cfg: TrainConfig) -> tuple[MlpParams, AdamState]:
    kern = backends.active()
    t = state.t + 1
    new_p, new_m, new_v = [], [], []
    for pa, ga, ma, va in zip(p.arrays, grads.arrays, state.m, state.v):
        pn, mn, vn = kern.adam_update(pa, ga, ma, va, t, cfg.learning_rate,
                                      cfg.beta1, cfg.beta2, cfg.eps)
        new_p.append(pn)
        new_m.append(mn)
        new_v.append(vn)
    return MlpParams.from_arrays(new_p), AdamState(tuple(new_m), tuple(new_v), t)


def minibatches(n: int, batch_size: int, epochs: int, rng) -> Iterator[np.ndarray]:
    """Seeded epoch shuffles; the last partial batch is kept."""
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield order[start:start + batch_size]


def train_baseline(train: Dataset, cfg: TrainConfig) -> MlpParams:
    """Plain Adam training for exactly epochs * ceil(n/batch) steps."""
    params = init_params(cfg.seed)
    state = AdamState.zeros_like(params)
    rng = np.random.default_rng([cfg.seed, _SHUFFLE_STREAM])
    X, y = train.features, train.labels
    for idx in minibatches(train.n, cfg.batch_size, cfg.epochs, rng):
        loss, grads = loss_and_grad(params, X[idx], y[idx])
        if not np.isfinite(loss):
            raise TrainingDiverged(f"non-finite loss at step {state.t + 1}")
        params, state = adam_step(params, state, grads, cfg)
    return params
