"""In-processing adversarial debiasing.

A scalar logistic adversary tries to recover sex from the predictor's
output logit. Each batch the adversary takes a plain Adam step, then the
predictor steps along

    grad_Lp - proj_{grad_La}(grad_Lp) - alpha * grad_La

over its flattened parameters: the projection removes the component of
the task gradient that would help the adversary, and the last term
actively raises the adversary's loss. An ``add`` projection mode (the
sign flipped on the middle term) is kept for comparison experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import backends
from .data import Dataset
from .nn import (
    _SHUFFLE_STREAM,
    AdamState,
    MlpParams,
    TrainConfig,
    TrainingDiverged,
    adam_step,
    bce_loss,
    init_params,
    minibatches,
)

PROJECTION_EPS = 1e-12


@dataclass(frozen=True)
class AdversaryParams:
    """Weight and bias of the logistic unit mapping logit -> P(male)."""

    u: float = 0.0
    c: float = 0.0


@dataclass(frozen=True)
class AdvConfig(TrainConfig):
    alpha: float = 1.0
    adversary_lr: float = 0.05
    projection_mode: str = "subtract"  # or "add", the sign as printed
    freeze_adversary: bool = False

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be non-negative")
        if self.projection_mode not in ("subtract", "add"):
            raise ValueError(f"unknown projection mode: {self.projection_mode!r}")


def project(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Projection of h onto g; the zero vector when g is (numerically) zero."""
    norm = np.linalg.norm(g)
    if norm < PROJECTION_EPS:
        return np.zeros_like(h)
    return (h @ g / (norm * norm)) * g


def combine_gradients(gp: np.ndarray, ga: np.ndarray, alpha: float,
                      mode: str = "subtract") -> np.ndarray:
    """Assemble the debiased update direction from the flattened task
    gradient gp and adversary gradient ga."""
    proj = project(gp, ga)
    if mode == "subtract":
        return gp - proj - alpha * ga
    return gp + proj - alpha * ga


def adversary_gradient(adv: np.ndarray, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Gradient of the adversary's sigmoid cross-entropy w.r.t. (u, c)."""
    ds = (expit(adv[0] * z + adv[1]) - a) / len(a)
    return np.array([ds @ z, ds.sum()])


def adversary_step(adv, m, v, t, z, a, cfg: AdvConfig):
    """One Adam step of the (u, c) adversary on a batch of predictor
    logits z and protected labels a."""
    g = adversary_gradient(adv, z, a)
    t += 1
    adv, m, v = backends.active().adam_update(
        adv, g, m, v, t, cfg.adversary_lr, cfg.beta1, cfg.beta2, cfg.eps)
    return adv, m, v, t


def adversarial_train(train: Dataset, cfg: AdvConfig) -> MlpParams:
    """Co-train predictor and adversary; deterministic given cfg.seed.

    The adversary starts at zero and updates first each batch; the
    predictor's combined gradient then uses the freshly updated
    adversary.
    """
    kern = backends.active()
    params = init_params(cfg.seed)
    state = AdamState.zeros_like(params)
    adv = np.zeros(2)  # (u, c)
    adv_m, adv_v = np.zeros(2), np.zeros(2)
    adv_t = 0
    rng = np.random.default_rng([cfg.seed, _SHUFFLE_STREAM])
    X, y, a = train.features, train.labels, train.protected
    for idx in minibatches(train.n, cfg.batch_size, cfg.epochs, rng):
        Xb = X[idx]
        yb = y[idx].astype(np.float64)
        ab = a[idx].astype(np.float64)
        nb = len(idx)

        H1, H2, z = kern.mlp_forward(*params.arrays, Xb)
        loss_p = bce_loss(z, yb)
        if not np.isfinite(loss_p):
            raise TrainingDiverged(f"non-finite predictor loss at step {state.t + 1}")

        if not cfg.freeze_adversary:
            adv, adv_m, adv_v, adv_t = adversary_step(
                adv, adv_m, adv_v, adv_t, z, ab, cfg)

        dz_p = (expit(z) - yb) / nb
        grads_p = kern.mlp_backward(params.W2, params.W3, Xb, H1, H2, dz_p)
        s = adv[0] * z + adv[1]
        dz_a = ((expit(s) - ab) / nb) * adv[0]
        grads_a = kern.mlp_backward(params.W2, params.W3, Xb, H1, H2, dz_a)

        gp = np.concatenate([g.ravel() for g in grads_p])
        ga = np.concatenate([g.ravel() for g in grads_a])
        combined = params.unflatten(combine_gradients(gp, ga, cfg.alpha,
                                                      cfg.projection_mode))
        params, state = adam_step(params, state, combined, cfg)
    return params
