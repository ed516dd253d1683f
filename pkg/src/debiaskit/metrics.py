"""Group fairness metrics over (label, prediction, protected) triples.

All difference metrics are reported female-minus-male (unprivileged
minus privileged), so a model biased against women scores negative.
Metrics that lose their denominator are carried as an explicit None,
never as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import FEMALE, MALE, Dataset

FAIR_DIFF_BAND = (-0.1, 0.1)
FAIR_DI_MIN = 0.8


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class Rates:
    """Confusion counts and rates for one protected group."""

    count: int
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def base_rate(self) -> float:
        return (self.tp + self.fn) / self.count

    @property
    def selection_rate(self) -> float:
        return (self.tp + self.fp) / self.count

    @property
    def tpr(self) -> Optional[float]:
        pos = self.tp + self.fn
        return self.tp / pos if pos else None

    @property
    def fpr(self) -> Optional[float]:
        neg = self.tn + self.fp
        return self.fp / neg if neg else None


@dataclass(frozen=True)
class GroupRates:
    female: Rates
    male: Rates


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    spd: float
    eod: Optional[float]
    aod: Optional[float]
    di: Optional[float]
    rates: GroupRates

    @property
    def fair_spd(self) -> bool:
        return FAIR_DIFF_BAND[0] <= self.spd <= FAIR_DIFF_BAND[1]

    @property
    def fair_eod(self) -> Optional[bool]:
        if self.eod is None:
            return None
        return FAIR_DIFF_BAND[0] <= self.eod <= FAIR_DIFF_BAND[1]

    @property
    def fair_aod(self) -> Optional[bool]:
        if self.aod is None:
            return None
        return FAIR_DIFF_BAND[0] <= self.aod <= FAIR_DIFF_BAND[1]

    @property
    def fair_di(self) -> Optional[bool]:
        return None if self.di is None else self.di >= FAIR_DI_MIN


def _check_binary(name: str, v: np.ndarray):
    if not np.isin(v, (0, 1)).all():
        raise MetricsError(f"{name} must contain only 0/1")


def group_rates(y: np.ndarray, yhat: np.ndarray, a: np.ndarray) -> GroupRates:
    """Exact confusion counting per protected group."""
    y = np.asarray(y)
    yhat = np.asarray(yhat).astype(np.int64)
    a = np.asarray(a)
    if not (len(y) == len(yhat) == len(a)):
        raise MetricsError("length mismatch")
    for name, v in (("y", y), ("yhat", yhat), ("a", a)):
        _check_binary(name, v)
    out = {}
    for group in (FEMALE, MALE):
        mask = a == group
        if not mask.any():
            raise MetricsError(f"group {group} is empty")
        yg, pg = y[mask], yhat[mask]
        out[group] = Rates(
            count=int(mask.sum()),
            tn=int(((yg == 0) & (pg == 0)).sum()),
            fp=int(((yg == 0) & (pg == 1)).sum()),
            fn=int(((yg == 1) & (pg == 0)).sum()),
            tp=int(((yg == 1) & (pg == 1)).sum()),
        )
    return GroupRates(female=out[FEMALE], male=out[MALE])


def fairness_report(y: np.ndarray, yhat: np.ndarray, a: np.ndarray) -> MetricsReport:
    """Accuracy plus SPD, EOD, AOD and DI, female-minus-male."""
    rates = group_rates(y, yhat, a)
    f, m = rates.female, rates.male
    spd = f.selection_rate - m.selection_rate
    eod = None if f.tpr is None or m.tpr is None else f.tpr - m.tpr
    fpr_diff = None if f.fpr is None or m.fpr is None else f.fpr - m.fpr
    aod = None if eod is None or fpr_diff is None else 0.5 * (fpr_diff + eod)
    di = None if m.selection_rate == 0.0 else f.selection_rate / m.selection_rate
    accuracy = float(np.mean(np.asarray(y) == np.asarray(yhat)))
    return MetricsReport(accuracy=accuracy, spd=spd, eod=eod, aod=aod, di=di,
                         rates=rates)


def _train_logistic(X: np.ndarray, y: np.ndarray, seed: int, epochs: int = 50,
                    batch_size: int = 128, lr: float = 0.001):
    """Zero-hidden-layer counterpart of the main net: a single logistic
    unit trained with the same Adam kernel."""
    from scipy.special import expit

    from . import backends
    from .nn import _SHUFFLE_STREAM, minibatches

    kern = backends.active()
    n, d = X.shape
    w = np.zeros(d)
    b = np.zeros(1)
    mw, vw = np.zeros(d), np.zeros(d)
    mb, vb = np.zeros(1), np.zeros(1)
    t = 0
    rng = np.random.default_rng([seed, _SHUFFLE_STREAM])
    for idx in minibatches(n, batch_size, epochs, rng):
        Xb, yb = X[idx], y[idx]
        dz = (expit(Xb @ w + b[0]) - yb) / len(yb)
        gw = Xb.T @ dz
        gb = np.array([dz.sum()])
        t += 1
        w, mw, vw = kern.adam_update(w, gw, mw, vw, t, lr, 0.9, 0.999, 1e-8)
        b, mb, vb = kern.adam_update(b, gb, mb, vb, t, lr, 0.9, 0.999, 1e-8)
    return w, b[0]


def ber_protected(d: Dataset, seed: int) -> float:
    """Balanced error rate of a logistic probe predicting sex from the
    features on a held-out 30% of a seeded 70/30 split. 0.5 means the
    features carry no usable signal about sex."""
    from .data import Dataset as _DS
    from .data import apply_normalizer, fit_normalizer

    n = d.n
    perm = np.random.default_rng([seed, 2]).permutation(n)
    n_train = int(np.floor(0.7 * n))
    tr_idx, te_idx = perm[:n_train], perm[n_train:]
    a_train, a_test = d.protected[tr_idx], d.protected[te_idx]
    if len(np.unique(a_train)) < 2 or len(np.unique(a_test)) < 2:
        raise MetricsError("degenerate 70/30 split: one protected class absent")
    train_ds = d.take(tr_idx)
    nz = fit_normalizer(train_ds)
    X_train = apply_normalizer(nz, train_ds).features
    X_test = (d.features[te_idx] - nz.mean) / nz.std

    w, b = _train_logistic(X_train, a_train.astype(np.float64), seed)
    pred = (X_test @ w + b > 0.0).astype(np.int64)
    pos = a_test == 1
    fnr = float(np.mean(pred[pos] == 0))
    fpr = float(np.mean(pred[~pos] == 1))
    return 0.5 * (fpr + fnr)
