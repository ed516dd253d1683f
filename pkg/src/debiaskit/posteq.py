"""Post-processing calibrated equalized odds.

Fits on a validation split: whichever group has the lower generalized
cost gets a fraction of its scores replaced, independently at random, by
that group's base rate, so that the expected mixed cost matches the
other group's. The default cost is the generalized false-negative rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FEMALE, MALE

COST_MODES = ("fnr", "fpr", "weighted")
DEFAULT_WEIGHT = 0.5  # fnr share in the weighted mode

_GROUP_NAMES = {FEMALE: "female", MALE: "male"}

# Stream tag separating the suppression draw from other per-seed streams.
_MIX_STREAM = 3


class PostEqError(ValueError):
    pass


@dataclass(frozen=True)
class CalEqAdjustment:
    target_group: int  # group whose scores get mixed
    mixing_rate: float
    base_rate: float
    cost_mode: str = "fnr"

    def __post_init__(self):
        if not 0.0 <= self.mixing_rate <= 1.0:
            raise PostEqError("mixing_rate must be in [0,1]")
        if not 0.0 <= self.base_rate <= 1.0:
            raise PostEqError("base_rate must be in [0,1]")

    @property
    def target_name(self) -> str:
        return _GROUP_NAMES[self.target_group]


def generalized_cost(scores: np.ndarray, labels: np.ndarray, mode: str = "fnr",
                     weight: float = DEFAULT_WEIGHT) -> float:
    """Expected error cost of probabilistic scores against binary labels.

    fnr: mean(1 - score) over positives; fpr: mean(score) over negatives;
    weighted: weight * fnr + (1 - weight) * fpr.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if mode == "weighted":
        return (weight * generalized_cost(scores, labels, "fnr")
                + (1.0 - weight) * generalized_cost(scores, labels, "fpr"))
    if mode == "fnr":
        pos = labels == 1
        if not pos.any():
            raise PostEqError("fnr cost needs at least one positive label")
        return float(np.mean(1.0 - scores[pos]))
    if mode == "fpr":
        neg = labels == 0
        if not neg.any():
            raise PostEqError("fpr cost needs at least one negative label")
        return float(np.mean(scores[neg]))
    raise PostEqError(f"unknown cost mode: {mode!r}")


def trivial_cost(base_rate: float, labels: np.ndarray, mode: str = "fnr",
                 weight: float = DEFAULT_WEIGHT) -> float:
    """Cost of the constant base-rate predictor on the same labels."""
    const = np.full(len(labels), base_rate)
    return generalized_cost(const, labels, mode, weight)


def fit_caleq(val_scores: np.ndarray, val_labels: np.ndarray,
              val_protected: np.ndarray, mode: str = "fnr") -> CalEqAdjustment:
    """Solve for the mixing rate that equalizes the generalized cost.

    The lower-cost group is mixed toward its validation base rate; the
    rate solving (1-r) c_target + r c_trivial = c_other is clamped to
    [0,1] when the trivial predictor cannot reach parity.
    """
    costs, base_rates, labels_by_group = {}, {}, {}
    for group in (FEMALE, MALE):
        mask = np.asarray(val_protected) == group
        if not mask.any():
            raise PostEqError(f"group {group} is empty on validation")
        labels = np.asarray(val_labels)[mask]
        costs[group] = generalized_cost(np.asarray(val_scores)[mask], labels, mode)
        base_rates[group] = float(np.mean(labels == 1))
        labels_by_group[group] = labels

    if costs[FEMALE] == costs[MALE]:
        return CalEqAdjustment(target_group=FEMALE, mixing_rate=0.0,
                               base_rate=base_rates[FEMALE], cost_mode=mode)
    target = FEMALE if costs[FEMALE] < costs[MALE] else MALE
    other = MALE if target == FEMALE else FEMALE
    c_target, c_other = costs[target], costs[other]
    c_trivial = trivial_cost(base_rates[target], labels_by_group[target], mode)
    if c_trivial == c_target:
        rate = 0.0
    else:
        rate = float(np.clip((c_other - c_target) / (c_trivial - c_target), 0.0, 1.0))
    return CalEqAdjustment(target_group=target, mixing_rate=rate,
                           base_rate=base_rates[target], cost_mode=mode)


def apply_caleq(adj: CalEqAdjustment, scores: np.ndarray, protected: np.ndarray,
                seed: int) -> np.ndarray:
    """Per-row independent Bernoulli(mixing_rate) suppression of the
    target group's scores to the base rate; the other group is returned
    untouched."""
    scores = np.asarray(scores, dtype=np.float64)
    out = scores.copy()
    draws = np.random.default_rng([seed, _MIX_STREAM]).random(len(scores))
    mask = (np.asarray(protected) == adj.target_group) & (draws < adj.mixing_rate)
    out[mask] = adj.base_rate
    return out
