"""Pre-processing disparate impact remover.

Each feature value is moved from its own group's empirical distribution
toward the cross-group median distribution: a value at percentile u
within its group becomes (1-level) * Q_group(u) + level * Q_median(u).
Quantiles use midpoint plotting positions (i - 0.5)/m with linear
interpolation, which preserves within-group ordering for any repair
level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FEMALE, MALE, Dataset


class RepairError(ValueError):
    pass


@dataclass(frozen=True)
class QuantileFn:
    """Empirical quantile function of one feature within one group."""

    values: np.ndarray  # sorted ascending

    def __post_init__(self):
        if self.values.size == 0:
            raise RepairError("empty value list")

    @property
    def plotting_positions(self) -> np.ndarray:
        m = self.values.size
        return (np.arange(1, m + 1) - 0.5) / m

    def __call__(self, u) -> np.ndarray:
        """Quantile at u in [0,1]; clamps to min/max outside the
        outermost plotting positions."""
        return np.interp(u, self.plotting_positions, self.values)

    def rank(self, x) -> np.ndarray:
        """Inverse lookup: the percentile of x within the sample.

        Ties get the midpoint of their tied-rank range; values outside
        the sample range clamp to 0 or 1.
        """
        x = np.asarray(x, dtype=np.float64)
        m = self.values.size
        u = np.interp(x, self.values, self.plotting_positions,
                      left=0.0, right=1.0)
        lo = np.searchsorted(self.values, x, side="left")
        hi = np.searchsorted(self.values, x, side="right")
        tied = hi > lo
        u = np.where(tied, (lo + hi) / (2.0 * m), u)
        return u


@dataclass(frozen=True)
class RepairMap:
    """Per-feature, per-group quantile functions plus the repair level."""

    female: tuple[QuantileFn, ...]
    male: tuple[QuantileFn, ...]
    level: float

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise RepairError(f"repair level must be in [0,1], got {self.level}")

    def median_quantile(self, feature: int, u) -> np.ndarray:
        """Median (here: mean, there being two groups) of the group
        quantile functions at u."""
        return 0.5 * (self.female[feature](u) + self.male[feature](u))


def quantile(q: QuantileFn, u: float) -> float:
    return float(q(u))


def fit_repair(train: Dataset, level: float) -> RepairMap:
    """Build the per-group quantile functions from raw training features."""
    fem = train.group_mask(FEMALE)
    mal = train.group_mask(MALE)
    if not fem.any() or not mal.any():
        raise RepairError("both groups must be present in the training data")
    n_features = train.features.shape[1]
    female = tuple(QuantileFn(np.sort(train.features[fem, j]))
                   for j in range(n_features))
    male = tuple(QuantileFn(np.sort(train.features[mal, j]))
                 for j in range(n_features))
    return RepairMap(female=female, male=male, level=level)


def apply_repair(rmap: RepairMap, d: Dataset) -> Dataset:
    """Repair features only; labels and protected pass through untouched."""
    if len(rmap.female) != d.features.shape[1]:
        raise RepairError("repair map and dataset disagree on feature count")
    lam = rmap.level
    out = d.features.copy()
    for group, qfns in ((FEMALE, rmap.female), (MALE, rmap.male)):
        mask = d.group_mask(group)
        for j, qfn in enumerate(qfns):
            u = qfn.rank(d.features[mask, j])
            out[mask, j] = (1.0 - lam) * qfn(u) + lam * rmap.median_quantile(j, u)
    return d.with_features(out)
