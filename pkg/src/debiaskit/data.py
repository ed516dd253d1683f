"""Loading, cleaning, splitting and normalizing the UCI Adult census data.

Only five numeric columns are used (age, education-num, capital-gain,
capital-loss, hours-per-week); income is the binary label and sex the
binary protected attribute. Sex is never a model input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

FEATURE_NAMES = (
    "age",
    "education-num",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
)

# Column positions in the 15-field UCI Adult record.
_COL_AGE = 0
_COL_EDUNUM = 4
_COL_SEX = 9
_COL_CAPGAIN = 10
_COL_CAPLOSS = 11
_COL_HOURS = 12
_COL_INCOME = 14
_USED_COLUMNS = (_COL_AGE, _COL_EDUNUM, _COL_SEX, _COL_CAPGAIN,
                 _COL_CAPLOSS, _COL_HOURS, _COL_INCOME)

MALE = 1
FEMALE = 0


class DataError(ValueError):
    """Malformed input file or invalid dataset construction."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus binary labels and binary protected attribute.

    ``labels`` is 1 for income >50K; ``protected`` is 1 for male (the
    privileged group) and 0 for female.
    """

    features: np.ndarray
    labels: np.ndarray
    protected: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        n = self.features.shape[0]
        if n == 0:
            raise DataError("dataset is empty")
        if self.labels.shape != (n,) or self.protected.shape != (n,):
            raise DataError("features, labels and protected disagree on row count")
        for name, vec in (("labels", self.labels), ("protected", self.protected)):
            if not np.isin(vec, (0, 1)).all():
                raise DataError(f"{name} must be 0/1")
        if not (self.protected == FEMALE).any() or not (self.protected == MALE).any():
            raise DataError("both protected groups must be non-empty")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def take(self, idx: np.ndarray) -> "Dataset":
        return Dataset(
            features=np.ascontiguousarray(self.features[idx]),
            labels=self.labels[idx].copy(),
            protected=self.protected[idx].copy(),
            feature_names=self.feature_names,
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        return Dataset(
            features=np.ascontiguousarray(features, dtype=np.float64),
            labels=self.labels,
            protected=self.protected,
            feature_names=self.feature_names,
        )

    def group_mask(self, group: int) -> np.ndarray:
        return self.protected == group


@dataclass(frozen=True)
class Splits:
    train: Dataset
    test: Dataset
    validation: Dataset
    seed: int


@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-scoring statistics fit on a training split."""

    mean: np.ndarray
    std: np.ndarray


def _parse_sex(token: str) -> int:
    if token == "Male":
        return MALE
    if token == "Female":
        return FEMALE
    raise DataError(f"unrecognized sex token: {token!r}")


def _parse_income(token: str) -> int:
    token = token.rstrip(".")
    if token == ">50K":
        return 1
    if token == "<=50K":
        return 0
    raise DataError(f"unrecognized income token: {token!r}")


def load_adult(paths: Sequence[str | Path]) -> Dataset:
    """Parse one or more UCI Adult files into a single Dataset.

    Accepts the raw comma-separated 15-field format: fields may carry one
    leading space, the test file may start with a '|'-prefixed sentinel
    line, and its income labels may carry a trailing period. Rows with a
    missing marker '?' in any used column are dropped.
    """
    feats, labels, protected = [], [], []
    for path in paths:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 15:
                raise DataError(
                    f"{path}:{lineno}: expected 15 fields, got {len(fields)}"
                )
            if any(fields[c] == "?" for c in _USED_COLUMNS):
                continue
            try:
                row = [float(fields[c]) for c in
                       (_COL_AGE, _COL_EDUNUM, _COL_CAPGAIN, _COL_CAPLOSS, _COL_HOURS)]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
            feats.append(row)
            protected.append(_parse_sex(fields[_COL_SEX]))
            labels.append(_parse_income(fields[_COL_INCOME]))
    if not feats:
        raise DataError("no usable rows found")
    return Dataset(
        features=np.array(feats, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        protected=np.array(protected, dtype=np.int64),
    )


def split(d: Dataset, seed: int) -> Splits:
    """Seeded 70/15/15 split into train/test/validation.

    Test and validation each get floor(0.15 n) rows; train gets the
    remainder, so sizes are always within one row of the exact
    proportions.
    """
    n = d.n
    if n < 20:
        raise DataError(f"need at least 20 rows to split, got {n}")
    n_test = math.floor(0.15 * n)
    n_val = math.floor(0.15 * n)
    n_train = n - n_test - n_val
    perm = np.random.default_rng(seed).permutation(n)
    return Splits(
        train=d.take(perm[:n_train]),
        test=d.take(perm[n_train:n_train + n_test]),
        validation=d.take(perm[n_train + n_test:]),
        seed=seed,
    )


def fit_normalizer(train: Dataset) -> Normalizer:
    """Population-form (n-denominator) mean/std per feature; constant
    columns fall back to std 1 so normalization is always defined."""
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    return Normalizer(mean=mean, std=std)


def apply_normalizer(nz: Normalizer, d: Dataset) -> Dataset:
    return d.with_features((d.features - nz.mean) / nz.std)
