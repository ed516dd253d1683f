import numpy as np
import pytest

from debiaskit.data import (
    DataError,
    Dataset,
    apply_normalizer,
    fit_normalizer,
    load_adult,
    split,
)
from tests.conftest import ADULT_PATHS, make_dataset

ROW = ("39, Private, 77516, Bachelors, 13, Never-married, Adm-clerical,"
       " Not-in-family, White, {sex}, 2174, 0, 40, United-States, {income}")


def write_rows(path, rows):
    path.write_text("\n".join(rows) + "\n")
    return path


def row(sex="Male", income="<=50K"):
    return ROW.format(sex=sex, income=income)


def test_load_adult_full_corpus(adult):
    assert adult.n == 48842
    assert adult.features.shape == (48842, 5)
    assert adult.feature_names == ("age", "education-num", "capital-gain",
                                   "capital-loss", "hours-per-week")


def test_load_adult_idempotent(adult):
    again = load_adult(ADULT_PATHS)
    assert np.array_equal(adult.features, again.features)
    assert np.array_equal(adult.labels, again.labels)
    assert np.array_equal(adult.protected, again.protected)


def test_income_encoding_all_low(tmp_path):
    f = write_rows(tmp_path / "a.data",
                   [row(income="<=50K"), row(sex="Female", income="<=50K")])
    d = load_adult([f])
    assert (d.labels == 0).all()


def test_income_encoding_with_trailing_period(tmp_path):
    f = write_rows(tmp_path / "a.test", [
        row(income=">50K"),
        row(sex="Female", income="<=50K"),
        row(income=">50K."),
    ])
    d = load_adult([f])
    assert d.labels.tolist() == [1, 0, 1]


def test_sentinel_line_and_padding(tmp_path):
    f = write_rows(tmp_path / "a.test",
                   ["|1x3 Cross validator", row(), row(sex="Female")])
    d = load_adult([f])
    assert d.n == 2
    assert d.protected.tolist() == [1, 0]


def test_missing_marker_rows_dropped(tmp_path):
    bad = row().replace("40", "?")  # hours-per-week missing
    f = write_rows(tmp_path / "a.data", [row(), bad, row(sex="Female")])
    d = load_adult([f])
    assert d.n == 2


def test_load_errors(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_adult([tmp_path / "nope.data"])
    short = write_rows(tmp_path / "short.data", ["1, 2, 3", row(sex="Female")])
    with pytest.raises(DataError, match="expected 15 fields"):
        load_adult([short])
    badsex = write_rows(tmp_path / "badsex.data",
                        [row(sex="Unknown"), row(sex="Female")])
    with pytest.raises(DataError, match="sex token"):
        load_adult([badsex])
    badinc = write_rows(tmp_path / "badinc.data",
                        [row(income="50K+"), row(sex="Female")])
    with pytest.raises(DataError, match="income token"):
        load_adult([badinc])


def test_dataset_invariants():
    X = np.zeros((3, 5))
    with pytest.raises(DataError, match="0/1"):
        Dataset(features=X, labels=np.array([0, 1, 2]),
                protected=np.array([0, 1, 0]))
    with pytest.raises(DataError, match="non-empty"):
        Dataset(features=X, labels=np.array([0, 1, 0]),
                protected=np.array([1, 1, 1]))
    with pytest.raises(DataError, match="row count"):
        Dataset(features=X, labels=np.array([0, 1]),
                protected=np.array([0, 1, 0]))


def test_split_deterministic():
    d = make_dataset(100)
    s1, s2 = split(d, 7), split(d, 7)
    assert np.array_equal(s1.train.features, s2.train.features)
    assert np.array_equal(s1.test.labels, s2.test.labels)
    assert np.array_equal(s1.validation.protected, s2.validation.protected)


def test_split_sizes_exact():
    s = split(make_dataset(100), 0)
    assert (s.train.n, s.test.n, s.validation.n) == (70, 15, 15)
    s = split(make_dataset(101), 3)
    assert (s.train.n, s.test.n, s.validation.n) == (71, 15, 15)


def test_split_partitions_rows():
    d = make_dataset(97, seed=5)
    # tag each row with a unique value so we can recover indices
    d = d.with_features(np.column_stack([np.arange(97.0)] * 5))
    s = split(d, 11)
    seen = np.concatenate([s.train.features[:, 0], s.test.features[:, 0],
                           s.validation.features[:, 0]])
    assert sorted(seen.tolist()) == list(range(97))


def test_split_too_small():
    with pytest.raises(DataError, match="at least 20"):
        split(make_dataset(10), 0)


def test_normalizer_zero_mean_unit_std():
    d = make_dataset(500, seed=2)
    out = apply_normalizer(fit_normalizer(d), d)
    assert np.allclose(out.features.mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(out.features.std(axis=0), 1.0, atol=1e-9)


def test_normalizer_constant_column():
    d = make_dataset(50)
    X = d.features.copy()
    X[:, 3] = 5.0
    out = apply_normalizer(fit_normalizer(d.with_features(X)), d.with_features(X))
    assert np.array_equal(out.features[:, 3], np.zeros(50))


def test_normalizer_hand_case():
    # column {1, 3}: mean 2, population std 1 -> z-scores {-1, +1}
    d = make_dataset(2)
    X = np.ones((2, 5))
    X[:, 0] = [1.0, 3.0]
    d = d.with_features(X)
    nz = fit_normalizer(d)
    assert nz.mean[0] == 2.0 and nz.std[0] == 1.0
    out = apply_normalizer(nz, d)
    assert out.features[:, 0].tolist() == [-1.0, 1.0]


def test_normalizer_invertible():
    d = make_dataset(80, seed=9)
    nz = fit_normalizer(d)
    z = apply_normalizer(nz, d).features
    back = z * nz.std + nz.mean
    assert np.allclose(back, d.features, atol=1e-9)
