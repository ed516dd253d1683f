import numpy as np
import pytest

from debiaskit.data import Dataset
from debiaskit.repair import (
    QuantileFn,
    RepairError,
    apply_repair,
    fit_repair,
)
from tests.conftest import make_dataset


def two_group(female_vals, male_vals, n_features=1):
    fv = np.asarray(female_vals, dtype=np.float64)
    mv = np.asarray(male_vals, dtype=np.float64)
    X = np.concatenate([fv, mv])[:, None]
    X = np.repeat(X, n_features, axis=1)
    a = np.concatenate([np.zeros(len(fv)), np.ones(len(mv))]).astype(np.int64)
    y = (np.arange(len(a)) % 2).astype(np.int64)
    return Dataset(features=X, labels=y, protected=a,
                   feature_names=tuple(f"f{i}" for i in range(n_features)))


def test_quantilefn_plotting_positions_and_lookup():
    q = QuantileFn(np.array([1.0, 3.0, 5.0, 7.0]))
    assert np.allclose(q.plotting_positions, [0.125, 0.375, 0.625, 0.875])
    assert q(0.125) == 1.0 and q(0.875) == 7.0
    assert q(0.25) == 2.0  # linear interpolation between 1 and 3
    assert q(0.0) == 1.0 and q(1.0) == 7.0  # clamped outside


def test_quantilefn_rank_inverts_on_sample_points():
    vals = np.array([2.0, 4.0, 9.0, 10.0, 15.0])
    q = QuantileFn(np.sort(vals))
    u = q.rank(vals)
    assert np.allclose(u, (np.array([1, 2, 3, 4, 5]) - 0.5) / 5)
    assert np.allclose(q(u), vals)


def test_quantilefn_rank_ties_and_clamps():
    q = QuantileFn(np.array([1.0, 2.0, 2.0, 2.0, 5.0]))
    # the three tied 2s share the midpoint of ranks 1..3 (0-based): (1+4)/10
    assert q.rank(2.0) == pytest.approx(0.5)
    assert q.rank(0.0) == 0.0 and q.rank(9.0) == 1.0
    assert q.rank(1.0) == pytest.approx(0.1)


def test_level_zero_is_identity_on_training_rows():
    d = make_dataset(100, seed=4)
    out = apply_repair(fit_repair(d, 0.0), d)
    assert np.allclose(out.features, d.features, atol=1e-12)


def test_level_is_linear_interpolation():
    d = make_dataset(150, seed=5)
    r0 = apply_repair(fit_repair(d, 0.0), d).features
    r1 = apply_repair(fit_repair(d, 1.0), d).features
    for lam in (0.25, 0.5, 0.8):
        rl = apply_repair(fit_repair(d, lam), d).features
        assert np.allclose(rl, (1 - lam) * r0 + lam * r1, atol=1e-12)


def test_hand_example_full_repair():
    # female {0, 10}, male {4, 6}: both groups land on {2, 8} at level 1
    d = two_group([0.0, 10.0], [4.0, 6.0])
    out = apply_repair(fit_repair(d, 1.0), d)
    assert np.allclose(out.features.ravel(), [2.0, 8.0, 2.0, 8.0])


def test_labels_and_protected_untouched():
    d = make_dataset(80, seed=6)
    out = apply_repair(fit_repair(d, 1.0), d)
    assert out.labels is d.labels
    assert out.protected is d.protected


def test_within_group_order_preserved():
    rng = np.random.default_rng(7)
    d = make_dataset(400, seed=7)
    out = apply_repair(fit_repair(d, 1.0), d)
    for group in (0, 1):
        mask = d.group_mask(group)
        for j in range(d.features.shape[1]):
            order = np.argsort(d.features[mask, j], kind="stable")
            repaired = out.features[mask, j][order]
            assert (np.diff(repaired) >= -1e-12).all()


def test_full_repair_aligns_distributions_unequal_sizes():
    from scipy.stats import ks_2samp

    rng = np.random.default_rng(8)
    d = two_group(rng.normal(0.0, 1.0, 700), rng.normal(1.5, 2.0, 400))
    out = apply_repair(fit_repair(d, 1.0), d)
    fem = out.features[d.group_mask(0), 0]
    mal = out.features[d.group_mask(1), 0]
    assert ks_2samp(fem, mal).statistic < 0.05


def test_repair_generalizes_to_unseen_rows():
    rng = np.random.default_rng(9)
    train = two_group(rng.normal(0, 1, 500), rng.normal(2, 1, 500))
    rmap = fit_repair(train, 1.0)
    fresh = two_group(rng.normal(0, 1, 300), rng.normal(2, 1, 300))
    out = apply_repair(rmap, fresh)
    fem = out.features[fresh.group_mask(0), 0]
    mal = out.features[fresh.group_mask(1), 0]
    assert abs(fem.mean() - mal.mean()) < 0.15


def test_repair_errors():
    d = make_dataset(40)
    with pytest.raises(RepairError, match=r"\[0,1\]"):
        fit_repair(d, 1.5)
    rmap = fit_repair(d, 1.0)
    skinny = make_dataset(40, n_features=3)
    with pytest.raises(RepairError, match="feature count"):
        apply_repair(rmap, skinny)
    with pytest.raises(RepairError, match="empty"):
        QuantileFn(np.array([]))
