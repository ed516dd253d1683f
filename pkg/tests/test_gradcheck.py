"""Central-difference check of the analytic gradients on small nets."""

import numpy as np

from debiaskit.nn import MlpParams, bce_loss, init_params, loss_and_grad

from debiaskit import backends

EPS = 1e-6
REL_TOL = 1e-5
ABS_TOL = 1e-9  # central-difference noise floor for near-zero gradients


def loss_at(p: MlpParams, X, y) -> float:
    H1, H2, z = backends.active().mlp_forward(*p.arrays, X)
    return bce_loss(z, y)


def central_diff(p: MlpParams, X, y, k: int) -> float:
    flat = p.flatten()
    plus, minus = flat.copy(), flat.copy()
    plus[k] += EPS
    minus[k] -= EPS
    return (loss_at(p.unflatten(plus), X, y)
            - loss_at(p.unflatten(minus), X, y)) / (2 * EPS)


def test_gradients_match_central_differences():
    rng = np.random.default_rng(0)
    checked = 0
    for trial in range(5):
        p = init_params(trial, layers=(5, 7, 6, 1))
        X = rng.normal(size=(12, 5))
        y = (rng.random(12) < 0.5).astype(np.float64)
        _, grads = loss_and_grad(p, X, y)
        flat_grad = grads.flatten()
        for k in rng.choice(flat_grad.size, size=20, replace=False):
            numeric = central_diff(p, X, y, int(k))
            analytic = flat_grad[k]
            scale = max(abs(numeric), abs(analytic))
            assert abs(numeric - analytic) < REL_TOL * scale + ABS_TOL, (
                f"trial {trial} coord {k}: analytic {analytic}, numeric {numeric}")
            checked += 1
    assert checked == 100


def test_gradient_zero_at_interpolating_optimum():
    # a net that outputs huge correct logits has (numerically) tiny grads
    p = init_params(0, layers=(2, 3, 3, 1))
    big = MlpParams.from_arrays([a * 0 for a in p.arrays])
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1.0, 0.0])
    # hand-build an exact linear pass-through of x0 scaled by 50
    W1 = np.zeros((2, 3)); W1[0, 0] = 1.0; W1[0, 1] = -1.0
    W2 = np.zeros((3, 3)); W2[0, 0] = 1.0; W2[1, 1] = 1.0
    W3 = np.zeros((3, 1)); W3[0, 0] = 50.0; W3[1, 0] = -50.0
    p = MlpParams(W1, big.b1, W2, big.b2, W3, big.b3)
    loss, grads = loss_and_grad(p, X, y)
    assert loss < 1e-20
    assert np.abs(grads.flatten()).max() < 1e-18
