"""Pure-NumPy reference implementations of the training kernels.

All kernels take and return float64 C-contiguous arrays and are
functional: inputs are never mutated.
"""

import numpy as np

NAME = "python"


def mlp_forward(W1, b1, W2, b2, W3, b3, X):
    """Two relu hidden layers plus a linear output unit.

    Returns (H1, H2, z): post-relu activations of both hidden layers and
    the per-row output logit.
    """
    H1 = np.maximum(X @ W1 + b1, 0.0)
    H2 = np.maximum(H1 @ W2 + b2, 0.0)
    z = (H2 @ W3).ravel() + b3[0]
    return H1, H2, z


def mlp_backward(W2, W3, X, H1, H2, dz):
    """Backpropagate dL/dz through the network of mlp_forward.

    ``dz`` must already carry any 1/batch factor. Returns gradients in
    parameter order (gW1, gb1, gW2, gb2, gW3, gb3).
    """
    gb3 = np.array([dz.sum()])
    gW3 = (H2.T @ dz)[:, None]
    dA2 = np.outer(dz, W3.ravel())
    dA2 *= H2 > 0.0
    gW2 = H1.T @ dA2
    gb2 = dA2.sum(axis=0)
    dA1 = dA2 @ W2.T
    dA1 *= H1 > 0.0
    gW1 = X.T @ dA1
    gb1 = dA1.sum(axis=0)
    return gW1, gb1, gW2, gb2, gW3, gb3


def adam_update(p, g, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam step for a single parameter array.

    ``t`` is the 1-based step count after this update. Returns
    (p_new, m_new, v_new).
    """
    m = beta1 * m + (1.0 - beta1) * g
    v = beta2 * v + (1.0 - beta2) * (g * g)
    mhat = m / (1.0 - beta1**t)
    vhat = v / (1.0 - beta2**t)
    p = p - lr * mhat / (np.sqrt(vhat) + eps)
    return p, m, v
