"""Shared helpers for the test suite."""

import numpy as np
import pytest

from lusvar import impulse


def make_feasible_instance(rng, k, p):
    """Draw a random identifiable, stationary coefficient set.

    Returns (a0, a, sel, b) where a0 is strictly lower triangular, the
    columns of a picked out by the 1-based tuple sel form a nonsingular
    upper triangular matrix, and b = (I - a0)^-1 a has companion spectral
    radius below 0.9.
    """
    r = 1 + k * p
    sel = rng.permutation(np.arange(2, r + 1))[:k]
    a = rng.uniform(-0.25, 0.25, (k, r))
    a[:, 0] = rng.uniform(-0.5, 0.5, k)
    g = np.triu(rng.uniform(-0.6, 0.6, (k, k)))
    g[np.diag_indices(k)] = rng.uniform(0.4, 1.0, k) * rng.choice([-1.0, 1.0], k)
    a0 = np.tril(rng.uniform(-0.4, 0.4, (k, k)), -1)
    q = np.linalg.inv(np.eye(k) - a0)
    for _ in range(60):
        a[:, sel - 1] = g
        b = q @ a
        lam = impulse.companion_matrix(b, k, p)
        if np.abs(np.linalg.eigvals(lam)).max() < 0.9:
            break
        a[:, 1:] *= 0.8
        g *= 0.8
    else:
        raise RuntimeError("failed to draw a stationary instance")
    return a0, a, tuple(int(s) for s in sel), b


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)
