"""z-tests for the presence of simultaneous relationships.

The null hypothesis is that the simultaneous-coefficient matrix is zero,
in which case the strictly-lower-triangular coordinates of Q, of A0 and
of the selected block of B are all zero.  Each statistic projects the
corresponding sub-vector onto a weight vector v and studentizes with the
matching covariance sub-matrix; all three are asymptotically standard
normal under the null.

If v happens to be orthogonal to the true sub-vector under the
alternative, the test has no power in that direction; this is inherent
to the projection and is not guarded against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError, EmptySubvectorError
from .structural import StructuralFit, as_selection
from .var import ReducedFormFit

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-float(x) / _SQRT2)


def two_sided_p(z: float) -> float:
    """Two-sided p-value 2 * (1 - Phi(|z|))."""
    return math.erfc(abs(float(z)) / _SQRT2)


def strict_lower_indices(k: int) -> np.ndarray:
    """0-based vec indices of the strictly-lower entries of a k x k matrix.

    Column-major order: (i, j) with i > j, iterated column by column; the
    1-based vec index of entry (i, j) is (j-1)k + i.
    """
    if k < 2:
        raise EmptySubvectorError(f"k = {k} has no strictly-lower coordinates")
    return np.array([j * k + i for j in range(k) for i in range(j + 1, k)])


@dataclass(frozen=True)
class TestResult:
    statistic_kind: str   # "z1" | "z2" | "z3"
    weight: np.ndarray
    z_value: float
    p_value: float
    t_obs: int


def _studentize(kind: str, sub: np.ndarray, sigma_sub: np.ndarray,
                v: np.ndarray, t_obs: int) -> TestResult:
    denom = float(v @ sigma_sub @ v)
    if denom <= 1e-14:
        raise DegenerateVarianceError(
            f"{kind}: weighted variance {denom:.3e} is numerically zero"
        )
    z = math.sqrt(t_obs) * float(v @ sub) / math.sqrt(denom)
    return TestResult(statistic_kind=kind, weight=v, z_value=z,
                      p_value=two_sided_p(z), t_obs=t_obs)


def z_statistic(kind: str, reduced: ReducedFormFit, structural: StructuralFit,
                v=None) -> TestResult:
    """One of the three null tests; default weight is the all-ones vector.

    z1 projects the strictly-lower part of vec(Q), z2 of vec(A0), z3 the
    strictly-lower part of the selected columns of B (studentized with the
    matching sub-matrix of the reduced-form coefficient covariance).
    """
    k = reduced.k
    sub_idx = strict_lower_indices(k)
    if v is None:
        v = np.ones(sub_idx.size)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != sub_idx.size:
        raise ValueError(
            f"weight length {v.size} != k(k-1)/2 = {sub_idx.size}"
        )

    if kind == "z1":
        full = structural.q_hat.reshape(-1, order="F")
        sigma = structural.sigma1
    elif kind == "z2":
        full = structural.a0_hat.reshape(-1, order="F")
        sigma = structural.sigma2
    elif kind == "z3":
        sel0 = as_selection(structural.selection).zero_based()
        # vec(B) coordinate of g(B)[i, j] is sel0[j] * k + i.
        b_idx = np.array([sel0[j] * k + i
                          for j in range(k) for i in range(j + 1, k)])
        beta_sub = reduced.b_hat.reshape(-1, order="F")[b_idx]
        sigma_sub = reduced.sigma_b_hat[np.ix_(b_idx, b_idx)]
        return _studentize("z3", beta_sub, sigma_sub, v, reduced.t_obs)
    else:
        raise ValueError(f"unknown statistic kind {kind!r}")

    if sigma is None:
        raise ValueError(f"{kind} needs covariances; run estimate_structure first")
    return _studentize(kind, full[sub_idx], sigma[np.ix_(sub_idx, sub_idx)],
                       v, reduced.t_obs)
