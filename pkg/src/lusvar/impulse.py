"""Companion-form dynamics and impulse responses.

The moving-average coefficients Psi_h are computed by the lag recursion
Psi_h = sum_s B_s Psi_{h-s} (Psi_0 = I), which equals the top-left k x k
block of the h-th companion-matrix power.  Three response flavours:

* irf: Psi_h itself (non-orthogonalized),
* oirf: Psi_h @ Ltilde, Ltilde the unit lower LU factor of the residual
  covariance (point estimate only; no covariance is provided for it),
* total-effect responses: Psi_h @ Q, the response to a structural
  innovation (interpretable as a controlled total effect when the model
  is read as a linear structural equation system).

Delta-method covariances are available for the irf and total-effect maps.
Confidence bands are pointwise per horizon, not uniform.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import ndtri

from . import linalg
from .errors import NegativeVarianceError
from .structural import as_selection

DEFAULT_HORIZON = 20


def lag_blocks(b_hat: np.ndarray, k: int, p: int) -> list[np.ndarray]:
    """Split a k x (1+kp) coefficient matrix into [B_1, ..., B_p]."""
    b_hat = linalg.as_matrix(b_hat, "b_hat")
    if b_hat.shape != (k, 1 + k * p):
        raise ValueError(
            f"expected shape {(k, 1 + k * p)}, got {b_hat.shape}"
        )
    return [b_hat[:, 1 + s * k: 1 + (s + 1) * k] for s in range(p)]


def companion_matrix(b_hat, k: int, p: int) -> np.ndarray:
    """kp x kp companion matrix: lag blocks on top, shifted identities below."""
    blocks = lag_blocks(b_hat, k, p)
    lam = np.zeros((k * p, k * p))
    lam[:k] = np.hstack(blocks)
    if p > 1:
        lam[k:, : k * (p - 1)] = np.eye(k * (p - 1))
    return lam


def irf(b_hat, k: int, p: int, h_max: int = DEFAULT_HORIZON) -> list[np.ndarray]:
    """Psi_0 .. Psi_{h_max} via the lag recursion (Psi_0 = I exactly)."""
    blocks = lag_blocks(b_hat, k, p)
    psi = [np.eye(k)]
    for h in range(1, h_max + 1):
        acc = np.zeros((k, k))
        for s in range(1, min(h, p) + 1):
            acc += blocks[s - 1] @ psi[h - s]
        psi.append(acc)
    return psi


def oirf(psi: list[np.ndarray], sigma_hat) -> list[np.ndarray]:
    """Orthogonalized responses Psi_h @ Ltilde.

    Ltilde is the unit lower LU factor of the residual covariance.  Point
    estimates only.
    """
    ltilde, _ = linalg.lu_unitriangular(linalg.as_matrix(sigma_hat, "sigma_hat"))
    return [m @ ltilde for m in psi]


def total_effect_irf(psi: list[np.ndarray], q_hat) -> list[np.ndarray]:
    """Responses to structural innovations: Psi_h @ Q."""
    q_hat = linalg.as_matrix(q_hat, "q_hat")
    return [m @ q_hat for m in psi]


def _direction_db(k: int, r: int) -> np.ndarray:
    """Stack of unit-direction matrices, one per vec(B) coordinate."""
    kr = k * r
    db = np.zeros((kr, k, r))
    d = np.arange(kr)
    db[d, d % k, d // k] = 1.0
    return db


def _dpsi_stack(b_hat: np.ndarray, k: int, p: int, h_max: int) -> list[np.ndarray]:
    """Directional derivatives of Psi_h for all kr coordinates.

    Returns [dPsi_0, ..., dPsi_{h_max}] where each element is a
    (kr, k, k) stack; intercept coordinates give identically zero slices.
    """
    r = 1 + k * p
    blocks = lag_blocks(b_hat, k, p)
    psi = irf(b_hat, k, p, h_max)
    db = _direction_db(k, r)
    db_blocks = [db[:, :, 1 + s * k: 1 + (s + 1) * k] for s in range(p)]
    dpsi = [np.zeros((k * r, k, k))]
    for h in range(1, h_max + 1):
        acc = np.zeros_like(dpsi[0])
        for s in range(1, min(h, p) + 1):
            acc += db_blocks[s - 1] @ psi[h - s]
            acc += np.matmul(blocks[s - 1], dpsi[h - s])
        dpsi.append(acc)
    return dpsi


def _stack_vec(stack: np.ndarray) -> np.ndarray:
    d = stack.shape[0]
    return stack.transpose(0, 2, 1).reshape(d, -1).T


def jacobian_irf(b_hat, k: int, p: int, h: int, method: str = "analytic") -> np.ndarray:
    """J4,h: Jacobian of vec(Psi_h) with respect to vec(B), shape (k^2, kr)."""
    b_hat = linalg.as_matrix(b_hat, "b_hat")
    if h < 0:
        raise ValueError("horizon must be nonnegative")
    if method == "analytic":
        return _stack_vec(_dpsi_stack(b_hat, k, p, h)[h])
    if method == "fd":
        return _fd_jacobian(
            lambda bv: linalg.vec(irf(linalg.unvec(bv, k, 1 + k * p), k, p, h)[h]),
            linalg.vec(b_hat), k * k,
        )
    raise ValueError(f"unknown method {method!r}")


def jacobian_total_effect(b_hat, sel, h: int, method: str = "analytic") -> np.ndarray:
    """J5,h: Jacobian of vec(Psi_h Q) with respect to vec(B), shape (k^2, kr).

    Product rule over the composed map: d(Psi_h Q) = dPsi_h Q + Psi_h dL,
    with dL the LU directional derivative at the selected columns.
    """
    b_hat = linalg.as_matrix(b_hat, "b_hat")
    sel = as_selection(sel)
    k, r = b_hat.shape
    p = (r - 1) // k
    sel.validate_for(k, r)
    if method == "fd":
        return _fd_jacobian(
            lambda bv: _total_effect_vec(linalg.unvec(bv, k, r), sel, k, p, h),
            linalg.vec(b_hat), k * k,
        )
    if method != "analytic":
        raise ValueError(f"unknown method {method!r}")
    dl = _dl_stack(b_hat, sel)
    psi_h = irf(b_hat, k, p, h)[h]
    dpsi_h = _dpsi_stack(b_hat, k, p, h)[h]
    lu = linalg.lu_unitriangular(b_hat[:, sel.zero_based()])
    dtotal = dpsi_h @ lu.l + np.matmul(psi_h, dl)
    return _stack_vec(dtotal)


def _dl_stack(b_hat: np.ndarray, sel) -> np.ndarray:
    """Directional derivatives of the L factor for all vec(B) coordinates."""
    k, r = b_hat.shape
    sel0 = sel.zero_based()
    lu = linalg.lu_unitriangular(b_hat[:, sel0])
    l_inv = linalg.invert_unit_lower(lu.l)
    u_inv = solve_triangular(lu.u, np.eye(k), lower=False)
    outer = np.tril(np.einsum("xi,my->imxy", l_inv, u_inv), -1)
    dl_sel = np.einsum("ab,imby->imay", lu.l, outer)
    dl = np.zeros((k * r, k, k))
    for m, j in enumerate(sel0):
        for i in range(k):
            dl[j * k + i] = dl_sel[i, m]
    return dl


def _total_effect_vec(b: np.ndarray, sel, k: int, p: int, h: int) -> np.ndarray:
    lu = linalg.lu_unitriangular(b[:, sel.zero_based()])
    return linalg.vec(irf(b, k, p, h)[h] @ lu.l)


def _fd_jacobian(f, b_vec: np.ndarray, out_dim: int) -> np.ndarray:
    from .structural import _fd_eval
    return _fd_eval(f, b_vec, out_dim)


def confidence_bands(point, sigma, level: float, t_obs: int):
    """Pointwise delta-method bands: point +- z * sqrt(diag(sigma) / T).

    Variances below -1e-12 raise :class:`NegativeVarianceError`; small
    negative roundoff is clipped to zero.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    point = linalg.as_matrix(point, "point")
    sigma = linalg.as_matrix(sigma, "sigma")
    variances = np.diag(sigma) / float(t_obs)
    if np.any(variances < -1e-12):
        raise NegativeVarianceError(
            f"variance {variances.min():.3e} below roundoff tolerance"
        )
    variances = np.clip(variances, 0.0, None)
    z = float(ndtri(1.0 - (1.0 - level) / 2.0))
    half = z * np.sqrt(linalg.unvec(variances, *point.shape))
    return point - half, point + half
