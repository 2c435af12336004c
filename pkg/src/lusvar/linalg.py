"""Dense real-matrix kernels.

Everything downstream (identification maps, Jacobians, covariances) is
built on the small set of operations here: column-major vectorization,
Kronecker products, an *unpivoted* LU factorization with a unit lower
factor, the exact directional derivative of that factorization, and a
spectral radius.

Vectorization convention: ``vec`` stacks columns top to bottom
(column-major).  The convention is global; every Jacobian coordinate in
the package is indexed against it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NoConvergenceError, SingularMinorError


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def vec(m) -> np.ndarray:
    """Column-major vectorization: stack the columns of ``m`` into a 1-D array."""
    return as_matrix(m, "vec argument").reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for a ``rows x cols`` target shape."""
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size != rows * cols:
        raise ValueError(f"cannot unvec length {a.size} into {rows}x{cols}")
    return a.reshape(rows, cols, order="F")


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result equals a_ij * b."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


class LuPair(NamedTuple):
    """Unit-lower / upper factor pair with l @ u equal to the factored matrix."""

    l: np.ndarray
    u: np.ndarray


def default_singularity_tol(c: np.ndarray) -> float:
    """Scale-aware pivot tolerance: 1e-10 * max(1, max |c_ij|)."""
    return 1e-10 * max(1.0, float(np.abs(c).max(initial=0.0)))


def lu_unitriangular(c, tol: float | None = None) -> LuPair:
    """Doolittle LU factorization without pivoting.

    The lower factor is unit-triangular; no row exchanges are performed
    because the identification scheme equates the L factor with a
    structural matrix — permuting rows would change what is being
    estimated.  A pivot with ``|u_ii| <= tol`` raises
    :class:`SingularMinorError` with the index ``i`` of the smallest
    singular leading principal minor.
    """
    c = as_matrix(c, "c")
    n, m = c.shape
    if n != m:
        raise ValueError(f"LU factorization needs a square matrix, got {n}x{m}")
    if tol is None:
        tol = default_singularity_tol(c)
    l = np.eye(n)
    u = np.zeros((n, n))
    for i in range(n):
        u[i, i:] = c[i, i:] - l[i, :i] @ u[:i, i:]
        if abs(u[i, i]) <= tol:
            raise SingularMinorError(i + 1, float(u[i, i]))
        if i + 1 < n:
            l[i + 1:, i] = (c[i + 1:, i] - l[i + 1:, :i] @ u[:i, i]) / u[i, i]
    return LuPair(l, u)


def lu_differential(c, dc, lu: LuPair) -> np.ndarray:
    """Directional derivative of the L factor at ``c`` in direction ``dc``.

    With c = L U and strictly-lower projection P_low, the derivative is
    dL = L * P_low(L^-1 dc U^-1); exact, not a finite difference.
    """
    dc = as_matrix(dc, "dc")
    l, u = lu
    m = solve_triangular(l, dc, lower=True, unit_diagonal=True)
    m = solve_triangular(u.T, m.T, lower=True).T
    return l @ np.tril(m, -1)


def invert_unit_lower(l) -> np.ndarray:
    """Forward-substitution inverse of a unit lower-triangular matrix."""
    l = as_matrix(l, "l")
    n = l.shape[0]
    inv = solve_triangular(l, np.eye(n), lower=True, unit_diagonal=True)
    # Forward substitution leaves exact zeros above the diagonal and exact
    # ones on it, but enforce the shape against accumulated noise anyway.
    inv = np.tril(inv)
    np.fill_diagonal(inv, 1.0)
    return inv


def spectral_radius(m, tol: float = 1e-10, max_sweeps: int = 10_000) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Computed with the LAPACK QR eigenvalue iteration; ``tol`` and
    ``max_sweeps`` document the accuracy/iteration contract and failure to
    converge surfaces as :class:`NoConvergenceError`.
    """
    m = as_matrix(m, "m")
    if m.shape[0] != m.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if m.shape[0] == 0:
        return 0.0
    try:
        eigs = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return float(np.abs(eigs).max())


def fd_step(x: float) -> float:
    """Central-difference step: cbrt(eps) * max(1, |x|)."""
    return float(np.finfo(float).eps ** (1.0 / 3.0) * max(1.0, abs(x)))
