"""Structural identification through LU decomposition of selected columns.

Given the reduced-form coefficient matrix B (k x r, intercept in column 1)
and a k-tuple of distinct column indices, the selected square block is
factored as L U with L unit lower-triangular.  The three maps

    contemporaneous multiplier  Q  = L,
    simultaneous coefficients   A0 = I - L^-1,
    structural lag coefficients A  = L^-1 B,

are differentiable wherever the unpivoted factorization exists, and their
Jacobians with respect to vec(B) feed delta-method covariances.

Note: zero restrictions that justify a particular column tuple are *not*
imposed during estimation.  They only motivate the user's choice of tuple;
estimation uses the reduced-form fit as is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg
from .errors import ColumnSelectionError, SingularMinorError

if TYPE_CHECKING:  # pragma: no cover
    from .var import ReducedFormFit


@dataclass(frozen=True)
class ColumnSelection:
    """The 1-based k-tuple (j_1, ..., j_k) of distinct column indices.

    Order matters: j_m supplies column m of the selected square block.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if len(set(idx)) != len(idx):
            raise ColumnSelectionError(f"duplicate column indices in {idx}")
        if any(j < 1 for j in idx):
            raise ColumnSelectionError(f"column indices must be >= 1, got {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int) - 1

    def validate_for(self, k: int, r: int) -> None:
        if self.k != k:
            raise ColumnSelectionError(
                f"selection has {self.k} indices but the system has {k} series"
            )
        if any(j > r for j in self.indices):
            raise ColumnSelectionError(
                f"column indices {self.indices} exceed r = {r}"
            )


def as_selection(sel) -> ColumnSelection:
    if isinstance(sel, ColumnSelection):
        return sel
    return ColumnSelection(tuple(sel))


@dataclass
class StructuralFit:
    """Point estimates of (Q, A0, A) with optional Jacobians and covariances."""

    q_hat: np.ndarray
    a0_hat: np.ndarray
    a_hat: np.ndarray
    u_hat: np.ndarray            # upper factor; equals the selected columns of a_hat
    selection: ColumnSelection
    j1: np.ndarray | None = None
    j2: np.ndarray | None = None
    j3: np.ndarray | None = None
    sigma1: np.ndarray | None = None
    sigma2: np.ndarray | None = None
    sigma3: np.ndarray | None = None


def select_columns(b, sel) -> np.ndarray:
    """Return the k x k matrix formed by the selected columns of ``b``."""
    b = linalg.as_matrix(b, "b")
    sel = as_selection(sel)
    sel.validate_for(b.shape[0], b.shape[1])
    return b[:, sel.zero_based()].copy()


def identify(fit, sel) -> StructuralFit:
    """Recover (Q, A0, A) from a reduced-form fit (point estimates only).

    ``fit`` may be a ReducedFormFit or a bare k x r coefficient matrix.
    Raises :class:`SingularMinorError` when the selected block has a
    singular leading principal minor, i.e. the tuple does not identify.
    """
    b_hat = fit if isinstance(fit, np.ndarray) else fit.b_hat
    b_hat = linalg.as_matrix(b_hat, "b_hat")
    sel = as_selection(sel)
    c = select_columns(b_hat, sel)
    l, u = linalg.lu_unitriangular(c)
    q_hat = l
    a0_hat = np.eye(len(l)) - linalg.invert_unit_lower(l)
    a_hat = solve_triangular(l, b_hat, lower=True, unit_diagonal=True)
    return StructuralFit(q_hat=q_hat, a0_hat=a0_hat, a_hat=a_hat,
                         u_hat=u, selection=sel)


def _direction_index_grids(k: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index of each vec(B) coordinate, in column-major order."""
    d = np.arange(k * r)
    return d % k, d // k


def _analytic_jacobians(b_hat: np.ndarray, sel: ColumnSelection):
    k, r = b_hat.shape
    kr = k * r
    sel0 = sel.zero_based()
    c = b_hat[:, sel0]
    l, u = linalg.lu_unitriangular(c)
    l_inv = linalg.invert_unit_lower(l)
    u_inv = solve_triangular(u, np.eye(k), lower=False)
    a_hat = solve_triangular(l, b_hat, lower=True, unit_diagonal=True)

    rows, cols = _direction_index_grids(k, r)

    # dL is nonzero only for coordinates in selected columns.  For the
    # coordinate (i, j_m): L^-1 dC U^-1 = outer(L^-1[:, i], U^-1[m, :]).
    outer = np.einsum("xi,my->imxy", l_inv, u_inv)        # (i, m, k, k)
    outer = np.tril(outer, -1)
    dl_sel = np.einsum("ab,imby->imay", l, outer)         # (i, m, k, k)

    dl = np.zeros((kr, k, k))
    for m, j in enumerate(sel0):
        for i in range(k):
            dl[j * k + i] = dl_sel[i, m]

    da0 = np.einsum("ab,dbc,ce->dae", l_inv, dl, l_inv)

    # dA = L^-1 (dB - dL A); L^-1 dB places L^-1[:, i] into column j.
    da = np.zeros((kr, k, r))
    da[np.arange(kr), :, cols] = l_inv[:, rows].T
    da -= np.einsum("ab,dbc,cr->dar", l_inv, dl, a_hat)

    j1 = _stack_vec(dl)
    j2 = _stack_vec(da0)
    j3 = _stack_vec(da)
    return j1, j2, j3


def _stack_vec(stack: np.ndarray) -> np.ndarray:
    """Column-major vec of each slice of a (d, m, n) stack -> (m*n, d)."""
    d = stack.shape[0]
    return stack.transpose(0, 2, 1).reshape(d, -1).T


def _fd_eval(f, b_vec: np.ndarray, out_dim: int) -> np.ndarray:
    """Central finite differences of f: R^len(b) -> R^out_dim.

    Steps are coordinate-wise cbrt(eps)-scaled; if evaluation at a
    perturbed point fails (LU infeasible), the step is halved up to three
    times before giving up.
    """
    n = b_vec.size
    jac = np.zeros((out_dim, n))
    for i in range(n):
        h = linalg.fd_step(b_vec[i])
        for _ in range(4):
            bp = b_vec.copy()
            bm = b_vec.copy()
            bp[i] += h
            bm[i] -= h
            try:
                jac[:, i] = (f(bp) - f(bm)) / (2.0 * h)
                break
            except SingularMinorError:
                h *= 0.5
        else:
            raise SingularMinorError(0, 0.0)
    return jac


def _fd_jacobians(b_hat: np.ndarray, sel: ColumnSelection):
    k, r = b_hat.shape

    def f_all(bv: np.ndarray) -> np.ndarray:
        sf = identify(linalg.unvec(bv, k, r), sel)
        return np.concatenate(
            [linalg.vec(sf.q_hat), linalg.vec(sf.a0_hat), linalg.vec(sf.a_hat)]
        )

    full = _fd_eval(f_all, linalg.vec(b_hat), 2 * k * k + k * r)
    return full[: k * k], full[k * k: 2 * k * k], full[2 * k * k:]


def jacobians(b_hat, sel, method: str = "analytic"):
    """Jacobians (J1, J2, J3) of the three identification maps at ``b_hat``.

    Shapes are (k^2, kr), (k^2, kr), (kr, kr) in column-major vec
    coordinates.  ``method`` is "analytic" (exact, via the LU directional
    derivative) or "fd" (central finite differences, kept as an
    independent cross-check).
    """
    b_hat = linalg.as_matrix(b_hat, "b_hat")
    sel = as_selection(sel)
    sel.validate_for(*b_hat.shape)
    if method == "analytic":
        return _analytic_jacobians(b_hat, sel)
    if method == "fd":
        return _fd_jacobians(b_hat, sel)
    raise ValueError(f"unknown method {method!r}")


def delta_covariances(jacs: Sequence[np.ndarray], sigma_b) -> tuple[np.ndarray, ...]:
    """Sandwich covariances J Sigma_b J^T, symmetrized against roundoff."""
    sigma_b = linalg.as_matrix(sigma_b, "sigma_b")
    out = []
    for j in jacs:
        s = j @ sigma_b @ j.T
        out.append(0.5 * (s + s.T))
    return tuple(out)


def estimate_structure(fit: "ReducedFormFit", sel,
                       method: str = "analytic") -> StructuralFit:
    """Full structural step: identification, Jacobians and covariances."""
    sf = identify(fit, sel)
    sf.j1, sf.j2, sf.j3 = jacobians(fit.b_hat, sel, method=method)
    sf.sigma1, sf.sigma2, sf.sigma3 = delta_covariances(
        (sf.j1, sf.j2, sf.j3), fit.sigma_b_hat
    )
    return sf
