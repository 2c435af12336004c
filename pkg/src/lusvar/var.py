"""Reduced-form VAR estimation: lag design, least squares, diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg
from .errors import SingularDesignError, TooShortError
from .impulse import companion_matrix


@dataclass
class TimeSeriesPanel:
    """(T+p) x k observation matrix with series and time labels."""

    values: np.ndarray
    series_names: list[str] = field(default_factory=list)
    time_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = linalg.as_matrix(self.values, "panel values")
        n, k = self.values.shape
        if not self.series_names:
            self.series_names = [f"y{i + 1}" for i in range(k)]
        if not self.time_labels:
            self.time_labels = [str(t) for t in range(n)]
        if len(self.series_names) != k:
            raise ValueError("series_names length does not match columns")
        if len(self.time_labels) != n:
            raise ValueError("time_labels length does not match rows")

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass
class LagDesign:
    """Aligned regression arrays: y rows are Y_t, x rows are (1, Y_{t-1}, ..., Y_{t-p})."""

    y: np.ndarray
    x: np.ndarray
    p: int

    @property
    def t_obs(self) -> int:
        return self.y.shape[0]

    @property
    def k(self) -> int:
        return self.y.shape[1]

    @property
    def r(self) -> int:
        return self.x.shape[1]


@dataclass
class ReducedFormFit:
    """Least-squares reduced-form fit and the covariance pieces built from it."""

    b_hat: np.ndarray          # k x r
    residuals: np.ndarray      # T x k
    sigma_hat: np.ndarray      # k x k residual covariance
    gamma_hat: np.ndarray      # r x r second-moment matrix of the regressors
    sigma_b_hat: np.ndarray    # kr x kr, kron(gamma^-1, sigma)
    t_obs: int

    @property
    def k(self) -> int:
        return self.b_hat.shape[0]

    @property
    def r(self) -> int:
        return self.b_hat.shape[1]


def build_design(panel: TimeSeriesPanel, p: int) -> LagDesign:
    """Build the lagged regression arrays for lag order ``p``."""
    if p < 1:
        raise ValueError("lag order must be >= 1")
    values = panel.values
    n, k = values.shape
    if n <= p:
        raise TooShortError(f"{n} rows cannot support lag order {p}")
    t = n - p
    y = values[p:].copy()
    x = np.ones((t, 1 + k * p))
    for s in range(1, p + 1):
        x[:, 1 + (s - 1) * k: 1 + s * k] = values[p - s: n - s]
    return LagDesign(y=y, x=x, p=p)


def ols_fit(design: LagDesign, dof_correction: bool = False) -> ReducedFormFit:
    """Least-squares fit of the reduced form.

    Solved through the QR factorization of the design matrix rather than
    explicit normal equations.  Covariances are normalized by 1/T;
    ``dof_correction`` switches to 1/(T-r) for diagnostic use only.
    """
    y, x = design.y, design.x
    t, r = x.shape
    q, rmat = np.linalg.qr(x)
    diag = np.abs(np.diag(rmat))
    if diag.min() <= 1e-12 * max(1.0, diag.max()):
        raise SingularDesignError(
            "design matrix is numerically rank deficient"
        )
    coef = solve_triangular(rmat, q.T @ y, lower=False)   # r x k
    b_hat = coef.T
    residuals = y - x @ coef
    denom = float(t - r) if dof_correction else float(t)
    sigma_hat = residuals.T @ residuals / denom
    gamma_hat = x.T @ x / float(t)
    gamma_hat = 0.5 * (gamma_hat + gamma_hat.T)
    gamma_inv = np.linalg.inv(gamma_hat)
    gamma_inv = 0.5 * (gamma_inv + gamma_inv.T)
    sigma_b_hat = np.kron(gamma_inv, sigma_hat)
    return ReducedFormFit(
        b_hat=b_hat,
        residuals=residuals,
        sigma_hat=0.5 * (sigma_hat + sigma_hat.T),
        gamma_hat=gamma_hat,
        sigma_b_hat=0.5 * (sigma_b_hat + sigma_b_hat.T),
        t_obs=t,
    )


@dataclass(frozen=True)
class StationarityCheck:
    radius: float
    stationary: bool


def check_stationarity(b_hat, k: int, p: int, tol: float = 1e-10) -> StationarityCheck:
    """Spectral radius of the companion matrix built from the lag blocks."""
    lam = companion_matrix(b_hat, k, p)
    radius = linalg.spectral_radius(lam)
    return StationarityCheck(radius=radius, stationary=radius < 1.0 - tol)
