"""Structural VAR identification via unpivoted LU decomposition.

Library layout:

* :mod:`lusvar.linalg` — matrix kernels (vec/kron, unitriangular LU and
  its differential, spectral radius),
* :mod:`lusvar.var` — lag design and least-squares reduced-form fit,
* :mod:`lusvar.structural` — identification maps, Jacobians, covariances,
* :mod:`lusvar.impulse` — impulse responses and confidence bands,
* :mod:`lusvar.inference` — z-tests for simultaneous relationships,
* :mod:`lusvar.simulation` — seeded Monte Carlo harness,
* :mod:`lusvar.cli` — command-line pipeline.
"""

from . import errors, impulse, inference, linalg, simulation, structural, var

__all__ = [
    "errors", "impulse", "inference", "linalg",
    "simulation", "structural", "var",
]

__version__ = "0.1.0"
