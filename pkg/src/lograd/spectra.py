"""Synthetic matrices with controlled singular spectra.

Used by the quality benchmarks and tests: the matrix is U diag(s) V^T with
random orthogonal factors, so the optimal rank-r residual is known from the
spectrum alone.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = [
    "SPECTRUM_KINDS",
    "spectrum",
    "matrix_with_spectrum",
    "optimal_residual",
]

SPECTRUM_KINDS = ("exact", "powerlaw", "exponential")


def spectrum(kind: str, length: int, rank: int | None = None) -> np.ndarray:
    """Singular values for the named decay profile.

    ``exact`` is flat up to ``rank`` then zero; ``powerlaw`` decays as
    k^-2; ``exponential`` as exp(-k/20).
    """
    k = np.arange(1, length + 1, dtype=np.float64)
    if kind == "exact":
        if rank is None:
            raise ValueError("exact spectrum needs a rank")
        s = np.zeros(length)
        s[:rank] = 1.0
        return s
    if kind == "powerlaw":
        return k**-2.0
    if kind == "exponential":
        return np.exp(-k / 20.0)
    raise ValueError(f"unknown spectrum kind {kind!r}; expected one of {SPECTRUM_KINDS}")


def matrix_with_spectrum(
    m: int, n: int, sigma: np.ndarray, seed: int = 0
) -> np.ndarray:
    """U diag(sigma) V^T with Haar-ish orthogonal U (m x k) and V (n x k)."""
    k = len(sigma)
    if k > min(m, n):
        raise DimensionError(f"spectrum length {k} exceeds min({m}, {n})")
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((m, k)))
    V, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return (U * sigma) @ V.T


def optimal_residual(sigma: np.ndarray, r: int) -> float:
    """Eckart-Young rank-r relative Frobenius residual for this spectrum."""
    total = float(np.sum(np.square(sigma)))
    if total == 0.0:
        return 0.0
    tail = float(np.sum(np.square(sigma[r:])))
    return float(np.sqrt(tail / total))
