"""Projection bases for the dominant subspace of a gradient matrix.

Two routes to an orthonormal rank-r basis: the exact truncated SVD
(Frobenius-optimal by Eckart-Young, the quality oracle) and the randomized
range finder that sketches with a structured fast transform and
orthonormalizes the sketch. Quality metrics (projection residual, principal
angles) live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError
from .sketch import Mixing, build_srft, sketch_columns, sketch_gaussian

__all__ = [
    "Side",
    "BasisMethod",
    "ProjectionBasis",
    "svd_basis",
    "srft_basis",
    "gaussian_basis",
    "qr_orthonormalize",
    "subspace_residual",
    "principal_angles",
]

# relative orthonormality defect tolerated on construction
_ORTHO_TOL = 1e-8


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class BasisMethod(str, Enum):
    EXACT_SVD = "svd"
    SRFT = "srft"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ProjectionBasis:
    """Orthonormal-column basis of an estimated dominant subspace.

    ``side`` records whether the basis spans column space (left, m x r) or
    row space (right, n x r) of the matrix it was computed from.
    ``rank_deficient`` flags bases that had to be completed with random
    orthonormal directions because the input did not have full rank.
    """

    basis: np.ndarray
    side: Side
    rank: int
    birth_step: int = 0
    method: BasisMethod = BasisMethod.EXACT_SVD
    rank_deficient: bool = False

    def __post_init__(self) -> None:
        B = self.basis
        if B.ndim != 2 or B.shape[1] != self.rank:
            raise DimensionError(
                f"basis shape {B.shape} does not match rank {self.rank}"
            )
        defect = np.linalg.norm(B.T @ B - np.eye(self.rank))
        if defect > _ORTHO_TOL:
            raise NumericalError(
                f"basis columns not orthonormal (defect {defect:.3e})"
            )


def _fix_column_signs(B: np.ndarray) -> np.ndarray:
    # determinism convention: largest-magnitude entry of each column positive
    anchor = np.abs(B).argmax(axis=0)
    signs = np.sign(B[anchor, np.arange(B.shape[1])])
    signs[signs == 0] = 1.0
    return B * signs[None, :]


def svd_basis(G: np.ndarray, r: int, side: Side = Side.LEFT) -> ProjectionBasis:
    """Top-r singular vectors of ``G`` as an orthonormal basis.

    Deterministic: each column is sign-fixed so its largest-magnitude entry
    is positive.
    """
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    if r < 1 or r > min(G.shape):
        raise DimensionError(
            f"rank {r} out of range for a {G.shape[0]}x{G.shape[1]} matrix"
        )
    if not np.all(np.isfinite(G)):
        raise NumericalError("input matrix contains non-finite entries")
    side = Side(side)
    try:
        U, s, Vh = np.linalg.svd(G, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD failed to converge on a {G.shape[0]}x{G.shape[1]} matrix "
            f"(|G|_F = {np.linalg.norm(G):.3e}): {exc}"
        ) from exc
    vectors = U[:, :r] if side is Side.LEFT else Vh[:r, :].T
    return ProjectionBasis(
        basis=_fix_column_signs(vectors),
        side=side,
        rank=r,
        method=BasisMethod.EXACT_SVD,
    )


def _complete_orthonormal(
    Q_good: np.ndarray, ambient: int, total: int, rng: np.random.Generator
) -> np.ndarray:
    """Append random orthonormal directions to reach ``total`` columns."""
    cols = [Q_good] if Q_good.size else []
    have = Q_good.shape[1] if Q_good.size else 0
    Q = Q_good
    while have < total:
        v = rng.standard_normal(ambient)
        if have:
            v -= Q @ (Q.T @ v)
            v -= Q @ (Q.T @ v)  # second pass for orthogonality at 1e-12 level
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            continue
        v /= norm
        cols.append(v[:, None])
        Q = np.hstack(cols)
        have += 1
    return Q


def _orthonormal_range(
    Y: np.ndarray, r: int, rng: np.random.Generator
) -> tuple[np.ndarray, bool]:
    """Orthonormal basis of the dominant rank-r subspace of ``Y``.

    Householder QR followed by an SVD of the small triangular factor; with
    more sketch columns than r this keeps the best-captured directions
    rather than an arbitrary first-r subset. Rank deficiency is repaired by
    completing with random orthonormal directions and reported in the flag.
    """
    m = Y.shape[0]
    Q, R = scipy.linalg.qr(Y, mode="economic")
    Ur, s, _ = np.linalg.svd(R)
    tol = max(Y.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    effective = int(np.sum(s > tol))
    keep = min(effective, r)
    B = _fix_column_signs(Q @ Ur[:, :keep]) if keep else np.empty((m, 0))
    if keep < r:
        return _complete_orthonormal(B, m, r, rng), True
    return B, False


def srft_basis(
    G: np.ndarray,
    r: int,
    oversample: int = 0,
    mixing: Mixing = Mixing.UNITARY_DCT,
    seed: int = 0,
    side: Side = Side.LEFT,
) -> ProjectionBasis:
    """Randomized range finder: structured sketch, then orthonormalize.

    Sketches ``r + oversample`` columns in O(m n log n), orthonormalizes in
    O(m (r+p)^2), and keeps the dominant r directions of the sketch. The
    complex-DFT mixing stacks real and imaginary parts before
    orthonormalization so the basis stays real.
    """
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    if not np.all(np.isfinite(G)):
        raise NumericalError("input matrix contains non-finite entries")
    if oversample < 0:
        raise ValueError(f"oversample must be >= 0, got {oversample}")
    side = Side(side)
    if side is Side.RIGHT:
        left = srft_basis(G.T, r, oversample, mixing, seed, Side.LEFT)
        return replace(left, side=Side.RIGHT)
    m, n = G.shape
    if r < 1 or r > min(m, n):
        raise DimensionError(f"rank {r} out of range for a {m}x{n} matrix")
    op = build_srft(n, r + oversample, mixing, seed)
    Y = sketch_columns(op, G)
    if np.iscomplexobj(Y):
        Y = np.hstack([Y.real, Y.imag])
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    B, deficient = _orthonormal_range(Y, r, rng)
    return ProjectionBasis(
        basis=B,
        side=side,
        rank=r,
        method=BasisMethod.SRFT,
        rank_deficient=deficient,
    )


def gaussian_basis(
    G: np.ndarray,
    r: int,
    oversample: int = 0,
    seed: int = 0,
    side: Side = Side.LEFT,
) -> ProjectionBasis:
    """Classical Gaussian range finder, same extraction as ``srft_basis``."""
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    side = Side(side)
    if side is Side.RIGHT:
        left = gaussian_basis(G.T, r, oversample, seed, Side.LEFT)
        return replace(left, side=Side.RIGHT)
    m, n = G.shape
    if r < 1 or r > min(m, n):
        raise DimensionError(f"rank {r} out of range for a {m}x{n} matrix")
    Y = sketch_gaussian(G, r + oversample, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6A55]))
    B, deficient = _orthonormal_range(Y, r, rng)
    return ProjectionBasis(
        basis=B,
        side=side,
        rank=r,
        method=BasisMethod.GAUSSIAN,
        rank_deficient=deficient,
    )


def qr_orthonormalize(Y: np.ndarray, seed: int = 0) -> np.ndarray:
    """Householder-QR orthonormal factor with the same column span as ``Y``.

    Rank-deficient input never errors: lost directions are replaced by
    random orthonormal completions (seeded, so output is deterministic).
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    m, k = Y.shape
    if m < k:
        raise DimensionError(f"need rows >= cols, got {m}x{k}")
    Q, R = scipy.linalg.qr(Y, mode="economic")
    diag = np.abs(np.diag(R))
    tol = max(m, k) * np.finfo(np.float64).eps * (diag.max() if k else 0.0)
    bad = diag <= tol
    if not bad.any():
        return Q
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0DE]))
    good = Q[:, ~bad]
    return _complete_orthonormal(good, m, k, rng)


def subspace_residual(G: np.ndarray, P: ProjectionBasis) -> float:
    """Relative Frobenius error of projecting ``G`` onto the basis.

    0 means the basis captures ``G`` exactly, 1 means it is orthogonal to
    it. A zero matrix returns 0 by convention.
    """
    G = np.asarray(G, dtype=np.float64)
    B = P.basis
    if P.side is Side.LEFT:
        if G.shape[0] != B.shape[0]:
            raise DimensionError(
                f"matrix rows {G.shape[0]} != basis ambient dim {B.shape[0]}"
            )
        projected = B @ (B.T @ G)
    else:
        if G.shape[1] != B.shape[0]:
            raise DimensionError(
                f"matrix cols {G.shape[1]} != basis ambient dim {B.shape[0]}"
            )
        projected = (G @ B) @ B.T
    denom = np.linalg.norm(G)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(G - projected) / denom)


def principal_angles(P1: ProjectionBasis, P2: ProjectionBasis) -> np.ndarray:
    """Canonical angles (radians, ascending) between two equal-rank subspaces."""
    B1, B2 = P1.basis, P2.basis
    if B1.shape != B2.shape:
        raise DimensionError(
            f"bases must share ambient dimension and rank, got {B1.shape} vs {B2.shape}"
        )
    cosines = np.linalg.svd(B1.T @ B2, compute_uv=False)
    # rounding can push cosines slightly above 1, which would NaN the arccos
    return np.sort(np.arccos(np.clip(cosines, 0.0, 1.0)))
