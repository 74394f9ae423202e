"""Structured random sketching operators.

The main object is a subsampled randomized fast-transform operator: a random
diagonal of signs, followed by a unitary fast mixing transform, followed by
uniform row subsampling. Applied from the right to a matrix ``G`` (m x n) it
produces an m x l sketch of the column space in O(m n log n) time. A dense
Gaussian sketch is provided as the classical reference point.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.fft

from .errors import DimensionError

__all__ = [
    "Mixing",
    "SrftOperator",
    "build_srft",
    "apply_mixing",
    "sketch_columns",
    "sketch_gaussian",
]


class Mixing(str, Enum):
    """Which unitary fast transform mixes coordinates before subsampling."""

    UNITARY_DCT = "dct"
    COMPLEX_DFT = "dft"


@dataclass(frozen=True)
class SrftOperator:
    """Immutable realization of the sketch: signs, mixing choice, sampled rows.

    ``sign_flips`` holds the +-1 diagonal, ``sampled_indices`` the
    ``sketch_dim`` distinct rows kept after mixing. Both are reproducible
    from ``seed`` alone.
    """

    input_dim: int
    sketch_dim: int
    sign_flips: np.ndarray
    sampled_indices: np.ndarray
    mixing: Mixing
    seed: int

    def __post_init__(self) -> None:
        if self.sketch_dim > self.input_dim:
            raise DimensionError(
                f"sketch_dim {self.sketch_dim} exceeds input_dim {self.input_dim}"
            )
        if self.sketch_dim < 1:
            raise ValueError("sketch_dim must be at least 1")
        if self.sign_flips.shape != (self.input_dim,):
            raise DimensionError("sign_flips length must equal input_dim")
        if not np.all(np.abs(self.sign_flips) == 1.0):
            raise ValueError("sign_flips entries must be exactly +1 or -1")
        idx = self.sampled_indices
        if idx.shape != (self.sketch_dim,):
            raise DimensionError("sampled_indices length must equal sketch_dim")
        if len(np.unique(idx)) != self.sketch_dim:
            raise ValueError("sampled_indices must be pairwise distinct")
        if idx.min() < 0 or idx.max() >= self.input_dim:
            raise ValueError("sampled_indices out of range")


def build_srft(
    input_dim: int,
    sketch_dim: int,
    mixing: Mixing = Mixing.UNITARY_DCT,
    seed: int = 0,
) -> SrftOperator:
    """Draw a sketch operator: fair-coin signs and uniform sampling without
    replacement, both driven solely by ``seed``."""
    if sketch_dim < 1:
        raise ValueError(f"sketch_dim must be >= 1, got {sketch_dim}")
    if sketch_dim > input_dim:
        raise DimensionError(
            f"sketch_dim {sketch_dim} exceeds input_dim {input_dim}"
        )
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([-1.0, 1.0]), size=input_dim)
    indices = rng.choice(input_dim, size=sketch_dim, replace=False)
    return SrftOperator(
        input_dim=input_dim,
        sketch_dim=sketch_dim,
        sign_flips=signs,
        sampled_indices=indices.astype(np.int64),
        mixing=Mixing(mixing),
        seed=seed,
    )


def apply_mixing(op: SrftOperator, v: np.ndarray) -> np.ndarray:
    """Apply the unitary mixing stage (signs then fast transform) to a vector.

    Norm-preserving; O(n log n) for any length. The complex-DFT mode returns
    a complex vector.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (op.input_dim,):
        raise DimensionError(
            f"vector length {v.shape} does not match input_dim {op.input_dim}"
        )
    flipped = v * op.sign_flips
    if op.mixing is Mixing.UNITARY_DCT:
        return scipy.fft.dct(flipped, type=2, norm="ortho")
    return np.fft.fft(flipped) / np.sqrt(op.input_dim)


def sketch_columns(op: SrftOperator, G: np.ndarray) -> np.ndarray:
    """Sketch the column space: mix and subsample each row of ``G``.

    Returns an m x sketch_dim matrix (complex for the complex-DFT mixing).
    The result equals ``G`` times the transpose of the dense realization of
    the operator; it is computed in O(m n log n) without forming that matrix.
    """
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[1] != op.input_dim:
        raise DimensionError(
            f"matrix with {G.shape} columns does not match input_dim {op.input_dim}"
        )
    flipped = G * op.sign_flips[None, :]
    if op.mixing is Mixing.UNITARY_DCT:
        mixed = scipy.fft.dct(flipped, type=2, norm="ortho", axis=1)
    else:
        mixed = np.fft.fft(flipped, axis=1) / np.sqrt(op.input_dim)
    return mixed[:, op.sampled_indices]


def sketch_gaussian(G: np.ndarray, sketch_dim: int, seed: int = 0) -> np.ndarray:
    """Dense Gaussian reference sketch, entries N(0, 1/sketch_dim)."""
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise DimensionError("expected a 2-D matrix")
    if sketch_dim < 1:
        raise ValueError(f"sketch_dim must be >= 1, got {sketch_dim}")
    if sketch_dim > G.shape[1]:
        raise DimensionError(
            f"sketch_dim {sketch_dim} exceeds column count {G.shape[1]}"
        )
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((G.shape[1], sketch_dim)) / np.sqrt(sketch_dim)
    return G @ omega
