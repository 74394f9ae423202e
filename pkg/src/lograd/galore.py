"""Projected adaptive optimizer with periodic basis refresh.

Per 2-D parameter, gradients are compressed through an orthonormal rank-r
basis, Adam-style moments are kept in the compressed space, and the
normalized update is decompressed before being applied to the weight. The
basis is recomputed from the current gradient every ``refresh_interval``
steps, either by exact truncated SVD or by the randomized range finder.
A full-matrix AdamW step is provided as the memory-unconstrained baseline,
plus the optimizer-state accounting that quantifies the savings.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DimensionError, NumericalError
from .sketch import Mixing
from .subspace import BasisMethod, ProjectionBasis, Side, srft_basis, svd_basis

__all__ = [
    "ScheduleKind",
    "LrSchedule",
    "schedule_lr",
    "OptMethod",
    "GaloreParamState",
    "OptimizerConfig",
    "galore_step",
    "AdamMoments",
    "full_adamw_step",
    "MemoryFootprint",
    "memory_footprint",
    "is_projectable",
    "save_state",
    "load_state",
]

_CHECKPOINT_VERSION = 1


class ScheduleKind(str, Enum):
    COSINE = "cosine"
    CONSTANT = "constant"


@dataclass(frozen=True)
class LrSchedule:
    initial_lr: float = 5e-5
    min_lr: float = 1e-6
    total_steps: int = 1000
    kind: ScheduleKind = ScheduleKind.COSINE

    def __post_init__(self) -> None:
        if self.min_lr > self.initial_lr:
            raise ValueError(
                f"min_lr {self.min_lr} exceeds initial_lr {self.initial_lr}"
            )
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")


def schedule_lr(sched: LrSchedule, step: int) -> float:
    """Learning rate at ``step``; steps past the end clamp to the minimum."""
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    if sched.kind is ScheduleKind.CONSTANT:
        return sched.initial_lr
    if step >= sched.total_steps:
        return sched.min_lr
    span = sched.initial_lr - sched.min_lr
    return sched.min_lr + 0.5 * span * (1.0 + math.cos(math.pi * step / sched.total_steps))


class OptMethod(str, Enum):
    FULL = "full"
    SVD = "svd"
    SRFT = "srft"


def is_projectable(shape: tuple[int, ...], rank: int) -> bool:
    """Only 2-D parameters with both dims >= rank get projected updates."""
    return len(shape) == 2 and min(shape) >= rank


@dataclass
class GaloreParamState:
    """Optimizer state of one projected parameter.

    ``basis`` is None until the first step; step 0 always counts as a
    refresh, so no update ever runs on an uninitialized basis. Moments live
    in the compressed space: (r, n) for a left basis, (m, r) for a right
    one. ``seed`` drives the sketch draw; with ``redraw_operator`` a fresh
    operator is derived from it at every refresh.
    """

    basis: Optional[ProjectionBasis]
    moment1: np.ndarray
    moment2: np.ndarray
    step: int
    rank: int
    refresh_interval: int
    side: Side
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    scale: float = 1.0
    method: BasisMethod = BasisMethod.SRFT
    reset_moments_on_refresh: bool = False
    oversample: int = 0
    mixing: Mixing = Mixing.UNITARY_DCT
    seed: int = 0
    redraw_operator: bool = True
    name: str = ""


@dataclass(frozen=True)
class OptimizerConfig:
    """Hyperparameters shared by every parameter of a run."""

    method: OptMethod = OptMethod.SRFT
    rank: int = 8
    oversample: int = 0
    refresh_interval: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    scale: float = 1.0
    mixing: Mixing = Mixing.UNITARY_DCT
    seed: int = 0
    reset_moments_on_refresh: bool = False
    redraw_operator: bool = True

    def param_state(self, weight: np.ndarray, name: str = "", index: int = 0) -> GaloreParamState:
        """Fresh projected state for one weight matrix.

        The per-parameter sketch seed is offset by ``index`` so parameters
        draw independent operators while the run stays reproducible.
        """
        if self.method is OptMethod.FULL:
            raise ValueError("full method keeps plain Adam moments, not projected state")
        m, n = weight.shape
        if not is_projectable(weight.shape, self.rank):
            raise DimensionError(
                f"parameter {name or weight.shape} is not projectable at rank {self.rank}"
            )
        side = Side.LEFT if m <= n else Side.RIGHT
        moment_shape = (self.rank, n) if side is Side.LEFT else (m, self.rank)
        return GaloreParamState(
            basis=None,
            moment1=np.zeros(moment_shape),
            moment2=np.zeros(moment_shape),
            step=0,
            rank=self.rank,
            refresh_interval=self.refresh_interval,
            side=side,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            scale=self.scale,
            method=BasisMethod.EXACT_SVD if self.method is OptMethod.SVD else BasisMethod.SRFT,
            reset_moments_on_refresh=self.reset_moments_on_refresh,
            oversample=self.oversample,
            mixing=self.mixing,
            seed=self.seed + 7919 * index,
            redraw_operator=self.redraw_operator,
            name=name,
        )


def _refresh_basis(state: GaloreParamState, grad: np.ndarray) -> None:
    if state.method is BasisMethod.EXACT_SVD:
        basis = svd_basis(grad, state.rank, state.side)
    else:
        op_seed = state.seed + state.step if state.redraw_operator else state.seed
        basis = srft_basis(
            grad, state.rank, state.oversample, state.mixing, op_seed, state.side
        )
    state.basis = replace(basis, birth_step=state.step)
    if state.reset_moments_on_refresh:
        state.moment1[:] = 0.0
        state.moment2[:] = 0.0


def _adam_direction(
    m1: np.ndarray, m2: np.ndarray, g: np.ndarray, t: int,
    beta1: float, beta2: float, eps: float,
) -> np.ndarray:
    # in-place moment update; t is the 1-based step count after this update
    m1 *= beta1
    m1 += (1.0 - beta1) * g
    m2 *= beta2
    m2 += (1.0 - beta2) * np.square(g)
    m_hat = m1 / (1.0 - beta1**t)
    v_hat = m2 / (1.0 - beta2**t)
    return m_hat / (np.sqrt(v_hat) + eps)


def galore_step(
    state: GaloreParamState,
    weight: np.ndarray,
    grad: np.ndarray,
    lr: float,
    weight_decay: float = 0.0,
) -> np.ndarray:
    """One projected optimizer step; mutates ``state``, returns the new weight.

    On refresh steps (step % refresh_interval == 0) the basis is recomputed
    from the incoming gradient before the update. The applied direction is
    the decompressed Adam step scaled by ``state.scale``, plus decoupled
    weight decay.
    """
    grad = np.asarray(grad, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if weight.shape != grad.shape:
        raise DimensionError(
            f"weight {weight.shape} and gradient {grad.shape} shapes differ"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericalError(
            f"non-finite gradient for parameter {state.name or weight.shape}"
        )
    if state.step % state.refresh_interval == 0:
        _refresh_basis(state, grad)
    assert state.basis is not None
    B = state.basis.basis
    if state.side is Side.LEFT:
        compressed = B.T @ grad
    else:
        compressed = grad @ B
    if compressed.shape != state.moment1.shape:
        raise DimensionError(
            f"projected gradient {compressed.shape} does not match moments "
            f"{state.moment1.shape} for parameter {state.name or weight.shape}"
        )
    t = state.step + 1
    direction = _adam_direction(
        state.moment1, state.moment2, compressed, t,
        state.beta1, state.beta2, state.eps,
    )
    if state.side is Side.LEFT:
        update = B @ direction
    else:
        update = direction @ B.T
    state.step = t
    return weight - lr * state.scale * update - lr * weight_decay * weight


@dataclass
class AdamMoments:
    """Full-matrix Adam state: two moment arrays and the step count."""

    m1: np.ndarray
    m2: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, weight: np.ndarray) -> "AdamMoments":
        return cls(m1=np.zeros_like(weight, dtype=np.float64),
                   m2=np.zeros_like(weight, dtype=np.float64))


def full_adamw_step(
    weight: np.ndarray,
    grad: np.ndarray,
    moments: AdamMoments,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> np.ndarray:
    """Standard AdamW with bias correction; mutates ``moments``."""
    grad = np.asarray(grad, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if weight.shape != grad.shape:
        raise DimensionError(
            f"weight {weight.shape} and gradient {grad.shape} shapes differ"
        )
    if not np.all(np.isfinite(grad)) or not np.all(np.isfinite(weight)):
        raise NumericalError("non-finite input to AdamW step")
    t = moments.step + 1
    direction = _adam_direction(moments.m1, moments.m2, grad, t, beta1, beta2, eps)
    moments.step = t
    return weight - lr * direction - lr * weight_decay * weight


@dataclass(frozen=True)
class MemoryFootprint:
    full_scalars: int
    projected_scalars: int
    reduction_fraction: float


def memory_footprint(m: int, n: int, r: int, store_basis: bool = True) -> MemoryFootprint:
    """Optimizer-state scalar counts for an m x n parameter at rank r.

    Full Adam keeps two m x n moments. Projected state keeps two compressed
    moments plus (optionally) the basis; the cheaper of the two projection
    sides is reported.
    """
    if r < 1 or r > min(m, n):
        raise DimensionError(f"rank {r} out of range for a {m}x{n} matrix")
    full = 2 * m * n
    left = 2 * r * n + (m * r if store_basis else 0)
    right = 2 * m * r + (n * r if store_basis else 0)
    projected = min(left, right)
    return MemoryFootprint(
        full_scalars=full,
        projected_scalars=projected,
        reduction_fraction=1.0 - projected / full,
    )


# --- checkpointing ---------------------------------------------------------

_SCALAR_FIELDS = (
    "step", "rank", "refresh_interval", "side", "beta1", "beta2", "eps",
    "scale", "method", "reset_moments_on_refresh", "oversample", "mixing",
    "seed", "redraw_operator", "name",
)


def _config_record(state: GaloreParamState) -> dict:
    record = {}
    for key in _SCALAR_FIELDS:
        value = getattr(state, key)
        record[key] = value.value if isinstance(value, Enum) else value
    return record


def _config_hash(record: dict) -> str:
    canonical = json.dumps(record, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def save_state(state: GaloreParamState, path) -> None:
    """Write a versioned checkpoint whose round-trip is bit-exact."""
    record = _config_record(state)
    header = {
        "version": _CHECKPOINT_VERSION,
        "config": record,
        "config_hash": _config_hash(record),
        "has_basis": state.basis is not None,
    }
    if state.basis is not None:
        header["basis_meta"] = {
            "side": state.basis.side.value,
            "rank": state.basis.rank,
            "birth_step": state.basis.birth_step,
            "method": state.basis.method.value,
            "rank_deficient": state.basis.rank_deficient,
        }
    arrays = {
        "moment1": state.moment1,
        "moment2": state.moment2,
        "header": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8),
    }
    if state.basis is not None:
        arrays["basis"] = state.basis.basis
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_state(path) -> GaloreParamState:
    """Read a checkpoint written by ``save_state``; verifies the config hash."""
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header["version"] != _CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header['version']}")
        record = header["config"]
        if _config_hash(record) != header["config_hash"]:
            raise ValueError("checkpoint config hash mismatch (corrupt file?)")
        basis = None
        if header["has_basis"]:
            meta = header["basis_meta"]
            basis = ProjectionBasis(
                basis=data["basis"].copy(),
                side=Side(meta["side"]),
                rank=meta["rank"],
                birth_step=meta["birth_step"],
                method=BasisMethod(meta["method"]),
                rank_deficient=meta["rank_deficient"],
            )
        return GaloreParamState(
            basis=basis,
            moment1=data["moment1"].copy(),
            moment2=data["moment2"].copy(),
            step=record["step"],
            rank=record["rank"],
            refresh_interval=record["refresh_interval"],
            side=Side(record["side"]),
            beta1=record["beta1"],
            beta2=record["beta2"],
            eps=record["eps"],
            scale=record["scale"],
            method=BasisMethod(record["method"]),
            reset_moments_on_refresh=record["reset_moments_on_refresh"],
            oversample=record["oversample"],
            mixing=Mixing(record["mixing"]),
            seed=record["seed"],
            redraw_operator=record["redraw_operator"],
            name=record["name"],
        )
