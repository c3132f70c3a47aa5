# src/operators/grid_ops.py
"""Discrete differential operators on the pixel grid.

Fields are float64 arrays of shape (H, W) indexed (i, j) = (row, column).
Gradients are forward differences that vanish past the far boundary; each
divergence is the exact negative adjoint of its gradient, so

    <div p, w> + <p, grad w> == 0

holds for every pair (p, w), including fields whose boundary rows and
columns are non-zero.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.utils.errors import DimensionMismatchError
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class VectorField:
    """Two components per pixel; both arrays share the grid of the field they came from"""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if np.shape(self.x) != np.shape(self.y) or np.ndim(self.x) != 2:
            raise DimensionMismatchError(
                f"Vector field components must be 2-D and equal-shaped, got "
                f"{np.shape(self.x)} and {np.shape(self.y)}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.x.shape

    @classmethod
    def zeros(cls, shape: Tuple[int, int]) -> 'VectorField':
        return cls(np.zeros(shape), np.zeros(shape))

    def scaled(self, weight) -> 'VectorField':
        """Pointwise product with a scalar or a field of the same shape"""
        return VectorField(weight * self.x, weight * self.y)

    def inner(self, other: 'VectorField') -> float:
        return float(np.sum(self.x * other.x) + np.sum(self.y * other.y))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))


def as_field(u) -> np.ndarray:
    """Coerce input to a 2-D float64 array"""
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D field, got shape {arr.shape}")
    return arr


def grad(u: np.ndarray) -> VectorField:
    """Axis-aligned forward differences (zero on the last row / column)"""
    u = as_field(u)
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:-1, :] = u[1:, :] - u[:-1, :]
    gy[:, :-1] = u[:, 1:] - u[:, :-1]
    return VectorField(gx, gy)


def div(p: VectorField) -> np.ndarray:
    """Negative adjoint of grad"""
    h, w = p.shape
    # entries grad never writes do not take part in the pairing
    px = np.zeros((h, w))
    py = np.zeros((h, w))
    px[:-1, :] = p.x[:-1, :]
    py[:, :-1] = p.y[:, :-1]

    out = px.copy()
    out[1:, :] -= px[:-1, :]
    out += py
    out[:, 1:] -= py[:, :-1]
    return out


def grad_rot(u: np.ndarray) -> VectorField:
    """Diagonal forward differences, scaled by 1/sqrt(2).

    x component pairs (i, j) with (i+1, j+1); y component pairs (i, j)
    with (i-1, j+1). Missing partners give 0.
    """
    u = as_field(u)
    gxy = np.zeros_like(u)
    gyx = np.zeros_like(u)
    gxy[:-1, :-1] = (u[1:, 1:] - u[:-1, :-1]) * INV_SQRT2
    gyx[1:, :-1] = (u[:-1, 1:] - u[1:, :-1]) * INV_SQRT2
    return VectorField(gxy, gyx)


def div_rot(p: VectorField) -> np.ndarray:
    """Negative adjoint of grad_rot.

    (div_rot p)[a, b] = (p.x[a, b] - p.x[a-1, b-1] + p.y[a, b] - p.y[a+1, b-1]) / sqrt(2)
    with p restricted to the entries grad_rot can produce.
    """
    h, w = p.shape
    px = np.zeros((h, w))
    py = np.zeros((h, w))
    px[:-1, :-1] = p.x[:-1, :-1]
    py[1:, :-1] = p.y[1:, :-1]

    out = px + py
    out[1:, 1:] -= px[:-1, :-1]
    out[:-1, 1:] -= py[1:, :-1]
    return out * INV_SQRT2


def averaged_operator(v: np.ndarray) -> np.ndarray:
    """-(div grad v + div_rot grad_rot v) / 2 : the unit-weight normal operator of the projection step"""
    return -0.5 * (div(grad(v)) + div_rot(grad_rot(v)))


def operator_norm_estimate(h: int, w: int, max_iter: int = 1000,
                           tol: float = 1e-10, seed: int = 0) -> Tuple[float, bool]:
    """Power-iteration estimate of the largest eigenvalue of averaged_operator.

    Returns (estimate, converged). The projection step is only certified for
    tau <= 1/8 on normalised weights; the estimate shows how conservative
    that bound is on a given grid.
    """
    if h < 1 or w < 1:
        raise DimensionMismatchError(f"Grid must be at least 1x1, got {h}x{w}")
    if h == 1 and w == 1:
        return 0.0, True

    rng = np.random.default_rng(seed)
    v = rng.standard_normal((h, w))
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        mv = averaged_operator(v)
        new_estimate = float(np.sum(v * mv))
        norm = np.linalg.norm(mv)
        if norm == 0.0:
            return 0.0, True
        v = mv / norm
        if abs(new_estimate - estimate) <= tol * max(1.0, abs(new_estimate)):
            return new_estimate, True
        estimate = new_estimate

    logger.warning(f"Power iteration on {h}x{w} grid did not converge after {max_iter} steps; "
                   f"estimate {estimate:.6f}")
    return estimate, False
