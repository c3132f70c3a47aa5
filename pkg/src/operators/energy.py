# src/operators/energy.py
"""Weighted anisotropic total variation and the discrete shape energy"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.operators.grid_ops import as_field, grad, grad_rot
from src.utils.errors import DimensionMismatchError, InvalidParameterError
from src.utils.validators import validate_finite, validate_same_shape


class TvVariant(str, Enum):
    """Neighbourhood used by the total variation"""
    AXIS = 'axis'          # weighted Manhattan TV, 4 neighbours
    DIAGONAL = 'diagonal'  # axis + diagonal terms, pi/4 invariant


@dataclass(frozen=True)
class WeightField:
    """Strictly positive per-pixel weight g"""
    values: np.ndarray
    max_g: float = field(init=False)

    def __post_init__(self):
        values = as_field(self.values)
        ok, message = validate_finite(values, "weight field")
        if not ok:
            raise InvalidParameterError(message)
        if values.size and np.min(values) <= 0:
            raise InvalidParameterError(f"weight field must be > 0 everywhere, min is {np.min(values)}")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'max_g', float(np.max(values)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @classmethod
    def constant(cls, shape: Tuple[int, int], value: float = 1.0) -> 'WeightField':
        return cls(np.full(shape, float(value)))


WeightLike = Union[WeightField, np.ndarray, float]


def as_weight(g: WeightLike, shape: Tuple[int, int]) -> WeightField:
    """Accept a WeightField, an array or a scalar and check it against the grid"""
    if isinstance(g, WeightField):
        weight = g
    elif np.isscalar(g):
        weight = WeightField.constant(shape, float(g))
    else:
        weight = WeightField(np.asarray(g, dtype=np.float64))
    if weight.shape != tuple(shape):
        raise DimensionMismatchError(f"Weight shape {weight.shape} does not match field shape {tuple(shape)}")
    return weight


def as_mask(theta) -> np.ndarray:
    """Coerce to a boolean mask, rejecting non-binary input"""
    arr = np.asarray(theta)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D mask, got shape {arr.shape}")
    if arr.dtype != bool:
        if not np.all((arr == 0) | (arr == 1)):
            raise InvalidParameterError("mask entries must be 0 or 1")
        arr = arr.astype(bool)
    return arr


def tv_weighted_aniso(u: np.ndarray, g: WeightLike) -> float:
    """Weighted TV with axis and diagonal terms, each family halved"""
    u = as_field(u)
    weight = as_weight(g, u.shape).values
    axis = grad(u)
    diag = grad_rot(u)
    total = np.sum(weight * (np.abs(axis.x) + np.abs(axis.y))) \
        + np.sum(weight * (np.abs(diag.x) + np.abs(diag.y)))
    return float(0.5 * total)


def tv_manhattan(u: np.ndarray, g: WeightLike) -> float:
    """Weighted Manhattan TV: sum g (|du/di| + |du/dj|)"""
    u = as_field(u)
    weight = as_weight(g, u.shape).values
    axis = grad(u)
    return float(np.sum(weight * (np.abs(axis.x) + np.abs(axis.y))))


def tv_isotropic(u: np.ndarray, g: WeightLike) -> float:
    """Weighted isotropic TV.

    Reference only: it has no coarea decomposition, so the solvers never use it.
    """
    u = as_field(u)
    weight = as_weight(g, u.shape).values
    axis = grad(u)
    return float(np.sum(weight * np.hypot(axis.x, axis.y)))


def total_variation(u: np.ndarray, g: WeightLike, variant: TvVariant = TvVariant.DIAGONAL) -> float:
    if TvVariant(variant) is TvVariant.AXIS:
        return tv_manhattan(u, g)
    return tv_weighted_aniso(u, g)


def shape_energy(theta, f: np.ndarray, g: WeightLike, alpha: float,
                 variant: TvVariant = TvVariant.DIAGONAL) -> float:
    """sum (alpha - f) theta + TV_g(theta)"""
    mask = as_mask(theta)
    f = as_field(f)
    ok, message = validate_same_shape(mask, f)
    if not ok:
        raise DimensionMismatchError(message)
    theta_f = mask.astype(np.float64)
    data = float(np.sum((alpha - f) * theta_f))
    return data + total_variation(theta_f, g, variant)


def midpoint_levels(u: np.ndarray) -> np.ndarray:
    """One threshold halfway between each pair of consecutive distinct values"""
    values = np.unique(as_field(u))
    return 0.5 * (values[:-1] + values[1:])


def coarea_check(u: np.ndarray, g: WeightLike,
                 levels: Optional[Sequence[float]] = None,
                 variant: TvVariant = TvVariant.DIAGONAL) -> Tuple[float, float]:
    """Return (TV(u), sum of gap-weighted level-set perimeters).

    u must be finitely valued; each gap between consecutive distinct values
    needs one threshold from `levels` (midpoints when omitted).
    """
    u = as_field(u)
    weight = as_weight(g, u.shape)
    values = np.unique(u)
    lhs = total_variation(u, weight, variant)
    if values.size <= 1:
        return lhs, 0.0

    if levels is None:
        levels = midpoint_levels(u)
    levels = np.sort(np.asarray(list(levels), dtype=np.float64))
    if levels.size == 0:
        raise InvalidParameterError("coarea_check needs at least one level for a non-constant field")

    rhs = 0.0
    for low, high in zip(values[:-1], values[1:]):
        inside = levels[(levels > low) & (levels < high)]
        if inside.size == 0:
            raise InvalidParameterError(f"no level strictly between {low} and {high}")
        indicator = (u > inside[0]).astype(np.float64)
        rhs += (high - low) * total_variation(indicator, weight, variant)
    return lhs, float(rhs)


def directional_perimeter_ratio(t: np.ndarray) -> np.ndarray:
    """1/2 (|nu|_1 + |R_{pi/4} nu|_1) for unit normals nu = (cos t, sin t)"""
    c, s = np.cos(t), np.sin(t)
    axis = np.abs(c) + np.abs(s)
    rotated = (np.abs(c - s) + np.abs(c + s)) / np.sqrt(2.0)
    return 0.5 * (axis + rotated)


def perimeter_ratio_bounds(samples: int) -> Tuple[float, float]:
    """Min and max of the anisotropic-to-Euclidean length ratio over sampled directions"""
    if samples < 2:
        raise InvalidParameterError(f"samples must be >= 2, got {samples}")
    t = 2.0 * np.pi * np.arange(samples) / samples
    ratio = directional_perimeter_ratio(t)
    return float(np.min(ratio)), float(np.max(ratio))
