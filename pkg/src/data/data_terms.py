# src/data/data_terms.py
"""Data fields f and weight fields g built from imagery"""
from typing import Optional, Sequence, Tuple

import numpy as np

from src.operators.energy import WeightField
from src.operators.grid_ops import as_field, grad
from src.utils.errors import DimensionMismatchError, InvalidParameterError
from src.utils.logger import setup_logger
from src.utils.validators import validate_positive, validate_same_shape

logger = setup_logger(__name__)


def edge_indicator(image: np.ndarray) -> np.ndarray:
    """g_I = 1 / (1 + |grad I|^2)"""
    axis = grad(as_field(image))
    return 1.0 / (1.0 + axis.x ** 2 + axis.y ** 2)


def edge_weight(image: np.ndarray, lam: float, mu: float, intensity_scale: float = 1.0) -> WeightField:
    """g = lam * g_I + mu, with the image multiplied by intensity_scale before differencing"""
    for name, value in (('lambda', lam), ('mu', mu)):
        ok, message = validate_positive(value, name, strict=False)
        if not ok:
            raise InvalidParameterError(message)
    if lam + mu <= 0:
        raise InvalidParameterError("lambda and mu cannot both be zero; the weight would vanish")
    g_image = edge_indicator(as_field(image) * intensity_scale)
    return WeightField(lam * g_image + mu)


def median_background(frames: Sequence[np.ndarray]) -> np.ndarray:
    """Per-pixel temporal median; the lower median for an even frame count"""
    if len(frames) == 0:
        raise InvalidParameterError("median_background needs at least one frame")
    stack = [as_field(frame) for frame in frames]
    ok, message = validate_same_shape(*stack)
    if not ok:
        raise DimensionMismatchError(message)
    return np.quantile(np.stack(stack), 0.5, axis=0, method='lower')


def background_difference(frame: np.ndarray, background: np.ndarray) -> np.ndarray:
    """f = |B - I|"""
    frame, background = as_field(frame), as_field(background)
    ok, message = validate_same_shape(frame, background)
    if not ok:
        raise DimensionMismatchError(message)
    return np.abs(background - frame)


def background_model_problem(frames: Sequence[np.ndarray], current: np.ndarray, lam: float,
                             background: Optional[np.ndarray] = None) -> Tuple[np.ndarray, WeightField]:
    """(f, g) for background subtraction: f = |B - I| with B the temporal median, g == lam

    A background already computed from the same frames can be passed to skip the median.
    """
    ok, message = validate_positive(lam, 'lambda')
    if not ok:
        raise InvalidParameterError(message)
    if background is None:
        background = median_background(frames)
    f = background_difference(current, background)
    logger.info(f"Background model from {len(frames)} frames: f in [{f.min():.4g}, {f.max():.4g}], lambda={lam}")
    return f, WeightField.constant(f.shape, lam)
