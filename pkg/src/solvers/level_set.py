# src/solvers/level_set.py
"""Turn a solved ROF field into solutions of the binary shape problem.

Every upper level set {u > s} (and {u >= s}) of the ROF solution minimizes
the shape energy at alpha = s, so one solve serves every alpha.
"""
from typing import List, Sequence, Tuple

import numpy as np

from src.operators.energy import as_mask
from src.operators.grid_ops import as_field
from src.utils.errors import DimensionMismatchError, InvalidParameterError
from src.utils.logger import setup_logger
from src.utils.validators import validate_same_shape

logger = setup_logger(__name__)

AMBIGUITY_MARGIN = 1e-3


def threshold(u: np.ndarray, s: float, strict: bool = True) -> np.ndarray:
    """Mask of u > s (strict) or u >= s"""
    u = as_field(u)
    return u > s if strict else u >= s


def ambiguous_alphas(u: np.ndarray, alphas: Sequence[float],
                     margin: float = AMBIGUITY_MARGIN) -> List[float]:
    """Alphas within `margin` of a value taken by u; the minimizer may not be unique there"""
    levels = np.unique(as_field(u))
    flagged = []
    for alpha in alphas:
        if levels.size and np.min(np.abs(levels - alpha)) <= margin:
            flagged.append(float(alpha))
    return flagged


def alpha_sweep(u: np.ndarray, alphas: Sequence[float], strict: bool = True) -> List[np.ndarray]:
    """One minimizing mask per alpha, in the order given"""
    u = as_field(u)
    for alpha in ambiguous_alphas(u, alphas):
        logger.warning(f"alpha={alpha} lies within {AMBIGUITY_MARGIN} of a level of u; "
                       f"the minimizer may not be unique there")
    return [threshold(u, alpha, strict) for alpha in alphas]


def is_nested(masks: Sequence[np.ndarray], alphas: Sequence[float]) -> bool:
    """True when a larger alpha always gives a subset of the mask of a smaller one"""
    order = np.argsort(np.asarray(alphas, dtype=np.float64), kind='stable')
    ordered = [masks[k] for k in order]
    return all(not np.any(hi & ~lo) for lo, hi in zip(ordered[:-1], ordered[1:]))


def closest_level_set(u: np.ndarray, target, candidates: Sequence[float],
                      strict: bool = True) -> Tuple[float, np.ndarray, int]:
    """Candidate level whose mask has the fewest pixels differing from target.

    Ties go to the smaller level.
    """
    u = as_field(u)
    target = as_mask(target)
    ok, message = validate_same_shape(u, target)
    if not ok:
        raise DimensionMismatchError(message)
    candidates = sorted(float(c) for c in candidates)
    if not candidates:
        raise InvalidParameterError("closest_level_set needs at least one candidate level")

    best_level, best_mask, best_distance = None, None, None
    for level in candidates:
        mask = threshold(u, level, strict)
        distance = int(np.count_nonzero(mask ^ target))
        if best_distance is None or distance < best_distance:
            best_level, best_mask, best_distance = level, mask, distance
    return best_level, best_mask, best_distance


def candidate_levels(u: np.ndarray, count: int = 256) -> np.ndarray:
    """Levels strictly inside the range of u, plus one below min and one above max"""
    u = as_field(u)
    low, high = float(np.min(u)), float(np.max(u))
    span = max(high - low, 1.0)
    inner = np.linspace(low, high, count + 2)[1:-1] if high > low else np.empty(0)
    return np.concatenate(([low - span], inner, [high + span]))
