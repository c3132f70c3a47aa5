# src/detection/acontrario.py
"""A contrario motion detection on a regularized field.

A pixel is meaningful when the mean of the renormalised field over its
window is so far above the image-wide mean that, under the no-motion
hypothesis, the Hoeffding bound on its tail probability times the number
of pixels (the number of false alarms) drops below epsilon.

The bound assumes independent samples inside a window. A TV-regularized
field does not satisfy this; the formulas are applied as they are.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import ndimage
from scipy.special import rel_entr

from config.settings import Config
from src.operators.grid_ops import as_field
from src.solvers.level_set import candidate_levels, closest_level_set
from src.utils.errors import DegenerateInputError, DimensionMismatchError, InvalidParameterError
from src.utils.logger import setup_logger
from src.utils.validators import validate_positive, validate_same_shape

logger = setup_logger(__name__)

PSI_MODES = ('max', 'minmax')


@dataclass(frozen=True)
class DetectionParams:
    # window is (2 radius + 1)^2, clipped at the image border
    radius: int = Config.DETECTION_RADIUS
    epsilon: float = Config.DETECTION_EPSILON
    psi_mode: str = 'max'

    def __post_init__(self):
        if int(self.radius) != self.radius or self.radius < 0:
            raise InvalidParameterError(f"radius must be a nonnegative integer, got {self.radius}")
        ok, message = validate_positive(self.epsilon, 'epsilon')
        if not ok:
            raise InvalidParameterError(message)
        if self.psi_mode not in PSI_MODES:
            raise InvalidParameterError(f"psi_mode must be one of {PSI_MODES}, got {self.psi_mode!r}")

    @property
    def window_size(self) -> int:
        return (2 * self.radius + 1) ** 2


class DetectionResult(NamedTuple):
    mask: np.ndarray
    stats: np.ndarray
    mu_hat: float
    log_nfa: np.ndarray


class MatchResult(NamedTuple):
    mask: np.ndarray
    level: float
    distance: int
    detection: np.ndarray


def _binary_kl(x, y):
    return rel_entr(x, y) + rel_entr(1.0 - x, 1.0 - y)


def hoeffding_H(x: float, y: float) -> float:
    """H(x, y) = x log(x/y) + (1-x) log((1-x)/(1-y)) for x, y in (0, 1)"""
    for name, value in (('x', x), ('y', y)):
        if not 0.0 < value < 1.0:
            raise InvalidParameterError(f"{name} must lie strictly inside (0, 1), got {value}")
    if x == y:
        return 0.0
    return float(_binary_kl(x, y))


def rejection_threshold(n_tot: int, n: int, epsilon: float) -> float:
    """log(n_tot / epsilon) / n : the H value a window of n samples has to reach"""
    if n_tot < 1 or n < 1:
        raise InvalidParameterError(f"n_tot and n must be >= 1, got {n_tot}, {n}")
    return float(np.log(n_tot / epsilon) / n)


def renormalize(field: np.ndarray, psi_mode: str = 'max') -> np.ndarray:
    """Map a nonnegative field into [0, 1]"""
    field = as_field(field)
    if np.any(field < 0):
        raise InvalidParameterError("detection field must be nonnegative")
    top = float(np.max(field))
    if psi_mode == 'minmax':
        low = float(np.min(field))
        if top <= low:
            raise DegenerateInputError("detection field is constant; min-max renormalisation is undefined")
        return (field - low) / (top - low)
    if top <= 0.0:
        raise DegenerateInputError("detection field is identically zero; renormalisation is undefined")
    return np.minimum(field / top, 1.0)


def window_means(values: np.ndarray, radius: int):
    """Mean over each clipped square window and the number of pixels it covers"""
    size = 2 * radius + 1
    total = ndimage.uniform_filter(values, size=size, mode='constant', cval=0.0)
    coverage = ndimage.uniform_filter(np.ones_like(values), size=size, mode='constant', cval=0.0)
    counts = np.rint(coverage * size * size).astype(np.int64)
    return total / coverage, counts


def log_nfa(stats: np.ndarray, mu_hat: float, counts: np.ndarray) -> np.ndarray:
    """log10 of the Hoeffding bound on the number of false alarms, per pixel"""
    n_tot = stats.size
    out = np.full(stats.shape, np.log10(n_tot))
    if not 0.0 < mu_hat < 1.0:
        return out
    above = stats > mu_hat
    kl = _binary_kl(np.clip(stats[above], 0.0, 1.0), mu_hat)
    out[above] = np.log10(n_tot) - counts[above] * kl / np.log(10.0)
    return out


def detect(field: np.ndarray, params: DetectionParams = DetectionParams(),
           mu_hat: Optional[float] = None) -> DetectionResult:
    """Per-pixel rejection of the no-motion hypothesis.

    `mu_hat` overrides the image-wide mean of the window statistics.
    """
    field = as_field(field)
    psi = renormalize(field, params.psi_mode)
    stats, counts = window_means(psi, params.radius)
    n_tot = field.size
    if mu_hat is None:
        mu_hat = float(np.mean(stats))

    mask = np.zeros(field.shape, dtype=bool)
    if 0.0 < mu_hat < 1.0:
        candidates = (stats > mu_hat) & (stats < 1.0)
        thresholds = np.log(n_tot / params.epsilon) / counts
        kl = np.zeros_like(stats)
        kl[candidates] = _binary_kl(stats[candidates], mu_hat)
        mask = candidates & (kl >= thresholds)

    logger.info(f"A contrario detection: mu_hat={mu_hat:.6g}, radius={params.radius}, "
                f"epsilon={params.epsilon}, {int(mask.sum())} of {n_tot} pixels detected")
    return DetectionResult(mask, stats, mu_hat, log_nfa(stats, mu_hat, counts))


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Erosion by a (2 radius + 1)^2 square; outside the image counts as background"""
    mask = np.asarray(mask, dtype=bool)
    if int(radius) != radius or radius < 0:
        raise InvalidParameterError(f"radius must be a nonnegative integer, got {radius}")
    if radius == 0:
        return mask.copy()
    structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    return ndimage.binary_erosion(mask, structure=structure, border_value=0)


def match_detection(result: DetectionResult, u: np.ndarray, radius: int,
                    strict: bool = True) -> MatchResult:
    """Erode a detection by half the window radius, then pick the closest level set of u"""
    u = as_field(u)
    ok, message = validate_same_shape(result.mask, u)
    if not ok:
        raise DimensionMismatchError(message)
    detection = erode(result.mask, radius // 2)
    level, mask, distance = closest_level_set(u, detection, candidate_levels(u), strict)
    logger.info(f"Closest level set: s={level:.6g}, {distance} differing pixels")
    return MatchResult(mask, level, distance, detection)


def detect_and_match(field: np.ndarray, u: np.ndarray,
                     params: DetectionParams = DetectionParams(),
                     strict: bool = True) -> MatchResult:
    """Detect, erode by half the window radius, then pick the closest level set of u"""
    field, u = as_field(field), as_field(u)
    ok, message = validate_same_shape(field, u)
    if not ok:
        raise DimensionMismatchError(message)
    return match_detection(detect(field, params), u, params.radius, strict)
