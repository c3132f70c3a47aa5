"""Validation utilities"""
import os
from typing import Tuple

import numpy as np

FIELD_EXTENSIONS = ('.pfm', '.pgm')


def validate_field_file(file_path: str) -> Tuple[bool, str]:
    """Validate if a field/image file exists and has a supported extension"""
    if not os.path.exists(file_path):
        return False, f"File not found: {file_path}"

    if not file_path.lower().endswith(FIELD_EXTENSIONS):
        return False, f"File must be a PFM or PGM file: {file_path}"

    if os.path.getsize(file_path) == 0:
        return False, f"File is empty: {file_path}"

    return True, "File is valid"


def validate_same_shape(*arrays: np.ndarray) -> Tuple[bool, str]:
    """Validate that all arrays live on the same grid"""
    shapes = [np.shape(a) for a in arrays]
    if any(len(s) != 2 for s in shapes):
        return False, f"Expected 2-D fields, got shapes {shapes}"
    if len(set(shapes)) > 1:
        return False, f"Dimension mismatch: {shapes}"
    return True, "Shapes match"


def validate_finite(array: np.ndarray, name: str = "field") -> Tuple[bool, str]:
    """Validate that an array holds no NaN or Inf"""
    if not np.all(np.isfinite(array)):
        return False, f"{name} contains NaN or Inf entries"
    return True, f"{name} is finite"


def validate_positive(value: float, name: str, strict: bool = True) -> Tuple[bool, str]:
    """Validate a scalar parameter is (strictly) positive and finite"""
    if not np.isfinite(value):
        return False, f"{name} must be finite, got {value}"
    if strict and value <= 0:
        return False, f"{name} must be > 0, got {value}"
    if not strict and value < 0:
        return False, f"{name} must be >= 0, got {value}"
    return True, f"{name} is valid"
