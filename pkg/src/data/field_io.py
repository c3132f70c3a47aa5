# src/data/field_io.py
"""Readers and writers for PFM fields and PGM images / masks"""
import os
from typing import Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.operators.grid_ops import as_field
from src.utils.errors import FieldFormatError
from src.utils.logger import setup_logger
from src.utils.validators import validate_field_file, validate_finite

logger = setup_logger(__name__)

MASK_INSIDE = 255
PGM_MAXVAL = {'L': 255, 'I;16': 65535, 'I;16B': 65535, 'I': 65535}


def _check_file(path: str):
    ok, message = validate_field_file(path)
    if not ok:
        raise FieldFormatError(message)


def read_pfm(path: str) -> np.ndarray:
    """Read a single-channel PFM as float64, top row first"""
    _check_file(path)
    with open(path, 'rb') as fh:
        try:
            tag = fh.readline().decode('ascii').strip()
            dims = fh.readline().decode('ascii').split()
            scale = float(fh.readline().decode('ascii').strip())
            width, height = int(dims[0]), int(dims[1])
        except (UnicodeDecodeError, ValueError, IndexError) as e:
            raise FieldFormatError(f"Malformed PFM header in {path}: {e}") from e
        if tag != 'Pf':
            raise FieldFormatError(f"{path} is not a single-channel PFM (tag {tag!r})")
        if width <= 0 or height <= 0:
            raise FieldFormatError(f"{path} has invalid dimensions {width}x{height}")
        dtype = '<f4' if scale < 0 else '>f4'
        data = np.frombuffer(fh.read(), dtype=dtype)

    if data.size != width * height:
        raise FieldFormatError(f"{path}: expected {width * height} samples, found {data.size}")
    # PFM stores the bottom row first
    field = np.flipud(data.reshape(height, width)).astype(np.float64)
    ok, message = validate_finite(field, path)
    if not ok:
        raise FieldFormatError(message)
    logger.debug(f"Read PFM {path} ({height}x{width})")
    return field


def write_pfm(path: str, field: np.ndarray):
    """Write a field as little-endian single-channel PFM (float32)"""
    field = as_field(field)
    height, width = field.shape
    data = np.flipud(field).astype('<f4')
    with open(path, 'wb') as fh:
        fh.write(f"Pf\n{width} {height}\n-1.0\n".encode('ascii'))
        fh.write(data.tobytes())
    logger.debug(f"Wrote PFM {path} ({height}x{width})")


def read_pgm(path: str) -> Tuple[np.ndarray, int]:
    """Read a PGM image; returns (intensities in [0, 1], the format's max value)"""
    _check_file(path)
    try:
        with Image.open(path) as img:
            mode = img.mode
            raw = np.asarray(img, dtype=np.float64)
    except (UnidentifiedImageError, OSError) as e:
        raise FieldFormatError(f"Cannot read PGM {path}: {e}") from e
    if mode not in PGM_MAXVAL or raw.ndim != 2:
        raise FieldFormatError(f"{path} is not a grayscale PGM (mode {mode})")
    maxval = PGM_MAXVAL[mode]
    return raw / maxval, maxval


def write_pgm(path: str, image: np.ndarray):
    """Write intensities in [0, 1] as 8-bit binary PGM"""
    image = as_field(image)
    data = np.rint(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    Image.fromarray(data).save(path, format='PPM')


def read_field(path: str) -> np.ndarray:
    """Any supported file as a real field: PFM as stored, PGM normalised to [0, 1]"""
    if path.lower().endswith('.pfm'):
        return read_pfm(path)
    image, _ = read_pgm(path)
    return image


def read_mask(path: str) -> np.ndarray:
    """Read a mask PGM; pixels at or above half intensity are inside"""
    image, _ = read_pgm(path)
    return image >= 0.5


def write_mask(path: str, mask: np.ndarray):
    """Write a boolean mask as PGM, 255 inside and 0 outside"""
    data = np.where(np.asarray(mask, dtype=bool), MASK_INSIDE, 0).astype(np.uint8)
    Image.fromarray(data).save(path, format='PPM')


def load_flow_norm(path: str) -> np.ndarray:
    """Read a precomputed optical-flow magnitude field; it must be nonnegative"""
    if not os.path.exists(path):
        raise FieldFormatError(f"File not found: {path}")
    field = read_field(path)
    if np.any(field < 0):
        raise FieldFormatError(f"{path} holds negative flow magnitudes (min {field.min()})")
    return field
