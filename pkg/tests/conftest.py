# tests/conftest.py
"""Shared fixtures; file logging is switched off before anything imports Config"""
import os

os.environ.setdefault('TVCUT_LOG_TO_FILE', 'False')

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square_image():
    """16x16 image: a bright 6x6 square on a dark background"""
    image = np.zeros((16, 16))
    image[5:11, 5:11] = 1.0
    return image


@pytest.fixture
def noisy_square(square_image, rng):
    return square_image + 0.1 * rng.standard_normal(square_image.shape)


@pytest.fixture
def make_piecewise(rng):
    """Two rectangles of different heights on a zero background, plus Gaussian noise"""
    def _make(shape, noise=0.1):
        h, w = shape
        image = np.zeros(shape)
        image[h // 8:h // 2, w // 8:w // 2] = 1.0
        image[h // 2:7 * h // 8, w // 2:7 * w // 8] = 0.5
        return image + noise * rng.standard_normal(shape)
    return _make
