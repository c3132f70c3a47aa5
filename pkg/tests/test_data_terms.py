# tests/test_data_terms.py
"""Edge weights, temporal median background and the background difference"""
import numpy as np
import pytest

from src.data.data_terms import (background_difference, background_model_problem, edge_indicator,
                                 edge_weight, median_background)
from src.utils.errors import DimensionMismatchError, InvalidParameterError


def test_flat_image_gives_constant_weight():
    g = edge_weight(np.full((4, 4), 0.3), 0.2, 10.0)
    assert np.allclose(g.values, 10.2)


def test_edge_indicator_by_substitution():
    image = np.zeros((3, 3))
    image[1, 0] = 1.0
    image[0, 1] = np.sqrt(2.0)
    assert edge_indicator(image)[0, 0] == pytest.approx(0.25)
    assert edge_weight(image, 1.0, 0.0).values[0, 0] == pytest.approx(0.25)


def test_edge_weight_is_bounded(rng):
    image = rng.uniform(0, 255, (8, 8))
    g = edge_weight(image, 0.2, 10.0)
    assert np.all(g.values >= 10.0) and np.all(g.values <= 10.2)


def test_intensity_scale_sharpens_the_weight(rng):
    image = rng.uniform(0, 1, (6, 6))
    raw = edge_weight(image, 1.0, 0.1, intensity_scale=255.0)
    normalized = edge_weight(image, 1.0, 0.1)
    assert np.all(raw.values <= normalized.values)


@pytest.mark.parametrize('lam, mu', [(0.0, 0.0), (-1.0, 1.0), (1.0, -0.5)])
def test_edge_weight_rejects_bad_parameters(lam, mu):
    with pytest.raises(InvalidParameterError):
        edge_weight(np.zeros((2, 2)), lam, mu)


def test_median_of_a_single_frame(rng):
    frame = rng.uniform(size=(3, 5))
    assert np.array_equal(median_background([frame]), frame)


def test_median_of_three_values():
    frames = [np.full((2, 2), v) for v in (9.0, 1.0, 5.0)]
    assert np.all(median_background(frames) == 5.0)


@pytest.mark.parametrize('count', [4, 7])
def test_median_matches_a_sort_oracle(rng, count):
    frames = [rng.uniform(size=(4, 3)) for _ in range(count)]
    expected = np.sort(np.stack(frames), axis=0)[(count - 1) // 2]
    assert np.array_equal(median_background(frames), expected)
    shuffled = [frames[k] for k in rng.permutation(count)]
    assert np.array_equal(median_background(shuffled), expected)


def test_median_errors():
    with pytest.raises(InvalidParameterError):
        median_background([])
    with pytest.raises(DimensionMismatchError):
        median_background([np.zeros((2, 2)), np.zeros((2, 3))])


def test_background_difference(rng):
    frame = rng.uniform(size=(3, 3))
    assert np.all(background_difference(frame, frame) == 0)
    assert background_difference(np.array([[3.0]]), np.array([[10.0]]))[0, 0] == 7.0
    other = rng.uniform(size=(3, 3))
    assert np.array_equal(background_difference(frame, other), background_difference(other, frame))
    with pytest.raises(DimensionMismatchError):
        background_difference(np.zeros((2, 2)), np.zeros((3, 3)))


def test_background_model_problem(rng):
    frames = [rng.uniform(size=(5, 5)) for _ in range(3)]
    f, g = background_model_problem(frames, frames[0], 50.0)
    assert np.allclose(f, np.abs(median_background(frames) - frames[0]))
    assert np.all(g.values == 50.0)
    with pytest.raises(InvalidParameterError):
        background_model_problem(frames, frames[0], 0.0)
    f_stored, _ = background_model_problem(frames, frames[2], 1.0, background=np.zeros((5, 5)))
    assert np.allclose(f_stored, frames[2])
