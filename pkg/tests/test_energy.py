# tests/test_energy.py
"""Weighted total variations, shape energy, coarea and the perimeter ratio"""
import numpy as np
import pytest

from oracles import tv_by_coarea
from src.operators.energy import (TvVariant, WeightField, as_mask, as_weight, coarea_check,
                                  directional_perimeter_ratio, midpoint_levels, perimeter_ratio_bounds,
                                  shape_energy, total_variation, tv_isotropic, tv_manhattan,
                                  tv_weighted_aniso)
from src.utils.errors import DimensionMismatchError, InvalidParameterError

C1 = (1 + np.sqrt(2.0)) / 2
C2 = 1 / np.sqrt(2 - np.sqrt(2.0))


def _delta(shape=(5, 5)):
    u = np.zeros(shape)
    u[shape[0] // 2, shape[1] // 2] = 1.0
    return u


def test_weight_field_rejects_nonpositive_entries():
    with pytest.raises(InvalidParameterError):
        WeightField(np.array([[1.0, 0.0]]))
    with pytest.raises(InvalidParameterError):
        WeightField(np.array([[1.0, np.nan]]))


def test_weight_field_records_its_maximum():
    g = WeightField(np.array([[0.5, 4.0], [1.0, 2.0]]))
    assert g.max_g == 4.0


def test_as_weight_accepts_scalars_and_checks_shape():
    assert np.all(as_weight(2.5, (3, 2)).values == 2.5)
    with pytest.raises(DimensionMismatchError):
        as_weight(np.ones((2, 2)), (3, 3))


def test_as_mask_rejects_non_binary_values():
    assert as_mask(np.array([[0, 1], [1, 0]])).dtype == bool
    with pytest.raises(InvalidParameterError):
        as_mask(np.array([[0, 0.5]]))


@pytest.mark.parametrize('tv', [tv_weighted_aniso, tv_manhattan, tv_isotropic])
def test_tv_of_constant_is_zero(tv, rng):
    assert tv(np.full((4, 4), 2.0), rng.uniform(0.1, 2.0, (4, 4))) == 0.0


def test_tv_of_single_pixel():
    assert tv_weighted_aniso(_delta(), 1.0) == pytest.approx(2 + np.sqrt(2.0), abs=1e-12)
    assert tv_manhattan(_delta(), 1.0) == pytest.approx(4.0, abs=1e-12)


def test_manhattan_tv_of_row_ramp():
    u = np.repeat(np.arange(3.0)[:, None], 3, axis=1)
    assert tv_manhattan(u, 1.0) == pytest.approx(6.0)


def test_isotropic_tv_never_exceeds_manhattan(rng):
    u = rng.standard_normal((6, 6))
    assert tv_isotropic(u, 1.0) <= tv_manhattan(u, 1.0) + 1e-12


def test_total_variation_dispatches_on_variant(rng):
    u = rng.standard_normal((4, 4))
    assert total_variation(u, 1.0, TvVariant.AXIS) == tv_manhattan(u, 1.0)
    assert total_variation(u, 1.0, 'diagonal') == tv_weighted_aniso(u, 1.0)


def test_shape_energy_of_empty_and_full_masks(rng):
    f = rng.uniform(0, 1, (3, 4))
    g = rng.uniform(0.1, 2.0, (3, 4))
    assert shape_energy(np.zeros((3, 4), dtype=bool), f, g, 0.3) == 0.0
    assert shape_energy(np.ones((3, 4), dtype=bool), f, g, 0.3) == pytest.approx(np.sum(0.3 - f))


def test_shape_energy_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        shape_energy(np.zeros((2, 2), dtype=bool), np.zeros((3, 3)), 1.0, 0.5)


def test_coarea_of_constant_field():
    assert coarea_check(np.full((3, 3), 5.0), 1.0) == (0.0, 0.0)


def test_coarea_of_binary_field_is_exact(rng):
    u = (rng.uniform(size=(5, 5)) > 0.5).astype(float)
    g = rng.uniform(0.1, 2.0, (5, 5))
    lhs, rhs = coarea_check(u, g)
    assert lhs == rhs


@pytest.mark.parametrize('variant', list(TvVariant))
def test_coarea_of_three_valued_field(rng, variant):
    u = rng.choice([0.0, 1.0, 3.0], size=(4, 4))
    g = rng.uniform(0.1, 2.0, (4, 4))
    lhs, rhs = coarea_check(u, g, variant=variant)
    assert rhs == pytest.approx(lhs, rel=1e-10)
    assert tv_by_coarea(u, g, variant) == pytest.approx(lhs, rel=1e-10)


def test_coarea_of_random_integer_field_matches_oracle(rng):
    u = rng.integers(0, 5, size=(6, 6)).astype(float)
    g = rng.uniform(0.1, 2.0, (6, 6))
    assert tv_by_coarea(u, g) == pytest.approx(tv_weighted_aniso(u, g), rel=1e-10)


def test_coarea_requires_a_level_in_every_gap():
    u = np.array([[0.0, 1.0], [3.0, 3.0]])
    with pytest.raises(InvalidParameterError):
        coarea_check(u, 1.0, levels=[0.5])
    with pytest.raises(InvalidParameterError):
        coarea_check(u, 1.0, levels=[])


def test_midpoint_levels():
    assert np.allclose(midpoint_levels(np.array([[0.0, 1.0], [3.0, 1.0]])), [0.5, 2.0])


def test_directional_ratio_at_axis_and_midpoint():
    assert directional_perimeter_ratio(np.array([0.0]))[0] == pytest.approx(C1, abs=1e-12)
    assert directional_perimeter_ratio(np.array([np.pi / 8]))[0] == pytest.approx(C2, abs=1e-12)


def test_perimeter_ratio_bounds():
    low, high = perimeter_ratio_bounds(4096)
    assert low == pytest.approx(C1, abs=1e-4)
    assert high == pytest.approx(C2, abs=1e-4)


def test_perimeter_ratio_bounds_needs_two_samples():
    with pytest.raises(InvalidParameterError):
        perimeter_ratio_bounds(1)
