# tests/test_grid_ops.py
"""Forward differences, rotated differences and their adjoint divergences"""
import numpy as np
import pytest

from oracles import dense_matrix, dense_vector_matrix
from src.operators.grid_ops import (VectorField, averaged_operator, div, div_rot, grad, grad_rot,
                                    operator_norm_estimate)
from src.utils.errors import DimensionMismatchError

SQRT2 = np.sqrt(2.0)


def _random_vector_field(rng, shape):
    return VectorField(rng.standard_normal(shape), rng.standard_normal(shape))


def test_grad_of_constant_is_zero():
    p = grad(np.full((4, 5), 3.7))
    assert np.all(p.x == 0) and np.all(p.y == 0)


def test_grad_of_row_ramp():
    u = np.repeat(np.arange(3.0)[:, None], 3, axis=1)
    p = grad(u)
    assert np.array_equal(p.x, np.array([[1, 1, 1], [1, 1, 1], [0, 0, 0]], dtype=float))
    assert np.all(p.y == 0)


def test_grad_matches_per_entry_differences(rng):
    u = rng.standard_normal((4, 4))
    p = grad(u)
    for i in range(4):
        for j in range(4):
            assert p.x[i, j] == (u[i + 1, j] - u[i, j] if i < 3 else 0.0)
            assert p.y[i, j] == (u[i, j + 1] - u[i, j] if j < 3 else 0.0)


def test_grad_rot_of_delta():
    u = np.zeros((3, 3))
    u[1, 1] = 1.0
    p = grad_rot(u)
    expected_x = np.zeros((3, 3))
    expected_x[0, 0], expected_x[1, 1] = 1 / SQRT2, -1 / SQRT2
    expected_y = np.zeros((3, 3))
    expected_y[2, 0], expected_y[1, 1] = 1 / SQRT2, -1 / SQRT2
    assert np.allclose(p.x, expected_x, atol=1e-15)
    assert np.allclose(p.y, expected_y, atol=1e-15)


def test_grad_rot_of_diagonal_ramp():
    i, j = np.indices((5, 5))
    p = grad_rot((i + j).astype(float))
    assert np.allclose(p.x[:-1, :-1], SQRT2)
    assert np.all(p.x[-1, :] == 0) and np.all(p.x[:, -1] == 0)


def test_grad_rot_of_constant_is_zero():
    p = grad_rot(np.full((3, 4), -2.0))
    assert np.all(p.x == 0) and np.all(p.y == 0)


@pytest.mark.parametrize('operator', [div, div_rot])
def test_div_of_zero_field_is_zero(operator):
    assert np.all(operator(VectorField.zeros((4, 6))) == 0)


@pytest.mark.parametrize('shape', [(1, 1), (1, 5), (5, 1), (5, 5), (7, 3)])
def test_div_is_minus_adjoint_of_grad(rng, shape):
    p = _random_vector_field(rng, shape)
    w = rng.standard_normal(shape)
    lhs = np.sum(div(p) * w)
    rhs = p.inner(grad(w))
    assert abs(lhs + rhs) <= 1e-12 * max(1.0, abs(lhs))


@pytest.mark.parametrize('shape', [(1, 1), (1, 5), (5, 1), (5, 5), (7, 3)])
def test_div_rot_is_minus_adjoint_of_grad_rot(rng, shape):
    p = _random_vector_field(rng, shape)
    w = rng.standard_normal(shape)
    lhs = np.sum(div_rot(p) * w)
    rhs = p.inner(grad_rot(w))
    assert abs(lhs + rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_inner_product_identity_by_explicit_summation(rng):
    shape = (5, 5)
    p = _random_vector_field(rng, shape)
    w = rng.standard_normal(shape)
    gw = grad(w)
    total = 0.0
    for i in range(5):
        for j in range(5):
            total += div(p)[i, j] * w[i, j] + p.x[i, j] * gw.x[i, j] + p.y[i, j] * gw.y[i, j]
    assert abs(total) < 1e-12


@pytest.mark.parametrize('shape', [(2, 3), (3, 3), (4, 2)])
def test_dense_divergences_are_negative_transposes(shape):
    assert np.allclose(dense_vector_matrix(div, shape), -dense_matrix(grad, shape).T)
    assert np.allclose(dense_vector_matrix(div_rot, shape), -dense_matrix(grad_rot, shape).T)


def test_vector_field_rejects_mismatched_components():
    with pytest.raises(DimensionMismatchError):
        VectorField(np.zeros((2, 2)), np.zeros((2, 3)))


def test_operator_norm_on_single_pixel_is_zero():
    assert operator_norm_estimate(1, 1) == (0.0, True)


@pytest.mark.parametrize('shape', [(2, 2), (4, 5)])
def test_operator_norm_matches_dense_eigenvalue(shape):
    exact = np.max(np.linalg.eigvalsh(dense_matrix(averaged_operator, shape)))
    estimate, _ = operator_norm_estimate(*shape)
    assert estimate <= exact + 1e-9
    assert estimate >= 0.99 * exact
    assert estimate <= 8.0


def test_operator_norm_on_larger_grid_is_bounded():
    estimate, _ = operator_norm_estimate(16, 16)
    assert 0.0 < estimate <= 8.0


def test_operator_norm_rejects_empty_grid():
    with pytest.raises(DimensionMismatchError):
        operator_norm_estimate(0, 3)
