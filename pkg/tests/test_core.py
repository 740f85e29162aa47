import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kovtop.core import (MapStepScale, QuadraticField, as_state,
                         elementary_symmetric, evaluate_field, fmt17,
                         painleve_condition)
from kovtop.errors import DimensionError, DomainError
from kovtop.flows import euler_field, kovalevskaya_field

finite_coords = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


def test_as_state_rejects_small_and_nonfinite():
    with pytest.raises(DimensionError):
        as_state([1.0, 2.0])
    with pytest.raises(DomainError):
        as_state([1.0, np.nan, 2.0])
    with pytest.raises(DimensionError):
        as_state([1.0, 2.0, 3.0], dim=4)


def test_field_vanishes_at_origin():
    f = kovalevskaya_field(3)
    assert np.array_equal(evaluate_field(f, [0.0, 0.0, 0.0]), np.zeros(3))


def test_kovalevskaya_field_on_diagonal():
    f = kovalevskaya_field(3)
    np.testing.assert_allclose(evaluate_field(f, [1.0, 1.0, 1.0]), [1.0, 1.0, 1.0])


def test_euler_field_example():
    np.testing.assert_allclose(evaluate_field(euler_field(), [1.0, 2.0, 3.0]),
                               [6.0, 3.0, 2.0])


def test_field_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate_field(euler_field(), [1.0, 2.0, 3.0, 4.0])


def test_quadratic_field_rejects_lower_triangular():
    c = np.zeros((3, 3, 3))
    c[0, 2, 1] = 1.0  # j > k violates the convention
    with pytest.raises(ValueError):
        QuadraticField(3, c)


def test_from_terms_sorts_indices():
    f = QuadraticField.from_terms(3, {(0, 2, 1): 2.0})
    assert f.coeffs[0, 1, 2] == 2.0
    np.testing.assert_allclose(evaluate_field(f, [1.0, 3.0, 5.0]), [30.0, 0.0, 0.0])


@settings(deadline=None, max_examples=50)
@given(arrays(float, 3, elements=finite_coords), st.floats(0.1, 3.0))
def test_field_homogeneous_degree_two(y, lam):
    f = kovalevskaya_field(3)
    lhs = evaluate_field(f, lam * y)
    rhs = lam * lam * evaluate_field(f, y)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_painleve_kovalevskaya_matrix():
    a = [[-1, 1, 1], [1, -1, 1], [1, 1, -1]]
    assert painleve_condition(a)


def test_painleve_broken_matrix():
    a = [[-1, 2, 1], [1, -1, 1], [1, 1, -1]]
    assert not painleve_condition(a)


def test_painleve_zero_matrix():
    assert painleve_condition(np.zeros((3, 3)))


@settings(deadline=None, max_examples=50)
@given(arrays(float, (3, 3), elements=finite_coords))
def test_painleve_cyclic_relabeling(a):
    perm = [1, 2, 0]
    b = a[np.ix_(perm, perm)]
    assert painleve_condition(a) == painleve_condition(b)


def test_elementary_symmetric_examples():
    y = [1.0, 2.0, 3.0, 4.0]
    assert elementary_symmetric(y, 2) == 35.0
    assert elementary_symmetric(y, 0) == 1.0
    assert elementary_symmetric(y, 4) == 24.0


def test_elementary_symmetric_out_of_range():
    with pytest.raises(IndexError):
        elementary_symmetric([1.0, 2.0, 3.0], 4)


def test_elementary_symmetric_matches_bruteforce():
    from itertools import combinations
    rng = np.random.default_rng(5)
    y = rng.uniform(-1, 1, 6)
    for k in range(7):
        brute = sum(np.prod([y[i] for i in c]) for c in combinations(range(6), k))
        assert abs(elementary_symmetric(y, k) - brute) < 1e-12 * (1 + abs(brute))


@settings(deadline=None, max_examples=50)
@given(arrays(float, 4, elements=finite_coords), st.floats(-0.5, 0.5))
def test_generating_identity(y, eps):
    # prod(1 + eps*y_j) = sum_k eps^k e_k(y)
    lhs = np.prod(1.0 + eps * y)
    rhs = sum(eps ** k * elementary_symmetric(y, k) for k in range(5))
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs) + abs(rhs))


def test_step_scale_factors():
    assert MapStepScale.EPS.factor == 1.0
    assert MapStepScale.TWO_EPS.factor == 2.0


def test_fmt17_round_trips():
    for x in (1 / 3, 0.1, 2e-15, 123456.789):
        assert float(fmt17(x)) == x
