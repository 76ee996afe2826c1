from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sprm.errors import CapacityError, DimensionError
from sprm.poly import (Dataset, SparseModel, basis_size, design_matrix, enumerate_basis,
                       eval_monomial, monomial_label, predict)


def brute_force_basis(n, d):
    return [a for a in product(range(d + 1), repeat=n) if sum(a) <= d]


@pytest.mark.parametrize("n,d,size", [(3, 4, 35), (53, 2, 1485), (1, 0, 1)])
def test_known_sizes(n, d, size):
    assert len(enumerate_basis(n, d)) == size


def test_graded_lex_order_small():
    assert enumerate_basis(2, 2).indices == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


@given(st.integers(1, 6), st.integers(0, 5))
def test_size_matches_nested_loops(n, d):
    basis = enumerate_basis(n, d)
    assert len(basis) == len(brute_force_basis(n, d)) == comb(n + d, d) == basis_size(n, d)
    assert set(basis) == set(brute_force_basis(n, d))


@given(st.integers(1, 5), st.integers(0, 4))
def test_order_is_strict_and_stable(n, d):
    idx = list(enumerate_basis(n, d))
    key = lambda a: (sum(a), a)
    assert len(set(idx)) == len(idx)
    assert sorted(idx, key=key) == idx
    assert all(key(a) < key(b) for a, b in zip(idx, idx[1:]))


def test_position_roundtrip():
    basis = enumerate_basis(3, 3)
    for j, a in enumerate(basis):
        assert basis.position(a) == j


def test_capacity_and_argument_errors():
    with pytest.raises(CapacityError):
        enumerate_basis(60, 6)
    with pytest.raises(ValueError):
        enumerate_basis(0, 2)
    with pytest.raises(ValueError):
        enumerate_basis(2, -1)


def test_eval_monomial_examples():
    assert eval_monomial((2, 3), (1, 2)) == 18
    assert eval_monomial((0, 5), (0, 1)) == 5
    assert eval_monomial((0.0, 0.0), (0, 0)) == 1.0
    with pytest.raises(DimensionError):
        eval_monomial((1, 2, 3), (1, 0))


def test_design_matrix_examples():
    np.testing.assert_array_equal(design_matrix([[1.0]], enumerate_basis(1, 1)), [[1, 1]])
    np.testing.assert_array_equal(design_matrix([[2.0]], enumerate_basis(1, 2)), [[1, 2, 4]])
    data = Dataset(np.random.default_rng(0).uniform(size=(7, 3)), np.zeros(7))
    assert design_matrix(data, enumerate_basis(3, 2)).shape == (7, 10)


def test_labels():
    assert monomial_label((0, 0)) == "1"
    assert monomial_label((1, 0, 2)) == "x1*x3^2"
    assert monomial_label((0, 2), ("a", "b")) == "b^2"


def _model(coefs, selected=(0, 1)):
    return SparseModel(enumerate_basis(1, 1), selected, coefs, 0.0)


def test_predict_examples():
    assert predict(_model([1.0], (0,)), [12.3]) == 1.0
    assert predict(_model([1.0, 2.0]), [3.0]) == 7.0
    with pytest.raises(ValueError):
        _model([], ())


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_predict_linear_in_coefficients(c1, c2, x):
    basis = enumerate_basis(2, 2)
    sel = (0, 2, 4)
    f = lambda c: predict(SparseModel(basis, sel, c, 0.0), x)
    total = f(np.add(c1, c2))
    assert total == pytest.approx(f(c1) + f(c2), rel=1e-12, abs=1e-12)


def test_dataset_is_read_only():
    data = Dataset([[1.0, 2.0]], [3.0])
    with pytest.raises(ValueError):
        data.X[0, 0] = 5.0
    assert (data.N, data.n) == (1, 2)
