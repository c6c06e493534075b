"""Tests for the permanent engines (naive oracle vs Gray-code Ryser)."""

import math

import numpy as np
import pytest

from cvboson.errors import GuardLimitError
from cvboson.permanent import (
    compute_permanent,
    permanent_naive,
    permanent_ryser,
)


def test_one_by_one():
    assert permanent_naive([[1]]) == 1
    assert permanent_ryser([[3.5j]]) == 3.5j


def test_two_by_two_definition():
    assert permanent_naive([[1, 2], [3, 4]]) == 10  # 1*4 + 2*3
    assert permanent_ryser([[1, 2], [3, 4]]) == 10


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7])
def test_identity(n):
    assert permanent_naive(np.eye(n)) == pytest.approx(1)
    assert permanent_ryser(np.eye(n)) == pytest.approx(1)


@pytest.mark.parametrize("n", range(1, 11))
def test_all_ones_is_factorial(n):
    assert permanent_ryser(np.ones((n, n))) == float(math.factorial(n))


def test_empty_matrix_is_one():
    assert permanent_naive(np.zeros((0, 0))) == 1
    assert permanent_ryser(np.zeros((0, 0))) == 1


def test_ryser_matches_naive_on_random_complex():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        expected = permanent_naive(a)
        got = permanent_ryser(a)
        assert abs(got - expected) <= 1e-9 * abs(expected)


def test_ryser_matches_naive_at_seven():
    rng = np.random.default_rng(19)
    for _ in range(10):
        a = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
        expected = permanent_naive(a)
        assert abs(permanent_ryser(a) - expected) <= 1e-9 * abs(expected)


def test_block_structure_cancellation_is_exact():
    # permanent of a block-diagonal matrix factorizes; three balanced
    # beamsplitter blocks give zero, a worst case for subset-sum cancellation
    bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    blocks = np.zeros((6, 6))
    for b in range(3):
        blocks[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = bs
    assert permanent_ryser(blocks) == 0
    assert permanent_naive(blocks) == 0


def test_row_and_column_permutation_invariance():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    reference = permanent_ryser(a)
    for _ in range(10):
        rp = rng.permutation(5)
        cp = rng.permutation(5)
        assert permanent_ryser(a[rp][:, cp]) == pytest.approx(reference, rel=1e-10)


def test_row_scaling():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    c = 0.37 - 2.1j
    scaled = a.copy()
    scaled[2] *= c
    assert permanent_ryser(scaled) == pytest.approx(c * permanent_ryser(a), rel=1e-12)


def test_gray_and_lex_subset_orders_agree():
    rng = np.random.default_rng(17)
    for n in (4, 5, 6):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a /= np.abs(a).max()  # unit-norm scale so the bound is absolute
        gray = permanent_ryser(a, subset_order="gray")
        lex = permanent_ryser(a, subset_order="lex")
        assert abs(gray - lex) <= 1e-12


def test_near_cancellation_stays_accurate():
    # Hong-Ou-Mandel-like matrix: massive cancellation across subset terms
    bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert permanent_ryser(bs) == 0


def test_size_guards():
    with pytest.raises(GuardLimitError):
        permanent_naive(np.eye(11))
    with pytest.raises(GuardLimitError):
        permanent_ryser(np.eye(31))


def test_non_square_rejected():
    with pytest.raises(ValueError):
        permanent_naive(np.ones((2, 3)))


def test_compute_permanent_records_method():
    result = compute_permanent(np.eye(3), method="naive")
    assert result.value == pytest.approx(1)
    assert result.method == "naive"
    assert result.dimension == 3
    with pytest.raises(ValueError):
        compute_permanent(np.eye(2), method="glynn")
