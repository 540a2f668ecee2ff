#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
不变子空间、谱与半单性的单元测试
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrefl.braid import fraction_matrix
from qrefl.classification import (
    Type1Family,
    Type2Family,
    classify_matrix,
    enumerate_families,
    instantiate,
    sample_parameters,
)
from qrefl.errors import UsageError
from qrefl.fixtures import a11, a21, p_matrix
from qrefl.spectral import (
    char_poly,
    eigenspace_dimension,
    expected_semisimple,
    expected_spectrum,
    invariant_blocks,
    is_invariant,
    is_semisimple,
    poly_at_matrix,
    poly_derivative,
    poly_divmod,
    poly_gcd,
    poly_mul,
    rank,
)

F = Fraction


# ---------- 不变子空间 ---------- #

def test_blocks_a11():
    A, _ = a11()
    assert invariant_blocks(A, Type1Family(2, 1, 2).pair) == [(1, 2)]


def test_blocks_a21():
    A, _ = a21()
    blocks = invariant_blocks(A, Type1Family(3, 1, 3).pair)
    assert blocks == [(1, 3), (2,)]
    assert all(is_invariant(A, b) for b in blocks)


def test_blocks_diagonal():
    assert invariant_blocks(p_matrix(3, 2), Type2Family(3, (), (), 2).pair) == [(1,), (2,), (3,)]


def test_blocks_dimension_mismatch():
    A, _ = a11()
    with pytest.raises(UsageError):
        invariant_blocks(A, Type1Family(3, 1, 3).pair)


def test_is_invariant_detects_leak():
    A = instantiate(Type2Family(3, (1,), (3,), 2), {"l": 1, "y1": 2})
    assert is_invariant(A, (1, 3))
    assert not is_invariant(A, (3,))


# ---------- 期望谱 ---------- #

def test_spectrum_type1_n2():
    assert expected_spectrum(Type1Family(2, 1, 2)).to_list() == [
        {"value": "m", "mult": 1},
        {"value": "l", "mult": 1},
    ]


def test_spectrum_type1_n4_drops_zero():
    assert expected_spectrum(Type1Family(4, 2, 3)).to_list() == [
        {"value": "m", "mult": 2},
        {"value": "l", "mult": 2},
    ]


def test_spectrum_type2():
    assert expected_spectrum(Type2Family(3, (), (), 2)).to_list() == [
        {"value": "l", "mult": 2},
        {"value": "0", "mult": 1},
    ]


@pytest.mark.parametrize("n", range(1, 6))
def test_multiplicities_sum_to_n(n):
    for f in enumerate_families(n):
        assert expected_spectrum(f).total == n


def test_evaluate_merges_equal_values():
    spectrum = expected_spectrum(Type1Family(2, 1, 2)).evaluate({"l": 1, "m": 1})
    assert spectrum.entries == ((F(1), 2),)
    assert spectrum.polynomial() == [1, -2, 1]


def test_symbolic_polynomial_rejected():
    with pytest.raises(UsageError):
        expected_spectrum(Type1Family(2, 1, 2)).polynomial()


# ---------- 多项式 ---------- #

def test_poly_helpers():
    p = poly_mul([F(1), F(-1)], [F(1), F(-2)])
    assert p == [1, -3, 2]
    q, r = poly_divmod(p, [F(1), F(-1)])
    assert q == [1, -2] and r == [0]
    assert poly_gcd(p, poly_mul([F(1), F(-1)], [F(1), F(-3)])) == [1, -1]
    assert poly_derivative([F(1), F(0), F(-1)]) == [2, 0]


def test_poly_at_matrix():
    A = fraction_matrix([[0, 1], [1, 0]])
    assert not any(poly_at_matrix([F(1), F(0), F(-1)], A).flat)
    assert any(poly_at_matrix([F(1), F(-1)], A).flat)


# ---------- 特征多项式与秩 ---------- #

@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[0, 1], [1, 0]], [1, 0, -1]),
        ([[5, 1], [-6, 0]], [1, -5, 6]),
        ([[5, 0, 0], [0, 5, 0], [0, 0, 0]], [1, -10, 25, 0]),
        ([[3]], [1, -3]),
    ],
)
def test_char_poly(rows, expected):
    assert char_poly(rows) == expected


def test_rank():
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert rank([[0, 0], [0, 0]]) == 0
    assert rank([[0, 1, 2], [0, 2, 4], [1, 0, 0]]) == 2


def test_eigenspace_dimension_jordan_block():
    assert eigenspace_dimension([[2, 1], [-1, 0]], 1) == 1
    assert eigenspace_dimension([[1, 0], [0, 1]], 1) == 2


# ---------- 半单性 ---------- #

def test_semisimple_distinct_eigenvalues():
    assert is_semisimple([[0, 1], [1, 0]])


def test_not_semisimple_when_lambda_equals_mu():
    A = instantiate(Type1Family(2, 1, 2), {"l": 1, "m": 1, "y1": 1})
    assert not is_semisimple(A)


def test_not_semisimple_nilpotent():
    assert not is_semisimple([[0, 1], [0, 0]], 3)


def test_zero_matrix_semisimple():
    assert is_semisimple([[0, 0], [0, 0]])


def test_semisimple_rejects_non_character():
    with pytest.raises(UsageError):
        is_semisimple([[1, 0], [0, 2]])


def test_expected_semisimple_from_match():
    assert expected_semisimple(classify_matrix([[0, 1], [1, 0]], 2))
    assert not expected_semisimple(classify_matrix([[0, 1], [0, 0]], 2))
    assert expected_semisimple(classify_matrix([[0, 0], [0, 0]], 2))


def test_expected_semisimple_from_family_params():
    f1 = Type1Family(2, 1, 2)
    assert expected_semisimple(f1, {"l": 2, "m": 3, "y1": 1})
    assert not expected_semisimple(f1, {"l": 1, "m": 1, "y1": 1})
    assert not expected_semisimple(Type2Family(3, (1,), (3,), 2), {"l": 0, "y1": 1})
    assert expected_semisimple(Type2Family(3, (), (), 2), {"l": 0})
    with pytest.raises(UsageError):
        expected_semisimple(f1)


@pytest.mark.parametrize("rows", [[[0, 1], [1, 0]], [[2, 5], [0, 0]], [[0, 1], [0, 0]]])
def test_family_and_match_criteria_agree(rows):
    result = classify_matrix(rows, 2)
    params = {"l": result.lam} if isinstance(result.family, Type2Family) else {"l": result.lam, "m": result.mu}
    assert expected_semisimple(result) == expected_semisimple(result.family, params)


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([f for n in (1, 2, 3, 4) for f in enumerate_families(n)]),
    st.integers(min_value=0, max_value=10 ** 6),
)
def test_char_poly_matches_expected_spectrum(f, seed):
    params = sample_parameters(f, random.Random(seed))
    A = instantiate(f, params)
    assert char_poly(A) == expected_spectrum(f).evaluate(params).polynomial()
    assert is_semisimple(A) == expected_semisimple(classify_matrix(A, 2))
