#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
可容许对、解族构造、实例化与反向分类的单元测试
"""

import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrefl.braid import fraction_matrix, is_zero_matrix, numeric_residual
from qrefl.classification import (
    AdmissiblePair,
    NotACharacter,
    Type1Family,
    Type1Match,
    Type2Family,
    Type2Match,
    classify_matrix,
    count_sigma_choices,
    degenerate,
    enumerate_admissible_pairs,
    enumerate_families,
    enumerate_sigma_choices,
    family_from_dict,
    family_to_dict,
    instantiate,
    pair_stats,
    sample_parameters,
    type1_family,
    type2_family,
)
from qrefl.errors import ParameterError, UsageError, ValidationError
from qrefl.fixtures import p_matrix

F = Fraction


# ---------- 可容许对 ---------- #

def test_pair_stats_involutive_n3():
    stats = pair_stats(AdmissiblePair(3, (1, 3), (3, 1)))
    assert stats.y_minus == {1}
    assert stats.y_plus == {3}
    assert stats.y_zero == {1, 3}
    assert (stats.b_minus, stats.b_plus) == (1, 3)


def test_pair_stats_empty():
    stats = pair_stats(AdmissiblePair(4))
    assert (stats.b_minus, stats.b_plus) == (0, 5)


def test_pair_stats_single():
    stats = pair_stats(AdmissiblePair(2, (1,), (2,)))
    assert stats.y_minus == {1}
    assert stats.y_zero == frozenset()
    assert (stats.b_minus, stats.b_plus) == (1, 2)


@pytest.mark.parametrize(
    "Y, images",
    [((1,), (1,)), ((1, 2), (2, 3)), ((2, 1), (1, 2)), ((1,), (4,)), ((1, 2), (3,))],
)
def test_invalid_pairs(Y, images):
    with pytest.raises(ValidationError):
        AdmissiblePair(3, Y, images)


def test_from_sets_uses_reversing_bijection():
    pair = AdmissiblePair.from_sets(4, [2, 1], [3, 4])
    assert pair.sigma == {1: 4, 2: 3}
    assert pair.Z == (3, 4)


def test_enumerate_pairs_small():
    assert [(p.Y, p.images) for p in enumerate_admissible_pairs(1)] == [((), ())]
    pairs = {(p.Y, p.images) for p in enumerate_admissible_pairs(2)}
    assert pairs == {((), ()), ((1,), (2,)), ((2,), (1,)), ((1, 2), (2, 1))}
    assert len(enumerate_admissible_pairs(3)) == 14


def test_enumeration_is_deterministic():
    assert enumerate_admissible_pairs(4) == enumerate_admissible_pairs(4)


@pytest.mark.parametrize("n, K, expected", [(2, 1, 1), (4, 2, 1), (5, 0, 1), (5, 2, 3), (3, 2, 0), (4, -1, 0)])
def test_count_sigma_choices(n, K, expected):
    assert count_sigma_choices(n, K) == expected


@pytest.mark.parametrize("n", range(1, 9))
def test_sigma_count_matches_enumeration(n):
    for K in range(n // 2 + 1):
        for Y in combinations(range(1, n + 1), K):
            assert len(enumerate_sigma_choices(n, Y)) == count_sigma_choices(n, K)


# ---------- 解族构造 ---------- #

def test_type1_n2():
    A, relations = type1_family(2, 1, 2)
    assert A.rows() == [["l + m", "y1"], ["y2", "0"]]
    assert relations.sorted_pairs() == ((1, 2),)


def test_type1_n3_middle_lambda():
    A, relations = type1_family(3, 1, 3)
    assert A.rows() == [["l + m", "0", "y1"], ["0", "l", "0"], ["y3", "0", "0"]]
    assert relations.sorted_pairs() == ((1, 3),)


def test_type1_n4_antidiagonal():
    A, relations = type1_family(4, 2, 3)
    assert [A.rows()[i][i] for i in range(4)] == ["l + m", "l + m", "0", "0"]
    assert [A.rows()[i][3 - i] for i in range(4)] == ["y1", "y2", "y3", "y4"]
    assert relations.sorted_pairs() == ((1, 4), (2, 3))


@pytest.mark.parametrize("n, b_minus, b_plus", [(2, 0, 1), (2, 1, 3), (3, 2, 2), (3, 2, 1)])
def test_type1_invalid(n, b_minus, b_plus):
    with pytest.raises(UsageError):
        type1_family(n, b_minus, b_plus)


def test_type2_examples():
    assert type2_family(2, [1], [2], 1).rows() == [["l", "y1"], ["0", "0"]]
    assert type2_family(3, [1], [3], 2).rows() == [["l", "0", "y1"], ["0", "l", "0"], ["0", "0", "0"]]
    assert type2_family(3, [], [], 2) == p_matrix(3, 2)


@pytest.mark.parametrize("Y, Z, b", [([1], [2], 2), ([1], [1], 1), ([1, 2], [2, 1], 1), ([], [], 4)])
def test_type2_invalid(Y, Z, b):
    with pytest.raises(UsageError):
        type2_family(3 if b == 4 else 2, Y, Z, b)


def test_families_n2():
    families = enumerate_families(2)
    assert len(families) == 6
    assert families[0] == Type1Family(2, 1, 2)
    assert set(families[1:]) == {
        Type2Family(2, (), (), 0),
        Type2Family(2, (), (), 1),
        Type2Family(2, (), (), 2),
        Type2Family(2, (1,), (2,), 1),
        Type2Family(2, (2,), (1,), 1),
    }


def test_families_n1():
    families = enumerate_families(1)
    assert families == [Type2Family(1, (), (), 0), Type2Family(1, (), (), 1)]


def test_families_n4_contain_literature_types():
    families = enumerate_families(4)
    assert Type1Family(4, 2, 3) in families
    assert Type1Family(4, 1, 4) in families
    assert len(set(families)) == len(families)


def test_families_sorted():
    families = enumerate_families(4)
    assert families == sorted(families, key=lambda f: f.sort_key())


# ---------- 实例化 ---------- #

def test_instantiate_d2():
    A = instantiate(Type1Family(2, 1, 2), {"l": 1, "m": -1, "y1": 1})
    assert np.array_equal(A, fraction_matrix([[0, 1], [1, 0]]))


def test_instantiate_diagonal_type2():
    A = instantiate(Type2Family(3, (), (), 2), {"l": 5})
    assert np.array_equal(A, fraction_matrix([[5, 0, 0], [0, 5, 0], [0, 0, 0]]))


def test_instantiate_partner_value():
    A = instantiate(Type1Family(2, 1, 2), {"l": 2, "m": 3, "y1": 1})
    assert np.array_equal(A, fraction_matrix([[5, 1], [-6, 0]]))


@pytest.mark.parametrize(
    "family, params",
    [
        (Type1Family(2, 1, 2), {"l": 1, "m": 0, "y1": 1}),
        (Type1Family(2, 1, 2), {"l": 1, "m": 2, "y1": 0}),
        (Type1Family(2, 1, 2), {"l": 1, "m": 2}),
        (Type2Family(2, (1,), (2,), 1), {"l": 1, "y1": 0}),
        (Type2Family(2, (1,), (2,), 1), {"l": 1, "m": 1, "y1": 1}),
        (Type2Family(2, (), (), 1), {}),
    ],
)
def test_instantiate_rejects(family, params):
    with pytest.raises(ParameterError):
        instantiate(family, params)


def test_type2_allows_zero_lambda():
    A = instantiate(Type2Family(2, (1,), (2,), 1), {"l": 0, "y1": 3})
    assert np.array_equal(A, fraction_matrix([[0, 3], [0, 0]]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_instances_have_admissible_support(n):
    rng = random.Random(n)
    for f in enumerate_families(n):
        A = instantiate(f, sample_parameters(f, rng))
        for r in range(n):
            assert sum(1 for c in range(n) if c != r and A[r, c] != 0) <= 1
            assert sum(1 for c in range(n) if c != r and A[c, r] != 0) <= 1


def test_degenerate_type1():
    matrix, family = degenerate(Type1Family(2, 1, 2), {"l": 2, "m": 3, "y1": 5})
    assert np.array_equal(matrix, fraction_matrix([[2, 5], [0, 0]]))
    assert family == Type2Family(2, (1,), (2,), 1)
    assert np.array_equal(matrix, instantiate(family, {"l": 2, "y1": 5}))


@pytest.mark.parametrize("f", [f for f in enumerate_families(4) if isinstance(f, Type1Family)])
def test_degenerate_lands_in_type2(f):
    params = sample_parameters(f, random.Random(7))
    matrix, family = degenerate(f, params)
    y = {name: v for name, v in params.items() if name.startswith("y")}
    assert np.array_equal(matrix, instantiate(family, {"l": params["l"], **y}))
    assert is_zero_matrix(numeric_residual(matrix, 3))


def test_family_dict_round_trip():
    for f in enumerate_families(3):
        assert family_from_dict(family_to_dict(f)) == f
    assert family_to_dict(Type2Family(3, (1,), (3,), 2)) == {"type": 2, "n": 3, "Y": [1], "Z": [3], "b": 2}


@pytest.mark.parametrize(
    "data",
    [{"type": 3, "n": 2}, {"type": 1, "n": 2}, {"type": 2, "n": 2, "Y": [1], "Z": [1], "b": 1}, {"n": 2}],
)
def test_family_from_dict_rejects(data):
    with pytest.raises(UsageError):
        family_from_dict(data)


# ---------- 反向分类 ---------- #

def test_classify_d2():
    result = classify_matrix([[0, 1], [1, 0]], 2)
    assert isinstance(result, Type1Match)
    assert result.family == Type1Family(2, 1, 2)
    assert (result.e1, result.e2) == (0, -1)
    assert (result.lam, result.mu) == (1, -1)


def test_classify_irrational_roots():
    result = classify_matrix([[1, 1], [1, 0]], 2)
    assert isinstance(result, Type1Match)
    assert (result.e1, result.e2) == (1, -1)
    assert result.lam is None and result.mu is None
    assert "l" not in result.to_dict()


def test_classify_orders_rational_roots():
    result = classify_matrix(instantiate(Type1Family(2, 1, 2), {"l": -3, "m": 2, "y1": 1}), 3)
    assert (result.lam, result.mu) == (2, -3)


def test_classify_not_a_character():
    result = classify_matrix([[1, 0], [0, 2]], 2)
    assert isinstance(result, NotACharacter)
    assert result.tag == "eq5"


def test_classify_zero_matrix_canonical():
    result = classify_matrix([[0, 0, 0], [0, 0, 0], [0, 0, 0]], 3)
    assert isinstance(result, Type2Match)
    assert result.family == Type2Family(3, (), (), 0)
    assert result.lam == 0


def test_classify_nilpotent():
    result = classify_matrix([[0, 1], [0, 0]], 3)
    assert isinstance(result, Type2Match)
    assert result.family == Type2Family(2, (1,), (2,), 1)
    assert result.to_dict()["y"] == {"y1": "1"}


def test_classify_middle_lambda_determined():
    A = instantiate(Type1Family(3, 1, 3), {"l": F(1, 2), "m": 4, "y1": 3})
    result = classify_matrix(A, F(5, 2))
    assert isinstance(result, Type1Match)
    assert (result.lam, result.mu) == (F(1, 2), 4)


def test_classify_rejects_non_square_and_bad_q():
    with pytest.raises(UsageError):
        classify_matrix([[1, 2]], 2)
    with pytest.raises(UsageError):
        classify_matrix([[1]], -1)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([f for n in (1, 2, 3) for f in enumerate_families(n)]),
    st.integers(min_value=0, max_value=10 ** 6),
    st.sampled_from([F(2), F(3), F(5, 2), F(-3, 4)]),
)
def test_classify_round_trip(f, seed, q):
    params = sample_parameters(f, random.Random(seed))
    result = classify_matrix(instantiate(f, params), q)
    assert result.family == f
    if isinstance(result, Type1Match):
        assert result.e1 == params["l"] + params["m"]
        assert result.e2 == params["l"] * params["m"]
        if result.lam is not None:
            assert {result.lam, result.mu} == {params["l"], params["m"]}
    elif f.b > 0:
        assert result.lam == params["l"]
