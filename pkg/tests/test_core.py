from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpcone.core import (
    DimensionError,
    ShapeError,
    Subset,
    TernaryVector,
    TradingTransform,
    characteristic_vector,
    format_rational,
    is_compatible,
    is_trading_transform,
    parse_rational,
    restricted_sum,
)

from conftest import S


def subsets(n):
    return st.integers(0, (1 << n) - 1).map(lambda b: Subset(n, b))


def ternary(n):
    return st.lists(st.sampled_from((-1, 0, 1)), min_size=n, max_size=n).map(TernaryVector.from_entries)


def test_subset_basics():
    a = S(5, 1, 3)
    assert a.bits == 0b101
    assert a.atoms == [1, 3]
    assert len(a) == 2
    assert a.complement() == S(5, 2, 4, 5)
    assert a.to_json() == [1, 3]


def test_subset_rejects_out_of_range():
    with pytest.raises(ValueError):
        Subset.of(3, [4])
    with pytest.raises(ValueError):
        Subset(3, 0b1000)
    with pytest.raises(ValueError):
        Subset(65, 0)


def test_characteristic_vector_examples():
    assert characteristic_vector(S(3, 1, 2), S(3, 2, 3)).entries == (1, 0, -1)
    assert characteristic_vector(S(3, 1), S(3, 1)).is_zero()
    assert characteristic_vector(S(7, 1, 5, 7), S(7, 3, 4, 7)).entries == (1, 0, -1, -1, 1, 0, 0)


def test_characteristic_vector_dimension_mismatch():
    with pytest.raises(DimensionError):
        characteristic_vector(S(3, 1), S(4, 1))


def test_trading_transform_examples():
    assert is_trading_transform([S(7, 1, 5, 7), S(7, 2, 3, 4, 6)], [S(7, 3, 4, 7), S(7, 1, 2, 5, 6)])
    assert is_trading_transform([S(3)], [S(3)])
    assert not is_trading_transform([S(3, 1)], [S(3, 2)])
    with pytest.raises(ShapeError):
        is_trading_transform([S(3, 1)], [])


def test_trading_transform_json_round_trip():
    t = TradingTransform((S(4, 1, 2), S(4, 3)), (S(4, 3, 1), S(4, 2)))
    assert TradingTransform.from_json(4, t.to_json()) == t
    assert t.canonical() == TradingTransform((S(4, 3), S(4, 1, 2)), (S(4, 2), S(4, 1, 3))).canonical()


def test_compatible_examples():
    assert not is_compatible((S(3, 1), S(3, 2)), (S(3, 1), S(3, 3)))
    assert is_compatible((S(3), S(3)), (S(3), S(3)))


def test_restricted_sum_examples():
    u = TernaryVector.from_entries
    assert restricted_sum(u([1, 0]), u([0, -1])) == u([1, -1])
    assert restricted_sum(u([1, 0]), u([1, 0])) is None
    assert restricted_sum(u([1, -1]), u([-1, 1])).is_zero()


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(subsets(n), subsets(n))))
def test_chi_antisymmetric(pair):
    a, b = pair
    assert characteristic_vector(a, b) == -characteristic_vector(b, a)


@given(st.integers(1, 6).flatmap(lambda n: st.integers(1, 4).flatmap(
    lambda k: st.tuples(st.lists(subsets(n), min_size=k, max_size=k), st.lists(subsets(n), min_size=k, max_size=k)))))
def test_trading_iff_chi_sum_zero(lr):
    left, right = lr
    n = left[0].n
    total = [0] * n
    for a, b in zip(left, right):
        for i, v in enumerate(characteristic_vector(a, b).entries):
            total[i] += v
    assert is_trading_transform(left, right) == (total == [0] * n)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(subsets(n), subsets(n), subsets(n), subsets(n))))
def test_compatible_symmetric(q):
    a1, b1, a2, b2 = q
    assert is_compatible((a1, b1), (a2, b2)) == is_compatible((a2, b2), (a1, b1))


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(ternary(n), ternary(n))))
def test_restricted_sum_commutes(uv):
    u, v = uv
    assert restricted_sum(u, v) == restricted_sum(v, u)
    s = restricted_sum(u, v)
    expected = [a + b for a, b in zip(u.entries, v.entries)]
    if all(-1 <= x <= 1 for x in expected):
        assert s.entries == tuple(expected)
    else:
        assert s is None


@given(st.integers(1, 8).flatmap(ternary))
def test_negation_is_involution(v):
    assert -(-v) == v


@given(st.fractions())
def test_rational_round_trip(r):
    assert parse_rational(format_rational(r)) == r


def test_rational_format():
    assert format_rational(Fraction(3, 1)) == "3"
    assert format_rational(Fraction(-6, 4)) == "-3/2"
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("0.5x")
