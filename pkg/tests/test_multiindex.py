import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccndecomp.multiindex import (
    Comparison,
    DimensionMismatch,
    apply_multiplicity,
    as_multiindex,
    compare,
    compose_multiplicities,
    iter_multiindices,
    norm,
    ones,
    unit,
    zero_pattern,
    zeros,
)

indices = st.lists(st.integers(min_value=0, max_value=6), min_size=0, max_size=5).map(tuple)


def test_norm_examples():
    assert norm((2, 5, 2)) == 9
    assert norm(zeros(4)) == 0
    assert norm((1, 2)) == 3


def test_as_multiindex_rejects_bad_entries():
    with pytest.raises(ValueError):
        as_multiindex((1, -1))
    with pytest.raises(ValueError):
        as_multiindex((1.5,))
    assert as_multiindex([2, 5, 2]) == (2, 5, 2)


def test_compare_examples():
    assert compare((1, 1), (2, 3)) is Comparison.LESS
    assert compare((2, 0), (0, 2)) is Comparison.INCOMPARABLE
    assert compare((3,), (3,)) is Comparison.EQUAL
    assert compare((4, 1), (2, 1)) is Comparison.GREATER
    with pytest.raises(DimensionMismatch):
        compare((1,), (1, 2))


@given(indices, indices.filter(lambda m: len(m) <= 5))
@settings(max_examples=150)
def test_partial_order_laws(a, b):
    if len(a) != len(b):
        return
    assert compare(a, a) is Comparison.EQUAL
    ab = compare(a, b)
    ba = compare(b, a)
    flips = {
        Comparison.LESS: Comparison.GREATER,
        Comparison.GREATER: Comparison.LESS,
        Comparison.EQUAL: Comparison.EQUAL,
        Comparison.INCOMPARABLE: Comparison.INCOMPARABLE,
    }
    assert ba is flips[ab]
    if ab is Comparison.LESS and ba is Comparison.LESS:
        raise AssertionError("antisymmetry violated")


def test_order_transitive_on_sampled_triples():
    rng = random.Random(0)
    for _ in range(500):
        k = rng.randint(1, 4)
        a = tuple(rng.randint(0, 4) for _ in range(k))
        b = tuple(a[i] + rng.randint(0, 2) for i in range(k))
        c = tuple(b[i] + rng.randint(0, 2) for i in range(k))
        assert compare(a, b) in (Comparison.LESS, Comparison.EQUAL)
        assert compare(b, c) in (Comparison.LESS, Comparison.EQUAL)
        assert compare(a, c) in (Comparison.LESS, Comparison.EQUAL)


def test_apply_multiplicity_examples():
    assert apply_multiplicity((1, 2), ["wa", "wb"]) == ["wa", "wb", "wb"]
    assert apply_multiplicity((0, 0), ["wa", "wb"]) == []
    assert apply_multiplicity((2, 3), ["wa", "wb"]) == ["wa", "wa", "wb", "wb", "wb"]
    with pytest.raises(DimensionMismatch):
        apply_multiplicity((1,), ["a", "b"])


def test_compose_multiplicities_examples():
    assert compose_multiplicities((2, 1, 2), (1, 2)) == (2, 3)
    assert compose_multiplicities(ones(3), (1, 2)) == (1, 2)
    assert compose_multiplicities((3,), (1,)) == (3,)
    with pytest.raises(DimensionMismatch):
        compose_multiplicities((1, 1), (1, 2))


@given(
    st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=4).map(tuple),
    st.data(),
)
@settings(max_examples=150)
def test_apply_compose_coherence(m, data):
    mbar = tuple(
        data.draw(st.integers(min_value=0, max_value=3)) for _ in range(norm(m))
    )
    v = [f"v{i}" for i in range(len(m))]
    composed = compose_multiplicities(mbar, m)
    assert apply_multiplicity(composed, v) == apply_multiplicity(mbar, apply_multiplicity(m, v))


def test_enumerate_examples():
    assert list(iter_multiindices(2, ones(2), norm_equals=3)) == [(1, 2), (2, 1)]
    assert list(iter_multiindices(0, norm_equals=0)) == [()]
    assert list(iter_multiindices(0, norm_equals=2)) == []
    assert len(list(iter_multiindices(2, ones(2), norm_at_most=4))) == 6 == math.comb(4, 2)


def test_enumerate_is_lexicographic_and_lazy():
    stream = iter_multiindices(3, norm_equals=2)
    first = next(stream)
    assert first == (0, 0, 2)
    rest = list(stream)
    assert rest == sorted(rest)
    assert all(norm(m) == 2 for m in rest)


def test_enumerate_boxed():
    box = list(iter_multiindices(2, (1, 0), upper=(2, 1)))
    assert box == [(1, 0), (1, 1), (2, 0), (2, 1)]


def test_enumerate_requires_exactly_one_constraint():
    with pytest.raises(ValueError):
        list(iter_multiindices(2))
    with pytest.raises(ValueError):
        list(iter_multiindices(2, norm_equals=1, norm_at_most=2))


def test_enumeration_count_identity():
    for n in range(11):
        for k in range(n + 1):
            count = sum(1 for _ in iter_multiindices(k, ones(k), norm_at_most=n))
            assert count == math.comb(n, k)


def test_pascal_prod_sum_identity():
    # sum over m >= M, |m| <= n of prod C(m_i - 1, M_i - 1) equals C(n, |M|)
    for k in range(4):
        for big_m in iter_multiindices(k, ones(k), norm_at_most=6):
            for n in range(norm(big_m), 11):
                total = 0
                for m in iter_multiindices(k, big_m, norm_at_most=n):
                    prod = 1
                    for mi, bi in zip(m, big_m):
                        prod *= math.comb(mi - 1, bi - 1)
                    total += prod
                assert total == math.comb(n, norm(big_m)), (big_m, n)


def test_zero_pattern_and_unit():
    assert zero_pattern((0, 3, 0)) == (True, False, True)
    assert unit(3, 1) == (0, 1, 0)
    with pytest.raises(IndexError):
        unit(2, 5)
