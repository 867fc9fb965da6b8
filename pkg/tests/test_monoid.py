import random

import pytest

from ccndecomp.monoid import (
    WeightMonoid,
    check_laws,
    make_additive_positive,
    make_additive_real,
    make_bool_or,
    make_free_parallel,
    monoid_by_name,
    sample_dyadic,
)


@pytest.mark.parametrize(
    "make",
    [make_additive_real, make_free_parallel, make_bool_or, make_additive_positive],
    ids=lambda f: f.__name__,
)
def test_shipped_monoids_pass_laws(make):
    report = check_laws(make(), trials=10000, seed=0)
    assert report.ok, report.counterexamples


def test_additive_real_basics():
    m = make_additive_real()
    assert m.combine(1.5, 2.5) == 4.0
    assert m.combine(0.0, 3.25) == 3.25
    assert m.is_zero(0.0) and not m.is_zero(1e-18)
    rng = random.Random(1)
    for _ in range(200):
        a, b = m.sample(rng), m.sample(rng)
        assert m.combine(a, b) == m.combine(b, a)


def test_free_parallel_is_multiset_union():
    m = make_free_parallel()
    assert m.combine(("a",), ("b",)) == ("a", "b")
    assert m.combine((), ("a", "a")) == ("a", "a")
    assert m.combine(("a",), ("a",)) == ("a", "a") != ("a",)
    assert m.is_zero(())


def test_bool_or_annihilator():
    m = make_bool_or()
    assert m.annihilator is True
    rng = random.Random(0)
    for _ in range(200):
        w = m.sample(rng)
        assert m.combine(True, w) is True
    assert m.combine(False, False) is False
    assert m.combine(False, True) is True


def test_broken_monoid_reports_commutativity_witness():
    broken = WeightMonoid(
        name="subtraction",
        combine=lambda a, b: a - b,
        zero=0.0,
        sample=sample_dyadic,
    )
    report = check_laws(broken, trials=1000, seed=0)
    assert not report.commutative_ok
    witness = report.counterexamples["commutative"]
    assert witness["a"] - witness["b"] != witness["b"] - witness["a"]


def test_check_laws_is_deterministic():
    a = check_laws(make_free_parallel(), trials=500, seed=42).to_jsonable()
    b = check_laws(make_free_parallel(), trials=500, seed=42).to_jsonable()
    assert a == b


def test_monoid_by_name():
    assert monoid_by_name("additive_real").name == "additive_real"
    assert monoid_by_name("free_parallel").name == "free_parallel"
    assert monoid_by_name("bool_or").name == "bool_or"
    with pytest.raises(ValueError):
        monoid_by_name("nope")


def test_check_laws_requires_trials():
    with pytest.raises(ValueError):
        check_laws(make_additive_real(), trials=0, seed=0)
