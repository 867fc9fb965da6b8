import math
import random
from fractions import Fraction

import pytest

from ccndecomp.coupling import (
    CouplingFamily,
    SizeCapExceeded,
    coupling_eval_explicit,
    coupling_eval_recursive,
    coupling_family_check,
    coupling_order,
    locally_maximal_orders,
    polynomial_coupling_support,
    recompose,
)
from ccndecomp.monoid import make_additive_real, make_bool_or
from ccndecomp.multiindex import iter_multiindices, ones
from ccndecomp.oracle import (
    BlackBoxOracle,
    NeighborInput,
    build_exponential,
    build_polynomial_multi,
    build_polynomial_single,
    type_multiindex,
    zero_f0,
)
from helpers import random_inputs, shipped_oracles

NI = NeighborInput


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def power_n_closed_form(n, x, inputs):
    """Independent closed form: n! * sum over m >= 1, |m| = n of
    prod (w_c x_c)^(m_c) / m_c!."""
    k = len(inputs)
    total = 0.0
    for m in iter_multiindices(k, ones(k), norm_equals=n):
        piece = 1.0
        for e, exp in zip(inputs, m):
            piece *= (e.weight * e.state) ** exp / math.factorial(exp)
        total += piece
    return math.factorial(n) * total


def test_quadratic_component_values():
    p2 = build_polynomial_single({2: 1})
    assert coupling_eval_explicit(p2, 0.0, (NI(1, 1.0, 2.0),)) == 4.0
    got = coupling_eval_explicit(p2, 0.0, (NI(1, 1.0, 2.0), NI(1, 3.0, 1.0)))
    assert close(got, 12.0)
    third = coupling_eval_explicit(
        p2, 0.0, (NI(1, 1.0, 2.0), NI(1, 3.0, 1.0), NI(1, 0.5, -1.0))
    )
    assert close(third, 0.0)


def test_empty_neighborhood_is_internal_term():
    p2 = build_polynomial_single({2: 1}, f0=lambda x: 3.0 * x)
    assert coupling_eval_explicit(p2, 2.0, ()) == 6.0
    assert coupling_eval_recursive(p2, 2.0, ()) == 6.0


def test_recursive_matches_explicit_on_random_pairs():
    rng = random.Random(11)
    oracles = [o for _, o, _ in shipped_oracles()]
    checked = 0
    while checked < 500:
        oracle = oracles[rng.randrange(len(oracles))]
        inputs = random_inputs(rng, oracle.n_types, max_per_type=2, lo=-1.0, hi=1.0)
        x = rng.uniform(-1, 1)
        a = coupling_eval_explicit(oracle, x, inputs)
        b = coupling_eval_recursive(oracle, x, inputs)
        assert close(a, b), (oracle, inputs)
        checked += 1


def test_exponential_component_is_expm1_product():
    exp = build_exponential(None)
    rng = random.Random(4)
    for _ in range(100):
        inputs = tuple(
            NI(1, rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(rng.randint(1, 5))
        )
        got = coupling_eval_explicit(exp, 0.0, inputs)
        want = math.prod(math.expm1(e.weight * e.state) for e in inputs)
        assert close(got, want)


def test_power_n_closed_form_matches_subset_sums():
    rng = random.Random(9)
    for n in range(1, 6):
        oracle = build_polynomial_single({n: 1})
        for size in range(0, 6):
            inputs = tuple(
                NI(1, rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(size)
            )
            got = coupling_eval_explicit(oracle, 0.0, inputs)
            want = power_n_closed_form(n, 0.0, inputs) if size else 0.0
            assert close(got, want), (n, size)


def test_recompose_example_and_round_trip():
    p2 = build_polynomial_single({2: 1}, f0=lambda x: 2.0 * x)
    assert recompose(p2, 1.5, ()) == 3.0  # empty neighborhood: internal term
    p2 = build_polynomial_single({2: 1})
    inputs = (NI(1, 1.0, 2.0), NI(1, 3.0, 1.0))
    assert close(recompose(p2, 0.0, inputs), 25.0)
    rng = random.Random(21)
    exp = build_exponential(None)
    for _ in range(50):
        inputs = tuple(
            NI(1, rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(rng.randint(0, 3))
        )
        x = rng.uniform(-1, 1)
        assert close(recompose(exp, x, inputs), exp.evaluate(x, inputs))


def test_closed_form_family_matches_subset_sums():
    rng = random.Random(13)
    oracle = build_polynomial_multi({(1, 2): Fraction(1, 2), (2, 0): 1}, n_types=2)
    family = CouplingFamily.from_polynomial(oracle)
    for _ in range(150):
        inputs = random_inputs(rng, 2, max_per_type=2, lo=-1.0, hi=1.0)
        x = rng.uniform(-1, 1)
        assert close(
            family.component(x, inputs), coupling_eval_explicit(oracle, x, inputs)
        )


def test_size_caps():
    p2 = build_polynomial_single({2: 1})
    big = tuple(NI(1, 1.0, 1.0) for _ in range(21))
    with pytest.raises(SizeCapExceeded):
        coupling_eval_explicit(p2, 0.0, big)
    with pytest.raises(SizeCapExceeded):
        coupling_eval_recursive(p2, 0.0, big[:13])
    with pytest.raises(SizeCapExceeded):
        recompose(p2, 0.0, big[:13])


def test_family_check_passes_for_derived_families():
    add = make_additive_real()
    p3 = build_polynomial_single({3: 1})
    family = CouplingFamily.from_oracle(p3)
    report = coupling_family_check(family, [add], trials=400, seed=0)
    assert report.ok, report.counterexamples[:1]


def test_merge_expansion_witness_for_quadratic():
    # f1(w1 + w2 at a shared state) splits into the two first-order terms
    # plus the pair term
    p2 = build_polynomial_single({2: 1})
    family = CouplingFamily.from_polynomial(p2)
    w1, w2, x12 = 0.75, -0.5, 1.25
    lhs = family.component(0.0, (NI(1, w1 + w2, x12),))
    rhs = (
        family.component(0.0, (NI(1, w1, x12),))
        + family.component(0.0, (NI(1, w2, x12),))
        + family.component(0.0, (NI(1, w1, x12), NI(1, w2, x12)))
    )
    assert close(lhs, rhs)
    assert close(lhs, ((w1 + w2) * x12) ** 2)


def test_family_check_catches_zero_kill_violation():
    def bad_component(x, inputs):
        return math.fsum(e.state for e in inputs)  # ignores weights entirely

    family = CouplingFamily(1, 1, bad_component, order_bound=(1,))
    report = coupling_family_check(family, [make_additive_real()], trials=300, seed=0)
    assert not report.checks["zero_kill"]
    assert any(c["property"] == "zero_kill" for c in report.counterexamples)


def test_annihilator_excludes_finite_positive_order():
    # Under OR weights, a family claiming order 1 must fail the merge
    # expansion: merging two annihilator weights collapses to one term.
    def comp(x, inputs):
        k = type_multiindex(inputs, 1)
        if k == (0,):
            return 0.0
        if k == (1,):
            return inputs[0].state if inputs[0].weight else 0.0
        return 0.0

    family = CouplingFamily(1, 1, comp, order_bound=(1,), support=frozenset({(0,), (1,)}))
    report = coupling_family_check(family, [make_bool_or()], trials=300, seed=0)
    assert not report.checks["merge_expansion"]
    witness = next(c for c in report.counterexamples if c["property"] == "merge_expansion")
    assert witness["lhs"] != witness["rhs"]


def test_linearity_of_components():
    f = build_polynomial_single({2: 1})
    g = build_polynomial_single({1: 1, 3: Fraction(1, 2)})
    alpha = -1.5
    combined = BlackBoxOracle(
        1, 1, zero_f0, lambda x, inputs: alpha * f.evaluate(x, inputs) + g.evaluate(x, inputs)
    )
    rng = random.Random(17)
    for _ in range(100):
        inputs = random_inputs(rng, 1, max_per_type=3, lo=-1.0, hi=1.0)
        x = rng.uniform(-1, 1)
        lhs = coupling_eval_explicit(combined, x, inputs)
        rhs = alpha * coupling_eval_explicit(f, x, inputs) + coupling_eval_explicit(g, x, inputs)
        assert close(lhs, rhs)


def test_zero_weight_kills_components():
    rng = random.Random(23)
    p3 = build_polynomial_single({3: 1})
    exp = build_exponential(None)
    for _ in range(100):
        inputs = random_inputs(rng, 1, max_per_type=3, lo=-1.0, hi=1.0)
        victim = (NI(1, 0.0, rng.uniform(-1, 1)),) + inputs
        assert coupling_eval_explicit(p3, 0.0, victim) == 0.0  # exact for structured
        assert abs(coupling_eval_explicit(exp, 0.0, victim)) <= 1e-12


def test_top_order_component_is_weight_additive():
    # At the highest order the next component vanishes, so the merge
    # expansion degenerates to plain additivity in the weight coordinate.
    rng = random.Random(29)
    n = 4
    family = CouplingFamily.from_polynomial(build_polynomial_single({n: 1}))
    for _ in range(100):
        rest = tuple(NI(1, rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n - 1))
        w1, w2, x12 = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)
        lhs = family.component(0.0, (NI(1, w1 + w2, x12),) + rest)
        rhs = family.component(0.0, (NI(1, w1, x12),) + rest) + family.component(
            0.0, (NI(1, w2, x12),) + rest
        )
        assert close(lhs, rhs)


def test_coupling_order_structured():
    for n in (1, 2, 5):
        family = CouplingFamily.from_polynomial(build_polynomial_single({n: 1}))
        report = coupling_order(family, 1)
        assert report.kind == "finite" and report.order == n
    additive = CouplingFamily.from_polynomial(build_polynomial_single({1: Fraction(1, 2)}))
    assert coupling_order(additive, 1).order == 1
    mixed = CouplingFamily.from_polynomial(
        build_polynomial_multi({(1, 2): 1, (2, 1): 1}, n_types=2)
    )
    assert coupling_order(mixed, 1).order == 2
    assert coupling_order(mixed, 2).order == 2


def test_coupling_order_blackbox():
    exp_family = CouplingFamily.from_oracle(build_exponential(None))
    report = coupling_order(exp_family, 1, probe_budget=6)
    assert report.kind == "infinite_evidence"
    assert report.probed_nonzero == 6

    # a black box with a declared bound gets a sound finite answer
    p2 = build_polynomial_single({2: 1})
    opaque = BlackBoxOracle(1, 1, zero_f0, lambda x, inputs: p2.evaluate(x, inputs) - p2.f0(x))
    family = CouplingFamily(
        1, 1, lambda x, inputs: coupling_eval_explicit(opaque, x, inputs), order_bound=(4,)
    )
    report = coupling_order(family, 1)
    assert report.kind == "finite" and report.order == 2


def test_locally_maximal_orders():
    power5 = CouplingFamily.from_polynomial(build_polynomial_single({5: 1}))
    assert locally_maximal_orders(power5) == {(5,)}
    axes = CouplingFamily.from_polynomial(
        build_polynomial_multi({(2, 0): 1, (0, 3): 1}, n_types=2)
    )
    assert locally_maximal_orders(axes) == {(2, 0), (0, 3)}
    empty = CouplingFamily.from_polynomial(build_polynomial_multi({}, n_types=2))
    assert locally_maximal_orders(empty) == set()
    unbounded = CouplingFamily.from_oracle(build_exponential(None))
    with pytest.raises(ValueError):
        locally_maximal_orders(unbounded)


def test_polynomial_coupling_support():
    support = polynomial_coupling_support([(2, 0), (1, 1)])
    assert (1, 0) in support and (2, 0) in support
    assert (1, 1) in support and (0, 0) in support
    assert (0, 1) not in support  # no key with that zero pattern
    assert (2, 1) not in support


def test_truncated_exponential_components_converge_to_product_form():
    rng = random.Random(31)
    points = []
    for _ in range(100):
        size = rng.randint(1, 2)
        points.append(
            (tuple(NI(1, rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(size)))
        )
    worst = 0.0
    family = CouplingFamily.from_polynomial(build_exponential(12))
    for inputs in points:
        got = family.component(0.0, inputs)
        want = math.prod(math.expm1(e.weight * e.state) for e in inputs)
        worst = max(worst, abs(got - want))
    assert worst < 1e-6, worst
