"""Subset (anchored) decomposition of a component into coupling terms.

The coupling component for a concrete neighborhood s is the part of the
response that only shows up when every input in s participates: the
inclusion-exclusion alternating sum of the whole-function evaluations over
all subsets of s.  Summing coupling components over all subsets recovers the
original response exactly.

Closed forms are available for the structured polynomial family; everything
else goes through the subset sums with explicit size caps (2^|s| work).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .monoid import WeightMonoid, sample_dyadic
from .multiindex import MultiIndex, iter_multiindices, norm, ones, zero_pattern, zeros
from .oracle import (
    CellSpec,
    NeighborInput,
    OracleComponent,
    PolynomialOracle,
    inputs_jsonable,
    within_tolerance,
)
from .report import CheckReport

EXPLICIT_SIZE_CAP = 20
RECURSIVE_SIZE_CAP = 12


class SizeCapExceeded(ValueError):
    """Neighborhood too large for the 2^|s| subset enumeration."""


def _subsets(inputs: Sequence[NeighborInput]) -> Iterable[tuple[int, CellSpec]]:
    """All subsets as (popcount, entries), in increasing bitmask order."""
    n = len(inputs)
    for mask in range(1 << n):
        subset = tuple(inputs[i] for i in range(n) if mask >> i & 1)
        yield len(subset), subset


def coupling_eval_explicit(
    oracle: OracleComponent,
    x: float,
    inputs: Sequence[NeighborInput],
    max_size: int = EXPLICIT_SIZE_CAP,
) -> float:
    """Coupling component at the given neighborhood by inclusion-exclusion:
    sum over subsets s' of (-1)^(|s|-|s'|) * oracle(x; s')."""
    inputs = tuple(inputs)
    if len(inputs) > max_size:
        raise SizeCapExceeded(f"neighborhood of size {len(inputs)} exceeds cap {max_size}")
    total_size = len(inputs)
    terms = []
    for size, subset in _subsets(inputs):
        sign = -1.0 if (total_size - size) % 2 else 1.0
        terms.append(sign * oracle.evaluate(x, subset))
    return math.fsum(terms)


def coupling_eval_recursive(
    oracle: OracleComponent,
    x: float,
    inputs: Sequence[NeighborInput],
    max_size: int = RECURSIVE_SIZE_CAP,
) -> float:
    """Same value as :func:`coupling_eval_explicit` via the recursive
    definition (whole response minus all strictly smaller components),
    memoized over subset bitmasks."""
    inputs = tuple(inputs)
    n = len(inputs)
    if n > max_size:
        raise SizeCapExceeded(f"neighborhood of size {n} exceeds cap {max_size}")
    memo: dict[int, float] = {}

    def strict_submasks(mask: int) -> Iterable[int]:
        if mask == 0:
            return
        sub = (mask - 1) & mask
        while True:
            yield sub
            if sub == 0:
                return
            sub = (sub - 1) & mask

    def component(mask: int) -> float:
        if mask in memo:
            return memo[mask]
        subset = tuple(inputs[i] for i in range(n) if mask >> i & 1)
        value = oracle.evaluate(x, subset) - math.fsum(
            component(sub) for sub in strict_submasks(mask)
        )
        memo[mask] = value
        return value

    return component((1 << n) - 1)


@dataclass(frozen=True)
class CouplingFamily:
    """Family of coupling components for one target type.

    ``component(x, inputs)`` evaluates the component indexed by the type
    multi-index of ``inputs`` at those concrete weights/states.  When the
    family has known finite support, ``order_bound`` bounds it entrywise and
    ``support`` lists the multi-indexes of (potentially) nonzero components.
    """

    target_type: int
    n_types: int
    component: Callable[[float, CellSpec], float]
    order_bound: MultiIndex | None = None
    support: frozenset[MultiIndex] | None = None

    @classmethod
    def from_oracle(cls, oracle: OracleComponent, method: str = "explicit") -> "CouplingFamily":
        """Derive the family from any component via the subset sums."""
        if method == "explicit":
            fn = coupling_eval_explicit
        elif method == "recursive":
            fn = coupling_eval_recursive
        else:
            raise ValueError(f"unknown method {method!r}")

        def component(x: float, inputs: CellSpec) -> float:
            return fn(oracle, x, inputs)

        coeffs = oracle.coeffs
        support = None if coeffs is None else polynomial_coupling_support(coeffs.keys())
        return cls(
            target_type=oracle.target_type,
            n_types=oracle.n_types,
            component=component,
            order_bound=oracle.order_bound,
            support=support,
        )

    @classmethod
    def from_polynomial(cls, oracle: PolynomialOracle) -> "CouplingFamily":
        """Closed form for the structured polynomial family: for each
        coefficient a_n, the component at a neighborhood with k_j inputs of
        type j is a_n * prod_j [ n_j! * sum over m_j >= 1 with |m_j| = n_j of
        prod (w*state)^m / m! ], zero when the per-type counts cannot reach
        n (empty types must have n_j = 0)."""
        coeffs = oracle.coeffs
        if coeffs is None:
            raise ValueError("closed-form family requires a structured polynomial component")
        n_types = oracle.n_types
        f0 = oracle.f0
        frozen = dict(coeffs)

        def component(x: float, inputs: CellSpec) -> float:
            if not inputs:
                return f0(x)
            per_type: list[list[float]] = [[] for _ in range(n_types)]
            for e in inputs:
                per_type[e.type_index - 1].append(e.weight * e.state)
            terms = []
            for n_vec in sorted(frozen):
                term = float(frozen[n_vec])
                for j in range(n_types):
                    products = per_type[j]
                    n_j = n_vec[j]
                    if not products:
                        if n_j:
                            term = 0.0
                            break
                        continue
                    if n_j < len(products):
                        term = 0.0
                        break
                    inner = []
                    for m in iter_multiindices(len(products), ones(len(products)), norm_equals=n_j):
                        piece = 1.0
                        for p, exp in zip(products, m):
                            piece *= p ** exp / math.factorial(exp)
                        inner.append(piece)
                    term *= math.factorial(n_j) * math.fsum(inner)
                    if term == 0.0:
                        break
                terms.append(term)
            return math.fsum(terms)

        return cls(
            target_type=oracle.target_type,
            n_types=n_types,
            component=component,
            order_bound=oracle.order_bound,
            support=polynomial_coupling_support(frozen.keys()),
        )


def polynomial_coupling_support(coeff_keys: Iterable[MultiIndex]) -> frozenset[MultiIndex]:
    """Multi-indexes of nonzero coupling components of a polynomial family:
    every k sharing a zero pattern with a coefficient key n and k <= n.
    The zero index (isolated-cell term) is always included."""
    support: set[MultiIndex] = set()
    keys = list(coeff_keys)
    if keys:
        support.add(zeros(len(keys[0])))
    for n_vec in keys:
        lower = tuple(1 if e else 0 for e in n_vec)
        support.update(iter_multiindices(len(n_vec), lower, upper=n_vec))
    return frozenset(support)


def recompose(
    source: OracleComponent | CouplingFamily,
    x: float,
    inputs: Sequence[NeighborInput],
    max_size: int = RECURSIVE_SIZE_CAP,
) -> float:
    """Rebuild the whole response as the sum of coupling components over all
    subsets of the neighborhood."""
    inputs = tuple(inputs)
    if len(inputs) > max_size:
        raise SizeCapExceeded(f"neighborhood of size {len(inputs)} exceeds cap {max_size}")
    if isinstance(source, CouplingFamily):
        component = source.component
    else:
        def component(px: float, sub: CellSpec) -> float:
            return coupling_eval_explicit(source, px, sub)
    return math.fsum(component(x, subset) for _, subset in _subsets(inputs))


def coupling_family_check(
    family: CouplingFamily,
    monoids: Sequence[WeightMonoid],
    trials: int = 1000,
    seed: int = 0,
    tol: float = 1e-9,
    max_per_type: int = 2,
) -> CheckReport:
    """Randomized check of the three properties that characterize a valid
    coupling family: permutation invariance, the three-term merge expansion
    linking the component to the next order up, and annihilation by any zero
    weight."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(monoids) != family.n_types:
        raise ValueError(f"need one monoid per source type ({family.n_types}), got {len(monoids)}")
    rng = random.Random(seed)
    report = CheckReport(
        name="coupling_family",
        trials=trials,
        seed=seed,
        tolerance=tol,
        checks={"permutation": True, "merge_expansion": True, "zero_kill": True},
    )
    for _ in range(trials):
        entries: list[NeighborInput] = []
        for j in range(family.n_types):
            for _ in range(rng.randint(0, max_per_type)):
                entries.append(NeighborInput(j + 1, monoids[j].sample(rng), sample_dyadic(rng)))
        rng.shuffle(entries)
        rest = tuple(entries)
        x = sample_dyadic(rng)

        if rest:
            shuffled = list(rest)
            rng.shuffle(shuffled)
            lhs = family.component(x, rest)
            rhs = family.component(x, tuple(shuffled))
            if not within_tolerance(lhs, rhs, tol):
                report.record(
                    "permutation", x=x, inputs=inputs_jsonable(rest), lhs=lhs, rhs=rhs,
                    diff=abs(lhs - rhs),
                )

        j = rng.randrange(family.n_types)
        w1, w2 = monoids[j].sample(rng), monoids[j].sample(rng)
        x12 = sample_dyadic(rng)
        merged = (NeighborInput(j + 1, monoids[j].combine(w1, w2), x12),) + rest
        one = (NeighborInput(j + 1, w1, x12),) + rest
        two = (NeighborInput(j + 1, w2, x12),) + rest
        both = (NeighborInput(j + 1, w1, x12), NeighborInput(j + 1, w2, x12)) + rest
        lhs = family.component(x, merged)
        rhs = math.fsum(
            (family.component(x, one), family.component(x, two), family.component(x, both))
        )
        if not within_tolerance(lhs, rhs, tol):
            report.record(
                "merge_expansion", x=x, inputs=inputs_jsonable(rest), source_type=j + 1,
                w1=w1, w2=w2, shared_state=x12, lhs=lhs, rhs=rhs, diff=abs(lhs - rhs),
            )

        j = rng.randrange(family.n_types)
        killed = (NeighborInput(j + 1, monoids[j].zero, sample_dyadic(rng)),) + rest
        value = family.component(x, killed)
        if not within_tolerance(value, 0.0, tol):
            report.record(
                "zero_kill", x=x, inputs=inputs_jsonable(killed), lhs=value, rhs=0.0,
                diff=abs(value),
            )
    return report


@dataclass(frozen=True)
class OrderReport:
    """Result of interaction-order analysis along one type axis.

    ``kind`` is "finite" (with ``order`` set), "infinite_evidence" (nonzero
    components observed at the probe horizon) or "unknown" (sampling found
    nothing past ``probed_nonzero`` but cannot certify absence).
    """

    kind: str
    order: int | None = None
    probed_nonzero: int = 0


def coupling_order(
    family: CouplingFamily,
    type_index: int,
    probe_budget: int = 8,
    samples: int = 4,
    seed: int = 0,
) -> OrderReport:
    """Largest count of type-``type_index`` inputs appearing in any nonzero
    component.

    Structured families answer exactly from their support.  Black-box-backed
    families are probed at random points: a declared ``order_bound`` makes a
    finite answer sound (largest order with an observed nonzero component);
    without one, only evidence is reported, never a false "finite".
    """
    j = type_index - 1
    if not 0 <= j < family.n_types:
        raise ValueError(f"type index {type_index} out of range 1..{family.n_types}")
    if family.support is not None:
        gamma = max((k[j] for k in family.support), default=0)
        return OrderReport(kind="finite", order=gamma, probed_nonzero=gamma)

    rng = random.Random(seed)

    def observed_nonzero(k: int) -> bool:
        for _ in range(samples):
            inputs = tuple(
                NeighborInput(type_index, sample_dyadic(rng, 0.25, 2.0), sample_dyadic(rng, 0.25, 2.0))
                for _ in range(k)
            )
            if abs(family.component(sample_dyadic(rng), inputs)) > 1e-12:
                return True
        return False

    if family.order_bound is not None:
        top = family.order_bound[j]
        for k in range(top, 0, -1):
            if observed_nonzero(k):
                return OrderReport(kind="finite", order=k, probed_nonzero=k)
        return OrderReport(kind="finite", order=0, probed_nonzero=0)

    last_nonzero = 0
    for k in range(1, probe_budget + 1):
        if observed_nonzero(k):
            last_nonzero = k
    if last_nonzero == probe_budget:
        return OrderReport(kind="infinite_evidence", probed_nonzero=last_nonzero)
    return OrderReport(kind="unknown", probed_nonzero=last_nonzero)


def locally_maximal_orders(family: CouplingFamily) -> set[MultiIndex]:
    """Support indexes with no strictly larger nonzero index sharing their
    zero pattern.  Requires known finite support."""
    if family.support is None:
        raise ValueError("locally maximal orders require a family with known finite support")
    nonzero = [k for k in family.support if norm(k) > 0]
    out: set[MultiIndex] = set()
    for k in nonzero:
        pattern = zero_pattern(k)
        dominated = any(
            other != k
            and zero_pattern(other) == pattern
            and all(a <= b for a, b in zip(k, other))
            for other in nonzero
        )
        if not dominated:
            out.add(k)
    return out
