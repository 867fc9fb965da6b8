"""Basis decomposition for finite-order families.

Basis components are the decoupled building blocks: permutation invariant,
additive in each weight coordinate, annihilated by zero weights.  For
families with finite support the coupling and basis pictures are in
bijection through Stirling-weighted multiplicity sums:

- coupling from basis uses second-kind weights  m_c!/M_c! * S2(M_c, m_c),
- basis from coupling uses first-kind weights with alternating signs,
- the whole response is the multiplicity sum of basis components with
  1/prod(m_c!) weights,
- and basis components come straight from whole-function evaluations with
  the r-Stirling coefficient C(K, M, r), given any valid support bound K.

All Stirling weights are exact rationals, converted to float only when they
multiply a component evaluation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping, Sequence

from .coupling import CouplingFamily
from .monoid import WeightMonoid, sample_dyadic
from .multiindex import MultiIndex, as_multiindex, iter_multiindices, norm
from .oracle import (
    CellSpec,
    NeighborInput,
    OracleComponent,
    SpecFormatError,
    expand,
    inputs_jsonable,
    parse_f0,
    type_multiindex,
    within_tolerance,
    zero_f0,
)
from .report import CheckReport
from .stirling import coefficient_c, stirling1, stirling2


class MissingSupportBound(ValueError):
    """A transform that truncates by finite support got no bound."""


class BoundDisagreement(ValueError):
    """Two supposedly valid support bounds produced different values."""


@dataclass(frozen=True)
class BasisFamily:
    """Finite-support family of basis components for one target type.

    ``component(x, inputs)`` evaluates the component indexed by the type
    multi-index of ``inputs``; it must vanish for indexes outside the
    entrywise ``support_bound``.
    """

    target_type: int
    n_types: int
    support_bound: MultiIndex
    component: Callable[[float, CellSpec], float]
    coeffs: Mapping[MultiIndex, Fraction] | None = None

    @classmethod
    def polynomial(
        cls,
        coeffs: Mapping[Sequence[int], Any],
        n_types: int | None = None,
        f0: Callable[[float], float] | None = None,
        target_type: int = 1,
    ) -> "BasisFamily":
        """Monomial basis components: a_k * prod_j k_j! * prod_c w_c x_c on
        the coefficient support, the isolated-cell term at k = 0, zero
        elsewhere.  These correspond to the structured polynomial component
        with the same coefficients."""
        table: dict[MultiIndex, Fraction] = {}
        width = n_types
        for key, a in coeffs.items():
            k = as_multiindex(tuple(key))
            if width is None:
                width = len(k)
            if len(k) != width:
                raise ValueError(f"key {key!r} has tupleness {len(k)}, expected {width}")
            if norm(k) == 0:
                raise ValueError("the zero multi-index is not a valid basis key; use f0")
            frac = Fraction(str(a)) if isinstance(a, str) else Fraction(a)
            if frac:
                table[k] = frac
        if width is None:
            raise ValueError("n_types is required when the coefficient map is empty")
        bound = [0] * width
        for k in table:
            for j, e in enumerate(k):
                bound[j] = max(bound[j], e)
        f0 = f0 or zero_f0
        fact = {k: math.prod(math.factorial(e) for e in k) for k in table}

        def component(x: float, inputs: CellSpec) -> float:
            k = type_multiindex(inputs, width)
            if norm(k) == 0:
                return f0(x)
            a = table.get(k)
            if a is None:
                return 0.0
            value = float(a) * fact[k]
            for e in inputs:
                value *= e.weight * e.state
            return value

        return cls(
            target_type=target_type,
            n_types=width,
            support_bound=tuple(bound),
            component=component,
            coeffs=dict(table),
        )

    @classmethod
    def symmetric_power(
        cls,
        n: int,
        k: int,
        f0: Callable[[float], float] | None = None,
        target_type: int = 1,
    ) -> "BasisFamily":
        """Single-type basis family (n-k)! k! * prod(w_c) * e_k(states) at
        order n, matching the (sum w)^(n-k) (sum w x)^k component."""
        if k < 1 or k > n:
            raise ValueError(f"symmetric power requires n >= k > 0, got n={n}, k={k}")
        f0 = f0 or zero_f0
        scale = math.factorial(n - k) * math.factorial(k)

        def component(x: float, inputs: CellSpec) -> float:
            if not inputs:
                return f0(x)
            if len(inputs) != n:
                return 0.0
            value = scale
            for e in inputs:
                value *= e.weight
            return value * elementary_symmetric([e.state for e in inputs], k)

        return cls(target_type=target_type, n_types=1, support_bound=(n,), component=component)

    @classmethod
    def from_coupling(cls, family: CouplingFamily) -> "BasisFamily":
        """Generic basis family evaluated through the first-kind transform of
        a finite-order coupling family."""
        if family.order_bound is None:
            raise MissingSupportBound("finite support bound required")

        def component(x: float, inputs: CellSpec) -> float:
            return basis_from_coupling(family, x, inputs)

        return cls(
            target_type=family.target_type,
            n_types=family.n_types,
            support_bound=family.order_bound,
            component=component,
        )

    def to_jsonable(self) -> dict:
        if self.coeffs is None:
            raise SpecFormatError("only monomial-coefficient basis families serialize to JSON")
        return {
            "type_index": self.target_type,
            "support_bound": list(self.support_bound),
            "components": [
                {"k": list(k), "family": "monomial", "coeff": str(self.coeffs[k])}
                for k in sorted(self.coeffs)
            ],
        }


def basis_family_from_json(doc: dict) -> BasisFamily:
    """Parse {"type_index", "support_bound", "components": [{"k", "family",
    "coeff"}...]} into a monomial basis family."""
    if not isinstance(doc, dict):
        raise SpecFormatError("basis family spec must be a JSON object")
    try:
        entries = doc["components"]
        coeffs = {}
        for entry in entries:
            if entry.get("family", "monomial") != "monomial":
                raise SpecFormatError(f"unknown basis component family {entry.get('family')!r}")
            coeffs[tuple(int(e) for e in entry["k"])] = Fraction(str(entry["coeff"]))
        fam = BasisFamily.polynomial(
            coeffs,
            n_types=len(doc["support_bound"]),
            f0=parse_f0(str(doc.get("f0", "zero"))),
            target_type=int(doc.get("type_index", 1)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecFormatError):
            raise
        raise SpecFormatError(f"bad basis family spec: {exc}") from exc
    declared = tuple(int(e) for e in doc["support_bound"])
    if not all(a <= b for a, b in zip(fam.support_bound, declared)) or len(declared) != fam.n_types:
        raise SpecFormatError("components exceed the declared support bound")
    return BasisFamily(
        target_type=fam.target_type,
        n_types=fam.n_types,
        support_bound=declared,
        component=fam.component,
        coeffs=fam.coeffs,
    )


def elementary_symmetric(values: Sequence[float], k: int) -> float:
    """k-th elementary symmetric polynomial; values are sorted first so the
    result does not depend on input order."""
    if k < 0 or k > len(values):
        return 0.0
    table = [1.0] + [0.0] * k
    for v in sorted(values):
        for i in range(min(k, len(values)), 0, -1):
            table[i] += table[i - 1] * v
    return table[k]


@dataclass(frozen=True)
class MultiplicityPoint:
    """Evaluation point (x; m, w_s, x_s): a base neighborhood together with a
    per-entry duplication count.  Component evaluations read it as the
    expanded neighborhood."""

    x: float
    inputs: CellSpec
    multiplicity: MultiIndex

    def __post_init__(self) -> None:
        if len(self.multiplicity) != len(self.inputs):
            raise ValueError(
                f"multiplicity has {len(self.multiplicity)} entries for {len(self.inputs)} inputs"
            )


def _iter_expansions(
    inputs: CellSpec,
    n_types: int,
    bound: MultiIndex,
    lows: Sequence[int],
    pin_zero_lows: bool = False,
) -> Iterator[MultiIndex]:
    """Multiplicity vectors m with m_c >= lows[c] whose per-type expanded
    counts stay within the entrywise bound.  With ``pin_zero_lows`` the
    positions whose lower bound is 0 are frozen at 0 (used by the transforms
    whose Stirling weight is a delta there)."""
    groups: list[list[int]] = [[] for _ in range(n_types)]
    for pos, e in enumerate(inputs):
        if not (pin_zero_lows and lows[pos] == 0):
            groups[e.type_index - 1].append(pos)
    options: list[list[MultiIndex]] = []
    for j, positions in enumerate(groups):
        lower = tuple(lows[p] for p in positions)
        opts = list(iter_multiindices(len(positions), lower, norm_at_most=bound[j]))
        if not opts:
            return
        options.append(opts)

    def rec(j: int, acc: list[int]) -> Iterator[MultiIndex]:
        if j == n_types:
            yield tuple(acc)
            return
        for choice in options[j]:
            for pos, val in zip(groups[j], choice):
                acc[pos] = val
            yield from rec(j + 1, acc)

    yield from rec(0, [0] * len(inputs))


def _require_bound(family: CouplingFamily) -> MultiIndex:
    if family.order_bound is None:
        raise MissingSupportBound("finite support bound required")
    return family.order_bound


def basis_from_coupling(family: CouplingFamily, x: float, inputs: Sequence[NeighborInput]) -> float:
    """First-kind transform: sum over duplication vectors m >= 1 of
    (-1)^(|m|-|s|) / prod(m_c) times the coupling component at the expanded
    neighborhood.  Truncated by the family's support bound."""
    bound = _require_bound(family)
    inputs = tuple(inputs)
    if not inputs:
        return family.component(x, ())
    size = len(inputs)
    terms = []
    for m in _iter_expansions(inputs, family.n_types, bound, [1] * size):
        sign = -1.0 if (norm(m) - size) % 2 else 1.0
        denom = 1
        for e in m:
            denom *= e
        terms.append(sign / denom * family.component(x, expand(m, inputs)))
    return math.fsum(terms)


def coupling_from_basis(bf: BasisFamily, x: float, inputs: Sequence[NeighborInput]) -> float:
    """Second-kind direction: sum over duplication vectors m >= 1 of
    1/prod(m_c!) times the basis component at the expanded neighborhood."""
    inputs = tuple(inputs)
    if not inputs:
        return bf.component(x, ())
    terms = []
    for m in _iter_expansions(inputs, bf.n_types, bf.support_bound, [1] * len(inputs)):
        denom = 1
        for e in m:
            denom *= math.factorial(e)
        terms.append(bf.component(x, expand(m, inputs)) / denom)
    return math.fsum(terms)


def coupling_from_basis_multi(bf: BasisFamily, point: MultiplicityPoint) -> float:
    """Coupling component at a multiplicity point via second-kind Stirling
    weights: sum over M of prod_c [m_c!/M_c! * S2(M_c, m_c)] times the basis
    component at the M-expanded base neighborhood.

    Entries with m_c = 0 force M_c = 0 (S2(M, 0) is a delta), so the sum runs
    over duplications of the active entries only.
    """
    inputs = point.inputs
    m = point.multiplicity
    terms = []
    for big_m in _iter_expansions(
        inputs, bf.n_types, bf.support_bound, list(m), pin_zero_lows=True
    ):
        weight = Fraction(1)
        for mc, bc in zip(m, big_m):
            if mc == 0:
                continue
            weight *= Fraction(math.factorial(mc), math.factorial(bc)) * stirling2(bc, mc)
        if weight:
            terms.append(float(weight) * bf.component(point.x, expand(big_m, inputs)))
    return math.fsum(terms)


def basis_from_coupling_multi(family: CouplingFamily, point: MultiplicityPoint) -> float:
    """Basis component at a multiplicity point via first-kind Stirling
    weights: sum over M of (-1)^(|M|-|m|) prod_c [m_c!/M_c! * s1(M_c, m_c)]
    times the coupling component at the M-expanded base neighborhood."""
    bound = _require_bound(family)
    inputs = point.inputs
    m = point.multiplicity
    terms = []
    for big_m in _iter_expansions(inputs, family.n_types, bound, list(m), pin_zero_lows=True):
        weight = Fraction(1)
        for mc, bc in zip(m, big_m):
            if mc == 0:
                continue
            weight *= Fraction(math.factorial(mc), math.factorial(bc)) * stirling1(bc, mc)
        if not weight:
            continue
        sign = -1.0 if (norm(big_m) - norm(m)) % 2 else 1.0
        terms.append(sign * float(weight) * family.component(point.x, expand(big_m, inputs)))
    return math.fsum(terms)


def oracle_from_basis(bf: BasisFamily, x: float, inputs: Sequence[NeighborInput]) -> float:
    """Reconstruct the whole response: sum over duplication vectors m >= 0 of
    1/prod(m_c!) times the basis component at the expanded neighborhood."""
    inputs = tuple(inputs)
    terms = []
    for m in _iter_expansions(inputs, bf.n_types, bf.support_bound, [0] * len(inputs)):
        denom = 1
        for e in m:
            denom *= math.factorial(e)
        terms.append(bf.component(x, expand(m, inputs)) / denom)
    return math.fsum(terms)


def basis_from_oracle_direct(
    oracle: OracleComponent,
    bound: Sequence[int],
    x: float,
    inputs: Sequence[NeighborInput],
    *,
    cross_check: bool = False,
    cross_tol: float = 1e-9,
) -> float:
    """Basis component straight from whole-function evaluations.

    Valid for any entrywise support bound ``bound`` that really contains all
    nonzero interaction orders of ``oracle`` (the caller asserts this; a
    wrong bound silently yields wrong values, which ``cross_check`` exposes
    by re-running with each axis bumped by one and comparing).

    The double sum runs over subsets s' of the neighborhood and duplication
    vectors M >= 1 of s' staying within the bound, weighted by
    (-1)^(|s|+|M|) / prod(M_c) and the per-type coefficients
    C(K_j, |M_j|, r_j), where r_j counts the type-j inputs left out of s'.
    """
    inputs = tuple(inputs)
    big_k = as_multiindex(bound)
    if len(big_k) != oracle.n_types:
        raise ValueError(f"bound has tupleness {len(big_k)}, expected {oracle.n_types}")
    k_s = type_multiindex(inputs, oracle.n_types)
    if not all(a <= b for a, b in zip(k_s, big_k)):
        raise ValueError(f"neighborhood order {k_s} exceeds the declared bound {tuple(big_k)}")

    n = len(inputs)
    terms = []
    for mask in range(1 << n):
        subset = tuple(inputs[i] for i in range(n) if mask >> i & 1)
        left_out = [inputs[i] for i in range(n) if not mask >> i & 1]
        r_counts = type_multiindex(tuple(left_out), oracle.n_types)
        for big_m in _iter_expansions(subset, oracle.n_types, big_k, [1] * len(subset)):
            weight = Fraction(1)
            for e in big_m:
                weight /= e
            per_type_norm = [0] * oracle.n_types
            for e, entry in zip(big_m, subset):
                per_type_norm[entry.type_index - 1] += e
            for j in range(oracle.n_types):
                weight *= coefficient_c(big_k[j], per_type_norm[j], r_counts[j])
            if not weight:
                continue
            sign = -1.0 if norm(big_m) % 2 else 1.0
            terms.append(sign * float(weight) * oracle.evaluate(x, expand(big_m, subset)))
    value = (-1.0 if n % 2 else 1.0) * math.fsum(terms)

    if cross_check:
        for j in range(oracle.n_types):
            bumped = tuple(b + (1 if i == j else 0) for i, b in enumerate(big_k))
            other = basis_from_oracle_direct(oracle, bumped, x, inputs)
            if not within_tolerance(value, other, cross_tol):
                raise BoundDisagreement(
                    f"bounds {tuple(big_k)} and {bumped} disagree: {value} vs {other}; "
                    "the declared support bound is too small"
                )
    return value


def basis_family_check(
    bf: BasisFamily,
    monoids: Sequence[WeightMonoid],
    trials: int = 1000,
    seed: int = 0,
    tol: float = 1e-9,
    max_per_type: int = 3,
) -> CheckReport:
    """Randomized check of the defining basis properties: permutation
    invariance, additivity in each weight coordinate, and annihilation by a
    zero weight anywhere."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(monoids) != bf.n_types:
        raise ValueError(f"need one monoid per source type ({bf.n_types}), got {len(monoids)}")
    rng = random.Random(seed)
    report = CheckReport(
        name="basis_family",
        trials=trials,
        seed=seed,
        tolerance=tol,
        checks={"permutation": True, "weight_additivity": True, "zero_kill": True},
    )
    for _ in range(trials):
        entries: list[NeighborInput] = []
        for j in range(bf.n_types):
            for _ in range(rng.randint(0, max_per_type)):
                entries.append(NeighborInput(j + 1, monoids[j].sample(rng), sample_dyadic(rng)))
        rng.shuffle(entries)
        inputs = tuple(entries)
        x = sample_dyadic(rng)

        if inputs:
            shuffled = list(inputs)
            rng.shuffle(shuffled)
            lhs = bf.component(x, inputs)
            rhs = bf.component(x, tuple(shuffled))
            if not within_tolerance(lhs, rhs, tol):
                report.record(
                    "permutation", x=x, inputs=inputs_jsonable(inputs), lhs=lhs, rhs=rhs,
                    diff=abs(lhs - rhs),
                )

            head = inputs[0]
            j = head.type_index - 1
            w1, w2 = monoids[j].sample(rng), monoids[j].sample(rng)
            both = (head._replace(weight=monoids[j].combine(w1, w2)),) + inputs[1:]
            lhs = bf.component(x, both)
            rhs = bf.component(x, (head._replace(weight=w1),) + inputs[1:]) + bf.component(
                x, (head._replace(weight=w2),) + inputs[1:]
            )
            if not within_tolerance(lhs, rhs, tol):
                report.record(
                    "weight_additivity", x=x, inputs=inputs_jsonable(inputs), w1=w1, w2=w2,
                    lhs=lhs, rhs=rhs, diff=abs(lhs - rhs),
                )

            j = inputs[0].type_index - 1
            killed = (inputs[0]._replace(weight=monoids[j].zero),) + inputs[1:]
            value = bf.component(x, killed)
            if not within_tolerance(value, 0.0, tol):
                report.record(
                    "zero_kill", x=x, inputs=inputs_jsonable(killed), lhs=value, rhs=0.0,
                    diff=abs(value),
                )
    return report


@dataclass
class ConvergenceReport:
    """Per-probe-point reconstruction values for each truncation depth, the
    successive sup-differences, and sup-errors against an optional limit."""

    depths: list[int]
    values: list[list[float]] = field(default_factory=list)
    successive: dict[int, float] = field(default_factory=dict)
    limit_errors: dict[int, float] = field(default_factory=dict)

    @property
    def final_limit_error(self) -> float | None:
        if not self.limit_errors:
            return None
        return self.limit_errors[max(self.limit_errors)]

    def to_jsonable(self) -> dict:
        return {
            "depths": self.depths,
            "values": self.values,
            "successive": {str(k): v for k, v in sorted(self.successive.items())},
            "limit_errors": {str(k): v for k, v in sorted(self.limit_errors.items())},
        }


def truncation_sequence(
    generator: Callable[[int], BasisFamily],
    n_max: int,
    probe_points: Sequence[tuple[float, CellSpec]],
    limit: Callable[[float, CellSpec], float] | None = None,
) -> ConvergenceReport:
    """Reconstruct the whole response from generator(N) for N = 1..n_max at
    each probe point and report how the sequence settles."""
    report = ConvergenceReport(depths=list(range(1, n_max + 1)))
    previous: list[float] | None = None
    for depth in report.depths:
        bf = generator(depth)
        row = [oracle_from_basis(bf, x, inputs) for x, inputs in probe_points]
        report.values.append(row)
        if previous is not None:
            report.successive[depth] = max(
                (abs(a - b) for a, b in zip(row, previous)), default=0.0
            )
        if limit is not None:
            report.limit_errors[depth] = max(
                (abs(v - limit(x, inputs)) for v, (x, inputs) in zip(row, probe_points)),
                default=0.0,
            )
        previous = row
    return report
