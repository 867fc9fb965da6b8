"""Commutative-monoid weight algebras: the "edges in parallel" operation.

A weight monoid packs the parallel-composition operation, its identity (the
"no edge" value), an equality predicate and a bounded random sampler.  The
sampler draws dyadic rationals for the real-valued instances so that law
checks can use exact float comparisons.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable


def sample_dyadic(rng: random.Random, lo: float = -2.0, hi: float = 2.0, denom: int = 64) -> float:
    """Random multiple of 1/denom in [lo, hi]; sums of these are exact in
    binary floating point at this scale."""
    lo_n = int(lo * denom)
    hi_n = int(hi * denom)
    return rng.randint(lo_n, hi_n) / denom


@dataclass(frozen=True)
class WeightMonoid:
    """Commutative monoid on weight values.

    ``combine`` must be commutative and associative with ``zero`` as the
    identity; :func:`check_laws` probes these laws on random samples.
    ``annihilator`` is an optional absorbing element (a with a||w = a).
    """

    name: str
    combine: Callable[[Any, Any], Any]
    zero: Any
    sample: Callable[[random.Random], Any]
    equal: Callable[[Any, Any], bool] = field(default=lambda a, b: a == b)
    annihilator: Any = None

    def is_zero(self, w: Any) -> bool:
        return self.equal(w, self.zero)


def make_additive_real() -> WeightMonoid:
    """Real numbers under addition; zero weight 0.0.  Samples are bounded
    dyadics so that the monoid laws hold bit-exactly on sampled values."""
    return WeightMonoid(
        name="additive_real",
        combine=lambda a, b: a + b,
        zero=0.0,
        sample=sample_dyadic,
    )


def make_additive_positive() -> WeightMonoid:
    """Non-negative reals under addition.  Useful when tests need merged
    weights that can never cancel back to zero."""
    return WeightMonoid(
        name="additive_positive",
        combine=lambda a, b: a + b,
        zero=0.0,
        sample=lambda rng: sample_dyadic(rng, 1.0 / 64.0, 2.0),
    )


def _multiset_union(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(a + b))


def _sample_multiset(rng: random.Random) -> tuple:
    labels = "abc"
    return tuple(sorted(rng.choice(labels) for _ in range(rng.randint(0, 3))))


def make_free_parallel() -> WeightMonoid:
    """Finite multisets of edge labels under multiset union; the free
    commutative monoid, able to represent any finite bundle of parallel
    edges.  Canonical form is a sorted tuple of labels; zero is the empty
    multiset."""
    return WeightMonoid(
        name="free_parallel",
        combine=_multiset_union,
        zero=(),
        sample=_sample_multiset,
    )


def make_bool_or() -> WeightMonoid:
    """Booleans under OR; zero is False and True is an annihilator."""
    return WeightMonoid(
        name="bool_or",
        combine=lambda a, b: a or b,
        zero=False,
        sample=lambda rng: rng.random() < 0.5,
        annihilator=True,
    )


BUILTIN_MONOIDS: dict[str, Callable[[], WeightMonoid]] = {
    "additive_real": make_additive_real,
    "free_parallel": make_free_parallel,
    "bool_or": make_bool_or,
}


def monoid_by_name(name: str) -> WeightMonoid:
    try:
        return BUILTIN_MONOIDS[name]()
    except KeyError:
        raise ValueError(f"unknown monoid id {name!r}") from None


# Maps (target type, source type) -> monoid for the weights on such edges.
MonoidRegistry = dict[tuple[int, int], WeightMonoid]


@dataclass
class LawReport:
    """Outcome of randomized monoid-law checking."""

    monoid: str
    trials: int
    seed: int
    commutative_ok: bool = True
    associative_ok: bool = True
    identity_ok: bool = True
    counterexamples: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.commutative_ok and self.associative_ok and self.identity_ok

    def to_jsonable(self) -> dict:
        return {
            "monoid": self.monoid,
            "trials": self.trials,
            "seed": self.seed,
            "commutative_ok": self.commutative_ok,
            "associative_ok": self.associative_ok,
            "identity_ok": self.identity_ok,
            "counterexamples": self.counterexamples,
        }


def check_laws(m: WeightMonoid, trials: int, seed: int) -> LawReport:
    """Probe commutativity, associativity and the identity law on ``trials``
    random samples.  Deterministic for a given seed; the first counterexample
    per law is recorded and that law is not probed further."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    report = LawReport(monoid=m.name, trials=trials, seed=seed)
    for _ in range(trials):
        a, b, c = m.sample(rng), m.sample(rng), m.sample(rng)
        if report.commutative_ok and not m.equal(m.combine(a, b), m.combine(b, a)):
            report.commutative_ok = False
            report.counterexamples["commutative"] = {"a": a, "b": b}
        if report.associative_ok and not m.equal(
            m.combine(m.combine(a, b), c), m.combine(a, m.combine(b, c))
        ):
            report.associative_ok = False
            report.counterexamples["associative"] = {"a": a, "b": b, "c": c}
        if report.identity_ok and not m.equal(m.combine(m.zero, a), a):
            report.identity_ok = False
            report.counterexamples["identity"] = {"a": a}
        if not (report.commutative_ok or report.associative_ok or report.identity_ok):
            break
    return report
