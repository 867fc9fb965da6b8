"""Shared test fixtures: shipped component builders, deliberately broken
components, random samplers, and brute-force combinatorial oracles."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import permutations

from ccndecomp import (
    build_exponential,
    build_nested,
    build_polynomial_multi,
    build_polynomial_single,
    build_symmetric_power,
    make_additive_positive,
    make_additive_real,
    make_free_parallel,
)
from ccndecomp.oracle import BlackBoxOracle, NeighborInput, zero_f0


def shipped_oracles():
    """Every component builder the package ships, with the monoid row its
    admissibility is declared against."""
    add = make_additive_real()
    return [
        ("power2", build_polynomial_single({2: 1}), [add]),
        ("power5", build_polynomial_single({5: 1}), [add]),
        ("poly_single", build_polynomial_single({1: Fraction(3, 2), 3: Fraction(-1, 3)}), [add]),
        (
            "poly_multi",
            build_polynomial_multi({(1, 2): Fraction(1, 2), (0, 1): 2}, n_types=2),
            [add, add],
        ),
        (
            "nested",
            build_nested(
                [Fraction(2), Fraction(1, 3)],
                [[Fraction(1), Fraction(1, 2)], [Fraction(-1), Fraction(0), Fraction(1, 5)]],
            ),
            [add, add],
        ),
        ("exp_trunc6", build_exponential(6), [add]),
        ("exp_full", build_exponential(None), [add]),
        ("sym32", build_symmetric_power(3, 2), [add]),
    ]


def finite_order_oracles():
    return [(name, o, ms) for name, o, ms in shipped_oracles() if o.coeffs is not None]


def broken_merge_oracle():
    """Ignores multiset structure of free-parallel weights (responds to the
    squared edge count), so merging two bundles is not additive."""
    def fn(x, inputs):
        return math.fsum(len(e.weight) ** 2 * e.state for e in inputs)

    return BlackBoxOracle(1, 1, zero_f0, fn, "edge-count-squared"), [make_free_parallel()]


def broken_zero_oracle():
    """Reads the states of zero-weight neighbors."""
    def fn(x, inputs):
        return math.fsum(e.weight * e.state for e in inputs) + math.fsum(
            e.state for e in inputs if e.weight == 0.0
        )

    return BlackBoxOracle(1, 1, zero_f0, fn, "reads-zero-weights"), [make_additive_positive()]


def broken_permutation_oracle():
    """Biases toward the state of the last nonzero-weight input."""
    def fn(x, inputs):
        total = math.fsum(e.weight * e.state for e in inputs)
        last = 0.0
        for e in inputs:
            if e.weight != 0.0:
                last = e.state
        return total + 0.25 * last

    return BlackBoxOracle(1, 1, zero_f0, fn, "last-input-bias"), [make_additive_positive()]


def random_inputs(rng: random.Random, n_types: int, max_per_type: int = 3,
                  lo: float = -1.5, hi: float = 1.5) -> tuple[NeighborInput, ...]:
    entries = []
    for j in range(n_types):
        for _ in range(rng.randint(0, max_per_type)):
            entries.append(NeighborInput(j + 1, rng.uniform(lo, hi), rng.uniform(lo, hi)))
    rng.shuffle(entries)
    return tuple(entries)


def random_inputs_within(rng: random.Random, bound, max_per_type: int = 3,
                         lo: float = -1.5, hi: float = 1.5) -> tuple[NeighborInput, ...]:
    entries = []
    for j, b in enumerate(bound):
        for _ in range(rng.randint(0, min(max_per_type, b))):
            entries.append(NeighborInput(j + 1, rng.uniform(lo, hi), rng.uniform(lo, hi)))
    rng.shuffle(entries)
    return tuple(entries)


def random_polynomial_coeffs(rng: random.Random, bound=(4, 4)) -> dict:
    """Random nonzero rational coefficient map over 2 types within the
    entrywise bound."""
    keys = set()
    while not keys:
        for _ in range(rng.randint(1, 4)):
            k = tuple(rng.randint(0, b) for b in bound)
            if any(k):
                keys.add(k)
    return {k: Fraction(rng.randint(-6, 6) or 1, rng.randint(1, 4)) for k in keys}


# --- brute-force combinatorial oracles --------------------------------------

def count_permutations_with_cycles(n: int, k: int) -> int:
    """Number of permutations of n elements with exactly k cycles."""
    if n == 0:
        return 1 if k == 0 else 0
    count = 0
    for perm in permutations(range(n)):
        seen = [False] * n
        cycles = 0
        for start in range(n):
            if seen[start]:
                continue
            cycles += 1
            i = start
            while not seen[i]:
                seen[i] = True
                i = perm[i]
        if cycles == k:
            count += 1
    return count


def count_set_partitions(n: int, k: int) -> int:
    """Number of partitions of an n-set into exactly k nonempty blocks."""
    if n == 0:
        return 1 if k == 0 else 0

    def rec(i: int, blocks: list[list[int]]) -> int:
        if i == n:
            return 1 if len(blocks) == k else 0
        total = 0
        for b in blocks:
            b.append(i)
            total += rec(i + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([i])
            total += rec(i + 1, blocks)
            blocks.pop()
        return total

    return rec(0, [])
