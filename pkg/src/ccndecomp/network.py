"""Weighted multi-edge network model and cell-wise evaluation.

A network is an ordered cell list, a type per cell, and an in-adjacency
matrix whose (c, d) entry is the weight of the edge from d into c, drawn
from the monoid registered for the (type(c), type(d)) pair.  Evaluating a
per-type tuple of components cell by cell on the in-neighborhoods yields the
network-level function; a fixed-step RK4 integrator drives it as dynamics.

The schema records a per-type state dimension, but evaluation and
integration operate on scalar (dimension-1) states, which is all the shipped
component families support; higher dimensions are carried as metadata for
black-box users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from .monoid import MonoidRegistry, WeightMonoid, monoid_by_name
from .oracle import NeighborInput, OracleComponent, SpecFormatError


class DivergenceError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state at step {step}")
        self.step = step


@dataclass
class Network:
    """Immutable-after-parse network; evaluation methods are pure."""

    cells: list[str]
    type_of: dict[str, int]
    n_types: int
    state_dims: dict[int, int]
    registry: MonoidRegistry
    monoid_names: dict[tuple[int, int], str]
    matrix: list[list[Any]]  # matrix[c][d] = weight of edge d -> c, None = no edge
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.index = {cell: i for i, cell in enumerate(self.cells)}

    def monoid_for(self, target_type: int, source_type: int) -> WeightMonoid:
        try:
            return self.registry[(target_type, source_type)]
        except KeyError:
            raise SpecFormatError(
                f"no monoid registered for type pair ({target_type},{source_type})"
            ) from None

    def in_neighborhood(self, cell: str, states: Mapping[str, float]) -> tuple[NeighborInput, ...]:
        """All in-edges of ``cell`` with nonzero weight, paired with the
        source states.  Zero weights are omitted; that cannot change any
        admissible evaluation."""
        if cell not in self.index:
            raise KeyError(f"unknown cell {cell!r}")
        c = self.index[cell]
        target_type = self.type_of[cell]
        out = []
        for d, source in enumerate(self.cells):
            w = self.matrix[c][d]
            if w is None:
                continue
            source_type = self.type_of[source]
            if self.monoid_for(target_type, source_type).is_zero(w):
                continue
            out.append(NeighborInput(source_type, w, states[source]))
        return tuple(out)


def _validate_weight(monoid: WeightMonoid, raw: Any) -> Any:
    if monoid.name in ("additive_real", "additive_positive"):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise SpecFormatError(f"monoid {monoid.name} expects a number, got {raw!r}")
        return float(raw)
    if monoid.name == "free_parallel":
        if not isinstance(raw, (list, tuple)) or not all(isinstance(s, str) for s in raw):
            raise SpecFormatError(f"monoid free_parallel expects a list of labels, got {raw!r}")
        return tuple(sorted(raw))
    if monoid.name == "bool_or":
        if not isinstance(raw, bool):
            raise SpecFormatError(f"monoid bool_or expects a boolean, got {raw!r}")
        return raw
    return raw


def _weight_jsonable(w: Any) -> Any:
    return list(w) if isinstance(w, tuple) else w


def parse_network(doc: dict) -> Network:
    """Build a validated network from its JSON document.

    Edges may come as an ``edges`` list (absent edge = monoid zero) or as an
    explicit ``matrix`` of rows (null = no edge); explicit zero weights are
    canonicalized to "no edge".  Parallel edges in the edge list are
    combined with the pair's monoid operation.
    """
    if not isinstance(doc, dict):
        raise SpecFormatError("network spec must be a JSON object")
    try:
        type_entries = doc["types"]
        cell_entries = doc["cells"]
    except KeyError as missing:
        raise SpecFormatError(f"network spec is missing {missing}") from None

    state_dims: dict[int, int] = {}
    for t in type_entries:
        idx = int(t["id"])
        if idx < 1:
            raise SpecFormatError(f"type ids are 1-based, got {idx}")
        state_dims[idx] = int(t.get("state_dim", 1))
    n_types = max(state_dims) if state_dims else 0
    if set(state_dims) != set(range(1, n_types + 1)):
        raise SpecFormatError(f"type ids must cover 1..{n_types}, got {sorted(state_dims)}")

    cells: list[str] = []
    type_of: dict[str, int] = {}
    for entry in cell_entries:
        cid = str(entry["id"])
        if cid in type_of:
            raise SpecFormatError(f"duplicate cell id {cid!r}")
        t = int(entry["type"])
        if t not in state_dims:
            raise SpecFormatError(f"cell {cid!r} has unknown type {t}")
        cells.append(cid)
        type_of[cid] = t

    registry: MonoidRegistry = {}
    monoid_names: dict[tuple[int, int], str] = {}
    for key, name in dict(doc.get("monoids", {})).items():
        try:
            i_s, j_s = str(key).split(",")
            pair = (int(i_s), int(j_s))
        except ValueError:
            raise SpecFormatError(f"monoid key {key!r} is not 'target,source'") from None
        if pair[0] not in state_dims or pair[1] not in state_dims:
            raise SpecFormatError(f"monoid key {key!r} names an unknown type")
        registry[pair] = monoid_by_name(str(name))
        monoid_names[pair] = str(name)

    n = len(cells)
    index = {cid: i for i, cid in enumerate(cells)}
    matrix: list[list[Any]] = [[None] * n for _ in range(n)]

    if "matrix" in doc:
        rows = doc["matrix"]
        if len(rows) != n or any(len(row) != n for row in rows):
            raise SpecFormatError(
                f"non-square matrix: expected {n}x{n}, got "
                f"{len(rows)}x{max((len(r) for r in rows), default=0)}"
            )
        for c in range(n):
            for d in range(n):
                raw = rows[c][d]
                if raw is None:
                    continue
                pair = (type_of[cells[c]], type_of[cells[d]])
                if pair not in registry:
                    raise SpecFormatError(f"no monoid declared for type pair {pair}")
                w = _validate_weight(registry[pair], raw)
                matrix[c][d] = None if registry[pair].is_zero(w) else w

    for edge in doc.get("edges", []):
        try:
            to, frm = str(edge["to"]), str(edge["from"])
            raw = edge["weight"]
        except KeyError as missing:
            raise SpecFormatError(f"edge {edge!r} is missing {missing}") from None
        if to not in index or frm not in index:
            raise SpecFormatError(f"edge references unknown cell: {edge!r}")
        pair = (type_of[to], type_of[frm])
        if pair not in registry:
            raise SpecFormatError(f"no monoid declared for type pair {pair}")
        monoid = registry[pair]
        w = _validate_weight(monoid, raw)
        c, d = index[to], index[frm]
        if matrix[c][d] is not None:
            w = monoid.combine(matrix[c][d], w)
        matrix[c][d] = None if monoid.is_zero(w) else w

    return Network(
        cells=cells,
        type_of=type_of,
        n_types=n_types,
        state_dims=state_dims,
        registry=registry,
        monoid_names=monoid_names,
        matrix=matrix,
    )


def network_to_json(net: Network) -> dict:
    """Canonical JSON form (edges list, sorted); parse/serialize round-trips
    losslessly."""
    edges = []
    for c, to in enumerate(net.cells):
        for d, frm in enumerate(net.cells):
            w = net.matrix[c][d]
            if w is not None:
                edges.append({"to": to, "from": frm, "weight": _weight_jsonable(w)})
    edges.sort(key=lambda e: (e["to"], e["from"]))
    return {
        "types": [{"id": t, "state_dim": net.state_dims[t]} for t in sorted(net.state_dims)],
        "monoids": {f"{i},{j}": net.monoid_names[(i, j)] for i, j in sorted(net.monoid_names)},
        "cells": [{"id": c, "type": net.type_of[c]} for c in net.cells],
        "edges": edges,
    }


def evaluate_vector_field(
    net: Network,
    oracles: Mapping[int, OracleComponent],
    states: Mapping[str, float],
) -> dict[str, float]:
    """Evaluate the per-type components cell by cell on the in-neighborhoods."""
    missing = sorted(set(net.type_of.values()) - set(oracles))
    if missing:
        raise ValueError(f"no component supplied for cell types {missing}")
    out: dict[str, float] = {}
    for cell in net.cells:
        oracle = oracles[net.type_of[cell]]
        out[cell] = oracle.evaluate(states[cell], net.in_neighborhood(cell, states))
    return out


def integrate_rk4(
    net: Network,
    oracles: Mapping[int, OracleComponent],
    x0: Mapping[str, float],
    dt: float,
    steps: int,
) -> list[dict[str, float]]:
    """Classical fixed-step RK4 on x' = evaluate_vector_field(net, ., x).

    Returns steps+1 state snapshots including the initial one; raises
    :class:`DivergenceError` with the step index if any state goes
    non-finite.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    state = {c: float(x0[c]) for c in net.cells}
    trajectory = [dict(state)]
    for step in range(1, steps + 1):
        try:
            k1 = evaluate_vector_field(net, oracles, state)
            mid1 = {c: state[c] + 0.5 * dt * k1[c] for c in net.cells}
            k2 = evaluate_vector_field(net, oracles, mid1)
            mid2 = {c: state[c] + 0.5 * dt * k2[c] for c in net.cells}
            k3 = evaluate_vector_field(net, oracles, mid2)
            end = {c: state[c] + dt * k3[c] for c in net.cells}
            k4 = evaluate_vector_field(net, oracles, end)
        except OverflowError:
            raise DivergenceError(step) from None
        state = {
            c: state[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
            for c in net.cells
        }
        if not all(math.isfinite(v) for v in state.values()):
            raise DivergenceError(step)
        trajectory.append(dict(state))
    return trajectory
