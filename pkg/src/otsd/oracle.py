"""Brute-force references used by the test suite.

Deliberately independent of the production paths: reachability is a plain
queue-based search over its own adjacency structure, rebalancing is redone
from raw sums, and feasibility is composed per configuration from scratch.
The only shared primitive is the basic DC power flow solve.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from itertools import combinations

from .dc_engine import dc_power_flow
from .errors import TooLarge
from .grid import ContingencySet, Grid, SwitchConfig

ENUMERATION_GUARD = 100_000


def bfs_energized(grid: Grid, closed_branches, root: int) -> frozenset[int]:
    """Bus ids reachable from ``root`` through the closed branches."""
    neighbors: dict[int, list[int]] = {b.id: [] for b in grid.buses}
    closed = set(closed_branches)
    for e in grid.branches:
        if e.id in closed:
            neighbors[e.origin].append(e.destination)
            neighbors[e.destination].append(e.origin)
    seen = {root}
    queue = deque([root])
    while queue:
        i = queue.popleft()
        for j in neighbors[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return frozenset(seen)


@dataclass(frozen=True)
class ExhaustiveResult:
    best_configs: tuple[SwitchConfig, ...]
    objective: float | None
    feasible: bool
    enumerated: int


def _config_objective(grid: Grid, contingencies: ContingencySet,
                      open_set: frozenset[int], tolerance: float) -> float | None:
    """Objective of one configuration, or None when any thermal check fails."""
    all_ids = set(grid.branch_ids())
    closed = frozenset(all_ids - open_set)

    energized = bfs_energized(grid, closed, grid.reference_bus)
    if len(energized) != grid.n_buses:
        return None  # base case must stay connected

    inj = {b.id: b.pg_ref - b.pd_ref for b in grid.buses}
    base = dc_power_flow(grid, closed, inj)
    for e in grid.branches:
        if not e.unlimited and abs(base.flows[e.id]) > e.thermal_limit + tolerance:
            return None

    objective = 0.0
    for c in contingencies:
        closed_c = closed - c.tripped
        on = bfs_energized(grid, closed_c, grid.reference_bus)
        load_on = sum(b.pd_ref for b in grid.buses if b.id in on)
        gen_on = sum(b.pg_ref for b in grid.buses if b.id in on)
        total_load = sum(b.pd_ref for b in grid.buses)
        if gen_on <= 0.0 and load_on > 0.0:
            # nothing can be served anywhere; no flows, no violations
            objective += c.probability * total_load
            continue
        sigma = load_on / gen_on if gen_on > 0 else 0.0
        loss = total_load - load_on
        inj_c = {b.id: (sigma * b.pg_ref - b.pd_ref if b.id in on else 0.0)
                 for b in grid.buses}
        state = dc_power_flow(grid, closed_c, inj_c)
        for e in grid.branches:
            if not e.unlimited and abs(state.flows[e.id]) > e.thermal_limit + tolerance:
                return None
        objective += c.probability * loss
    return objective


def exhaustive_otsd(grid: Grid, contingencies: ContingencySet, max_openings: int,
                    tolerance: float = 1e-6) -> ExhaustiveResult:
    """Enumerate every opening subset within the budget and keep the best.

    Guarded to at most 100k configurations; raise the budget consciously,
    not accidentally.
    """
    m = grid.n_branches
    count = sum(math.comb(m, k) for k in range(max_openings + 1))
    if count > ENUMERATION_GUARD:
        raise TooLarge(f"{count} configurations exceed the {ENUMERATION_GUARD} guard")

    ids = grid.branch_ids()
    best: list[SwitchConfig] = []
    best_obj: float | None = None
    enumerated = 0
    for k in range(max_openings + 1):
        for combo in combinations(ids, k):
            enumerated += 1
            open_set = frozenset(combo)
            obj = _config_objective(grid, contingencies, open_set, tolerance)
            if obj is None:
                continue
            if best_obj is None or obj < best_obj - 1e-12:
                best_obj = obj
                best = [SwitchConfig(open_set)]
            elif abs(obj - best_obj) <= 1e-12:
                best.append(SwitchConfig(open_set))
    return ExhaustiveResult(best_configs=tuple(best), objective=best_obj,
                            feasible=best_obj is not None, enumerated=enumerated)
