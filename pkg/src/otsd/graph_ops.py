"""Pure graph algorithms on the branch/bus structure.

Everything here speaks external bus/branch ids and takes the set of closed
(or open) branches explicitly, so callers can evaluate arbitrary switching
states without touching the Grid object.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid import Grid


@dataclass(frozen=True)
class EnergizedSet:
    """Partition of the buses into the reference component and the rest."""

    energized: frozenset[int]
    de_energized: frozenset[int]

    @property
    def has_blackout(self) -> bool:
        return bool(self.de_energized)


@dataclass(frozen=True)
class Cutset:
    """Branches whose removal separates ``separated_bus`` from the reference."""

    branches: frozenset[int]
    separated_bus: int


def _adjacency(grid: Grid, closed_branches) -> list[list[tuple[int, int]]]:
    """Bus index -> [(neighbor bus index, branch id)] over closed branches."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(grid.n_buses)]
    for e in closed_branches:
        k = grid.branch_index(e)
        o, d = int(grid.origin_idx[k]), int(grid.dest_idx[k])
        adj[o].append((d, e))
        adj[d].append((o, e))
    return adj


def energized_component(grid: Grid, closed_branches) -> EnergizedSet:
    """Component of the reference bus in the subgraph of closed branches."""
    adj = _adjacency(grid, closed_branches)
    seen = {grid.ref_idx}
    stack = [grid.ref_idx]
    while stack:
        i = stack.pop()
        for j, _ in adj[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    ids = grid.bus_ids()
    energized = frozenset(ids[i] for i in seen)
    return EnergizedSet(
        energized=energized,
        de_energized=frozenset(ids) - energized,
    )


def find_bridges(grid: Grid, closed_branches) -> frozenset[int]:
    """Closed branches whose single removal disconnects previously-connected buses.

    Linear-time lowlink traversal; parallel circuits are handled by tracking
    the branch id used to enter a vertex, so a double circuit is never a
    bridge. Disconnected closed subgraphs are processed per component.
    """
    adj = _adjacency(grid, closed_branches)
    n = grid.n_buses
    disc = [-1] * n
    low = [0] * n
    bridges: set[int] = set()
    counter = 0

    for root in range(n):
        if disc[root] != -1 or not adj[root]:
            continue
        # stack entries: (vertex, entering branch id, iterator position)
        stack = [(root, -1, 0)]
        disc[root] = low[root] = counter
        counter += 1
        while stack:
            v, in_edge, ptr = stack[-1]
            if ptr < len(adj[v]):
                stack[-1] = (v, in_edge, ptr + 1)
                w, eid = adj[v][ptr]
                if eid == in_edge:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, eid, 0))
                else:
                    low[v] = min(low[v], disc[w])
            else:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        bridges.add(in_edge)
    return frozenset(bridges)


def separating_cutset(grid: Grid, open_branches, bus: int) -> Cutset | None:
    """Frontier cutset separating ``bus`` from the reference, if any.

    Returns the set of branches with exactly one endpoint in the closed-graph
    component of ``bus``; all of them are open, so the cutset is a minimal
    certificate of the disconnection. None when the bus reaches the reference.
    """
    open_set = frozenset(open_branches)
    closed = [e for e in grid.branch_ids() if e not in open_set]
    adj = _adjacency(grid, closed)
    start = grid.bus_index(bus)
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        if i == grid.ref_idx:
            return None
        for j, _ in adj[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)

    frontier = set()
    for e in grid.branches:
        k = grid.branch_index(e.id)
        o_in = int(grid.origin_idx[k]) in seen
        d_in = int(grid.dest_idx[k]) in seen
        if o_in != d_in:
            frontier.add(e.id)
    return Cutset(branches=frozenset(frontier), separated_bus=bus)


def hop(grid: Grid, branch: int, l: int) -> frozenset[int]:
    """Branches within line-graph distance ``l`` of ``branch``.

    Two branches are adjacent when they share a bus; hop(e, 0) = {e} and the
    result grows monotonically with ``l``.
    """
    if l < 0:
        raise ValueError("hop distance must be non-negative")
    incident_ids: list[list[int]] = [
        [grid.branches[k].id for k in ks] for ks in grid.incident
    ]
    reached = {branch}
    frontier = [branch]
    for _ in range(l):
        nxt = []
        for e in frontier:
            k = grid.branch_index(e)
            for i in (int(grid.origin_idx[k]), int(grid.dest_idx[k])):
                for other in incident_ids[i]:
                    if other not in reached:
                        reached.add(other)
                        nxt.append(other)
        if not nxt:
            break
        frontier = nxt
    return frozenset(reached)


def line_graph_diameter(grid: Grid) -> int:
    """Eccentricity bound used to decide when hop saturation proves infeasibility."""
    ids = grid.branch_ids()
    best = 0
    for e in ids:
        dist = {e: 0}
        frontier = [e]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for cur in frontier:
                k = grid.branch_index(cur)
                for i in (int(grid.origin_idx[k]), int(grid.dest_idx[k])):
                    for other in grid.incident[i]:
                        oid = grid.branches[other].id
                        if oid not in dist:
                            dist[oid] = d
                            nxt.append(oid)
            frontier = nxt
        best = max(best, max(dist.values()))
    return best
