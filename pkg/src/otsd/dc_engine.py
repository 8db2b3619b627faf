"""Linear-algebra security analysis: DC power flow, PTDF, rebalancing,
violation detection, and the probability-weighted loss-of-load objective.

Per-contingency evaluation follows the fast scheme: bridges of the closed
graph mark the trips that change the energized topology and require a
component re-solve with proportional rebalancing; every other single-branch
trip is an outage-distribution update of the base factorization.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import graph_ops
from .errors import DisconnectedCase, SingularSystem, UnbalanceableIsland
from .grid import Contingency, ContingencySet, Grid, SwitchConfig
from .graph_ops import EnergizedSet

DEFAULT_TOLERANCE = 1e-6

# key used for the base (no-contingency) pseudo-case in reports
BASE_CASE = None


@dataclass(frozen=True)
class FlowState:
    angles: dict[int, float]  # bus id -> radians; de-energized buses omitted
    flows: dict[int, float]  # branch id -> p.u.; zero on open branches


@dataclass(frozen=True)
class RebalanceResult:
    sigma: float
    pg: dict[int, float]
    pd: dict[int, float]
    loss_of_load: float


@dataclass(frozen=True)
class ViolationDetail:
    violated_branches: dict[int, float]  # branch id -> overload beyond limit, p.u.
    loss_of_load: float
    de_energized: frozenset[int]


@dataclass
class SecurityReport:
    violating_contingencies: dict[int | None, ViolationDetail]
    total_objective: float
    loss_of_load: dict[int, float] = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return not self.violating_contingencies

    def violating_ids(self) -> list[int | None]:
        return list(self.violating_contingencies)


def _injection_vector(grid: Grid, injections) -> np.ndarray:
    if isinstance(injections, dict):
        p = np.zeros(grid.n_buses)
        for bus, val in injections.items():
            p[grid.bus_index(bus)] = val
        return p
    p = np.asarray(injections, dtype=float)
    if p.shape != (grid.n_buses,):
        raise ValueError(f"injection vector must have shape ({grid.n_buses},)")
    return p


class _Factorization:
    """Cholesky factors of the reduced susceptance matrix of one closed topology.

    Disconnected topologies are supported by pinning one angle per component
    (the reference bus in its own component); the PTDF view requires a
    connected topology and is only built for base configurations.
    """

    def __init__(self, grid: Grid, closed: frozenset[int]):
        self.closed = closed
        self.closed_list = sorted(closed, key=grid.branch_index)
        self.k_idx = np.array([grid.branch_index(e) for e in self.closed_list], dtype=int)
        self.o_idx = grid.origin_idx[self.k_idx]
        self.d_idx = grid.dest_idx[self.k_idx]
        self.b = grid.susceptance[self.k_idx]
        n = grid.n_buses

        lap = np.zeros((n, n))
        np.add.at(lap, (self.o_idx, self.o_idx), self.b)
        np.add.at(lap, (self.d_idx, self.d_idx), self.b)
        np.add.at(lap, (self.o_idx, self.d_idx), -self.b)
        np.add.at(lap, (self.d_idx, self.o_idx), -self.b)

        comps = _components(grid, closed)
        self.connected = len(comps) == 1
        pinned = set()
        for comp in comps:
            pinned.add(grid.ref_idx if grid.ref_idx in comp else min(comp))
        self.keep = np.array([i for i in range(n) if i not in pinned], dtype=int)
        self.ref = grid.ref_idx
        try:
            if len(self.keep):
                self.chol = scipy.linalg.cho_factor(lap[np.ix_(self.keep, self.keep)])
            else:
                self.chol = None
        except scipy.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from None
        self.n = n
        self.m = grid.n_branches
        self._ptdf = None
        self._outage_m = None

    def angles(self, p: np.ndarray) -> np.ndarray:
        """Bus angles with one pinned angle per component (theta = -L^-1 p)."""
        theta = np.zeros(self.n)
        if self.chol is not None:
            theta[self.keep] = scipy.linalg.cho_solve(self.chol, -p[self.keep])
        return theta

    def flows(self, p: np.ndarray) -> np.ndarray:
        """Flows on all grid branches (zero where open)."""
        theta = self.angles(p)
        f = np.zeros(self.m)
        f[self.k_idx] = self.b * (theta[self.d_idx] - theta[self.o_idx])
        return f

    def ptdf(self) -> np.ndarray:
        """Dense branch x bus sensitivity matrix, reference column zero."""
        if not self.connected:
            raise SingularSystem("PTDF requires a connected closed subgraph")
        if self._ptdf is None:
            nred = len(self.keep)
            rhs = np.zeros((nred, len(self.k_idx)))
            pos = {int(i): j for j, i in enumerate(self.keep)}
            for col, (o, d, b) in enumerate(zip(self.o_idx, self.d_idx, self.b)):
                if int(o) in pos:
                    rhs[pos[int(o)], col] += b
                if int(d) in pos:
                    rhs[pos[int(d)], col] -= b
            x = scipy.linalg.cho_solve(self.chol, rhs)  # nred x m_closed
            ptdf = np.zeros((self.m, self.n))
            ptdf[np.ix_(self.k_idx, self.keep)] = x.T
            self._ptdf = ptdf
        return self._ptdf

    def outage_matrix(self) -> np.ndarray:
        """M[l, t] = flow induced on l by a unit o(t)->d(t) injection pair."""
        if self._outage_m is None:
            ptdf = self.ptdf()
            self._outage_m = ptdf[:, self.o_idx] - ptdf[:, self.d_idx]
        return self._outage_m


class _FactorizationCache:
    """LRU cache of topology factorizations; safe under the usual single-writer use."""

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self._store: OrderedDict[frozenset, _Factorization] = OrderedDict()

    def get(self, grid: Grid, closed: frozenset[int]) -> _Factorization:
        fact = self._store.get(closed)
        if fact is None:
            fact = _Factorization(grid, closed)
            self._store[closed] = fact
            while len(self._store) > self.maxsize:
                self._store.popitem(last=False)
        else:
            self._store.move_to_end(closed)
        return fact


def _components(grid: Grid, closed) -> list[set[int]]:
    adj = graph_ops._adjacency(grid, closed)
    seen = [False] * grid.n_buses
    comps = []
    for start in range(grid.n_buses):
        if seen[start]:
            continue
        comp = {start}
        seen[start] = True
        stack = [start]
        while stack:
            i = stack.pop()
            for j, _ in adj[i]:
                if not seen[j]:
                    seen[j] = True
                    comp.add(j)
                    stack.append(j)
        comps.append(comp)
    return comps


def dc_power_flow(grid: Grid, closed_branches, injections) -> FlowState:
    """Solve the DC power flow on the subgraph of closed branches.

    Each connected component is solved independently with one pinned angle
    (the reference bus in its own component). Injections must balance within
    every component.
    """
    p = _injection_vector(grid, injections)
    closed = frozenset(closed_branches)
    theta = np.zeros(grid.n_buses)
    for comp in _components(grid, closed):
        idx = np.array(sorted(comp), dtype=int)
        total = float(p[idx].sum())
        if abs(total) > 1e-9 * max(1.0, float(np.abs(p).sum())):
            raise ValueError(f"injections unbalanced by {total:.3e} in component {sorted(comp)}")
        if len(idx) == 1:
            continue
        pin = grid.ref_idx if grid.ref_idx in comp else int(idx[0])
        keep = np.array([i for i in idx if i != pin], dtype=int)
        ks = [grid.branch_index(e) for e in closed
              if int(grid.origin_idx[grid.branch_index(e)]) in comp]
        ks = np.array(sorted(set(ks)), dtype=int)
        o, d, b = grid.origin_idx[ks], grid.dest_idx[ks], grid.susceptance[ks]
        lap = np.zeros((grid.n_buses, grid.n_buses))
        np.add.at(lap, (o, o), b)
        np.add.at(lap, (d, d), b)
        np.add.at(lap, (o, d), -b)
        np.add.at(lap, (d, o), -b)
        try:
            theta[keep] = scipy.linalg.solve(
                lap[np.ix_(keep, keep)], -p[keep], assume_a="pos")
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise SingularSystem(str(exc)) from None

    flows = {}
    for e in grid.branches:
        if e.id in closed:
            k = grid.branch_index(e.id)
            flows[e.id] = float(grid.susceptance[k]
                                * (theta[grid.dest_idx[k]] - theta[grid.origin_idx[k]]))
        else:
            flows[e.id] = 0.0
    angles = {b.id: float(theta[grid.bus_index(b.id)]) for b in grid.buses}
    return FlowState(angles=angles, flows=flows)


def ptdf_matrix(grid: Grid, closed_branches) -> np.ndarray:
    """PTDF of the closed subgraph; requires that subgraph to be connected."""
    closed = frozenset(closed_branches)
    ens = graph_ops.energized_component(grid, closed)
    if ens.de_energized:
        raise DisconnectedCase("closed subgraph is not connected")
    return _Factorization(grid, closed).ptdf()


def rebalance(grid: Grid, energized: EnergizedSet) -> RebalanceResult:
    """Proportional generation rescale balancing the energized area."""
    on = energized.energized
    if grid.reference_bus not in on:
        raise ValueError("energized set must contain the reference bus")
    idx = np.array([grid.bus_index(i) for i in sorted(on)], dtype=int)
    load_on = float(grid.pd[idx].sum())
    gen_on = float(grid.pg[idx].sum())
    if gen_on <= 0.0:
        if load_on > 0.0:
            raise UnbalanceableIsland(load_on, buses=on)
        sigma = 0.0
    else:
        sigma = load_on / gen_on
    pg = {b.id: (sigma * b.pg_ref if b.id in on else 0.0) for b in grid.buses}
    pd = {b.id: (b.pd_ref if b.id in on else 0.0) for b in grid.buses}
    ll = float(grid.pd.sum()) - load_on
    if abs(ll) < 1e-12:  # subtraction dust when only zero-load buses are lost
        ll = 0.0
    return RebalanceResult(sigma=sigma, pg=pg, pd=pd, loss_of_load=ll)


@dataclass(frozen=True)
class ContingencyState:
    """Post-contingency operating point used by the analyzer and oracles."""

    sigma: float
    loss_of_load: float
    flows: np.ndarray  # by branch index, zero on open/tripped branches
    de_energized: frozenset[int]
    unbalanceable: bool = False


class SecurityAnalyzer:
    """Reusable N-1 screening engine for one grid and contingency set.

    Holds the per-topology factorization cache, so repeated analyses across
    heuristic iterations only pay for genuinely new topologies.
    """

    def __init__(self, grid: Grid, contingencies: ContingencySet,
                 tolerance: float = DEFAULT_TOLERANCE):
        self.grid = grid
        self.contingencies = contingencies
        self.tolerance = tolerance
        self.cache = _FactorizationCache()
        self._all = frozenset(grid.branch_ids())

    def base_injections(self) -> np.ndarray:
        return self.grid.pg - self.grid.pd

    def contingency_state(self, config: SwitchConfig, contingency: Contingency | None,
                          base_fact: _Factorization | None = None,
                          base_flows: np.ndarray | None = None,
                          bridges: frozenset[int] | None = None) -> ContingencyState:
        """Operating point after a contingency, with the fast LODF path when valid."""
        grid = self.grid
        closed0 = self._all - config.open_branches
        if base_fact is None:
            base_fact = self.cache.get(grid, closed0)
        if base_flows is None:
            base_flows = base_fact.flows(self.base_injections())

        if contingency is None:
            return ContingencyState(sigma=1.0, loss_of_load=0.0,
                                    flows=base_flows, de_energized=frozenset())

        live_trips = contingency.tripped & closed0
        if not live_trips:
            # tripping already-open branches changes nothing
            return ContingencyState(sigma=1.0, loss_of_load=0.0,
                                    flows=base_flows, de_energized=frozenset())

        if bridges is None:
            bridges = graph_ops.find_bridges(grid, closed0)

        if len(live_trips) == 1 and not (live_trips & bridges):
            t = next(iter(live_trips))
            pos = base_fact.closed_list.index(t)
            m_col = base_fact.outage_matrix()[:, pos]
            denom = 1.0 - base_fact.outage_matrix()[base_fact.k_idx[pos], pos]
            flows = base_flows + m_col * (base_flows[base_fact.k_idx[pos]] / denom)
            flows = flows.copy()
            flows[base_fact.k_idx[pos]] = 0.0
            return ContingencyState(sigma=1.0, loss_of_load=0.0,
                                    flows=flows, de_energized=frozenset())

        closed_c = closed0 - contingency.tripped
        ens = graph_ops.energized_component(grid, closed_c)
        try:
            reb = rebalance(grid, ens)
        except UnbalanceableIsland:
            # main component cannot be balanced: the whole load is lost
            return ContingencyState(sigma=0.0, loss_of_load=float(grid.pd.sum()),
                                    flows=np.zeros(grid.n_branches),
                                    de_energized=ens.de_energized, unbalanceable=True)
        p = np.zeros(grid.n_buses)
        for b in grid.buses:
            i = grid.bus_index(b.id)
            p[i] = reb.pg[b.id] - reb.pd[b.id]
        fact = self.cache.get(grid, closed_c)
        flows = fact.flows(p)
        return ContingencyState(sigma=reb.sigma, loss_of_load=reb.loss_of_load,
                                flows=flows, de_energized=ens.de_energized)

    def analyze(self, config: SwitchConfig) -> SecurityReport:
        grid = self.grid
        closed0 = self._all - config.open_branches
        ens0 = graph_ops.energized_component(grid, closed0)
        if ens0.de_energized:
            raise DisconnectedCase(
                f"base configuration disconnects buses {sorted(ens0.de_energized)}")

        fact = self.cache.get(grid, closed0)
        base_flows = fact.flows(self.base_injections())
        bridges = graph_ops.find_bridges(grid, closed0)
        limit = grid.limit

        violating: dict[int | None, ViolationDetail] = {}
        loss: dict[int, float] = {}

        def overloads(flows: np.ndarray) -> dict[int, float]:
            over = np.abs(flows) - limit
            hits = np.nonzero(over > self.tolerance)[0]
            return {grid.branches[k].id: float(over[k]) for k in hits}

        if self.contingencies.include_base_case:
            base_over = overloads(base_flows)
            if base_over:
                violating[BASE_CASE] = ViolationDetail(
                    violated_branches=base_over, loss_of_load=0.0,
                    de_energized=frozenset())

        # vectorized screen of all single-branch non-bridge trips
        singles = [c for c in self.contingencies
                   if len(c.tripped) == 1 and next(iter(c.tripped)) in closed0
                   and not (c.tripped & bridges)]
        if singles:
            m_mat = fact.outage_matrix()
            positions = {e: j for j, e in enumerate(fact.closed_list)}
            cols = np.array([positions[next(iter(c.tripped))] for c in singles], dtype=int)
            rows = fact.k_idx[cols]
            denom = 1.0 - m_mat[rows, cols]
            gain = base_flows[rows] / denom
            post = base_flows[:, None] + m_mat[:, cols] * gain[None, :]
            post[rows, np.arange(len(cols))] = 0.0
            over_all = np.abs(post) - limit[:, None]
            for j, c in enumerate(singles):
                hits = np.nonzero(over_all[:, j] > self.tolerance)[0]
                if hits.size:
                    violating[c.id] = ViolationDetail(
                        violated_branches={grid.branches[k].id: float(over_all[k, j])
                                           for k in hits},
                        loss_of_load=0.0, de_energized=frozenset())
            handled = {c.id for c in singles}
        else:
            handled = set()

        objective = 0.0
        for c in self.contingencies:
            if c.id in handled:
                continue
            state = self.contingency_state(config, c, base_fact=fact,
                                           base_flows=base_flows, bridges=bridges)
            if state.loss_of_load > 1e-12:
                loss[c.id] = state.loss_of_load
                objective += c.probability * state.loss_of_load
            over = overloads(state.flows)
            if over:
                violating[c.id] = ViolationDetail(
                    violated_branches=over, loss_of_load=state.loss_of_load,
                    de_energized=state.de_energized)

        return SecurityReport(violating_contingencies=violating,
                              total_objective=objective, loss_of_load=loss)


def security_analysis(grid: Grid, config: SwitchConfig, contingencies: ContingencySet,
                      tolerance: float = DEFAULT_TOLERANCE) -> SecurityReport:
    """One-shot security analysis; build a SecurityAnalyzer to amortize caching."""
    return SecurityAnalyzer(grid, contingencies, tolerance).analyze(config)


def structural_risk(grid: Grid, contingencies: ContingencySet) -> float:
    """Probability-weighted loss of load with everything closed and limits ignored.

    Only trips that split the all-closed graph contribute, so this is a lower
    bound on the objective of any feasible configuration.
    """
    all_closed = frozenset(grid.branch_ids())
    bridges = graph_ops.find_bridges(grid, all_closed)
    total = 0.0
    for c in contingencies:
        if len(c.tripped) == 1 and not (c.tripped & bridges):
            continue
        closed_c = all_closed - c.tripped
        ens = graph_ops.energized_component(grid, closed_c)
        if not ens.de_energized:
            continue
        try:
            reb = rebalance(grid, ens)
            ll = reb.loss_of_load
        except UnbalanceableIsland:
            ll = float(grid.pd.sum())
        total += c.probability * ll
    return total
