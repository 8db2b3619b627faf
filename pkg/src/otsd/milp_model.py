"""MILP programs over the backend contract: the extensive switching problem,
the fixed-configuration security program, violation reduction with overload
slacks, and opening minimization. All on/off products use the standard
binary-times-bounded-continuous reformulation; the energization indicators
stay continuous and disconnection cutsets are separated lazily.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import graph_ops
from .backend import ScipyHighsBackend, Status, default_backend_factory
from .errors import DuplicateContingency
from .grid import Contingency, ContingencySet, Grid, SwitchConfig
from .results import SolveResult, SolveStatus

# thermal handling for a constraint block
ENFORCE = "enforce"
RELAX = "relax"
OMIT = "omit"

BASE_CASE = None  # pseudo-case id for the no-contingency state

SEPARATION_TOL = 1e-6


@dataclass(frozen=True)
class BigMConfig:
    """Bounds used by the linearizations.

    ``delta_theta_max`` bounds the angle spread across any single branch,
    open or closed, through the on/off reformulation rows;
    ``virtual_flow_bound`` defaults to the bus count; ``sigma_max`` defaults
    to total load over the smallest positive per-bus generation, capped at
    ``sigma_cap``.
    """

    delta_theta_max: float = 2.0 * math.pi
    virtual_flow_bound: float | None = None
    sigma_max: float | None = None
    sigma_cap: float = 10.0

    def __post_init__(self):
        if not self.delta_theta_max > 0:
            raise ValueError("delta_theta_max must be positive")
        if self.sigma_max is not None and self.sigma_max < 1.0:
            raise ValueError("sigma_max must be at least 1")

    def virtual_bound(self, grid: Grid) -> float:
        return float(self.virtual_flow_bound if self.virtual_flow_bound is not None
                     else grid.n_buses)

    def sigma_bound(self, grid: Grid) -> float:
        if self.sigma_max is not None:
            return self.sigma_max
        positive = [g for g in grid.pg if g > 0]
        if not positive:
            return 1.0
        raw = grid.total_load / min(positive)
        return float(max(1.0, min(raw, self.sigma_cap)))


def security_program_bounds(grid: Grid) -> BigMConfig:
    """Bounds that provably contain every rebalanced operating state.

    Rescaled total generation equals served load, and no branch of a DC
    network carries more than the total sourced power, so the angle offset of
    any bus from the reference is at most total load times the sum of all
    reactances (a loose but safe path bound; angles accumulate along radial
    chains). The rescale factor never exceeds total load over the smallest
    single positive generation. Used by the fixed-configuration security
    program, where a clipped bound would silently falsify the oracle; the
    wide values are harmless there because the switching state is fixed.
    """
    x_total = float((1.0 / grid.susceptance).sum())
    theta_span = max(2.0 * math.pi, 2.0 * grid.total_load * x_total)
    positive = [g for g in grid.pg if g > 0]
    sigma = max(1.0, grid.total_load / min(positive)) * 1.01 if positive else 1.0
    return BigMConfig(delta_theta_max=theta_span, sigma_max=sigma)


class OtsdModel:
    """One backend model holding the base-case block and appended contingency blocks.

    Variable registries map each model symbol to its (bus or branch) x case
    index; contingency blocks are append-only and cutset constraints are
    deduplicated through a registry.
    """

    def __init__(self, grid: Grid, bigm: BigMConfig, backend: ScipyHighsBackend,
                 base_thermal: str = ENFORCE):
        self.grid = grid
        self.bigm = bigm
        self.backend = backend
        # delta_theta_max bounds the spread across one branch (the on/off
        # reformulation enforces it, open branches included); bus angles
        # themselves only get a sanity box wide enough to never bind, since
        # offsets accumulate along radial paths
        self.theta_bound = grid.n_buses * bigm.delta_theta_max
        self.sigma_max = bigm.sigma_bound(grid)
        self.virtual_bound = bigm.virtual_bound(grid)

        self.v: dict[int, int] = {}
        self.theta: dict[int | None, dict[int, int]] = {}
        self.flow: dict[int | None, dict[int, int]] = {}
        self.virt: dict[int, int] = {}
        self.pi: dict[int, dict[int, int]] = {}
        self.sigma: dict[int, int] = {}
        self.sig_pi: dict[int, dict[int, int]] = {}
        self.ll: dict[int, int] = {}
        self.ol: dict[int | None, dict[int, int]] = {}
        self.contingencies: dict[int, Contingency] = {}
        self.thermal_mode: dict[int | None, str] = {}
        self._cutset_registry: set[tuple] = set()
        self.cutset_constraints: list[tuple] = []

        self._build_base(base_thermal)

    # -- shared pieces -------------------------------------------------------

    def _flow_bound(self, eid: int, thermal: str) -> float:
        e = self.grid.branch_by_id(eid)
        m_ohm = e.susceptance * self.bigm.delta_theta_max
        if thermal == ENFORCE and not e.unlimited:
            return min(m_ohm, e.thermal_limit)
        return m_ohm

    def _add_ohm(self, case: int | None, eid: int) -> None:
        """Flow equals susceptance times angle difference when closed, else zero."""
        grid, be = self.grid, self.backend
        e = grid.branch_by_id(eid)
        b = e.susceptance
        m = b * self.bigm.delta_theta_max
        tag = "base" if case is BASE_CASE else f"c{case}"
        fvar = self.flow[case][eid]
        tripped = case is not BASE_CASE and eid in self.contingencies[case].tripped
        if tripped:
            be.fix_var(fvar, 0.0)
            return
        vvar = self.v[eid]
        th = self.theta[case]
        o, d = e.origin, e.destination
        be.add_constraint({fvar: 1.0, vvar: -m}, "<=", 0.0, f"ohm_ub_{tag}_{eid}")
        be.add_constraint({fvar: 1.0, vvar: m}, ">=", 0.0, f"ohm_lb_{tag}_{eid}")
        be.add_constraint({th[d]: b, th[o]: -b, fvar: -1.0, vvar: m}, "<=", m,
                          f"ohm_eq_ub_{tag}_{eid}")
        be.add_constraint({th[d]: b, th[o]: -b, fvar: -1.0, vvar: -m}, ">=", -m,
                          f"ohm_eq_lb_{tag}_{eid}")

    def _add_thermal(self, case: int | None, thermal: str) -> None:
        if thermal != RELAX:
            return  # ENFORCE is handled through flow variable bounds
        grid, be = self.grid, self.backend
        tag = "base" if case is BASE_CASE else f"c{case}"
        self.ol[case] = {}
        for e in grid.branches:
            if e.unlimited:
                continue
            if case is not BASE_CASE and e.id in self.contingencies[case].tripped:
                continue
            s = be.add_var(0.0, math.inf, f"ol_{tag}_{e.id}")
            self.ol[case][e.id] = s
            fvar = self.flow[case][e.id]
            be.add_constraint({fvar: 1.0, s: -1.0}, "<=", e.thermal_limit,
                              f"thermal_ub_{tag}_{e.id}")
            be.add_constraint({fvar: 1.0, s: 1.0}, ">=", -e.thermal_limit,
                              f"thermal_lb_{tag}_{e.id}")

    # -- base case -----------------------------------------------------------

    def _build_base(self, thermal: str) -> None:
        grid, be = self.grid, self.backend
        self.thermal_mode[BASE_CASE] = thermal
        for e in grid.branches:
            self.v[e.id] = be.add_binary(f"v[{e.id}]")
        self.theta[BASE_CASE] = {
            b.id: be.add_var(-self.theta_bound, self.theta_bound, f"theta_base[{b.id}]")
            for b in grid.buses}
        be.fix_var(self.theta[BASE_CASE][grid.reference_bus], 0.0)
        self.flow[BASE_CASE] = {
            e.id: be.add_var(-self._flow_bound(e.id, thermal),
                             self._flow_bound(e.id, thermal), f"f_base[{e.id}]")
            for e in grid.branches}
        for e in grid.branches:
            self._add_ohm(BASE_CASE, e.id)

        for b in grid.buses:
            coeffs: dict[int, float] = {}
            i = grid.bus_index(b.id)
            for k in grid.in_branches[i]:
                coeffs[self.flow[BASE_CASE][grid.branches[k].id]] = \
                    coeffs.get(self.flow[BASE_CASE][grid.branches[k].id], 0.0) + 1.0
            for k in grid.out_branches[i]:
                coeffs[self.flow[BASE_CASE][grid.branches[k].id]] = \
                    coeffs.get(self.flow[BASE_CASE][grid.branches[k].id], 0.0) - 1.0
            be.add_constraint(coeffs, "==", b.pd_ref - b.pg_ref, f"kcl_base[{b.id}]")

        self._add_thermal(BASE_CASE, thermal)

        # single-commodity connectivity certificate: the reference sources
        # one unit for every other bus, each bus absorbs one
        big_v = self.virtual_bound
        for e in grid.branches:
            self.virt[e.id] = be.add_var(-big_v, big_v, f"cf[{e.id}]")
            be.add_constraint({self.virt[e.id]: 1.0, self.v[e.id]: -big_v}, "<=", 0.0)
            be.add_constraint({self.virt[e.id]: 1.0, self.v[e.id]: big_v}, ">=", 0.0)
        for b in grid.buses:
            i = grid.bus_index(b.id)
            coeffs = {}
            for k in grid.in_branches[i]:
                vid = self.virt[grid.branches[k].id]
                coeffs[vid] = coeffs.get(vid, 0.0) + 1.0
            for k in grid.out_branches[i]:
                vid = self.virt[grid.branches[k].id]
                coeffs[vid] = coeffs.get(vid, 0.0) - 1.0
            delta = 1.0 - grid.n_buses if b.id == grid.reference_bus else 1.0
            be.add_constraint(coeffs, "==", delta, f"virt_kcl[{b.id}]")

    # -- contingency blocks ----------------------------------------------------

    def add_contingency_block(self, c: Contingency, thermal: str = ENFORCE) -> None:
        if c.id in self.contingencies:
            raise DuplicateContingency(f"contingency {c.id} already instantiated")
        grid, be = self.grid, self.backend
        self.contingencies[c.id] = c
        self.thermal_mode[c.id] = thermal
        cid = c.id

        self.theta[cid] = {
            b.id: be.add_var(-self.theta_bound, self.theta_bound, f"theta_c{cid}[{b.id}]")
            for b in grid.buses}
        be.fix_var(self.theta[cid][grid.reference_bus], 0.0)
        self.flow[cid] = {
            e.id: be.add_var(-self._flow_bound(e.id, thermal),
                             self._flow_bound(e.id, thermal), f"f_c{cid}[{e.id}]")
            for e in grid.branches}
        self.pi[cid] = {b.id: be.add_var(0.0, 1.0, f"pi_c{cid}[{b.id}]")
                        for b in grid.buses}
        be.fix_var(self.pi[cid][grid.reference_bus], 1.0)
        self.sigma[cid] = be.add_var(0.0, self.sigma_max, f"sigma_c{cid}")

        for e in grid.branches:
            self._add_ohm(cid, e.id)

        # energization coupling across closed, non-tripped branches
        for e in grid.branches:
            if e.id in c.tripped:
                continue
            po, pd_ = self.pi[cid][e.origin], self.pi[cid][e.destination]
            be.add_constraint({po: 1.0, pd_: -1.0, self.v[e.id]: 1.0}, "<=", 1.0)
            be.add_constraint({pd_: 1.0, po: -1.0, self.v[e.id]: 1.0}, "<=", 1.0)

        # sigma * pi products for generator buses
        self.sig_pi[cid] = {}
        for b in grid.buses:
            if b.pg_ref <= 0:
                continue
            y = be.add_var(0.0, self.sigma_max, f"sigpi_c{cid}[{b.id}]")
            self.sig_pi[cid][b.id] = y
            pi_i = self.pi[cid][b.id]
            be.add_constraint({y: 1.0, pi_i: -self.sigma_max}, "<=", 0.0)
            be.add_constraint({self.sigma[cid]: 1.0, y: -1.0}, ">=", 0.0)
            be.add_constraint({self.sigma[cid]: 1.0, y: -1.0, pi_i: self.sigma_max},
                              "<=", self.sigma_max)

        # nodal balance with rescaled generation and served demand
        for b in grid.buses:
            i = grid.bus_index(b.id)
            coeffs: dict[int, float] = {}
            for k in grid.in_branches[i]:
                fv = self.flow[cid][grid.branches[k].id]
                coeffs[fv] = coeffs.get(fv, 0.0) + 1.0
            for k in grid.out_branches[i]:
                fv = self.flow[cid][grid.branches[k].id]
                coeffs[fv] = coeffs.get(fv, 0.0) - 1.0
            if b.pg_ref > 0:
                coeffs[self.sig_pi[cid][b.id]] = b.pg_ref
            if b.pd_ref > 0:
                coeffs[self.pi[cid][b.id]] = -b.pd_ref
            be.add_constraint(coeffs, "==", 0.0, f"kcl_c{cid}[{b.id}]")

        self._add_thermal(cid, thermal)

        total_pd = grid.total_load
        self.ll[cid] = be.add_var(0.0, total_pd, f"ll_c{cid}")
        coeffs = {self.ll[cid]: 1.0}
        for b in grid.buses:
            if b.pd_ref > 0:
                coeffs[self.pi[cid][b.id]] = b.pd_ref
        be.add_constraint(coeffs, "==", total_pd, f"ll_def_c{cid}")

    # -- configuration handling -------------------------------------------------

    def fix_config(self, config: SwitchConfig) -> None:
        for eid, var in self.v.items():
            self.backend.fix_var(var, 0.0 if eid in config.open_branches else 1.0)

    def force_closed_outside(self, switchable) -> None:
        allowed = frozenset(switchable)
        for eid, var in self.v.items():
            if eid not in allowed:
                self.backend.fix_var(var, 1.0)

    def require_at_least(self, config: SwitchConfig) -> None:
        """Only allow re-closing relative to ``config`` (openings may not grow)."""
        for eid, var in self.v.items():
            if eid not in config.open_branches:
                self.backend.fix_var(var, 1.0)

    def config_from_solution(self) -> SwitchConfig:
        open_ids = {eid for eid, var in self.v.items()
                    if self.backend.value(var) < 0.5}
        return SwitchConfig(frozenset(open_ids))

    # -- objectives ---------------------------------------------------------------

    def set_loss_objective(self) -> None:
        coeffs = {self.ll[cid]: self.contingencies[cid].probability
                  for cid in self.ll}
        self.backend.set_objective(coeffs, "min")

    def set_overload_objective(self) -> None:
        coeffs = {}
        for case, slacks in self.ol.items():
            for var in slacks.values():
                coeffs[var] = 1.0
        self.backend.set_objective(coeffs, "min")

    def set_opening_objective(self) -> None:
        coeffs = {var: -1.0 for var in self.v.values()}
        self.backend.set_objective(coeffs, "min", constant=float(len(self.v)))

    # -- lazy cutset separation ------------------------------------------------------

    def separate_cutsets(self) -> list[tuple]:
        """Add disconnection cutsets violated by the current solution.

        For every contingency block and every bus carrying a positive
        energization value while graph-disconnected from the reference, the
        frontier cutset of its component is added; returns the new (cid, bus,
        cutset) triples (empty when the solution is connectivity-consistent).
        """
        grid, be = self.grid, self.backend
        added: list[tuple] = []
        v_vals = {eid: be.value(var) for eid, var in self.v.items()}
        for cid, c in self.contingencies.items():
            closed = {eid for eid, val in v_vals.items()
                      if val > 0.5 and eid not in c.tripped}
            ens = graph_ops.energized_component(grid, closed)
            if not ens.de_energized:
                continue
            open_set = frozenset(grid.branch_ids()) - frozenset(closed)
            for bus in sorted(ens.de_energized):
                if be.value(self.pi[cid][bus]) <= SEPARATION_TOL:
                    continue
                cut = graph_ops.separating_cutset(grid, open_set, bus)
                key = (cid, bus, cut.branches)
                if key in self._cutset_registry:
                    continue
                coeffs = {self.pi[cid][bus]: 1.0}
                for eid in cut.branches:
                    if eid not in c.tripped:
                        coeffs[self.v[eid]] = coeffs.get(self.v[eid], 0.0) - 1.0
                be.add_constraint(coeffs, "<=", 0.0, f"cutset_c{cid}[{bus}]")
                self._cutset_registry.add(key)
                self.cutset_constraints.append(key)
                added.append(key)
        return added

    def solve_with_separation(self, time_limit: float | None = None) -> Status:
        """Solve, separate violated cutsets, and re-solve to the fixpoint."""
        deadline = None if time_limit is None else time.monotonic() + time_limit
        max_rounds = self.grid.n_buses * max(1, len(self.contingencies)) + 1
        status = Status.ERROR
        for _ in range(max_rounds):
            remaining = None
            if deadline is not None:
                remaining = max(0.01, deadline - time.monotonic())
            status = self.backend.solve(remaining)
            if not status.has_solution:
                return status
            if not self.separate_cutsets():
                return status
            self.backend.set_warm_start(
                {i: self.backend.value(i) for i in range(self.backend.n_vars)})
        return status

    # -- solution extraction -------------------------------------------------------

    def base_flow_values(self) -> dict[int, float]:
        return {eid: self.backend.value(var)
                for eid, var in self.flow[BASE_CASE].items()}

    def flow_values(self, cid: int) -> dict[int, float]:
        return {eid: self.backend.value(var) for eid, var in self.flow[cid].items()}

    def pi_values(self, cid: int) -> dict[int, float]:
        return {bus: self.backend.value(var) for bus, var in self.pi[cid].items()}

    def sigma_value(self, cid: int) -> float:
        return self.backend.value(self.sigma[cid])

    def ll_value(self, cid: int) -> float:
        return self.backend.value(self.ll[cid])

    def overload_values(self, case: int | None) -> dict[int, float]:
        return {eid: self.backend.value(var)
                for eid, var in self.ol.get(case, {}).items()}


# -- module-level operations ---------------------------------------------------------


def build_base_case(grid: Grid, bigm: BigMConfig | None = None,
                    backend: ScipyHighsBackend | None = None,
                    base_thermal: str = ENFORCE) -> OtsdModel:
    """Base-case block: switching binaries, DC flow, limits, connectivity flows."""
    return OtsdModel(grid, bigm or BigMConfig(),
                     backend or ScipyHighsBackend(), base_thermal=base_thermal)


def add_contingency_block(model: OtsdModel, c: Contingency,
                          enforce_thermal: bool = True) -> OtsdModel:
    model.add_contingency_block(c, ENFORCE if enforce_thermal else OMIT)
    return model


def separate_cutsets(model: OtsdModel) -> list[tuple]:
    return model.separate_cutsets()


def solve_extensive(grid: Grid, contingencies: ContingencySet,
                    bigm: BigMConfig | None = None,
                    backend_factory=None,
                    time_limit: float | None = None) -> SolveResult:
    """The full extensive program: every contingency block, hard limits,
    probability-weighted loss-of-load objective, lazy cutsets to fixpoint."""
    start = time.monotonic()
    factory = backend_factory or default_backend_factory()
    model = build_base_case(grid, bigm, factory())
    for c in contingencies:
        model.add_contingency_block(c, ENFORCE)
    model.set_loss_objective()
    status = model.solve_with_separation(time_limit)
    elapsed = (time.monotonic() - start) * 1000.0

    if status is Status.INFEASIBLE:
        return SolveResult(status=SolveStatus.INFEASIBLE,
                           timings_ms={"solve": elapsed})
    if not status.has_solution:
        return SolveResult(status=SolveStatus.TIMEOUT, timings_ms={"solve": elapsed})

    config = model.config_from_solution()
    loss = {cid: model.ll_value(cid) for cid in model.ll}
    objective = sum(model.contingencies[cid].probability * ll
                    for cid, ll in loss.items())
    return SolveResult(
        status=SolveStatus.OPTIMAL if status is Status.OPTIMAL else SolveStatus.FEASIBLE,
        config=config, objective=objective,
        openings=sorted(config.open_branches),
        loss_of_load={cid: ll for cid, ll in loss.items() if ll > 1e-12},
        timings_ms={"solve": elapsed},
    )


@dataclass(frozen=True)
class FixedContingencyState:
    flows: dict[int, float]
    pi: dict[int, float]
    sigma: float
    loss_of_load: float
    feasible: bool = True


@dataclass
class FixedConfigResult:
    base_flows: dict[int, float]
    states: dict[int, FixedContingencyState]


def fixed_config_flows(grid: Grid, config: SwitchConfig, contingencies: ContingencySet,
                       backend_factory=None,
                       bigm: BigMConfig | None = None) -> FixedConfigResult:
    """Security-analysis program: thermal limits omitted, binaries fixed.

    Solved per contingency (one base block plus one contingency block each,
    independent models) with cutset separation to the fixpoint, so the
    energization values match graph connectivity exactly. Without an explicit
    bound configuration the state-containing bounds are used, never the
    optimization defaults: an oracle must not clip feasible states.
    """
    factory = backend_factory or default_backend_factory()
    bigm = bigm or security_program_bounds(grid)
    base_flows: dict[int, float] | None = None
    states: dict[int, FixedContingencyState] = {}
    for c in contingencies:
        model = build_base_case(grid, bigm, factory(), base_thermal=OMIT)
        model.fix_config(config)
        model.add_contingency_block(c, OMIT)
        model.set_loss_objective()
        status = model.solve_with_separation()
        if not status.has_solution:
            states[c.id] = FixedContingencyState(flows={}, pi={}, sigma=0.0,
                                                 loss_of_load=math.nan, feasible=False)
            continue
        if base_flows is None:
            base_flows = model.base_flow_values()
        states[c.id] = FixedContingencyState(
            flows=model.flow_values(c.id), pi=model.pi_values(c.id),
            sigma=model.sigma_value(c.id), loss_of_load=model.ll_value(c.id))
    if base_flows is None:
        model = build_base_case(grid, bigm, factory(), base_thermal=OMIT)
        model.fix_config(config)
        model.backend.set_objective({}, "min")
        status = model.backend.solve()
        if not status.has_solution:
            raise RuntimeError(f"base power flow infeasible for config {config}")
        base_flows = model.base_flow_values()
    return FixedConfigResult(base_flows=base_flows, states=states)


@dataclass
class ReduceViolationsResult:
    config: SwitchConfig | None
    residual: set[int | None]  # case ids (BASE_CASE for the base pseudo-case)
    overloads: dict[int | None, dict[int, float]]
    objective: float | None
    status: Status
    values: dict[int, float] = field(default_factory=dict)  # warm start for next round


def reduce_violations(grid: Grid, working: list[Contingency], switchable,
                      warm_start: dict[int, float] | None = None,
                      backend_factory=None, time_limit: float | None = None,
                      tolerance: float = 1e-6,
                      bigm: BigMConfig | None = None) -> ReduceViolationsResult:
    """Minimize total thermal overload over the working cases.

    The base case rides along as a permanent pseudo-case with its own slacks.
    Branches outside ``switchable`` are fixed closed (their own tripping case
    excepted, which the trip mask already handles).
    """
    factory = backend_factory or default_backend_factory()
    model = build_base_case(grid, bigm, factory(), base_thermal=RELAX)
    for c in working:
        model.add_contingency_block(c, RELAX)
    model.force_closed_outside(switchable)
    model.set_overload_objective()
    if warm_start:
        model.backend.set_warm_start(warm_start)
    status = model.solve_with_separation(time_limit)
    if not status.has_solution:
        return ReduceViolationsResult(config=None, residual=set(), overloads={},
                                      objective=None, status=status)

    overloads: dict[int | None, dict[int, float]] = {}
    residual: set[int | None] = set()
    for case in model.ol:
        vals = {eid: v for eid, v in model.overload_values(case).items()
                if v > tolerance}
        if vals:
            overloads[case] = vals
            residual.add(case)
    values = {i: model.backend.value(i) for i in range(model.backend.n_vars)}
    return ReduceViolationsResult(
        config=model.config_from_solution(), residual=residual, overloads=overloads,
        objective=model.backend.objective_value, status=status, values=values)


def remove_unnecessary_openings(grid: Grid, vfsol: SwitchConfig,
                                working: list[Contingency], backend_factory=None,
                                bigm: BigMConfig | None = None,
                                time_limit: float | None = None) -> SwitchConfig:
    """Re-close as many branches of ``vfsol`` as the working cases allow.

    Only re-closing is permitted, so the returned opening set is a subset of
    the input one; with ``vfsol`` feasible on the working cases the program
    cannot be infeasible.
    """
    factory = backend_factory or default_backend_factory()
    model = build_base_case(grid, bigm, factory(), base_thermal=ENFORCE)
    for c in working:
        model.add_contingency_block(c, ENFORCE)
    model.require_at_least(vfsol)
    model.set_opening_objective()
    status = model.solve_with_separation(time_limit)
    if not status.has_solution:
        # the input configuration is itself feasible; fall back to it
        return vfsol
    return model.config_from_solution()
