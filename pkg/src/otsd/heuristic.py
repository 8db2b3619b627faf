"""Fast feasible-solution finder.

Outer loop: security-analyze the incumbent, add the most constraining
violating contingency to the working set. Inner loop: minimize overloads with
switching restricted to hop neighborhoods of the monitored branches, growing
those neighborhoods while residual violations persist. Openings that the
working set does not need are removed before each security analysis.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import graph_ops, milp_model
from .backend import Status, default_backend_factory
from .dc_engine import SecurityAnalyzer, SecurityReport
from .errors import EmptyReport
from .grid import Contingency, ContingencySet, Grid, SwitchConfig
from .milp_model import BASE_CASE, BigMConfig
from .results import SolveResult, SolveStatus

INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class HeuristicParams:
    nh_0: int = 1
    nh_max: int = 4
    tolerance: float = 1e-6
    per_solve_time_limit: float | None = None
    time_limit: float | None = None

    def __post_init__(self):
        if not 0 <= self.nh_0 <= self.nh_max:
            raise ValueError("need 0 <= nh_0 <= nh_max")


@dataclass
class HeuristicState:
    working: list[Contingency] = field(default_factory=list)
    monitored: dict[int | None, set[int]] = field(default_factory=dict)
    hop_counts: dict[int, int] = field(default_factory=dict)
    switchable: frozenset[int] = frozenset()
    incumbent: SwitchConfig = field(default_factory=SwitchConfig.all_closed)
    outer_iter: int = 0
    inner_iter: int = 0
    timings_ms: dict[str, float] = field(default_factory=dict)
    log: list[dict] = field(default_factory=list)

    def working_ids(self) -> set[int]:
        return {c.id for c in self.working}

    def monitored_union(self) -> set[int]:
        out: set[int] = set()
        for branches in self.monitored.values():
            out |= branches
        return out

    def add_time(self, phase: str, seconds: float) -> None:
        self.timings_ms[phase] = self.timings_ms.get(phase, 0.0) + seconds * 1000.0


def most_constraining(report: SecurityReport) -> int:
    """Violating contingency with the most violated branches.

    Ties break on larger total overload magnitude, then lowest contingency id;
    the base pseudo-case never competes.
    """
    candidates = [(cid, detail) for cid, detail in
                  report.violating_contingencies.items() if cid is not None]
    if not candidates:
        raise EmptyReport("no violating contingency to pick")
    return min(candidates, key=lambda item: (
        -len(item[1].violated_branches),
        -sum(item[1].violated_branches.values()),
        item[0]))[0]


def recompute_switchable(grid: Grid, state: HeuristicState) -> frozenset[int]:
    """Union of hop neighborhoods of all monitored branches."""
    out: set[int] = set()
    for e in state.monitored_union():
        out |= graph_ops.hop(grid, e, state.hop_counts[e])
    state.switchable = frozenset(out)
    return state.switchable


def expand_switchable(grid: Grid, state: HeuristicState, params: HeuristicParams,
                      residual: set[int | None],
                      new_violations: dict[int | None, set[int]]) -> str | None:
    """Grow monitored sets and hop counts after a residual-violation round.

    Newly violated branches enter at nh_0; every branch already monitored for
    a residual case has its hop count incremented, and incrementing past
    nh_max reports infeasibility (a status, not an exception).
    """
    if not residual:
        return None
    to_expand: set[int] = set()
    for case in residual:
        mb = state.monitored.setdefault(case, set())
        mb |= new_violations.get(case, set())
        to_expand |= mb
    for vb in sorted(to_expand):
        if vb not in state.hop_counts:
            state.hop_counts[vb] = params.nh_0
        else:
            if state.hop_counts[vb] >= params.nh_max:
                return INFEASIBLE
            state.hop_counts[vb] += 1
    recompute_switchable(grid, state)
    return None


def iteration_log(state: HeuristicState) -> list[dict]:
    """Copy of the per-iteration trace collected so far."""
    return [dict(entry) for entry in state.log]


def _result(status: SolveStatus, state: HeuristicState,
            config: SwitchConfig | None = None,
            report: SecurityReport | None = None) -> SolveResult:
    res = SolveResult(status=status, config=config,
                      timings_ms=dict(state.timings_ms),
                      iterations=iteration_log(state))
    if config is not None and report is not None:
        res.objective = report.total_objective
        res.openings = sorted(config.open_branches)
        res.loss_of_load = dict(report.loss_of_load)
    return res


def solve(grid: Grid, contingencies: ContingencySet,
          params: HeuristicParams | None = None,
          backend_factory=None, bigm: BigMConfig | None = None) -> SolveResult:
    """Run the full loop from the all-closed configuration.

    Returns a feasible configuration verified by a final security analysis,
    or an infeasibility/timeout status. True infeasibility is only claimed
    when the hop ceiling saturates the line graph; otherwise the status says
    infeasible-within-horizon.
    """
    params = params or HeuristicParams()
    factory = backend_factory or default_backend_factory()
    state = HeuristicState()
    deadline = None if params.time_limit is None else time.monotonic() + params.time_limit

    def out_of_time() -> bool:
        return deadline is not None and time.monotonic() > deadline

    def infeasible_status(residual: set[int | None]) -> SolveStatus:
        if BASE_CASE in residual:
            return SolveStatus.BASE_CASE_INFEASIBLE
        if params.nh_max >= graph_ops.line_graph_diameter(grid):
            return SolveStatus.INFEASIBLE
        return SolveStatus.INFEASIBLE_WITHIN_HORIZON

    analyzer = SecurityAnalyzer(grid, contingencies, params.tolerance)
    config = SwitchConfig.all_closed()

    t = time.monotonic()
    report = analyzer.analyze(config)
    state.add_time("security_analysis", time.monotonic() - t)
    state.log.append({
        "phase": "security_analysis", "outer": 0,
        "n_working": len(state.working), "n_switchable": 0,
        "n_violating": len(report.violating_contingencies),
        "openings": 0, "objective": report.total_objective,
    })
    if report.clean:
        return _result(SolveStatus.FEASIBLE, state, config, report)

    # seed the working set and monitored branches from the first analysis
    for cid, detail in report.violating_contingencies.items():
        if cid is not None:
            state.working.append(contingencies.by_id(cid))
        state.monitored[cid] = set(detail.violated_branches)
        for mb in detail.violated_branches:
            if mb not in state.hop_counts:
                state.hop_counts[mb] = params.nh_0
    recompute_switchable(grid, state)

    warm_start = None
    while True:
        state.outer_iter += 1
        # inner loop: push overloads to zero on the working set
        while True:
            state.inner_iter += 1
            if out_of_time():
                return _result(SolveStatus.TIMEOUT, state)
            t = time.monotonic()
            rv = milp_model.reduce_violations(
                grid, state.working, state.switchable, warm_start=warm_start,
                backend_factory=factory, time_limit=params.per_solve_time_limit,
                tolerance=params.tolerance, bigm=bigm)
            state.add_time("reduce_violations", time.monotonic() - t)
            if rv.status is Status.TIMEOUT or rv.config is None:
                return _result(SolveStatus.TIMEOUT, state)
            warm_start = rv.values
            state.incumbent = rv.config
            state.log.append({
                "phase": "reduce_violations", "outer": state.outer_iter,
                "inner": state.inner_iter, "n_working": len(state.working),
                "n_switchable": len(state.switchable),
                "residual_overload": sum(sum(v.values())
                                         for v in rv.overloads.values()),
                "openings": rv.config.n_open, "objective": rv.objective,
            })
            if not rv.residual:
                break
            new_viol = {case: set(branches) for case, branches in rv.overloads.items()}
            verdict = expand_switchable(grid, state, params, rv.residual, new_viol)
            if verdict == INFEASIBLE:
                return _result(infeasible_status(rv.residual), state)

        t = time.monotonic()
        vsol = milp_model.remove_unnecessary_openings(
            grid, rv.config, state.working, backend_factory=factory, bigm=bigm,
            time_limit=params.per_solve_time_limit)
        state.add_time("simplify", time.monotonic() - t)
        state.incumbent = vsol
        warm_start = None

        if out_of_time():
            return _result(SolveStatus.TIMEOUT, state)
        t = time.monotonic()
        report = analyzer.analyze(vsol)
        state.add_time("security_analysis", time.monotonic() - t)
        state.log.append({
            "phase": "security_analysis", "outer": state.outer_iter,
            "n_working": len(state.working), "n_switchable": len(state.switchable),
            "n_violating": len(report.violating_contingencies),
            "openings": vsol.n_open, "objective": report.total_objective,
        })
        if report.clean:
            return _result(SolveStatus.FEASIBLE, state, vsol, report)

        if all(cid is None for cid in report.violating_contingencies):
            # only the base case is flagged although the working set held it
            # to zero overload: re-running cannot change anything
            return _result(SolveStatus.BASE_CASE_INFEASIBLE, state)

        cid = most_constraining(report)
        state.working.append(contingencies.by_id(cid))
        detail = report.violating_contingencies[cid]
        state.monitored.setdefault(cid, set()).update(detail.violated_branches)
        for mb in detail.violated_branches:
            if mb not in state.hop_counts:
                state.hop_counts[mb] = params.nh_0
        recompute_switchable(grid, state)
