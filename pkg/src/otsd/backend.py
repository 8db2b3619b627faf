"""MILP backend contract and the scipy/HiGHS adapter.

The contract is the only seam to third-party solvers: variables with bounds,
binaries, linear constraints, a linear objective, warm starts, bound fixing,
and a time-limited solve with status/value queries. The bundled adapter sits
on ``scipy.optimize.milp`` (HiGHS).

Determinism: HiGHS runs single-threaded here and is deterministic for a fixed
model; the ``seed`` option is accepted for interface stability and has no
effect. Warm starts are recorded but not forwarded because the scipy wrapper
exposes no MIP-start interface; adapters over richer solvers should forward
them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.optimize import Bounds, LinearConstraint, milp


class Status(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"  # incumbent found but limit reached
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIMEOUT = "timeout"  # limit reached with no incumbent
    ERROR = "error"

    @property
    def has_solution(self) -> bool:
        return self in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class _Var:
    lb: float
    ub: float
    binary: bool
    name: str


@dataclass
class _Constraint:
    coeffs: dict[int, float]
    lb: float
    ub: float
    name: str


class ScipyHighsBackend:
    """Incremental model builder solved through scipy's HiGHS interface.

    The model is rebuilt in matrix form at each ``solve`` call, which keeps
    the builder re-entrant after constraint additions and bound changes.
    """

    def __init__(self, time_limit: float | None = None, mip_rel_gap: float | None = None,
                 seed: int | None = None):
        self._vars: list[_Var] = []
        self._cons: list[_Constraint] = []
        self._obj: dict[int, float] = {}
        self._obj_const = 0.0
        self._sense = 1.0  # +1 minimize, -1 maximize
        self._warm: dict[int, float] = {}
        self.time_limit = time_limit
        self.mip_rel_gap = mip_rel_gap
        self.seed = seed
        self._status = Status.ERROR
        self._x: np.ndarray | None = None
        self._objective_value: float | None = None

    # -- construction ------------------------------------------------------

    def add_var(self, lb: float = -math.inf, ub: float = math.inf, name: str = "") -> int:
        self._vars.append(_Var(lb, ub, binary=False, name=name))
        return len(self._vars) - 1

    def add_binary(self, name: str = "") -> int:
        self._vars.append(_Var(0.0, 1.0, binary=True, name=name))
        return len(self._vars) - 1

    def add_constraint(self, coeffs: dict[int, float], sense: str, rhs: float,
                       name: str = "") -> int:
        if sense == "<=":
            lb, ub = -math.inf, rhs
        elif sense == ">=":
            lb, ub = rhs, math.inf
        elif sense == "==":
            lb, ub = rhs, rhs
        else:
            raise ValueError(f"unknown sense {sense!r}")
        self._cons.append(_Constraint(dict(coeffs), lb, ub, name))
        return len(self._cons) - 1

    def set_objective(self, coeffs: dict[int, float], sense: str = "min",
                      constant: float = 0.0) -> None:
        self._obj = dict(coeffs)
        self._obj_const = constant
        self._sense = 1.0 if sense == "min" else -1.0

    def set_warm_start(self, values: dict[int, float]) -> None:
        self._warm = dict(values)

    def set_bounds(self, var: int, lb: float, ub: float) -> None:
        self._vars[var].lb = lb
        self._vars[var].ub = ub

    def fix_var(self, var: int, value: float) -> None:
        self.set_bounds(var, value, value)

    def unfix_var(self, var: int, lb: float, ub: float) -> None:
        self.set_bounds(var, lb, ub)

    @property
    def n_vars(self) -> int:
        return len(self._vars)

    @property
    def n_constraints(self) -> int:
        return len(self._cons)

    # -- solving -----------------------------------------------------------

    def solve(self, time_limit: float | None = None) -> Status:
        n = len(self._vars)
        c = np.zeros(n)
        for idx, coef in self._obj.items():
            c[idx] = self._sense * coef
        integrality = np.array([1 if v.binary else 0 for v in self._vars])
        bounds = Bounds(np.array([v.lb for v in self._vars]),
                        np.array([v.ub for v in self._vars]))

        constraints = []
        if self._cons:
            rows, cols, vals = [], [], []
            for r, con in enumerate(self._cons):
                for idx, coef in con.coeffs.items():
                    rows.append(r)
                    cols.append(idx)
                    vals.append(coef)
            a = scipy.sparse.csc_matrix((vals, (rows, cols)), shape=(len(self._cons), n))
            constraints = [LinearConstraint(
                a, np.array([con.lb for con in self._cons]),
                np.array([con.ub for con in self._cons]))]

        options: dict = {}
        limit = time_limit if time_limit is not None else self.time_limit
        if limit is not None:
            options["time_limit"] = float(limit)
        if self.mip_rel_gap is not None:
            options["mip_rel_gap"] = float(self.mip_rel_gap)

        res = milp(c=c, constraints=constraints, integrality=integrality,
                   bounds=bounds, options=options)

        if res.status == 0:
            self._status = Status.OPTIMAL
        elif res.status == 1:
            self._status = Status.FEASIBLE if res.x is not None else Status.TIMEOUT
        elif res.status == 2:
            self._status = Status.INFEASIBLE
        elif res.status == 3:
            self._status = Status.UNBOUNDED
        else:
            self._status = Status.ERROR
        self._x = None if res.x is None else np.asarray(res.x)
        self._objective_value = None
        if self._x is not None:
            self._objective_value = float(
                self._sense * (res.fun if res.fun is not None else c @ self._x)
                + self._obj_const)
        return self._status

    # -- queries -----------------------------------------------------------

    @property
    def status(self) -> Status:
        return self._status

    @property
    def objective_value(self) -> float | None:
        return self._objective_value

    def value(self, var: int) -> float:
        if self._x is None:
            raise RuntimeError("no solution available")
        return float(self._x[var])

    def values(self, variables) -> dict:
        return {key: self.value(idx) for key, idx in variables.items()}


def default_backend_factory(**kwargs):
    """Factory used across the solvers; one fresh model per program instance."""
    def make() -> ScipyHighsBackend:
        return ScipyHighsBackend(**kwargs)
    return make
