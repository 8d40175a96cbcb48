"""LP/MILP solving: HiGHS-backed solves plus an enumeration oracle.

`solve_lp` and `solve_milp` convert a ProblemInstance to sparse arrays and
call the HiGHS routines shipped with scipy; MILPs are solved to proven
optimality (zero relative gap) unless a node limit is set.  `brute_force`
independently enumerates every binary assignment and solves the residual LP
for each, which keeps it a usable cross-check for the MILP path on small
instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .errors import SolverFailure, ValidationError
from .milp import SENSE_EQ, SENSE_GE, SENSE_LE, ProblemInstance


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    GAP_LIMIT = "gap_limit"


@dataclass(frozen=True)
class Solution:
    """Solver outcome: status, objective (including any constant), values."""

    status: SolveStatus
    objective: float
    values: Mapping[str, float]
    bound: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


def _cost_vector(instance: ProblemInstance) -> np.ndarray:
    return np.array([v.obj for v in instance.variables], dtype=float)


def _bounds_arrays(instance: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    lb = np.array([v.lb for v in instance.variables], dtype=float)
    ub = np.array([v.ub for v in instance.variables], dtype=float)
    return lb, ub


def _row_matrix(instance: ProblemInstance) -> tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
    """All constraints as one sparse matrix with per-row lower/upper limits."""
    rows, cols, data = [], [], []
    lo = np.empty(len(instance.constraints))
    hi = np.empty(len(instance.constraints))
    for r, c in enumerate(instance.constraints):
        for idx, coef in c.coeffs:
            rows.append(r)
            cols.append(idx)
            data.append(coef)
        if c.sense == SENSE_LE:
            lo[r], hi[r] = -np.inf, c.rhs
        elif c.sense == SENSE_GE:
            lo[r], hi[r] = c.rhs, np.inf
        else:
            lo[r], hi[r] = c.rhs, c.rhs
    mat = sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(instance.constraints), len(instance.variables))
    )
    return mat, lo, hi


def _split_rows(instance: ProblemInstance):
    """(A_ub, b_ub, A_eq, b_eq) sparse arrays for linprog."""
    ub_rows: list[tuple[int, tuple[tuple[int, float], ...], float, float]] = []
    eq_rows = []
    for c in instance.constraints:
        if c.sense == SENSE_EQ:
            eq_rows.append((c.coeffs, c.rhs))
        elif c.sense == SENSE_LE:
            ub_rows.append((c.coeffs, 1.0, c.rhs))
        else:
            ub_rows.append((c.coeffs, -1.0, -c.rhs))

    def assemble(entries, signed):
        if not entries:
            return None, None
        rows, cols, data, rhs = [], [], [], []
        for r, item in enumerate(entries):
            if signed:
                coeffs, sign, b = item
            else:
                coeffs, b = item
                sign = 1.0
            for idx, coef in coeffs:
                rows.append(r)
                cols.append(idx)
                data.append(sign * coef)
            rhs.append(b)
        mat = sparse.csr_matrix(
            (data, (rows, cols)), shape=(len(entries), len(instance.variables))
        )
        return mat, np.array(rhs)

    a_ub, b_ub = assemble(ub_rows, True)
    a_eq, b_eq = assemble(eq_rows, False)
    return a_ub, b_ub, a_eq, b_eq


def _values_dict(instance: ProblemInstance, x: np.ndarray) -> dict[str, float]:
    return {v.name: float(x[i]) for i, v in enumerate(instance.variables)}


def solve_lp(instance: ProblemInstance) -> Solution:
    """Solve the continuous relaxation (binaries keep their declared bounds)."""
    c = _cost_vector(instance)
    lb, ub = _bounds_arrays(instance)
    a_ub, b_ub, a_eq, b_eq = _split_rows(instance)
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=list(zip(lb, ub)),
        method="highs",
    )
    if res.status == 0:
        return Solution(
            SolveStatus.OPTIMAL,
            float(res.fun) + instance.objective_constant,
            _values_dict(instance, res.x),
        )
    if res.status == 2:
        return Solution(SolveStatus.INFEASIBLE, math.inf, {})
    if res.status == 3:
        return Solution(SolveStatus.UNBOUNDED, -math.inf, {})
    raise SolverFailure(f"LP solve failed: {res.message}")


def solve_milp(instance: ProblemInstance, node_limit: int | None = None) -> Solution:
    """Solve to proven optimality; with a node limit, return the incumbent and bound."""
    c = _cost_vector(instance)
    lb, ub = _bounds_arrays(instance)
    integrality = np.array([1 if v.is_binary else 0 for v in instance.variables])
    constraints = None
    if instance.constraints:
        mat, lo, hi = _row_matrix(instance)
        constraints = LinearConstraint(mat, lo, hi)
    options: dict = {"mip_rel_gap": 0.0}
    if node_limit is not None:
        options["node_limit"] = node_limit
    res = milp(
        c=c,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )
    offset = instance.objective_constant
    if res.status == 0:
        bound = getattr(res, "mip_dual_bound", None)
        return Solution(
            SolveStatus.OPTIMAL,
            float(res.fun) + offset,
            _values_dict(instance, res.x),
            bound=None if bound is None else float(bound) + offset,
        )
    if res.status == 2:
        return Solution(SolveStatus.INFEASIBLE, math.inf, {})
    if res.status == 3:
        return Solution(SolveStatus.UNBOUNDED, -math.inf, {})
    if res.status == 1 and res.x is not None:
        bound = getattr(res, "mip_dual_bound", None)
        return Solution(
            SolveStatus.GAP_LIMIT,
            float(res.fun) + offset,
            _values_dict(instance, res.x),
            bound=None if bound is None else float(bound) + offset,
        )
    raise SolverFailure(f"MILP solve failed: {res.message}")


def brute_force(instance: ProblemInstance, max_binaries: int = 20) -> Solution:
    """Enumerate all binary assignments, solving the residual LP for each.

    Ties between assignments are broken by enumeration order (all-zero
    first, last binary toggling fastest).  Intended as an independent
    correctness oracle, not a production path.
    """
    bidx = instance.binary_indices()
    if len(bidx) > max_binaries:
        raise ValidationError(
            f"instance has {len(bidx)} binaries, oracle cap is {max_binaries}"
        )
    c = _cost_vector(instance)
    lb, ub = _bounds_arrays(instance)
    a_ub, b_ub, a_eq, b_eq = _split_rows(instance)
    best_obj = math.inf
    best_x: np.ndarray | None = None
    for bits in itertools.product((0.0, 1.0), repeat=len(bidx)):
        if any(not instance.variables[i].lb <= b <= instance.variables[i].ub
               for i, b in zip(bidx, bits)):
            continue
        blo = lb.copy()
        bhi = ub.copy()
        for i, b in zip(bidx, bits):
            blo[i] = b
            bhi[i] = b
        res = linprog(
            c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=list(zip(blo, bhi)),
            method="highs",
        )
        if res.status == 0:
            if res.fun < best_obj:
                best_obj = float(res.fun)
                best_x = res.x
        elif res.status == 3:
            return Solution(SolveStatus.UNBOUNDED, -math.inf, {})
        elif res.status != 2:
            raise SolverFailure(f"oracle LP solve failed: {res.message}")
    if best_x is None:
        return Solution(SolveStatus.INFEASIBLE, math.inf, {})
    return Solution(
        SolveStatus.OPTIMAL,
        best_obj + instance.objective_constant,
        _values_dict(instance, best_x),
    )


def max_violation(instance: ProblemInstance, values: Mapping[str, float]) -> float:
    """Largest bound/constraint/integrality violation of a value assignment."""
    worst = 0.0
    x = np.array([values[v.name] for v in instance.variables])
    for i, v in enumerate(instance.variables):
        worst = max(worst, v.lb - x[i], x[i] - v.ub)
        if v.is_binary:
            worst = max(worst, abs(x[i] - round(x[i])))
    for con in instance.constraints:
        lhs = sum(coef * x[i] for i, coef in con.coeffs)
        if con.sense == SENSE_LE:
            worst = max(worst, lhs - con.rhs)
        elif con.sense == SENSE_GE:
            worst = max(worst, con.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - con.rhs))
    return float(worst)
