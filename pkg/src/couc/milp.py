"""Mixed-integer formulations for day-ahead commitment and real-time dispatch.

Instances are built as explicit variable/constraint lists so they can be
solved by any LP/MILP backend, enumerated by the brute-force oracle, and
exported as deterministic LP-style text.  The day-ahead problem runs on a
(possibly non-uniform) time partition; the real-time problem runs on the
fine net-load grid with day-ahead decisions fixed according to unit class:
baseload units keep their committed power, intermediate units keep their
commitment status, peaking units are free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from statistics import fmean
from typing import Mapping, Sequence

from .errors import SolverFailure, ValidationError
from .model import Fleet, NetLoadSeries, ScenarioSet, aggregate_demand
from .partition import TimePartition

SENSE_LE = "<="
SENSE_EQ = "="
SENSE_GE = ">="

# Slack for float comparisons of accumulated minutes against min up/down times.
_MINUTE_EPS = 1e-9

# Extracted schedules must reproduce solver values within these tolerances.
_BINARY_TOL = 1e-6
_POWER_TOL = 1e-5


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    is_binary: bool = False
    obj: float = 0.0


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


@dataclass(frozen=True)
class ProblemInstance:
    """A minimization LP/MILP in list form with an optional objective offset."""

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective_constant: float = 0.0

    def __post_init__(self) -> None:
        names = set()
        for v in self.variables:
            if not v.name:
                raise ValidationError("variable with empty name")
            if v.name in names:
                raise ValidationError(f"duplicate variable name {v.name!r}")
            names.add(v.name)
            if v.lb > v.ub:
                raise ValidationError(f"variable {v.name}: lb {v.lb} exceeds ub {v.ub}")
            if v.is_binary and not (v.lb >= 0.0 and v.ub <= 1.0):
                raise ValidationError(f"binary variable {v.name} has bounds outside [0, 1]")
            if not math.isfinite(v.obj):
                raise ValidationError(f"variable {v.name}: non-finite objective coefficient")
        n = len(self.variables)
        for c in self.constraints:
            if c.sense not in (SENSE_LE, SENSE_EQ, SENSE_GE):
                raise ValidationError(f"constraint {c.name}: bad sense {c.sense!r}")
            if not math.isfinite(c.rhs):
                raise ValidationError(f"constraint {c.name}: non-finite rhs")
            for idx, coef in c.coeffs:
                if not 0 <= idx < n:
                    raise ValidationError(f"constraint {c.name}: variable index {idx} out of range")
                if not math.isfinite(coef):
                    raise ValidationError(f"constraint {c.name}: non-finite coefficient")

    @cached_property
    def name_index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    @property
    def num_binaries(self) -> int:
        return sum(1 for v in self.variables if v.is_binary)

    def binary_indices(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.variables) if v.is_binary)

    def objective_value(self, values: Mapping[str, float]) -> float:
        total = self.objective_constant
        for v in self.variables:
            if v.obj != 0.0:
                total += v.obj * values[v.name]
        return total

    def to_lp_text(self) -> str:
        """Deterministic LP-style text rendering; see README for the format."""
        lines = ["Minimize"]
        terms = [(v.name, v.obj) for v in self.variables if v.obj != 0.0]
        if self.objective_constant != 0.0:
            terms.append(("", self.objective_constant))
        lines.append(" obj: " + (_fmt_terms(terms) if terms else "0"))
        lines.append("Subject To")
        for c in self.constraints:
            row = [(self.variables[i].name, coef) for i, coef in c.coeffs if coef != 0.0]
            body = _fmt_terms(row) if row else "0"
            lines.append(f" {c.name}: {body} {c.sense} {_fmt_num(c.rhs)}")
        lines.append("Bounds")
        for v in self.variables:
            lines.append(" " + _fmt_bound(v))
        binaries = [v.name for v in self.variables if v.is_binary]
        if binaries:
            lines.append("Binaries")
            for name in binaries:
                lines.append(f" {name}")
        lines.append("End")
        return "\n".join(lines) + "\n"


def _fmt_num(x: float) -> str:
    return repr(float(x))


def _fmt_terms(terms: Sequence[tuple[str, float]]) -> str:
    parts: list[str] = []
    for name, coef in terms:
        mag = _fmt_num(abs(coef))
        body = f"{mag} {name}" if name else mag
        if not parts:
            parts.append(body if coef >= 0.0 else f"- {body}")
        else:
            parts.append(f"+ {body}" if coef >= 0.0 else f"- {body}")
    return " ".join(parts)


def _fmt_bound(v: Variable) -> str:
    if v.lb == v.ub:
        return f"{v.name} = {_fmt_num(v.lb)}"
    lo = math.isfinite(v.lb)
    hi = math.isfinite(v.ub)
    if lo and hi:
        return f"{_fmt_num(v.lb)} <= {v.name} <= {_fmt_num(v.ub)}"
    if lo:
        return f"{v.name} >= {_fmt_num(v.lb)}"
    if hi:
        return f"{v.name} <= {_fmt_num(v.ub)}"
    return f"{v.name} free"


class _InstanceBuilder:
    def __init__(self) -> None:
        self._vars: list[Variable] = []
        self._cons: list[Constraint] = []
        self._const = 0.0

    def var(self, name: str, lb: float, ub: float, *, binary: bool = False, obj: float = 0.0) -> int:
        self._vars.append(Variable(name, lb, ub, binary, obj))
        return len(self._vars) - 1

    def con(self, name: str, coeffs: Sequence[tuple[int, float]], sense: str, rhs: float) -> None:
        self._cons.append(Constraint(name, tuple(coeffs), sense, rhs))

    def add_constant(self, value: float) -> None:
        self._const += value

    def build(self) -> ProblemInstance:
        return ProblemInstance(tuple(self._vars), tuple(self._cons), self._const)


@dataclass(frozen=True)
class CostBreakdown:
    """Cost split in euro: start/stop, operating cost per class, shedding."""

    start_stop: float
    op_baseload: float
    op_intermediate: float
    op_peaking: float
    shed: float
    total: float

    def __post_init__(self) -> None:
        parts = (
            self.start_stop
            + self.op_baseload
            + self.op_intermediate
            + self.op_peaking
            + self.shed
        )
        if abs(parts - self.total) > 1e-6 * max(1.0, abs(self.total)):
            raise ValidationError(
                f"breakdown parts sum to {parts}, declared total is {self.total}"
            )

    @staticmethod
    def from_parts(
        start_stop: float,
        op_baseload: float,
        op_intermediate: float,
        op_peaking: float,
        shed: float,
    ) -> "CostBreakdown":
        total = start_stop + op_baseload + op_intermediate + op_peaking + shed
        return CostBreakdown(start_stop, op_baseload, op_intermediate, op_peaking, shed, total)


@dataclass(frozen=True)
class Schedule:
    """Commitment and dispatch per unit and slot, plus demand bookkeeping.

    A slot is one nonzero partition period for the day-ahead stage, or one
    net-load interval for the real-time stage.  For stochastic day-ahead
    schedules the satisfied/shed columns hold scenario means.
    """

    stage: str
    partition: TimePartition
    unit_ids: tuple[str, ...]
    commitment: tuple[tuple[int, ...], ...]
    power: tuple[tuple[float, ...], ...]
    startup_paid: tuple[tuple[float, ...], ...]
    shutdown_paid: tuple[tuple[float, ...], ...]
    satisfied: tuple[float, ...]
    shed: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.stage not in ("da", "rt"):
            raise ValidationError(f"schedule stage must be 'da' or 'rt', got {self.stage!r}")
        slots = len(self.satisfied)
        if slots != len(self.partition.nonzero_indices()):
            raise ValidationError("slot count does not match the partition")
        if len(self.shed) != slots:
            raise ValidationError("satisfied/shed length mismatch")
        rows = (self.commitment, self.power, self.startup_paid, self.shutdown_paid)
        for grid in rows:
            if len(grid) != len(self.unit_ids):
                raise ValidationError("per-unit arrays do not match unit_ids")
            for row in grid:
                if len(row) != slots:
                    raise ValidationError("per-slot arrays do not match the slot count")
        for g, uid in enumerate(self.unit_ids):
            for j in range(slots):
                u = self.commitment[g][j]
                if u not in (0, 1):
                    raise ValidationError(f"unit {uid}: non-binary commitment at slot {j}")
                if u == 0 and self.power[g][j] != 0.0:
                    raise ValidationError(f"unit {uid}: nonzero power while off at slot {j}")
                if self.startup_paid[g][j] < 0.0 or self.shutdown_paid[g][j] < 0.0:
                    raise ValidationError(f"unit {uid}: negative start/stop cost at slot {j}")
        for j in range(slots):
            if self.satisfied[j] < 0.0 or self.shed[j] < 0.0:
                raise ValidationError(f"negative satisfied/shed at slot {j}")

    @property
    def num_slots(self) -> int:
        return len(self.satisfied)

    @property
    def slot_hours(self) -> tuple[float, ...]:
        lengths = self.partition.lengths_minutes
        return tuple(lengths[i] / 60.0 for i in self.partition.nonzero_indices())


def _minute_sums(minutes: Sequence[int]) -> list[int]:
    out = [0]
    for m in minutes:
        out.append(out[-1] + m)
    return out


def _forced_prefix(minutes: Sequence[int], init_hours: float, threshold_hours: float) -> int:
    """Number of leading slots during which the initial on/off state must hold."""
    init_min = init_hours * 60.0
    threshold_min = threshold_hours * 60.0
    cum = _minute_sums(minutes)
    count = 0
    for j in range(len(minutes)):
        if init_min + cum[j] < threshold_min - _MINUTE_EPS:
            count += 1
        else:
            break
    return count


def _build_da(
    fleet: Fleet,
    partition: TimePartition,
    demand_rows: Sequence[Sequence[float]],
) -> ProblemInstance:
    pidx = partition.nonzero_indices()
    P = len(pidx)
    minutes = [partition.lengths_minutes[i] for i in pidx]
    hours = [m / 60.0 for m in minutes]
    W = len(demand_rows)
    if W == 0:
        raise ValidationError("need at least one demand row")
    for w, row in enumerate(demand_rows):
        if len(row) != P:
            raise ValidationError(
                f"demand row {w} has {len(row)} entries, expected {P} nonzero periods"
            )
    b = _InstanceBuilder()
    u_ix: list[list[int]] = []
    p_ix: list[list[int]] = []
    su_ix: list[list[int]] = []
    sd_ix: list[list[int]] = []
    for g, unit in enumerate(fleet.units):
        on_prefix = (
            _forced_prefix(minutes, unit.init_hours_in_state, unit.min_up)
            if unit.init_on
            else 0
        )
        off_prefix = (
            _forced_prefix(minutes, unit.init_hours_in_state, unit.min_down)
            if not unit.init_on
            else 0
        )
        ug, pg, sug, sdg = [], [], [], []
        for j in range(P):
            lb = 1.0 if j < on_prefix else 0.0
            ub = 0.0 if j < off_prefix else 1.0
            ug.append(b.var(f"u[{g}][{j}]", lb, ub, binary=True))
            pg.append(b.var(f"p[{g}][{j}]", 0.0, unit.p_max, obj=unit.marginal_cost * hours[j]))
            # su/sd never need to exceed the one-shot transition charge; finite
            # bounds keep the solver's interior-point machinery off slow paths.
            sug.append(b.var(f"su[{g}][{j}]", 0.0, unit.startup_cost, obj=1.0))
            sdg.append(b.var(f"sd[{g}][{j}]", 0.0, unit.shutdown_cost, obj=1.0))
        u_ix.append(ug)
        p_ix.append(pg)
        su_ix.append(sug)
        sd_ix.append(sdg)
    pd_ix: list[list[int]] = []
    for w in range(W):
        tag = "" if W == 1 else f"[{w}]"
        row = []
        for j in range(P):
            dplus = max(0.0, float(demand_rows[w][j]))
            coef = -fleet.shed_cost * hours[j] / W
            row.append(b.var(f"pd[{j}]{tag}", 0.0, dplus, obj=coef))
            b.add_constant(fleet.shed_cost * hours[j] * dplus / W)
        pd_ix.append(row)
    for w in range(W):
        tag = "" if W == 1 else f"[{w}]"
        for j in range(P):
            coeffs = [(p_ix[g][j], 1.0) for g in range(len(fleet.units))]
            coeffs.append((pd_ix[w][j], -1.0))
            b.con(f"balance[{j}]{tag}", coeffs, SENSE_GE, 0.0)
    for g, unit in enumerate(fleet.units):
        for j in range(P):
            b.con(
                f"plo[{g}][{j}]",
                [(p_ix[g][j], 1.0), (u_ix[g][j], -unit.p_min)],
                SENSE_GE,
                0.0,
            )
            b.con(
                f"phi[{g}][{j}]",
                [(p_ix[g][j], 1.0), (u_ix[g][j], -unit.p_max)],
                SENSE_LE,
                0.0,
            )
    for g, unit in enumerate(fleet.units):
        for j in range(P):
            if j == 0:
                b.con(
                    f"rampup[{g}][0]",
                    [(p_ix[g][0], 1.0)],
                    SENSE_LE,
                    unit.ramp_up * hours[0] + unit.init_power,
                )
                b.con(
                    f"rampdn[{g}][0]",
                    [(p_ix[g][0], -1.0)],
                    SENSE_LE,
                    unit.ramp_down * hours[0] - unit.init_power,
                )
            else:
                b.con(
                    f"rampup[{g}][{j}]",
                    [(p_ix[g][j], 1.0), (p_ix[g][j - 1], -1.0)],
                    SENSE_LE,
                    unit.ramp_up * hours[j],
                )
                b.con(
                    f"rampdn[{g}][{j}]",
                    [(p_ix[g][j], -1.0), (p_ix[g][j - 1], 1.0)],
                    SENSE_LE,
                    unit.ramp_down * hours[j],
                )
    for g, unit in enumerate(fleet.units):
        init_u = 1.0 if unit.init_on else 0.0
        if unit.startup_cost > 0.0:
            for j in range(P):
                if j == 0:
                    b.con(
                        f"start[{g}][0]",
                        [(su_ix[g][0], 1.0), (u_ix[g][0], -unit.startup_cost)],
                        SENSE_GE,
                        -unit.startup_cost * init_u,
                    )
                else:
                    b.con(
                        f"start[{g}][{j}]",
                        [
                            (su_ix[g][j], 1.0),
                            (u_ix[g][j], -unit.startup_cost),
                            (u_ix[g][j - 1], unit.startup_cost),
                        ],
                        SENSE_GE,
                        0.0,
                    )
        if unit.shutdown_cost > 0.0:
            for j in range(P):
                if j == 0:
                    b.con(
                        f"stop[{g}][0]",
                        [(sd_ix[g][0], 1.0), (u_ix[g][0], unit.shutdown_cost)],
                        SENSE_GE,
                        unit.shutdown_cost * init_u,
                    )
                else:
                    b.con(
                        f"stop[{g}][{j}]",
                        [
                            (sd_ix[g][j], 1.0),
                            (u_ix[g][j], unit.shutdown_cost),
                            (u_ix[g][j - 1], -unit.shutdown_cost),
                        ],
                        SENSE_GE,
                        0.0,
                    )
    cum = _minute_sums(minutes)
    for g, unit in enumerate(fleet.units):
        up_min = unit.min_up * 60.0
        dn_min = unit.min_down * 60.0
        init_on = unit.init_on
        for j in range(P):
            for tau in range(j + 1, P):
                if cum[tau] - cum[j] >= up_min - _MINUTE_EPS:
                    break
                if j == 0:
                    if not init_on:
                        b.con(
                            f"minup[{g}][0][{tau}]",
                            [(u_ix[g][tau], 1.0), (u_ix[g][0], -1.0)],
                            SENSE_GE,
                            0.0,
                        )
                else:
                    b.con(
                        f"minup[{g}][{j}][{tau}]",
                        [
                            (u_ix[g][tau], 1.0),
                            (u_ix[g][j], -1.0),
                            (u_ix[g][j - 1], 1.0),
                        ],
                        SENSE_GE,
                        0.0,
                    )
        for j in range(P):
            for tau in range(j + 1, P):
                if cum[tau] - cum[j] >= dn_min - _MINUTE_EPS:
                    break
                if j == 0:
                    if init_on:
                        b.con(
                            f"mindown[{g}][0][{tau}]",
                            [(u_ix[g][tau], 1.0), (u_ix[g][0], -1.0)],
                            SENSE_LE,
                            0.0,
                        )
                else:
                    b.con(
                        f"mindown[{g}][{j}][{tau}]",
                        [
                            (u_ix[g][tau], 1.0),
                            (u_ix[g][j], -1.0),
                            (u_ix[g][j - 1], 1.0),
                        ],
                        SENSE_LE,
                        1.0,
                    )
    return b.build()


def build_da_uc(
    fleet: Fleet,
    partition: TimePartition,
    demand: Sequence[float],
) -> ProblemInstance:
    """Day-ahead unit commitment for one demand value per nonzero period."""
    return _build_da(fleet, partition, [list(demand)])


def build_da_uc_stochastic(
    fleet: Fleet,
    partition: TimePartition,
    scenarios: ScenarioSet,
) -> ProblemInstance:
    """Day-ahead commitment against equiprobable scenarios.

    Commitment, power, and start/stop variables are shared across scenarios;
    each scenario gets its own satisfied-demand variables and the shedding
    term is averaged.  With one scenario this matches the deterministic
    builder exactly.
    """
    if scenarios.horizon_minutes != partition.horizon_minutes:
        raise ValidationError(
            f"scenarios cover {scenarios.horizon_minutes} min, "
            f"partition covers {partition.horizon_minutes} min"
        )
    rows = [aggregate_demand(s, partition) for s in scenarios.scenarios]
    return _build_da(fleet, partition, rows)


def da_to_rt_index_map(partition: TimePartition, rt_step_minutes: int) -> tuple[range, ...]:
    """Per period, the 0-based real-time interval indices it covers.

    Zero-length periods map to empty ranges; the nonzero ranges tile the
    horizon in order.
    """
    if rt_step_minutes <= 0:
        raise ValidationError("rt_step_minutes must be positive")
    for i, x in enumerate(partition.lengths_minutes):
        if x % rt_step_minutes != 0:
            raise ValidationError(
                f"period {i} length {x} min is not a whole number of "
                f"{rt_step_minutes}-minute intervals"
            )
    bounds = partition.boundaries()
    return tuple(
        range(bounds[t] // rt_step_minutes, bounds[t + 1] // rt_step_minutes)
        for t in range(partition.num_periods)
    )


def build_rt_ed(
    fleet: Fleet,
    rt_series: NetLoadSeries,
    da: "Schedule",
    partition: TimePartition,
) -> ProblemInstance:
    """Real-time dispatch with day-ahead anchoring.

    Baseload power and baseload/intermediate commitment are fixed to their
    day-ahead values (expanded onto the fine grid); peaking units re-solve
    commitment and dispatch.  The only binaries are peaking commitments.
    """
    if da.stage != "da":
        raise ValidationError("anchoring schedule must be a day-ahead schedule")
    if da.partition.lengths_minutes != partition.lengths_minutes or (
        da.partition.grid_minutes != partition.grid_minutes
    ):
        raise ValidationError("day-ahead schedule was built on a different partition")
    if da.unit_ids != fleet.unit_ids:
        raise ValidationError("day-ahead schedule units do not match the fleet")
    if partition.horizon_minutes != rt_series.horizon_minutes:
        raise ValidationError("partition horizon does not match the real-time series")
    ranges = da_to_rt_index_map(partition, rt_series.step_minutes)
    pidx = partition.nonzero_indices()
    N = rt_series.n
    slot_of = [0] * N
    for j, t in enumerate(pidx):
        for i in ranges[t]:
            slot_of[i] = j
    h = rt_series.step_minutes / 60.0
    step = rt_series.step_minutes
    b = _InstanceBuilder()
    u_ix: list[list[int]] = []
    p_ix: list[list[int]] = []
    su_ix: list[list[int]] = []
    sd_ix: list[list[int]] = []
    for g, unit in enumerate(fleet.units):
        fix_u = unit.unit_class in ("baseload", "intermediate")
        fix_p = unit.unit_class == "baseload"
        on_prefix = off_prefix = 0
        if not fix_u:
            on_prefix = (
                _forced_prefix([step] * N, unit.init_hours_in_state, unit.min_up)
                if unit.init_on
                else 0
            )
            off_prefix = (
                _forced_prefix([step] * N, unit.init_hours_in_state, unit.min_down)
                if not unit.init_on
                else 0
            )
        ug, pg, sug, sdg = [], [], [], []
        for i in range(N):
            if fix_u:
                val = float(da.commitment[g][slot_of[i]])
                ug.append(b.var(f"u[{g}][{i}]", val, val))
            else:
                lb = 1.0 if i < on_prefix else 0.0
                ub = 0.0 if i < off_prefix else 1.0
                ug.append(b.var(f"u[{g}][{i}]", lb, ub, binary=True))
            if fix_p:
                val = da.power[g][slot_of[i]]
                pg.append(b.var(f"p[{g}][{i}]", val, val, obj=unit.marginal_cost * h))
            else:
                pg.append(b.var(f"p[{g}][{i}]", 0.0, unit.p_max, obj=unit.marginal_cost * h))
            sug.append(b.var(f"su[{g}][{i}]", 0.0, unit.startup_cost, obj=1.0))
            sdg.append(b.var(f"sd[{g}][{i}]", 0.0, unit.shutdown_cost, obj=1.0))
        u_ix.append(ug)
        p_ix.append(pg)
        su_ix.append(sug)
        sd_ix.append(sdg)
    pd_ix: list[int] = []
    for i in range(N):
        dplus = max(0.0, rt_series.values[i])
        pd_ix.append(b.var(f"pd[{i}]", 0.0, dplus, obj=-fleet.shed_cost * h))
        b.add_constant(fleet.shed_cost * h * dplus)
    for i in range(N):
        coeffs = [(p_ix[g][i], 1.0) for g in range(len(fleet.units))]
        coeffs.append((pd_ix[i], -1.0))
        b.con(f"balance[{i}]", coeffs, SENSE_GE, 0.0)
    for g, unit in enumerate(fleet.units):
        if unit.unit_class == "baseload":
            continue
        for i in range(N):
            b.con(
                f"plo[{g}][{i}]",
                [(p_ix[g][i], 1.0), (u_ix[g][i], -unit.p_min)],
                SENSE_GE,
                0.0,
            )
            b.con(
                f"phi[{g}][{i}]",
                [(p_ix[g][i], 1.0), (u_ix[g][i], -unit.p_max)],
                SENSE_LE,
                0.0,
            )
        for i in range(N):
            if i == 0:
                b.con(
                    f"rampup[{g}][0]",
                    [(p_ix[g][0], 1.0)],
                    SENSE_LE,
                    unit.ramp_up * h + unit.init_power,
                )
                b.con(
                    f"rampdn[{g}][0]",
                    [(p_ix[g][0], -1.0)],
                    SENSE_LE,
                    unit.ramp_down * h - unit.init_power,
                )
            else:
                b.con(
                    f"rampup[{g}][{i}]",
                    [(p_ix[g][i], 1.0), (p_ix[g][i - 1], -1.0)],
                    SENSE_LE,
                    unit.ramp_up * h,
                )
                b.con(
                    f"rampdn[{g}][{i}]",
                    [(p_ix[g][i], -1.0), (p_ix[g][i - 1], 1.0)],
                    SENSE_LE,
                    unit.ramp_down * h,
                )
    for g, unit in enumerate(fleet.units):
        init_u = 1.0 if unit.init_on else 0.0
        if unit.startup_cost > 0.0:
            for i in range(N):
                if i == 0:
                    b.con(
                        f"start[{g}][0]",
                        [(su_ix[g][0], 1.0), (u_ix[g][0], -unit.startup_cost)],
                        SENSE_GE,
                        -unit.startup_cost * init_u,
                    )
                else:
                    b.con(
                        f"start[{g}][{i}]",
                        [
                            (su_ix[g][i], 1.0),
                            (u_ix[g][i], -unit.startup_cost),
                            (u_ix[g][i - 1], unit.startup_cost),
                        ],
                        SENSE_GE,
                        0.0,
                    )
        if unit.shutdown_cost > 0.0:
            for i in range(N):
                if i == 0:
                    b.con(
                        f"stop[{g}][0]",
                        [(sd_ix[g][0], 1.0), (u_ix[g][0], unit.shutdown_cost)],
                        SENSE_GE,
                        unit.shutdown_cost * init_u,
                    )
                else:
                    b.con(
                        f"stop[{g}][{i}]",
                        [
                            (sd_ix[g][i], 1.0),
                            (u_ix[g][i], unit.shutdown_cost),
                            (u_ix[g][i - 1], -unit.shutdown_cost),
                        ],
                        SENSE_GE,
                        0.0,
                    )
    for g, unit in enumerate(fleet.units):
        if unit.unit_class in ("baseload", "intermediate"):
            continue
        up_min = unit.min_up * 60.0
        dn_min = unit.min_down * 60.0
        for i in range(N):
            for tau in range(i + 1, N):
                if (tau - i) * step >= up_min - _MINUTE_EPS:
                    break
                if i == 0:
                    if not unit.init_on:
                        b.con(
                            f"minup[{g}][0][{tau}]",
                            [(u_ix[g][tau], 1.0), (u_ix[g][0], -1.0)],
                            SENSE_GE,
                            0.0,
                        )
                else:
                    b.con(
                        f"minup[{g}][{i}][{tau}]",
                        [
                            (u_ix[g][tau], 1.0),
                            (u_ix[g][i], -1.0),
                            (u_ix[g][i - 1], 1.0),
                        ],
                        SENSE_GE,
                        0.0,
                    )
        for i in range(N):
            for tau in range(i + 1, N):
                if (tau - i) * step >= dn_min - _MINUTE_EPS:
                    break
                if i == 0:
                    if unit.init_on:
                        b.con(
                            f"mindown[{g}][0][{tau}]",
                            [(u_ix[g][tau], 1.0), (u_ix[g][0], -1.0)],
                            SENSE_LE,
                            0.0,
                        )
                else:
                    b.con(
                        f"mindown[{g}][{i}][{tau}]",
                        [
                            (u_ix[g][tau], 1.0),
                            (u_ix[g][i], -1.0),
                            (u_ix[g][i - 1], 1.0),
                        ],
                        SENSE_LE,
                        1.0,
                    )
    return b.build()


def _gather_units(
    fleet: Fleet,
    slots: int,
    values: Mapping[str, float],
) -> tuple[tuple, tuple, tuple, tuple]:
    commitment, power, su_paid, sd_paid = [], [], [], []
    for g, unit in enumerate(fleet.units):
        urow, prow, surow, sdrow = [], [], [], []
        for j in range(slots):
            u_raw = values[f"u[{g}][{j}]"]
            u = int(round(u_raw))
            if abs(u_raw - u) > _BINARY_TOL:
                raise SolverFailure(f"commitment u[{g}][{j}] = {u_raw} is not integral")
            p_raw = values[f"p[{g}][{j}]"]
            if u == 0:
                if abs(p_raw) > _POWER_TOL:
                    raise SolverFailure(f"unit {unit.unit_id} off with power {p_raw} at slot {j}")
                p = 0.0
            else:
                if not unit.p_min - _POWER_TOL <= p_raw <= unit.p_max + _POWER_TOL:
                    raise SolverFailure(
                        f"unit {unit.unit_id} power {p_raw} outside limits at slot {j}"
                    )
                p = float(p_raw)
            urow.append(u)
            prow.append(p)
            surow.append(max(0.0, float(values[f"su[{g}][{j}]"])))
            sdrow.append(max(0.0, float(values[f"sd[{g}][{j}]"])))
        commitment.append(tuple(urow))
        power.append(tuple(prow))
        su_paid.append(tuple(surow))
        sd_paid.append(tuple(sdrow))
    return tuple(commitment), tuple(power), tuple(su_paid), tuple(sd_paid)


def extract_da_schedule(
    fleet: Fleet,
    partition: TimePartition,
    demand_rows: Sequence[Sequence[float]],
    values: Mapping[str, float],
) -> Schedule:
    """Turn day-ahead solver values into a schedule; scenario columns are averaged."""
    P = len(partition.nonzero_indices())
    W = len(demand_rows)
    commitment, power, su_paid, sd_paid = _gather_units(fleet, P, values)
    satisfied, shed = [], []
    for j in range(P):
        sat_w, shed_w = [], []
        for w in range(W):
            tag = "" if W == 1 else f"[{w}]"
            dplus = max(0.0, float(demand_rows[w][j]))
            pd = min(dplus, max(0.0, float(values[f"pd[{j}]{tag}"])))
            sat_w.append(pd)
            shed_w.append(dplus - pd)
        satisfied.append(fmean(sat_w))
        shed.append(fmean(shed_w))
    return Schedule(
        stage="da",
        partition=partition,
        unit_ids=fleet.unit_ids,
        commitment=commitment,
        power=power,
        startup_paid=su_paid,
        shutdown_paid=sd_paid,
        satisfied=tuple(satisfied),
        shed=tuple(shed),
    )


def extract_rt_schedule(
    fleet: Fleet,
    rt_series: NetLoadSeries,
    values: Mapping[str, float],
) -> Schedule:
    """Turn real-time solver values into a schedule on the fine grid."""
    N = rt_series.n
    grid = TimePartition((rt_series.step_minutes,) * N, rt_series.step_minutes)
    commitment, power, su_paid, sd_paid = _gather_units(fleet, N, values)
    satisfied, shed = [], []
    for i in range(N):
        dplus = max(0.0, rt_series.values[i])
        pd = min(dplus, max(0.0, float(values[f"pd[{i}]"])))
        satisfied.append(pd)
        shed.append(dplus - pd)
    return Schedule(
        stage="rt",
        partition=grid,
        unit_ids=fleet.unit_ids,
        commitment=commitment,
        power=power,
        startup_paid=su_paid,
        shutdown_paid=sd_paid,
        satisfied=tuple(satisfied),
        shed=tuple(shed),
    )


def cost_breakdown(schedule: Schedule, fleet: Fleet) -> CostBreakdown:
    """Euro cost split of a schedule under a fleet's prices."""
    if schedule.unit_ids != fleet.unit_ids:
        raise ValidationError("schedule units do not match the fleet")
    hours = schedule.slot_hours
    start_stop = 0.0
    op = {"baseload": 0.0, "intermediate": 0.0, "peaking": 0.0}
    for g, unit in enumerate(fleet.units):
        for j in range(schedule.num_slots):
            start_stop += schedule.startup_paid[g][j] + schedule.shutdown_paid[g][j]
            op[unit.unit_class] += unit.marginal_cost * schedule.power[g][j] * hours[j]
    shed = fleet.shed_cost * sum(s * h for s, h in zip(schedule.shed, hours))
    return CostBreakdown.from_parts(
        start_stop, op["baseload"], op["intermediate"], op["peaking"], shed
    )


def interval_costs(schedule: Schedule, fleet: Fleet) -> tuple[float, ...]:
    """Per-slot cost series (energy + start/stop + shedding), in euro."""
    if schedule.unit_ids != fleet.unit_ids:
        raise ValidationError("schedule units do not match the fleet")
    hours = schedule.slot_hours
    out = []
    for j in range(schedule.num_slots):
        c = fleet.shed_cost * schedule.shed[j] * hours[j]
        for g, unit in enumerate(fleet.units):
            c += unit.marginal_cost * schedule.power[g][j] * hours[j]
            c += schedule.startup_paid[g][j] + schedule.shutdown_paid[g][j]
        out.append(c)
    return tuple(out)
