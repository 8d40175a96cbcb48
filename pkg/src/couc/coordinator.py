"""Bilevel coordination: pick the day-ahead partition that minimizes real-time cost.

The upper level searches over time partitions; evaluating one partition means
solving the day-ahead commitment, anchoring the real-time dispatch to it, and
reading off the real-time cost.  Two search heuristics are provided: an
exhaustive greedy sweep over each movable boundary point, and a discretized
Adam iteration that probes one grid step per point and rounds its update to
the grid.  Both update all points simultaneously against the iteration-start
partition and fall back to the best single improving move whenever the
aggregated update fails to descend, so traces are non-increasing by
construction.  Fixed-resolution and clustering baselines share the same
evaluation pipeline.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import SolverFailure, ValidationError
from .milp import (
    CostBreakdown,
    Schedule,
    build_da_uc,
    build_da_uc_stochastic,
    build_rt_ed,
    cost_breakdown,
    extract_da_schedule,
    extract_rt_schedule,
    interval_costs,
)
from .model import Fleet, NetLoadSeries, ScenarioSet, aggregate_demand
from .partition import (
    AdaptiveRange,
    TimePartition,
    adaptive_range,
    adjacent_ward_merge,
    apply_point_updates,
    converged,
    uniform_partition,
)
from .solver import SolveStatus, solve_milp

# Relative tolerance for cost comparisons between partitions.
REL_TOL = 1e-9

MODE_DETERMINISTIC = "deterministic"
MODE_PROBABILISTIC = "probabilistic"


def _tol(reference: float) -> float:
    return REL_TOL * max(1.0, abs(reference))


def _strictly_better(candidate: float, reference: float) -> bool:
    return candidate < reference - _tol(reference)


def _exceeds(candidate: float, reference: float) -> bool:
    return candidate > reference + _tol(reference)


@dataclass(frozen=True)
class EvalContext:
    """Everything needed to price a partition: fleet, actuals, day-ahead view.

    In deterministic mode the day-ahead data is a single series; in
    probabilistic mode it is a scenario set.  All series must share the
    boundary grid so clustered partitions stay grid-aligned.
    """

    fleet: Fleet
    rt_series: NetLoadSeries
    da_data: Union[NetLoadSeries, ScenarioSet]
    mode: str = ""
    grid_minutes: int = 10

    def __post_init__(self) -> None:
        if self.mode == "":
            inferred = (
                MODE_DETERMINISTIC
                if isinstance(self.da_data, NetLoadSeries)
                else MODE_PROBABILISTIC
            )
            object.__setattr__(self, "mode", inferred)
        if self.mode not in (MODE_DETERMINISTIC, MODE_PROBABILISTIC):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_DETERMINISTIC and not isinstance(self.da_data, NetLoadSeries):
            raise ValidationError("deterministic mode needs a single day-ahead series")
        if self.mode == MODE_PROBABILISTIC and not isinstance(self.da_data, ScenarioSet):
            raise ValidationError("probabilistic mode needs a scenario set")
        if self.da_data.horizon_minutes != self.rt_series.horizon_minutes:
            raise ValidationError("day-ahead and real-time data cover different horizons")
        if self.rt_series.step_minutes != self.grid_minutes:
            raise ValidationError("real-time step must equal the boundary grid")
        if self.da_data.step_minutes != self.grid_minutes:
            raise ValidationError("day-ahead step must equal the boundary grid")

    @property
    def horizon_minutes(self) -> int:
        return self.rt_series.horizon_minutes

    def da_view_values(self) -> tuple[float, ...]:
        """Series the clustering initializers run on (scenario mean if stochastic)."""
        if isinstance(self.da_data, NetLoadSeries):
            return self.da_data.values
        return self.da_data.mean_values()


@dataclass(frozen=True)
class PartitionEval:
    """Result of pricing one partition through both stages."""

    rt_cost: float
    da_cost: float
    da_schedule: Schedule
    rt_schedule: Schedule
    breakdown: CostBreakdown


def evaluate_partition(ctx: EvalContext, partition: TimePartition) -> PartitionEval:
    """Solve day-ahead on the partition, anchor real time to it, return costs.

    Raises SolverFailure if either stage does not reach proven optimality or
    the extracted schedule does not reproduce the solver objective.
    """
    if partition.horizon_minutes != ctx.horizon_minutes:
        raise ValidationError("partition horizon does not match the context")
    if partition.grid_minutes != ctx.grid_minutes:
        raise ValidationError("partition grid does not match the context")
    if ctx.mode == MODE_DETERMINISTIC:
        demand_rows = [aggregate_demand(ctx.da_data, partition)]
        da_inst = build_da_uc(ctx.fleet, partition, demand_rows[0])
    else:
        demand_rows = [aggregate_demand(s, partition) for s in ctx.da_data.scenarios]
        da_inst = build_da_uc_stochastic(ctx.fleet, partition, ctx.da_data)
    da_sol = solve_milp(da_inst)
    if da_sol.status is not SolveStatus.OPTIMAL:
        raise SolverFailure(f"day-ahead stage returned {da_sol.status.value}")
    da_sched = extract_da_schedule(ctx.fleet, partition, demand_rows, da_sol.values)
    _check_accounting(cost_breakdown(da_sched, ctx.fleet).total, da_sol.objective, "day-ahead")
    rt_inst = build_rt_ed(ctx.fleet, ctx.rt_series, da_sched, partition)
    rt_sol = solve_milp(rt_inst)
    if rt_sol.status is not SolveStatus.OPTIMAL:
        raise SolverFailure(f"real-time stage returned {rt_sol.status.value}")
    rt_sched = extract_rt_schedule(ctx.fleet, ctx.rt_series, rt_sol.values)
    breakdown = cost_breakdown(rt_sched, ctx.fleet)
    _check_accounting(breakdown.total, rt_sol.objective, "real-time")
    return PartitionEval(
        rt_cost=rt_sol.objective,
        da_cost=da_sol.objective,
        da_schedule=da_sched,
        rt_schedule=rt_sched,
        breakdown=breakdown,
    )


def _check_accounting(breakdown_total: float, objective: float, label: str) -> None:
    if abs(breakdown_total - objective) > 1e-6 * max(1.0, abs(objective)):
        raise SolverFailure(
            f"{label} breakdown total {breakdown_total} does not match "
            f"solver objective {objective}"
        )


class Evaluator:
    """Memoizing evaluation front end; counts unique pipeline runs.

    `evaluate_many` deduplicates against the memo and, with n_jobs > 1,
    solves the missing partitions on a thread pool.  Results and the call
    counter depend only on the set of partitions requested, not on the
    evaluation order or thread count.
    """

    def __init__(self, ctx: EvalContext, n_jobs: int = 1) -> None:
        self.ctx = ctx
        self.n_jobs = max(1, int(n_jobs))
        self._memo: dict[tuple[int, ...], PartitionEval] = {}
        self.eval_calls = 0

    def evaluate(self, partition: TimePartition) -> PartitionEval:
        return self.evaluate_many([partition])[0]

    def evaluate_many(self, partitions: Sequence[TimePartition]) -> list[PartitionEval]:
        missing: list[TimePartition] = []
        seen: set[tuple[int, ...]] = set()
        for p in partitions:
            key = p.lengths_minutes
            if key not in self._memo and key not in seen:
                seen.add(key)
                missing.append(p)
        if missing:
            if self.n_jobs > 1 and len(missing) > 1:
                with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                    results = list(pool.map(lambda p: evaluate_partition(self.ctx, p), missing))
            else:
                results = [evaluate_partition(self.ctx, p) for p in missing]
            for p, r in zip(missing, results):
                self._memo[p.lengths_minutes] = r
            self.eval_calls += len(missing)
        return [self._memo[p.lengths_minutes] for p in partitions]


def _as_evaluator(ctx_or_ev: Union[EvalContext, Evaluator], n_jobs: int = 1) -> Evaluator:
    if isinstance(ctx_or_ev, Evaluator):
        return ctx_or_ev
    return Evaluator(ctx_or_ev, n_jobs)


@dataclass(frozen=True)
class TraceEntry:
    """One optimizer iteration: resulting partition, cost, applied moves."""

    iteration: int
    partition: TimePartition
    rt_cost: float
    moves: Mapping[int, int]
    wall_time_s: float


@dataclass(frozen=True)
class OptimizeResult:
    final: TimePartition
    final_cost: float
    trace: tuple[TraceEntry, ...]
    iterations: int
    converged: bool
    eval_calls: int

    @property
    def final_eval_key(self) -> tuple[int, ...]:
        return self.final.lengths_minutes


def _select_candidate(costs: Mapping[int, float], current: int) -> int:
    """Lowest-cost length; ties keep the current length, then the smallest
    shift, then the leftmost candidate."""
    best = min(costs.values())
    tol = _tol(best)
    ties = [c for c, v in costs.items() if v <= best + tol]
    if current in ties:
        return current
    return min(ties, key=lambda c: (abs(c - current), c))


def greedy_point_search(
    ctx_or_ev: Union[EvalContext, Evaluator],
    partition: TimePartition,
    q: int,
) -> int:
    """Exhaustively price every admissible length for point q; return the best."""
    ev = _as_evaluator(ctx_or_ev)
    rng = adaptive_range(partition, q)
    cands = rng.candidates()
    if not cands:
        raise ValidationError(f"point {q} has no admissible candidate lengths")
    current = partition.lengths_minutes[q]
    base = ev.evaluate(partition).rt_cost
    trials = [c for c in cands if c != current]
    results = ev.evaluate_many([apply_point_updates(partition, {q: c}) for c in trials])
    costs = {current: base}
    for c, r in zip(trials, results):
        costs[c] = r.rt_cost
    return _select_candidate(costs, current)


def _apply_with_safeguard(
    ev: Evaluator,
    part: TimePartition,
    cost: float,
    decisions: Mapping[int, int],
    move_costs: Mapping[tuple[int, int], float],
) -> tuple[TimePartition, float, dict[int, int]]:
    """Aggregate per-point decisions; keep descent monotone.

    If the simultaneous update does not strictly improve, fall back to the
    best single strictly-improving move (by cost, then point index, then
    length); with none, stand still.
    """
    moves = {q: x for q, x in decisions.items() if x != part.lengths_minutes[q]}
    if not moves:
        return part, cost, {}
    agg = apply_point_updates(part, moves)
    agg_cost = ev.evaluate(agg).rt_cost
    if _strictly_better(agg_cost, cost):
        return agg, agg_cost, moves
    improving = [
        (c, q, x) for (q, x), c in move_costs.items()
        if x != part.lengths_minutes[q] and _strictly_better(c, cost)
    ]
    if improving:
        c, q, x = min(improving)
        single = {q: x}
        return apply_point_updates(part, single), c, single
    return part, cost, {}


def greedy_optimize(
    ctx_or_ev: Union[EvalContext, Evaluator],
    initial: TimePartition,
    max_iter: int = 50,
    n_jobs: int = 1,
) -> OptimizeResult:
    """Coordinate sweep: per iteration, pick the best length for every movable
    point against the iteration-start partition, then aggregate."""
    ev = _as_evaluator(ctx_or_ev, n_jobs)
    t0 = time.perf_counter()
    part = initial
    cost = ev.evaluate(part).rt_cost
    trace = [TraceEntry(0, part, cost, {}, time.perf_counter() - t0)]
    done = False
    iterations = 0
    for k in range(1, max_iter + 1):
        iterations = k
        movable = range(part.num_periods - 1)
        trial_index: list[tuple[int, int]] = []
        trial_parts: list[TimePartition] = []
        for q in movable:
            rng = adaptive_range(part, q)
            cands = rng.candidates()
            if not cands:
                raise ValidationError(f"point {q} has no admissible candidate lengths")
            for c in cands:
                if c != part.lengths_minutes[q]:
                    trial_index.append((q, c))
                    trial_parts.append(apply_point_updates(part, {q: c}))
        results = ev.evaluate_many(trial_parts)
        move_costs = {qc: r.rt_cost for qc, r in zip(trial_index, results)}
        decisions: dict[int, int] = {}
        for q in movable:
            current = part.lengths_minutes[q]
            costs = {current: cost}
            for (qq, c), v in move_costs.items():
                if qq == q:
                    costs[c] = v
            decisions[q] = _select_candidate(costs, current)
        nxt, nxt_cost, moves = _apply_with_safeguard(ev, part, cost, decisions, move_costs)
        trace.append(TraceEntry(k, nxt, nxt_cost, moves, time.perf_counter() - t0))
        if converged(part, nxt):
            done = True
            break
        part, cost = nxt, nxt_cost
    return OptimizeResult(part, cost, tuple(trace), iterations, done, ev.eval_calls)


@dataclass(frozen=True)
class AdamHyper:
    """Step-size and moment parameters for the discretized Adam updates."""

    alpha: float = 3.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ValidationError("alpha must be positive")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ValidationError("beta parameters must lie in [0, 1)")
        if self.eps <= 0.0:
            raise ValidationError("eps must be positive")


@dataclass
class AdamState:
    """First/second moment estimates per movable point plus the shared counter."""

    m: list[float]
    v: list[float]
    k: int
    hyper: AdamHyper

    @staticmethod
    def fresh(num_points: int, hyper: AdamHyper | None = None) -> "AdamState":
        return AdamState([0.0] * num_points, [0.0] * num_points, 0, hyper or AdamHyper())


def adam_point_gradient(
    ctx_or_ev: Union[EvalContext, Evaluator],
    partition: TimePartition,
    q: int,
) -> float:
    """Finite-difference cost gradient for point q, one grid step wide.

    Centered difference (C(x-L) - C(x+L)) / (2L) when both one-step shifts
    stay inside the adaptive range, the matching one-sided difference when
    only one does, and 0 when neither does.
    """
    ev = _as_evaluator(ctx_or_ev)
    rng = adaptive_range(partition, q)
    grid = partition.grid_minutes
    x = partition.lengths_minutes[q]
    left_ok = rng.contains(x - grid)
    right_ok = rng.contains(x + grid)
    if not left_ok and not right_ok:
        return 0.0
    if left_ok and right_ok:
        pair = ev.evaluate_many(
            [
                apply_point_updates(partition, {q: x - grid}),
                apply_point_updates(partition, {q: x + grid}),
            ]
        )
        return (pair[0].rt_cost - pair[1].rt_cost) / (2.0 * grid)
    base = ev.evaluate(partition).rt_cost
    if right_ok:
        c_right = ev.evaluate(apply_point_updates(partition, {q: x + grid})).rt_cost
        return (base - c_right) / grid
    c_left = ev.evaluate(apply_point_updates(partition, {q: x - grid})).rt_cost
    return (c_left - base) / grid


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0.0 else int(math.ceil(x - 0.5))


def adam_point_step(
    state: AdamState,
    q: int,
    gradient: float,
    rng: AdaptiveRange,
    x_q: int,
) -> tuple[int, int]:
    """One Adam update for point q; returns (proposed length, raw step minutes).

    Updates the moment estimates in place (the shared counter advances once
    per sweep, outside this call), forms the bias-corrected step, rounds it
    to whole grid units, and clamps the shifted length to the nearest
    admissible grid point.  A zero rounded step keeps the current length.
    """
    h = state.hyper
    state.m[q] = h.beta1 * state.m[q] + (1.0 - h.beta1) * gradient
    state.v[q] = h.beta2 * state.v[q] + (1.0 - h.beta2) * gradient * gradient
    steps = state.k + 1
    m_hat = state.m[q] / (1.0 - h.beta1 ** steps)
    v_hat = state.v[q] / (1.0 - h.beta2 ** steps)
    raw = h.alpha * m_hat / math.sqrt(v_hat + h.eps)
    delta = _round_half_away(raw) * rng.grid_minutes
    if delta == 0:
        return x_q, 0
    target = x_q - delta
    cand = rng.nearest_candidate(target)
    if cand is None:
        return x_q, delta
    return cand, delta


def adam_optimize(
    ctx_or_ev: Union[EvalContext, Evaluator],
    initial: TimePartition,
    hyper: AdamHyper | None = None,
    max_iter: int = 50,
    n_jobs: int = 1,
) -> OptimizeResult:
    """Discretized Adam over all movable points with descent safeguards.

    Per iteration: finite-difference gradients for every point, simultaneous
    Adam proposals, a point-level safeguard (a proposal that prices worse
    than the iteration-start cost tries the opposite-sign step, else stands
    still), then the same aggregate safeguard as the greedy sweep.
    """
    ev = _as_evaluator(ctx_or_ev, n_jobs)
    hyper = hyper or AdamHyper()
    t0 = time.perf_counter()
    part = initial
    cost = ev.evaluate(part).rt_cost
    trace = [TraceEntry(0, part, cost, {}, time.perf_counter() - t0)]
    state = AdamState.fresh(part.num_periods - 1, hyper)
    done = False
    iterations = 0
    for k in range(1, max_iter + 1):
        iterations = k
        grid = part.grid_minutes
        movable = range(part.num_periods - 1)
        ranges = {q: adaptive_range(part, q) for q in movable}
        probe_index: list[tuple[int, str]] = []
        probe_parts: list[TimePartition] = []
        for q in movable:
            x = part.lengths_minutes[q]
            if ranges[q].contains(x - grid):
                probe_index.append((q, "left"))
                probe_parts.append(apply_point_updates(part, {q: x - grid}))
            if ranges[q].contains(x + grid):
                probe_index.append((q, "right"))
                probe_parts.append(apply_point_updates(part, {q: x + grid}))
        probe_costs = {
            key: r.rt_cost for key, r in zip(probe_index, ev.evaluate_many(probe_parts))
        }
        gradients: dict[int, float] = {}
        for q in movable:
            left = probe_costs.get((q, "left"))
            right = probe_costs.get((q, "right"))
            if left is None and right is None:
                gradients[q] = 0.0
            elif left is not None and right is not None:
                gradients[q] = (left - right) / (2.0 * grid)
            elif right is not None:
                gradients[q] = (cost - right) / grid
            else:
                gradients[q] = (left - cost) / grid
        proposals: dict[int, int] = {}
        deltas: dict[int, int] = {}
        for q in movable:
            x_alt, delta = adam_point_step(state, q, gradients[q], ranges[q], part.lengths_minutes[q])
            proposals[q] = x_alt
            deltas[q] = delta
        state.k += 1
        changed = [q for q in movable if proposals[q] != part.lengths_minutes[q]]
        prop_results = ev.evaluate_many(
            [apply_point_updates(part, {q: proposals[q]}) for q in changed]
        )
        move_costs: dict[tuple[int, int], float] = {}
        decisions = {q: part.lengths_minutes[q] for q in movable}
        need_opposite: list[tuple[int, int]] = []
        for q, r in zip(changed, prop_results):
            move_costs[(q, proposals[q])] = r.rt_cost
            if not _exceeds(r.rt_cost, cost):
                decisions[q] = proposals[q]
            else:
                opp = ranges[q].nearest_candidate(part.lengths_minutes[q] + deltas[q])
                if opp is not None and opp not in (part.lengths_minutes[q], proposals[q]):
                    need_opposite.append((q, opp))
        opp_results = ev.evaluate_many(
            [apply_point_updates(part, {q: o}) for q, o in need_opposite]
        )
        for (q, o), r in zip(need_opposite, opp_results):
            move_costs[(q, o)] = r.rt_cost
            if not _exceeds(r.rt_cost, cost):
                decisions[q] = o
        nxt, nxt_cost, moves = _apply_with_safeguard(ev, part, cost, decisions, move_costs)
        trace.append(TraceEntry(k, nxt, nxt_cost, moves, time.perf_counter() - t0))
        if converged(part, nxt):
            done = True
            break
        part, cost = nxt, nxt_cost
    return OptimizeResult(part, cost, tuple(trace), iterations, done, ev.eval_calls)


def warm_start_offline(
    ctx_or_ev: Union[EvalContext, Evaluator],
    num_periods: int,
    hyper: AdamHyper | None = None,
    max_iter: int = 50,
    n_jobs: int = 1,
) -> TimePartition:
    """Offline stage of the warm start: cluster the early forecast, then run
    the Adam search against that forecast; the result seeds the online run."""
    ev = _as_evaluator(ctx_or_ev, n_jobs)
    init = adjacent_ward_merge(
        ev.ctx.da_view_values(), num_periods, ev.ctx.grid_minutes
    )
    return adam_optimize(ev, init, hyper, max_iter, n_jobs).final


def online_refine(
    ctx_or_ev: Union[EvalContext, Evaluator],
    offline_partition: TimePartition,
    hyper: AdamHyper | None = None,
    max_iter: int = 50,
    n_jobs: int = 1,
) -> OptimizeResult:
    """Online stage of the warm start: refine the offline partition against
    the operating-day context."""
    ev = _as_evaluator(ctx_or_ev, n_jobs)
    if offline_partition.horizon_minutes != ev.ctx.horizon_minutes:
        raise ValidationError("offline partition horizon does not match the online context")
    return adam_optimize(ev, offline_partition, hyper, max_iter, n_jobs)


@dataclass(frozen=True)
class BaselineResult:
    partition: TimePartition
    evaluation: PartitionEval

    @property
    def rt_cost(self) -> float:
        return self.evaluation.rt_cost

    @property
    def breakdown(self) -> CostBreakdown:
        return self.evaluation.breakdown


def baseline_ch(ctx_or_ev: Union[EvalContext, Evaluator], num_periods: int) -> BaselineResult:
    """Uniform fixed-resolution baseline."""
    ev = _as_evaluator(ctx_or_ev)
    part = uniform_partition(num_periods, ev.ctx.horizon_minutes, ev.ctx.grid_minutes)
    return BaselineResult(part, ev.evaluate(part))


def baseline_ta(ctx_or_ev: Union[EvalContext, Evaluator], num_periods: int) -> BaselineResult:
    """Cluster the day-ahead net-load view into adjacent periods."""
    ev = _as_evaluator(ctx_or_ev)
    part = adjacent_ward_merge(ev.ctx.da_view_values(), num_periods, ev.ctx.grid_minutes)
    return BaselineResult(part, ev.evaluate(part))


def baseline_na(ctx_or_ev: Union[EvalContext, Evaluator], num_periods: int) -> BaselineResult:
    """Cluster the real-time cost series of an hourly uniform run.

    Prices the hourly partition first, clusters its per-interval real-time
    cost onto `num_periods` periods, then prices the clustered partition.
    """
    ev = _as_evaluator(ctx_or_ev)
    ctx = ev.ctx
    horizon = ctx.horizon_minutes
    if horizon % 60 != 0:
        raise ValidationError("cost-series clustering needs a whole number of hours")
    hourly = uniform_partition(horizon // 60, horizon, ctx.grid_minutes)
    hourly_eval = ev.evaluate(hourly)
    costs = interval_costs(hourly_eval.rt_schedule, ctx.fleet)
    part = adjacent_ward_merge(costs, num_periods, ctx.rt_series.step_minutes)
    return BaselineResult(part, ev.evaluate(part))
