"""Instance construction, anchoring, extraction, and cost accounting."""

import pytest

from couc import (
    Constraint,
    CostBreakdown,
    Fleet,
    NetLoadSeries,
    ProblemInstance,
    ScenarioSet,
    SolverFailure,
    TimePartition,
    UnitSpec,
    ValidationError,
    Variable,
    aggregate_demand,
    build_da_uc,
    build_da_uc_stochastic,
    build_rt_ed,
    cost_breakdown,
    da_to_rt_index_map,
    extract_da_schedule,
    extract_rt_schedule,
    interval_costs,
    solve_milp,
    uniform_partition,
)

from conftest import flat_series


def solve_and_extract_da(fleet, partition, demand):
    inst = build_da_uc(fleet, partition, demand)
    sol = solve_milp(inst)
    assert sol.optimal
    return inst, sol, extract_da_schedule(fleet, partition, [list(demand)], sol.values)


# ------------------------------------------------------------ instance checks

def test_problem_instance_validation():
    v = Variable("x", 0.0, 1.0)
    with pytest.raises(ValidationError):
        ProblemInstance((v, v), ())
    with pytest.raises(ValidationError):
        ProblemInstance((Variable("x", 2.0, 1.0),), ())
    with pytest.raises(ValidationError):
        ProblemInstance((Variable("x", 0.0, 2.0, is_binary=True),), ())
    with pytest.raises(ValidationError):
        ProblemInstance((v,), (Constraint("c", ((1, 1.0),), "<=", 0.0),))
    with pytest.raises(ValidationError):
        ProblemInstance((v,), (Constraint("c", ((0, 1.0),), "<>", 0.0),))


def test_lp_text_rendering_is_deterministic():
    inst = ProblemInstance(
        (
            Variable("x", 0.0, 10.0, obj=2.0),
            Variable("y", 0.0, 1.0, is_binary=True, obj=-1.0),
        ),
        (Constraint("cap", ((0, 1.0), (1, -3.0)), "<=", 5.0),),
        objective_constant=7.0,
    )
    text = inst.to_lp_text()
    assert text == inst.to_lp_text()
    assert text.splitlines() == [
        "Minimize",
        " obj: 2.0 x - 1.0 y + 7.0",
        "Subject To",
        " cap: 1.0 x - 3.0 y <= 5.0",
        "Bounds",
        " 0.0 <= x <= 10.0",
        " 0.0 <= y <= 1.0",
        "Binaries",
        " y",
        "End",
    ]


def test_objective_value_includes_constant():
    inst = ProblemInstance(
        (Variable("x", 0.0, 10.0, obj=2.0),), (), objective_constant=3.0
    )
    assert inst.objective_value({"x": 4.0}) == pytest.approx(11.0)


# -------------------------------------------------------------- day-ahead UC

def test_single_unit_single_period_cost(one_unit_fleet):
    part = TimePartition((60,))
    inst, sol, sched = solve_and_extract_da(one_unit_fleet, part, (50.0,))
    # startup 50 + 50 MW * 20 eur/MWh * 1 h
    assert sol.objective == pytest.approx(1050.0)
    assert sched.commitment == ((1,),)
    assert sched.power == ((50.0,),)
    assert sched.shed == (0.0,)
    assert cost_breakdown(sched, one_unit_fleet).total == pytest.approx(1050.0)


def test_negative_demand_clamps_to_zero(one_unit_fleet):
    part = TimePartition((60,))
    inst, sol, sched = solve_and_extract_da(one_unit_fleet, part, (-25.0,))
    assert sol.objective == pytest.approx(0.0)
    assert sched.commitment == ((0,),)
    assert sched.satisfied == (0.0,)


def test_shedding_when_demand_exceeds_capacity(one_unit_fleet):
    part = TimePartition((60,))
    inst, sol, sched = solve_and_extract_da(one_unit_fleet, part, (130.0,))
    # 100 MW served, 30 MW shed for one hour
    assert sched.power == ((100.0,),)
    assert sched.shed == (30.0,)
    assert sol.objective == pytest.approx(50.0 + 100.0 * 20.0 + 30.0 * 3000.0)


def test_min_up_keeps_unit_on_into_cheap_period():
    fleet = Fleet(
        (
            UnitSpec(
                "g1", "baseload", 40.0, 100.0, 600.0, 600.0,
                min_up=2.0, min_down=2.0, marginal_cost=20.0,
                startup_cost=50.0, shutdown_cost=5.0,
            ),
        ),
        3000.0,
    )
    part = TimePartition((60, 60))
    _, _, sched = solve_and_extract_da(fleet, part, (80.0, 0.0))
    # serving period 0 forces the unit through period 1 at its minimum
    assert sched.commitment == ((1, 1),)
    assert sched.power[0][1] == pytest.approx(40.0)


def test_initial_state_forces_commitment_prefix():
    stuck_on = UnitSpec(
        "g1", "baseload", 40.0, 100.0, 600.0, 600.0,
        min_up=3.0, min_down=0.0, marginal_cost=20.0,
        startup_cost=0.0, shutdown_cost=0.0,
        init_on=True, init_power=40.0, init_hours_in_state=1.0,
    )
    inst = build_da_uc(Fleet((stuck_on,), 3000.0), TimePartition((60, 60, 60)), (0.0, 0.0, 0.0))
    names = {v.name: v for v in inst.variables}
    # 1 hour in state + 2 periods reaches the 3-hour minimum up time
    assert (names["u[0][0]"].lb, names["u[0][1]"].lb, names["u[0][2]"].lb) == (1.0, 1.0, 0.0)

    stuck_off = UnitSpec(
        "g2", "baseload", 40.0, 100.0, 600.0, 600.0,
        min_up=0.0, min_down=2.0, marginal_cost=20.0,
        startup_cost=0.0, shutdown_cost=0.0,
        init_on=False, init_hours_in_state=1.0,
    )
    inst = build_da_uc(Fleet((stuck_off,), 3000.0), TimePartition((60, 60)), (50.0, 50.0))
    names = {v.name: v for v in inst.variables}
    assert names["u[0][0]"].ub == 0.0
    assert names["u[0][1]"].ub == 1.0


def test_ramp_limits_power_from_initial_level():
    slowpoke = UnitSpec(
        "g1", "baseload", 0.0, 200.0, 60.0, 60.0,
        min_up=0.0, min_down=0.0, marginal_cost=20.0,
        startup_cost=0.0, shutdown_cost=0.0,
    )
    fleet = Fleet((slowpoke,), 3000.0)
    part = TimePartition((60, 60))
    _, _, sched = solve_and_extract_da(fleet, part, (200.0, 200.0))
    # from 0 MW the unit can reach 60 in period 0 and 120 in period 1
    assert sched.power == ((60.0, 120.0),)
    assert sched.shed == pytest.approx((140.0, 80.0))


def test_start_stop_rows_only_when_priced(one_unit_fleet, mixed_fleet):
    part = uniform_partition(2, 120)
    inst = build_da_uc(one_unit_fleet, part, (50.0, 50.0))
    names = [c.name for c in inst.constraints]
    assert any(n.startswith("start[0]") for n in names)
    assert not any(n.startswith("stop[0]") for n in names)  # shutdown is free

    free = UnitSpec(
        "g1", "peaking", 0.0, 50.0, 600.0, 600.0, 0.0, 0.0, 100.0, 0.0, 0.0
    )
    inst = build_da_uc(Fleet((free,), 3000.0), part, (10.0, 10.0))
    names = [c.name for c in inst.constraints]
    assert not any(n.startswith(("start[", "stop[")) for n in names)


def test_transition_charge_bounds_are_finite(mixed_fleet):
    inst = build_da_uc(mixed_fleet, uniform_partition(3, 180), (100.0, 120.0, 90.0))
    for v in inst.variables:
        if v.name.startswith("su["):
            g = int(v.name[3])
            assert v.ub == mixed_fleet.units[g].startup_cost
        if v.name.startswith("sd["):
            g = int(v.name[3])
            assert v.ub == mixed_fleet.units[g].shutdown_cost


def test_su_charge_appears_exactly_on_startups(mixed_fleet):
    part = uniform_partition(4, 240)
    demand = (60.0, 300.0, 300.0, 60.0)
    _, _, sched = solve_and_extract_da(mixed_fleet, part, demand)
    for g, unit in enumerate(mixed_fleet.units):
        prev = 1 if unit.init_on else 0
        for j in range(4):
            cur = sched.commitment[g][j]
            expected = unit.startup_cost if (prev, cur) == (0, 1) else 0.0
            assert sched.startup_paid[g][j] == pytest.approx(expected)
            prev = cur


def test_zero_length_periods_are_skipped(one_unit_fleet):
    inst_a = build_da_uc(one_unit_fleet, TimePartition((0, 60, 60)), (50.0, 70.0))
    inst_b = build_da_uc(one_unit_fleet, TimePartition((60, 60)), (50.0, 70.0))
    assert solve_milp(inst_a).objective == pytest.approx(solve_milp(inst_b).objective)


# ------------------------------------------------------- stochastic day-ahead

def test_single_scenario_instance_matches_deterministic(one_unit_fleet):
    part = TimePartition((30, 30))
    series = NetLoadSeries(10, (40.0, 50.0, 60.0, 70.0, 80.0, 90.0))
    det = build_da_uc(one_unit_fleet, part, aggregate_demand(series, part))
    sto = build_da_uc_stochastic(one_unit_fleet, part, ScenarioSet((series,)))
    assert det.to_lp_text() == sto.to_lp_text()


def test_stochastic_objective_averages_shedding(one_unit_fleet):
    part = TimePartition((60,))
    low = flat_series(90.0, 6)
    high = flat_series(130.0, 6)
    inst = build_da_uc_stochastic(one_unit_fleet, part, ScenarioSet((low, high)))
    sol = solve_milp(inst)
    # serve 100 MW; scenario means: shed 0 and 30 -> average 15 MWh at 3000
    assert sol.objective == pytest.approx(50.0 + 100.0 * 20.0 + 15.0 * 3000.0)
    with pytest.raises(ValidationError):
        build_da_uc_stochastic(one_unit_fleet, TimePartition((30,)), ScenarioSet((low,)))


# ---------------------------------------------------------- real-time anchor

def test_da_to_rt_index_map():
    assert da_to_rt_index_map(TimePartition((20, 10, 30)), 10) == (
        range(0, 2),
        range(2, 3),
        range(3, 6),
    )
    assert da_to_rt_index_map(TimePartition((0, 30, 30)), 10)[0] == range(0, 0)
    with pytest.raises(ValidationError):
        da_to_rt_index_map(TimePartition((20, 10)), 15)


def test_rt_fixing_by_unit_class(mixed_fleet):
    part = uniform_partition(2, 120)
    series = flat_series(150.0, 12)
    demand = aggregate_demand(series, part)
    _, _, da = solve_and_extract_da(mixed_fleet, part, demand)
    rt = build_rt_ed(mixed_fleet, series, da, part)
    names = {v.name: v for v in rt.variables}
    for i in range(12):
        slot = 0 if i < 6 else 1
        # baseload: power and commitment pinned to the day-ahead plan
        assert names[f"p[0][{i}]"].lb == names[f"p[0][{i}]"].ub == da.power[0][slot]
        assert names[f"u[0][{i}]"].lb == names[f"u[0][{i}]"].ub == float(da.commitment[0][slot])
        # intermediate: commitment pinned, power free up to pmax
        assert names[f"u[1][{i}]"].lb == names[f"u[1][{i}]"].ub == float(da.commitment[1][slot])
        assert not names[f"u[1][{i}]"].is_binary
        assert names[f"p[1][{i}]"].ub == mixed_fleet.units[1].p_max
        # peaking: commitment re-decided
        assert names[f"u[2][{i}]"].is_binary
    assert rt.num_binaries == 12


def test_rt_rejects_mismatched_inputs(mixed_fleet, one_unit_fleet):
    part = uniform_partition(2, 120)
    series = flat_series(150.0, 12)
    _, _, da = solve_and_extract_da(mixed_fleet, part, aggregate_demand(series, part))
    with pytest.raises(ValidationError):
        build_rt_ed(mixed_fleet, series, da, uniform_partition(3, 120))
    with pytest.raises(ValidationError):
        build_rt_ed(one_unit_fleet, series, da, part)
    with pytest.raises(ValidationError):
        build_rt_ed(mixed_fleet, flat_series(150.0, 6), da, part)
    rt_inst = build_rt_ed(mixed_fleet, series, da, part)
    rt_sched = extract_rt_schedule(mixed_fleet, series, solve_milp(rt_inst).values)
    with pytest.raises(ValidationError):
        build_rt_ed(mixed_fleet, series, rt_sched, part)


# --------------------------------------------------------- cost bookkeeping

def test_cost_breakdown_parts_and_interval_costs(mixed_fleet):
    part = uniform_partition(2, 120)
    series = NetLoadSeries(10, (80.0,) * 6 + (260.0,) * 6)
    demand = aggregate_demand(series, part)
    _, sol, da = solve_and_extract_da(mixed_fleet, part, demand)
    b = cost_breakdown(da, mixed_fleet)
    assert b.total == pytest.approx(sol.objective)
    assert b.total == pytest.approx(
        b.start_stop + b.op_baseload + b.op_intermediate + b.op_peaking + b.shed
    )
    per_slot = interval_costs(da, mixed_fleet)
    assert len(per_slot) == da.num_slots
    assert sum(per_slot) == pytest.approx(b.total)


def test_cost_breakdown_rejects_inconsistent_totals():
    with pytest.raises(ValidationError):
        CostBreakdown(1.0, 1.0, 1.0, 1.0, 1.0, 99.0)
    ok = CostBreakdown.from_parts(1.0, 2.0, 3.0, 4.0, 5.0)
    assert ok.total == pytest.approx(15.0)


def test_extraction_rejects_fractional_commitment(one_unit_fleet):
    part = TimePartition((60,))
    inst = build_da_uc(one_unit_fleet, part, (50.0,))
    values = dict(solve_milp(inst).values)
    values["u[0][0]"] = 0.4
    with pytest.raises(SolverFailure):
        extract_da_schedule(one_unit_fleet, part, [[50.0]], values)
