"""Synthetic desk-scale corpus shared by the tests and the demo scripts.

All instances are deterministic functions of a seed.  The standard fleet has
one unit per class; its ramp rates are chosen so that any commitment change
can be executed within a single 10-minute interval (ramp >= 6 * p_min for
units whose real-time power is free), which keeps every real-time stage
feasible regardless of how the day-ahead stage is partitioned.
"""

from __future__ import annotations

import numpy as np

from .model import (
    CapCrossing,
    Fleet,
    NetLoadSeries,
    RampSpike,
    ScenarioSet,
    SynthProfile,
    UnitSpec,
    synth_netload,
)

DEFAULT_SHED_COST = 3000.0
BASELOAD_CAP_MW = 800.0


def standard_fleet(
    shed_cost: float = DEFAULT_SHED_COST,
    cap_mw: float = BASELOAD_CAP_MW,
) -> Fleet:
    """One cheap baseload unit capped at `cap_mw`, one mid-cost intermediate
    unit with a meaningful startup price, one fast expensive peaker."""
    return Fleet(
        (
            UnitSpec(
                unit_id="base1",
                unit_class="baseload",
                p_min=0.3 * cap_mw,
                p_max=cap_mw,
                ramp_up=1500.0,
                ramp_down=1500.0,
                min_up=4.0,
                min_down=4.0,
                marginal_cost=20.0,
                startup_cost=6000.0,
                shutdown_cost=600.0,
            ),
            UnitSpec(
                unit_id="mid1",
                unit_class="intermediate",
                p_min=50.0,
                p_max=400.0,
                ramp_up=600.0,
                ramp_down=600.0,
                min_up=2.0,
                min_down=2.0,
                marginal_cost=60.0,
                startup_cost=900.0,
                shutdown_cost=90.0,
            ),
            UnitSpec(
                unit_id="peak1",
                unit_class="peaking",
                p_min=10.0,
                p_max=300.0,
                ramp_up=1800.0,
                ramp_down=1800.0,
                min_up=0.0,
                min_down=0.0,
                marginal_cost=150.0,
                startup_cost=150.0,
                shutdown_cost=15.0,
            ),
        ),
        shed_cost,
    )


def alignment_instance() -> tuple[Fleet, NetLoadSeries]:
    """Six-hour instance whose net load oscillates across the baseload cap.

    The crossings fall away from hour boundaries (a slow drift plus a faster
    oscillation), so hour-aligned partitions straddle the cap and pay
    avoidable intermediate-unit start/stop cost in real time.
    """
    fleet = standard_fleet()
    profile = SynthProfile(
        base_mw=790.0,
        amplitude_mw=6.0,
        cap_crossing=CapCrossing(BASELOAD_CAP_MW, 12.0),
        noise_mw=1.5,
        n=36,
        step_minutes=10,
    )
    return fleet, synth_netload(profile, seed=7)


def duck_instance(seed: int, n: int = 36) -> tuple[Fleet, NetLoadSeries]:
    """Valley-to-peak profile with a late demand step, six hours by default."""
    fleet = standard_fleet()
    profile = SynthProfile(
        base_mw=600.0,
        amplitude_mw=230.0,
        cap_crossing=CapCrossing(BASELOAD_CAP_MW, 12.0),
        ramp_spike=RampSpike(90.0, n - 10 + (seed % 5)),
        noise_mw=8.0,
        n=n,
        step_minutes=10,
    )
    return fleet, synth_netload(profile, seed=seed)


def sweep_instance(seed: int) -> tuple[Fleet, NetLoadSeries]:
    """Twelve-hour smooth profile whose horizon divides evenly for every T in
    {1, 2, 3, 6, 12, 24} while keeping each period boundary movable.

    Three harmonics with seeded phases keep any uniform grid from lining up
    with the swing, and the profile is noise-free so variance clustering
    refines gracefully as T grows.  Values stay below the baseload output
    limit: costs come from how well a partition tracks the swing, not from
    crossing events.
    """
    fleet = standard_fleet()
    rng = np.random.default_rng(seed + 41_000)
    n = 72
    t = np.arange(n) / n
    a1 = 130.0 + rng.uniform(-15.0, 15.0)
    a2 = 50.0 + rng.uniform(-10.0, 10.0)
    a3 = 20.0 + rng.uniform(-5.0, 5.0)
    p1, p2, p3 = rng.uniform(0.0, 1.0, size=3)
    vals = (
        560.0
        + a1 * np.sin(2.0 * np.pi * (t - p1))
        + a2 * np.sin(4.0 * np.pi * (t - p2))
        + a3 * np.sin(6.0 * np.pi * (t - p3))
    )
    return fleet, NetLoadSeries(10, tuple(float(v) for v in vals))


def wide_range_instance(seed: int) -> tuple[Fleet, NetLoadSeries]:
    """Full-day profile used where each movable point has many candidates."""
    fleet = standard_fleet()
    profile = SynthProfile(
        base_mw=600.0,
        amplitude_mw=250.0,
        cap_crossing=CapCrossing(BASELOAD_CAP_MW, 15.0),
        noise_mw=6.0,
        n=144,
        step_minutes=10,
    )
    return fleet, synth_netload(profile, seed=seed)


def forecast_actual_pair(
    seed: int,
    sigma_mw: float = 4.0,
    n: int = 36,
) -> tuple[NetLoadSeries, NetLoadSeries]:
    """An early forecast and the operating-day actuals it imperfectly predicts."""
    _, forecast = duck_instance(seed, n)
    rng = np.random.default_rng(seed + 90_001)
    actual = tuple(
        float(v + sigma_mw * e) for v, e in zip(forecast.values, rng.standard_normal(n))
    )
    return forecast, NetLoadSeries(forecast.step_minutes, actual)


def scenario_set_around(
    series: NetLoadSeries,
    num_scenarios: int,
    sigma_mw: float,
    seed: int,
) -> ScenarioSet:
    """Equiprobable scenarios: the series plus independent Gaussian noise.

    With one scenario and zero noise this is exactly the input series.
    """
    rng = np.random.default_rng(seed)
    scenarios = []
    for _ in range(num_scenarios):
        if sigma_mw > 0.0:
            noise = sigma_mw * rng.standard_normal(series.n)
            values = tuple(float(v + e) for v, e in zip(series.values, noise))
        else:
            values = series.values
        scenarios.append(NetLoadSeries(series.step_minutes, values))
    return ScenarioSet(tuple(scenarios))


def random_fleet(rng: np.random.Generator, num_units: int = 2) -> Fleet:
    """Small randomized fleet for oracle-style tests.

    Ramps are at least 6.5 * p_min so any scheduled start or stop can be
    executed within one 10-minute interval.
    """
    classes = ("baseload", "intermediate", "peaking")
    units = []
    for g in range(num_units):
        p_min = float(rng.uniform(5.0, 40.0))
        p_max = p_min + float(rng.uniform(60.0, 200.0))
        ramp = max(6.5 * p_min, float(rng.uniform(100.0, 1200.0)))
        init_on = bool(rng.integers(0, 2)) if g > 0 else False
        units.append(
            UnitSpec(
                unit_id=f"g{g}",
                unit_class=classes[int(rng.integers(0, 3))],
                p_min=p_min,
                p_max=p_max,
                ramp_up=ramp,
                ramp_down=ramp,
                min_up=float(rng.integers(0, 3)),
                min_down=float(rng.integers(0, 3)),
                marginal_cost=float(rng.uniform(10.0, 120.0)),
                startup_cost=float(rng.uniform(0.0, 1200.0)),
                shutdown_cost=float(rng.uniform(0.0, 120.0)),
                init_on=init_on,
                init_power=float(rng.uniform(p_min, p_max)) if init_on else 0.0,
                init_hours_in_state=float(rng.uniform(0.0, 5.0)),
            )
        )
    worst = max(u.marginal_cost for u in units)
    return Fleet(tuple(units), worst + float(rng.uniform(500.0, 1500.0)))


def random_series(
    rng: np.random.Generator,
    fleet: Fleet,
    n: int,
    step_minutes: int = 10,
    allow_negative: bool = False,
) -> NetLoadSeries:
    """Randomized profile scaled to the fleet's total capacity."""
    cap = sum(u.p_max for u in fleet.units)
    base = float(rng.uniform(0.3, 0.8)) * cap
    amp = float(rng.uniform(0.1, 0.4)) * cap
    i = np.arange(n)
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    vals = base + amp * np.sin(2.0 * np.pi * i / n + phase)
    vals = vals + 0.05 * cap * rng.standard_normal(n)
    if allow_negative:
        dip = int(rng.integers(0, max(1, n - 3)))
        vals[dip : dip + 3] -= base + amp + 0.2 * cap
    return NetLoadSeries(step_minutes, tuple(float(v) for v in vals))
