"""Shared fixtures: small fleets and flat series that solve in milliseconds."""

import pytest

from couc import Fleet, NetLoadSeries, UnitSpec


@pytest.fixture
def one_unit_fleet() -> Fleet:
    """Single baseload unit with a startup charge; shedding priced at 3000."""
    return Fleet(
        (
            UnitSpec(
                unit_id="g1",
                unit_class="baseload",
                p_min=10.0,
                p_max=100.0,
                ramp_up=600.0,
                ramp_down=600.0,
                min_up=0.0,
                min_down=0.0,
                marginal_cost=20.0,
                startup_cost=50.0,
                shutdown_cost=0.0,
            ),
        ),
        shed_cost=3000.0,
    )


@pytest.fixture
def mixed_fleet() -> Fleet:
    """One unit of each class, generous ramps, short min up/down."""
    return Fleet(
        (
            UnitSpec("b1", "baseload", 40.0, 200.0, 1200.0, 1200.0, 1.0, 1.0, 20.0, 400.0, 40.0),
            UnitSpec("m1", "intermediate", 20.0, 120.0, 900.0, 900.0, 0.5, 0.5, 60.0, 120.0, 12.0),
            UnitSpec("p1", "peaking", 5.0, 80.0, 1800.0, 1800.0, 0.0, 0.0, 150.0, 30.0, 3.0),
        ),
        shed_cost=3000.0,
    )


def flat_series(value: float, n: int, step_minutes: int = 10) -> NetLoadSeries:
    return NetLoadSeries(step_minutes, (float(value),) * n)


@pytest.fixture
def flat60() -> NetLoadSeries:
    """One hour of 10-minute intervals at a constant 60 MW."""
    return flat_series(60.0, 6)
