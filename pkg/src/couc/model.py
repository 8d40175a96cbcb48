"""Fleet and net-load data model.

Covers CSV ingestion and emission for generating units and net-load series,
deterministic synthetic profile generation, scenario bundles, and the
aggregation of a fine-grained series onto a coarser time partition.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from statistics import fmean
from typing import Optional, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .partition import TimePartition

UNIT_CLASSES = ("baseload", "intermediate", "peaking")

FLEET_HEADER = (
    "id",
    "class",
    "pmin_mw",
    "pmax_mw",
    "ramp_up_mw_per_h",
    "ramp_down_mw_per_h",
    "min_up_h",
    "min_down_h",
    "cost_eur_per_mwh",
    "startup_eur",
    "shutdown_eur",
    "init_on",
    "init_p_mw",
    "init_hours",
)

NETLOAD_HEADER = ("interval_index", "net_load_mw")

# Fixed oscillation count for synthetic cap-crossing profiles.
_CAP_CYCLES = 3


@dataclass(frozen=True)
class UnitSpec:
    """Static data for one thermal generating unit."""

    unit_id: str
    unit_class: str
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float
    min_up: float
    min_down: float
    marginal_cost: float
    startup_cost: float
    shutdown_cost: float
    init_on: bool = False
    init_power: float = 0.0
    init_hours_in_state: float = math.inf

    def __post_init__(self) -> None:
        if not self.unit_id:
            raise ValidationError("unit id must be non-empty")
        if self.unit_class not in UNIT_CLASSES:
            raise ValidationError(
                f"unit {self.unit_id}: class {self.unit_class!r} not in {UNIT_CLASSES}"
            )
        if not 0.0 <= self.p_min <= self.p_max:
            raise ValidationError(
                f"unit {self.unit_id}: need 0 <= pmin <= pmax, got {self.p_min}, {self.p_max}"
            )
        if self.ramp_up <= 0.0 or self.ramp_down <= 0.0:
            raise ValidationError(f"unit {self.unit_id}: ramp rates must be positive")
        if self.min_up < 0.0 or self.min_down < 0.0:
            raise ValidationError(f"unit {self.unit_id}: min up/down times must be non-negative")
        for label, c in (
            ("cost_eur_per_mwh", self.marginal_cost),
            ("startup_eur", self.startup_cost),
            ("shutdown_eur", self.shutdown_cost),
        ):
            if c < 0.0:
                raise ValidationError(f"unit {self.unit_id}: {label} must be non-negative")
        if self.init_on:
            if not self.p_min <= self.init_power <= self.p_max:
                raise ValidationError(
                    f"unit {self.unit_id}: init_p_mw {self.init_power} outside [pmin, pmax]"
                )
        elif self.init_power != 0.0:
            raise ValidationError(f"unit {self.unit_id}: init_p_mw must be 0 when init_on is 0")
        if self.init_hours_in_state < 0.0:
            raise ValidationError(f"unit {self.unit_id}: init_hours must be non-negative")


@dataclass(frozen=True)
class Fleet:
    """A set of units plus the system-wide load shedding price."""

    units: tuple[UnitSpec, ...]
    shed_cost: float

    def __post_init__(self) -> None:
        if not isinstance(self.units, tuple):
            object.__setattr__(self, "units", tuple(self.units))
        if len(self.units) == 0:
            raise ValidationError("fleet must contain at least one unit")
        seen: set[str] = set()
        for u in self.units:
            if u.unit_id in seen:
                raise ValidationError(f"duplicate unit id {u.unit_id!r}")
            seen.add(u.unit_id)
        worst = max(u.marginal_cost for u in self.units)
        if self.shed_cost <= worst:
            raise ValidationError(
                f"shed_cost {self.shed_cost} must exceed every marginal cost (max {worst})"
            )

    @property
    def unit_ids(self) -> tuple[str, ...]:
        return tuple(u.unit_id for u in self.units)

    def by_class(self, unit_class: str) -> tuple[UnitSpec, ...]:
        return tuple(u for u in self.units if u.unit_class == unit_class)


@dataclass(frozen=True)
class NetLoadSeries:
    """Net load in MW on a uniform minute step; values may be negative."""

    step_minutes: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(self.values))
        if self.step_minutes <= 0:
            raise ValidationError(f"step_minutes must be positive, got {self.step_minutes}")
        if len(self.values) == 0:
            raise ValidationError("net-load series must be non-empty")
        for i, v in enumerate(self.values):
            if not math.isfinite(v):
                raise ValidationError(f"net load at interval {i} is not finite: {v!r}")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def horizon_minutes(self) -> int:
        return self.n * self.step_minutes


@dataclass(frozen=True)
class ScenarioSet:
    """Equiprobable net-load scenarios sharing one step and horizon."""

    scenarios: tuple[NetLoadSeries, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.scenarios, tuple):
            object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if len(self.scenarios) == 0:
            raise ValidationError("scenario set must be non-empty")
        first = self.scenarios[0]
        for s in self.scenarios[1:]:
            if s.step_minutes != first.step_minutes or s.n != first.n:
                raise ValidationError("all scenarios must share step and length")

    @property
    def num_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def step_minutes(self) -> int:
        return self.scenarios[0].step_minutes

    @property
    def n(self) -> int:
        return self.scenarios[0].n

    @property
    def horizon_minutes(self) -> int:
        return self.scenarios[0].horizon_minutes

    def mean_values(self) -> tuple[float, ...]:
        """Pointwise mean across scenarios."""
        return tuple(
            fmean(s.values[i] for s in self.scenarios) for i in range(self.n)
        )


def load_fleet(path: str, shed_cost: float) -> Fleet:
    """Read a fleet CSV; the shedding price comes from the run configuration."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty fleet file") from None
        if tuple(h.strip() for h in header) != FLEET_HEADER:
            raise ParseError(f"{path}: unexpected fleet header {header!r}")
        units = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(f.strip() == "" for f in row):
                continue
            if len(row) != len(FLEET_HEADER):
                raise ParseError(f"{path}:{lineno}: expected {len(FLEET_HEADER)} fields")
            rec = dict(zip(FLEET_HEADER, (f.strip() for f in row)))
            try:
                init_on_raw = rec["init_on"]
                if init_on_raw not in ("0", "1"):
                    raise ParseError(f"{path}:{lineno}: init_on must be 0 or 1")
                units.append(
                    UnitSpec(
                        unit_id=rec["id"],
                        unit_class=rec["class"],
                        p_min=float(rec["pmin_mw"]),
                        p_max=float(rec["pmax_mw"]),
                        ramp_up=float(rec["ramp_up_mw_per_h"]),
                        ramp_down=float(rec["ramp_down_mw_per_h"]),
                        min_up=float(rec["min_up_h"]),
                        min_down=float(rec["min_down_h"]),
                        marginal_cost=float(rec["cost_eur_per_mwh"]),
                        startup_cost=float(rec["startup_eur"]),
                        shutdown_cost=float(rec["shutdown_eur"]),
                        init_on=init_on_raw == "1",
                        init_power=float(rec["init_p_mw"]),
                        init_hours_in_state=float(rec["init_hours"]),
                    )
                )
            except ValueError as exc:
                if isinstance(exc, (ParseError, ValidationError)):
                    raise
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not units:
        raise ParseError(f"{path}: fleet file has no unit rows")
    return Fleet(tuple(units), shed_cost)


def write_fleet_csv(fleet: Fleet, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FLEET_HEADER)
        for u in fleet.units:
            writer.writerow(
                [
                    u.unit_id,
                    u.unit_class,
                    repr(u.p_min),
                    repr(u.p_max),
                    repr(u.ramp_up),
                    repr(u.ramp_down),
                    repr(u.min_up),
                    repr(u.min_down),
                    repr(u.marginal_cost),
                    repr(u.startup_cost),
                    repr(u.shutdown_cost),
                    int(u.init_on),
                    repr(u.init_power),
                    repr(u.init_hours_in_state),
                ]
            )


def load_netload_csv(path: str, step_minutes: int = 10) -> NetLoadSeries:
    """Read an `interval_index,net_load_mw` CSV with 0-based contiguous indices."""
    values: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty net-load file") from None
        if tuple(h.strip() for h in header) != NETLOAD_HEADER:
            raise ParseError(f"{path}: unexpected net-load header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(f.strip() == "" for f in row):
                continue
            if len(row) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 fields")
            try:
                idx = int(row[0])
                val = float(row[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if idx != len(values):
                raise ParseError(
                    f"{path}:{lineno}: interval_index {idx} breaks the contiguous 0-based order"
                )
            if not math.isfinite(val):
                raise ParseError(f"{path}:{lineno}: net load at interval {idx} is not finite")
            values.append(val)
    if not values:
        raise ParseError(f"{path}: net-load file has no rows")
    return NetLoadSeries(step_minutes, tuple(values))


def write_netload_csv(series: NetLoadSeries, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(NETLOAD_HEADER)
        for i, v in enumerate(series.values):
            writer.writerow([i, repr(v)])


@dataclass(frozen=True)
class CapCrossing:
    """Oscillation that pushes the profile back and forth across a capacity value."""

    cap_mw: float
    oscillation_mw: float

    def __post_init__(self) -> None:
        if self.oscillation_mw < 0.0:
            raise ValidationError("oscillation_mw must be non-negative")


@dataclass(frozen=True)
class RampSpike:
    """A persistent single-step increase applied from one interval onward."""

    magnitude_mw: float
    at_interval: int

    def __post_init__(self) -> None:
        if self.magnitude_mw < 0.0:
            raise ValidationError("ramp spike magnitude must be non-negative")
        if self.at_interval < 1:
            raise ValidationError("ramp spike must occur after the first interval")


@dataclass(frozen=True)
class SynthProfile:
    """Parameters for a deterministic synthetic net-load profile."""

    base_mw: float
    amplitude_mw: float = 0.0
    cap_crossing: Optional[CapCrossing] = None
    ramp_spike: Optional[RampSpike] = None
    noise_mw: float = 0.0
    n: int = 144
    step_minutes: int = 10

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError("profile needs at least one interval")
        if self.amplitude_mw < 0.0:
            raise ValidationError("amplitude_mw must be non-negative")
        if self.noise_mw < 0.0:
            raise ValidationError("noise_mw must be non-negative")
        if self.step_minutes <= 0:
            raise ValidationError("step_minutes must be positive")
        if self.ramp_spike is not None and self.ramp_spike.at_interval >= self.n:
            raise ValidationError("ramp spike interval beyond the end of the profile")


def synth_netload(profile: SynthProfile, seed: int) -> NetLoadSeries:
    """Generate a reproducible profile: sinusoid, optional cap oscillation,
    optional step change, Gaussian noise.

    Raises if a requested cap crossing is not actually achieved by the
    resulting values.
    """
    rng = np.random.default_rng(seed)
    i = np.arange(profile.n, dtype=float)
    vals = profile.base_mw + profile.amplitude_mw * np.sin(2.0 * np.pi * i / profile.n)
    if profile.cap_crossing is not None:
        vals = vals + profile.cap_crossing.oscillation_mw * np.sin(
            2.0 * np.pi * _CAP_CYCLES * i / profile.n
        )
    if profile.noise_mw > 0.0:
        vals = vals + profile.noise_mw * rng.standard_normal(profile.n)
    if profile.ramp_spike is not None:
        vals[profile.ramp_spike.at_interval :] += profile.ramp_spike.magnitude_mw
    if profile.cap_crossing is not None:
        cap = profile.cap_crossing.cap_mw
        if not (vals.min() < cap < vals.max()):
            raise ValidationError(
                f"profile does not cross cap {cap} MW "
                f"(range [{vals.min():.3f}, {vals.max():.3f}])"
            )
    return NetLoadSeries(profile.step_minutes, tuple(float(v) for v in vals))


def aggregate_demand(series: NetLoadSeries, partition: TimePartition) -> tuple[float, ...]:
    """Mean net load per nonzero partition period.

    Zero-length boundary periods contribute no entry.  Period boundaries must
    land on series interval boundaries.
    """
    if partition.horizon_minutes != series.horizon_minutes:
        raise ValidationError(
            f"partition covers {partition.horizon_minutes} min, "
            f"series covers {series.horizon_minutes} min"
        )
    out: list[float] = []
    start = 0
    for x in partition.lengths_minutes:
        if x % series.step_minutes != 0:
            raise ValidationError(
                f"period length {x} min is not a whole number of "
                f"{series.step_minutes}-minute intervals"
            )
        count = x // series.step_minutes
        if count > 0:
            out.append(fmean(series.values[start : start + count]))
            start += count
    return tuple(out)
