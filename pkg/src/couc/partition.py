"""Time partitions on a fixed minute grid.

A partition is an ordered sequence of period lengths (integer minutes, each a
multiple of the grid spacing) that covers a planning horizon exactly.  This
module provides construction helpers (uniform split, agglomerative merging of
adjacent intervals), the adaptive search range around each period, and the
boundary-shift update that turns per-point decisions into a new partition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ValidationError

DEFAULT_GRID_MINUTES = 10


@dataclass(frozen=True)
class TimePartition:
    """Ordered period lengths in minutes on a fixed grid.

    Interior periods must be strictly positive; a zero-length period is only
    allowed at either end.  The horizon is the exact sum of the lengths.
    """

    lengths_minutes: tuple[int, ...]
    grid_minutes: int = DEFAULT_GRID_MINUTES

    def __post_init__(self) -> None:
        if not isinstance(self.lengths_minutes, tuple):
            object.__setattr__(self, "lengths_minutes", tuple(self.lengths_minutes))
        if self.grid_minutes <= 0:
            raise ValidationError(f"grid_minutes must be positive, got {self.grid_minutes}")
        if len(self.lengths_minutes) == 0:
            raise ValidationError("a partition needs at least one period")
        for i, x in enumerate(self.lengths_minutes):
            if not isinstance(x, int) or isinstance(x, bool):
                raise ValidationError(f"period {i} length must be an integer, got {x!r}")
            if x < 0:
                raise ValidationError(f"period {i} length must be non-negative, got {x}")
            if x % self.grid_minutes != 0:
                raise ValidationError(
                    f"period {i} length {x} is not a multiple of the {self.grid_minutes}-minute grid"
                )
            if x == 0 and 0 < i < len(self.lengths_minutes) - 1:
                raise ValidationError(f"interior period {i} has zero length")
        if sum(self.lengths_minutes) <= 0:
            raise ValidationError("partition horizon must be positive")

    def __len__(self) -> int:
        return len(self.lengths_minutes)

    @property
    def num_periods(self) -> int:
        return len(self.lengths_minutes)

    @property
    def horizon_minutes(self) -> int:
        return sum(self.lengths_minutes)

    def boundaries(self) -> tuple[int, ...]:
        """Cumulative boundary positions b_0 = 0 .. b_T = horizon, in minutes."""
        out = [0]
        for x in self.lengths_minutes:
            out.append(out[-1] + x)
        return tuple(out)

    def nonzero_indices(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.lengths_minutes) if x > 0)

    def period_hours(self, index: int) -> float:
        return self.lengths_minutes[index] / 60.0

    def to_csv_line(self) -> str:
        return ",".join(str(x) for x in self.lengths_minutes)

    @staticmethod
    def from_csv_line(
        line: str,
        grid_minutes: int = DEFAULT_GRID_MINUTES,
        horizon_minutes: int | None = None,
    ) -> "TimePartition":
        """Parse a comma-separated length line, checking grid and horizon."""
        fields = [f.strip() for f in line.strip().split(",") if f.strip() != ""]
        if not fields:
            raise ParseError("empty partition line")
        try:
            lengths = tuple(int(f) for f in fields)
        except ValueError as exc:
            raise ParseError(f"non-integer period length in partition line: {exc}") from exc
        try:
            part = TimePartition(lengths, grid_minutes)
        except ValidationError as exc:
            raise ParseError(str(exc)) from exc
        if horizon_minutes is not None and part.horizon_minutes != horizon_minutes:
            raise ParseError(
                f"partition sums to {part.horizon_minutes} minutes, expected {horizon_minutes}"
            )
        return part


def uniform_partition(
    num_periods: int,
    horizon_minutes: int,
    grid_minutes: int = DEFAULT_GRID_MINUTES,
) -> TimePartition:
    """Split the horizon into `num_periods` equal grid-aligned periods."""
    if num_periods <= 0:
        raise ValidationError(f"num_periods must be positive, got {num_periods}")
    if horizon_minutes % num_periods != 0:
        raise ValidationError(
            f"horizon {horizon_minutes} min is not divisible into {num_periods} equal periods"
        )
    length = horizon_minutes // num_periods
    if length % grid_minutes != 0:
        raise ValidationError(
            f"uniform period length {length} min is off the {grid_minutes}-minute grid"
        )
    return TimePartition((length,) * num_periods, grid_minutes)


def ward_dissimilarity(size_a: int, mean_a: float, size_b: int, mean_b: float) -> float:
    """Merge penalty between two adjacent clusters: the within-variance increase.

    H = 2 * S_a * S_b / (S_a + S_b) * (mean_a - mean_b)^2
    """
    return 2.0 * size_a * size_b / (size_a + size_b) * (mean_a - mean_b) ** 2


def adjacent_ward_merge(
    values: Sequence[float],
    num_clusters: int,
    step_minutes: int = DEFAULT_GRID_MINUTES,
) -> TimePartition:
    """Agglomeratively merge adjacent intervals until `num_clusters` remain.

    Each input value is one interval of `step_minutes`.  At every step the
    adjacent pair with the smallest dissimilarity is merged; ties go to the
    leftmost pair.  The cluster sizes become the partition period lengths.
    """
    n = len(values)
    if n == 0:
        raise ValidationError("cannot cluster an empty series")
    if not 1 <= num_clusters <= n:
        raise ValidationError(f"num_clusters must be in [1, {n}], got {num_clusters}")
    sizes = [1] * n
    means = [float(v) for v in values]
    while len(sizes) > num_clusters:
        best_idx = 0
        best_h = ward_dissimilarity(sizes[0], means[0], sizes[1], means[1])
        for i in range(1, len(sizes) - 1):
            h = ward_dissimilarity(sizes[i], means[i], sizes[i + 1], means[i + 1])
            if h < best_h:
                best_h = h
                best_idx = i
        i = best_idx
        merged_size = sizes[i] + sizes[i + 1]
        merged_mean = (sizes[i] * means[i] + sizes[i + 1] * means[i + 1]) / merged_size
        sizes[i : i + 2] = [merged_size]
        means[i : i + 2] = [merged_mean]
    return TimePartition(tuple(s * step_minutes for s in sizes), step_minutes)


@dataclass(frozen=True)
class AdaptiveRange:
    """Open interval of admissible lengths for one period, plus the grid."""

    q: int
    min_minutes: float
    max_minutes: float
    grid_minutes: int

    def __post_init__(self) -> None:
        if self.min_minutes >= self.max_minutes:
            raise ValidationError(
                f"empty adaptive range for period {self.q}: "
                f"({self.min_minutes}, {self.max_minutes})"
            )

    def contains(self, length_minutes: float) -> bool:
        """Strict interior membership; both bounds are exclusive."""
        return self.min_minutes < length_minutes < self.max_minutes

    def candidates(self) -> tuple[int, ...]:
        """Grid multiples strictly inside the range, ascending."""
        first = int(self.min_minutes // self.grid_minutes) * self.grid_minutes
        while first <= self.min_minutes:
            first += self.grid_minutes
        out = []
        x = first
        while x < self.max_minutes:
            out.append(x)
            x += self.grid_minutes
        return tuple(out)

    def nearest_candidate(self, target_minutes: float) -> int | None:
        """Closest admissible grid length to `target_minutes` (ties go low)."""
        cands = self.candidates()
        if not cands:
            return None
        return min(cands, key=lambda c: (abs(c - target_minutes), c))


def adaptive_range(partition: TimePartition, q: int) -> AdaptiveRange:
    """Search range for the length of period `q` (0-based).

    End periods may shrink to (but not reach) zero; an interior period may
    shrink to half its current length.  Every period may grow to its current
    length plus half its neighbour toward the interior of the horizon.
    """
    T = partition.num_periods
    if T < 2:
        raise ValidationError("adaptive ranges need at least two periods")
    if not 0 <= q < T:
        raise ValidationError(f"period index {q} out of range for T={T}")
    x = partition.lengths_minutes
    lo = 0.0 if q in (0, T - 1) else x[q] / 2.0
    if q < T - 1:
        hi = x[q] + x[q + 1] / 2.0
    else:
        hi = x[q] + x[q - 1] / 2.0
    return AdaptiveRange(q, lo, hi, partition.grid_minutes)


def apply_point_updates(
    current: TimePartition,
    alter_minutes: Mapping[int, int],
) -> TimePartition:
    """Aggregate per-point length decisions into one partition.

    Each entry q -> x places the boundary after period q at the *old* start
    of period q plus x, so simultaneous decisions never interact.  The final
    period absorbs the residual so the horizon is preserved exactly.  Every
    altered length must lie strictly inside its adaptive range.
    """
    T = current.num_periods
    if T < 2:
        raise ValidationError("point updates need at least two periods")
    for q, x in alter_minutes.items():
        if not 0 <= q <= T - 2:
            raise ValidationError(f"movable point index {q} out of range for T={T}")
        if not isinstance(x, int) or isinstance(x, bool):
            raise ValidationError(f"altered length for point {q} must be an integer, got {x!r}")
        if x % current.grid_minutes != 0:
            raise ValidationError(
                f"altered length {x} for point {q} is off the {current.grid_minutes}-minute grid"
            )
        if not adaptive_range(current, q).contains(x):
            raise ValidationError(
                f"altered length {x} for point {q} falls outside its adaptive range"
            )
    old_b = current.boundaries()
    new_b = [0] * (T + 1)
    for q in range(T - 1):
        x_q = alter_minutes.get(q, current.lengths_minutes[q])
        new_b[q + 1] = old_b[q] + x_q
    new_b[T] = current.horizon_minutes
    lengths = tuple(new_b[t + 1] - new_b[t] for t in range(T))
    return TimePartition(lengths, current.grid_minutes)


def converged(previous: TimePartition, candidate: TimePartition) -> bool:
    """True when no period length changed between two iterates."""
    if previous.num_periods != candidate.num_periods:
        raise ValidationError("cannot compare partitions with different period counts")
    if previous.grid_minutes != candidate.grid_minutes:
        raise ValidationError("cannot compare partitions on different grids")
    if previous.horizon_minutes != candidate.horizon_minutes:
        raise ValidationError("cannot compare partitions with different horizons")
    return previous.lengths_minutes == candidate.lengths_minutes
