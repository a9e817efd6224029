"""Customer typology, likelihood/delay adjustment, footfall arrivals, customer pool.

The five built-in customer types express how likely each type is to buy, to
wait in a queue, to ask for help, and to ask for a refund, each classified as
low / moderate / high. Moderate keeps the scenario's base value; high and low
shift it halfway toward the relevant bound (the midpoint rule used both for
probabilities and for triangular modes).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

import numpy as np

from .engine import MINUTES_PER_DAY

if TYPE_CHECKING:
    from .agents import Customer


class LikelihoodClass(str, Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"


@dataclass(frozen=True)
class CustomerTypeProfile:
    """Action likelihoods for one customer type."""

    name: str
    buy: LikelihoodClass
    wait: LikelihoodClass
    ask_help: LikelihoodClass
    ask_refund: LikelihoodClass


_L, _M, _H = LikelihoodClass.LOW, LikelihoodClass.MODERATE, LikelihoodClass.HIGH

# The built-in typology: (buy, wait, ask for help, ask for refund).
CUSTOMER_TYPES: dict[str, CustomerTypeProfile] = {
    "shopping_enthusiast": CustomerTypeProfile("shopping_enthusiast", _H, _M, _M, _L),
    "solution_demander": CustomerTypeProfile("solution_demander", _H, _L, _L, _L),
    "service_seeker": CustomerTypeProfile("service_seeker", _M, _H, _H, _L),
    "disinterested_shopper": CustomerTypeProfile("disinterested_shopper", _L, _L, _L, _H),
    "internet_shopper": CustomerTypeProfile("internet_shopper", _L, _H, _H, _L),
}

TYPE_NAMES = tuple(CUSTOMER_TYPES)


@dataclass(frozen=True)
class TriangularSpec:
    """Triangular distribution over durations (or amounts): min <= mode <= max."""

    minimum: float
    mode: float
    maximum: float

    def __post_init__(self):
        if not (0 <= self.minimum <= self.mode <= self.maximum):
            raise ValueError(
                f"invalid triangular spec ({self.minimum}, {self.mode}, {self.maximum})"
            )

    @property
    def mean(self) -> float:
        return (self.minimum + self.mode + self.maximum) / 3.0

    def cdf(self, x: float) -> float:
        a, m, b = self.minimum, self.mode, self.maximum
        if x <= a:
            return 0.0
        if x >= b:
            return 1.0
        if b == a:
            return 1.0
        if x <= m:
            denom = (b - a) * (m - a)
            return 1.0 if denom == 0 else (x - a) ** 2 / denom
        denom = (b - a) * (b - m)
        return 1.0 if denom == 0 else 1.0 - (b - x) ** 2 / denom

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.minimum, self.mode, self.maximum)


def sample_triangular(spec: TriangularSpec, stream: np.random.Generator, size=None):
    """Draw from triangular(min, mode, max); a zero-width spec is a point mass."""
    if spec.maximum == spec.minimum:
        return spec.mode if size is None else np.full(size, spec.mode)
    return stream.triangular(spec.minimum, spec.mode, spec.maximum, size=size)


def adjust_probability(base: float, likelihood: LikelihoodClass) -> float:
    """Shift a base probability per likelihood class.

    Moderate keeps the base; high moves halfway toward 1, low halfway toward 0.
    """
    if not 0.0 <= base <= 1.0:
        raise ValueError(f"base probability {base} outside [0, 1]")
    if likelihood is LikelihoodClass.HIGH:
        return base + (1.0 - base) / 2.0
    if likelihood is LikelihoodClass.LOW:
        return base / 2.0
    return base


def adjust_delay(spec: TriangularSpec, likelihood: LikelihoodClass) -> TriangularSpec:
    """Shift a triangular mode per likelihood class, keeping min/max fixed."""
    if likelihood is LikelihoodClass.HIGH:
        return TriangularSpec(spec.minimum, spec.mode + (spec.maximum - spec.mode) / 2.0,
                              spec.maximum)
    if likelihood is LikelihoodClass.LOW:
        return TriangularSpec(spec.minimum, spec.mode - (spec.mode - spec.minimum) / 2.0,
                              spec.maximum)
    return spec


class FootfallTable:
    """Expected arrivals per hour for each weekday (7 x 24, arrivals/hour)."""

    def __init__(self, rates):
        rates = [[float(r) for r in row] for row in rates]
        if len(rates) != 7 or any(len(row) != 24 for row in rates):
            raise ValueError("footfall table must be 7 days x 24 hours")
        if any(r < 0 for row in rates for r in row):
            raise ValueError("footfall rates must be non-negative")
        self.rates = rates

    def rate(self, weekday: int, hour: int) -> float:
        return self.rates[weekday][hour]

    def weekly_total(self) -> float:
        return float(sum(sum(row) for row in self.rates))

    def scaled(self, factor: float) -> "FootfallTable":
        return FootfallTable([[r * factor for r in row] for row in self.rates])

    def to_dict(self) -> dict:
        from .engine import DAY_NAMES
        return {name: list(self.rates[d]) for d, name in enumerate(DAY_NAMES)}

    @classmethod
    def from_dict(cls, data: dict) -> "FootfallTable":
        from .engine import DAY_NAMES
        return cls([data[name] for name in DAY_NAMES])


def next_arrival_gap(weekday: int, hour: int, table: FootfallTable,
                     stream: np.random.Generator) -> Optional[float]:
    """Exponential gap (minutes) to the next arrival in this hour; None if rate 0."""
    rate = table.rate(weekday, hour)
    if rate <= 0.0:
        return None
    return float(stream.exponential(60.0 / rate))


def generate_day_arrivals(day_index: int, open_t: float, close_t: float,
                          table: FootfallTable, stream: np.random.Generator) -> list[float]:
    """Arrival instants for one day: per-hour Poisson via exponential gaps.

    Each hour restarts the gap process (exact for piecewise-constant rates by
    memorylessness); arrivals at or after closing are dropped.
    """
    weekday = day_index % 7
    base = day_index * MINUTES_PER_DAY
    arrivals: list[float] = []
    first_hour = int((open_t - base) // 60)
    last_hour = int(np.ceil((close_t - base) / 60.0))
    for hour in range(first_hour, last_hour):
        hour_start = base + hour * 60.0
        hour_end = hour_start + 60.0
        t = max(hour_start, open_t)
        limit = min(hour_end, close_t)
        while True:
            gap = next_arrival_gap(weekday, hour, table, stream)
            if gap is None:
                break
            t += gap
            if t >= limit:
                break
            arrivals.append(t)
    return arrivals


class CustomerPool:
    """Finite population customers are drawn from and return to.

    Membership is fixed after construction. A member is eligible for release
    once its resting deadline has passed and it is not currently in the store.
    """

    def __init__(self, members: list["Customer"], resting_spec: TriangularSpec):
        self.members = list(members)
        self.resting_spec = resting_spec
        self._eligible: list["Customer"] = list(members)
        self._resting: list[tuple[float, int, "Customer"]] = []

    @property
    def size(self) -> int:
        return len(self.members)

    def eligible_count(self, now: float) -> int:
        self._promote(now)
        return len(self._eligible)

    def _promote(self, now: float) -> None:
        heap = self._resting
        while heap and heap[0][0] <= now:
            _, _, customer = heapq.heappop(heap)
            self._eligible.append(customer)

    def release(self, now: float, stream: np.random.Generator) -> Optional["Customer"]:
        """Uniformly pick an eligible member and move it out of the pool."""
        self._promote(now)
        if not self._eligible:
            return None
        idx = int(stream.integers(len(self._eligible)))
        customer = self._eligible[idx]
        self._eligible[idx] = self._eligible[-1]
        self._eligible.pop()
        return customer

    def return_to_pool(self, customer: "Customer", now: float,
                       stream: np.random.Generator) -> float:
        """Re-admit a leaving customer; it rests before becoming eligible again."""
        rest = float(sample_triangular(self.resting_spec, stream))
        deadline = now + rest
        customer.resting_deadline = deadline
        heapq.heappush(self._resting, (deadline, customer.id, customer))
        return deadline


def realize_mix(pool_size: int, mix: dict[str, float]) -> list[str]:
    """Turn mix proportions into exact per-type counts (largest remainder)."""
    names = [name for name in TYPE_NAMES if mix.get(name, 0.0) > 0.0]
    raw = {name: mix[name] * pool_size for name in names}
    counts = {name: int(raw[name]) for name in names}
    shortfall = pool_size - sum(counts.values())
    for name in sorted(names, key=lambda n: raw[n] - counts[n], reverse=True)[:shortfall]:
        counts[name] += 1
    assignment: list[str] = []
    for name in names:
        assignment.extend([name] * counts[name])
    return assignment
