"""Discrete-event core: simulation clock, event queue, store calendar, RNG streams.

Time is measured in minutes since simulation start (float, resolution well
below 0.01 min). Events fire in (fire_time, sequence_no) order, so two events
scheduled for the same instant run in insertion order.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

import numpy as np

MINUTES_PER_DAY = 24 * 60
MINUTES_PER_WEEK = 7 * MINUTES_PER_DAY

DAY_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")

# One RNG stream per stochastic concern, so changing one experiment factor
# does not perturb draws elsewhere.
STREAM_NAMES = ("arrivals", "decisions", "delays", "pool_selection", "refund_amounts")


class SchedulingError(Exception):
    """An event was scheduled in the past (model bug)."""


class CalendarRangeError(Exception):
    """A time query fell outside the simulated lifespan."""


def _stable_u64(text: str) -> int:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_seed(master_seed: int, *parts: Any) -> int:
    """Derive a 64-bit sub-seed from a master seed and arbitrary labels.

    Pure function of its inputs: (master seed, replication index, factor
    level) fully determines a run.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(repr(int(master_seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(repr(part).encode())
    return int.from_bytes(h.digest(), "big")


class RngStreams:
    """Named, mutually independent generators derived from one run seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gens = {
            name: np.random.default_rng(
                np.random.SeedSequence(entropy=(self.seed, _stable_u64(name)))
            )
            for name in STREAM_NAMES
        }

    def get(self, name: str) -> np.random.Generator:
        return self._gens[name]

    @property
    def arrivals(self) -> np.random.Generator:
        return self._gens["arrivals"]

    @property
    def decisions(self) -> np.random.Generator:
        return self._gens["decisions"]

    @property
    def delays(self) -> np.random.Generator:
        return self._gens["delays"]

    @property
    def pool_selection(self) -> np.random.Generator:
        return self._gens["pool_selection"]

    @property
    def refund_amounts(self) -> np.random.Generator:
        return self._gens["refund_amounts"]


@dataclass(frozen=True)
class Calendar:
    """Weekly opening hours plus the run length in weeks.

    ``opening_minute[d]``/``closing_minute[d]`` are minutes past midnight for
    weekday d (0 = Monday); a ``None`` pair marks a closed day.
    """

    opening_minute: tuple[Optional[float], ...]
    closing_minute: tuple[Optional[float], ...]
    lifespan_weeks: int = 10

    def __post_init__(self):
        if len(self.opening_minute) != 7 or len(self.closing_minute) != 7:
            raise ValueError("calendar needs exactly 7 opening and closing entries")
        if self.lifespan_weeks < 1:
            raise ValueError("lifespan_weeks must be >= 1")
        for d in range(7):
            o, c = self.opening_minute[d], self.closing_minute[d]
            if (o is None) != (c is None):
                raise ValueError(f"day {d}: opening/closing must both be set or both None")
            if o is not None:
                if not (0 <= o < c <= MINUTES_PER_DAY):
                    raise ValueError(f"day {d}: need 0 <= opening < closing <= 1440")

    @property
    def lifespan_minutes(self) -> float:
        return self.lifespan_weeks * MINUTES_PER_WEEK

    def weekday_of(self, t: float) -> int:
        return int(t // MINUTES_PER_DAY) % 7

    def minute_of_day(self, t: float) -> float:
        return t % MINUTES_PER_DAY

    def is_open(self, t: float) -> bool:
        """True iff t falls inside that weekday's open interval.

        Raises CalendarRangeError for t outside [0, lifespan].
        """
        if t < 0 or t > self.lifespan_minutes:
            raise CalendarRangeError(f"t={t} outside lifespan 0..{self.lifespan_minutes}")
        o = self.opening_minute[self.weekday_of(t)]
        if o is None:
            return False
        c = self.closing_minute[self.weekday_of(t)]
        m = self.minute_of_day(t)
        return o <= m < c

    def day_window(self, day_index: int) -> Optional[tuple[float, float]]:
        """Absolute (open, close) minutes for the day_index-th simulated day."""
        weekday = day_index % 7
        o = self.opening_minute[weekday]
        if o is None:
            return None
        base = day_index * MINUTES_PER_DAY
        return (base + o, base + self.closing_minute[weekday])

    def open_days(self):
        """Yield (day_index, open_t, close_t) for every open day in the lifespan."""
        for day_index in range(self.lifespan_weeks * 7):
            window = self.day_window(day_index)
            if window is not None:
                yield day_index, window[0], window[1]

    def to_dict(self) -> dict:
        hours = {}
        for d, name in enumerate(DAY_NAMES):
            if self.opening_minute[d] is None:
                hours[name] = None
            else:
                hours[name] = [self.opening_minute[d], self.closing_minute[d]]
        return {"hours": hours, "lifespan_weeks": self.lifespan_weeks}

    @classmethod
    def from_dict(cls, data: dict) -> "Calendar":
        hours = data["hours"]
        opening, closing = [], []
        for name in DAY_NAMES:
            entry = hours.get(name)
            if entry is None:
                opening.append(None)
                closing.append(None)
            else:
                opening.append(float(entry[0]))
                closing.append(float(entry[1]))
        return cls(tuple(opening), tuple(closing), int(data.get("lifespan_weeks", 10)))


class Event(NamedTuple):
    # NamedTuple ordering: heapq compares (fire_time, seq) before ever
    # touching kind/payload, and seq is unique.
    fire_time: float
    seq: int
    kind: str
    target: Optional[int]
    payload: Any


class Engine:
    """Event scheduler and simulation clock for a single run."""

    def __init__(self, lifespan_minutes: float, collect_log: bool = False):
        self.lifespan_minutes = float(lifespan_minutes)
        self.now = 0.0
        self._heap: list[Event] = []
        self._seq = 0
        self._handlers: dict[str, Callable[[Event], None]] = {}
        self.collect_log = collect_log
        self.event_log: list[str] = []
        self.events_executed = 0

    def register(self, kind: str, handler: Callable[[Event], None]) -> None:
        self._handlers[kind] = handler

    def schedule(self, fire_time: float, kind: str, target: Optional[int] = None,
                 payload: Any = None) -> Event:
        if fire_time < self.now:
            raise SchedulingError(
                f"event {kind!r} scheduled at {fire_time} but clock is {self.now}"
            )
        event = Event(fire_time, self._seq, kind, target, payload)
        self._seq += 1
        heapq.heappush(self._heap, event)
        return event

    def peek_time(self) -> Optional[float]:
        return self._heap[0].fire_time if self._heap else None

    def run_until(self, end: float) -> None:
        """Execute all events with fire_time <= end, then set the clock to end."""
        if end < self.now:
            raise SchedulingError(f"run_until({end}) but clock is {self.now}")
        if end > self.lifespan_minutes:
            raise CalendarRangeError(f"end={end} beyond lifespan {self.lifespan_minutes}")
        heap = self._heap
        while heap and heap[0].fire_time <= end:
            event = heapq.heappop(heap)
            self.now = event.fire_time
            if self.collect_log:
                self.event_log.append(
                    f"t={event.fire_time:.6f} seq={event.seq} kind={event.kind} "
                    f"target={'-' if event.target is None else event.target}"
                )
            self.events_executed += 1
            handler = self._handlers.get(event.kind)
            if handler is not None:
                handler(event)
        self.now = end

    def drain_in_order(self) -> list[Event]:
        """Pop every queued event without dispatching (test hook)."""
        out = []
        while self._heap:
            event = heapq.heappop(self._heap)
            if event.fire_time < self.now:
                raise SchedulingError("heap produced an event before the clock")
            self.now = event.fire_time
            out.append(event)
        return out
