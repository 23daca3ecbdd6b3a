"""Binary signals: alternating transition lists, pulses, and trace files.

A signal is an initial Boolean value (conceptually a transition at time
minus infinity) followed by a finite, strictly increasing, strictly
alternating list of transitions.  Signals are immutable and safe to share
between concurrent workers.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class SignalError(ValueError):
    """Invalid signal construction."""


class NonMonotoneTimes(SignalError):
    """Transition times are not strictly increasing."""


class NonAlternatingValues(SignalError):
    """Transition values do not strictly alternate from the initial value."""


class NegativeTime(SignalError):
    """A non-initial transition lies before time zero."""


class NonPositiveLength(SignalError):
    """A pulse must have strictly positive length."""


@dataclass(frozen=True)
class Transition:
    """A single edge: (time, value).  A falling edge is (t, 0), a rising edge (t, 1)."""

    time: float
    value: int


@dataclass(frozen=True)
class Pulse:
    """One 1-interval of a signal.

    ``down_time`` is ``math.inf`` when no further rising edge follows, and
    ``up_time`` is ``math.inf`` when the signal is still high at the
    decomposition horizon.  ``end`` keeps the exact falling-edge time so a
    decompose/re-synthesize round trip is bit-exact (start + up_time may
    round differently).
    """

    start: float
    up_time: float
    down_time: float
    end: float | None = field(default=None, compare=False, repr=False)

    @property
    def duty_cycle(self) -> float:
        """up_time / (up_time + down_time); zero when down_time is unbounded."""
        if math.isinf(self.down_time):
            return 0.0
        return self.up_time / (self.up_time + self.down_time)

    @property
    def period(self) -> float:
        return self.up_time + self.down_time


@dataclass(frozen=True)
class Signal:
    initial_value: int
    transitions: tuple[Transition, ...]
    _times: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_times", tuple(t.time for t in self.transitions))

    def value_at(self, t: float) -> int:
        """Value of the most recent transition at or before ``t`` (right-continuous)."""
        i = bisect_right(self._times, t)
        if i == 0:
            return self.initial_value
        return self.transitions[i - 1].value

    @property
    def is_zero(self) -> bool:
        return self.initial_value == 0 and not self.transitions

    def final_value(self) -> int:
        return self.transitions[-1].value if self.transitions else self.initial_value

    def last_time(self) -> float:
        """Time of the last transition, or -inf for a constant signal."""
        return self._times[-1] if self._times else -math.inf

    def shifted(self, dt: float) -> "Signal":
        return Signal(self.initial_value, tuple(Transition(t.time + dt, t.value) for t in self.transitions))

    def truncated(self, horizon: float) -> "Signal":
        """Drop transitions strictly after ``horizon``."""
        kept = tuple(t for t in self.transitions if t.time <= horizon)
        return self if len(kept) == len(self.transitions) else Signal(self.initial_value, kept)


def make_signal(initial_value: int, transitions: Iterable[tuple[float, int]]) -> Signal:
    """Validate and build a signal from ``(time, value)`` pairs.

    Raises :class:`NonMonotoneTimes`, :class:`NonAlternatingValues` or
    :class:`NegativeTime` on the first violated structural rule.
    """
    if initial_value not in (0, 1):
        raise NonAlternatingValues(f"initial value must be 0 or 1, got {initial_value!r}")
    prev_time = -math.inf
    prev_value = initial_value
    out = []
    for time, value in transitions:
        if value not in (0, 1):
            raise NonAlternatingValues(f"transition value must be 0 or 1, got {value!r}")
        if time < 0:
            raise NegativeTime(f"transition at t={time} precedes time 0")
        if not time > prev_time:
            raise NonMonotoneTimes(f"transition times not strictly increasing at t={time}")
        if value == prev_value:
            raise NonAlternatingValues(f"transition at t={time} repeats value {value}")
        out.append(Transition(float(time), int(value)))
        prev_time, prev_value = time, value
    return Signal(int(initial_value), tuple(out))


ZERO = make_signal(0, [])
ONE = make_signal(1, [])


def pulse(start: float, length: float) -> Signal:
    """A single pulse: initial 0, rising at ``start``, falling at ``start + length``."""
    if not length > 0:
        raise NonPositiveLength(f"pulse length must be > 0, got {length}")
    if start < 0:
        raise NegativeTime(f"pulse start must be >= 0, got {start}")
    return make_signal(0, [(start, 1), (start + length, 0)])


def value_at(s: Signal, t: float) -> int:
    return s.value_at(t)


def decompose_pulses(s: Signal, horizon: float) -> list[Pulse]:
    """Every 1-interval of ``s`` that starts before ``horizon``.

    ``down_time`` runs to the next rising edge (``inf`` if none); a final
    interval still high at the horizon gets ``up_time = inf``.  A leading
    interval inherited from ``initial_value == 1`` has no rising edge and is
    skipped.
    """
    pulses = []
    trs = s.transitions
    for i, tr in enumerate(trs):
        if tr.value != 1 or tr.time >= horizon:
            continue
        fall = trs[i + 1].time if i + 1 < len(trs) else None
        if fall is None:
            pulses.append(Pulse(tr.time, math.inf, math.inf))
            continue
        next_rise = trs[i + 2].time if i + 2 < len(trs) else None
        down = (next_rise - fall) if next_rise is not None else math.inf
        pulses.append(Pulse(tr.time, fall - tr.time, down, end=fall))
    return pulses


def pulses_to_signal(pulses: Sequence[Pulse]) -> Signal:
    """Inverse of :func:`decompose_pulses` for initial-0 signals."""
    transitions: list[tuple[float, int]] = []
    for p in pulses:
        transitions.append((p.start, 1))
        if not math.isinf(p.up_time):
            transitions.append((p.end if p.end is not None else p.start + p.up_time, 0))
    return make_signal(0, transitions)


# Trace file format: header "signal,time,value", rows sorted by (signal, time),
# the initial value encoded as a row with time field "-inf".

def write_trace(path, signals: dict[str, Signal]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["signal", "time", "value"])
        for name in sorted(signals):
            s = signals[name]
            w.writerow([name, "-inf", s.initial_value])
            for tr in s.transitions:
                w.writerow([name, repr(tr.time), tr.value])


def read_trace(path) -> dict[str, Signal]:
    raw: dict[str, list[tuple[float, int]]] = {}
    initials: dict[str, int] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["signal", "time", "value"]:
            raise SignalError(f"bad trace header {header!r}")
        for name, time_s, value_s in r:
            value = int(value_s)
            if time_s.strip() == "-inf":
                initials[name] = value
                raw.setdefault(name, [])
            else:
                raw.setdefault(name, []).append((float(time_s), value))
    out = {}
    for name, transitions in raw.items():
        if name not in initials:
            raise SignalError(f"signal {name!r} has no -inf initial-value row")
        out[name] = make_signal(initials[name], transitions)
    return out
