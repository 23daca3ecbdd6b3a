"""Delay channels: pure, inertial, involution and eta-involution.

``apply_channel`` implements the output transition generation algorithm.
With input transition times t_1 < t_2 < ... (t_0 = -inf, delta_0 = 0), the
n-th tentative output is scheduled at t_n + delta_n where

    delta_n = delta_up(max(t_n - t_{n-1} - delta_{n-1}, -d_inf_down)) + eta_n

for a rising transition (delta_down / -d_inf_up for a falling one).  The
max-guard maps an out-of-domain argument to delta_n = -inf, which forces
cancellation with the previous surviving pending transition.  Pending
transitions n < m cancel pairwise when t_n + delta_n >= t_m + delta_m
(ties cancel); the incremental form cancels a new pending transition
backward against the latest surviving one, which keeps the surviving list
strictly increasing and alternating.

The eta_n are adversarial perturbations within [-eta_minus, +eta_plus],
consumed one per input transition index (including transitions whose
output is later canceled).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .delay_model import DelayFunction
from .signals import Signal, make_signal


class ChannelError(ValueError):
    pass


class StrategyExhausted(ChannelError):
    """A strict fixed eta sequence ran out before the input signal did."""


@dataclass(frozen=True)
class EtaBounds:
    """Admissible perturbation interval [-eta_minus, +eta_plus]."""

    eta_minus: float = 0.0
    eta_plus: float = 0.0

    def __post_init__(self) -> None:
        if self.eta_minus < 0 or self.eta_plus < 0:
            raise ChannelError(f"eta bounds must be non-negative, got {self}")


@dataclass(frozen=True)
class Zero:
    """Always chooses eta_n = 0 (reduces the channel to a plain involution)."""


@dataclass(frozen=True)
class WorstCaseShrink:
    """Rising transitions maximally late (+eta_plus), falling maximally early (-eta_minus).

    This choice minimizes the up-time of the next pulse in a feedback loop,
    producing the self-repeating worst-case pulse train.
    """


@dataclass(frozen=True)
class UniformRandom:
    """eta_n drawn uniformly from [-eta_minus, +eta_plus] with a named seed."""

    seed: int


@dataclass(frozen=True)
class FixedSequence:
    """Replay an explicit eta sequence; beyond its length yields 0 (or raises in strict mode)."""

    etas: tuple[float, ...]
    strict: bool = False


AdversaryStrategy = Union[Zero, WorstCaseShrink, UniformRandom, FixedSequence]


def worst_case_eta(edge: str, bounds: EtaBounds) -> float:
    """The shrink-worst perturbation for one edge: rising -> +eta_plus, falling -> -eta_minus."""
    if edge == "rising":
        return bounds.eta_plus
    if edge == "falling":
        return -bounds.eta_minus
    raise ChannelError(f"edge must be 'rising' or 'falling', got {edge!r}")


class EtaSource:
    """Per-run consumable view of a strategy: one eta per input transition index."""

    def __init__(self, strategy: AdversaryStrategy, bounds: EtaBounds):
        self.strategy = strategy
        self.bounds = bounds
        self._rng = (
            np.random.default_rng(strategy.seed) if isinstance(strategy, UniformRandom) else None
        )
        self._count = 0
        self.drawn: list[float] = []

    def eta(self, value: int) -> float:
        s, b = self.strategy, self.bounds
        self._count += 1
        if isinstance(s, Zero):
            e = 0.0
        elif isinstance(s, WorstCaseShrink):
            e = worst_case_eta("rising" if value == 1 else "falling", b)
        elif isinstance(s, UniformRandom):
            e = float(self._rng.uniform(-b.eta_minus, b.eta_plus))
        elif isinstance(s, FixedSequence):
            if self._count <= len(s.etas):
                e = s.etas[self._count - 1]
            elif s.strict:
                raise StrategyExhausted(
                    f"fixed eta sequence of length {len(s.etas)} exhausted at transition {self._count}"
                )
            else:
                e = 0.0
        else:
            raise ChannelError(f"unknown strategy {s!r}")
        if not -b.eta_minus - 1e-15 <= e <= b.eta_plus + 1e-15:
            raise ChannelError(f"eta={e} outside [{-b.eta_minus}, {b.eta_plus}]")
        self.drawn.append(e)
        return e


@dataclass(frozen=True)
class Pure:
    delay: float

    def __post_init__(self) -> None:
        if self.delay < 0:
            raise ChannelError(f"pure delay must be >= 0, got {self.delay}")


@dataclass(frozen=True)
class Inertial:
    """Constant delay that suppresses transitions followed by an opposite one within ``window``."""

    delay: float
    window: float

    def __post_init__(self) -> None:
        if not self.delay > 0:
            raise ChannelError(f"inertial delay must be > 0, got {self.delay}")
        if not self.window > 0:
            raise ChannelError(f"inertial window must be > 0, got {self.window}")


@dataclass(frozen=True)
class Involution:
    df: DelayFunction

    def __post_init__(self) -> None:
        if not (self.df.up(0.0) > 0 and self.df.down(0.0) > 0):
            raise ChannelError("involution channel must be strictly causal")


@dataclass(frozen=True)
class EtaInvolution:
    df: DelayFunction
    bounds: EtaBounds
    strategy: AdversaryStrategy = Zero()

    def __post_init__(self) -> None:
        if not (self.df.up(0.0) > 0 and self.df.down(0.0) > 0):
            raise ChannelError("involution channel must be strictly causal")


ChannelSpec = Union[Pure, Inertial, Involution, EtaInvolution]


@dataclass
class TransitionRecord:
    """Per-input-transition log entry of the channel algorithm."""

    index: int
    time: float
    value: int
    T: float
    delta: float
    eta: float
    out_time: float
    canceled: bool = False
    canceled_with: int | None = None
    guard_hit: bool = False


class _InvolutionState:
    """Incremental channel algorithm state, shared by apply_channel and the engine."""

    def __init__(self, df: DelayFunction, source: EtaSource | None):
        self.df = df
        self.source = source
        self.prev_t = -math.inf
        self.prev_delta = 0.0
        self.index = 0
        self.stack: list[TransitionRecord] = []
        self.log: list[TransitionRecord] = []

    def feed(self, t: float, value: int) -> tuple[TransitionRecord, TransitionRecord | None]:
        """Process one input transition; returns (record, canceled partner or None)."""
        self.index += 1
        T = t - self.prev_t - self.prev_delta
        base = self.df.delay(value == 1, T)
        guard_hit = base == -math.inf
        eta = self.source.eta(value) if self.source is not None else 0.0
        delta = base + eta
        rec = TransitionRecord(self.index, t, value, T, delta, eta, t + delta, guard_hit=guard_hit)
        self.log.append(rec)
        self.prev_t, self.prev_delta = t, delta
        partner = None
        if self.stack and self.stack[-1].out_time >= rec.out_time:
            partner = self.stack.pop()
            partner.canceled = True
            partner.canceled_with = rec.index
            rec.canceled = True
            rec.canceled_with = partner.index
        else:
            if rec.out_time == -math.inf:
                raise ChannelError(
                    f"guard-canceled transition at t={t} has no surviving predecessor"
                )
            self.stack.append(rec)
        return rec, partner


def _apply_involution(df: DelayFunction, source: EtaSource | None, s: Signal):
    state = _InvolutionState(df, source)
    for tr in s.transitions:
        state.feed(tr.time, tr.value)
    out = make_signal(s.initial_value, [(r.out_time, r.value) for r in state.stack])
    return out, state.log


def _apply_inertial(spec: Inertial, s: Signal):
    log = []
    trs = s.transitions
    value = s.initial_value
    out = []
    for i, tr in enumerate(trs):
        gap = trs[i + 1].time - tr.time if i + 1 < len(trs) else math.inf
        suppressed = gap <= spec.window
        rec = TransitionRecord(i + 1, tr.time, tr.value, math.nan, spec.delay, 0.0, tr.time + spec.delay)
        if suppressed:
            rec.canceled = True
        elif tr.value != value:
            out.append((rec.out_time, tr.value))
            value = tr.value
        else:
            rec.canceled = True  # coalesced no-op after a suppression
        log.append(rec)
    return make_signal(s.initial_value, out), log


def apply_channel(spec: ChannelSpec, s: Signal) -> tuple[Signal, list[TransitionRecord]]:
    """Channel function: map an input signal to the output signal plus a per-transition log."""
    if isinstance(spec, Pure):
        log = [
            TransitionRecord(i + 1, tr.time, tr.value, math.nan, spec.delay, 0.0, tr.time + spec.delay)
            for i, tr in enumerate(s.transitions)
        ]
        return s.shifted(spec.delay), log
    if isinstance(spec, Inertial):
        return _apply_inertial(spec, s)
    if isinstance(spec, Involution):
        return _apply_involution(spec.df, None, s)
    if isinstance(spec, EtaInvolution):
        source = EtaSource(spec.strategy, spec.bounds)
        return _apply_involution(spec.df, source, s)
    raise ChannelError(f"unknown channel spec {spec!r}")


def cancellation_oracle(pending: list[float]) -> list[int]:
    """Surviving indices under exhaustive pairwise cancellation marking.

    Independent quadratic reference for the incremental stack rule: repeatedly
    mark the leftmost adjacent surviving pair (n, m) with
    pending[n] >= pending[m], until no such pair remains.
    """
    alive = [True] * len(pending)
    while True:
        prev = None
        hit = False
        for i, ok in enumerate(alive):
            if not ok:
                continue
            if prev is not None and pending[prev] >= pending[i]:
                alive[prev] = alive[i] = False
                hit = True
                break
            prev = i
        if not hit:
            return [i for i, ok in enumerate(alive) if ok]


# eta-sequence file for FixedSequence strategies: header "n,eta", 1-based index.

def write_eta_sequence(path, etas) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "eta"])
        for n, e in enumerate(etas, start=1):
            w.writerow([n, repr(e)])


def read_eta_sequence(path) -> list[float]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["n", "eta"]:
            raise ChannelError(f"bad eta-sequence header {header!r}")
        for n, e in r:
            if int(n) != len(out) + 1:
                raise ChannelError(f"eta-sequence rows must be consecutive from 1, got n={n}")
            out.append(float(e))
    return out
