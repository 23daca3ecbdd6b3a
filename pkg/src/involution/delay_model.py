"""Involution delay-function pairs.

A delay channel is characterized by two strictly increasing, concave delay
functions with finite asymptotes whose negatives are mutually inverse:

    -delta_up(-delta_down(T)) = T    and    -delta_down(-delta_up(T)) = T.

``delta_up`` maps the previous-output-to-input time T of a rising input
transition to its input-to-output delay; ``delta_down`` does the same for
falling transitions.  The exp-channel is the closed-form special case of a
gate driving a first-order RC load with a switching threshold:

    delta_up(T)   = tau * ln(1 - exp(-(T + d_inf_down)/tau)) + d_inf_up
    delta_down(T) = tau * ln(1 - exp(-(T + d_inf_up)/tau))   + d_inf_down

with d_inf_up = T_p - tau*ln(1 - vth) and d_inf_down = T_p - tau*ln(vth).

Evaluation outside the open domain (T <= -partner asymptote) yields the
distinguished value -inf, which the channel algorithm treats as an
immediately-canceled output.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .rootfind import NoBracket, bisect_root


class DelayModelError(ValueError):
    pass


class InvalidParams(DelayModelError):
    pass


class DomainViolation(DelayModelError):
    pass


@dataclass(frozen=True)
class ExpChannelParams:
    """RC constant, pure delay and normalized threshold of an exp-channel."""

    tau: float
    t_p: float
    vth_norm: float

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise InvalidParams(f"tau must be > 0, got {self.tau}")
        if not self.t_p > 0:
            raise InvalidParams(f"t_p must be > 0, got {self.t_p}")
        if not 0 < self.vth_norm < 1:
            raise InvalidParams(f"vth_norm must lie in (0,1), got {self.vth_norm}")

    def scaled(self, k: float) -> "ExpChannelParams":
        """Time-rescaled parameters; rescaling preserves the involution property."""
        return ExpChannelParams(self.tau * k, self.t_p * k, self.vth_norm)


@dataclass(frozen=True)
class DelayFunction:
    """A (delta_up, delta_down) pair with asymptotes and optional analytic derivatives.

    ``up``/``down`` return -inf at and below the domain edge; derivatives are
    only defined strictly inside the domain.
    """

    kind: str
    delta_inf_up: float
    delta_inf_down: float
    _up: Callable[[float], float]
    _down: Callable[[float], float]
    _d_up: Callable[[float], float] | None = None
    _d_down: Callable[[float], float] | None = None
    params: ExpChannelParams | None = None

    def up(self, T: float) -> float:
        if T <= -self.delta_inf_down:
            return -math.inf
        return self._up(T)

    def down(self, T: float) -> float:
        if T <= -self.delta_inf_up:
            return -math.inf
        return self._down(T)

    def delay(self, rising: bool, T: float) -> float:
        return self.up(T) if rising else self.down(T)


def exp_channel(p: ExpChannelParams) -> DelayFunction:
    """Closed-form exp-channel delay pair for the given RC parameters."""
    tau = p.tau
    d_inf_up = p.t_p - tau * math.log(1.0 - p.vth_norm)
    d_inf_down = p.t_p - tau * math.log(p.vth_norm)

    def up(T: float) -> float:
        return tau * math.log1p(-math.exp(-(T + d_inf_down) / tau)) + d_inf_up

    def down(T: float) -> float:
        return tau * math.log1p(-math.exp(-(T + d_inf_up) / tau)) + d_inf_down

    def d_up(T: float) -> float:
        q = math.exp(-(T + d_inf_down) / tau)
        return q / (1.0 - q)

    def d_down(T: float) -> float:
        q = math.exp(-(T + d_inf_up) / tau)
        return q / (1.0 - q)

    return DelayFunction("exp", d_inf_up, d_inf_down, up, down, d_up, d_down, p)


def tabulated_channel(
    samples_up: Sequence[tuple[float, float]],
    samples_down: Sequence[tuple[float, float]],
    delta_inf_up: float,
    delta_inf_down: float,
) -> DelayFunction:
    """Delay pair interpolated from (T, delta) samples.

    Monotone piecewise-cubic interpolation inside the sampled range, linear
    extrapolation outside, clamped to the declared asymptote from above.
    """
    from scipy.interpolate import PchipInterpolator

    def build(samples, asymptote):
        pts = sorted(samples)
        if len(pts) < 3:
            raise InvalidParams("need at least 3 samples per edge")
        xs = [t for t, _ in pts]
        ys = [d for _, d in pts]
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise InvalidParams("delay samples must be strictly increasing in delta")
        interp = PchipInterpolator(xs, ys, extrapolate=False)
        dinterp = interp.derivative()
        x0, x1 = xs[0], xs[-1]
        s0 = float(dinterp(x0))
        s1 = float(dinterp(x1))

        def f(T: float) -> float:
            if T < x0:
                v = ys[0] + s0 * (T - x0)
            elif T > x1:
                v = ys[-1] + s1 * (T - x1)
            else:
                v = float(interp(T))
            return min(v, asymptote)

        return f

    return DelayFunction(
        "tabulated",
        delta_inf_up,
        delta_inf_down,
        build(samples_up, delta_inf_up),
        build(samples_down, delta_inf_down),
    )


def custom_channel(
    up: Callable[[float], float],
    down: Callable[[float], float],
    delta_inf_up: float,
    delta_inf_down: float,
) -> DelayFunction:
    """Wrap arbitrary closed-form delay functions (validity is the caller's problem)."""
    return DelayFunction("custom", delta_inf_up, delta_inf_down, up, down)


class InvolutionCheck(NamedTuple):
    max_residual: float
    passed: bool


def check_involution(df: DelayFunction, grid: Sequence[float], tol: float) -> InvolutionCheck:
    """Max residual of both involution identities over ``grid``.

    Raises :class:`DomainViolation` if a grid point falls outside the domain
    of the first-applied delay function.
    """
    worst = 0.0
    for T in grid:
        if T <= -df.delta_inf_up or T <= -df.delta_inf_down:
            raise DomainViolation(f"grid point T={T} outside delay-function domain")
        r1 = abs(-df.up(-df.down(T)) - T)
        r2 = abs(-df.down(-df.up(T)) - T)
        worst = max(worst, r1, r2)
    return InvolutionCheck(worst, worst <= tol)


def delta_min(df: DelayFunction) -> float:
    """The unique positive d with delta_up(-d) = d (= delta_down(-d)).

    Bracketed bisection on delta_up(-d) - d, which is positive at d=0 by
    strict causality and negative before the domain edge.
    """
    f0 = df.up(0.0)
    if not f0 > 0:
        raise NoBracket(f"delay function is not strictly causal: delta_up(0)={f0}")
    hi = min(f0, df.delta_inf_down * (1.0 - 1e-12))
    return bisect_root(lambda d: df.up(-d) - d, 0.0, hi)


def _central_diff(f: Callable[[float], float], T: float) -> float:
    h = max(1e-7, 1e-7 * abs(T))
    return (f(T + h) - f(T - h)) / (2.0 * h)


def derivative_up(df: DelayFunction, T: float) -> float:
    """delta_up'(T): analytic for exp channels, central difference otherwise."""
    if not T > -df.delta_inf_down:
        raise DomainViolation(f"T={T} not interior to delta_up domain")
    if df._d_up is not None:
        return df._d_up(T)
    return _central_diff(df.up, T)


def derivative_down(df: DelayFunction, T: float) -> float:
    if not T > -df.delta_inf_up:
        raise DomainViolation(f"T={T} not interior to delta_down domain")
    if df._d_down is not None:
        return df._d_down(T)
    return _central_diff(df.down, T)


# Delay-sample file: header "T,delta_up,delta_down"; either delta column may be empty.

def write_delay_samples(path, rows: Sequence[tuple[float, float | None, float | None]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "delta_up", "delta_down"])
        for T, du, dd in rows:
            w.writerow([repr(T), "" if du is None else repr(du), "" if dd is None else repr(dd)])


def read_delay_samples(path) -> list[tuple[float, float | None, float | None]]:
    rows = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["T", "delta_up", "delta_down"]:
            raise DelayModelError(f"bad delay-sample header {header!r}")
        for T, du, dd in r:
            rows.append(
                (
                    float(T),
                    float(du) if du.strip() else None,
                    float(dd) if dd.strip() else None,
                )
            )
    return rows
