"""Control curves and the cost functionals optimized over them.

A control curve ending at (x, t) has at most three linear pieces; when three
are present the middle one rests on the interface x = 0 and the outer two
share a strict sign.  The whole admissible family is the 3-parameter set
(foot y, interface arrival t2, interface departure t1), plus the degenerate
direct family t2 = t1 = 0.

Costs: J charges every segment duration * h*(slope) (a resting segment has
slope 0, contributing -duration * h(theta_h)); the one-sided costs J+- skip
resting segments entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SignViolation, SlopeOutOfRange, TimeOrderViolation
from .fluxes import ConvexFlux, legendre
from .initial_data import InitialProfile

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class ControlCurve:
    t_end: float
    x_end: float
    y: float          # gamma(0)
    t2: float         # interface arrival (t2 = t1 = 0 means a single segment)
    t1: float         # interface departure
    sign: str

    @property
    def is_direct(self):
        return self.t2 == 0.0 and self.t1 == 0.0

    @property
    def times(self):
        return (0.0, self.t2, self.t1, self.t_end)

    @property
    def positions(self):
        if self.is_direct:
            return (self.y, self.y, self.y, self.x_end)
        return (self.y, 0.0, 0.0, self.x_end)

    def segments(self):
        """Non-degenerate pieces as (t_from, t_to, x_from, x_to)."""
        if self.is_direct:
            return [(0.0, self.t_end, self.y, self.x_end)]
        segs = []
        if self.t2 > 0.0:
            segs.append((0.0, self.t2, self.y, 0.0))
        if self.t1 > self.t2:
            segs.append((self.t2, self.t1, 0.0, 0.0))
        if self.t1 < self.t_end:
            segs.append((self.t1, self.t_end, 0.0, self.x_end))
        return segs

    def __call__(self, s):
        """Evaluate gamma(s), vectorized."""
        s = np.asarray(s, dtype=float)
        if self.is_direct:
            return self.y + (self.x_end - self.y) * s / self.t_end
        out = np.zeros_like(s)
        if self.t2 > 0.0:
            going = s < self.t2
            out = np.where(going, self.y * (1.0 - s / self.t2), out)
        if self.t1 < self.t_end:
            leaving = s > self.t1
            out = np.where(leaving,
                           self.x_end * (s - self.t1) / (self.t_end - self.t1),
                           out)
        return out


def make_curve(t: float, x: float, y: float, t2: float, t1: float,
               sign: str) -> ControlCurve:
    """Validated control curve from (y,0) to (0,t2), along the interface to
    (0,t1), then to (x,t).  t2 = t1 collapses the rest; t2 = t1 = 0 is the
    single direct segment from (y,0) to (x,t)."""
    if sign not in (POSITIVE, NEGATIVE):
        raise ValueError(f"sign must be '{POSITIVE}' or '{NEGATIVE}'")
    if not (0.0 <= t2 <= t1 <= t):
        raise TimeOrderViolation(f"need 0 <= t2={t2} <= t1={t1} <= t={t}")
    s = 1.0 if sign == POSITIVE else -1.0
    if s * y < 0.0 or s * x < 0.0:
        raise SignViolation(f"{sign} curve with y={y}, x={x}")
    if not (t2 == 0.0 and t1 == 0.0):
        if t2 == 0.0 and y != 0.0:
            raise SignViolation(f"curve touches the interface at t=0 but y={y}")
        if t1 == t and x != 0.0:
            raise TimeOrderViolation(f"t1={t1}=t but x={x} != 0")
    return ControlCurve(t_end=float(t), x_end=float(x), y=float(y),
                        t2=float(t2), t1=float(t1), sign=sign)


def _segment_slope_cost(h: ConvexFlux, duration: float, dx: float) -> float:
    slope = dx / duration
    dlo, dhi = h.deriv_range()
    if slope < dlo - 1e-12 or slope > dhi + 1e-12:
        raise SlopeOutOfRange(
            f"segment slope {slope:g} outside h' range [{dlo:g}, {dhi:g}]"
        )
    return duration * legendre(h, slope)


def cost_J(curve: ControlCurve, data: InitialProfile, h: ConvexFlux) -> float:
    """J(gamma, v0, h) = v0(gamma(0)) + int_0^t h*(gamma'(s)) ds."""
    total = float(data.v0(np.asarray(curve.y)))
    for t_from, t_to, x_from, x_to in curve.segments():
        dur = t_to - t_from
        if dur <= 0.0:
            continue
        if x_from == 0.0 and x_to == 0.0 and not curve.is_direct:
            total += dur * legendre(h, 0.0)
        else:
            total += _segment_slope_cost(h, dur, x_to - x_from)
    return total


def cost_Jpm(curve: ControlCurve, data: InitialProfile, h: ConvexFlux,
             sign: str) -> float:
    """One-sided cost: the h* integral restricted to {s : gamma(s) strictly
    on the `sign` side}; resting segments contribute nothing."""
    if sign not in (POSITIVE, NEGATIVE):
        raise ValueError(f"sign must be '{POSITIVE}' or '{NEGATIVE}'")
    total = float(data.v0(np.asarray(curve.y)))
    want = 1.0 if sign == POSITIVE else -1.0
    for t_from, t_to, x_from, x_to in curve.segments():
        dur = t_to - t_from
        if dur <= 0.0:
            continue
        if x_from == 0.0 and x_to == 0.0:
            continue  # resting (or identically-zero direct) segment
        side = np.sign(x_from + x_to)  # one endpoint may sit on the interface
        if side == want:
            total += _segment_slope_cost(h, dur, x_to - x_from)
    return total
