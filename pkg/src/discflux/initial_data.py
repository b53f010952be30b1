"""Initial data u0 and its primitive v0(x) = int_0^x u0, with v0(0) = 0.

Piecewise-constant data carries its breakpoints explicitly and gets an exact
piecewise-linear primitive; that exactness is what lets the characteristic
optimizations enumerate candidate feet instead of scanning.  Arbitrary
callables fall back to a quadrature-tabulated primitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate


@dataclass(frozen=True, eq=False)
class InitialProfile:
    """Bounded measurable initial data with its Lipschitz primitive.

    breakpoints/cell_values are set for piecewise-constant data
    (cell_values[j] on (breakpoints[j-1], breakpoints[j]), with the first and
    last values extending to -inf/+inf); both are None for callable data.
    """

    u0: Callable
    v0: Callable
    breakpoints: Optional[np.ndarray]
    cell_values: Optional[np.ndarray]
    support: Optional[tuple] = None

    @property
    def is_piecewise(self):
        return self.breakpoints is not None

    def max_abs(self, span=(-10.0, 10.0)):
        if self.is_piecewise:
            return float(np.max(np.abs(self.cell_values)))
        x = np.linspace(span[0], span[1], 4001)
        return float(np.max(np.abs(self.u0(x))))

    def sampled_tv(self, xs):
        """Total variation of u0 sampled on the grid xs."""
        vals = np.asarray(self.u0(np.asarray(xs, dtype=float)))
        return float(np.sum(np.abs(np.diff(vals))))

    def exact_tv(self):
        """Exact TV for piecewise-constant data."""
        if not self.is_piecewise:
            raise ValueError("exact_tv only defined for piecewise-constant data")
        return float(np.sum(np.abs(np.diff(self.cell_values))))


def from_piecewise_constant(breakpoints, values, support=None) -> InitialProfile:
    """Data taking values[j] on (breakpoints[j-1], breakpoints[j]).

    len(values) == len(breakpoints) + 1; the outer values extend to infinity.
    """
    b = np.asarray(breakpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    if b.ndim != 1 or np.any(np.diff(b) < 0):
        raise ValueError("breakpoints must be a sorted 1-d array")
    if len(v) != len(b) + 1:
        raise ValueError("need len(values) == len(breakpoints) + 1")

    # primitive node values relative to the first breakpoint
    w = np.zeros(len(b))
    if len(b) > 1:
        w[1:] = np.cumsum(v[1:-1] * np.diff(b))

    def u0(x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(b, x, side="right")
        return v[idx]

    def v0_raw(x):
        x = np.asarray(x, dtype=float)
        inner = np.interp(x, b, w)
        out = np.where(
            x < b[0],
            w[0] + v[0] * (x - b[0]),
            np.where(x > b[-1], w[-1] + v[-1] * (x - b[-1]), inner),
        )
        return out

    shift = float(v0_raw(np.asarray(0.0)))

    def v0(x):
        return v0_raw(x) - shift

    return InitialProfile(u0=u0, v0=v0, breakpoints=b, cell_values=v,
                          support=support)


def constant(value: float) -> InitialProfile:
    return from_piecewise_constant([0.0], [value, value])


def riemann(left: float, right: float, x0: float = 0.0) -> InitialProfile:
    return from_piecewise_constant([x0], [left, right])


def from_samples(xs, us) -> InitialProfile:
    """Sampled data treated as piecewise constant with cell edges at midpoints."""
    xs = np.asarray(xs, dtype=float)
    us = np.asarray(us, dtype=float)
    if len(xs) != len(us) or len(xs) < 2:
        raise ValueError("need matching xs/us with at least 2 samples")
    mids = 0.5 * (xs[1:] + xs[:-1])
    return from_piecewise_constant(mids, us)


def from_callable(u0: Callable, x_lo: float, x_hi: float,
                  v0: Optional[Callable] = None, n: int = 4097,
                  tol: float = 1e-10, support=None) -> InitialProfile:
    """Closed-form data; the primitive is tabulated by adaptive quadrature
    on [x_lo, x_hi] unless an exact v0 is supplied.

    [x_lo, x_hi] must cover every characteristic foot a run can reach;
    outside it the primitive is extended linearly.
    """
    if v0 is not None:
        shift = float(v0(0.0))

        def v0_anchored(x):
            return v0(np.asarray(x, dtype=float)) - shift

        return InitialProfile(u0=u0, v0=v0_anchored, breakpoints=None,
                              cell_values=None, support=support)

    grid = np.linspace(x_lo, x_hi, n)
    if not (x_lo < 0.0 < x_hi):
        grid = np.sort(np.append(grid, 0.0))
    pieces = np.zeros(len(grid))
    for i in range(1, len(grid)):
        val, _ = integrate.quad(u0, grid[i - 1], grid[i],
                                epsabs=tol, epsrel=tol, limit=200)
        pieces[i] = val
    table = np.cumsum(pieces)
    table -= np.interp(0.0, grid, table)
    lo_slope = float(u0(grid[0]))
    hi_slope = float(u0(grid[-1]))

    def v0_tab(x):
        x = np.asarray(x, dtype=float)
        inner = np.interp(x, grid, table)
        return np.where(
            x < grid[0],
            table[0] + lo_slope * (x - grid[0]),
            np.where(x > grid[-1], table[-1] + hi_slope * (x - grid[-1]), inner),
        )

    return InitialProfile(u0=u0, v0=v0_tab, breakpoints=None,
                          cell_values=None, support=support)


def truncate_to_support(profile: InitialProfile, M: float) -> InitialProfile:
    """Zero the data outside [-M, M] (compact-support wrapper)."""
    if M <= 0:
        raise ValueError("M must be positive")
    if profile.is_piecewise:
        b = profile.breakpoints
        kept = b[(b > -M) & (b < M)]
        new_b = np.concatenate([[-M], kept, [M]])
        mids = 0.5 * (new_b[:-1] + new_b[1:])
        inner_vals = np.asarray(profile.u0(mids), dtype=float)
        vals = np.concatenate([[0.0], inner_vals, [0.0]])
        return from_piecewise_constant(new_b, vals, support=(-M, M))
    inner = profile.u0

    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= M, inner(x), 0.0)

    return from_callable(u0, -M - 1.0, M + 1.0, support=(-M, M))
