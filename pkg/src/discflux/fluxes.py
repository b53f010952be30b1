"""Convex fluxes, their minimizers, branch inverses and Legendre transforms.

A flux h is a C^2 strictly convex superlinear function given by closures for
h, h' and h''.  Everything downstream (characteristic slopes, interface traces,
Godunov fluxes) is built from four primitives defined here:

    theta_h        the unique minimizer of h
    h_+^{-1}, h_-^{-1}   inverses of the increasing / decreasing part of h
    (h')^{-1}      inverse of the derivative, i.e. the conjugate's derivative
    h*(p) = sup_q { p q - h(q) }   the Legendre transform

All root finding is bracketed bisection (fixed 60 iterations), never Newton:
the bisection stays correct where h'' vanishes, which is exactly the regime
(quartic/sextic fluxes) the total-variation theorems are about.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    BelowMinimum,
    BracketExceeded,
    NoSignChange,
    OutOfRange,
)

BISECT_ITERS = 60


def _bisect(func, lo, hi, iters=BISECT_ITERS):
    """Vectorized bisection for func increasing in u; returns u with func(u)~0.

    `lo`, `hi` may be scalars or arrays broadcastable against each other.
    Assumes func(lo) <= 0 <= func(hi) elementwise (callers validate).
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = func(mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _bisect_scalar(func, lo: float, hi: float, iters=BISECT_ITERS) -> float:
    """Scalar bisection (pure float arithmetic) for func increasing in u."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if func(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class ConvexFlux:
    """Strictly convex flux with analytic derivatives on a working bracket.

    The bracket must contain the minimizer and every state a run can reach;
    operations raise OutOfRange/BracketExceeded rather than extrapolate.
    The callables must accept numpy arrays.
    """

    eval: Callable
    deriv: Callable
    deriv2: Callable
    bracket: tuple
    label: str = "flux"

    def __call__(self, u):
        return self.eval(u)

    @property
    def u_lo(self):
        return self.bracket[0]

    @property
    def u_hi(self):
        return self.bracket[1]

    def deriv_range(self):
        return float(self.deriv(self.u_lo)), float(self.deriv(self.u_hi))


@dataclass(frozen=True)
class FluxMinimizer:
    theta: float
    min_value: float


@dataclass(frozen=True)
class Connection:
    """Interface state pair (A, B) with g(A) = f(B), g'(A) <= 0 <= f'(B)."""

    A: float
    B: float


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of checking H1-H3 for a flux pair (f, g).

    H2/H3 hold when the flux is uniformly convex or when every zero of h''
    is also a zero of h' (degenerate convexity only at the critical point).
    """

    h1_ok: bool
    h2_ok: bool
    h3_ok: bool
    uniform_convexity_alpha: Optional[float]
    degenerate_points: list = field(default_factory=list)
    degenerate_points_f: list = field(default_factory=list)
    degenerate_points_g: list = field(default_factory=list)


_MINIMIZER_CACHE: dict = {}


def find_minimizer(h: ConvexFlux) -> FluxMinimizer:
    """Locate theta_h by bisection on h'.

    Requires h'(u_lo) < 0 < h'(u_hi); raises NoSignChange otherwise.
    """
    cached = _MINIMIZER_CACHE.get(id(h))
    if cached is not None and cached[0] is h:
        return cached[1]
    dlo, dhi = h.deriv_range()
    if not (dlo < 0.0 < dhi):
        raise NoSignChange(
            f"{h.label}: h' has no sign change on bracket {h.bracket} "
            f"(h'(lo)={dlo:g}, h'(hi)={dhi:g})"
        )
    theta = float(_bisect(h.deriv, h.u_lo, h.u_hi))
    tol = 1e-12 * max(1.0, abs(dlo), abs(dhi))
    resid = abs(float(h.deriv(theta)))
    if resid > tol:
        # Flat derivative plateau (degenerate convexity): bisection still
        # pins the zero of h' to machine precision in u, keep it.
        pass
    result = FluxMinimizer(theta=theta, min_value=float(h.eval(theta)))
    _MINIMIZER_CACHE[id(h)] = (h, result)
    return result


def branch_inverse(h: ConvexFlux, side: str, v, tol: float = 1e-9):
    """Inverse of the increasing ("increasing") or decreasing branch of h.

    v may be a scalar or array.  Values in [h(theta)-tol, h(theta)] clamp to
    theta; below that raises BelowMinimum.  Roots outside the bracket raise
    BracketExceeded.
    """
    if side not in ("increasing", "decreasing"):
        raise ValueError(f"side must be 'increasing' or 'decreasing', got {side!r}")
    m = find_minimizer(h)
    v_arr = np.asarray(v, dtype=float)
    scalar = v_arr.ndim == 0
    v_arr = np.atleast_1d(v_arr)
    if np.any(v_arr < m.min_value - tol):
        bad = float(np.min(v_arr))
        raise BelowMinimum(
            f"{h.label}: value {bad:g} below minimum {m.min_value:g}"
        )
    vc = np.maximum(v_arr, m.min_value)
    if side == "increasing":
        edge = float(h.eval(h.u_hi))
        if np.any(vc > edge):
            raise BracketExceeded(
                f"{h.label}: value {float(np.max(vc)):g} above h(u_hi)={edge:g}"
            )
        out = _bisect(lambda u: h.eval(u) - vc, m.theta, h.u_hi)
    else:
        edge = float(h.eval(h.u_lo))
        if np.any(vc > edge):
            raise BracketExceeded(
                f"{h.label}: value {float(np.max(vc)):g} above h(u_lo)={edge:g}"
            )
        out = _bisect(lambda u: vc - h.eval(u), h.u_lo, m.theta)
    out = np.where(v_arr <= m.min_value, m.theta, out)
    return float(out[0]) if scalar else out


def deriv_inverse(h: ConvexFlux, p):
    """The unique u in the bracket with h'(u) = p, by bisection on h'.

    Correct (though only bisection-rate accurate in the residual) even where
    h'' = 0, where (h')^{-1} is not Lipschitz.
    """
    dlo, dhi = h.deriv_range()
    eps = 1e-12 * max(1.0, abs(dlo), abs(dhi))
    if isinstance(p, (float, int)):
        if p < dlo - eps or p > dhi + eps:
            raise OutOfRange(
                f"{h.label}: p={p:g} outside derivative range [{dlo:g}, {dhi:g}]")
        pc = min(max(float(p), dlo), dhi)
        hd = h.deriv
        return _bisect_scalar(lambda u: float(hd(u)) - pc, h.u_lo, h.u_hi)
    p_arr = np.asarray(p, dtype=float)
    scalar = p_arr.ndim == 0
    p_arr = np.atleast_1d(p_arr)
    if np.any(p_arr < dlo - eps) or np.any(p_arr > dhi + eps):
        raise OutOfRange(
            f"{h.label}: p in [{float(p_arr.min()):g}, {float(p_arr.max()):g}] "
            f"outside derivative range [{dlo:g}, {dhi:g}]"
        )
    pc = np.clip(p_arr, dlo, dhi)
    out = _bisect(lambda u: h.deriv(u) - pc, h.u_lo, h.u_hi)
    return float(out[0]) if scalar else out


def legendre(h: ConvexFlux, p):
    """Legendre transform h*(p) = p q - h(q) at q = (h')^{-1}(p)."""
    q = deriv_inverse(h, p)
    p_arr = np.asarray(p, dtype=float)
    val = p_arr * q - h.eval(q)
    return float(val) if p_arr.ndim == 0 else val


def conjugate_table(h: ConvexFlux, n: int = 20001):
    """Tabulated Legendre transform along the envelope p_j = h'(u_j).

    Returns (p, hstar) with hstar exact at the nodes:
    h*(h'(u)) = u h'(u) - h(u).  The nodes cluster automatically where h' is
    flat, which is where h* is hardest to interpolate.
    """
    u = np.linspace(h.u_lo, h.u_hi, n)
    p = h.deriv(u)
    hstar = u * p - h.eval(u)
    return p, hstar


def biconjugate_from_table(p, hstar, u):
    """Discrete Legendre transform of a tabulated h*: sup_j (u p_j - h*_j)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    # each tabulated (p_j, h*_j) is a tangent line of h; h** is their sup
    vals = u[:, None] * p[None, :] - hstar[None, :]
    return vals.max(axis=1)


def _flux_hypothesis(h: ConvexFlux, n: int = 4001, tol: float = 1e-9):
    """Scan h'' on the bracket: (alpha or None, degenerate points, h2-style ok)."""
    u = np.linspace(h.u_lo, h.u_hi, n)
    d2 = np.asarray(h.deriv2(u), dtype=float)
    scale = max(1.0, float(np.max(np.abs(d2))))
    alpha = float(np.min(d2))
    if alpha > tol * scale:
        return alpha, [], True
    # collect degenerate clusters where h'' ~ 0
    mask = d2 <= tol * scale
    pts = []
    i = 0
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            seg = u[i : j + 1]
            pts.append(float(seg[np.argmin(d2[i : j + 1])]))
            i = j + 1
        else:
            i += 1
    dscale = max(1.0, abs(h.deriv_range()[0]), abs(h.deriv_range()[1]))
    ok = all(abs(float(h.deriv(p))) <= 1e-6 * dscale for p in pts)
    if np.any(d2 < -tol * scale):
        ok = False
    return None, pts, ok


def check_strict_convexity(h: ConvexFlux, n: int = 2001) -> bool:
    """Sampled strict convexity: h' strictly increasing and midpoints below chords."""
    u = np.linspace(h.u_lo, h.u_hi, n)
    d = np.asarray(h.deriv(u), dtype=float)
    if np.any(np.diff(d) < 0.0):
        return False
    mid = h.eval(0.5 * (u[:-1] + u[1:]))
    chord = 0.5 * (np.asarray(h.eval(u[:-1])) + np.asarray(h.eval(u[1:])))
    return bool(np.all(mid <= chord + 1e-14 * np.maximum(1.0, np.abs(chord))))


def check_superlinearity(h: ConvexFlux, widen: float = 2.0) -> bool:
    """Heuristic superlinearity: h(u)/|u| keeps growing on a widened bracket."""
    lo, hi = h.bracket
    pts = np.array([lo * widen, lo, hi, hi * widen], dtype=float)
    pts = pts[np.abs(pts) > 1e-12]
    ratios = np.asarray(h.eval(pts), dtype=float) / np.abs(pts)
    ok = True
    if lo < 0:
        ok &= ratios[0] > ratios[1]
    if hi > 0:
        ok &= ratios[-1] > ratios[-2]
    return bool(ok)


def validate_hypotheses(f: ConvexFlux, g: ConvexFlux) -> HypothesisReport:
    """Check H1 (strict convexity + superlinearity proxy), H2 (f), H3 (g)."""
    h1 = (
        check_strict_convexity(f)
        and check_strict_convexity(g)
        and check_superlinearity(f)
        and check_superlinearity(g)
    )
    alpha_f, deg_f, ok_f = _flux_hypothesis(f)
    alpha_g, deg_g, ok_g = _flux_hypothesis(g)
    alpha = None
    if alpha_f is not None and alpha_g is not None:
        alpha = min(alpha_f, alpha_g)
    return HypothesisReport(
        h1_ok=h1,
        h2_ok=(alpha_f is not None and alpha_f > 0) or ok_f,
        h3_ok=(alpha_g is not None and alpha_g > 0) or ok_g,
        uniform_convexity_alpha=alpha,
        degenerate_points=sorted(deg_f + deg_g),
        degenerate_points_f=deg_f,
        degenerate_points_g=deg_g,
    )


TOL_CONN = 1e-9


def validate_connection(f: ConvexFlux, g: ConvexFlux, conn: Connection,
                        tol: float = TOL_CONN):
    """Return (valid, critical) for a candidate connection.

    valid: g(A) = f(B), g'(A) <= 0, f'(B) >= 0 within tol.
    critical: A = theta_g or B = theta_f within tol.
    """
    tf = find_minimizer(f)
    tg = find_minimizer(g)
    scale = max(1.0, abs(float(g.eval(conn.A))), abs(float(f.eval(conn.B))))
    valid = (
        abs(float(g.eval(conn.A)) - float(f.eval(conn.B))) <= tol * scale
        and float(g.deriv(conn.A)) <= tol
        and float(f.deriv(conn.B)) >= -tol
    )
    critical = abs(conn.A - tg.theta) <= tol or abs(conn.B - tf.theta) <= tol
    return valid, critical


def make_connection(f: ConvexFlux, g: ConvexFlux, A: Optional[float] = None,
                    B: Optional[float] = None) -> Connection:
    """Build a connection from one state, solving the other via branch inverse.

    Given A, B is found on the increasing branch of f (so f'(B) >= 0); given
    B, A is found on the decreasing branch of g.  With both given they are
    used as-is.  The result always satisfies g(A)=f(B) to solver tolerance.
    """
    if A is not None and B is not None:
        return Connection(A=float(A), B=float(B))
    if A is not None:
        return Connection(A=float(A), B=branch_inverse(f, "increasing", float(g.eval(A))))
    if B is not None:
        return Connection(A=branch_inverse(g, "decreasing", float(f.eval(B))), B=float(B))
    raise ValueError("need at least one of A, B")


# ---------------------------------------------------------------------------
# Builtin flux registry
# ---------------------------------------------------------------------------

_DEFAULT_BRACKETS = {
    "burgers": (-8.0, 8.0),
    "square": (-6.0, 6.0),
    "shifted": (-5.0, 7.0),
    "quartic": (-3.0, 3.0),
    "sextic_plus1": (-2.5, 2.5),
}


def _horner(coeffs):
    """Polynomial evaluator: tight float loop for scalars, polyval for arrays."""
    arr = np.asarray(coeffs, dtype=float)
    lst = [float(c) for c in coeffs]

    def f(u):
        if isinstance(u, (float, int)):
            acc = 0.0
            for c in lst:
                acc = acc * u + c
            return acc
        return np.polyval(arr, u)

    return f


def _poly_flux(coeffs, bracket, label):
    c = np.asarray(coeffs, dtype=float)
    d1 = np.polyder(c)
    d2 = np.polyder(d1)
    h = ConvexFlux(
        eval=_horner(c),
        deriv=_horner(d1),
        deriv2=_horner(d2),
        bracket=tuple(bracket),
        label=label,
    )
    return h


def builtin_flux(key: str, coeffs=None, bracket=None) -> ConvexFlux:
    """Flux registry: burgers (u²/2), square (u²), shifted ((u−1)²−1),
    quartic (u⁴), sextic_plus1 (u⁶+1), polynomial (highest power first).

    Polynomial fluxes are validated convex on their bracket at build time.
    """
    if key == "polynomial":
        if coeffs is None:
            raise ValueError("polynomial flux needs a coefficient list")
        if bracket is None:
            raise ValueError("polynomial flux needs an explicit bracket")
        h = _poly_flux(coeffs, bracket, "polynomial")
        if not check_strict_convexity(h):
            raise ValueError(f"polynomial {list(coeffs)} not convex on {bracket}")
        return h
    table = {
        "burgers": [0.5, 0.0, 0.0],
        "square": [1.0, 0.0, 0.0],
        "shifted": [1.0, -2.0, 0.0],           # (u-1)^2 - 1 = u^2 - 2u
        "quartic": [1.0, 0.0, 0.0, 0.0, 0.0],
        "sextic_plus1": [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    }
    if key not in table:
        raise ValueError(f"unknown flux key {key!r}")
    br = tuple(bracket) if bracket is not None else _DEFAULT_BRACKETS[key]
    return _poly_flux(table[key], br, key)
