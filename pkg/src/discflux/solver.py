"""Value functions and the explicit solution formulas.

At a point (x, t) with x > 0 the value function minimizes, over positive
control curves, the one-sided cost with the interface correction

    v0(y) + t2 f*(-y/t2) + (t - t1) f*(x/(t - t1)) - int_{t2}^{t1} f(lambda_+)

(t2 = t1 = 0 collapses to the direct cost v0(y) + t f*((x-y)/t)).  Writing
F(s) = int_0^s phi and m(tau) = min_{s <= tau} [b_+(s) + F(s)], the interface
branch reduces to a one-dimensional search:

    V_int(tau) = m(tau) - F(tau) + (t - tau) f*(x/(t - tau)),

with m, F precomputed on the profile grid.  The solution itself never comes
from differencing v: a direct optimizer gives u = (f')^{-1}((x - y)/t), an
interface optimizer departing at tau gives u = (f')^{-1}(x/(t - tau)), which
equals the boundary trace lambda_+(tau).

Classification follows the extreme-selection conventions: a point is
interface-fed only when its best interface curve beats every direct curve by
a strict margin and departs at tau >= 1e-6 t; ties resolve to the data side,
which makes R(t) = min{x : t_+(x, t) = 0} minimal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .curves import NEGATIVE, POSITIVE, ControlCurve, make_curve
from .errors import SlopeOutOfRange
from .fluxes import ConvexFlux, branch_inverse, deriv_inverse, find_minimizer, legendre
from .initial_data import InitialProfile
from .interface import InterfaceProfile, optimize_direct

DATA_FOOT = 0
INTERFACE_FOOT = 1

_REL_TIE = 1e-12
_TAU_FRACTION = 1e-6


@dataclass(frozen=True)
class ValueSample:
    x: float
    t: float
    v: float
    optimizer: ControlCurve


@dataclass(frozen=True, eq=False)
class SolutionField:
    """u(., t) on a spatial grid with per-node characteristic data."""

    t: float
    xs: np.ndarray
    u: np.ndarray
    foot_type: np.ndarray   # DATA_FOOT / INTERFACE_FOOT
    foot_value: np.ndarray  # y for data feet, departure time tau otherwise
    v: np.ndarray
    R: float
    L: float
    trace_plus: float
    trace_minus: float

    def region(self, lo, hi):
        return (self.xs > lo) & (self.xs < hi)

    def to_csv(self, path):
        names = {DATA_FOOT: "data", INTERFACE_FOOT: "interface"}
        with open(path, "w") as fh:
            fh.write("x,u,foot_type,foot_value\n")
            for x, u, ft, fv in zip(self.xs, self.u, self.foot_type,
                                    self.foot_value):
                fh.write(f"{x:.17g},{u:.17g},{names[int(ft)]},{fv:.17g}\n")


def make_field_grid(x_lo: float, x_hi: float, n: int,
                    cluster_ratio: float = 1.1,
                    dx_min_frac: float = 1e-4) -> np.ndarray:
    """Uniform n-node grid over [x_lo, x_hi] plus geometric packs clustered
    toward the interface (spacing from dx_min up to the uniform spacing),
    excluding x = 0 itself."""
    if not (x_lo < 0.0 < x_hi) or n < 16:
        raise ValueError("grid must straddle 0 and have n >= 16")
    span = x_hi - x_lo
    uniform = np.linspace(x_lo, x_hi, n)
    dx_uni = span / (n - 1)
    dx = dx_min_frac * span
    pack = []
    pos = dx
    while pos < dx_uni and dx < dx_uni:
        pack.append(pos)
        dx *= cluster_ratio
        pos += dx
    pack = np.asarray(pack)
    xs = np.concatenate([uniform, pack[pack < x_hi], -pack[pack < -x_lo]])
    xs = np.unique(xs)
    xs = xs[np.abs(xs) > 1e-300]
    return xs


def _interface_minimum(x: float, t: float, profile: InterfaceProfile,
                       h: ConvexFlux, side: int):
    """Best interface-departing curve for (x, t): (value, tau, t2, inner_foot),
    or None when no departure slope is admissible."""
    dlo, dhi = h.deriv_range()
    dmax = dhi if side > 0 else dlo
    # slope x/(t - tau) must stay within the derivative range
    cap = t - x / dmax  # < t strictly, so the departure slope stays admissible
    if cap <= 0.0:
        return None
    times = profile.times
    k = int(np.searchsorted(times, cap, side="right"))
    if k == 0:
        return None
    m = profile.m_plus if side > 0 else profile.m_minus
    arg = profile.m_plus_arg if side > 0 else profile.m_minus_arg
    taus = times[:k]
    if cap > taus[-1]:
        taus = np.append(taus, cap)
    # cancellation in t - tau can push the endpoint slope past dmax by ulps
    slopes = np.clip(x / (t - taus), min(dlo, 0.0), max(dhi, 0.0))
    q = deriv_inverse(h, slopes)
    hstar = slopes * q - np.asarray(h.eval(q))
    mv = np.interp(taus, times, m)
    Fv = np.interp(taus, times, profile.F)
    vals = mv - Fv + (t - taus) * hstar
    vmin = float(np.min(vals))
    tol = _REL_TIE * max(1.0, abs(vmin))
    tie_idx = np.nonzero(vals <= vmin + tol)[0]
    j = int(tie_idx[-1]) if side > 0 else int(tie_idx[0])

    phiv = np.interp(taus, profile.times, profile.phi)
    best_tau, best_val = float(taus[j]), float(vals[j])
    # Refine inside the two adjacent node intervals by bisection on
    # dV/dtau = m' + h(state(tau)) - phi(tau), parametrized by the departing
    # state q (h'(q) = x/(t - tau)), which needs no nested root-finding:
    # the interval's endpoint states q are already known from the scan.
    h_eval, h_deriv = h.eval, h.deriv
    for a, b in ((max(j - 1, 0), j), (j, min(j + 1, len(taus) - 1))):
        tau_a, tau_b = float(taus[a]), float(taus[b])
        if tau_b - tau_a < 1e-14:
            continue
        mslope = (float(mv[b]) - float(mv[a])) / (tau_b - tau_a)
        phisl = (float(phiv[b]) - float(phiv[a])) / (tau_b - tau_a)
        phi_a = float(phiv[a])

        def dv_of(q_val, tau_val):
            return mslope + float(h_eval(q_val)) \
                - (phi_a + phisl * (tau_val - tau_a))

        q_a, q_b = float(q[a]), float(q[b])
        if dv_of(q_a, tau_a) >= 0.0 or dv_of(q_b, tau_b) <= 0.0:
            continue  # no interior stationary point in this interval
        ql, qh = q_a, q_b  # dV < 0 at ql, > 0 at qh (q may run either way)
        for _ in range(60):
            qm = 0.5 * (ql + qh)
            tau_m = t - x / float(h_deriv(qm))
            if dv_of(qm, tau_m) < 0.0:
                ql = qm
            else:
                qh = qm
        q_star = 0.5 * (ql + qh)
        slope_star = float(h_deriv(q_star))
        tau_star = min(max(t - x / slope_star, tau_a), tau_b)
        hstar_star = q_star * slope_star - float(h_eval(q_star))
        val_star = (float(np.interp(tau_star, taus, mv))
                    - float(np.interp(tau_star, taus, Fv))
                    + (t - tau_star) * hstar_star)
        if val_star < best_val:
            best_val, best_tau = val_star, tau_star
    node = min(int(np.searchsorted(times, best_tau, side="right")) - 1,
               len(times) - 1)
    a = int(arg[max(node, 0)])
    t2 = float(times[a])
    inner_foot = float((profile.y_plus_t if side > 0 else profile.y_minus_t)[a])
    return best_val, best_tau, t2, inner_foot


def _point_solve(x: float, t: float, profile: InterfaceProfile,
                 data: InitialProfile, f: ConvexFlux, g: ConvexFlux):
    """Full optimization at one point: returns a dict with the value, the
    classification, the characteristic datum and the solution value."""
    if x == 0.0 or t <= 0.0:
        raise ValueError("need x != 0 and t > 0")
    side = 1 if x > 0.0 else -1
    h = f if side > 0 else g
    dlo, dhi = h.deriv_range()
    y_lo = x - t * dhi
    y_hi = x - t * dlo
    if side > 0:
        y_lo = max(y_lo, 0.0)
    else:
        y_hi = min(y_hi, 0.0)
    v_dir, y_dir, state = optimize_direct(x, t, data, h, side, y_lo, y_hi)
    inter = _interface_minimum(x, t, profile, h, side)
    use_interface = False
    if inter is not None:
        v_int, tau, t2, inner_foot = inter
        margin = _REL_TIE * max(1.0, abs(v_dir))
        if tau >= _TAU_FRACTION * t and v_int < v_dir - margin:
            use_interface = True
    if use_interface:
        u = float(deriv_inverse(h, x / (t - tau)))
        return {
            "value": v_int, "foot_type": INTERFACE_FOOT, "foot": tau,
            "u": u, "t2": t2, "inner_foot": inner_foot, "side": side,
        }
    u = state if state is not None else float(deriv_inverse(h, (x - y_dir) / t))
    return {
        "value": v_dir, "foot_type": DATA_FOOT, "foot": y_dir,
        "u": u, "t2": 0.0, "inner_foot": y_dir, "side": side,
    }


def value_at(x: float, t: float, profile: InterfaceProfile,
             data: InitialProfile, f: ConvexFlux, g: ConvexFlux) -> ValueSample:
    """Value function sample with its attaining control curve."""
    sol = _point_solve(x, t, profile, data, f, g)
    sign = POSITIVE if sol["side"] > 0 else NEGATIVE
    h = f if sol["side"] > 0 else g
    if sol["foot_type"] == INTERFACE_FOOT:
        curve = make_curve(t, x, sol["inner_foot"], sol["t2"], sol["foot"], sign)
    else:
        curve = make_curve(t, x, sol["foot"], 0.0, 0.0, sign)
    # report the value as the attained cost of the returned curve, so the
    # sample is self-consistent independent of interpolation in the search
    v = interface_cost(curve, data, h, profile)
    return ValueSample(x=x, t=t, v=v, optimizer=curve)


def interface_cost(curve: ControlCurve, data: InitialProfile, h: ConvexFlux,
                   profile: InterfaceProfile) -> float:
    """Lambda-corrected cost of a (possibly resting) control curve: the
    one-sided J with the resting window charged -int phi."""
    total = float(data.v0(np.asarray(curve.y)))
    if curve.is_direct:
        return total + curve.t_end * legendre(h, (curve.x_end - curve.y) / curve.t_end)
    if curve.t2 > 0.0:
        total += curve.t2 * legendre(h, -curve.y / curve.t2)
    if curve.t1 < curve.t_end:
        total += (curve.t_end - curve.t1) * legendre(
            h, curve.x_end / (curve.t_end - curve.t1))
    total -= float(profile.F_at(curve.t1) - profile.F_at(curve.t2))
    return total


def solve_field(t: float, xs: np.ndarray, profile: InterfaceProfile,
                data: InitialProfile, f: ConvexFlux, g: ConvexFlux,
                refine_fronts: bool = True) -> SolutionField:
    """Solve u(., t) on the grid via the explicit formulas, locating the
    fronts R(t) >= 0 >= L(t) by classification changes."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    u = np.zeros(n)
    ft = np.zeros(n, dtype=np.int8)
    fv = np.zeros(n)
    vv = np.zeros(n)
    for i, x in enumerate(xs):
        sol = _point_solve(float(x), t, profile, data, f, g)
        u[i] = sol["u"]
        ft[i] = sol["foot_type"]
        fv[i] = sol["foot"]
        vv[i] = sol["value"]

    def classify(x):
        return _point_solve(float(x), t, profile, data, f, g)["foot_type"]

    def locate_front(side):
        nodes = xs[xs > 0] if side > 0 else -xs[xs < 0][::-1]
        types = ft[xs > 0] if side > 0 else ft[xs < 0][::-1]
        if len(nodes) == 0:
            return 0.0
        data_idx = np.nonzero(types == DATA_FOOT)[0]
        if len(data_idx) == 0:
            return float(nodes[-1])
        first = int(data_idx[0])
        if first == 0:
            return 0.0
        lo, hi = float(nodes[first - 1]), float(nodes[first])
        if refine_fronts:
            target = 0.5 * (hi - lo)
            while hi - lo > target:
                mid = 0.5 * (lo + hi)
                if classify(side * mid) == DATA_FOOT:
                    hi = mid
                else:
                    lo = mid
        return 0.5 * (lo + hi)

    R = locate_front(+1)
    L = -locate_front(-1)
    lam_p, lam_m = profile.traces(t)
    return SolutionField(t=t, xs=xs, u=u, foot_type=ft, foot_value=fv, v=vv,
                         R=R, L=L, trace_plus=lam_p, trace_minus=lam_m)


def fronts(t: float, profile: InterfaceProfile, data: InitialProfile,
           f: ConvexFlux, g: ConvexFlux, x_lo: float, x_hi: float,
           n_coarse: int = 64) -> tuple:
    """(R, L) by bisection on the optimizer type, without a full field."""
    xs = make_field_grid(x_lo, x_hi, n_coarse)
    field = solve_field(t, xs, profile, data, f, g)
    return field.R, field.L


def interface_traces(profile: InterfaceProfile, t: float) -> tuple:
    """One-sided interface traces (u(0+, t), u(0-, t)) = (lambda_+, lambda_-)."""
    return profile.traces(t)


def critical_chain_u(tau: float, profile: InterfaceProfile,
                     data: InitialProfile, f: ConvexFlux, g: ConvexFlux,
                     side: int) -> float:
    """Independent evaluation of the interface-region solution through the
    characteristic-data chain: for x > 0,

        u = f_+^{-1}( g( (g')^{-1}( -y_-(tau)/tau ) ) )

    (and -g(theta_g) inside when y_-(tau) = 0), mirrored with g_-^{-1} f(...)
    for x < 0.  For a critical connection A = theta_g the clip at f(B) =
    g(theta_g) is inactive and this is the pure chain."""
    if side > 0:
        y = float(np.interp(tau, profile.times, profile.y_minus_t))
        if abs(y) <= 1e-12 * max(1.0, tau):
            level = float(g.eval(find_minimizer(g).theta))
        else:
            level = float(g.eval(deriv_inverse(g, -y / tau)))
        level = max(level, float(f.eval(profile.connection.B)))
        return branch_inverse(f, "increasing", level)
    y = float(np.interp(tau, profile.times, profile.y_plus_t))
    if abs(y) <= 1e-12 * max(1.0, tau):
        level = float(f.eval(find_minimizer(f).theta))
    else:
        level = float(f.eval(deriv_inverse(f, -y / tau)))
    level = max(level, float(g.eval(profile.connection.A)))
    return branch_inverse(g, "decreasing", level)
