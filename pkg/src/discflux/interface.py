"""Interface state: the auxiliary costs b+-, their derivatives, the extreme
characteristic feet y+-(t), and the boundary traces lambda+-(t).

b+(t) is the optimal cost, over positive control curves ending at (0, t), of
J(gamma, v0, f); b-(t) mirrors it on the left with g.  The go-then-rest part
of the family never improves on the direct family: for a fixed foot y > 0,
d/ds J(y, s) = f(theta_f) - f((f')^{-1}(-y/s)) < 0, so the optimum always
sits at a direct curve, with the foot y = 0 curve being exactly the resting
curve.  The optimizer below therefore searches feet only; the full (y, s)
scan survives as a test oracle.

For piecewise-constant data the objective y -> v0(y) + t h*((x - y)/t) is
convex on every data cell (linear + convex), so its global minimum is found
exactly by enumerating cell endpoints and the per-cell stationary feet
y* = x - t h'(u_cell).

The derivative formulas and the two-branch trace definitions:

    b'_-(t) = -g((g')^{-1}(-y_-(t)/t))   if y_-(t) < 0,   -g(theta_g) if y_-(t) = 0
    b'_+(t) = -f((f')^{-1}(-y_+(t)/t))   if y_+(t) > 0,   -f(theta_f) if y_+(t) = 0

    lambda_+(t) = f_-^{-1}(-b'_+)                     if -b'_+ >  max(-b'_-, f(B))
                  f_+^{-1}(max(-b'_-, f(B)))          otherwise
    lambda_-(t) = g_+^{-1}(-b'_-)                     if -b'_- >= max(-b'_+, g(A))
                  g_-^{-1}(max(-b'_+, g(A)))          otherwise

Both branches give the same flux level f(lambda_+) = g(lambda_-) =
max(-b'_+, -b'_-, g(A)), which the profile stores once (phi) and integrates
once; the value functions on the two sides then share the identical integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import InvariantViolation, SlopeOutOfRange
from .fluxes import (
    Connection,
    ConvexFlux,
    branch_inverse,
    deriv_inverse,
    find_minimizer,
    validate_connection,
)
from .initial_data import InitialProfile

_TIE_TOL = 1e-12
_SCAN_POINTS = 2049


def _objective(x, t, data: InitialProfile, h: ConvexFlux, y):
    """v0(y) + t * h*((x - y)/t) evaluated on an array of feet."""
    y = np.asarray(y, dtype=float)
    p = (x - y) / t
    q = deriv_inverse(h, p)
    q = np.atleast_1d(q)
    return np.asarray(data.v0(y), dtype=float) + t * (p * q - np.asarray(h.eval(q)))


def optimize_direct(x, t, data: InitialProfile, h: ConvexFlux, extreme: int,
                    y_min: float, y_max: float):
    """Minimize v0(y) + t h*((x-y)/t) over feet y in [y_min, y_max].

    extreme=+1 returns the smallest optimal foot, extreme=-1 the largest
    (the paper's inf/sup selection for the +/- sides).

    Returns (value, foot, state): `state` is the characteristic state carried
    from the foot whenever it is known exactly (the winning candidate was a
    stationary foot strictly inside a constant-data cell, so the state is the
    cell value with no root-finding), and None otherwise.
    """
    if y_min > y_max:
        raise SlopeOutOfRange(
            f"empty foot range at x={x}, t={t}: slope {x / t:g} outside h' range"
        )
    if data.is_piecewise:
        b = data.breakpoints
        v = data.cell_values
        inside = b[(b > y_min) & (b < y_max)]
        # per-cell stationary feet y* = x - t h'(u_cell), kept only strictly
        # inside their cells so the carried state is exactly the cell value
        stat = x - t * np.asarray(h.deriv(v), dtype=float)
        cell_lo = np.concatenate([[-np.inf], b])
        cell_hi = np.concatenate([b, [np.inf]])
        ok = (stat > cell_lo) & (stat < cell_hi) & (stat >= y_min) & (stat <= y_max)
        ys = np.concatenate([[y_min, y_max], inside, stat[ok]])
        states = np.concatenate([
            np.full(2 + len(inside), np.nan), v[ok]])
        cost = _objective(x, t, data, h, ys)
        cmin = float(np.min(cost))
        tol = _TIE_TOL * max(1.0, abs(cmin))
        ties = cost <= cmin + tol
        foot = float(np.min(ys[ties]) if extreme > 0 else np.max(ys[ties]))
        at_foot = ties & (ys == foot)
        state = None
        if np.any(at_foot & ~np.isnan(states)):
            state = float(states[at_foot & ~np.isnan(states)][0])
        return cmin, foot, state
    # callable data: dense scan then bounded refinement
    ys = np.linspace(y_min, y_max, _SCAN_POINTS)
    if y_min < 0.0 < y_max:
        ys = np.sort(np.append(ys, 0.0))
    cost = _objective(x, t, data, h, ys)
    order = np.argsort(cost, kind="stable")
    best_val = float(cost[order[0]])
    results = []
    seen = set()
    for k in order[:6]:
        if cost[k] > best_val + 1e-6 * max(1.0, abs(best_val)):
            break
        lo = ys[max(k - 1, 0)]
        hi = ys[min(k + 1, len(ys) - 1)]
        key = (round(lo, 12), round(hi, 12))
        if key in seen:
            continue
        seen.add(key)
        if hi - lo < 1e-14:
            results.append((float(cost[k]), float(ys[k])))
            continue
        res = optimize.minimize_scalar(
            lambda yy: float(_objective(x, t, data, h, np.array([yy]))[0]),
            bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-11},
        )
        results.append((float(res.fun), float(res.x)))
    vmin = min(r[0] for r in results)
    tol = max(1e-11, _TIE_TOL * max(1.0, abs(vmin)))
    feet = [r[1] for r in results if r[0] <= vmin + tol]
    foot = min(feet) if extreme > 0 else max(feet)
    return vmin, foot, None


def _compute_b_impl(t: float, data: InitialProfile, h: ConvexFlux, side: str):
    if t <= 0.0:
        raise ValueError("compute_b needs t > 0")
    dlo, dhi = h.deriv_range()
    if side == "+":
        value, foot, state = optimize_direct(0.0, t, data, h, +1, 0.0, -t * dlo)
    elif side == "-":
        value, foot, state = optimize_direct(0.0, t, data, h, -1, -t * dhi, 0.0)
    else:
        raise ValueError("side must be '+' or '-'")
    rest = 1.0 if abs(foot) <= 1e-13 * max(1.0, t) else 0.0
    return value, foot, rest, state


def compute_b(t: float, data: InitialProfile, h: ConvexFlux, side: str):
    """Optimal one-sided cost to the interface point (0, t).

    Returns (value, y_foot, rest_fraction); y_foot is the extreme optimal
    foot (inf for '+', sup for '-'), rest_fraction is 1.0 when the optimum
    is the resting curve (foot 0) and 0.0 otherwise.
    """
    value, foot, rest, _ = _compute_b_impl(t, data, h, side)
    return value, foot, rest


def compute_bprime(t: float, h: ConvexFlux, side: str, y_foot: float) -> float:
    """Closed-form b' from the extreme foot: -h((h')^{-1}(-y/t)), or
    -h(theta_h) when the optimum rests on the interface (y = 0)."""
    m = find_minimizer(h)
    if abs(y_foot) <= 1e-13 * max(1.0, t):
        return -m.min_value
    return -float(h.eval(deriv_inverse(h, -y_foot / t)))


def lambdas_from_bprime(bp_plus, bp_minus, f: ConvexFlux, g: ConvexFlux,
                        conn: Connection):
    """Vectorized two-branch boundary traces (lambda_+, lambda_-)."""
    mb_p = -np.asarray(bp_plus, dtype=float)
    mb_m = -np.asarray(bp_minus, dtype=float)
    fB = float(f.eval(conn.B))
    gA = float(g.eval(conn.A))
    # near-ties resolve to the second (clipped) branch, matching the strict
    # inequality in the definition under floating-point noise
    atol = 1e-13 * max(1.0, float(np.max(np.abs(mb_p))),
                       float(np.max(np.abs(mb_m))), abs(fB))
    lam_p = np.empty_like(mb_p)
    first = mb_p > np.maximum(mb_m, fB) + atol
    if np.any(first):
        lam_p[first] = branch_inverse(f, "decreasing", mb_p[first])
    if np.any(~first):
        lam_p[~first] = branch_inverse(
            f, "increasing", np.maximum(mb_m[~first], fB))
    lam_m = np.empty_like(mb_m)
    first_m = mb_m >= np.maximum(mb_p, gA) - atol
    if np.any(first_m):
        lam_m[first_m] = branch_inverse(g, "increasing", mb_m[first_m])
    if np.any(~first_m):
        lam_m[~first_m] = branch_inverse(
            g, "decreasing", np.maximum(mb_p[~first_m], gA))
    return lam_p, lam_m


def compute_lambda(t: float, profile: "InterfaceProfile", conn: Connection,
                   f: ConvexFlux, g: ConvexFlux):
    """Trace pair at one node time, from the profile's b' values."""
    k = int(np.argmin(np.abs(profile.times - t)))
    lam_p, lam_m = lambdas_from_bprime(
        np.array([profile.bprime_plus[k]]),
        np.array([profile.bprime_minus[k]]), f, g, conn)
    return float(lam_p[0]), float(lam_m[0])


@dataclass(frozen=True, eq=False)
class InterfaceProfile:
    """Time-gridded interface state: b, b', y-feet, traces, and the shared
    interface flux level phi(t) = f(lambda_+) = g(lambda_-) with its
    cumulative integral F and the prefix-minima driving the value functions.
    """

    times: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    bprime_plus: np.ndarray
    bprime_minus: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    y_plus_t: np.ndarray
    y_minus_t: np.ndarray
    rest_plus: np.ndarray
    rest_minus: np.ndarray
    phi: np.ndarray
    F: np.ndarray
    m_plus: np.ndarray
    m_minus: np.ndarray
    m_plus_arg: np.ndarray
    m_minus_arg: np.ndarray
    connection: Connection
    critical: bool

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    def F_at(self, t):
        return np.interp(t, self.times, self.F)

    def m_at(self, t, side: str):
        m = self.m_plus if side == "+" else self.m_minus
        return np.interp(t, self.times, m)

    def lambda_at(self, t, side: str):
        lam = self.lambda_plus if side == "+" else self.lambda_minus
        return np.interp(t, self.times, lam)

    def traces(self, t):
        return (float(self.lambda_at(t, "+")), float(self.lambda_at(t, "-")))

    def to_csv(self, path):
        cols = np.column_stack([
            self.times, self.b_plus, self.b_minus,
            self.bprime_plus, self.bprime_minus,
            self.lambda_plus, self.lambda_minus,
            self.y_plus_t, self.y_minus_t,
        ])
        header = ("t,b_plus,b_minus,bprime_plus,bprime_minus,"
                  "lambda_plus,lambda_minus,y_plus,y_minus")
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in cols:
                fh.write(",".join(f"{val:.17g}" for val in row) + "\n")


def _prefix_min(values):
    """Running minimum and, per node, the index attaining it (last tie)."""
    m = np.minimum.accumulate(values)
    idx = np.arange(len(values))
    hit = np.where(values <= m, idx, -1)
    arg = np.maximum.accumulate(hit)
    return m, arg


def build_profile(data: InitialProfile, f: ConvexFlux, g: ConvexFlux,
                  conn: Connection, T: float, n_nodes: int = 801,
                  validate: bool = True) -> InterfaceProfile:
    """Compute the full interface state on a uniform grid over [0, T].

    Node 0 carries b = 0 and copies b', lambda, y from the first positive
    node (the formulas need t > 0; these values only enter integrals with
    vanishing weight).
    """
    if T <= 0 or n_nodes < 3:
        raise ValueError("need T > 0 and at least 3 profile nodes")
    times = np.linspace(0.0, T, n_nodes)
    nb_p = np.zeros(n_nodes)
    nb_m = np.zeros(n_nodes)
    y_p = np.zeros(n_nodes)
    y_m = np.zeros(n_nodes)
    rest_p = np.zeros(n_nodes)
    rest_m = np.zeros(n_nodes)
    bp_p = np.zeros(n_nodes)
    bp_m = np.zeros(n_nodes)
    for k in range(1, n_nodes):
        t = times[k]
        nb_p[k], y_p[k], rest_p[k], st_p = _compute_b_impl(t, data, f, "+")
        nb_m[k], y_m[k], rest_m[k], st_m = _compute_b_impl(t, data, g, "-")
        # exact carried state when known: b' = -h(state) with no root-finding
        bp_p[k] = -float(f.eval(st_p)) if st_p is not None \
            else compute_bprime(t, f, "+", y_p[k])
        bp_m[k] = -float(g.eval(st_m)) if st_m is not None \
            else compute_bprime(t, g, "-", y_m[k])
    bp_p[0] = bp_p[1]
    bp_m[0] = bp_m[1]
    rest_p[0] = rest_p[1]
    rest_m[0] = rest_m[1]

    lam_p, lam_m = lambdas_from_bprime(bp_p, bp_m, f, g, conn)
    gA = float(g.eval(conn.A))
    phi = np.maximum.reduce([-bp_p, -bp_m, np.full(n_nodes, gA)])
    F = np.concatenate([[0.0], integrate.cumulative_trapezoid(phi, times)])
    m_p, arg_p = _prefix_min(nb_p + F)
    m_m, arg_m = _prefix_min(nb_m + F)

    _, critical = validate_connection(f, g, conn)
    profile = InterfaceProfile(
        times=times, b_plus=nb_p, b_minus=nb_m,
        bprime_plus=bp_p, bprime_minus=bp_m,
        lambda_plus=lam_p, lambda_minus=lam_m,
        y_plus_t=y_p, y_minus_t=y_m,
        rest_plus=rest_p, rest_minus=rest_m,
        phi=phi, F=F,
        m_plus=m_p, m_minus=m_m, m_plus_arg=arg_p, m_minus_arg=arg_m,
        connection=conn, critical=critical,
    )
    if validate:
        _validate_profile(profile, f, g)
    return profile


def _validate_profile(profile: InterfaceProfile, f: ConvexFlux, g: ConvexFlux):
    rh = np.abs(np.asarray(f.eval(profile.lambda_plus))
                - np.asarray(g.eval(profile.lambda_minus)))
    scale = max(1.0, float(np.max(np.abs(profile.phi))))
    if float(np.max(rh)) > 1e-8 * scale:
        raise InvariantViolation(
            f"Rankine-Hugoniot residual {float(np.max(rh)):g} at the interface")
    step_tol = 1e-7 * max(1.0, float(np.max(np.abs(profile.y_plus_t))),
                          float(np.max(np.abs(profile.y_minus_t))))
    dyp = np.diff(profile.y_plus_t[1:])
    dym = np.diff(profile.y_minus_t[1:])
    if dyp.size and float(np.min(dyp)) < -step_tol:
        raise InvariantViolation("y_+(t) lost monotonicity")
    if dym.size and float(np.max(dym)) > step_tol:
        raise InvariantViolation("y_-(t) lost monotonicity")
