"""First-order Godunov finite-volume reference solver with an
(A,B)-connection interface flux.

Interior faces use the classical Godunov flux for a convex h,

    F(a, b) = max( h(max(a, theta_h)), h(min(b, theta_h)) ),

and the face sitting exactly at x = 0 uses the connection-adapted flux

    F_AB(a, b) = max( F_g(a, A), F_f(B, b) )
               = max( g(max(a, theta_g)), f(min(b, theta_f)), g(A) ),

the unique monotone interface flux whose two-state steady profiles are
exactly the admissible (A,B) states (for critical connections it collapses
to max(g(max(a, theta_g)), f(min(b, theta_f)))).  Monotonicity, not
accuracy, is the point: this solver is the entropy-solution oracle the
explicit formulas are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import UnstableBlowup
from .fluxes import Connection, ConvexFlux, find_minimizer
from .initial_data import InitialProfile


@dataclass(frozen=True, eq=False)
class FVMState:
    edges: np.ndarray       # N+1 uniform edges with edges[i_face] == 0
    u: np.ndarray           # N cell averages
    t_now: float
    i_face: int
    dx: float
    bound: float            # invariant sup bound on |u|

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def mass(self):
        return float(np.sum(self.u) * self.dx)


def make_fvm_state(data: InitialProfile, f: ConvexFlux, g: ConvexFlux,
                   conn: Connection, x_lo: float, x_hi: float,
                   n: int) -> FVMState:
    """Uniform grid with a face pinned to x = 0; exact initial cell averages
    from the primitive of the data."""
    if not (x_lo < 0.0 < x_hi) or n < 16:
        raise ValueError("domain must straddle 0 and n >= 16")
    dx = (x_hi - x_lo) / n
    n_left = max(1, int(round(-x_lo / dx)))
    n_right = max(1, n - n_left)
    edges = np.concatenate([
        -dx * np.arange(n_left, 0, -1), [0.0], dx * np.arange(1, n_right + 1)
    ])
    averages = np.diff(data.v0(edges)) / dx
    bound = max(float(np.max(np.abs(averages))), abs(conn.A), abs(conn.B),
                abs(find_minimizer(f).theta), abs(find_minimizer(g).theta))
    return FVMState(edges=edges, u=averages, t_now=0.0, i_face=n_left,
                    dx=dx, bound=bound + 1e-12)


def godunov_flux(h: ConvexFlux, a, b):
    """Classical two-point Godunov flux for a convex flux h."""
    theta = find_minimizer(h).theta
    return np.maximum(h.eval(np.maximum(a, theta)), h.eval(np.minimum(b, theta)))


def interface_flux(f: ConvexFlux, g: ConvexFlux, conn: Connection, a, b):
    """(A,B)-connection Godunov flux at the interface face."""
    tg = find_minimizer(g).theta
    tf = find_minimizer(f).theta
    gA = g.eval(conn.A)
    return np.maximum(
        np.maximum(g.eval(np.maximum(a, tg)), f.eval(np.minimum(b, tf))), gA)


def face_fluxes(state: FVMState, f: ConvexFlux, g: ConvexFlux,
                conn: Connection):
    """All N+1 face fluxes, outflow (copy) ghosts at the ends."""
    u = state.u
    i = state.i_face
    n = len(u)
    F = np.empty(n + 1)
    F[0] = float(g.eval(u[0]))
    if i > 1:
        F[1:i] = godunov_flux(g, u[: i - 1], u[1:i])
    F[i] = float(interface_flux(f, g, conn, u[i - 1], u[i]))
    if i + 1 < n:
        F[i + 1 : n] = godunov_flux(f, u[i : n - 1], u[i + 1 :])
    F[n] = float(f.eval(u[-1]))
    return F


def _max_speed(state: FVMState, f: ConvexFlux, g: ConvexFlux,
               conn: Connection) -> float:
    lo = min(float(np.min(state.u)), conn.A, conn.B)
    hi = max(float(np.max(state.u)), conn.A, conn.B)
    # |h'| of a convex flux is maximal at interval endpoints
    cands = [abs(float(f.deriv(lo))), abs(float(f.deriv(hi))),
             abs(float(g.deriv(lo))), abs(float(g.deriv(hi)))]
    return max(max(cands), 1e-12)


def step(state: FVMState, f: ConvexFlux, g: ConvexFlux, conn: Connection,
         dt: float) -> FVMState:
    """One conservative explicit update u_i -= dt/dx (F_{i+1/2} - F_{i-1/2})."""
    F = face_fluxes(state, f, g, conn)
    u_new = state.u - (dt / state.dx) * np.diff(F)
    if float(np.max(np.abs(u_new))) > 2.0 * state.bound:
        raise UnstableBlowup(
            f"cell average {float(np.max(np.abs(u_new))):g} exceeded twice "
            f"the invariant bound {state.bound:g} at t={state.t_now:g}")
    return replace(state, u=u_new, t_now=state.t_now + dt)


def evolve(state: FVMState, f: ConvexFlux, g: ConvexFlux, conn: Connection,
           T: float, cfl: float = 0.45) -> FVMState:
    """March to time T with dt = cfl dx / max|h'| recomputed every step."""
    if not (0.0 < cfl <= 0.5):
        raise ValueError("cfl must lie in (0, 0.5]")
    if T < state.t_now:
        raise ValueError("T must be >= current time")
    while state.t_now < T - 1e-14:
        dt = cfl * state.dx / _max_speed(state, f, g, conn)
        dt = min(dt, T - state.t_now)
        state = step(state, f, g, conn, dt)
    return replace(state, t_now=T)


def snapshot_csv(state: FVMState, path):
    """Same schema as the explicit-formula field dumps, for direct diffing."""
    with open(path, "w") as fh:
        fh.write("x,u,foot_type,foot_value\n")
        for x, u in zip(state.centers, state.u):
            fh.write(f"{x:.17g},{u:.17g},cell,0\n")
