"""End-to-end runners wiring scenarios to the two solvers."""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import godunov
from .initial_data import InitialProfile
from .interface import InterfaceProfile, build_profile
from .scenarios import Scenario
from .solver import SolutionField, make_field_grid, solve_field


def scenario_profile(sc: Scenario, T: float, n: Optional[int] = None,
                     n_profile: int = 801,
                     data: Optional[InitialProfile] = None) -> tuple:
    """(interface profile over [0, T], realized data)."""
    if data is None:
        data = sc.data(n)
    profile = build_profile(data, sc.f, sc.g, sc.connection, T,
                            n_nodes=n_profile)
    return profile, data


def exact_field(sc: Scenario, t: float, n: int,
                profile: Optional[InterfaceProfile] = None,
                data: Optional[InitialProfile] = None,
                n_profile: int = 801, clustered: bool = True) -> SolutionField:
    """Solve the explicit formulas at time t on an n-node grid."""
    if data is None:
        data = sc.data(n)
    if profile is None:
        profile, _ = scenario_profile(sc, t, n=n, n_profile=n_profile,
                                      data=data)
    if clustered:
        xs = make_field_grid(sc.domain[0], sc.domain[1], n)
    else:
        xs = np.linspace(sc.domain[0], sc.domain[1], n)
        xs = xs[xs != 0.0]
    return solve_field(t, xs, profile, data, sc.f, sc.g)


def fvm_solution(sc: Scenario, t: float, n: int, cfl: float = 0.45,
                 data: Optional[InitialProfile] = None) -> godunov.FVMState:
    """Godunov reference solution at time t on an n-cell grid."""
    if data is None:
        data = sc.data(n)
    state = godunov.make_fvm_state(data, sc.f, sc.g, sc.connection,
                                   sc.domain[0], sc.domain[1], n)
    return godunov.evolve(state, sc.f, sc.g, sc.connection, t, cfl=cfl)
