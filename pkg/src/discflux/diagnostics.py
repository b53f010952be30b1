"""Total-variation measurement, refinement verdicts, and solver comparison.

The regularity theorems are statements about exact solutions, so on a grid
they become refinement verdicts: TV over a region is "bounded" when the last
two refinement levels agree to 5%, "growing" when it increases by at least
20% at every consecutive level, and "inconclusive" otherwise.  Both
thresholds are conventions and are overridable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GridMismatch
from .godunov import FVMState
from .pipeline import exact_field, fvm_solution, scenario_profile
from .scenarios import Scenario
from .solver import SolutionField

GROW_THRESHOLD = 0.20
STABLE_THRESHOLD = 0.05


def total_variation(values) -> float:
    """Sum of absolute increments."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.sum(np.abs(np.diff(v))))


@dataclass(frozen=True)
class RegionTV:
    name: str
    interval: tuple
    tv: float
    n_points: int
    note: str = ""


@dataclass(frozen=True)
class TVReport:
    t: float
    regions: tuple
    refinement_levels: tuple = ()
    verdicts: dict = field(default_factory=dict)

    def region(self, name: str) -> RegionTV:
        for r in self.regions:
            if r.name == name:
                return r
        raise KeyError(name)


def tv_regions(fld: SolutionField, M: float, eps: float) -> TVReport:
    """TV restricted to I(R(t)) = (0, R), I(L(t)) = (L, 0),
    I(M, eps) = {eps <= |x| <= M}, and the full grid."""
    if not eps < M:
        raise ValueError("need eps < M")
    xs, u = fld.xs, fld.u
    out = []
    for name, mask, interval in [
        ("interface_right", (xs > 0) & (xs < fld.R), (0.0, fld.R)),
        ("interface_left", (xs < 0) & (xs > fld.L), (fld.L, 0.0)),
        ("exterior", (np.abs(xs) >= eps) & (np.abs(xs) <= M), (eps, M)),
        ("full", np.ones_like(xs, dtype=bool), (float(xs[0]), float(xs[-1]))),
    ]:
        vals = u[mask]
        note = "" if vals.size else "empty region"
        out.append(RegionTV(name=name, interval=interval,
                            tv=total_variation(vals),
                            n_points=int(vals.size), note=note))
    # the interface region of the theorems is the union of the two sides
    both = out[0].tv + out[1].tv
    out.insert(0, RegionTV(name="interface", interval=(fld.L, fld.R),
                           tv=both, n_points=out[0].n_points + out[1].n_points,
                           note=""))
    return TVReport(t=fld.t, regions=tuple(out))


def series_verdict(tvs, grow: float = GROW_THRESHOLD,
                   stable: float = STABLE_THRESHOLD,
                   atol: float = 1e-6) -> str:
    """Refinement verdict for one TV series across levels.

    Series that never rise above `atol` are noise-level and read as bounded.
    """
    tvs = [float(v) for v in tvs]
    if len(tvs) < 2:
        return "inconclusive"
    if max(tvs) <= atol:
        return "bounded"
    scale = max(max(tvs), 1e-30)
    tiny = 1e-12 * scale
    growing = all(b >= a * (1.0 + grow) and b > a + tiny
                  for a, b in zip(tvs[:-1], tvs[1:]))
    last, prev = tvs[-1], tvs[-2]
    bounded = abs(last - prev) <= stable * max(abs(last), abs(prev), tiny)
    if growing:
        return "growing"
    if bounded:
        return "bounded"
    return "inconclusive"


def refinement_study(sc: Scenario, t: float, levels, M: Optional[float] = None,
                     eps: Optional[float] = None, n_profile: int = 801,
                     grow: float = GROW_THRESHOLD,
                     stable: float = STABLE_THRESHOLD,
                     solvers=("exact", "fvm")) -> TVReport:
    """Solve at each level with both solvers and attach per-region verdicts.

    Regions are cut by the exact solver's fronts at each level; the sampled
    initial-data TV rides along under the name 'initial_data'.
    """
    levels = list(levels)
    if len(levels) < 3:
        raise ValueError("need at least 3 refinement levels")
    span = sc.domain[1] - sc.domain[0]
    if M is None:
        M = 0.45 * span
    if eps is None:
        eps = 1e-3 * span
    rows = []
    for n in levels:
        data = sc.data(n)
        tvs = {}
        fld = None
        if "exact" in solvers:
            profile, _ = scenario_profile(sc, t, n=n, n_profile=n_profile,
                                          data=data)
            # uniform sampling: the TV at resolution n must not pre-resolve
            # the interface region through the clustered pack
            fld = exact_field(sc, t, n, profile=profile, data=data,
                              clustered=False)
            rep = tv_regions(fld, M=M, eps=eps)
            for r in rep.regions:
                tvs[f"exact:{r.name}"] = r.tv
        if "fvm" in solvers:
            state = fvm_solution(sc, t, n, data=data)
            xs = state.centers
            u = state.u
            tvs["fvm:full"] = total_variation(u)
            if fld is not None:
                tvs["fvm:interface"] = (
                    total_variation(u[(xs > 0) & (xs < fld.R)])
                    + total_variation(u[(xs < 0) & (xs > fld.L)]))
        grid = np.linspace(sc.domain[0], sc.domain[1], n)
        tvs["initial_data"] = data.sampled_tv(grid)
        rows.append((n, tvs))
    names = sorted(set().union(*[set(tvs) for _, tvs in rows]))
    verdicts = {}
    for name in names:
        series = [tvs.get(name, np.nan) for _, tvs in rows]
        verdicts[name] = series_verdict(series, grow=grow, stable=stable)
    return TVReport(t=t, regions=(), refinement_levels=tuple(rows),
                    verdicts=verdicts)


def _cells_from_nodes(xs):
    """Voronoi cell edges around point values."""
    mids = 0.5 * (xs[:-1] + xs[1:])
    first = xs[0] - (mids[0] - xs[0])
    last = xs[-1] + (xs[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def cross_compare(fld: SolutionField, state: FVMState) -> tuple:
    """(L1 distance, L-infinity distance away from shocks) between the
    explicit-formula field and a finite-volume state at the same time."""
    if abs(fld.t - state.t_now) > 1e-9 * max(1.0, abs(fld.t)):
        raise GridMismatch(
            f"times differ: field t={fld.t:g}, fvm t={state.t_now:g}")
    e1 = _cells_from_nodes(fld.xs)
    e2 = state.edges
    lo = max(e1[0], e2[0])
    hi = min(e1[-1], e2[-1])
    if not lo < hi:
        raise GridMismatch("grids do not overlap")
    edges = np.unique(np.concatenate([e1, e2]))
    edges = edges[(edges >= lo) & (edges <= hi)]
    mids = 0.5 * (edges[:-1] + edges[1:])
    w = np.diff(edges)
    i1 = np.clip(np.searchsorted(e1, mids) - 1, 0, len(fld.u) - 1)
    i2 = np.clip(np.searchsorted(e2, mids) - 1, 0, len(state.u) - 1)
    diff = np.abs(fld.u[i1] - state.u[i2])
    l1 = float(np.sum(diff * w))
    # exclude a 5 dx band around shocks detected on the reference grid
    u2 = state.u
    rng = float(np.max(u2) - np.min(u2))
    jumps = np.abs(np.diff(u2))
    shock_x = state.centers[:-1][jumps > 0.5 * max(rng, 1e-30)] + 0.5 * state.dx
    away = np.ones_like(mids, dtype=bool)
    for sx in shock_x:
        away &= np.abs(mids - sx) > 5.0 * state.dx
    linf_away = float(np.max(diff[away])) if np.any(away) else 0.0
    return l1, linf_away


def report_to_rows(report: TVReport):
    """Flatten a refinement report to (series, N, tv) rows plus verdicts."""
    rows = []
    for n, tvs in report.refinement_levels:
        for name in sorted(tvs):
            rows.append((name, n, tvs[name]))
    return rows


def report_svg(report: TVReport, path, width: int = 640, height: int = 400):
    """Minimal SVG line plot of TV vs refinement level per series."""
    series = {}
    for name, n, tv in report_to_rows(report):
        series.setdefault(name, []).append((n, tv))
    if not series:
        return
    all_n = sorted({n for pts in series.values() for n, _ in pts})
    all_tv = [tv for pts in series.values() for _, tv in pts]
    tv_max = max(max(all_tv), 1e-12)
    pad = 50
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]

    def sx(n):
        lo, hi = np.log2(all_n[0]), np.log2(all_n[-1])
        f = 0.0 if hi == lo else (np.log2(n) - lo) / (hi - lo)
        return pad + f * (width - 2 * pad)

    def sy(tv):
        return height - pad - (tv / tv_max) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, (name, pts) in enumerate(sorted(series.items())):
        color = colors[i % len(colors)]
        path_d = " ".join(f"{'M' if j == 0 else 'L'}{sx(n):.1f},{sy(tv):.1f}"
                          for j, (n, tv) in enumerate(sorted(pts)))
        parts.append(f'<path d="{path_d}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{pad}" y="{15 + 13 * i}" fill="{color}" '
                     f'font-size="11">{name} [{report.verdicts.get(name, "?")}]'
                     f'</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
