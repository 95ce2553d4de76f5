"""Sweepout upper bounds for small-p widths and critical-net extraction.

True widths are never computed here: every number this module emits is
the maximum of a cycle length over an explicit sweepout family, labeled
``upper_bound``, optionally followed by midpoint-relaxation curve
shortening of the maximizing cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .nets import Edge, GammaNet, WeightedMultigraph, dumbbell_circle, sphere_latitude
from .surfaces import Dumbbell, FlatTorus, Sphere, Surface, volume


@dataclass
class Sweepout:
    p: int
    grid: np.ndarray
    cycle_fn: object            # parameter -> GammaNet, or None for a degenerate slice
    provenance: str = ""

    def cycles(self):
        return [self.cycle_fn(c) for c in self.grid]


@dataclass
class WidthEstimate:
    p: int
    upper_bound: float
    maximizer: float
    critical_net: GammaNet | None
    shortened_length: float
    collapsed: bool = False


@dataclass
class ShortenResult:
    net: GammaNet
    length: float
    collapsed: bool
    sweeps: int


def _root_surface(surface: Surface):
    s = surface
    while hasattr(s, "base"):
        s = s.base
    return s


# ---------------------------------------------------------------------------
# sweepout recipes
# ---------------------------------------------------------------------------

def _torus_circles(k, c, axis, samples=64):
    """k parallel coordinate circles at offsets c + j/k on the unit torus."""
    verts = [f"v{j}" for j in range(k)]
    graph = WeightedMultigraph(verts, [Edge(v, v, 1) for v in verts])
    t = np.linspace(0.0, 1.0, samples)
    vp = {}
    paths = []
    for j, v in enumerate(verts):
        level = c + j / k
        if axis == "x":
            pts = np.stack([np.full_like(t, level), t], axis=-1)
        else:
            pts = np.stack([t, np.full_like(t, level)], axis=-1)
        vp[v] = ("main", pts[0].copy())
        paths.append(("main", pts))
    return GammaNet(graph, vp, paths)


def build_sweepout(surface: Surface, p, recipe, grid_size=None) -> Sweepout:
    """Level-set sweepout families on the three model surfaces.

    Recipes: ``x-levels`` / ``y-levels`` (torus; for p > 1 the slice is
    ceil(sqrt(p)) parallel circles), ``latitude`` (sphere, p = 1, poles
    degenerate), ``profile`` (dumbbell parallel circles, p = 1) and
    ``neck`` (dumbbell circles localized at the waist, p = 1).
    """
    root = _root_surface(surface)
    if recipe in ("x-levels", "y-levels"):
        if not isinstance(root, FlatTorus):
            raise ValueError(f"recipe {recipe!r} needs a torus surface")
        k = math.ceil(math.sqrt(p))
        axis = "x" if recipe == "x-levels" else "y"
        grid = np.linspace(0.0, 1.0 / k, grid_size or 33)
        return Sweepout(p, grid, lambda c, k=k, axis=axis: _torus_circles(k, c, axis),
                        provenance=f"torus {recipe}, {k} parallel circles")
    if recipe == "latitude":
        if not isinstance(root, Sphere) or p != 1:
            raise ValueError("recipe 'latitude' needs a sphere surface and p = 1")
        grid = np.linspace(0.0, np.pi, grid_size or 65)

        def cycle(colat):
            if colat <= 1e-12 or colat >= np.pi - 1e-12:
                return None
            return sphere_latitude(root, colat)

        return Sweepout(1, grid, cycle, provenance="sphere latitude family")
    if recipe in ("profile", "neck"):
        if not isinstance(root, Dumbbell) or p != 1:
            raise ValueError(f"recipe {recipe!r} needs a dumbbell surface and p = 1")
        if recipe == "profile":
            grid = np.linspace(root.u_margin, 1.0 - root.u_margin, grid_size or 201)
            tag = "dumbbell profile circles"
        else:
            grid = 0.5 + 5e-4 * np.linspace(-1.0, 1.0, grid_size or 21)
            tag = "dumbbell waist-localized circles"
        return Sweepout(1, grid, lambda u: dumbbell_circle(root, u), provenance=tag)
    raise ValueError(f"unsupported recipe/surface pair: {recipe!r} on {root.name}")


def minmax_upper_bound(sweepout: Sweepout, metric: Surface, polish=True,
                       shorten=True) -> WidthEstimate:
    """Maximize cycle length over the sweepout grid; an upper bound only.

    The interior grid maximum is optionally refined by bounded scalar
    maximization of the slice length, and the maximizing cycle is
    shortened to extract a near-critical net.
    """

    def slice_length(c):
        cyc = sweepout.cycle_fn(c)
        return 0.0 if cyc is None else cyc.length(metric)

    lengths = np.array([slice_length(c) for c in sweepout.grid])
    i = int(np.argmax(lengths))
    best_c, best = float(sweepout.grid[i]), float(lengths[i])
    if polish and 0 < i < len(sweepout.grid) - 1:
        res = minimize_scalar(lambda c: -slice_length(c), method="bounded",
                              bounds=(sweepout.grid[i - 1], sweepout.grid[i + 1]),
                              options={"xatol": 1e-10})
        if -res.fun > best:
            best_c, best = float(res.x), float(-res.fun)

    critical = None
    short_len = best
    collapsed = False
    if shorten:
        cyc = sweepout.cycle_fn(best_c)
        if cyc is not None:
            sres = birkhoff_shorten(cyc, metric)
            critical, short_len, collapsed = sres.net, sres.length, sres.collapsed
    return WidthEstimate(p=sweepout.p, upper_bound=best, maximizer=best_c,
                         critical_net=critical, shortened_length=float(short_len),
                         collapsed=collapsed)


# ---------------------------------------------------------------------------
# curve shortening
# ---------------------------------------------------------------------------

def birkhoff_shorten(cycle: GammaNet, metric: Surface, relax=0.5, tol=1e-10,
                     max_sweeps=4000, collapse_floor=None) -> ShortenResult:
    """Midpoint-geodesic relaxation of the loop edges of a cycle.

    Every edge must be a loop; closure offsets (lattice shifts on
    periodic charts) are preserved.  Stops when a sweep lowers the total
    length by less than ``tol``, or flags a collapse when any loop drops
    below the collapse floor (1e-3 x injectivity bound by default).
    """
    for e in cycle.graph.edges:
        if e.v0 != e.v1:
            raise ValueError("birkhoff_shorten expects a union of loop edges")
    if collapse_floor is None:
        collapse_floor = 1e-3 * metric.injectivity_lower_bound

    net = cycle.copy()
    loops = []
    for chart, pts in net.edge_paths:
        loops.append([chart, pts[:-1].copy(), pts[-1] - pts[0]])

    def loop_length(chart, y, offset):
        closed = np.vstack([y, y[0] + offset])
        delta = np.diff(closed, axis=0)
        mids = 0.5 * (closed[:-1] + closed[1:])
        g = metric.metric(chart, mids)
        return float(np.sum(np.sqrt(np.einsum("si,sij,sj->s", delta, g, delta))))

    def total():
        return sum(loop_length(*lp) for lp in loops)

    prev = total()
    sweeps = 0
    collapsed = False
    for sweeps in range(1, max_sweeps + 1):
        for chart, y, offset in loops:
            m = y.shape[0]
            for parity in (0, 1):
                idx = np.arange(parity, m, 2)
                for i in idx:
                    a = y[i - 1] if i > 0 else y[m - 1] - offset
                    b = y[i + 1] if i < m - 1 else y[0] + offset
                    mid = metric.geodesic_midpoint(chart, a, b)
                    y[i] = (1.0 - relax) * y[i] + relax * mid
        cur = total()
        if any(loop_length(*lp) < collapse_floor for lp in loops):
            collapsed = True
            break
        if prev - cur < tol:
            prev = cur
            break
        prev = cur

    for j, (chart, y, offset) in enumerate(loops):
        net.edge_paths[j] = (chart, np.vstack([y, y[0] + offset]))
    for j, e in enumerate(net.graph.edges):
        chart, pts = net.edge_paths[j]
        net.vertex_points[e.v0] = (chart, pts[0].copy())
    return ShortenResult(net=net, length=prev, collapsed=collapsed, sweeps=sweeps)


# ---------------------------------------------------------------------------
# analytic dumbbell model
# ---------------------------------------------------------------------------

def dumbbell_width(t, scale=1.0):
    """Model one-width c(1 + |t|) of the bell-scaled dumbbell family."""
    if not -1.0 < t < 1.0:
        raise ValueError("dumbbell family parameter must lie in (-1, 1)")
    return scale * (1.0 + abs(t))


def dumbbell_realizer(t):
    """Which bell equator attains the model width: S1, S2, or both at 0."""
    if t > 0:
        return "S1"
    if t < 0:
        return "S2"
    return "both"


# ---------------------------------------------------------------------------
# Weyl-ratio probes
# ---------------------------------------------------------------------------

@dataclass
class WeylTable:
    rows: list = field(default_factory=list)       # dicts: p, t, upper_bound, shortened_length, h_p
    lipschitz: dict = field(default_factory=dict)  # p -> max difference quotient of p^{-1/2} w(t)

    def column(self, p, key):
        return [r[key] for r in self.rows if r["p"] == p]


def weyl_ratio_probe(family, p_list, t_grid, recipe="x-levels", vol_n=256,
                     shorten=False) -> WeylTable:
    """h_p(t) = p^{-1/2} x (width upper bound) / Vol^{1/2} over a t-grid.

    Also reports, per p, the maximal difference quotient of the
    normalized bound t -> p^{-1/2} w_p(t) over the grid.
    """
    table = WeylTable()
    for p in p_list:
        normalized = []
        for t in t_grid:
            metric = family.at(t)
            sw = build_sweepout(metric, p, recipe)
            est = minmax_upper_bound(sw, metric, shorten=shorten)
            vol = volume(metric, n=vol_n)
            h_p = est.upper_bound / (math.sqrt(p) * math.sqrt(vol))
            table.rows.append({"p": p, "t": float(t),
                               "upper_bound": est.upper_bound,
                               "shortened_length": est.shortened_length,
                               "h_p": h_p})
            normalized.append(est.upper_bound / math.sqrt(p))
        quot = 0.0
        for a in range(1, len(t_grid)):
            dt = float(t_grid[a]) - float(t_grid[a - 1])
            if dt != 0.0:
                quot = max(quot, abs(normalized[a] - normalized[a - 1]) / abs(dt))
        table.lipschitz[p] = quot
    return table
