"""Chart-based surfaces, Riemannian metrics, conformal families and volume.

Three built-in model surfaces are provided:

- :class:`FlatTorus` -- single periodic chart, identity metric;
- :class:`Sphere` -- round sphere in two stereographic charts;
- :class:`Dumbbell` -- surface of revolution with two bells joined by a
  thin neck, driven by an analytic radius profile.

All metric evaluators are vectorized over trailing point axes and carry
analytic coordinate derivatives, so Christoffel symbols and geodesic
residuals are free of finite-difference noise.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra


class DomainError(ValueError):
    """Point or parameter lies outside the valid chart/box domain."""


# ---------------------------------------------------------------------------
# scalar fields on a surface
# ---------------------------------------------------------------------------

class ScalarField:
    """Scalar function on a surface, evaluated in chart coordinates.

    ``value(chart, x)`` accepts ``x`` of shape ``(..., 2)``.  The default
    gradient is a central difference of ``value``; analytic subclasses
    override :meth:`grad`.
    """

    def __init__(self, fn, grad_fn=None, name=""):
        self._fn = fn
        self._grad_fn = grad_fn
        self.name = name

    def value(self, chart, x):
        return np.asarray(self._fn(chart, np.asarray(x, dtype=float)))

    def grad(self, chart, x, h=1e-6):
        if self._grad_fn is not None:
            return np.asarray(self._grad_fn(chart, np.asarray(x, dtype=float)))
        x = np.asarray(x, dtype=float)
        g = np.empty(x.shape)
        for k in range(2):
            dx = np.zeros(2)
            dx[k] = h
            g[..., k] = (self.value(chart, x + dx) - self.value(chart, x - dx)) / (2 * h)
        return g


def constant_field(c):
    return ScalarField(lambda chart, x: np.full(np.shape(x)[:-1], float(c)),
                       grad_fn=lambda chart, x: np.zeros(np.shape(x)),
                       name=f"const({c})")


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------

@dataclass
class Chart:
    name: str
    lo: np.ndarray
    hi: np.ndarray
    periodic: tuple = (False, False)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for k in range(2):
            if not self.periodic[k]:
                ok &= (x[..., k] >= self.lo[k]) & (x[..., k] <= self.hi[k])
        return ok


class Surface:
    """Base class: a 2-surface given by charts with SPD tensor evaluators."""

    name = "surface"
    smoothness = 6

    def __init__(self):
        self.charts: dict[str, Chart] = {}
        self.injectivity_lower_bound = 1.0
        self._mesh_cache = {}

    # -- tensor field ------------------------------------------------------

    def metric(self, chart, x):
        """Metric tensor g_ij(x), shape ``(..., 2, 2)``."""
        raise NotImplementedError

    def metric_deriv(self, chart, x):
        """Coordinate derivatives ``d_k g_ij``, shape ``(..., 2, 2, 2)``
        indexed ``[..., k, i, j]``."""
        raise NotImplementedError

    def christoffel(self, chart, x):
        """Christoffel symbols of the second kind, ``(..., 2, 2, 2)``
        indexed ``[..., k, i, j]`` for Gamma^k_ij."""
        g = self.metric(chart, x)
        dg = self.metric_deriv(chart, x)
        ginv = np.linalg.inv(g)
        # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij);
        # dg carries [..., a, i, j] = d_a g_ij
        d_i_gjl = dg                                  # [..., i, j, l]
        d_j_gil = np.swapaxes(dg, -3, -2)             # [..., i, j, l] = d_j g_il
        d_l_gij = np.moveaxis(dg, -3, -1)             # [..., i, j, l] = d_l g_ij
        bracket = d_i_gjl + d_j_gil - d_l_gij
        return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, bracket)

    # -- chart bookkeeping -------------------------------------------------

    def eval_metric(self, chart, x, check=True):
        if chart not in self.charts:
            raise DomainError(f"unknown chart {chart!r} on {self.name}")
        x = np.asarray(x, dtype=float)
        if check and not np.all(self.charts[chart].contains(x)):
            raise DomainError(f"point outside chart {chart!r} domain on {self.name}")
        return self.metric(chart, x)

    def transition(self, src, dst, x):
        if src == dst:
            return np.asarray(x, dtype=float)
        raise DomainError(f"no transition {src!r} -> {dst!r} on {self.name}")

    def wrap(self, chart, x):
        """Canonical representative of a point (identity by default)."""
        return np.asarray(x, dtype=float)

    def same_point(self, chart_a, a, chart_b, b, tol=1e-9):
        if chart_a == chart_b:
            return bool(np.max(np.abs(self.wrap(chart_a, a) - self.wrap(chart_b, b))) < tol)
        return bool(np.max(np.abs(self.transition(chart_a, chart_b, a) - np.asarray(b))) < tol)

    # -- quadrature --------------------------------------------------------

    def quadrature(self, n):
        """Midpoint quadrature covering the surface once.

        Returns a list of ``(chart, points, coord_weights)``; the weights
        carry the coordinate measure of the grid parametrization, so the
        Riemannian area element is ``w * sqrt(det g)``.
        """
        raise NotImplementedError

    # -- distances ---------------------------------------------------------

    def distance(self, chart_p, p, chart_q, q):
        """Geodesic distance between two points (mesh fallback)."""
        return self._mesh_distance(chart_p, p, chart_q, q)

    def geodesic_midpoint(self, chart, p, q):
        """Midpoint of the short geodesic from p to q in one chart.

        Second-order accurate Christoffel-corrected chart midpoint; exact
        on flat charts, overridden analytically on the sphere.
        """
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        mid = 0.5 * (p + q)
        delta = q - p
        gam = self.christoffel(chart, mid)
        corr = np.einsum("...kij,...i,...j->...k", gam, delta, delta)
        return mid - 0.125 * corr

    # mesh Dijkstra fallback used by surfaces without a closed form
    def _mesh_nodes(self, n):
        raise NotImplementedError

    def _mesh_distance(self, chart_p, p, chart_q, q, n=96):
        key = ("mesh", n)
        if key not in self._mesh_cache:
            self._mesh_cache[key] = self._build_mesh_graph(n)
        chart, pts, graph = self._mesh_cache[key]
        p = self.transition(chart_p, chart, p)
        q = self.transition(chart_q, chart, q)
        ip = int(np.argmin(np.sum((pts - p) ** 2, axis=1)))
        iq = int(np.argmin(np.sum((pts - q) ** 2, axis=1)))
        if ip == iq:
            d = q - p
            g = self.metric(chart, 0.5 * (p + q))
            return float(np.sqrt(d @ g @ d))
        dist = dijkstra(graph, directed=False, indices=ip)
        return float(dist[iq])

    def _build_mesh_graph(self, n):
        chart, pts, neighbors = self._mesh_nodes(n)
        rows, cols, vals = [], [], []
        for i, j in neighbors:
            d = pts[j] - pts[i]
            g = self.metric(chart, 0.5 * (pts[i] + pts[j]))
            rows.append(i)
            cols.append(j)
            vals.append(float(np.sqrt(d @ g @ d)))
        graph = coo_matrix((vals, (rows, cols)), shape=(len(pts), len(pts))).tocsr()
        return chart, pts, graph


# ---------------------------------------------------------------------------
# flat torus
# ---------------------------------------------------------------------------

class FlatTorus(Surface):
    """Unit square flat torus; one periodic chart, identity tensor.

    Chart coordinates may be given unwrapped (outside [0,1)^2): the
    metric is translation invariant and :meth:`wrap` reduces modulo the
    lattice.
    """

    name = "torus"

    def __init__(self, injectivity_lower_bound=0.5):
        super().__init__()
        self.charts = {"main": Chart("main", np.zeros(2), np.ones(2), (True, True))}
        self.injectivity_lower_bound = injectivity_lower_bound

    def metric(self, chart, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        return out

    def metric_deriv(self, chart, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2, 2, 2))

    def wrap(self, chart, x):
        return np.mod(np.asarray(x, dtype=float), 1.0)

    def geodesic_midpoint(self, chart, p, q):
        return 0.5 * (np.asarray(p, dtype=float) + np.asarray(q, dtype=float))

    def quadrature(self, n):
        t = (np.arange(n) + 0.5) / n
        xx, yy = np.meshgrid(t, t, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        w = np.full(len(pts), 1.0 / (n * n))
        return [("main", pts, w)]

    def distance(self, chart_p, p, chart_q, q):
        p = self.wrap(chart_p, p)
        q = self.wrap(chart_q, q)
        shifts = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)
        d = q + shifts - p
        return float(np.min(np.sqrt(np.sum(d * d, axis=1))))


# ---------------------------------------------------------------------------
# round sphere
# ---------------------------------------------------------------------------

class Sphere(Surface):
    """Round sphere of radius R in two stereographic charts.

    Chart ``north`` projects from the south pole (origin = north pole),
    chart ``south`` from the north pole; the transition is the inversion
    ``x -> (x1, -x2)/|x|^2``.  In either chart
    ``g = 4 R^2 / (1 + |x|^2)^2 * I``.
    """

    name = "sphere"

    def __init__(self, radius=1.0, chart_extent=3.0):
        super().__init__()
        self.radius = float(radius)
        lo = -chart_extent * np.ones(2)
        hi = chart_extent * np.ones(2)
        self.charts = {"north": Chart("north", lo, hi), "south": Chart("south", lo, hi)}
        self.injectivity_lower_bound = np.pi * self.radius

    def _factor(self, x):
        r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        return 4.0 * self.radius**2 / (1.0 + r2) ** 2

    def metric(self, chart, x):
        x = np.asarray(x, dtype=float)
        lam = self._factor(x)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = lam
        out[..., 1, 1] = lam
        return out

    def metric_deriv(self, chart, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        # d_k lam = -16 R^2 x_k / (1+r2)^3
        dlam = -16.0 * self.radius**2 * x / (1.0 + r2[..., None]) ** 3
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 0] = dlam[..., 0]
        out[..., 0, 1, 1] = dlam[..., 0]
        out[..., 1, 0, 0] = dlam[..., 1]
        out[..., 1, 1, 1] = dlam[..., 1]
        return out

    def transition(self, src, dst, x):
        x = np.asarray(x, dtype=float)
        if src == dst:
            return x
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        out = np.empty_like(x)
        out[..., 0] = x[..., 0]
        out[..., 1] = -x[..., 1]
        return out / r2

    def transition_jacobian(self, src, dst, x):
        x = np.asarray(x, dtype=float)
        if src == dst:
            return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()
        a, b = x[..., 0], x[..., 1]
        r2 = a * a + b * b
        J = np.empty(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = (r2 - 2 * a * a) / r2**2
        J[..., 0, 1] = -2 * a * b / r2**2
        J[..., 1, 0] = 2 * a * b / r2**2
        J[..., 1, 1] = -(r2 - 2 * b * b) / r2**2
        return J

    # embedding helpers ----------------------------------------------------

    def embed(self, chart, x):
        """Map chart points to the sphere of radius R in R^3."""
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        denom = 1.0 + r2
        u = np.empty(x.shape[:-1] + (3,))
        u[..., 0] = 2 * x[..., 0] / denom
        u[..., 1] = 2 * x[..., 1] / denom
        u[..., 2] = (1.0 - r2) / denom
        if chart == "south":
            u[..., 1] = -u[..., 1]
            u[..., 2] = -u[..., 2]
        return self.radius * u

    def unembed(self, chart, u):
        u = np.asarray(u, dtype=float) / self.radius
        if chart == "south":
            u = u * np.array([1.0, -1.0, -1.0])
        denom = 1.0 + u[..., 2]
        return np.stack([u[..., 0] / denom, u[..., 1] / denom], axis=-1)

    def distance(self, chart_p, p, chart_q, q):
        up = self.embed(chart_p, p) / self.radius
        uq = self.embed(chart_q, q) / self.radius
        c = float(np.clip(np.dot(up, uq), -1.0, 1.0))
        return self.radius * float(np.arccos(c))

    def geodesic_midpoint(self, chart, p, q):
        up = self.embed(chart, p)
        uq = self.embed(chart, q)
        m = up + uq
        nrm = np.linalg.norm(m, axis=-1, keepdims=True)
        m = self.radius * m / nrm
        return self.unembed(chart, m)

    def quadrature(self, n):
        """Polar midpoint grids on the unit disk of each chart.

        The two closed unit disks cover each hemisphere once and overlap
        only along the equator (measure zero), which plays the role of a
        partition of unity without double counting.
        """
        out = []
        nr, nphi = n, 2 * n
        rho = (np.arange(nr) + 0.5) / nr
        phi = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi
        rr, pp = np.meshgrid(rho, phi, indexing="ij")
        pts = np.stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel()], axis=-1)
        w = (rr.ravel() / nr) * (2 * np.pi / nphi)
        for chart in ("north", "south"):
            out.append((chart, pts, w))
        return out


# ---------------------------------------------------------------------------
# dumbbell surface of revolution
# ---------------------------------------------------------------------------

class Dumbbell(Surface):
    """Two bells joined by a thin neck, as a surface of revolution.

    Radius profile on u in [0, 1]:

        r(u) = neck * sin(pi u)^2 + bell * sin(2 pi u)^2

    which pinches to points at u = 0, 1 (the poles), peaks near
    u = 1/4, 3/4 (the bell equators) and thins to ``neck`` at u = 1/2.
    Chart coordinates are (u, theta) with theta 2*pi-periodic and the
    embedding (r cos t, r sin t, u), giving the diagonal metric
    diag(1 + r'^2, r^2).
    """

    name = "dumbbell"

    def __init__(self, neck=0.2, bell=1.0, u_margin=0.02):
        super().__init__()
        self.neck = float(neck)
        self.bell = float(bell)
        self.u_margin = float(u_margin)
        self.charts = {"main": Chart("main", np.array([0.0, -np.inf]),
                                     np.array([1.0, np.inf]), (False, True))}
        self.injectivity_lower_bound = self.neck
        us = np.linspace(0.0, 0.5, 4001)
        rs = self.profile(us)
        i = int(np.argmax(rs))
        self.u_equator1 = float(us[i])
        self.u_equator2 = 1.0 - self.u_equator1
        self.r_max = float(rs[i])
        #: circumference of the longest parallel circle on one bell
        self.great_circle_length = 2 * np.pi * self.r_max

    def profile(self, u):
        u = np.asarray(u, dtype=float)
        return self.neck * np.sin(np.pi * u) ** 2 + self.bell * np.sin(2 * np.pi * u) ** 2

    def profile_deriv(self, u):
        u = np.asarray(u, dtype=float)
        return (self.neck * np.pi * np.sin(2 * np.pi * u)
                + 2 * np.pi * self.bell * np.sin(4 * np.pi * u))

    def profile_deriv2(self, u):
        u = np.asarray(u, dtype=float)
        return (2 * np.pi**2 * self.neck * np.cos(2 * np.pi * u)
                + 8 * np.pi**2 * self.bell * np.cos(4 * np.pi * u))

    def metric(self, chart, x):
        x = np.asarray(x, dtype=float)
        u = x[..., 0]
        r = self.profile(u)
        rp = self.profile_deriv(u)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0 + rp * rp
        out[..., 1, 1] = r * r
        return out

    def metric_deriv(self, chart, x):
        x = np.asarray(x, dtype=float)
        u = x[..., 0]
        r = self.profile(u)
        rp = self.profile_deriv(u)
        rpp = self.profile_deriv2(u)
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 0] = 2.0 * rp * rpp
        out[..., 0, 1, 1] = 2.0 * r * rp
        return out

    def wrap(self, chart, x):
        x = np.asarray(x, dtype=float).copy()
        x[..., 1] = np.mod(x[..., 1], 2 * np.pi)
        return x

    def quadrature(self, n):
        m = self.u_margin
        nu, nth = n, n
        u = m + (1.0 - 2 * m) * (np.arange(nu) + 0.5) / nu
        th = 2 * np.pi * (np.arange(nth) + 0.5) / nth
        uu, tt = np.meshgrid(u, th, indexing="ij")
        pts = np.stack([uu.ravel(), tt.ravel()], axis=-1)
        w = np.full(len(pts), (1.0 - 2 * m) / nu * 2 * np.pi / nth)
        return [("main", pts, w)]

    def _mesh_nodes(self, n):
        m = self.u_margin
        nu, nth = n, n
        u = np.linspace(m, 1.0 - m, nu)
        th = np.linspace(0.0, 2 * np.pi, nth, endpoint=False)
        uu, tt = np.meshgrid(u, th, indexing="ij")
        pts = np.stack([uu.ravel(), tt.ravel()], axis=-1)

        def idx(i, j):
            return i * nth + (j % nth)

        neighbors = []
        for i in range(nu):
            for j in range(nth):
                for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (1, -2), (2, 1), (2, -1)):
                    if 0 <= i + di < nu:
                        neighbors.append((idx(i, j), idx(i + di, j + dj)))
        return "main", pts, neighbors


# ---------------------------------------------------------------------------
# conformal families
# ---------------------------------------------------------------------------

class _ScaledSurface(Surface):
    """Base surface with the tensor multiplied by a positive factor field.

    The factor is ``e^{2 phi}`` for :class:`ConformalFamily` and
    ``s(u, t)^2`` for :class:`DumbbellWidthFamily`; subclass-supplied
    callables give the log-factor and its gradient.
    """

    def __init__(self, base: Surface, log_factor, log_factor_grad, name=None):
        super().__init__()
        self.base = base
        self.charts = base.charts
        self.injectivity_lower_bound = base.injectivity_lower_bound
        self.name = name or f"scaled-{base.name}"
        self._phi = log_factor
        self._dphi = log_factor_grad

    def metric(self, chart, x):
        g = self.base.metric(chart, x)
        fac = np.exp(2.0 * self._phi(chart, x))
        return fac[..., None, None] * g

    def metric_deriv(self, chart, x):
        g = self.base.metric(chart, x)
        dg = self.base.metric_deriv(chart, x)
        phi = self._phi(chart, x)
        dphi = self._dphi(chart, x)
        fac = np.exp(2.0 * phi)
        term = 2.0 * dphi[..., :, None, None] * g[..., None, :, :]
        return fac[..., None, None, None] * (dg + term)

    def transition(self, src, dst, x):
        return self.base.transition(src, dst, x)

    def wrap(self, chart, x):
        return self.base.wrap(chart, x)

    def quadrature(self, n):
        return self.base.quadrature(n)

    def geodesic_midpoint(self, chart, p, q):
        # conformal scaling bends geodesics; fall back to the Christoffel
        # corrected midpoint of the scaled metric
        return Surface.geodesic_midpoint(self, chart, p, q)

    def distance(self, chart_p, p, chart_q, q):
        return self._mesh_distance(chart_p, p, chart_q, q)

    def _mesh_nodes(self, n):
        return self.base._mesh_nodes(n)


class ConformalFamily:
    """K-parameter conformal family ``ghat(t) = e^{2 sum_k t_k psi_k} g``."""

    def __init__(self, base: Surface, weights: list[ScalarField], box_radius=1.0):
        self.base = base
        self.weights = list(weights)
        self.box_radius = float(box_radius)

    @property
    def K(self):
        return len(self.weights)

    def _check(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.shape != (self.K,):
            raise DomainError(f"parameter must have {self.K} components")
        if np.any(np.abs(t) >= self.box_radius):
            raise DomainError("parameter outside the (-delta, delta)^K box")
        return t

    def at(self, t) -> Surface:
        t = self._check(t)

        def phi(chart, x):
            acc = 0.0
            for tk, psi in zip(t, self.weights):
                if tk != 0.0:
                    acc = acc + tk * psi.value(chart, x)
            return acc if np.ndim(acc) else np.full(np.shape(x)[:-1], float(acc))

        def dphi(chart, x):
            acc = np.zeros(np.shape(np.asarray(x, dtype=float)))
            for tk, psi in zip(t, self.weights):
                if tk != 0.0:
                    acc = acc + tk * psi.grad(chart, x)
            return acc

        return _ScaledSurface(self.base, phi, dphi, name=f"{self.base.name}@t={t.tolist()}")

    def eval_conformal(self, t, chart, x):
        """Tensor of ghat(t) at a chart point without building a Surface."""
        return self.at(t).eval_metric(chart, x)

    def deriv_tensor(self, t, k):
        """The symmetric 2-tensor d ghat / d t_k = 2 psi_k ghat(t)."""
        surf = self.at(t)
        psi = self.weights[k]

        def tensor(chart, x):
            return 2.0 * psi.value(chart, x)[..., None, None] * surf.metric(chart, x)

        return tensor


class DumbbellWidthFamily:
    """Dumbbell family scaled by (1+t) on one bell and (1-t) on the other.

    The scale factor s(u, t) = 1 + t * beta(u) with beta a smooth odd
    ramp from +1 (bell one) to -1 (bell two) across the neck band, so
    parallel-circle lengths on the bells scale exactly by 1 +/- t and
    the one-width picks up the kink  c * (1 + |t|)  at t = 0.
    """

    def __init__(self, base: Dumbbell, band=0.1):
        self.base = base
        self.band = float(band)
        self.box_radius = 1.0

    def ramp(self, u):
        """beta(u): +1 for u < 1/2 - band, -1 for u > 1/2 + band."""
        u = np.asarray(u, dtype=float)
        s = np.clip((u - (0.5 - self.band)) / (2 * self.band), 0.0, 1.0)
        smooth = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        return 1.0 - 2.0 * smooth

    def ramp_deriv(self, u):
        u = np.asarray(u, dtype=float)
        s = (u - (0.5 - self.band)) / (2 * self.band)
        inside = (s > 0.0) & (s < 1.0)
        ds = 30.0 * s * s * (1.0 - s) ** 2 / (2 * self.band)
        return np.where(inside, -2.0 * ds, 0.0)

    def at(self, t) -> Surface:
        t = float(np.squeeze(t))
        if not -1.0 < t < 1.0:
            raise DomainError("dumbbell family parameter must lie in (-1, 1)")

        def phi(chart, x):
            u = np.asarray(x, dtype=float)[..., 0]
            return np.log(1.0 + t * self.ramp(u))

        def dphi(chart, x):
            x = np.asarray(x, dtype=float)
            u = x[..., 0]
            out = np.zeros(x.shape)
            out[..., 0] = t * self.ramp_deriv(u) / (1.0 + t * self.ramp(u))
            return out

        return _ScaledSurface(self.base, phi, dphi, name=f"dumbbell@t={t}")

    def deriv_tensor(self, t, k=0):
        """d ghat/dt = 2 (beta / s) ghat(t), a conformal-type direction."""
        t = float(np.squeeze(t))
        surf = self.at(t)

        def tensor(chart, x):
            u = np.asarray(x, dtype=float)[..., 0]
            w = self.ramp(u) / (1.0 + t * self.ramp(u))
            return 2.0 * w[..., None, None] * surf.metric(chart, x)

        return tensor


# ---------------------------------------------------------------------------
# volume and field integrals
# ---------------------------------------------------------------------------

def _volume_raw(surface: Surface, n, fld: ScalarField | None = None):
    total = 0.0
    for chart, pts, w in surface.quadrature(n):
        g = surface.metric(chart, pts)
        dens = np.sqrt(np.linalg.det(g))
        if fld is not None:
            dens = dens * fld.value(chart, pts)
        total += float(np.sum(w * dens))
    return total


def volume(surface: Surface, n=256, richardson=True):
    """Total Riemannian area by composite midpoint quadrature.

    With ``richardson`` (default) the h^2 error term is cancelled by a
    second evaluation at twice the resolution; deterministic for a fixed
    ``n``.
    """
    v1 = _volume_raw(surface, n)
    if not richardson:
        return v1
    v2 = _volume_raw(surface, 2 * n)
    return (4.0 * v2 - v1) / 3.0


def surface_integral(surface: Surface, fld: ScalarField, n=256, richardson=True):
    """Integral of a scalar field over the surface (same rule as volume)."""
    v1 = _volume_raw(surface, n, fld)
    if not richardson:
        return v1
    v2 = _volume_raw(surface, 2 * n, fld)
    return (4.0 * v2 - v1) / 3.0


def surface_average(surface: Surface, fld: ScalarField, n=256):
    return surface_integral(surface, fld, n) / volume(surface, n)


def geodesic_distance(surface: Surface, p, q):
    """Distance between points given as (chart, coords) pairs."""
    (cp, xp), (cq, xq) = p, q
    return surface.distance(cp, np.asarray(xp, dtype=float), cq, np.asarray(xq, dtype=float))


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------

def load_surface(config) -> Surface:
    """Build a surface from a config mapping or a [surface] section.

    Recognized keys: ``kind`` (torus | sphere | dumbbell), ``radius``,
    ``neck``, ``bell``, ``injectivity_bound``.
    """
    if isinstance(config, configparser.ConfigParser):
        config = dict(config["surface"]) if config.has_section("surface") else dict(config.defaults())
    kind = str(config.get("kind", "torus")).lower()
    if kind == "torus":
        surf = FlatTorus(injectivity_lower_bound=float(config.get("injectivity_bound", 0.5)))
    elif kind == "sphere":
        surf = Sphere(radius=float(config.get("radius", 1.0)))
        if "injectivity_bound" in config:
            surf.injectivity_lower_bound = float(config["injectivity_bound"])
    elif kind == "dumbbell":
        surf = Dumbbell(neck=float(config.get("neck", 0.2)), bell=float(config.get("bell", 1.0)))
        if "injectivity_bound" in config:
            surf.injectivity_lower_bound = float(config["injectivity_bound"])
    else:
        raise DomainError(f"unknown surface kind {kind!r}")
    return surf
