"""Stationary nets: residuals, length minimization, spectra, certificates.

The solver minimizes total (multiplicity-weighted) length over vertex
positions and edge interior samples with an analytic gradient and
L-BFGS line search; stationarity is reported as a discrete geodesic
curvature per edge, a weighted inward-tangent balance per vertex and the
l2 norm of the full length gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .nets import DegenerateNetError, GammaNet
from .surfaces import Surface


@dataclass
class StationarityReport:
    edge_residual: float
    vertex_residual: float
    total_first_variation_norm: float

    def max_residual(self):
        return max(self.edge_residual, self.vertex_residual)


@dataclass
class SolveResult:
    net: GammaNet
    report: StationarityReport
    converged: bool
    iterations: int
    length: float
    lengths_history: list = field(default_factory=list)
    message: str = ""


@dataclass
class EmbeddednessCertificate:
    F1: float
    F2_values: dict
    dE_min: dict
    dEE_min: dict
    C3_norm: float
    M: int
    satisfied: dict

    def all_satisfied(self):
        return all(self.satisfied.values())


@dataclass
class ClosedGeodesicResult:
    ok: bool
    reason: str
    circles: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# dof packing
# ---------------------------------------------------------------------------

class _Dofs:
    """Flat parametrization: vertex positions plus edge interior samples.

    Edge endpoints are tied to their vertices through fixed offsets
    (lattice shifts on periodic charts), so moving a vertex moves every
    incident polyline end consistently.
    """

    def __init__(self, net: GammaNet):
        self.net = net
        self.vorder = list(net.vertex_points.keys())
        self.vindex = {v: i for i, v in enumerate(self.vorder)}
        self.offsets = []
        for i, e in enumerate(net.graph.edges):
            chart, pts = net.edge_paths[i]
            c0, x0 = net.vertex_points[e.v0]
            c1, x1 = net.vertex_points[e.v1]
            if chart != c0 or chart != c1:
                raise ValueError("edge endpoints must share the chart of their vertices")
            self.offsets.append((pts[0] - x0, pts[-1] - x1))
        self.nv = len(self.vorder)
        self.interior_counts = [pts.shape[0] - 2 for _, pts in net.edge_paths]
        self.size = 2 * self.nv + 2 * sum(self.interior_counts)

    def pack(self):
        x = np.empty(self.size)
        for i, v in enumerate(self.vorder):
            x[2 * i:2 * i + 2] = self.net.vertex_points[v][1]
        ofs = 2 * self.nv
        for (chart, pts), m in zip(self.net.edge_paths, self.interior_counts):
            x[ofs:ofs + 2 * m] = pts[1:-1].ravel()
            ofs += 2 * m
        return x

    def unpack(self, x):
        net = self.net.copy()
        for i, v in enumerate(self.vorder):
            chart, _ = net.vertex_points[v]
            net.vertex_points[v] = (chart, x[2 * i:2 * i + 2].copy())
        ofs = 2 * self.nv
        for j, (e, m) in enumerate(zip(net.graph.edges, self.interior_counts)):
            chart, pts = net.edge_paths[j]
            pts = pts.copy()
            pts[1:-1] = x[ofs:ofs + 2 * m].reshape(m, 2)
            off0, off1 = self.offsets[j]
            pts[0] = net.vertex_points[e.v0][1] + off0
            pts[-1] = net.vertex_points[e.v1][1] + off1
            net.edge_paths[j] = (chart, pts)
            ofs += 2 * m
        return net

    def scatter_point_grads(self, point_grads):
        """Accumulate per-edge sample gradients into the dof gradient."""
        g = np.zeros(self.size)
        ofs = 2 * self.nv
        for j, (e, m) in enumerate(zip(self.net.graph.edges, self.interior_counts)):
            gp = point_grads[j]
            g[ofs:ofs + 2 * m] += gp[1:-1].ravel()
            ofs += 2 * m
            i0 = self.vindex[e.v0]
            i1 = self.vindex[e.v1]
            g[2 * i0:2 * i0 + 2] += gp[0]
            g[2 * i1:2 * i1 + 2] += gp[-1]
        return g


def _length_and_point_grads(net: GammaNet, metric: Surface):
    """Discrete length and its gradient w.r.t. every polyline sample."""
    total = 0.0
    point_grads = []
    for i, e in enumerate(net.graph.edges):
        chart, pts = net.edge_paths[i]
        delta = np.diff(pts, axis=0)
        mids = 0.5 * (pts[:-1] + pts[1:])
        g = metric.metric(chart, mids)
        dg = metric.metric_deriv(chart, mids)
        gd = np.einsum("sij,sj->si", g, delta)
        seg = np.sqrt(np.einsum("si,si->s", delta, gd))
        q = np.einsum("skij,si,sj->sk", dg, delta, delta)
        total += e.mult * float(np.sum(seg))
        gp = np.zeros_like(pts)
        # coincident samples contribute zero length; their (undefined)
        # direction gets a zero subgradient so probing steps stay finite
        safe = np.where(seg > 0.0, seg, 1.0)[:, None]
        gp[1:] += np.where(seg[:, None] > 0.0, (gd + 0.25 * q) / safe, 0.0)
        gp[:-1] += np.where(seg[:, None] > 0.0, (-gd + 0.25 * q) / safe, 0.0)
        point_grads.append(e.mult * gp)
    return total, point_grads


def length_gradient_norm(net: GammaNet, metric: Surface):
    dofs = _Dofs(net)
    _, pg = _length_and_point_grads(net, metric)
    return float(np.linalg.norm(dofs.scatter_point_grads(pg)))


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def _inward_tangents(net: GammaNet, metric: Surface):
    """Per vertex: list of (edge index, endpoint, g-unit inward tangent,
    chart point of the incident polyline end)."""
    out = {v: [] for v in net.graph.vertices}
    for i, e in enumerate(net.graph.edges):
        chart, pts = net.edge_paths[i]
        for endpoint, vec, at in ((0, pts[1] - pts[0], pts[0]),
                                  (1, pts[-2] - pts[-1], pts[-1])):
            g = metric.metric(chart, at)
            nrm = float(np.sqrt(vec @ g @ vec))
            if nrm == 0.0:
                raise DegenerateNetError("zero tangent at a vertex")
            out[e.endpoint(endpoint)].append((i, endpoint, vec / nrm, (chart, at)))
    return out

def stationarity_residual(net: GammaNet, metric: Surface) -> StationarityReport:
    """Discrete geodesic curvature, vertex balance defect and gradient norm."""
    edge_res = 0.0
    for i, _ in enumerate(net.graph.edges):
        chart, pts = net.edge_paths[i]
        if pts.shape[0] < 3:
            continue
        m = pts.shape[0] - 1
        du = 1.0 / m
        x = pts[1:-1]
        acc = (pts[2:] - 2 * pts[1:-1] + pts[:-2]) / du**2
        vel = (pts[2:] - pts[:-2]) / (2 * du)
        gam = metric.christoffel(chart, x)
        a = acc + np.einsum("skij,si,sj->sk", gam, vel, vel)
        g = metric.metric(chart, x)
        vv = np.einsum("si,sij,sj->s", vel, g, vel)
        if np.any(vv == 0.0):
            raise DegenerateNetError("zero velocity along an edge")
        av = np.einsum("si,sij,sj->s", a, g, vel)
        a_normal = a - (av / vv)[:, None] * vel
        kappa = np.sqrt(np.einsum("si,sij,sj->s", a_normal, g, a_normal)) / vv
        edge_res = max(edge_res, float(np.max(kappa)) if len(kappa) else 0.0)

    vertex_res = 0.0
    for v, incid in _inward_tangents(net, metric).items():
        if not incid:
            continue
        chart, at = incid[0][3]
        g = metric.metric(chart, at)
        s = np.zeros(2)
        for i, _endpoint, unit, _ in incid:
            s = s + net.graph.edges[i].mult * unit
        vertex_res = max(vertex_res, float(np.sqrt(s @ g @ s)))

    return StationarityReport(edge_res, vertex_res, length_gradient_norm(net, metric))


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def solve_stationary(init: GammaNet, metric: Surface, tol=1e-8, max_iter=2000,
                     length_floor=None, require_good=True) -> SolveResult:
    """Minimize total length from an initial net.

    Deterministic: L-BFGS with the analytic discrete-length gradient.
    When an edge collapses below the floor (default 1e-4 times the
    metric's injectivity lower bound) the result is flagged as not
    converged with a collapse message; a degenerate *initial* net raises
    DegenerateNetError.
    """
    if require_good and not all(init.graph.is_good()):
        raise ValueError("initial graph is not good on every component")
    if length_floor is None:
        length_floor = 1e-4 * metric.injectivity_lower_bound
    if init.min_edge_length(metric) <= length_floor:
        raise DegenerateNetError("initial net already below the edge length floor")

    history = []
    net = init.copy()
    samples = [pts.shape[0] for _, pts in net.edge_paths]
    total_iters = 0
    message = ""
    # Length is reparametrization-invariant, so pure descent lets samples
    # drift tangentially and bunch up; interleave short L-BFGS rounds
    # with arclength-uniform resampling to keep the polylines immersed.
    while total_iters < max_iter:
        dofs = _Dofs(net)

        def objective(x, dofs=dofs):
            candidate = dofs.unpack(x)
            L, pg = _length_and_point_grads(candidate, metric)
            return L, dofs.scatter_point_grads(pg)

        res = minimize(objective, dofs.pack(), jac=True, method="L-BFGS-B",
                       options={"maxiter": min(200, max_iter - total_iters),
                                "gtol": 1e-14, "ftol": 1e-16})
        total_iters += int(res.nit)
        message = str(res.message)
        net = dofs.unpack(res.x)
        history.append(float(res.fun))
        if net.min_edge_length(metric) <= length_floor:
            report = StationarityReport(float("inf"), float("inf"), float("inf"))
            return SolveResult(net=net, report=report, converged=False,
                               iterations=total_iters, length=net.length(metric),
                               lengths_history=history,
                               message="an edge collapsed below the length floor")
        net = net.resample(metric, samples)
        if length_gradient_norm(net, metric) <= tol:
            break
        if len(history) >= 2 and abs(history[-2] - history[-1]) < 1e-15 and res.nit <= 1:
            break
    # final polish without resampling: from a near-stationary state the
    # tangential drift is negligible and L-BFGS can reach the tolerance
    if length_gradient_norm(net, metric) > tol:
        dofs = _Dofs(net)

        def objective(x, dofs=dofs):
            candidate = dofs.unpack(x)
            L, pg = _length_and_point_grads(candidate, metric)
            return L, dofs.scatter_point_grads(pg)

        res = minimize(objective, dofs.pack(), jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "gtol": 1e-14, "ftol": 1e-18})
        total_iters += int(res.nit)
        message = str(res.message)
        polished = dofs.unpack(res.x)
        if polished.min_edge_length(metric) > length_floor:
            net = polished
        history.append(float(res.fun))
    # Newton polish on the gradient: line-search methods bottom out when
    # length changes fall below machine epsilon (gradient ~1e-7); a few
    # pseudo-inverse Newton steps on grad = 0 reach the 1e-8 regime.
    if length_gradient_norm(net, metric) > tol:
        net = _newton_polish(net, metric, tol)
    report = stationarity_residual(net, metric)
    converged = report.total_first_variation_norm <= tol
    return SolveResult(net=net, report=report, converged=converged,
                       iterations=total_iters, length=net.length(metric),
                       lengths_history=history, message=message)


def stationary_tracker(init: GammaNet, metric0: Surface, rcond=1e-7, h=1e-6):
    """Branch-tracking continuation for perturbed metrics.

    Returns ``track(metric)`` which chord-Newton-iterates the length
    gradient to zero starting from ``init``, reusing the pseudo-inverted
    Hessian computed once at ``metric0``.  The pseudo-inverse suppresses
    motion along the near-null (reparametrization / symmetry) valley, so
    the result follows the stationary branch through ``init`` instead of
    sliding to a distant minimizer of the degenerate family.
    """
    dofs = _Dofs(init)
    x0 = dofs.pack()

    def grad(x, metric):
        candidate = dofs.unpack(x)
        _, pg = _length_and_point_grads(candidate, metric)
        return dofs.scatter_point_grads(pg)

    n = x0.size
    g0 = grad(x0, metric0)
    H = np.empty((n, n))
    for j in range(n):
        ej = np.zeros(n)
        ej[j] = h
        H[:, j] = (grad(x0 + ej, metric0) - g0) / h
    P = np.linalg.pinv(0.5 * (H + H.T), rcond=rcond)

    def track(metric, max_steps=40, tol=1e-11):
        x = x0.copy()
        for _ in range(max_steps):
            step = -P @ grad(x, metric)
            x = x + step
            if np.linalg.norm(step) <= tol:
                break
        return dofs.unpack(x)

    return track


def _newton_polish(net: GammaNet, metric: Surface, tol, max_steps=6, h=1e-6):
    """Damped Newton iteration on the length gradient.

    The Hessian (forward differences of the analytic gradient) is
    singular along reparametrization and symmetry directions; the
    pseudo-inverse step ignores those and corrects only the directions
    that carry gradient.
    """
    dofs = _Dofs(net)

    def grad(x):
        candidate = dofs.unpack(x)
        _, pg = _length_and_point_grads(candidate, metric)
        return dofs.scatter_point_grads(pg)

    x = dofs.pack()
    g = grad(x)
    for _ in range(max_steps):
        gnorm = np.linalg.norm(g)
        if gnorm <= 0.1 * tol:
            break
        n = x.size
        H = np.empty((n, n))
        for j in range(n):
            ej = np.zeros(n)
            ej[j] = h
            H[:, j] = (grad(x + ej) - g) / h
        H = 0.5 * (H + H.T)
        step = -np.linalg.pinv(H, rcond=1e-7) @ g
        scale = 1.0
        while scale > 1e-3:
            g_new = grad(x + scale * step)
            if np.linalg.norm(g_new) < gnorm:
                x = x + scale * step
                g = g_new
                break
            scale *= 0.5
        else:
            break
    return dofs.unpack(x)


# ---------------------------------------------------------------------------
# second variation
# ---------------------------------------------------------------------------

def second_variation_spectrum(net: GammaNet, metric: Surface, k=None,
                              residual_tol=1e-6, h=1e-5):
    """Eigenvalues of the discretized length Hessian.

    Edge interior samples move along their chart-coordinate unit normals
    (one dof each), vertices move freely (two dofs); this normal-only
    parametrization carries no reparametrization null directions, so
    every numerical zero mode corresponds to a Jacobi field.  Flat
    chart-coordinate inner product throughout.
    """
    resid = length_gradient_norm(net, metric)
    if resid > residual_tol:
        raise ValueError(f"net is not stationary enough for a spectrum "
                         f"(gradient norm {resid:.3e} > {residual_tol:g})")

    dofs = _Dofs(net)
    normals = []
    for chart, pts in net.edge_paths:
        t = pts[2:] - pts[:-2]
        n = np.stack([-t[:, 1], t[:, 0]], axis=-1)
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        normals.append(n)

    nz = 2 * dofs.nv + sum(n.shape[0] for n in normals)

    def perturb(z):
        x = dofs.pack().copy()
        x[:2 * dofs.nv] += z[:2 * dofs.nv]
        ofs_x = 2 * dofs.nv
        ofs_z = 2 * dofs.nv
        for j, n in enumerate(normals):
            m = n.shape[0]
            x[ofs_x:ofs_x + 2 * m] += (z[ofs_z:ofs_z + m, None] * n).ravel()
            ofs_x += 2 * m
            ofs_z += m
        return x

    def grad_z(z):
        netz = dofs.unpack(perturb(z))
        _, pg = _length_and_point_grads(netz, metric)
        gfull = dofs.scatter_point_grads(pg)
        g = np.empty(nz)
        g[:2 * dofs.nv] = gfull[:2 * dofs.nv]
        ofs_x = 2 * dofs.nv
        ofs_z = 2 * dofs.nv
        for n in normals:
            m = n.shape[0]
            g[ofs_z:ofs_z + m] = np.einsum("mi,mi->m", gfull[ofs_x:ofs_x + 2 * m].reshape(m, 2), n)
            ofs_x += 2 * m
            ofs_z += m
        return g

    H = np.empty((nz, nz))
    for j in range(nz):
        ej = np.zeros(nz)
        ej[j] = h
        H[:, j] = (grad_z(ej) - grad_z(-ej)) / (2 * h)
    H = 0.5 * (H + H.T)
    eig = np.linalg.eigvalsh(H)
    order = np.argsort(np.abs(eig))
    eig = eig[order]
    if k is not None:
        eig = eig[:k]
    return np.sort(eig)


def is_nondegenerate(net: GammaNet, metric: Surface, tol):
    """No Jacobi field beyond the reparametrization modes.

    One exact null direction per single-loop component (the tangential
    slide of its base vertex) is excluded before testing min |lambda|.
    """
    eig = second_variation_spectrum(net, metric)
    n_loops = 0
    for comp in net.graph.components():
        edges = [net.graph.edges[i] for i in comp]
        if len(edges) == 1 and edges[0].v0 == edges[0].v1:
            n_loops += 1
    order = np.argsort(np.abs(eig))
    remaining = eig[order][n_loops:]
    return bool(len(remaining) > 0 and np.min(np.abs(remaining)) > tol)


# ---------------------------------------------------------------------------
# embeddedness certificate
# ---------------------------------------------------------------------------

def _param_values(m, is_loop):
    return np.linspace(0.0, 1.0, m)


def _circle_dist(a, b):
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


def embeddedness_certificate(net: GammaNet, metric: Surface, M_bound,
                             cert_samples=65) -> EmbeddednessCertificate:
    """Evaluate the separation functionals and the bound conditions.

    Distances are geodesic distances under the metric; the injectivity
    lower bound configured on the metric stands in for inj(g) in the
    separation windows.
    """
    M = int(M_bound)
    net = net.resample(metric, cert_samples)
    inj = metric.injectivity_lower_bound
    edges = net.graph.edges

    lengths = [net.edge_length(i, metric) for i in range(len(edges))]
    F1 = min(lengths)

    incid = _inward_tangents(net, metric)
    F2 = {}
    for v, lst in incid.items():
        for a in range(len(lst)):
            for b in range(a + 1, len(lst)):
                (e1, i1, u1, (chart, at)) = lst[a]
                (e2, i2, u2, _) = lst[b]
                g = metric.metric(chart, at)
                val = float(u1 @ g @ u2)  # inner product of inward unit tangents
                F2[((e1, i1), (e2, i2))] = val
                F2[((e2, i2), (e1, i1))] = val

    dE_min = {}
    for i, e in enumerate(edges):
        chart, pts = net.edge_paths[i]
        m = pts.shape[0]
        t = _param_values(m, e.v0 == e.v1)
        window = min(inj / lengths[i], 0.5)
        best = np.inf
        for a in range(m):
            for b in range(a + 1, m):
                sep = _circle_dist(t[a], t[b]) if e.v0 == e.v1 else abs(t[a] - t[b])
                if sep >= window - 1e-12:
                    best = min(best, metric.distance(chart, pts[a], chart, pts[b]))
        dE_min[i] = float(best)

    dEE_min = {}
    for i, e in enumerate(edges):
        for j, ep in enumerate(edges):
            if i == j:
                continue
            chart_i, pts_i = net.edge_paths[i]
            chart_j, pts_j = net.edge_paths[j]
            ti = _param_values(pts_i.shape[0], False)
            tj = _param_values(pts_j.shape[0], False)
            wi = inj / lengths[i]
            wj = inj / lengths[j]
            shared = [(ii, jj) for ii in (0, 1) for jj in (0, 1)
                      if ep.endpoint(ii) == e.endpoint(jj)]
            best = np.inf
            for a in range(len(ti)):
                excluded_ends = {ii for ii, jj in shared if abs(ti[a] - jj) <= wi}
                for b in range(len(tj)):
                    if any(abs(tj[b] - ii) < wj for ii in excluded_ends):
                        continue
                    best = min(best, metric.distance(chart_i, pts_i[a], chart_j, pts_j[b]))
            dEE_min[(i, j)] = float(best)

    C3 = 0.0
    for i, _ in enumerate(edges):
        chart, pts = net.edge_paths[i]
        m = pts.shape[0] - 1
        f = pts
        d1 = np.gradient(f, 1.0 / m, axis=0)
        d2 = np.gradient(d1, 1.0 / m, axis=0)
        d3 = np.gradient(d2, 1.0 / m, axis=0)
        C3 = max(C3, sum(float(np.max(np.linalg.norm(d, axis=1))) for d in (f, d1, d2, d3)))

    satisfied = {
        2: C3 <= M,
        3: F1 >= 1.0 / M,
        4: all(v <= 1.0 - 1.0 / M for v in F2.values()),
        5: all(v >= 1.0 / M for v in dE_min.values()),
        6: all(v >= 1.0 / M for v in dEE_min.values()),
    }
    return EmbeddednessCertificate(F1=float(F1), F2_values=F2, dE_min=dE_min,
                                   dEE_min=dEE_min, C3_norm=float(C3), M=M,
                                   satisfied=satisfied)


# ---------------------------------------------------------------------------
# closed geodesic certificate
# ---------------------------------------------------------------------------

def closed_geodesic_certificate(net: GammaNet, metric: Surface, relations=None,
                                tol=1e-6) -> ClosedGeodesicResult:
    """Check that tangent-matching relations concatenate the net into
    immersed circles with transverse self-intersections.

    ``relations`` is a list of pairs ((edge_index, i1), (edge_index, i2));
    with ``relations=None`` a pairing is searched automatically by
    matching opposite inward tangents.  A supplied relation set that is
    not a perfect pairing of the vertex incidences raises ValueError.
    """
    incid = _inward_tangents(net, metric)

    if relations is None:
        relations = []
        for v, lst in incid.items():
            if len(lst) % 2 != 0:
                return ClosedGeodesicResult(False, f"odd incidence degree at vertex {v!r}")
            used = set()
            for a in range(len(lst)):
                if a in used:
                    continue
                e1, i1, u1, (chart, at) = lst[a]
                g = metric.metric(chart, at)
                found = None
                for b in range(a + 1, len(lst)):
                    if b in used:
                        continue
                    _, _, u2, _ = lst[b]
                    if np.sqrt((u1 + u2) @ g @ (u1 + u2)) <= tol:
                        found = b
                        break
                if found is None:
                    return ClosedGeodesicResult(False, f"no opposite tangent match at vertex {v!r}")
                used.update((a, found))
                e2, i2, _, _ = lst[found]
                relations.append(((e1, i1), (e2, i2)))
    else:
        paired = {}
        for (p1, p2) in relations:
            for p in (p1, p2):
                if p in paired:
                    raise ValueError(f"endpoint {p} appears in two relations")
                paired[p] = True
        for v, lst in incid.items():
            pts = {(e, i) for e, i, _, _ in lst}
            covered = {p for p in paired if p in pts}
            if covered != pts:
                raise ValueError(f"relations are not a perfect pairing at vertex {v!r}")

    # tangent matching on the supplied/constructed relations
    unit = {}
    where = {}
    for v, lst in incid.items():
        for e, i, u, loc in lst:
            unit[(e, i)] = u
            where[(e, i)] = loc
    for (p1, p2) in relations:
        chart, at = where[p1]
        g = metric.metric(chart, at)
        s = unit[p1] + unit[p2]
        if np.sqrt(s @ g @ s) > tol:
            return ClosedGeodesicResult(False, f"tangents do not match through {p1}/{p2}")

    # transversality of all non-matched co-incident pairs
    matched = {frozenset(r) for r in relations}
    for v, lst in incid.items():
        for a in range(len(lst)):
            for b in range(a + 1, len(lst)):
                e1, i1, u1, (chart, at) = lst[a]
                e2, i2, u2, _ = lst[b]
                if frozenset(((e1, i1), (e2, i2))) in matched:
                    continue
                g = metric.metric(chart, at)
                if abs(float(u1 @ g @ u2)) > 1.0 - tol:
                    return ClosedGeodesicResult(False,
                                                f"collinear tangents at vertex {v!r} are not transverse")

    # concatenate edges into circles along the pairing
    succ = {}
    for (p1, p2) in relations:
        succ[p1] = p2
        succ[p2] = p1
    remaining = set(range(len(net.graph.edges)))
    circles = []
    while remaining:
        e = min(remaining)
        start = (e, 0)
        walk = []
        cur_edge, cur_start = e, 0
        while True:
            remaining.discard(cur_edge)
            chart, pts = net.edge_paths[cur_edge]
            path = pts if cur_start == 0 else pts[::-1]
            walk.append((chart, path))
            arrive = (cur_edge, 1 - cur_start)
            nxt = succ[arrive]
            cur_edge, cur_start = nxt
            if (cur_edge, cur_start) == start:
                break
            if cur_edge not in remaining:
                raise ValueError("relations do not close up into circles")
        circles.append(walk)
    return ClosedGeodesicResult(True, "ok", circles)
