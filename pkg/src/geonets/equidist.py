"""Partition/bump systems, discrepancy reports, and the averaging pipeline.

The chain implemented here: build a partition of unity out of plateau
bumps on cells of geodesic radius eps1, measure the per-bump gap between
weighted net averages and the volume average (the discrepancy), make the
weights rational with a common denominator, and merge blocks of nets
into one sequence whose running integral ratio converges to the volume
average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .nets import DegenerateNetError, GammaNet
from .surfaces import (Dumbbell, FlatTorus, ScalarField, Sphere, Surface,
                       surface_average)


# ---------------------------------------------------------------------------
# plateau profiles
# ---------------------------------------------------------------------------

def _smoothstep(s):
    """Quintic plateau ramp: 0 -> 1 on [0, 1] with two vanishing derivatives."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


def _smoothstep_deriv(s):
    inside = (s > 0.0) & (s < 1.0)
    sc = np.clip(s, 0.0, 1.0)
    return np.where(inside, 30.0 * sc * sc * (1.0 - sc) ** 2, 0.0)


def _bump_1d_periodic(x, lo, width, collar, period=1.0):
    """Plateau bump on a circle: 1 on [lo, lo+width], 0 beyond the collars."""
    u = np.mod(np.asarray(x, dtype=float) - lo, period)
    up = _smoothstep((u - (period - collar)) / collar)      # ramp up before lo
    down = 1.0 - _smoothstep((u - width) / collar)           # ramp down after hi
    return np.where(u <= width, 1.0, np.where(u >= period - collar, up, down))


def _bump_1d_periodic_deriv(x, lo, width, collar, period=1.0):
    u = np.mod(np.asarray(x, dtype=float) - lo, period)
    up = _smoothstep_deriv((u - (period - collar)) / collar) / collar
    down = -_smoothstep_deriv((u - width) / collar) / collar
    return np.where(u <= width, 0.0, np.where(u >= period - collar, up, down))


def _bump_1d(x, lo, hi, collar):
    """Plateau bump on the line: 1 on [lo, hi], 0 outside the collars."""
    x = np.asarray(x, dtype=float)
    up = _smoothstep((x - (lo - collar)) / collar)
    down = 1.0 - _smoothstep((x - hi) / collar)
    return np.where(x < lo, up, np.where(x > hi, down, 1.0))


# ---------------------------------------------------------------------------
# bump systems
# ---------------------------------------------------------------------------

@dataclass
class BumpSystem:
    K: int
    eps1: float
    regions: list                 # per-bump descriptors incl. center (chart, point)
    phi: list                     # plateau fields, 1 on the cell, 0 off the collar
    psi: list                     # normalized fields phi_k / sum_l phi_l
    surface: Surface

    def phi_values(self, chart, x):
        return np.stack([p.value(chart, x) for p in self.phi])

    def psi_values(self, chart, x):
        vals = self.phi_values(chart, x)
        return vals / np.sum(vals, axis=0)

    def centers(self):
        return [r["center"] for r in self.regions]


class _NormalizedBump(ScalarField):
    """psi_k = phi_k / sum_l phi_l with the quotient-rule gradient."""

    def __init__(self, phis, k, name=""):
        self._phis = phis
        self._k = k
        self.name = name
        self._grad_fn = None

    def value(self, chart, x):
        vals = np.stack([p.value(chart, x) for p in self._phis])
        return vals[self._k] / np.sum(vals, axis=0)

    def grad(self, chart, x, h=1e-6):
        vals = np.stack([p.value(chart, x) for p in self._phis])
        grads = np.stack([p.grad(chart, x) for p in self._phis])
        total = np.sum(vals, axis=0)
        total_grad = np.sum(grads, axis=0)
        k = self._k
        return (grads[k] * total[..., None] - vals[k][..., None] * total_grad) / (total ** 2)[..., None]


def _torus_partition(surface, eps1, K_min, collar_frac=0.2, n_max=64):
    n = max(math.ceil(math.sqrt(2.0) / eps1), math.ceil(math.sqrt(K_min)))
    if n > n_max:
        raise ValueError(f"eps1 = {eps1} needs a {n}x{n} grid, beyond the "
                         f"resolution budget {n_max}x{n_max}")
    cell = 1.0 / n
    collar = collar_frac * cell
    phi, regions = [], []
    for i in range(n):
        for j in range(n):
            lo = (i * cell, j * cell)

            def fn(chart, x, lo=lo):
                x = np.asarray(x, dtype=float)
                return (_bump_1d_periodic(x[..., 0], lo[0], cell, collar)
                        * _bump_1d_periodic(x[..., 1], lo[1], cell, collar))

            def gfn(chart, x, lo=lo):
                x = np.asarray(x, dtype=float)
                bx = _bump_1d_periodic(x[..., 0], lo[0], cell, collar)
                by = _bump_1d_periodic(x[..., 1], lo[1], cell, collar)
                dbx = _bump_1d_periodic_deriv(x[..., 0], lo[0], cell, collar)
                dby = _bump_1d_periodic_deriv(x[..., 1], lo[1], cell, collar)
                return np.stack([dbx * by, bx * dby], axis=-1)

            phi.append(ScalarField(fn, grad_fn=gfn, name=f"phi[{i},{j}]"))
            regions.append({"kind": "torus-cell", "i": i, "j": j, "cell": cell,
                            "collar": collar,
                            "center": ("main", np.array([lo[0] + cell / 2,
                                                         lo[1] + cell / 2]))})
    K = n * n
    psi = [_NormalizedBump(phi, k, name=f"psi[{k}]") for k in range(K)]
    return BumpSystem(K=K, eps1=eps1, regions=regions, phi=phi, psi=psi,
                      surface=surface)


def _sphere_angles(sphere, chart, x):
    """Colatitude/longitude of chart points (vectorized)."""
    u = sphere.embed(chart, np.asarray(x, dtype=float))
    r = sphere.radius
    theta = np.arccos(np.clip(u[..., 2] / r, -1.0, 1.0))
    lam = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi)
    return theta, lam


def _sphere_partition(surface, eps1, K_min, collar_frac=0.2):
    sphere = surface
    while not isinstance(sphere, Sphere):
        sphere = sphere.base
    R = sphere.radius
    n_theta = max(3, math.ceil(math.sqrt(2.0) * math.pi * R / eps1))
    dth = math.pi / n_theta
    collar_th = collar_frac * dth
    phi, regions = [], []
    for i in range(n_theta):
        th_lo, th_hi = i * dth, (i + 1) * dth
        polar = i == 0 or i == n_theta - 1
        th_mid = 0.5 * (th_lo + th_hi)
        if polar:
            sectors = 1                      # merged polar cap
        else:
            sectors = max(1, math.ceil(math.sqrt(2.0) * 2 * math.pi * R
                                       * math.sin(th_mid) / eps1))
        dlam = 2 * math.pi / sectors
        collar_lam = collar_frac * dlam
        for j in range(sectors):
            lam_lo = j * dlam

            def fn(chart, x, th_lo=th_lo, th_hi=th_hi, lam_lo=lam_lo,
                   sectors=sectors, dlam=dlam, collar_lam=collar_lam):
                theta, lam = _sphere_angles(sphere, chart, x)
                b = _bump_1d(theta, th_lo, th_hi, collar_th)
                if sectors > 1:
                    b = b * _bump_1d_periodic(lam, lam_lo, dlam, collar_lam,
                                              period=2 * math.pi)
                return b

            lam_mid = lam_lo + dlam / 2
            center3 = R * np.array([math.sin(th_mid) * math.cos(lam_mid),
                                    math.sin(th_mid) * math.sin(lam_mid),
                                    math.cos(th_mid)])
            cchart = "north" if center3[2] >= 0 else "south"
            center = (cchart, sphere.unembed(cchart, center3))
            phi.append(ScalarField(fn, name=f"phi[{i},{j}]"))
            regions.append({"kind": "sphere-cell", "band": i, "sector": j,
                            "theta": (th_lo, th_hi), "sectors": sectors,
                            "center": center})
    K = len(phi)
    if K < K_min:
        raise ValueError(f"sphere partition at eps1 = {eps1} yields K = {K} < {K_min}")
    psi = [_NormalizedBump(phi, k, name=f"psi[{k}]") for k in range(K)]
    return BumpSystem(K=K, eps1=eps1, regions=regions, phi=phi, psi=psi,
                      surface=surface)


def build_partition(metric: Surface, eps1, K_min=1) -> BumpSystem:
    """Cell partition with plateau bumps; every enlarged cell sits inside a
    geodesic ball of radius eps1 around the recorded center."""
    if eps1 >= metric.injectivity_lower_bound:
        raise ValueError("eps1 must be below the injectivity lower bound")
    root = metric
    while hasattr(root, "base"):
        root = root.base
    if isinstance(root, FlatTorus):
        return _torus_partition(metric, eps1, K_min)
    if isinstance(root, Sphere):
        return _sphere_partition(metric, eps1, K_min)
    if isinstance(root, Dumbbell):
        raise ValueError("no partition recipe for the dumbbell surface")
    raise ValueError(f"no partition recipe for surface {root.name!r}")


# ---------------------------------------------------------------------------
# weighted families and discrepancy
# ---------------------------------------------------------------------------

@dataclass
class WeightedNetFamily:
    nets: list
    weights: np.ndarray
    integer_weights: tuple | None = None      # (c list, d)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.nets) != len(self.weights):
            raise ValueError("one weight per net required")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a convex combination")
        if self.integer_weights is not None:
            c, d = self.integer_weights
            if d < 1 or any(cj < 0 for cj in c):
                raise ValueError("integer weights must satisfy c_j >= 0, d >= 1")

    def lengths(self, metric):
        return np.array([net.length(metric) for net in self.nets])

    def weighted_average(self, fld, metric):
        return float(sum(a * net.average_integral(fld, metric)
                         for a, net in zip(self.weights, self.nets)))


@dataclass
class DiscrepancyReport:
    values: np.ndarray
    threshold: float

    @property
    def max_value(self):
        return float(np.max(self.values))

    @property
    def passed(self):
        return bool(self.max_value < self.threshold)


def _net_psi_averages(net: GammaNet, metric: Surface, bumps: BumpSystem):
    """Average of every psi_k along one net, sharing the bump evaluations."""
    num = np.zeros(bumps.K)
    total = 0.0
    for i, e in enumerate(net.graph.edges):
        chart, pts = net.edge_paths[i]
        seg, _ = net.edge_segments(i, metric)
        psis = bumps.psi_values(chart, metric.wrap(chart, pts))
        num += e.mult * np.sum(0.5 * (psis[:, :-1] + psis[:, 1:]) * seg, axis=1)
        total += e.mult * float(np.sum(seg))
    if total <= 0.0:
        raise DegenerateNetError("average integral undefined on a zero-length net")
    return num / total


def _volume_psi_averages(bumps: BumpSystem, metric: Surface, n):
    """Volume average of every psi_k with one pass over the quadrature grid."""
    key = (id(metric), n)
    cache = getattr(bumps, "_avg_cache", None)
    if cache is None:
        cache = bumps._avg_cache = {}
    if key not in cache:
        sums = np.zeros(bumps.K)
        total = 0.0
        for chart, pts, w in metric.quadrature(n):
            dens = w * np.sqrt(np.linalg.det(metric.metric(chart, pts)))
            sums += bumps.psi_values(chart, pts) @ dens
            total += float(np.sum(dens))
        cache[key] = sums / total
    return cache[key]


def discrepancy(family: WeightedNetFamily, metric: Surface,
                bumps: BumpSystem, vol_n=256) -> DiscrepancyReport:
    """Per-bump gap between weighted net averages and volume averages."""
    net_avgs = np.zeros(bumps.K)
    for a, net in zip(family.weights, family.nets):
        net_avgs += a * _net_psi_averages(net, metric, bumps)
    vol_avgs = _volume_psi_averages(bumps, metric, vol_n)
    return DiscrepancyReport(values=np.abs(net_avgs - vol_avgs),
                             threshold=bumps.eps1 / bumps.K)


def discrepancy_transfer(family: WeightedNetFamily, metric: Surface,
                         bumps: BumpSystem, fld: ScalarField,
                         f_sup, f_grad_sup, vol_n=256):
    """Both sides of the transfer bound
    |sum_j a_j avg_j f - avg_M f| <= sup|f| * sum_k D_k + 2 sup|grad f| * eps1.
    """
    report = discrepancy(family, metric, bumps, vol_n=vol_n)
    lhs = abs(family.weighted_average(fld, metric)
              - surface_average(metric, fld, n=vol_n))
    rhs = f_sup * float(np.sum(report.values)) + 2.0 * f_grad_sup * bumps.eps1
    return lhs, rhs, report


# ---------------------------------------------------------------------------
# min-norm point in a convex hull of gradients
# ---------------------------------------------------------------------------

def _affine_min_norm(P):
    """Min-norm point of the affine hull of rows of P (barycentric coords)."""
    m = P.shape[0]
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = P @ P.T
    A[:m, m] = 1.0
    A[m, :m] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    sol = np.linalg.lstsq(A, b, rcond=None)[0]
    return sol[:m]


def min_norm_point(P, tol=1e-12, max_iter=200):
    """Wolfe's algorithm: min-norm point of Conv(rows of P).

    Returns (weights over all rows, attained point).
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    j0 = int(np.argmin(np.einsum("ij,ij->i", P, P)))
    support = [j0]
    w = np.array([1.0])
    for _ in range(max_iter):
        x = w @ P[support]
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * max(1.0, x @ x):
            break
        if j in support:
            break
        support.append(j)
        w = np.append(w, 0.0)
        while True:
            v = _affine_min_norm(P[support])
            if np.all(v > 1e-14):
                w = v
                break
            diff = w - v
            mask = diff > 1e-14
            theta = np.min(w[mask] / diff[mask])
            w = w - theta * diff
            w[w < 1e-14] = 0.0
            keep = w > 0.0
            if not np.any(keep):
                keep[int(np.argmax(v))] = True
                w[keep] = 1.0
            support = [s for s, k in zip(support, keep) if k]
            w = w[keep]
            w = w / w.sum()
    full = np.zeros(m)
    full[support] = w
    return full, full @ P


def _caratheodory(P, w, target_support):
    """Reduce a convex combination to at most ``target_support`` points
    without moving the combination point."""
    w = w.copy()
    while np.count_nonzero(w) > target_support:
        idx = np.flatnonzero(w)
        Q = P[idx]
        # affine dependence among the support points
        A = np.vstack([Q.T, np.ones(len(idx))])
        _, _, Vt = np.linalg.svd(A)
        null = Vt[-1]
        if np.max(np.abs(A @ null)) > 1e-9:
            break
        pos = null > 1e-14
        if not np.any(pos):
            null = -null
            pos = null > 1e-14
        theta = np.min(w[idx][pos] / null[pos])
        w[idx] = w[idx] - theta * null
        w[w < 1e-14] = 0.0
        w = w / w.sum()
    return w


@dataclass
class ConvexSearchResult:
    success: bool
    indices: list = field(default_factory=list)
    weights: np.ndarray | None = None
    norm: float = np.inf
    radius: float = np.nan
    reason: str = ""


def convex_gradient_search(samples, eta, radii=None) -> ConvexSearchResult:
    """N+1 gradients with a convex combination of norm below eta.

    ``samples`` is a list of (point, gradient in R^N).  Clusters are
    balls around each sample point, tried over a decreasing radius
    schedule; the first cluster whose gradient hull comes within eta of
    the origin wins.
    """
    pts = np.array([np.atleast_1d(p) for p, _ in samples], dtype=float)
    grads = np.array([np.atleast_1d(v) for _, v in samples], dtype=float)
    N = grads.shape[1]
    if radii is None:
        spread = np.max(np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)) if len(pts) > 1 else 1.0
        radii = [max(spread, 1e-12) * f for f in (1.0, 0.5, 0.25, 0.125, 0.0625)]
    any_cluster = False
    for r in radii:
        for i in range(len(pts)):
            members = np.flatnonzero(np.linalg.norm(pts - pts[i], axis=-1) <= r)
            if len(members) < N + 1:
                continue
            any_cluster = True
            w_local, x = min_norm_point(grads[members])
            norm = float(np.linalg.norm(x))
            if norm < eta:
                w_local = _caratheodory(grads[members], w_local, N + 1)
                idx = [int(members[j]) for j in np.flatnonzero(w_local)]
                weights = list(w_local[np.flatnonzero(w_local)])
                # pad with zero-weight cluster members to exactly N+1 entries
                for j in members:
                    if len(idx) >= N + 1:
                        break
                    if int(j) not in idx:
                        idx.append(int(j))
                        weights.append(0.0)
                return ConvexSearchResult(True, idx, np.asarray(weights), norm, r)
    reason = ("no cluster with N+1 samples" if not any_cluster
              else "no cluster hull within eta of the origin")
    return ConvexSearchResult(False, reason=reason)


# ---------------------------------------------------------------------------
# rational weights
# ---------------------------------------------------------------------------

def rationalize(alphas, lengths, m, d_max=10**7):
    """Smallest common denominator d with |alpha_j/L_j - c_j/d| < 1/(m J L_j).

    The strict bounds are re-verified in exact rational arithmetic on
    the binary expansions of the inputs.
    """
    alphas = [float(a) for a in alphas]
    lengths = [float(L) for L in lengths]
    J = len(alphas)
    if any(L <= 0 for L in lengths):
        raise ValueError("net lengths must be positive")
    targets = [Fraction(a) / Fraction(L) for a, L in zip(alphas, lengths)]
    bounds = [Fraction(1) / (m * J * Fraction(L)) for L in lengths]
    d = 1
    while d <= d_max:
        cs = [max(0, round(t * d)) for t in targets]
        if all(abs(t - Fraction(c, d)) < b for t, c, b in zip(targets, cs, bounds)):
            return [int(c) for c in cs], d
        d += 1
    raise ValueError(f"no common denominator up to {d_max} meets the bounds")


def rationalize_weights(family: WeightedNetFamily, metric: Surface, m,
                        d_max=10**7):
    c, d = rationalize(family.weights, family.lengths(metric), m, d_max=d_max)
    family.integer_weights = (c, d)
    return c, d


# ---------------------------------------------------------------------------
# sequence merging and running ratios
# ---------------------------------------------------------------------------

def _merge_schedule(blocks, length_fn):
    """Repetition counts R_m of the dominance schedule.

    R_m is the smallest integer making block m's repeated total length at
    least m times everything emitted before it (R = 1 for the first
    block).  Returns (reps, unit lengths) without emitting anything; the
    emitted totals grow super-exponentially in m.
    """
    reps, unit_lengths = [], []
    emitted = 0.0
    for nets, (c_list, _d), m in blocks:
        if not nets or all(c == 0 for c in c_list):
            raise ValueError(f"block {m} is empty")
        unit_len = sum(c * length_fn(net) for net, c in zip(nets, c_list))
        r = 1 if emitted == 0.0 else max(1, math.ceil(m * emitted / unit_len))
        reps.append(r)
        unit_lengths.append(unit_len)
        emitted += r * unit_len
    return reps, unit_lengths


def merged_block_ratios(blocks, value_fn, length_fn):
    """Running integral-over-length ratio at the end of every block.

    Closed-form partial sums over the dominance schedule, usable when
    the flat sequence is far too long to materialize.  ``value_fn(net)``
    is the line integral of the test function over one copy of the net.
    """
    reps, unit_lengths = _merge_schedule(blocks, length_fn)
    num = den = 0.0
    out = []
    for (nets, (c_list, _d), _m), r, ul in zip(blocks, reps, unit_lengths):
        unit_val = sum(c * value_fn(net) for net, c in zip(nets, c_list))
        num += r * unit_val
        den += r * ul
        out.append(num / den)
    return np.asarray(out)


def merge_sequences(blocks, metric: Surface = None, length_fn=None,
                    max_emit=10**6):
    """Flatten weighted blocks into one sequence with late-block dominance.

    ``blocks`` is a list of (nets, (c_list, d), m).  Block m's unit is
    net j repeated c_j times; the unit is emitted R_m times, with R_m
    the smallest integer making the repeated block's total length at
    least m times everything emitted before it (R = 1 for the first
    block).  Returns (sequence, index_map) with index_map[i] = (m, j).

    The schedule grows super-exponentially in m; when more than
    ``max_emit`` entries would be emitted a ValueError is raised and the
    closed-form :func:`merged_block_ratios` should be used instead.
    """
    if length_fn is None:
        if metric is None:
            raise ValueError("either a metric or a length function is required")
        length_fn = lambda net: net.length(metric)
    sequence, index_map = [], []
    emitted_length = 0.0
    for nets, (c_list, _d), m in blocks:
        if not nets or all(c == 0 for c in c_list):
            raise ValueError(f"block {m} is empty")
        unit = []
        unit_len = 0.0
        for j, (net, c) in enumerate(zip(nets, c_list)):
            for _ in range(c):
                unit.append((net, (m, j)))
                unit_len += length_fn(net)
        if emitted_length == 0.0:
            reps = 1
        else:
            reps = max(1, math.ceil(m * emitted_length / unit_len))
        if len(sequence) + reps * len(unit) > max_emit:
            raise ValueError(
                f"merged sequence exceeds {max_emit} entries at block {m}; "
                "use merged_block_ratios for the closed-form running ratio")
        for _ in range(reps):
            for net, tag in unit:
                sequence.append(net)
                index_map.append(tag)
        emitted_length += reps * unit_len
    return sequence, index_map


def ratio_series(integrals, lengths):
    """Partial ratios sum(integrals[:k]) / sum(lengths[:k]), k = 1..n."""
    num = np.cumsum(np.asarray(integrals, dtype=float))
    den = np.cumsum(np.asarray(lengths, dtype=float))
    if np.any(den <= 0.0):
        raise DegenerateNetError("running ratio needs positive cumulative length")
    return num / den


def running_ratio(sequence, fld, metric: Surface):
    """Partial ratios of summed line integrals over summed lengths."""
    if not sequence:
        raise ValueError("running ratio of an empty sequence")
    integrals = [net.integrate(fld, metric) for net in sequence]
    lengths = [net.length(metric) for net in sequence]
    return ratio_series(integrals, lengths)
