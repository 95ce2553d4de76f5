"""Partitions of unity, discrepancy, convex search and sequence merging."""

import numpy as np
import pytest

from geonets import (ScalarField, Sphere, WeightedNetFamily, build_partition,
                     convex_gradient_search, discrepancy, discrepancy_transfer,
                     merge_sequences, merged_block_ratios, min_norm_point,
                     rationalize, rationalize_weights, ratio_series,
                     running_ratio, torus_geodesic)
from geonets.equidist import _merge_schedule


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def test_torus_partition_counts(torus):
    bumps = build_partition(torus, 0.3)
    # ceil(sqrt(2)/0.3) = 5 cells per axis
    assert bumps.K == 25
    bumps = build_partition(torus, 0.3, K_min=40)
    assert bumps.K == 49


def test_partition_normalization(torus, rng):
    bumps = build_partition(torus, 0.3)
    pts = rng.uniform(0, 1, size=(4000, 2))
    total = np.sum(bumps.psi_values("main", pts), axis=0)
    assert np.max(np.abs(total - 1.0)) <= 1e-12


def test_partition_gradients_fd(torus, rng):
    bumps = build_partition(torus, 0.3)
    pts = rng.uniform(0, 1, size=(50, 2))
    h = 1e-6
    for k in (0, 7, 13):
        psi = bumps.psi[k]
        for axis in range(2):
            dx = np.zeros(2)
            dx[axis] = h
            fd = (psi.value("main", pts + dx) - psi.value("main", pts - dx)) / (2 * h)
            assert np.allclose(psi.grad("main", pts)[:, axis], fd, atol=1e-6)


def test_sphere_partition_normalizes():
    sphere = Sphere()
    bumps = build_partition(sphere, 0.9)
    rng = np.random.default_rng(1)
    pts = rng.uniform(-0.9, 0.9, size=(500, 2))
    total = np.sum(bumps.psi_values("north", pts), axis=0)
    assert np.max(np.abs(total - 1.0)) <= 1e-10


def test_partition_requires_small_radius(torus, dumbbell):
    with pytest.raises(ValueError):
        build_partition(torus, 0.6)
    with pytest.raises(ValueError):
        build_partition(dumbbell, 1e-3)


# ---------------------------------------------------------------------------
# discrepancy
# ---------------------------------------------------------------------------

def _grid_family(n=5):
    nets, k = [], n * n
    for i in range(n):
        nets.append(torus_geodesic((1, 0), offset=(0.0, (i + 0.5) / n)))
        nets.append(torus_geodesic((0, 1), offset=((i + 0.5) / n, 0.0)))
    return WeightedNetFamily(nets, np.full(2 * n, 1.0 / (2 * n)))


def test_equispaced_family_has_tiny_discrepancy(torus):
    bumps = build_partition(torus, 0.3)
    report = discrepancy(_grid_family(), torus, bumps)
    assert report.passed
    assert report.max_value < 1e-4


def test_single_circle_fails_discrepancy(torus):
    bumps = build_partition(torus, 0.3)
    family = WeightedNetFamily([torus_geodesic((1, 0))], [1.0])
    report = discrepancy(family, torus, bumps)
    assert not report.passed


def test_transfer_bound(torus):
    bumps = build_partition(torus, 0.3)
    fld = ScalarField(lambda c, x: np.sin(2 * np.pi * np.asarray(x)[..., 0])
                      * np.cos(2 * np.pi * np.asarray(x)[..., 1]))
    lhs, rhs, report = discrepancy_transfer(_grid_family(), torus, bumps, fld,
                                            f_sup=1.0, f_grad_sup=2 * np.pi)
    assert lhs <= rhs


def test_family_weight_validation():
    with pytest.raises(ValueError):
        WeightedNetFamily([torus_geodesic((1, 0))], [0.5])
    with pytest.raises(ValueError):
        WeightedNetFamily([torus_geodesic((1, 0))], [1.0], integer_weights=([1], 0))


# ---------------------------------------------------------------------------
# min-norm point / convex search
# ---------------------------------------------------------------------------

def test_min_norm_point_simplex():
    w, x = min_norm_point(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(x, [0.5, 0.5], atol=1e-10)
    assert np.allclose(w, [0.5, 0.5], atol=1e-10)
    # origin inside the hull
    w, x = min_norm_point(np.array([[1.0, 0.0], [-1.0, 1.0], [-1.0, -1.0]]))
    assert np.linalg.norm(x) <= 1e-8
    # origin outside: nearest point on a face
    w, x = min_norm_point(np.array([[2.0, 1.0], [2.0, -1.0]]))
    assert np.allclose(x, [2.0, 0.0], atol=1e-10)


def _zigzag_samples(N, n_pts=9):
    """Symmetric gradients around a valley: hulls reach the origin."""
    rng = np.random.default_rng(N)
    pts = rng.uniform(-1.0, 1.0, size=(n_pts, N))
    # antipodal duplicates make 0 a convex combination within any cluster
    pts = np.concatenate([pts, -pts])
    return [(0.1 * p, p) for p in pts]


def test_convex_search_zigzag():
    for N in (1, 2, 3):
        res = convex_gradient_search(_zigzag_samples(N), eta=0.05)
        assert res.success
        assert len(res.indices) == N + 1
        grads = np.array([_zigzag_samples(N)[i][1] for i in res.indices])
        assert np.linalg.norm(res.weights @ grads) < 0.05
        assert res.weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_convex_search_constant_gradient_fails():
    g = np.array([1.0, 0.0])
    samples = [(np.array([x, 0.0]), g) for x in np.linspace(-1, 1, 12)]
    res = convex_gradient_search(samples, eta=0.05)
    assert not res.success
    assert res.reason


# ---------------------------------------------------------------------------
# rationalization
# ---------------------------------------------------------------------------

def test_rationalize_halves():
    c, d = rationalize([0.5, 0.5], [1.0, 1.0], m=10)
    assert (c, d) == ([1, 1], 2)


def test_rationalize_weights_attaches(torus):
    fam = WeightedNetFamily([torus_geodesic((1, 0)), torus_geodesic((0, 1))],
                            [0.5, 0.5])
    c, d = rationalize_weights(fam, torus, m=10)
    assert fam.integer_weights == (c, d)


def test_rationalize_random_instances():
    rng = np.random.default_rng(7)
    from fractions import Fraction
    for _ in range(25):
        J = int(rng.integers(1, 6))
        m = int(rng.integers(1, 101))
        w = rng.uniform(0.05, 1.0, size=J)
        alphas = w / w.sum()
        lengths = rng.uniform(0.5, 6.0, size=J)
        c, d = rationalize(alphas, lengths, m)
        for a, L, cj in zip(alphas, lengths, c):
            lhs = abs(Fraction(float(a)) / Fraction(float(L)) - Fraction(cj, d))
            assert lhs < Fraction(1) / (m * J * Fraction(float(L)))


def test_rationalize_rejects_bad_lengths():
    with pytest.raises(ValueError):
        rationalize([1.0], [0.0], 5)


# ---------------------------------------------------------------------------
# merging and running ratios
# ---------------------------------------------------------------------------

class _FakeNet:
    def __init__(self, length, value):
        self._length, self._value = length, value

    def length(self, metric=None):
        return self._length


def test_merge_schedule_dominance():
    blocks = [([_FakeNet(2.0, 0)], ([1], 1), 1),
              ([_FakeNet(3.0, 0)], ([2], 1), 2),
              ([_FakeNet(1.0, 0)], ([1], 1), 3)]
    reps, units = _merge_schedule(blocks, lambda n: n.length())
    assert reps[0] == 1
    emitted = units[0]
    for (r, u), m in zip(zip(reps[1:], units[1:]), (2, 3)):
        assert r * u >= m * emitted
        assert (r - 1) * u < m * emitted
        emitted += r * u


def test_merge_sequences_small(torus):
    a, b = torus_geodesic((1, 0)), torus_geodesic((0, 1))
    seq, index_map = merge_sequences([([a], ([1], 1), 1), ([b], ([2], 1), 2)],
                                     metric=torus)
    # block 2's unit (b twice, length 2) already dominates 2 x block 1
    assert [id(n) for n in seq] == [id(a), id(b), id(b)]
    assert index_map == [(1, 0), (2, 0), (2, 0)]


def test_merge_sequences_guard():
    blocks = [([_FakeNet(1.0, 0)], ([1], 1), m) for m in range(1, 15)]
    with pytest.raises(ValueError, match="merged_block_ratios"):
        merge_sequences(blocks, length_fn=lambda n: n.length())


def test_merge_envelope():
    alpha = 0.4
    for D in (0.01, 0.05, 0.2):
        blocks = []
        for m in range(1, 21):
            L = 1.0 + 0.07 * m
            value = (alpha + ((-1) ** m) * D / m) * L
            blocks.append(([_FakeNet(L, value)], ([1], 1), m))
        ratios = merged_block_ratios(blocks, value_fn=lambda n: n._value,
                                     length_fn=lambda n: n.length())
        for m in range(1, 21):
            assert abs(ratios[m - 1] - alpha) <= 2 * D / m


def test_ratio_series():
    out = ratio_series([1.0, 3.0], [2.0, 2.0])
    assert np.allclose(out, [0.5, 1.0])
    with pytest.raises(Exception):
        ratio_series([1.0], [0.0])


def test_running_ratio_converges(torus):
    fld = ScalarField(lambda c, x: 0.25
                      * (1 + np.cos(2 * np.pi * np.asarray(x)[..., 0]))
                      * (1 + np.cos(2 * np.pi * np.asarray(x)[..., 1])))
    seq = [torus_geodesic((k, 1), samples=max(64, 4 * k)) for k in range(1, 60)]
    series = running_ratio(seq, fld, torus)
    assert abs(series[-1] - 0.25) < 0.01
    with pytest.raises(ValueError):
        running_ratio([], fld, torus)
