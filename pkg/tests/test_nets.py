"""Weighted multigraphs and discrete nets."""

import numpy as np
import pytest

from geonets import (DegenerateNetError, Edge, GammaNet, WeightedMultigraph,
                     ScalarField, dumbbell_circle, loop_graph, sphere_latitude,
                     theta_graph, torus_geodesic, torus_theta_net)


def test_graph_degree_and_components():
    g = WeightedMultigraph(["a", "b", "c"],
                           [Edge("a", "b", 1), Edge("b", "c", 2), Edge("c", "a", 1)])
    assert g.degree("b") == 2
    assert len(g.components()) == 1


def test_goodness():
    # a loop with multiplicity is good
    assert all(loop_graph(mult=2).is_good())
    assert all(loop_graph(mult=1).is_good())
    # theta graph: all vertices have degree 3
    assert all(theta_graph().is_good())
    # a bare arc is not good
    arc = WeightedMultigraph(["a", "b"], [Edge("a", "b", 1)])
    assert not all(arc.is_good())


def test_torus_geodesic_length(torus):
    for klass, L in [((1, 0), 1.0), ((0, 1), 1.0), ((3, 4), 5.0), ((1, 1), np.sqrt(2))]:
        net = torus_geodesic(klass)
        assert net.length(torus) == pytest.approx(L, abs=1e-12)


def test_multiplicity_linearity(torus):
    base = torus_geodesic((2, 1))
    tripled = torus_geodesic((2, 1), mult=3)
    assert tripled.length(torus) == 3.0 * base.length(torus)


def test_resample_preserves_length_and_integrals(torus):
    net = torus_geodesic((3, 4), samples=200)
    fld = ScalarField(lambda c, x: np.cos(2 * np.pi * np.asarray(x)[..., 1]))
    re = net.resample(torus, 333)
    assert re.length(torus) == pytest.approx(net.length(torus), rel=1e-9)
    assert re.integrate(fld, torus) == pytest.approx(net.integrate(fld, torus), abs=1e-8)


def test_reversed_edge_keeps_length(torus):
    net = torus_geodesic((2, 3))
    rev = net.reversed_edge(0)
    assert rev.length(torus) == pytest.approx(net.length(torus), abs=1e-12)


def test_fourier_modes_vanish_along_geodesics(torus):
    # trapezoid sums of integer-frequency modes along (k,1) circles are exact
    for k in (1, 2, 5, 17):
        net = torus_geodesic((k, 1), samples=max(64, 4 * k))
        for a, b in [(1, 0), (0, 1), (2, 3)]:
            if a * k + b == 0:
                continue
            fld = ScalarField(lambda c, x, a=a, b=b: np.cos(
                2 * np.pi * (a * np.asarray(x)[..., 0] + b * np.asarray(x)[..., 1])))
            assert abs(net.integrate(fld, torus)) < 1e-10


def test_average_integral_of_constant(torus):
    net = torus_geodesic((3, 4), mult=2)
    fld = ScalarField(lambda c, x: np.full(np.asarray(x).shape[:-1], 7.0))
    assert net.average_integral(fld, torus) == pytest.approx(7.0, rel=1e-12)


def test_json_roundtrip(torus):
    net = torus_theta_net([(1, 0), (0, 1), (-1, -1)])
    back = GammaNet.from_json(net.to_json())
    assert back.length(torus) == pytest.approx(net.length(torus), abs=1e-15)
    assert [e.mult for e in back.graph.edges] == [e.mult for e in net.graph.edges]
    for i in range(len(net.graph.edges)):
        assert np.allclose(back.edge_paths[i][1], net.edge_paths[i][1])


def test_theta_net_structure(torus):
    net = torus_theta_net([(1, 0), (0, 1), (-1, -1)])
    assert len(net.graph.edges) == 3
    assert net.graph.is_good()
    assert net.length(torus) > 0


def test_sphere_latitude_length(sphere):
    eq = sphere_latitude(sphere, np.pi / 2)
    assert eq.length(sphere) == pytest.approx(2 * np.pi, rel=1e-4)
    small = sphere_latitude(sphere, 0.3)
    assert small.length(sphere) == pytest.approx(2 * np.pi * np.sin(0.3), rel=1e-3)


def test_dumbbell_circle_length(dumbbell):
    waist = dumbbell_circle(dumbbell, 0.5)
    assert waist.length(dumbbell) == pytest.approx(2 * np.pi * dumbbell.neck, rel=1e-4)


def test_min_edge_length(torus):
    net = torus_theta_net([(1, 0), (0, 1), (-1, -1)])
    assert 0 < net.min_edge_length(torus) <= net.length(torus)


def test_zero_length_average_raises(torus):
    graph = loop_graph()
    pts = np.tile(np.array([0.25, 0.25]), (16, 1))
    net = GammaNet(graph, {"v": ("main", pts[0].copy())}, [("main", pts)])
    fld = ScalarField(lambda c, x: np.ones(np.asarray(x).shape[:-1]))
    with pytest.raises(DegenerateNetError):
        net.average_integral(fld, torus)
