"""Sweepouts, curve shortening and width estimates."""

import numpy as np
import pytest

from geonets import (ConformalFamily, Edge, GammaNet, WeightedMultigraph,
                     birkhoff_shorten, build_sweepout, constant_field,
                     dumbbell_realizer, dumbbell_width, minmax_upper_bound,
                     sphere_latitude, torus_geodesic, weyl_ratio_probe)
from geonets.surfaces import DumbbellWidthFamily


def _wiggly_circle(amplitude=0.1, samples=64):
    t = np.linspace(0.0, 1.0, samples)
    pts = np.stack([t, 0.3 + amplitude * np.sin(2 * np.pi * t)], axis=-1)
    graph = WeightedMultigraph(["v"], [Edge("v", "v", 1)])
    return GammaNet(graph, {"v": ("main", pts[0].copy())}, [("main", pts)])


def test_birkhoff_straightens_torus_circle(torus):
    res = birkhoff_shorten(_wiggly_circle(), torus, tol=1e-13)
    assert not res.collapsed
    assert res.length == pytest.approx(1.0, abs=1e-8)


def test_birkhoff_collapses_contractible_loop(torus):
    t = np.linspace(0.0, 2 * np.pi, 64)
    pts = 0.5 + 0.05 * np.stack([np.cos(t), np.sin(t)], axis=-1)
    graph = WeightedMultigraph(["v"], [Edge("v", "v", 1)])
    loop = GammaNet(graph, {"v": ("main", pts[0].copy())}, [("main", pts)])
    res = birkhoff_shorten(loop, torus)
    assert res.collapsed


def test_birkhoff_near_equator_converges_to_great_circle(sphere):
    start = sphere_latitude(sphere, np.pi / 2 - 1e-4, samples=2048)
    res = birkhoff_shorten(start, sphere)
    assert not res.collapsed
    assert res.length == pytest.approx(2 * np.pi, abs=1e-4)


def test_torus_width_recipes(torus):
    for recipe in ("x-levels", "y-levels"):
        sw = build_sweepout(torus, 1, recipe)
        est = minmax_upper_bound(sw, torus, shorten=False)
        assert est.upper_bound == pytest.approx(1.0, abs=1e-10)
    # p = 4 uses 2 parallel circles
    sw = build_sweepout(torus, 4, "x-levels")
    est = minmax_upper_bound(sw, torus, shorten=False)
    assert est.upper_bound == pytest.approx(2.0, abs=1e-10)


def test_sphere_latitude_width(sphere):
    sw = build_sweepout(sphere, 1, "latitude")
    est = minmax_upper_bound(sw, sphere, shorten=False)
    assert est.upper_bound == pytest.approx(2 * np.pi, rel=1e-4)
    assert est.maximizer == pytest.approx(np.pi / 2, abs=1e-3)


def test_recipe_surface_mismatch(torus, sphere):
    with pytest.raises(ValueError):
        build_sweepout(sphere, 1, "x-levels")
    with pytest.raises(ValueError):
        build_sweepout(torus, 1, "latitude")
    with pytest.raises(ValueError):
        build_sweepout(sphere, 2, "latitude")


def test_dumbbell_width_model():
    assert dumbbell_width(0.0) == 1.0
    assert dumbbell_width(-0.3) == pytest.approx(1.3)
    assert dumbbell_width(0.25, scale=2.0) == pytest.approx(2.5)
    assert dumbbell_realizer(0.2) == "S1"
    assert dumbbell_realizer(-0.2) == "S2"
    assert dumbbell_realizer(0.0) == "both"


def test_dumbbell_profile_width_tracks_model(dumbbell):
    family = DumbbellWidthFamily(dumbbell)
    c = dumbbell.great_circle_length
    for t in (-0.2, 0.0, 0.15):
        metric = family.at(t)
        sw = build_sweepout(metric, 1, "profile")
        est = minmax_upper_bound(sw, metric, shorten=False)
        assert est.upper_bound == pytest.approx(c * (1 + abs(t)), rel=1e-6)


def test_dumbbell_neck_recipe_finds_waist(dumbbell):
    sw = build_sweepout(dumbbell, 1, "neck")
    est = minmax_upper_bound(sw, dumbbell, shorten=False)
    assert est.upper_bound == pytest.approx(2 * np.pi * dumbbell.neck, rel=1e-3)


def test_weyl_ratio_invariance(torus):
    family = ConformalFamily(torus, [constant_field(1.0)])
    table = weyl_ratio_probe(family, [1, 4], np.linspace(-0.2, 0.2, 3))
    for p in (1, 4):
        col = table.column(p, "h_p")
        assert max(col) - min(col) <= 1e-10
