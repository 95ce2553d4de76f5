"""Length derivatives under metric perturbations."""

import numpy as np
import pytest

from geonets import (ConformalFamily, ScalarField, constant_field,
                     conformal_direction, eps_close, family_direction,
                     fd_length_derivative, first_variation, resolved_family,
                     run_battery, torus_geodesic)
from geonets.solver import stationary_tracker
from geonets.variation import StationarityWarning


def test_conformal_global_direction_gives_length(torus):
    # d/ds of e^s L at s = 0 is L itself
    net = torus_geodesic((3, 4))
    d = first_variation(net, torus, conformal_direction(torus, constant_field(1.0)))
    assert d == pytest.approx(net.length(torus), rel=1e-12)


def test_first_variation_matches_tracked_fd(torus):
    psi = ScalarField(lambda c, x: np.cos(2 * np.pi * np.asarray(x)[..., 1]),
                      grad_fn=lambda c, x: np.stack(
                          [np.zeros(np.asarray(x).shape[:-1]),
                           -2 * np.pi * np.sin(2 * np.pi * np.asarray(x)[..., 1])],
                          axis=-1))
    fam = ConformalFamily(torus, [psi])
    net = torus_geodesic((1, 0), offset=(0.0, 0.5))
    track = stationary_tracker(net, torus)
    analytic = first_variation(net, torus, family_direction(fam, [0.0]))
    fd = fd_length_derivative(lambda s: track(fam.at([s])),
                              lambda s: fam.at([s]), 0.0)
    assert fd == pytest.approx(analytic, abs=1e-8)


def test_warns_on_nonstationary_net(torus, rng):
    net = torus_geodesic((1, 0))
    chart, pts = net.edge_paths[0]
    noise = 0.05 * rng.standard_normal(pts.shape)
    noise[0] = noise[-1] = 0.0
    net.edge_paths[0] = (chart, pts + noise)
    with pytest.warns(StationarityWarning):
        first_variation(net, torus, conformal_direction(torus, constant_field(1.0)))


def test_resolved_family_restores_stationarity(torus):
    fam = ConformalFamily(torus, [constant_field(1.0)])
    nf = resolved_family(torus_geodesic((1, 1)), lambda s: fam.at([s]))
    # under the global scaling the solved length follows e^s sqrt(2)
    assert nf(0.1).length(fam.at([0.1])) == pytest.approx(
        np.exp(0.1) * np.sqrt(2), abs=1e-7)


def test_eps_close():
    s = np.linspace(0, 1, 11)
    ok, sup = eps_close(0.5 * s, 0.5 * s + 0.001, delta=0.5, eps=0.01)
    assert ok and sup == pytest.approx(0.002, abs=1e-12)
    ok, _ = eps_close(0.5 * s, 0.5 * s + 0.1, delta=0.5, eps=0.01)
    assert not ok
    with pytest.raises(ValueError):
        eps_close(s, s[:-1], 1.0, 1.0)


def test_battery_spot_checks():
    rows = run_battery()
    assert len(rows) == 50
    names = {r.net_name for r in rows}
    assert len(names) == 10
    # global conformal rows equal the net length exactly
    for r in rows:
        if r.direction == "2g (global)":
            assert r.abs_error <= r.tolerance
