"""Tests for charts, 2-jets and jet chart changes."""
import numpy as np
import pytest

from calculus import hyperdual as hd
from calculus.errors import ChartMismatchError, DomainError, EmptyOverlapError, ShapeError, UnknownChartError
from calculus.smooth_map import SmoothMap2
from config import TOLERANCE_CONFIG
from geometry.atlas import (
    Atlas,
    Chart,
    Curve2,
    Jet2,
    atlas_check,
    atlas_sample_points,
    change_jet_chart,
    change_tangent_chart,
    curve_to_jet,
    jet_gap,
    jets_equal,
    raw_fiber_nonlinearity,
    transition_map,
)


def test_polynomial_curve_gives_its_coefficients():
    jet = curve_to_jet(Curve2.polynomial("a", [1.0, 2.0], [0.5, -0.5], [3.0, 1.0]))
    np.testing.assert_allclose(jet.y, [1.0, 2.0])
    np.testing.assert_allclose(jet.u, [0.5, -0.5])
    np.testing.assert_allclose(jet.w, [3.0, 1.0])


def test_curve_outside_chart():
    curve = Curve2.polynomial("polar", [-1.0, 0.0], [1.0, 0.0], [0.0, 0.0], contains=lambda y: y[0] > 0)
    with pytest.raises(DomainError, match="outside chart"):
        curve_to_jet(curve)


def test_chart_change_matches_moving_the_curve(flat):
    # the polar curve t -> (1 + t/2 + t^2, 0.3 - t) seen in Cartesian coordinates
    sigma = transition_map(flat.atlas, "cartesian", "polar")
    polar_curve = Curve2.from_propagation(
        "polar", lambda t: [1.0 + 0.5 * t + t * t, 0.3 - t], 2)
    cartesian_curve = Curve2.from_propagation(
        "cartesian", lambda t: [(1.0 + 0.5 * t + t * t) * hd.cos(0.3 - t),
                                (1.0 + 0.5 * t + t * t) * hd.sin(0.3 - t)], 2)
    moved = change_jet_chart(curve_to_jet(polar_curve), sigma)
    assert moved.chart_id == "cartesian"
    assert jet_gap(moved, curve_to_jet(cartesian_curve)) < 1e-12


def test_higher_order_terms_do_not_change_the_jet():
    a = curve_to_jet(Curve2.from_propagation("a", lambda t: [t + t ** 3, 2.0 + t * t], 2))
    b = curve_to_jet(Curve2.polynomial("a", [0.0, 2.0], [1.0, 0.0], [0.0, 2.0]))
    assert jets_equal(a, b)


def test_jets_equal_across_charts(flat):
    jet = Jet2("polar", [1.5, 0.9], [0.2, -0.4], [1.0, 0.5])
    sigma = transition_map(flat.atlas, "cartesian", "polar")
    in_cartesian = change_jet_chart(jet, sigma)
    assert jets_equal(jet, in_cartesian, transition=sigma)
    with pytest.raises(ChartMismatchError, match="supply a transition"):
        jets_equal(jet, in_cartesian)


def test_jet_gap_dimension_mismatch():
    with pytest.raises(ShapeError):
        jet_gap(Jet2("a", [0.0], [0.0], [0.0]), Jet2("a", [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]))


def test_chart_change_checks_the_source_chart(flat):
    sigma = transition_map(flat.atlas, "cartesian", "polar")
    with pytest.raises(ChartMismatchError):
        change_jet_chart(Jet2("skew", [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]), sigma)


def test_tangent_chart_change_is_the_jacobian(flat):
    sigma = transition_map(flat.atlas, "cartesian", "polar")
    y, u = np.array([2.0, 0.5]), np.array([1.0, -1.0])
    value, du = change_tangent_chart(y, u, sigma)
    np.testing.assert_allclose(value, sigma.value(y))
    np.testing.assert_allclose(du, sigma.jacobian(y) @ u)


def test_transition_lookup():
    atlas = Atlas(1, {"a": Chart("a", 1), "b": Chart("b", 1)}, {})
    identity = transition_map(atlas, "a", "a")
    np.testing.assert_allclose(identity.value([3.0]), [3.0])
    with pytest.raises(EmptyOverlapError, match="no declared overlap"):
        transition_map(atlas, "a", "b")
    with pytest.raises(UnknownChartError, match="unknown chart"):
        transition_map(atlas, "a", "nope")


def test_sample_points_are_in_chart_coordinates(flat):
    for y in atlas_sample_points(flat.atlas, "polar"):
        assert flat.atlas.chart("polar").contains(y)


@pytest.mark.parametrize("name", ["flat", "sphere"])
def test_atlas_invariants_hold(name, request, rng):
    fixture = request.getfixturevalue(name)
    report = atlas_check(fixture.atlas, rng, TOLERANCE_CONFIG["structural"])
    assert report.records
    assert report.passed, report.violations
    assert {r.check_id for r in report.records} >= {"atlas.identity", "atlas.inverse", "atlas.triple"}


def test_atlas_check_reports_a_broken_inverse(flat, rng):
    transitions = dict(flat.atlas.transitions)
    transitions[("skew", "cartesian")] = SmoothMap2.linear([[1.0, 0.5], [0.0, 2.1]], source="cartesian",
                                                            target="skew")
    broken = Atlas(2, flat.atlas.charts, transitions, flat.atlas.overlap_samples, {})
    report = atlas_check(broken, rng)
    assert not report.passed
    assert {r.check_id for r in report.violations} == {"atlas.inverse"}


def test_raw_chart_change_is_nonlinear_on_curved_overlaps(flat, rng):
    polar = transition_map(flat.atlas, "cartesian", "polar")
    skew = transition_map(flat.atlas, "skew", "cartesian")
    assert raw_fiber_nonlinearity(polar, [1.0, 0.3], rng) > TOLERANCE_CONFIG["witness"]
    assert raw_fiber_nonlinearity(skew, [1.0, 0.3], rng) < 1e-12
