"""Tests for connection-induced trivializations of T2M and the extraction of Christoffel symbols."""
import numpy as np
import pytest

from calculus.errors import ChartMismatchError, ExtractionError, IncompatibilityError, ShapeError
from geometry.atlas import Jet2, change_jet_chart, jet_gap, transition_map
from geometry.connection import ChristoffelField
from geometry.t2bundle import (
    FiberPoint,
    Trivialization,
    change_fiber_chart,
    cocycle_residual,
    extract_christoffel,
    fiber_chart_gap,
    tm_tm_isomorphism_check,
    transition_function,
    trivialization_fiber_map,
    trivializations,
    trivialize,
    untrivialize,
)
from verifier.fixtures import load_fixture


def asymmetric_field(chart_id="cartesian"):
    return ChristoffelField(chart_id, 2, lambda y, u, v: np.array([y[0] * u[0] * v[1], u[1] * v[1] - u[0] * v[0]]))


def test_trivialize_adds_the_connection_term(sphere):
    triv = Trivialization("N", sphere.christoffels["N"])
    jet = Jet2("N", [0.5, 0.3], [1.0, -0.5], [0.2, 0.4])
    point = trivialize(triv, jet)
    np.testing.assert_allclose(point.u, jet.u)
    np.testing.assert_allclose(point.v, jet.w + sphere.christoffels["N"](jet.y, jet.u, jet.u))


@pytest.mark.parametrize("chart_id", ["cartesian", "polar", "skew"])
def test_roundtrip_on_random_jets(flat, chart_id, rng):
    triv = Trivialization(chart_id, flat.christoffels[chart_id])
    for _ in range(100):
        jet = Jet2(chart_id, [1.0, 0.5] + 0.2 * rng.normal(size=2), rng.normal(size=2), rng.normal(size=2))
        assert jet_gap(untrivialize(triv, trivialize(triv, jet)), jet) < 1e-10


def test_roundtrip_with_a_fiber_mix(sphere, rng):
    mix = np.eye(4) + 0.3 * rng.normal(size=(4, 4))
    triv = Trivialization("S", sphere.christoffels["S"], fiber_mix=mix)
    jet = Jet2("S", [0.6, -0.2], rng.normal(size=2), rng.normal(size=2))
    assert jet_gap(untrivialize(triv, trivialize(triv, jet)), jet) < 1e-10


def test_trivialization_rejects_wrong_inputs(sphere):
    with pytest.raises(ChartMismatchError):
        Trivialization("S", sphere.christoffels["N"])
    with pytest.raises(ShapeError):
        Trivialization("N", sphere.christoffels["N"], fiber_mix=np.eye(3))
    with pytest.raises(ChartMismatchError):
        trivialize(Trivialization("N", sphere.christoffels["N"]), Jet2("S", [0.1, 0.1], [1.0, 0.0], [0.0, 0.0]))


def test_transition_is_the_product_of_tangent_maps(flat):
    trivs = trivializations(flat.christoffels)
    sigma = transition_map(flat.atlas, "polar", "cartesian")
    y = np.array([0.8, 1.1])
    op = transition_function(trivs["polar"], trivs["cartesian"], sigma, y)
    jac = sigma.jacobian(y)
    uu, uv, vu, vv = op.blocks()
    np.testing.assert_allclose(uu, jac, atol=1e-10)
    np.testing.assert_allclose(vv, jac, atol=1e-10)
    np.testing.assert_allclose(uv, 0.0, atol=1e-10)
    np.testing.assert_allclose(vu, 0.0, atol=1e-10)
    assert op.discrepancy < 1e-10
    assert (op.source, op.target) == ("cartesian", "polar")


def test_fiber_chart_change_is_linear_and_well_defined(sphere, rng):
    trivs = trivializations(sphere.christoffels)
    sigma = transition_map(sphere.atlas, "E", "N")
    y = np.array([0.5, 0.3])
    p, q = rng.normal(size=4), rng.normal(size=4)

    def moved(vec):
        return change_fiber_chart(trivs["E"], trivs["N"], sigma, FiberPoint.from_fiber_vector("N", y, vec)).fiber_vector()

    np.testing.assert_allclose(moved(2.0 * p - q), 2.0 * moved(p) - moved(q), atol=1e-10)
    jet = Jet2("N", y, rng.normal(size=2), rng.normal(size=2))
    assert fiber_chart_gap(trivs["E"], trivs["N"], sigma, jet) < 1e-10


def test_incompatible_fields_are_refused(flat):
    trivs = trivializations(flat.christoffels)
    bad = Trivialization("polar", flat.christoffels["polar"].perturbed(
        lambda y, u, v: np.array([0.1 * u[0] * v[0], 0.0])))
    sigma = transition_map(flat.atlas, "polar", "cartesian")
    with pytest.raises(IncompatibilityError, match="incompatible") as excinfo:
        transition_function(bad, trivs["cartesian"], sigma, [1.0, 0.5])
    assert excinfo.value.residual > 1e-3


def test_without_a_connection_the_raw_chart_change_is_not_linear(flat, rng):
    zero = {c: ChristoffelField.zero(c, 2, flat.atlas.chart(c).contains) for c in ("cartesian", "polar")}
    trivs = trivializations(zero)
    sigma = transition_map(flat.atlas, "polar", "cartesian")
    y = np.array([1.0, 0.5])
    p, q = rng.normal(size=4), rng.normal(size=4)

    def moved(vec):
        return change_fiber_chart(trivs["polar"], trivs["cartesian"], sigma,
                                  FiberPoint.from_fiber_vector("cartesian", y, vec)).fiber_vector()

    assert np.linalg.norm(moved(p + q) - moved(p) - moved(q)) > 1e-2


def test_cocycle_on_the_sphere(sphere):
    trivs = trivializations(sphere.christoffels)
    for charts, samples in sphere.atlas.triple_samples.items():
        for y in samples:
            assert cocycle_residual(trivs, sphere.atlas, charts, y) < 1e-10


def test_tm_tm_check_passes_on_compatible_fields(sphere):
    report = tm_tm_isomorphism_check(trivializations(sphere.christoffels), sphere.atlas)
    assert report.passed, report.violations
    assert "bundle.transition-two-ways" in {r.check_id for r in report.records}


def test_tm_tm_check_names_the_compatibility_violation(flat):
    fields = dict(flat.christoffels)
    fields["polar"] = fields["polar"].perturbed(lambda y, u, v: np.array([0.1 * u[0] * v[0], 0.0]))
    report = tm_tm_isomorphism_check(trivializations(fields), flat.atlas)
    assert "bundle.christoffel-compatibility" in {r.check_id for r in report.violations}


def test_tm_tm_check_rejects_a_non_product_trivialization(sphere):
    trivs = trivializations(sphere.christoffels)
    # v-block leaks into u
    mix = np.block([[np.eye(2), 0.5 * np.eye(2)], [np.zeros((2, 2)), np.eye(2)]])
    trivs["N"] = Trivialization("N", sphere.christoffels["N"], fiber_mix=mix)
    report = tm_tm_isomorphism_check(trivs, sphere.atlas)
    failed = {r.check_id for r in report.violations}
    assert {"bundle.block-diagonal", "bundle.transition-two-ways"} <= failed
    assert "bundle.christoffel-compatibility" not in failed
    assert all("N" in r.location for r in report.violations)


def test_cocycle_breaks_when_one_field_is_corrupted():
    fixture = load_fixture("fault-perturbed-gamma")
    trivs = trivializations(fixture.christoffels)
    assert cocycle_residual(trivs, fixture.atlas, ("cartesian", "polar", "skew"), [1.0, 0.6]) > 1e-3


def test_extraction_recovers_symmetric_fields(sphere, rng):
    triv = Trivialization("N", sphere.christoffels["N"])
    field = extract_christoffel({"N": trivialization_fiber_map(triv)}, "N", 2, atlas=sphere.atlas, rng=rng)
    for _ in range(20):
        y, u, v = rng.normal(size=2), rng.normal(size=2), rng.normal(size=2)
        np.testing.assert_allclose(field(y, u, v), sphere.christoffels["N"](y, u, v), atol=1e-10)


def test_extraction_recovers_the_symmetric_part(rng):
    gamma = asymmetric_field()
    triv = Trivialization("cartesian", gamma)
    field = extract_christoffel({"cartesian": trivialization_fiber_map(triv)}, "cartesian", 2,
                                points=[np.zeros(2), np.ones(2)], rng=rng)
    symmetric = gamma.symmetrized()
    for _ in range(20):
        y, u, v = rng.normal(size=2), rng.normal(size=2), rng.normal(size=2)
        np.testing.assert_allclose(field(y, u, v), symmetric(y, u, v), atol=1e-10)


def test_extraction_rejects_maps_of_the_wrong_form(rng):
    def scaled(jet):
        return 2.0 * jet.u, jet.w

    with pytest.raises(ExtractionError, match="velocity"):
        extract_christoffel({"a": scaled}, "a", 2, points=[np.zeros(2)], rng=rng)

    def cubic(jet):
        return jet.u, jet.w + jet.u ** 3

    with pytest.raises(ExtractionError, match="not linear on fibers"):
        extract_christoffel({"a": cubic}, "a", 2, points=[np.ones(2)], rng=rng)

    with pytest.raises(ExtractionError, match="no fiber map"):
        extract_christoffel({}, "a", 2)
