"""Tests for Christoffel fields, the compatibility condition and metric-derived symbols."""
import numpy as np
import pytest

from calculus.errors import ChartMismatchError, DomainError, NumericalRankError, ParameterError
from calculus.smooth_map import SmoothMap2
from config import TOLERANCE_CONFIG
from geometry.atlas import transition_map
from geometry.connection import (
    ChristoffelField,
    LocalConnectionMap,
    christoffel_from_metric,
    compat_residual,
    metric_to_christoffel,
    pushforward_christoffel,
    vilms_local,
)

POLAR_POINTS = [[1.0, 0.3], [2.0, -1.2], [0.7, 2.5]]


def sphere_metric(y):
    return 4.0 / (1.0 + y @ y) ** 2 * np.eye(2)


def sphere_symbols(y, u, v):
    return -2.0 / (1.0 + y @ y) * ((y @ v) * u + (y @ u) * v - (u @ v) * y)


@pytest.mark.parametrize("y", POLAR_POINTS)
def test_pushed_forward_polar_symbols(flat, y, rng):
    gamma = flat.christoffels["polar"]
    r = y[0]
    tensor = gamma.tensor(y)
    assert tensor[0, 1, 1] == pytest.approx(-r, abs=1e-10)
    assert tensor[1, 0, 1] == pytest.approx(1.0 / r, abs=1e-10)
    assert tensor[1, 1, 0] == pytest.approx(1.0 / r, abs=1e-10)
    assert tensor[0, 0, 0] == pytest.approx(0.0, abs=1e-10)
    u, v = rng.normal(size=2), rng.normal(size=2)
    np.testing.assert_allclose(gamma(y, u, v), flat.oracles["polar"](y, u, v), atol=1e-10)


def test_pushforward_satisfies_compatibility(flat, rng):
    sigma = transition_map(flat.atlas, "polar", "cartesian")
    for _ in range(20):
        y = np.array([1.0, 0.5]) + 0.3 * rng.normal(size=2)
        u, v = rng.normal(size=2), rng.normal(size=2)
        residual = compat_residual(flat.christoffels["polar"], flat.christoffels["cartesian"], sigma, y, u, v)
        assert np.linalg.norm(residual) < 1e-10


def test_sphere_fields_are_compatible(sphere, rng):
    for (alpha, beta), samples in sphere.atlas.overlap_samples.items():
        sigma = transition_map(sphere.atlas, alpha, beta)
        for y in samples:
            u, v = rng.normal(size=2), rng.normal(size=2)
            residual = compat_residual(sphere.christoffels[alpha], sphere.christoffels[beta], sigma, y, u, v)
            assert np.linalg.norm(residual) < 1e-10 * (1 + np.linalg.norm(u) * np.linalg.norm(v))


def test_perturbed_field_breaks_compatibility(flat):
    sigma = transition_map(flat.atlas, "polar", "cartesian")
    polar = flat.christoffels["polar"].perturbed(lambda y, u, v: np.array([0.1 * u[0] * v[0], 0.0]))
    residual = compat_residual(polar, flat.christoffels["cartesian"], sigma, [1.0, 0.5], [1.0, 0.0], [1.0, 0.0])
    assert np.linalg.norm(residual) > TOLERANCE_CONFIG["fault"]


def test_compat_residual_checks_chart_labels(flat):
    sigma = transition_map(flat.atlas, "polar", "cartesian")
    with pytest.raises(ChartMismatchError):
        compat_residual(flat.christoffels["skew"], flat.christoffels["cartesian"], sigma,
                        [1.0, 0.5], [1.0, 0.0], [0.0, 1.0])


def test_metric_symbols_match_the_closed_form():
    y = np.array([0.4, -0.7])
    expected = np.empty((2, 2, 2))
    for i, e_i in enumerate(np.eye(2)):
        for j, e_j in enumerate(np.eye(2)):
            expected[:, i, j] = sphere_symbols(y, e_i, e_j)
    np.testing.assert_allclose(metric_to_christoffel(sphere_metric, y), expected, atol=1e-8)


def test_euclidean_metric_gives_zero_symbols():
    np.testing.assert_allclose(metric_to_christoffel(lambda y: np.eye(3), np.ones(3)), np.zeros((3, 3, 3)))


def test_metric_must_be_positive_definite():
    with pytest.raises(NumericalRankError, match="positive definite"):
        metric_to_christoffel(lambda y: np.diag([1.0, -1.0]), [0.0, 0.0])
    with pytest.raises(ParameterError):
        metric_to_christoffel(sphere_metric, [0.0, 0.0], step=-1.0)


def test_metric_field_matches_sphere_fixture(sphere):
    field = christoffel_from_metric("N", sphere.metrics["N"], 2)
    y = np.array([0.5, 0.3])
    np.testing.assert_allclose(field.tensor(y), sphere.christoffels["N"].tensor(y), atol=1e-8)


def test_local_connection_map_is_affine_in_w_and_linear_in_v(sphere, rng):
    gamma = sphere.christoffels["N"]
    y, u, v, w = (rng.normal(size=2) for _ in range(4))
    _, out = vilms_local(gamma, y, u, v, w)
    np.testing.assert_allclose(out, w + gamma(y, u, v))
    local = LocalConnectionMap(gamma)
    assert local.chart_id == "N"
    np.testing.assert_allclose(local.omega(y, u) @ v, gamma(y, u, v))


def test_field_domain_and_symmetrization():
    field = ChristoffelField("a", 2, lambda y, u, v: np.array([u[0] * v[1], 0.0]), lambda y: y[0] > 0)
    with pytest.raises(DomainError):
        field([-1.0, 0.0], [1.0, 0.0], [0.0, 1.0])
    symmetric = field.symmetrized()
    np.testing.assert_allclose(symmetric([1.0, 0.0], [1.0, 0.0], [0.0, 1.0]), [0.5, 0.0])
    np.testing.assert_allclose(ChristoffelField.zero("a", 2)([1.0, 1.0], [1.0, 2.0], [3.0, 4.0]), [0.0, 0.0])


def test_derivative_diagnostic(sphere):
    gamma = sphere.christoffels["N"]
    y, d = np.array([0.3, 0.2]), np.array([1.0, 0.0])
    coarse = gamma.derivative(y, d, step=1e-4)
    fine = gamma.derivative(y, d, step=5e-5)
    np.testing.assert_allclose(coarse, fine, atol=1e-7)


def test_pushforward_at_a_critical_point():
    cube = SmoothMap2.from_propagation(lambda ys: [ys[0] ** 3, ys[1]], 2, 2, source="b", target="a")
    # the identity locates y from z at z = (0, y2), where the cube map agrees with it
    locate = SmoothMap2.identity(2)
    field = pushforward_christoffel(ChristoffelField.zero("b", 2), cube, locate)
    with pytest.raises(NumericalRankError, match="singular"):
        field([0.0, 0.5], [1.0, 0.0], [1.0, 0.0])
