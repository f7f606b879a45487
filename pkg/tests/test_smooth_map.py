"""Tests for SmoothMap2, the order-2 chain rule and the finite-difference oracle."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calculus import hyperdual as hd
from calculus.errors import DomainError, ParameterError, ShapeError
from calculus.fd_check import fd_check, fd_convergence
from calculus.smooth_map import SmoothMap2, compose_map2, eval_map2, random_polynomial_map
from geometry.atlas import transition_map


def polar_to_cartesian():
    return SmoothMap2.from_propagation(lambda ys: [ys[0] * hd.cos(ys[1]), ys[0] * hd.sin(ys[1])], 2, 2,
                                       contains=lambda y: y[0] > 0, name="polar")


def test_polar_map_differentials():
    sigma = polar_to_cartesian()
    r, th = 2.0, 0.4
    u, v = np.array([0.3, -1.0]), np.array([1.2, 0.5])
    value, du, d2 = eval_map2(sigma, [r, th], u, v)
    np.testing.assert_allclose(value, [r * np.cos(th), r * np.sin(th)])
    jac = np.array([[np.cos(th), -r * np.sin(th)], [np.sin(th), r * np.cos(th)]])
    np.testing.assert_allclose(du, jac @ u)
    expected = np.array([
        -np.sin(th) * (u[0] * v[1] + u[1] * v[0]) - r * np.cos(th) * u[1] * v[1],
        np.cos(th) * (u[0] * v[1] + u[1] * v[0]) - r * np.sin(th) * u[1] * v[1],
    ])
    np.testing.assert_allclose(d2, expected)
    np.testing.assert_allclose(sigma.jacobian([r, th]), jac)


def test_from_derivatives_agrees_with_propagation():
    value = lambda y: np.array([y[0] ** 2 * y[1]])  # noqa: E731
    jacobian = lambda y: np.array([[2 * y[0] * y[1], y[0] ** 2]])  # noqa: E731
    hessian = lambda y: np.array([[[2 * y[1], 2 * y[0]], [2 * y[0], 0.0]]])  # noqa: E731
    closed = SmoothMap2.from_derivatives(value, jacobian, hessian, 2, 1)
    propagated = SmoothMap2.from_propagation(lambda ys: [ys[0] ** 2 * ys[1]], 2, 1)
    y, u, v = np.array([0.5, -1.5]), np.array([1.0, 2.0]), np.array([-0.3, 0.7])
    for a, b in zip(eval_map2(closed, y, u, v), eval_map2(propagated, y, u, v)):
        np.testing.assert_allclose(a, b)


def test_linear_map_has_no_second_differential():
    sigma = SmoothMap2.linear([[1.0, 2.0], [0.0, -1.0]], offset=[1.0, 1.0])
    value, du, d2 = eval_map2(sigma, [1.0, 1.0], [1.0, 0.0], [0.0, 1.0])
    np.testing.assert_allclose(value, [4.0, 0.0])
    np.testing.assert_allclose(du, [1.0, 0.0])
    np.testing.assert_allclose(d2, [0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 31 - 1),
       dims=st.tuples(st.integers(2, 4), st.integers(2, 4), st.integers(2, 4)))
def test_chain_rule_matches_direct_composite(seed, dims):
    rng = np.random.default_rng(seed)
    n, m, k = dims
    inner = random_polynomial_map(n, m, rng)
    outer = random_polynomial_map(m, k, rng)
    composite = compose_map2(outer, inner)
    direct = SmoothMap2.from_propagation(lambda xs: outer.propagator(list(inner.propagator(xs))), n, k)
    y, u, v = (rng.normal(scale=0.5, size=n) for _ in range(3))
    for a, b in zip(eval_map2(composite, y, u, v), eval_map2(direct, y, u, v)):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_composite_keeps_labels_and_propagator():
    a = SmoothMap2.linear(np.eye(2), source="b", target="a")
    b = SmoothMap2.linear(2 * np.eye(2), source="c", target="b")
    ab = compose_map2(a, b)
    assert (ab.source, ab.target) == ("c", "a")
    assert ab.propagator is not None


def test_compose_dimension_mismatch():
    with pytest.raises(ShapeError, match="cannot compose"):
        compose_map2(SmoothMap2.identity(3), SmoothMap2.identity(2))


def test_eval_outside_domain():
    with pytest.raises(DomainError, match="outside the domain"):
        eval_map2(polar_to_cartesian(), [-1.0, 0.0], [1.0, 0.0], [1.0, 0.0])


def test_eval_wrong_vector_length():
    with pytest.raises(ShapeError):
        eval_map2(SmoothMap2.identity(2), [1.0, 2.0, 3.0], [1.0, 0.0], [0.0, 1.0])


def test_fd_check_passes_on_polynomial(rng):
    sigma = random_polynomial_map(3, 2, rng)
    report = fd_check(sigma, rng.normal(scale=0.5, size=3), seed=7)
    assert report.passed(1e-6)
    assert report.samples == 8
    assert report.to_dict()["seed"] == 7


def test_fd_check_catches_a_wrong_second_action():
    good = polar_to_cartesian()

    def evaluator(y, u, v):
        value, du, d2 = good.evaluator(y, u, v)
        return value, du, d2 + 0.1

    bad = SmoothMap2(2, 2, evaluator, good.contains, "bad")
    report = fd_check(bad, [1.0, 0.3])
    assert report.max_rel_error_first < 1e-6
    assert report.max_rel_error_second > 1e-3


def test_fd_check_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        fd_check(SmoothMap2.identity(2), [0.0, 0.0], step=0.0)
    with pytest.raises(ParameterError):
        fd_check(SmoothMap2.identity(2), [0.0, 0.0], samples=0)


def test_fd_check_stencil_leaving_domain():
    with pytest.raises(DomainError, match="stencil"):
        fd_check(polar_to_cartesian(), [1e-6, 0.0], step=1e-4)


def test_halving_the_step_cuts_the_second_difference_error_by_four():
    halving = fd_convergence(polar_to_cartesian(), [1.5, 0.7], u=[0.6, 0.8], v=[0.8, 0.6])
    assert halving.error_coarse > 1e-6
    assert halving.ratio == pytest.approx(4.0, rel=0.05)


def test_halving_on_a_stereographic_transition(sphere):
    sigma = transition_map(sphere.atlas, "S", "N")
    halving = fd_convergence(sigma, [0.5, 0.3], seed=3)
    assert halving.error_coarse > 1e-8
    assert halving.ratio == pytest.approx(4.0, rel=0.05)


def test_cubic_maps_are_differenced_exactly(rng):
    halving = fd_convergence(random_polynomial_map(2, 2, rng), rng.normal(scale=0.5, size=2))
    assert halving.error_coarse < 1e-8


def test_fd_convergence_rejects_a_bad_step():
    with pytest.raises(ParameterError):
        fd_convergence(polar_to_cartesian(), [1.5, 0.7], step=-1e-2)
