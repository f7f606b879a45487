"""Tests for order-2 propagation numbers."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calculus import hyperdual as hd
from calculus.hyperdual import HyperDual

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def seeded(x):
    return HyperDual(x, 1.0, 1.0, 0.0)


def test_cube_carries_first_and_second_derivative():
    out = seeded(2.0) ** 3
    assert out.real == pytest.approx(8.0)
    assert out.eps1 == pytest.approx(12.0)
    assert out.eps2 == pytest.approx(12.0)
    assert out.eps12 == pytest.approx(12.0)


def test_product_of_two_directions_gives_mixed_term():
    x = HyperDual(1.5, 1.0, 0.0, 0.0)
    y = HyperDual(-0.5, 0.0, 1.0, 0.0)
    out = x * y
    assert out.real == pytest.approx(-0.75)
    assert out.eps1 == pytest.approx(-0.5)
    assert out.eps2 == pytest.approx(1.5)
    assert out.eps12 == pytest.approx(1.0)


def test_reciprocal_and_division():
    out = 1.0 / seeded(2.0)
    assert out.real == pytest.approx(0.5)
    assert out.eps1 == pytest.approx(-0.25)
    assert out.eps12 == pytest.approx(0.25)


@pytest.mark.parametrize("fn, d1, d2", [
    (hd.sin, math.cos, lambda x: -math.sin(x)),
    (hd.cos, lambda x: -math.sin(x), lambda x: -math.cos(x)),
    (hd.exp, math.exp, math.exp),
    (hd.sqrt, lambda x: 0.5 / math.sqrt(x), lambda x: -0.25 * x ** -1.5),
    (hd.log, lambda x: 1.0 / x, lambda x: -1.0 / x ** 2),
])
def test_elementary_functions(fn, d1, d2):
    x = 0.7
    out = fn(seeded(x))
    assert out.eps1 == pytest.approx(d1(x))
    assert out.eps12 == pytest.approx(d2(x))


def test_atan2_matches_polar_angle_derivatives():
    # theta(x, y) along the direction (1, 1): d theta = (x - y)/r^2
    x, y = 1.0, 2.0
    out = hd.atan2(HyperDual(y, 1.0, 1.0, 0.0), HyperDual(x, 1.0, 1.0, 0.0))
    r2 = x * x + y * y
    assert out.real == pytest.approx(math.atan2(y, x))
    assert out.eps1 == pytest.approx((x - y) / r2)
    # second derivative of theta(x + t, y + t) at t = 0
    h = 1e-4
    theta = lambda t: math.atan2(y + t, x + t)  # noqa: E731
    assert out.eps12 == pytest.approx((theta(h) - 2 * theta(0.0) + theta(-h)) / h ** 2, rel=1e-5)


def test_plain_floats_pass_through():
    assert hd.sin(0.3) == pytest.approx(math.sin(0.3))
    assert hd.atan2(1.0, 1.0) == pytest.approx(math.pi / 4)


def test_numpy_scalars_on_the_left():
    out = np.float64(2.0) * seeded(3.0) + np.float64(1.0)
    assert isinstance(out, HyperDual)
    assert out.real == pytest.approx(7.0)
    assert out.eps1 == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(x=finite)
def test_square_expansion_identity(x):
    a = seeded(x)
    left = (a + 1.0) ** 2
    right = a * a + 2.0 * a + 1.0
    for part in ("real", "eps1", "eps2", "eps12"):
        assert getattr(left, part) == pytest.approx(getattr(right, part), abs=1e-9)
