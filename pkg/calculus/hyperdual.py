"""
Order-2 forward propagation numbers.

A ``HyperDual`` carries ``real + eps1*e1 + eps2*e2 + eps12*e1*e2`` with
``e1**2 == e2**2 == 0``. Seeding the inputs of a map with
``HyperDual(y_k, u_k, v_k, 0)`` and reading the outputs gives the value,
the first differential applied to ``u`` (in ``eps1``) and to ``v`` (in
``eps2``), and the second differential applied to ``(u, v)`` (in ``eps12``).

The module-level functions (``sin``, ``cos``, ...) accept plain floats as
well, so an expression written against them evaluates with either kind of
input.
"""
import math
from typing import Any, Union

import numpy as np

Number = Union[float, int, np.floating]


class HyperDual:
    """Truncated two-direction Taylor number used for order-2 propagation."""

    __slots__ = ("real", "eps1", "eps2", "eps12")

    # numpy scalars defer to our reflected operators instead of building object arrays
    __array_ufunc__ = None

    def __init__(self, real: Number, eps1: Number = 0.0, eps2: Number = 0.0, eps12: Number = 0.0):
        self.real = float(real)
        self.eps1 = float(eps1)
        self.eps2 = float(eps2)
        self.eps12 = float(eps12)

    def __repr__(self) -> str:
        return f"HyperDual({self.real!r}, {self.eps1!r}, {self.eps2!r}, {self.eps12!r})"

    def _chain(self, f0: float, f1: float, f2: float) -> "HyperDual":
        """Apply a scalar function given its value and first two derivatives at ``real``."""
        return HyperDual(
            f0,
            f1 * self.eps1,
            f1 * self.eps2,
            f1 * self.eps12 + f2 * self.eps1 * self.eps2,
        )

    def __add__(self, other: Any) -> "HyperDual":
        if isinstance(other, HyperDual):
            return HyperDual(self.real + other.real, self.eps1 + other.eps1,
                             self.eps2 + other.eps2, self.eps12 + other.eps12)
        return HyperDual(self.real + other, self.eps1, self.eps2, self.eps12)

    __radd__ = __add__

    def __neg__(self) -> "HyperDual":
        return HyperDual(-self.real, -self.eps1, -self.eps2, -self.eps12)

    def __pos__(self) -> "HyperDual":
        return self

    def __sub__(self, other: Any) -> "HyperDual":
        return self + (-other)

    def __rsub__(self, other: Any) -> "HyperDual":
        return (-self) + other

    def __mul__(self, other: Any) -> "HyperDual":
        if isinstance(other, HyperDual):
            return HyperDual(
                self.real * other.real,
                self.real * other.eps1 + self.eps1 * other.real,
                self.real * other.eps2 + self.eps2 * other.real,
                self.real * other.eps12 + self.eps1 * other.eps2
                + self.eps2 * other.eps1 + self.eps12 * other.real,
            )
        return HyperDual(self.real * other, self.eps1 * other, self.eps2 * other, self.eps12 * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "HyperDual":
        a = self.real
        return self._chain(1.0 / a, -1.0 / a ** 2, 2.0 / a ** 3)

    def __truediv__(self, other: Any) -> "HyperDual":
        if isinstance(other, HyperDual):
            return self * other.reciprocal()
        return HyperDual(self.real / other, self.eps1 / other, self.eps2 / other, self.eps12 / other)

    def __rtruediv__(self, other: Any) -> "HyperDual":
        return self.reciprocal() * other

    def __pow__(self, exponent: Any) -> "HyperDual":
        if isinstance(exponent, HyperDual):
            return exp(exponent * log(self))
        n = float(exponent)
        if n == 0.0:
            return HyperDual(1.0)
        if n == 1.0:
            return self
        a = self.real
        if n == 2.0:
            return self._chain(a * a, 2.0 * a, 2.0)
        return self._chain(a ** n, n * a ** (n - 1.0), n * (n - 1.0) * a ** (n - 2.0))

    def __rpow__(self, base: Any) -> "HyperDual":
        return exp(self * math.log(float(base)))


def real_part(x: Any) -> float:
    return x.real if isinstance(x, HyperDual) else float(x)


def first_part(x: Any) -> float:
    return x.eps1 if isinstance(x, HyperDual) else 0.0


def second_part(x: Any) -> float:
    return x.eps12 if isinstance(x, HyperDual) else 0.0


def sin(x: Any) -> Any:
    if isinstance(x, HyperDual):
        s, c = math.sin(x.real), math.cos(x.real)
        return x._chain(s, c, -s)
    return np.sin(x)


def cos(x: Any) -> Any:
    if isinstance(x, HyperDual):
        s, c = math.sin(x.real), math.cos(x.real)
        return x._chain(c, -s, -c)
    return np.cos(x)


def tan(x: Any) -> Any:
    if isinstance(x, HyperDual):
        t = math.tan(x.real)
        sec2 = 1.0 + t * t
        return x._chain(t, sec2, 2.0 * t * sec2)
    return np.tan(x)


def exp(x: Any) -> Any:
    if isinstance(x, HyperDual):
        e = math.exp(x.real)
        return x._chain(e, e, e)
    return np.exp(x)


def log(x: Any) -> Any:
    if isinstance(x, HyperDual):
        a = x.real
        return x._chain(math.log(a), 1.0 / a, -1.0 / (a * a))
    return np.log(x)


def sqrt(x: Any) -> Any:
    if isinstance(x, HyperDual):
        r = math.sqrt(x.real)
        return x._chain(r, 0.5 / r, -0.25 / (r * x.real))
    return np.sqrt(x)


def atan2(y: Any, x: Any) -> Any:
    """Two-argument arctangent with order-2 propagation in both arguments."""
    if not isinstance(y, HyperDual) and not isinstance(x, HyperDual):
        return np.arctan2(y, x)
    y = y if isinstance(y, HyperDual) else HyperDual(y)
    x = x if isinstance(x, HyperDual) else HyperDual(x)
    a, b = y.real, x.real
    r2 = a * a + b * b
    gy, gx = b / r2, -a / r2
    hyy = -2.0 * a * b / r2 ** 2
    hxx = 2.0 * a * b / r2 ** 2
    hxy = (a * a - b * b) / r2 ** 2
    return HyperDual(
        math.atan2(a, b),
        gy * y.eps1 + gx * x.eps1,
        gy * y.eps2 + gx * x.eps2,
        gy * y.eps12 + gx * x.eps12
        + hyy * y.eps1 * y.eps2 + hxx * x.eps1 * x.eps2
        + hxy * (y.eps1 * x.eps2 + x.eps1 * y.eps2),
    )


# Name table handed to sympy.lambdify so parsed expressions propagate HyperDuals
PROPAGATION_NAMESPACE = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "atan2": atan2,
    "pi": math.pi,
    "E": math.e,
    "e": math.e,
}
