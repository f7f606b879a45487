"""
Smooth maps between open subsets of model spaces, evaluable to order two.

A ``SmoothMap2`` never stores derivative tensors. Its evaluator returns, at a
point ``y`` and for directions ``u`` and ``v``, the triple

    (sigma(y), d sigma(y) u, d^2 sigma(y)(u, v))

so chart maps of any dimension plug in uniformly. Two builders cover the
ways maps get defined in this project: closed-form derivative callables
(``SmoothMap2.from_derivatives``) and order-2 forward propagation through a
Python expression tree (``SmoothMap2.from_propagation``).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from calculus.errors import DomainError, ShapeError
from calculus.hyperdual import HyperDual, first_part, real_part, second_part

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray, np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]
Propagator = Callable[[List], Sequence]


def everywhere(y: np.ndarray) -> bool:
    return True


def as_vector(values, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """Return ``values`` as a read-only float vector, checking its length."""
    vec = np.array(values, dtype=float).reshape(-1)
    if dim is not None and vec.shape[0] != dim:
        raise ShapeError(f"{name} has {vec.shape[0]} entries, expected {dim}")
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True)
class ModelSpace:
    """Finite-dimensional stand-in for a model Banach space."""

    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ShapeError(f"model space dimension must be >= 1, got {self.dim}")

    def zeros(self) -> np.ndarray:
        return as_vector(np.zeros(self.dim), self.dim)

    def basis(self) -> List[np.ndarray]:
        return [as_vector(row, self.dim) for row in np.eye(self.dim)]

    def vector(self, values, name: str = "vector") -> np.ndarray:
        return as_vector(values, self.dim, name)


@dataclass(frozen=True)
class SmoothMap2:
    """
    A map sigma: U -> F between open subsets of model spaces with order-2 data.

    Attributes:
        domain_dim: Dimension of the source model space
        codomain_dim: Dimension of the target model space
        evaluator: ``(y, u, v) -> (value, first action on u, second action on (u, v))``
        contains: Membership test for the open domain
        name: Label used in logs and reports
        source: Chart id of the domain coordinates, when the map is a transition
        target: Chart id of the codomain coordinates, when the map is a transition
        propagator: The list-to-list function a propagation-built map came from
    """

    domain_dim: int
    codomain_dim: int
    evaluator: Evaluator = field(repr=False)
    contains: Callable[[np.ndarray], bool] = field(default=everywhere, repr=False)
    name: str = "map"
    source: Optional[str] = None
    target: Optional[str] = None
    propagator: Optional[Propagator] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_propagation(cls, fn: Propagator, domain_dim: int, codomain_dim: int,
                         contains: Callable[[np.ndarray], bool] = everywhere,
                         name: str = "map", source: Optional[str] = None,
                         target: Optional[str] = None) -> "SmoothMap2":
        """
        Build a map from a function of a coordinate list.

        ``fn`` receives ``domain_dim`` numbers (``HyperDual`` during evaluation)
        and returns ``codomain_dim`` numbers; anything written with the
        arithmetic operators and the functions of ``calculus.hyperdual``
        propagates exactly to order two.
        """

        def evaluator(y, u, v):
            inputs = [HyperDual(y[k], u[k], v[k], 0.0) for k in range(domain_dim)]
            outputs = list(fn(inputs))
            if len(outputs) != codomain_dim:
                raise ShapeError(f"{name} returned {len(outputs)} components, expected {codomain_dim}")
            return (
                np.array([real_part(o) for o in outputs]),
                np.array([first_part(o) for o in outputs]),
                np.array([second_part(o) for o in outputs]),
            )

        return cls(domain_dim, codomain_dim, evaluator, contains, name, source, target, fn)

    @classmethod
    def from_derivatives(cls, value: Callable[[np.ndarray], np.ndarray],
                         jacobian: Callable[[np.ndarray], np.ndarray],
                         hessian: Callable[[np.ndarray], np.ndarray],
                         domain_dim: int, codomain_dim: int,
                         contains: Callable[[np.ndarray], bool] = everywhere,
                         name: str = "map", source: Optional[str] = None,
                         target: Optional[str] = None) -> "SmoothMap2":
        """
        Build a map from closed-form value, Jacobian (m x n) and Hessian (m x n x n) callables.
        """

        def evaluator(y, u, v):
            jac = np.asarray(jacobian(y), dtype=float)
            hess = np.asarray(hessian(y), dtype=float)
            return (
                np.asarray(value(y), dtype=float).reshape(codomain_dim),
                jac @ u,
                np.einsum("kij,i,j->k", hess, u, v),
            )

        return cls(domain_dim, codomain_dim, evaluator, contains, name, source, target)

    @classmethod
    def linear(cls, matrix, offset=None, contains: Callable[[np.ndarray], bool] = everywhere,
               name: str = "linear", source: Optional[str] = None,
               target: Optional[str] = None) -> "SmoothMap2":
        """Affine map ``y -> A y + b``; its second differential is identically zero."""
        a = np.array(matrix, dtype=float)
        if a.ndim != 2:
            raise ShapeError(f"linear map needs a matrix, got shape {a.shape}")
        b = np.zeros(a.shape[0]) if offset is None else as_vector(offset, a.shape[0], "offset")
        a.setflags(write=False)
        codomain_dim, domain_dim = a.shape

        def evaluator(y, u, v):
            return a @ y + b, a @ u, np.zeros(codomain_dim)

        def propagate(xs):
            return [sum((a[k, i] * xs[i] for i in range(domain_dim)), b[k]) for k in range(codomain_dim)]

        return cls(domain_dim, codomain_dim, evaluator, contains, name, source, target, propagate)

    @classmethod
    def identity(cls, dim: int, contains: Callable[[np.ndarray], bool] = everywhere,
                 chart_id: Optional[str] = None) -> "SmoothMap2":
        return cls.linear(np.eye(dim), contains=contains, name="identity",
                          source=chart_id, target=chart_id)

    def jacobian(self, y) -> np.ndarray:
        """Materialize d sigma(y) as a ``codomain_dim x domain_dim`` matrix."""
        y = as_vector(y, self.domain_dim, "point")
        zero = np.zeros(self.domain_dim)
        columns = [self.evaluator(y, e, zero)[1] for e in np.eye(self.domain_dim)]
        return np.column_stack(columns)

    def value(self, y) -> np.ndarray:
        y = as_vector(y, self.domain_dim, "point")
        zero = np.zeros(self.domain_dim)
        return as_vector(self.evaluator(y, zero, zero)[0], self.codomain_dim, "value")

    def relabel(self, source: Optional[str], target: Optional[str]) -> "SmoothMap2":
        return SmoothMap2(self.domain_dim, self.codomain_dim, self.evaluator, self.contains,
                          self.name, source, target, self.propagator)


def eval_map2(sigma: SmoothMap2, y, u, v) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Evaluate a map to order two.

    Args:
        sigma: The map
        y: Point of the domain
        u: First direction
        v: Second direction

    Returns:
        Tuple (sigma(y), d sigma(y) u, d^2 sigma(y)(u, v))

    Raises:
        ShapeError: If a vector has the wrong number of entries
        DomainError: If ``y`` is outside the domain of ``sigma``
    """
    y = as_vector(y, sigma.domain_dim, "point")
    u = as_vector(u, sigma.domain_dim, "u")
    v = as_vector(v, sigma.domain_dim, "v")
    if not sigma.contains(y):
        message = f"point {y.tolist()} is outside the domain of {sigma.name}"
        logger.error(message)
        raise DomainError(message)
    value, du, d2uv = sigma.evaluator(y, u, v)
    return (
        as_vector(value, sigma.codomain_dim, "value"),
        as_vector(du, sigma.codomain_dim, "first action"),
        as_vector(d2uv, sigma.codomain_dim, "second action"),
    )


def compose_map2(outer: SmoothMap2, inner: SmoothMap2) -> SmoothMap2:
    """
    Compose two maps with the order-2 chain rule.

    d(t o s)(y)u = dt(s(y)) ds(y)u and
    d2(t o s)(y)(u,v) = d2t(s(y))(ds(y)u, ds(y)v) + dt(s(y)) d2s(y)(u,v).

    Raises:
        ShapeError: If ``inner.codomain_dim != outer.domain_dim``
    """
    if inner.codomain_dim != outer.domain_dim:
        raise ShapeError(
            f"cannot compose {outer.name} (domain dim {outer.domain_dim}) "
            f"after {inner.name} (codomain dim {inner.codomain_dim})"
        )
    inner_zero = np.zeros(inner.domain_dim)
    outer_zero = np.zeros(outer.domain_dim)

    def evaluator(y, u, v):
        z, su, suv = inner.evaluator(y, u, v)
        _, sv, _ = inner.evaluator(y, v, inner_zero)
        value, tu, tuv = outer.evaluator(z, su, sv)
        _, t_of_suv, _ = outer.evaluator(z, suv, outer_zero)
        return value, tu, tuv + t_of_suv

    def contains(y):
        if not inner.contains(y):
            return False
        return outer.contains(inner.evaluator(y, inner_zero, inner_zero)[0])

    propagator = None
    if outer.propagator is not None and inner.propagator is not None:
        def propagator(xs):
            return outer.propagator(list(inner.propagator(xs)))

    return SmoothMap2(inner.domain_dim, outer.codomain_dim, evaluator, contains,
                      f"{outer.name}∘{inner.name}", inner.source, outer.target, propagator)


def random_polynomial_map(domain_dim: int, codomain_dim: int, rng: np.random.Generator,
                          degree: int = 3, scale: float = 0.5) -> SmoothMap2:
    """
    Random polynomial map used by the chain-rule checks.

    Each output component is a constant plus linear, quadratic and (for
    ``degree >= 3``) cubic monomials with normally distributed coefficients.
    """
    const = rng.normal(scale=scale, size=codomain_dim)
    lin = rng.normal(scale=scale, size=(codomain_dim, domain_dim))
    quad = rng.normal(scale=scale, size=(codomain_dim, domain_dim, domain_dim))
    cubic = rng.normal(scale=scale, size=(codomain_dim, domain_dim)) if degree >= 3 else None

    def fn(xs):
        outputs = []
        for k in range(codomain_dim):
            acc = const[k]
            for i in range(domain_dim):
                acc = acc + lin[k, i] * xs[i]
                for j in range(domain_dim):
                    acc = acc + quad[k, i, j] * xs[i] * xs[j]
                if cubic is not None:
                    acc = acc + cubic[k, i] * xs[i] ** 3
            outputs.append(acc)
        return outputs

    return SmoothMap2.from_propagation(fn, domain_dim, codomain_dim, name=f"poly{domain_dim}->{codomain_dim}")
