"""
Linear connections in local form.

A connection is known chart by chart through its Christoffel field
Gamma_a(y)(u)(v). The local connection map is
D_a(y, u, v, w) = (y, w + omega_a(y, u) v) with omega_a(y, u) v = Gamma_a(y)(u)(v),
and two fields describe the same connection across sigma = sigma_ab when

    Gamma_a(s(y))(ds u)(ds v) + d2s(y)(u, v) - ds Gamma_b(y)(u)(v) = 0.
"""
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import FD_CONFIG
from calculus.errors import ChartMismatchError, DomainError, NumericalRankError, ParameterError
from calculus.smooth_map import SmoothMap2, as_vector, eval_map2, everywhere

logger = logging.getLogger(__name__)

# dsigma(y) with a larger condition number is treated as singular
MAX_CONDITION = 1e12

Action = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ChristoffelField:
    """
    Christoffel symbols of a connection in one chart.

    Attributes:
        chart_id: Chart the field is expressed in
        dim: Model space dimension
        action: ``(y, u, v) -> Gamma(y)(u)(v)``, bilinear in ``(u, v)``
        contains: Domain of the field in chart coordinates
    """

    chart_id: str
    dim: int
    action: Action = field(repr=False)
    contains: Callable[[np.ndarray], bool] = field(default=everywhere, repr=False)

    def __call__(self, y, u, v) -> np.ndarray:
        y = as_vector(y, self.dim, "point")
        if not self.contains(y):
            message = f"point {y.tolist()} is outside the domain of the {self.chart_id!r} Christoffel field"
            logger.error(message)
            raise DomainError(message)
        out = self.action(y, as_vector(u, self.dim, "u"), as_vector(v, self.dim, "v"))
        return as_vector(out, self.dim, "Christoffel value")

    @classmethod
    def zero(cls, chart_id: str, dim: int,
             contains: Callable[[np.ndarray], bool] = everywhere) -> "ChristoffelField":
        return cls(chart_id, dim, lambda y, u, v: np.zeros(dim), contains)

    @classmethod
    def from_tensor(cls, chart_id: str, dim: int, tensor: Callable[[np.ndarray], np.ndarray],
                    contains: Callable[[np.ndarray], bool] = everywhere) -> "ChristoffelField":
        """Field from ``y -> G`` with ``G[k, i, j]`` the symbol Gamma^k_ij."""

        def action(y, u, v):
            return np.einsum("kij,i,j->k", np.asarray(tensor(y), dtype=float), u, v)

        return cls(chart_id, dim, action, contains)

    def tensor(self, y) -> np.ndarray:
        """Materialize ``G[k, i, j] = Gamma(y)(e_i)(e_j)[k]``."""
        basis = np.eye(self.dim)
        g = np.empty((self.dim, self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                g[:, i, j] = self(y, basis[i], basis[j])
        return g

    def norm(self, y) -> float:
        return float(np.linalg.norm(self.tensor(y)))

    def symmetrized(self) -> "ChristoffelField":
        """The field 1/2 (Gamma(u)(v) + Gamma(v)(u))."""
        action = self.action
        return ChristoffelField(self.chart_id, self.dim,
                                lambda y, u, v: 0.5 * (np.asarray(action(y, u, v)) + np.asarray(action(y, v, u))),
                                self.contains)

    def perturbed(self, extra: Action) -> "ChristoffelField":
        """Field plus an extra bilinear term; used to build fault fixtures."""
        action = self.action
        return ChristoffelField(self.chart_id, self.dim,
                                lambda y, u, v: np.asarray(action(y, u, v)) + np.asarray(extra(y, u, v)),
                                self.contains)

    def derivative(self, y, direction, step: float = FD_CONFIG["step"]) -> np.ndarray:
        """
        Central-difference derivative of the symbol tensor along ``direction``.

        Smoothness diagnostic only: the result has the shape of ``tensor(y)``.

        Raises:
            ParameterError: If ``step`` is not positive
            DomainError: If a stencil point leaves the field's domain
        """
        if step <= 0:
            raise ParameterError(f"derivative step must be positive, got {step}")
        y = as_vector(y, self.dim, "point")
        d = as_vector(direction, self.dim, "direction")
        return (self.tensor(y + step * d) - self.tensor(y - step * d)) / (2.0 * step)


@dataclass(frozen=True)
class LocalConnectionMap:
    """The local form D_a of a linear connection."""

    christoffel: ChristoffelField

    @property
    def chart_id(self) -> str:
        return self.christoffel.chart_id

    def __call__(self, y, u, v, w):
        return vilms_local(self.christoffel, y, u, v, w)

    def omega(self, y, u) -> np.ndarray:
        """The matrix of v -> Gamma(y)(u)(v)."""
        basis = np.eye(self.christoffel.dim)
        return np.column_stack([self.christoffel(y, u, e) for e in basis])


def vilms_local(gamma: ChristoffelField, y, u, v, w):
    """
    Apply the local connection map: (y, u, v, w) -> (y, w + Gamma(y)(u)(v)).

    Raises:
        DomainError: If ``y`` is outside the field's chart
        ShapeError: If a vector has the wrong dimension
    """
    y = as_vector(y, gamma.dim, "point")
    w = as_vector(w, gamma.dim, "w")
    return y, as_vector(w + gamma(y, u, v), gamma.dim)


def compat_residual(gamma_alpha: ChristoffelField, gamma_beta: ChristoffelField,
                    sigma: SmoothMap2, y, u, v) -> np.ndarray:
    """
    Residual of the compatibility condition across sigma = sigma_ab at (y, u, v).

    ``y`` is in beta-coordinates. The second differential is symmetric, so the
    d2s(y)(v, u) term is evaluated as d2s(y)(u, v).

    Raises:
        ChartMismatchError: If sigma's chart labels disagree with the fields
        DomainError: If ``y`` is outside sigma's domain
    """
    if (sigma.source is not None and sigma.source != gamma_beta.chart_id) or \
            (sigma.target is not None and sigma.target != gamma_alpha.chart_id):
        message = (f"transition {sigma.source}->{sigma.target} does not connect "
                   f"{gamma_beta.chart_id!r} to {gamma_alpha.chart_id!r}")
        logger.error(message)
        raise ChartMismatchError(message)
    zero = np.zeros(sigma.domain_dim)
    z, su, suv = eval_map2(sigma, y, u, v)
    _, sv, _ = eval_map2(sigma, y, v, zero)
    _, s_gamma, _ = eval_map2(sigma, y, gamma_beta(y, u, v), zero)
    return as_vector(gamma_alpha(z, su, sv) + suv - s_gamma, sigma.codomain_dim, "residual")


def _solve_differential(sigma: SmoothMap2, y: np.ndarray) -> np.ndarray:
    jac = sigma.jacobian(y)
    try:
        cond = np.linalg.cond(jac)
        inv = np.linalg.inv(jac)
    except np.linalg.LinAlgError:
        cond, inv = np.inf, None
    if inv is None or not np.isfinite(cond) or cond > MAX_CONDITION:
        message = f"d{sigma.name} is singular at {y.tolist()} (condition number {cond:.3g})"
        logger.error(message)
        raise NumericalRankError(message, point=y)
    return inv


def pushforward_christoffel(gamma_beta: ChristoffelField, sigma: SmoothMap2, inverse: SmoothMap2,
                            chart_id: Optional[str] = None) -> ChristoffelField:
    """
    Solve the compatibility condition for Gamma_a.

    Gamma_a(z)(U)(V) = ds(y) Gamma_b(y)(u)(v) - d2s(y)(u, v) with y = s^-1(z),
    u = ds(y)^-1 U and v = ds(y)^-1 V.

    Args:
        gamma_beta: Field in the source chart of ``sigma``
        sigma: Transition sigma_ab
        inverse: Transition sigma_ba, used to locate y from z
        chart_id: Chart id of the result; defaults to ``sigma.target``

    Returns:
        ChristoffelField in chart alpha. Evaluating it raises NumericalRankError
        where ds(y) is singular.
    """
    chart_id = chart_id or sigma.target or "pushforward"
    dim = sigma.codomain_dim
    zero = np.zeros(sigma.domain_dim)

    def action(z, big_u, big_v):
        y = inverse.value(z)
        inv = _solve_differential(sigma, y)
        u, v = inv @ big_u, inv @ big_v
        _, transported, _ = eval_map2(sigma, y, gamma_beta(y, u, v), zero)
        _, _, suv = eval_map2(sigma, y, u, v)
        return transported - suv

    def contains(z):
        if not inverse.contains(z):
            return False
        y = inverse.value(z)
        return bool(sigma.contains(y) and gamma_beta.contains(y))

    logger.debug(f"Pushing Christoffel field {gamma_beta.chart_id} forward along {sigma.name}")
    return ChristoffelField(chart_id, dim, action, contains)


def metric_to_christoffel(metric: Callable[[np.ndarray], np.ndarray], y,
                          step: float = FD_CONFIG["metric_step"]) -> np.ndarray:
    """
    Levi-Civita symbols of a metric at one point.

    Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), with the metric
    derivatives taken by central differences.

    Returns:
        Array ``G[k, i, j]``, symmetric in ``(i, j)``

    Raises:
        NumericalRankError: If the metric is not positive definite at ``y``
        ParameterError: If ``step`` is not positive
    """
    if step <= 0:
        raise ParameterError(f"metric step must be positive, got {step}")
    y = as_vector(y, name="point")
    n = y.shape[0]
    g = np.asarray(metric(y), dtype=float)
    try:
        np.linalg.cholesky(0.5 * (g + g.T))
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        message = f"metric is not positive definite at {y.tolist()}"
        logger.error(message)
        raise NumericalRankError(message, point=y) from None

    # dg[m, a, b] = d_m g_ab
    dg = np.empty((n, n, n))
    for m, e in enumerate(np.eye(n)):
        dg[m] = (np.asarray(metric(y + step * e), dtype=float)
                 - np.asarray(metric(y - step * e), dtype=float)) / (2.0 * step)
    lowered = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", g_inv, lowered)


def christoffel_from_metric(chart_id: str, metric: Callable[[np.ndarray], np.ndarray], dim: int,
                            contains: Callable[[np.ndarray], bool] = everywhere,
                            step: float = FD_CONFIG["metric_step"]) -> ChristoffelField:
    """ChristoffelField whose symbols come from ``metric_to_christoffel`` at every point."""
    return ChristoffelField.from_tensor(chart_id, dim, lambda y: metric_to_christoffel(metric, y, step),
                                        contains)
