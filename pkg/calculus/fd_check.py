"""
Finite-difference oracle for the first and second actions of a SmoothMap2.
"""
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import FD_CONFIG, SAMPLING_CONFIG
from calculus.errors import DomainError, ParameterError
from calculus.smooth_map import SmoothMap2, as_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DerivativeCheckReport:
    """Worst relative errors of the claimed actions against central differences."""

    max_rel_error_first: float
    max_rel_error_second: float
    samples: int
    step: float
    seed: int

    def passed(self, tol: float) -> bool:
        return self.max_rel_error_first < tol and self.max_rel_error_second < tol

    def to_dict(self) -> dict:
        return {
            "max_rel_error_first": self.max_rel_error_first,
            "max_rel_error_second": self.max_rel_error_second,
            "samples": self.samples,
            "step": self.step,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    """Second-action difference errors at a step and at half that step."""

    error_coarse: float
    error_fine: float
    step: float

    @property
    def ratio(self) -> float:
        """Error reduction from halving the step; about 4 for a second-order stencil."""
        return self.error_coarse / self.error_fine if self.error_fine > 0 else float("inf")


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    d = rng.normal(size=dim)
    return d / np.linalg.norm(d)


def _value_at(sigma: SmoothMap2, p: np.ndarray) -> np.ndarray:
    if not sigma.contains(p):
        message = f"finite-difference stencil point {p.tolist()} leaves the domain of {sigma.name}"
        logger.error(message)
        raise DomainError(message)
    zero = np.zeros(sigma.domain_dim)
    return sigma.evaluator(p, zero, zero)[0]


def _central_first(sigma: SmoothMap2, y, u, h: float) -> np.ndarray:
    return (_value_at(sigma, y + h * u) - _value_at(sigma, y - h * u)) / (2.0 * h)


def _mixed_second(sigma: SmoothMap2, y, u, v, h: float) -> np.ndarray:
    return (
        _value_at(sigma, y + h * u + h * v) - _value_at(sigma, y + h * u - h * v)
        - _value_at(sigma, y - h * u + h * v) + _value_at(sigma, y - h * u - h * v)
    ) / (4.0 * h * h)


def fd_check(sigma: SmoothMap2, y, step: float = FD_CONFIG["step"],
             samples: int = FD_CONFIG["samples"], seed: Optional[int] = None) -> DerivativeCheckReport:
    """
    Compare the claimed first and second actions against central differences.

    For random unit directions u, v the first action is checked against
    ``(s(y+hu) - s(y-hu)) / 2h`` and the second against the four-point mixed
    difference ``(s(y+hu+hv) - s(y+hu-hv) - s(y-hu+hv) + s(y-hu-hv)) / 4h^2``.
    Errors are relative to ``max(1, |claimed|)``.

    Args:
        sigma: Map under test
        y: Interior point of the domain
        step: Difference step h
        samples: Number of random direction pairs
        seed: Seed of the direction generator (config default when omitted)

    Returns:
        DerivativeCheckReport with the worst errors seen

    Raises:
        ParameterError: If ``step <= 0`` or ``samples < 1``
        DomainError: If a stencil point leaves the domain
    """
    if step <= 0:
        raise ParameterError(f"finite-difference step must be positive, got {step}")
    if samples < 1:
        raise ParameterError(f"need at least one sample, got {samples}")
    seed = SAMPLING_CONFIG["seed"] if seed is None else seed
    rng = np.random.default_rng(seed)
    y = as_vector(y, sigma.domain_dim, "point")

    worst_first = 0.0
    worst_second = 0.0
    for _ in range(samples):
        u = _unit(rng, sigma.domain_dim)
        v = _unit(rng, sigma.domain_dim)
        _, du, d2uv = sigma.evaluator(y, u, v)
        fd_first = _central_first(sigma, y, u, step)
        fd_second = _mixed_second(sigma, y, u, v, step)
        worst_first = max(worst_first, float(np.linalg.norm(fd_first - du) / max(1.0, np.linalg.norm(du))))
        worst_second = max(worst_second, float(np.linalg.norm(fd_second - d2uv) / max(1.0, np.linalg.norm(d2uv))))

    logger.debug(f"fd_check {sigma.name} at {y.tolist()}: first {worst_first:.3e}, second {worst_second:.3e}")
    return DerivativeCheckReport(worst_first, worst_second, samples, float(step), int(seed))


def fd_convergence(sigma: SmoothMap2, y, u=None, v=None, step: float = FD_CONFIG["convergence_step"],
                   seed: Optional[int] = None) -> ConvergenceReport:
    """
    Error of the mixed second difference at ``step`` and at ``step / 2``.

    The claimed second action is the reference. For a map whose fourth
    derivatives do not vanish along (u, v) the error shrinks by about 4 per
    halving; polynomials of degree three or less are differenced exactly and
    show only rounding.

    Args:
        sigma: Map under test
        y: Interior point of the domain
        u: Direction; a seeded random unit vector when omitted
        v: Second direction; ``u`` when omitted, which turns the stencil into a
            plain second difference with step 2h
        step: Coarse difference step
        seed: Seed of the direction generator (config default when omitted)

    Raises:
        ParameterError: If ``step <= 0``
        DomainError: If a stencil point leaves the domain
    """
    if step <= 0:
        raise ParameterError(f"finite-difference step must be positive, got {step}")
    rng = np.random.default_rng(SAMPLING_CONFIG["seed"] if seed is None else seed)
    y = as_vector(y, sigma.domain_dim, "point")
    u = _unit(rng, sigma.domain_dim) if u is None else as_vector(u, sigma.domain_dim, "u")
    v = u if v is None else as_vector(v, sigma.domain_dim, "v")
    claimed = sigma.evaluator(y, u, v)[2]
    coarse = float(np.linalg.norm(_mixed_second(sigma, y, u, v, step) - claimed))
    fine = float(np.linalg.norm(_mixed_second(sigma, y, u, v, step / 2.0) - claimed))
    logger.debug(f"fd_convergence {sigma.name} at {y.tolist()}: {coarse:.3e} -> {fine:.3e}")
    return ConvergenceReport(coarse, fine, float(step))
