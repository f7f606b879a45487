"""
Vector-bundle structure of T2M induced by a linear connection, and its converse.

A Christoffel field Gamma_a turns the jet coordinates (y, u, w) of chart a into
fiber coordinates (y, u, v) with v = w + Gamma_a(y)(u)(u). When the fields of
two charts satisfy the compatibility condition, the change of fiber
coordinates is the linear map (u, v) -> (ds u, ds v), so T2M carries the same
cocycle as TM x TM.
"""
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import SAMPLING_CONFIG, TOLERANCE_CONFIG
from calculus.errors import (
    ChartMismatchError,
    DomainError,
    ExtractionError,
    IncompatibilityError,
    ShapeError,
)
from calculus.probes import relative_gap
from calculus.records import CheckRecord, CheckReport
from calculus.smooth_map import SmoothMap2, as_vector
from geometry.atlas import (
    Atlas,
    Curve2,
    Jet2,
    atlas_sample_points,
    change_jet_chart,
    change_tangent_chart,
    curve_to_jet,
    format_point,
    transition_map,
)
from geometry.connection import ChristoffelField, compat_residual

logger = logging.getLogger(__name__)

FiberMap = Callable[[Jet2], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class Trivialization:
    """
    Fiber chart Phi_a of T2M over one chart, built from a Christoffel field.

    ``fiber_mix`` is an optional constant invertible 2n x 2n matrix applied to
    (u, v) after the connection step. It stays ``None`` for the trivializations
    a connection induces; a non-block matrix gives a trivialization that is not
    a product of two TM trivializations.
    """

    chart_id: str
    christoffel: ChristoffelField
    fiber_mix: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.christoffel.chart_id != self.chart_id:
            raise ChartMismatchError(
                f"trivialization of chart {self.chart_id!r} got a field of chart {self.christoffel.chart_id!r}"
            )
        if self.fiber_mix is not None:
            mix = np.array(self.fiber_mix, dtype=float)
            if mix.shape != (2 * self.dim, 2 * self.dim):
                raise ShapeError(f"fiber mix must be {2 * self.dim}x{2 * self.dim}, got {mix.shape}")
            mix.setflags(write=False)
            object.__setattr__(self, "fiber_mix", mix)

    @property
    def dim(self) -> int:
        return self.christoffel.dim

    def contains(self, y) -> bool:
        return bool(self.christoffel.contains(as_vector(y, self.dim, "point")))


@dataclass(frozen=True, eq=False)
class FiberPoint:
    """Trivialized coordinates (y, u, v) of a second-order tangent vector."""

    chart_id: str
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        y = as_vector(self.y, name="basepoint")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", as_vector(self.u, y.shape[0], "u"))
        object.__setattr__(self, "v", as_vector(self.v, y.shape[0], "v"))

    @property
    def dim(self) -> int:
        return self.y.shape[0]

    def fiber_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    @classmethod
    def from_fiber_vector(cls, chart_id: str, y, vector) -> "FiberPoint":
        y = as_vector(y, name="basepoint")
        n = y.shape[0]
        vector = as_vector(vector, 2 * n, "fiber vector")
        return cls(chart_id, y, vector[:n], vector[n:])


@dataclass(frozen=True, eq=False)
class TransitionOperator:
    """
    Change of fiber coordinates T_ab(y) from chart b to chart a at one base point.

    Attributes:
        source: Chart b
        target: Chart a
        y: Base point in b-coordinates
        matrix: Phi_a o Phi_b^-1 evaluated on the basis of E x E
        block: The product formula ds(y) x ds(y)
        discrepancy: Largest entry of ``matrix - block``
    """

    source: str
    target: str
    y: np.ndarray
    matrix: np.ndarray
    block: np.ndarray
    discrepancy: float

    @property
    def dim(self) -> int:
        return self.y.shape[0]

    def apply(self, vector) -> np.ndarray:
        return self.matrix @ as_vector(vector, 2 * self.dim, "fiber vector")

    def blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """The four n x n blocks (uu, uv, vu, vv) of ``matrix``."""
        n = self.dim
        m = self.matrix
        return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]


def trivialize(triv: Trivialization, jet: Jet2) -> FiberPoint:
    """
    Phi_a: (y, u, w) -> (y, u, w + Gamma(y)(u)(u)).

    Raises:
        ChartMismatchError: If the jet is expressed in another chart
        DomainError: If the basepoint is outside the trivialization's chart
    """
    if jet.chart_id != triv.chart_id:
        message = f"jet lives in chart {jet.chart_id!r}, trivialization in {triv.chart_id!r}"
        logger.error(message)
        raise ChartMismatchError(message)
    v = jet.w + triv.christoffel(jet.y, jet.u, jet.u)
    if triv.fiber_mix is None:
        return FiberPoint(triv.chart_id, jet.y, jet.u, v)
    return FiberPoint.from_fiber_vector(triv.chart_id, jet.y, triv.fiber_mix @ np.concatenate([jet.u, v]))


def inverse_curve(triv: Trivialization, point: FiberPoint) -> Curve2:
    """
    A curve whose 2-jet trivializes to ``point``:
    t -> y + t u + t^2/2 (v - Gamma(y)(u)(u)).

    Raises:
        DomainError: If the basepoint is outside the trivialization's chart
    """
    if point.chart_id != triv.chart_id:
        message = f"fiber point lives in chart {point.chart_id!r}, trivialization in {triv.chart_id!r}"
        logger.error(message)
        raise ChartMismatchError(message)
    if not triv.contains(point.y):
        message = f"point {point.y.tolist()} is outside chart {triv.chart_id!r}"
        logger.error(message)
        raise DomainError(message)
    u, v = point.u, point.v
    if triv.fiber_mix is not None:
        raw = np.linalg.solve(triv.fiber_mix, point.fiber_vector())
        u, v = raw[:point.dim], raw[point.dim:]
    w = v - triv.christoffel(point.y, u, u)
    return Curve2.polynomial(triv.chart_id, point.y, u, w, contains=triv.christoffel.contains)


def untrivialize(triv: Trivialization, point: FiberPoint) -> Jet2:
    """Phi_a^-1, read off the inverse curve."""
    return curve_to_jet(inverse_curve(triv, point))


def change_fiber_chart(triv_a: Trivialization, triv_b: Trivialization,
                       sigma: SmoothMap2, point: FiberPoint) -> FiberPoint:
    """Phi_a o Phi_b^-1 evaluated pointwise, without assuming it is linear."""
    jet = untrivialize(triv_b, point)
    return trivialize(triv_a, change_jet_chart(jet, sigma, target=triv_a.chart_id))


def compatibility_defect(triv_a: Trivialization, triv_b: Trivialization,
                         sigma: SmoothMap2, y) -> float:
    """
    Worst compatibility residual over basis pairs at ``y``, relative to 1 + |Gamma|.
    """
    y = as_vector(y, triv_b.dim, "point")
    basis = np.eye(triv_b.dim)
    worst = max(
        float(np.linalg.norm(compat_residual(triv_a.christoffel, triv_b.christoffel, sigma, y, e_i, e_j)))
        for e_i in basis for e_j in basis
    )
    scale = 1.0 + max(triv_b.christoffel.norm(y), triv_a.christoffel.norm(sigma.value(y)))
    return worst / scale


def transition_function(triv_a: Trivialization, triv_b: Trivialization, sigma: SmoothMap2, y,
                        tol: float = TOLERANCE_CONFIG["structural"],
                        check_compat: bool = True) -> TransitionOperator:
    """
    Fiber transition T_ab(y), computed from the trivializations and from ds(y).

    Args:
        triv_a: Trivialization of the target chart
        triv_b: Trivialization of the source chart
        sigma: Transition sigma_ab
        y: Base point in b-coordinates
        tol: Allowed relative compatibility residual
        check_compat: Refuse incompatible Christoffel fields

    Raises:
        IncompatibilityError: If the fields violate the compatibility condition at ``y``
        DomainError: If ``y`` is outside the overlap
    """
    y = as_vector(y, triv_b.dim, "point")
    n = triv_b.dim
    if check_compat:
        defect = compatibility_defect(triv_a, triv_b, sigma, y)
        if defect > tol:
            message = (f"Christoffel fields of {triv_a.chart_id!r} and {triv_b.chart_id!r} are incompatible "
                       f"at {format_point(y)}: residual {defect:.3e}")
            logger.error(message)
            raise IncompatibilityError(message, defect, y, (triv_a.chart_id, triv_b.chart_id))

    columns = [change_fiber_chart(triv_a, triv_b, sigma, FiberPoint.from_fiber_vector(triv_b.chart_id, y, e))
               .fiber_vector() for e in np.eye(2 * n)]
    matrix = np.column_stack(columns)
    jac = sigma.jacobian(y)
    block = np.block([[jac, np.zeros((n, n))], [np.zeros((n, n)), jac]])
    discrepancy = float(np.max(np.abs(matrix - block)))
    return TransitionOperator(triv_b.chart_id, triv_a.chart_id, y, matrix, block, discrepancy)


def _operator_gap(a: np.ndarray, b: np.ndarray) -> float:
    # largest column norm: an operator-norm estimate from the basis
    return float(np.max(np.linalg.norm(a - b, axis=0)))


def cocycle_residual(trivs: Mapping[str, Trivialization], atlas: Atlas,
                     charts: Tuple[str, str, str], y) -> float:
    """
    Estimate |T_ac(y) - T_ab(s_bc(y)) T_bc(y)| on the basis of E x E.

    ``y`` is in c-coordinates. Transition matrices are taken from the
    trivializations directly, so incompatible fields show up as a cocycle
    defect instead of an error.

    Raises:
        EmptyOverlapError: If one of the three transitions is not declared
        DomainError: If ``y`` is outside the triple overlap
    """
    alpha, beta, gamma = charts
    y = as_vector(y, atlas.dim, "point")
    s_bc = transition_map(atlas, beta, gamma)
    s_ab = transition_map(atlas, alpha, beta)
    s_ac = transition_map(atlas, alpha, gamma)
    t_bc = transition_function(trivs[beta], trivs[gamma], s_bc, y, check_compat=False)
    t_ab = transition_function(trivs[alpha], trivs[beta], s_ab, s_bc.value(y), check_compat=False)
    t_ac = transition_function(trivs[alpha], trivs[gamma], s_ac, y, check_compat=False)
    return _operator_gap(t_ac.matrix, t_ab.matrix @ t_bc.matrix)


def fiber_chart_gap(triv_a: Trivialization, triv_b: Trivialization, sigma: SmoothMap2,
                    jet: Jet2, operator: Optional[TransitionOperator] = None) -> float:
    """
    Gap between T_ab(y) Phi_b(jet) and Phi_a(jet moved to chart a).

    Zero exactly when trivializing commutes with the change of chart.
    """
    operator = operator or transition_function(triv_a, triv_b, sigma, jet.y, check_compat=False)
    moved = operator.apply(trivialize(triv_b, jet).fiber_vector())
    direct = trivialize(triv_a, change_jet_chart(jet, sigma, target=triv_a.chart_id)).fiber_vector()
    return relative_gap(moved, direct)


def tm_tm_isomorphism_check(trivs: Mapping[str, Trivialization], atlas: Atlas,
                            samples: Optional[Mapping[Tuple[str, str], Sequence]] = None,
                            tol: float = TOLERANCE_CONFIG["structural"]) -> CheckReport:
    """
    Check that every fiber transition is ds(y) x ds(y) at the sample points.

    For every overlap (a, b) and sample y this records the compatibility of the
    Christoffel fields and the gap between the transition computed from the
    trivializations and from ds(y), then that it is block diagonal with two
    equal blocks matching the TM transition.
    """
    report = CheckReport()
    samples = samples if samples is not None else atlas.overlap_samples
    for (alpha, beta), points in samples.items():
        if alpha not in trivs or beta not in trivs:
            continue
        sigma = transition_map(atlas, alpha, beta)
        for y in points:
            location = f"{beta}->{alpha} @ {format_point(y)}"
            defect = compatibility_defect(trivs[alpha], trivs[beta], sigma, y)
            report.add(CheckRecord.below("bundle.christoffel-compatibility", location, defect, tol,
                                         "" if defect <= tol else "compatibility condition violated"))
            op = transition_function(trivs[alpha], trivs[beta], sigma, y, check_compat=False)
            uu, uv, vu, vv = op.blocks()
            n = op.dim
            tangent = np.column_stack([change_tangent_chart(y, e, sigma)[1] for e in np.eye(n)])
            off_diagonal = max(float(np.max(np.abs(uv))), float(np.max(np.abs(vu))))
            report.add(CheckRecord.below("bundle.transition-two-ways", location, op.discrepancy, tol))
            report.add(CheckRecord.below("bundle.block-diagonal", location, off_diagonal, tol))
            report.add(CheckRecord.below("bundle.equal-blocks", location, float(np.max(np.abs(uu - vv))), tol))
            report.add(CheckRecord.below("bundle.tm-transition", location,
                                         float(np.max(np.abs(uu - tangent))), tol))
    logger.info(f"TM x TM check: {len(report.records)} records, {len(report.violations)} violations")
    return report


def trivialization_fiber_map(triv: Trivialization) -> FiberMap:
    """Adapt a Trivialization to the ``jet -> (Phi1, Phi2)`` form used by extraction."""

    def fiber_map(jet: Jet2):
        point = trivialize(triv, jet)
        return point.u, point.v

    return fiber_map


def _validate_fiber_map(fiber_map: FiberMap, chart_id: str, y: np.ndarray,
                        rng: np.random.Generator, tol: float) -> None:
    n = y.shape[0]
    u, u2, w = rng.normal(size=n), rng.normal(size=n), rng.normal(size=n)
    zero = np.zeros(n)

    def second(uu, ww):
        return np.asarray(fiber_map(Jet2(chart_id, y, uu, ww))[1], dtype=float)

    first = np.asarray(fiber_map(Jet2(chart_id, y, u, w))[0], dtype=float)
    if relative_gap(first, u) > tol:
        message = f"first fiber component is not the velocity at {format_point(y)} in chart {chart_id!r}"
        logger.error(message)
        raise ExtractionError(message)
    if relative_gap(second(u, w) - w, second(u, zero)) > tol:
        message = f"second fiber component is not affine in the acceleration at {format_point(y)}"
        logger.error(message)
        raise ExtractionError(message)
    q_sum = second(u + u2, zero) + second(u - u2, zero)
    if relative_gap(q_sum, 2.0 * second(u, zero) + 2.0 * second(u2, zero)) > tol \
            or relative_gap(second(2.0 * u, zero), 4.0 * second(u, zero)) > tol:
        message = f"fiber map of chart {chart_id!r} is not linear on fibers at {format_point(y)}"
        logger.error(message)
        raise ExtractionError(message)


def extract_christoffel(fiber_maps: Mapping[str, FiberMap], chart_id: str, dim: int,
                        atlas: Optional[Atlas] = None, points: Optional[Iterable] = None,
                        rng: Optional[np.random.Generator] = None,
                        contains: Optional[Callable[[np.ndarray], bool]] = None,
                        tol: float = TOLERANCE_CONFIG["structural"]) -> ChristoffelField:
    """
    Recover Christoffel symbols from a trivialization split as Phi1 x Phi2.

    On the diagonal Gamma(y)(u)(u) = Phi2(jet(y, u, 0)); off the diagonal the
    symmetric bilinear extension is used, so only the symmetric part of the
    original field is recovered.

    Args:
        fiber_maps: Chart id -> ``jet -> (Phi1, Phi2)`` in an adapted chart
        chart_id: Chart to extract
        dim: Model space dimension
        atlas: Supplies validation points when ``points`` is not given
        points: Validation points in chart coordinates
        rng: Random directions for validation
        contains: Domain of the result; defaults to the atlas chart's domain

    Raises:
        ExtractionError: If the supplied map is not of the form (u, w + q(u))
            with q quadratic at a validation point
    """
    try:
        fiber_map = fiber_maps[chart_id]
    except KeyError:
        message = f"no fiber map supplied for chart {chart_id!r}"
        logger.error(message)
        raise ExtractionError(message) from None
    rng = rng if rng is not None else np.random.default_rng(SAMPLING_CONFIG["seed"])
    if points is None and atlas is not None:
        points = atlas_sample_points(atlas, chart_id)
    checked = 0
    for y in points or ():
        _validate_fiber_map(fiber_map, chart_id, as_vector(y, dim, "point"), rng, tol)
        checked += 1
    if checked == 0:
        logger.warning(f"Extracting chart {chart_id} without validation points")
    if contains is None:
        contains = atlas.chart(chart_id).contains if atlas is not None else (lambda y: True)

    zero = np.zeros(dim)

    def quadratic(y, u):
        return np.asarray(fiber_map(Jet2(chart_id, y, u, zero))[1], dtype=float)

    def action(y, u, v):
        return 0.5 * (quadratic(y, u + v) - quadratic(y, u) - quadratic(y, v))

    logger.debug(f"Extracted Christoffel field for chart {chart_id} ({checked} validation points)")
    return ChristoffelField(chart_id, dim, action, contains)


def trivializations(fields: Mapping[str, ChristoffelField]) -> Dict[str, Trivialization]:
    """One connection-induced trivialization per chart."""
    return {chart_id: Trivialization(chart_id, gamma) for chart_id, gamma in fields.items()}
