"""
Charts, atlases, curves and second-order tangent vectors (2-jets).

Charts never store the coordinate map itself. Every formula needs only the
transition maps sigma_ab = psi_a o psi_b^-1, which the atlas keeps as
``SmoothMap2`` objects keyed by ``(target, source)``.
"""
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import SAMPLING_CONFIG, TOLERANCE_CONFIG
from calculus.errors import (
    ChartMismatchError,
    DomainError,
    EmptyOverlapError,
    ShapeError,
    UnknownChartError,
)
from calculus.probes import linearity_defect, relative_gap
from calculus.records import CheckRecord, CheckReport
from calculus.smooth_map import SmoothMap2, as_vector, compose_map2, eval_map2, everywhere

logger = logging.getLogger(__name__)

ChartPair = Tuple[str, str]
ChartTriple = Tuple[str, str, str]


@dataclass(frozen=True)
class Chart:
    """A chart (U_a, psi_a), represented by its id and the open image psi_a(U_a)."""

    id: str
    dim: int
    contains: Callable[[np.ndarray], bool] = field(default=everywhere, repr=False)


@dataclass(frozen=True, eq=False)
class Atlas:
    """
    Charts of one manifold plus the declared transitions between them.

    Attributes:
        dim: Model space dimension
        charts: Chart id -> Chart
        transitions: ``(a, b)`` -> sigma_ab, defined on points in b-coordinates
        overlap_samples: ``(a, b)`` -> sample points in b-coordinates inside the overlap
        triple_samples: ``(a, b, c)`` -> sample points in c-coordinates inside the triple overlap
    """

    dim: int
    charts: Mapping[str, Chart]
    transitions: Mapping[ChartPair, SmoothMap2]
    overlap_samples: Mapping[ChartPair, Tuple[np.ndarray, ...]] = field(default_factory=dict)
    triple_samples: Mapping[ChartTriple, Tuple[np.ndarray, ...]] = field(default_factory=dict)

    def chart(self, chart_id: str) -> Chart:
        try:
            return self.charts[chart_id]
        except KeyError:
            message = f"unknown chart {chart_id!r}; atlas has {sorted(self.charts)}"
            logger.error(message)
            raise UnknownChartError(message) from None

    def pairs(self) -> List[ChartPair]:
        return list(self.transitions)


@dataclass(frozen=True, eq=False)
class Curve2:
    """
    A curve through a chart, known to order two at t = 0.

    ``path`` is a SmoothMap2 from the real line into chart coordinates, so
    c(0), c'(0) and c''(0) come out of one order-2 evaluation.
    """

    chart_id: str
    path: SmoothMap2
    contains: Callable[[np.ndarray], bool] = field(default=everywhere, repr=False)

    @classmethod
    def polynomial(cls, chart_id: str, y, u, w,
                   contains: Callable[[np.ndarray], bool] = everywhere) -> "Curve2":
        """The curve t -> y + t u + t^2/2 w."""
        y = as_vector(y, name="point")
        u = as_vector(u, y.shape[0], "u")
        w = as_vector(w, y.shape[0], "w")

        def fn(ts):
            t = ts[0]
            return [y[k] + t * u[k] + 0.5 * w[k] * t * t for k in range(y.shape[0])]

        return cls(chart_id, SmoothMap2.from_propagation(fn, 1, y.shape[0], name="quadratic-curve"), contains)

    @classmethod
    def from_propagation(cls, chart_id: str, fn: Callable, dim: int,
                         contains: Callable[[np.ndarray], bool] = everywhere) -> "Curve2":
        """Curve from ``fn(t) -> list of coordinates`` written with hyper-dual-aware functions."""
        return cls(chart_id, SmoothMap2.from_propagation(lambda ts: fn(ts[0]), 1, dim, name="curve"), contains)


@dataclass(frozen=True, eq=False)
class Jet2:
    """Second-order tangent vector in chart coordinates: basepoint, velocity, acceleration."""

    chart_id: str
    y: np.ndarray
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        y = as_vector(self.y, name="basepoint")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", as_vector(self.u, y.shape[0], "velocity"))
        object.__setattr__(self, "w", as_vector(self.w, y.shape[0], "acceleration"))

    @property
    def dim(self) -> int:
        return self.y.shape[0]

    def fiber_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.w])


def transition_map(atlas: Atlas, alpha: str, beta: str) -> SmoothMap2:
    """
    Return sigma_ab = psi_a o psi_b^-1.

    Raises:
        UnknownChartError: If either chart is not in the atlas
        EmptyOverlapError: If no transition is declared for the pair
    """
    atlas.chart(alpha)
    chart_b = atlas.chart(beta)
    declared = atlas.transitions.get((alpha, beta))
    if declared is not None:
        return declared
    if alpha == beta:
        return SmoothMap2.identity(atlas.dim, contains=chart_b.contains, chart_id=alpha)
    message = f"charts {alpha!r} and {beta!r} have no declared overlap"
    logger.error(message)
    raise EmptyOverlapError(message)


def curve_to_jet(curve: Curve2) -> Jet2:
    """
    Read off the 2-jet (c(0), c'(0), c''(0)) of a curve in its chart.

    Raises:
        DomainError: If c(0) lies outside the chart image
    """
    one = np.ones(1)
    c0, c1, c2 = eval_map2(curve.path, np.zeros(1), one, one)
    if not curve.contains(c0):
        message = f"curve basepoint {c0.tolist()} is outside chart {curve.chart_id!r}"
        logger.error(message)
        raise DomainError(message)
    return Jet2(curve.chart_id, c0, c1, c2)


def change_jet_chart(jet: Jet2, sigma: SmoothMap2, target: Optional[str] = None) -> Jet2:
    """
    Express a 2-jet in another chart:
    (y, u, w) -> (s(y), ds(y)u, d2s(y)(u,u) + ds(y)w).

    Args:
        jet: Jet in the source chart of ``sigma``
        sigma: Transition map from the jet's chart
        target: Chart id of the result; defaults to ``sigma.target``

    Raises:
        ChartMismatchError: If ``sigma`` is labelled with a different source chart
        DomainError: If the basepoint is outside the domain of ``sigma``
    """
    if sigma.source is not None and sigma.source != jet.chart_id:
        message = f"transition {sigma.name} starts in chart {sigma.source!r}, jet lives in {jet.chart_id!r}"
        logger.error(message)
        raise ChartMismatchError(message)
    target = target or sigma.target or jet.chart_id
    y, u, uu = eval_map2(sigma, jet.y, jet.u, jet.u)
    _, dw, _ = eval_map2(sigma, jet.y, jet.w, np.zeros(jet.dim))
    return Jet2(target, y, u, uu + dw)


def change_tangent_chart(y, u, sigma: SmoothMap2) -> Tuple[np.ndarray, np.ndarray]:
    """Tangent-bundle chart change (y, u) -> (s(y), ds(y)u)."""
    value, du, _ = eval_map2(sigma, y, u, np.zeros(sigma.domain_dim))
    return value, du


def jets_equal(a: Jet2, b: Jet2, tol: float = TOLERANCE_CONFIG["structural"],
               transition: Optional[SmoothMap2] = None) -> bool:
    """
    Decide whether two jets are the same second-order tangent vector.

    Jets in different charts are compared after moving ``a`` into ``b``'s
    chart with ``transition``.

    Raises:
        ChartMismatchError: If the charts differ and no transition is supplied
        ShapeError: If the jets have different dimensions
    """
    if a.chart_id != b.chart_id:
        if transition is None:
            message = f"jets live in charts {a.chart_id!r} and {b.chart_id!r}; supply a transition"
            logger.error(message)
            raise ChartMismatchError(message)
        a = change_jet_chart(a, transition, target=b.chart_id)
    return jet_gap(a, b) <= tol


def jet_gap(a: Jet2, b: Jet2) -> float:
    """Largest coordinate difference between two jets of the same chart."""
    if a.dim != b.dim:
        raise ShapeError(f"jets have dimensions {a.dim} and {b.dim}")
    return max(float(np.max(np.abs(p - q))) for p, q in ((a.y, b.y), (a.u, b.u), (a.w, b.w)))


def raw_fiber_nonlinearity(sigma: SmoothMap2, y, rng: np.random.Generator,
                           probes: int = SAMPLING_CONFIG["probes"]) -> float:
    """
    Linearity defect of the raw fiber map (u, w) -> (ds u, d2s(u,u) + ds w) at fixed y.

    Zero for affine transitions; strictly positive wherever d2s does not vanish.
    """
    n = sigma.domain_dim
    zero = np.zeros(n)

    def fiber_map(p):
        _, du, duu = eval_map2(sigma, y, p[:n], p[:n])
        _, dw, _ = eval_map2(sigma, y, p[n:], zero)
        return np.concatenate([du, duu + dw])

    return linearity_defect(fiber_map, 2 * n, rng, probes)


def atlas_sample_points(atlas: Atlas, chart_id: str) -> List[np.ndarray]:
    """All declared sample points that lie in ``chart_id``, expressed in its coordinates."""
    points: List[np.ndarray] = []
    seen = set()

    def keep(p):
        key = tuple(np.round(p, 12))
        if key not in seen:
            seen.add(key)
            points.append(as_vector(p, atlas.dim, "sample"))

    for (alpha, beta), samples in atlas.overlap_samples.items():
        for y in samples:
            if beta == chart_id:
                keep(y)
            elif alpha == chart_id:
                keep(transition_map(atlas, alpha, beta).value(y))
    for (_, _, gamma), samples in atlas.triple_samples.items():
        if gamma == chart_id:
            for y in samples:
                keep(y)
    return points


def _order2_gap(a: SmoothMap2, b: SmoothMap2, y, u, v) -> float:
    left = eval_map2(a, y, u, v)
    right = eval_map2(b, y, u, v)
    return max(relative_gap(p, q) for p, q in zip(left, right))


def atlas_check(atlas: Atlas, rng: np.random.Generator,
                tol: float = TOLERANCE_CONFIG["structural"]) -> CheckReport:
    """
    Check the atlas invariants at the declared sample points.

    Records ``atlas.identity`` (s_aa = id), ``atlas.inverse`` (s_ab o s_ba = id)
    and ``atlas.triple`` (s_ab o s_bc = s_ac), each to order two along random
    directions, plus ``atlas.tangent_cocycle`` for the first-order part.
    """
    report = CheckReport()
    dim = atlas.dim
    for chart_id in sorted(atlas.charts):
        sigma = transition_map(atlas, chart_id, chart_id)
        identity = SmoothMap2.identity(dim)
        for y in atlas_sample_points(atlas, chart_id):
            u, v = rng.normal(size=dim), rng.normal(size=dim)
            report.add(CheckRecord.below("atlas.identity", f"{chart_id} @ {_fmt(y)}",
                                         _order2_gap(sigma, identity, y, u, v), tol))

    for (alpha, beta), samples in atlas.overlap_samples.items():
        if (beta, alpha) not in atlas.transitions:
            continue
        roundtrip = compose_map2(transition_map(atlas, beta, alpha), transition_map(atlas, alpha, beta))
        for y in samples:
            u, v = rng.normal(size=dim), rng.normal(size=dim)
            report.add(CheckRecord.below("atlas.inverse", f"{beta}->{alpha}->{beta} @ {_fmt(y)}",
                                         _order2_gap(roundtrip, SmoothMap2.identity(dim), y, u, v), tol))

    for (alpha, beta, gamma), samples in atlas.triple_samples.items():
        two_step = compose_map2(transition_map(atlas, alpha, beta), transition_map(atlas, beta, gamma))
        direct = transition_map(atlas, alpha, gamma)
        for y in samples:
            u, v = rng.normal(size=dim), rng.normal(size=dim)
            location = f"{alpha}<-{beta}<-{gamma} @ {_fmt(y)}"
            report.add(CheckRecord.below("atlas.triple", location, _order2_gap(two_step, direct, y, u, v), tol))
            jac_two = transition_map(atlas, alpha, beta).jacobian(transition_map(atlas, beta, gamma).value(y)) \
                @ transition_map(atlas, beta, gamma).jacobian(y)
            report.add(CheckRecord.below("atlas.tangent_cocycle", location,
                                         relative_gap(jac_two, direct.jacobian(y)), tol))
    return report


def _fmt(y: Sequence[float]) -> str:
    return "(" + ", ".join(f"{float(c):.6g}" for c in y) + ")"


def format_point(y: Sequence[float]) -> str:
    """Stable short text form of a point for report locations."""
    return _fmt(y)
