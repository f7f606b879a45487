"""
Verification suites run by the CLI.

Each suite takes a built fixture, a seeded generator and the effective
tolerances, and returns a CheckReport. A GeometryError raised inside one
check group becomes a failing record for that group instead of aborting the
run.
"""
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np
from tqdm import tqdm

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import FD_CONFIG, SAMPLING_CONFIG, TOLERANCE_CONFIG, VERIFY_CONFIG
from calculus.errors import FixtureError, GeometryError, ParameterError
from calculus.fd_check import fd_check, fd_convergence
from calculus.probes import bilinearity_defect, linearity_defect, relative_gap
from calculus.records import CheckRecord, CheckReport
from calculus.smooth_map import SmoothMap2, compose_map2, eval_map2, random_polynomial_map
from geometry.atlas import (
    Curve2,
    Jet2,
    atlas_check,
    atlas_sample_points,
    change_jet_chart,
    curve_to_jet,
    format_point,
    jet_gap,
    raw_fiber_nonlinearity,
    transition_map,
)
from geometry.connection import (
    christoffel_from_metric,
    compat_residual,
    metric_to_christoffel,
    pushforward_christoffel,
    vilms_local,
)
from geometry.prolim import (
    check_tower,
    diagonal_tower_map,
    extract_tower_christoffel,
    identity_tower_map,
    limit_connection_check,
    limit_projection,
    limit_square_residual,
    pushforward_tower_christoffel,
    random_level_jet,
    random_triangular_tower_map,
    reconstruct_limit_jet,
    restrict_tower_map,
    shear_transitions,
    tower_group_op,
    tower_map_from_top,
    tower_membership,
    tower_transition,
    tower_trivializations,
)
from geometry.t2bundle import (
    FiberPoint,
    Trivialization,
    change_fiber_chart,
    cocycle_residual,
    compatibility_defect,
    extract_christoffel,
    fiber_chart_gap,
    tm_tm_isomorphism_check,
    transition_function,
    trivialization_fiber_map,
    trivializations,
    trivialize,
    untrivialize,
)
from verifier.fixtures import FixtureSpec, load_fixture

logger = logging.getLogger(__name__)

# second differentials below this norm count as an affine overlap
AFFINE_THRESHOLD = 1e-8


@dataclass
class SuiteReport:
    """Outcome of one CLI run: the fixture, the suite, the seed and every check record."""

    fixture: str
    suite: str
    seed: int
    tolerances: Dict[str, float]
    report: CheckReport = field(default_factory=CheckReport)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_dict(self, include_wall_time: bool = True) -> Dict:
        body = {
            "fixture": self.fixture,
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "tolerances": dict(sorted(self.tolerances.items())),
            "checks": len(self.report.records),
            "violations": len(self.report.violations),
            "records": [r.to_dict() for r in self.report.sorted_records()],
        }
        if include_wall_time:
            body["wall_time"] = round(self.wall_time, 3)
        return body


def _guarded(report: CheckReport, check_id: str, location: str, group: Callable[[], None]) -> None:
    """Run a check group; turn a GeometryError into one failing record."""
    try:
        group()
    except GeometryError as e:
        logger.warning(f"{check_id} at {location} raised {type(e).__name__}: {e}")
        report.add(CheckRecord(check_id, location, float("inf"), 0.0, False, f"{type(e).__name__}: {e}"))


def _scaled_gap(a, b, scale: float) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / scale


def _corrupt_second_action(sigma: SmoothMap2) -> SmoothMap2:
    """Same map with +1 added to the first slot of the claimed second action."""

    def evaluator(y, u, v):
        value, du, d2 = sigma.evaluator(y, u, v)
        d2 = np.array(d2, dtype=float)
        d2[0] += 1.0
        return value, du, d2

    return SmoothMap2(sigma.domain_dim, sigma.codomain_dim, evaluator, sigma.contains, f"{sigma.name}+fault")


def calculus_suite(fixture: FixtureSpec, rng: np.random.Generator, tol: Mapping[str, float]) -> CheckReport:
    """Chain rule on random polynomial pairs and finite-difference checks of every transition."""
    report = CheckReport()
    for p in range(SAMPLING_CONFIG["polynomial_pairs"]):
        n, m, k = (int(d) for d in rng.integers(2, 5, size=3))
        location = f"pair {p:02d} ({n}->{m}->{k})"

        def group(n=n, m=m, k=k, location=location):
            inner = random_polynomial_map(n, m, rng)
            outer = random_polynomial_map(m, k, rng)
            composite = compose_map2(outer, inner)
            direct = SmoothMap2.from_propagation(lambda xs: outer.propagator(list(inner.propagator(xs))), n, k)
            y, u, v = (rng.normal(scale=0.5, size=n) for _ in range(3))
            gap = max(relative_gap(a, b) for a, b in zip(eval_map2(composite, y, u, v), eval_map2(direct, y, u, v)))
            report.add(CheckRecord.below("calculus.chain-rule", location, gap, tol["structural"]))
            fd_seed = int(rng.integers(2 ** 31))
            fd = fd_check(composite, y, seed=fd_seed)
            report.add(CheckRecord.below("calculus.fd-first", location, fd.max_rel_error_first, tol["fd"]))
            report.add(CheckRecord.below("calculus.fd-second", location, fd.max_rel_error_second, tol["fd"]))
            corrupted = fd_check(_corrupt_second_action(composite), y, seed=fd_seed)
            report.add(CheckRecord.above("calculus.fd-detects-corruption", location,
                                         corrupted.max_rel_error_second, tol["fault"],
                                         "second action shifted by 1 in one slot"))

        _guarded(report, "calculus.chain-rule", location, group)

    if fixture.atlas is not None:
        for (alpha, beta), samples in sorted(fixture.atlas.overlap_samples.items()):
            sigma = transition_map(fixture.atlas, alpha, beta)
            for y in samples:
                location = f"{beta}->{alpha} @ {format_point(y)}"

                def group(sigma=sigma, y=y, location=location):
                    seed = int(rng.integers(2 ** 31))
                    fd = fd_check(sigma, y, seed=seed)
                    report.add(CheckRecord.below("calculus.fd-transition-first", location,
                                                 fd.max_rel_error_first, tol["fd"]))
                    report.add(CheckRecord.below("calculus.fd-transition-second", location,
                                                 fd.max_rel_error_second, tol["fd"]))
                    halving = fd_convergence(sigma, y, seed=seed)
                    # stencils exact up to rounding say nothing about the order
                    if halving.error_coarse > FD_CONFIG["convergence_floor"]:
                        report.add(CheckRecord.below("calculus.fd-convergence", location,
                                                     abs(halving.ratio / 4.0 - 1.0), FD_CONFIG["convergence_band"],
                                                     f"halving ratio {halving.ratio:.3f}"))

                _guarded(report, "calculus.fd-transition", location, group)
    return report


def atlas_suite(fixture: FixtureSpec, rng: np.random.Generator, tol: Mapping[str, float]) -> CheckReport:
    """Atlas invariants plus the behaviour of 2-jets under chart changes."""
    atlas = fixture.atlas
    n = atlas.dim
    report = CheckReport()
    _guarded(report, "atlas.invariants", fixture.name,
             lambda: report.extend(atlas_check(atlas, rng, tol["structural"]).records))

    for (alpha, beta), samples in sorted(atlas.overlap_samples.items()):
        sigma = transition_map(atlas, alpha, beta)
        back = atlas.transitions.get((beta, alpha))
        for y in samples:
            location = f"{beta}->{alpha} @ {format_point(y)}"

            def group(sigma=sigma, back=back, y=y, location=location):
                jet = Jet2(beta, y, rng.normal(size=n), rng.normal(size=n))
                moved = change_jet_chart(jet, sigma)
                if back is not None:
                    report.add(CheckRecord.below("atlas.jet-roundtrip", location,
                                                 jet_gap(change_jet_chart(moved, back), jet), tol["structural"]))
                # a cubic term does not change the 2-jet of a curve
                cubic = rng.normal(size=n)
                bent = Curve2.from_propagation(
                    beta,
                    lambda t: [y[k] + t * jet.u[k] + 0.5 * jet.w[k] * t * t + cubic[k] * t ** 3 for k in range(n)],
                    n, contains=atlas.chart(beta).contains)
                report.add(CheckRecord.below("atlas.jet-equivalence", location,
                                             jet_gap(change_jet_chart(curve_to_jet(bent), sigma), moved),
                                             tol["structural"]))

            _guarded(report, "atlas.jet-roundtrip", location, group)

    for (alpha, beta, gamma), samples in sorted(atlas.triple_samples.items()):
        for y in samples:
            location = f"{alpha}<-{beta}<-{gamma} @ {format_point(y)}"

            def group(y=y, location=location, alpha=alpha, beta=beta, gamma=gamma):
                jet = Jet2(gamma, y, rng.normal(size=n), rng.normal(size=n))
                stepped = change_jet_chart(change_jet_chart(jet, transition_map(atlas, beta, gamma)),
                                           transition_map(atlas, alpha, beta))
                direct = change_jet_chart(jet, transition_map(atlas, alpha, gamma))
                report.add(CheckRecord.below("atlas.jet-cocycle", location, jet_gap(stepped, direct),
                                             tol["structural"]))

            _guarded(report, "atlas.jet-cocycle", location, group)
    return report


def connection_suite(fixture: FixtureSpec, rng: np.random.Generator, tol: Mapping[str, float]) -> CheckReport:
    """Bilinearity, the local connection map, compatibility, oracles and metric cross-checks."""
    atlas = fixture.atlas
    fields = fixture.christoffels
    n = atlas.dim
    zero = np.zeros(n)
    report = CheckReport()

    for chart_id, gamma in sorted(fields.items()):
        for y in atlas_sample_points(atlas, chart_id):
            location = f"{chart_id} @ {format_point(y)}"

            def group(gamma=gamma, y=y, location=location, chart_id=chart_id):
                report.add(CheckRecord.below("connection.bilinearity", location,
                                             bilinearity_defect(lambda u, v: gamma(y, u, v), n, rng,
                                                                SAMPLING_CONFIG["probes"]),
                                             tol["group"]))
                u, w = rng.normal(size=n), rng.normal(size=n)
                report.add(CheckRecord.below("connection.local-map-affine", location,
                                             relative_gap(vilms_local(gamma, y, u, zero, w)[1], w), tol["group"]))
                report.add(CheckRecord.below("connection.local-map-linear", location,
                                             linearity_defect(lambda v: vilms_local(gamma, y, u, v, zero)[1], n, rng,
                                                              SAMPLING_CONFIG["probes"]),
                                             tol["group"]))
                direction = rng.normal(size=n)
                coarse = gamma.derivative(y, direction, step=1e-4)
                fine = gamma.derivative(y, direction, step=5e-5)
                report.add(CheckRecord.below("connection.smoothness", location, relative_gap(coarse, fine),
                                             tol["fd"]))
                if chart_id in fixture.oracles:
                    u, v = rng.normal(size=n), rng.normal(size=n)
                    report.add(CheckRecord.below("connection.oracle", location,
                                                 relative_gap(gamma(y, u, v), fixture.oracles[chart_id](y, u, v)),
                                                 tol["structural"]))
                if chart_id in fixture.metrics:
                    report.add(CheckRecord.below("connection.metric-levi-civita", location,
                                                 relative_gap(metric_to_christoffel(fixture.metrics[chart_id], y),
                                                              gamma.tensor(y)),
                                                 tol["fd_metric"]))

            _guarded(report, "connection.chart", location, group)

    metric_fields = {c: _metric_field(fixture, c) for c in sorted(fixture.metrics)}
    for (alpha, beta), samples in sorted(atlas.overlap_samples.items()):
        if not samples:
            continue
        sigma = transition_map(atlas, alpha, beta)
        for s in range(SAMPLING_CONFIG["triples_per_overlap"]):
            y = samples[s % len(samples)]
            location = f"{beta}->{alpha} @ {format_point(y)} #{s:02d}"

            def group(y=y, sigma=sigma, location=location, alpha=alpha, beta=beta):
                u, v = rng.normal(size=n), rng.normal(size=n)
                size = max(1.0, float(np.linalg.norm(u) * np.linalg.norm(v)))
                if alpha in fields and beta in fields:
                    scale = size * (1.0 + max(fields[beta].norm(y), fields[alpha].norm(sigma.value(y))))
                    residual = compat_residual(fields[alpha], fields[beta], sigma, y, u, v)
                    report.add(CheckRecord.below("connection.compatibility", location,
                                                 _scaled_gap(residual, zero, scale), tol["structural"]))
                if alpha in metric_fields and beta in metric_fields:
                    residual = compat_residual(metric_fields[alpha], metric_fields[beta], sigma, y, u, v)
                    scale = size * (1.0 + metric_fields[beta].norm(y))
                    report.add(CheckRecord.below("connection.metric-compatibility", location,
                                                 _scaled_gap(residual, zero, scale), tol["fd_metric"]))

            _guarded(report, "connection.compatibility", location, group)

    for chart_id, origin in sorted(fixture.pushforwards.items()):
        for y in atlas_sample_points(atlas, origin):
            location = f"{origin}->{chart_id}->{origin} @ {format_point(y)}"

            def group(chart_id=chart_id, origin=origin, y=y, location=location):
                back = pushforward_christoffel(fields[chart_id], atlas.transitions[(origin, chart_id)],
                                               atlas.transitions[(chart_id, origin)], chart_id=origin)
                if not back.contains(y):
                    return
                u, v = rng.normal(size=n), rng.normal(size=n)
                report.add(CheckRecord.below("connection.pushforward-roundtrip", location,
                                             relative_gap(back(y, u, v), fields[origin](y, u, v)),
                                             tol["structural"]))

            _guarded(report, "connection.pushforward-roundtrip", location, group)
    return report


def _metric_field(fixture: FixtureSpec, chart_id: str):
    return christoffel_from_metric(chart_id, fixture.metrics[chart_id], fixture.atlas.dim,
                                   fixture.atlas.chart(chart_id).contains)


def bundle_suite(fixture: FixtureSpec, rng: np.random.Generator, tol: Mapping[str, float]) -> CheckReport:
    """Trivializations, transition functions, cocycles, the TM x TM product and extraction."""
    atlas = fixture.atlas
    n = atlas.dim
    trivs = trivializations(fixture.christoffels)
    report = CheckReport()

    for chart_id, triv in sorted(trivs.items()):
        points = atlas_sample_points(atlas, chart_id)
        if not points:
            continue

        def group(chart_id=chart_id, triv=triv, points=points):
            worst = 0.0
            for k in range(SAMPLING_CONFIG["jets_per_chart"]):
                y = points[k % len(points)]
                jet = Jet2(chart_id, y, rng.normal(size=n), rng.normal(size=n))
                worst = max(worst, jet_gap(untrivialize(triv, trivialize(triv, jet)), jet))
                point = FiberPoint(chart_id, y, rng.normal(size=n), rng.normal(size=n))
                back = trivialize(triv, untrivialize(triv, point))
                worst = max(worst, relative_gap(back.fiber_vector(), point.fiber_vector()))
            report.add(CheckRecord.below("bundle.roundtrip", chart_id, worst, tol["structural"]))

        _guarded(report, "bundle.roundtrip", chart_id, group)

    _guarded(report, "bundle.christoffel-compatibility", fixture.name,
             lambda: report.extend(tm_tm_isomorphism_check(trivs, atlas, tol=tol["structural"]).records))

    for (alpha, beta), samples in sorted(atlas.overlap_samples.items()):
        if alpha not in trivs or beta not in trivs:
            continue
        sigma = transition_map(atlas, alpha, beta)
        back = atlas.transitions.get((beta, alpha))
        for y in samples:
            location = f"{beta}->{alpha} @ {format_point(y)}"

            def group(y=y, sigma=sigma, back=back, location=location, alpha=alpha, beta=beta):
                triv_a, triv_b = trivs[alpha], trivs[beta]
                op = transition_function(triv_a, triv_b, sigma, y, check_compat=False)
                fiber_map = lambda p: change_fiber_chart(  # noqa: E731
                    triv_a, triv_b, sigma, FiberPoint.from_fiber_vector(beta, y, p)).fiber_vector()
                report.add(CheckRecord.below("bundle.fiber-linearity", location,
                                             linearity_defect(fiber_map, 2 * n, rng, SAMPLING_CONFIG["probes"]),
                                             tol["structural"]))
                jet = Jet2(beta, y, rng.normal(size=n), rng.normal(size=n))
                report.add(CheckRecord.below("bundle.well-defined", location,
                                             fiber_chart_gap(triv_a, triv_b, sigma, jet, op), tol["structural"]))
                if back is not None:
                    op_back = transition_function(triv_b, triv_a, back, sigma.value(y), check_compat=False)
                    report.add(CheckRecord.below("bundle.transition-inverse", location,
                                                 float(np.max(np.abs(op_back.matrix @ op.matrix - np.eye(2 * n)))),
                                                 tol["structural"]))
                probe = rng.normal(size=n)
                if np.linalg.norm(eval_map2(sigma, y, probe, probe)[2]) > AFFINE_THRESHOLD:
                    report.add(CheckRecord.above("bundle.raw-chart-change-nonlinear", location,
                                                 raw_fiber_nonlinearity(sigma, y, rng), tol["witness"],
                                                 "raw (u, w) chart change must not be fiber-linear"))

            _guarded(report, "bundle.transition", location, group)

    for charts, samples in sorted(atlas.triple_samples.items()):
        if not all(c in trivs for c in charts):
            continue
        for y in samples:
            location = f"{'<-'.join(charts)} @ {format_point(y)}"
            _guarded(report, "bundle.cocycle", location,
                     lambda charts=charts, y=y, location=location: report.add(
                         CheckRecord.below("bundle.cocycle", location, cocycle_residual(trivs, atlas, charts, y),
                                           tol["structural"])))

    extracted = {}
    for chart_id, triv in sorted(trivs.items()):
        def group(chart_id=chart_id, triv=triv):
            field_ = extract_christoffel({chart_id: trivialization_fiber_map(triv)}, chart_id, n,
                                         atlas=atlas, rng=rng)
            extracted[chart_id] = field_
            symmetric = triv.christoffel.symmetrized()
            for y in atlas_sample_points(atlas, chart_id):
                u, v = rng.normal(size=n), rng.normal(size=n)
                report.add(CheckRecord.below("bundle.extraction-roundtrip", f"{chart_id} @ {format_point(y)}",
                                             relative_gap(field_(y, u, v), symmetric(y, u, v)), tol["structural"]))

        _guarded(report, "bundle.extraction-roundtrip", chart_id, group)

    for (alpha, beta), samples in sorted(atlas.overlap_samples.items()):
        if alpha not in extracted or beta not in extracted:
            continue
        sigma = transition_map(atlas, alpha, beta)
        for y in samples:
            location = f"{beta}->{alpha} @ {format_point(y)}"
            _guarded(report, "bundle.extracted-compatibility", location,
                     lambda y=y, sigma=sigma, location=location, alpha=alpha, beta=beta: report.add(
                         CheckRecord.below("bundle.extracted-compatibility", location,
                                           compatibility_defect(_as_triv(extracted[alpha]), _as_triv(extracted[beta]),
                                                                sigma, y),
                                           tol["structural"])))
    return report


def _as_triv(gamma):
    return Trivialization(gamma.chart_id, gamma)


def tower_suite(fixture: FixtureSpec, rng: np.random.Generator, tol: Mapping[str, float]) -> CheckReport:
    """Projective-system laws, the group H0, limit squares, the bijection F and limit connections."""
    section = fixture.tower
    tower, gammas = section.tower, section.gammas
    top = tower.dim(tower.depth)
    report = CheckReport()
    _guarded(report, "tower.structure", f"depth {tower.depth}",
             lambda: report.extend(check_tower(tower, rng, tol=tol["group"]).records))

    def membership(check_id, location, tower_map, sub_tower=None):
        _, worst = tower_membership(tower_map, sub_tower or tower, tol["group"])
        report.add(CheckRecord.below(check_id, location, worst, tol["group"]))

    def h0_group():
        membership("tower.h0-membership", "identity", identity_tower_map(tower))
        if section.truncation:
            membership("tower.h0-membership", "diagonal", diagonal_tower_map(tower, 1.0 / np.arange(1, top + 1)))
        if section.truncation and tower.dim(1) < 3 <= top:
            coupling = np.eye(2 * top)
            coupling[0, 2] = 1.0
            _, worst = tower_membership(tower_map_from_top(tower, coupling), tower, tol["group"])
            report.add(CheckRecord.above("tower.h0-non-member", "coordinate 3 into 1", worst, tol["group"],
                                         "coupling a deeper coordinate into a shallower one must leave H0"))
        if not section.truncation:
            return
        for s in range(SAMPLING_CONFIG["probes"]):
            a = random_triangular_tower_map(tower, rng)
            b = random_triangular_tower_map(tower, rng)
            membership("tower.h0-closure", f"compose #{s}", tower_group_op(a, b, "compose"))
            inverse = tower_group_op(a, op="invert")
            membership("tower.h0-closure", f"invert #{s}", inverse)
            unit = tower_group_op(a, inverse, "compose")
            gap = max(float(np.max(np.abs(block - np.eye(block.shape[0])))) for block in unit.blocks)
            report.add(CheckRecord.below("tower.h0-inverse", f"#{s}", gap, tol["structural"]))
            for level in tower.levels():
                membership("tower.h0-restriction", f"level {level} #{s}",
                           restrict_tower_map(a, level), tower.truncated(level))

    _guarded(report, "tower.h0", f"depth {tower.depth}", h0_group)

    trivs = tower_trivializations(gammas)
    for (j, i) in tower.pairs():
        def squares(j=j, i=i):
            jets = [random_level_jet(tower, j, rng) for _ in range(SAMPLING_CONFIG["tower_jets"])]
            report.add(CheckRecord.below("tower.limit-squares", f"{j}->{i}",
                                         limit_square_residual(trivs, tower, j, i, jets), tol["structural"]))

        _guarded(report, "tower.limit-squares", f"{j}->{i}", squares)

    def bijection():
        worst_jets, worst_fibers = 0.0, 0.0
        for _ in range(SAMPLING_CONFIG["tower_families"]):
            limit = random_level_jet(tower, tower.depth, rng)
            family = limit_projection(limit, tower)
            rebuilt = reconstruct_limit_jet(family.levels, tower, tol=tol["group"])
            worst_jets = max(worst_jets, jet_gap(rebuilt.top, limit),
                             *(jet_gap(a, b) for a, b in zip(rebuilt.levels, family.levels)))
            fibers = [trivialize(t, jet) for t, jet in zip(trivs, family.levels)]
            from_fibers = reconstruct_limit_jet(fibers, tower, trivializations=trivs, tol=tol["structural"])
            worst_fibers = max(worst_fibers, jet_gap(from_fibers.top, limit))
        report.add(CheckRecord.below("tower.limit-bijection", "jets", worst_jets, tol["group"]))
        report.add(CheckRecord.below("tower.limit-bijection", "fiber points", worst_fibers, tol["structural"]))

    _guarded(report, "tower.limit-bijection", f"depth {tower.depth}", bijection)
    _guarded(report, "tower.christoffel-equivariance", f"depth {tower.depth}",
             lambda: report.extend(limit_connection_check(gammas, tower, rng, tol=tol["structural"]).records))

    def extraction():
        extracted = extract_tower_christoffel(trivs, tower, rng)
        check = limit_connection_check(extracted, tower, rng, tol=tol["structural"])
        report.add(CheckRecord.below("tower.extracted-connection", f"depth {tower.depth}",
                                     check.worst_residual, tol["structural"]))

    _guarded(report, "tower.extracted-connection", f"depth {tower.depth}", extraction)

    if section.truncation:
        def transitions():
            forward, backward = shear_transitions(tower, section.shear, target="sheared")
            sheared = pushforward_tower_christoffel(gammas, forward, backward, "sheared")
            for s in range(SAMPLING_CONFIG["probes"]):
                y = rng.normal(scale=0.5, size=top)
                tower_map = tower_transition(gammas, sheared, forward, tower, y, tol=tol["structural"])
                _, worst = tower_membership(tower_map, tower, tol["structural"])
                location = f"shear {section.shear:g} @ {format_point(y)}"
                report.add(CheckRecord.below("tower.transition-h0", location, worst, tol["structural"]))

        _guarded(report, "tower.transition-h0", f"shear {section.shear:g}", transitions)
    return report


SUITES: Dict[str, Callable[[FixtureSpec, np.random.Generator, Mapping[str, float]], CheckReport]] = {
    "calculus": calculus_suite,
    "atlas": atlas_suite,
    "connection": connection_suite,
    "bundle": bundle_suite,
    "tower": tower_suite,
}


def applicable_suites(fixture: FixtureSpec) -> List[str]:
    """Suites the fixture has data for, in the configured order."""
    available = {
        "calculus": True,
        "atlas": fixture.atlas is not None,
        "connection": bool(fixture.christoffels),
        "bundle": bool(fixture.christoffels),
        "tower": fixture.tower is not None,
    }
    return [name for name in VERIFY_CONFIG["suites"] if available[name]]


def effective_tolerances(fixture: FixtureSpec, overrides: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    """
    Config defaults, then the fixture's ``[tolerances]``, then command-line overrides.

    Raises:
        ParameterError: If an override is not positive
    """
    tolerances = dict(TOLERANCE_CONFIG)
    tolerances.update(fixture.tolerances)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if value <= 0:
            message = f"tolerance override {key} must be positive, got {value}"
            logger.error(message)
            raise ParameterError(message)
        tolerances[key] = float(value)
    return tolerances


def run_suite(reference: str, suite: str = "all", seed: Optional[int] = None,
              overrides: Optional[Mapping[str, float]] = None, user_dir: Optional[str] = None,
              progress: bool = True) -> SuiteReport:
    """
    Load a fixture and run one suite (or all applicable ones) on it.

    Every suite draws from its own generator seeded with ``(seed, suite index)``,
    so a suite produces the same records whether it runs alone or under ``all``.

    Raises:
        ParameterError: On an unknown suite or a non-positive tolerance override
        FixtureError: If the fixture cannot be loaded or lacks data for the suite
    """
    if suite != "all" and suite not in SUITES:
        message = f"unknown suite {suite!r}; choose all or one of {VERIFY_CONFIG['suites']}"
        logger.error(message)
        raise ParameterError(message)
    seed = SAMPLING_CONFIG["seed"] if seed is None else int(seed)
    fixture = load_fixture(reference, user_dir)
    tolerances = effective_tolerances(fixture, overrides)

    names = applicable_suites(fixture)
    if suite != "all":
        if suite not in names:
            message = f"fixture {fixture.name!r} has no data for the {suite} suite"
            logger.error(message)
            raise FixtureError(message)
        names = [suite]

    result = SuiteReport(fixture.name, suite, seed, tolerances)
    started = time.perf_counter()
    for name in tqdm(names, desc=f"Verifying {fixture.name}", file=sys.stderr, disable=not progress):
        index = VERIFY_CONFIG["suites"].index(name)
        rng = np.random.default_rng([seed, index])
        logger.info(f"Running {name} suite on {fixture.name}")
        records = SUITES[name](fixture, rng, tolerances)
        result.report.extend(records.records)
        logger.info(f"{name}: {len(records.records)} checks, {len(records.violations)} violations")
    result.wall_time = time.perf_counter() - started
    return result
