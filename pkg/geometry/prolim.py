"""
Finite towers of model spaces and the projective-limit constructions on them.

Levels are numbered 1..depth. A tower stores the connecting linear maps
rho^{ji}: E^j -> E^i for j > i and the chart expressions phi^{ji} of the
manifold connecting maps. In projective-limit charts phi^{ji} is rho^{ji}
itself, which is what ``truncation_tower`` and ``tower_from_adjacent`` build.

The limit of a finite tower is its deepest level, so a "limit jet" is a jet at
level ``depth`` and the bijection between limit jets and compatible families
of level jets is ``limit_projection`` / ``reconstruct_limit_jet``.

Level charts are named ``<chart>/<level>``, e.g. ``limit/3``.
"""
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import SAMPLING_CONFIG, TOLERANCE_CONFIG
from calculus.errors import (
    ParameterError,
    ReconstructionError,
    ShapeError,
    SingularLevelError,
)
from calculus.probes import relative_gap
from calculus.records import CheckRecord, CheckReport
from calculus.smooth_map import SmoothMap2, as_vector
from geometry.atlas import Curve2, Jet2, change_jet_chart, curve_to_jet, format_point, jet_gap
from geometry.connection import ChristoffelField, pushforward_christoffel, vilms_local
from geometry.t2bundle import (
    FiberPoint,
    Trivialization,
    extract_christoffel,
    transition_function,
    trivialization_fiber_map,
    trivialize,
    untrivialize,
)

logger = logging.getLogger(__name__)

LevelPair = Tuple[int, int]

DEFAULT_CHART = "limit"


def level_chart(level: int, chart: str = DEFAULT_CHART) -> str:
    return f"{chart}/{level}"


def split_level_chart(chart_id: str) -> Tuple[str, int]:
    """Inverse of ``level_chart``."""
    chart, _, level = chart_id.rpartition("/")
    if not chart or not level.isdigit():
        raise ParameterError(f"{chart_id!r} is not a level chart id of the form <chart>/<level>")
    return chart, int(level)


@dataclass(frozen=True, eq=False)
class Tower:
    """
    A finite projective system of model spaces and chart-level connecting maps.

    Attributes:
        depth: Number of levels
        level_dims: Dimensions of E^1..E^depth, non-decreasing
        rho: ``(j, i)`` -> matrix of rho^{ji} (shape dim_i x dim_j) for j > i
        phi: ``(j, i)`` -> chart expression of phi^{ji} for j > i
    """

    depth: int
    level_dims: Tuple[int, ...]
    rho: Mapping[LevelPair, np.ndarray] = field(repr=False)
    phi: Mapping[LevelPair, SmoothMap2] = field(repr=False)

    def __post_init__(self):
        if self.depth < 1:
            raise ParameterError(f"tower depth must be >= 1, got {self.depth}")
        dims = tuple(int(d) for d in self.level_dims)
        if len(dims) != self.depth:
            raise ShapeError(f"tower of depth {self.depth} got {len(dims)} level dimensions")
        if any(b < a for a, b in zip(dims, dims[1:])) or dims[0] < 1:
            raise ShapeError(f"level dimensions must be positive and non-decreasing, got {list(dims)}")
        object.__setattr__(self, "level_dims", dims)
        for (j, i), matrix in self.rho.items():
            if matrix.shape != (dims[i - 1], dims[j - 1]):
                raise ShapeError(f"rho^{j}{i} has shape {matrix.shape}, expected {(dims[i - 1], dims[j - 1])}")

    def levels(self) -> range:
        return range(1, self.depth + 1)

    def pairs(self) -> List[LevelPair]:
        """All ``(j, i)`` with j > i, ordered by j then i."""
        return [(j, i) for j in self.levels() for i in range(1, j)]

    def dim(self, level: int) -> int:
        self._check_level(level)
        return self.level_dims[level - 1]

    def rho_map(self, j: int, i: int) -> np.ndarray:
        self._check_pair(j, i)
        if j == i:
            return np.eye(self.dim(i))
        return self.rho[(j, i)]

    def phi_map(self, j: int, i: int) -> SmoothMap2:
        self._check_pair(j, i)
        if j == i:
            return SmoothMap2.identity(self.dim(i))
        return self.phi[(j, i)]

    def fiber_rho(self, j: int, i: int) -> np.ndarray:
        """rho^{ji} x rho^{ji} acting on E^j x E^j."""
        r = self.rho_map(j, i)
        zero = np.zeros_like(r)
        return np.block([[r, zero], [zero, r]])

    def truncated(self, level: int) -> "Tower":
        """The sub-tower of levels 1..level."""
        self._check_level(level)
        return Tower(level, self.level_dims[:level],
                     {k: m for k, m in self.rho.items() if k[0] <= level},
                     {k: m for k, m in self.phi.items() if k[0] <= level})

    def _check_level(self, level: int) -> None:
        if not 1 <= level <= self.depth:
            raise ParameterError(f"level {level} is outside 1..{self.depth}")

    def _check_pair(self, j: int, i: int) -> None:
        self._check_level(j)
        self._check_level(i)
        if i > j:
            message = f"connecting maps go from deeper to shallower levels; got j={j} < i={i}"
            logger.error(message)
            raise ParameterError(message)


def _linear_phi(matrix: np.ndarray, j: int, i: int) -> SmoothMap2:
    return SmoothMap2.linear(matrix, name=f"phi{j}{i}")


def tower_from_adjacent(level_dims: Sequence[int], adjacent: Mapping[int, np.ndarray]) -> Tower:
    """
    Tower from the adjacent maps rho^{i+1,i}, keyed by ``i``.

    Longer connecting maps are composed, so the composition law holds exactly.
    """
    depth = len(level_dims)
    rho: Dict[LevelPair, np.ndarray] = {}
    for j in range(2, depth + 1):
        step = np.array(adjacent[j - 1], dtype=float)
        rho[(j, j - 1)] = step
        for i in range(j - 2, 0, -1):
            rho[(j, i)] = rho[(j - 1, i)] @ step
    for matrix in rho.values():
        matrix.setflags(write=False)
    phi = {(j, i): _linear_phi(m, j, i) for (j, i), m in rho.items()}
    return Tower(depth, tuple(level_dims), rho, phi)


def truncation_tower(depth: int, level_dims: Optional[Sequence[int]] = None) -> Tower:
    """Tower E^i = R^{d_i} whose connecting maps drop trailing coordinates; d_i = i by default."""
    dims = list(level_dims) if level_dims is not None else list(range(1, depth + 1))
    if len(dims) != depth:
        raise ShapeError(f"tower of depth {depth} got {len(dims)} level dimensions")
    return tower_from_adjacent(dims, {i: np.eye(dims[i - 1], dims[i]) for i in range(1, depth)})


def with_rho(tower: Tower, pair: LevelPair, matrix) -> Tower:
    """Copy of ``tower`` with one stored connecting map replaced."""
    rho = dict(tower.rho)
    phi = dict(tower.phi)
    rho[pair] = np.array(matrix, dtype=float)
    phi[pair] = _linear_phi(rho[pair], *pair)
    return replace(tower, rho=rho, phi=phi)


@dataclass(frozen=True, eq=False)
class TowerJet:
    """A family of level jets, one per level, in the level charts of one limit chart."""

    levels: Tuple[Jet2, ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def chart(self) -> str:
        return split_level_chart(self.levels[0].chart_id)[0]

    @property
    def top(self) -> Jet2:
        return self.levels[-1]

    def level(self, i: int) -> Jet2:
        return self.levels[i - 1]


@dataclass(frozen=True, eq=False)
class TowerLinearMap:
    """Per-level linear maps l^i on E^i x E^i."""

    blocks: Tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = []
        for i, block in enumerate(self.blocks, start=1):
            b = np.array(block, dtype=float)
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ShapeError(f"level {i} block must be square, got shape {b.shape}")
            b.setflags(write=False)
            blocks.append(b)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def depth(self) -> int:
        return len(self.blocks)

    def level(self, i: int) -> np.ndarray:
        return self.blocks[i - 1]

    def apply(self, i: int, vector) -> np.ndarray:
        block = self.level(i)
        return block @ as_vector(vector, block.shape[0], "fiber vector")


@dataclass(frozen=True, eq=False)
class TowerChristoffel:
    """Christoffel fields Gamma^1..Gamma^depth of one limit chart."""

    fields: Tuple[ChristoffelField, ...]

    @property
    def depth(self) -> int:
        return len(self.fields)

    @property
    def chart(self) -> str:
        return split_level_chart(self.fields[0].chart_id)[0]

    def level(self, i: int) -> ChristoffelField:
        return self.fields[i - 1]


def check_tower(tower: Tower, rng: np.random.Generator,
                samples: int = SAMPLING_CONFIG["probes"],
                tol: float = TOLERANCE_CONFIG["group"]) -> CheckReport:
    """
    Check the projective-system laws of a tower.

    Records ``tower.rho-composition`` (rho^{jk} = rho^{ik} rho^{ji}),
    ``tower.rho-surjective``, ``tower.phi-chart`` (phi^{ji} is rho^{ji} in
    chart coordinates) and ``tower.jet-functoriality`` (g^{jk} = g^{ik} g^{ji}
    on random jets).
    """
    report = CheckReport()
    for (j, i) in tower.pairs():
        r = tower.rho_map(j, i)
        deficit = tower.dim(i) - np.linalg.matrix_rank(r)
        report.add(CheckRecord.below("tower.rho-surjective", f"{j}->{i}", float(deficit), 0.0))
        for _ in range(samples):
            y = rng.normal(size=tower.dim(j))
            phi = tower.phi_map(j, i)
            gap = max(relative_gap(phi.value(y), r @ y), relative_gap(phi.jacobian(y), r))
            report.add(CheckRecord.below("tower.phi-chart", f"{j}->{i} @ {format_point(y)}", gap, tol))

    for j in tower.levels():
        for i in range(2, j):
            for k in range(1, i):
                gap = float(np.max(np.abs(tower.rho_map(j, k) - tower.rho_map(i, k) @ tower.rho_map(j, i))))
                report.add(CheckRecord.below("tower.rho-composition", f"{j}->{i}->{k}", gap, tol))
                for s in range(samples):
                    jet = random_level_jet(tower, j, rng)
                    direct = project_jet(jet, tower, k)
                    stepped = project_jet(project_jet(jet, tower, i), tower, k)
                    report.add(CheckRecord.below("tower.jet-functoriality", f"{j}->{i}->{k} sample {s}",
                                                 jet_gap(direct, stepped), tol))
    logger.info(f"Tower check: depth {tower.depth}, {len(report.records)} records, {len(report.violations)} violations")
    return report


def random_level_jet(tower: Tower, level: int, rng: np.random.Generator,
                     chart: str = DEFAULT_CHART) -> Jet2:
    n = tower.dim(level)
    return Jet2(level_chart(level, chart), rng.normal(size=n), rng.normal(size=n), rng.normal(size=n))


def project_jet(jet: Jet2, tower: Tower, i: int) -> Jet2:
    """
    g^{ji} in chart coordinates: the jet moved along phi^{ji}.

    For projective-limit charts this is (rho y, rho u, rho w).

    Raises:
        ParameterError: If ``i`` is deeper than the jet's level
    """
    chart, j = split_level_chart(jet.chart_id)
    if i == j:
        return jet
    tower._check_pair(j, i)
    return change_jet_chart(jet, tower.phi_map(j, i), target=level_chart(i, chart))


def limit_projection(jet: Jet2, tower: Tower) -> TowerJet:
    """The map F: a limit jet to its family of level jets."""
    chart, level = split_level_chart(jet.chart_id)
    if level != tower.depth:
        raise ParameterError(f"limit jets live at level {tower.depth}, got level {level}")
    return TowerJet(tuple(project_jet(jet, tower, i) for i in tower.levels()))


def random_tower_jet(tower: Tower, rng: np.random.Generator, chart: str = DEFAULT_CHART) -> TowerJet:
    return limit_projection(random_level_jet(tower, tower.depth, rng, chart), tower)


def reconstruct_limit_jet(family: Sequence[Union[Jet2, FiberPoint]], tower: Tower,
                          trivializations: Optional[Sequence[Trivialization]] = None,
                          tol: float = TOLERANCE_CONFIG["group"]) -> TowerJet:
    """
    Inverse of F: assemble the limit jet of a compatible family.

    The limit jet is the 2-jet at t = 0 of h(t) = y + t u + t^2/2 w built from
    the deepest level; its projections must reproduce the family.

    Args:
        family: One jet per level, or one fiber point per level together with
            ``trivializations``
        tower: The tower
        trivializations: Level trivializations used to read fiber points

    Raises:
        ReconstructionError: If the family violates g^{ji}(jet^j) = jet^i; names the first pair
        ParameterError: If the family has the wrong length or fiber points come without trivializations
    """
    if len(family) != tower.depth:
        raise ParameterError(f"family has {len(family)} levels, tower has {tower.depth}")
    jets: List[Jet2] = []
    for i, item in enumerate(family, start=1):
        if isinstance(item, FiberPoint):
            if trivializations is None:
                raise ParameterError("fiber points need level trivializations to be read as jets")
            item = untrivialize(trivializations[i - 1], item)
        jets.append(item)

    for (j, i) in tower.pairs():
        gap = jet_gap(project_jet(jets[j - 1], tower, i), jets[i - 1])
        if gap > tol:
            message = f"level jets {j} and {i} are not compatible: deviation {gap:.3e}"
            logger.error(message)
            raise ReconstructionError(message, (j, i), gap)

    top = jets[-1]
    curve = Curve2.polynomial(top.chart_id, top.y, top.u, top.w)
    return limit_projection(curve_to_jet(curve), tower)


def tower_membership(tower_map: TowerLinearMap, tower: Tower,
                     tol: float = TOLERANCE_CONFIG["group"]) -> Tuple[bool, float]:
    """
    Decide membership in H0: every level block invertible and
    (rho^{jk} x rho^{jk}) l^j = l^k (rho^{jk} x rho^{jk}) for k < j.

    Returns:
        (member, worst commuting residual); a singular block gives (False, inf)
    """
    if tower_map.depth != tower.depth:
        raise ShapeError(f"tower map has {tower_map.depth} levels, tower has {tower.depth}")
    for i in tower.levels():
        block = tower_map.level(i)
        if block.shape != (2 * tower.dim(i), 2 * tower.dim(i)):
            raise ShapeError(f"level {i} block has shape {block.shape}, expected {2 * tower.dim(i)} square")
        if np.linalg.matrix_rank(block) < block.shape[0]:
            logger.warning(f"Level {i} map is not invertible; not an element of H0")
            return False, float("inf")
    worst = 0.0
    for (j, k) in tower.pairs():
        r = tower.fiber_rho(j, k)
        worst = max(worst, float(np.max(np.abs(r @ tower_map.level(j) - tower_map.level(k) @ r))))
    return worst <= tol, worst


def tower_group_op(a: TowerLinearMap, b: Optional[TowerLinearMap] = None,
                   op: str = "compose") -> TowerLinearMap:
    """
    Levelwise group operation in H0: ``compose`` gives a o b, ``invert`` gives a^-1.

    Raises:
        SingularLevelError: If a level block of ``a`` is singular on invert
        ParameterError: On an unknown operation or missing operand
    """
    if op == "compose":
        if b is None or b.depth != a.depth:
            raise ParameterError("compose needs two tower maps of equal depth")
        return TowerLinearMap(tuple(x @ y for x, y in zip(a.blocks, b.blocks)))
    if op == "invert":
        inverses = []
        for i, block in enumerate(a.blocks, start=1):
            try:
                inverses.append(np.linalg.inv(block))
            except np.linalg.LinAlgError:
                message = f"level {i} block is singular"
                logger.error(message)
                raise SingularLevelError(message, i) from None
        return TowerLinearMap(tuple(inverses))
    raise ParameterError(f"unknown tower group operation {op!r}; use 'compose' or 'invert'")


def identity_tower_map(tower: Tower) -> TowerLinearMap:
    return TowerLinearMap(tuple(np.eye(2 * tower.dim(i)) for i in tower.levels()))


def diagonal_tower_map(tower: Tower, entries: Sequence[float]) -> TowerLinearMap:
    """Level i acts by diag(entries[:d_i]) on both factors; a member of H0 on truncation towers."""
    entries = np.asarray(entries, dtype=float)
    if entries.shape[0] < tower.dim(tower.depth):
        raise ShapeError(f"need {tower.dim(tower.depth)} diagonal entries, got {entries.shape[0]}")
    blocks = []
    for i in tower.levels():
        d = entries[:tower.dim(i)]
        blocks.append(np.diag(np.concatenate([d, d])))
    return TowerLinearMap(tuple(blocks))


def tower_map_from_top(tower: Tower, top) -> TowerLinearMap:
    """
    Levelwise maps induced by a map on the deepest level:
    l^i = R l^N R^+ with R = rho^{Ni} x rho^{Ni} and R^+ its right inverse.

    The result is in H0 exactly when ``top`` maps ker R into itself for every level.
    """
    top = np.array(top, dtype=float)
    blocks = []
    for i in tower.levels():
        r = tower.fiber_rho(tower.depth, i)
        blocks.append(r @ top @ np.linalg.pinv(r))
    return TowerLinearMap(tuple(blocks))


def random_triangular_tower_map(tower: Tower, rng: np.random.Generator) -> TowerLinearMap:
    """
    Random invertible H0 element of a truncation tower.

    Each of the four blocks of the top map is lower triangular, so coordinate a
    of the output only reads coordinates <= a of both factors.
    """
    n = tower.dim(tower.depth)
    blocks = [np.tril(rng.normal(size=(n, n))) for _ in range(4)]
    for block in (blocks[0], blocks[3]):
        np.fill_diagonal(block, 2.0 + np.abs(np.diag(block)))
    blocks[1] = 0.1 * blocks[1]
    blocks[2] = 0.1 * blocks[2]
    return tower_map_from_top(tower, np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]]))


def restrict_tower_map(tower_map: TowerLinearMap, level: int) -> TowerLinearMap:
    """Image in H0_i: the levels 1..level of a tower map."""
    if not 1 <= level <= tower_map.depth:
        raise ParameterError(f"level {level} is outside 1..{tower_map.depth}")
    return TowerLinearMap(tower_map.blocks[:level])


def tower_trivializations(gammas: TowerChristoffel) -> Tuple[Trivialization, ...]:
    return tuple(Trivialization(gamma.chart_id, gamma) for gamma in gammas.fields)


def limit_square_residual(trivializations: Sequence[Trivialization], tower: Tower, j: int, i: int,
                          jets: Iterable[Jet2]) -> float:
    """
    Largest deviation of the two projection squares over sample level-j jets:
    phi^{ji}(pi(jet)) = pi(g^{ji} jet) and
    (phi^{ji} x rho^{ji} x rho^{ji}) Phi^j(jet) = Phi^i(g^{ji} jet).

    Raises:
        ParameterError: If a level has no trivialization or j < i
    """
    tower._check_pair(j, i)
    if len(trivializations) < max(i, j):
        message = f"no trivialization supplied for level {max(i, j)}"
        logger.error(message)
        raise ParameterError(message)
    triv_j, triv_i = trivializations[j - 1], trivializations[i - 1]
    phi = tower.phi_map(j, i)
    r = tower.rho_map(j, i)
    worst = 0.0
    for jet in jets:
        projected = project_jet(jet, tower, i)
        base_gap = relative_gap(phi.value(jet.y), projected.y)
        upper = trivialize(triv_j, jet)
        lower = trivialize(triv_i, projected)
        fiber_gap = max(relative_gap(phi.value(upper.y), lower.y),
                        relative_gap(r @ upper.u, lower.u),
                        relative_gap(r @ upper.v, lower.v))
        worst = max(worst, base_gap, fiber_gap)
    return worst


def limit_connection_check(gammas: TowerChristoffel, tower: Tower, rng: np.random.Generator,
                           samples: int = SAMPLING_CONFIG["probes"],
                           tol: float = TOLERANCE_CONFIG["structural"]) -> CheckReport:
    """
    Check that the level Christoffel fields form a projective system.

    Records ``tower.christoffel-equivariance``
    (rho Gamma^j(y)(u)(v) = Gamma^i(rho y)(rho u)(rho v)) and
    ``tower.connection-map`` (the local connection maps commute with rho) at
    random top-level samples projected to each level.
    """
    report = CheckReport()
    if gammas.depth != tower.depth:
        raise ShapeError(f"{gammas.depth} Christoffel levels for a tower of depth {tower.depth}")
    n = tower.dim(tower.depth)
    for s in range(samples):
        y, u, v, w = (rng.normal(size=n) for _ in range(4))
        for (j, i) in tower.pairs():
            to_j, to_i = tower.rho_map(tower.depth, j), tower.rho_map(tower.depth, i)
            r = tower.rho_map(j, i)
            gamma_j, gamma_i = gammas.level(j), gammas.level(i)
            location = f"{j}->{i} sample {s}"
            upper = r @ gamma_j(to_j @ y, to_j @ u, to_j @ v)
            lower = gamma_i(to_i @ y, to_i @ u, to_i @ v)
            report.add(CheckRecord.below("tower.christoffel-equivariance", location,
                                         relative_gap(upper, lower), tol))
            _, upper_d = vilms_local(gamma_j, to_j @ y, to_j @ u, to_j @ v, to_j @ w)
            _, lower_d = vilms_local(gamma_i, to_i @ y, to_i @ u, to_i @ v, to_i @ w)
            report.add(CheckRecord.below("tower.connection-map", location,
                                         relative_gap(r @ upper_d, lower_d), tol))
    logger.info(f"Limit connection check: {len(report.records)} records, {len(report.violations)} violations")
    return report


def shear_transitions(tower: Tower, coefficient: float,
                      source: str = DEFAULT_CHART, target: str = "sheared"
                      ) -> Tuple[Tuple[SmoothMap2, ...], Tuple[SmoothMap2, ...]]:
    """
    Level transitions z_k = y_k + c y_{k-1}^2 between two limit charts, with their inverses.

    Coordinate k only reads coordinates <= k, so on a truncation tower the
    level maps commute with rho.
    """
    forward, backward = [], []
    for i in tower.levels():
        n = tower.dim(i)

        def fn(ys, n=n):
            return [ys[0]] + [ys[k] + coefficient * ys[k - 1] ** 2 for k in range(1, n)]

        def inv(zs, n=n):
            ys = [zs[0]]
            for k in range(1, n):
                ys.append(zs[k] - coefficient * ys[k - 1] ** 2)
            return ys

        forward.append(SmoothMap2.from_propagation(fn, n, n, name=f"shear{i}",
                                                   source=level_chart(i, source), target=level_chart(i, target)))
        backward.append(SmoothMap2.from_propagation(inv, n, n, name=f"unshear{i}",
                                                    source=level_chart(i, target), target=level_chart(i, source)))
    return tuple(forward), tuple(backward)


def pushforward_tower_christoffel(gammas: TowerChristoffel, forward: Sequence[SmoothMap2],
                                  backward: Sequence[SmoothMap2], chart: str) -> TowerChristoffel:
    """Push every level field along its level transition."""
    return TowerChristoffel(tuple(
        pushforward_christoffel(gamma, sigma, inverse, chart_id=level_chart(i, chart))
        for i, (gamma, sigma, inverse) in enumerate(zip(gammas.fields, forward, backward), start=1)
    ))


def tower_transition(source: TowerChristoffel, target: TowerChristoffel, transitions: Sequence[SmoothMap2],
                     tower: Tower, y, tol: float = TOLERANCE_CONFIG["structural"]) -> TowerLinearMap:
    """
    Fiber transitions of all levels at one limit point, as a tower map.

    ``y`` is a point of the deepest level in source coordinates; level i uses
    rho^{Ni} y. For level transitions commuting with rho the result lies in H0.
    """
    y = as_vector(y, tower.dim(tower.depth), "point")
    blocks = []
    for i in tower.levels():
        op = transition_function(Trivialization(target.level(i).chart_id, target.level(i)),
                                 Trivialization(source.level(i).chart_id, source.level(i)),
                                 transitions[i - 1], tower.rho_map(tower.depth, i) @ y, tol=tol)
        blocks.append(op.matrix)
    return TowerLinearMap(tuple(blocks))


def extract_tower_christoffel(trivializations: Sequence[Trivialization], tower: Tower,
                              rng: np.random.Generator,
                              samples: int = SAMPLING_CONFIG["probes"]) -> TowerChristoffel:
    """Run Christoffel extraction level by level."""
    fields = []
    for i, triv in zip(tower.levels(), trivializations):
        n = tower.dim(i)
        points = [rng.normal(size=n) for _ in range(samples)]
        fields.append(extract_christoffel({triv.chart_id: trivialization_fiber_map(triv)}, triv.chart_id, n,
                                          points=points, rng=rng, contains=triv.christoffel.contains))
    return TowerChristoffel(tuple(fields))
