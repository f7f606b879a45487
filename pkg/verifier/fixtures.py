"""
Fixture loading for the verifier.

A fixture is a TOML file describing a manifold through charts, transition
expressions and overlap sample points, Christoffel fields per chart, and
optionally a tower section. Built-in fixtures live in ``fixtures/``; a user
directory (``--fixture-dir`` or ``T2_FIXTURE_DIR``) adds more. A fixture may
name a ``base`` fixture whose tables it overrides.
"""
import logging
import os
import re
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import DATA_PATHS, TOLERANCE_CONFIG, VERIFY_CONFIG
from calculus.errors import FixtureError, GeometryError
from calculus.expressions import compile_expressions, compile_predicate, map_from_expressions, variable_names
from calculus.smooth_map import as_vector
from geometry.atlas import Atlas, Chart, transition_map
from geometry.connection import ChristoffelField, christoffel_from_metric, pushforward_christoffel
from geometry.prolim import (
    Tower,
    TowerChristoffel,
    level_chart,
    tower_from_adjacent,
    truncation_tower,
    with_rho,
)

logger = logging.getLogger(__name__)

_TOML_LOCATION = re.compile(r"at line (\d+), column (\d+)")

CHRISTOFFEL_KINDS = ("expression", "metric", "pushforward")


@dataclass(frozen=True, eq=False)
class TowerSpec:
    """Tower section of a fixture, built."""

    tower: Tower
    gammas: TowerChristoffel
    truncation: bool
    shear: float = 0.25


@dataclass(frozen=True, eq=False)
class FixtureSpec:
    """
    A fixture, parsed and built into library objects.

    Attributes:
        name: Fixture name
        description: One-line description shown by ``fixtures list``
        path: File the fixture was read from
        atlas: Charts and transitions, or None for tower-only fixtures
        christoffels: Chart id -> Christoffel field used by the bundle checks
        oracles: Chart id -> independently written field to compare against
        metrics: Chart id -> metric callable for the Levi-Civita cross-check
        pushforwards: Chart id -> chart its field was pushed forward from
        tower: Tower section, if any
        tolerances: Per-fixture tolerance overrides
    """

    name: str
    description: str
    path: Path
    atlas: Optional[Atlas] = None
    christoffels: Dict[str, ChristoffelField] = field(default_factory=dict)
    oracles: Dict[str, ChristoffelField] = field(default_factory=dict)
    metrics: Dict[str, Callable[[np.ndarray], np.ndarray]] = field(default_factory=dict)
    pushforwards: Dict[str, str] = field(default_factory=dict)
    tower: Optional[TowerSpec] = None
    tolerances: Dict[str, float] = field(default_factory=dict)

    @property
    def dim(self) -> Optional[int]:
        return self.atlas.dim if self.atlas is not None else None


def fixture_dirs(user_dir: Optional[str] = None) -> List[Path]:
    """Directories searched for fixtures: the user directory first, then the built-ins."""
    dirs = []
    user_dir = user_dir or VERIFY_CONFIG["fixture_dir"]
    if user_dir:
        dirs.append(Path(user_dir))
    dirs.append(Path(DATA_PATHS["fixtures"]))
    return dirs


def resolve_fixture(reference: str, user_dir: Optional[str] = None) -> Path:
    """
    Turn a fixture path or built-in name into a file path.

    Raises:
        FixtureError: If no file or fixture of that name exists
    """
    candidate = Path(reference)
    if candidate.is_file():
        return candidate
    suffix = VERIFY_CONFIG["fixture_suffix"]
    for directory in fixture_dirs(user_dir):
        path = directory / f"{reference}{suffix}"
        if path.is_file():
            return path
    message = f"unknown fixture {reference!r}; run 'fixtures list' to see the available ones"
    logger.error(message)
    raise FixtureError(message)


def list_fixtures(user_dir: Optional[str] = None) -> List[Dict[str, str]]:
    """
    Enumerate the available fixtures.

    Returns:
        One dict per fixture with ``name``, ``description`` and ``origin``
        (``builtin`` or ``user``); built-ins come first, then user fixtures.
    """
    entries = []
    seen = set()
    suffix = VERIFY_CONFIG["fixture_suffix"]
    user = Path(user_dir or VERIFY_CONFIG["fixture_dir"]) if (user_dir or VERIFY_CONFIG["fixture_dir"]) else None
    sources = [(Path(DATA_PATHS["fixtures"]), "builtin")]
    if user is not None and user.is_dir():
        sources.append((user, "user"))
    for directory, origin in sources:
        if not directory.is_dir():
            continue
        for path in sorted(directory.glob(f"*{suffix}")):
            try:
                header = _read_toml(path).get("fixture", {})
            except FixtureError as e:
                logger.warning(f"Skipping unreadable fixture {path}: {e}")
                continue
            name = header.get("name", path.stem)
            if (origin, name) in seen:
                continue
            seen.add((origin, name))
            entries.append({"name": name, "description": header.get("description", ""), "origin": origin})
    return entries


def _read_toml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_LOCATION.search(str(e))
        line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
        message = f"{path}: {e}"
        logger.error(message)
        raise FixtureError(message, line=line, column=column) from e
    except OSError as e:
        raise FixtureError(f"cannot read fixture {path}: {e}") from e


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_fixture_document(path: Path, user_dir: Optional[str] = None,
                          _chain: Tuple[str, ...] = ()) -> Dict[str, Any]:
    """Read a fixture file and resolve its ``base`` chain into one document."""
    document = _read_toml(path)
    base = document.get("fixture", {}).get("base")
    if base is None:
        return document
    if base in _chain:
        raise FixtureError(f"fixture base chain loops through {base!r}")
    parent = read_fixture_document(resolve_fixture(base, user_dir), user_dir, _chain + (base,))
    # name, description and base always come from the inheriting file
    parent_header = {k: v for k, v in parent.get("fixture", {}).items() if k not in ("name", "description", "base")}
    parent["fixture"] = parent_header
    return _merge(parent, document)


def load_fixture(reference: str, user_dir: Optional[str] = None) -> FixtureSpec:
    """
    Resolve, read and build a fixture.

    Raises:
        FixtureError: On syntax errors (with line and column), unknown chart
            references, sample points outside their overlap, or inconsistent
            dimensions
    """
    path = resolve_fixture(reference, user_dir)
    logger.info(f"Loading fixture {path}")
    document = read_fixture_document(path, user_dir)
    header = document.get("fixture", {})
    name = header.get("name", path.stem)
    try:
        atlas = _build_atlas(document) if document.get("charts") else None
        christoffels, oracles, metrics, pushforwards = _build_christoffels(document, atlas)
        tower = _build_tower(document["tower"]) if "tower" in document else None
        tolerances = _build_tolerances(document.get("tolerances", {}))
    except FixtureError:
        raise
    except (GeometryError, KeyError, TypeError, ValueError) as e:
        message = f"fixture {name!r} is inconsistent: {e}"
        logger.error(message)
        raise FixtureError(message) from e
    return FixtureSpec(name, header.get("description", ""), path, atlas, christoffels, oracles,
                       metrics, pushforwards, tower, tolerances)


def _build_atlas(document: Dict[str, Any]) -> Atlas:
    dim = document.get("fixture", {}).get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise FixtureError("[fixture] needs a positive integer 'dim' when charts are declared")
    charts = {}
    for entry in document["charts"]:
        chart_id = entry["id"]
        charts[chart_id] = Chart(chart_id, dim, compile_predicate(entry.get("domain_positive", []), dim,
                                                                  f"[[charts]] {chart_id} domain_positive"))

    transitions, overlap_samples = {}, {}
    for entry in document.get("transitions", []):
        target, source = entry["target"], entry["source"]
        _require_charts(charts, target, source)
        if len(entry["map"]) != dim:
            raise FixtureError(f"transition {source}->{target} has {len(entry['map'])} components, expected {dim}")
        domain = compile_predicate(entry.get("domain_positive", []), dim,
                                   f"[[transitions]] {source}->{target} domain_positive")
        source_chart = charts[source]
        sigma = map_from_expressions(entry["map"], dim,
                                     contains=lambda y, d=domain, c=source_chart: d(y) and c.contains(y),
                                     name=f"{source}->{target}", source=source, target=target,
                                     where=f"[[transitions]] {source}->{target} map")
        transitions[(target, source)] = sigma
        samples = _samples(entry, dim, f"[[transitions]] {source}->{target} samples")
        for y in samples:
            if not sigma.contains(y) or not charts[target].contains(sigma.value(y)):
                raise FixtureError(f"sample {y.tolist()} is outside the overlap of {source} and {target}")
        overlap_samples[(target, source)] = samples

    triple_samples = {}
    for entry in document.get("triples", []):
        alpha, beta, gamma = entry["charts"]
        _require_charts(charts, alpha, beta, gamma)
        for pair in ((alpha, beta), (beta, gamma), (alpha, gamma)):
            if pair not in transitions and pair[0] != pair[1]:
                raise FixtureError(f"triple {alpha},{beta},{gamma} needs the transition {pair[1]}->{pair[0]}")
        samples = _samples(entry, dim, f"[[triples]] {alpha},{beta},{gamma} samples")
        triple_samples[(alpha, beta, gamma)] = samples
    atlas = Atlas(dim, charts, transitions, overlap_samples, triple_samples)
    _check_triples(atlas)
    logger.debug(f"Atlas with {len(charts)} charts and {len(transitions)} transitions")
    return atlas


def _check_triples(atlas: Atlas) -> None:
    for (alpha, beta, gamma), samples in atlas.triple_samples.items():
        s_bc, s_ab, s_ac = (transition_map(atlas, beta, gamma), transition_map(atlas, alpha, beta),
                            transition_map(atlas, alpha, gamma))
        for y in samples:
            if not (s_bc.contains(y) and s_ac.contains(y) and s_ab.contains(s_bc.value(y))):
                raise FixtureError(f"sample {y.tolist()} is outside the triple overlap {alpha},{beta},{gamma}")


def _require_charts(charts: Dict[str, Chart], *ids: str) -> None:
    for chart_id in ids:
        if chart_id not in charts:
            raise FixtureError(f"unknown chart {chart_id!r}; declared charts are {sorted(charts)}")


def _samples(entry: Dict[str, Any], dim: int, where: str) -> Tuple[np.ndarray, ...]:
    try:
        return tuple(as_vector(p, dim, "sample") for p in entry.get("samples", []))
    except (TypeError, ValueError) as e:
        raise FixtureError(f"{where}: {e}") from e


def christoffel_from_expressions(chart_id: str, components: List[str], dim: int,
                                 contains: Callable[[np.ndarray], bool],
                                 where: Optional[str] = None) -> ChristoffelField:
    """Christoffel field from component expressions in ``y1..yn``, ``u1..un`` and ``v1..vn``."""
    if len(components) != dim:
        raise FixtureError(f"Christoffel field of {chart_id!r} has {len(components)} components, expected {dim}")
    variables = variable_names("y", dim) + variable_names("u", dim) + variable_names("v", dim)
    fn = compile_expressions(components, variables, where)

    def action(y, u, v):
        return np.array([float(c) for c in fn(*y, *u, *v)])

    return ChristoffelField(chart_id, dim, action, contains)


def metric_from_expressions(entries: List[str], dim: int,
                            where: Optional[str] = None) -> Callable[[np.ndarray], np.ndarray]:
    """Metric from ``dim * dim`` row-major expressions in ``y1..yn``."""
    if len(entries) != dim * dim:
        raise FixtureError(f"metric needs {dim * dim} entries, got {len(entries)}")
    fn = compile_expressions(entries, variable_names("y", dim), where)

    def metric(y):
        return np.array([float(c) for c in fn(*y)]).reshape(dim, dim)

    return metric


def _build_christoffels(document: Dict[str, Any], atlas: Optional[Atlas]):
    tables = document.get("christoffel", {})
    christoffels: Dict[str, ChristoffelField] = {}
    oracles: Dict[str, ChristoffelField] = {}
    metrics: Dict[str, Callable] = {}
    pushforwards: Dict[str, str] = {}
    if not tables:
        return christoffels, oracles, metrics, pushforwards
    if atlas is None:
        raise FixtureError("[christoffel] tables need declared charts")
    dim = atlas.dim

    for chart_id, table in tables.items():
        _require_charts(dict(atlas.charts), chart_id)
        contains = atlas.chart(chart_id).contains
        if "metric" in table:
            metrics[chart_id] = metric_from_expressions(table["metric"], dim, f"[christoffel.{chart_id}] metric")
        if "oracle" in table:
            oracles[chart_id] = christoffel_from_expressions(chart_id, table["oracle"], dim, contains,
                                                             f"[christoffel.{chart_id}] oracle")
        kind = table.get("kind", "expression")
        if kind not in CHRISTOFFEL_KINDS:
            raise FixtureError(f"Christoffel kind {kind!r} of {chart_id!r} is not one of {CHRISTOFFEL_KINDS}")
        if kind == "expression":
            christoffels[chart_id] = christoffel_from_expressions(chart_id, table["components"], dim, contains,
                                                                  f"[christoffel.{chart_id}] components")
        elif kind == "metric":
            if chart_id not in metrics:
                raise FixtureError(f"Christoffel kind 'metric' of {chart_id!r} needs a 'metric' entry")
            christoffels[chart_id] = christoffel_from_metric(chart_id, metrics[chart_id], dim, contains)
        else:
            pushforwards[chart_id] = table["from"]

    def resolve(chart_id: str, chain: Tuple[str, ...]) -> ChristoffelField:
        if chart_id in christoffels:
            return christoffels[chart_id]
        if chart_id not in pushforwards:
            raise FixtureError(f"chart {chart_id!r} has no Christoffel field to push forward")
        if chart_id in chain:
            raise FixtureError(f"pushforward chain loops through {chart_id!r}")
        origin = pushforwards[chart_id]
        _require_charts(dict(atlas.charts), origin)
        if (chart_id, origin) not in atlas.transitions or (origin, chart_id) not in atlas.transitions:
            raise FixtureError(f"pushing {origin!r} to {chart_id!r} needs transitions in both directions")
        field_ = pushforward_christoffel(resolve(origin, chain + (chart_id,)),
                                         atlas.transitions[(chart_id, origin)],
                                         atlas.transitions[(origin, chart_id)], chart_id=chart_id)
        christoffels[chart_id] = field_
        return field_

    for chart_id in list(pushforwards):
        resolve(chart_id, ())
    return christoffels, oracles, metrics, pushforwards


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FixtureError(f"[tower] {name} must be an integer, got {value!r}")
    return value


def _matrix(value, name: str) -> np.ndarray:
    try:
        m = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise FixtureError(f"[tower] {name} must hold numbers: {e}") from e
    if m.ndim != 2:
        raise FixtureError(f"[tower] {name} must be a matrix (list of rows)")
    return m


def _build_tower(table: Dict[str, Any]) -> TowerSpec:
    depth = _integer(table["depth"], "depth")
    dims = [_integer(d, "dims entry") for d in table.get("dims", range(1, depth + 1))]
    rho = table.get("rho", "truncation")
    if rho == "truncation":
        tower = truncation_tower(depth, dims)
        truncation = True
    elif isinstance(rho, dict):
        tower = tower_from_adjacent(dims, {int(i): _matrix(m, f"rho {int(i) + 1}->{i}") for i, m in rho.items()})
        truncation = False
    else:
        raise FixtureError(f"tower rho must be 'truncation' or a table of adjacent matrices, got {rho!r}")

    for key, matrix in table.get("rho_overrides", {}).items():
        j, _, i = key.partition("-")
        tower = with_rho(tower, (int(j), int(i)), _matrix(matrix, f"rho override {key}"))
        truncation = False

    template = table.get("gamma_template")
    overrides = {int(k): v for k, v in table.get("gamma_overrides", {}).items()}
    fields = []
    for level in tower.levels():
        n = tower.dim(level)
        if level in overrides:
            components = list(overrides[level])
        elif template is not None:
            components = [template.replace("{k}", str(k)) for k in range(1, n + 1)]
        else:
            components = ["0"] * n
        fields.append(christoffel_from_expressions(level_chart(level), components, n, lambda y: True,
                                                   f"[tower] level {level} Christoffel field"))
    return TowerSpec(tower, TowerChristoffel(tuple(fields)), truncation, float(table.get("shear", 0.25)))


def _build_tolerances(table: Dict[str, Any]) -> Dict[str, float]:
    tolerances = {}
    for key, value in table.items():
        if key not in TOLERANCE_CONFIG:
            raise FixtureError(f"unknown tolerance {key!r}; known ones are {sorted(TOLERANCE_CONFIG)}")
        value = float(value)
        if value <= 0:
            raise FixtureError(f"tolerance {key!r} must be positive, got {value}")
        tolerances[key] = value
    return tolerances
