"""Tests for finite towers, limit jets, the group H0 and limit connections."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calculus.errors import ParameterError, ReconstructionError, ShapeError, SingularLevelError
from geometry.atlas import Jet2, jet_gap
from geometry.prolim import (
    check_tower,
    diagonal_tower_map,
    extract_tower_christoffel,
    identity_tower_map,
    level_chart,
    limit_connection_check,
    limit_projection,
    limit_square_residual,
    project_jet,
    pushforward_tower_christoffel,
    random_level_jet,
    random_tower_jet,
    random_triangular_tower_map,
    reconstruct_limit_jet,
    restrict_tower_map,
    shear_transitions,
    split_level_chart,
    tower_group_op,
    tower_map_from_top,
    tower_membership,
    tower_transition,
    tower_trivializations,
    truncation_tower,
    with_rho,
)
from geometry.t2bundle import trivialize
from verifier.fixtures import load_fixture


def test_level_chart_names():
    assert level_chart(3) == "limit/3"
    assert split_level_chart("sheared/12") == ("sheared", 12)
    with pytest.raises(ParameterError):
        split_level_chart("limit")


def test_truncation_tower_is_a_projective_system(tower4, rng):
    report = check_tower(tower4, rng)
    assert report.passed, report.violations
    np.testing.assert_array_equal(tower4.rho_map(4, 2), np.eye(2, 4))


def test_broken_composition_is_reported(tower4, rng):
    broken = with_rho(tower4, (3, 2), [[1, 0, 0], [0, 2, 0]])
    report = check_tower(broken, rng)
    assert "tower.rho-composition" in {r.check_id for r in report.violations}


def test_level_dimensions_must_not_shrink():
    with pytest.raises(ShapeError):
        truncation_tower(3, [2, 1, 3])
    with pytest.raises(ParameterError):
        truncation_tower(0, [])


def test_projection_only_goes_to_shallower_levels(tower4, rng):
    jet = random_level_jet(tower4, 2, rng)
    with pytest.raises(ParameterError, match="deeper to shallower"):
        project_jet(jet, tower4, 3)
    np.testing.assert_allclose(project_jet(jet, tower4, 1).y, jet.y[:1])


def test_limit_jets_match_compatible_families(tower4, rng):
    for _ in range(50):
        family = random_tower_jet(tower4, rng)
        rebuilt = reconstruct_limit_jet(family.levels, tower4)
        assert all(jet_gap(a, b) < 1e-12 for a, b in zip(rebuilt.levels, family.levels))
        assert rebuilt.chart == "limit"


def test_incompatible_family_names_the_offending_levels(tower4, rng):
    levels = list(random_tower_jet(tower4, rng).levels)
    second = levels[1]
    levels[1] = Jet2(second.chart_id, second.y + np.array([0.0, 1.0]), second.u, second.w)
    with pytest.raises(ReconstructionError) as excinfo:
        reconstruct_limit_jet(levels, tower4)
    assert excinfo.value.levels == (3, 2)
    assert excinfo.value.residual == pytest.approx(1.0)


def test_limit_projection_needs_a_top_level_jet(tower4, rng):
    with pytest.raises(ParameterError, match="level 4"):
        limit_projection(random_level_jet(tower4, 2, rng), tower4)


def test_fiber_point_families(tower_fixture, rng):
    section = tower_fixture.tower
    trivs = tower_trivializations(section.gammas)
    family = random_tower_jet(section.tower, rng)
    points = [trivialize(triv, jet) for triv, jet in zip(trivs, family.levels)]
    rebuilt = reconstruct_limit_jet(points, section.tower, trivs)
    assert jet_gap(rebuilt.top, family.top) < 1e-10
    with pytest.raises(ParameterError, match="trivializations"):
        reconstruct_limit_jet(points, section.tower)


def test_membership(tower4):
    assert tower_membership(identity_tower_map(tower4), tower4) == (True, 0.0)
    assert tower_membership(diagonal_tower_map(tower4, [2.0, -1.0, 0.5, 3.0]), tower4)[0]

    coupling = np.eye(8)
    coupling[0, 1] = 1.0
    member, residual = tower_membership(tower_map_from_top(tower4, coupling), tower4)
    assert not member
    assert residual == pytest.approx(1.0)


def test_singular_levels(tower4):
    singular = diagonal_tower_map(tower4, [1.0, 0.0, 1.0, 1.0])
    assert tower_membership(singular, tower4) == (False, float("inf"))
    with pytest.raises(SingularLevelError) as excinfo:
        tower_group_op(singular, op="invert")
    assert excinfo.value.level == 2


def test_group_operation_arguments(tower4):
    identity = identity_tower_map(tower4)
    with pytest.raises(ParameterError):
        tower_group_op(identity, op="conjugate")
    with pytest.raises(ParameterError):
        tower_group_op(identity, op="compose")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_h0_is_closed_under_composition_and_inversion(seed):
    tower = truncation_tower(4)
    rng = np.random.default_rng(seed)
    a = random_triangular_tower_map(tower, rng)
    b = random_triangular_tower_map(tower, rng)
    assert tower_membership(a, tower)[0]
    assert tower_membership(tower_group_op(a, b), tower)[0]
    inverse = tower_group_op(a, op="invert")
    assert tower_membership(inverse, tower)[0]
    for i in tower.levels():
        np.testing.assert_allclose(tower_group_op(a, inverse).level(i), np.eye(2 * tower.dim(i)), atol=1e-10)


def test_restriction_lands_in_the_shallower_group(tower4, rng):
    element = random_triangular_tower_map(tower4, rng)
    restricted = restrict_tower_map(element, 2)
    assert restricted.depth == 2
    assert tower_membership(restricted, tower4.truncated(2))[0]
    with pytest.raises(ParameterError):
        restrict_tower_map(element, 5)


def test_limit_squares_commute(tower_fixture, rng):
    section = tower_fixture.tower
    trivs = tower_trivializations(section.gammas)
    for (j, i) in section.tower.pairs():
        jets = [random_level_jet(section.tower, j, rng) for _ in range(10)]
        assert limit_square_residual(trivs, section.tower, j, i, jets) < 1e-12
    with pytest.raises(ParameterError, match="no trivialization"):
        limit_square_residual(trivs[:2], section.tower, 3, 1, [])


def test_limit_connection_check(tower_fixture, rng):
    section = tower_fixture.tower
    assert limit_connection_check(section.gammas, section.tower, rng).passed


def test_non_equivariant_level_field_is_caught(rng):
    section = load_fixture("fault-tower-gamma").tower
    report = limit_connection_check(section.gammas, section.tower, rng)
    failed = {r.check_id for r in report.violations}
    assert "tower.christoffel-equivariance" in failed
    assert all("3" in r.location for r in report.violations)


def test_perturbed_level_field_breaks_the_limit_squares(rng):
    section = load_fixture("fault-tower-gamma").tower
    trivs = tower_trivializations(section.gammas)
    top_jets = [random_level_jet(section.tower, 4, rng) for _ in range(10)]
    assert limit_square_residual(trivs, section.tower, 4, 3, top_jets) > 1e-3
    low_jets = [random_level_jet(section.tower, 2, rng) for _ in range(10)]
    assert limit_square_residual(trivs, section.tower, 2, 1, low_jets) < 1e-12


def test_shear_transitions_act_through_h0(tower_fixture, rng):
    section = tower_fixture.tower
    forward, backward = shear_transitions(section.tower, section.shear)
    sheared = pushforward_tower_christoffel(section.gammas, forward, backward, "sheared")
    assert sheared.chart == "sheared"
    for _ in range(5):
        y = 0.5 * rng.normal(size=section.tower.dim(4))
        np.testing.assert_allclose(backward[3].value(forward[3].value(y)), y, atol=1e-12)
        element = tower_transition(section.gammas, sheared, forward, section.tower, y)
        member, residual = tower_membership(element, section.tower, tol=1e-10)
        assert member, residual


def test_levelwise_extraction_recovers_the_symmetric_fields(tower_fixture, rng):
    section = tower_fixture.tower
    extracted = extract_tower_christoffel(tower_trivializations(section.gammas), section.tower, rng)
    assert extracted.depth == section.tower.depth
    for i in section.tower.levels():
        n = section.tower.dim(i)
        symmetric = section.gammas.level(i).symmetrized()
        y, u, v = rng.normal(size=n), rng.normal(size=n), rng.normal(size=n)
        np.testing.assert_allclose(extracted.level(i)(y, u, v), symmetric(y, u, v), atol=1e-10)
    assert limit_connection_check(extracted, section.tower, rng).passed
