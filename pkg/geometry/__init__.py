"""
Second-Order Tangent Bundle Geometry

Charts and 2-jets, linear connections in local form, the vector-bundle
trivializations of T2M a connection induces, and finite projective-limit
towers of all of these.
"""

from geometry.atlas import (
    Atlas,
    Chart,
    Curve2,
    Jet2,
    atlas_check,
    change_jet_chart,
    curve_to_jet,
    jets_equal,
    transition_map,
)

from geometry.connection import (
    ChristoffelField,
    LocalConnectionMap,
    compat_residual,
    metric_to_christoffel,
    pushforward_christoffel,
    vilms_local,
)

from geometry.t2bundle import (
    FiberPoint,
    TransitionOperator,
    Trivialization,
    cocycle_residual,
    extract_christoffel,
    tm_tm_isomorphism_check,
    transition_function,
    trivialize,
    untrivialize,
)

from geometry.prolim import (
    Tower,
    TowerChristoffel,
    TowerJet,
    TowerLinearMap,
    check_tower,
    limit_connection_check,
    limit_square_residual,
    project_jet,
    reconstruct_limit_jet,
    tower_group_op,
    tower_membership,
)

__all__ = [
    'Atlas',
    'Chart',
    'Curve2',
    'Jet2',
    'atlas_check',
    'change_jet_chart',
    'curve_to_jet',
    'jets_equal',
    'transition_map',
    'ChristoffelField',
    'LocalConnectionMap',
    'compat_residual',
    'metric_to_christoffel',
    'pushforward_christoffel',
    'vilms_local',
    'FiberPoint',
    'TransitionOperator',
    'Trivialization',
    'cocycle_residual',
    'extract_christoffel',
    'tm_tm_isomorphism_check',
    'transition_function',
    'trivialize',
    'untrivialize',
    'Tower',
    'TowerChristoffel',
    'TowerJet',
    'TowerLinearMap',
    'check_tower',
    'limit_connection_check',
    'limit_square_residual',
    'project_jet',
    'reconstruct_limit_jet',
    'tower_group_op',
    'tower_membership',
]
