"""
Fixture verification harness.

Loads fixture manifolds from TOML files and runs the calculus, atlas,
connection, bundle and tower suites on them.
"""

from verifier.fixtures import (
    FixtureSpec,
    TowerSpec,
    list_fixtures,
    load_fixture,
)

from verifier.suites import (
    SuiteReport,
    applicable_suites,
    run_suite,
)

__all__ = [
    'FixtureSpec',
    'TowerSpec',
    'list_fixtures',
    'load_fixture',
    'SuiteReport',
    'applicable_suites',
    'run_suite',
]
