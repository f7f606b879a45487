"""
Order-2 Calculus Library

Smooth maps with exact first and second differential actions, the order-2
chain rule, a finite-difference oracle, and the fixture expression grammar.
"""

from calculus.smooth_map import (
    ModelSpace,
    SmoothMap2,
    eval_map2,
    compose_map2,
    random_polynomial_map,
)

from calculus.fd_check import (
    DerivativeCheckReport,
    fd_check,
)

from calculus.records import (
    CheckRecord,
    CheckReport,
)

__all__ = [
    'ModelSpace',
    'SmoothMap2',
    'eval_map2',
    'compose_map2',
    'random_polynomial_map',
    'DerivativeCheckReport',
    'fd_check',
    'CheckRecord',
    'CheckReport',
]
