"""
Small arithmetic expression grammar for fixtures.

Expressions use ``+ - * / ^`` (``**`` also accepted), parentheses, numeric
literals, ``pi``, the functions ``sin cos tan exp log sqrt atan2`` and the
variables declared by the caller (``y1 ... yn`` for maps, additionally
``u1 ... un`` and ``v1 ... vn`` for Christoffel components). Parsing goes
through sympy; evaluation goes through ``sympy.lambdify`` onto the
hyper-dual namespace, so the same compiled function propagates order-2
data or evaluates plain floats.
"""
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from calculus.errors import FixtureError
from calculus.hyperdual import PROPAGATION_NAMESPACE
from calculus.smooth_map import SmoothMap2, everywhere

logger = logging.getLogger(__name__)

ALLOWED_FUNCTIONS = frozenset({"sin", "cos", "tan", "exp", "log", "sqrt", "atan2"})
_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_PARSER_GLOBALS = {
    "Integer": sp.Integer,
    "Float": sp.Float,
    "Rational": sp.Rational,
    "Symbol": sp.Symbol,
    "Function": sp.Function,
}


def variable_names(prefix: str, dim: int) -> List[str]:
    return [f"{prefix}{k}" for k in range(1, dim + 1)]


def parse_expression(text: str, variables: Sequence[str], where: Optional[str] = None) -> sp.Expr:
    """
    Parse one expression, allowing only the declared variables and functions.

    Args:
        text: Expression source
        variables: Names the expression may use
        where: Fixture table and key the expression came from, prefixed to errors

    Raises:
        FixtureError: On syntax errors, unknown names or unknown functions
    """
    prefix = f"{where}: " if where else ""
    symbols = {name: sp.Symbol(name) for name in variables}
    local_dict = dict(symbols)
    local_dict.update({name: getattr(sp, name) for name in ALLOWED_FUNCTIONS})
    local_dict["pi"] = sp.pi
    try:
        expr = parse_expr(str(text), local_dict=local_dict, global_dict=_PARSER_GLOBALS,
                          transformations=_TRANSFORMATIONS, evaluate=True)
    except Exception as e:  # tokenizer and eval errors surface as assorted types
        raise FixtureError(f"{prefix}cannot parse expression {text!r}: {e}") from e
    if not isinstance(expr, sp.Expr):
        raise FixtureError(f"{prefix}expression {text!r} did not evaluate to a formula")
    unknown = {s.name for s in expr.free_symbols} - set(variables)
    if unknown:
        raise FixtureError(f"{prefix}expression {text!r} uses undeclared variables {sorted(unknown)}")
    functions = {type(f).__name__ for f in expr.atoms(sp.Function)}
    bad = functions - ALLOWED_FUNCTIONS
    if bad:
        raise FixtureError(f"{prefix}expression {text!r} uses unsupported functions {sorted(bad)}")
    return expr


def compile_expressions(texts: Sequence[str], variables: Sequence[str],
                        where: Optional[str] = None) -> Callable[..., List]:
    """
    Compile a list of expressions into ``f(*values) -> list``.

    The values may be floats or ``HyperDual`` numbers. Errors name the entry
    as ``where[index]``.
    """
    exprs = [parse_expression(t, variables, f"{where}[{i}]" if where else None) for i, t in enumerate(texts)]
    symbols = [sp.Symbol(name) for name in variables]
    fn = sp.lambdify(symbols, exprs, modules=[PROPAGATION_NAMESPACE])
    logger.debug(f"compiled {len(exprs)} expressions over {list(variables)}")

    def compiled(*values):
        return list(fn(*values))

    return compiled


def compile_predicate(texts: Sequence[str], dim: int,
                      where: Optional[str] = None) -> Callable[[np.ndarray], bool]:
    """
    Open-set membership test: every expression must be strictly positive.

    An empty list describes the whole model space.
    """
    if not texts:
        return everywhere
    fn = compile_expressions(texts, variable_names("y", dim), where)

    def contains(y: np.ndarray) -> bool:
        try:
            return all(float(value) > 0.0 for value in fn(*[float(c) for c in y]))
        except (ZeroDivisionError, ValueError, FloatingPointError):
            return False

    return contains


def map_from_expressions(texts: Sequence[str], domain_dim: int,
                         contains: Callable[[np.ndarray], bool] = everywhere,
                         name: str = "map", source=None, target=None,
                         where: Optional[str] = None) -> SmoothMap2:
    """Build an order-2 propagation map from component expressions in ``y1 ... yn``."""
    fn = compile_expressions(texts, variable_names("y", domain_dim), where)
    return SmoothMap2.from_propagation(lambda xs: fn(*xs), domain_dim, len(texts),
                                       contains=contains, name=name, source=source, target=target)
