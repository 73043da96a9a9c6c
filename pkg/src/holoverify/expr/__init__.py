"""Expression language: parse, evaluate and differentiate user functions."""
from .diff import is_analytic_syntax, symbolic_diff
from .evaluate import compile_expr, evaluate
from .nodes import MERIDIONAL, PLANAR, SPATIAL, Z, Expr, Mode, get_mode, param
from .parser import parse

__all__ = [
    "Expr",
    "Mode",
    "Z",
    "PLANAR",
    "SPATIAL",
    "MERIDIONAL",
    "param",
    "get_mode",
    "parse",
    "evaluate",
    "compile_expr",
    "symbolic_diff",
    "is_analytic_syntax",
    "to_planar",
]


def to_planar(f: Expr, mode=PLANAR) -> Expr:
    """Rewrite a z-mode expression in real coordinates, z -> x + i*second.

    ``mode`` picks the real pair: planar (x, y) or meridional (x, z).
    """
    from .nodes import BinOp, Const, Var

    mode = get_mode(mode)
    if not f.mode.complex_variable:
        return f
    first, second = mode.variables
    return f.substitute({"z": BinOp("+", Var(first), BinOp("*", Const("i"), Var(second)))}, mode)
