"""Symbolic partial derivatives.

Results are tidied by a handful of local rewrites (constant folding, 0/1
identities, numeric coefficients moved to the front); there is no general
simplifier.
"""
from __future__ import annotations

import math

from ..errors import DifferentiationError
from .nodes import NON_ANALYTIC, BinOp, Call, Const, Expr, Neg, Num, Var, functions_of, variables_of

ZERO = Num(0.0)
ONE = Num(1.0)


def _value(node):
    """Real value of a numeric literal (possibly negated), else None."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg) and isinstance(node.arg, Num):
        return -node.arg.value
    return None


def num(value: float):
    if not math.isfinite(value):
        raise DifferentiationError("constant folding produced a non-finite value")
    return Neg(Num(-value)) if value < 0 else Num(value + 0.0)


def neg(a):
    va = _value(a)
    if va is not None:
        return num(-va)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return num(va + vb)
    if va == 0:
        return b
    if vb == 0:
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return BinOp("+", a, b)


def sub(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return num(va - vb)
    if vb == 0:
        return a
    if va == 0:
        return neg(b)
    return BinOp("-", a, b)


def mul(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return num(va * vb)
    if va == 0 or vb == 0:
        return ZERO
    if va == 1:
        return b
    if vb == 1:
        return a
    if va == -1:
        return neg(b)
    if vb == -1:
        return neg(a)
    if vb is not None:
        a, b, va, vb = b, a, vb, va
    if va is not None and isinstance(b, BinOp) and b.op == "*" and _value(b.left) is not None:
        return mul(num(va * _value(b.left)), b.right)
    return BinOp("*", a, b)


def div(a, b):
    va, vb = _value(a), _value(b)
    if vb == 0:
        raise DifferentiationError("division by a literal zero")
    if va is not None and vb is not None:
        return num(va / vb)
    if va == 0:
        return ZERO
    if vb == 1:
        return a
    return BinOp("/", a, b)


def power(a, b):
    va, vb = _value(a), _value(b)
    if vb == 0:
        return ONE
    if vb == 1:
        return a
    if va is not None and vb is not None and (va > 0 or vb.is_integer()):
        try:
            return num(va ** vb)
        except (OverflowError, ZeroDivisionError):
            pass
    return BinOp("^", a, b)


def call(func, a):
    return Call(func, a)


def _d(node, var, complex_mode):
    match node:
        case Num() | Const():
            return ZERO
        case Var(name):
            return ONE if name == var else ZERO
    if var not in variables_of(node):
        return ZERO
    match node:
        case Neg(arg):
            return neg(_d(arg, var, complex_mode))
        case BinOp("+", a, b):
            return add(_d(a, var, complex_mode), _d(b, var, complex_mode))
        case BinOp("-", a, b):
            return sub(_d(a, var, complex_mode), _d(b, var, complex_mode))
        case BinOp("*", a, b):
            return add(mul(_d(a, var, complex_mode), b), mul(a, _d(b, var, complex_mode)))
        case BinOp("/", a, b):
            da, db = _d(a, var, complex_mode), _d(b, var, complex_mode)
            if _value(db) == 0:
                return div(da, b)
            return div(sub(mul(da, b), mul(a, db)), power(b, num(2)))
        case BinOp("^", a, b):
            da = _d(a, var, complex_mode)
            if var not in variables_of(b):
                return mul(mul(b, power(a, sub(b, ONE))), da)
            db = _d(b, var, complex_mode)
            if var not in variables_of(a):
                return mul(mul(node, call("log", a)), db)
            return mul(node, add(mul(db, call("log", a)), div(mul(b, da), a)))
        case Call(func, a):
            da = _d(a, var, complex_mode)
            if func == "exp":
                return mul(da, node)
            if func == "log":
                return div(da, a)
            if func == "sin":
                return mul(da, call("cos", a))
            if func == "cos":
                return neg(mul(da, call("sin", a)))
            if func == "sqrt":
                return div(da, mul(num(2), node))
            if func == "abs":
                raise DifferentiationError("abs is not differentiable")
            if complex_mode:
                raise DifferentiationError(f"{func} is not complex-differentiable")
            # real coordinates: conj, re and im commute with the partial derivative
            return call(func, da)
    raise TypeError(f"not an expression node: {node!r}")


def symbolic_diff(e: Expr, var: str) -> Expr:
    """Partial derivative of ``e`` with respect to ``var``.

    >>> from holoverify.expr import parse
    >>> str(symbolic_diff(parse("z^3", "z"), "z"))
    '3*z^2'
    """
    if var not in e.mode.variables:
        raise DifferentiationError(f"variable {var!r} is not legal in mode {e.mode.name}")
    return Expr(_d(e.root, var, e.mode.complex_variable), e.mode)


def is_analytic_syntax(e: Expr) -> bool:
    """True iff the tree has no conj/re/im/abs node. Says nothing about poles."""
    return not (functions_of(e.root) & NON_ANALYTIC)
