"""Vectorized complex evaluation of expression trees.

Every variable is bound to a complex scalar or numpy array; the result has
the broadcast shape of the bindings. Principal branches are used for ``log``
and ``sqrt``; a sample lying exactly on the negative real axis takes the
limit from the upper half-plane.
"""
from __future__ import annotations

import cmath

import numpy as np

from ..errors import EvaluationError
from .nodes import BinOp, Call, Const, Expr, Neg, Num, Var

_CONST = {"i": 1j, "pi": cmath.pi, "e": cmath.e}
_MAX_INT_POWER = 1024


def _upper(z):
    # replace -0.0 imaginary parts by +0.0 so the branch cut is approached from above
    return np.where(z.imag == 0, z.real + 0j, z)


def _int_power(base, n):
    result = np.ones_like(base)
    square = base
    while n:
        if n & 1:
            result = result * square
        n >>= 1
        if n:
            square = square * square
    return result


def _power(base, exponent):
    flat = exponent.ravel()
    if flat.size and np.all(flat == flat[0]):
        w = complex(flat[0])
        if w.imag == 0 and w.real.is_integer() and abs(w.real) <= _MAX_INT_POWER:
            n = int(w.real)
            out = _int_power(base, abs(n))
            if n < 0:
                if np.any(out == 0):
                    raise EvaluationError("division by zero")
                out = 1 / out
            return np.broadcast_to(out, np.broadcast(base, exponent).shape).copy()
    base, exponent = np.broadcast_arrays(base, exponent)
    zero = base == 0
    if np.any(zero & (exponent.real <= 0)):
        raise EvaluationError("zero raised to a non-positive power")
    safe = np.where(zero, 1, base)
    out = np.exp(exponent * np.log(_upper(safe)))
    return np.where(zero, 0j, out)


def _call(func, a):
    if func == "exp":
        return np.exp(a)
    if func == "log":
        if np.any(a == 0):
            raise EvaluationError("log(0)")
        return np.log(_upper(a))
    if func == "sin":
        return np.sin(a)
    if func == "cos":
        return np.cos(a)
    if func == "sqrt":
        return np.sqrt(_upper(a))
    if func == "conj":
        return np.conj(a)
    if func == "re":
        return a.real + 0j
    if func == "im":
        return a.imag + 0j
    if func == "abs":
        return np.abs(a) + 0j
    raise EvaluationError(f"unknown function {func!r}")


def _eval(node, env):
    match node:
        case Num(value):
            return np.asarray(complex(value))
        case Const(name):
            return np.asarray(_CONST[name])
        case Var(name):
            try:
                return env[name]
            except KeyError:
                raise EvaluationError(f"unbound variable {name!r}") from None
        case Neg(arg):
            return -_eval(arg, env)
        case Call(func, arg):
            return _call(func, _eval(arg, env))
        case BinOp(op, left, right):
            a = _eval(left, env)
            b = _eval(right, env)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if np.any(b == 0):
                    raise EvaluationError("division by zero")
                return a / b
            return _power(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(expr: Expr, env=None, **bindings):
    """Evaluate ``expr``; returns a Python complex for scalar bindings."""
    env = dict(env or {}, **bindings)
    missing = [v for v in expr.variables if v not in env]
    if missing:
        raise EvaluationError(f"unbound variable {missing[0]!r}")
    arrays = {k: np.asarray(v, dtype=complex) for k, v in env.items()}
    shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    with np.errstate(all="ignore"):
        out = _eval(expr.root, arrays)
    out = np.broadcast_to(np.asarray(out, dtype=complex), shape)
    if out.ndim == 0:
        return complex(out)
    return np.array(out)


def compile_expr(expr: Expr):
    """Return ``f(*coords)`` binding positional arrays to the mode's variables."""
    names = expr.mode.variables

    def func(*coords):
        return evaluate(expr, dict(zip(names, coords)))

    func.expr = expr
    return func
