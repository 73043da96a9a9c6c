import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoverify.errors import DifferentiationError, EvaluationError, ParseError
from holoverify.expr import Expr, evaluate, get_mode, is_analytic_syntax, parse, symbolic_diff, to_planar
from holoverify.expr.nodes import FUNCTIONS, BinOp, Call, Const, Neg, Num, Var


def ev(text, mode="z", **env):
    return complex(evaluate(parse(text, mode), **env))


# --------------------------------------------------------------------------- parsing


@pytest.mark.parametrize(
    "text, value",
    [
        ("1+2*i^2", -1),
        ("2^3^2", 512),
        ("-2^2", -4),
        ("(-2)^2", 4),
        ("2*3+4", 10),
        ("2*(3+4)", 14),
        ("8/2/2", 2),
        ("1-2-3", -4),
        ("2^-1", 0.5),
        ("-3*-2", 6),
        ("1.5e1", 15),
        (".5+0.25", 0.75),
        ("e", math.e),
        ("pi", math.pi),
    ],
)
def test_precedence(text, value):
    assert ev(text) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize(
    "text, offset",
    [("z+", 2), ("(z", 2), ("z)", 1), ("2**z", 2), ("", 0), ("exp z", 4), ("1+$", 2)],
)
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text, "z")
    assert info.value.offset == offset


def test_unknown_identifier_and_mode_errors():
    with pytest.raises(ParseError, match="unknown identifier"):
        parse("foo(z)", "z")
    with pytest.raises(ParseError, match="not legal"):
        parse("x+1", "z")
    with pytest.raises(ParseError, match="not legal"):
        parse("z*x", "planar")
    assert parse("x*y*z", "spatial").variables == {"x", "y", "z"}


def test_whitespace_is_insignificant():
    assert parse(" exp ( 2 * z ) ", "z") == parse("exp(2*z)", "z")


def test_identifiers_are_case_sensitive():
    with pytest.raises(ParseError):
        parse("Exp(z)", "z")


# --------------------------------------------------------------------------- evaluation


def test_eval_examples():
    assert ev("z^2", z=1 + 1j) == 2j
    assert abs(ev("exp(i*pi)") + 1) <= 1e-15
    with pytest.raises(EvaluationError, match="division by zero"):
        ev("1/z", z=0)
    with pytest.raises(EvaluationError):
        ev("log(z)", z=0)


def test_principal_branches_take_the_upper_limit_on_the_cut():
    assert ev("sqrt(z)", z=-4) == 2j
    assert ev("log(z)", z=-1) == pytest.approx(math.pi * 1j)
    assert ev("sqrt(z)", z=complex(-4, -0.0)) == 2j
    assert ev("log(z)", z=2) == pytest.approx(math.log(2))


def test_vectorized_evaluation_matches_scalar():
    e = parse("exp(z)/(z-3) + conj(z)*abs(z)", "z")
    pts = np.array([0.1 + 0.2j, -1 + 1j, 2.5 - 0.5j])
    vals = evaluate(e, z=pts)
    for p, v in zip(pts, vals):
        want = cmath.exp(p) / (p - 3) + p.conjugate() * abs(p)
        assert abs(v - want) <= 1e-14 * (1 + abs(want))


def test_unbound_variable():
    with pytest.raises(EvaluationError):
        evaluate(parse("x+y", "planar"), x=1.0)


def test_integer_powers_are_exact():
    assert ev("z^10", z=1 + 1j) == (1 + 1j) ** 10
    assert ev("z^-2", z=2) == 0.25


# --------------------------------------------------------------------------- differentiation


@pytest.mark.parametrize(
    "text, var, mode, expected",
    [("z^3", "z", "z", "3*z^2"), ("exp(2*z)", "z", "z", "2*exp(2*z)"), ("x^2*y", "x", "planar", "2*x*y")],
)
def test_symbolic_diff_examples(text, var, mode, expected):
    assert str(symbolic_diff(parse(text, mode), var)) == expected


def test_non_analytic_nodes_rejected_in_z_mode():
    for text in ("conj(z)", "re(z)", "im(z)*z", "abs(z)"):
        with pytest.raises(DifferentiationError):
            symbolic_diff(parse(text, "z"), "z")


def test_real_mode_conj_commutes_and_abs_is_rejected():
    d = symbolic_diff(parse("conj(x+i*y^2)", "planar"), "y")
    assert complex(evaluate(d, x=0.3, y=0.5)) == pytest.approx(-1j)
    with pytest.raises(DifferentiationError):
        symbolic_diff(parse("abs(x)", "planar"), "x")


def test_is_analytic_syntax():
    assert is_analytic_syntax(parse("exp(z)/(z-1)", "z"))
    assert not is_analytic_syntax(parse("conj(z)", "z"))
    assert not is_analytic_syntax(parse("abs(z)^2", "z"))
    assert not is_analytic_syntax(parse("conj(z)*z", "z"))


SMOOTH = [
    ("z^3 - 2*z", "z", "z"),
    ("exp(2*z)*sin(z)", "z", "z"),
    ("1/(z-3)", "z", "z"),
    ("log(z+4)", "z", "z"),
    ("sqrt(z+4)*cos(z)", "z", "z"),
    ("z^2.5", "z", "z"),
    ("2^z", "z", "z"),
    ("x^2*y - sin(x*y)", "x", "planar"),
    ("exp(x)/(1+y^2)", "y", "planar"),
    ("x*y*z + cos(z)^2", "z", "spatial"),
]
POINTS = [0.3 + 0.4j, 1.1 - 0.7j, -0.5 + 0.2j, 2.0 + 1.5j]


@pytest.mark.parametrize("text, var, mode", SMOOTH)
def test_symbolic_matches_central_difference(text, var, mode):
    e = parse(text, mode)
    d = symbolic_diff(e, var)
    for p in POINTS:
        if mode == "z":
            env = {"z": p}
        else:
            env = dict(zip(get_mode(mode).variables, (p.real, p.imag, 0.25)))
        h = 1e-6 * (1 + abs(env[var]))
        up, dn = dict(env), dict(env)
        up[var] += h
        dn[var] -= h
        fd = (complex(evaluate(e, **up)) - complex(evaluate(e, **dn))) / (2 * h)
        exact = complex(evaluate(d, **env))
        assert abs(exact - fd) <= 1e-6 * (1 + abs(exact))


def test_to_planar_splits_the_complex_variable():
    f = to_planar(parse("z^2", "z"))
    assert f.variables == {"x", "y"}
    assert complex(evaluate(f, x=1.0, y=1.0)) == 2j


# --------------------------------------------------------------------------- round trip


def _leaf(mode_vars):
    nums = st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Num)
    return st.one_of(nums, st.sampled_from(["i", "pi", "e"]).map(Const), st.sampled_from(mode_vars).map(Var))


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(FUNCTIONS), children).map(lambda t: Call(*t)),
    )


def trees(mode_vars):
    return st.recursive(_leaf(mode_vars), _extend, max_leaves=12)


@settings(max_examples=1000, deadline=None)
@given(trees(("z",)))
def test_round_trip_z_mode(tree):
    e = Expr(tree, get_mode("z"))
    assert parse(str(e), "z") == e


@settings(max_examples=200, deadline=None)
@given(trees(("x", "y", "z")))
def test_round_trip_spatial_mode(tree):
    e = Expr(tree, get_mode("spatial"))
    assert parse(str(e), "spatial") == e
