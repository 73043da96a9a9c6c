"""Expression tree nodes, variable modes and the canonical printer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "conj", "re", "im", "abs")
NON_ANALYTIC = frozenset({"conj", "re", "im", "abs"})
CONSTANTS = ("i", "pi", "e")


@dataclass(frozen=True)
class Mode:
    """Which variable names an expression may use.

    ``complex_variable`` is true only for the one-variable complex mode;
    every other mode binds real coordinates.
    """

    name: str
    variables: tuple[str, ...]
    complex_variable: bool = False

    def __str__(self):
        return self.name


Z = Mode("z", ("z",), complex_variable=True)
PLANAR = Mode("planar", ("x", "y"))
SPATIAL = Mode("spatial", ("x", "y", "z"))
# meridional half-plane of an axisymmetric flow: x runs along the axis and
# z is the distance from it
MERIDIONAL = Mode("meridional", ("x", "z"))

_NAMED = {m.name: m for m in (Z, PLANAR, SPATIAL, MERIDIONAL)}


def param(name: str) -> Mode:
    """Mode with a single real parameter (curve parameters, boundary graphs)."""
    return Mode(f"param:{name}", (name,))


def get_mode(mode: Mode | str) -> Mode:
    if isinstance(mode, Mode):
        return mode
    if mode in _NAMED:
        return _NAMED[mode]
    if mode.startswith("param:") and len(mode) > 6:
        return param(mode[6:])
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True, slots=True)
class Num:
    value: float


@dataclass(frozen=True, slots=True)
class Const:
    name: str


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, BinOp, Call]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_text(node: Node) -> str:
    """Print with the fewest parentheses that still reparse to the same tree."""
    match node:
        case Num(value):
            text = format_number(abs(value))
            return f"(-{text})" if value < 0 else text
        case Const(name) | Var(name):
            return name
        case Call(func, arg):
            return f"{func}({to_text(arg)})"
        case Neg(arg):
            inner = to_text(arg)
            if isinstance(arg, BinOp) and arg.op in _PREC:
                inner = f"({inner})"
            return "-" + inner
        case BinOp("^", left, right):
            base = to_text(left)
            if isinstance(left, (BinOp, Neg)) or (isinstance(left, Num) and left.value < 0):
                base = f"({base})"
            exponent = to_text(right)
            if isinstance(right, BinOp) and right.op in _PREC:
                exponent = f"({exponent})"
            return f"{base}^{exponent}"
        case BinOp(op, left, right):
            prec = _PREC[op]
            lhs = to_text(left)
            if isinstance(left, BinOp) and left.op in _PREC and _PREC[left.op] < prec:
                lhs = f"({lhs})"
            rhs = to_text(right)
            if isinstance(right, BinOp) and right.op in _PREC and _PREC[right.op] <= prec:
                rhs = f"({rhs})"
            return f"{lhs}{op}{rhs}"
    raise TypeError(f"not an expression node: {node!r}")


def variables_of(node: Node) -> frozenset[str]:
    match node:
        case Var(name):
            return frozenset({name})
        case Neg(arg) | Call(_, arg):
            return variables_of(arg)
        case BinOp(_, left, right):
            return variables_of(left) | variables_of(right)
    return frozenset()


def functions_of(node: Node) -> frozenset[str]:
    match node:
        case Call(func, arg):
            return functions_of(arg) | {func}
        case Neg(arg):
            return functions_of(arg)
        case BinOp(_, left, right):
            return functions_of(left) | functions_of(right)
    return frozenset()


def substitute(node: Node, mapping: dict[str, Node]) -> Node:
    match node:
        case Var(name) if name in mapping:
            return mapping[name]
        case Neg(arg):
            return Neg(substitute(arg, mapping))
        case Call(func, arg):
            return Call(func, substitute(arg, mapping))
        case BinOp(op, left, right):
            return BinOp(op, substitute(left, mapping), substitute(right, mapping))
    return node


@dataclass(frozen=True)
class Expr:
    """A parsed expression bound to a variable mode. Immutable and hashable."""

    root: Node
    mode: Mode

    def __str__(self):
        return to_text(self.root)

    def __repr__(self):
        return f"Expr({to_text(self.root)!r}, mode={self.mode.name})"

    @property
    def variables(self) -> frozenset[str]:
        return variables_of(self.root)

    def depends_on(self, var: str) -> bool:
        return var in variables_of(self.root)

    def is_constant(self) -> bool:
        return not variables_of(self.root)

    def __call__(self, **env):
        from .evaluate import evaluate

        return evaluate(self, env)

    def diff(self, var: str) -> "Expr":
        from .diff import symbolic_diff

        return symbolic_diff(self, var)

    def substitute(self, mapping: dict[str, "Expr | Node"], mode: Mode | str | None = None) -> "Expr":
        """Replace variables by sub-expressions; the result lives in ``mode``."""
        nodes = {k: (v.root if isinstance(v, Expr) else v) for k, v in mapping.items()}
        return Expr(substitute(self.root, nodes), get_mode(mode) if mode is not None else self.mode)

    def with_mode(self, mode: Mode | str) -> "Expr":
        mode = get_mode(mode)
        illegal = self.variables - set(mode.variables)
        if illegal:
            raise ValueError(f"variables {sorted(illegal)} not legal in mode {mode.name}")
        return Expr(self.root, mode)
