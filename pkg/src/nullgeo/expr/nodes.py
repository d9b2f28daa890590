"""AST node types for scalar-field expressions, plus rendering.

Nodes are immutable; structural equality is dataclass equality, and
``parse(render(e))`` reproduces ``e`` exactly (floats render via ``repr`` so
they round-trip bit-for-bit).
"""

from __future__ import annotations

from dataclasses import dataclass

UNARY_FUNCS = ("sin", "cos", "sqrt", "exp")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Coord:
    name: str
    index: int


@dataclass(frozen=True)
class Param:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Call:
    func: str  # one of UNARY_FUNCS
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    num: int  # exponent numerator (sign lives here)
    den: int  # exponent denominator, >= 1


Node = Num | Coord | Param | Neg | Call | Add | Sub | Mul | Div | Pow

# Precedence levels used for minimal parenthesisation when rendering.
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(node: Node) -> int:
    if isinstance(node, (Add, Sub)):
        return _PREC_ADD
    if isinstance(node, (Mul, Div)):
        return _PREC_MUL
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Pow):
        return _PREC_POW
    return _PREC_ATOM


def render(node: Node) -> str:
    """Render with canonical spacing and only the parentheses precedence needs."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Coord, Param)):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _PREC_NEG)
    if isinstance(node, Call):
        return f"{node.func}({render(node.arg)})"
    if isinstance(node, Add):
        return f"{_wrap(node.left, _PREC_ADD)} + {_wrap(node.right, _PREC_ADD + 1)}"
    if isinstance(node, Sub):
        return f"{_wrap(node.left, _PREC_ADD)} - {_wrap(node.right, _PREC_ADD + 1)}"
    if isinstance(node, Mul):
        return f"{_wrap(node.left, _PREC_MUL)}*{_wrap(node.right, _PREC_MUL + 1)}"
    if isinstance(node, Div):
        return f"{_wrap(node.left, _PREC_MUL)}/{_wrap(node.right, _PREC_MUL + 1)}"
    if isinstance(node, Pow):
        base = _wrap(node.base, _PREC_ATOM)
        if node.den == 1:
            exp = str(node.num) if node.num >= 0 else f"({node.num})"
        else:
            exp = f"({node.num}/{node.den})"
        return f"{base}^{exp}"
    raise TypeError(f"not an AST node: {node!r}")


def _wrap(node: Node, min_prec: int) -> str:
    text = render(node)
    if _prec(node) < min_prec:
        return f"({text})"
    return text
