"""Scalar-field expressions over chart coordinates with exact 2-jets.

``parse`` builds an immutable :class:`Expression`; ``eval_jet2`` returns the
value, gradient and Hessian at a point with parameters bound to constants.
The tape evaluator has a compiled core (Cython) and a pure-Python fallback;
whichever imports wins is reported by :func:`backend_name`.  Set
``NULLGEO_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import ExprSyntaxError, UnboundParameterError
from . import _pure
from .nodes import Node, Param, render
from .parser import parse_node
from .tape import Tape, compile_tape

if os.environ.get("NULLGEO_PURE"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure


def backend_name() -> str:
    return _impl.BACKEND


@dataclass
class Jet2:
    """Value with exact first and second derivatives w.r.t. the chart."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


@dataclass(frozen=True)
class Expression:
    root: Node
    free_coords: tuple[str, ...]   # full declared chart, in order
    param_names: tuple[str, ...]   # declared parameters, in order
    _tape: Tape = field(compare=False, repr=False)

    @property
    def free_params(self) -> frozenset[str]:
        """Parameter names actually mentioned in the expression."""
        found = set()

        def walk(node: Node) -> None:
            if isinstance(node, Param):
                found.add(node.name)
            for attr in ("arg", "left", "right", "base"):
                child = getattr(node, attr, None)
                if child is not None and not isinstance(child, (str, int, float)):
                    walk(child)

        walk(self.root)
        return frozenset(found)

    def render(self) -> str:
        return render(self.root)

    def bind(self, bindings: dict[str, float] | None) -> np.ndarray:
        bindings = bindings or {}
        out = np.zeros(max(len(self.param_names), 1))
        for j, name in enumerate(self.param_names):
            if name not in bindings:
                raise UnboundParameterError(name)
            out[j] = float(bindings[name])
        return out

    def jet(self, point, bindings=None, order: int = 2):
        point = np.asarray(point, dtype=np.float64)
        if point.shape != (len(self.free_coords),):
            raise ValueError(
                f"point has length {point.shape}, chart has {len(self.free_coords)} coordinates"
            )
        if isinstance(bindings, np.ndarray):
            params = bindings
        else:
            params = self.bind(bindings)
        return _impl.eval_tape(self._tape, point, params, order)


def parse(text: str, coords, params=()) -> Expression:
    """Parse ``text`` over the chart ``coords`` with named constants ``params``.

    Raises :class:`ExprSyntaxError` (with a 1-based offset) on malformed
    input and :class:`UnknownSymbolError` for undeclared identifiers.
    """
    coords = tuple(coords)
    params = tuple(params)
    names = list(coords) + list(params)
    if len(set(names)) != len(names):
        raise ExprSyntaxError("coordinate/parameter names must be distinct", 1)
    root = parse_node(text, {c: i for i, c in enumerate(coords)}, {p: i for i, p in enumerate(params)})
    tape = compile_tape(root, len(coords), len(params))
    return Expression(root=root, free_coords=coords, param_names=params, _tape=tape)


def eval_jet2(e: Expression, point, bindings: dict[str, float] | None = None) -> Jet2:
    """Evaluate with exact gradient and Hessian (the Hessian is symmetric to
    machine precision by construction)."""
    v, g, h = e.jet(point, bindings, order=2)
    return Jet2(value=v, grad=g, hess=h)


__all__ = [
    "Expression",
    "Jet2",
    "backend_name",
    "eval_jet2",
    "parse",
]
