"""Compile an AST into a flat stack program for the jet evaluators.

The tape is three parallel arrays (opcode, int argument, float argument) plus
the required stack depth.  Both the pure-Python and the compiled evaluator run
the same tape, so they agree instruction for instruction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nodes import Add, Call, Coord, Div, Mul, Neg, Node, Num, Param, Pow, Sub, render

OP_CONST = 0
OP_COORD = 1
OP_PARAM = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_NEG = 7
OP_SIN = 8
OP_COS = 9
OP_SQRT = 10
OP_EXP = 11
OP_POWI = 12
OP_POWR = 13

_FUNC_OPS = {"sin": OP_SIN, "cos": OP_COS, "sqrt": OP_SQRT, "exp": OP_EXP}


@dataclass
class Tape:
    ops: np.ndarray      # int32
    iargs: np.ndarray    # int32: coord/param index or integer exponent
    fargs: np.ndarray    # float64: constant or real exponent
    depth: int
    n_coords: int
    n_params: int
    nodes: list          # AST node per instruction, for error reporting

    def source_of(self, instr: int) -> str:
        return render(self.nodes[instr])


def compile_tape(root: Node, n_coords: int, n_params: int) -> Tape:
    ops: list[int] = []
    iargs: list[int] = []
    fargs: list[float] = []
    nodes: list[Node] = []
    max_depth = 0
    depth = 0

    def emit(op: int, node: Node, iarg: int = 0, farg: float = 0.0, pops: int = 0) -> None:
        nonlocal depth, max_depth
        ops.append(op)
        iargs.append(iarg)
        fargs.append(farg)
        nodes.append(node)
        depth += 1 - pops
        max_depth = max(max_depth, depth)

    def walk(node: Node) -> None:
        if isinstance(node, Num):
            emit(OP_CONST, node, farg=node.value)
        elif isinstance(node, Coord):
            emit(OP_COORD, node, iarg=node.index)
        elif isinstance(node, Param):
            emit(OP_PARAM, node, iarg=node.index)
        elif isinstance(node, Neg):
            walk(node.arg)
            emit(OP_NEG, node, pops=1)
        elif isinstance(node, Call):
            walk(node.arg)
            emit(_FUNC_OPS[node.func], node, pops=1)
        elif isinstance(node, (Add, Sub, Mul, Div)):
            walk(node.left)
            walk(node.right)
            op = {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}[type(node)]
            emit(op, node, pops=2)
        elif isinstance(node, Pow):
            walk(node.base)
            if node.den == 1:
                emit(OP_POWI, node, iarg=node.num, pops=1)
            else:
                emit(OP_POWR, node, farg=node.num / node.den, pops=1)
        else:
            raise TypeError(f"not an AST node: {node!r}")

    walk(root)
    return Tape(
        ops=np.asarray(ops, dtype=np.int32),
        iargs=np.asarray(iargs, dtype=np.int32),
        fargs=np.asarray(fargs, dtype=np.float64),
        depth=max_depth,
        n_coords=n_coords,
        n_params=n_params,
        nodes=nodes,
    )
