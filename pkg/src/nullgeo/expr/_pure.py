"""Pure-Python jet evaluator (fallback when the compiled core is absent).

Propagates (value, gradient, Hessian) through the tape.  Symmetric Hessian
updates are written as ``outer(a, b) + outer(b, a)``, which is bitwise
symmetric because IEEE multiplication and addition commute.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EvalDomainError
from .tape import (
    OP_ADD,
    OP_CONST,
    OP_COORD,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_MUL,
    OP_NEG,
    OP_PARAM,
    OP_POWI,
    OP_POWR,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    Tape,
)

BACKEND = "pure"


def eval_tape(tape: Tape, point, params, order: int):
    """Run ``tape`` at ``point`` (length n_coords) with ``params`` bound.

    order 0: value only; 1: value+gradient; 2: value+gradient+Hessian.
    Returns (value, grad | None, hess | None).
    """
    n = tape.n_coords
    depth = tape.depth
    vals = np.zeros(depth)
    grads = np.zeros((depth, n)) if order >= 1 else None
    hesses = np.zeros((depth, n, n)) if order >= 2 else None
    top = 0  # next free slot

    ops = tape.ops
    iargs = tape.iargs
    fargs = tape.fargs

    for k in range(len(ops)):
        op = ops[k]
        if op == OP_CONST:
            vals[top] = fargs[k]
            if order >= 1:
                grads[top, :] = 0.0
            if order >= 2:
                hesses[top, :, :] = 0.0
            top += 1
        elif op == OP_COORD:
            vals[top] = point[iargs[k]]
            if order >= 1:
                grads[top, :] = 0.0
                grads[top, iargs[k]] = 1.0
            if order >= 2:
                hesses[top, :, :] = 0.0
            top += 1
        elif op == OP_PARAM:
            vals[top] = params[iargs[k]]
            if order >= 1:
                grads[top, :] = 0.0
            if order >= 2:
                hesses[top, :, :] = 0.0
            top += 1
        elif op == OP_ADD or op == OP_SUB:
            a, b = top - 2, top - 1
            if op == OP_ADD:
                vals[a] += vals[b]
                if order >= 1:
                    grads[a] += grads[b]
                if order >= 2:
                    hesses[a] += hesses[b]
            else:
                vals[a] -= vals[b]
                if order >= 1:
                    grads[a] -= grads[b]
                if order >= 2:
                    hesses[a] -= hesses[b]
            top -= 1
        elif op == OP_MUL:
            a, b = top - 2, top - 1
            va, vb = vals[a], vals[b]
            if order >= 2:
                # the two outer products are summed first: IEEE addition is
                # commutative, so the paired sum keeps the result bitwise
                # symmetric; folding them in one at a time would not
                hesses[a] = (vb * hesses[a] + va * hesses[b]) + (
                    np.outer(grads[a], grads[b]) + np.outer(grads[b], grads[a])
                )
            if order >= 1:
                grads[a] = vb * grads[a] + va * grads[b]
            vals[a] = va * vb
            top -= 1
        elif op == OP_DIV:
            a, b = top - 2, top - 1
            vb = vals[b]
            if vb == 0.0:
                raise EvalDomainError("division by zero", tape.source_of(k))
            v = vals[a] / vb
            if order >= 1:
                g = (grads[a] - v * grads[b]) / vb
                if order >= 2:
                    hesses[a] = (
                        hesses[a]
                        - (np.outer(g, grads[b]) + np.outer(grads[b], g))
                        - v * hesses[b]
                    ) / vb
                grads[a] = g
            vals[a] = v
            top -= 1
        elif op == OP_NEG:
            a = top - 1
            vals[a] = -vals[a]
            if order >= 1:
                grads[a] = -grads[a]
            if order >= 2:
                hesses[a] = -hesses[a]
        else:
            a = top - 1
            u = vals[a]
            if op == OP_SIN:
                v, d1, d2 = math.sin(u), math.cos(u), -math.sin(u)
            elif op == OP_COS:
                v, d1, d2 = math.cos(u), -math.sin(u), -math.cos(u)
            elif op == OP_SQRT:
                if u <= 0.0:
                    raise EvalDomainError(
                        f"sqrt of non-positive value {u!r}", tape.source_of(k)
                    )
                v = math.sqrt(u)
                d1 = 0.5 / v
                d2 = -0.25 / (v * u)
            elif op == OP_EXP:
                v = math.exp(u)
                d1 = v
                d2 = v
            elif op == OP_POWI:
                p = int(iargs[k])
                if p == 0:
                    v, d1, d2 = 1.0, 0.0, 0.0
                else:
                    if u == 0.0 and p < 0:
                        raise EvalDomainError(
                            "zero raised to a negative power", tape.source_of(k)
                        )
                    v = u ** p
                    d1 = p * (u ** (p - 1)) if p != 0 else 0.0
                    d2 = p * (p - 1) * (u ** (p - 2)) if p not in (0, 1) else 0.0
            elif op == OP_POWR:
                r = fargs[k]
                if u <= 0.0:
                    raise EvalDomainError(
                        f"non-integer power of non-positive value {u!r}",
                        tape.source_of(k),
                    )
                v = u ** r
                d1 = r * (u ** (r - 1.0))
                d2 = r * (r - 1.0) * (u ** (r - 2.0))
            else:
                raise AssertionError(f"bad opcode {op}")
            if order >= 2:
                hesses[a] = d1 * hesses[a] + d2 * np.outer(grads[a], grads[a])
            if order >= 1:
                grads[a] = d1 * grads[a]
            vals[a] = v

    value = vals[0]
    if not math.isfinite(value):
        raise EvalDomainError(f"non-finite value {value!r}", tape.source_of(len(ops) - 1))
    return (
        value,
        grads[0].copy() if order >= 1 else None,
        hesses[0].copy() if order >= 2 else None,
    )
