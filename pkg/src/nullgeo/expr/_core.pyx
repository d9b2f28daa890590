# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled jet evaluator.  Mirrors _pure.eval_tape instruction for
instruction; the arithmetic is ordered identically so the two backends agree
to the last bit on every op that maps to a single libm call."""

import numpy as np

cimport cython
from libc.math cimport cos, exp, isfinite, pow, sin, sqrt

from ..errors import EvalDomainError

from .tape import (
    OP_ADD, OP_CONST, OP_COORD, OP_COS, OP_DIV, OP_EXP, OP_MUL, OP_NEG,
    OP_PARAM, OP_POWI, OP_POWR, OP_SIN, OP_SQRT, OP_SUB,
)

BACKEND = "compiled"

cdef int C_CONST = OP_CONST
cdef int C_COORD = OP_COORD
cdef int C_PARAM = OP_PARAM
cdef int C_ADD = OP_ADD
cdef int C_SUB = OP_SUB
cdef int C_MUL = OP_MUL
cdef int C_DIV = OP_DIV
cdef int C_NEG = OP_NEG
cdef int C_SIN = OP_SIN
cdef int C_COS = OP_COS
cdef int C_SQRT = OP_SQRT
cdef int C_EXP = OP_EXP
cdef int C_POWI = OP_POWI
cdef int C_POWR = OP_POWR


def eval_tape(tape, point, params, int order):
    """Same contract as nullgeo.expr._pure.eval_tape."""
    cdef int n = tape.n_coords
    cdef int depth = tape.depth
    cdef const int[::1] ops = tape.ops
    cdef const int[::1] iargs = tape.iargs
    cdef const double[::1] fargs = tape.fargs
    cdef double[::1] pt = np.ascontiguousarray(point, dtype=np.float64)
    cdef double[::1] pr = np.ascontiguousarray(params, dtype=np.float64) \
        if tape.n_params > 0 else np.zeros(1)

    vals_arr = np.zeros(depth)
    grads_arr = np.zeros((depth, max(n, 1)))
    hess_arr = np.zeros((depth, max(n, 1), max(n, 1))) if order >= 2 \
        else np.zeros((1, 1, 1))
    cdef double[::1] vals = vals_arr
    cdef double[:, ::1] grads = grads_arr
    cdef double[:, :, ::1] hesses = hess_arr
    cdef double[::1] gtmp = np.zeros(max(n, 1))

    cdef int top = 0, k, op, a, b, i, j, p
    cdef int ninstr = ops.shape[0]
    cdef double va, vb, v, g, u, d1, d2, r

    for k in range(ninstr):
        op = ops[k]
        if op == C_CONST or op == C_COORD or op == C_PARAM:
            if op == C_CONST:
                vals[top] = fargs[k]
            elif op == C_COORD:
                vals[top] = pt[iargs[k]]
            else:
                vals[top] = pr[iargs[k]]
            if order >= 1:
                for i in range(n):
                    grads[top, i] = 0.0
                if op == C_COORD:
                    grads[top, iargs[k]] = 1.0
            if order >= 2:
                for i in range(n):
                    for j in range(n):
                        hesses[top, i, j] = 0.0
            top += 1
        elif op == C_ADD:
            a = top - 2
            b = top - 1
            vals[a] = vals[a] + vals[b]
            if order >= 1:
                for i in range(n):
                    grads[a, i] = grads[a, i] + grads[b, i]
            if order >= 2:
                for i in range(n):
                    for j in range(n):
                        hesses[a, i, j] = hesses[a, i, j] + hesses[b, i, j]
            top -= 1
        elif op == C_SUB:
            a = top - 2
            b = top - 1
            vals[a] = vals[a] - vals[b]
            if order >= 1:
                for i in range(n):
                    grads[a, i] = grads[a, i] - grads[b, i]
            if order >= 2:
                for i in range(n):
                    for j in range(n):
                        hesses[a, i, j] = hesses[a, i, j] - hesses[b, i, j]
            top -= 1
        elif op == C_MUL:
            a = top - 2
            b = top - 1
            va = vals[a]
            vb = vals[b]
            if order >= 2:
                # paired outer-product sum keeps the Hessian bitwise symmetric
                for i in range(n):
                    for j in range(n):
                        hesses[a, i, j] = (
                            (vb * hesses[a, i, j] + va * hesses[b, i, j])
                            + (grads[a, i] * grads[b, j] + grads[b, i] * grads[a, j])
                        )
            if order >= 1:
                for i in range(n):
                    grads[a, i] = vb * grads[a, i] + va * grads[b, i]
            vals[a] = va * vb
            top -= 1
        elif op == C_DIV:
            a = top - 2
            b = top - 1
            vb = vals[b]
            if vb == 0.0:
                raise EvalDomainError("division by zero", tape.source_of(k))
            v = vals[a] / vb
            if order >= 1:
                for i in range(n):
                    gtmp[i] = (grads[a, i] - v * grads[b, i]) / vb
                if order >= 2:
                    for i in range(n):
                        for j in range(n):
                            hesses[a, i, j] = (
                                hesses[a, i, j]
                                - (gtmp[i] * grads[b, j] + grads[b, i] * gtmp[j])
                                - v * hesses[b, i, j]
                            ) / vb
                for i in range(n):
                    grads[a, i] = gtmp[i]
            vals[a] = v
            top -= 1
        elif op == C_NEG:
            a = top - 1
            vals[a] = -vals[a]
            if order >= 1:
                for i in range(n):
                    grads[a, i] = -grads[a, i]
            if order >= 2:
                for i in range(n):
                    for j in range(n):
                        hesses[a, i, j] = -hesses[a, i, j]
        else:
            a = top - 1
            u = vals[a]
            if op == C_SIN:
                v = sin(u)
                d1 = cos(u)
                d2 = -sin(u)
            elif op == C_COS:
                v = cos(u)
                d1 = -sin(u)
                d2 = -cos(u)
            elif op == C_SQRT:
                if u <= 0.0:
                    raise EvalDomainError(
                        f"sqrt of non-positive value {u!r}", tape.source_of(k))
                v = sqrt(u)
                d1 = 0.5 / v
                d2 = -0.25 / (v * u)
            elif op == C_EXP:
                v = exp(u)
                d1 = v
                d2 = v
            elif op == C_POWI:
                p = iargs[k]
                if p == 0:
                    v = 1.0
                    d1 = 0.0
                    d2 = 0.0
                else:
                    if u == 0.0 and p < 0:
                        raise EvalDomainError(
                            "zero raised to a negative power", tape.source_of(k))
                    v = pow(u, <double> p)
                    d1 = p * pow(u, <double> (p - 1))
                    d2 = p * (p - 1) * pow(u, <double> (p - 2)) if p != 1 else 0.0
            elif op == C_POWR:
                r = fargs[k]
                if u <= 0.0:
                    raise EvalDomainError(
                        f"non-integer power of non-positive value {u!r}",
                        tape.source_of(k))
                v = pow(u, r)
                d1 = r * pow(u, r - 1.0)
                d2 = r * (r - 1.0) * pow(u, r - 2.0)
            else:
                raise AssertionError(f"bad opcode {op}")
            if order >= 2:
                for i in range(n):
                    for j in range(n):
                        hesses[a, i, j] = d1 * hesses[a, i, j] + d2 * (grads[a, i] * grads[a, j])
            if order >= 1:
                for i in range(n):
                    grads[a, i] = d1 * grads[a, i]
            vals[a] = v

    cdef double value = vals[0]
    if not isfinite(value):
        raise EvalDomainError(f"non-finite value {value!r}", tape.source_of(ninstr - 1))
    return (
        value,
        grads_arr[0].copy() if order >= 1 else None,
        hess_arr[0].copy() if order >= 2 else None,
    )
