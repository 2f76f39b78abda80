"""Pure-numpy tape evaluator (fallback for the compiled ``_kernels``).

Registers hold truncated Taylor series of shape ``(N, K+1)``: one row per
evaluation point, column ``k`` is the coefficient of ``(z - z0)**k``.
"""

import numpy as np

from ._opcodes import (OP_ADD, OP_CONST, OP_COS, OP_COSH, OP_DIV, OP_EXP,
                       OP_MUL, OP_NEG, OP_POW, OP_SIN, OP_SINH, OP_SUB, OP_VAR)

POLE_TOL = 1e-14


def _mul(a, b):
    K1 = a.shape[1]
    out = np.zeros_like(a)
    for k in range(K1):
        acc = a[:, 0] * b[:, k]
        for j in range(1, k + 1):
            acc = acc + a[:, j] * b[:, k - j]
        out[:, k] = acc
    return out


def _div(a, b, pole):
    b0 = b[:, 0]
    bad = np.abs(b0) < POLE_TOL
    pole |= bad
    b0 = np.where(bad, 1.0, b0)
    K1 = a.shape[1]
    out = np.zeros_like(a)
    for k in range(K1):
        acc = a[:, k].copy()
        for j in range(1, k + 1):
            acc -= b[:, j] * out[:, k - j]
        out[:, k] = acc / b0
    return out


def _exp(a):
    K1 = a.shape[1]
    out = np.zeros_like(a)
    out[:, 0] = np.exp(a[:, 0])
    for k in range(1, K1):
        acc = np.zeros(a.shape[0], dtype=complex)
        for j in range(1, k + 1):
            acc += j * a[:, j] * out[:, k - j]
        out[:, k] = acc / k
    return out


def _pair(a, f0, g0, sign):
    # f' = g a', g' = sign * f a'  (sin/cos: sign=-1, sinh/cosh: sign=+1)
    K1 = a.shape[1]
    f = np.zeros_like(a)
    g = np.zeros_like(a)
    f[:, 0] = f0
    g[:, 0] = g0
    for k in range(1, K1):
        sf = np.zeros(a.shape[0], dtype=complex)
        sg = np.zeros(a.shape[0], dtype=complex)
        for j in range(1, k + 1):
            sf += j * a[:, j] * g[:, k - j]
            sg += j * a[:, j] * f[:, k - j]
        f[:, k] = sf / k
        g[:, k] = sign * sg / k
    return f, g


def _pow(a, n, pole):
    m = abs(n)
    result = np.zeros_like(a)
    result[:, 0] = 1.0
    base = a
    while m:
        if m & 1:
            result = _mul(result, base)
        m >>= 1
        if m:
            base = _mul(base, base)
    if n < 0:
        one = np.zeros_like(a)
        one[:, 0] = 1.0
        result = _div(one, result, pole)
    return result


def eval_tape(ops, a0, a1, consts, z, order):
    """Evaluate a tape at every point of ``z``; returns ``(series, pole_mask)``."""
    z = np.ascontiguousarray(z, dtype=complex)
    N = z.shape[0]
    K1 = order + 1
    pole = np.zeros(N, dtype=bool)
    regs = []
    for r in range(len(ops)):
        op = ops[r]
        if op == OP_CONST:
            v = np.zeros((N, K1), dtype=complex)
            v[:, 0] = consts[r]
        elif op == OP_VAR:
            v = np.zeros((N, K1), dtype=complex)
            v[:, 0] = z
            if K1 > 1:
                v[:, 1] = 1.0
        elif op == OP_NEG:
            v = -regs[a0[r]]
        elif op == OP_ADD:
            v = regs[a0[r]] + regs[a1[r]]
        elif op == OP_SUB:
            v = regs[a0[r]] - regs[a1[r]]
        elif op == OP_MUL:
            v = _mul(regs[a0[r]], regs[a1[r]])
        elif op == OP_DIV:
            v = _div(regs[a0[r]], regs[a1[r]], pole)
        elif op == OP_POW:
            v = _pow(regs[a0[r]], int(a1[r]), pole)
        elif op == OP_EXP:
            v = _exp(regs[a0[r]])
        elif op in (OP_SIN, OP_COS):
            a = regs[a0[r]]
            s, c = _pair(a, np.sin(a[:, 0]), np.cos(a[:, 0]), -1.0)
            v = s if op == OP_SIN else c
        elif op in (OP_SINH, OP_COSH):
            a = regs[a0[r]]
            s, c = _pair(a, np.sinh(a[:, 0]), np.cosh(a[:, 0]), 1.0)
            v = s if op == OP_SINH else c
        else:
            raise ValueError(f"bad opcode {op}")
        regs.append(v)
    return regs[-1], pole
