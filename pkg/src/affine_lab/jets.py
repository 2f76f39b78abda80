"""Truncated complex Taylor series (jets) of holomorphic expressions.

A jet of order K at ``z0`` stores ``c_n = f^(n)(z0) / n!`` for n = 0..K.
Real partials of the fields in ``W = A - iD`` and ``H = B + iC`` follow from
the Cauchy-Riemann relations: for holomorphic ``h``,
``d^a/ds^a d^b/dt^b h = i^b h^(a+b)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import kernels
from ._opcodes import OPCODES
from .errors import JetOrderError, PoleError, ValidationError
from .expr import HoloExpr

MAX_ORDER = 6


@dataclass(frozen=True)
class Jet:
    base: complex
    coeffs: np.ndarray

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, n):
        return factorial(n) * self.coeffs[n]

    def derivatives(self):
        return self.coeffs * _FACT[: len(self.coeffs)]


_FACT = np.array([float(factorial(n)) for n in range(40)])


@functools.lru_cache(maxsize=256)
def compile_tape(expr: HoloExpr, variable="z"):
    """Flatten ``expr`` into register instructions with common subexpressions shared."""
    ops, a0, a1, consts = [], [], [], []
    index = {}

    def visit(e):
        if e in index:
            return index[e]
        kids = [visit(c) for c in e.children]
        if e.kind == "var" and e.value != variable:
            raise ValidationError(f"unbound variable {e.value!r}")
        ops.append(OPCODES[e.kind])
        a0.append(kids[0] if kids else -1)
        a1.append(kids[1] if len(kids) > 1 else (e.value if e.kind == "pow" else -1))
        consts.append(e.value if e.kind == "const" else 0j)
        index[e] = len(ops) - 1
        return index[e]

    visit(expr)
    return (np.array(ops, dtype=np.int64), np.array(a0, dtype=np.int64),
            np.array(a1, dtype=np.int64), np.array(consts, dtype=np.complex128))


def eval_series(expr, z, order, backend=None):
    """Taylor coefficients of ``expr`` at every point of ``z``; shape ``(N, order+1)``.

    Raises :class:`PoleError` when a denominator constant term is below 1e-14
    at any point.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
    tape = compile_tape(expr)
    fn = kernels.eval_tape if backend is None else kernels.BACKENDS[backend]
    out, pole = fn(*tape, np.ascontiguousarray(z), int(order))
    if pole.any():
        bad = z[np.asarray(pole, dtype=bool)]
        raise PoleError(f"pole of {expr} near z = {bad[0]:.6g} ({int(np.count_nonzero(pole))} points)")
    return out


def eval_derivatives(expr, z, order, backend=None):
    """Complex derivatives ``f^(n)(z)`` for n = 0..order; shape ``(N, order+1)``."""
    return eval_series(expr, z, order, backend) * _FACT[: order + 1]


def eval_jet(expr, z0, order, max_order=MAX_ORDER):
    if order < 0:
        raise JetOrderError("order must be non-negative")
    if order > max_order:
        raise JetOrderError(f"order {order} exceeds maximum {max_order}")
    z0 = complex(z0)
    return Jet(z0, eval_series(expr, z0, order)[0])


@dataclass(frozen=True)
class RealPartials:
    """Partials ``F[a, b] = d^a/ds^a d^b/dt^b F`` of the four real fields.

    Entries with ``a + b > order`` are NaN.
    """
    order: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


def partial_table(derivs, order):
    """Map complex derivatives (last axis n) to ``h_{s^a t^b}`` tables, shape (..., K+1, K+1)."""
    derivs = np.asarray(derivs)
    shape = derivs.shape[:-1] + (order + 1, order + 1)
    out = np.full(shape, np.nan + 0j)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            out[..., a, b] = (1j ** b) * derivs[..., a + b]
    return out


def cr_partials(W_jet: Jet, H_jet: Jet, order):
    """Real partials of A, B, C, D from jets of ``W = A - iD`` and ``H = B + iC``."""
    if W_jet.base != H_jet.base:
        raise ValidationError("jets are not based at the same point")
    if order > min(W_jet.order, H_jet.order):
        raise JetOrderError("jets are too short for the requested partial order")
    Wp = partial_table(W_jet.derivatives()[: order + 1], order)
    Hp = partial_table(H_jet.derivatives()[: order + 1], order)
    return RealPartials(order, Wp.real, Hp.real, Hp.imag, -Wp.imag)
