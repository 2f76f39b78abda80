# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tape evaluator for truncated complex Taylor series.

Same contract as ``_kernels_py.eval_tape``; see that module for the layout.
"""

import numpy as np

cdef extern from "<complex.h>" nogil:
    double complex cexp(double complex)
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex csinh(double complex)
    double complex ccosh(double complex)
    double cabs(double complex)

cdef enum:
    MAXK = 32

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_NEG = 2
    OP_ADD = 3
    OP_SUB = 4
    OP_MUL = 5
    OP_DIV = 6
    OP_POW = 7
    OP_EXP = 8
    OP_SIN = 9
    OP_COS = 10
    OP_SINH = 11
    OP_COSH = 12

cdef double POLE_TOL = 1e-14


cdef inline void smul(double complex* a, double complex* b, double complex* out, int K1) noexcept nogil:
    cdef int k, j
    cdef double complex acc
    for k in range(K1):
        acc = 0
        for j in range(k + 1):
            acc = acc + a[j] * b[k - j]
        out[k] = acc


cdef inline int sdiv(double complex* a, double complex* b, double complex* out, int K1) noexcept nogil:
    cdef int k, j
    cdef double complex acc
    cdef double complex b0 = b[0]
    if cabs(b0) < POLE_TOL:
        for k in range(K1):
            out[k] = 0
        return 1
    for k in range(K1):
        acc = a[k]
        for j in range(1, k + 1):
            acc = acc - b[j] * out[k - j]
        out[k] = acc / b0
    return 0


cdef inline void spair(double complex* a, double complex* f, double complex* g,
                       double complex f0, double complex g0, double sign, int K1) noexcept nogil:
    cdef int k, j
    cdef double complex sf, sg
    f[0] = f0
    g[0] = g0
    for k in range(1, K1):
        sf = 0
        sg = 0
        for j in range(1, k + 1):
            sf = sf + j * a[j] * g[k - j]
            sg = sg + j * a[j] * f[k - j]
        f[k] = sf / k
        g[k] = sign * sg / k


def eval_tape(const long long[::1] ops, const long long[::1] a0, const long long[::1] a1,
              const double complex[::1] consts, const double complex[::1] z, int order):
    cdef Py_ssize_t n_ins = ops.shape[0]
    cdef Py_ssize_t N = z.shape[0]
    cdef int K1 = order + 1
    if K1 > MAXK:
        raise ValueError("series order too large for compiled kernel")
    regs_arr = np.zeros((n_ins, N, K1), dtype=np.complex128)
    pole_arr = np.zeros(N, dtype=np.uint8)
    cdef double complex[:, :, ::1] R = regs_arr
    cdef unsigned char[::1] pole = pole_arr
    cdef Py_ssize_t r, p
    cdef int k, m, n, op
    cdef double complex t1[MAXK]
    cdef double complex t2[MAXK]
    cdef double complex t3[MAXK]
    cdef double complex* a
    cdef double complex* b
    cdef double complex* out

    with nogil:
        for r in range(n_ins):
            op = <int>ops[r]
            for p in range(N):
                out = &R[r, p, 0]
                if op == OP_CONST:
                    out[0] = consts[r]
                elif op == OP_VAR:
                    out[0] = z[p]
                    if K1 > 1:
                        out[1] = 1.0
                elif op == OP_NEG:
                    a = &R[a0[r], p, 0]
                    for k in range(K1):
                        out[k] = -a[k]
                elif op == OP_ADD:
                    a = &R[a0[r], p, 0]
                    b = &R[a1[r], p, 0]
                    for k in range(K1):
                        out[k] = a[k] + b[k]
                elif op == OP_SUB:
                    a = &R[a0[r], p, 0]
                    b = &R[a1[r], p, 0]
                    for k in range(K1):
                        out[k] = a[k] - b[k]
                elif op == OP_MUL:
                    smul(&R[a0[r], p, 0], &R[a1[r], p, 0], out, K1)
                elif op == OP_DIV:
                    if sdiv(&R[a0[r], p, 0], &R[a1[r], p, 0], out, K1):
                        pole[p] = 1
                elif op == OP_POW:
                    a = &R[a0[r], p, 0]
                    n = <int>a1[r]
                    m = n if n >= 0 else -n
                    for k in range(K1):
                        t1[k] = 0      # result
                        t2[k] = a[k]   # running square
                    t1[0] = 1.0
                    while m:
                        if m & 1:
                            smul(t1, t2, t3, K1)
                            for k in range(K1):
                                t1[k] = t3[k]
                        m >>= 1
                        if m:
                            smul(t2, t2, t3, K1)
                            for k in range(K1):
                                t2[k] = t3[k]
                    if n < 0:
                        for k in range(K1):
                            t2[k] = 0
                        t2[0] = 1.0
                        if sdiv(t2, t1, out, K1):
                            pole[p] = 1
                    else:
                        for k in range(K1):
                            out[k] = t1[k]
                elif op == OP_EXP:
                    a = &R[a0[r], p, 0]
                    out[0] = cexp(a[0])
                    for k in range(1, K1):
                        t1[0] = 0
                        for m in range(1, k + 1):
                            t1[0] = t1[0] + m * a[m] * out[k - m]
                        out[k] = t1[0] / k
                elif op == OP_SIN or op == OP_COS:
                    a = &R[a0[r], p, 0]
                    spair(a, t1, t2, csin(a[0]), ccos(a[0]), -1.0, K1)
                    for k in range(K1):
                        out[k] = t1[k] if op == OP_SIN else t2[k]
                elif op == OP_SINH or op == OP_COSH:
                    a = &R[a0[r], p, 0]
                    spair(a, t1, t2, csinh(a[0]), ccosh(a[0]), 1.0, K1)
                    for k in range(K1):
                        out[k] = t1[k] if op == OP_SINH else t2[k]
    return regs_arr[n_ins - 1], pole_arr.astype(bool)
