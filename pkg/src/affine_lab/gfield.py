"""Reconstruction of the potential g from g_s = [x_s, c], g_t = [x_t, c].

g is normalised to vanish at the model's basepoint.  Integrals are taken
along straight segments with adaptive composite Gauss-Legendre quadrature
(16 nodes per panel, panels halved until two levels agree).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError, QuadratureError
from .surface import SurfaceModel, wedge, with_shift

NODES = 16
REL_TOL = 1e-12
MAX_LEVEL = 20

_gl_x, _gl_w = np.polynomial.legendre.leggauss(NODES)
_GL_X = 0.5 * (_gl_x + 1.0)
_GL_W = 0.5 * _gl_w


def g_gradient(model: SurfaceModel, s, t):
    """(g_s, g_t) at arrays of points."""
    fr = model.frames(s, t, 1)
    c = fr.cp[:, 0, 0]
    return wedge(fr.xp[:, 1, 0], c), wedge(fr.xp[:, 0, 1], c)


def _panel_sums(model, P, D, level):
    n_pan = 2 ** level
    u = ((np.arange(n_pan)[:, None] + _GL_X[None, :]) / n_pan).ravel()
    w = np.tile(_GL_W / n_pan, n_pan)
    pts = P[:, None, :] + u[None, :, None] * D[:, None, :]
    gs, gt = g_gradient(model, pts[..., 0].ravel(), pts[..., 1].ravel())
    f = gs.reshape(len(P), -1) * D[:, :1] + gt.reshape(len(P), -1) * D[:, 1:]
    return f @ w


def integrate_segments(model: SurfaceModel, starts, ends, rel_tol=REL_TOL, max_level=MAX_LEVEL):
    """Integral of dg along each straight segment ``starts[i] -> ends[i]``."""
    P = np.atleast_2d(np.asarray(starts, dtype=float))
    Q = np.atleast_2d(np.asarray(ends, dtype=float))
    P, Q = np.broadcast_arrays(P, Q)
    D = Q - P
    result = np.zeros(len(P))
    active = np.flatnonzero(np.any(D != 0, axis=1))
    if active.size == 0:
        return result
    prev = _panel_sums(model, P[active], D[active], 0)
    for level in range(1, max_level + 1):
        cur = _panel_sums(model, P[active], D[active], level)
        done = np.abs(cur - prev) < rel_tol * (1.0 + np.abs(cur))
        result[active[done]] = cur[done]
        active = active[~done]
        prev = cur[~done]
        if active.size == 0:
            return result
    raise QuadratureError(f"quadrature did not converge on {active.size} segment(s)")


@dataclass(frozen=True)
class PathSpec:
    """Integration path: ``kind`` is "L" (s first, then t), "segment" or "loop"."""
    kind: str
    points: tuple

    @classmethod
    def l_path(cls, start, end):
        return cls("L", (tuple(start), (end[0], start[1]), tuple(end)))

    @classmethod
    def segment(cls, start, end):
        return cls("segment", (tuple(start), tuple(end)))

    @classmethod
    def loop(cls, s0, s1, t0, t1):
        return cls("loop", ((s0, t0), (s1, t0), (s1, t1), (s0, t1), (s0, t0)))

    def legs(self):
        return list(zip(self.points[:-1], self.points[1:]))


def _check_path(model, path):
    pts = np.array(path.points, dtype=float)
    if not np.all(model.contains(pts[:, 0], pts[:, 1])):
        raise DomainError(f"{path.kind} path leaves the domain")


def default_path(model: SurfaceModel, target):
    """L-path from the basepoint; a straight segment when the corner leaves a rotated domain."""
    path = PathSpec.l_path(model.g_basepoint, target)
    if model.contains(*path.points[1]):
        return path
    return PathSpec.segment(model.g_basepoint, target)


def integrate_path(model: SurfaceModel, path: PathSpec):
    _check_path(model, path)
    legs = path.legs()
    starts = [a for a, _ in legs]
    ends = [b for _, b in legs]
    return float(np.sum(integrate_segments(model, starts, ends)))


def integrate_g(model: SurfaceModel, target, path: PathSpec | None = None):
    """g(target), with g(basepoint) = 0."""
    target = tuple(float(v) for v in target)
    if path is None:
        path = default_path(model, target)
    elif path.points[0] != model.g_basepoint or path.points[-1] != target:
        raise DomainError("path must run from the basepoint to the target")
    return integrate_path(model, path)


def integrate_g_many(model: SurfaceModel, s, t):
    """g at many points via L-paths, with one batched quadrature per leg."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = s.shape
    s = s.ravel()
    t = t.ravel()
    s0, t0 = model.g_basepoint
    if not np.all(model.contains(s, t)):
        raise DomainError("target outside the domain")
    corner_ok = model.contains(s, np.full_like(s, t0))
    out = np.empty(len(s))
    base = np.array([s0, t0])
    if corner_ok.any():
        tgt = np.column_stack([s[corner_ok], t[corner_ok]])
        corner = np.column_stack([tgt[:, 0], np.full(len(tgt), t0)])
        out[corner_ok] = (integrate_segments(model, base, corner)
                          + integrate_segments(model, corner, tgt))
    if (~corner_ok).any():
        tgt = np.column_stack([s[~corner_ok], t[~corner_ok]])
        out[~corner_ok] = integrate_segments(model, base, tgt)
    return out.reshape(shape)


def loop_residual(model: SurfaceModel, rect):
    """Closed integral of dg around ``rect = (s0, s1, t0, t1)``; vanishes for exact dg."""
    s0, s1, t0, t1 = rect
    return integrate_path(model, PathSpec.loop(s0, s1, t0, t1))


@dataclass(frozen=True)
class SurfacePoint3:
    position: tuple
    params: tuple


def eval_q(model: SurfaceModel, s, t):
    fr = model.frames(s, t, 1)
    if not model.contains(s, t):
        raise DomainError(f"point ({s}, {t}) lies outside the domain")
    x = fr.xp[0, 0, 0]
    g = integrate_g(model, (s, t))
    return SurfacePoint3((float(x[0]), float(x[1]), g), (float(s), float(t)))


def blaschke_metric(model: SurfaceModel, s, t):
    """xi-coefficients h_ab of q_ab in the frame {q_s, q_t, xi}, xi = (0, 0, 1).

    Needs delta != 0.  For an improper affine sphere h = -delta * I.
    """
    f = model.frames(s, t, 2)[0]
    if abs(f.delta) < 1e-12:
        raise DegenerateError("the frame {q_s, q_t, xi} is singular where delta = 0")
    c, c_s, c_t = f.c, f.cp[1, 0], f.cp[0, 1]
    J = f.jacobian
    g1 = np.array([wedge(f.x_s, c), wedge(f.x_t, c)])
    h = np.empty((2, 2))
    for (a, b), x_ab, c_b, x_a in (((0, 0), f.xp[2, 0], c_s, f.x_s), ((0, 1), f.xp[1, 1], c_t, f.x_s),
                                    ((1, 1), f.xp[0, 2], c_t, f.x_t)):
        g_ab = wedge(x_ab, c) + wedge(x_a, c_b)
        coef = np.linalg.solve(J, x_ab)
        h[a, b] = h[b, a] = g_ab - coef @ g1
    return h


def convexity_diagnostic(model: SurfaceModel, n=16, min_delta=1e-3):
    """Sign of det D^2 g(x) on grid points away from the singular set (reported, not enforced).

    D(g_x) = D(C, D) / D(s, t) * J^{-1}.
    """
    ss, tt = model.grid(n, n)
    inside = model.contains(ss, tt)
    fr = model.frames(ss[inside], tt[inside], 1)
    dets = []
    for i in range(len(fr)):
        f = fr[i]
        if abs(f.delta) < min_delta:
            continue
        # (C, D) = (c2, -c1)
        dCD = np.array([[f.cp[1, 0][1], f.cp[0, 1][1]], [-f.cp[1, 0][0], -f.cp[0, 1][0]]])
        hess = dCD @ np.linalg.inv(f.jacobian)
        dets.append(np.linalg.det(hess))
    dets = np.array(dets)
    if not len(dets):
        return {"samples": 0, "det_min": None, "det_max": None, "fixed_sign": None}
    return {"samples": int(len(dets)), "det_min": float(dets.min()), "det_max": float(dets.max()),
            "fixed_sign": bool(np.all(dets > 0) or np.all(dets < 0))}


def apply_constant_shift(model: SurfaceModel, k1, k2):
    """Add (k1, k2) to (C, D); g changes by k1*A + k2*B up to a constant."""
    return with_shift(model, k1, k2)


class PotentialCache:
    """Write-once map from parameter points to integrated g values.

    Entries are always produced by integration, never interpolated.  Filling
    the same key twice is harmless: the first stored value wins.
    """

    def __init__(self, model: SurfaceModel):
        self.model = model
        self._values = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._values)

    def get(self, s, t):
        key = (float(s), float(t))
        if key in self._values:
            return self._values[key]
        value = integrate_g(self.model, key)
        with self._lock:
            return self._values.setdefault(key, value)

    def fill(self, s, t):
        s = np.asarray(s, dtype=float).ravel()
        t = np.asarray(t, dtype=float).ravel()
        missing = [i for i in range(len(s)) if (s[i], t[i]) not in self._values]
        if missing:
            vals = integrate_g_many(self.model, s[missing], t[missing])
            with self._lock:
                for i, v in zip(missing, vals):
                    self._values.setdefault((s[i], t[i]), float(v))
        return np.array([self._values[(a, b)] for a, b in zip(s, t)])
