"""Planar map x = (A, B), conjugate map c = (-D, C) and the determinant delta.

A :class:`SurfaceModel` stores ``W = A - iD`` and ``H = B + iC`` as
holomorphic expressions, so that componentwise ``x + i c = (W, H)`` (before
the constant shift).  All partials come from complex derivatives of W and H.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from .errors import DegenerateError, DomainError, PoleError, ValidationError
from .expr import HoloExpr
from .jets import eval_derivatives, partial_table

log = logging.getLogger(__name__)

POLE_GRID = 64
DOMAIN_TOL = 1e-9


def wedge(u, v):
    """Determinant of the 2x2 matrix with columns u and v (broadcasts over leading axes)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass(frozen=True)
class Rect:
    s_min: float
    s_max: float
    t_min: float
    t_max: float

    def __post_init__(self):
        vals = (self.s_min, self.s_max, self.t_min, self.t_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("domain bounds must be finite")
        if not (self.s_min < self.s_max and self.t_min < self.t_max):
            raise ValidationError("domain rectangle is empty")

    @property
    def diameter(self):
        return math.hypot(self.s_max - self.s_min, self.t_max - self.t_min)

    def contains(self, s, t, tol=DOMAIN_TOL):
        pad = tol * max(1.0, self.diameter)
        s = np.asarray(s)
        t = np.asarray(t)
        return ((s >= self.s_min - pad) & (s <= self.s_max + pad)
                & (t >= self.t_min - pad) & (t <= self.t_max + pad))

    def corners(self):
        return [(self.s_min, self.t_min), (self.s_max, self.t_min),
                (self.s_max, self.t_max), (self.s_min, self.t_max)]


@dataclass(frozen=True)
class SurfaceModel:
    """Holomorphic data of a convex improper affine map.

    ``domain`` is expressed in the frame of the original scene; ``rotation``
    records the accumulated angle of :func:`rotate_domain`, so a model point
    ``z`` corresponds to the scene point ``exp(i*rotation) * z``.
    """
    W: HoloExpr
    H: HoloExpr
    domain: Rect
    shift: tuple = (0.0, 0.0)
    g_basepoint: tuple = (0.0, 0.0)
    rotation: float = 0.0
    name: str = ""
    screen_poles: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "shift", tuple(float(k) for k in self.shift))
        object.__setattr__(self, "g_basepoint", tuple(float(b) for b in self.g_basepoint))
        if not self.contains(*self.g_basepoint):
            raise DomainError(f"g basepoint {self.g_basepoint} lies outside the domain")
        if self.screen_poles:
            self._screen()

    def _screen(self):
        ss, tt = self.grid(POLE_GRID, POLE_GRID)
        inside = self.contains(ss, tt)
        z = (ss + 1j * tt)[inside]
        for label, e in (("W", self.W), ("H", self.H)):
            try:
                vals = eval_derivatives(e, z, 1)
            except PoleError as exc:
                raise PoleError(f"{label} has a pole in the domain: {exc}") from None
            if not np.all(np.isfinite(vals)):
                raise PoleError(f"{label} is not finite on the domain")
            for den in e.denominators():
                root = self._denominator_root(den, z)
                if root is not None:
                    raise PoleError(f"{label} has a pole in the domain near z = {root:.6g}")

    def _denominator_root(self, den, z, starts=8):
        """Zero of ``den`` inside the domain, polished by Newton from the smallest grid samples."""
        d = eval_derivatives(den, z, 0)[:, 0]
        for z0 in z[np.argsort(np.abs(d))[:starts]]:
            v = np.inf
            for _ in range(40):
                try:
                    v, dv = eval_derivatives(den, z0, 1)[0]
                except PoleError:
                    break
                if abs(v) < 1e-13 or dv == 0:
                    break
                z0 = z0 - v / dv
            if abs(v) < 1e-13 and self.contains(z0.real, z0.imag):
                return z0
        return None

    # geometry of the (possibly rotated) domain ------------------------------

    def to_scene(self, s, t):
        z = (np.asarray(s) + 1j * np.asarray(t)) * cmath.exp(1j * self.rotation)
        return z.real, z.imag

    def from_scene(self, s, t):
        z = (np.asarray(s) + 1j * np.asarray(t)) * cmath.exp(-1j * self.rotation)
        return z.real, z.imag

    def contains(self, s, t, tol=DOMAIN_TOL):
        return self.domain.contains(*self.to_scene(s, t), tol=tol)

    def bounding_box(self):
        pts = np.array([self.from_scene(*c) for c in self.domain.corners()])
        return Rect(pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max())

    def grid(self, ns, nt):
        box = self.bounding_box()
        s = np.linspace(box.s_min, box.s_max, ns)
        t = np.linspace(box.t_min, box.t_max, nt)
        return np.meshgrid(s, t, indexing="ij")

    # evaluation ------------------------------------------------------------

    def derivatives(self, s, t, order):
        """Complex derivatives of W and H, each of shape ``(N, order+1)``."""
        z = np.atleast_1d(np.asarray(s, dtype=float) + 1j * np.asarray(t, dtype=float)).ravel()
        return eval_derivatives(self.W, z, order), eval_derivatives(self.H, z, order)

    def frames(self, s, t, order=2):
        Wd, Hd = self.derivatives(s, t, order)
        return FrameBatch.from_derivatives(Wd, Hd, order, self.shift, s, t)

    def delta(self, s, t):
        """delta and its gradient on arrays (no domain check)."""
        s = np.asarray(s, dtype=float)
        Wd, Hd = self.derivatives(s, t, 2)
        d, ds, dt = _delta_first(Wd, Hd)
        return d.reshape(s.shape), ds.reshape(s.shape), dt.reshape(s.shape)

    def is_degenerate(self, n=8, tol=1e-14):
        ss, tt = self.grid(n, n)
        d = self.delta(ss, tt)[0]
        return bool(np.max(np.abs(d)) < tol)


def _delta_first(Wd, Hd):
    # delta = -Im(conj(W') H'); first partials by the product rule
    w1, w2 = Wd[:, 1], Wd[:, 2]
    h1, h2 = Hd[:, 1], Hd[:, 2]
    d = -np.imag(np.conj(w1) * h1)
    ds = -np.imag(np.conj(w2) * h1 + np.conj(w1) * h2)
    dt = -np.imag(np.conj(1j * w2) * h1 + np.conj(w1) * (1j * h2))
    return d, ds, dt


@dataclass
class FrameBatch:
    """x, c partial tables ``[N, a, b, component]`` and delta partials ``[N, a, b]``."""
    s: np.ndarray
    t: np.ndarray
    order: int
    xp: np.ndarray
    cp: np.ndarray
    dp: np.ndarray

    @classmethod
    def from_derivatives(cls, Wd, Hd, order, shift, s, t):
        Wp = partial_table(Wd, order)
        Hp = partial_table(Hd, order)
        xp = np.stack([Wp.real, Hp.real], axis=-1)
        cp = np.stack([Wp.imag, Hp.imag], axis=-1)
        k1, k2 = shift
        cp[:, 0, 0, 0] -= k2
        cp[:, 0, 0, 1] += k1
        return cls(np.atleast_1d(np.asarray(s, float)).ravel(),
                   np.atleast_1d(np.asarray(t, float)).ravel(),
                   order, xp, cp, delta_partials(xp, order))

    def __len__(self):
        return self.xp.shape[0]

    def __getitem__(self, i):
        return FrameJet(float(self.s[i]), float(self.t[i]), self.order,
                        self.xp[i], self.cp[i], self.dp[i])


def delta_partials(xp, order):
    """Partials of delta = [x_s, x_t] up to ``order - 1`` via the Leibniz rule."""
    n = xp.shape[0]
    K = order
    dp = np.full((n, K, K), np.nan)
    A = xp[..., 0]
    B = xp[..., 1]
    for a in range(K):
        for b in range(K - a):
            acc = np.zeros(n)
            for i in range(a + 1):
                for j in range(b + 1):
                    w = comb(a, i) * comb(b, j)
                    acc += w * (A[:, i + 1, j] * B[:, a - i, b - j + 1]
                                - A[:, i, j + 1] * B[:, a - i + 1, b - j])
            dp[:, a, b] = acc
    return dp


@dataclass
class FrameJet:
    """Local data at one parameter point.

    ``xp[a, b]`` is the 2-vector d^a/ds^a d^b/dt^b x; likewise ``cp`` for c;
    ``dp[a, b]`` is the corresponding partial of delta (``a + b < order``).
    """
    s: float
    t: float
    order: int
    xp: np.ndarray
    cp: np.ndarray
    dp: np.ndarray

    @property
    def point(self):
        return (self.s, self.t)

    @property
    def x(self):
        return self.xp[0, 0]

    @property
    def c(self):
        return self.cp[0, 0]

    @property
    def x_s(self):
        return self.xp[1, 0]

    @property
    def x_t(self):
        return self.xp[0, 1]

    @property
    def jacobian(self):
        """2x2 matrix with columns x_s and x_t."""
        return np.column_stack([self.x_s, self.x_t])

    @property
    def delta(self):
        return float(self.dp[0, 0])

    @property
    def grad_delta(self):
        return np.array([self.dp[1, 0], self.dp[0, 1]])


def eval_frame(model: SurfaceModel, s, t, order=2):
    if not model.contains(s, t):
        raise DomainError(f"point ({s}, {t}) lies outside the domain")
    if order < 1:
        raise ValidationError("frame order must be at least 1")
    return model.frames(s, t, order)[0]


def rotate_domain(model: SurfaceModel, theta):
    """Precompose W and H with z -> exp(i theta) z.

    The returned model describes the same surface; its parameter point z
    corresponds to ``exp(i theta) z`` of the input model.
    """
    if theta == 0:
        return model
    rot = HoloExpr.const(cmath.exp(1j * theta)) * HoloExpr.var("z")
    b = complex(*model.g_basepoint) * cmath.exp(-1j * theta)
    return replace(model, W=model.W.substitute("z", rot), H=model.H.substitute("z", rot),
                   g_basepoint=(b.real, b.imag), rotation=model.rotation + theta)


def with_shift(model: SurfaceModel, k1, k2):
    return replace(model, shift=(model.shift[0] + k1, model.shift[1] + k2), screen_poles=False)


def from_martinez(F: HoloExpr, G: HoloExpr, domain: Rect, **kwargs):
    """Model from the pair (F, G) with x = conj(F) + G and n = conj(F) - G.

    Componentwise A = F1 + G1, B = G2 - F2, C = F1 - G1, D = -G2 - F2, which is
    realised holomorphically by W = F + G and H = i (F - G).
    """
    model = SurfaceModel(F + G, HoloExpr.const(1j) * (F - G), domain, **kwargs)
    ss, tt = np.meshgrid(np.linspace(domain.s_min, domain.s_max, 5),
                         np.linspace(domain.t_min, domain.t_max, 5), indexing="ij")
    z = (ss + 1j * tt).ravel()
    f = eval_derivatives(F, z, 0)[:, 0]
    g = eval_derivatives(G, z, 0)[:, 0]
    fr = model.frames(ss.ravel(), tt.ravel(), 1)
    A, B = fr.xp[:, 0, 0, 0], fr.xp[:, 0, 0, 1]
    D, C = -(fr.cp[:, 0, 0, 0] + model.shift[1]), fr.cp[:, 0, 0, 1] - model.shift[0]
    resid = max(np.max(np.abs(A - (f.real + g.real))), np.max(np.abs(B - (g.imag - f.imag))),
                np.max(np.abs(C - (f.real - g.real))), np.max(np.abs(D - (-g.imag - f.imag))))
    if resid > 1e-10:
        raise ValidationError(f"F/G representation check failed (residual {resid:.3g})")
    if model.is_degenerate():
        log.warning("model built from (F, G) is degenerate: delta vanishes identically")
    return model


def kernel_direction(frame: FrameJet, reference=None):
    """Unit right-null vector k of the Jacobian [x_s x_t].

    Oriented to agree with ``reference`` when given; otherwise the first
    component is made non-negative (ties: second component non-negative).
    """
    J = frame.jacobian
    if np.linalg.norm(frame.x_s) < 1e-10 and np.linalg.norm(frame.x_t) < 1e-10:
        raise DegenerateError(f"Jacobian vanishes at {frame.point}")
    _, _, vt = np.linalg.svd(J)
    k = vt[-1]
    if reference is not None:
        if np.dot(k, reference) < 0:
            k = -k
    elif k[0] < 0 or (k[0] == 0 and k[1] < 0):
        k = -k
    return k
