"""Tracing and planar classification of the singular set delta = 0.

Cusps of x(S) are detected with a chart-free test: the kernel direction k of
the Jacobian [x_s x_t] becomes tangent to S, i.e. phi = [k, T] changes sign
along the curve, where T is the unit tangent (-delta_t, delta_s)/|grad delta|.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, ValidationError
from .surface import FrameJet, SurfaceModel, kernel_direction, wedge

log = logging.getLogger(__name__)

REGULAR_IMAGE = "regular_image"
ORDINARY_CUSP = "ordinary_cusp"
DEGENERATE = "degenerate"

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 30
GRAD_TOL = 1e-8
PHI_TOL = 1e-6
ROOT_TOL = 1e-10
DPHI_TOL = 1e-6
SAMPLES = 512


@dataclass
class SingularPoint:
    s: float
    t: float
    x: np.ndarray
    k: np.ndarray
    T: np.ndarray
    phi: float
    delta: float
    grad: np.ndarray
    sigma: float = 0.0
    planar_class: str | None = None
    is_root: bool = False
    dphi: float | None = None
    flags: list = field(default_factory=list)

    @property
    def point(self):
        return (self.s, self.t)

    @property
    def kernel_derivative(self):
        """Directional derivative of delta along the kernel direction."""
        return float(np.dot(self.grad, self.k))


@dataclass
class SingularCurve:
    points: list
    closed: bool
    length: float
    model: SurfaceModel = field(repr=False)

    @property
    def arclength(self):
        return np.array([p.sigma for p in self.points])

    @property
    def params(self):
        return np.array([p.point for p in self.points])

    @property
    def cusps(self):
        return [p for p in self.points if p.planar_class == ORDINARY_CUSP]

    def __len__(self):
        return len(self.points)


# ---------------------------------------------------------------------------
# projection onto delta = 0


def project(model: SurfaceModel, s, t, tol=NEWTON_TOL, max_iter=NEWTON_MAXITER):
    """Newton projection of points onto delta = 0 along grad delta.

    Returns ``(s, t, ok)``; ``ok`` is False where the iteration failed.
    """
    s = np.array(s, dtype=float, ndmin=1)
    t = np.array(t, dtype=float, ndmin=1)
    ok = np.zeros(len(s), dtype=bool)
    active = np.arange(len(s))
    for _ in range(max_iter + 1):
        d, ds, dt = model.delta(s[active], t[active])
        conv = np.abs(d) < tol
        ok[active[conv]] = True
        g2 = ds * ds + dt * dt
        bad = ~conv & ~(g2 > 1e-30)
        step = ~conv & ~bad
        idx = active[step]
        s[idx] -= d[step] * ds[step] / g2[step]
        t[idx] -= d[step] * dt[step] / g2[step]
        active = idx
        if active.size == 0:
            break
    ok &= np.isfinite(s) & np.isfinite(t)
    return s, t, ok


def project_point(model, s, t):
    s1, t1, ok = project(model, [s], [t])
    if not ok[0]:
        raise ConvergenceError(f"Newton projection onto delta=0 failed from ({s}, {t})")
    return float(s1[0]), float(t1[0])


# ---------------------------------------------------------------------------
# marching squares


def _crossings(model, ns, nt):
    S, T = model.grid(ns, nt)
    inside = model.contains(S, T)
    D = np.full(S.shape, np.nan)
    D[inside] = model.delta(S[inside], T[inside])[0]
    pos = D >= 0
    nodes = {}

    def edge(i0, j0, i1, j1, key):
        if not (inside[i0, j0] and inside[i1, j1]) or pos[i0, j0] == pos[i1, j1]:
            return None
        if key not in nodes:
            d0, d1 = D[i0, j0], D[i1, j1]
            u = d0 / (d0 - d1)
            nodes[key] = ((1 - u) * S[i0, j0] + u * S[i1, j1], (1 - u) * T[i0, j0] + u * T[i1, j1])
        return key

    links = {}

    def link(a, b):
        links.setdefault(a, []).append(b)
        links.setdefault(b, []).append(a)

    for i in range(ns - 1):
        for j in range(nt - 1):
            if not (inside[i, j] and inside[i + 1, j] and inside[i + 1, j + 1] and inside[i, j + 1]):
                continue
            corners = (pos[i, j], pos[i + 1, j], pos[i + 1, j + 1], pos[i, j + 1])
            if all(corners) or not any(corners):
                continue
            bottom = edge(i, j, i + 1, j, ("h", i, j))
            right = edge(i + 1, j, i + 1, j + 1, ("v", i + 1, j))
            top = edge(i, j + 1, i + 1, j + 1, ("h", i, j + 1))
            left = edge(i, j, i, j + 1, ("v", i, j))
            crossed = [e for e in (bottom, right, top, left) if e is not None]
            if len(crossed) == 2:
                link(*crossed)
            elif len(crossed) == 4:
                sc = 0.5 * (S[i, j] + S[i + 1, j])
                tc = 0.5 * (T[i, j] + T[i, j + 1])
                center_pos = model.delta(np.array([sc]), np.array([tc]))[0][0] >= 0
                if center_pos == corners[0]:
                    link(bottom, right)
                    link(top, left)
                else:
                    link(left, bottom)
                    link(right, top)
    return nodes, links


def _chains(nodes, links):
    seen = set()
    chains = []
    ends = sorted(k for k, v in links.items() if len(v) == 1)
    for start in ends + sorted(links):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in links[cur] if n != prev and n not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)
        closed = len(chain) > 2 and chain[0] in links[chain[-1]]
        chains.append(([nodes[k] for k in chain], closed))
    return chains


def _arclength(P, closed):
    seg = np.linalg.norm(np.diff(P, axis=0), axis=1)
    sig = np.concatenate([[0.0], np.cumsum(seg)])
    total = sig[-1] + (np.linalg.norm(P[0] - P[-1]) if closed else 0.0)
    return sig, total


def _resample(P, closed, n):
    if closed:
        P = np.vstack([P, P[:1]])
    sig, _ = _arclength(P, False)
    total = sig[-1]
    if closed:
        targets = np.arange(n) * total / n
    else:
        targets = np.linspace(0.0, total, n)
    return np.column_stack([np.interp(targets, sig, P[:, 0]), np.interp(targets, sig, P[:, 1])])


def _split_degenerate(P, grad_norm):
    pieces = []
    cur = []
    for p, g in zip(P, grad_norm):
        if g < GRAD_TOL:
            if len(cur) > 1:
                pieces.append(np.array(cur))
            cur = []
        else:
            cur.append(p)
    if len(cur) > 1:
        pieces.append(np.array(cur))
    return pieces


def _build_points(model, P, kref=None, Tref=None):
    fr = model.frames(P[:, 0], P[:, 1], 2)
    pts = []
    for i in range(len(fr)):
        f = fr[i]
        pts.append(_make_point(f, kref, Tref))
        kref, Tref = pts[-1].k, pts[-1].T
    return pts


def _make_point(f: FrameJet, kref=None, Tref=None):
    grad = f.grad_delta
    gn = np.linalg.norm(grad)
    T = np.array([-grad[1], grad[0]]) / gn if gn > 0 else np.zeros(2)
    if Tref is not None and np.dot(T, Tref) < 0:
        T = -T
    k = kernel_direction(f, kref)
    return SingularPoint(f.s, f.t, f.x.copy(), k, T, float(wedge(k, T)), f.delta, grad)


def _assign_sigma(points, closed):
    P = np.array([p.point for p in points])
    sig, total = _arclength(P, closed)
    for p, sg in zip(points, sig):
        p.sigma = float(sg)
    return total


def trace_singular_set(model: SurfaceModel, grid=(64, 64), samples=SAMPLES):
    """Singular curves of ``model`` as a list of :class:`SingularCurve`."""
    ns, nt = grid
    if ns < 16 or nt < 16:
        raise ValidationError("tracing grid must be at least 16x16")
    nodes, links = _crossings(model, ns, nt)
    curves = []
    for seeds, closed in _chains(nodes, links):
        P = np.array(seeds)
        s, t, ok = project(model, P[:, 0], P[:, 1])
        if not ok.all():
            log.info("dropping %d seed(s) where Newton projection failed", int((~ok).sum()))
        P = np.column_stack([s, t])[ok]
        keep = model.contains(P[:, 0], P[:, 1])
        P = P[keep]
        if len(P) < 2:
            continue
        gn = np.hypot(*model.delta(P[:, 0], P[:, 1])[1:])
        pieces = _split_degenerate(P, gn)
        if len(pieces) != 1 or len(pieces[0]) != len(P):
            closed = False
        for piece in pieces:
            R = _resample(piece, closed, samples)
            s, t, ok = project(model, R[:, 0], R[:, 1])
            ok &= model.contains(s, t)
            if not ok.all():
                log.info("dropping %d resampled point(s)", int((~ok).sum()))
            R = np.column_stack([s, t])[ok]
            if len(R) < 2:
                continue
            points = _build_points(model, R)
            length = _assign_sigma(points, closed)
            curves.append(SingularCurve(points, closed, length, model))
    return curves


# ---------------------------------------------------------------------------
# classification


class _CurveWalker:
    """Evaluate points on the curve at arbitrary arclength by projecting chords."""

    def __init__(self, curve: SingularCurve):
        self.curve = curve
        self.model = curve.model
        self.sig = curve.arclength
        self.P = curve.params

    def interval(self, sigma):
        n = len(self.sig)
        if self.curve.closed:
            sigma = sigma % self.curve.length
        sigma = min(max(sigma, 0.0), self.sig[-1] if not self.curve.closed else self.curve.length)
        i = int(np.searchsorted(self.sig, sigma, side="right") - 1)
        i = min(max(i, 0), n - 1)
        j = (i + 1) % n
        if not self.curve.closed and i == n - 1:
            i, j = n - 2, n - 1
        end = self.sig[j] if j > i else self.curve.length
        u = (sigma - self.sig[i]) / (end - self.sig[i])
        return i, j, u

    def at(self, i, j, u, kref, Tref):
        p = (1 - u) * self.P[i] + u * self.P[j]
        s, t = project_point(self.model, p[0], p[1])
        f = self.model.frames(s, t, 2)[0]
        return _make_point(f, kref, Tref)

    def at_sigma(self, sigma, kref, Tref):
        i, j, u = self.interval(sigma)
        return self.at(i, j, u, kref, Tref)


def _bisect(walker, i, j, span, pi, pj_phi):
    lo, hi = 0.0, 1.0
    phi_lo = pi.phi
    mid = None
    while (hi - lo) * span > ROOT_TOL:
        um = 0.5 * (lo + hi)
        mid = walker.at(i, j, um, pi.k, pi.T)
        if mid.phi == 0:
            lo = hi = um
            break
        if np.sign(mid.phi) == np.sign(phi_lo):
            lo, phi_lo = um, mid.phi
        else:
            hi = um
    u = 0.5 * (lo + hi)
    return u, walker.at(i, j, u, pi.k, pi.T)


def derivative_along(walker, p: SingularPoint, h, fn):
    """Central difference of ``fn(point)`` along the curve at ``p``."""
    plus = walker.at_sigma(p.sigma + h, p.k, p.T)
    minus = walker.at_sigma(p.sigma - h, p.k, p.T)
    return (fn(plus) - fn(minus)) / (2 * h)


def classify_planar(curve: SingularCurve, phi_tol=PHI_TOL, dphi_tol=DPHI_TOL):
    """Fill ``planar_class`` on every point; cusp roots are inserted as new points."""
    pts = curve.points
    n = len(pts)
    if n < 2:
        for p in pts:
            p.planar_class = DEGENERATE
        return curve
    walker = _CurveWalker(curve)
    sig = walker.sig
    roots = []
    pairs = [(i, i + 1) for i in range(n - 1)]
    if curve.closed:
        pairs.append((n - 1, 0))
    for i, j in pairs:
        pi, pj = pts[i], pts[j]
        phi_j = pj.phi if np.dot(pi.k, pj.k) >= 0 else -pj.phi
        if np.dot(pi.T, pj.T) < 0:
            phi_j = -phi_j
        if pi.phi * phi_j < 0:
            span = (sig[j] if j > i else curve.length) - sig[i]
            u, root = _bisect(walker, i, j, span, pi, phi_j)
            root.sigma = float(sig[i] + u * span) % (curve.length if curve.closed else np.inf)
            root.is_root = True
            h = span
            root.dphi = float(derivative_along(walker, root, h, lambda q: q.phi))
            root.planar_class = ORDINARY_CUSP if abs(root.dphi) > dphi_tol else DEGENERATE
            if np.linalg.norm(root.grad) < GRAD_TOL:
                root.planar_class = DEGENERATE
            elif np.min(np.abs(root.grad)) < 1e-8 * np.linalg.norm(root.grad):
                root.flags.append("one component of grad delta vanishes")
            roots.append((i, j, root))
    near_root = set()
    for i, j, _ in roots:
        near_root.update((i, j))
    keep = []
    for idx, p in enumerate(pts):
        if np.linalg.norm(p.grad) < GRAD_TOL:
            p.planar_class = DEGENERATE
        elif abs(p.phi) > phi_tol:
            p.planar_class = REGULAR_IMAGE
        elif idx in near_root:
            continue
        else:
            p.planar_class = DEGENERATE
            p.flags.append("phi below tolerance without sign change")
        keep.append(p)
    merged = sorted(keep + [r for _, _, r in roots], key=lambda p: p.sigma)
    _orient(merged)
    curve.points = merged
    return curve


def _orient(points):
    for a, b in zip(points[:-1], points[1:]):
        if np.dot(a.k, b.k) < 0:
            b.k = -b.k
            b.phi = -b.phi
        if np.dot(a.T, b.T) < 0:
            b.T = -b.T
            b.phi = -b.phi


def analyze(model: SurfaceModel, grid=(64, 64), samples=SAMPLES):
    """Trace and classify in one call."""
    return [classify_planar(c) for c in trace_singular_set(model, grid, samples)]


def alpha_tau_probe(model: SurfaceModel, p):
    """(alpha, tau_s) in the chart where s parametrises S, or None when unavailable.

    alpha solves x_s + alpha x_t = 0 in the least-squares sense and
    tau_s = -delta_s / delta_t.
    """
    s, t = (p.s, p.t) if isinstance(p, SingularPoint) else p
    f = model.frames(s, t, 2)[0]
    xt = f.x_t
    ds, dt = f.grad_delta
    if np.linalg.norm(xt) <= 1e-8 or abs(dt) <= 1e-8:
        return None
    alpha = -float(np.dot(xt, f.x_s) / np.dot(xt, xt))
    return alpha, -float(ds / dt)


def curve_with(curve: SingularCurve, model: SurfaceModel):
    return replace(curve, model=model)
