"""Generating family G(s, x) = g(s, t(s, x)) and its A_k classification.

``t(s, x)`` solves ``[x - x(s, t), c(s, t)] = 0``.  At a probe point the
s-derivatives of G are taken by central differences (one Richardson step)
and compared against (1 + t_s^2) times the derivatives of delta along
s -> (s, t(s, x)).
"""

from __future__ import annotations

import cmath
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (ConvergenceError, DegenerateError, DomainError,
                     NeighborhoodError, NumericalError)
from .gfield import integrate_g, integrate_g_many, integrate_segments
from .singular import (DEGENERATE, GRAD_TOL, ORDINARY_CUSP, REGULAR_IMAGE,
                       SingularCurve, _CurveWalker, derivative_along)
from .surface import SurfaceModel, rotate_domain, wedge, with_shift

log = logging.getLogger(__name__)

A1, A2, A3, HIGHER = "A1", "A2", "A3", "higher/degenerate"
CUSPIDAL_EDGE, SWALLOWTAIL = "cuspidal_edge", "swallowtail"

TOL_DELTA = 1e-6
TOL_DERIV = 1e-6
STEP = 1e-3
STEP4 = 2.5e-3
X_STEP = 1e-4
T_TOL = 1e-12
T_MAXITER = 30
PROBE_ANGLES = (0.0, math.pi / 6, math.pi / 3, math.pi / 2, 2 * math.pi / 3)


# ---------------------------------------------------------------------------
# probe preparation


@dataclass
class Probe:
    model: SurfaceModel
    point: tuple          # probe point in the adjusted model's parameters
    theta: float
    shift: tuple
    diagnostics: dict


def prepare_probe(model: SurfaceModel, p, angles=PROBE_ANGLES, tol_delta=TOL_DELTA):
    """Rotate and shift so that x_t, delta_t and [x_t, c] are bounded away from zero at p.

    The delta_t requirement only applies at singular points (|delta| <= tol_delta).
    Of the admissible angles the one with the largest |x_t| / |J| is used.
    """
    s, t = (float(v) for v in p)
    if not model.contains(s, t):
        raise DomainError(f"probe point ({s}, {t}) lies outside the domain")
    best = None
    for theta in angles:
        m = rotate_domain(model, theta)
        z = complex(s, t) * cmath.exp(-1j * theta)
        f = m.frames(z.real, z.imag, 2)[0]
        jn = np.linalg.norm(f.jacobian, 2)
        xt = np.linalg.norm(f.x_t)
        gd = f.grad_delta
        singular = abs(f.delta) <= tol_delta
        ok_xt = xt > 0.1 * jn
        ok_dt = (abs(gd[1]) > 0.1 * np.linalg.norm(gd)) if singular else True
        # among admissible angles prefer the kernel closest to the s axis (smallest |t_s|)
        if ok_xt and ok_dt and (best is None or xt / jn > best[0] + 1e-12):
            best = (xt / jn, theta, m, z, f, jn, xt, gd)
    if best is None:
        raise DegenerateError(f"no rotation satisfies the probe hypotheses at ({s}, {t})")
    _, theta, m, z, f, jn, xt, gd = best
    c = f.c
    w0 = float(wedge(f.x_t, c))
    thr = 0.1 * xt * (1 + np.linalg.norm(c))
    k1 = k2 = 0.0
    if abs(w0) < thr:
        perp = np.array([-f.x_t[1], f.x_t[0]]) / xt
        amount = 2.0 * (1 + np.linalg.norm(c)) * (1.0 if w0 >= 0 else -1.0)
        dc = amount * perp
        # c = (-D, C): adding (k1, k2) to (C, D) moves c by (-k2, k1)
        k1, k2 = float(dc[1]), float(-dc[0])
        m = with_shift(m, k1, k2)
        c = c + dc
    diagnostics = {
        "theta": theta,
        "shift": [k1, k2],
        "wedge_xt_c": float(wedge(f.x_t, c)),
        "wedge_threshold": float(0.1 * xt * (1 + np.linalg.norm(c))),
        "delta": float(f.delta),
        "delta_t": float(gd[1]),
        "grad_delta_norm": float(np.linalg.norm(gd)),
        "x_t_norm": float(xt),
        "jacobian_norm": float(jn),
    }
    return Probe(m, (z.real, z.imag), theta, (k1, k2), diagnostics)


# ---------------------------------------------------------------------------
# the implicit function t(s, x)


def _xc(model, s, t):
    Wd, Hd = model.derivatives(s, t, 1)
    k1, k2 = model.shift
    x = np.column_stack([Wd[:, 0].real, Hd[:, 0].real])
    c = np.column_stack([Wd[:, 0].imag - k2, Hd[:, 0].imag + k1])
    x_t = np.column_stack([-Wd[:, 1].imag, -Hd[:, 1].imag])
    c_t = np.column_stack([Wd[:, 1].real, Hd[:, 1].real])
    return x, c, x_t, c_t


def solve_t_many(model: SurfaceModel, s, x, t_init, tol=T_TOL, max_iter=T_MAXITER, polish=2):
    """Vectorised Newton solve of [x - x(s, t), c(s, t)] = 0 for t."""
    s = np.array(s, dtype=float, ndmin=1)
    x = np.broadcast_to(np.asarray(x, dtype=float), (len(s), 2))
    t = np.array(np.broadcast_to(np.asarray(t_init, dtype=float), s.shape))
    extra = np.zeros(len(s), dtype=int)
    active = np.arange(len(s))
    for _ in range(max_iter + polish + 1):
        xs, c, x_t, c_t = _xc(model, s[active], t[active])
        r = x[active] - xs
        F = wedge(r, c)
        Ft = -wedge(x_t, c) + wedge(r, c_t)
        if np.any(~np.isfinite(F)):
            raise ConvergenceError("non-finite residual in t(s, x) solve")
        conv = np.abs(F) < tol
        extra[active[conv]] += 1
        if np.any(np.abs(Ft) < 1e-10):
            raise NeighborhoodError("dF/dt underflow: left the neighbourhood where t(s, x) exists")
        step = F / Ft
        tiny = np.abs(step) <= 4e-16 * (1 + np.abs(t[active]))
        done = conv & (tiny | (extra[active] > polish))
        upd = ~done
        t[active[upd]] -= step[upd]
        active = active[upd]
        if active.size == 0:
            break
    else:
        raise ConvergenceError("Newton iteration for t(s, x) did not converge")
    if not np.all(model.contains(s, t)):
        raise NeighborhoodError("t(s, x) solution leaves the domain")
    return t


def solve_t(model: SurfaceModel, s, x, t_init, tol=T_TOL, max_iter=T_MAXITER):
    return float(solve_t_many(model, [s], [x], [t_init], tol, max_iter)[0])


def eval_G(model: SurfaceModel, s, x, t_init):
    t = solve_t(model, s, x, t_init)
    return integrate_g(model, (s, t))


def G_s_direct(model: SurfaceModel, s, x, t):
    """G_s = [x - x(s, t), d/ds c(s, t(s, x))], with t_s from the implicit relation."""
    f = model.frames(s, t, 1)[0]
    r = np.asarray(x) - f.x
    t_s = _implicit_t_s(model, s, x, t)
    return float(wedge(r, f.cp[1, 0] + t_s * f.cp[0, 1]))


# ---------------------------------------------------------------------------
# finite differences


def fd_derivatives(v, h):
    """Derivatives 1..4 at the centre of a 9-point stencil with spacing h (Richardson once)."""
    v = np.asarray(v, dtype=float)
    m4, m3, m2, m1, c0, p1, p2, p3, p4 = v

    def rich(fine, coarse):
        return (4 * fine - coarse) / 3

    d1 = rich((p1 - m1) / (2 * h), (p2 - m2) / (4 * h))
    d2 = rich((p1 - 2 * c0 + m1) / h ** 2, (p2 - 2 * c0 + m2) / (4 * h ** 2))
    d3 = rich((p2 - 2 * p1 + 2 * m1 - m2) / (2 * h ** 3), (p4 - 2 * p2 + 2 * m2 - m4) / (16 * h ** 3))
    d4 = rich((p2 - 4 * p1 + 6 * c0 - 4 * m1 + m2) / h ** 4,
              (p4 - 4 * p2 + 6 * c0 - 4 * m2 + m4) / (16 * h ** 4))
    return d1, d2, d3, d4


WIDE = np.array([-8, -4, -2, -1, 0, 1, 2, 4, 8])


def fd_derivatives_wide(v, h):
    """Derivatives 1..4 from samples at ``WIDE * h``, Richardson twice (error O(h^6))."""
    f = dict(zip(WIDE.tolist(), np.asarray(v, dtype=float)))
    f0 = f[0]

    def raw(k):
        H = k * h
        a, b = f[k], f[-k]
        d1 = (a - b) / (2 * H)
        d2 = (a - 2 * f0 + b) / H ** 2
        a2, b2 = f[2 * k], f[-2 * k]
        d3 = (a2 - 2 * a + 2 * b - b2) / (2 * H ** 3)
        d4 = (a2 - 4 * a + 6 * f0 - 4 * b + b2) / H ** 4
        return np.array([d1, d2, d3, d4])

    D1, D2, D4 = raw(1), raw(2), raw(4)
    R1 = (4 * D1 - D2) / 3
    R2 = (4 * D2 - D4) / 3
    return tuple((16 * R1 - R2) / 15)


_J = np.arange(-4, 5)


def _implicit_t_s(model, s, x, t):
    f = model.frames(s, t, 1)[0]
    r = np.asarray(x) - f.x
    Fs = -wedge(f.x_s, f.c) + wedge(r, f.cp[1, 0])
    Ft = -wedge(f.x_t, f.c) + wedge(r, f.cp[0, 1])
    return float(-Fs / Ft)


def _stencil(model, s, x, t_center, h, offsets=_J):
    S = s + offsets * h
    guess = t_center + _implicit_t_s(model, s, x, t_center) * (S - s)
    T = solve_t_many(model, S, x, guess)
    base = np.array([s, T[4]])
    G = integrate_segments(model, base, np.column_stack([S, T]))
    return S, T, G


def G_partials_s(model: SurfaceModel, s, x, t_init, step=STEP, step4=STEP4):
    """(G_s, G_ss, G_sss, G_ssss) at (s, x).

    Orders 1-3 use spacing ``step*(1+|s|)`` with one Richardson step.  The
    fourth derivative uses ``step4*(1+|s|)`` on the wide stencil with two
    Richardson steps: rounding noise grows like eps/h^4, so it needs the
    larger spacing, and the extra extrapolation keeps truncation down.
    """
    t0 = solve_t(model, s, x, t_init)
    h = step * (1 + abs(s))
    _, _, G = _stencil(model, s, x, t0, h)
    d1, d2, d3, _ = fd_derivatives(G, h)
    h4 = step4 * (1 + abs(s))
    _, _, G4 = _stencil(model, s, x, t0, h4, WIDE)
    d4 = fd_derivatives_wide(G4, h4)[3]
    return float(d1), float(d2), float(d3), float(d4)


# ---------------------------------------------------------------------------
# identities


@dataclass
class ProbeReport:
    point: tuple
    probe_point: tuple
    theta: float
    shift: tuple
    hypotheses: dict
    t_samples: list = field(default_factory=list)
    t_s: float = float("nan")
    t_ss: float = float("nan")
    delta: float = float("nan")
    ds_delta: float = float("nan")
    dss_delta: float = float("nan")
    G_derivs: tuple = ()
    r2: float = float("nan")
    r3: float = float("nan")
    r4: float = float("nan")
    G_x: tuple = ()
    CD: tuple = ()
    G_x_error: float = float("nan")
    G_xs: tuple = ()
    G_xss: tuple = ()
    G_xs_expected: tuple = ()
    G_xs_error: float = float("nan")
    G_xs_cross: float = float("nan")
    versality_det: float = float("nan")
    versality_expected: float = float("nan")
    ak_class: str = HIGHER
    failures: dict = field(default_factory=dict)

    @property
    def on_surface(self):
        return bool(self.G_derivs) and abs(self.G_derivs[0]) < 1e-5

    def to_dict(self):
        return asdict(self)


def verify_identities(model: SurfaceModel, p, step=STEP, step4=STEP4, x_step=X_STEP,
                      tol_delta=TOL_DELTA, tol=TOL_DERIV):
    """Probe the generating family at the on-surface point x = x(p)."""
    pr = prepare_probe(model, p, tol_delta=tol_delta)
    m = pr.model
    s0, t0 = pr.point
    f = m.frames(s0, t0, 3)[0]
    x0 = f.x.copy()
    rep = ProbeReport(tuple(float(v) for v in p), (s0, t0), pr.theta, pr.shift, pr.diagnostics)
    h = step * (1 + abs(s0))
    h4 = step4 * (1 + abs(s0))
    S, T, G = _stencil(m, s0, x0, t0, h)
    rep.t_samples = [[float(a), float(b)] for a, b in zip(S, T)]
    d1, d2, d3, _ = fd_derivatives(G, h)
    t_s, t_ss = fd_derivatives(T, h)[:2]
    dp = f.dp
    delta, ds, dt = dp[0, 0], dp[1, 0], dp[0, 1]
    dss, dst, dtt = dp[2, 0], dp[1, 1], dp[0, 2]
    w = 1 + t_s ** 2
    rep.t_s, rep.t_ss = float(t_s), float(t_ss)
    rep.delta = float(delta)
    rep.ds_delta = float(ds + dt * t_s)
    rep.dss_delta = float(dss + 2 * dst * t_s + dtt * t_s ** 2 + dt * t_ss)
    rep.r2 = float(d2 - w * delta)
    rep.r3 = float(d3 - w * rep.ds_delta)
    d4 = float("nan")
    try:
        S4, T4, G4 = _stencil(m, s0, x0, t0, h4, WIDE)
        d4 = fd_derivatives_wide(G4, h4)[3]
        rep.r4 = float(d4 - w * rep.dss_delta)
        _gradient_checks(rep, m, f, S4, T4, x0, h4, x_step, t_s)
    except NumericalError as exc:
        rep.failures["wide_stencil"] = str(exc)
    rep.G_derivs = (float(d1), float(d2), float(d3), float(d4))
    rep.ak_class = classify_Ak(rep, tol_delta, tol)
    return rep


def _gradient_checks(rep, m, f, S4, T4, x0, h4, x_step, t_s):
    offsets = np.array([[x_step, 0.0], [-x_step, 0.0], [0.0, x_step], [0.0, -x_step]])
    X = (x0[None, None, :] + offsets[None, :, :]).repeat(len(S4), axis=0).reshape(-1, 2)
    Ss = np.repeat(S4, 4)
    Tinit = np.repeat(T4, 4)
    Tx = solve_t_many(m, Ss, X, Tinit)
    base = np.array([S4[4], T4[4]])
    Gv = integrate_segments(m, base, np.column_stack([Ss, Tx])).reshape(len(S4), 4)
    Gx = np.column_stack([(Gv[:, 0] - Gv[:, 1]) / (2 * x_step), (Gv[:, 2] - Gv[:, 3]) / (2 * x_step)])
    CD = to_CD(f.c)
    gx = Gx[4]
    rep.G_x = tuple(float(v) for v in gx)
    rep.CD = tuple(float(v) for v in CD)
    rep.G_x_error = float(np.linalg.norm(gx - CD) / max(1.0, np.linalg.norm(CD)))
    d_s = np.array([fd_derivatives_wide(Gx[:, i], h4)[:2] for i in range(2)])  # rows: component
    gxs, gxss = d_s[:, 0], d_s[:, 1]
    # d/ds c(s, t(s, x)) = -(1 + t_s^2) x_t, and G_x = (C, D) is c turned by -90 degrees
    expected = -(1 + t_s ** 2) * to_CD(f.x_t)
    rep.G_xs = tuple(float(v) for v in gxs)
    rep.G_xss = tuple(float(v) for v in gxss)
    rep.G_xs_expected = tuple(float(v) for v in expected)
    rep.G_xs_error = float(np.linalg.norm(gxs - expected) / max(1.0, np.linalg.norm(expected)))
    nrm = np.linalg.norm(gxs) * np.linalg.norm(expected)
    rep.G_xs_cross = float(abs(wedge(gxs, expected)) / nrm) if nrm > 0 else float("nan")
    rep.versality_det = float(wedge(gxs, gxss))
    u = f.xp[1, 1] + t_s * f.xp[0, 2]
    rep.versality_expected = float((1 + t_s ** 2) ** 2 * wedge(f.x_t, u))


def to_CD(v):
    """The map c = (-D, C) -> (C, D)."""
    v = np.asarray(v)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def classify_Ak(report: ProbeReport, tol_delta=TOL_DELTA, tol=TOL_DERIV):
    if abs(report.delta) > tol_delta:
        return A1
    if abs(report.ds_delta) > tol:
        return A2
    if abs(report.dss_delta) > tol:
        return A3
    return HIGHER


# ---------------------------------------------------------------------------
# surface singularities


@dataclass
class SurfaceSingularityLabel:
    label: str
    q: tuple
    point: tuple
    kernel_derivative: float
    kernel_derivative_rate: float | None = None
    ak_class: str | None = None
    report: ProbeReport | None = None
    consistent: bool | None = None
    probe_error: str | None = None


def classify_surface_singularities(model: SurfaceModel, curve: SingularCurve, probe=False, tol=TOL_DERIV):
    """Cuspidal edge / swallowtail label for every point of a classified curve.

    The label uses the derivative of delta along the kernel direction; where it
    vanishes, the rate of change of that derivative along the curve decides.
    With ``probe=True`` each point is also run through :func:`verify_identities`
    and the A_k class is recorded next to the label.
    """
    pts = curve.points
    if not pts:
        return []
    P = np.array([p.point for p in pts])
    g = integrate_g_many(model, P[:, 0], P[:, 1])
    walker = _CurveWalker(curve)
    spacing = curve.length / max(len(pts), 1)
    out = []
    for p, gv in zip(pts, g):
        dk = p.kernel_derivative
        rate = None
        if np.linalg.norm(p.grad) < GRAD_TOL:
            label = DEGENERATE
        elif abs(dk) > tol:
            label = CUSPIDAL_EDGE
        else:
            rate = float(derivative_along(walker, p, spacing, lambda q: q.kernel_derivative))
            label = SWALLOWTAIL if abs(rate) > tol else DEGENERATE
        lab = SurfaceSingularityLabel(label, (float(p.x[0]), float(p.x[1]), float(gv)), p.point, dk, rate)
        if probe:
            try:
                rep = verify_identities(model, p.point)
                lab.report = rep
                lab.ak_class = rep.ak_class
                lab.consistent = EXPECTED_AK.get(label) == rep.ak_class
            except NumericalError as exc:
                log.info("probe failed at %s: %s", p.point, exc)
                lab.probe_error = f"{type(exc).__name__}: {exc}"
        out.append(lab)
    return out


EXPECTED_AK = {CUSPIDAL_EDGE: A2, SWALLOWTAIL: A3}
PLANAR_TO_AK = {REGULAR_IMAGE: A2, ORDINARY_CUSP: A3}


def label_counts(labels):
    return dict(sorted(Counter(l.label for l in labels).items()))


# ---------------------------------------------------------------------------
# discriminant of G(s, x) - z


def solve_critical_s(model: SurfaceModel, x, s_init, t_init, tol=1e-12, max_iter=40):
    """Root of s -> G_s(s, x) by the secant method on the closed-form G_s."""
    t_prev = t_init

    def gs(s):
        nonlocal t_prev
        t_prev = solve_t(model, s, x, t_prev)
        return G_s_direct(model, s, x, t_prev), t_prev

    a, b = s_init, s_init + 1e-3
    fa, _ = gs(a)
    fb, tb = gs(b)
    for _ in range(max_iter):
        if abs(fb) < tol:
            return b, tb, fb
        if fb == fa:
            break
        a, b, fa = b, b - fb * (b - a) / (fb - fa), fb
        fb, tb = gs(b)
    raise ConvergenceError("critical point of G(., x) not found")


def preimage(model: SurfaceModel, x, guess, tol=1e-13, max_iter=40):
    """Newton solve of x(s, t) = x."""
    p = np.array(guess, dtype=float)
    for _ in range(max_iter):
        f = model.frames(p[0], p[1], 1)[0]
        r = f.x - x
        if np.linalg.norm(r) < tol:
            return p
        p = p - np.linalg.solve(f.jacobian, r)
    raise ConvergenceError("preimage not found")


def discriminant_sample(model: SurfaceModel, center, offset):
    """One point (x, G(s*, x)) with G_s(s*, x) = 0 near ``center`` and its distance to q."""
    pr = prepare_probe(model, center)
    m = pr.model
    s0, t0 = pr.point
    x0 = m.frames(s0, t0, 1)[0].x
    x = x0 + np.asarray(offset, dtype=float)
    s_star, t_star, gs = solve_critical_s(m, x, s0, t0)
    Gval = integrate_g(m, (s_star, t_star))
    best = math.inf
    for guess in ((s0, t0), (s_star, t_star)):
        try:
            pre = preimage(m, x, guess)
        except (ConvergenceError, np.linalg.LinAlgError, DomainError):
            continue
        if not m.contains(*pre):
            continue
        xq = m.frames(pre[0], pre[1], 1)[0].x
        gq = integrate_g(m, tuple(pre))
        best = min(best, float(np.linalg.norm(np.append(xq - x, gq - Gval))))
    return {"x": x.tolist(), "z": float(Gval), "s": float(s_star), "G_s": float(gs), "distance": best}
