"""Output formats: singular-curve CSV, JSON reports, OBJ meshes and planar SVG plots.

Every writer returns text; nothing here touches the clock, so repeated runs
on the same scene give byte-identical output.  Floats are written with
``repr``, which round-trips exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math

import numpy as np

from .generating import (A2, A3, SWALLOWTAIL, classify_surface_singularities,
                         label_counts, verify_identities)
from .gfield import convexity_diagnostic, integrate_g_many
from .singular import ORDINARY_CUSP, REGULAR_IMAGE, analyze
from .surface import SurfaceModel

TRACE_COLUMNS = ("s", "t", "x1", "x2", "g", "phi", "planar_class")


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def dump_json(obj):
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# singular curve table


def curve_g(model, curves):
    out = []
    for c in curves:
        P = np.array([p.point for p in c.points]).reshape(-1, 2)
        out.append(integrate_g_many(model, P[:, 0], P[:, 1]) if len(P) else np.zeros(0))
    return out


def trace_csv(model: SurfaceModel, curves):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for c, g in zip(curves, curve_g(model, curves)):
        for p, gv in zip(c.points, g):
            w.writerow([repr(float(p.s)), repr(float(p.t)), repr(float(p.x[0])), repr(float(p.x[1])),
                        repr(float(gv)), repr(float(p.phi)), p.planar_class])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# reports


def probe_dict(rep):
    d = rep.to_dict()
    d.pop("t_samples", None)
    return d


def classification_report(name, model: SurfaceModel, curves=None, probe=True):
    if curves is None:
        curves = analyze(model)
    records, swallowtails, cusps, adjustments = [], [], [], []
    counts = {}
    mismatches = errors = 0
    for ci, c in enumerate(curves):
        labels = classify_surface_singularities(model, c, probe=probe)
        for k, v in label_counts(labels).items():
            counts[k] = counts.get(k, 0) + v
        for p, lab in zip(c.points, labels):
            rec = {
                "curve": ci, "s": p.s, "t": p.t, "x1": p.x[0], "x2": p.x[1], "g": lab.q[2],
                "phi": p.phi, "planar_class": p.planar_class, "surface_label": lab.label,
                "kernel_derivative": lab.kernel_derivative,
            }
            if p.flags:
                rec["flags"] = list(p.flags)
            if lab.probe_error is not None:
                rec["probe_error"] = lab.probe_error
                errors += 1
            if lab.report is not None:
                r = lab.report
                rec["ak_class"] = r.ak_class
                rec["residuals"] = {"r2": r.r2, "r3": r.r3, "r4": r.r4 if r.ak_class == A3 else None}
                if r.failures:
                    rec["probe_failures"] = dict(r.failures)
                if r.theta or any(r.shift):
                    adjustments.append({"s": p.s, "t": p.t, "theta": r.theta, "shift": list(r.shift)})
                expected = {REGULAR_IMAGE: A2, ORDINARY_CUSP: A3}.get(p.planar_class)
                if r.ak_class != expected:
                    mismatches += 1
            records.append(rec)
            if p.planar_class == ORDINARY_CUSP:
                cusps.append({"s": p.s, "t": p.t, "x1": p.x[0], "x2": p.x[1]})
            if lab.label == SWALLOWTAIL:
                swallowtails.append({"s": p.s, "t": p.t, "x1": lab.q[0], "x2": lab.q[1], "g": lab.q[2]})
    return {
        "scene": name,
        "curve_count": len(curves),
        "curves": [{"closed": c.closed, "points": len(c), "length": c.length} for c in curves],
        "summary": dict(sorted(counts.items())),
        "swallowtails": swallowtails,
        "cusps": cusps,
        "class_mismatches": mismatches,
        "probe_errors": errors,
        "adjustments": adjustments,
        "convexity": convexity_diagnostic(model),
        "points": records,
    }


def verify_report(name, model: SurfaceModel, point):
    rep = verify_identities(model, point)
    d = probe_dict(rep)
    d["scene"] = name
    d["on_surface"] = rep.on_surface
    return d


# ---------------------------------------------------------------------------
# meshes


def _grid_mesh(model, n):
    ss, tt = model.grid(n, n)
    inside = model.contains(ss, tt)
    idx = -np.ones(ss.shape, dtype=int)
    idx[inside] = np.arange(int(inside.sum()))
    P = np.column_stack([ss[inside], tt[inside]])
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            if min(a, b, c, d) >= 0:
                faces += [(a, b, c), (a, c, d)]
    return P, faces


def _band_mesh(model, curves, width, rows):
    pts, faces = [], []
    offsets = np.linspace(-width / 2, width / 2, rows)
    for c in curves:
        if len(c) < 2:
            continue
        P = np.array([p.point for p in c.points])
        nrm = np.array([p.grad / max(np.linalg.norm(p.grad), 1e-300) for p in c.points])
        grid = P[:, None, :] + offsets[None, :, None] * nrm[:, None, :]
        inside = model.contains(grid[..., 0], grid[..., 1])
        idx = -np.ones(inside.shape, dtype=int)
        idx[inside] = len(pts) + np.arange(int(inside.sum()))
        pts.extend(grid[inside])
        m = len(P)
        seg = range(m) if c.closed else range(m - 1)
        for i in seg:
            i2 = (i + 1) % m
            for j in range(rows - 1):
                a, b, cc, d = idx[i, j], idx[i2, j], idx[i2, j + 1], idx[i, j + 1]
                if min(a, b, cc, d) >= 0:
                    faces += [(a, b, cc), (a, cc, d)]
    return np.array(pts).reshape(-1, 2), faces


def _orient(P, faces):
    """Make every triangle counter-clockwise in the parameter plane."""
    out = []
    for a, b, c in faces:
        area = (P[b, 0] - P[a, 0]) * (P[c, 1] - P[a, 1]) - (P[b, 1] - P[a, 1]) * (P[c, 0] - P[a, 0])
        out.append((a, b, c) if area > 0 else (a, c, b))
    return out


def build_mesh(model: SurfaceModel, curves, band=None, resolution=None):
    """Vertices (x1, x2, g), triangles and singular-curve polylines (vertex index lists)."""
    if band is not None and band <= 0:
        raise ValueError("band width must be positive")
    if band is not None and curves:
        P, faces = _band_mesh(model, curves, band, resolution or 16)
    else:
        P, faces = _grid_mesh(model, resolution or 64)
    faces = _orient(P, faces)
    polylines = []
    curve_pts = []
    for c in curves:
        start = len(P) + len(curve_pts)
        curve_pts.extend(p.point for p in c.points)
        ids = list(range(start, start + len(c)))
        if c.closed and ids:
            ids.append(ids[0])
        polylines.append(ids)
    allP = np.vstack([P, np.array(curve_pts).reshape(-1, 2)]) if curve_pts else P
    fr = model.frames(allP[:, 0], allP[:, 1], 0) if len(allP) else None
    V = np.zeros((len(allP), 3))
    if len(allP):
        V[:, :2] = fr.xp[:, 0, 0]
        V[:, 2] = integrate_g_many(model, allP[:, 0], allP[:, 1])
    return V, faces, polylines


def mesh_obj(name, V, faces, polylines):
    lines = [f"# affine-lab mesh of scene {name}",
             f"# {len(V)} vertices, {len(faces)} faces, {len(polylines)} singular curves",
             f"o {name}_surface"]
    lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in V.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    for k, ids in enumerate(polylines):
        lines.append(f"o singular_curve_{k}")
        lines.append("l " + " ".join(str(i + 1) for i in ids))
    return "\n".join(lines) + "\n"


def vertex_checksum(V, decimals=9):
    """SHA-256 of the vertex array rounded to ``decimals`` places."""
    text = "\n".join(" ".join(f"{v:.{decimals}f}" for v in row) for row in np.round(V, decimals) + 0.0)
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# planar SVG


def planar_svg(name, model: SurfaceModel, curves, size=600, margin=40):
    polys = [np.array([p.x for p in c.points]).reshape(-1, 2) for c in curves]
    cusps = [p for c in curves for p in c.points if p.planar_class == ORDINARY_CUSP]
    allx = np.vstack(polys) if any(len(p) for p in polys) else np.zeros((0, 2))
    if len(allx):
        lo, hi = allx.min(axis=0), allx.max(axis=0)
    else:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    span = max(float(np.max(hi - lo)), 1e-9)
    lo = (lo + hi) / 2 - 0.55 * span
    scale = (size - 2 * margin) / (1.1 * span)

    def tx(p):
        return margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f"<title>affine-lab planar image of the singular set, scene {name}</title>",
           '<g id="axes" stroke="#999" stroke-width="1">']
    ox, oy = tx((0.0, 0.0))
    ox = min(max(ox, margin), size - margin)
    oy = min(max(oy, margin), size - margin)
    out.append(f'<line x1="{margin}" y1="{oy:.3f}" x2="{size - margin}" y2="{oy:.3f}"/>')
    out.append(f'<line x1="{ox:.3f}" y1="{margin}" x2="{ox:.3f}" y2="{size - margin}"/>')
    out.append("</g>")
    out.append('<g id="curves" fill="none" stroke="#1f4e99" stroke-width="1.5">')
    for c, poly in zip(curves, polys):
        if not len(poly):
            continue
        pts = " ".join("%.4f,%.4f" % tx(p) for p in poly)
        tag = "polygon" if c.closed else "polyline"
        out.append(f'<{tag} points="{pts}"/>')
    out.append("</g>")
    out.append('<g id="cusps" fill="#c0392b">')
    for p in cusps:
        cx, cy = tx(p.x)
        out.append(f'<circle class="cusp" cx="{cx:.4f}" cy="{cy:.4f}" r="4" '
                   f'data-x1="{float(p.x[0])!r}" data-x2="{float(p.x[1])!r}" '
                   f'data-s="{float(p.s)!r}" data-t="{float(p.t)!r}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
