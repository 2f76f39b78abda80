import math

import numpy as np
import pytest

from affine_lab.errors import ValidationError
from affine_lab.singular import (ORDINARY_CUSP, REGULAR_IMAGE, alpha_tau_probe, analyze,
                                 project_point, trace_singular_set)
from affine_lab.surface import rotate_domain, with_shift

CUSPS = np.array([(-0.5, math.sqrt(3) / 2), (-0.5, -math.sqrt(3) / 2), (1.0, 0.0)])


def _match(found, expected, tol):
    found = np.asarray(found)
    assert len(found) == len(expected)
    for e in expected:
        assert np.min(np.linalg.norm(found - e, axis=1)) < tol


def test_unit_circle(example1_curves):
    assert len(example1_curves) == 1
    c = example1_curves[0]
    assert c.closed
    P = c.params
    assert np.max(np.abs(P[:, 0] ** 2 + P[:, 1] ** 2 - 1)) < 1e-9
    assert c.length == pytest.approx(2 * math.pi, rel=1e-4)
    assert np.all(np.diff(c.arclength) > 0)


def test_traced_points_are_singular(example1, example1_curves):
    for p in example1_curves[0].points:
        assert abs(p.delta) <= 1e-9
        assert np.linalg.norm(p.k) == pytest.approx(1) and np.linalg.norm(p.T) == pytest.approx(1)
        assert abs(np.dot(p.grad, p.T)) <= 1e-9 * np.linalg.norm(p.grad)
        f = example1.frames(p.s, p.t, 1)[0]
        assert np.linalg.norm(f.jacobian @ p.k) <= 1e-8
        sv = np.linalg.svd(f.jacobian, compute_uv=False)
        assert sv[1] < 1e-8 < sv[0]


def test_three_cusps(example1_curves):
    c = example1_curves[0]
    cusps = c.cusps
    _match([p.point for p in cusps], CUSPS, 1e-6)
    assert all(p.planar_class in (REGULAR_IMAGE, ORDINARY_CUSP) for p in c.points)
    assert sum(p.planar_class == REGULAR_IMAGE for p in c.points) >= 500
    assert all(abs(p.dphi) > 1e-6 for p in cusps)


def test_regular_near_minus_one(example1_curves):
    near = [p for p in example1_curves[0].points if math.hypot(p.s + 1, p.t) < 0.05]
    assert near and all(p.planar_class == REGULAR_IMAGE for p in near)


def test_cusp_at_chart_boundary_is_flagged(example1_curves):
    flagged = [p for p in example1_curves[0].cusps if p.flags]
    assert len(flagged) == 1 and flagged[0].point == pytest.approx((1.0, 0.0), abs=1e-6)


def test_paraboloid_empty(paraboloid):
    assert trace_singular_set(paraboloid) == []
    assert analyze(paraboloid) == []


def test_galvez_line(galvez_curves):
    assert len(galvez_curves) == 1
    c = galvez_curves[0]
    assert not c.closed
    assert np.max(np.abs(c.params[:, 1])) < 1e-9
    assert c.params[:, 0].min() == pytest.approx(0, abs=1e-9)
    assert c.params[:, 0].max() == pytest.approx(2 * math.pi, abs=1e-9)
    assert c.cusps == [] and all(p.planar_class == REGULAR_IMAGE for p in c.points)


def test_galvez_narrow_domain(galvez_scene):
    from dataclasses import replace
    from affine_lab.surface import Rect
    _, m = galvez_scene
    narrow = replace(m, domain=Rect(0, 2 * math.pi, -0.5, 0.5))
    curves = analyze(narrow)
    assert len(curves) == 1 and np.max(np.abs(curves[0].params[:, 1])) < 1e-9


def test_grid_too_small(example1):
    with pytest.raises(ValidationError):
        trace_singular_set(example1, grid=(8, 8))


def test_grid_refinement(example1, example1_curves):
    fine = analyze(example1, grid=(128, 128))[0]
    a = np.array(sorted(p.point for p in example1_curves[0].cusps))
    b = np.array(sorted(p.point for p in fine.cusps))
    assert np.max(np.abs(a - b)) < 1e-8
    assert [p.planar_class for p in fine.points].count(ORDINARY_CUSP) == 3


@pytest.mark.parametrize("theta", [0.3, 1.1, 2.0])
def test_rotation_invariance(example1, example1_curves, theta):
    curves = analyze(rotate_domain(example1, theta))
    assert len(curves) == 1
    cusps = curves[0].cusps
    ref = np.array([p.x for p in example1_curves[0].cusps])
    _match([p.x for p in cusps], ref, 1e-6)


def test_shift_does_not_move_singular_set(example1, example1_curves):
    curves = analyze(with_shift(example1, 2.0, -3.0))
    _match([p.point for p in curves[0].cusps], CUSPS, 1e-6)


def test_alpha_tau(example1, example1_curves):
    a, ts = alpha_tau_probe(example1, (0.6, 0.8))
    assert a == pytest.approx(2.0) and ts == pytest.approx(-0.75)
    a, ts = alpha_tau_probe(example1, (-0.5, math.sqrt(3) / 2))
    assert a == pytest.approx(1 / math.sqrt(3)) and ts == pytest.approx(1 / math.sqrt(3))
    assert alpha_tau_probe(example1, (1.0, 0.0)) is None


def test_phi_matches_alpha_tau(example1, example1_curves):
    n = 0
    for p in example1_curves[0].points:
        at = alpha_tau_probe(example1, p)
        if at is None:
            continue
        a, ts = at
        ref = abs(a - ts) / math.sqrt((1 + a * a) * (1 + ts * ts))
        assert abs(abs(p.phi) - ref) < 1e-9
        n += 1
    assert n > 400


def test_projection(example1):
    s, t = project_point(example1, 0.9, 0.3)
    assert s * s + t * t == pytest.approx(1, abs=1e-12)
