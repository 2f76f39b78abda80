import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from affine_lab.cli import main

GOLDEN_BAND_CHECKSUM = "dfd44265593b4a2a3fc3f1cd890509492c71359e72da3cf3d5fbe621385159fb"


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def example1_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "classify.json"
    assert run("classify", "example1", "--out", out) == 0
    return json.loads(out.read_text())


def test_scenes_lists_builtins(capsys):
    assert run("scenes") == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["example1", "galvez", "paraboloid"]


def test_trace_csv(tmp_path):
    out = tmp_path / "t.csv"
    assert run("trace", "example1", "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["s", "t", "x1", "x2", "g", "phi", "planar_class"]
    st = np.array([[float(r["s"]), float(r["t"])] for r in rows])
    assert np.allclose(np.hypot(st[:, 0], st[:, 1]), 1, atol=1e-9)
    assert sum(r["planar_class"] == "ordinary_cusp" for r in rows) == 3


def test_trace_empty_scene(tmp_path):
    out = tmp_path / "t.csv"
    assert run("trace", "paraboloid", "--out", out) == 0
    assert out.read_text() == "s,t,x1,x2,g,phi,planar_class\n"


def test_classify_report(example1_report):
    r = example1_report
    assert r["summary"] == {"cuspidal_edge": r["curves"][0]["points"] - 3, "swallowtail": 3}
    assert r["class_mismatches"] == 0 and r["probe_errors"] == 0
    assert r["convexity"]["fixed_sign"]
    for p in r["points"]:
        res = p["residuals"]
        assert abs(res["r2"]) < 1e-4 and abs(res["r3"]) < 1e-4
        if p["ak_class"] == "A3":
            assert abs(res["r4"]) < 1e-4
        else:
            assert res["r4"] is None


def test_swallowtails_match_svg_cusps(example1_report, tmp_path):
    out = tmp_path / "p.svg"
    assert run("render-planar", "example1", "--out", out) == 0
    svg = out.read_text()
    marks = [(float(a), float(b)) for a, b in
             re.findall(r'class="cusp"[^>]*data-x1="([^"]+)" data-x2="([^"]+)"', svg)]
    sw = [(p["x1"], p["x2"]) for p in example1_report["swallowtails"]]
    assert len(marks) == len(sw) == 3
    for m in marks:
        assert min(np.hypot(m[0] - a, m[1] - b) for a, b in sw) < 1e-6


def test_svg_no_cusps_for_galvez(tmp_path):
    out = tmp_path / "g.svg"
    assert run("render-planar", "galvez", "--out", out) == 0
    svg = out.read_text()
    assert 'class="cusp"' not in svg and "<poly" in svg


def test_classify_without_probe(tmp_path):
    out = tmp_path / "c.json"
    assert run("classify", "galvez", "--no-probe", "--out", out) == 0
    r = json.loads(out.read_text())
    assert set(r["summary"]) == {"cuspidal_edge"}
    assert "ak_class" not in r["points"][0]


def test_verify(tmp_path):
    out = tmp_path / "v.json"
    assert run("verify", "example1", "--point", "0.6", "0.8", "--out", out) == 0
    r = json.loads(out.read_text())
    assert r["ak_class"] == "A2" and r["on_surface"]


def test_mesh_full_domain_orientation(tmp_path):
    out = tmp_path / "p.obj"
    assert run("mesh", "paraboloid", "--resolution", "9", "--out", out) == 0
    V, F = [], []
    for line in out.read_text().splitlines():
        if line.startswith("v "):
            V.append([float(v) for v in line.split()[1:]])
        elif line.startswith("f "):
            F.append([int(v) - 1 for v in line.split()[1:]])
    V, F = np.array(V), np.array(F)
    assert len(V) == 81 and len(F) == 2 * 64
    # x = (s, t) on the paraboloid, so planar orientation is parameter orientation
    a, b, c = V[F[:, 0], :2], V[F[:, 1], :2], V[F[:, 2], :2]
    area = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    assert np.all(area > 0)
    assert np.allclose(V[:, 2], -(V[:, 0] ** 2 + V[:, 1] ** 2) / 2, atol=1e-12)


def test_mesh_band_golden(tmp_path):
    from affine_lab.export import vertex_checksum
    out = tmp_path / "b.obj"
    assert run("mesh", "example1", "--band", "0.3", "--out", out) == 0
    text = out.read_text()
    V = np.array([[float(v) for v in l.split()[1:]] for l in text.splitlines() if l.startswith("v ")])
    assert vertex_checksum(V) == GOLDEN_BAND_CHECKSUM
    assert "o singular_curve_0" in text


def test_mesh_band_without_curve_warns(tmp_path, capsys):
    out = tmp_path / "b.obj"
    assert run("mesh", "paraboloid", "--band", "0.2", "--resolution", "4", "--out", out) == 0
    assert "no singular curve" in capsys.readouterr().err


def test_outputs_deterministic(tmp_path):
    for cmd in (["trace"], ["render-planar"], ["mesh", "--band", "0.2"], ["classify", "--no-probe"]):
        texts = []
        for k in range(2):
            out = tmp_path / f"o{k}"
            assert run(cmd[0], "example1", *cmd[1:], "--out", out) == 0
            texts.append(out.read_bytes())
        assert texts[0] == texts[1], cmd


@pytest.mark.parametrize("argv", [
    ["trace", "no_such_scene", "--out", "x"],
    ["verify", "example1", "--point", "5", "0", "--out", "x"],
    ["mesh", "example1", "--band", "-1", "--out", "x"],
    ["mesh", "example1", "--resolution", "1", "--out", "x"],
])
def test_validation_exit_code(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(*argv) == 2


def test_bad_scene_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"representation": {"W": "z"}, "domain": {"s": [0, 1], "t": [0, 1]}}))
    assert run("trace", p, "--out", tmp_path / "o.csv") == 2


def test_numerical_exit_code(tmp_path):
    p = tmp_path / "pole.json"
    p.write_text(json.dumps({"representation": {"W": "1/(z - 0.5)", "H": "z"},
                             "domain": {"s": [-1, 1], "t": [-1, 1]}}))
    assert run("trace", p, "--out", tmp_path / "o.csv") == 3


def test_log_level(tmp_path, monkeypatch):
    monkeypatch.setenv("AFFINE_LAB_LOG", "loud")
    assert run("trace", "paraboloid", "--out", tmp_path / "o.csv") == 2
    monkeypatch.setenv("AFFINE_LAB_LOG", "debug")
    assert run("trace", "paraboloid", "--out", tmp_path / "o.csv") == 0


def test_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "affine_lab.cli", "scenes"], capture_output=True, text=True)
    assert out.returncode == 0 and "galvez" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "affine_lab.cli", "trace", "nope", "--out", str(tmp_path / "x")],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and "error" in bad.stderr
