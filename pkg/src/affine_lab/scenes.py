"""Scene files: JSON descriptions of a surface, its domain and test oracles.

A scene gives either ``{"W": ..., "H": ...}`` or ``{"F": ..., "G": ...}``
under ``representation``; expressions use the grammar of :mod:`.expr` in the
variable ``z``.  Oracle expressions are real functions of ``s`` and ``t`` and
are only read by tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ExprSyntaxError, SceneError
from .expr import evaluate, parse_expr
from .surface import Rect, SurfaceModel, from_martinez

BUILTIN = ("example1", "galvez", "paraboloid")
_KNOWN = {"name", "description", "representation", "domain", "grid", "g_basepoint", "shift", "oracle"}


@dataclass
class SceneConfig:
    name: str
    representation: dict
    domain: Rect
    grid: tuple = (64, 64)
    g_basepoint: tuple = (0.0, 0.0)
    shift: tuple = (0.0, 0.0)
    oracle: dict = field(default_factory=dict)
    description: str = ""

    def oracle_fn(self, key):
        """Oracle expression ``key`` as a vectorised real function of (s, t)."""
        if key not in self.oracle:
            raise KeyError(key)
        e = parse_expr(self.oracle[key], variables=("s", "t"))

        def fn(s, t):
            s = np.asarray(s, dtype=float)
            t = np.asarray(t, dtype=float)
            return np.real(evaluate(e, s=s, t=t)) * np.ones(np.broadcast(s, t).shape)
        return fn


def _pair(data, key, n=2, prefix=""):
    v = data[key]
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise SceneError(f"expected a list of {n} numbers", prefix + key)
    try:
        return tuple(float(a) for a in v)
    except (TypeError, ValueError):
        raise SceneError("entries must be numbers", prefix + key) from None


def parse_scene(data: dict, default_name=""):
    """Validate a decoded scene dictionary and build the model."""
    if not isinstance(data, dict):
        raise SceneError("scene must be a JSON object")
    unknown = set(data) - _KNOWN
    if unknown:
        raise SceneError(f"unknown field(s) {sorted(unknown)}")
    for key in ("representation", "domain"):
        if key not in data:
            raise SceneError("missing field", key)
    rep = data["representation"]
    if not isinstance(rep, dict):
        raise SceneError("must be an object", "representation")
    has_wh = bool({"W", "H"} & set(rep))
    has_fg = bool({"F", "G"} & set(rep))
    if has_wh == has_fg:
        raise SceneError("give exactly one of the W/H or F/G representations", "representation")
    keys = ("W", "H") if has_wh else ("F", "G")
    exprs = {}
    for k in keys:
        if k not in rep:
            raise SceneError("missing field", f"representation.{k}")
        if not isinstance(rep[k], str):
            raise SceneError("expression must be a string", f"representation.{k}")
        try:
            exprs[k] = parse_expr(rep[k])
        except ExprSyntaxError as exc:
            raise SceneError(str(exc), f"representation.{k}") from None
    extra = set(rep) - set(keys)
    if extra:
        raise SceneError(f"unexpected key(s) {sorted(extra)}", "representation")

    dom = data["domain"]
    if not isinstance(dom, dict) or set(dom) != {"s", "t"}:
        raise SceneError('expected {"s": [a, b], "t": [a, b]}', "domain")
    s_rng = _pair(dom, "s", prefix="domain.")
    t_rng = _pair(dom, "t", prefix="domain.")
    try:
        domain = Rect(s_rng[0], s_rng[1], t_rng[0], t_rng[1])
    except ValueError as exc:
        raise SceneError(str(exc), "domain") from None

    grid = tuple(int(v) for v in _pair(data, "grid")) if "grid" in data else (64, 64)
    if min(grid) < 2:
        raise SceneError("grid must be at least 2x2", "grid")
    base = _pair(data, "g_basepoint") if "g_basepoint" in data else (0.0, 0.0)
    if not domain.contains(*base):
        raise SceneError(f"{base} lies outside the domain", "g_basepoint")
    shift = _pair(data, "shift") if "shift" in data else (0.0, 0.0)
    oracle = data.get("oracle", {})
    if not isinstance(oracle, dict) or not all(isinstance(v, str) for v in oracle.values()):
        raise SceneError("must map names to expression strings", "oracle")

    name = str(data.get("name", default_name))
    cfg = SceneConfig(name, dict(rep), domain, grid, base, shift, dict(oracle),
                      str(data.get("description", "")))
    kw = dict(shift=shift, g_basepoint=base, name=name)
    if has_wh:
        model = SurfaceModel(exprs["W"], exprs["H"], domain, **kw)
    else:
        model = from_martinez(exprs["F"], exprs["G"], domain, **kw)
    return cfg, model


def load_scene(path):
    """Load a scene from a file path or a built-in name; returns ``(SceneConfig, SurfaceModel)``."""
    if str(path) in BUILTIN:
        text = resources.files(__package__).joinpath("scenes", f"{path}.json").read_text()
        default = str(path)
    else:
        p = Path(path)
        if not p.is_file():
            raise SceneError(f"no such scene file or built-in scene: {path}")
        text = p.read_text()
        default = p.stem
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scene(data, default)


def builtin_scenes():
    out = []
    for name in BUILTIN:
        cfg, _ = load_scene(name)
        out.append((name, cfg.description))
    return out
