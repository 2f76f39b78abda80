"""Command-line interface: ``affine-lab <command> ...``.

Exit codes: 0 success, 2 scene or validation error, 3 numerical failure,
1 anything else (for instance an unwritable output path).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import export
from .errors import NumericalError, ValidationError
from .scenes import builtin_scenes, load_scene
from .singular import analyze

log = logging.getLogger("affine_lab")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
EXIT_OK, EXIT_OTHER, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


def setup_logging():
    name = os.environ.get("AFFINE_LAB_LOG", "warn").strip().lower()
    if name not in LOG_LEVELS:
        raise ValidationError(f"AFFINE_LAB_LOG must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    logging.basicConfig(level=LOG_LEVELS[name], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def _write(path, text):
    Path(path).write_text(text)
    log.info("wrote %s (%d bytes)", path, len(text))


def _scene(name):
    cfg, model = load_scene(name)
    log.info("scene %s: domain %s", cfg.name, model.domain)
    return cfg, model


def cmd_trace(args):
    cfg, model = _scene(args.scene)
    curves = analyze(model, grid=cfg.grid)
    _write(args.out, export.trace_csv(model, curves))


def cmd_classify(args):
    cfg, model = _scene(args.scene)
    report = export.classification_report(cfg.name, model, analyze(model, grid=cfg.grid),
                                          probe=not args.no_probe)
    log.info("summary %s", report["summary"])
    _write(args.out, export.dump_json(report))


def cmd_mesh(args):
    cfg, model = _scene(args.scene)
    if args.resolution is not None and args.resolution < 2:
        raise ValidationError("--resolution must be at least 2")
    if args.band is not None and args.band <= 0:
        raise ValidationError("--band must be positive")
    curves = analyze(model, grid=cfg.grid)
    if args.band is not None and not curves:
        log.warning("scene %s has no singular curve; meshing the full domain", cfg.name)
    V, faces, polylines = export.build_mesh(model, curves, args.band, args.resolution)
    _write(args.out, export.mesh_obj(cfg.name, V, faces, polylines))


def cmd_render_planar(args):
    cfg, model = _scene(args.scene)
    curves = analyze(model, grid=cfg.grid)
    _write(args.out, export.planar_svg(cfg.name, model, curves))


def cmd_verify(args):
    cfg, model = _scene(args.scene)
    report = export.verify_report(cfg.name, model, tuple(args.point))
    log.info("class %s", report["ak_class"])
    _write(args.out, export.dump_json(report))


def cmd_scenes(args):
    for name, desc in builtin_scenes():
        print(f"{name}\t{desc}")


def build_parser():
    p = argparse.ArgumentParser(prog="affine-lab",
                                description="Singularities of improper affine maps from holomorphic data.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("trace", help="trace the singular set and write a CSV table")
    sp.add_argument("scene", help="built-in scene name or path to a scene JSON file")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("classify", help="classify planar and surface singularities (JSON report)")
    sp.add_argument("scene")
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-probe", action="store_true", help="skip the generating-family probes")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("mesh", help="triangulate q(s, t) and write an OBJ file")
    sp.add_argument("scene")
    sp.add_argument("--out", required=True)
    sp.add_argument("--band", type=float, default=None,
                    help="mesh only a band of this parameter width around the singular curve")
    sp.add_argument("--resolution", type=int, default=None,
                    help="vertices per side (full domain, default 64) or rows across the band (default 16)")
    sp.set_defaults(func=cmd_mesh)

    sp = sub.add_parser("render-planar", help="plot the planar image of the singular set as SVG")
    sp.add_argument("scene")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_render_planar)

    sp = sub.add_parser("verify", help="run the generating-family identities at one point")
    sp.add_argument("scene")
    sp.add_argument("--point", nargs=2, type=float, required=True, metavar=("S", "T"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("scenes", help="list built-in scenes")
    sp.set_defaults(func=cmd_scenes)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        setup_logging()
        args.func(args)
    except ValidationError as exc:
        print(f"affine-lab: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"affine-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"affine-lab: {exc}", file=sys.stderr)
        return EXIT_OTHER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
