"""Command-line front end.

Expressions in configs use ``+ - * / ^``, parentheses, numbers, the
constants ``pi`` and ``e``, the variable ``u`` (``u`` and ``v`` for
``explicit`` charts) and the functions sin cos tan exp log sqrt sinh
cosh.  ``^`` is right-associative and binds tighter than
unary minus, so ``-u^2`` means ``-(u^2)``.  Multiplication is never
implicit.

Exit codes: 0 success, 1 a checked property is "no", 2 bad input or
construction error, 3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import re
import sys

from . import __version__
from .classify import ClassificationVerdict, UndeterminedError, classify_surface
from .config import ConfigError, build_chart, load_config
from .families import PRESETS, ConstructionError, DegenerateProfileError
from .geometry import GeometryError, sample_grid
from .jet import JetError
from .mesh import MeshError, grid_faces, grid_positions, parse_projection, project, write_obj
from .report import NumericalError, build_report, dumps, write_csv

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

_INPUT_ERRORS = (ConfigError, ConstructionError, DegenerateProfileError, GeometryError, MeshError, UndeterminedError)


def _grid_arg(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected NUxNV, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _positive_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not x > 0 or x == float("inf"):
        raise argparse.ArgumentTypeError(f"tolerance must be positive and finite, got {text!r}")
    return x


def _flag_list(text):
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in ClassificationVerdict.FLAGS]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"expected a comma list from {','.join(ClassificationVerdict.FLAGS)}, got {text!r}"
        )
    return names


def _setup(args):
    cfg = load_config(args.config).with_overrides(getattr(args, "grid", None), getattr(args, "tol", None))
    chart = build_chart(cfg)
    grid = chart.grid(cfg.nu, cfg.nv)
    return cfg, chart, grid


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def cmd_report(args):
    cfg, chart, grid = _setup(args)
    doc = build_report(cfg, chart, grid)
    text = dumps(doc)
    _write_text(args.out, text)
    if args.csv:
        samples, _ = sample_grid(chart, grid)
        try:
            write_csv(args.csv, samples)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.csv}: {exc}") from None
    return EXIT_OK


def cmd_check(args):
    cfg, chart, grid = _setup(args)
    verdict = classify_surface(chart, grid, cfg.thresholds)
    flags = verdict.flags()
    ok = True
    for name in args.which:
        flag = flags[name]
        ok &= flag.yes
        note = f"; {flag.note}" if flag.note else ""
        print(f"{name}: {'yes' if flag.yes else 'no'} (residual {flag.residual:.3g}{note})")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_mesh(args):
    projection = parse_projection(args.project)
    cfg, chart, grid = _setup(args)
    points = project(grid_positions(chart, grid), projection)
    faces = grid_faces(cfg.nu, cfg.nv, chart.spans_period("u"), chart.spans_period("v"))
    try:
        write_obj(args.out, points, faces)
    except OSError as exc:
        raise MeshError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def cmd_presets(args):
    for name in sorted(PRESETS):
        _, defaults, description = PRESETS[name]
        params = ", ".join(f"{k}={v:g}" for k, v in defaults.items()) or "no parameters"
        print(f"{name}: {description} [{params}]")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rotsurf",
        description="Geometry and classification of rotational surfaces in E^3 and E^4.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"rotsurf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON surface config")
        p.add_argument("--grid", type=_grid_arg, metavar="NUxNV", help="override the sample grid")

    p = sub.add_parser("report", help="full JSON report over the grid")
    common(p)
    p.add_argument("--tol", type=_positive_float, help="verdict threshold for every flag")
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--csv", help="also dump per-sample u, v, x1..xn, K, Hnorm")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("check", help="test flags; exit 1 if any is no")
    common(p)
    p.add_argument("--tol", type=_positive_float, help="verdict threshold for every flag")
    p.add_argument(
        "--for",
        dest="which",
        type=_flag_list,
        default=list(ClassificationVerdict.FLAGS),
        help="comma list from flat,minimal,pseudo_umbilical,cft (default all)",
    )
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("mesh", help="export a Wavefront OBJ triangle mesh")
    common(p)
    p.add_argument("--project", help="drop:i (0-based) or stereographic:+1/-1; needed for E^4 charts")
    p.add_argument("--out", required=True, help="OBJ path")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("presets", help="list preset names and parameters")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the input-error code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, JetError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
