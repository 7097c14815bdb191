"""Report assembly and deterministic serialization."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from . import __version__
from .classify import (
    UndeterminedError,
    _has_closed_form,
    classify_surface,
    flatness_residual,
    minimality_residual,
    relation_residual,
    vranceanu_ode_residual,
)
from .families import GeneralizedRotationParams, VranceanuParams, describe, frame_derivative_residual
from .geometry import beltrami_check, sample_grid

__all__ = ["NumericalError", "build_report", "dumps", "write_csv"]


class NumericalError(RuntimeError):
    """A computed quantity came out non-finite."""


def _stats(values):
    if not values:
        return {"min": None, "max": None, "rms": None}
    arr = np.asarray(values, dtype=float)
    return {"min": float(arr.min()), "max": float(arr.max()), "rms": float(np.sqrt(np.mean(arr**2)))}


def _report_dict(r):
    return None if r is None else r.as_dict()


def build_report(cfg, chart, grid):
    """Compute every quantity for ``chart`` over ``grid`` as a plain dict.

    Raises
    ------
    UndeterminedError
        If no grid point is regular.
    """
    samples, excluded = sample_grid(chart, grid)
    if not samples:
        raise UndeterminedError("every grid point is degenerate or outside the profile domain")
    verdict = classify_surface(chart, grid, cfg.thresholds, samples=samples)
    reports = verdict.reports

    residuals = {
        "beltrami": beltrami_check(chart, grid, samples).as_dict(),
        "flatness": reports["flatness"].as_dict(),
        "minimality": reports["minimality"].as_dict(),
        "pseudo_umbilical": reports["pseudo_umbilical"].generic.as_dict(),
    }
    params = chart.params
    if _has_closed_form(chart):
        residuals["flatness_closed_form"] = flatness_residual(chart, grid, "closed_form").as_dict()
        residuals["minimality_closed_form"] = minimality_residual(chart, grid, "closed_form").as_dict()
        residuals["pseudo_umbilical_closed_form"] = _report_dict(reports["pseudo_umbilical"].closed_form)
        residuals["relation"] = relation_residual(params, grid).as_dict()
    if isinstance(params, (GeneralizedRotationParams, VranceanuParams)):
        residuals["frame_equations"] = frame_derivative_residual(params, grid).as_dict()
    if isinstance(params, VranceanuParams):
        for kind in ("flat", "minimal", "cft"):
            residuals[f"vranceanu_ode_{kind}"] = vranceanu_ode_residual(params.r_expr, kind, grid).as_dict()

    fit = reports["diagonal_fit"]
    pointwise = reports["pointwise_diagonal"]
    doc = {
        "tool": {"name": "rotsurf", "version": __version__},
        "config": cfg.echo(),
        "chart": {
            "family": chart.family,
            "ambient_dim": chart.ambient_dim,
            "u_range": list(chart.u_range),
            "v_range": list(chart.v_range),
            "profile": describe(params),
        },
        "samples": {"total": grid.size, "used": len(samples), "excluded": excluded},
        "statistics": {
            "K": _stats([s.curvature.K for s in samples]),
            "H_norm": _stats([s.curvature.H_norm for s in samples]),
        },
        "residuals": residuals,
        "diagonal_fit": {
            "a": fit.a,
            "residual": fit.residual,
            "coordinate_mass": fit.coordinate_mass,
            "samples_used": fit.samples_used,
            "samples_excluded": fit.samples_excluded,
        },
        "pointwise_diagonal": None
        if pointwise is None
        else {
            "mean": [float(x) for x in pointwise.mean()],
            "constancy": pointwise.constancy,
            "samples_used": pointwise.samples_used,
            "samples_excluded": pointwise.samples_excluded,
        },
        "verdict": {
            **{name: flag.as_dict() for name, flag in verdict.flags().items()},
            "thresholds": verdict.thresholds.as_dict(),
        },
    }
    return doc


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise NumericalError(f"non-finite value {x!r} in report")
        text = format(x, ".17g")
        # keep floats recognizable as floats when read back
        if not any(c in text for c in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return _json_str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_encode(x, indent, level + 1)}" for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_str(s):
    return json.dumps(s, ensure_ascii=False)


def dumps(doc, indent=2):
    """Serialize with sorted keys and 17 significant digits.

    Raises
    ------
    NumericalError
        If any float is NaN or infinite.
    """
    return _encode(doc, indent, 0) + "\n"


def write_csv(path, samples):
    """Dump ``u, v, x1..xn, K, Hnorm`` for every included sample."""
    dim = len(samples[0].position) if samples else 0
    header = ["u", "v", *[f"x{i + 1}" for i in range(dim)], "K", "Hnorm"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for s in samples:
            row = [s.u, s.v, *s.position, s.curvature.K, s.curvature.H_norm]
            out.writerow([format(float(x), ".17g") for x in row])
