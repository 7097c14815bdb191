"""JSON surface configuration: schema validation and chart construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .classify import Thresholds
from .exprparse import ParseError, parse
from .families import (
    PRESETS,
    TWO_PI,
    GeneralizedRotationParams,
    RevolutionParams,
    VranceanuParams,
    explicit_chart,
    make_chart,
    preset,
)

__all__ = ["ConfigError", "SurfaceConfig", "load_config", "config_from_dict", "build_chart"]

KINDS = ("generalized_rotation", "revolution", "vranceanu", "preset", "explicit")
_TOP_KEYS = {"kind", "params", "domain", "grid", "thresholds"}
_PARAM_KEYS = {
    "generalized_rotation": ({"f", "g"}, {"c", "d"}),
    "revolution": ({"f", "g"}, set()),
    "vranceanu": ({"r"}, set()),
    "explicit": ({"x"}, set()),
}
MIN_GRID = 8
DEFAULT_GRID = (64, 64)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceConfig:
    kind: str
    params: dict
    u_range: tuple | None
    v_range: tuple
    nu: int
    nv: int
    thresholds: Thresholds = field(default_factory=Thresholds)
    asts: dict = field(default_factory=dict, repr=False, compare=False)

    def echo(self):
        out = {
            "kind": self.kind,
            "params": self.params,
            "domain": {"v": list(self.v_range)},
            "grid": {"nu": self.nu, "nv": self.nv},
            "thresholds": self.thresholds.as_dict(),
        }
        if self.u_range is not None:
            out["domain"]["u"] = list(self.u_range)
        return out

    def with_overrides(self, grid=None, tol=None):
        nu, nv = grid if grid is not None else (self.nu, self.nv)
        _check_grid(nu, nv)
        th = Thresholds.uniform(tol) if tol is not None else self.thresholds
        return SurfaceConfig(self.kind, self.params, self.u_range, self.v_range, nu, nv, th, self.asts)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _interval(value, where):
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(_is_number(x) for x in value)
        or not value[0] < value[1]
    ):
        raise ConfigError(f"{where}: expected [lo, hi] with finite lo < hi, got {value!r}")
    return (float(value[0]), float(value[1]))


def _check_grid(nu, nv):
    for name, n in (("nu", nu), ("nv", nv)):
        if not isinstance(n, int) or isinstance(n, bool) or n < MIN_GRID:
            raise ConfigError(f"grid.{name}: expected an integer >= {MIN_GRID}, got {n!r}")


def _parse_expr(text, where, allowed=("u",)):
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected an expression string, got {text!r}")
    try:
        return parse(text, allowed)
    except ParseError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(doc):
    """Validate a decoded config document.

    Raises
    ------
    ConfigError
        On unknown keys, missing fields, bad types or expression errors.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {list(KINDS)}, got {kind!r}")
    params = doc.get("params")
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object")

    asts = {}
    if kind == "preset":
        name = params.get("name")
        if name not in PRESETS:
            raise ConfigError(f"params.name: expected one of {sorted(PRESETS)}, got {name!r}")
        defaults = PRESETS[name][1]
        extra = set(params) - {"name"} - set(defaults)
        if extra:
            raise ConfigError(f"params: unknown keys for preset {name!r}: {sorted(extra)}")
        for key, value in params.items():
            if key != "name" and not _is_number(value):
                raise ConfigError(f"params.{key}: expected a number, got {value!r}")
    else:
        required, optional = _PARAM_KEYS[kind]
        extra = set(params) - required - optional
        if extra:
            raise ConfigError(f"params: unknown keys for kind {kind!r}: {sorted(extra)}")
        missing = required - set(params)
        if missing:
            raise ConfigError(f"params: missing keys {sorted(missing)}")
        if kind == "explicit":
            coords = params["x"]
            if not isinstance(coords, list) or len(coords) not in (3, 4):
                raise ConfigError("params.x: expected a list of 3 or 4 expressions")
            asts["x"] = [_parse_expr(c, f"params.x[{i}]", ("u", "v")) for i, c in enumerate(coords)]
        else:
            for key in sorted(required):
                asts[key] = _parse_expr(params[key], f"params.{key}")
        for key in optional:
            if key in params and not (_is_number(params[key]) and params[key] > 0):
                raise ConfigError(f"params.{key}: expected a positive number, got {params[key]!r}")

    domain = doc.get("domain", {})
    if not isinstance(domain, dict):
        raise ConfigError("domain: expected an object")
    extra = set(domain) - {"u", "v"}
    if extra:
        raise ConfigError(f"domain: unknown keys {sorted(extra)}")
    u_range = _interval(domain["u"], "domain.u") if "u" in domain else None
    v_range = _interval(domain["v"], "domain.v") if "v" in domain else (0.0, TWO_PI)
    if u_range is None and kind != "preset":
        raise ConfigError(f"domain.u: required for kind {kind!r}")

    grid = doc.get("grid", {"nu": DEFAULT_GRID[0], "nv": DEFAULT_GRID[1]})
    if not isinstance(grid, dict) or set(grid) - {"nu", "nv"}:
        raise ConfigError("grid: expected an object with keys nu, nv")
    nu = grid.get("nu", DEFAULT_GRID[0])
    nv = grid.get("nv", DEFAULT_GRID[1])
    _check_grid(nu, nv)

    th = doc.get("thresholds", {})
    if not isinstance(th, dict):
        raise ConfigError("thresholds: expected an object")
    names = set(Thresholds().as_dict())
    extra = set(th) - names - {"default"}
    if extra:
        raise ConfigError(f"thresholds: unknown keys {sorted(extra)}")
    for key, value in th.items():
        if not (_is_number(value) and value > 0):
            raise ConfigError(f"thresholds.{key}: expected a positive number, got {value!r}")
    base = Thresholds.uniform(float(th["default"])) if "default" in th else Thresholds()
    thresholds = Thresholds(**{n: float(th.get(n, getattr(base, n))) for n in sorted(names)})

    return SurfaceConfig(kind, params, u_range, v_range, nu, nv, thresholds, asts)


def load_config(path):
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(doc)


def build_chart(cfg):
    """Chart described by a validated config."""
    if cfg.kind == "preset":
        kwargs = {k: v for k, v in cfg.params.items() if k != "name"}
        return preset(cfg.params["name"], u_range=cfg.u_range, v_range=cfg.v_range, **kwargs)
    if cfg.kind == "explicit":
        return explicit_chart(cfg.asts["x"], cfg.u_range, cfg.v_range)
    if cfg.kind == "vranceanu":
        record = VranceanuParams(cfg.asts["r"], cfg.u_range)
    elif cfg.kind == "revolution":
        record = RevolutionParams(cfg.asts["f"], cfg.asts["g"], cfg.u_range)
    else:
        record = GeneralizedRotationParams(
            cfg.asts["f"],
            cfg.asts["g"],
            float(cfg.params.get("c", 1.0)),
            float(cfg.params.get("d", 1.0)),
            cfg.u_range,
        )
    return make_chart(record, v_range=cfg.v_range)
