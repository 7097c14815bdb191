"""Rotational surface families and their closed-form geometry.

Three chart families are supported:

* generalized rotation surfaces in E^4,
  ``X = (f cos cv, f sin cv, g cos dv, g sin dv)``;
* Vranceanu surfaces, the special case ``f = r cos u, g = r sin u, c = d = 1``;
* surfaces of revolution in E^3, ``X = (f, g cos v, g sin v)``.

For each family the adapted frame, connection coefficients and second
fundamental form are also available in closed form.  These are independent of
the generic pipeline in :mod:`rotsurf.geometry` and serve as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .exprparse import BinOp, Call, Num, Var, eval_jet, parse, to_source
from .geometry import Chart
from .jet import DomainError, apply_primitive, var_u

__all__ = [
    "ConstructionError",
    "DegenerateProfileError",
    "GeneralizedRotationParams",
    "RevolutionParams",
    "VranceanuParams",
    "ProfileValues",
    "RotationClosedForm",
    "RevolutionClosedForm",
    "PRESETS",
    "profile_values",
    "as_rotation",
    "make_chart",
    "preset",
    "explicit_chart",
    "describe",
    "rotation_closed_form",
    "revolution_closed_form",
    "frame_derivative_residual",
]

TWO_PI = 2.0 * math.pi
_EPS_PROFILE = 1e-12
_PROBE_POINTS = 33


class ConstructionError(ValueError):
    """A family parameter record violates its invariants on the domain.

    ``condition`` names the violated requirement and ``witness`` is a
    parameter value where it fails.
    """

    def __init__(self, condition, witness=None, detail=""):
        self.condition = condition
        self.witness = witness
        msg = f"construction failed: {condition}"
        if witness is not None:
            msg += f" (witness u = {witness!r})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DegenerateProfileError(ValueError):
    pass


def _as_ast(expr, allowed=("u",)):
    if isinstance(expr, str):
        return parse(expr, allowed)
    return expr


@dataclass(frozen=True)
class GeneralizedRotationParams:
    f_expr: object
    g_expr: object
    c: float = 1.0
    d: float = 1.0
    u_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "f_expr", _as_ast(self.f_expr))
        object.__setattr__(self, "g_expr", _as_ast(self.g_expr))
        if not (self.c > 0 and self.d > 0):
            raise ConstructionError("c > 0 and d > 0", detail=f"c = {self.c}, d = {self.d}")


@dataclass(frozen=True)
class RevolutionParams:
    f_expr: object
    g_expr: object
    u_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "f_expr", _as_ast(self.f_expr))
        object.__setattr__(self, "g_expr", _as_ast(self.g_expr))


@dataclass(frozen=True)
class VranceanuParams:
    r_expr: object
    u_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "r_expr", _as_ast(self.r_expr))


def as_rotation(params):
    """View Vranceanu parameters as a generalized rotation record."""
    if isinstance(params, VranceanuParams):
        r = params.r_expr
        return GeneralizedRotationParams(
            BinOp("*", r, Call("cos", Var("u"))),
            BinOp("*", r, Call("sin", Var("u"))),
            1.0,
            1.0,
            params.u_range,
        )
    return params


class ProfileValues(NamedTuple):
    f: float
    fp: float
    fpp: float
    g: float
    gp: float
    gpp: float


def _profile_jets(params, u):
    params = as_rotation(params)
    t = var_u(u)
    return eval_jet(params.f_expr, t), eval_jet(params.g_expr, t)


def profile_values(params, u):
    """Profile functions and their first two u-derivatives at ``u``."""
    f, g = _profile_jets(params, u)
    return ProfileValues(f.val, f.du, f.duu, g.val, g.du, g.duu)


# chart construction ---------------------------------------------------------


def _rotation_evaluator(params):
    rot = as_rotation(params)
    c, d = rot.c, rot.d

    def evaluator(u, v):
        f = eval_jet(rot.f_expr, u)
        g = eval_jet(rot.g_expr, u)
        cv, dv = c * v, d * v
        return [
            f * apply_primitive("cos", cv),
            f * apply_primitive("sin", cv),
            g * apply_primitive("cos", dv),
            g * apply_primitive("sin", dv),
        ]

    return evaluator


def _revolution_evaluator(params):
    def evaluator(u, v):
        f = eval_jet(params.f_expr, u)
        g = eval_jet(params.g_expr, u)
        return [f, g * apply_primitive("cos", v), g * apply_primitive("sin", v)]

    return evaluator


def _probe(params):
    lo, hi = params.u_range
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConstructionError("nondegenerate u interval", detail=f"{params.u_range}")
    for u in np.linspace(lo, hi, _PROBE_POINTS):
        u = float(u)
        try:
            if isinstance(params, VranceanuParams):
                r = eval_jet(params.r_expr, var_u(u)).val
                if not r > 0:
                    raise ConstructionError("r(u) > 0", u, f"r = {r!r}")
            p = profile_values(params, u)
        except DomainError as exc:
            raise ConstructionError("profile defined on the domain", u, str(exc)) from None
        if p.fp**2 + p.gp**2 <= _EPS_PROFILE:
            raise ConstructionError("f'^2 + g'^2 > 0", u)
        if isinstance(params, RevolutionParams):
            if not p.g > 0:
                raise ConstructionError("g(u) > 0", u, f"g = {p.g!r}")
        else:
            rot = as_rotation(params)
            if rot.c**2 * p.f**2 + rot.d**2 * p.g**2 <= _EPS_PROFILE:
                raise ConstructionError("c^2 f^2 + d^2 g^2 > 0", u)


def _integral(x):
    return float(x).is_integer()


def make_chart(spec, *, v_range=(0.0, TWO_PI), u_period=None, family=None, **preset_params):
    """Build a chart from a parameter record or a preset name.

    Parameters
    ----------
    spec : GeneralizedRotationParams, RevolutionParams, VranceanuParams or str
        A parameter record, or the name of an entry in :data:`PRESETS`.
    v_range : tuple
        Domain in v; defaults to one full turn.
    **preset_params
        Preset parameters when ``spec`` is a preset name.

    Raises
    ------
    ConstructionError
        If the parameters violate the family invariants on a probe grid.
    """
    if isinstance(spec, str):
        return preset(spec, v_range=v_range, **preset_params)
    _probe(spec)
    if isinstance(spec, RevolutionParams):
        return Chart(
            3,
            _revolution_evaluator(spec),
            tuple(spec.u_range),
            tuple(v_range),
            family or "revolution",
            spec,
            u_period,
            TWO_PI,
        )
    rot = as_rotation(spec)
    periodic_v = _integral(rot.c) and _integral(rot.d)
    if family is None:
        family = "vranceanu" if isinstance(spec, VranceanuParams) else "generalized_rotation"
    return Chart(
        4,
        _rotation_evaluator(spec),
        tuple(spec.u_range),
        tuple(v_range),
        family,
        spec,
        u_period,
        TWO_PI if periodic_v else None,
    )


def explicit_chart(coords, u_range, v_range=(0.0, TWO_PI)):
    """Chart from coordinate expressions in ``u`` and ``v`` (3 or 4 of them)."""
    asts = [_as_ast(c, ("u", "v")) for c in coords]

    def evaluator(u, v):
        return [eval_jet(a, u, v) for a in asts]

    return Chart(len(asts), evaluator, tuple(u_range), tuple(v_range), "explicit", tuple(asts))


# presets --------------------------------------------------------------------


def _num(x):
    return Num(float(x))


def _mul(a, b):
    return BinOp("*", a, b)


def _div(a, b):
    return BinOp("/", a, b)


def _add(a, b):
    return BinOp("+", a, b)


def _sub(a, b):
    return BinOp("-", a, b)


def _call(name, a):
    return Call(name, a)


U = Var("u")


def _clifford(r=1.0):
    if not r > 0:
        raise ConstructionError("r > 0", detail=f"r = {r}")
    return VranceanuParams(_num(r), (0.0, TWO_PI)), TWO_PI


def _sphere(r=1.0):
    if not r > 0:
        raise ConstructionError("r > 0", detail=f"r = {r}")
    return (
        RevolutionParams(
            _mul(_num(r), _call("cos", U)), _mul(_num(r), _call("sin", U)), (0.1, math.pi - 0.1)
        ),
        None,
    )


def _cone():
    return RevolutionParams(U, U, (0.2, 2.0)), None


def _catenoid():
    return RevolutionParams(U, _call("cosh", U), (-1.5, 1.5)), None


def _flat_vranceanu(lam=1.0, mu=0.3):
    if not lam > 0:
        raise ConstructionError("lam > 0", detail=f"lam = {lam}")
    r = _mul(_num(lam), _call("exp", _mul(_num(mu), U)))
    return VranceanuParams(r, (0.1, 1.4)), None


def _minimal_vranceanu(a=1.0, b=0.0):
    if a == 0 and b == 0:
        raise ConstructionError("(a, b) != (0, 0)")
    # a sin 2u - b cos 2u = R sin(2u - phi) > 0 for u in (phi/2, phi/2 + pi/2)
    phi = math.atan2(b, a)
    lo = phi / 2 + 0.1
    two_u = _mul(_num(2.0), U)
    inner = _sub(_mul(_num(a), _call("sin", two_u)), _mul(_num(b), _call("cos", two_u)))
    r = _div(_num(1.0), _call("sqrt", inner))
    return VranceanuParams(r, (lo, lo + math.pi / 2 - 0.2)), None


def _cft_vranceanu(lam=math.sqrt(2.0), c=0.0):
    if c == 1:
        raise ConstructionError("c != 1")
    if not lam > 0:
        raise ConstructionError("lam > 0", detail=f"lam = {lam}")
    hi = 1.2
    ratio = (c - 1.0) / (c + 1.0) if c != -1 else -math.inf
    if c > 0 and -1.0 <= ratio <= 1.0:
        # (1+c) cos 2u + (1-c) vanishes at u* = acos((c-1)/(c+1)) / 2
        hi = min(hi, 0.5 * math.acos(ratio) - 0.1)
    two_u = _mul(_num(2.0), U)
    inner = _add(_mul(_num(1.0 + c), _call("cos", two_u)), _num(1.0 - c))
    r = _div(_num(lam), _call("sqrt", inner))
    return VranceanuParams(r, (0.1, hi)), None


PRESETS = {
    "clifford": (_clifford, {"r": 1.0}, "Vranceanu surface with constant r (Clifford torus)"),
    "sphere": (_sphere, {"r": 1.0}, "round sphere as a surface of revolution in E^3"),
    "cone": (_cone, {}, "cone f = g = u in E^3"),
    "catenoid": (_catenoid, {}, "catenoid f = u, g = cosh u in E^3"),
    "flat_vranceanu": (_flat_vranceanu, {"lam": 1.0, "mu": 0.3}, "flat Vranceanu surface r = lam exp(mu u)"),
    "minimal_vranceanu": (
        _minimal_vranceanu,
        {"a": 1.0, "b": 0.0},
        "minimal Vranceanu surface r = 1 / sqrt(a sin 2u - b cos 2u)",
    ),
    "cft_vranceanu": (
        _cft_vranceanu,
        {"lam": math.sqrt(2.0), "c": 0.0},
        "Vranceanu surface r = lam / sqrt((1+c) cos 2u + (1-c)), c != 1",
    ),
}


def preset(name, *, u_range=None, v_range=(0.0, TWO_PI), **params):
    """Chart for a named preset; unknown parameters raise ``TypeError``."""
    try:
        factory, defaults, _ = PRESETS[name]
    except KeyError:
        raise ConstructionError(f"known preset name (got {name!r})") from None
    unknown = set(params) - set(defaults)
    if unknown:
        raise TypeError(f"preset {name!r} got unknown parameters {sorted(unknown)}")
    record, u_period = factory(**{**defaults, **{k: float(v) for k, v in params.items()}})
    if u_range is not None:
        record = _with_u_range(record, tuple(u_range))
    return make_chart(record, v_range=v_range, u_period=u_period, family=name)


def _with_u_range(record, u_range):
    return replace(record, u_range=u_range)


def describe(params):
    """Plain-dict echo of a parameter record with expressions as text."""
    if isinstance(params, VranceanuParams):
        return {"r": to_source(params.r_expr), "u_range": list(params.u_range)}
    if isinstance(params, RevolutionParams):
        return {
            "f": to_source(params.f_expr),
            "g": to_source(params.g_expr),
            "u_range": list(params.u_range),
        }
    if isinstance(params, GeneralizedRotationParams):
        return {
            "f": to_source(params.f_expr),
            "g": to_source(params.g_expr),
            "c": params.c,
            "d": params.d,
            "u_range": list(params.u_range),
        }
    return {}


# closed forms ---------------------------------------------------------------


@dataclass(frozen=True)
class RotationClosedForm:
    """Adapted-frame quantities of a generalized rotation surface.

    ``e1`` and ``e2`` are the unit vectors along ``X_u`` and ``X_v``.  The
    coefficients follow the classical labeling in which index 1 refers to the
    rotation (v) direction: ``h11_1`` is the normal curvature along ``e2``
    and ``h22_1`` the curvature of the profile along ``e1``.
    """

    A_conn: float
    B_conn: float
    h11_1: float
    h22_1: float
    h12_2: float
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    e4: np.ndarray
    K_closed: float
    H_closed: float

    h11_2 = 0.0
    h22_2 = 0.0
    h12_1 = 0.0


@dataclass(frozen=True)
class RevolutionClosedForm:
    A_conn: float
    h11_1: float
    h22_1: float
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    K_closed: float
    H_closed: float

    h12_1 = 0.0


def _rotation_terms(rot, p):
    c2, d2 = rot.c**2, rot.d**2
    E = p.fp**2 + p.gp**2
    G = c2 * p.f**2 + d2 * p.g**2
    P = p.gp * p.fpp - p.fp * p.gpp
    Q = d2 * p.fp * p.g - c2 * p.f * p.gp
    return E, G, P, Q


def rotation_closed_form(params, u, v=0.0):
    """Closed-form frame, connection and curvature data at ``u`` (and ``v``).

    Raises
    ------
    DegenerateProfileError
        If ``f'^2 + g'^2`` or ``c^2 f^2 + d^2 g^2`` vanishes at ``u``.
    """
    rot = as_rotation(params)
    c, d = rot.c, rot.d
    p = profile_values(rot, u)
    E, G, P, Q = _rotation_terms(rot, p)
    if E <= _EPS_PROFILE or G <= _EPS_PROFILE:
        raise DegenerateProfileError(f"vanishing denominator at u = {u}")
    sE = math.sqrt(E)
    sG = math.sqrt(G)
    A = (c * c * p.f * p.fp + d * d * p.g * p.gp) / (sE * G)
    B = c * d * (p.f * p.fp + p.g * p.gp) / (sE * G)
    h11 = Q / (sE * G)
    h22 = P / (E * sE)
    h12 = c * d * (p.fp * p.g - p.f * p.gp) / (sE * G)
    cross = p.g * p.fp - p.f * p.gp
    K = (G * P * Q - c * c * d * d * cross**2 * E) / (E**2 * G**2)
    H = (G * P + Q * E) / (2.0 * E * sE * G)
    ccv, scv, cdv, sdv = math.cos(c * v), math.sin(c * v), math.cos(d * v), math.sin(d * v)
    e1 = np.array([p.fp * ccv, p.fp * scv, p.gp * cdv, p.gp * sdv]) / sE
    e2 = np.array([-c * p.f * scv, c * p.f * ccv, -d * p.g * sdv, d * p.g * cdv]) / sG
    e3 = np.array([p.gp * ccv, p.gp * scv, -p.fp * cdv, -p.fp * sdv]) / sE
    e4 = np.array([-d * p.g * scv, d * p.g * ccv, c * p.f * sdv, -c * p.f * cdv]) / sG
    return RotationClosedForm(A, B, h11, h22, h12, e1, e2, e3, e4, K, H)


def revolution_closed_form(params, u, v=0.0):
    p = profile_values(params, u)
    E = p.fp**2 + p.gp**2
    if E <= _EPS_PROFILE or abs(p.g) <= _EPS_PROFILE:
        raise DegenerateProfileError(f"vanishing denominator at u = {u}")
    sE = math.sqrt(E)
    A = p.gp / (p.g * sE)
    h11 = (p.gp * p.fpp - p.fp * p.gpp) / (E * sE)
    h22 = p.fp / (p.g * sE)
    cv, sv = math.cos(v), math.sin(v)
    e1 = np.array([p.fp, p.gp * cv, p.gp * sv]) / sE
    e2 = np.array([0.0, -sv, cv])
    e3 = np.array([p.gp, -p.fp * cv, -p.fp * sv]) / sE
    return RevolutionClosedForm(A, h11, h22, e1, e2, e3, h11 * h22, 0.5 * (h11 + h22))


def frame_derivative_residual(params, grid, step=1e-5, b_offset=0.0):
    """Check the Gauss and Weingarten formulas of the adapted frame.

    The closed-form frame fields are differentiated by central differences
    along the unit tangent directions and compared with the connection
    formulas built from ``A``, ``B`` and the ``h`` coefficients.  Index 1 of
    those formulas is the rotation direction ``e2 = X_v / |X_v|`` and index
    2 the profile direction ``e1 = X_u / |X_u|``.

    ``b_offset`` perturbs ``B`` and exists to test the sensitivity of the
    check.
    """
    from .geometry import ResidualReport

    rot = as_rotation(params)
    values = []
    excluded = 0
    for u, v in grid.points():
        try:
            cf = rotation_closed_form(rot, u, v)
            p = profile_values(rot, u)
            E, G, _, _ = _rotation_terms(rot, p)

            def fields(uu, vv):
                f = rotation_closed_form(rot, uu, vv)
                return f.e2, f.e1, f.e3, f.e4

            plus_u, minus_u = fields(u + step, v), fields(u - step, v)
            plus_v, minus_v = fields(u, v + step), fields(u, v - step)
        except (DegenerateProfileError, DomainError):
            excluded += 1
            continue
        # D1 differentiates along the rotation direction, D2 along the profile
        D1 = [(a - b) / (2 * step * math.sqrt(G)) for a, b in zip(plus_v, minus_v)]
        D2 = [(a - b) / (2 * step * math.sqrt(E)) for a, b in zip(plus_u, minus_u)]
        p1, p2, e3, e4 = cf.e2, cf.e1, cf.e3, cf.e4
        A, B = cf.A_conn, cf.B_conn + b_offset
        h11, h22, h12 = cf.h11_1, cf.h22_1, cf.h12_2
        expected = [
            (D1[0], -A * p2 + h11 * e3),
            (D1[1], A * p1 + h12 * e4),
            (D2[1], h22 * e3),
            (D2[0], h12 * e4),
            (D1[2], -h11 * p1 + B * e4),
            (D1[3], -h12 * p2 - B * e3),
            (D2[2], -h22 * p2),
            (D2[3], -h12 * p1),
        ]
        values.append(max(float(np.linalg.norm(lhs - rhs)) for lhs, rhs in expected))
    return ResidualReport.from_values(values, excluded, "max over frame equations of |lhs - rhs|")
