"""Characterization residuals and the coordinate-finite-type test.

Every closed-form condition is evaluated as a normalized residual: the
expression divided by ``1 + sum |additive terms|``.  The conditions are
homogeneous of high degree in the profile functions, so raw values are not
comparable across surfaces.

A surface is treated as coordinate finite type when ``Delta X = A X`` holds
for a *constant* diagonal matrix ``A``.  The pointwise entries of ``A`` are
exposed alongside a constancy measure so the u-dependent reading can be
inspected too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .exprparse import eval_jet, parse
from .families import (
    GeneralizedRotationParams,
    RevolutionParams,
    VranceanuParams,
    as_rotation,
    profile_values,
)
from .geometry import Grid, ResidualReport, sample_grid
from .jet import DomainError, var_u

__all__ = [
    "EPS_DEG",
    "EPS_H",
    "ResidualReport",
    "PointwiseDiagonal",
    "DiagonalFit",
    "PseudoUmbilicalReport",
    "Thresholds",
    "Flag",
    "ClassificationVerdict",
    "UndeterminedError",
    "flatness_residual",
    "minimality_residual",
    "pseudo_umbilical_residual",
    "vranceanu_ode_residual",
    "pointwise_diagonal",
    "fit_diagonal",
    "fit_arrays",
    "relation_residual",
    "classify_surface",
]

EPS_DEG = 1e-8
EPS_H = 1e-8
_EPS_FIT = 1e-300


class UndeterminedError(ValueError):
    """Every sample was excluded, so nothing could be estimated."""


def _space_of(params):
    if isinstance(params, RevolutionParams):
        return "revolution_E3"
    if isinstance(params, (GeneralizedRotationParams, VranceanuParams)):
        return "rotation_E4"
    raise TypeError(f"no closed form for parameter record {type(params).__name__}")


def _has_closed_form(chart):
    return isinstance(chart.params, (RevolutionParams, GeneralizedRotationParams, VranceanuParams))


def _u_values(grid):
    if isinstance(grid, Grid):
        return np.asarray(grid.u, dtype=float), len(grid.v)
    return np.asarray(grid, dtype=float).ravel(), 1


def _normalized(terms, value=None):
    if value is None:
        value = sum(terms)
    return value / (1.0 + sum(abs(t) for t in terms))


def _closed_form_values(params, grid, terms_of):
    """Evaluate a u-only closed-form condition, replicated across v."""
    us, reps = _u_values(grid)
    space = _space_of(params)
    rot = as_rotation(params) if space == "rotation_E4" else params
    values = []
    excluded = 0
    for u in us:
        try:
            p = profile_values(rot, float(u))
        except DomainError:
            excluded += reps
            continue
        E = p.fp**2 + p.gp**2
        if space == "rotation_E4":
            G = rot.c**2 * p.f**2 + rot.d**2 * p.g**2
            if E < EPS_DEG or G < EPS_DEG:
                excluded += reps
                continue
        elif E < EPS_DEG or abs(p.g) < EPS_DEG:
            excluded += reps
            continue
        values.extend([_normalized(terms_of(rot, p, space))] * reps)
    return values, excluded


def _rotation_pq(rot, p):
    E = p.fp**2 + p.gp**2
    G = rot.c**2 * p.f**2 + rot.d**2 * p.g**2
    P = p.gp * p.fpp - p.fp * p.gpp
    Q = rot.d**2 * p.fp * p.g - rot.c**2 * p.f * p.gp
    return E, G, P, Q


def _flat_terms(rot, p, space):
    if space == "revolution_E3":
        # K = P f' / (g E^2)
        return [(p.gp * p.fpp - p.fp * p.gpp) * p.fp]
    E, G, P, Q = _rotation_pq(rot, p)
    cross = p.g * p.fp - p.f * p.gp
    return [G * P * Q, -(rot.c**2) * rot.d**2 * cross**2 * E]


def _minimal_terms(rot, p, space):
    E = p.fp**2 + p.gp**2
    P = p.gp * p.fpp - p.fp * p.gpp
    if space == "revolution_E3":
        return [p.g * P, p.fp * E]
    E, G, P, Q = _rotation_pq(rot, p)
    return [G * P, Q * E]


def _umbilic_terms(rot, p, space):
    E = p.fp**2 + p.gp**2
    P = p.gp * p.fpp - p.fp * p.gpp
    if space == "revolution_E3":
        return [p.g * P, -p.fp * E]
    E, G, P, Q = _rotation_pq(rot, p)
    return [G * P, -Q * E]


def _samples(chart, grid, samples):
    if samples is None:
        return sample_grid(chart, grid)
    return samples, grid.size - len(samples)


def flatness_residual(chart, grid, method="generic", samples=None):
    """Residual of vanishing Gaussian curvature.

    ``method="generic"`` reports ``|K|`` from the generic pipeline;
    ``method="closed_form"`` evaluates the profile condition for flatness,
    normalized by the sum of its term magnitudes.
    """
    if method == "closed_form":
        values, excluded = _closed_form_values(chart.params, grid, _flat_terms)
        return ResidualReport.from_values(values, excluded, "closed form / (1 + sum |terms|)")
    samples, excluded = _samples(chart, grid, samples)
    return ResidualReport.from_values([s.curvature.K for s in samples], excluded, "|K|")


def minimality_residual(chart, grid, method="generic", samples=None):
    """Residual of vanishing mean curvature (``|H|`` or the closed form)."""
    if method == "closed_form":
        values, excluded = _closed_form_values(chart.params, grid, _minimal_terms)
        return ResidualReport.from_values(values, excluded, "closed form / (1 + sum |terms|)")
    samples, excluded = _samples(chart, grid, samples)
    return ResidualReport.from_values([s.curvature.H_norm for s in samples], excluded, "|H|")


@dataclass(frozen=True)
class PseudoUmbilicalReport:
    generic: ResidualReport
    closed_form: Optional[ResidualReport] = None

    @property
    def vacuous(self):
        return self.generic.samples_used == 0


def pseudo_umbilical_residual(chart, grid, samples=None):
    """Pseudo-umbilicity residuals.

    The generic residual is ``max_ij |<h(e_i, e_j), H> - |H|^2 delta_ij|``
    over samples with ``|H| > EPS_H``.  When every sample has ``H = 0`` the
    surface is vacuously pseudo-umbilical and the report says so.
    """
    samples, excluded = _samples(chart, grid, samples)
    values = []
    for s in samples:
        H = s.curvature.H_vec
        Hn = s.curvature.H_norm
        if Hn <= EPS_H:
            excluded += 1
            continue
        proj = np.array([N @ H for N in s.frames.normals])
        shape_H = np.einsum("kij,k->ij", s.sff.h, proj)
        values.append(float(np.max(np.abs(shape_H - Hn**2 * np.eye(2)))))
    note = "vacuous: H vanishes at every sample" if samples and not values else ""
    generic = ResidualReport.from_values(
        values, excluded, "max_ij |<h_ij, H> - |H|^2 delta_ij|", note=note
    )
    closed = None
    if _has_closed_form(chart):
        cv, cex = _closed_form_values(chart.params, grid, _umbilic_terms)
        closed = ResidualReport.from_values(cv, cex, "closed form / (1 + sum |terms|)")
    return PseudoUmbilicalReport(generic, closed)


_ODE_KINDS = ("flat", "minimal", "cft")


def vranceanu_ode_residual(r_expr, kind, grid, c=None):
    """Residual of the Vranceanu profile ODEs.

    ``kind`` selects ``r r'' - r'^2`` (flat), ``r r'' - 3 r'^2 - 2 r^2``
    (minimal) or ``r r' (cos^2 u - c sin^2 u) - r^2 cos u sin u (1 + c)``
    (cft).  For ``cft`` the constant is fitted by least squares when ``c`` is
    not given; the value used is stored on the report.
    """
    if kind not in _ODE_KINDS:
        raise ValueError(f"kind must be one of {_ODE_KINDS}, got {kind!r}")
    if isinstance(r_expr, str):
        r_expr = parse(r_expr, ("u",))
    us, reps = _u_values(grid)
    rows = []
    excluded = 0
    for u in us:
        u = float(u)
        try:
            j = eval_jet(r_expr, var_u(u))
        except DomainError:
            excluded += reps
            continue
        if not j.val > 0:
            excluded += reps
            continue
        rows.append((u, j.val, j.du, j.duu))

    if kind == "cft" and c is None:
        # residual = alpha - c * beta, linear in c
        alpha = np.array([r * rp * math.cos(u) ** 2 - r * r * math.cos(u) * math.sin(u) for u, r, rp, _ in rows])
        beta = np.array([r * rp * math.sin(u) ** 2 + r * r * math.cos(u) * math.sin(u) for u, r, rp, _ in rows])
        denom = float(beta @ beta)
        c = float(alpha @ beta / denom) if denom > 0 else 0.0

    values = []
    for u, r, rp, rpp in rows:
        if kind == "flat":
            terms = [r * rpp, -rp * rp]
        elif kind == "minimal":
            terms = [r * rpp, -3.0 * rp * rp, -2.0 * r * r]
        else:
            cu, su = math.cos(u), math.sin(u)
            terms = [
                r * rp * cu * cu,
                -c * r * rp * su * su,
                -r * r * cu * su,
                -c * r * r * cu * su,
            ]
        values.extend([_normalized(terms)] * reps)
    return ResidualReport.from_values(
        values, excluded, "ode / (1 + sum |terms|)", constant=c if kind == "cft" else None
    )


@dataclass(frozen=True)
class PointwiseDiagonal:
    """Entries of ``A`` in ``Delta X = A X`` evaluated pointwise in u.

    ``entries`` has one row per included sample and one column per ambient
    coordinate.  ``distinct`` holds the two independent columns
    (``a11, a22`` in E^3; ``a11, a33`` in E^4).
    """

    space: str
    u: np.ndarray
    entries: np.ndarray
    constancy: float
    samples_used: int
    samples_excluded: int

    @property
    def distinct(self):
        cols = (0, 1) if self.space == "revolution_E3" else (0, 2)
        return self.entries[:, cols]

    def mean(self):
        return self.entries.mean(axis=0)


def pointwise_diagonal(params, grid, space=None):
    """Pointwise diagonal entries from the profile functions.

    Raises
    ------
    UndeterminedError
        If every sample is excluded by a vanishing denominator.
    """
    space = space or _space_of(params)
    us, _ = _u_values(grid)
    rot = as_rotation(params) if space == "rotation_E4" else params
    kept_u, rows = [], []
    for u in us:
        u = float(u)
        try:
            p = profile_values(rot, u)
        except DomainError:
            continue
        if abs(p.f) < EPS_DEG or abs(p.g) < EPS_DEG:
            continue
        E = p.fp**2 + p.gp**2
        P = p.gp * p.fpp - p.fp * p.gpp
        if E < EPS_DEG:
            continue
        if space == "revolution_E3":
            bracket = p.g * P + p.fp * E
            a11 = -p.gp * bracket / (p.f * p.g * E**2)
            a22 = p.fp * bracket / (p.g**2 * E**2)
            rows.append((a11, a22, a22))
        else:
            E, G, P, Q = _rotation_pq(rot, p)
            if G < EPS_DEG:
                continue
            bracket = Q * E + P * G
            a11 = -p.gp * bracket / (p.f * E**2 * G)
            a33 = p.fp * bracket / (p.g * E**2 * G)
            rows.append((a11, a11, a33, a33))
        kept_u.append(u)
    if not rows:
        raise UndeterminedError("all samples excluded; diagonal entries undetermined")
    entries = np.array(rows)
    constancy = float(np.max(entries.max(axis=0) - entries.min(axis=0)))
    return PointwiseDiagonal(space, np.array(kept_u), entries, constancy, len(rows), len(us) - len(rows))


@dataclass(frozen=True)
class DiagonalFit:
    """Least-squares estimate of a constant diagonal ``A`` with ``Delta X = A X``.

    ``a[i]`` is ``None`` when coordinate ``i`` carries too little mass on
    the grid to determine its eigenvalue.
    """

    a: list
    residual: float
    coordinate_mass: list
    samples_used: int
    samples_excluded: int

    @property
    def undetermined(self):
        return [x is None for x in self.a]


def fit_diagonal(chart, grid, samples=None):
    """Per-coordinate least-squares eigenvalues ``a_i`` over the grid.

    ``a_i = sum(Delta x_i * x_i) / sum(x_i^2)``; the residual is the misfit
    relative to ``|Delta X|`` over determined coordinates.
    """
    samples, excluded = _samples(chart, grid, samples)
    if not samples:
        raise UndeterminedError("no regular samples on the grid")
    X = np.array([s.position for s in samples])
    L = np.array([s.laplacian for s in samples])
    return fit_arrays(X, L, grid.size, excluded)


def fit_arrays(X, L, n_total, excluded=0):
    """Diagonal fit from stacked positions ``X`` and Laplacians ``L``."""
    mass = np.sum(X * X, axis=0)
    eps_mass = 1e-10 * n_total
    a = []
    num = 0.0
    den = 0.0
    for i in range(X.shape[1]):
        if mass[i] < eps_mass:
            a.append(None)
            continue
        ai = float(L[:, i] @ X[:, i] / mass[i])
        a.append(ai)
        num += float(np.sum((L[:, i] - ai * X[:, i]) ** 2))
        den += float(np.sum(L[:, i] ** 2))
    residual = math.sqrt(num) / math.sqrt(den + _EPS_FIT)
    return DiagonalFit(a, residual, [float(m) for m in mass], len(X), excluded)


def relation_residual(params, grid, space=None):
    """Fit the constant in ``f f' + lam g g' = 0`` (E^3) or ``f f' = c g g'`` (E^4).

    The constant minimizes the squared relation over the grid; the report
    holds the normalized residual at that constant.  If ``g g'`` vanishes
    identically the constant is undetermined and the residual of ``f f'``
    alone is reported.
    """
    space = space or _space_of(params)
    us, reps = _u_values(grid)
    rot = as_rotation(params) if space == "rotation_E4" else params
    ff, gg = [], []
    excluded = 0
    for u in us:
        try:
            p = profile_values(rot, float(u))
        except DomainError:
            excluded += reps
            continue
        ff.append(p.f * p.fp)
        gg.append(p.g * p.gp)
    ff, gg = np.array(ff), np.array(gg)
    denom = float(gg @ gg)
    if denom < EPS_DEG**2 * max(len(gg), 1):
        values = [x / (1.0 + abs(x)) for x in ff]
        return ResidualReport.from_values(
            np.repeat(values, reps), excluded, "|f f'| / (1 + |f f'|)", note="constant undetermined: g g' = 0"
        )
    if space == "revolution_E3":
        const = -float(ff @ gg) / denom
        terms = [(x, const * y) for x, y in zip(ff, gg)]
        label = "|f f' + lam g g'| / (1 + |f f'| + |lam g g'|)"
    else:
        const = float(ff @ gg) / denom
        terms = [(x, -const * y) for x, y in zip(ff, gg)]
        label = "|f f' - c g g'| / (1 + |f f'| + |c g g'|)"
    values = [_normalized(t) for t in terms]
    return ResidualReport.from_values(np.repeat(values, reps), excluded, label, constant=const)


@dataclass(frozen=True)
class Thresholds:
    flat: float = 1e-6
    minimal: float = 1e-6
    pseudo_umbilical: float = 1e-6
    cft: float = 1e-6

    @classmethod
    def uniform(cls, tol):
        return cls(tol, tol, tol, tol)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Flag:
    yes: bool
    residual: float
    note: str = ""

    def as_dict(self):
        out = {"value": "yes" if self.yes else "no", "residual": self.residual}
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class ClassificationVerdict:
    flat: Flag
    minimal: Flag
    pseudo_umbilical: Flag
    cft: Flag
    thresholds: Thresholds
    reports: dict = field(default_factory=dict, repr=False)

    FLAGS = ("flat", "minimal", "pseudo_umbilical", "cft")

    def flags(self):
        return {name: getattr(self, name) for name in self.FLAGS}


def classify_surface(chart, grid, thresholds=None, samples=None):
    """Decide flat / minimal / pseudo-umbilical / coordinate finite type.

    Flat and minimal use the generic ``|K|`` and ``|H|``; pseudo-umbilicity
    uses the generic shape-operator test (vacuous when ``H = 0``).  The
    coordinate finite type flag is set for minimal surfaces, or when the
    diagonal fit residual and, for rotational charts, the pointwise constancy
    of ``A`` are both below threshold.
    """
    th = thresholds or Thresholds()
    samples, _ = _samples(chart, grid, samples)
    flat_r = flatness_residual(chart, grid, samples=samples)
    min_r = minimality_residual(chart, grid, samples=samples)
    pu = pseudo_umbilical_residual(chart, grid, samples=samples)
    fit = fit_diagonal(chart, grid, samples=samples)
    pointwise = None
    if _has_closed_form(chart):
        try:
            pointwise = pointwise_diagonal(chart.params, grid)
        except UndeterminedError:
            pointwise = None

    flat = Flag(flat_r.max_abs < th.flat, flat_r.max_abs)
    minimal = Flag(min_r.max_abs < th.minimal, min_r.max_abs)
    if pu.vacuous:
        pseudo = Flag(True, 0.0, "vacuous (H = 0)")
    else:
        ok = pu.generic.max_abs < th.pseudo_umbilical
        # minimal points were excluded from the generic test; they satisfy it trivially
        pseudo = Flag(ok or minimal.yes, pu.generic.max_abs)
    if minimal.yes:
        cft = Flag(True, min_r.max_abs, "minimal (A = 0)")
    else:
        constancy = pointwise.constancy if pointwise is not None else 0.0
        worst = max(fit.residual, constancy)
        note = "" if pointwise is not None else "no closed form; fit only"
        cft = Flag(fit.residual < th.cft and constancy < th.cft, worst, note)
    reports = {
        "flatness": flat_r,
        "minimality": min_r,
        "pseudo_umbilical": pu,
        "diagonal_fit": fit,
        "pointwise_diagonal": pointwise,
    }
    return ClassificationVerdict(flat, minimal, pseudo, cft, th, reports)
