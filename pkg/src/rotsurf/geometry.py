"""Extrinsic geometry of a parametrized surface patch in E^3 or E^4.

Everything here is computed from the second-order jets of the coordinate
functions at a point: the first fundamental form and its derivatives, an
orthonormal tangent/normal frame, the second fundamental form in that frame,
Gaussian curvature, the mean curvature vector and the Laplace-Beltrami image
of the coordinate functions.

Sign convention: the Laplacian is ``Delta = -div grad``.  With this sign a
surface is minimal iff its coordinate functions are harmonic, spheres have
positive eigenvalues, and the Beltrami formula reads ``Delta X = -2 H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .jet import DomainError, Jet2, var_u, var_v

__all__ = [
    "EPS_REG",
    "GeometryError",
    "DegeneratePointError",
    "FrameError",
    "OutOfDomainError",
    "Chart",
    "Grid",
    "FirstFundamentalForm",
    "OrthoFrames",
    "SecondFundamentalForm",
    "CurvatureReport",
    "PointGeometry",
    "ResidualReport",
    "eval_chart",
    "chart_vectors",
    "first_form",
    "frames",
    "rotate_normals",
    "second_form",
    "shape_operator",
    "gaussian_curvature",
    "mean_curvature",
    "curvature_report",
    "laplace_beltrami_coords",
    "analyze_point",
    "sample_grid",
    "beltrami_check",
]

EPS_REG = 1e-12
_EPS_FRAME = 1e-10
_TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    pass


class DegeneratePointError(GeometryError):
    """The patch is not regular at the requested point (W^2 too small)."""


class FrameError(GeometryError):
    """The normal space could not be spanned by projected basis vectors."""


class OutOfDomainError(GeometryError):
    pass


# errors that exclude a sample from a grid rather than abort the run
SAMPLE_ERRORS = (DegeneratePointError, FrameError, DomainError, ZeroDivisionError)


@dataclass(frozen=True)
class Chart:
    """A surface patch ``(u, v) -> X(u, v)`` in E^3 or E^4.

    ``evaluator`` receives the seeded ``u`` and ``v`` jets and returns one
    jet per ambient coordinate.  ``u_period`` / ``v_period`` record the
    parameter periods when the chart is periodic in that direction.
    """

    ambient_dim: int
    evaluator: Callable[[Jet2, Jet2], Sequence[Jet2]]
    u_range: tuple
    v_range: tuple = (0.0, _TWO_PI)
    family: str = "explicit"
    params: object = None
    u_period: Optional[float] = None
    v_period: Optional[float] = None

    def __post_init__(self):
        if self.ambient_dim not in (3, 4):
            raise ValueError(f"ambient_dim must be 3 or 4, got {self.ambient_dim}")
        for name in ("u_range", "v_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{name} must be a finite interval with lo < hi, got {(lo, hi)}")

    def contains(self, u, v):
        tol = 1e-12
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        return u0 - tol <= u <= u1 + tol and v0 - tol <= v <= v1 + tol

    def grid(self, nu=32, nv=32):
        return Grid.cell_centered(self.u_range, self.v_range, nu, nv)

    def with_domain(self, u_range=None, v_range=None):
        return replace(
            self,
            u_range=tuple(u_range) if u_range is not None else self.u_range,
            v_range=tuple(v_range) if v_range is not None else self.v_range,
        )

    def scaled(self, s):
        """The homothetic chart ``s * X``."""
        inner = self.evaluator

        def evaluator(u, v):
            return [s * x for x in inner(u, v)]

        return replace(self, evaluator=evaluator, family=f"scaled:{self.family}", params=None)

    def spans_period(self, axis):
        lo, hi = self.u_range if axis == "u" else self.v_range
        period = self.u_period if axis == "u" else self.v_period
        return period is not None and abs((hi - lo) - period) < 1e-9


@dataclass(frozen=True)
class Grid:
    """Tensor grid of sample parameters, traversed row-major (u outer)."""

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def cell_centered(cls, u_range, v_range, nu, nv):
        if nu < 1 or nv < 1:
            raise ValueError("grid dimensions must be positive")
        return cls(_centers(u_range, nu), _centers(v_range, nv))

    @property
    def shape(self):
        return (len(self.u), len(self.v))

    @property
    def size(self):
        return len(self.u) * len(self.v)

    def points(self):
        for u in self.u:
            for v in self.v:
                yield float(u), float(v)


def _centers(interval, n):
    lo, hi = interval
    step = (hi - lo) / n
    return lo + step * (np.arange(n) + 0.5)


@dataclass(frozen=True)
class FirstFundamentalForm:
    E: float
    F: float
    G: float
    W2: float
    E_u: float
    E_v: float
    F_u: float
    F_v: float
    G_u: float
    G_v: float

    def matrix(self):
        return np.array([[self.E, self.F], [self.F, self.G]])

    def inverse(self):
        return np.array([[self.G, -self.F], [-self.F, self.E]]) / self.W2


@dataclass(frozen=True)
class OrthoFrames:
    """Orthonormal tangent frame plus normal frame at a point.

    ``e1 = alpha X_u`` and ``e2 = beta X_u + gamma X_v``.
    """

    e1: np.ndarray
    e2: np.ndarray
    normals: tuple
    alpha: float
    beta: float
    gamma: float

    def as_matrix(self):
        return np.vstack([self.e1, self.e2, *self.normals])


@dataclass(frozen=True)
class SecondFundamentalForm:
    """``h[k, i, j] = <h(e_i, e_j), N_k>`` in the orthonormal frame."""

    h: np.ndarray

    @property
    def codim(self):
        return self.h.shape[0]


@dataclass(frozen=True)
class CurvatureReport:
    K: float
    H_vec: np.ndarray
    H_norm: float


@dataclass(frozen=True)
class ResidualReport:
    """Summary of a pointwise residual over a grid."""

    max_abs: float
    rms: float
    samples_used: int
    samples_excluded: int
    normalization: str
    note: str = ""
    constant: Optional[float] = None

    @classmethod
    def from_values(cls, values, excluded, normalization, note="", constant=None):
        values = np.abs(np.asarray(values, dtype=float))
        if values.size:
            max_abs = float(values.max())
            rms = float(math.sqrt(float(np.mean(values**2))))
            # rms can exceed max by an ulp when all values are equal
            rms = min(rms, max_abs)
        else:
            max_abs = rms = 0.0
        return cls(max_abs, rms, int(values.size), int(excluded), normalization, note, constant)

    def as_dict(self):
        out = {
            "max_abs": self.max_abs,
            "rms": self.rms,
            "samples_used": self.samples_used,
            "samples_excluded": self.samples_excluded,
            "normalization": self.normalization,
        }
        if self.note:
            out["note"] = self.note
        if self.constant is not None:
            out["constant"] = self.constant
        return out


def eval_chart(chart, u, v):
    """Coordinate jets of ``chart`` at ``(u, v)``."""
    if not chart.contains(u, v):
        raise OutOfDomainError(
            f"point ({u}, {v}) outside domain {chart.u_range} x {chart.v_range}"
        )
    jets = list(chart.evaluator(var_u(u), var_v(v)))
    if len(jets) != chart.ambient_dim:
        raise GeometryError(f"chart returned {len(jets)} coordinates, expected {chart.ambient_dim}")
    return jets


def chart_vectors(jets):
    """Stack jets into ``(X, X_u, X_v, X_uu, X_uv, X_vv)`` arrays."""
    arr = np.array([j.fields() for j in jets]).T
    return arr[0], arr[1], arr[2], arr[3], arr[4], arr[5]


def first_form(jets):
    """First fundamental form and its analytic first derivatives."""
    _, Xu, Xv, Xuu, Xuv, Xvv = chart_vectors(jets)
    E = float(Xu @ Xu)
    F = float(Xu @ Xv)
    G = float(Xv @ Xv)
    W2 = E * G - F * F
    if not W2 > EPS_REG:
        raise DegeneratePointError(f"W^2 = {W2:.3e} <= {EPS_REG:g}")
    return FirstFundamentalForm(
        E=E,
        F=F,
        G=G,
        W2=W2,
        E_u=2.0 * float(Xuu @ Xu),
        E_v=2.0 * float(Xuv @ Xu),
        F_u=float(Xuu @ Xv) + float(Xu @ Xuv),
        F_v=float(Xuv @ Xv) + float(Xu @ Xvv),
        G_u=2.0 * float(Xuv @ Xv),
        G_v=2.0 * float(Xvv @ Xv),
    )


def frames(jets, form):
    """Orthonormal frame with pivoted normals.

    Tangents come from Gram-Schmidt on ``X_u, X_v``.  Normals are the
    standard basis vectors projected onto the normal space, taken in order of
    decreasing residual norm and orthonormalized; each normal is signed so
    its first nonzero component is positive.
    """
    _, Xu, Xv, _, _, _ = chart_vectors(jets)
    n = len(Xu)
    sqrtE = math.sqrt(form.E)
    W = math.sqrt(form.W2)
    alpha = 1.0 / sqrtE
    gamma = sqrtE / W
    beta = -form.F / (sqrtE * W)
    e1 = alpha * Xu
    e2 = beta * Xu + gamma * Xv

    proj = np.eye(n) - np.outer(e1, e1) - np.outer(e2, e2)
    norms = np.linalg.norm(proj, axis=0)
    order = np.argsort(-norms, kind="stable")
    normals = []
    for j in order:
        cand = proj[:, j].copy()
        for N in normals:
            cand -= (cand @ N) * N
        # re-project once more against the tangents to clean round-off
        cand -= (cand @ e1) * e1 + (cand @ e2) * e2
        size = np.linalg.norm(cand)
        if size < _EPS_FRAME:
            continue
        normals.append(_signed(cand / size))
        if len(normals) == n - 2:
            break
    if len(normals) < n - 2:
        raise FrameError("normal space is rank deficient")
    return OrthoFrames(e1, e2, tuple(normals), alpha, beta, gamma)


def _signed(vec):
    for c in vec:
        if abs(c) > _EPS_FRAME:
            return vec if c > 0 else -vec
    return vec


def rotate_normals(fr, angle):
    """Same frame with the first two normals rotated by ``angle``."""
    if len(fr.normals) < 2:
        return fr
    c, s = math.cos(angle), math.sin(angle)
    n1, n2 = fr.normals[0], fr.normals[1]
    rotated = (c * n1 + s * n2, -s * n1 + c * n2) + tuple(fr.normals[2:])
    return replace(fr, normals=rotated)


def second_form(jets, fr):
    _, _, _, Xuu, Xuv, Xvv = chart_vectors(jets)
    a, b, c = fr.alpha, fr.beta, fr.gamma
    h = np.empty((len(fr.normals), 2, 2))
    for k, N in enumerate(fr.normals):
        L = float(Xuu @ N)
        M = float(Xuv @ N)
        Nn = float(Xvv @ N)
        h11 = a * a * L
        h12 = a * (b * L + c * M)
        h22 = b * b * L + 2.0 * b * c * M + c * c * Nn
        h[k, 0, 0] = h11
        h[k, 0, 1] = h[k, 1, 0] = h12
        h[k, 1, 1] = h22
    return SecondFundamentalForm(h)


def shape_operator(sff, k):
    """Matrix of the shape operator ``A_{N_k}`` in the tangent frame (0-based k)."""
    return sff.h[k].copy()


def gaussian_curvature(sff):
    h = sff.h
    return float(np.sum(h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] ** 2))


def mean_curvature(sff, fr):
    coeff = 0.5 * (sff.h[:, 0, 0] + sff.h[:, 1, 1])
    H = sum(c * N for c, N in zip(coeff, fr.normals))
    return H, float(np.linalg.norm(H))


def curvature_report(sff, fr):
    H, Hn = mean_curvature(sff, fr)
    return CurvatureReport(gaussian_curvature(sff), H, Hn)


def _christoffel(form):
    # dg[l, i, j] = d_l g_ij
    dg = np.array(
        [
            [[form.E_u, form.F_u], [form.F_u, form.G_u]],
            [[form.E_v, form.F_v], [form.F_v, form.G_v]],
        ]
    )
    ginv = form.inverse()
    # first kind: [ij, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    first = 0.5 * (
        dg + np.einsum("jil->ijl", dg) - np.einsum("lij->ijl", dg)
    )
    return np.einsum("kl,ijl->kij", ginv, first)


def laplace_beltrami_coords(jets, form):
    """``Delta x_i`` for every ambient coordinate, ``Delta = -div grad``.

    Uses ``Delta f = -g^{ij} (f_ij - Gamma^k_ij f_k)`` with the Christoffel
    symbols built from the analytic metric derivatives, so only second
    partials of the chart are needed.
    """
    _, Xu, Xv, Xuu, Xuv, Xvv = chart_vectors(jets)
    ginv = form.inverse()
    gamma = _christoffel(form)
    first = (Xu, Xv)
    second = ((Xuu, Xuv), (Xuv, Xvv))
    out = np.zeros_like(Xu)
    for i in range(2):
        for j in range(2):
            if ginv[i, j] == 0.0:
                continue
            hess = second[i][j] - gamma[0, i, j] * first[0] - gamma[1, i, j] * first[1]
            out += ginv[i, j] * hess
    return -out


@dataclass(frozen=True)
class PointGeometry:
    u: float
    v: float
    position: np.ndarray
    jets: list = field(repr=False)
    form: FirstFundamentalForm = field(repr=False)
    frames: OrthoFrames = field(repr=False)
    sff: SecondFundamentalForm = field(repr=False)
    curvature: CurvatureReport = field(repr=False)
    laplacian: np.ndarray = field(repr=False)


def analyze_point(chart, u, v):
    """All generic quantities at one parameter point."""
    jets = eval_chart(chart, u, v)
    form = first_form(jets)
    fr = frames(jets, form)
    sff = second_form(jets, fr)
    pos = np.array([j.val for j in jets])
    return PointGeometry(
        u, v, pos, jets, form, fr, sff, curvature_report(sff, fr), laplace_beltrami_coords(jets, form)
    )


def sample_grid(chart, grid):
    """Analyze every grid point; returns ``(samples, excluded_count)``.

    Points where the patch is degenerate or a profile leaves its domain are
    excluded and counted, never interpolated.
    """
    samples = []
    excluded = 0
    for u, v in grid.points():
        try:
            samples.append(analyze_point(chart, u, v))
        except SAMPLE_ERRORS:
            excluded += 1
    return samples, excluded


def beltrami_check(chart, grid, samples=None):
    """Residual of ``Delta X = -2 H`` normalized by ``1 + |Delta X|``."""
    if samples is None:
        samples, excluded = sample_grid(chart, grid)
    else:
        excluded = grid.size - len(samples)
    values = [
        np.linalg.norm(s.laplacian + 2.0 * s.curvature.H_vec) / (1.0 + np.linalg.norm(s.laplacian))
        for s in samples
    ]
    return ResidualReport.from_values(values, excluded, "|dX + 2H| / (1 + |dX|)")
