"""Generic geometry against a frame-free sympy oracle.

The oracle never builds an orthonormal frame: curvature comes from normal
projections of the second partials, and the Laplacian from the divergence
form ``-(1/sqrt g) d_i (sqrt g g^ij d_j x)``.
"""

import math

import numpy as np
import pytest
import sympy as sp

from rotsurf.families import GeneralizedRotationParams, explicit_chart, make_chart, preset
from rotsurf.geometry import (
    DegeneratePointError,
    Grid,
    OutOfDomainError,
    analyze_point,
    beltrami_check,
    chart_vectors,
    curvature_report,
    eval_chart,
    first_form,
    frames,
    rotate_normals,
    sample_grid,
    second_form,
)

u_, v_ = sp.symbols("u v")

CHARTS = {
    "graph": ("u", "v", "0.5*sin(u)*cos(2*v) + u*v/3"),
    "torus": ("(2+cos(u))*cos(v)", "(2+cos(u))*sin(v)", "sin(u)"),
    "e4_generic": ("u*cos(v)", "sin(u)*v", "cos(u+v)", "u^2 - v"),
    "e4_rotation": ("(2+cos(u))*cos(v)", "(2+cos(u))*sin(v)", "(1.5+sin(u))*cos(2*v)", "(1.5+sin(u))*sin(2*v)"),
}
DOMAIN = ((0.2, 1.2), (0.2, 1.2))


class Oracle:
    def __init__(self, coords):
        X = sp.Matrix([sp.sympify(c.replace("^", "**"), locals={"u": u_, "v": v_}) for c in coords])
        Xu, Xv = X.diff(u_), X.diff(v_)
        g = sp.Matrix([[Xu.dot(Xu), Xu.dot(Xv)], [Xv.dot(Xu), Xv.dot(Xv)]])
        det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
        # explicit adjugate: sympy's general inverse simplifies and is slow
        ginv = sp.Matrix([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det
        sq = sp.sqrt(det)
        lap = []
        for x in X:
            grad = ginv * sp.Matrix([x.diff(u_), x.diff(v_)])
            lap.append(-(sp.diff(sq * grad[0], u_) + sp.diff(sq * grad[1], v_)) / sq)
        parts = [X, Xu, Xv, X.diff(u_, 2), X.diff(u_, v_), X.diff(v_, 2)]
        self._parts = sp.lambdify((u_, v_), [list(p) for p in parts], "math")
        self._g = sp.lambdify((u_, v_), [m.tolist() for m in (g, g.diff(u_), g.diff(v_))], "math")
        self._lap = sp.lambdify((u_, v_), lap, "math")

    def parts(self, u, v):
        return [np.array(p, dtype=float).ravel() for p in self._parts(u, v)]

    def metric(self, u, v):
        return [np.array(m, dtype=float) for m in self._g(u, v)]

    def curvature(self, u, v):
        _, Xu, Xv, Xuu, Xuv, Xvv = self.parts(u, v)
        T = np.column_stack([Xu, Xv])
        g = T.T @ T
        gi = np.linalg.inv(g)

        def perp(y):
            return y - T @ (gi @ (T.T @ y))

        Puu, Puv, Pvv = perp(Xuu), perp(Xuv), perp(Xvv)
        H = 0.5 * (gi[0, 0] * Puu + 2 * gi[0, 1] * Puv + gi[1, 1] * Pvv)
        K = (Puu @ Pvv - Puv @ Puv) / np.linalg.det(g)
        return K, H

    def laplacian(self, u, v):
        return np.array(self._lap(u, v), dtype=float)


@pytest.fixture(scope="module", params=sorted(CHARTS))
def case(request):
    coords = CHARTS[request.param]
    return explicit_chart(coords, *DOMAIN), Oracle(coords)


POINTS = [(0.3, 0.45), (0.71, 0.93), (1.05, 0.27), (0.5, 1.1)]


@pytest.mark.parametrize("u, v", POINTS)
def test_jets_and_metric(case, u, v):
    chart, oracle = case
    jets = eval_chart(chart, u, v)
    for got, want in zip(chart_vectors(jets), oracle.parts(u, v)):
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-13)
    form = first_form(jets)
    g, gu, gv = oracle.metric(u, v)
    np.testing.assert_allclose(form.matrix(), g, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose([form.E_u, form.F_u, form.G_u], [gu[0, 0], gu[0, 1], gu[1, 1]], atol=1e-12)
    np.testing.assert_allclose([form.E_v, form.F_v, form.G_v], [gv[0, 0], gv[0, 1], gv[1, 1]], atol=1e-12)


@pytest.mark.parametrize("u, v", POINTS)
def test_curvature_and_laplacian(case, u, v):
    chart, oracle = case
    s = analyze_point(chart, u, v)
    K, H = oracle.curvature(u, v)
    assert s.curvature.K == pytest.approx(K, rel=1e-10, abs=1e-11)
    np.testing.assert_allclose(s.curvature.H_vec, H, rtol=1e-10, atol=1e-11)
    np.testing.assert_allclose(s.laplacian, oracle.laplacian(u, v), rtol=1e-9, atol=1e-10)


def test_metric_derivatives_by_finite_differences(case):
    chart, _ = case
    u, v, h = 0.6, 0.7, 1e-5
    form = first_form(eval_chart(chart, u, v))

    def efg(a, b):
        f = first_form(eval_chart(chart, a, b))
        return np.array([f.E, f.F, f.G])

    du = (efg(u + h, v) - efg(u - h, v)) / (2 * h)
    dv = (efg(u, v + h) - efg(u, v - h)) / (2 * h)
    np.testing.assert_allclose(du, [form.E_u, form.F_u, form.G_u], rtol=1e-7, atol=1e-8)
    np.testing.assert_allclose(dv, [form.E_v, form.F_v, form.G_v], rtol=1e-7, atol=1e-8)


@pytest.mark.parametrize("u, v", POINTS)
def test_frame_is_orthonormal_and_signed(case, u, v):
    chart, _ = case
    jets = eval_chart(chart, u, v)
    fr = frames(jets, first_form(jets))
    M = fr.as_matrix()
    np.testing.assert_allclose(M @ M.T, np.eye(len(M)), atol=1e-12)
    _, Xu, Xv, *_ = chart_vectors(jets)
    # e1 is along X_u and (e1, e2) spans the tangent plane with the same orientation
    np.testing.assert_allclose(np.cross(fr.e1, Xu) if len(Xu) == 3 else 0, 0, atol=1e-12)
    assert fr.e1 @ Xu > 0 and fr.e2 @ Xv > 0
    for N in fr.normals:
        assert abs(N @ Xu) < 1e-12 and abs(N @ Xv) < 1e-12
        first = next(c for c in N if abs(c) > 1e-10)
        assert first > 0


@pytest.mark.parametrize("angle", [0.3, 1.7, math.pi])
def test_curvature_is_frame_invariant(angle):
    chart = explicit_chart(CHARTS["e4_generic"], *DOMAIN)
    jets = eval_chart(chart, 0.7, 0.4)
    fr = frames(jets, first_form(jets))
    base = curvature_report(second_form(jets, fr), fr)
    fr2 = rotate_normals(fr, angle)
    rot = curvature_report(second_form(jets, fr2), fr2)
    assert rot.K == pytest.approx(base.K, abs=1e-13)
    np.testing.assert_allclose(rot.H_vec, base.H_vec, atol=1e-13)


def test_weingarten_by_differentiating_normals():
    # tangential part of d(N_k) along X_u is -A_{N_k}(X_u)
    chart = explicit_chart(CHARTS["e4_generic"], *DOMAIN)
    u, v, h = 0.8, 0.6, 1e-6

    def normals_at(a, b):
        jets = eval_chart(chart, a, b)
        return frames(jets, first_form(jets)).normals

    jets = eval_chart(chart, u, v)
    fr = frames(jets, first_form(jets))
    sff = second_form(jets, fr)
    Xu = chart_vectors(jets)[1]
    plus, minus = normals_at(u + h, v), normals_at(u - h, v)
    for k, N in enumerate(fr.normals):
        assert plus[k] @ N > 0.99 and minus[k] @ N > 0.99
        dN = (plus[k] - minus[k]) / (2 * h)
        # X_u = |X_u| e1, so A(X_u) = |X_u| (h11 e1 + h12 e2)
        shape_xu = np.linalg.norm(Xu) * (sff.h[k, 0, 0] * fr.e1 + sff.h[k, 0, 1] * fr.e2)
        tangential = (dN @ fr.e1) * fr.e1 + (dN @ fr.e2) * fr.e2
        np.testing.assert_allclose(tangential, -shape_xu, atol=1e-8)


def test_clifford_values():
    chart = preset("clifford")
    s = analyze_point(chart, 0.0, 0.0)
    np.testing.assert_array_equal(s.position, [1.0, 0.0, 0.0, 0.0])
    assert abs(s.frames.e1 @ [0, 0, 1, 0]) == pytest.approx(1.0)
    for u, v in [(0.3, 0.4), (2.0, 5.0)]:
        s = analyze_point(chart, u, v)
        np.testing.assert_allclose([s.form.E, s.form.F, s.form.G], [1, 0, 1], atol=1e-15)
        assert abs(s.curvature.K) < 1e-14
        assert s.curvature.H_norm == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(s.curvature.H_vec, -s.position, atol=1e-14)
        np.testing.assert_allclose(s.laplacian, 2 * s.position, atol=1e-13)


def test_sphere_curvature_scales():
    for r in (1.0, 2.0, 0.5):
        s = analyze_point(preset("sphere", r=r), 0.9, 0.3)
        assert s.curvature.K == pytest.approx(1 / r**2, rel=1e-13)
        assert s.curvature.H_norm == pytest.approx(1 / r, rel=1e-13)


def test_homothety():
    chart = explicit_chart(CHARTS["torus"], *DOMAIN)
    a = analyze_point(chart, 0.5, 0.5)
    b = analyze_point(chart.scaled(3.0), 0.5, 0.5)
    assert b.curvature.K == pytest.approx(a.curvature.K / 9, rel=1e-12)
    assert b.curvature.H_norm == pytest.approx(a.curvature.H_norm / 3, rel=1e-12)


def test_degenerate_points_are_excluded():
    # explicit chart: the revolution family refuses profiles touching the axis
    chart = explicit_chart(("sin(u)*cos(v)", "sin(u)*sin(v)", "cos(u)"), (0.0, math.pi))
    with pytest.raises(DegeneratePointError):
        analyze_point(chart, 0.0, 0.3)
    grid = Grid(np.array([0.0, 1.0]), np.array([0.5, 1.5, 2.5]))
    samples, excluded = sample_grid(chart, grid)
    assert (len(samples), excluded) == (3, 3)


def test_out_of_domain():
    with pytest.raises(OutOfDomainError):
        eval_chart(preset("sphere"), 0.0, 0.0)


def test_grid_is_cell_centered_row_major():
    g = Grid.cell_centered((0.0, 1.0), (0.0, 2.0), 2, 4)
    np.testing.assert_allclose(g.u, [0.25, 0.75])
    np.testing.assert_allclose(g.v, [0.25, 0.75, 1.25, 1.75])
    pts = list(g.points())
    assert pts[:2] == [(0.25, 0.25), (0.25, 0.75)] and len(pts) == g.size == 8


def test_beltrami_on_a_rotation_chart():
    rot = make_chart(GeneralizedRotationParams("2+cos(u)", "1.5+sin(u)", 1.0, 2.0, (0.0, 6.0)))
    report = beltrami_check(rot, rot.grid(12, 12))
    assert report.max_abs < 1e-10 and report.samples_excluded == 0
