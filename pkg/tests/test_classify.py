import math

import numpy as np
import pytest

from rotsurf.classify import (
    PointwiseDiagonal,
    Thresholds,
    UndeterminedError,
    classify_surface,
    fit_arrays,
    fit_diagonal,
    flatness_residual,
    minimality_residual,
    pointwise_diagonal,
    pseudo_umbilical_residual,
    relation_residual,
    vranceanu_ode_residual,
)
from rotsurf.families import GeneralizedRotationParams, explicit_chart, make_chart, preset
from rotsurf.geometry import Grid, analyze_point

N = 16


def grid_of(chart, n=N):
    return chart.grid(n, n)


@pytest.fixture(scope="module")
def clifford():
    return preset("clifford")


def test_flatness_generic_and_closed_form():
    chart = preset("flat_vranceanu", lam=2.0, mu=0.7)
    assert flatness_residual(chart, grid_of(chart)).max_abs < 1e-10
    assert flatness_residual(chart, grid_of(chart), "closed_form").max_abs < 1e-12
    sphere = preset("sphere")
    assert flatness_residual(sphere, grid_of(sphere)).max_abs == pytest.approx(1.0)
    assert flatness_residual(sphere, grid_of(sphere), "closed_form").max_abs > 0.1


def test_minimality(clifford):
    cat = preset("catenoid")
    assert minimality_residual(cat, grid_of(cat)).max_abs < 1e-10
    assert minimality_residual(cat, grid_of(cat), "closed_form").max_abs < 1e-12
    assert minimality_residual(clifford, grid_of(clifford)).max_abs == pytest.approx(1.0)


def test_pseudo_umbilical(clifford):
    pu = pseudo_umbilical_residual(clifford, grid_of(clifford))
    assert pu.generic.max_abs < 1e-12 and pu.closed_form.max_abs < 1e-12
    cat = preset("catenoid")
    pu = pseudo_umbilical_residual(cat, grid_of(cat))
    assert pu.vacuous and "vacuous" in pu.generic.note
    # a generic rotation surface is not pseudo-umbilical on either path
    rot = make_chart(GeneralizedRotationParams("2+cos(u)", "1.5+sin(u)", 1.0, 2.0, (0.0, 6.0)))
    pu = pseudo_umbilical_residual(rot, grid_of(rot))
    assert pu.generic.max_abs > 1e-2 and pu.closed_form.max_abs > 1e-2


def test_sphere_is_pseudo_umbilical():
    sphere = preset("sphere", r=2.0)
    pu = pseudo_umbilical_residual(sphere, grid_of(sphere))
    assert pu.generic.max_abs < 1e-12 and pu.closed_form.max_abs < 1e-12


@pytest.mark.parametrize(
    "r, kind, small",
    [
        ("3*exp(0.4*u)", "flat", True),
        ("1/sqrt(sin(2*u))", "minimal", True),
        ("1/sqrt(sin(2*u))", "flat", False),
        ("exp(u)", "minimal", False),
    ],
)
def test_vranceanu_odes(r, kind, small):
    report = vranceanu_ode_residual(r, kind, np.linspace(0.2, 1.3, 40))
    assert (report.max_abs < 1e-12) == small


def test_vranceanu_cft_ode_fits_constant():
    # r = lam / sqrt((1+c) cos 2u + 1 - c) solves the ODE for that c
    c = 0.4
    r = f"2 / sqrt({1 + c} * cos(2*u) + {1 - c})"
    report = vranceanu_ode_residual(r, "cft", np.linspace(0.1, 0.9, 30))
    assert report.constant == pytest.approx(c, abs=1e-10)
    assert report.max_abs < 1e-12
    fixed = vranceanu_ode_residual(r, "cft", np.linspace(0.1, 0.9, 30), c=0.0)
    assert fixed.constant == 0.0 and fixed.max_abs > 1e-3


def test_vranceanu_ode_rejects_unknown_kind():
    with pytest.raises(ValueError):
        vranceanu_ode_residual("u", "round", np.array([0.5]))


@pytest.mark.parametrize(
    "chart",
    [
        make_chart(GeneralizedRotationParams("2+cos(u)", "1.5+sin(u)", 1.0, 2.0, (0.2, 1.4))),
        preset("cft_vranceanu"),
        preset("cone"),
        preset("flat_vranceanu", lam=1.0, mu=1.0),
    ],
    ids=["c_ne_d", "cft_vranceanu", "cone", "flat_mu1"],
)
def test_pointwise_entries_match_generic_laplacian(chart):
    # an independent reading: a_ii = (Delta x)_i / x_i at a point where x_i != 0
    us = np.linspace(*chart.u_range, 7)[1:-1]
    pw = pointwise_diagonal(chart.params, us)
    for u, row in zip(pw.u, pw.entries):
        s = analyze_point(chart, float(u), 0.37)
        np.testing.assert_allclose(row, s.laplacian / s.position, rtol=1e-9, atol=1e-11)


def test_pointwise_known_values(clifford):
    pw = pointwise_diagonal(clifford.params, grid_of(clifford))
    assert isinstance(pw, PointwiseDiagonal)
    np.testing.assert_allclose(pw.entries, 2.0, atol=1e-13)
    assert pw.constancy < 1e-10
    sphere = preset("sphere", r=2.0)
    np.testing.assert_allclose(pointwise_diagonal(sphere.params, grid_of(sphere)).mean(), 0.5, atol=1e-13)
    cone = preset("cone")
    pw = pointwise_diagonal(cone.params, np.array([0.5, 1.0]))
    np.testing.assert_allclose(pw.entries[:, 0], [-2.0, -0.5], rtol=1e-12)
    np.testing.assert_allclose(pw.distinct[:, 1], [2.0, 0.5], rtol=1e-12)
    flat = preset("flat_vranceanu", lam=1.0, mu=1.0)
    assert pointwise_diagonal(flat.params, grid_of(flat)).constancy > 0.1


def test_pointwise_undetermined():
    cat = preset("catenoid")
    with pytest.raises(UndeterminedError):
        pointwise_diagonal(cat.params, np.array([0.0]))


def test_fit_diagonal(clifford):
    fit = fit_diagonal(clifford, grid_of(clifford))
    np.testing.assert_allclose(fit.a, 2.0, atol=1e-12)
    assert fit.residual < 1e-12 and fit.samples_excluded == 0
    sphere = preset("sphere", r=2.0)
    np.testing.assert_allclose(fit_diagonal(sphere, grid_of(sphere)).a, 0.5, atol=1e-12)


def test_fit_marks_empty_coordinates_undetermined():
    plane = explicit_chart(("u", "v", "0"), (0.1, 1.0), (0.1, 1.0))
    fit = fit_diagonal(plane, grid_of(plane, 8))
    assert fit.a[2] is None and fit.undetermined == [False, False, True]
    assert fit.a[0] == pytest.approx(0.0, abs=1e-14)


def test_fit_arrays_recovers_constants():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 3))
    L = X * np.array([1.5, -2.0, 0.25])
    fit = fit_arrays(X, L, 50)
    np.testing.assert_allclose(fit.a, [1.5, -2.0, 0.25], rtol=1e-12)
    assert fit.residual < 1e-14


def test_fit_diagonal_all_excluded():
    sphere = explicit_chart(("sin(u)*cos(v)", "sin(u)*sin(v)", "cos(u)"), (0.0, 1.0))
    with pytest.raises(UndeterminedError):
        fit_diagonal(sphere, Grid(np.array([0.0]), np.array([0.5])))


def test_relation_constants():
    for r in (1.0, 2.0):
        sphere = preset("sphere", r=r)
        rep = relation_residual(sphere.params, grid_of(sphere))
        assert rep.constant == pytest.approx(1.0, abs=1e-12) and rep.max_abs < 1e-12
    cone = preset("cone")
    rep = relation_residual(cone.params, grid_of(cone))
    assert rep.constant == pytest.approx(-1.0, abs=1e-12) and rep.max_abs < 1e-12
    rot = make_chart(GeneralizedRotationParams("2*u", "u", 1.0, 1.0, (0.5, 1.5)))
    rep = relation_residual(rot.params, grid_of(rot))
    assert rep.constant == pytest.approx(4.0, abs=1e-12)


def test_classify_clifford(clifford):
    v = classify_surface(clifford, clifford.grid(32, 32))
    assert {k: f.yes for k, f in v.flags().items()} == {
        "flat": True,
        "minimal": False,
        "pseudo_umbilical": True,
        "cft": True,
    }
    assert v.thresholds == Thresholds()


def test_classify_other_instances():
    cat = preset("catenoid")
    v = classify_surface(cat, grid_of(cat))
    assert v.minimal.yes and v.cft.yes and v.pseudo_umbilical.yes and not v.flat.yes
    flat = preset("flat_vranceanu", lam=1.0, mu=1.0)
    v = classify_surface(flat, grid_of(flat))
    assert v.flat.yes and v.pseudo_umbilical.yes and not v.cft.yes
    cone = preset("cone")
    assert not classify_surface(cone, grid_of(cone)).cft.yes
    sphere = preset("sphere", r=2.0)
    v = classify_surface(sphere, grid_of(sphere))
    assert v.cft.yes and v.pseudo_umbilical.yes and not v.flat.yes


def test_thresholds_are_applied(clifford):
    loose = classify_surface(clifford, grid_of(clifford), Thresholds.uniform(2.0))
    assert loose.minimal.yes
    assert Thresholds.uniform(1e-3).as_dict() == dict.fromkeys(("flat", "minimal", "pseudo_umbilical", "cft"), 1e-3)


def test_flag_serialization():
    cat = preset("catenoid")
    flags = classify_surface(cat, grid_of(cat, 8)).flags()
    d = flags["cft"].as_dict()
    assert d["value"] == "yes" and "minimal" in d["note"] and math.isfinite(d["residual"])
