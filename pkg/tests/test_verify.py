import json
import math

import numpy as np
import pytest

import rwprn.verify as verify
from conftest import FAMILY_BUILDERS, product_circle, spacelike_s3, timelike_h3
from rwprn.ambient import WarpingFunction
from rwprn.families import construct, expected_theta_constant
from rwprn.ode import CoefficientFunction as CF
from rwprn.surface import FrameError, Immersion, SurfaceGeometry
from rwprn.verify import (
    CheckResult,
    Grid,
    VerificationReport,
    ambient_check,
    check_codazzi,
    check_frame_equations,
    check_prn,
    check_ricci_flatness_consistency,
    check_theta_law,
    compare_closed_form,
    make_grid,
    nullity_histogram,
    shape_commutator_norm,
    spline_immersion,
    verify_family,
)

SMALL = dict(nu=7, nv=7)


def _grid(spec, **kw):
    return make_grid(spec.u_range, spec.v_range, **{**SMALL, **kw})


def _prn_on(spec, perturb=0.0, **kw):
    imm = construct(spec, perturb=perturb, strict=False)
    return check_prn(spec.f, spec.c, imm, _grid(spec, **kw), orientation=spec.orientation)


def test_grid_keeps_stencil_margin():
    g = make_grid((0.0, 1.0), (-2.0, 2.0), nu=5, nv=3)
    assert g.shape == (5, 3)
    assert g.u[0] == pytest.approx(8e-4) and g.v[-1] == pytest.approx(2.0 - 8 * 2e-4)
    assert list(g.points())[1] == (g.u[0], g.v[1])


def test_check_result_bookkeeping():
    res = CheckResult("demo", (2, 2), 1e-3)
    assert not res.passed
    res.record(1e-4, (0.0, 0.0))
    res.record(5e-4, (1.0, 0.5))
    res.skip(FrameError("x"))
    assert res.passed and res.argmax == (1.0, 0.5) and res.skipped["FrameError"] == 1
    res.record(float("nan"), (2.0, 2.0))
    assert not res.passed and res.to_dict()["max_residual"] is None
    assert str(res).startswith("[FAIL] demo")
    report = VerificationReport([res])
    assert json.loads(report.to_json())["passed"] is False


def test_prn_holds_on_every_family():
    for kind, build in FAMILY_BUILDERS.items():
        res = _prn_on(build())
        assert res.passed, (kind, res)
        assert res.details["nullity_histogram"] == {1: res.evaluated}


def test_horizontal_slice_raises_frame_error():
    f = WarpingFunction.exponential()
    slice_ = Immersion(0, lambda u, v: np.array([0.3, u, v, 0.0]), (-1, 1), (-1, 1))
    with pytest.raises(FrameError):
        check_prn(f, 0, slice_, make_grid((-1, 1), (-1, 1), nu=4, nv=4))


def test_perturbation_breaks_prn():
    res = _prn_on(spacelike_s3(), perturb=0.05)
    assert not res.passed and res.max_residual > 1e-3
    assert 0 in res.details["nullity_histogram"]


def test_prn_residual_grows_linearly_in_perturbation():
    small, large = (_prn_on(spacelike_s3(), perturb=e).max_residual for e in (1e-3, 1e-2))
    assert 5 <= large / small <= 20


@pytest.mark.parametrize("kind", sorted(FAMILY_BUILDERS))
def test_frame_equations_and_theta_law(kind):
    spec = FAMILY_BUILDERS[kind]()
    imm = construct(spec, strict=False)
    grid = _grid(spec, nu=5, nv=5)
    geo = SurfaceGeometry(spec.f, spec.c, imm, spec.orientation)
    frame = check_frame_equations(spec.f, spec.c, imm, grid, geometry=geo)
    assert frame.passed, frame.details
    theta = check_theta_law(spec.f, spec.c, imm, grid, expected=expected_theta_constant(spec), geometry=geo)
    assert theta.passed and theta.details["fit_error"] <= 1e-8


def test_product_surface_frame_and_theta():
    spec = product_circle()
    imm = construct(spec)
    grid = _grid(spec, nu=5, nv=5)
    frame = check_frame_equations(spec.f, spec.c, imm, grid)
    assert frame.passed and "theta = 0" in frame.details["per_identity"]
    theta = check_theta_law(spec.f, spec.c, imm, grid, expected=0.0)
    assert theta.passed and theta.details["law"] == "sinh(theta) f"


def test_theta_law_reports_wrong_constant():
    spec = timelike_h3()
    imm = construct(spec)
    res = check_theta_law(spec.f, spec.c, imm, _grid(spec, nu=4, nv=4), expected=spec.theta0 + 0.1)
    assert not res.passed and res.details["fit_error"] == pytest.approx(0.1, abs=1e-8)


def test_codazzi_on_tilted_plane():
    flat = WarpingFunction.constant(1.0)
    tilt = math.sinh(0.4), math.cosh(0.4)
    plane = Immersion(0, lambda u, v: np.array([tilt[0] * u, tilt[1] * u, v, 0.0]), (-1, 1), (-1, 1))
    res = check_codazzi(flat, 0, plane, make_grid((-1, 1), (-1, 1), nu=3, nv=3))
    assert res.passed and res.max_residual <= 1e-5  # round-off of nested differencing


def test_codazzi_in_flat_exponential_ambient():
    spec = product_circle(f=WarpingFunction.exponential(interval=(-1.0, 1.0)))
    imm = construct(spec)
    assert check_codazzi(spec.f, 0, imm, _grid(spec, nu=3, nv=3)).passed


@pytest.mark.parametrize("kind", ["SpacelikeS3", "TimelikeH3", "TimelikeRW0"])
def test_codazzi_on_families(kind):
    spec = FAMILY_BUILDERS[kind]()
    imm = construct(spec)
    assert check_codazzi(spec.f, spec.c, imm, _grid(spec, nu=3, nv=3), orientation=spec.orientation).passed


def test_codazzi_on_a_surface_without_prn():
    # Codazzi holds for every surface, so a bent family member must still pass
    spec = spacelike_s3()
    imm = construct(spec, perturb=0.05)
    res = check_codazzi(spec.f, spec.c, imm, _grid(spec, nu=3, nv=3))
    assert res.passed, res


def test_codazzi_detects_missing_curvature_term(monkeypatch):
    spec = spacelike_s3()
    imm = construct(spec)
    monkeypatch.setattr(verify, "constant_curvature_defect", lambda f, c, t: 0.0)
    res = check_codazzi(spec.f, spec.c, imm, _grid(spec, nu=3, nv=3))
    assert not res.passed and res.max_residual > 1e-2


def test_ricci_commutator_examples():
    eps = np.array([1.0, 1.0, -1.0, 1.0])
    prn = np.zeros((2, 2, 2))
    prn[0, 1, 1], prn[1, 1, 1] = 0.4, 2.0
    assert shape_commutator_norm((prn, eps)) == 0.0
    assert check_ricci_flatness_consistency((prn, eps)).passed
    mixed = np.array([np.diag([1.0, -1.0]), [[0.0, 1.0], [1.0, 0.0]]])
    # [diag(1,-1), offdiag] = 2 [[0,1],[-1,0]], Frobenius norm 2 sqrt 2
    assert shape_commutator_norm((mixed, np.ones(4))) == pytest.approx(2 * math.sqrt(2))
    half = np.array([np.diag([1.0, 0.0]), [[0.0, 1.0], [1.0, 0.0]]])
    assert shape_commutator_norm((half, np.ones(4))) == pytest.approx(math.sqrt(2))
    assert shape_commutator_norm((np.zeros((2, 2, 2)), eps)) == 0.0


def test_isolated_zero_of_a3():
    spec = spacelike_s3(a3=CF.polynomial([-0.5, 1.0]))
    res = compare_closed_form(spec, _grid(spec, nu=5, nv=9))
    assert res.passed, res


@pytest.mark.parametrize("kind", sorted(FAMILY_BUILDERS))
def test_closed_form_agreement(kind):
    spec = FAMILY_BUILDERS[kind]()
    res = compare_closed_form(spec, _grid(spec, nu=5, nv=5))
    assert res.passed, res
    diff = compare_closed_form(spec, _grid(spec, nu=3, nv=3), analytic=False, tol=1e-4)
    assert diff.passed, diff


def test_verify_family_battery_and_determinism():
    spec = FAMILY_BUILDERS["TimelikeS3"]()
    grid = _grid(spec, nu=4, nv=4)
    first = verify_family(spec, grid)
    assert first.passed and [c.name for c in first.checks] == [
        "prn", "frame_equations", "theta_law", "codazzi", "ricci_flatness", "closed_form"]
    assert verify_family(spec, grid).to_json() == first.to_json()


def test_verify_family_perturbed_skips_closed_form():
    spec = spacelike_s3()
    report = verify_family(spec, _grid(spec, nu=4, nv=4), checks=("prn", "closed_form"), perturb=0.01)
    assert [c.name for c in report.checks] == ["prn"] and not report.passed


def test_ambient_check_examples():
    flat = ambient_check(WarpingFunction.exponential(interval=(-1, 1)), 0)
    assert flat["status"] == "constant curvature everywhere" and not flat["admissible"]
    ok = ambient_check(WarpingFunction.polynomial([2.0, 1.0], interval=(-1, 1)), 0)
    assert ok["admissible"] and ok["sign_changes"] == []
    # defect of 1 + t^2 over c = 0 is 2(1 - t^2)/(1 + t^2)^2, zero at t = 1
    quad = ambient_check(WarpingFunction.polynomial([1.0, 0.0, 1.0], interval=(0.0, 2.0)), 0, n=200)
    assert not quad["admissible"]
    assert quad["sign_changes"] == [pytest.approx(1.0, abs=1e-12)]
    de_sitter = ambient_check(WarpingFunction.cosh(), 1)
    assert de_sitter["status"] == "constant curvature everywhere" and de_sitter["sign_changes"] == []


def test_spline_mesh_reproduces_nullity():
    spec = spacelike_s3()
    imm = construct(spec)
    us = np.linspace(*spec.u_range, 33)
    vs = np.linspace(*spec.v_range, 33)
    pts = np.array([[imm.point(u, v) for v in vs] for u in us])
    mesh = spline_immersion(1, us, vs, pts)
    grid = Grid(us[4:-4:6], vs[4:-4:6])
    direct = nullity_histogram(spec.f, 1, imm, grid)
    via_mesh = nullity_histogram(spec.f, 1, mesh, grid, rank_tol=1e-4)
    assert direct == via_mesh == {1: grid.shape[0] * grid.shape[1]}
    np.testing.assert_allclose(mesh.point(0.1, 0.35), imm.point(0.1, 0.35), atol=1e-7)
