import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FAMILY_BUILDERS, product_circle, spacelike_rw0, spacelike_s3
from rwprn.ambient import WarpingFunction, ambient_metric, d_dt, metric_matrix
from rwprn.families import construct
from rwprn.surface import (
    DegenerateError,
    FrameError,
    Immersion,
    SurfaceGeometry,
    adapted_frame,
    coordinate_second_fundamental_form,
    first_jet,
    frame_orthonormality_defect,
    induced_metric,
    jet,
    mean_curvature_vector,
    relative_nullity_dim,
    second_fundamental_form,
    shape_operator,
    t_eta_split,
    theta_decomposition_residual,
)

FLAT = WarpingFunction.constant(1.0)
SAMPLE_POINTS = [(-0.4, 0.3), (0.2, 0.6), (0.45, 0.85)]


def _plane(point, name="plane"):
    return Immersion(0, point, (-1.0, 1.0), (-1.0, 1.0), None, name)


def _geometry(spec, **kw):
    return SurfaceGeometry(spec.f, spec.c, construct(spec, strict=False, **kw), spec.orientation)


def test_linear_immersion_jet():
    imm = _plane(lambda u, v: np.array([u, v, 0.0, 0.0]))
    j = jet(imm, 0.1, 0.2)
    np.testing.assert_allclose(j.du, [1, 0, 0, 0], atol=1e-11)
    np.testing.assert_allclose(j.dv, [0, 1, 0, 0], atol=1e-11)
    for second in (j.duu, j.duv, j.dvv):
        np.testing.assert_allclose(second, 0.0, atol=1e-7)


def test_rank_deficient_jet():
    imm = _plane(lambda u, v: np.array([u + v, u + v, 0.0, 0.0]))
    with pytest.raises(ValueError, match="rank"):
        jet(imm, 0.0, 0.0)


def test_induced_metric_causal_types():
    timelike = _plane(lambda u, v: np.array([u, v, 0.0, 0.0]))
    g11, g12, g22, kind = induced_metric(FLAT, 0, first_jet(timelike, 0.0, 0.0))
    assert (round(g11, 10), round(g12, 10), round(g22, 10), kind) == (-1.0, 0.0, 1.0, "timelike")
    slice_ = _plane(lambda u, v: np.array([0.3, u, v, 0.0]))
    assert induced_metric(FLAT, 0, first_jet(slice_, 0.0, 0.0))[3] == "spacelike"
    null = _plane(lambda u, v: np.array([u, u, v, 0.0]))
    assert induced_metric(FLAT, 0, first_jet(null, 0.0, 0.0))[3] == "degenerate"
    with pytest.raises(DegenerateError):
        adapted_frame(FLAT, 0, first_jet(null, 0.0, 0.0))


def test_horizontal_slice_has_no_adapted_frame():
    f = WarpingFunction.exponential()
    slice_ = _plane(lambda u, v: np.array([0.3, u, v, 0.0]))
    j = first_jet(slice_, 0.1, 0.1)
    T, eta = t_eta_split(f, 0, j)
    np.testing.assert_allclose(T, 0.0, atol=1e-12)
    with pytest.raises(FrameError, match="horizontal"):
        adapted_frame(f, 0, j)


def test_analytic_and_differenced_partials_agree():
    spec = spacelike_rw0()
    analytic = construct(spec, strict=False)
    differenced = construct(spec, analytic=False, strict=False)
    for u, v in SAMPLE_POINTS:
        a, d = first_jet(analytic, u, v), first_jet(differenced, u, v)
        np.testing.assert_allclose(a.du, d.du, atol=1e-6)
        np.testing.assert_allclose(a.dv, d.dv, atol=1e-6)


def test_spacelike_s3_tangent_part_of_dt():
    spec = spacelike_s3()
    geo = _geometry(spec)
    for u, v in SAMPLE_POINTS:
        fo = geo.forms(u, v)
        tt = ambient_metric(spec.f, spec.c, fo.frame.p, fo.T, fo.T)
        assert tt == pytest.approx(math.sinh(spec.theta0) ** 2, abs=1e-10)
        np.testing.assert_allclose(fo.T + fo.eta, d_dt(spec.c), atol=1e-8)


def test_product_surface_frame():
    spec = product_circle()
    geo = _geometry(spec)
    fr = geo.frame(0.1, 0.4)
    assert fr.eta_zero and fr.theta == 0.0
    np.testing.assert_allclose(fr.e1, d_dt(0), atol=1e-12)


@pytest.mark.parametrize("kind", ["SpacelikeS3", "TimelikeS3", "SpacelikeH3", "TimelikeH3"])
def test_angle_is_constant_for_space_form_families(kind):
    spec = FAMILY_BUILDERS[kind]()
    geo = _geometry(spec)
    for u, v in SAMPLE_POINTS:
        assert geo.frame(u, v).theta == pytest.approx(spec.theta0, abs=1e-8)


def test_angle_law_for_spacelike_rw0():
    spec = spacelike_rw0()
    geo = _geometry(spec)
    for u, v in SAMPLE_POINTS:
        fr = geo.frame(u, v)
        assert math.cosh(fr.theta) * spec.f(fr.p[0]) == pytest.approx(spec.a, abs=1e-8)


@pytest.mark.parametrize("kind", sorted(FAMILY_BUILDERS))
def test_frame_and_form_invariants(kind):
    spec = FAMILY_BUILDERS[kind]()
    geo = _geometry(spec)
    for u, v in SAMPLE_POINTS:
        fo = geo.forms(u, v)
        fr = fo.frame
        assert fr.causal_type == spec.causal_type
        assert frame_orthonormality_defect(fr) <= 1e-9
        assert theta_decomposition_residual(fr) <= 1e-8
        assert fo.asymmetry <= 1e-9
        np.testing.assert_allclose(fo.T + fo.eta, d_dt(spec.c), atol=1e-8)
        assert relative_nullity_dim(fo) == 1


@pytest.mark.parametrize("kind", ["SpacelikeS3", "TimelikeH3", "TimelikeRW0"])
def test_frame_forms_match_coordinate_forms(kind):
    """h(e_i, e_j) from frame differencing equals the normal part of the coordinate Hessian."""
    spec = FAMILY_BUILDERS[kind]()
    imm = construct(spec, strict=False)
    geo = SurfaceGeometry(spec.f, spec.c, imm, spec.orientation)
    u, v = 0.2, 0.6
    fo = geo.forms(u, v)
    H = coordinate_second_fundamental_form(spec.f, spec.c, imm, u, v)
    j = first_jet(imm, u, v)
    w = metric_matrix(spec.f, spec.c, j.p)
    for tangent in (j.du, j.dv):
        assert np.max(np.abs([[np.dot(w * H[a, b], tangent) for b in (0, 1)] for a in (0, 1)])) <= 1e-6
    C = fo.frame.coords
    for i in (1, 2):
        for k in (1, 2):
            via_coords = sum(C[i - 1, a] * C[k - 1, b] * H[a, b] for a in (0, 1) for b in (0, 1))
            np.testing.assert_allclose(fo.h_vector(i, k), via_coords, atol=1e-6)


def test_totally_geodesic_planes():
    tilt = math.sinh(0.5), math.cosh(0.5)
    plane = _plane(lambda u, v: np.array([tilt[0] * u, tilt[1] * u, v, 0.0]))
    fo = second_fundamental_form(FLAT, 0, plane, 0.1, 0.2)
    assert np.max(np.abs(fo.h)) <= 1e-9
    assert relative_nullity_dim(fo) == 2
    slab = _plane(lambda u, v: np.array([0.4, u, v, 0.0]))
    assert np.max(np.abs(coordinate_second_fundamental_form(FLAT, 0, slab, 0.1, 0.2))) <= 1e-7


def test_product_over_unit_circle():
    spec = product_circle(f=FLAT)
    imm = construct(spec)
    H = coordinate_second_fundamental_form(FLAT, 0, imm, 0.2, 0.5)
    assert np.max(np.abs(H[0])) <= 1e-6
    hss = H[1, 1]
    assert math.sqrt(ambient_metric(FLAT, 0, imm.point(0.2, 0.5), hss, hss)) == pytest.approx(1.0, abs=1e-6)
    assert _geometry(spec).forms(0.2, 0.5).xi_norm == pytest.approx(1.0, abs=1e-6)


def test_spacelike_s3_at_u_zero():
    geo = _geometry(spacelike_s3())
    fo = geo.forms(0.0, 0.5)
    assert (abs(fo.h3_22), abs(fo.h4_22)) == (pytest.approx(0.0, abs=1e-7), pytest.approx(1.0, abs=1e-7))
    H = mean_curvature_vector(fo)
    assert math.sqrt(ambient_metric(FLAT, 1, fo.frame.p, H, H)) == pytest.approx(0.5, abs=1e-7)


def _with_h(forms, h):
    return replace(forms, h=np.asarray(h, dtype=float))


@pytest.fixture(scope="module")
def sample_forms():
    return {
        "spacelike": _geometry(spacelike_s3()).forms(0.1, 0.4),
        "timelike": _geometry(FAMILY_BUILDERS["TimelikeS3"]()).forms(0.1, 0.4),
    }


def test_shape_operator_examples(sample_forms):
    fo = sample_forms["spacelike"]
    zero = _with_h(fo, np.zeros((2, 2, 2)))
    assert np.all(shape_operator(zero, 3) == 0) and np.all(mean_curvature_vector(zero) == 0)
    prn = np.zeros((2, 2, 2))
    prn[0, 1, 1], prn[1, 1, 1] = 0.7, -1.3
    A3, A4 = shape_operator(_with_h(fo, prn), 3), shape_operator(_with_h(fo, prn), 4)
    assert A3[0].tolist() == [0, 0] and A3[1, 0] == 0 and abs(A3[1, 1]) == 0.7
    assert abs(A4[1, 1]) == 1.3
    with pytest.raises(ValueError):
        shape_operator(fo, 2)


@pytest.mark.parametrize("which", ["spacelike", "timelike"])
@given(entries=st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_shape_operator_is_self_adjoint(sample_forms, which, entries):
    fo = sample_forms[which]
    a, b, c, d, e, g = entries
    h = _with_h(fo, [[[a, b], [b, c]], [[d, e], [e, g]]])
    eps = fo.frame.eps[:2]
    for alpha in (3, 4):
        A = shape_operator(h, alpha)
        G = np.diag(eps)  # frame metric on the tangent plane
        np.testing.assert_allclose(G @ A, (G @ A).T, atol=1e-12)
        # <A e_j, e_i> = <h(e_i, e_j), e_alpha>
        for i in (0, 1):
            for j in (0, 1):
                lhs = eps[i] * A[i, j]
                rhs = fo.frame.eps[alpha - 1] * h.h[alpha - 3, i, j]
                assert lhs == pytest.approx(rhs, abs=1e-12)


def test_relative_nullity_examples():
    assert relative_nullity_dim(np.zeros((2, 2, 2))) == 2
    only = np.zeros((2, 2, 2))
    only[0, 1, 1] = 1.0
    assert relative_nullity_dim(only) == 1
    ident = np.zeros((2, 2, 2))
    ident[0] = np.eye(2)
    assert relative_nullity_dim(ident) == 0


@given(entries=st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       scale=st.floats(1e-6, 1e6) | st.floats(-1e6, -1e-6))
def test_relative_nullity_scale_invariant(entries, scale):
    a, b, c, d = entries
    h = np.array([[[a, b], [b, c]], [[d, 0.0], [0.0, a - c]]])
    if np.max(np.abs(h)) < 1e-3:
        return
    assert relative_nullity_dim(h) == relative_nullity_dim(scale * h)
