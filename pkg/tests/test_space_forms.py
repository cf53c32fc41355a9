import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwprn import _diff
from rwprn.space_forms import (
    FiberPoint,
    TangencyError,
    check_curvature,
    embedding_inner,
    fiber_connection_correction,
    fiber_dim,
    fiber_inner,
    fiber_tangent_project,
    model_residual,
    project_to_model,
)

finite = st.floats(-3, 3, allow_nan=False)
vec4 = st.lists(finite, min_size=4, max_size=4).map(np.array)


def test_fiber_inner_examples():
    assert fiber_inner(0, np.zeros(3), [1, 0, 0], [1, 0, 0]) == 1.0
    assert fiber_inner(1, [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]) == 0.0
    assert fiber_inner(-1, [1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0]) == 1.0


def test_fiber_inner_rejects_radial_vectors():
    with pytest.raises(TangencyError):
        fiber_inner(1, [1, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0])
    with pytest.raises(TangencyError):
        fiber_inner(-1, [1, 0, 0, 0], [1, 0, 0, 0], [1, 0, 0, 0])


def test_tangent_projection_examples():
    np.testing.assert_array_equal(fiber_tangent_project(0, np.zeros(3), [1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(fiber_tangent_project(1, [1, 0, 0, 0], [5, 1, 0, 0]), [0, 1, 0, 0])
    np.testing.assert_allclose(fiber_tangent_project(-1, [1, 0, 0, 0], [2, 3, 0, 0]), [0, 3, 0, 0])


def test_connection_correction_examples():
    np.testing.assert_array_equal(fiber_connection_correction(0, np.zeros(3), [1, 2, 3], [4, 5, 6]), 0.0)
    np.testing.assert_allclose(fiber_connection_correction(1, [1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0]),
                               [1, 0, 0, 0])
    np.testing.assert_allclose(fiber_connection_correction(-1, [1, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0]),
                               [-1, 0, 0, 0])


def test_curvature_flag_and_dimension():
    assert [fiber_dim(c) for c in (-1, 0, 1)] == [4, 3, 4]
    with pytest.raises(ValueError):
        check_curvature(2)


def test_embedding_inner_signature():
    assert embedding_inner(-1, [1, 0, 0, 0], [1, 0, 0, 0]) == -1.0
    assert embedding_inner(1, [1, 0, 0, 0], [1, 0, 0, 0]) == 1.0


def test_fiber_point_validates_model():
    FiberPoint(1, np.array([0.6, 0.8, 0, 0]))
    with pytest.raises(ValueError):
        FiberPoint(1, np.array([1.0, 1.0, 0, 0]))
    with pytest.raises(ValueError):
        FiberPoint(-1, np.array([-1.0, 0, 0, 0]))


def _random_model_point(c, raw):
    if c == 1:
        return raw / np.linalg.norm(raw) if np.linalg.norm(raw) > 1e-3 else np.array([1.0, 0, 0, 0])
    y = raw[1:]
    return np.concatenate([[math.sqrt(1 + y @ y)], y])


@given(c=st.sampled_from([-1, 1]), raw=vec4, w=vec4)
def test_tangent_projection_is_idempotent_and_tangent(c, raw, w):
    x = _random_model_point(c, raw)
    p1 = fiber_tangent_project(c, x, w)
    p2 = fiber_tangent_project(c, x, p1)
    scale = 1 + np.max(np.abs(w)) * (1 + np.max(np.abs(x))) ** 2
    assert np.max(np.abs(p1 - p2)) <= 1e-12 * scale
    assert abs(embedding_inner(c, p1, x)) <= 1e-12 * scale


@given(c=st.sampled_from([-1, 1]), raw=vec4)
def test_project_to_model_lands_on_model(c, raw):
    x = project_to_model(c, _random_model_point(c, raw) * 1.001)
    assert model_residual(c, x) <= 1e-12


def _model_covariant_acceleration(c, alpha, s):
    """nabla_{a'} a' of a model curve by flat differencing plus the space-form correction."""
    vel = lambda r: _diff.central_diff(alpha, r, 1e-3)
    acc = _diff.central_diff(vel, s, 1e-3)
    x, v = alpha(s), vel(s)
    return acc + fiber_connection_correction(c, x, v, v), x, v


def test_great_circle_is_a_geodesic():
    alpha = lambda s: np.array([math.cos(s), math.sin(s), 0.0, 0.0])
    for s in np.linspace(-1, 1, 7):
        acc, _, _ = _model_covariant_acceleration(1, alpha, s)
        assert np.max(np.abs(acc)) <= 1e-8


@pytest.mark.parametrize("c", [-1, 1])
def test_model_metric_compatibility_along_curves(c):
    # |a'|^2 is not constant along these curves, so both sides are nontrivial
    if c == 1:
        alpha = lambda s: project_to_model(1, np.array([math.cos(s * s), math.sin(s * s), 0.3 * s, 0.1]))
    else:
        alpha = lambda s: _random_model_point(-1, np.array([0.0, s * s, math.sin(s), 0.2 * s]))
    for s in (0.3, 0.7, 1.1):
        acc, x, v = _model_covariant_acceleration(c, alpha, s)
        lhs = _diff.central_diff(lambda r: embedding_inner(c, *(2 * [_diff.central_diff(alpha, r, 1e-3)])), s, 1e-3)
        rhs = 2 * embedding_inner(c, acc, v)
        assert abs(lhs - rhs) <= 1e-6 * (1 + abs(lhs))
        assert abs(embedding_inner(c, acc, x)) <= 1e-6
