"""Unit space forms R^3(c) in their embedded models.

c = 0 is Euclidean 3-space; c = +1 is the unit sphere in E^4; c = -1 is the
upper sheet of the unit hyperboloid in Minkowski space E^4_1 with signature
(-, +, +, +).  Fiber points and fiber vectors are plain numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODEL_TOL = 1e-12
TANGENCY_TOL = 1e-9

MINKOWSKI_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])


class TangencyError(ValueError):
    """A vector is not tangent to the fiber model at the given point."""


def check_curvature(c: int) -> int:
    if c not in (-1, 0, 1):
        raise ValueError(f"curvature flag must be -1, 0 or 1, got {c!r}")
    return int(c)


def fiber_dim(c: int) -> int:
    """Length of the embedded coordinate vector of a fiber point."""
    return 3 if check_curvature(c) == 0 else 4


def embedding_inner(c: int, w1, w2) -> float:
    """Inner product of the ambient flat space the model lives in."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if c == -1:
        return float(np.dot(MINKOWSKI_SIGNS * w1, w2))
    return float(np.dot(w1, w2))


def model_residual(c: int, x) -> float:
    x = np.asarray(x, dtype=float)
    if c == 0:
        return 0.0
    if c == 1:
        return abs(float(np.dot(x, x)) - 1.0)
    res = abs(embedding_inner(-1, x, x) + 1.0)
    return res if x[0] > 0 else np.inf


@dataclass(frozen=True)
class FiberPoint:
    c: int
    coords: np.ndarray

    def __post_init__(self):
        check_curvature(self.c)
        coords = np.asarray(self.coords, dtype=float)
        if coords.shape != (fiber_dim(self.c),):
            raise ValueError(f"expected {fiber_dim(self.c)} coordinates, got shape {coords.shape}")
        if model_residual(self.c, coords) > MODEL_TOL:
            raise ValueError(f"point {coords} is not on the c={self.c} model")
        object.__setattr__(self, "coords", coords)


def _coords(x):
    return x.coords if isinstance(x, FiberPoint) else np.asarray(x, dtype=float)


def project_to_model(c: int, x) -> np.ndarray:
    """Radially rescale an embedded point back onto the unit model."""
    x = np.asarray(x, dtype=float)
    if c == 0:
        return x
    if c == 1:
        return x / np.linalg.norm(x)
    q = -embedding_inner(-1, x, x)
    if q <= 0:
        raise ValueError("point is not timelike; cannot project onto the hyperboloid")
    y = x / np.sqrt(q)
    return y if y[0] > 0 else -y


def fiber_tangent_project(c: int, x, w) -> np.ndarray:
    """Remove the position-normal component of ``w`` at ``x``.

    For c = -1 the normal has <x, x> = -1, so the projection is w + <w, x> x.
    """
    w = np.asarray(w, dtype=float)
    if c == 0:
        return w.copy()
    x = _coords(x)
    return w - c * embedding_inner(c, w, x) * x


def fiber_inner(c: int, x, w1, w2, tol: float = TANGENCY_TOL) -> float:
    """Metric g_c of the fiber evaluated on two tangent vectors at ``x``."""
    if c != 0:
        xc = _coords(x)
        scale = 1.0 + np.linalg.norm(xc)
        for w in (w1, w2):
            res = abs(embedding_inner(c, w, xc))
            if res > tol * scale * (1.0 + np.linalg.norm(w)):
                raise TangencyError(f"vector {np.asarray(w)} not tangent at {xc} (residual {res:.3e})")
    return embedding_inner(c, w1, w2)


def fiber_connection_correction(c: int, x, w1, w2) -> np.ndarray:
    """c <w1, w2> x, so that nabla^{R^3(c)}_{w1} w2 = D_{w1} w2 + correction."""
    x = _coords(x)
    if c == 0:
        return np.zeros_like(x)
    return c * embedding_inner(c, w1, w2) * x

