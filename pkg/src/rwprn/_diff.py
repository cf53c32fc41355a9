"""Fourth-order central differences used throughout the package."""
from __future__ import annotations

import numpy as np

REL_STEP = 1e-4
MIN_STEP = 1e-4

_OFFSETS = (-2, -1, 1, 2)
_WEIGHTS = (1.0, -8.0, 8.0, -1.0)


def step_for(x: float, rel: float = REL_STEP, floor: float = MIN_STEP) -> float:
    return max(floor, rel * abs(x))


def central_diff(fn, x: float, h: float | None = None):
    """d/dx fn at x with the 5-point stencil; works for array-valued fn."""
    if h is None:
        h = step_for(x)
    acc = 0.0
    for k, w in zip(_OFFSETS, _WEIGHTS):
        acc = acc + w * np.asarray(fn(x + k * h))
    return acc / (12.0 * h)


def stencil_points(x: float, h: float):
    return [x + k * h for k in _OFFSETS]


def combine(values, h: float):
    """Stencil derivative from values already sampled at ``stencil_points``."""
    acc = 0.0
    for v, w in zip(values, _WEIGHTS):
        acc = acc + w * np.asarray(v)
    return acc / (12.0 * h)


def richardson(fn, h: float, order: int = 4):
    """One Richardson level: combine fn(h) and fn(h/2) for an O(h^order) rule."""
    coarse = np.asarray(fn(h))
    fine = np.asarray(fn(h / 2.0))
    k = 2.0**order
    return (k * fine - coarse) / (k - 1.0)
