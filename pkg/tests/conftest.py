from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rwprn.ambient import WarpingFunction
from rwprn.families import FamilySpec
from rwprn.ode import CoefficientFunction as CF

settings.register_profile(
    "geometry",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("geometry")


def spacelike_s3(**kw) -> FamilySpec:
    base = dict(theta0=math.acosh(1.25), a1=CF.constant(1), a2=CF.constant(0), a3=CF.constant(1))
    base.update(kw)
    return FamilySpec("SpacelikeS3", **base)


def timelike_s3(**kw) -> FamilySpec:
    base = dict(theta0=0.5, a1=CF.constant(1), a2=CF.constant(0.3), a3=CF.constant(1))
    base.update(kw)
    return FamilySpec("TimelikeS3", **base)


def spacelike_h3(**kw) -> FamilySpec:
    base = dict(theta0=0.7, a1=CF.constant(1), a2=CF.constant(0.3), a3=CF.sinusoid(1, 2, 0, 0.5))
    base.update(kw)
    return FamilySpec("SpacelikeH3", **base)


def timelike_h3(**kw) -> FamilySpec:
    base = dict(theta0=0.6, a1=CF.constant(1), a2=CF.constant(0.3), a3=CF.constant(1))
    base.update(kw)
    return FamilySpec("TimelikeH3", **base)


def spacelike_rw0(**kw) -> FamilySpec:
    """f = e^u on (-1, 0.5) with a = 2 (a flat ambient; needs strict=False to build)."""
    base = dict(f=WarpingFunction.exponential(interval=(-1.0, 0.5)), a=2.0, a1=CF.constant(1),
                a2=CF.constant(1), phi1=CF.constant(1), phi2_0=1.0, u0=-1.0, v0=1.0, u_range=(-0.99, 0.49))
    base.update(kw)
    return FamilySpec("SpacelikeRW0", **base)


def spacelike_rw0_curved(**kw) -> FamilySpec:
    """Same construction in a non-flat ambient f = cosh u."""
    base = dict(f=WarpingFunction.cosh(interval=(-1.0, 1.0)), a=2.0, a1=CF.constant(1),
                a2=CF.constant(1), phi1=CF.constant(1), phi2_0=1.0, u0=-1.0, v0=1.0, u_range=(-0.99, 0.99))
    base.update(kw)
    return FamilySpec("SpacelikeRW0", **base)


def timelike_rw0(**kw) -> FamilySpec:
    base = dict(f=WarpingFunction.polynomial([2.0, 1.0], interval=(-1.0, 1.0)), a=1.0, a1=CF.constant(1),
                a2=CF.constant(1), phi1=CF.constant(1), phi2_0=1.0, u0=-1.0, v0=1.0, u_range=(-0.99, 0.99))
    base.update(kw)
    return FamilySpec("TimelikeRW0", **base)


def product_circle(f: WarpingFunction | None = None, c: int = 0, **kw) -> FamilySpec:
    f = f if f is not None else WarpingFunction.polynomial([2.0, 1.0], interval=(-1.0, 1.0))
    base = dict(f=f, c=c, curve={"kind": "circle"}, u_range=(-0.9, 0.9), v_range=(0.0, 1.0))
    base.update(kw)
    return FamilySpec("ProductCurve", **base)


FAMILY_BUILDERS = {
    "SpacelikeS3": spacelike_s3,
    "TimelikeS3": timelike_s3,
    "SpacelikeH3": spacelike_h3,
    "TimelikeH3": timelike_h3,
    "SpacelikeRW0": spacelike_rw0,
    "TimelikeRW0": timelike_rw0,
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
