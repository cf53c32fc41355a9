"""Constructors for the classified surfaces with positive relative nullity.

Seven kinds are supported:

``SpacelikeRW0`` / ``TimelikeRW0``
    surfaces phi = (u, phi1 alpha1 + (W(u) + phi2) alpha2 + phi3 alpha3) in
    L^4_1(f, 0), where W is the warp integral with sqrt(a^2 -/+ f^2).
``ProductCurve``
    the product I x_f alpha of a curve alpha in R^3(c).
``SpacelikeS3`` / ``TimelikeS3`` / ``SpacelikeH3`` / ``TimelikeH3``
    trigonometric / hyperbolic combinations of a moving frame in
    E^1_1 x S^3 or E^1_1 x H^3 (f = 1) with constant angle theta0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from . import _diff
from .ambient import WarpingFunction, constant_curvature_defect
from .ode import (
    ZERO,
    CoefficientFunction,
    FrameODESystem,
    WarpPrimitive,
    eta_gram,
    integrate_frames,
    phi23_from_ode,
    template_signature,
    warp_integral,
)
from .space_forms import embedding_inner, fiber_tangent_project, project_to_model
from .surface import Immersion, SurfaceGeometry

KINDS = ("SpacelikeRW0", "TimelikeRW0", "ProductCurve", "SpacelikeS3", "TimelikeS3", "SpacelikeH3", "TimelikeH3")
RW0_KINDS = ("SpacelikeRW0", "TimelikeRW0")
PRODUCT_KINDS = ("SpacelikeS3", "TimelikeS3", "SpacelikeH3", "TimelikeH3")

SINGULAR_TOL = 1e-10


class SpecError(ValueError):
    """The family description is inadmissible."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class SingularPointError(ArithmeticError):
    """A closed-form denominator vanishes at the requested point."""


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    location: str = ""

    def __str__(self):
        return f"{self.code}: {self.message}" + (f" at {self.location}" if self.location else "")

    def to_dict(self):
        return {"code": self.code, "message": self.message, "location": self.location}


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    f: WarpingFunction = field(default_factory=WarpingFunction.constant)
    c: int = 0
    a: float = 0.0
    theta0: float = 0.0
    a1: CoefficientFunction = ZERO
    a2: CoefficientFunction = ZERO
    a3: CoefficientFunction = ZERO
    phi1: CoefficientFunction = ZERO
    phi2_0: float = 0.0
    phi3_0: float = 0.0
    curve: dict | None = None
    C: np.ndarray | None = None
    u0: float = 0.0
    v0: float = 0.0
    u_range: tuple = (-1.0, 1.0)
    v_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind in ("SpacelikeS3", "TimelikeS3"):
            object.__setattr__(self, "c", 1)
        elif self.kind in ("SpacelikeH3", "TimelikeH3"):
            object.__setattr__(self, "c", -1)
        elif self.kind in RW0_KINDS:
            object.__setattr__(self, "c", 0)
        if self.kind in PRODUCT_KINDS and not self.f.is_constant:
            object.__setattr__(self, "f", WarpingFunction.constant(1.0))
        if self.C is not None:
            object.__setattr__(self, "C", np.asarray(self.C, dtype=float))

    @property
    def template(self) -> str | None:
        if self.kind in RW0_KINDS:
            return "RW0"
        if self.kind in ("SpacelikeS3", "TimelikeS3"):
            return "S3"
        if self.kind in ("SpacelikeH3", "TimelikeH3"):
            return "H3"
        return None

    @property
    def causal_type(self) -> str:
        return "spacelike" if self.kind.startswith("Spacelike") else "timelike"

    @property
    def orientation(self) -> int:
        """Sign of sinh(theta) that reproduces the family's own angle."""
        if self.kind in PRODUCT_KINDS:
            return -1 if self.theta0 < 0 else 1
        if self.kind == "TimelikeRW0":
            return -1 if self.a * self.f(self.u_range[0]) < 0 else 1
        return 1

    def initial_vectors(self) -> np.ndarray:
        if self.C is not None:
            return self.C
        return np.eye(3 if self.kind in RW0_KINDS else 4)

    def frame_system(self) -> FrameODESystem:
        return FrameODESystem(self.template, self.a1, self.a2, self.a3 if self.template != "RW0" else ZERO,
                              self.initial_vectors(), self.v0, tuple(self.v_range))

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "a": self.a,
            "theta0": self.theta0,
            "a1": self.a1.to_dict(),
            "a2": self.a2.to_dict(),
            "a3": self.a3.to_dict(),
            "phi1": self.phi1.to_dict(),
            "phi2_0": self.phi2_0,
            "phi3_0": self.phi3_0,
            "u0": self.u0,
            "v0": self.v0,
            "u_range": list(self.u_range),
            "v_range": list(self.v_range),
        }
        if self.C is not None:
            out["C"] = self.C.tolist()
        if self.curve is not None:
            out["curve"] = self.curve
        return out

    @classmethod
    def from_dict(cls, data: dict, f: WarpingFunction | None = None, c: int = 0) -> "FamilySpec":
        coef = {k: CoefficientFunction.from_dict(data[k]) for k in ("a1", "a2", "a3", "phi1") if k in data}
        kwargs = dict(
            kind=data["kind"],
            c=int(data.get("c", c)),
            a=float(data.get("a", 0.0)),
            theta0=float(data.get("theta0", 0.0)),
            phi2_0=float(data.get("phi2_0", 0.0)),
            phi3_0=float(data.get("phi3_0", 0.0)),
            curve=data.get("curve"),
            C=data.get("C"),
            u0=float(data.get("u0", 0.0)),
            v0=float(data.get("v0", 0.0)),
            u_range=tuple(data.get("u_range", (-1.0, 1.0))),
            v_range=tuple(data.get("v_range", (0.0, 1.0))),
            **coef,
        )
        if "cosh_theta0" in data:
            kwargs["theta0"] = math.copysign(math.acosh(float(data["cosh_theta0"])), kwargs["theta0"] or 1.0)
        if f is not None:
            kwargs["f"] = f
        return cls(**kwargs)


def ambient_of(spec: FamilySpec) -> tuple[WarpingFunction, int]:
    return spec.f, spec.c


# ---------------------------------------------------------------- curves

@dataclass(frozen=True)
class Curve:
    """A curve in R^3(c) with position and velocity evaluators."""

    c: int
    position: object
    velocity: object
    curvature: float | None = None


def make_curve(c: int, data: dict | None) -> Curve:
    data = data or {"kind": "circle"}
    kind = data.get("kind", "circle")
    if kind == "circle":
        if c == 0:
            r = float(data.get("radius", 1.0))
            return Curve(0, lambda s: r * np.array([math.cos(s / r), math.sin(s / r), 0.0]),
                         lambda s: np.array([-math.sin(s / r), math.cos(s / r), 0.0]), 1.0 / r)
        rho = float(data.get("radius", math.pi / 2 if c == 1 else 1.0))
        if c == 1:
            a, b, kappa = math.cos(rho), math.sin(rho), math.cos(rho) / math.sin(rho)
        else:
            a, b, kappa = math.cosh(rho), math.sinh(rho), math.cosh(rho) / math.sinh(rho)
        return Curve(c, lambda s: np.array([a, b * math.cos(s / b), b * math.sin(s / b), 0.0]),
                     lambda s: np.array([0.0, -math.sin(s / b), math.cos(s / b), 0.0]), abs(kappa))
    if kind == "sampled":
        params = np.asarray(data["params"], dtype=float)
        pts = np.asarray(data["points"], dtype=float)
        spline = CubicSpline(params, pts, axis=0)
        dspline = spline.derivative()

        def position(s):
            return project_to_model(c, spline(s))

        def velocity(s):
            x, dx = spline(s), dspline(s)
            if c == 0:
                return dx
            n = math.sqrt(abs(embedding_inner(c, x, x)))
            alpha = x / n
            return fiber_tangent_project(c, alpha, dx / n)

        return Curve(c, position, velocity, None)
    raise ValueError(f"unknown curve kind {kind!r}")


# ---------------------------------------------------------------- construction

class _FrameCache:
    """alpha(v) with the differencing stencil around each miss integrated in the same batch."""

    limit = 1 << 16

    def __init__(self, system: FrameODESystem, steps: int):
        self.system = system
        self.steps = steps
        self.values: dict[float, np.ndarray] = {}

    def __call__(self, v: float) -> np.ndarray:
        v = float(v)
        hit = self.values.get(v)
        if hit is not None:
            return hit
        if len(self.values) > self.limit:
            self.values.clear()
        vs = [v] + [float(x) for x in _diff.stencil_points(v, _diff.step_for(v))]
        for x, a in zip(vs, integrate_frames(self.system, vs, self.steps)):
            self.values.setdefault(x, a)
        return self.values[v]


def _rw0_parts(spec: FamilySpec):
    system = spec.frame_system()
    steps = system.default_steps(spec.v0)
    sign = "-" if spec.kind == "SpacelikeRW0" else "+"
    W = WarpPrimitive(spec.f, spec.a, sign, spec.u0)
    alpha = _FrameCache(system, steps)

    @lru_cache(maxsize=4096)
    def phi23(v):
        return phi23_from_ode(spec.a1, spec.a2, spec.phi1, spec.v0, v, spec.phi2_0, spec.phi3_0, n_steps=steps)

    return system, W, alpha, phi23


def _construct_rw0(spec: FamilySpec) -> Immersion:
    system, W, alpha, phi23 = _rw0_parts(spec)
    phi1 = spec.phi1

    def point(u, v):
        al = alpha(v)
        p2, p3 = phi23(v)
        x = phi1(v) * al[0] + (W(u) + p2) * al[1] + p3 * al[2]
        return np.concatenate([[u], x])

    def partials(u, v):
        al = alpha(v)
        dal = system.rhs(v, al)
        p1, p2, p3 = phi1(v), *phi23(v)
        dp1 = phi1.derivative(v)
        dp2, dp3 = -spec.a1(v) * p1, -spec.a2(v) * p1
        w = W(u)
        xu = W.derivative(u) * al[1]
        xv = dp1 * al[0] + p1 * dal[0] + dp2 * al[1] + (w + p2) * dal[1] + dp3 * al[2] + p3 * dal[2]
        return np.concatenate([[1.0], xu]), np.concatenate([[0.0], xv])

    return Immersion(0, point, tuple(spec.u_range), tuple(spec.v_range), partials, spec.kind)


def _construct_product(spec: FamilySpec) -> Immersion:
    system = spec.frame_system()
    alpha = _FrameCache(system, system.default_steps(spec.v0))
    ch, sh = math.cosh(spec.theta0), math.sinh(spec.theta0)
    if spec.kind.startswith("Spacelike"):
        dt, k = sh, ch
    else:
        dt, k = ch, sh
    if spec.c == 1:
        C, S, dC, dS = math.cos, math.sin, (lambda x: -math.sin(x)), math.cos
    else:
        C, S, dC, dS = math.cosh, math.sinh, math.sinh, math.cosh

    def point(u, v):
        al = alpha(v)
        x = k * u
        return np.concatenate([[dt * u], C(x) * al[0] + S(x) * al[1]])

    def partials(u, v):
        al = alpha(v)
        dal = system.rhs(v, al)
        x = k * u
        xu = k * (dC(x) * al[0] + dS(x) * al[1])
        xv = C(x) * dal[0] + S(x) * dal[1]
        return np.concatenate([[dt], xu]), np.concatenate([[0.0], xv])

    return Immersion(spec.c, point, tuple(spec.u_range), tuple(spec.v_range), partials, spec.kind)


def _construct_product_curve(spec: FamilySpec) -> Immersion:
    curve = make_curve(spec.c, spec.curve)
    dim = 3 if spec.c == 0 else 4

    def point(u, v):
        return np.concatenate([[u], curve.position(v)])

    def partials(u, v):
        du = np.zeros(1 + dim)
        du[0] = 1.0
        return du, np.concatenate([[0.0], curve.velocity(v)])

    return Immersion(spec.c, point, tuple(spec.u_range), tuple(spec.v_range), partials, spec.kind)


def perturbed(spec: FamilySpec, base: Immersion, eps: float) -> Immersion:
    """phi + eps sin(u) e4 with e4 from the base frame, re-projected onto the model."""
    geo = SurfaceGeometry(spec.f, spec.c, base, spec.orientation)
    c = spec.c

    def point(u, v):
        p = base.point(u, v) + eps * math.sin(u) * geo.frame(u, v).e4
        return np.concatenate([[p[0]], project_to_model(c, p[1:])])

    return Immersion(c, point, base.u_range, base.v_range, None, f"{spec.kind}+perturb({eps:g})")


def construct(spec: FamilySpec, analytic: bool = True, perturb: float = 0.0,
              strict: bool = True) -> Immersion:
    """Immersion of the family; raises SpecError listing the diagnostics if inadmissible.

    ``strict=False`` tolerates a constant-curvature ambient (the construction
    itself is still well defined there).  ``analytic=False`` drops the
    closed-form first partials so everything is differenced.
    """
    diags = validate_spec(spec)
    if not strict:
        diags = [d for d in diags if d.code != "constant-curvature"]
    if diags:
        raise SpecError(diags)
    if spec.kind in RW0_KINDS:
        imm = _construct_rw0(spec)
    elif spec.kind == "ProductCurve":
        imm = _construct_product_curve(spec)
    else:
        imm = _construct_product(spec)
    if perturb:
        imm = perturbed(spec, imm, perturb)
    elif not analytic:
        imm = replace(imm, partials=None)
    return imm


# ---------------------------------------------------------------- closed forms

def _rw0_G(spec: FamilySpec, u: float, v: float):
    sign = "-" if spec.kind == "SpacelikeRW0" else "+"
    W = warp_integral(spec.f, spec.a, sign, spec.u0, u)
    p2, p3 = phi23_from_ode(spec.a1, spec.a2, spec.phi1, spec.v0, v, spec.phi2_0, spec.phi3_0)
    fu = spec.f(u)
    factor = spec.a1(v) * (W + p2) + spec.a2(v) * p3 - spec.phi1.derivative(v)
    return fu * fu * factor * factor


def predicted_invariants(spec: FamilySpec, u: float, v: float) -> tuple[float, float, float]:
    """Closed-form (omega, h^3_22, h^4_22) of the family at (u, v).

    For ``ProductCurve`` the normal frame is not canonical; the triple is
    (f'/f, |xi|, 0) with |xi| = kappa / f for the builtin circles.
    """
    kind = spec.kind
    a1, a2, a3 = spec.a1(v), spec.a2(v), spec.a3(v)
    if kind in RW0_KINDS:
        f, a = spec.f, spec.a
        fu, dfu = f(u), f.d1(u)
        G = _rw0_G(spec, u, v)
        if math.sqrt(G) < SINGULAR_TOL:
            raise SingularPointError(f"G vanishes at (u, v) = ({u}, {v})")
        rg = math.sqrt(G)
        sq = math.sqrt(a * a - fu * fu) if kind == "SpacelikeRW0" else math.sqrt(a * a + fu * fu)
        omega = (dfu * rg * sq + a * a1 * fu) / (rg * fu * fu)
        h3 = (a1 * fu * sq + a * rg * dfu) / (rg * fu * fu)
        h4 = a2 / rg
        return omega, h3, h4
    if kind == "ProductCurve":
        curve = make_curve(spec.c, spec.curve)
        if curve.curvature is None:
            raise ValueError("no closed form for sampled curves")
        fu = spec.f(u)
        return spec.f.d1(u) / fu, curve.curvature / abs(fu), 0.0
    ch, sh = math.cosh(spec.theta0), math.sinh(spec.theta0)
    spacelike = kind.startswith("Spacelike")
    x = u * (ch if spacelike else sh)
    if spec.c == 1:
        D = a1 * math.cos(x) + a2 * math.sin(x)
        N = a2 * math.cos(x) - a1 * math.sin(x)
    else:
        D = a1 * math.cosh(x) + a2 * math.sinh(x)
        N = a1 * math.sinh(x) + a2 * math.cosh(x)
    if abs(D) < SINGULAR_TOL:
        raise SingularPointError(f"denominator vanishes at (u, v) = ({u}, {v})")
    h4 = -a3 / D
    if spacelike:
        return -ch * N / D, sh * N / D, h4
    return sh * N / D, ch * N / D, h4


def expected_theta_constant(spec: FamilySpec) -> float:
    """The constant of the family's angle law: a for RW0 kinds, theta0 otherwise."""
    if spec.kind in RW0_KINDS:
        return spec.a
    if spec.kind == "ProductCurve":
        return 0.0
    return spec.theta0


# ---------------------------------------------------------------- validation

def _grid(lo, hi, n):
    return np.linspace(lo, hi, n)


def validate_spec(spec: FamilySpec, n: int = 257) -> list[Diagnostic]:
    """All admissibility violations of a FamilySpec; empty means admissible."""
    diags = []
    f, c = spec.f, spec.c
    ulo, uhi = spec.u_range
    vlo, vhi = spec.v_range
    if not (ulo < uhi and vlo < vhi):
        diags.append(Diagnostic("rectangle", "empty parameter rectangle"))
        return diags
    if not (vlo <= spec.v0 <= vhi):
        diags.append(Diagnostic("base-point", "v0 outside v_range", f"v0={spec.v0:g}"))
    warping = [Diagnostic("warping", msg) for msg in f.validate()]
    if warping:
        return diags + warping
    us = _grid(ulo, uhi, n)
    if spec.kind in RW0_KINDS or spec.kind == "ProductCurve":
        lo, hi = f.interval
        if ulo < lo or uhi > hi:
            diags.append(Diagnostic("domain", f"u_range {spec.u_range} leaves the warping interval {f.interval}"))
            return diags
    if spec.kind in RW0_KINDS:
        defect = np.array([constant_curvature_defect(f, c, t) for t in us])
        zeros = np.nonzero(np.abs(defect) < 1e-12)[0]
        if zeros.size:
            diags.append(Diagnostic("constant-curvature",
                                    "constant-curvature ambient: f''/f - (f'^2 + c)/f^2 vanishes",
                                    f"t={us[zeros[0]]:.6g}"))
        if spec.kind == "SpacelikeRW0":
            bad = [t for t in us if spec.a ** 2 - f(t) ** 2 <= 0]
            if bad:
                diags.append(Diagnostic("warp-margin", "a^2 - f(u)^2 must be positive on u_range", f"u={bad[0]:.6g}"))
        elif spec.a == 0:
            diags.append(Diagnostic("a-zero", "time-like family needs a nonzero constant a"))
    if spec.kind in ("SpacelikeS3", "SpacelikeH3", "TimelikeH3") and spec.theta0 == 0:
        diags.append(Diagnostic("theta0-zero", f"{spec.kind} requires a nonzero theta0"))
    if spec.template is not None:
        C = spec.initial_vectors()
        n_dim = 3 if spec.template == "RW0" else 4
        sig = template_signature(spec.template)
        if C.shape != (n_dim, n_dim):
            diags.append(Diagnostic("initial-vectors", f"expected {n_dim}x{n_dim} initial vectors, got {C.shape}"))
        else:
            if np.max(np.abs(eta_gram(C, sig) - np.diag(sig))) > 1e-12:
                diags.append(Diagnostic("initial-vectors", "initial vectors are not orthonormal"))
            if spec.template == "H3" and not (eta_gram(C[:1], sig)[0, 0] < 0 and C[0, 0] > 0):
                diags.append(Diagnostic("initial-vectors", "C1 must be future timelike (first coordinate > 0)"))
    if spec.kind in PRODUCT_KINDS:
        vs = _grid(vlo, vhi, n)
        zero = np.array([abs(spec.a3(v)) < 1e-12 for v in vs])
        run = np.nonzero(zero[:-1] & zero[1:])[0]
        if run.size:
            diags.append(Diagnostic("totally-geodesic",
                                    "a3 vanishes on an open interval, so the surface lies in a totally "
                                    "geodesic hypersurface", f"v={vs[run[0]]:.6g}"))
    if spec.kind == "ProductCurve":
        try:
            make_curve(c, spec.curve)
        except (KeyError, ValueError) as exc:
            diags.append(Diagnostic("curve", str(exc)))
    return diags

