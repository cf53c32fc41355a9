"""Pointwise numeric checkers and structured residual reports."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import _diff
from .ambient import (
    DomainError,
    WarpingFunction,
    ambient_covariant_derivative,
    ambient_curvature,
    ambient_metric,
    connection,
    constant_curvature_defect,
)
from .families import (
    FamilySpec,
    SingularPointError,
    construct,
    expected_theta_constant,
    predicted_invariants,
)
from .space_forms import embedding_inner, fiber_tangent_project
from .surface import (
    DegenerateError,
    FrameError,
    FundamentalForms,
    Immersion,
    SurfaceGeometry,
    frame_components,
    frame_orthonormality_defect,
    relative_nullity_dim,
    shape_operator,
    theta_decomposition_residual,
)

PRN_TOL = 1e-6
PRN_FLOOR = 1e-4
FRAME_TOL = 1e-5
THETA_TOL = 1e-6
CODAZZI_TOL = 1e-4
CLOSED_FORM_TOL = 1e-5
CURVATURE_TOL = 1e-4
COMPAT_TOL = 1e-6

_SKIPPABLE = (FrameError, DegenerateError, DomainError, SingularPointError)


@dataclass(frozen=True)
class Grid:
    u: np.ndarray
    v: np.ndarray

    @property
    def shape(self):
        return (len(self.u), len(self.v))

    def points(self):
        for u in self.u:
            for v in self.v:
                yield float(u), float(v)


def make_grid(u_range, v_range, nu: int = 33, nv: int = 33, margin_steps: int = 8) -> Grid:
    """Uniform grid shrunk away from the rectangle edges so stencils stay inside."""
    def axis(lo, hi, n):
        m = margin_steps * max(_diff.step_for(lo), _diff.step_for(hi))
        return np.linspace(lo + m, hi - m, n)
    return Grid(axis(*u_range, nu), axis(*v_range, nv))


@dataclass
class CheckResult:
    name: str
    grid: tuple
    tolerance: float
    max_residual: float = 0.0
    argmax: tuple | None = None
    evaluated: int = 0
    skipped: Counter = field(default_factory=Counter)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.evaluated > 0 and self.max_residual <= self.tolerance

    def record(self, residual: float, where) -> None:
        self.evaluated += 1
        if not np.isfinite(residual):
            residual = math.inf
        if self.argmax is None or residual > self.max_residual:
            self.max_residual = float(residual)
            self.argmax = tuple(float(x) for x in where)

    def skip(self, exc: Exception) -> None:
        self.skipped[type(exc).__name__] += 1

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "grid": list(self.grid),
            "evaluated": self.evaluated,
            "skipped": dict(self.skipped),
            "max_residual": self.max_residual if math.isfinite(self.max_residual) else None,
            "argmax": list(self.argmax) if self.argmax is not None else None,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": _jsonable(self.details),
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: max residual {self.max_residual:.3e} (tol {self.tolerance:.1e}), " \
               f"{self.evaluated} points, skipped {dict(self.skipped)}"


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    conventions: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "conventions": _jsonable(self.conventions),
            "errors": list(self.errors),
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _geometry(f, c, immersion, orientation, geometry):
    return geometry if geometry is not None else SurfaceGeometry(f, c, immersion, orientation)


def _forms_on_grid(geo: SurfaceGeometry, grid: Grid, result: CheckResult):
    for u, v in grid.points():
        try:
            yield u, v, geo.forms(u, v)
        except _SKIPPABLE as exc:
            result.skip(exc)


def _require_frames(result: CheckResult, grid: Grid) -> None:
    if result.evaluated == 0 and result.skipped.get("FrameError", 0) == len(grid.u) * len(grid.v):
        raise FrameError("no adapted frame on the grid: every point is horizontal (T = 0)")


# ---------------------------------------------------------------- relative nullity

def prn_residual(forms: FundamentalForms, floor: float = PRN_FLOOR) -> float:
    """(|h(e1,e1)| + |h(e1,e2)|) / (|h(e2,e2)| + floor)."""
    return (forms.h_norm(1, 1) + forms.h_norm(1, 2)) / (forms.h_norm(2, 2) + floor)


def check_prn(f: WarpingFunction, c: int, immersion: Immersion, grid: Grid, tol: float = PRN_TOL,
              orientation: int = 1, floor: float = PRN_FLOOR, rank_tol: float = 1e-6,
              geometry: SurfaceGeometry | None = None) -> CheckResult:
    """h(e1, e1) = h(e1, e2) = 0 in the adapted frame, plus a nullity histogram."""
    geo = _geometry(f, c, immersion, orientation, geometry)
    res = CheckResult("prn", grid.shape, tol)
    hist = Counter()
    frame_defect = 0.0
    theta_defect = 0.0
    for u, v, fo in _forms_on_grid(geo, grid, res):
        res.record(prn_residual(fo, floor), (u, v))
        hist[relative_nullity_dim(fo, tol=rank_tol)] += 1
        frame_defect = max(frame_defect, frame_orthonormality_defect(fo.frame))
        theta_defect = max(theta_defect, theta_decomposition_residual(fo.frame))
    _require_frames(res, grid)
    res.details.update(nullity_histogram=dict(sorted(hist.items())),
                       frame_orthonormality=frame_defect, theta_decomposition=theta_defect)
    return res


# ---------------------------------------------------------------- frame equations

def frame_equation_residuals(f: WarpingFunction, geo: SurfaceGeometry, u: float, v: float) -> dict:
    """Residual of each frame identity at (u, v), measured in frame components."""
    fo = geo.forms(u, v)
    fr = fo.frame
    D = fo.nabla
    e1, e2, e3, e4 = fr.e
    t = fr.p[0]
    k = f.d1(t) / f(t)

    def norm(X):
        return float(np.linalg.norm(frame_components(fr, X)))

    thu, thv = geo.scalar_derivatives(lambda a, b: geo.frame(a, b).theta, u, v)
    e1_theta = fr.coords[0, 0] * thu + fr.coords[0, 1] * thv
    e2_theta = fr.coords[1, 0] * thu + fr.coords[1, 1] * thv
    omega = fo.omega
    out = {"nabla_e1 e1 = 0": norm(D[0, 0])}
    if fr.eta_zero:
        out["nabla_e2 e1 = (f'/f) e2"] = norm(D[1, 0] - k * e2)
        out["theta = 0"] = abs(fr.theta)
        return out
    h3 = fo.h3_22
    h4 = fo.h4_22
    out["nabla_e2 e1 = omega e2"] = norm(D[1, 0] - omega * e2)
    out["nabla_e1 e2 = 0"] = norm(D[0, 1])
    if fr.causal_type == "spacelike":
        out["nabla_e2 e2 = -omega e1 - h3 e3 + h4 e4"] = norm(D[1, 1] - (-omega * e1 - h3 * e3 + h4 * e4))
        out["e1(theta) = (f'/f) cosh theta"] = abs(e1_theta - k * math.cosh(fr.theta))
    else:
        out["nabla_e2 e2 = omega e1 + h3 e3 + h4 e4"] = norm(D[1, 1] - (omega * e1 + h3 * e3 + h4 * e4))
        out["e1(theta) = -(f'/f) sinh theta"] = abs(e1_theta + k * math.sinh(fr.theta))
    out["nabla_e1 e3 = 0"] = norm(D[0, 2])
    out["nabla_e2 e3 = -h3 e2"] = norm(D[1, 2] + h3 * e2)
    out["nabla_e1 e4 = 0"] = norm(D[0, 3])
    out["nabla_e2 e4 = -h4 e2"] = norm(D[1, 3] + h4 * e2)
    out["e2(theta) = 0"] = abs(e2_theta)
    return out


def check_frame_equations(f: WarpingFunction, c: int, immersion: Immersion, grid: Grid, tol: float = FRAME_TOL,
                          orientation: int = 1, geometry: SurfaceGeometry | None = None) -> CheckResult:
    geo = _geometry(f, c, immersion, orientation, geometry)
    res = CheckResult("frame_equations", grid.shape, tol)
    per = {}
    for u, v in grid.points():
        try:
            r = frame_equation_residuals(f, geo, u, v)
        except _SKIPPABLE as exc:
            res.skip(exc)
            continue
        for name, val in r.items():
            per[name] = max(per.get(name, 0.0), val)
        res.record(max(r.values()), (u, v))
    _require_frames(res, grid)
    res.details["per_identity"] = per
    return res


# ---------------------------------------------------------------- angle law

def check_theta_law(f: WarpingFunction, c: int, immersion: Immersion, grid: Grid, tol: float = THETA_TOL,
                    expected: float | None = None, orientation: int = 1,
                    geometry: SurfaceGeometry | None = None) -> CheckResult:
    """Least-squares fit of the conserved constant of the angle function.

    cosh(theta) f = a for space-like surfaces, sinh(theta) f = a for time-like
    ones, theta = theta0 when f is constant.
    """
    geo = _geometry(f, c, immersion, orientation, geometry)
    res = CheckResult("theta_law", grid.shape, tol)
    vals, where = [], []
    law = None
    for u, v in grid.points():
        try:
            fr = geo.frame(u, v)
        except _SKIPPABLE as exc:
            res.skip(exc)
            continue
        ft = f(fr.p[0])
        if f.is_constant:
            law, q = "theta", fr.theta
        elif fr.causal_type == "spacelike":
            law, q = "cosh(theta) f", math.cosh(fr.theta) * ft
        else:
            law, q = "sinh(theta) f", math.sinh(fr.theta) * ft
        vals.append(q)
        where.append((u, v))
    if not vals:
        _require_frames(res, grid)
        return res
    vals = np.asarray(vals)
    fitted = float(np.mean(vals))
    dev = np.abs(vals - fitted)
    for d, w in zip(dev, where):
        res.record(float(d), w)
    res.details.update(law=law, fitted=fitted)
    if expected is not None:
        err = abs(fitted - expected)
        res.details.update(expected=expected, fit_error=err)
        if err > res.max_residual:
            res.max_residual = err
    return res


# ---------------------------------------------------------------- Codazzi

_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


def codazzi_residual(f: WarpingFunction, c: int, geo: SurfaceGeometry, u: float, v: float) -> float:
    """Residual of the Codazzi equation for (X, Y) = (e1, e2) and (e2, e1)."""
    fo = geo.forms(u, v)
    fr = fo.frame
    D = fo.nabla
    eps = fr.eps

    def hfield(a, b):
        fa = geo.forms(a, b)
        return np.array([fa.h_vector(i + 1, j + 1) for i, j in _PAIRS])

    H = hfield(u, v).reshape(2, 2, -1)
    nu, nv = geo.coordinate_derivatives(hfield, u, v)
    dH = np.array([geo.directional(fr, nu, nv, i) for i in (0, 1)]).reshape(2, 2, 2, -1)

    def normal(X):
        return X - sum(eps[m] * np.dot(fr.weights * X, fr.e[m]) * fr.e[m] for m in (0, 1))

    def gamma(i, j):
        # tangent coefficients of nabla_{e_i} e_j
        return [eps[m] * np.dot(fr.weights * D[i, j], fr.e[m]) for m in (0, 1)]

    def h_of(coefs, k):
        return coefs[0] * H[0, k] + coefs[1] * H[1, k]

    def nabla_h(i, j, k):
        term = normal(dH[i, j, k])
        term = term - h_of(gamma(i, j), k)
        g = gamma(i, k)
        term = term - (g[0] * H[j, 0] + g[1] * H[j, 1])
        return term

    t = fr.p[0]
    factor = -constant_curvature_defect(f, c, t)
    ip = lambda a, b: float(np.dot(fr.weights * a, b))
    worst = 0.0
    for X, Y in ((0, 1), (1, 0)):
        eX, eY = fr.e[X], fr.e[Y]
        lhs = (ip(eX, eX) * eY[0] - ip(eX, eY) * eX[0]) * factor * fo.eta
        rhs = nabla_h(X, Y, X) - nabla_h(Y, X, X)
        worst = max(worst, float(np.linalg.norm(frame_components(fr, lhs - rhs))))
    return worst


def check_codazzi(f: WarpingFunction, c: int, immersion: Immersion, grid: Grid, tol: float = CODAZZI_TOL,
                  orientation: int = 1, geometry: SurfaceGeometry | None = None) -> CheckResult:
    geo = _geometry(f, c, immersion, orientation, geometry)
    res = CheckResult("codazzi", grid.shape, tol)
    for u, v in grid.points():
        try:
            res.record(codazzi_residual(f, c, geo, u, v), (u, v))
        except _SKIPPABLE as exc:
            res.skip(exc)
    _require_frames(res, grid)
    return res


# ---------------------------------------------------------------- Ricci

def shape_commutator_norm(forms) -> float:
    """Frobenius norm of [A_{e3}, A_{e4}]; zero iff the normal bundle is flat at the point."""
    if isinstance(forms, FundamentalForms):
        A3, A4 = shape_operator(forms, 3), shape_operator(forms, 4)
    else:
        h, eps = forms
        h = np.asarray(h, dtype=float)
        eps = np.asarray(eps, dtype=float)
        A3 = eps[:2, None] * eps[2] * h[0]
        A4 = eps[:2, None] * eps[3] * h[1]
    return float(np.linalg.norm(A3 @ A4 - A4 @ A3))


def check_ricci_flatness_consistency(forms, tol: float = 1e-9) -> CheckResult:
    res = CheckResult("ricci_flatness", (1, 1), tol)
    res.record(shape_commutator_norm(forms), (0.0, 0.0))
    res.details["convention"] = "Frobenius norm of A3 A4 - A4 A3"
    return res


def check_ricci_on_grid(f, c, immersion, grid, tol: float = 1e-6, orientation: int = 1,
                        geometry: SurfaceGeometry | None = None) -> CheckResult:
    geo = _geometry(f, c, immersion, orientation, geometry)
    res = CheckResult("ricci_flatness", grid.shape, tol)
    for u, v, fo in _forms_on_grid(geo, grid, res):
        scale = 1.0 + fo.h_norm(2, 2) ** 2
        res.record(shape_commutator_norm(fo) / scale, (u, v))
    _require_frames(res, grid)
    return res


# ---------------------------------------------------------------- closed forms

def compare_closed_form(spec: FamilySpec, grid: Grid, tol: float = CLOSED_FORM_TOL, analytic: bool = True,
                        strict: bool = False, geometry: SurfaceGeometry | None = None) -> CheckResult:
    """max |numeric| - |predicted| for omega, h3_22, h4_22 (frame signs are not canonical)."""
    imm = construct(spec, analytic=analytic, strict=strict)
    geo = geometry if geometry is not None else SurfaceGeometry(spec.f, spec.c, imm, spec.orientation)
    res = CheckResult("closed_form", grid.shape, tol)
    worst = {"omega": 0.0, "h3_22": 0.0, "h4_22": 0.0, "xi_norm": 0.0}
    sign_agree = Counter()
    for u, v in grid.points():
        try:
            pred = predicted_invariants(spec, u, v)
            fo = geo.forms(u, v)
        except _SKIPPABLE as exc:
            res.skip(exc)
            continue
        if spec.kind == "ProductCurve" or fo.frame.eta_zero:
            num = {"omega": fo.omega, "xi_norm": fo.xi_norm}
            ref = {"omega": pred[0], "xi_norm": math.hypot(pred[1], pred[2])}
        else:
            num = {"omega": fo.omega, "h3_22": fo.h3_22, "h4_22": fo.h4_22}
            ref = {"omega": pred[0], "h3_22": pred[1], "h4_22": pred[2]}
        errs = {k: abs(abs(num[k]) - abs(ref[k])) for k in num}
        for k, e in errs.items():
            worst[k] = max(worst[k], e)
            if abs(ref[k]) > 1e-8:
                sign_agree[f"{k}:{'same' if num[k] * ref[k] > 0 else 'flipped'}"] += 1
        res.record(max(errs.values()), (u, v))
    res.details.update(per_quantity=worst, sign_relation=dict(sign_agree), analytic=analytic,
                       orientation=spec.orientation)
    return res


# ---------------------------------------------------------------- ambient oracles

def _finite_t(f: WarpingFunction, rng, span: float = 1.0):
    lo, hi = f.interval
    lo = max(lo, -span) if math.isfinite(lo) else -span
    hi = min(hi, span) if math.isfinite(hi) else span
    w = hi - lo
    return float(rng.uniform(lo + 0.1 * w, hi - 0.1 * w))


def _tangent_basis(c: int, x) -> np.ndarray:
    """Rows: an orthonormal basis of the fiber tangent space at x (positive-definite part)."""
    if c == 0:
        return np.eye(3)
    basis = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        w = fiber_tangent_project(c, x, e)
        for b in basis:
            w = w - embedding_inner(c, w, b) * b
        n = embedding_inner(c, w, w)
        if n > 1e-8:
            basis.append(w / math.sqrt(n))
        if len(basis) == 3:
            break
    return np.array(basis)


def random_fiber_point(c: int, rng) -> np.ndarray:
    if c == 0:
        return rng.normal(size=3)
    if c == 1:
        x = rng.normal(size=4)
        return x / np.linalg.norm(x)
    y = rng.normal(scale=0.6, size=3)
    return np.concatenate([[math.sqrt(1.0 + y @ y)], y])


class GraphChart:
    """Chart q = (t, y) -> (t, s(y) x* + B y) with s = sqrt(1 - c |y|^2).

    Coordinate fields and their second derivatives are analytic, so connection
    differencing needs only one numeric level.
    """

    def __init__(self, c: int, x_star):
        self.c = c
        self.x = np.asarray(x_star, dtype=float)
        self.B = _tangent_basis(c, self.x).T  # columns

    def _s(self, y):
        return math.sqrt(1.0 - self.c * float(y @ y)) if self.c else 1.0

    def point(self, q):
        q = np.asarray(q, dtype=float)
        y = q[1:]
        if self.c == 0:
            return np.concatenate([[q[0]], self.x + y])
        return np.concatenate([[q[0]], self._s(y) * self.x + self.B @ y])

    def jacobian(self, q):
        """Columns E_a = d point / d q_a."""
        q = np.asarray(q, dtype=float)
        y = q[1:]
        m = self.x.size
        J = np.zeros((1 + m, 4))
        J[0, 0] = 1.0
        if self.c == 0:
            J[1:, 1:] = np.eye(3)
            return J
        s = self._s(y)
        for a in range(3):
            J[1:, 1 + a] = (-self.c * y[a] / s) * self.x + self.B[:, a]
        return J

    def hessian(self, q):
        """H[a, b] = d^2 point / dq_a dq_b."""
        q = np.asarray(q, dtype=float)
        y = q[1:]
        m = self.x.size
        H = np.zeros((4, 4, 1 + m))
        if self.c == 0:
            return H
        s = self._s(y)
        c = self.c
        for a in range(3):
            for b in range(3):
                dd = -c * (a == b) / s - c * c * y[a] * y[b] / s**3
                H[1 + a, 1 + b, 1:] = dd * self.x
        return H


def _covariant_combo(f, c, chart, q, xc, yc):
    """nabla~_X Y for constant-coefficient coordinate fields X = J xc, Y = J yc."""
    p = chart.point(q)
    J = chart.jacobian(q)
    H = chart.hessian(q)
    X, Y = J @ xc, J @ yc
    dY = np.einsum("a,b,abk->k", xc, yc, H)
    return connection(f, c, p, X, Y, dY)


def curvature_by_differencing(f, c, chart: GraphChart, q, xc, yc, zc, h: float = 1e-3) -> np.ndarray:
    """R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z for commuting coordinate combinations."""
    q = np.asarray(q, dtype=float)
    p = chart.point(q)
    J = chart.jacobian(q)

    def nabla_along(dirc, field_c):
        def V(s):
            return _covariant_combo(f, c, chart, q + s * dirc, field_c, zc)

        def deriv(step):
            return _diff.central_diff(V, 0.0, step)

        dV = _diff.richardson(deriv, h)
        return connection(f, c, p, J @ dirc, V(0.0), dV)

    return nabla_along(xc, yc) - nabla_along(yc, xc)


def check_curvature_lemma(f: WarpingFunction, c: int, samples: int = 100, seed: int = 0,
                          tol: float = CURVATURE_TOL) -> CheckResult:
    """Closed-form curvature against second-order connection differencing."""
    rng = np.random.default_rng(seed)
    res = CheckResult("curvature_lemma", (samples, 1), tol)
    for k in range(samples):
        chart = GraphChart(c, random_fiber_point(c, rng))
        q = np.concatenate([[_finite_t(f, rng)], np.zeros(3)])
        xc, yc, zc = rng.normal(size=(3, 4))
        J = chart.jacobian(q)
        p = chart.point(q)
        closed = ambient_curvature(f, c, p, J @ xc, J @ yc, J @ zc)
        numeric = curvature_by_differencing(f, c, chart, q, xc, yc, zc)
        scale = 1.0 + float(np.max(np.abs(closed)))
        res.record(float(np.max(np.abs(closed - numeric))) / scale, (k, 0))
    return res


def sectional_curvature_factor(f: WarpingFunction, c: int, t: float, x_star) -> float:
    """<R(X,Y)Y, X> for orthonormal horizontal X, Y at (t, x*)."""
    B = _tangent_basis(c, x_star)
    ft = f(t)
    p = np.concatenate([[t], x_star])
    X = np.concatenate([[0.0], B[0] / ft])
    Y = np.concatenate([[0.0], B[1] / ft])
    return ambient_metric(f, c, p, ambient_curvature(f, c, p, X, Y, Y), X)


def check_metric_compatibility(f: WarpingFunction, c: int, samples: int = 50, seed: int = 0,
                               tol: float = COMPAT_TOL) -> CheckResult:
    """d/ds <V, W> = <nabla V, W> + <V, nabla W> along random chart lines."""
    rng = np.random.default_rng(seed)
    res = CheckResult("metric_compatibility", (samples, 1), tol)
    for k in range(samples):
        chart = GraphChart(c, random_fiber_point(c, rng))
        q0 = np.concatenate([[_finite_t(f, rng)], np.zeros(3)])
        d = rng.normal(size=4) * 0.5
        A, b = rng.normal(size=(2, 4, 4))

        def gamma(s):
            return chart.point(q0 + s * d)

        def vector_field(M):
            def V(s):
                q = q0 + s * d
                return chart.jacobian(q) @ (M @ np.array([1.0, s, s * s, math.sin(s)]))
            return V

        V, W = vector_field(A), vector_field(b)
        inner = lambda s: ambient_metric(f, c, gamma(s), V(s), W(s))
        lhs = _diff.central_diff(inner, 0.0, 1e-3)
        p = gamma(0.0)
        nV = ambient_covariant_derivative(f, c, gamma, V, 0.0, 1e-3)
        nW = ambient_covariant_derivative(f, c, gamma, W, 0.0, 1e-3)
        rhs = ambient_metric(f, c, p, nV, W(0.0)) + ambient_metric(f, c, p, V(0.0), nW)
        res.record(abs(lhs - rhs) / (1.0 + abs(lhs)), (k, 0))
    return res


def check_torsion(f: WarpingFunction, c: int, samples: int = 50, seed: int = 0,
                  tol: float = COMPAT_TOL) -> CheckResult:
    """nabla~_{d_u} phi_v - nabla~_{d_v} phi_u = 0 on random polynomial immersions."""
    rng = np.random.default_rng(seed)
    res = CheckResult("torsion", (samples, 1), tol)
    for k in range(samples):
        chart = GraphChart(c, random_fiber_point(c, rng))
        q0 = np.concatenate([[_finite_t(f, rng)], np.zeros(3)])
        L, Q = rng.normal(size=(2, 4, 3)) * 0.5

        def phi(u, v):
            mono = np.array([u, v, u * v])
            quad = np.array([u * u, v * v, u * v * v])
            return chart.point(q0 + L @ mono + 0.3 * Q @ quad)

        h = 1e-3
        phi_u = lambda u, v: _diff.central_diff(lambda a: phi(a, v), u, h)
        phi_v = lambda u, v: _diff.central_diff(lambda b: phi(u, b), v, h)
        a = ambient_covariant_derivative(f, c, lambda s: phi(s, 0.0), lambda s: phi_v(s, 0.0), 0.0, h)
        b = ambient_covariant_derivative(f, c, lambda s: phi(0.0, s), lambda s: phi_u(0.0, s), 0.0, h)
        res.record(float(np.max(np.abs(a - b))) / (1.0 + float(np.max(np.abs(a)))), (k, 0))
    return res


# ---------------------------------------------------------------- battery

CHECKS = ("prn", "frame", "theta", "codazzi", "closed_form", "ricci")


def verify_family(spec: FamilySpec, grid: Grid, checks=CHECKS, tolerances: dict | None = None,
                  perturb: float = 0.0, analytic: bool = True, strict: bool = True,
                  codazzi_grid: Grid | None = None) -> VerificationReport:
    """Run the checker battery on one constructed family."""
    tol = {"prn": PRN_TOL, "frame": FRAME_TOL, "theta": THETA_TOL, "codazzi": CODAZZI_TOL,
           "closed_form": CLOSED_FORM_TOL, "ricci": 1e-6}
    tol.update(tolerances or {})
    report = VerificationReport()
    report.conventions = {
        "orientation": spec.orientation,
        "e1": "e1 = orientation * T/|T| (space-like) or T/|T| (time-like)",
        "e3": "e3 along eta (time-like: orientation * eta/|eta|)",
        "e4": "positive determinant against ambient coordinate orientation",
        "closed_form_comparison": "absolute values",
    }
    imm = construct(spec, analytic=analytic, perturb=perturb, strict=strict)
    geo = SurfaceGeometry(spec.f, spec.c, imm, spec.orientation)
    f, c = spec.f, spec.c
    try:
        if "prn" in checks:
            report.add(check_prn(f, c, imm, grid, tol["prn"], geometry=geo))
        if "frame" in checks:
            report.add(check_frame_equations(f, c, imm, grid, tol["frame"], geometry=geo))
        if "theta" in checks:
            theta_tol = tol["theta"]
            report.add(check_theta_law(f, c, imm, grid, theta_tol, expected=expected_theta_constant(spec),
                                       geometry=geo))
        if "codazzi" in checks:
            report.add(check_codazzi(f, c, imm, codazzi_grid or grid, tol["codazzi"], geometry=geo))
        if "ricci" in checks:
            report.add(check_ricci_on_grid(f, c, imm, grid, tol["ricci"], geometry=geo))
        if "closed_form" in checks and not perturb:
            report.add(compare_closed_form(spec, grid, tol["closed_form"], analytic=analytic, strict=strict,
                                           geometry=geo if analytic else None))
    except FrameError as exc:
        report.errors.append(f"FrameError: {exc}")
    return report


def ambient_check(f: WarpingFunction, c: int, n: int = 2001, zero_tol: float = 1e-12) -> dict:
    """Sample the constant-curvature defect; report zeros and sign changes."""
    ts = f.sample_interval(n)
    d = np.array([constant_curvature_defect(f, c, t) for t in ts])
    zeros = ts[np.abs(d) < zero_tol]
    # samples within zero_tol have no sign, so round-off around zero is not a crossing
    sign = np.where(np.abs(d) < zero_tol, 0.0, np.sign(d))
    crossings = []
    for k in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        crossings.append(float(_bisect_defect(f, c, ts[k], ts[k + 1])))
    if zeros.size == ts.size:
        status = "constant curvature everywhere"
    elif zeros.size or crossings:
        status = "defect vanishes somewhere: ambient has constant-curvature points"
    else:
        status = "defect nonzero: ambient admissible"
    return {
        "status": status,
        "admissible": not zeros.size and not crossings,
        "samples": int(n),
        "min_abs_defect": float(np.min(np.abs(d))),
        "max_abs_defect": float(np.max(np.abs(d))),
        "zero_samples": int(zeros.size),
        "zero_set": [float(z) for z in zeros[:50]] + crossings,
        "sign_changes": crossings,
    }


def _bisect_defect(f, c, lo, hi, iters: int = 80):
    dlo = constant_curvature_defect(f, c, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        dm = constant_curvature_defect(f, c, mid)
        if np.sign(dm) == np.sign(dlo):
            lo, dlo = mid, dm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- meshes

def spline_immersion(c: int, us, vs, points, name: str = "mesh") -> Immersion:
    """Immersion interpolating a sampled mesh ``points[i, j] = phi(us[i], vs[j])``.

    Each embedded coordinate gets a tensor-product spline (quintic when the
    mesh allows it); first partials come from the splines.
    """
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    P = np.asarray(points, dtype=float)

    def degree(n):
        return 5 if n >= 6 else 3 if n >= 4 else 1

    ku, kv = degree(us.size), degree(vs.size)
    splines = [RectBivariateSpline(us, vs, P[:, :, k], kx=ku, ky=kv) for k in range(P.shape[2])]

    def point(u, v):
        return np.array([s(u, v)[0, 0] for s in splines])

    def partials(u, v):
        du = np.array([s(u, v, dx=1)[0, 0] for s in splines])
        dv = np.array([s(u, v, dy=1)[0, 0] for s in splines])
        return du, dv

    return Immersion(c, point, (float(us[0]), float(us[-1])), (float(vs[0]), float(vs[-1])), partials, name)


def nullity_histogram(f, c, immersion, grid, orientation: int = 1, rank_tol: float = 1e-6) -> dict:
    geo = SurfaceGeometry(f, c, immersion, orientation)
    hist = Counter()
    for u, v in grid.points():
        try:
            hist[relative_nullity_dim(geo.forms(u, v), tol=rank_tol)] += 1
        except _SKIPPABLE as exc:
            hist[type(exc).__name__] += 1
    return dict(hist)
