"""Robertson-Walker space-times L^4_1(f, c) = I x_f R^3(c).

Points are arrays ``[t, x_1, ..., x_m]`` and tangent vectors are arrays
``[X_0, Xbar_1, ..., Xbar_m]`` where ``m`` is 3 for c = 0 and 4 otherwise
(embedded fiber model, see :mod:`rwprn.space_forms`).  The metric is
``-dt^2 + f(t)^2 g_c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _diff
from .space_forms import (
    MINKOWSKI_SIGNS,
    FiberPoint,
    check_curvature,
    embedding_inner,
    fiber_connection_correction,
    fiber_dim,
    fiber_tangent_project,
    model_residual,
)

WARPING_FAMILIES = ("constant", "exponential", "cosh", "polynomial", "power_shifted")


class DomainError(ValueError):
    """Evaluation outside the interval I of the warping function."""


@dataclass(frozen=True)
class WarpingFunction:
    """Closed family of warping functions with hand-coded f, f', f''.

    ==============  ==========================  ======================
    family          params                      f(t)
    ==============  ==========================  ======================
    constant        value                       value
    exponential     scale, rate                 scale * exp(rate t)
    cosh            scale, rate, phase          scale * cosh(rate t + phase)
    polynomial      coeffs (ascending)          sum coeffs[k] t^k
    power_shifted   scale, shift, power         scale * (t + shift)^power
    ==============  ==========================  ======================
    """

    family: str
    params: dict = field(default_factory=dict)
    interval: tuple = (-math.inf, math.inf)

    def __post_init__(self):
        if self.family not in WARPING_FAMILIES:
            raise ValueError(f"unknown warping family {self.family!r}")
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError(f"empty interval {self.interval}")
        object.__setattr__(self, "interval", (float(lo), float(hi)))
        if self.family == "polynomial":
            coeffs = np.asarray(self.params.get("coeffs", [1.0]), dtype=float)
            object.__setattr__(self, "_poly", np.polynomial.Polynomial(coeffs))

    @classmethod
    def constant(cls, value=1.0, interval=(-math.inf, math.inf)):
        return cls("constant", {"value": float(value)}, interval)

    @classmethod
    def exponential(cls, scale=1.0, rate=1.0, interval=(-math.inf, math.inf)):
        return cls("exponential", {"scale": float(scale), "rate": float(rate)}, interval)

    @classmethod
    def cosh(cls, scale=1.0, rate=1.0, phase=0.0, interval=(-math.inf, math.inf)):
        return cls("cosh", {"scale": float(scale), "rate": float(rate), "phase": float(phase)}, interval)

    @classmethod
    def polynomial(cls, coeffs, interval=(-math.inf, math.inf)):
        return cls("polynomial", {"coeffs": [float(a) for a in coeffs]}, interval)

    @classmethod
    def power_shifted(cls, scale=1.0, shift=0.0, power=1.0, interval=(-math.inf, math.inf)):
        return cls("power_shifted", {"scale": float(scale), "shift": float(shift), "power": float(power)}, interval)

    def _p(self, key, default):
        return float(self.params.get(key, default))

    def derivative(self, t: float, order: int = 0) -> float:
        fam = self.family
        if fam == "constant":
            return self._p("value", 1.0) if order == 0 else 0.0
        if fam == "exponential":
            a, r = self._p("scale", 1.0), self._p("rate", 1.0)
            return a * r**order * math.exp(r * t)
        if fam == "cosh":
            a, r, ph = self._p("scale", 1.0), self._p("rate", 1.0), self._p("phase", 0.0)
            arg = r * t + ph
            core = math.sinh(arg) if order % 2 else math.cosh(arg)
            return a * r**order * core
        if fam == "polynomial":
            poly = self._poly.deriv(order) if order else self._poly
            return float(poly(t))
        a, s, p = self._p("scale", 1.0), self._p("shift", 0.0), self._p("power", 1.0)
        base = t + s
        coef = 1.0
        for k in range(order):
            coef *= p - k
        if coef == 0.0:
            return 0.0
        return a * coef * base ** (p - order)

    def __call__(self, t: float) -> float:
        return self.derivative(t, 0)

    def d1(self, t: float) -> float:
        return self.derivative(t, 1)

    def d2(self, t: float) -> float:
        return self.derivative(t, 2)

    @property
    def is_constant(self) -> bool:
        return self.family == "constant" or (
            self.family == "polynomial" and np.all(np.asarray(self.params["coeffs"][1:]) == 0)
        )

    def contains(self, t: float) -> bool:
        lo, hi = self.interval
        return lo < t < hi

    def check_domain(self, t: float) -> None:
        if not self.contains(t):
            raise DomainError(f"t = {t!r} outside warping interval {self.interval}")

    def sample_interval(self, n: int = 2001, margin: float = 1e-9, span: float = 10.0) -> np.ndarray:
        lo, hi = self.interval
        lo = lo if math.isfinite(lo) else -span
        hi = hi if math.isfinite(hi) else span
        return np.linspace(lo + margin, hi - margin, n)

    def validate(self, n: int = 2001, min_abs: float = 1e-9, seed: int = 0) -> list[str]:
        """Return a list of problems: vanishing f or inconsistent derivatives."""
        problems = []
        ts = self.sample_interval(n)
        vals = np.array([self(t) for t in ts])
        bad = np.nonzero(~(np.abs(vals) >= min_abs))[0]
        if bad.size:
            problems.append(f"f vanishes (|f| < {min_abs:g}) near t = {ts[bad[0]]:.6g}")
        rng = np.random.default_rng(seed)
        lo, hi = ts[0], ts[-1]
        width = hi - lo
        for t in rng.uniform(lo + 0.01 * width, hi - 0.01 * width, size=8):
            h = _diff.step_for(t)
            for order in (0, 1):
                num = _diff.central_diff(lambda s: self.derivative(s, order), t, h)
                ref = self.derivative(t, order + 1)
                scale = 1.0 + abs(ref) + abs(self.derivative(t, order))
                if abs(num - ref) > 1e-6 * scale:
                    problems.append(f"derivative of order {order + 1} inconsistent at t = {t:.6g}")
        return problems

    def to_dict(self) -> dict:
        lo, hi = self.interval
        return {
            "family": self.family,
            "params": dict(self.params),
            "interval": [lo if math.isfinite(lo) else None, hi if math.isfinite(hi) else None],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WarpingFunction":
        lo, hi = data.get("interval", [None, None])
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        return cls(data["family"], dict(data.get("params", {})), (lo, hi))


@dataclass(frozen=True)
class AmbientPoint:
    t: float
    fiber: FiberPoint

    def __array__(self, dtype=None, copy=None):
        return np.concatenate([[self.t], self.fiber.coords]).astype(dtype or float)

    @classmethod
    def from_array(cls, c: int, p) -> "AmbientPoint":
        p = np.asarray(p, dtype=float)
        return cls(float(p[0]), FiberPoint(c, p[1:]))


@dataclass(frozen=True)
class AmbientVector:
    """X = t0 d/dt + bar; ``bar`` is tangent to the fiber model."""

    t0: float
    bar: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.concatenate([[self.t0], np.asarray(self.bar, dtype=float)]).astype(dtype or float)

    @classmethod
    def from_array(cls, X) -> "AmbientVector":
        X = np.asarray(X, dtype=float)
        return cls(float(X[0]), X[1:].copy())


def d_dt(c: int) -> np.ndarray:
    e = np.zeros(1 + fiber_dim(c))
    e[0] = 1.0
    return e


def ambient_metric(f: WarpingFunction, c: int, p, X, Y) -> float:
    """-X_0 Y_0 + f(t)^2 g_c(Xbar, Ybar)."""
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    ft = f(p[0])
    return -X[0] * Y[0] + ft * ft * embedding_inner(c, X[1:], Y[1:])


def metric_matrix(f: WarpingFunction, c: int, p) -> np.ndarray:
    """Diagonal Gram weights of the embedding coordinates at p."""
    p = np.asarray(p, dtype=float)
    ft2 = f(p[0]) ** 2
    w = np.full(p.shape[0], ft2)
    w[0] = -1.0
    if c == -1:
        w[1] = -ft2
    return w


def project_vector(c: int, p, X) -> np.ndarray:
    """Fiber-tangent projection of X, or of each row when X is 2-D."""
    X = np.array(X, dtype=float)
    if c == 0:
        return X
    x = np.asarray(p, dtype=float)[1:]
    xs = x * MINKOWSKI_SIGNS if c == -1 else x
    X[..., 1:] -= c * (X[..., 1:] @ xs)[..., None] * x
    return X


def connection(f: WarpingFunction, c: int, p, X, W, dW) -> np.ndarray:
    """nabla~_X W from the flat embedding derivative dW = D_X W.

    The product connection nabla^0 is the flat derivative plus the fiber
    correction; the warping term is (f'/f)(g(Xbar, Wbar) d/dt + X_0 Wbar + W_0 Xbar)
    with g the warped fiber metric f^2 g_c.
    """
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    t = p[0]
    f.check_domain(t)
    ft = f(t)
    k = f.d1(t) / ft
    xbar, wbar = X[1:], W[1:]
    gxw = embedding_inner(c, xbar, wbar)
    out = np.array(dW, dtype=float)
    out[1:] += fiber_connection_correction(c, p[1:], xbar, wbar)
    out[0] += k * ft * ft * gxw
    out[1:] += k * (X[0] * wbar + W[0] * xbar)
    out[1:] = fiber_tangent_project(c, p[1:], out[1:])
    return out


def ambient_covariant_derivative(f: WarpingFunction, c: int, gamma, V, s: float, h: float | None = None) -> np.ndarray:
    """nabla~_{gamma'(s)} V for a curve ``gamma`` and a field ``V`` along it.

    Both are callables of the curve parameter returning arrays; derivatives
    use the 5-point central stencil.
    """
    if h is None:
        h = _diff.step_for(s)
    pts = [np.asarray(gamma(x), dtype=float) for x in _diff.stencil_points(s, h)]
    for q in pts:
        if not f.contains(q[0]):
            raise DomainError(f"differencing stencil leaves the warping interval near s = {s!r}")
    p = np.asarray(gamma(s), dtype=float)
    dgamma = _diff.combine(pts, h)
    dV = _diff.central_diff(V, s, h)
    return connection(f, c, p, project_vector(c, p, dgamma), V(s), dV)


def ambient_curvature(f: WarpingFunction, c: int, p, X, Y, Z) -> np.ndarray:
    """R~(X, Y) Z in closed form, with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    p = np.asarray(p, dtype=float)
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    t = p[0]
    ft = f(t)
    F = f.d2(t) / ft
    K = (f.d1(t) ** 2 + c) / ft**2

    def g(a, b):
        return ft * ft * embedding_inner(c, a, b)

    xb, yb, zb = X[1:], Y[1:], Z[1:]
    out = np.zeros_like(p)

    def r_t_bar(bar):
        # R(d/dt, bar) Z
        r = np.zeros_like(p)
        r[1:] += Z[0] * F * bar
        r[0] += F * g(bar, zb)
        return r

    out += X[0] * r_t_bar(yb)
    out -= Y[0] * r_t_bar(xb)
    out[1:] += K * (g(yb, zb) * xb - g(xb, zb) * yb)
    return out


def constant_curvature_defect(f: WarpingFunction, c: int, t: float) -> float:
    """f''/f - (f'^2 + c)/f^2; zero exactly where the ambient is locally of constant curvature."""
    ft = f(t)
    return f.d2(t) / ft - (f.d1(t) ** 2 + c) / ft**2


def ambient_tangent_basis(c: int, p) -> list[np.ndarray]:
    """Spanning set of the ambient tangent space at p (projected coordinate axes)."""
    p = np.asarray(p, dtype=float)
    basis = []
    for k in range(p.shape[0]):
        e = np.zeros_like(p)
        e[k] = 1.0
        basis.append(project_vector(c, p, e))
    return basis


def validate_point(c: int, p, tol: float = 1e-10) -> bool:
    p = np.asarray(p, dtype=float)
    check_curvature(c)
    return p.shape == (1 + fiber_dim(c),) and model_residual(c, p[1:]) <= tol
