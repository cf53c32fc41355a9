"""Moving-frame ODEs, warp integrals and the auxiliary phi_2, phi_3 equations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .ambient import DomainError, WarpingFunction

TEMPLATES = ("RW0", "S3", "H3")
COEFFICIENT_KINDS = ("constant", "polynomial", "sinusoid", "sampled")


class IntegrationError(RuntimeError):
    """Re-orthonormalization broke down (near-null pivot)."""


@dataclass(frozen=True)
class CoefficientFunction:
    """Scalar coefficient a(v) of a frame equation.

    kinds: ``constant`` (value), ``polynomial`` (coeffs, ascending),
    ``sinusoid`` (amplitude, frequency, phase, offset) and ``sampled``
    (xs, ys; linear interpolation, constant extrapolation).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in COEFFICIENT_KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "sampled":
            xs = np.asarray(self.params["xs"], dtype=float)
            ys = np.asarray(self.params["ys"], dtype=float)
            if xs.shape != ys.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise ValueError("sampled coefficient needs increasing xs and matching ys")
        if self.kind == "polynomial":
            poly = np.polynomial.Polynomial(np.asarray(self.params.get("coeffs", [0.0]), dtype=float))
            object.__setattr__(self, "_poly", poly)

    @classmethod
    def constant(cls, value: float) -> "CoefficientFunction":
        return cls("constant", {"value": float(value)})

    @classmethod
    def polynomial(cls, coeffs) -> "CoefficientFunction":
        return cls("polynomial", {"coeffs": [float(a) for a in coeffs]})

    @classmethod
    def sinusoid(cls, amplitude=1.0, frequency=1.0, phase=0.0, offset=0.0) -> "CoefficientFunction":
        return cls("sinusoid", dict(amplitude=float(amplitude), frequency=float(frequency),
                                    phase=float(phase), offset=float(offset)))

    @classmethod
    def sampled(cls, xs, ys) -> "CoefficientFunction":
        return cls("sampled", {"xs": [float(x) for x in xs], "ys": [float(y) for y in ys]})

    def __call__(self, v: float) -> float:
        p = self.params
        if self.kind == "constant":
            return float(p.get("value", 0.0))
        if self.kind == "polynomial":
            return float(self._poly(v))
        if self.kind == "sinusoid":
            return p.get("offset", 0.0) + p.get("amplitude", 1.0) * math.sin(
                p.get("frequency", 1.0) * v + p.get("phase", 0.0))
        return float(np.interp(v, p["xs"], p["ys"]))

    def evaluate(self, vs) -> np.ndarray:
        """Vectorized evaluation at an array of abscissae."""
        vs = np.asarray(vs, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.full(vs.shape, float(p.get("value", 0.0)))
        if self.kind == "polynomial":
            return self._poly(vs)
        if self.kind == "sinusoid":
            return p.get("offset", 0.0) + p.get("amplitude", 1.0) * np.sin(
                p.get("frequency", 1.0) * vs + p.get("phase", 0.0))
        return np.interp(vs, p["xs"], p["ys"])

    def derivative(self, v: float) -> float:
        p = self.params
        if self.kind == "constant":
            return 0.0
        if self.kind == "polynomial":
            return float(self._poly.deriv()(v))
        if self.kind == "sinusoid":
            w = p.get("frequency", 1.0)
            return p.get("amplitude", 1.0) * w * math.cos(w * v + p.get("phase", 0.0))
        xs, ys = np.asarray(p["xs"]), np.asarray(p["ys"])
        k = int(np.clip(np.searchsorted(xs, v, side="right") - 1, 0, xs.size - 2))
        if v < xs[0] or v > xs[-1]:
            return 0.0
        return float((ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data) -> "CoefficientFunction":
        if isinstance(data, (int, float)):
            return cls.constant(data)
        return cls(data["kind"], dict(data.get("params", {})))


ZERO = CoefficientFunction.constant(0.0)


def template_matrix(template: str, a1: float, a2: float, a3: float = 0.0) -> np.ndarray:
    """Coefficient matrix A with alpha' = A alpha (alphas stacked as rows)."""
    if template == "RW0":
        return np.array([[0.0, a1, a2], [-a1, 0.0, 0.0], [-a2, 0.0, 0.0]])
    if template == "S3":
        return np.array([[0.0, 0.0, a1, 0.0], [0.0, 0.0, a2, 0.0],
                         [-a1, -a2, 0.0, a3], [0.0, 0.0, -a3, 0.0]])
    if template == "H3":
        return np.array([[0.0, 0.0, a1, 0.0], [0.0, 0.0, a2, 0.0],
                         [a1, -a2, 0.0, a3], [0.0, 0.0, -a3, 0.0]])
    raise ValueError(f"unknown template {template!r}")


def template_matrices(template: str, a1, a2, a3) -> np.ndarray:
    """Stack of template matrices for coefficient arrays of equal length."""
    a1, a2, a3 = (np.asarray(a, dtype=float) for a in (a1, a2, a3))
    n = 3 if template == "RW0" else 4
    M = np.zeros((a1.size, n, n))
    if template == "RW0":
        M[:, 0, 1], M[:, 0, 2] = a1, a2
        M[:, 1, 0], M[:, 2, 0] = -a1, -a2
        return M
    if template not in ("S3", "H3"):
        raise ValueError(f"unknown template {template!r}")
    M[:, 0, 2], M[:, 1, 2] = a1, a2
    M[:, 2, 0] = a1 if template == "H3" else -a1
    M[:, 2, 1], M[:, 2, 3] = -a2, a3
    M[:, 3, 2] = -a3
    return M


def template_signature(template: str) -> np.ndarray:
    return np.array([-1.0, 1.0, 1.0, 1.0]) if template == "H3" else np.ones(3 if template == "RW0" else 4)


def eta_gram(vectors: np.ndarray, signature: np.ndarray) -> np.ndarray:
    """Gram matrix of the rows under the diagonal inner product ``signature``."""
    return (vectors * signature) @ vectors.T


def eta_gram_schmidt(vectors: np.ndarray, signature: np.ndarray, pivot_tol: float = 1e-12) -> np.ndarray:
    """Orthonormalize rows in order under diag(signature).

    Row i is normalized to <a_i, a_i> = signature[i]; a pivot with the wrong
    sign or magnitude below ``pivot_tol`` raises IntegrationError.  Leading
    axes are treated as a batch.
    """
    out = np.array(vectors, dtype=float)
    for i in range(out.shape[-2]):
        row = out[..., i, :]
        if i:
            prev = out[..., :i, :]
            coef = np.einsum("...kj,j,...j->...k", prev, signature, row) * signature[:i]
            row -= np.einsum("...k,...kj->...j", coef, prev)
        q = np.einsum("...j,j,...j->...", row, signature, row)
        bad = (np.abs(q) < pivot_tol) | (q * signature[i] < 0)
        if np.any(bad):
            raise IntegrationError(f"re-orthonormalization pivot {np.ravel(q)[np.argmax(np.ravel(bad))]:.3e} "
                                   f"at row {i}")
        row /= np.sqrt(np.abs(q))[..., None]
    return out


@dataclass(frozen=True)
class FrameODESystem:
    """alpha_i' = sum_j A_ij(v) alpha_j with alpha_i(v0) = C_i.

    ``v_range`` fixes the step count for the whole system so that the discrete
    solution is a smooth function of v (needed when it is differenced).
    """

    template: str
    a1: CoefficientFunction = ZERO
    a2: CoefficientFunction = ZERO
    a3: CoefficientFunction = ZERO
    initial: np.ndarray | None = None
    v0: float = 0.0
    v_range: tuple | None = None
    reorthonormalize: bool = True

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise ValueError(f"unknown template {self.template!r}")
        n = self.dimension
        C = np.eye(n) if self.initial is None else np.asarray(self.initial, dtype=float)
        if C.shape != (n, n):
            raise ValueError(f"initial vectors must be {n}x{n}, got {C.shape}")
        gram = eta_gram(C, self.signature)
        if np.max(np.abs(gram - np.diag(self.signature))) > 1e-12:
            raise ValueError("initial vectors are not orthonormal for the template signature")
        object.__setattr__(self, "initial", C)

    @property
    def dimension(self) -> int:
        return 3 if self.template == "RW0" else 4

    @property
    def signature(self) -> np.ndarray:
        return template_signature(self.template)

    def matrix(self, v: float) -> np.ndarray:
        return template_matrix(self.template, self.a1(v), self.a2(v), self.a3(v))

    def rhs(self, v: float, alphas: np.ndarray) -> np.ndarray:
        return self.matrix(v) @ alphas

    def default_steps(self, v: float) -> int:
        span = abs(v - self.v0)
        if self.v_range is not None:
            span = max(span, abs(self.v_range[0] - self.v0), abs(self.v_range[1] - self.v0))
        return max(64, math.ceil(span / 0.01))


def integrate_frame(system: FrameODESystem, v: float, n_steps: int | None = None,
                    reorthonormalize: bool | None = None) -> np.ndarray:
    """alpha_1(v), ..., alpha_n(v) as the rows of an n x n array.

    Classical RK4 with ``n_steps`` equal steps from v0, each followed by
    eta-Gram-Schmidt when re-orthonormalization is on.
    """
    n = system.default_steps(v) if n_steps is None else int(n_steps)
    return integrate_frames(system, [v], n, reorthonormalize)[0]


def integrate_frames(system: FrameODESystem, vs, n_steps: int | None = None,
                     reorthonormalize: bool | None = None) -> np.ndarray:
    """integrate_frame for several targets at once; every target uses the same step count."""
    if reorthonormalize is None:
        reorthonormalize = system.reorthonormalize
    vs = np.asarray(vs, dtype=float).ravel()
    n = max(system.default_steps(v) for v in vs) if n_steps is None else int(n_steps)
    dim = system.dimension
    y = np.broadcast_to(system.initial, (vs.size, dim, dim)).copy()
    moving = vs != system.v0
    if not np.any(moving):
        return y
    h = (vs - system.v0) / n
    sig = system.signature
    # coefficient matrices at every half-step node of every target, evaluated in one pass
    nodes = (system.v0 + 0.5 * h[:, None] * np.arange(2 * n + 1)).ravel()
    M = template_matrices(system.template, system.a1.evaluate(nodes), system.a2.evaluate(nodes),
                          system.a3.evaluate(nodes)).reshape(vs.size, 2 * n + 1, dim, dim)
    hb = h[:, None, None]
    for k in range(n):
        A0, Am, A1 = M[:, 2 * k], M[:, 2 * k + 1], M[:, 2 * k + 2]
        k1 = A0 @ y
        k2 = Am @ (y + 0.5 * hb * k1)
        k3 = Am @ (y + 0.5 * hb * k2)
        k4 = A1 @ (y + hb * k3)
        y = y + (hb / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if reorthonormalize:
            y = eta_gram_schmidt(y, sig)
    y[~moving] = system.initial
    return y


def _warp_integrand(f: WarpingFunction, a: float, sign: str):
    if sign not in ("-", "+"):
        raise ValueError("sign must be '-' or '+'")
    s = -1.0 if sign == "-" else 1.0

    def integrand(x):
        fx = f(x)
        return a / (fx * math.sqrt(a * a + s * fx * fx))

    return integrand


def check_warp_margin(f: WarpingFunction, a: float, u0: float, u: float, margin: float | None = None,
                      n: int = 257) -> None:
    """Raise DomainError if a^2 - f^2 < margin^2 somewhere on [u0, u]."""
    if margin is None:
        margin = 1e-4 * abs(a)
    for x in np.linspace(min(u0, u), max(u0, u), n):
        if a * a - f(x) ** 2 < margin * margin:
            raise DomainError(f"a^2 - f^2 below margin^2 at u = {x:.6g}")


def warp_integral(f: WarpingFunction, a: float, sign: str, u0: float, u: float,
                  margin: float | None = None) -> float:
    """int_{u0}^{u} a / (f sqrt(a^2 -/+ f^2)) by adaptive Gauss-Kronrod."""
    if u == u0:
        return 0.0
    if sign == "-":
        check_warp_margin(f, a, u0, u, margin)
    val, _ = integrate.quad(_warp_integrand(f, a, sign), u0, u, epsabs=1e-10, epsrel=1e-12, limit=200)
    return float(val)


class WarpPrimitive:
    """u -> int_{u0}^{u} of the warp integrand by fixed composite Gauss-Legendre.

    Unlike the adaptive rule, the node layout scales with u, so the result is
    a smooth function of u and safe to difference.
    """

    def __init__(self, f: WarpingFunction, a: float, sign: str, u0: float,
                 panels: int = 8, order: int = 24):
        self.integrand = _warp_integrand(f, a, sign)
        self.f, self.a, self.sign, self.u0 = f, a, sign, u0
        x, w = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(0.0, 1.0, panels + 1)
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            nodes.append(lo + (hi - lo) * (x + 1.0) / 2.0)
            weights.append(w * (hi - lo) / 2.0)
        self._nodes = np.concatenate(nodes)
        self._weights = np.concatenate(weights)

    def __call__(self, u: float) -> float:
        d = u - self.u0
        if d == 0.0:
            return 0.0
        vals = [self.integrand(self.u0 + d * s) for s in self._nodes]
        return float(d * np.dot(self._weights, vals))

    def derivative(self, u: float) -> float:
        return self.integrand(u)


def phi23_from_ode(a1: CoefficientFunction, a2: CoefficientFunction, phi1: CoefficientFunction,
                   v0: float, v: float, phi2_0: float = 0.0, phi3_0: float = 0.0,
                   n_steps: int | None = None) -> tuple[float, float]:
    """phi_2' = -a_1 phi_1, phi_3' = -a_2 phi_1 by RK4 from v0."""
    if v == v0:
        return float(phi2_0), float(phi3_0)
    n = max(64, math.ceil(abs(v - v0) / 0.01)) if n_steps is None else int(n_steps)
    h = (v - v0) / n
    y = np.array([phi2_0, phi3_0], dtype=float)

    def rhs(s):
        p = phi1(s)
        return np.array([-a1(s) * p, -a2(s) * p])

    s = v0
    for _ in range(n):
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h)
        k4 = rhs(s + h)
        # right-hand side does not depend on y, so k3 == k2
        y = y + (h / 6.0) * (k1 + 4.0 * k2 + k4)
        s += h
    return float(y[0]), float(y[1])
