"""Immersed surfaces in L^4_1(f, c): jets, adapted frames and second fundamental forms.

Frame vectors are stored as rows of a 4 x n array in embedding coordinates.
The adapted frame {e1, e2; e3, e4} has e1 along the tangential part T of
d/dt and e3 along its normal part eta, so that

    d/dt = sinh(theta) e1 + cosh(theta) e3     (space-like surfaces)
    d/dt = cosh(theta) e1 + sinh(theta) e3     (time-like surfaces).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _diff
from .ambient import DomainError, WarpingFunction, connection, d_dt, metric_matrix, project_vector
from .space_forms import MINKOWSKI_SIGNS, embedding_inner, project_to_model

DET_TOL = 1e-10
HORIZONTAL_TOL = 1e-8
ETA_ZERO_TOL = 1e-7
RANK_TOL = 1e-6
RANK_TOL_ABS = 1e-10

SPACELIKE_SIGNS = np.array([1.0, 1.0, -1.0, 1.0])
TIMELIKE_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])


class ImmersionError(ValueError):
    """The map fails to be an immersion (rank-deficient Jacobian)."""


class DegenerateError(ValueError):
    """The induced metric is degenerate at the point."""


class FrameError(ValueError):
    """No adapted frame exists at the point (e.g. T = 0 on a horizontal slice)."""


@dataclass(frozen=True)
class Immersion:
    """phi(u, v) as an embedded point ``[t, x...]`` of L^4_1(f, c).

    ``partials`` optionally returns the analytic pair (phi_u, phi_v); without
    it first partials are differenced.  Second partials are always obtained
    by one differencing level over the first partials.
    """

    c: int
    point: Callable[[float, float], np.ndarray]
    u_range: tuple
    v_range: tuple
    partials: Callable | None = None
    name: str = ""

    def contains(self, u: float, v: float) -> bool:
        return (self.u_range[0] <= u <= self.u_range[1]) and (self.v_range[0] <= v <= self.v_range[1])

    def __call__(self, u: float, v: float) -> np.ndarray:
        return self.point(u, v)


@dataclass(frozen=True)
class SurfaceJet2:
    p: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    duu: np.ndarray | None = None
    duv: np.ndarray | None = None
    dvv: np.ndarray | None = None


@dataclass(frozen=True)
class MovingFrame:
    p: np.ndarray
    e: np.ndarray            # rows e1, e2, e3, e4
    eps: np.ndarray          # causal signs
    theta: float
    causal_type: str
    coords: np.ndarray       # e_i = coords[i, 0] phi_u + coords[i, 1] phi_v  (i = 1, 2)
    metric: np.ndarray       # induced metric g_ij in (u, v)
    weights: np.ndarray      # diagonal ambient metric at p in embedding coordinates
    orientation: int = 1
    eta_zero: bool = False

    @property
    def e1(self):
        return self.e[0]

    @property
    def e2(self):
        return self.e[1]

    @property
    def e3(self):
        return self.e[2]

    @property
    def e4(self):
        return self.e[3]


@dataclass(frozen=True)
class FundamentalForms:
    g11: float
    g12: float
    g22: float
    h: np.ndarray            # h[alpha - 3, i, j], frame coefficients: h(e_i, e_j) = sum h^a_ij e_a
    T: np.ndarray
    eta: np.ndarray
    frame: MovingFrame
    nabla: np.ndarray        # nabla[i, j] = nabla~_{e_i} e_j in embedding coordinates
    asymmetry: float = 0.0

    def h_vector(self, i: int, j: int) -> np.ndarray:
        """h(e_i, e_j) as an ambient vector (1-based indices)."""
        return self.h[0, i - 1, j - 1] * self.frame.e3 + self.h[1, i - 1, j - 1] * self.frame.e4

    def h_norm(self, i: int, j: int) -> float:
        return float(math.hypot(self.h[0, i - 1, j - 1], self.h[1, i - 1, j - 1]))

    @property
    def omega(self) -> float:
        """<nabla~_{e2} e1, e2> (times eps_2 = 1)."""
        return _frame_component(self.frame, self.nabla[1, 0], 1)

    @property
    def h3_22(self) -> float:
        """<h(e2, e2), e3>."""
        return float(self.frame.eps[2] * self.h[0, 1, 1])

    @property
    def h4_22(self) -> float:
        """<h(e2, e2), e4>."""
        return float(self.frame.eps[3] * self.h[1, 1, 1])

    @property
    def xi_norm(self) -> float:
        return self.h_norm(2, 2)


def _ip(w, a, b) -> float:
    return float(np.dot(w * a, b))


def _frame_component(frame: MovingFrame, X, k: int) -> float:
    """eps_k <X, e_k> for the 0-based index k."""
    return float(frame.eps[k] * _ip(frame.weights, X, frame.e[k]))


def frame_components(frame: MovingFrame, X) -> np.ndarray:
    """Coefficients of X in the frame, X = sum c_k e_k."""
    w = frame.weights
    return frame.eps * (frame.e @ (w * np.asarray(X)))


def _steps(u: float, v: float, step: float | None):
    if step is not None:
        return step, step
    return _diff.step_for(u), _diff.step_for(v)


def _diff_partials(immersion: Immersion, u: float, v: float, hu: float, hv: float):
    c = immersion.c
    du = _diff.combine([immersion.point(x, v) for x in _diff.stencil_points(u, hu)], hu)
    dv = _diff.combine([immersion.point(u, y) for y in _diff.stencil_points(v, hv)], hv)
    p = np.asarray(immersion.point(u, v), dtype=float)
    return project_vector(c, p, du), project_vector(c, p, dv)


def first_jet(immersion: Immersion, u: float, v: float, step: float | None = None) -> SurfaceJet2:
    if not immersion.contains(u, v):
        raise DomainError(f"(u, v) = ({u}, {v}) outside the parameter rectangle")
    c = immersion.c
    p = np.asarray(immersion.point(u, v), dtype=float)
    p = np.concatenate([[p[0]], project_to_model(c, p[1:])])
    if immersion.partials is not None:
        du, dv = immersion.partials(u, v)
        du, dv = project_vector(c, p, du), project_vector(c, p, dv)
    else:
        du, dv = _diff_partials(immersion, u, v, *_steps(u, v, step))
    return SurfaceJet2(p, np.asarray(du, dtype=float), np.asarray(dv, dtype=float))


def jet(immersion: Immersion, u: float, v: float, step: float | None = None) -> SurfaceJet2:
    """Point, first and second partials of the immersion at (u, v)."""
    base = first_jet(immersion, u, v, step)
    hu, hv = _steps(u, v, step)

    def firsts(a, b):
        j = first_jet(immersion, a, b, step)
        return j.du, j.dv

    u_firsts = [firsts(x, v) for x in _diff.stencil_points(u, hu)]
    v_firsts = [firsts(u, y) for y in _diff.stencil_points(v, hv)]
    duu = _diff.combine([a for a, _ in u_firsts], hu)
    duv = _diff.combine([b for _, b in u_firsts], hu)
    dvv = _diff.combine([b for _, b in v_firsts], hv)
    J = np.vstack([base.du, base.dv])
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] <= 1e-10 * max(sv[0], 1.0):
        raise ImmersionError(f"rank-deficient Jacobian at (u, v) = ({u}, {v})")
    return SurfaceJet2(base.p, base.du, base.dv, duu, duv, dvv)


def induced_metric(f: WarpingFunction, c: int, jet2: SurfaceJet2):
    """(g11, g12, g22, causal_type) with causal_type in spacelike/timelike/degenerate."""
    w = metric_matrix(f, c, jet2.p)
    g11 = _ip(w, jet2.du, jet2.du)
    g12 = _ip(w, jet2.du, jet2.dv)
    g22 = _ip(w, jet2.dv, jet2.dv)
    det = g11 * g22 - g12 * g12
    if abs(det) < DET_TOL:
        kind = "degenerate"
    elif det > 0:
        kind = "spacelike" if g11 + g22 > 0 else "degenerate"
    else:
        kind = "timelike"
    return g11, g12, g22, kind


def tangent_part(f: WarpingFunction, c: int, jet2: SurfaceJet2, X) -> np.ndarray:
    """Orthogonal projection of X onto span(phi_u, phi_v)."""
    w = metric_matrix(f, c, jet2.p)
    g = np.array([[_ip(w, jet2.du, jet2.du), _ip(w, jet2.du, jet2.dv)],
                  [_ip(w, jet2.du, jet2.dv), _ip(w, jet2.dv, jet2.dv)]])
    b = np.array([_ip(w, X, jet2.du), _ip(w, X, jet2.dv)])
    coef = np.linalg.solve(g, b)
    return coef[0] * jet2.du + coef[1] * jet2.dv


def t_eta_split(f: WarpingFunction, c: int, jet2: SurfaceJet2, frame: MovingFrame | None = None):
    """(T, eta) with d/dt = T + eta along the surface."""
    dt = d_dt(c)
    if frame is None:
        T = tangent_part(f, c, jet2, dt)
    else:
        w = metric_matrix(f, c, jet2.p)
        T = sum(frame.eps[i] * _ip(w, dt, frame.e[i]) * frame.e[i] for i in (0, 1))
    return T, dt - T


def _complete(c: int, p, w, e: list, eps: list) -> np.ndarray:
    """Unit vector orthogonal to the rows of ``e`` (assumed orthonormal)."""
    E = np.asarray(e, dtype=float)
    s = np.asarray(eps, dtype=float)
    n = p.shape[0]
    if len(E) == n - 2 + (c == 0):
        # the complement is a line: take the null vector of the w-pairings
        rows = E * w
        if c != 0:
            normal = np.zeros(n)
            normal[1:] = p[1:] * (MINKOWSKI_SIGNS if c == -1 else 1.0)
            rows = np.concatenate([rows, normal[None, :]])
        best = np.linalg.svd(rows)[2][-1]
        return best / math.sqrt(abs(_ip(w, best, best)))

    def strip(X):
        return X - ((X * w) @ E.T * s) @ E

    X = strip(project_vector(c, p, np.eye(p.shape[0])))
    q = np.abs(np.einsum("ij,j,ij->i", X, w, X))
    best = strip(X[int(np.argmax(q))])
    return best / math.sqrt(abs(_ip(w, best, best)))


def _orientation_det(c: int, p, e: np.ndarray) -> float:
    if c == 0:
        return float(np.linalg.det(e))
    normal = np.concatenate([[0.0], p[1:]])
    return float(np.linalg.det(np.concatenate([normal[None, :], e])))


def adapted_frame(f: WarpingFunction, c: int, jet2: SurfaceJet2, orientation: int = 1) -> MovingFrame:
    """Adapted orthonormal frame with e1 along T and e3 along eta.

    ``orientation`` fixes the sign of sinh(theta): for space-like surfaces it
    picks e1 = orientation * T/|T|, for time-like ones e3 = orientation * eta/|eta|.
    e4 is fixed by a positive orientation determinant.
    """
    orientation = 1 if orientation >= 0 else -1
    p, du, dv = jet2.p, jet2.du, jet2.dv
    w = metric_matrix(f, c, p)
    J = np.array([du, dv])
    Jw = J * w
    g = Jw @ J.T
    g[1, 0] = g[0, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    if abs(det) < DET_TOL:
        raise DegenerateError(f"degenerate induced metric (det = {det:.3e})")
    spacelike = det > 0
    if spacelike and g[0, 0] + g[1, 1] <= 0:
        raise DegenerateError("negative-definite induced metric")
    ginv = np.array([[g[1, 1], -g[0, 1]], [-g[0, 1], g[0, 0]]]) / det
    dt = d_dt(c)
    coef = ginv @ np.array([-du[0], -dv[0]])  # <d/dt, X> = -X_0
    T = coef[0] * du + coef[1] * dv
    eta = dt - T
    eta_zero = False
    if spacelike:
        eps = SPACELIKE_SIGNS
        nT = math.sqrt(max(_ip(w, T, T), 0.0))
        if nT < HORIZONTAL_TOL:
            raise FrameError("horizontal point: T = 0")
        e1 = orientation * T / nT
        e3 = eta / math.sqrt(-_ip(w, eta, eta))
    else:
        eps = TIMELIKE_SIGNS
        e1 = T / math.sqrt(-_ip(w, T, T))
        neta = math.sqrt(max(_ip(w, eta, eta), 0.0))
        if neta > ETA_ZERO_TOL:
            e3 = orientation * eta / neta
        else:
            eta_zero = True
            e3 = None
    r = dv - eps[0] * _ip(w, dv, e1) * e1
    if _ip(w, r, r) < 1e-6 * abs(_ip(w, dv, dv)):
        r = du - eps[0] * _ip(w, du, e1) * e1
    e2 = r / math.sqrt(_ip(w, r, r))
    if e3 is None:
        e3 = _complete(c, p, w, [e1, e2], [eps[0], eps[1]])
    e4 = _complete(c, p, w, [e1, e2, e3], list(eps[:3]))
    E = np.array([e1, e2, e3, e4])
    if _orientation_det(c, p, E) < 0:
        E[3] = -E[3]
    if spacelike:
        theta = math.asinh(_ip(w, dt, E[0]))
    else:
        theta = 0.0 if eta_zero else math.asinh(_ip(w, dt, E[2]))
    coords = (ginv @ (Jw @ E[:2].T)).T
    frame = MovingFrame(p=p, e=E, eps=eps.copy(), theta=theta,
                        causal_type="spacelike" if spacelike else "timelike",
                        coords=coords, metric=g, weights=w, orientation=orientation, eta_zero=eta_zero)
    return frame


def frame_orthonormality_defect(frame: MovingFrame) -> float:
    w = frame.weights
    G = (frame.e * w) @ frame.e.T
    return float(np.max(np.abs(G - np.diag(frame.eps))))


def theta_decomposition_residual(frame: MovingFrame) -> float:
    """Frame-norm of d/dt minus its theta reconstruction."""
    dt = np.zeros_like(frame.p)
    dt[0] = 1.0
    s, ch = math.sinh(frame.theta), math.cosh(frame.theta)
    if frame.causal_type == "spacelike":
        rec = s * frame.e1 + ch * frame.e3
    else:
        rec = ch * frame.e1 + s * frame.e3
    return float(np.linalg.norm(frame_components(frame, dt - rec)))


def _connection_rows(f, c, p, X, W, dW):
    return np.array([connection(f, c, p, X, wk, dk) for wk, dk in zip(W, dW)])


class SurfaceGeometry:
    """Cached local geometry of one immersion: frames, frame derivatives, forms.

    Frame fields are differentiated along coordinate lines with the 5-point
    stencil and turned into ambient covariant derivatives; directions e_i are
    then obtained through the inverse induced metric.
    """

    def __init__(self, f: WarpingFunction, c: int, immersion: Immersion, orientation: int = 1,
                 step: float | None = None):
        self.f, self.c, self.immersion = f, c, immersion
        self.orientation = orientation
        self.step = step
        self._jets: dict = {}
        self._frames: dict = {}
        self._nabla: dict = {}
        self._forms: dict = {}

    def steps(self, u: float, v: float):
        return _steps(u, v, self.step)

    def first_jet(self, u: float, v: float) -> SurfaceJet2:
        key = (u, v)
        j = self._jets.get(key)
        if j is None:
            j = first_jet(self.immersion, u, v, self.step)
            self._jets[key] = j
        return j

    def frame(self, u: float, v: float) -> MovingFrame:
        key = (u, v)
        fr = self._frames.get(key)
        if fr is None:
            try:
                fr = adapted_frame(self.f, self.c, self.first_jet(u, v), self.orientation)
            except (FrameError, DegenerateError, DomainError) as exc:
                fr = exc
            self._frames[key] = fr
        if isinstance(fr, Exception):
            raise fr
        return fr

    def coordinate_derivatives(self, field, u: float, v: float):
        """(nabla~_{phi_u} W, nabla~_{phi_v} W) for W = field(u, v) (array of rows or a vector)."""
        hu, hv = self.steps(u, v)
        j = self.first_jet(u, v)
        W = np.asarray(field(u, v), dtype=float)
        single = W.ndim == 1
        Wr = W[None, :] if single else W
        dWu = _diff.combine([np.asarray(field(x, v)) for x in _diff.stencil_points(u, hu)], hu)
        dWv = _diff.combine([np.asarray(field(u, y)) for y in _diff.stencil_points(v, hv)], hv)
        if single:
            dWu, dWv = dWu[None, :], dWv[None, :]
        nu = _connection_rows(self.f, self.c, j.p, j.du, Wr, dWu)
        nv = _connection_rows(self.f, self.c, j.p, j.dv, Wr, dWv)
        return (nu[0], nv[0]) if single else (nu, nv)

    def directional(self, frame: MovingFrame, nu, nv, i: int):
        """nabla~_{e_i} from coordinate derivatives (0-based i)."""
        return frame.coords[i, 0] * nu + frame.coords[i, 1] * nv

    def frame_derivatives(self, u: float, v: float) -> np.ndarray:
        """nabla[i, j] = nabla~_{e_i} e_j for i in (1, 2), j in (1..4), 0-based."""
        key = (u, v)
        out = self._nabla.get(key)
        if out is None:
            fr = self.frame(u, v)
            nu, nv = self.coordinate_derivatives(lambda a, b: self.frame(a, b).e, u, v)
            out = np.array([self.directional(fr, nu, nv, i) for i in (0, 1)])
            self._nabla[key] = out
        return out

    def scalar_derivatives(self, fn, u: float, v: float):
        hu, hv = self.steps(u, v)
        return (_diff.central_diff(lambda x: fn(x, v), u, hu),
                _diff.central_diff(lambda y: fn(u, y), v, hv))

    def forms(self, u: float, v: float) -> FundamentalForms:
        key = (u, v)
        out = self._forms.get(key)
        if out is None:
            fr = self.frame(u, v)
            nab = self.frame_derivatives(u, v)
            h = np.zeros((2, 2, 2))
            for a in (0, 1):
                for i in (0, 1):
                    for jj in (0, 1):
                        h[a, i, jj] = _frame_component(fr, nab[i, jj], 2 + a)
            asym = float(np.max(np.abs(h[:, 0, 1] - h[:, 1, 0])))
            hs = 0.5 * (h + h.transpose(0, 2, 1))
            T, eta = t_eta_split(self.f, self.c, self.first_jet(u, v), fr)
            g = fr.metric
            out = FundamentalForms(g[0, 0], g[0, 1], g[1, 1], hs, T, eta, fr, nab, asym)
            self._forms[key] = out
        return out


def second_fundamental_form(f: WarpingFunction, c: int, immersion: Immersion, u: float, v: float,
                            frame: MovingFrame | None = None, step: float | None = None) -> FundamentalForms:
    """Frame components h^a_ij = eps_a <nabla~_{e_i} e_j, e_a> at (u, v)."""
    orientation = 1 if frame is None else frame.orientation
    return SurfaceGeometry(f, c, immersion, orientation, step).forms(u, v)


def coordinate_second_fundamental_form(f: WarpingFunction, c: int, immersion: Immersion, u: float, v: float,
                                       step: float | None = None) -> np.ndarray:
    """Normal parts of nabla~_{phi_i} phi_j as a 2 x 2 array of ambient vectors."""
    j2 = jet(immersion, u, v, step)
    firsts = (j2.du, j2.dv)
    seconds = {(0, 0): j2.duu, (0, 1): j2.duv, (1, 0): j2.duv, (1, 1): j2.dvv}
    out = np.zeros((2, 2, j2.p.shape[0]))
    for i in (0, 1):
        for k in (0, 1):
            W = connection(f, c, j2.p, firsts[i], firsts[k], seconds[(i, k)])
            out[i, k] = W - tangent_part(f, c, j2, W)
    return out


def shape_operator(forms: FundamentalForms, alpha: int) -> np.ndarray:
    """Matrix of A_{e_alpha} in {e1, e2}: A e_j = sum_i A[i, j] e_i.

    From <A X, Y> = <h(X, Y), e_alpha>: A[i, j] = eps_i eps_alpha h^alpha_ij.
    """
    if alpha not in (3, 4):
        raise ValueError("alpha must be 3 or 4")
    eps = forms.frame.eps
    return eps[:2, None] * eps[alpha - 1] * forms.h[alpha - 3]


def relative_nullity_dim(forms, tol: float = RANK_TOL, tol_abs: float = RANK_TOL_ABS) -> int:
    """Dimension of the relative null space from the stacked 4 x 2 matrix [h^3; h^4]."""
    h = forms.h if isinstance(forms, FundamentalForms) else np.asarray(forms, dtype=float)
    M = h.reshape(4, 2)
    sv = np.linalg.svd(M, compute_uv=False)
    thresh = max(tol * sv[0], tol_abs)
    return 2 - int(np.sum(sv > thresh))


def mean_curvature_vector(forms: FundamentalForms) -> np.ndarray:
    """H = 1/2 sum_i eps_i h(e_i, e_i)."""
    eps = forms.frame.eps
    return 0.5 * (eps[0] * forms.h_vector(1, 1) + eps[1] * forms.h_vector(2, 2))


def fiber_norm(c: int, X) -> float:
    X = np.asarray(X)
    return math.sqrt(abs(embedding_inner(c, X[1:], X[1:])))
