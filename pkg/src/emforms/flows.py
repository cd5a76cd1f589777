"""Motions, transport of forms along them, and convective time derivatives.

A :class:`Motion` is the two-parameter displacement ``phi_{tau,t}`` taking the
configuration at time ``t`` to the one at time ``tau``. Relative motions of
the ambient space (observer changes) are :class:`RelativeMotion` objects given
by absolute maps ``zeta_t``; Galilei boosts are the translational, stationary
case ``zeta_t(x) = x + t w``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .chains import Chain, boundary, integrate, refine
from .errors import ArgumentError, SingularMapError
from .exterior_algebra import VolumeForm, pullback_coeffs
from .form_fields import (
    DEFAULT_TIME_STEP,
    FormField,
    VectorField,
    add,
    as_points,
    constant_vector_field,
    contract_field,
    cross_field,
    curl,
    div,
    exterior_derivative,
    lie_derivative_spatial,
    linear_vector_field,
    mu_contract_field,
    polynomial_form,
    polynomial_vector_field,
    scale_vector_field,
    time_derivative,
    time_derivative_vector,
    unit_cube_lattice,
)
from .polynomials import Polynomial

PointMap = Callable[[np.ndarray, float, float], np.ndarray]
JacobianMap = Callable[[np.ndarray, float, float], np.ndarray]

TANGENT_FD_STEP = 1e-6
SINGULAR_DET = 1e-12


def _fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], pts: np.ndarray, h: float) -> np.ndarray:
    n = pts.shape[1]
    cols = []
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        cols.append((fn(pts + step) - fn(pts - step)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def default_points(dim: int) -> np.ndarray:
    return unit_cube_lattice(3, dim)


@dataclass(frozen=True, eq=False)
class Motion:
    """Displacement family ``phi_{tau,t}`` with optional analytic tangent and velocity."""

    dim: int
    displacement: PointMap
    tangent: JacobianMap | None = None
    velocity: VectorField | None = None
    label: str = "motion"
    fd_step: float = TANGENT_FD_STEP

    def __call__(self, points: np.ndarray, t: float, tau: float) -> np.ndarray:
        pts = as_points(points, self.dim)
        return np.asarray(self.displacement(pts, float(t), float(tau)), dtype=float)

    def jacobian(self, points: np.ndarray, t: float, tau: float) -> np.ndarray:
        pts = as_points(points, self.dim)
        if self.tangent is not None:
            jac = np.asarray(self.tangent(pts, float(t), float(tau)), dtype=float)
            return np.broadcast_to(jac, (pts.shape[0], self.dim, self.dim)).copy()
        return _fd_jacobian(lambda p: self.displacement(p, t, tau), pts, self.fd_step)

    def velocity_field(self, h: float = 1e-5) -> VectorField:
        if self.velocity is not None:
            return self.velocity
        disp = self.displacement
        return VectorField(self.dim, "even", lambda p, t: (disp(p, t, t + h) - disp(p, t, t - h)) / (2.0 * h))

    # -- standard motions ------------------------------------------------
    @classmethod
    def static(cls, dim: int = 3) -> "Motion":
        return cls.translation(np.zeros(dim), label="static")

    @classmethod
    def translation(cls, velocity: Sequence[float], label: str = "translation") -> "Motion":
        v = np.asarray(velocity, dtype=float)
        n = v.shape[0]
        return cls(
            n,
            lambda p, t, tau: p + (tau - t) * v,
            lambda p, t, tau: np.broadcast_to(np.eye(n), (p.shape[0], n, n)),
            constant_vector_field(v),
            label,
        )

    @classmethod
    def linear_flow(cls, matrix: np.ndarray, offset: Sequence[float] | None = None, label: str = "linear flow") -> "Motion":
        """Flow of the autonomous affine field ``v(x) = A x + b``."""
        a = np.asarray(matrix, dtype=float)
        n = a.shape[0]
        b = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
        aug = np.zeros((n + 1, n + 1))
        aug[:n, :n] = a
        aug[:n, n] = b

        def disp(p: np.ndarray, t: float, tau: float) -> np.ndarray:
            e = expm((tau - t) * aug)
            return p @ e[:n, :n].T + e[:n, n]

        def tangent(p: np.ndarray, t: float, tau: float) -> np.ndarray:
            return np.broadcast_to(expm((tau - t) * a), (p.shape[0], n, n))

        return cls(n, disp, tangent, linear_vector_field(a, b), label)

    @classmethod
    def rotation(cls, omega: float, dim: int = 3, center: Sequence[float] | None = None) -> "Motion":
        """Rigid rotation about the z axis (or the origin in R^2) with angular rate ``omega``."""
        a = np.zeros((dim, dim))
        a[0, 1], a[1, 0] = -omega, omega
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        return cls.linear_flow(a, -a @ c, label="rotation")

    @classmethod
    def expansion(cls, rate: float, dim: int = 3) -> "Motion":
        return cls.linear_flow(rate * np.eye(dim), label="expansion")

    @classmethod
    def from_velocity(cls, velocity: VectorField, label: str = "flow", max_step: float = 1e-2) -> "Motion":
        """Motion generated by an arbitrary velocity field (classical RK4 integration)."""
        n = velocity.dim

        def disp(p: np.ndarray, t: float, tau: float) -> np.ndarray:
            span = tau - t
            steps = max(4, int(np.ceil(abs(span) / max_step)))
            h = span / steps
            x = np.array(p, dtype=float)
            s = t
            for _ in range(steps):
                k1 = velocity(x, s)
                k2 = velocity(x + 0.5 * h * k1, s + 0.5 * h)
                k3 = velocity(x + 0.5 * h * k2, s + 0.5 * h)
                k4 = velocity(x + h * k3, s + h)
                x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                s += h
            return x

        return cls(n, disp, None, velocity, label)


@dataclass(frozen=True, eq=False)
class RelativeMotion:
    """Ambient relative motion given by absolute maps ``zeta_t`` and their inverses."""

    dim: int
    forward: Callable[[np.ndarray, float], np.ndarray]
    inverse: Callable[[np.ndarray, float], np.ndarray]
    jacobian: Callable[[np.ndarray, float], np.ndarray]
    velocity: VectorField
    translational: bool = False
    stationary: bool = False
    shift: np.ndarray | None = None
    label: str = "relative motion"

    @property
    def is_galilei(self) -> bool:
        return self.translational and self.stationary

    @classmethod
    def boost(cls, w: Sequence[float]) -> "RelativeMotion":
        w = np.asarray(w, dtype=float)
        n = w.shape[0]
        return cls(
            n,
            lambda x, t: x + t * w,
            lambda y, t: y - t * w,
            lambda x, t: np.broadcast_to(np.eye(n), (x.shape[0], n, n)),
            constant_vector_field(w),
            True,
            True,
            w,
            "galilei boost",
        )

    @classmethod
    def identity(cls, dim: int = 3) -> "RelativeMotion":
        return cls.boost(np.zeros(dim))

    @classmethod
    def rotation(cls, omega: float, dim: int = 3) -> "RelativeMotion":
        a = np.zeros((dim, dim))
        a[0, 1], a[1, 0] = -omega, omega

        def rot(t: float) -> np.ndarray:
            return expm(t * a)

        return cls(
            dim,
            lambda x, t: x @ rot(t).T,
            lambda y, t: y @ rot(-t).T,
            lambda x, t: np.broadcast_to(rot(t), (x.shape[0], dim, dim)),
            linear_vector_field(a),
            False,
            True,
            None,
            "rotation",
        )

    def as_motion(self) -> Motion:
        def disp(p: np.ndarray, t: float, tau: float) -> np.ndarray:
            return self.forward(self.inverse(p, t), tau)

        def tangent(p: np.ndarray, t: float, tau: float) -> np.ndarray:
            x0 = self.inverse(p, t)
            return self.jacobian(x0, tau) @ np.linalg.inv(self.jacobian(x0, t))

        return Motion(self.dim, disp, tangent, self.velocity, self.label)


# ---------------------------------------------------------------------------
# pullback and push
# ---------------------------------------------------------------------------


def _check_invertible(jac: np.ndarray) -> None:
    if jac.shape[-1] == jac.shape[-2]:
        dets = np.linalg.det(jac)
        if np.any(np.abs(dets) < SINGULAR_DET):
            raise SingularMapError(f"tangent map not invertible (min |det| = {np.min(np.abs(dets)):.3e})")


def pullback_by_map(
    f: FormField,
    point_map: Callable[[np.ndarray, float], np.ndarray],
    jacobian: Callable[[np.ndarray, float], np.ndarray],
    source_dim: int,
) -> FormField:
    """Pull ``f`` back through a (possibly time-dependent) map R^m -> R^n."""
    k = f.degree

    def sample(p: np.ndarray, s: float) -> np.ndarray:
        jac = jacobian(p, s)
        _check_invertible(jac)
        return pullback_coeffs(f(point_map(p, s), s), jac, k)

    return FormField(source_dim, k, f.parity, sample, fd_step=f.fd_step)


def pullback(f: FormField, m: Motion, t: float, tau: float) -> FormField:
    """``phi_{tau,t}`` pull-back of ``f``; the result samples ``f`` at the time passed to it."""
    if f.dim != m.dim:
        raise ArgumentError("form and motion differ in dimension")
    return pullback_by_map(f, lambda p, s: m(p, t, tau), lambda p, s: m.jacobian(p, t, tau), m.dim)


def _pulled(f: FormField, m: Motion, points: np.ndarray, t: float, tau: float) -> np.ndarray:
    jac = m.jacobian(points, t, tau)
    _check_invertible(jac)
    return pullback_coeffs(f(m(points, t, tau), tau), jac, f.degree)


def pullback_vector(u: VectorField, m: Motion, t: float, tau: float) -> VectorField:
    def sample(p: np.ndarray, s: float) -> np.ndarray:
        jac = m.jacobian(p, t, tau)
        _check_invertible(jac)
        return np.linalg.solve(jac, u(m(p, t, tau), s)[..., None])[..., 0]

    return VectorField(u.dim, u.parity, sample)


def convective_derivative(f: FormField, m: Motion, h_t: float = DEFAULT_TIME_STEP) -> FormField:
    """``L_{phi,t} f = d/dtau|_{tau=t} phi_{tau,t}^* f_tau`` by central differences.

    The returned field is time-dependent: sampling it at time ``t`` gives the
    convective derivative at ``t``.
    """
    if f.dim != m.dim:
        raise ArgumentError("form and motion differ in dimension")

    def sample(p: np.ndarray, t: float) -> np.ndarray:
        return (_pulled(f, m, p, t, t + h_t) - _pulled(f, m, p, t, t - h_t)) / (2.0 * h_t)

    return FormField(f.dim, f.degree, f.parity, sample, fd_step=f.fd_step)


def convective_derivative_vector(u: VectorField, m: Motion, h_t: float = DEFAULT_TIME_STEP) -> VectorField:
    def pulled(p: np.ndarray, t: float, tau: float) -> np.ndarray:
        jac = m.jacobian(p, t, tau)
        return np.linalg.solve(jac, u(m(p, t, tau), tau)[..., None])[..., 0]

    def sample(p: np.ndarray, t: float) -> np.ndarray:
        return (pulled(p, t, t + h_t) - pulled(p, t, t - h_t)) / (2.0 * h_t)

    return VectorField(u.dim, u.parity, sample)


def spatial_convective_derivative(f: FormField, m: Motion, h_t: float = DEFAULT_TIME_STEP) -> FormField:
    """The split form ``d_t f + L_v f`` (partial time derivative plus Cartan)."""
    return add(time_derivative(f, h_t), lie_derivative_spatial(f, m.velocity_field()))


def _boost_substitution(poly: Polynomial, w: np.ndarray, sign: float) -> Polynomial:
    """Replace x_i by x_i + sign * t * w_i (time is the last variable)."""
    n = w.shape[0]
    tvar = Polynomial.variable(n + 1, n)
    reps = [Polynomial.variable(n + 1, i) + sign * w[i] * tvar for i in range(n)] + [tvar]
    return poly.substitute(reps)


def push_field(f: FormField, zeta: RelativeMotion) -> FormField:
    """``(zeta^ f)_s = (zeta_s^{-1})^* f_s``."""
    if f.dim != zeta.dim:
        raise ArgumentError("form and relative motion differ in dimension")
    if zeta.is_galilei and zeta.shift is not None and f.poly is not None:
        polys = [_boost_substitution(p, zeta.shift, -1.0) for p in f.poly]
        return polynomial_form(f.dim, f.degree, polys, f.parity)
    k = f.degree

    def sample(y: np.ndarray, s: float) -> np.ndarray:
        x = zeta.inverse(y, s)
        jac = np.linalg.inv(zeta.jacobian(x, s))
        return pullback_coeffs(f(x, s), jac, k)

    return FormField(f.dim, k, f.parity, sample, fd_step=f.fd_step)


def push_vector_field(u: VectorField, zeta: RelativeMotion) -> VectorField:
    if zeta.is_galilei and zeta.shift is not None and u.poly is not None:
        return polynomial_vector_field(u.dim, [_boost_substitution(p, zeta.shift, -1.0) for p in u.poly], u.parity)

    def sample(y: np.ndarray, s: float) -> np.ndarray:
        x = zeta.inverse(y, s)
        return np.einsum("nij,nj->ni", zeta.jacobian(x, s), u(x, s))

    return VectorField(u.dim, u.parity, sample)


def push_chain(c: Chain, zeta: RelativeMotion, t: float) -> Chain:
    """Image of a chain under ``zeta_t`` (vertices mapped; frames mapped by the tangent)."""
    moved = c.mapped(lambda p: zeta.forward(p, t))
    if c.frames is None or c.frames.shape[1] == 0:
        return moved
    jac = zeta.jacobian(c.vertices[:, 0, :], t)
    frames = np.einsum("sij,sfj->sfi", jac, c.frames)
    return moved.with_frames(frames)


def push_motion(phi: Motion, zeta: RelativeMotion) -> Motion:
    """``(zeta^ phi)_{tau,t} = zeta_tau o phi_{tau,t} o zeta_t^{-1}``."""

    def disp(y: np.ndarray, t: float, tau: float) -> np.ndarray:
        return zeta.forward(phi(zeta.inverse(y, t), t, tau), tau)

    def tangent(y: np.ndarray, t: float, tau: float) -> np.ndarray:
        x = zeta.inverse(y, t)
        moved = phi(x, t, tau)
        return zeta.jacobian(moved, tau) @ phi.jacobian(x, t, tau) @ np.linalg.inv(zeta.jacobian(x, t))

    v_phi = phi.velocity_field()
    pushed = push_vector_field(v_phi, zeta)
    velocity = zeta.velocity + pushed
    return Motion(phi.dim, disp, tangent, velocity, f"pushed {phi.label}")


def compose(first: Motion, second: Motion) -> Callable[[np.ndarray, float, float], tuple[np.ndarray, np.ndarray]]:
    """Point map and tangent of ``second o first`` at fixed times (used for functoriality checks)."""

    def run(p: np.ndarray, t: float, tau: float) -> tuple[np.ndarray, np.ndarray]:
        mid = first(p, t, tau)
        return second(mid, t, tau), second.jacobian(mid, t, tau) @ first.jacobian(p, t, tau)

    return run


# ---------------------------------------------------------------------------
# transport identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReynoldsRate:
    direct: float
    convective: float

    @property
    def discrepancy(self) -> float:
        return abs(self.direct - self.convective)


def advect_chain(c: Chain, m: Motion, t: float, tau: float) -> Chain:
    """Piecewise-linear image of ``c`` under ``phi_{tau,t}`` (vertices mapped)."""
    return c.mapped(lambda p: m(p, t, tau))


def advected_integral(f: FormField, m: Motion, c: Chain, t: float, tau: float, depth: int,
                      mu: VolumeForm | None = None) -> float:
    fine = refine(c, depth)
    return integrate(f, advect_chain(fine, m, t, tau), 0, tau, mu)


def direct_rate(f: FormField, m: Motion, c: Chain, t: float, depth: int, h_t: float = DEFAULT_TIME_STEP,
                mu: VolumeForm | None = None) -> float:
    """Central difference in ``tau`` of the integral over the advected chain."""
    fine = refine(c, depth)
    plus = integrate(f, advect_chain(fine, m, t, t + h_t), 0, t + h_t, mu)
    minus = integrate(f, advect_chain(fine, m, t, t - h_t), 0, t - h_t, mu)
    return (plus - minus) / (2.0 * h_t)


def reynolds_rate(f: FormField, m: Motion, c: Chain, t: float = 0.0, depth: int = 4,
                  h_t: float = DEFAULT_TIME_STEP, mu: VolumeForm | None = None) -> ReynoldsRate:
    direct = direct_rate(f, m, c, t, depth, h_t, mu)
    via = integrate(convective_derivative(f, m, h_t), c, depth, t, mu)
    return ReynoldsRate(direct, via)


def extrusion_rate(f: FormField, m: Motion, c: Chain, t: float = 0.0, depth: int = 4,
                   mu: VolumeForm | None = None) -> float:
    """``int_c (df).v + int_{dc} f.v`` for a time-independent form."""
    v = m.velocity_field()
    total = integrate(contract_field(exterior_derivative(f), v), c, depth, t, mu)
    if f.degree >= 1:
        total += integrate(contract_field(f, v), boundary(c), depth, t, mu)
    return total


def extrusion_residual(f: FormField, m: Motion, c: Chain, t: float = 0.0, depth: int = 4,
                       h_t: float = DEFAULT_TIME_STEP, mu: VolumeForm | None = None) -> float:
    return abs(direct_rate(f, m, c, t, depth, h_t, mu) - extrusion_rate(f, m, c, t, depth, mu))


def helmholtz_rhs(u: VectorField, m: Motion, mu: VolumeForm | None = None,
                  h_t: float = DEFAULT_TIME_STEP) -> FormField:
    """The flux density ``mu.(du/dt + rot(u x v) + (div u) v)`` as an even 2-form."""
    if u.dim != 3:
        raise ArgumentError("Helmholtz formula needs n = 3")
    mu = VolumeForm(3) if mu is None else mu
    v = m.velocity_field()
    total = time_derivative_vector(u, h_t) + curl(cross_field(u, v), mu=mu) + scale_vector_field(div(u, mu), v)
    return mu_contract_field(mu, total, "even")


def helmholtz_residual(u: VectorField, m: Motion, c: Chain, t: float = 0.0, depth: int = 4,
                       h_t: float = DEFAULT_TIME_STEP, mu: VolumeForm | None = None) -> float:
    mu = VolumeForm(3) if mu is None else mu
    flux = mu_contract_field(mu, u, "even")
    direct = direct_rate(flux, m, c.without_frames(), t, depth, h_t)
    rhs = integrate(helmholtz_rhs(u, m, mu, h_t), c.without_frames(), depth, t)
    return abs(direct - rhs)


# ---------------------------------------------------------------------------
# relative-motion identities
# ---------------------------------------------------------------------------


def _max_diff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b), initial=0.0))


def covariance_residual(f: FormField, phi: Motion, zeta: RelativeMotion, t: float = 0.0,
                        points: np.ndarray | None = None, h_t: float = DEFAULT_TIME_STEP) -> float:
    """Push-then-differentiate versus differentiate-then-push."""
    pts = default_points(f.dim) if points is None else points
    lhs = convective_derivative(push_field(f, zeta), push_motion(phi, zeta), h_t)(pts, t)
    rhs = push_field(convective_derivative(f, phi, h_t), zeta)(pts, t)
    return _max_diff(lhs, rhs)


def invariance_residual(f: FormField, phi: Motion, zeta: RelativeMotion, t: float = 0.0,
                        points: np.ndarray | None = None, h_t: float = DEFAULT_TIME_STEP) -> float:
    """For a field with ``zeta^ f = f``: its convective derivative is invariant too.

    Returns the larger of the field-invariance defect and the derivative defect.
    """
    pts = default_points(f.dim) if points is None else points
    defect = _max_diff(push_field(f, zeta)(pts, t), f(pts, t))
    lhs = convective_derivative(f, push_motion(phi, zeta), h_t)(pts, t)
    rhs = push_field(convective_derivative(f, phi, h_t), zeta)(pts, t)
    return max(defect, _max_diff(lhs, rhs))


def boost_partial_derivative_relation(f: FormField, zeta: RelativeMotion, t: float = 0.0,
                                      points: np.ndarray | None = None,
                                      h_t: float = DEFAULT_TIME_STEP) -> float:
    """Residual of ``d_t(zeta^ f) = zeta^(d_t f) - L_{v_zeta}(zeta^ f)``."""
    pts = default_points(f.dim) if points is None else points
    pushed = push_field(f, zeta)
    lhs = time_derivative(pushed, h_t)(pts, t)
    rhs = push_field(time_derivative(f, h_t), zeta)(pts, t) - lie_derivative_spatial(pushed, zeta.velocity)(pts, t)
    return _max_diff(lhs, rhs)


def volume_pullback_residual(zeta: RelativeMotion, t: float, tau: float, points: np.ndarray | None = None) -> float:
    """``|zeta_{tau,t}^* mu - mu|``; exactly zero for Galilei boosts."""
    pts = default_points(zeta.dim) if points is None else points
    mu = VolumeForm(zeta.dim).as_covector()
    jac = zeta.as_motion().jacobian(pts, t, tau)
    pulled = pullback_coeffs(np.broadcast_to(mu.coeffs, (pts.shape[0], 1)), jac, zeta.dim)
    return _max_diff(pulled, np.broadcast_to(mu.coeffs, pulled.shape))
