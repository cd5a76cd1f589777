"""Classical (Galilean) space-time R^4 = R^3 x time, with observers.

Events are ``(x, y, z, t)`` with time as the fourth coordinate. An observer
with boost ``w`` labels the event ``(x + t w, t)`` by chart coordinates
``(x, t)``. Four-dimensional forms are :class:`FormField` objects of
dimension 4 whose sampler takes events (their own time argument is unused).

Splitting a form ``W`` along an observer and a body velocity ``v`` gives the
spatial pair ``(W restricted to the slice, (W . u) restricted to the slice)``
with ``u = (v + w, 1)``; assembly is the inverse. No metric on R^4 is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ParityError
from .exterior_algebra import (
    KCovector,
    Parity,
    apply_coeffs,
    index_of,
    multi_indices,
    pullback_coeffs,
    wedge_coeffs,
)
from .form_fields import (
    FormField,
    VectorField,
    add,
    as_points,
    constant_form,
    contract_field,
    exterior_derivative,
    polynomial_form,
    polynomial_vector_field,
    scale,
    unit_cube_lattice,
    wedge_fields,
    zero_form,
)
from .polynomials import Polynomial

ROLES = {
    "faraday": (2, Parity.EVEN),
    "ampere": (2, Parity.ODD),
    "four_current": (3, Parity.ODD),
    "magnetic_current": (3, Parity.EVEN),
    "potential": (1, Parity.EVEN),
}


@dataclass(frozen=True)
class Observer:
    """Observer moving with constant velocity ``boost`` relative to the canonical one."""

    boost: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __init__(self, boost: Sequence[float] = (0.0, 0.0, 0.0)):
        w = tuple(float(c) for c in boost)
        if len(w) != 3:
            raise ArgumentError("observer boost must be a 3-vector")
        object.__setattr__(self, "boost", w)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.boost)

    def embed(self, points: np.ndarray, t: float) -> np.ndarray:
        """Events seen at chart position ``points`` and time ``t``."""
        pts = as_points(points, 3)
        return np.hstack([pts + t * self.w, np.full((pts.shape[0], 1), float(t))])

    def chart(self, events: np.ndarray) -> np.ndarray:
        ev = as_points(events, 4)
        return np.hstack([ev[:, :3] - ev[:, 3:] * self.w, ev[:, 3:]])

    def jacobian(self) -> np.ndarray:
        """Tangent of the chart-to-event map ``(x, t) -> (x + t w, t)``."""
        a = np.eye(4)
        a[:3, 3] = self.w
        return a

    def inverse_jacobian(self) -> np.ndarray:
        a = np.eye(4)
        a[:3, 3] = -self.w
        return a

    @property
    def time_axis(self) -> np.ndarray:
        """The observer's world-line direction as an event vector."""
        return np.append(self.w, 1.0)


@dataclass(frozen=True, eq=False)
class SpacetimeForm:
    """A form on R^4 tagged with its physical role (``generic`` for untagged)."""

    field: FormField
    role: str = "generic"

    def __post_init__(self) -> None:
        if self.field.dim != 4:
            raise ArgumentError("space-time forms live on R^4")
        if self.role == "generic":
            return
        if self.role not in ROLES:
            raise ArgumentError(f"unknown role {self.role!r}")
        degree, parity = ROLES[self.role]
        if self.field.degree != degree:
            raise ArgumentError(f"{self.role} form must have degree {degree}")
        if self.field.parity is not parity:
            raise ParityError(f"{self.role} form must be {parity.value}")

    @property
    def degree(self) -> int:
        return self.field.degree

    @property
    def parity(self) -> Parity:
        return self.field.parity

    def __call__(self, events: np.ndarray) -> np.ndarray:
        return self.field(events, 0.0)


def _as_field(w: SpacetimeForm | FormField) -> FormField:
    return w.field if isinstance(w, SpacetimeForm) else w


# ---------------------------------------------------------------------------
# chart changes, lifting and restriction
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _pullback_matrix(key: tuple[float, ...], k: int) -> np.ndarray:
    a = np.asarray(key).reshape(4, 4)
    size = comb(4, k)
    return pullback_coeffs(np.eye(size), np.broadcast_to(a, (size, 4, 4)), k).T


def _pullback_linear(f: FormField, a: np.ndarray) -> FormField:
    """Pull a 4D form back through the linear map ``p -> a p``."""
    k = f.degree
    if f.poly is not None:
        nv = 5
        xs = [Polynomial.variable(nv, j) for j in range(4)]
        reps = [sum((a[i, j] * xs[j] for j in range(4) if a[i, j]), Polynomial.zero(nv)) for i in range(4)]
        reps.append(Polynomial.variable(nv, 4))
        moved = [p.substitute(reps) for p in f.poly]
        mat = _pullback_matrix(tuple(a.ravel()), k)
        out = []
        for row in mat:
            acc = Polynomial.zero(nv)
            for c, p in zip(row, moved):
                if c:
                    acc = acc + c * p
            out.append(acc)
        return polynomial_form(4, k, out, f.parity)

    def sample(p: np.ndarray, s: float) -> np.ndarray:
        return pullback_coeffs(f(p @ a.T, s), np.broadcast_to(a, (p.shape[0], 4, 4)), k)

    return FormField(4, k, f.parity, sample, fd_step=f.fd_step)


def to_chart(w: SpacetimeForm | FormField, obs: Observer) -> FormField:
    """Pull-back of a 4D form to the observer's chart coordinates ``(x, t)``."""
    return _pullback_linear(_as_field(w), obs.jacobian())


def from_chart(c: FormField, obs: Observer) -> FormField:
    return _pullback_linear(c, obs.inverse_jacobian())


def _spatial_slots(k: int) -> list[tuple[int, int]]:
    """(4D index, 3D index) pairs for multi-indices avoiding the time axis."""
    idx4 = index_of(4, k)
    return [(idx4[mi], j) for j, mi in enumerate(multi_indices(3, k))]


def restrict(c: FormField) -> FormField:
    """Spatial part of a chart-level 4D form as a time-dependent 3D form."""
    k = c.degree
    if k > 3:
        return zero_form(3, 3, c.parity)
    slots = _spatial_slots(k)
    if c.poly is not None:
        reps = [Polynomial.variable(4, i) for i in range(4)] + [Polynomial.zero(4)]
        return polynomial_form(3, k, [c.poly[i4].substitute(reps) for i4, _ in slots], c.parity)
    cols = [i4 for i4, _ in slots]

    def sample(p: np.ndarray, t: float) -> np.ndarray:
        chart = np.hstack([p, np.full((p.shape[0], 1), float(t))])
        return c(chart, 0.0)[:, cols]

    return FormField(3, k, c.parity, sample, fd_step=c.fd_step)


def lift(f: FormField) -> FormField:
    """A time-dependent 3D form as a chart-level 4D form with no ``dt`` part."""
    if f.dim != 3:
        raise ArgumentError("lift expects a form on R^3")
    k = f.degree
    slots = _spatial_slots(k)
    if f.poly is not None:
        out = [Polynomial.zero(5) for _ in range(comb(4, k))]
        for i4, j in slots:
            out[i4] = f.poly[j].extend(5)
        return polynomial_form(4, k, out, f.parity)

    def sample(p: np.ndarray, s: float) -> np.ndarray:
        res = np.zeros((p.shape[0], comb(4, k)))
        vals = _sample_slices(f, p)
        for i4, j in slots:
            res[:, i4] = vals[:, j]
        return res

    return FormField(4, k, f.parity, sample, fd_step=f.fd_step)


def _sample_slices(f: FormField, chart: np.ndarray) -> np.ndarray:
    """Sample a 3D field at chart points whose times may differ."""
    times = chart[:, 3]
    out = np.empty((chart.shape[0], f.ncoeffs))
    for t in np.unique(times):
        sel = times == t
        out[sel] = f(chart[sel, :3], float(t))
    return out


def _time_covector() -> FormField:
    return constant_form(KCovector(4, 1, [0.0, 0.0, 0.0, 1.0]))


def chart_velocity(v: VectorField | None) -> VectorField:
    """The chart four-velocity ``(v, 1)``; ``v = None`` means a body at rest."""
    if v is None:
        return polynomial_vector_field(4, [0.0, 0.0, 0.0, 1.0])
    if v.dim != 3:
        raise ArgumentError("body velocity must be a 3D vector field")
    if v.poly is not None:
        return polynomial_vector_field(4, [p.extend(5) for p in v.poly] + [1.0], v.parity)

    def sample(p: np.ndarray, s: float) -> np.ndarray:
        vel = np.empty((p.shape[0], 3))
        times = p[:, 3]
        for t in np.unique(times):
            sel = times == t
            vel[sel] = v(p[sel, :3], float(t))
        return np.hstack([vel, np.ones((p.shape[0], 1))])

    return VectorField(4, v.parity, sample)


# ---------------------------------------------------------------------------
# split and assembly
# ---------------------------------------------------------------------------


def split(
    w: SpacetimeForm | FormField, obs: Observer | None = None, body_velocity: VectorField | None = None
) -> tuple[FormField, FormField]:
    """``(slice restriction of w, slice restriction of w . u)`` as time-dependent 3D forms."""
    obs = Observer() if obs is None else obs
    f = _as_field(w)
    if f.degree < 1:
        raise ArgumentError("split needs a form of degree >= 1")
    c = to_chart(f, obs)
    return restrict(c), restrict(contract_field(c, chart_velocity(body_velocity)))


def _check3(f: FormField, degree: int, parity: Parity, name: str) -> None:
    if f.dim != 3 or f.degree != degree:
        raise ArgumentError(f"{name} must be a {degree}-form on R^3")
    if f.parity is not parity:
        raise ParityError(f"{name} must be {parity.value}")


def _assemble(space: FormField, time: FormField, obs: Observer | None, sign: float, role: str) -> SpacetimeForm:
    obs = Observer() if obs is None else obs
    chart = add(lift(space), scale(wedge_fields(_time_covector(), lift(time)), sign).with_parity(space.parity))
    return SpacetimeForm(from_chart(chart, obs), role)


def assemble_faraday(B: FormField, E: FormField, obs: Observer | None = None,
                     body_velocity: VectorField | None = None) -> SpacetimeForm:
    """Even 2-form ``B - dt ^ E_obs`` with ``E_obs = E + B.v`` in the observer chart."""
    _check3(B, 2, Parity.EVEN, "B")
    _check3(E, 1, Parity.EVEN, "E")
    e_obs = E if body_velocity is None else add(E, contract_field(B, body_velocity))
    return _assemble(B, e_obs, obs, -1.0, "faraday")


def assemble_ampere(D: FormField, H: FormField, obs: Observer | None = None,
                    body_velocity: VectorField | None = None) -> SpacetimeForm:
    """Odd 2-form ``D + dt ^ H_obs`` with ``H_obs = H - D.v``."""
    _check3(D, 2, Parity.ODD, "D")
    _check3(H, 1, Parity.ODD, "H")
    h_obs = H if body_velocity is None else add(H, -contract_field(D, body_velocity))
    return _assemble(D, h_obs, obs, 1.0, "ampere")


def assemble_four_current(rho: FormField, J: FormField, obs: Observer | None = None,
                          body_velocity: VectorField | None = None) -> SpacetimeForm:
    """Odd 3-form ``rho - dt ^ (J + rho.v)``."""
    _check3(rho, 3, Parity.ODD, "rho")
    _check3(J, 2, Parity.ODD, "J")
    j_obs = J if body_velocity is None else add(J, contract_field(rho, body_velocity))
    return _assemble(rho, j_obs, obs, -1.0, "four_current")


def assemble_potential(F: FormField, V: FormField, obs: Observer | None = None,
                       body_velocity: VectorField | None = None) -> SpacetimeForm:
    """Even 1-form ``F + (V - F.v) dt`` whose split returns ``(F, V)``."""
    _check3(F, 1, Parity.EVEN, "F")
    _check3(V, 0, Parity.EVEN, "V")
    phi = V if body_velocity is None else add(V, -contract_field(F, body_velocity))
    return _assemble(F, phi, obs, 1.0, "potential")


def em_potential_split(w1: SpacetimeForm | FormField, obs: Observer | None = None,
                       body_velocity: VectorField | None = None) -> tuple[FormField, FormField]:
    """(spatial Faraday potential, scalar potential) of a 4D even 1-form."""
    f = _as_field(w1)
    if f.degree != 1:
        raise ArgumentError("electromagnetic potential is a 1-form")
    return split(f, obs, body_velocity)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def _max_abs(f: FormField, points: np.ndarray, t: float) -> float:
    return float(np.max(np.abs(f(points, t)), initial=0.0))


def _points(points: np.ndarray | None) -> np.ndarray:
    return unit_cube_lattice(3, 3) if points is None else points


def faraday_4d_residuals(wF: SpacetimeForm | FormField, obs: Observer | None = None,
                         body_velocity: VectorField | None = None, t: float = 0.0,
                         points: np.ndarray | None = None) -> tuple[float, float]:
    """(slice part of dW, slice part of dW . u): the magnetic Gauss and Faraday residuals."""
    pts = _points(points)
    spatial, along = split(exterior_derivative(_as_field(wF)), obs, body_velocity)
    return _max_abs(spatial, pts, t), _max_abs(along, pts, t)


def ampere_4d_residuals(wA: SpacetimeForm | FormField, wJ: SpacetimeForm | FormField,
                        obs: Observer | None = None, body_velocity: VectorField | None = None,
                        t: float = 0.0, points: np.ndarray | None = None) -> tuple[float, float, float]:
    """(electric Gauss, Ampere, charge conservation) residuals from ``dW_A - W_J`` and ``dW_J``."""
    pts = _points(points)
    a, j = _as_field(wA), _as_field(wJ)
    if a.degree != 2 or j.degree != 3:
        raise ArgumentError("expected a 2-form and a 3-form")
    gauss, ampere = split(add(exterior_derivative(a), -j), obs, body_velocity)
    _, charge = split(exterior_derivative(j), obs, body_velocity)
    return _max_abs(gauss, pts, t), _max_abs(ampere, pts, t), _max_abs(charge, pts, t)


def observer_equivalence_residual(w: SpacetimeForm | FormField, boost: Sequence[float], t: float = 0.0,
                                  points: np.ndarray | None = None) -> float:
    """Max difference of the slice restrictions seen by two observers at the same events.

    The boosted observer's chart point ``x`` is the canonical chart point ``x + t w``.
    """
    pts = _points(points)
    f = _as_field(w)
    moving, rest = Observer(boost), Observer()
    a = restrict(to_chart(f, moving))(pts, t)
    b = restrict(to_chart(f, rest))(pts + t * moving.w, t)
    return float(np.max(np.abs(a - b), initial=0.0))


def split_reassembly_residual(w: SpacetimeForm | FormField, obs: Observer | None = None,
                              rng: np.random.Generator | None = None, count: int = 100,
                              spread: float = 1.0) -> float:
    """Pulled-back form versus ``spatial + dt ^ (w . u)`` on random events and arguments.

    Arguments are chart vectors ``(dx_i, dt_i)``; ``u`` is the observer's own
    time axis (a body at rest in the chart).
    """
    obs = Observer() if obs is None else obs
    rng = np.random.default_rng(0) if rng is None else rng
    f = _as_field(w)
    k = f.degree
    chart_pts = rng.uniform(-spread, spread, (count, 4))
    args = rng.normal(size=(count, k, 4))
    pulled = to_chart(f, obs)(chart_pts, 0.0)
    lhs = apply_coeffs(pulled, args, 4, k)
    spatial, along = split(f, obs)
    s_vals = _sample_slices(spatial, chart_pts)
    a_vals = _sample_slices(along, chart_pts)
    rhs_coeffs = np.zeros((count, comb(4, k)))
    for i4, j in _spatial_slots(k):
        rhs_coeffs[:, i4] = s_vals[:, j]
    along4 = np.zeros((count, comb(4, k - 1)))
    for i4, j in _spatial_slots(k - 1):
        along4[:, i4] = a_vals[:, j]
    dt = np.array([0.0, 0.0, 0.0, 1.0])
    rhs_coeffs += wedge_coeffs(np.broadcast_to(dt, (count, 4)), along4, 4, 1, k - 1)
    rhs = apply_coeffs(rhs_coeffs, args, 4, k)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))
