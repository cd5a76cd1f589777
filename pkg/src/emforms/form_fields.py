"""Time-dependent fields of covectors and vectors on flat R^n.

A field is a vectorised sampler ``(points (N, n), t) -> coefficients (N, C)``.
Fields built from :class:`~emforms.polynomials.Polynomial` coefficients carry
them along (``poly``); every operation here propagates the polynomial
representation when all inputs have one, which gives exact ("analytic")
derivatives. Otherwise derivatives use central differences with step
``fd_step`` on the coefficient functions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import comb
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, ParityError, UnsupportedDimensionError
from .exterior_algebra import (
    KCovector,
    Metric,
    Parity,
    VolumeForm,
    as_parity,
    contract_coeffs,
    contract_table,
    derivative_table,
    two_form_coeffs_to_vectors,
    wedge_coeffs,
    wedge_table,
)
from .polynomials import Polynomial

Sampler = Callable[[np.ndarray, float], np.ndarray]

DEFAULT_FD_STEP = 1e-5
DEFAULT_TIME_STEP = 1e-4


def as_points(points: np.ndarray | Sequence[float], dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ArgumentError(f"points must have shape (N, {dim}), got {pts.shape}")
    return pts


def _with_time(points: np.ndarray, t: float) -> np.ndarray:
    return np.hstack([points, np.full((points.shape[0], 1), float(t))])


def _poly_sampler(polys: tuple[Polynomial, ...]) -> Sampler:
    def sample(points: np.ndarray, t: float) -> np.ndarray:
        xt = _with_time(points, t)
        return np.stack([p(xt) for p in polys], axis=-1)

    return sample


# ---------------------------------------------------------------------------
# field types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormField:
    """Field of k-covectors. ``d_sampler`` (optional) samples the exterior derivative."""

    dim: int
    degree: int
    parity: Parity
    sampler: Sampler
    d_sampler: Sampler | None = None
    fd_step: float = DEFAULT_FD_STEP
    poly: tuple[Polynomial, ...] | None = None
    top_marker: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "parity", as_parity(self.parity))
        if not 0 <= self.degree <= self.dim:
            raise ArgumentError(f"degree {self.degree} outside 0..{self.dim}")
        if self.poly is not None and len(self.poly) != self.ncoeffs:
            raise ArgumentError("polynomial coefficient count does not match degree")

    @property
    def ncoeffs(self) -> int:
        return comb(self.dim, self.degree)

    @property
    def derivative_mode(self) -> str:
        return "analytic" if (self.poly is not None or self.d_sampler is not None) else "finite_difference"

    def __call__(self, points: np.ndarray | Sequence[float], t: float = 0.0) -> np.ndarray:
        pts = as_points(points, self.dim)
        out = np.asarray(self.sampler(pts, float(t)), dtype=float)
        if out.ndim == 1 and self.ncoeffs == 1:
            out = out[:, None]
        try:
            return np.broadcast_to(out, (pts.shape[0], self.ncoeffs)).copy()
        except ValueError:
            raise ArgumentError(
                f"sampler returned shape {out.shape}, expected ({pts.shape[0]}, {self.ncoeffs})"
            ) from None

    def at(self, x: Sequence[float], t: float = 0.0) -> KCovector:
        return KCovector(self.dim, self.degree, self(np.asarray(x, dtype=float)[None, :], t)[0], self.parity)

    def with_parity(self, parity: Parity | str) -> "FormField":
        return replace(self, parity=as_parity(parity))

    def numeric(self) -> "FormField":
        """Drop the exact representation so derivatives fall back to finite differences."""
        return FormField(self.dim, self.degree, self.parity, self.sampler, None, self.fd_step, None, self.top_marker, self.label)

    def __add__(self, other: "FormField") -> "FormField":
        return add(self, other)

    def __sub__(self, other: "FormField") -> "FormField":
        return add(self, scale(other, -1.0))

    def __neg__(self) -> "FormField":
        return scale(self, -1.0)

    def __mul__(self, s: float) -> "FormField":
        return scale(self, s)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    dim: int
    parity: Parity
    sampler: Sampler
    poly: tuple[Polynomial, ...] | None = None
    fd_step: float = DEFAULT_FD_STEP
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "parity", as_parity(self.parity))
        if self.poly is not None and len(self.poly) != self.dim:
            raise ArgumentError("vector polynomial count must equal dim")

    def __call__(self, points: np.ndarray | Sequence[float], t: float = 0.0) -> np.ndarray:
        pts = as_points(points, self.dim)
        out = np.asarray(self.sampler(pts, float(t)), dtype=float)
        return np.broadcast_to(out, pts.shape).copy()

    def numeric(self) -> "VectorField":
        return VectorField(self.dim, self.parity, self.sampler, None, self.fd_step, self.label)

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.dim != self.dim:
            raise ArgumentError("vector fields differ in dimension")
        if self.poly is not None and other.poly is not None:
            return polynomial_vector_field(
                self.dim, [a + b for a, b in zip(self.poly, other.poly)], self.parity
            )
        a, b = self, other
        return VectorField(self.dim, self.parity, lambda p, t: a(p, t) + b(p, t))

    def __mul__(self, s: float) -> "VectorField":
        s = float(s)
        if self.poly is not None:
            return polynomial_vector_field(self.dim, [s * p for p in self.poly], self.parity)
        base = self
        return VectorField(self.dim, self.parity, lambda p, t: s * base(p, t))

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return self * -1.0


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def polynomial_form(
    dim: int,
    degree: int,
    coeffs: Sequence[Polynomial | float],
    parity: Parity | str = Parity.EVEN,
    label: str = "",
) -> FormField:
    """Form whose coefficients are polynomials in (x_1..x_n, t)."""
    polys = tuple(
        p if isinstance(p, Polynomial) else Polynomial.constant(dim + 1, float(p)) for p in coeffs
    )
    for p in polys:
        if p.nvars != dim + 1:
            raise ArgumentError(f"coefficient polynomials must use {dim + 1} variables (space + time)")
    return FormField(dim, degree, parity, _poly_sampler(polys), poly=polys, label=label)


def polynomial_vector_field(
    dim: int, comps: Sequence[Polynomial | float], parity: Parity | str = Parity.EVEN, label: str = ""
) -> VectorField:
    polys = tuple(
        p if isinstance(p, Polynomial) else Polynomial.constant(dim + 1, float(p)) for p in comps
    )
    return VectorField(dim, parity, _poly_sampler(polys), poly=polys, label=label)


def constant_form(w: KCovector) -> FormField:
    return polynomial_form(w.dim, w.degree, list(w.coeffs), w.parity)


def zero_form(dim: int, degree: int, parity: Parity | str = Parity.EVEN) -> FormField:
    return polynomial_form(dim, degree, [0.0] * comb(dim, degree), parity)


def constant_vector_field(v: Sequence[float], parity: Parity | str = Parity.EVEN) -> VectorField:
    v = np.asarray(v, dtype=float)
    return polynomial_vector_field(v.shape[0], list(v), parity)


def linear_vector_field(matrix: np.ndarray, offset: Sequence[float] | None = None) -> VectorField:
    """``v(x) = A x + b`` as an exact polynomial field."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    b = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    xs = [Polynomial.variable(n + 1, i) for i in range(n)]
    comps = []
    for i in range(n):
        p = Polynomial.constant(n + 1, b[i])
        for j in range(n):
            if a[i, j]:
                p = p + a[i, j] * xs[j]
        comps.append(p)
    return polynomial_vector_field(n, comps)


def sampled_form(
    dim: int, degree: int, sampler: Sampler, parity: Parity | str = Parity.EVEN, fd_step: float = DEFAULT_FD_STEP
) -> FormField:
    return FormField(dim, degree, parity, sampler, fd_step=fd_step)


def position_field(dim: int) -> VectorField:
    """The position field r(x) = x."""
    return linear_vector_field(np.eye(dim))


# ---------------------------------------------------------------------------
# pointwise algebra
# ---------------------------------------------------------------------------


def _require_same_shape(a: FormField, b: FormField) -> None:
    if a.dim != b.dim or a.degree != b.degree:
        raise ArgumentError("fields differ in dimension or degree")
    if a.parity is not b.parity:
        raise ParityError(f"cannot add {a.parity.value} and {b.parity.value} forms")


def add(a: FormField, b: FormField) -> FormField:
    _require_same_shape(a, b)
    if a.poly is not None and b.poly is not None:
        return polynomial_form(a.dim, a.degree, [p + q for p, q in zip(a.poly, b.poly)], a.parity)
    return FormField(a.dim, a.degree, a.parity, lambda p, t: a(p, t) + b(p, t), fd_step=a.fd_step)


def scale(a: FormField, s: float) -> FormField:
    s = float(s)
    if a.poly is not None:
        return polynomial_form(a.dim, a.degree, [s * p for p in a.poly], a.parity)
    return FormField(a.dim, a.degree, a.parity, lambda p, t: s * a(p, t), fd_step=a.fd_step)


def multiply(f0: FormField, a: FormField) -> FormField:
    """Product of a scalar field with a form."""
    if f0.degree != 0:
        raise ArgumentError("multiply expects a 0-form as first argument")
    return wedge_fields(f0, a)


def wedge_fields(a: FormField, b: FormField) -> FormField:
    if a.dim != b.dim:
        raise ArgumentError("fields differ in dimension")
    n, ka, kb = a.dim, a.degree, b.degree
    if ka + kb > n:
        raise ArgumentError(f"wedge degree {ka + kb} exceeds dimension {n}")
    parity = a.parity ^ b.parity
    if a.poly is not None and b.poly is not None:
        out = [Polynomial.zero(n + 1) for _ in range(comb(n, ka + kb))]
        for o, ia, ib, s in wedge_table(n, ka, kb):
            out[o] = out[o] + s * (a.poly[ia] * b.poly[ib])
        return polynomial_form(n, ka + kb, out, parity)
    return FormField(n, ka + kb, parity, lambda p, t: wedge_coeffs(a(p, t), b(p, t), n, ka, kb), fd_step=a.fd_step)


def contract_field(f: FormField, v: VectorField) -> FormField:
    """Pointwise insertion of ``v`` as first argument; parity follows ``f``."""
    if f.dim != v.dim:
        raise ArgumentError("form and vector field differ in dimension")
    if f.top_marker:
        return zero_form(f.dim, f.dim, f.parity)
    if f.degree < 1:
        raise ArgumentError("cannot contract a 0-form")
    n, k = f.dim, f.degree
    if f.poly is not None and v.poly is not None:
        out = [Polynomial.zero(n + 1) for _ in range(comb(n, k - 1))]
        for o, i, src, s in contract_table(n, k):
            out[o] = out[o] + s * (v.poly[i] * f.poly[src])
        return polynomial_form(n, k - 1, out, f.parity)
    return FormField(n, k - 1, f.parity, lambda p, t: contract_coeffs(f(p, t), v(p, t), n, k), fd_step=f.fd_step)


def flat_field(g: Metric, v: VectorField, parity: Parity | str | None = None) -> FormField:
    parity = v.parity if parity is None else parity
    if v.poly is not None:
        return polynomial_form(v.dim, 1, list(v.poly), parity)
    return FormField(v.dim, 1, parity, lambda p, t: v(p, t) @ g.matrix.T, fd_step=v.fd_step)


def mu_contract_field(mu: VolumeForm, v: VectorField, parity: Parity | str | None = None) -> FormField:
    """The (n-1)-form mu.v; the caller chooses the parity (defaults to the flipped parity of v)."""
    parity = v.parity.flipped() if parity is None else parity
    n = v.dim
    if n != mu.dim:
        raise ArgumentError("volume form and vector field differ in dimension")
    mu_field = constant_form(mu.as_covector())
    return contract_field(mu_field, v).with_parity(parity)


def density_form(mu: VolumeForm, f0: FormField, parity: Parity | str = Parity.ODD) -> FormField:
    """The top form f0 * mu."""
    if f0.degree != 0:
        raise ArgumentError("density_form expects a scalar field")
    return wedge_fields(f0, constant_form(mu.as_covector())).with_parity(parity)


def two_form_field_to_vector(w: FormField, mu: VolumeForm, parity: Parity | str | None = None) -> VectorField:
    if w.dim != 3:
        raise UnsupportedDimensionError("two-form/vector correspondence needs n = 3")
    if w.degree != 2:
        raise ArgumentError("expected a 2-form field")
    parity = w.parity.flipped() if parity is None else parity
    sign = mu.sign
    if w.poly is not None:
        c = w.poly
        comps = [c[2] * (1.0 / sign), c[1] * (-1.0 / sign), c[0] * (1.0 / sign)]
        return polynomial_vector_field(3, comps, parity)
    return VectorField(3, parity, lambda p, t: two_form_coeffs_to_vectors(w(p, t), sign))


def one_form_field_to_vector(w: FormField, g: Metric, parity: Parity | str | None = None) -> VectorField:
    if w.degree != 1:
        raise ArgumentError("expected a 1-form field")
    parity = w.parity if parity is None else parity
    if w.poly is not None:
        return polynomial_vector_field(w.dim, list(w.poly), parity)
    inv = np.linalg.inv(g.matrix)
    return VectorField(w.dim, parity, lambda p, t: w(p, t) @ inv.T)


def top_form_to_scalar(w: FormField, mu: VolumeForm, parity: Parity | str | None = None) -> FormField:
    """Scalar s with w = s * mu."""
    if w.degree != w.dim:
        raise ArgumentError("expected a top-degree form")
    parity = w.parity if parity is None else parity
    return scale(FormField(w.dim, 0, parity, w.sampler, None, w.fd_step, w.poly), 1.0 / mu.sign)


def cross_field(u: VectorField, v: VectorField) -> VectorField:
    if u.dim != 3 or v.dim != 3:
        raise UnsupportedDimensionError("cross product needs n = 3")
    parity = u.parity ^ v.parity
    parity = parity.flipped()
    if u.poly is not None and v.poly is not None:
        a, b = u.poly, v.poly
        comps = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
        return polynomial_vector_field(3, comps, parity)
    return VectorField(3, parity, lambda p, t: np.cross(u(p, t), v(p, t)))


def inner_field(g: Metric, u: VectorField, v: VectorField) -> FormField:
    parity = u.parity ^ v.parity
    if u.poly is not None and v.poly is not None:
        total = Polynomial.zero(u.dim + 1)
        for a, b in zip(u.poly, v.poly):
            total = total + a * b
        return polynomial_form(u.dim, 0, [total], parity)
    return FormField(u.dim, 0, parity, lambda p, t: np.einsum("ni,ni->n", u(p, t), v(p, t))[:, None])


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


def fd_partials(f: FormField, points: np.ndarray, t: float) -> np.ndarray:
    """Central-difference partials of coefficients: shape (N, n, C)."""
    h = f.fd_step
    n = f.dim
    pts = as_points(points, n)
    out = np.empty((pts.shape[0], n, f.ncoeffs))
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        out[:, j, :] = (f(pts + step, t) - f(pts - step, t)) / (2.0 * h)
    return out


def exterior_derivative(f: FormField) -> FormField:
    n, k = f.dim, f.degree
    if f.top_marker or k == n:
        # d of a top form vanishes identically; keep the degree as a marker
        return FormField(n, n, f.parity, lambda p, t: np.zeros((p.shape[0], 1)), top_marker=True,
                         poly=tuple([Polynomial.zero(n + 1)]), label="top-degree zero")
    table = derivative_table(n, k)
    if f.poly is not None:
        out = [Polynomial.zero(n + 1) for _ in range(comb(n, k + 1))]
        for o, j, src, s in table:
            out[o] = out[o] + s * f.poly[src].diff(j)
        return polynomial_form(n, k + 1, out, f.parity)
    if f.d_sampler is not None:
        return FormField(n, k + 1, f.parity, f.d_sampler, fd_step=f.fd_step)

    def sample(points: np.ndarray, t: float) -> np.ndarray:
        partials = fd_partials(f, points, t)
        res = np.zeros((points.shape[0], comb(n, k + 1)))
        for o, j, src, s in table:
            res[:, o] += s * partials[:, j, src]
        return res

    return FormField(n, k + 1, f.parity, sample, fd_step=f.fd_step)


def time_derivative(f: FormField, h_t: float = DEFAULT_TIME_STEP) -> FormField:
    """Partial time derivative of the coefficients at fixed position."""
    n = f.dim
    if f.poly is not None:
        return polynomial_form(n, f.degree, [p.diff(n) for p in f.poly], f.parity)
    return FormField(
        n, f.degree, f.parity, lambda p, t: (f(p, t + h_t) - f(p, t - h_t)) / (2.0 * h_t), fd_step=f.fd_step
    )


def time_derivative_vector(v: VectorField, h_t: float = DEFAULT_TIME_STEP) -> VectorField:
    n = v.dim
    if v.poly is not None:
        return polynomial_vector_field(n, [p.diff(n) for p in v.poly], v.parity)
    return VectorField(n, v.parity, lambda p, t: (v(p, t + h_t) - v(p, t - h_t)) / (2.0 * h_t))


def lie_derivative_spatial(f: FormField, v: VectorField) -> FormField:
    """Cartan formula ``L_v w = (dw).v + d(w.v)`` at each time (v frozen at the same time)."""
    if f.dim != v.dim:
        raise ArgumentError("form and vector field differ in dimension")
    stretch = contract_field(exterior_derivative(f), v)
    if f.degree == 0:
        return stretch.with_parity(f.parity)
    return add(stretch, exterior_derivative(contract_field(f, v))).with_parity(f.parity)


def grad(f0: FormField, g: Metric | None = None) -> VectorField:
    if f0.degree != 0:
        raise ArgumentError("grad expects a scalar field")
    g = Metric(f0.dim) if g is None else g
    return one_form_field_to_vector(exterior_derivative(f0), g, f0.parity)


def curl(v: VectorField, g: Metric | None = None, mu: VolumeForm | None = None) -> VectorField:
    if v.dim != 3:
        raise UnsupportedDimensionError("curl needs n = 3")
    g = Metric(3) if g is None else g
    mu = VolumeForm(3) if mu is None else mu
    return two_form_field_to_vector(exterior_derivative(flat_field(g, v)), mu, v.parity.flipped())


def div(v: VectorField, mu: VolumeForm | None = None) -> FormField:
    mu = VolumeForm(v.dim) if mu is None else mu
    top = exterior_derivative(mu_contract_field(mu, v, v.parity))
    return top_form_to_scalar(top, mu, v.parity)


def palais_derivative(f: FormField, x: Sequence[float], vectors: Sequence[Sequence[float]], t: float = 0.0,
                      h: float | None = None) -> float:
    """``dw(v_0..v_k)`` from the Palais formula with constant vector fields.

    Brackets of constant fields vanish, leaving the alternating sum of
    directional derivatives, each taken by a central difference.
    """
    k = f.degree
    if len(vectors) != k + 1:
        raise ArgumentError(f"need {k + 1} vectors for d of a {k}-form")
    h = f.fd_step if h is None else h
    x = np.asarray(x, dtype=float)
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    total = 0.0
    for i, vi in enumerate(vecs):
        rest = vecs[:i] + vecs[i + 1 :]
        plus = f.at(x + h * vi, t)
        minus = f.at(x - h * vi, t)
        total += (-1) ** i * (plus(*rest) - minus(*rest)) / (2.0 * h)
    return total


def max_norm(f: FormField, points: np.ndarray, t: float = 0.0) -> float:
    vals = f(points, t)
    return float(np.max(np.abs(vals), initial=0.0))


def unit_cube_lattice(m: int = 3, dim: int = 3, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Default deterministic sample set: an m^dim lattice on [lo, hi]^dim."""
    axis = np.linspace(lo, hi, m)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def random_polynomial_form(
    rng: np.random.Generator, dim: int, degree: int, poly_degree: int = 3,
    parity: Parity | str = Parity.EVEN, time_dependent: bool = False, scale_: float = 1.0,
) -> FormField:
    active = list(range(dim + 1)) if time_dependent else list(range(dim))
    coeffs = [Polynomial.random(rng, dim + 1, poly_degree, active, scale_) for _ in range(comb(dim, degree))]
    return polynomial_form(dim, degree, coeffs, parity)


def random_polynomial_vector_field(
    rng: np.random.Generator, dim: int, poly_degree: int = 2, parity: Parity | str = Parity.EVEN,
    time_dependent: bool = False, scale_: float = 1.0,
) -> VectorField:
    active = list(range(dim + 1)) if time_dependent else list(range(dim))
    return polynomial_vector_field(
        dim, [Polynomial.random(rng, dim + 1, poly_degree, active, scale_) for _ in range(dim)], parity
    )


def scale_vector_field(f0: FormField, v: VectorField) -> VectorField:
    """Pointwise product of a scalar field and a vector field."""
    if f0.degree != 0 or f0.dim != v.dim:
        raise ArgumentError("scale_vector_field expects a scalar field of matching dimension")
    parity = f0.parity ^ v.parity
    if f0.poly is not None and v.poly is not None:
        return polynomial_vector_field(v.dim, [f0.poly[0] * p for p in v.poly], parity)
    return VectorField(v.dim, parity, lambda p, t: f0(p, t) * v(p, t))
