"""Potentials of closed forms on star-shaped domains.

The radial contraction ``h_s(x) = x0 + s (x - x0)`` gives the classical
homotopy formula

    a(x)(u_1..u_{k-1}) = int_0^1 s^{k-1} w(x0 + s(x - x0))(x - x0, u_1..u_{k-1}) ds

with ``d a = w`` whenever ``d w = 0``. Polynomial forms are integrated
exactly by substitution; everything else uses Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import ArgumentError, PreconditionError
from .exterior_algebra import contract_table
from .form_fields import (
    FormField,
    as_points,
    exterior_derivative,
    max_norm,
    polynomial_form,
    unit_cube_lattice,
)
from .polynomials import Polynomial

DEFAULT_QUAD_ORDER = 16
DEFAULT_CLOSEDNESS_TOL = 1e-5


@dataclass(frozen=True)
class Contraction:
    """Radial contraction onto ``center``; the domain must be star-shaped about it."""

    center: tuple[float, ...]

    def __init__(self, center: Sequence[float]):
        object.__setattr__(self, "center", tuple(float(c) for c in center))

    @property
    def dim(self) -> int:
        return len(self.center)

    def __call__(self, points: np.ndarray, s: float) -> np.ndarray:
        x0 = np.asarray(self.center)
        return x0 + s * (np.asarray(points, dtype=float) - x0)

    def sample_points(self, m: int = 3, radius: float = 1.0) -> np.ndarray:
        """A lattice in the cube of half-width ``radius`` around the center."""
        return unit_cube_lattice(m, self.dim, -radius, radius) + np.asarray(self.center)


@lru_cache(maxsize=None)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def closedness_residual(w: FormField, points: np.ndarray | None = None, t: float = 0.0) -> float:
    """Max-norm of ``d w`` over ``points`` (default: lattice in the unit cube)."""
    if w.top_marker or w.degree == w.dim:
        return 0.0
    pts = unit_cube_lattice(3, w.dim) if points is None else as_points(points, w.dim)
    return max_norm(exterior_derivative(w), pts, t)


def potential(
    w: FormField,
    ctr: Contraction | None = None,
    quad_order: int = DEFAULT_QUAD_ORDER,
    check_points: np.ndarray | None = None,
    tol: float = DEFAULT_CLOSEDNESS_TOL,
    t_check: float = 0.0,
) -> FormField:
    """A (k-1)-form ``a`` with ``d a = w`` for a closed k-form ``w``.

    Closedness is checked at ``check_points`` (relative to the size of ``w``)
    and a :class:`PreconditionError` carrying the residual is raised otherwise.
    The result is unique only up to an exact form.
    """
    n, k = w.dim, w.degree
    if k < 1:
        raise ArgumentError("a potential needs a form of degree >= 1")
    if quad_order < 1:
        raise ArgumentError("quadrature order must be positive")
    ctr = Contraction([0.0] * n) if ctr is None else ctr
    if ctr.dim != n:
        raise ArgumentError("contraction center has the wrong dimension")

    pts = ctr.sample_points() if check_points is None else as_points(check_points, n)
    residual = closedness_residual(w, pts, t_check)
    scale_ = max(1.0, max_norm(w, pts, t_check))
    if residual > tol * scale_:
        raise PreconditionError(f"form is not closed (|dw| = {residual:.3e})", residual)

    if w.poly is not None:
        return _polynomial_potential(w, ctr)
    return _quadrature_potential(w, ctr, quad_order)


def _polynomial_potential(w: FormField, ctr: Contraction) -> FormField:
    n, k = w.dim, w.degree
    # variables (x_1..x_n, t, s); s is integrated out last
    nv = n + 2
    s = Polynomial.variable(nv, n + 1)
    radial = [Polynomial.variable(nv, i) - c for i, c in enumerate(ctr.center)]
    moved = [c + s * r for c, r in zip(ctr.center, radial)] + [Polynomial.variable(nv, n)]
    pulled = [p.substitute(moved) for p in w.poly]
    weight = s ** (k - 1)
    out = [Polynomial.zero(nv) for _ in range(comb(n, k - 1))]
    for o, i, src, sign in contract_table(n, k):
        out[o] = out[o] + sign * (radial[i] * pulled[src])
    coeffs = [(weight * p).integrate_last_unit() for p in out]
    return polynomial_form(n, k - 1, coeffs, w.parity, label=f"potential({w.label})")


def _quadrature_potential(w: FormField, ctr: Contraction, order: int) -> FormField:
    n, k = w.dim, w.degree
    nodes, weights = _gauss_legendre(order)
    table = contract_table(n, k)
    x0 = np.asarray(ctr.center)
    wq = weights * nodes ** (k - 1)

    def sample(points: np.ndarray, t: float) -> np.ndarray:
        r = points - x0
        npts = points.shape[0]
        # all quadrature nodes for all points in one call
        ys = (x0 + nodes[:, None, None] * r[None, :, :]).reshape(-1, n)
        vals = w(ys, t).reshape(len(nodes), npts, -1)
        avg = np.einsum("q,qpc->pc", wq, vals)
        out = np.zeros((npts, comb(n, k - 1)))
        for o, i, src, sign in table:
            out[:, o] += sign * r[:, i] * avg[:, src]
        return out

    return FormField(n, k - 1, w.parity, sample, fd_step=w.fd_step, label=f"potential({w.label})")
