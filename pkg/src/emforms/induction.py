"""Induction laws for moving bodies in R^3.

Fields are forms: the electric field and magnetic vortex are even, the
magnetic winding, displacement, current and charge are odd. Every law is
exposed as a residual so that callers can test it on any state, including
deliberately broken ones.

Conventions: ``mu = dx ^ dy ^ dz`` unless a volume form is passed; inner
boundaries follow the chain boundary operator and outer boundaries put the
outward transversal first.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .chains import Chain, boundary, integrate, integrate_outer
from .errors import ArgumentError, ConfigurationError, ParityError, PreconditionError
from .exterior_algebra import Metric, Parity, VolumeForm
from .flows import (
    Motion,
    RelativeMotion,
    direct_rate,
    push_chain,
    push_field,
    push_motion,
    convective_derivative,
)
from .form_fields import (
    DEFAULT_TIME_STEP,
    FormField,
    VectorField,
    add,
    contract_field,
    density_form,
    exterior_derivative,
    flat_field,
    lie_derivative_spatial,
    max_norm,
    mu_contract_field,
    one_form_field_to_vector,
    time_derivative,
    two_form_field_to_vector,
    unit_cube_lattice,
    wedge_fields,
    zero_form,
)

FD_TOLERANCE = 1e-4
ANALYTIC_TOLERANCE = 1e-8

# (degree, parity) of every slot
_SLOTS = {
    "E": (1, Parity.EVEN),
    "B": (2, Parity.EVEN),
    "H": (1, Parity.ODD),
    "D": (2, Parity.ODD),
    "J": (2, Parity.ODD),
    "rho": (3, Parity.ODD),
    "F": (1, Parity.EVEN),
    "V": (0, Parity.EVEN),
}


class PreconditionWarning(UserWarning):
    """A law that a check relies on does not hold for the supplied state."""


@dataclass(frozen=True, eq=False)
class EMState:
    """Electromagnetic fields as forms on R^3; any slot may be absent.

    ``E`` electric field, ``B`` magnetic vortex, ``H`` magnetic winding,
    ``D`` displacement, ``J`` conduction current, ``rho`` charge,
    ``F`` Faraday potential, ``V`` scalar electric potential.
    """

    E: FormField | None = None
    B: FormField | None = None
    H: FormField | None = None
    D: FormField | None = None
    J: FormField | None = None
    rho: FormField | None = None
    F: FormField | None = None
    V: FormField | None = None

    def __post_init__(self) -> None:
        for name, (degree, parity) in _SLOTS.items():
            f = getattr(self, name)
            if f is None:
                continue
            if f.dim != 3:
                raise ArgumentError(f"{name} must live on R^3, got R^{f.dim}")
            if f.degree != degree:
                raise ArgumentError(f"{name} must be a {degree}-form, got degree {f.degree}")
            if f.parity is not parity:
                raise ParityError(f"{name} must be {parity.value}, got {f.parity.value}")

    def require(self, *names: str) -> tuple[FormField, ...]:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigurationError(f"state is missing {', '.join(missing)}")
        return tuple(getattr(self, n) for n in names)

    def get(self, name: str) -> FormField:
        """The slot, or the zero form of the right type when absent."""
        f = getattr(self, name)
        if f is not None:
            return f
        degree, parity = _SLOTS[name]
        return zero_form(3, degree, parity)

    def replace(self, **changes: FormField | None) -> "EMState":
        return replace(self, **changes)

    def present(self) -> list[str]:
        return [f.name for f in fields(self) if getattr(self, f.name) is not None]

    @classmethod
    def from_vectors(
        cls,
        E: VectorField | None = None,
        B: VectorField | None = None,
        H: VectorField | None = None,
        D: VectorField | None = None,
        J: VectorField | None = None,
        rho: FormField | None = None,
        mu: VolumeForm | None = None,
    ) -> "EMState":
        """Build a state from vector proxies and a scalar charge density."""
        mu = VolumeForm(3) if mu is None else mu
        g = Metric(3)
        return cls(
            E=None if E is None else flat_field(g, E, Parity.EVEN),
            B=None if B is None else mu_contract_field(mu, B, Parity.EVEN),
            H=None if H is None else flat_field(g, H, Parity.ODD),
            D=None if D is None else mu_contract_field(mu, D, Parity.ODD),
            J=None if J is None else mu_contract_field(mu, J, Parity.ODD),
            rho=None if rho is None else density_form(mu, rho, Parity.ODD),
        )


@dataclass(frozen=True)
class Constitutive:
    """Scalar vacuum relations ``E = p_ele D`` and ``H = p_mag B``."""

    p_ele: float = 1.0
    p_mag: float = 1.0

    def __post_init__(self) -> None:
        for name in ("p_ele", "p_mag"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ConfigurationError(f"{name} must be a positive finite number, got {value}")

    def inverse(self) -> "Constitutive":
        return Constitutive(1.0 / self.p_ele, 1.0 / self.p_mag)


def apply_constitutive(c: Constitutive, s: EMState, mu: VolumeForm | None = None) -> EMState:
    """Fill ``E`` from ``D`` and ``H`` from ``B`` (whichever are present)."""
    mu = VolumeForm(3) if mu is None else mu
    if s.D is None and s.B is None:
        raise ConfigurationError("need D or B to apply constitutive relations")
    g = Metric(3)
    changes: dict[str, FormField] = {}
    if s.D is not None:
        changes["E"] = flat_field(g, two_form_field_to_vector(s.D, mu) * c.p_ele, Parity.EVEN)
    if s.B is not None:
        changes["H"] = flat_field(g, two_form_field_to_vector(s.B, mu) * c.p_mag, Parity.ODD)
    return s.replace(**changes)


def invert_constitutive(c: Constitutive, s: EMState, mu: VolumeForm | None = None) -> EMState:
    """Fill ``D`` from ``E`` and ``B`` from ``H``."""
    mu = VolumeForm(3) if mu is None else mu
    if s.E is None and s.H is None:
        raise ConfigurationError("need E or H to invert constitutive relations")
    g = Metric(3)
    changes: dict[str, FormField] = {}
    if s.E is not None:
        changes["D"] = mu_contract_field(mu, one_form_field_to_vector(s.E, g) * (1.0 / c.p_ele), Parity.ODD)
    if s.H is not None:
        changes["B"] = mu_contract_field(mu, one_form_field_to_vector(s.H, g) * (1.0 / c.p_mag), Parity.EVEN)
    return s.replace(**changes)


def _points(points: np.ndarray | None) -> np.ndarray:
    return unit_cube_lattice(3, 3) if points is None else points


def _require_parity(f: FormField, parity: Parity, name: str) -> None:
    if f.parity is not parity:
        raise ParityError(f"{name} must be {parity.value}")


# ---------------------------------------------------------------------------
# Faraday
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaradayTerms:
    """Boundary emf and convective vortex rate through a surface."""

    emf: float
    vortex_rate: float

    @property
    def residual(self) -> float:
        return abs(self.emf + self.vortex_rate)


def faraday_integral_terms(
    s: EMState, m: Motion, surf: Chain, t: float = 0.0, depth: int = 4, h_t: float = DEFAULT_TIME_STEP
) -> FaradayTerms:
    E, B = s.require("E", "B")
    _require_parity(E, Parity.EVEN, "E")
    _require_parity(B, Parity.EVEN, "B")
    emf = integrate(E, boundary(surf), depth, t)
    rate = integrate(convective_derivative(B, m, h_t), surf, depth, t)
    return FaradayTerms(emf, rate)


def faraday_residual_integral(
    s: EMState, m: Motion, surf: Chain, t: float = 0.0, depth: int = 4, h_t: float = DEFAULT_TIME_STEP
) -> float:
    """``|emf around the boundary + convective vortex rate through surf|``."""
    return faraday_integral_terms(s, m, surf, t, depth, h_t).residual


@dataclass(frozen=True)
class FaradayDifferential:
    """Pointwise Faraday residuals in three equivalent forms.

    ``reduced`` uses ``d(B.v)`` (valid when ``dB = 0``), ``lie`` the full Cartan
    form and ``convective`` the pull-back derivative. ``discrepancy`` is the
    gap between the reduced and Lie forms, i.e. ``|(dB).v|``.
    """

    reduced: float
    lie: float
    convective: float
    discrepancy: float


def faraday_differential_terms(
    s: EMState, m: Motion, t: float = 0.0, points: np.ndarray | None = None, h_t: float = DEFAULT_TIME_STEP
) -> FaradayDifferential:
    E, B = s.require("E", "B")
    pts = _points(points)
    v = m.velocity_field()
    dE = exterior_derivative(E)
    dB_dt = time_derivative(B, h_t)
    base = add(dE, dB_dt)
    reduced = add(base, exterior_derivative(contract_field(B, v)))
    lie = add(base, lie_derivative_spatial(B, v))
    conv = add(dE, convective_derivative(B, m, h_t))
    r_vals, l_vals = reduced(pts, t), lie(pts, t)
    return FaradayDifferential(
        float(np.max(np.abs(r_vals), initial=0.0)),
        float(np.max(np.abs(l_vals), initial=0.0)),
        max_norm(conv, pts, t),
        float(np.max(np.abs(r_vals - l_vals), initial=0.0)),
    )


def faraday_residual_differential(
    s: EMState, m: Motion, t: float = 0.0, points: np.ndarray | None = None, h_t: float = DEFAULT_TIME_STEP
) -> float:
    """Max over points of ``|dE + d_t B + d(B.v)|``."""
    return faraday_differential_terms(s, m, t, points, h_t).reduced


def electric_field_from_potentials(
    F: FormField,
    V: FormField | None,
    m: Motion,
    B: FormField,
    t: float = 0.0,
    points: np.ndarray | None = None,
    tol: float = FD_TOLERANCE,
    h_t: float = DEFAULT_TIME_STEP,
) -> FormField:
    """``E = -(d_t F + d(F.v) + B.v + dV)``; requires ``dF = B`` (checked)."""
    if F.degree != 1 or B.degree != 2:
        raise ArgumentError("expected a 1-form potential and a 2-form vortex")
    pts = _points(points)
    mismatch = max_norm(exterior_derivative(F) - B, pts, t)
    if mismatch > tol * max(1.0, max_norm(B, pts, t)):
        raise PreconditionError(f"dF differs from B (max |dF - B| = {mismatch:.3e})", mismatch)
    v = m.velocity_field()
    total = add(time_derivative(F, h_t), exterior_derivative(contract_field(F, v)))
    total = add(total, contract_field(B, v))
    if V is not None:
        total = add(total, exterior_derivative(V))
    return -total.with_parity(Parity.EVEN)


def faraday_wellposedness_residual(
    B: FormField, m: Motion, window: Chain, t: float = 0.0, depth: int = 4, h_t: float = DEFAULT_TIME_STEP
) -> float:
    """``|convective vortex rate through the closed boundary of window|``."""
    return abs(integrate(convective_derivative(B, m, h_t), boundary(window), depth, t))


# ---------------------------------------------------------------------------
# Ampere, Gauss, charge
# ---------------------------------------------------------------------------


def ampere_integral_terms(
    s: EMState, m: Motion, surf: Chain, t: float = 0.0, depth: int = 4,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> tuple[float, float]:
    """(winding around the outer boundary, displacement rate plus current through surf)."""
    H, D, J = s.require("H", "D", "J")
    for f, name in ((H, "H"), (D, "D"), (J, "J")):
        _require_parity(f, Parity.ODD, name)
    winding = integrate_outer(H, boundary(surf), mu, depth, t)
    source = integrate_outer(add(convective_derivative(D, m, h_t), J), surf, mu, depth, t)
    return winding, source


def ampere_residual_integral(
    s: EMState, m: Motion, surf: Chain, t: float = 0.0, depth: int = 4,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> float:
    winding, source = ampere_integral_terms(s, m, surf, t, depth, mu, h_t)
    return abs(winding - source)


def ampere_residual_differential(
    s: EMState, m: Motion, t: float = 0.0, points: np.ndarray | None = None, h_t: float = DEFAULT_TIME_STEP
) -> float:
    """Max over points of ``|dH - (d_t D + J + d(D.v) + rho.v)|``."""
    H, D = s.require("H", "D")
    J, rho = s.get("J"), s.get("rho")
    v = m.velocity_field()
    rhs = add(time_derivative(D, h_t), J)
    rhs = add(rhs, exterior_derivative(contract_field(D, v)))
    rhs = add(rhs, contract_field(rho, v))
    return max_norm(exterior_derivative(H) - rhs, _points(points), t)


def ampere_wellposedness_residual(
    s: EMState, m: Motion, window: Chain, t: float = 0.0, depth: int = 4,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> float:
    """``|flux of (convective D rate + J) through the closed boundary of window|``."""
    D, J = s.get("D"), s.get("J")
    return abs(integrate_outer(add(convective_derivative(D, m, h_t), J), boundary(window), mu, depth, t))


def gauss_residuals(
    s: EMState, window: Chain, depth: int = 4, t: float = 0.0, mu: VolumeForm | None = None
) -> tuple[float, float]:
    """(|closed vortex flux|, |closed displacement flux - enclosed charge|)."""
    shell = boundary(window)
    magnetic = abs(integrate(s.get("B"), shell, depth, t))
    enclosed = integrate_outer(s.get("rho"), window, mu, depth, t)
    electric = abs(integrate_outer(s.get("D"), shell, mu, depth, t) - enclosed)
    return magnetic, electric


def charge_balance_residual(
    rho: FormField, J: FormField, m: Motion, window: Chain, t: float = 0.0, depth: int = 4,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> float:
    """``|d/dtau charge in the advected window + current out of its boundary|``."""
    rate = direct_rate(rho, m, window, t, depth, h_t, mu)
    outflow = integrate_outer(J, boundary(window), mu, depth, t)
    return abs(rate + outflow)


def charge_balance_pointwise(
    rho: FormField, J: FormField, m: Motion, t: float = 0.0, points: np.ndarray | None = None,
    h_t: float = DEFAULT_TIME_STEP,
) -> float:
    """Max over points of ``|d_t rho + d(rho.v) + dJ|``."""
    v = m.velocity_field()
    total = add(time_derivative(rho, h_t), exterior_derivative(contract_field(rho, v)))
    total = add(total, exterior_derivative(J))
    return max_norm(total, _points(points), t)


# ---------------------------------------------------------------------------
# energy and invariance
# ---------------------------------------------------------------------------


def poynting_terms(
    s: EMState, window: Chain, depth: int = 4, t: float = 0.0,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> tuple[float, float]:
    """(volume integral of the power density, outward flux of E x H)."""
    E, H, D, B = s.require("E", "H", "D", "B")
    J = s.get("J")
    power = add(
        wedge_fields(E, add(J, time_derivative(D, h_t))),
        wedge_fields(H, time_derivative(B, h_t)),
    )
    flux = wedge_fields(E, H)
    return integrate_outer(power, window, mu, depth, t), integrate_outer(flux, boundary(window), mu, depth, t)


def poynting_residual(
    s: EMState, window: Chain, depth: int = 4, t: float = 0.0, mu: VolumeForm | None = None,
    points: np.ndarray | None = None, tol: float = FD_TOLERANCE, h_t: float = DEFAULT_TIME_STEP,
) -> float:
    """``|power in window + flux of E x H out of it|`` for a body at rest.

    The identity needs both induction laws; if either fails at ``points`` a
    :class:`PreconditionWarning` is issued and the residual is still returned.
    """
    rest = Motion.static(3)
    laws = max(
        faraday_residual_differential(s, rest, t, points, h_t),
        ampere_residual_differential(s, rest, t, points, h_t),
    )
    if laws > tol:
        warnings.warn(f"induction laws violated (max residual {laws:.3e})", PreconditionWarning, stacklevel=2)
    power, flux = poynting_terms(s, window, depth, t, mu, h_t)
    return abs(power + flux)


def push_state(s: EMState, zeta: RelativeMotion) -> EMState:
    """Every present field pushed forward by the relative motion."""
    return EMState(**{name: None if getattr(s, name) is None else push_field(getattr(s, name), zeta) for name in _SLOTS})


@dataclass(frozen=True)
class GalileiComparison:
    faraday_frame1: FaradayTerms | None
    faraday_frame2: FaradayTerms | None
    ampere_frame1: tuple[float, float] | None
    ampere_frame2: tuple[float, float] | None

    @property
    def residual(self) -> float:
        diffs = [0.0]
        if self.faraday_frame1 is not None and self.faraday_frame2 is not None:
            diffs += [
                abs(self.faraday_frame1.emf - self.faraday_frame2.emf),
                abs(self.faraday_frame1.vortex_rate - self.faraday_frame2.vortex_rate),
            ]
        if self.ampere_frame1 is not None and self.ampere_frame2 is not None:
            diffs += [abs(a - b) for a, b in zip(self.ampere_frame1, self.ampere_frame2)]
        return max(diffs)


def galilei_comparison(
    s: EMState, phi: Motion, boost_w, surf: Chain, t: float = 0.0, depth: int = 4,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> GalileiComparison:
    zeta = RelativeMotion.boost(boost_w)
    s2, phi2, surf2 = push_state(s, zeta), push_motion(phi, zeta), push_chain(surf, zeta, t)
    f1 = f2 = a1 = a2 = None
    if s.E is not None and s.B is not None:
        f1 = faraday_integral_terms(s, phi, surf, t, depth, h_t)
        f2 = faraday_integral_terms(s2, phi2, surf2, t, depth, h_t)
    if all(getattr(s, n) is not None for n in ("H", "D", "J")) and surf.is_outer:
        a1 = ampere_integral_terms(s, phi, surf, t, depth, mu, h_t)
        a2 = ampere_integral_terms(s2, phi2, surf2, t, depth, mu, h_t)
    return GalileiComparison(f1, f2, a1, a2)


def galilei_invariance_residual(
    s: EMState, phi: Motion, boost_w, surf: Chain, t: float = 0.0, depth: int = 4,
    mu: VolumeForm | None = None, h_t: float = DEFAULT_TIME_STEP,
) -> float:
    """Largest change of any law term when the whole setup is boosted by ``boost_w``."""
    return galilei_comparison(s, phi, boost_w, surf, t, depth, mu, h_t).residual
