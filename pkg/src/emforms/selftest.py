"""Deterministic invariant suite behind ``emforms selftest``.

Every check uses fixed seeds, so two runs on the same installation produce
bit-identical reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chains import Chain, Simplex, integrate_inner, integrate_outer, stokes_residual, triangle, unit_cube
from .flows import Motion, RelativeMotion, convective_derivative, covariance_residual, spatial_convective_derivative
from .exterior_algebra import Parity, VolumeForm
from .form_fields import (
    FormField,
    add,
    exterior_derivative,
    max_norm,
    polynomial_form,
    random_polynomial_form,
    unit_cube_lattice,
)
from .induction import (
    EMState,
    ampere_wellposedness_residual,
    charge_balance_residual,
    faraday_differential_terms,
    faraday_wellposedness_residual,
    gauss_residuals,
)
from .polynomials import Polynomial
from .poincare import potential
from .scenarios import ScenarioConfig, run, versions
from .spacetime import Observer, assemble_faraday, faraday_4d_residuals, observer_equivalence_residual

SEED = 20240


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "pass": self.passed}


def _scenarios() -> list[Check]:
    configs = [
        ScenarioConfig("translating_body", b0=3.0, v0=2.0),
        ScenarioConfig("sliding_bar", b0=1.0, v0=2.0, length=3.0),
        ScenarioConfig("faraday_disc", b0=1.0, omega=2.0, radius=1.0),
    ]
    out = []
    for cfg in configs:
        report = run(cfg)
        failing = [k for k, ok in report.flags().items() if not ok]
        out.append(Check(f"scenario:{cfg.scenario}", float(len(failing)), 0.0))
    return out


def _stokes(rng: np.random.Generator) -> list[Check]:
    worst = 0.0
    for _ in range(10):
        f = random_polynomial_form(rng, 2, 1, 3)
        tri = triangle(*rng.uniform(0.0, 1.0, (3, 2)))
        worst = max(worst, stokes_residual(f, tri, depth=8))
    return [Check("stokes:triangles", worst, 1e-5)]


def _cartan(rng: np.random.Generator) -> list[Check]:
    pts = unit_cube_lattice(3, 3)
    worst = 0.0
    for m in (Motion.translation([0.4, -0.3, 0.2]), Motion.rotation(0.9)):
        for _ in range(3):
            f = random_polynomial_form(rng, 3, int(rng.integers(1, 3)), 3, time_dependent=True)
            t = float(rng.uniform(-0.5, 0.5))
            diff = convective_derivative(f, m)(pts, t) - spatial_convective_derivative(f, m)(pts, t)
            worst = max(worst, float(np.max(np.abs(diff))))
    return [Check("convective:cartan", worst, 1e-4)]


def _poincare(rng: np.random.Generator) -> list[Check]:
    pts = rng.uniform(-1.0, 1.0, (50, 3))
    worst = 0.0
    for _ in range(5):
        w = exterior_derivative(random_polynomial_form(rng, 3, 1, 3))
        worst = max(worst, max_norm(exterior_derivative(potential(w)) - w, pts))
    return [Check("poincare:d_of_potential", worst, 1e-6)]


def _galilei(rng: np.random.Generator) -> list[Check]:
    worst = 0.0
    for _ in range(3):
        f = random_polynomial_form(rng, 3, 2, 2, time_dependent=True)
        w = rng.uniform(-2.0, 2.0, 3)
        phi = Motion.translation(rng.uniform(-1.0, 1.0, 3))
        worst = max(worst, covariance_residual(f, phi, RelativeMotion.boost(w), float(rng.uniform(0.0, 1.0))))
    field4 = random_polynomial_form(rng, 4, 2, 2)
    equiv = max(observer_equivalence_residual(field4, w, t) for w, t in (([1.0, 0.0, 0.0], 2.0), ([1.0, 2.0, 3.0], 0.7)))
    return [Check("galilei:covariance", worst, 1e-3), Check("galilei:observer_equivalence", equiv, 1e-10)]


def _spacetime(rng: np.random.Generator) -> list[Check]:
    worst = 0.0
    m = Motion.rotation(0.6)
    v = m.velocity_field()
    for _ in range(2):
        F = random_polynomial_form(rng, 3, 1, 2, time_dependent=True)
        B = exterior_derivative(F)
        E = random_polynomial_form(rng, 3, 1, 2, time_dependent=True)
        state = EMState(E=E, B=B)
        three = faraday_differential_terms(state, m, 0.2)
        four = faraday_4d_residuals(assemble_faraday(B, E, Observer(), v), Observer(), v, 0.2)
        worst = max(worst, abs(four[1] - three.lie), four[0])
    return [Check("spacetime:faraday_equivalence", worst, 1e-3)]


def _orientation(rng: np.random.Generator) -> list[Check]:
    mismatches = 0
    mu = VolumeForm(3)
    for _ in range(10):
        verts = rng.uniform(-1.0, 1.0, (3, 3))
        normal = np.cross(verts[1] - verts[0], verts[2] - verts[0])
        c = Chain.from_simplices([Simplex(verts, 1, normal[None, :])])
        even = random_polynomial_form(rng, 3, 2, 2)
        odd = even.with_parity("odd")
        base_in = integrate_inner(even, c, 2)
        base_out = integrate_outer(odd, c, mu, 2)
        mismatches += integrate_inner(even, c.flip_inner(), 2) != -base_in
        mismatches += integrate_outer(odd, c.flip_outer(), mu, 2) != -base_out
        mismatches += integrate_outer(odd, c, mu.flipped(), 2) != -base_out
    return [Check("orientation:bitwise_flips", float(mismatches), 0.0)]


def magnetic_states(rng: np.random.Generator, count: int, violators: int) -> list[FormField]:
    """Vortex two-forms: ``count - violators`` exact ones, then ones with nonzero divergence."""
    out = [exterior_derivative(random_polynomial_form(rng, 3, 1, 2, time_dependent=True))
           for _ in range(count - violators)]
    for i in range(violators):
        coeffs = [Polynomial.constant(4, 0.0)] * 3
        coeffs[i % 3] = Polynomial.variable(4, i % 3) * float(1 + i)
        out.append(polynomial_form(3, 2, [coeffs[2], -coeffs[1], coeffs[0]]))
    return out


def charge_states(rng: np.random.Generator, m: Motion, count: int, violators: int) -> list[EMState]:
    """States obeying the electric Gauss law; the last ``violators`` break charge balance.

    The current is minus the convective displacement rate plus a curl, so the
    balance holds exactly; violators add a current with unit divergence.
    """
    out = []
    for i in range(count):
        D = random_polynomial_form(rng, 3, 2, 2, Parity.ODD, time_dependent=True)
        curl_part = exterior_derivative(random_polynomial_form(rng, 3, 1, 2, Parity.ODD))
        J = add(-spatial_convective_derivative(D, m), curl_part)
        if i >= count - violators:
            J = add(J, polynomial_form(3, 2, [Polynomial.constant(4, 0.0)] * 2 + [Polynomial.variable(4, 0)],
                                       Parity.ODD))
        out.append(EMState(D=D, J=J, rho=exterior_derivative(D)))
    return out


def _wellposedness(rng: np.random.Generator) -> list[Check]:
    probe = Motion.expansion(1.0)
    window = unit_cube()
    disagreements = 0
    for B in magnetic_states(rng, 4, 2):
        wp = faraday_wellposedness_residual(B, probe, window, 0.0, 3) <= 1e-4
        gauss = gauss_residuals(EMState(B=B), window, 3)[0] <= 1e-4
        disagreements += wp != gauss
    m = Motion.rotation(0.7)
    for s in charge_states(rng, m, 4, 2):
        wp = ampere_wellposedness_residual(s, m, window, 0.0, 3) <= 1e-4
        balance = charge_balance_residual(s.rho, s.J, m, window, 0.0, 3) <= 1e-4
        disagreements += wp != balance
    return [Check("wellposedness:iff_conservation", float(disagreements), 0.0)]


SUITE: tuple[Callable[[np.random.Generator], list[Check]], ...] = (
    _stokes, _cartan, _poincare, _galilei, _spacetime, _orientation, _wellposedness,
)


def run_selftest(seed: int = SEED) -> dict:
    checks = _scenarios()
    for i, part in enumerate(SUITE):
        checks.extend(part(np.random.default_rng([seed, i])))
    return {
        "suite": "selftest",
        "seed": seed,
        "checks": [c.to_dict() for c in checks],
        "pass": all(c.passed for c in checks),
        "versions": versions(),
    }


def selftest_json(seed: int = SEED) -> str:
    return json.dumps(run_selftest(seed), indent=2)
