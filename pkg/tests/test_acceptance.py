"""End-to-end acceptance criteria, one test each.

Every criterion prints a single ``PASS``/``FAIL`` line (shown even under
pytest's output capture) with the measured value and runtime, then asserts.
Run directly with ``python3 tests/test_acceptance.py`` for the summary alone.
"""

from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ampere_state, faraday_state, var  # noqa: E402
from emforms.chains import (  # noqa: E402
    Chain,
    Simplex,
    integrate,
    integrate_inner,
    integrate_outer,
    rectangle,
    stokes_residual,
    triangle,
    unit_cube,
    unit_square,
)
from emforms.exterior_algebra import Parity, VolumeForm  # noqa: E402
from emforms.flows import (  # noqa: E402
    Motion,
    RelativeMotion,
    convective_derivative,
    covariance_residual,
    spatial_convective_derivative,
)
from emforms.form_fields import (  # noqa: E402
    exterior_derivative,
    max_norm,
    mu_contract_field,
    polynomial_form,
    polynomial_vector_field,
    random_polynomial_form,
    unit_cube_lattice,
)
from emforms.induction import (  # noqa: E402
    EMState,
    ampere_residual_differential,
    ampere_wellposedness_residual,
    charge_balance_pointwise,
    charge_balance_residual,
    faraday_differential_terms,
    faraday_wellposedness_residual,
    galilei_invariance_residual,
    gauss_residuals,
)
from emforms.poincare import potential  # noqa: E402
from emforms.scenarios import (  # noqa: E402
    ScenarioConfig,
    disc_sample_points,
    run_faraday_disc,
    run_sliding_bar,
    run_translating_body,
    translating_body_state,
)
from emforms.selftest import charge_states, magnetic_states  # noqa: E402
from emforms.spacetime import (  # noqa: E402
    Observer,
    ampere_4d_residuals,
    assemble_ampere,
    assemble_faraday,
    assemble_four_current,
    faraday_4d_residuals,
    observer_equivalence_residual,
)

LATTICE = unit_cube_lattice(3, 3)


def report(number: int, title: str, ok: bool, detail: str, seconds: float, limit: float) -> bool:
    within = seconds < limit
    status = "PASS" if ok and within else "FAIL"
    line = f"[{status}] criterion {number:2d} {title}: {detail}; {seconds:.2f} s (limit {limit:g} s)"
    print(line, flush=True)
    return ok and within


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


# ---------------------------------------------------------------------------


def criterion_half_factor() -> bool:
    with Timer() as clock:
        b0, v0 = 3.0, 2.0
        expected = np.array([0.0, -3.0, 0.0])  # half of (2, 0, 0) x (0, 0, 3)
        state, m = translating_body_state(b0, v0)
        analytic = float(np.abs(state.E(LATTICE) - expected).max())
        r = run_translating_body(ScenarioConfig(b0=b0, v0=v0))
        fd = r.residuals["half_factor_fd"]
    ok = len(LATTICE) == 27 and analytic <= 1e-6 and r.residuals["half_factor"] <= 1e-6 and fd <= 1e-4
    return report(1, "half-factor law", ok, f"analytic {analytic:.1e}, finite-difference {fd:.1e}", clock.seconds, 1.0)


def _flux_rule_by_sweep(b0: float, v0: float, length: float, x0: float = 1.0, h: float = 1e-3) -> float:
    """Minus the rate of vortex through the rails-and-bars rectangle, by central differences."""
    B = polynomial_form(3, 2, [b0, 0.0, 0.0])

    def flux(s: float) -> float:
        return integrate(B, rectangle((0.0, 0.0), (x0 + v0 * s, length), z=0.0, outer=False), 0)

    return -(flux(h) - flux(-h)) / (2.0 * h)


def criterion_sliding_bar() -> bool:
    worst = 0.0
    with Timer() as clock:
        grid = (0.5, 1.0, 2.0)
        for b0 in grid:
            for v0 in grid:
                for length in grid:
                    r = run_sliding_bar(ScenarioConfig("sliding_bar", b0=b0, v0=v0, length=length))
                    half = -0.5 * b0 * v0 * length
                    flux = _flux_rule_by_sweep(b0, v0, length)
                    scale = abs(2 * half)
                    worst = max(worst, abs(r.distributed - half) / scale, abs(sum(r.concentrated) - half) / scale,
                                abs(r.total - flux) / scale)
    return report(2, "sliding bar", worst <= 1e-5, f"worst relative error {worst:.1e} over 27 configs", clock.seconds, 5.0)


def criterion_disc() -> bool:
    field = total = exp2 = 0.0
    with Timer() as clock:
        for b0, omega, radius in ((1.0, 1.0, 1.0), (2.0, 3.0, 0.5), (-1.5, 0.7, 2.0)):
            r = run_faraday_disc(ScenarioConfig("faraday_disc", b0=b0, omega=omega, radius=radius))
            assert len(disc_sample_points(radius)) == 50
            field = max(field, r.residuals["distributed_field"])
            expected = 0.5 * b0 * omega * radius**2
            total = max(total, abs(abs(sum(r.concentrated)) - abs(expected)) / abs(expected))
            exp2 = max(exp2, abs(r.observables["experiments"]["spin_magnet"]))
    ok = field <= 1e-6 and total <= 1e-5 and exp2 == 0.0
    detail = f"disc field {field:.1e}, concentrated relative {total:.1e}, experiment 2 emf {exp2!r}"
    return report(3, "Faraday disc", ok, detail, clock.seconds, 5.0)


def _random_square(rng: np.random.Generator) -> Chain:
    """A rotated square placed inside the unit square."""
    angle, side = rng.uniform(0.0, 2 * np.pi), rng.uniform(0.3, 0.7)
    rot = side * np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]) @ rot.T
    low, span = corners.min(axis=0), np.ptp(corners, axis=0)
    shift = -low + rng.uniform(0.0, 1.0, 2) * (1.0 - span)
    return unit_square().mapped(lambda p: p @ rot.T + shift)


def criterion_stokes() -> bool:
    # unit-scale chains: everything lies in the unit square
    rng = np.random.default_rng(401)
    worst, non_monotone = 0.0, 0
    with Timer() as clock:
        for i in range(100):
            f = random_polynomial_form(rng, 2, 1, 3)
            region = triangle(*rng.uniform(0.0, 1.0, (3, 2))) if i % 2 == 0 else _random_square(rng)
            series = [stokes_residual(f, region, d) for d in range(3, 9)]
            worst = max(worst, series[-1])
            non_monotone += any(b > a for a, b in zip(series, series[1:]))
    ok = worst <= 1e-5 and non_monotone == 0
    detail = f"worst depth-8 residual {worst:.1e}, {non_monotone} non-monotone series"
    return report(4, "Stokes", ok, detail, clock.seconds, 30.0)


def criterion_cartan() -> bool:
    rng = np.random.default_rng(402)
    worst = 0.0
    with Timer() as clock:
        for i in range(50):
            m = Motion.translation(rng.normal(size=3)) if i % 2 == 0 else Motion.rotation(rng.uniform(-1.5, 1.5))
            f = random_polynomial_form(rng, 3, int(rng.integers(0, 4)), 3, time_dependent=True)
            t = float(rng.uniform(-0.5, 0.5))
            diff = convective_derivative(f, m)(LATTICE, t) - spatial_convective_derivative(f, m)(LATTICE, t)
            worst = max(worst, float(np.abs(diff).max(initial=0.0)))
    return report(5, "Cartan convective split", worst <= 1e-4, f"worst {worst:.1e}", clock.seconds, 10.0)


def criterion_poincare() -> bool:
    rng = np.random.default_rng(403)
    pts = rng.uniform(-1.0, 1.0, (50, 3))
    worst = 0.0
    with Timer() as clock:
        for _ in range(50):
            w = exterior_derivative(random_polynomial_form(rng, 3, 1, 3))
            worst = max(worst, max_norm(exterior_derivative(potential(w)) - w, pts))
        b = rng.normal(size=3)
        vortex = mu_contract_field(VolumeForm(3), polynomial_vector_field(3, list(b)))
        x = [var(4, i) for i in range(3)]
        # half of b x position, written as a 1-form
        half_cross = (0.5 * (b[1] * x[2] - b[2] * x[1]), 0.5 * (b[2] * x[0] - b[0] * x[2]),
                      0.5 * (b[0] * x[1] - b[1] * x[0]))
        exact = potential(vortex).poly == half_cross
    ok = worst <= 1e-6 and exact
    return report(6, "Poincare potential", ok, f"worst {worst:.1e}, uniform vortex exact: {exact}", clock.seconds, 10.0)


def criterion_galilei() -> bool:
    rng = np.random.default_rng(404)
    cov = inv = equiv = 0.0
    surf = rectangle(z=0.2)
    with Timer() as clock:
        for _ in range(50):
            m = Motion.translation(rng.normal(size=3))
            f, a = faraday_state(rng, m), ampere_state(rng, m)
            s = a.replace(E=f.E, B=f.B)
            w4 = assemble_faraday(s.B, s.E)
            for _ in range(5):
                w = rng.normal(size=3)
                zeta = RelativeMotion.boost(w)
                cov = max(cov, covariance_residual(s.B, m, zeta, 0.3), covariance_residual(s.D, m, zeta, 0.3))
                inv = max(inv, galilei_invariance_residual(s, m, w, surf, 0.1, 2))
                equiv = max(equiv, observer_equivalence_residual(w4, w, 0.4))
    ok = cov <= 1e-3 and inv <= 1e-3 and equiv <= 1e-10
    detail = f"covariance {cov:.1e}, invariance {inv:.1e}, observer equivalence {equiv:.1e}"
    return report(7, "Galilei invariance", ok, detail, clock.seconds, 30.0)


def criterion_spacetime() -> bool:
    rng = np.random.default_rng(405)
    tol = 1e-3
    gap = 0.0
    with Timer() as clock:
        for i in range(20):
            m = Motion.rotation(rng.uniform(-1.0, 1.0)) if i % 2 else Motion.translation(rng.normal(size=3))
            v, t = m.velocity_field(), 0.2
            s = ampere_state(rng, m).replace(**{k: getattr(faraday_state(rng, m), k) for k in ("E", "B")})
            three_f = faraday_differential_terms(s, m, t, LATTICE)
            four_f = faraday_4d_residuals(assemble_faraday(s.B, s.E, body_velocity=v), Observer(), v, t, LATTICE)
            three_a = (max_norm(exterior_derivative(s.D) - s.rho, LATTICE, t),
                       ampere_residual_differential(s, m, t, LATTICE),
                       charge_balance_pointwise(s.rho, s.J, m, t, LATTICE))
            four_a = ampere_4d_residuals(assemble_ampere(s.D, s.H, body_velocity=v),
                                         assemble_four_current(s.rho, s.J, body_velocity=v), Observer(), v, t, LATTICE)
            pairs = [(four_f[0], max_norm(exterior_derivative(s.B), LATTICE, t)), (four_f[1], three_f.lie)]
            pairs += list(zip(four_a, three_a))
            gap = max(gap, *(abs(a - b) for a, b in pairs))
        # injected violations: a monopole and a leaking charge
        x = var(4, 0)
        monopole = polynomial_form(3, 2, [0.0 * x, 0.0 * x, x])
        div_b = faraday_4d_residuals(assemble_faraday(monopole, polynomial_form(3, 1, [0.0, 0.0, 0.0])))[0]
        leak = polynomial_form(3, 3, [var(4, 3)], Parity.ODD)
        zero_d = polynomial_form(3, 2, [0.0, 0.0, 0.0], Parity.ODD)
        continuity = ampere_4d_residuals(assemble_ampere(zero_d, polynomial_form(3, 1, [0.0] * 3, Parity.ODD)),
                                         assemble_four_current(leak, zero_d))[2]
    ok = gap <= tol and div_b > 10 * tol and continuity > 10 * tol
    detail = f"4D/3D gap {gap:.1e}, div B violation {div_b:.2g}, continuity violation {continuity:.2g}"
    return report(8, "4D equivalence", ok, detail, clock.seconds, 30.0)


def criterion_orientation() -> bool:
    rng = np.random.default_rng(406)
    mu = VolumeForm(3)
    mismatches = 0
    with Timer() as clock:
        for _ in range(100):
            parts = []
            for _ in range(int(rng.integers(1, 4))):
                verts = rng.uniform(-1.0, 1.0, (3, 3))
                normal = np.cross(verts[1] - verts[0], verts[2] - verts[0]) * rng.choice([-1.0, 1.0])
                parts.append((float(rng.choice([-2.0, -1.0, 1.0, 3.0])), Simplex(verts, 1, normal[None, :])))
            c = Chain.from_simplices(parts)
            even = random_polynomial_form(rng, 3, 2, 2)
            odd = even.with_parity("odd")
            depth = int(rng.integers(0, 3))
            base_in, base_out = integrate_inner(even, c, depth), integrate_outer(odd, c, mu, depth)
            mismatches += integrate_inner(even, c.flip_inner(), depth) != -base_in
            mismatches += integrate_outer(odd, c.flip_outer(), mu, depth) != -base_out
            mismatches += integrate_outer(odd, c, mu.flipped(), depth) != -base_out
    return report(9, "orientation laws", mismatches == 0, f"{mismatches} non-bitwise flips in 300", clock.seconds, 10.0)


def criterion_wellposedness() -> bool:
    rng = np.random.default_rng(407)
    window, tol = unit_cube(), 1e-4
    probe = Motion.expansion(1.0)
    m = Motion.rotation(0.7)
    disagreements = flagged = 0
    with Timer() as clock:
        vortices = magnetic_states(rng, 20, 3)
        charges = charge_states(rng, m, 20, 2)
        charges = charges[3:] + charges[:3]  # violators at 15, 16; monopoles at 17..19
        for B, c in zip(vortices, charges):
            s = c.replace(B=B)
            faraday_wp = faraday_wellposedness_residual(B, probe, window, 0.0, 3) <= tol
            gauss = gauss_residuals(EMState(B=B), window, 3)[0] <= tol
            ampere_wp = ampere_wellposedness_residual(s, m, window, 0.0, 3) <= tol
            balance = charge_balance_residual(s.rho, s.J, m, window, 0.0, 3) <= tol
            disagreements += (faraday_wp != gauss) + (ampere_wp != balance)
            flagged += not (gauss and balance)
    ok = disagreements == 0 and flagged == 5
    detail = f"{disagreements} iff disagreements, {flagged} of 5 violators flagged"
    return report(10, "well-posedness iff conservation", ok, detail, clock.seconds, 20.0)


def criterion_determinism() -> bool:
    with Timer() as clock:
        runs = [subprocess.run([sys.executable, "-m", "emforms.cli", "selftest"], capture_output=True, timeout=120)
                for _ in range(2)]
    codes = [r.returncode for r in runs]
    ok = codes == [0, 0] and runs[0].stdout == runs[1].stdout and len(runs[0].stdout) > 0
    detail = f"exit codes {codes}, identical output: {runs[0].stdout == runs[1].stdout}"
    return report(11, "selftest determinism", ok, detail, clock.seconds, 120.0)


CRITERIA = [
    criterion_half_factor,
    criterion_sliding_bar,
    criterion_disc,
    criterion_stokes,
    criterion_cartan,
    criterion_poincare,
    criterion_galilei,
    criterion_spacetime,
    criterion_orientation,
    criterion_wellposedness,
    criterion_determinism,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__.removeprefix("criterion_") for c in CRITERIA])
def test_criterion(criterion, capsys):
    with capsys.disabled():
        print()
        passed = criterion()
    assert passed


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
