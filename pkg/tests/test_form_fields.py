from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import const, var
from emforms.errors import ArgumentError, ParityError
from emforms.exterior_algebra import KCovector, Parity, VolumeForm, apply
from emforms.form_fields import (
    add,
    constant_form,
    contract_field,
    curl,
    div,
    exterior_derivative,
    grad,
    lie_derivative_spatial,
    linear_vector_field,
    max_norm,
    mu_contract_field,
    palais_derivative,
    polynomial_form,
    polynomial_vector_field,
    random_polynomial_form,
    sampled_form,
    time_derivative,
    two_form_field_to_vector,
    wedge_fields,
    zero_form,
)

PTS3 = np.random.default_rng(7).uniform(-1.5, 1.5, (40, 3))
PTS2 = np.random.default_rng(8).uniform(-1.5, 1.5, (40, 2))
seeds = st.integers(0, 2**32 - 1)


def x2(i):
    return var(3, i)


class TestExteriorDerivative:
    def test_x_dy(self):
        f = polynomial_form(2, 1, [const(3, 0), x2(0)])
        d = exterior_derivative(f)
        np.testing.assert_allclose(d(PTS2), 1.0)

    def test_dd_zero_fd_mode(self):
        f0 = polynomial_form(2, 0, [x2(0) * x2(1)]).numeric()
        dd = exterior_derivative(exterior_derivative(f0))
        assert dd.derivative_mode == "finite_difference"
        assert max_norm(dd, PTS2) <= 1e-6

    def test_linear_potential(self):
        f = polynomial_form(2, 1, [-0.5 * x2(1), 0.5 * x2(0)])
        np.testing.assert_allclose(exterior_derivative(f)(PTS2), 1.0, atol=0)
        np.testing.assert_allclose(exterior_derivative(f.numeric())(PTS2), 1.0, atol=1e-8)

    @given(seeds)
    def test_dd_zero_analytic(self, seed):
        rng = np.random.default_rng(seed)
        for k in (0, 1):
            f = random_polynomial_form(rng, 3, k, 3, time_dependent=True)
            assert max_norm(exterior_derivative(exterior_derivative(f)), PTS3, 0.3) <= 1e-10

    @given(seeds)
    def test_analytic_matches_fd(self, seed):
        rng = np.random.default_rng(seed)
        f = random_polynomial_form(rng, 3, 1, 3)
        exact = exterior_derivative(f)(PTS3)
        approx = exterior_derivative(f.numeric())(PTS3)
        np.testing.assert_allclose(approx, exact, atol=1e-6)

    @given(seeds)
    def test_leibniz(self, seed):
        rng = np.random.default_rng(seed)
        a = random_polynomial_form(rng, 3, 1, 2)
        b = random_polynomial_form(rng, 3, 1, 2)
        lhs = exterior_derivative(wedge_fields(a, b))
        rhs = add(wedge_fields(exterior_derivative(a), b), -wedge_fields(a, exterior_derivative(b)))
        assert max_norm(lhs - rhs, PTS3) <= 1e-9

    def test_top_degree_gives_zero(self):
        d = exterior_derivative(polynomial_form(3, 3, [var(4, 0)]))
        assert d.degree == 3 and d.top_marker
        assert max_norm(d, PTS3) == 0.0

    def test_palais_formula_agrees(self, rng):
        f = random_polynomial_form(rng, 3, 1, 3)
        d = exterior_derivative(f)
        x = rng.uniform(-1, 1, 3)
        vs = rng.normal(size=(2, 3))
        assert palais_derivative(f, x, vs) == pytest.approx(apply(d.at(x), vs), abs=1e-6)


class TestLieDerivative:
    def test_translation_of_x_dy(self):
        f = polynomial_form(2, 1, [const(3, 0), x2(0)])
        v = polynomial_vector_field(2, [1.0, 0.0])
        np.testing.assert_allclose(lie_derivative_spatial(f, v)(PTS2), [[0.0, 1.0]] * len(PTS2), atol=0)

    def test_zero_flow(self, rng):
        f = random_polynomial_form(rng, 2, 1, 2)
        assert max_norm(lie_derivative_spatial(f, polynomial_vector_field(2, [0.0, 0.0])), PTS2) == 0.0

    def test_rotation_preserves_area(self):
        area = polynomial_form(2, 2, [1.0])
        rot = linear_vector_field(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert max_norm(lie_derivative_spatial(area.numeric(), rot), PTS2) <= 1e-6

    def test_against_flow_fd(self, rng):
        # L_v f = d/ds (phi_s^* f) at s = 0 for the linear flow phi_s = expm(sA)
        from scipy.linalg import expm

        a = rng.normal(size=(3, 3))
        f = random_polynomial_form(rng, 3, 2, 2)
        v = linear_vector_field(a)
        lie = lie_derivative_spatial(f, v)(PTS3)
        h = 1e-4

        def pulled(s):
            m = expm(s * a)
            vals = f(PTS3 @ m.T)
            return np.stack([
                [apply(KCovector(3, 2, row), [m[:, i], m[:, j]]) for i, j in ((0, 1), (0, 2), (1, 2))]
                for row in vals
            ])

        np.testing.assert_allclose((pulled(h) - pulled(-h)) / (2 * h), lie, atol=1e-6)


class TestVectorCalculus:
    def test_grad(self):
        x, y = var(4, 0), var(4, 1)
        xy = polynomial_form(3, 0, [x * y]).numeric()
        g = grad(xy)(PTS3)
        np.testing.assert_allclose(g, np.stack([PTS3[:, 1], PTS3[:, 0], 0 * PTS3[:, 0]], 1), atol=1e-8)
        assert np.abs(grad(polynomial_form(3, 0, [2.5]))(PTS3)).max() == 0.0
        half = polynomial_form(3, 0, [0.5 * x ** 2]).numeric()
        np.testing.assert_allclose(grad(half)([3.0, 0.0, 0.0])[0], [3.0, 0.0, 0.0], atol=1e-6)

    def test_curl(self):
        x, y, z = (var(4, i) for i in range(3))
        rot = polynomial_vector_field(3, [-y, x, 0.0 * x])
        np.testing.assert_allclose(curl(rot)(PTS3), [[0.0, 0.0, 2.0]] * len(PTS3), atol=1e-12)
        shear = polynomial_vector_field(3, [0.0 * x, 0.0 * x, x]).numeric()
        np.testing.assert_allclose(curl(shear)(PTS3), [[0.0, -1.0, 0.0]] * len(PTS3), atol=1e-8)

    @given(seeds)
    def test_curl_grad_and_div_curl_vanish(self, seed):
        rng = np.random.default_rng(seed)
        f = random_polynomial_form(rng, 3, 0, 3)
        assert np.abs(curl(grad(f))(PTS3)).max() <= 1e-9
        v = grad(random_polynomial_form(rng, 3, 0, 3))
        u = polynomial_vector_field(3, [p * 1.0 for p in v.poly])
        assert max_norm(div(curl(u)), PTS3) <= 1e-9

    def test_div(self):
        x, y, z = (var(4, i) for i in range(3))
        np.testing.assert_allclose(div(polynomial_vector_field(3, [x, y, z]))(PTS3), 3.0)
        assert max_norm(div(polynomial_vector_field(3, [-y, x, 0 * x])), PTS3) == 0.0
        sq = polynomial_vector_field(3, [x * x, 0 * x, 0 * x]).numeric()
        assert div(sq)([2.0, 0.0, 0.0])[0, 0] == pytest.approx(4.0, abs=1e-6)

    def test_flux_form_divergence(self, rng):
        # d(mu . u) = (div u) mu
        x, y, z = (var(4, i) for i in range(3))
        u = polynomial_vector_field(3, [x * y, y * z * z, x - z])
        lhs = exterior_derivative(mu_contract_field(VolumeForm(3), u))(PTS3)[:, 0]
        np.testing.assert_allclose(lhs, div(u)(PTS3)[:, 0], atol=1e-12)

    def test_two_form_proxy_round_trip(self, rng):
        u = polynomial_vector_field(3, [var(4, 0), var(4, 1) * var(4, 2), const(4, 2.0)])
        back = two_form_field_to_vector(mu_contract_field(VolumeForm(3), u), VolumeForm(3))
        np.testing.assert_allclose(back(PTS3), u(PTS3), atol=1e-14)


class TestFieldBasics:
    def test_parity_checked_on_add(self):
        a = zero_form(3, 1)
        with pytest.raises(ParityError):
            add(a, zero_form(3, 1, "odd"))

    def test_sampled_form_shape_checked(self):
        f = sampled_form(3, 1, lambda p, t: np.zeros((p.shape[0], 2)))
        with pytest.raises(ArgumentError):
            f(PTS3)

    def test_time_derivative(self):
        t = var(4, 3)
        f = polynomial_form(3, 1, [t * t, var(4, 0) * t, const(4, 1)])
        np.testing.assert_allclose(time_derivative(f)(PTS3, 0.5)[:, 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(time_derivative(f.numeric())(PTS3, 0.5)[:, 0], 1.0, atol=1e-6)

    def test_contraction_with_field(self):
        w = constant_form(KCovector.basis(3, [0, 1]))
        e1 = polynomial_vector_field(3, [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(contract_field(w, e1)(PTS3[:2]), [[0, 1, 0]] * 2)

    def test_parity_metadata(self):
        f = zero_form(3, 2, "odd")
        assert f.parity is Parity.ODD
        assert f.with_parity("even").parity is Parity.EVEN
