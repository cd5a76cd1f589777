from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import const, var
from emforms.chains import (
    Chain,
    Diagnostics,
    Simplex,
    boundary,
    box,
    disk_fan,
    dumps,
    integrate_inner,
    integrate_outer,
    loads,
    rectangle,
    refine,
    segment,
    stokes_residual,
    triangle,
    unit_square,
)
from emforms.errors import ConfigurationError, ParityError
from emforms.exterior_algebra import VolumeForm
from emforms.form_fields import (
    exterior_derivative,
    mu_contract_field,
    polynomial_form,
    polynomial_vector_field,
    random_polynomial_form,
)

seeds = st.integers(0, 2**32 - 1)


def x_dy():
    return polynomial_form(2, 1, [const(3, 0.0), var(3, 0)])


def vertex_multiset(c: Chain):
    """Signed face multiset keyed by sorted vertex tuples (orientation folded into the sign)."""
    out: dict = {}
    for w, s in c:
        order = np.lexsort(s.vertices.T[::-1])
        perm_sign = np.linalg.det(np.eye(len(order))[order])
        key = tuple(map(tuple, s.vertices[order]))
        out[key] = out.get(key, 0) + int(round(w * s.inner_orientation * perm_sign))
    return {k: v for k, v in out.items() if v}


class TestBoundary:
    def test_triangle_faces(self):
        v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        got = vertex_multiset(boundary(triangle(*v)))
        want = vertex_multiset(Chain.from_simplices([
            (1, Simplex(v[[1, 2]])), (-1, Simplex(v[[0, 2]])), (1, Simplex(v[[0, 1]]))
        ]))
        assert got == want

    @given(seeds)
    def test_boundary_of_boundary_is_empty(self, seed):
        rng = np.random.default_rng(seed)
        for k in (1, 2, 3):
            c = Chain.from_simplices([Simplex(rng.normal(size=(k + 1, 3)))])
            assert len(boundary(boundary(c))) == 0

    def test_interior_diagonal_cancels(self):
        edges = boundary(unit_square())
        assert len(edges) == 4
        lengths = sorted(np.linalg.norm(s.edges()[0]) for _, s in edges)
        np.testing.assert_allclose(lengths, [1.0] * 4)

    def test_box_boundary_closed(self):
        shell = boundary(box())
        assert len(boundary(shell)) == 0
        assert len(shell) == 12


class TestInnerIntegral:
    def test_unit_square_area(self):
        area = polynomial_form(2, 2, [1.0])
        assert integrate_inner(area, unit_square(), 0) == 1.0
        assert integrate_inner(area, unit_square().flip_inner(), 0) == -1.0

    def test_line_integral_oracle(self):
        got = integrate_inner(x_dy(), boundary(unit_square()), 6)
        assert got == pytest.approx(1.0, abs=1e-6)

    def test_against_parametrized_quadrature(self, rng):
        f = random_polynomial_form(rng, 2, 1, 3)
        a, b = rng.uniform(-1, 1, (2, 2))

        def integrand(s):
            p = a + s * (b - a)
            return float(f(p)[0] @ (b - a))

        exact, _ = quad(integrand, 0.0, 1.0)
        assert integrate_inner(f, segment(a, b), 8) == pytest.approx(exact, abs=1e-6)

    def test_parity_enforced(self):
        with pytest.raises(ParityError):
            integrate_inner(polynomial_form(2, 2, [1.0], "odd"), unit_square(), 0)

    def test_degenerate_counted_not_raised(self):
        flat = triangle([0, 0], [1, 1], [2, 2])
        diag = Diagnostics()
        assert integrate_inner(polynomial_form(2, 2, [1.0]), flat, 2, diagnostics=diag) == 0.0
        assert diag.degenerate == 1

    def test_second_order_convergence(self, rng):
        f = random_polynomial_form(rng, 2, 2, 3)
        tri = triangle(*rng.uniform(-1, 1, (3, 2)))
        vals = [integrate_inner(f, tri, d) for d in range(3, 9)]
        diffs = np.abs(np.diff(vals))
        assert np.all(diffs[1:] <= diffs[:-1] / 3.0)


class TestOuterIntegral:
    def flux(self, b=(0.0, 0.0, 1.0)):
        return mu_contract_field(VolumeForm(3), polynomial_vector_field(3, list(b)), "odd")

    def test_flux_through_square(self):
        sq = rectangle(z=0.0)
        assert integrate_outer(self.flux(), sq, VolumeForm(3), 0) == 1.0
        assert integrate_outer(self.flux(), sq.flip_outer(), VolumeForm(3), 0) == -1.0

    def test_ambient_flip_with_odd_integrand_keeps_value(self):
        mu_minus = VolumeForm(3, -1)
        odd_flux = mu_contract_field(mu_minus, polynomial_vector_field(3, [0.0, 0.0, 1.0]), "odd")
        assert integrate_outer(odd_flux, rectangle(z=0.0), mu_minus, 0) == 1.0

    def test_vertex_order_irrelevant(self):
        sq = rectangle(z=0.0)
        reordered = Chain(sq.degree, sq.dim, sq.weights, sq.vertices[:, [0, 2, 1], :], sq.signs, sq.frames)
        assert integrate_outer(self.flux(), reordered, VolumeForm(3), 0) == 1.0

    def test_frames_required(self):
        with pytest.raises(ConfigurationError):
            integrate_outer(self.flux(), rectangle(z=0.0, outer=False), VolumeForm(3), 0)

    def test_non_transversal_frame_rejected(self):
        bad = rectangle(z=0.0).with_frames([[1.0, 0.0, 0.0]])
        with pytest.raises(ConfigurationError):
            integrate_outer(self.flux(), bad, VolumeForm(3), 0)

    def test_top_degree_flip_outer_refused(self):
        with pytest.raises(ConfigurationError):
            box().flip_outer()

    def test_disk_flux(self):
        fan = disk_fan(1.0, 64)
        exact = 64 * 0.5 * np.sin(2 * np.pi / 64)
        assert integrate_outer(self.flux(), fan, VolumeForm(3), 0) == pytest.approx(exact, abs=1e-12)

    @given(seeds)
    def test_flips_negate_bitwise(self, seed):
        rng = np.random.default_rng(seed)
        verts = rng.uniform(-1, 1, (3, 3))
        normal = np.cross(verts[1] - verts[0], verts[2] - verts[0])
        c = Chain.from_simplices([Simplex(verts, 1, normal[None, :])])
        even = random_polynomial_form(rng, 3, 2, 2)
        odd = even.with_parity("odd")
        mu = VolumeForm(3)
        base_in, base_out = integrate_inner(even, c, 2), integrate_outer(odd, c, mu, 2)
        assert integrate_inner(even, c.flip_inner(), 2) == -base_in
        assert integrate_outer(odd, c.flip_outer(), mu, 2) == -base_out
        assert integrate_outer(odd, c, mu.flipped(), 2) == -base_out


class TestRefine:
    def test_counts_and_area(self):
        tri = triangle([0, 0], [1, 0], [0, 1])
        once = refine(tri)
        assert len(once) == 4
        assert once.signed_volumes().sum() == pytest.approx(0.5, abs=1e-15)
        assert len(refine(segment([0.0], [1.0]))) == 2
        assert len(refine(refine(tri))) == 16
        assert len(refine(box(), 1)) == 6 * 8

    @given(seeds)
    def test_volume_preserved(self, seed):
        rng = np.random.default_rng(seed)
        c = Chain.from_simplices([Simplex(rng.normal(size=(4, 3)))])
        np.testing.assert_allclose(refine(c, 2).signed_volumes().sum(), c.signed_volumes().sum(), rtol=1e-12)

    def test_refinement_matches_depth(self, rng):
        f = random_polynomial_form(rng, 2, 2, 2)
        tri = triangle(*rng.uniform(-1, 1, (3, 2)))
        assert integrate_inner(f, refine(tri, 2), 1) == pytest.approx(integrate_inner(f, tri, 3), abs=1e-13)


class TestStokes:
    def test_x_dy_square(self):
        assert stokes_residual(x_dy(), unit_square(), 6) <= 1e-6

    def test_exact_form_on_cycle(self, rng):
        cycle = boundary(triangle(*rng.uniform(-1, 1, (3, 2))))
        # quadratic potential: the midpoint rule is exact on each edge
        df = exterior_derivative(polynomial_form(2, 0, [var(3, 0) * var(3, 1)]))
        assert abs(integrate_inner(df, cycle, 0)) <= 1e-12
        df = exterior_derivative(random_polynomial_form(rng, 2, 0, 3))
        assert abs(integrate_inner(df, cycle, 8)) <= 1e-6

    @given(seeds)
    def test_random_triangle(self, seed):
        rng = np.random.default_rng(seed)
        f = random_polynomial_form(rng, 2, 1, 3)
        assert stokes_residual(f, triangle(*rng.uniform(0, 1, (3, 2))), 8) <= 1e-5

    def test_outer_stokes_divergence_theorem(self, rng):
        flux = mu_contract_field(VolumeForm(3), polynomial_vector_field(3, [var(4, 0) * var(4, 1), var(4, 2), const(4, 1)]), "odd")
        assert stokes_residual(flux, box(), 4) <= 1e-4


def test_serialization_round_trip(rng):
    c = rectangle(z=0.3)
    back = loads(dumps(c))
    np.testing.assert_array_equal(back.vertices, c.vertices)
    np.testing.assert_array_equal(back.frames, c.frames)
    np.testing.assert_array_equal(back.signs, c.signs)
    top = loads(dumps(box()))
    assert top.frames.shape == (6, 0, 3)
