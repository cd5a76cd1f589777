from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emforms.errors import ArgumentError, UnsupportedDimensionError
from emforms.exterior_algebra import (
    KCovector,
    Metric,
    Parity,
    VolumeForm,
    apply,
    contract,
    cross_identity_check,
    flat,
    multi_indices,
    mu_contract,
    two_form_to_vector,
    wedge,
)

e1, e2, e3 = np.eye(3)
finite = st.floats(-10, 10, allow_nan=False)
vec3 = st.lists(finite, min_size=3, max_size=3).map(np.array)


def dx(i, n=3):
    return KCovector.basis(n, [i])


def brute_apply(w: KCovector, vs) -> float:
    """Sum over permutations: the determinant definition, independent of the library tables."""
    total = 0.0
    mat = np.asarray(vs, dtype=float)
    for idx, c in zip(multi_indices(w.dim, w.degree), w.coeffs):
        total += c * np.linalg.det(mat[:, list(idx)]) if w.degree else c
    return total


def random_covector(rng, n, k, parity="even"):
    return KCovector(n, k, rng.normal(size=math.comb(n, k)), parity)


class TestApply:
    def test_basis_evaluations(self):
        w = KCovector.basis(3, [0, 1])
        assert w(e1, e2) == 1.0
        assert w(e1, e1) == 0.0
        assert w(e1 + e2, e2) == 1.0

    def test_wrong_arity(self):
        with pytest.raises(ArgumentError):
            apply(KCovector.basis(3, [0, 1]), [e1])

    def test_coefficient_count_checked(self):
        with pytest.raises(ArgumentError):
            KCovector(3, 2, [1.0, 2.0])

    def test_matches_determinant_oracle(self, rng):
        for n, k in [(2, 1), (3, 2), (3, 3), (4, 2), (4, 3)]:
            w = random_covector(rng, n, k)
            vs = rng.normal(size=(k, n))
            assert apply(w, vs) == pytest.approx(brute_apply(w, vs), abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    def test_alternating_and_multilinear(self, seed):
        rng = np.random.default_rng(seed)
        w = random_covector(rng, 4, 3)
        a, b, c, d = rng.normal(size=(4, 4))
        s = rng.normal()
        assert apply(w, [a, b, a]) == pytest.approx(0.0, abs=1e-12)
        assert apply(w, [a, b, c]) == pytest.approx(-apply(w, [b, a, c]), abs=1e-12)
        lhs = apply(w, [a + s * d, b, c])
        assert lhs == pytest.approx(apply(w, [a, b, c]) + s * apply(w, [d, b, c]), abs=1e-10)


class TestWedge:
    def test_basis(self):
        assert wedge(dx(0), dx(1)) == KCovector.basis(3, [0, 1])
        assert wedge(dx(0), dx(0)).norm() == 0.0
        assert wedge(dx(1), dx(0)) == -KCovector.basis(3, [0, 1])

    def test_parity_multiplies(self):
        a = dx(0).with_parity("odd")
        assert wedge(a, dx(1)).parity is Parity.ODD
        assert wedge(a, a.with_parity("odd")).parity is Parity.EVEN

    @given(st.integers(0, 2**32 - 1))
    def test_graded_commutativity_and_associativity(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_covector(rng, 4, 1), random_covector(rng, 4, 2), random_covector(rng, 4, 1))
        ab, ba = wedge(a, b), wedge(b, a)
        np.testing.assert_allclose(ab.coeffs, ba.coeffs, atol=1e-12)  # (-1)^(1*2) = +1
        ac, ca = wedge(a, c), wedge(c, a)
        np.testing.assert_allclose(ac.coeffs, -ca.coeffs, atol=1e-12)
        np.testing.assert_allclose(wedge(wedge(a, b), c).coeffs, wedge(a, wedge(b, c)).coeffs, atol=1e-12)

    def test_wedge_of_one_forms_is_determinant(self, rng):
        covs = rng.normal(size=(3, 3))
        vecs = rng.normal(size=(3, 3))
        w = wedge(wedge(KCovector(3, 1, covs[0]), KCovector(3, 1, covs[1])), KCovector(3, 1, covs[2]))
        assert w(*vecs) == pytest.approx(np.linalg.det(covs @ vecs.T), abs=1e-12)


class TestContract:
    def test_examples(self):
        assert contract(KCovector.basis(3, [0, 1]), e1) == dx(1)
        assert contract(KCovector.basis(3, [0, 1]), e3).norm() == 0.0
        mu = VolumeForm(3).as_covector()
        assert contract(mu, e3) == KCovector.basis(3, [0, 1])

    @given(st.integers(0, 2**32 - 1))
    def test_contraction_is_first_slot_insertion(self, seed):
        rng = np.random.default_rng(seed)
        w = random_covector(rng, 4, 3)
        v, a, b = rng.normal(size=(3, 4))
        assert apply(contract(w, v), [a, b]) == pytest.approx(apply(w, [v, a, b]), abs=1e-10)

    def test_degree_zero_rejected(self):
        with pytest.raises(ArgumentError):
            contract(KCovector.scalar(3, 1.0), e1)


class TestMetricAndVolume:
    def test_flat(self):
        g = Metric(3)
        assert flat(g, [1, 0, 0]) == dx(0)
        assert flat(g, [0, 2, 0]) == 2.0 * dx(1)
        assert flat(g, [1, 1, 0])([1, -1, 0]) == 0.0

    def test_mu_contract(self):
        mu = VolumeForm(3)
        assert mu_contract(mu, e3) == KCovector.basis(3, [0, 1])
        assert mu_contract(mu, [0, 0, 0]).norm() == 0.0
        assert mu_contract(mu.flipped(), e3) == -KCovector.basis(3, [0, 1])
        with pytest.raises(UnsupportedDimensionError):
            mu_contract(VolumeForm(1), [1.0])

    @given(vec3)
    def test_two_form_round_trip(self, u):
        mu = VolumeForm(3)
        np.testing.assert_allclose(two_form_to_vector(mu_contract(mu, u), mu), u, atol=1e-12)
        np.testing.assert_allclose(two_form_to_vector(mu_contract(mu.flipped(), u), mu.flipped()), u, atol=1e-12)

    def test_two_form_to_vector_examples(self):
        mu = VolumeForm(3)
        np.testing.assert_array_equal(two_form_to_vector(KCovector.basis(3, [0, 1]), mu), [0, 0, 1])
        np.testing.assert_array_equal(two_form_to_vector(KCovector.zero(3, 2), mu), [0, 0, 0])

    def test_flux_meaning(self, rng):
        # (mu.u)(a, b) = u . (a x b)
        u, a, b = rng.normal(size=(3, 3))
        assert mu_contract(VolumeForm(3), u)(a, b) == pytest.approx(u @ np.cross(a, b), abs=1e-12)

    def test_cross_identity(self):
        assert cross_identity_check([0, 0, 1], [1, 0, 0]) == 0.0
        assert contract(mu_contract(VolumeForm(3), e3), e1) == dx(1)
        assert cross_identity_check([1, 2, 3], [1, 2, 3]) == 0.0

    @given(vec3, vec3)
    def test_cross_identity_random(self, u, v):
        assert cross_identity_check(u, v) <= 1e-12 * max(1.0, float(np.abs(u).max() * np.abs(v).max()))


def test_multi_indices_sorted_and_complete():
    for n, k in itertools.product(range(1, 5), range(0, 5)):
        if k > n:
            continue
        idx = multi_indices(n, k)
        assert list(idx) == sorted(itertools.combinations(range(n), k))
