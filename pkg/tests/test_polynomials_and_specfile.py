from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emforms.errors import ParseError
from emforms.polynomials import Polynomial
from emforms.specfile import parse_numbers, parse_polynomial, parse_spec

X = np.random.default_rng(11).uniform(-2, 2, (30, 4))
seeds = st.integers(0, 2**32 - 1)


def evaluate(text: str, pts: np.ndarray) -> np.ndarray:
    """Independent evaluator: numpy arithmetic on the same expression."""
    x, y, z, t = pts.T
    return eval(text.replace("^", "**"), {"x": x, "y": y, "z": z, "t": t})  # test-only oracle


class TestPolynomial:
    @given(seeds)
    def test_ring_laws_pointwise(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (Polynomial.random(rng, 4, 2) for _ in range(3))
        np.testing.assert_allclose((a * (b + c))(X), (a * b + a * c)(X), atol=1e-10)
        np.testing.assert_allclose((a * b)(X), a(X) * b(X), atol=1e-10)
        np.testing.assert_allclose((a - a)(X), 0.0, atol=0)
        np.testing.assert_allclose((a ** 3)(X), a(X) ** 3, rtol=1e-10, atol=1e-10)

    def test_diff_against_fd(self, rng):
        p = Polynomial.random(rng, 4, 3)
        h = 1e-6
        for i in range(4):
            step = np.zeros(4)
            step[i] = h
            fd = (p(X + step) - p(X - step)) / (2 * h)
            np.testing.assert_allclose(p.diff(i)(X), fd, atol=1e-6)

    def test_integrate_last_unit(self):
        x, s = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
        got = (x * s * s + 3.0).integrate_last_unit()
        assert got == Polynomial(1, {(1,): 1.0 / 3.0, (0,): 3.0})

    def test_substitute_composes(self, rng):
        p = Polynomial.random(rng, 2, 3)
        reps = [Polynomial.random(rng, 3, 1), Polynomial.random(rng, 3, 2)]
        pts = rng.normal(size=(10, 3))
        inner = np.stack([r(pts) for r in reps], axis=1)
        np.testing.assert_allclose(p.substitute(reps)(pts), p(inner), atol=1e-10)

    def test_division_and_bad_powers(self):
        x = Polynomial.variable(1, 0)
        assert (x / 4)(np.array([[2.0]]))[0] == 0.5
        with pytest.raises(ValueError):
            x ** -1


class TestExpressionParser:
    @pytest.mark.parametrize("text", [
        "x", "3", "-x + 2*y", "x^2*y - (z + t)^3", "2.5e-1 * x * (y - 1)", "-(x - y)^2", "+x - -y",
        "((x))", "1.5*t^4", ".5*z",
    ])
    def test_matches_numpy(self, text):
        np.testing.assert_allclose(parse_polynomial(text)(X), evaluate(text, X), rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("text, column", [
        ("x +", 4), ("x ** 2", 4), ("3 * w", 5), ("(x + y", 7), ("x^5", 3), ("x^y", 3),
        ("x^2^2", 4), ("", 1), ("x $ y", 3), ("x^1.5", 3), ("x) ", 2),
    ])
    def test_errors_carry_position(self, text, column):
        with pytest.raises(ParseError) as info:
            parse_polynomial(text, line=7)
        assert info.value.line == 7
        assert info.value.column == column

    def test_expanded_degree_cap(self):
        with pytest.raises(ParseError):
            parse_polynomial("(x^2)^3")
        assert parse_polynomial("x^4").max_exponent() == 4

    def test_numbers(self):
        assert parse_numbers("1, -2.5, 3e2") == [1.0, -2.5, 300.0]
        with pytest.raises(ParseError) as info:
            parse_numbers("1, nope", line=3, column=10)
        assert (info.value.line, info.value.column) == (3, 13)
        with pytest.raises(ParseError):
            parse_numbers("inf")


class TestSpecFile:
    TEXT = """
# comment
[fields]
B.z = 3
E.y = -3   # trailing comment
rho = x*y

[motion]
type = translation
velocity = 2, 0, 0

[controls]
depth = 3
"""

    def test_sections(self):
        spec = parse_spec(self.TEXT)
        assert set(spec.fields) == {"B.z", "E.y", "rho"}
        bx, by, bz = spec.vector("B")
        assert bz == 3.0 and bx.is_zero()
        assert spec.vector("H") is None
        assert spec.word("motion", "type", "static") == "translation"
        assert spec.numbers("motion", "velocity") == [2.0, 0.0, 0.0]
        assert spec.number("controls", "depth", 4) == 3.0

    @pytest.mark.parametrize("text, line", [
        ("B.z = 1", 1),
        ("[fields]\nQ.x = 1", 2),
        ("[fields]\nB.w = 1", 2),
        ("[bogus]", 1),
        ("[fields]\nB.z = 1\nB.z = 2", 3),
        ("[motion]\ntype = static\ntype = rotation", 3),
        ("[motion]\nomgea = 1", 2),
        ("[fields]\nB.z 1", 2),
        ("[fields\n", 1),
        ("[fields]\n\n\nE.x = (x", 4),
    ])
    def test_errors(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_spec(text)
        assert info.value.line == line

    def test_value_column_points_into_expression(self):
        with pytest.raises(ParseError) as info:
            parse_spec("[fields]\nE.x = x + q")
        assert info.value.column == 11
