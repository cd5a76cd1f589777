"""Sparse multivariate polynomials with float coefficients.

Used as the exact backing store for polynomial form fields, so that
derivatives, contractions and homotopy potentials of polynomial data can be
computed without finite differences.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

Monomial = tuple[int, ...]


class Polynomial:
    """A polynomial in ``nvars`` variables stored as ``{exponents: coefficient}``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Monomial, float] | None = None):
        self.nvars = int(nvars)
        clean: dict[Monomial, float] = {}
        if terms:
            for mono, c in terms.items():
                if len(mono) != self.nvars:
                    raise ValueError(f"monomial {mono} has wrong arity for {nvars} variables")
                c = float(c)
                if c != 0.0:
                    key = tuple(int(e) for e in mono)
                    clean[key] = clean.get(key, 0.0) + c
                    if clean[key] == 0.0:
                        del clean[key]
        self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Polynomial":
        mono = [0] * nvars
        mono[index] = 1
        return cls(nvars, {tuple(mono): 1.0})

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        nvars: int,
        degree: int,
        active: Sequence[int] | None = None,
        scale: float = 1.0,
    ) -> "Polynomial":
        """Dense random polynomial of total degree <= ``degree`` in the ``active`` variables."""
        active = list(range(nvars)) if active is None else list(active)
        terms: dict[Monomial, float] = {}
        for mono in _monomials(len(active), degree):
            full = [0] * nvars
            for slot, e in zip(active, mono):
                full[slot] = e
            terms[tuple(full)] = scale * rng.uniform(-1.0, 1.0)
        return cls(nvars, terms)

    # -- inspection ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def max_exponent(self) -> int:
        return max((max(m, default=0) for m in self.terms), default=0)

    def constant_term(self) -> float:
        return self.terms.get((0,) * self.nvars, 0.0)

    def __repr__(self) -> str:
        if not self.terms:
            return f"Polynomial({self.nvars}, 0)"
        return f"Polynomial({self.nvars}, {self.terms!r})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, float(other))
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None  # mutable-looking container semantics; not hashable

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other: "Polynomial | float | int") -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials over different variable counts")
            return other
        return Polynomial.constant(self.nvars, float(other))

    def __add__(self, other: "Polynomial | float") -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial | float") -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: float) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            s = float(other)
            return Polynomial(self.nvars, {m: s * c for m, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[Monomial, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(m1, m2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "Polynomial":
        return self * (1.0 / float(s))

    def __pow__(self, power: int) -> "Polynomial":
        if power < 0 or int(power) != power:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        p = int(power)
        while p:
            if p & 1:
                result = result * base
            base = base * base
            p >>= 1
        return result

    # -- calculus ------------------------------------------------------
    def diff(self, index: int) -> "Polynomial":
        out: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            e = m[index]
            if e:
                key = m[:index] + (e - 1,) + m[index + 1 :]
                out[key] = out.get(key, 0.0) + c * e
        return Polynomial(self.nvars, out)

    def integrate_last_unit(self) -> "Polynomial":
        """Integrate over the last variable on [0, 1] and drop it."""
        out: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            key = m[:-1]
            out[key] = out.get(key, 0.0) + c / (m[-1] + 1)
        return Polynomial(self.nvars - 1, out)

    def extend(self, nvars: int) -> "Polynomial":
        """Append unused variables so the polynomial lives in ``nvars`` variables."""
        pad = (0,) * (nvars - self.nvars)
        return Polynomial(nvars, {m + pad: c for m, c in self.terms.items()})

    def substitute(self, replacements: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: replace variable ``i`` by ``replacements[i]`` (all sharing one arity)."""
        if len(replacements) != self.nvars:
            raise ValueError("need one replacement per variable")
        target = replacements[0].nvars
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(i: int, e: int) -> Polynomial:
            key = (i, e)
            if key not in cache:
                cache[key] = replacements[i] ** e
            return cache[key]

        out = Polynomial.zero(target)
        for m, c in self.terms.items():
            term = Polynomial.constant(target, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            out = out + term
        return out

    # -- evaluation ----------------------------------------------------
    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Evaluate at ``values`` of shape (N, nvars); returns shape (N,)."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if values.shape[-1] != self.nvars:
            raise ValueError(f"expected {self.nvars} columns, got {values.shape[-1]}")
        out = np.zeros(values.shape[0])
        if not self.terms:
            return out
        top = self.max_exponent()
        powers = [[np.ones(values.shape[0])] for _ in range(self.nvars)]
        for i in range(self.nvars):
            col = values[:, i]
            for _ in range(top):
                powers[i].append(powers[i][-1] * col)
        for m, c in self.terms.items():
            term = np.full(values.shape[0], c)
            for i, e in enumerate(m):
                if e:
                    term = term * powers[i][e]
            out = out + term
        return out


def _monomials(nvars: int, degree: int) -> Iterable[Monomial]:
    """All exponent tuples of total degree <= ``degree`` in graded order."""
    for total in range(degree + 1):
        yield from _monomials_exact(nvars, total)


def _monomials_exact(nvars: int, total: int) -> Iterable[Monomial]:
    if nvars == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _monomials_exact(nvars - 1, total - first):
            yield (first,) + rest
