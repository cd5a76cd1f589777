"""Pointwise multilinear algebra of k-covectors on R^n (n <= 4).

Coefficients are evaluation-normalized: ``apply`` on an increasing tuple of
basis vectors returns the stored coefficient directly, so ``dx^I`` acts on
vectors as the determinant of the selected component block.

The array kernels (``*_coeffs``) operate on arbitrary leading batch axes and
are shared by the field, chain and space-time modules.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from .errors import ArgumentError, UnsupportedDimensionError

MAX_DIM = 4


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"

    def flipped(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN

    def __xor__(self, other: "Parity") -> "Parity":
        return Parity.EVEN if self is other else Parity.ODD


def as_parity(p: "Parity | str") -> Parity:
    try:
        return Parity(p)
    except ValueError as exc:
        raise ArgumentError(f"unknown parity {p!r}") from exc


# ---------------------------------------------------------------------------
# index tables
# ---------------------------------------------------------------------------


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise UnsupportedDimensionError(f"ambient dimension {n} not in 1..{MAX_DIM}")


@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Strictly increasing k-tuples from range(n), lexicographically sorted."""
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def index_of(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(multi_indices(n, k))}


def _merge_sign(i: int, rest: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of moving ``i`` from the front into sorted position within ``rest``."""
    pos = sum(1 for r in rest if r < i)
    return (-1) ** pos, tuple(sorted(rest + (i,)))


@lru_cache(maxsize=None)
def wedge_table(n: int, ka: int, kb: int) -> tuple[tuple[int, int, int, int], ...]:
    """Entries (out, ia, ib, sign) with dx^I ^ dx^J = sign dx^K."""
    out_index = index_of(n, ka + kb)
    entries = []
    for ia, a in enumerate(multi_indices(n, ka)):
        for ib, b in enumerate(multi_indices(n, kb)):
            if set(a) & set(b):
                continue
            seq = a + b
            inversions = sum(1 for x in range(len(seq)) for y in range(x + 1, len(seq)) if seq[x] > seq[y])
            entries.append((out_index[tuple(sorted(seq))], ia, ib, (-1) ** inversions))
    return tuple(entries)


@lru_cache(maxsize=None)
def contract_table(n: int, k: int) -> tuple[tuple[int, int, int, int], ...]:
    """Entries (out, i, src, sign): (w . v)_J += sign * v_i * w_src, src = {i} u J."""
    src_index = index_of(n, k)
    entries = []
    for jo, rest in enumerate(multi_indices(n, k - 1)):
        for i in range(n):
            if i in rest:
                continue
            sign, merged = _merge_sign(i, rest)
            entries.append((jo, i, src_index[merged], sign))
    return tuple(entries)


@lru_cache(maxsize=None)
def derivative_table(n: int, k: int) -> tuple[tuple[int, int, int, int], ...]:
    """Entries (out, j, src, sign): (d w)_K += sign * d_j w_src, from dx^j ^ dx^src."""
    return tuple((out, j, src, sign) for out, j, src, sign in wedge_table(n, 1, k))


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------


def apply_coeffs(coeffs: np.ndarray, vectors: np.ndarray, n: int, k: int) -> np.ndarray:
    """Evaluate k-covectors on k vectors.

    ``coeffs``: (..., C(n,k)); ``vectors``: (..., k, n). Returns shape (...).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if k == 0:
        return coeffs[..., 0]
    vectors = np.asarray(vectors, dtype=float)
    idx = np.array(multi_indices(n, k))  # (C, k)
    blocks = vectors[..., :, idx]  # (..., k, C, k)
    blocks = np.moveaxis(blocks, -2, -3)  # (..., C, k, k)
    dets = _det(blocks)
    return np.einsum("...c,...c->...", coeffs, dets)


def _det(blocks: np.ndarray) -> np.ndarray:
    k = blocks.shape[-1]
    if k == 1:
        return blocks[..., 0, 0]
    if k == 2:
        return blocks[..., 0, 0] * blocks[..., 1, 1] - blocks[..., 0, 1] * blocks[..., 1, 0]
    return np.linalg.det(blocks)


def wedge_coeffs(a: np.ndarray, b: np.ndarray, n: int, ka: int, kb: int) -> np.ndarray:
    if ka + kb > n:
        raise ArgumentError(f"wedge of degrees {ka}+{kb} exceeds dimension {n}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    out = np.zeros(shape + (comb(n, ka + kb),))
    for o, ia, ib, s in wedge_table(n, ka, kb):
        out[..., o] += s * a[..., ia] * b[..., ib]
    return out


def contract_coeffs(w: np.ndarray, v: np.ndarray, n: int, k: int) -> np.ndarray:
    """Insert ``v`` (..., n) as the first argument of ``w`` (..., C(n,k))."""
    if k < 1:
        raise ArgumentError("cannot contract a degree-0 covector")
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    shape = np.broadcast_shapes(w.shape[:-1], v.shape[:-1])
    out = np.zeros(shape + (comb(n, k - 1),))
    for o, i, src, s in contract_table(n, k):
        out[..., o] += s * v[..., i] * w[..., src]
    return out


def pullback_coeffs(w: np.ndarray, jac: np.ndarray, k: int) -> np.ndarray:
    """Pull covectors back through a linear map.

    ``w``: (..., C(n,k)) on the target space R^n; ``jac``: (..., n, m) maps
    source tangents to target tangents. Returns (..., C(m,k)) with
    ``(J^* w)(a_1..a_k) = w(J a_1, .., J a_k)``.
    """
    w = np.asarray(w, dtype=float)
    jac = np.asarray(jac, dtype=float)
    n, m = jac.shape[-2], jac.shape[-1]
    if k == 0:
        return w.copy()
    rows = np.array(multi_indices(n, k))  # (Cn, k)
    cols = np.array(multi_indices(m, k))  # (Cm, k)
    if rows.size == 0 or cols.size == 0:
        return np.zeros(np.broadcast_shapes(w.shape[:-1], jac.shape[:-2]) + (comb(m, k),))
    sub = jac[..., rows[:, None, :, None], cols[None, :, None, :]]  # (..., Cn, Cm, k, k)
    minors = _det(sub)
    return np.einsum("...r,...rc->...c", w, minors)


def alternation_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KCovector:
    """An alternating k-linear map on R^n with parity metadata."""

    dim: int
    degree: int
    coeffs: np.ndarray
    parity: Parity = Parity.EVEN

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        if not 0 <= self.degree <= self.dim:
            raise ArgumentError(f"degree {self.degree} not in 0..{self.dim}")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape[0] != comb(self.dim, self.degree):
            raise ArgumentError(
                f"expected {comb(self.dim, self.degree)} coefficients, got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "parity", as_parity(self.parity))

    @classmethod
    def zero(cls, dim: int, degree: int, parity: Parity | str = Parity.EVEN) -> "KCovector":
        return cls(dim, degree, np.zeros(comb(dim, degree)), parity)

    @classmethod
    def basis(cls, dim: int, indices: Sequence[int], parity: Parity | str = Parity.EVEN) -> "KCovector":
        """``dx^{i1} ^ ... ^ dx^{ik}`` for any (possibly unsorted) index list."""
        k = len(indices)
        c = np.zeros(comb(dim, k))
        if len(set(indices)) == k:
            order = sorted(range(k), key=lambda p: indices[p])
            c[index_of(dim, k)[tuple(sorted(indices))]] = alternation_sign(order)
        return cls(dim, k, c, parity)

    @classmethod
    def scalar(cls, dim: int, value: float, parity: Parity | str = Parity.EVEN) -> "KCovector":
        return cls(dim, 0, [value], parity)

    def __repr__(self) -> str:
        terms = []
        for idx, c in zip(multi_indices(self.dim, self.degree), self.coeffs):
            if c:
                name = "^".join(f"dx{i + 1}" for i in idx) or "1"
                terms.append(f"{c:g}*{name}")
        body = " + ".join(terms) or "0"
        return f"KCovector<{self.degree},{self.dim},{self.parity.value}>({body})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KCovector):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.degree == other.degree
            and self.parity is other.parity
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    __hash__ = None

    def _compatible(self, other: "KCovector") -> None:
        if self.dim != other.dim or self.degree != other.degree:
            raise ArgumentError("covectors differ in dimension or degree")

    def __add__(self, other: "KCovector") -> "KCovector":
        self._compatible(other)
        return KCovector(self.dim, self.degree, self.coeffs + other.coeffs, self.parity)

    def __sub__(self, other: "KCovector") -> "KCovector":
        self._compatible(other)
        return KCovector(self.dim, self.degree, self.coeffs - other.coeffs, self.parity)

    def __neg__(self) -> "KCovector":
        return KCovector(self.dim, self.degree, -self.coeffs, self.parity)

    def __mul__(self, s: float) -> "KCovector":
        return KCovector(self.dim, self.degree, float(s) * self.coeffs, self.parity)

    __rmul__ = __mul__

    def with_parity(self, parity: Parity | str) -> "KCovector":
        return KCovector(self.dim, self.degree, self.coeffs, parity)

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def __call__(self, *vectors: Sequence[float]) -> float:
        return apply(self, list(vectors))


@dataclass(frozen=True)
class Metric:
    """Standard Euclidean inner product on R^n (orthonormal coordinates)."""

    dim: int = 3

    def __post_init__(self) -> None:
        _check_dim(self.dim)

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(self.dim)

    def inner(self, a: Sequence[float], b: Sequence[float]) -> float:
        a, b = _vector(a, self.dim), _vector(b, self.dim)
        return float(a @ b)


@dataclass(frozen=True)
class VolumeForm:
    """``sign * dx^1 ^ ... ^ dx^n``; flipping ``sign`` re-orients the ambient space."""

    dim: int = 3
    sign: int = 1

    def __post_init__(self) -> None:
        _check_dim(self.dim)
        if self.sign not in (1, -1):
            raise ArgumentError("volume form sign must be +1 or -1")

    @property
    def parity(self) -> Parity:
        return Parity.EVEN

    def as_covector(self) -> KCovector:
        return KCovector(self.dim, self.dim, [float(self.sign)])

    def flipped(self) -> "VolumeForm":
        return VolumeForm(self.dim, -self.sign)

    def __call__(self, *vectors: Sequence[float]) -> float:
        return apply(self.as_covector(), list(vectors))


def _vector(v: Sequence[float], dim: int) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape[0] != dim:
        raise ArgumentError(f"vector of dimension {arr.shape[0]}, expected {dim}")
    return arr


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def apply(w: KCovector, vs: Sequence[Sequence[float]]) -> float:
    if len(vs) != w.degree:
        raise ArgumentError(f"degree-{w.degree} covector applied to {len(vs)} vectors")
    if w.degree == 0:
        return float(w.coeffs[0])
    mat = np.stack([_vector(v, w.dim) for v in vs])
    return float(apply_coeffs(w.coeffs, mat, w.dim, w.degree))


def wedge(a: KCovector, b: KCovector) -> KCovector:
    if a.dim != b.dim:
        raise ArgumentError("wedge of covectors in different dimensions")
    coeffs = wedge_coeffs(a.coeffs, b.coeffs, a.dim, a.degree, b.degree)
    return KCovector(a.dim, a.degree + b.degree, coeffs, a.parity ^ b.parity)


def contract(w: KCovector, v: Sequence[float]) -> KCovector:
    if w.degree < 1:
        raise ArgumentError("cannot contract a degree-0 covector")
    vec = _vector(v, w.dim)
    return KCovector(w.dim, w.degree - 1, contract_coeffs(w.coeffs, vec, w.dim, w.degree), w.parity)


def flat(g: Metric, u: Sequence[float], parity: Parity | str = Parity.EVEN) -> KCovector:
    return KCovector(g.dim, 1, g.matrix @ _vector(u, g.dim), parity)


def mu_contract(mu: VolumeForm, u: Sequence[float], parity: Parity | str = Parity.EVEN) -> KCovector:
    if mu.dim < 2:
        raise UnsupportedDimensionError("mu_contract needs n >= 2")
    return contract(mu.as_covector(), u).with_parity(parity)


def two_form_to_vector(w: KCovector, mu: VolumeForm) -> np.ndarray:
    if w.dim != 3 or mu.dim != 3:
        raise UnsupportedDimensionError("two_form_to_vector is defined for n = 3 only")
    if w.degree != 2:
        raise ArgumentError("two_form_to_vector expects a 2-covector")
    return two_form_coeffs_to_vectors(w.coeffs, mu.sign)


def two_form_coeffs_to_vectors(coeffs: np.ndarray, sign: int = 1) -> np.ndarray:
    """Batch inverse of ``u -> mu . u`` on coefficient arrays (..., 3)."""
    c = np.asarray(coeffs, dtype=float)
    # mu.(a,b,c) = sign * (c dx^dy - b dx^dz + a dy^dz), layout (01, 02, 12)
    return np.stack([c[..., 2], -c[..., 1], c[..., 0]], axis=-1) / sign


def vectors_to_two_form_coeffs(u: np.ndarray, sign: int = 1) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return sign * np.stack([u[..., 2], -u[..., 1], u[..., 0]], axis=-1)


def cross_identity_check(u: Sequence[float], v: Sequence[float]) -> float:
    u3, v3 = _vector(u, 3), _vector(v, 3)
    mu = VolumeForm(3)
    lhs = contract(mu_contract(mu, u3), v3)
    rhs = flat(Metric(3), np.cross(u3, v3))
    basis = np.eye(3)
    return max(abs(apply(lhs, [e]) - apply(rhs, [e])) for e in basis)
