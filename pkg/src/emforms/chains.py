"""Oriented simplicial chains, boundary, refinement and Riemann-style integrals.

A :class:`Chain` stores its simplices as stacked arrays so refinement and
quadrature vectorise over all sub-simplices. Inner orientation is the vertex
order times ``signs``; outer orientation is a constant transversal frame per
simplex (``frames``, shape (S, n-k, n)).

Integrals use the barycenter rule on the depth-fold edgewise subdivision:
each sub-simplex contributes ``f(barycenter)(e_1..e_k) / k!``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from .errors import ArgumentError, ConfigurationError, ParityError
from .exterior_algebra import Parity, VolumeForm, alternation_sign, apply_coeffs
from .form_fields import FormField, exterior_derivative

log = logging.getLogger(__name__)

_DEGENERACY_RTOL = 1e-12
_CHUNK = 1 << 17


@dataclass(frozen=True, eq=False)
class Simplex:
    vertices: np.ndarray
    inner_orientation: int = 1
    outer_frame: np.ndarray | None = None

    def __post_init__(self) -> None:
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2:
            raise ArgumentError("simplex vertices must be a (k+1, n) array")
        object.__setattr__(self, "vertices", v)
        if self.inner_orientation not in (1, -1):
            raise ArgumentError("inner orientation must be +1 or -1")
        if self.outer_frame is not None:
            fr = np.array(self.outer_frame, dtype=float).reshape(-1, v.shape[1])
            if fr.shape[0] != v.shape[1] - (v.shape[0] - 1):
                raise ArgumentError("outer frame must hold n - k vectors")
            object.__setattr__(self, "outer_frame", fr)

    @property
    def degree(self) -> int:
        return self.vertices.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def edges(self) -> np.ndarray:
        return self.vertices[1:] - self.vertices[0]


@dataclass
class Diagnostics:
    """Counters filled in by integration routines."""

    degenerate: int = 0
    evaluations: int = 0


@dataclass(frozen=True, eq=False)
class Chain:
    degree: int
    dim: int
    weights: np.ndarray
    vertices: np.ndarray
    signs: np.ndarray
    frames: np.ndarray | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.int64).reshape(-1)
        v = np.asarray(self.vertices, dtype=float).reshape(w.shape[0], self.degree + 1, self.dim)
        s = np.asarray(self.signs, dtype=np.int64).reshape(-1)
        if s.shape != w.shape:
            raise ArgumentError("signs and weights differ in length")
        if np.any((s != 1) & (s != -1)):
            raise ArgumentError("inner orientation signs must be +1 or -1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "signs", s)
        if self.frames is not None:
            fr = np.asarray(self.frames, dtype=float).reshape(w.shape[0], self.dim - self.degree, self.dim)
            object.__setattr__(self, "frames", fr)

    # -- construction --------------------------------------------------
    @classmethod
    def empty(cls, degree: int, dim: int, outer: bool = False) -> "Chain":
        frames = np.zeros((0, dim - degree, dim)) if outer else None
        return cls(degree, dim, np.zeros(0, dtype=np.int64), np.zeros((0, degree + 1, dim)), np.zeros(0), frames)

    @classmethod
    def from_simplices(cls, terms: Sequence[tuple[int, Simplex]] | Sequence[Simplex]) -> "Chain":
        pairs = [(1, t) if isinstance(t, Simplex) else (int(t[0]), t[1]) for t in terms]
        if not pairs:
            raise ArgumentError("use Chain.empty for chains without simplices")
        k, n = pairs[0][1].degree, pairs[0][1].dim
        if any(s.degree != k or s.dim != n for _, s in pairs):
            raise ArgumentError("all simplices in a chain must share degree and dimension")
        has_frame = [s.outer_frame is not None for _, s in pairs]
        if any(has_frame) and not all(has_frame):
            raise ConfigurationError("either every simplex or none carries an outer frame")
        frames = np.stack([s.outer_frame for _, s in pairs]) if all(has_frame) else None
        return cls(
            k,
            n,
            np.array([w for w, _ in pairs]),
            np.stack([s.vertices for _, s in pairs]),
            np.array([s.inner_orientation for _, s in pairs]),
            frames,
        )

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    @property
    def is_outer(self) -> bool:
        return self.frames is not None

    @property
    def terms(self) -> list[tuple[int, Simplex]]:
        return list(self)

    def __iter__(self) -> Iterator[tuple[int, Simplex]]:
        for i in range(len(self)):
            frame = None if self.frames is None else self.frames[i]
            yield int(self.weights[i]), Simplex(self.vertices[i], int(self.signs[i]), frame)

    def __neg__(self) -> "Chain":
        return Chain(self.degree, self.dim, -self.weights, self.vertices, self.signs, self.frames)

    def __add__(self, other: "Chain") -> "Chain":
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise ArgumentError("chains differ in degree or dimension")
        if self.is_outer != other.is_outer:
            raise ConfigurationError("cannot add an outer-oriented chain to a bare one")
        frames = None if self.frames is None else np.concatenate([self.frames, other.frames])
        return Chain(
            self.degree,
            self.dim,
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.vertices, other.vertices]),
            np.concatenate([self.signs, other.signs]),
            frames,
        )

    def flip_inner(self) -> "Chain":
        return Chain(self.degree, self.dim, self.weights, self.vertices, -self.signs, self.frames)

    def flip_outer(self) -> "Chain":
        if self.frames is None:
            raise ConfigurationError("chain carries no outer orientation")
        if self.degree == self.dim:
            # an empty frame has nothing to reverse; the sign comes from mu alone
            raise ConfigurationError("top-degree chains have no outer frame to flip (flip mu instead)")
        frames = self.frames.copy()
        frames[:, -1, :] *= -1.0
        return Chain(self.degree, self.dim, self.weights, self.vertices, self.signs, frames)

    def with_frames(self, frames: np.ndarray | Sequence[Sequence[float]]) -> "Chain":
        fr = np.asarray(frames, dtype=float)
        if fr.ndim == 2:
            fr = np.broadcast_to(fr, (len(self),) + fr.shape)
        return Chain(self.degree, self.dim, self.weights, self.vertices, self.signs, fr)

    def without_frames(self) -> "Chain":
        return Chain(self.degree, self.dim, self.weights, self.vertices, self.signs, None)

    def translated(self, offset: Sequence[float]) -> "Chain":
        return self.mapped(lambda p: p + np.asarray(offset, dtype=float))

    def mapped(self, fn) -> "Chain":
        """Apply a point map to every vertex (frames are kept as given)."""
        pts = fn(self.vertices.reshape(-1, self.dim)).reshape(self.vertices.shape)
        return Chain(self.degree, self.dim, self.weights, pts, self.signs, self.frames)

    def signed_volumes(self) -> np.ndarray:
        """Per-simplex weight * inner sign * oriented k-volume (Gram-based for k < n)."""
        e = self.vertices[:, 1:, :] - self.vertices[:, :1, :]
        k = self.degree
        if k == 0:
            return (self.weights * self.signs).astype(float)
        if k == self.dim:
            vol = np.linalg.det(e) / math.factorial(k)
        else:
            gram = np.einsum("sin,sjn->sij", e, e)
            vol = np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / math.factorial(k)
        return self.weights * self.signs * vol


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _base_subdivision(k: int) -> np.ndarray:
    """Barycentric matrices (2^k, k+1, k+1) of the edgewise (Freudenthal) subdivision.

    Works in Kuhn coordinates 1 >= y_1 >= ... >= y_k >= 0 of the reference
    simplex; the doubled region is cut into unit-cube Kuhn simplices, and each
    child is reordered, if needed, to keep the parent's orientation.
    """
    if k == 0:
        return np.ones((1, 1, 1))
    children = []
    for corner in np.ndindex(*([2] * k)):
        for perm in permutations(range(k)):
            pts = [np.array(corner, dtype=float)]
            for axis in perm:
                nxt = pts[-1].copy()
                nxt[axis] += 1.0
                pts.append(nxt)
            if all(np.all(np.diff(p) <= 0) for p in pts):
                children.append(np.stack(pts) / 2.0)
    rows = []
    for pts in children:
        bary = np.empty((k + 1, k + 1))
        for r, y in enumerate(pts):
            bary[r, 0] = 1.0 - y[0]
            for j in range(1, k):
                bary[r, j] = y[j - 1] - y[j]
            bary[r, k] = y[k - 1]
        if np.linalg.det(bary) < 0:
            bary[[-2, -1]] = bary[[-1, -2]]
        rows.append(bary)
    table = np.stack(rows)
    assert table.shape[0] == 2**k
    return table


@lru_cache(maxsize=None)
def subdivision_table(k: int, depth: int) -> np.ndarray:
    """Barycentric matrices of all descendants after ``depth`` refinements."""
    if depth < 0:
        raise ArgumentError("depth must be non-negative")
    table = np.eye(k + 1)[None]
    base = _base_subdivision(k)
    for _ in range(depth):
        table = np.einsum("cij,pjk->pcik", base, table).reshape(-1, k + 1, k + 1)
    table.setflags(write=False)
    return table


def refine(c: Chain, depth: int = 1) -> Chain:
    table = subdivision_table(c.degree, depth)
    m = table.shape[0]
    verts = np.einsum("mij,sjn->smin", table, c.vertices).reshape(-1, c.degree + 1, c.dim)
    frames = None if c.frames is None else np.repeat(c.frames, m, axis=0)
    return Chain(c.degree, c.dim, np.repeat(c.weights, m), verts, np.repeat(c.signs, m), frames)


# ---------------------------------------------------------------------------
# boundary
# ---------------------------------------------------------------------------


def boundary(c: Chain) -> Chain:
    k, n = c.degree, c.dim
    if k == 0:
        return Chain.empty(0, n, outer=c.is_outer)
    faces: list[tuple[int, np.ndarray, int, np.ndarray | None]] = []
    for s in range(len(c)):
        verts = c.vertices[s]
        for i in range(k + 1):
            face = np.delete(verts, i, axis=0)
            frame = None
            if c.frames is not None:
                outward = face.mean(axis=0) - verts[i]
                frame = np.vstack([c.frames[s], (-1) ** i * outward[None, :]])
            faces.append(((-1) ** i * int(c.weights[s]), face, int(c.signs[s]), frame))
    return _collect(faces, k - 1, n, c.is_outer)


def _outer_sign(frame: np.ndarray, face: np.ndarray) -> int:
    edges = face[1:] - face[0]
    det = np.linalg.det(np.vstack([frame, edges]))
    return 1 if det > 0 else -1


def _collect(faces, k: int, n: int, outer: bool) -> Chain:
    """Canonicalize vertex order and cancel opposite faces."""
    groups: dict[tuple, list] = {}
    for w, face, sign, frame in faces:
        keys = [tuple(p) for p in face]
        order = sorted(range(len(keys)), key=lambda j: keys[j])
        parity = alternation_sign(order)
        canon = face[order]
        groups.setdefault(tuple(keys[j] for j in order), []).append((w, canon, sign, parity, frame))
    weights, verts, signs, frames = [], [], [], []

    def emit(w, v, s, fr):
        weights.append(w)
        verts.append(v)
        signs.append(s)
        frames.append(fr)

    for members in groups.values():
        canon = members[0][1]
        inner = sum(w * s * p for w, _, s, p, _ in members)
        if not outer:
            if inner:
                emit(inner, canon, 1, None)
            continue
        outer_sum = 0
        for w, _, _, _, fr in members:
            outer_sum += w * _outer_sign(fr, canon)
        if inner == 0 and outer_sum == 0:
            continue
        if len(members) == 1:
            w, _, s, p, fr = members[0]
            emit(w, canon, s * p, fr)
            continue
        if abs(inner) == abs(outer_sum):
            fr0 = members[0][4]
            w = outer_sum * _outer_sign(fr0, canon)
            emit(w, canon, inner // w, fr0)
        else:
            for w, _, s, p, fr in members:
                emit(w, canon, s * p, fr)
    if not weights:
        return Chain.empty(k, n, outer=outer)
    return Chain(
        k,
        n,
        np.array(weights),
        np.stack(verts),
        np.array(signs),
        np.stack(frames) if outer else None,
    )


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _degenerate_mask(c: Chain) -> np.ndarray:
    if c.degree == 0 or len(c) == 0:
        return np.zeros(len(c), dtype=bool)
    e = c.vertices[:, 1:, :] - c.vertices[:, :1, :]
    sv = np.linalg.svd(e, compute_uv=False)
    return sv[:, -1] <= _DEGENERACY_RTOL * np.maximum(sv[:, 0], np.finfo(float).tiny)


def _simplex_values(f: FormField, c: Chain, depth: int, t: float) -> np.ndarray:
    """Unsigned per-simplex midpoint sums, shape (S,)."""
    k, n = c.degree, c.dim
    table = subdivision_table(k, depth)
    m = table.shape[0]
    per_chunk = max(1, _CHUNK // m)
    scale = 1.0 / math.factorial(k)
    out = np.empty(len(c))
    for start in range(0, len(c), per_chunk):
        block = c.vertices[start : start + per_chunk]
        sub = np.einsum("mij,sjn->smin", table, block)  # (S, M, k+1, n)
        bary = sub.mean(axis=2).reshape(-1, n)
        coeffs = f(bary, t)
        if k == 0:
            vals = coeffs[:, 0]
        else:
            edges = (sub[:, :, 1:, :] - sub[:, :, :1, :]).reshape(-1, k, n)
            vals = apply_coeffs(coeffs, edges, n, k)
        out[start : start + per_chunk] = np.sum(vals.reshape(block.shape[0], m) * scale, axis=1)
    return out


def _check_degree(f: FormField, c: Chain) -> None:
    if f.degree != c.degree or f.dim != c.dim:
        raise ArgumentError(
            f"cannot integrate a {f.degree}-form on R^{f.dim} over a {c.degree}-chain in R^{c.dim}"
        )


def _reduce(terms: np.ndarray) -> float:
    return math.fsum(terms.tolist())


def integrate_inner(
    f: FormField, c: Chain, depth: int = 0, t: float = 0.0, diagnostics: Diagnostics | None = None
) -> float:
    """Integral of an even form over an inner-oriented chain."""
    if f.parity is not Parity.EVEN:
        raise ParityError("odd forms integrate over outer-oriented chains (use integrate_outer)")
    _check_degree(f, c)
    if len(c) == 0:
        return 0.0
    degenerate = _degenerate_mask(c)
    _note_degenerate(degenerate, diagnostics)
    values = _simplex_values(f, c, depth, t)
    values[degenerate] = 0.0
    if diagnostics is not None:
        diagnostics.evaluations += len(c) * subdivision_table(c.degree, depth).shape[0]
    return _reduce(c.weights * c.signs * values)


def outer_signs(c: Chain, mu: VolumeForm) -> np.ndarray:
    """SIGN(mu(n_1..n_{n-k}, e_1..e_k)) per simplex; 0 for degenerate simplices."""
    if c.frames is None:
        raise ConfigurationError("outer integration needs an outer frame on every simplex")
    if mu.dim != c.dim:
        raise ArgumentError("volume form dimension differs from chain dimension")
    e = c.vertices[:, 1:, :] - c.vertices[:, :1, :]
    mats = np.concatenate([c.frames, e], axis=1)
    dets = np.linalg.det(mats) if len(c) else np.zeros(0)
    scale = np.prod(np.linalg.norm(mats, axis=2), axis=1) if len(c) else np.zeros(0)
    degenerate = _degenerate_mask(c)
    bad = (np.abs(dets) <= _DEGENERACY_RTOL * scale) & ~degenerate
    if np.any(bad):
        raise ConfigurationError("outer frame is not transversal to its simplex")
    signs = np.where(dets > 0, 1, -1) * mu.sign
    signs[degenerate] = 0
    return signs


def integrate_outer(
    f: FormField,
    c: Chain,
    mu: VolumeForm | None = None,
    depth: int = 0,
    t: float = 0.0,
    diagnostics: Diagnostics | None = None,
) -> float:
    """Integral of an odd form over an outer-oriented chain."""
    if f.parity is not Parity.ODD:
        raise ParityError("even forms integrate over inner-oriented chains (use integrate_inner)")
    _check_degree(f, c)
    mu = VolumeForm(c.dim) if mu is None else mu
    if c.frames is None:
        raise ConfigurationError("outer integration needs an outer frame on every simplex")
    if len(c) == 0:
        return 0.0
    signs = outer_signs(c, mu)
    _note_degenerate(signs == 0, diagnostics)
    values = _simplex_values(f, c, depth, t)
    values[signs == 0] = 0.0
    return _reduce(c.weights * signs * values)


def integrate(f: FormField, c: Chain, depth: int = 0, t: float = 0.0, mu: VolumeForm | None = None) -> float:
    """Route to the inner or outer integral by the parity of ``f``."""
    if f.parity is Parity.EVEN:
        return integrate_inner(f, c, depth, t)
    return integrate_outer(f, c, mu, depth, t)


def _note_degenerate(mask: np.ndarray, diagnostics: Diagnostics | None) -> None:
    count = int(np.count_nonzero(mask))
    if count:
        log.warning("%d degenerate simplices contribute 0", count)
        if diagnostics is not None:
            diagnostics.degenerate += count


def stokes_residual(
    f: FormField, c: Chain, depth: int = 0, t: float = 0.0, mu: VolumeForm | None = None
) -> float:
    """|int_c df - int_{dc} f| with both integrals at the same depth."""
    if f.degree != c.degree - 1:
        raise ArgumentError("stokes_residual needs a (k-1)-form and a k-chain")
    interior = integrate(exterior_derivative(f), c, depth, t, mu)
    edge = integrate(f, boundary(c), depth, t, mu)
    return abs(interior - edge)


# ---------------------------------------------------------------------------
# standard chains
# ---------------------------------------------------------------------------


def segment(a: Sequence[float], b: Sequence[float]) -> Chain:
    return Chain.from_simplices([Simplex(np.array([a, b], dtype=float))])


def triangle(a: Sequence[float], b: Sequence[float], c: Sequence[float], frame: Sequence[float] | None = None) -> Chain:
    fr = None if frame is None else np.asarray(frame, dtype=float).reshape(1, -1)
    return Chain.from_simplices([Simplex(np.array([a, b, c], dtype=float), 1, fr)])


def rectangle(
    lo: Sequence[float] = (0.0, 0.0), hi: Sequence[float] = (1.0, 1.0), z: float | None = None, outer: bool = True
) -> Chain:
    """Axis-aligned rectangle as two CCW triangles; in R^3 it sits in the plane ``z``.

    In R^3 the outer frame is +e_3 (matching the CCW inner orientation); in
    R^2 the outer frame is empty.
    """
    x0, y0 = lo
    x1, y1 = hi
    if z is None:
        pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        frame = np.zeros((0, 2))
    else:
        pts = [(x0, y0, z), (x1, y0, z), (x1, y1, z), (x0, y1, z)]
        frame = np.array([[0.0, 0.0, 1.0]])
    p = np.array(pts, dtype=float)
    tris = [p[[0, 1, 2]], p[[0, 2, 3]]]
    return Chain.from_simplices([Simplex(v, 1, frame if outer else None) for v in tris])


def unit_square(dim: int = 2) -> Chain:
    return rectangle(z=None if dim == 2 else 0.0)


def box(lo: Sequence[float] = (0.0, 0.0, 0.0), hi: Sequence[float] = (1.0, 1.0, 1.0)) -> Chain:
    """Axis-aligned box as six positively oriented Kuhn tetrahedra (empty outer frames)."""
    lo = np.asarray(lo, dtype=float)
    size = np.asarray(hi, dtype=float) - lo
    n = lo.shape[0]
    simplices = []
    for perm in permutations(range(n)):
        pts = [lo.copy()]
        for axis in perm:
            nxt = pts[-1].copy()
            nxt[axis] += size[axis]
            pts.append(nxt)
        v = np.stack(pts)
        if np.linalg.det(v[1:] - v[0]) < 0:
            v[[-2, -1]] = v[[-1, -2]]
        simplices.append(Simplex(v, 1, np.zeros((0, n))))
    return Chain.from_simplices(simplices)


def unit_cube() -> Chain:
    return box()


def disk_fan(radius: float = 1.0, segments: int = 32, center: Sequence[float] = (0.0, 0.0, 0.0)) -> Chain:
    """Polygonal disk in the plane z = center[2] as a CCW triangle fan with frame +e_3."""
    c = np.asarray(center, dtype=float)
    angles = np.linspace(0.0, 2.0 * np.pi, segments + 1)
    ring = np.stack([c[0] + radius * np.cos(angles), c[1] + radius * np.sin(angles), np.full_like(angles, c[2])], axis=1)
    frame = np.array([[0.0, 0.0, 1.0]])
    return Chain.from_simplices([Simplex(np.stack([c, ring[i], ring[i + 1]]), 1, frame) for i in range(segments)])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt_vec(v: np.ndarray) -> str:
    return " ".join(repr(float(x)) for x in v)


def dumps(c: Chain) -> str:
    """Line-oriented text form: header, then one simplex per line.

    ``weight sign | v0 ; v1 ; ... [| f1 ; f2 ...]`` with shortest round-trip
    floats. A trailing ``|`` with nothing after it is an empty (top-degree) frame.
    """
    lines = [f"chain {c.degree} {c.dim}"]
    for i in range(len(c)):
        verts = " ; ".join(_fmt_vec(v) for v in c.vertices[i])
        line = f"{int(c.weights[i])} {int(c.signs[i]):+d} | {verts}"
        if c.frames is not None:
            line += " |" + ("" if c.frames.shape[1] == 0 else " " + " ; ".join(_fmt_vec(f) for f in c.frames[i]))
        lines.append(line)
    return "\n".join(lines) + "\n"


def loads(text: str) -> Chain:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not rows or not rows[0].startswith("chain"):
        raise ArgumentError("chain text must start with 'chain <degree> <dim>'")
    try:
        _, k_str, n_str = rows[0].split()
        k, n = int(k_str), int(n_str)
    except ValueError as exc:
        raise ArgumentError(f"bad chain header {rows[0]!r}") from exc
    terms = []
    for row in rows[1:]:
        parts = [p.strip() for p in row.split("|")]
        head = parts[0].split()
        if len(head) != 2 or len(parts) not in (2, 3):
            raise ArgumentError(f"bad simplex record {row!r}")
        weight, sign = int(head[0]), int(head[1])
        verts = np.array([[float(x) for x in v.split()] for v in parts[1].split(";")])
        frame = None
        if len(parts) == 3:
            frame = (
                np.zeros((0, n))
                if parts[2] == ""
                else np.array([[float(x) for x in v.split()] for v in parts[2].split(";")])
            )
        terms.append((weight, Simplex(verts, sign, frame)))
    if not terms:
        return Chain.empty(k, n)
    c = Chain.from_simplices(terms)
    if (c.degree, c.dim) != (k, n):
        raise ArgumentError("chain header does not match its simplices")
    return c
