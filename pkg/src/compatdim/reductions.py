"""Isometries that make reduced effects commute or become scalar.

Both constructions work with a Hermitian basis {B_s} of the real span of
the input effects together with the identity, of dimension n+1. Vectors
x_1..x_r with <x_i|B_s x_j> = 0 for all i != j make every reduced effect
diagonal in the same basis; a Tverberg partition of the diagonal values
then mixes such vectors into ones on which every effect is scalar.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .linalg import as_matrix, dagger, is_hermitian, orthonormal_complement, random_unit_vector


class ReductionError(ValueError):
    """Dimension precondition not met; ``max_r`` is the largest r the construction supports."""

    def __init__(self, message: str, max_r: int):
        super().__init__(message)
        self.max_r = max_r


def hermitian_span_basis(effects: Sequence[np.ndarray], include_identity: bool = True,
                         tol: float = 1e-10) -> list[np.ndarray]:
    """Basis of span_R{effects, I}; the identity comes first and the rest are traceless.

    The non-identity elements are orthonormal in the Hilbert-Schmidt inner
    product and orthogonal to I.
    """
    mats = [as_matrix(e) for e in effects]
    if not mats:
        raise ValueError("need at least one effect")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d) or not is_hermitian(m, 1e-9):
            raise ValueError("effects must be Hermitian matrices of one size")
    eye = np.eye(d, dtype=complex)
    traceless = [m - np.trace(m).real / d * eye for m in mats]
    # real coordinates of Hermitian matrices: stack Re and Im parts
    vecs = np.array([np.concatenate([t.real.ravel(), t.imag.ravel()]) for t in traceless])
    basis = [eye] if include_identity else []
    if vecs.size and np.any(np.abs(vecs) > tol):
        u, s, vh = np.linalg.svd(vecs, full_matrices=False)
        rank = int(np.sum(s > tol * max(1.0, s[0])))
        for row in vh[:rank]:
            m = (row[:d * d] + 1j * row[d * d:]).reshape(d, d)
            basis.append((m + dagger(m)) / 2)
    return basis


def span_dimension(effects: Sequence[np.ndarray]) -> int:
    """dim span_R{effects, I}, i.e. n+1."""
    return len(hermitian_span_basis(effects))


@dataclass(frozen=True, eq=False)
class CommutativeReduction:
    isometry: np.ndarray        # d x r, columns x_1..x_r
    span_dim: int               # n+1
    method: str                 # greedy | root-search

    def cross_error(self, effects) -> float:
        return max_cross_element(self.isometry, effects)


def max_cross_element(v: np.ndarray, effects) -> float:
    """max over effects and i != j of |<x_i|A x_j>|."""
    worst = 0.0
    r = v.shape[1]
    off = ~np.eye(r, dtype=bool)
    for a in effects:
        m = dagger(v) @ np.asarray(a, dtype=complex) @ v
        if r > 1:
            worst = max(worst, float(np.max(np.abs(m[off]))))
    return worst


def _images(basis, xs):
    return [b @ x for x in xs for b in basis]


def _unit_in(space: np.ndarray, rng) -> np.ndarray:
    x = space @ random_unit_vector(space.shape[1], rng)
    return x / np.linalg.norm(x)


def _singular_det_vector(basis, xs, space, rng, tries: int = 20):
    """Find x in range(space) such that {B_s x} together with the images of ``xs`` do not span C^d.

    Used when the greedy count is tight. With W^perp of dimension n+1 and
    Q an orthonormal basis of W^perp, f(y) = det[Q^dagger B_s space y]_s is
    a homogeneous polynomial in y; its zeros along random complex lines are
    found by interpolation and polynomial root finding.
    """
    d = space.shape[0]
    fixed = _images(basis, xs)
    q = orthonormal_complement(fixed, d) if fixed else np.eye(d, dtype=complex)
    k = len(basis)
    if q.shape[1] < k:
        # already rank-deficient: any vector works
        return _unit_in(space, rng)
    if q.shape[1] > k:
        return None
    mats = [dagger(q) @ b @ space for b in basis]        # each (n+1) x dim(space)

    def f(y):
        return np.linalg.det(np.array([m @ y for m in mats]).T)

    nodes = np.exp(2j * np.pi * np.arange(k + 1) / (k + 1))
    best = None
    for _ in range(tries):
        a = random_unit_vector(space.shape[1], rng)
        b = random_unit_vector(space.shape[1], rng)
        vals = np.array([f(a + z * b) for z in nodes])
        coeffs = np.fft.fft(vals) / (k + 1)             # vals[m] = sum_c coeffs[c] nodes[m]^c
        poly = coeffs[::-1]
        if np.max(np.abs(poly)) < 1e-14:
            return _unit_in(space, rng)
        poly = np.trim_zeros(np.where(np.abs(poly) < 1e-14 * np.max(np.abs(poly)), 0, poly), "f")
        for z in np.roots(poly) if poly.size > 1 else []:
            y = a + z * b
            x = space @ y
            x = x / np.linalg.norm(x)
            score = np.linalg.svd(np.array([m @ (y / np.linalg.norm(space @ y)) for m in mats]).T,
                                  compute_uv=False)[-1]
            if best is None or score < best[0]:
                best = (score, x)
        if best is not None and best[0] < 1e-11:
            return best[1]
    return best[1] if best is not None else None


def commutative_reduction(effects: Sequence[np.ndarray], r: int, seed=0,
                          tol: float = 1e-9, attempts: int = 8) -> CommutativeReduction:
    """Isometry V (d x r) with <x_i|A x_j> = 0 for i != j and every input effect A.

    Greedy when d >= (n+1)(r-1)+1. When d = (n+1)(r-1) exactly, the last
    vector before the final step is chosen on the zero set of a determinant,
    found by randomized root search; otherwise a :class:`ReductionError` is
    raised with the largest supported r.
    """
    basis = hermitian_span_basis(effects)
    d = basis[0].shape[0]
    k = len(basis)
    if r < 1 or r > d:
        raise ValueError(f"need 1 <= r <= d = {d}")
    need = k * (r - 1) + 1
    if d < need - 1:
        raise ReductionError(
            f"commutative reduction needs d >= (n+1)(r-1) = {need - 1} (n+1 = {k}); "
            f"largest supported r is {1 + d // k}", 1 + d // k)
    tight = d == need - 1
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        xs = [random_unit_vector(d, rng)]
        ok = True
        for m in range(1, r):
            if tight and m == r - 1:
                space = orthonormal_complement(_images(basis, xs[:-1]), d)
                x_prev = _singular_det_vector(basis, xs[:-1], space, rng)
                if x_prev is None:
                    ok = False
                    break
                xs[-1] = x_prev
            comp = orthonormal_complement(_images(basis, xs), d, 1e-9)
            if comp.shape[1] == 0:
                # numerical rank may hide a tiny kernel: take the least singular direction
                rows = np.conj(np.array(_images(basis, xs)))
                comp = dagger(np.linalg.svd(rows)[2][-1:])
            xs.append(_unit_in(comp, rng) if comp.shape[1] > 0 else None)
            if xs[-1] is None:
                ok = False
                break
        if not ok:
            continue
        v = np.array(xs).T
        # polish orthonormality; the cross terms are unaffected at first order
        q, rr = np.linalg.qr(v)
        v = q * (np.diagonal(rr) / np.abs(np.diagonal(rr)))
        if max_cross_element(v, basis) <= tol:
            return CommutativeReduction(v, k, "root-search" if tight and r > 1 else "greedy")
    raise ReductionError(f"no reduction found to r = {r} after {attempts} attempts", 1 + (d - 1) // k)


# ---------------------------------------------------------------------------
# Tverberg partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TverbergPartition:
    parts: tuple[tuple[int, ...], ...]
    point: np.ndarray
    weights: tuple[np.ndarray, ...]      # convex weights per part, aligned with ``parts``
    residual: float
    checked: int                          # candidate partitions examined


class TverbergBudgetExceeded(RuntimeError):
    pass


def _restricted_growth(m: int, r: int):
    """Set partitions of range(m) into exactly r blocks, in lexicographic order of their RGS."""
    def rec(prefix, used):
        i = len(prefix)
        if i == m:
            if used == r:
                yield tuple(prefix)
            return
        if used + (m - i) < r:
            return
        for b in range(min(used + 1, r)):
            yield from rec(prefix + [b], max(used, b + 1))
    yield from rec([], 0)


def _hull_intersection(points: np.ndarray, parts):
    m, n = points.shape
    nv = n + m
    a_eq, b_eq = [], []
    for part in parts:
        row = np.zeros(nv)
        row[[n + j for j in part]] = 1.0
        a_eq.append(row)
        b_eq.append(1.0)
        for c in range(n):
            row = np.zeros(nv)
            row[c] = -1.0
            for j in part:
                row[n + j] = points[j, c]
            a_eq.append(row)
            b_eq.append(0.0)
    bounds = [(None, None)] * n + [(0, None)] * m
    res = linprog(np.zeros(nv), A_eq=np.array(a_eq), b_eq=np.array(b_eq), bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return res.x[:n], np.clip(res.x[n:], 0, None)


def tverberg_partition(points, r: int, budget: int = 200_000) -> TverbergPartition:
    """First partition into r parts (lexicographic RGS order) whose convex hulls meet.

    Each candidate is decided by an LP over the common point and convex
    weights; the answer is re-checked with a residual bound of 1e-8.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    m, n = pts.shape
    if r < 1:
        raise ValueError("r must be >= 1")
    if m < (r - 1) * (n + 1) + 1:
        raise ValueError(f"need at least (r-1)(n+1)+1 = {(r - 1) * (n + 1) + 1} points, got {m}")
    checked = 0
    for rgs in _restricted_growth(m, r):
        checked += 1
        if checked > budget:
            raise TverbergBudgetExceeded(f"no Tverberg partition within {budget} candidates")
        parts = tuple(tuple(j for j in range(m) if rgs[j] == b) for b in range(r))
        sol = _hull_intersection(pts, parts)
        if sol is None:
            continue
        mu, c = sol
        weights = []
        resid = 0.0
        for part in parts:
            w = c[list(part)]
            w = w / w.sum()
            weights.append(w)
            resid = max(resid, float(np.max(np.abs(w @ pts[list(part)] - mu))))
        if resid <= 1e-8:
            return TverbergPartition(parts, mu, tuple(weights), resid, checked)
    raise RuntimeError("no Tverberg partition exists for these points")


# ---------------------------------------------------------------------------
# scalar reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalarReduction:
    isometry: np.ndarray
    scalars: np.ndarray          # lambda_s per input effect
    partition: TverbergPartition | None

    def error(self, effects) -> float:
        v = self.isometry
        r = v.shape[1]
        return max(float(np.max(np.abs(dagger(v) @ np.asarray(a) @ v - lam * np.eye(r))))
                   for a, lam in zip(effects, self.scalars))


def scalar_reduction(effects: Sequence[np.ndarray], r: int, seed=0) -> ScalarReduction:
    """Isometry V (d x r) with V^dagger A_s V = lambda_s I_r for every input effect.

    Requires d >= (n+1)^2 (r-1) (the commutative step supplies (r-1)(n+1)+1
    vectors; a tight count uses the randomized root search).
    """
    mats = [as_matrix(a) for a in effects]
    basis = hermitian_span_basis(mats)
    d = basis[0].shape[0]
    k = len(basis)
    if r < 1 or r > d:
        raise ValueError(f"need 1 <= r <= d = {d}")
    if k == 1:
        v = np.eye(d, dtype=complex)[:, :r]
        return ScalarReduction(v, np.array([np.trace(a).real / d for a in mats]), None)
    m = (r - 1) * k + 1
    if d < k * (m - 1):
        raise ReductionError(f"scalar reduction needs d >= (n+1)^2 (r-1) = {k * k * (r - 1)}",
                             1 + d // (k * k))
    comm = commutative_reduction(mats, m, seed=seed)
    xs = comm.isometry
    pts = np.array([[np.real(np.conj(xs[:, j]) @ b @ xs[:, j]) for b in basis[1:]] for j in range(m)])
    part = tverberg_partition(pts, r)
    ys = []
    for idx, w in zip(part.parts, part.weights):
        ys.append(sum(np.sqrt(wj) * xs[:, j] for j, wj in zip(idx, w)))
    v = np.array(ys).T
    lam = np.array([np.real(np.conj(v[:, 0]) @ a @ v[:, 0]) for a in mats])
    return ScalarReduction(v, lam, part)
