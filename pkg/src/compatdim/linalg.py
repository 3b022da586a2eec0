"""Dense complex linear algebra helpers.

Matrices are plain ``numpy`` arrays of dtype complex128. Isometries and
subspaces are both stored as ``d x r`` arrays with orthonormal columns; a
subspace is identified with the range of its basis matrix.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite 2-d complex array (copy)."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m: np.ndarray, atol: float = DEFAULT_TOL.herm) -> bool:
    m = np.asarray(m)
    return m.shape[-1] == m.shape[-2] and float(np.max(np.abs(m - dagger(m)), initial=0.0)) <= atol


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + dagger(m)) / 2


def eig_hermitian(m, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(w, Q)`` with ascending real eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``Q`` so that ``m = Q diag(w) Q^dagger``.
    """
    m = as_matrix(m)
    if not is_hermitian(m, tol.herm):
        raise ValueError("eig_hermitian: input is not Hermitian")
    w, q = np.linalg.eigh(hermitian_part(m))
    return w, q


def lambda_min(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(np.asarray(m, dtype=complex)))[0])


def op_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def kernel(m, tol: float = DEFAULT_TOL.kernel) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical right null space of ``m``.

    A right-singular direction belongs to the kernel when its singular value
    is at most ``tol`` times the largest singular value. A zero matrix has
    the full space as kernel.
    """
    if tol <= 0:
        raise ValueError("kernel tolerance must be positive")
    m = as_matrix(m)
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(cols, dtype=complex)
    rank = int(np.sum(s > tol * smax))
    return dagger(vh[rank:])


def orthonormalize(z: np.ndarray) -> np.ndarray:
    """Closest isometry to ``z`` (polar factor), columns orthonormal."""
    u, _, vh = np.linalg.svd(np.asarray(z, dtype=complex), full_matrices=False)
    return u @ vh


def orthonormal_complement(vectors: Sequence[np.ndarray] | np.ndarray, d: int,
                           tol: float = DEFAULT_TOL.kernel) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(vectors)`` in C^d."""
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if not vecs:
        return np.eye(d, dtype=complex)
    stack = np.array(vecs)
    if stack.shape[1] != d:
        raise ValueError("vectors do not live in C^d")
    # complement of the row space = right kernel of conj rows
    if not np.any(stack):
        return np.eye(d, dtype=complex)
    return kernel(np.conj(stack), tol)


def is_isometry(v: np.ndarray, atol: float = DEFAULT_TOL.iso) -> bool:
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[1] > v.shape[0]:
        return False
    gram = dagger(v) @ v
    return float(np.max(np.abs(gram - np.eye(v.shape[1])), initial=0.0)) <= atol


def check_isometry(v, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    v = as_matrix(v)
    if v.shape[1] > v.shape[0]:
        raise ValueError(f"isometry must have r <= d, got shape {v.shape}")
    if not is_isometry(v, tol.iso):
        raise ValueError("columns are not orthonormal")
    return v


def haar_isometry(d: int, r: int, seed=None) -> np.ndarray:
    """Haar-distributed isometry C^r -> C^d (first r columns of a Haar unitary)."""
    if r > d or r < 0:
        raise ValueError(f"need 0 <= r <= d, got r={r}, d={d}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))) / np.sqrt(2)
    q, rr = np.linalg.qr(z)
    ph = np.diagonal(rr).copy()
    ph[ph == 0] = 1.0
    q = q * (ph / np.abs(ph))
    # one Gram-Schmidt polish keeps V^dagger V = I at ~1e-15
    return orthonormalize(q)


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + dagger(z)) / 2


def ket(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, np.conj(v))
