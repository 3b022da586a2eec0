"""POVMs, tuples of POVMs, joint POVMs, uniform noise and isometric reduction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .linalg import as_matrix, check_isometry, dagger, hermitian_part, is_hermitian, op_norm


@dataclass(frozen=True, eq=False)
class Povm:
    """A finite-outcome measurement stored as an array of effects, shape (k, d, d).

    Construction only checks shapes and Hermiticity; positivity and
    normalization are reported by :func:`validate`, so invalid data can be
    loaded and inspected.
    """

    effects: np.ndarray

    def __post_init__(self):
        eff = np.array(self.effects, dtype=complex)
        if eff.ndim != 3 or eff.shape[1] != eff.shape[2] or eff.shape[0] < 1:
            raise ValueError(f"effects must have shape (k, d, d), got {eff.shape}")
        if not np.all(np.isfinite(eff)):
            raise ValueError("effects have non-finite entries")
        if not is_hermitian(eff, DEFAULT_TOL.herm * max(1.0, float(np.max(np.abs(eff))))):
            raise ValueError("effects must be Hermitian")
        eff = hermitian_part(eff)
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def k(self) -> int:
        return self.effects.shape[0]

    def __len__(self):
        return self.k

    def __getitem__(self, i):
        return self.effects[i]

    def __iter__(self):
        return iter(self.effects)


@dataclass(frozen=True, eq=False)
class PovmTuple:
    povms: tuple[Povm, ...]

    def __post_init__(self):
        povms = tuple(p if isinstance(p, Povm) else Povm(p) for p in self.povms)
        if not povms:
            raise ValueError("empty POVM tuple")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise ValueError(f"member POVMs have different dimensions {sorted(dims)}")
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def g(self) -> int:
        return len(self.povms)

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return tuple(p.k for p in self.povms)

    def __len__(self):
        return self.g

    def __getitem__(self, x) -> Povm:
        return self.povms[x]

    def __iter__(self):
        return iter(self.povms)

    def is_real(self, atol: float = 1e-14) -> bool:
        return all(np.max(np.abs(p.effects.imag), initial=0.0) <= atol for p in self.povms)


def make_tuple(*povms) -> PovmTuple:
    """Build a tuple from Povm objects or raw effect lists."""
    return PovmTuple(tuple(p if isinstance(p, Povm) else Povm(p) for p in povms))


@dataclass(frozen=True)
class PovmCheck:
    ok: bool
    min_eigenvalue: float          # worst over effects
    worst_effect: int
    normalization_residual: float  # max-abs of sum_i A_i - I

    def __bool__(self):
        return self.ok


def validate(p: Povm, tol: Tolerances = DEFAULT_TOL) -> PovmCheck:
    """Report the worst PSD violation and the normalization residual of ``p``."""
    mins = np.linalg.eigvalsh(p.effects)[:, 0]
    worst = int(np.argmin(mins))
    resid = float(np.max(np.abs(p.effects.sum(axis=0) - np.eye(p.dim))))
    ok = mins[worst] >= -tol.psd and resid <= tol.norm_sum
    return PovmCheck(bool(ok), float(mins[worst]), worst, resid)


def validate_tuple(t: PovmTuple, tol: Tolerances = DEFAULT_TOL) -> list[PovmCheck]:
    return [validate(p, tol) for p in t]


def noisy(p: Povm, t: float) -> Povm:
    """Mix ``p`` with the uniform trivial POVM: t*A_i + (1-t)*I/k."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"noise weight must lie in [0, 1], got {t}")
    return Povm(t * p.effects + (1 - t) * np.eye(p.dim)[None] / p.k)


def apply_noise(tup: PovmTuple, t) -> PovmTuple:
    """Apply the uniform-noise map with per-POVM weights ``t`` (scalar broadcasts)."""
    ts = np.broadcast_to(np.asarray(t, dtype=float), (tup.g,))
    return PovmTuple(tuple(noisy(p, float(tx)) for p, tx in zip(tup, ts)))


def reduce_povm(p: Povm, v: np.ndarray) -> Povm:
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != p.dim:
        raise ValueError(f"isometry ambient dim {v.shape[0]} != POVM dim {p.dim}")
    return Povm(dagger(v)[None] @ p.effects @ v[None])


def reduce(tup: PovmTuple, v, tol: Tolerances = DEFAULT_TOL) -> PovmTuple:
    """Reduced tuple V^dagger A V for an isometry ``v`` (d x r)."""
    v = check_isometry(v, tol)
    if v.shape[0] != tup.dim:
        raise ValueError(f"isometry ambient dim {v.shape[0]} != tuple dim {tup.dim}")
    return PovmTuple(tuple(reduce_povm(p, v) for p in tup))


@dataclass(frozen=True, eq=False)
class JointPovm:
    """Effects indexed by a multi-index; array shape (k_1, ..., k_g, d, d)."""

    effects: np.ndarray

    def __post_init__(self):
        eff = np.array(self.effects, dtype=complex)
        if eff.ndim < 3 or eff.shape[-1] != eff.shape[-2]:
            raise ValueError(f"bad joint POVM shape {eff.shape}")
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)

    @property
    def outcome_shape(self) -> tuple[int, ...]:
        return self.effects.shape[:-2]

    @property
    def dim(self) -> int:
        return self.effects.shape[-1]

    @property
    def g(self) -> int:
        return len(self.outcome_shape)

    def flat(self) -> Povm:
        return Povm(self.effects.reshape(-1, self.dim, self.dim))


def marginal(j: JointPovm, x: int) -> Povm:
    """Sum the joint POVM over all outcome axes except ``x``."""
    if not 0 <= x < j.g:
        raise IndexError(f"axis {x} out of range for {j.g} marginals")
    axes = tuple(a for a in range(j.g) if a != x)
    return Povm(j.effects.sum(axis=axes) if axes else j.effects)


def product_joint(tup: PovmTuple) -> JointPovm:
    """C_i = A_{i_1} * (I/k_2) * ... ; valid joint only when all but the first are trivial."""
    shape = tup.outcome_counts
    d = tup.dim
    out = np.zeros(shape + (d, d), dtype=complex)
    for idx in itertools.product(*(range(k) for k in shape)):
        out[idx] = tup[0][idx[0]] / np.prod(shape[1:], dtype=float)
    return JointPovm(out)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return op_norm(a @ b - b @ a)


def pairwise_commuting(tup: PovmTuple, cross_only: bool = True) -> float:
    """Max operator norm of [X, Y] over effect pairs.

    ``cross_only`` restricts to pairs from different POVMs; otherwise pairs
    within the same POVM are included as well.
    """
    worst = 0.0
    for x, y in itertools.combinations_with_replacement(range(tup.g), 2):
        if cross_only and x == y:
            continue
        for a in tup[x]:
            for b in tup[y]:
                worst = max(worst, commutator_norm(a, b))
    return worst


def von_neumann(basis: np.ndarray) -> Povm:
    """Rank-one projective POVM onto the columns of a unitary."""
    u = as_matrix(basis)
    return Povm(np.einsum("ik,jk->kij", u, np.conj(u)))


def trivial_povm(d: int, k: int) -> Povm:
    return Povm(np.repeat(np.eye(d, dtype=complex)[None] / k, k, axis=0))


def random_povm(d: int, k: int, rng: np.random.Generator, rank: int | None = None) -> Povm:
    """Random POVM: normalize k random PSD matrices by S^{-1/2} (.) S^{-1/2}."""
    rank = d if rank is None else rank
    if k * rank < d:
        raise ValueError(f"{k} effects of rank {rank} cannot sum to the identity on C^{d}")
    gs = rng.standard_normal((k, d, rank)) + 1j * rng.standard_normal((k, d, rank))
    ws = gs @ dagger(gs)
    s = ws.sum(axis=0)
    w, q = np.linalg.eigh(s)
    s_inv_half = (q / np.sqrt(w)) @ dagger(q)
    return Povm(s_inv_half[None] @ ws @ s_inv_half[None])


def nonzero_effects(p: Povm, atol: float) -> list[int]:
    return [i for i, a in enumerate(p.effects) if op_norm(a) > atol]


def iter_multi_index(shape: Iterable[int]):
    return itertools.product(*(range(k) for k in shape))


def as_tuple(obj) -> PovmTuple:
    if isinstance(obj, PovmTuple):
        return obj
    if isinstance(obj, Povm):
        return PovmTuple((obj,))
    if isinstance(obj, Sequence):
        return make_tuple(*obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a POVM tuple")
