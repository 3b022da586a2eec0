"""Structured bases, spin systems and structured isometries."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cloning import in_gamma_clone
from .compat import COMPATIBLE, joint_measurability
from .config import DEFAULT_TOL, Tolerances
from .linalg import as_matrix, dagger, kernel, op_norm
from .povm import Povm, PovmTuple, apply_noise, reduce, von_neumann

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def fourier_matrix(d: int) -> np.ndarray:
    """F_d(a, b) = omega^{ab} / sqrt(d), omega = exp(2 pi i / d)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    a = np.arange(d)
    return np.exp(2j * np.pi * np.outer(a, a) / d) / np.sqrt(d)


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and \
        float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))) <= atol


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, int(n ** 0.5) + 1))


# ---------------------------------------------------------------------------
# mutually unbiased bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MubFamily:
    dim: int
    bases: tuple[np.ndarray, ...]       # unitaries, basis vectors in the columns

    def __post_init__(self):
        d = self.dim
        for b in self.bases:
            if not is_unitary(b):
                raise ValueError("MUB family member is not unitary")
        worst = unbiasedness_error(self.bases, d)
        if worst > 1e-9:
            raise ValueError(f"bases are not mutually unbiased (error {worst:.3g})")

    def povms(self) -> PovmTuple:
        return PovmTuple(tuple(von_neumann(b) for b in self.bases))


def unbiasedness_error(bases, d: int) -> float:
    worst = 0.0
    for b, c in itertools.combinations(bases, 2):
        worst = max(worst, float(np.max(np.abs(np.abs(dagger(b) @ c) ** 2 - 1.0 / d))))
    return worst


def mub_family(d: int, m: int) -> MubFamily:
    """m mutually unbiased bases in prime dimension d.

    d = 2: eigenbases of Z, X, Y. Odd prime d: the computational basis
    followed by bases with vectors omega^{a j^2 + b j}/sqrt(d), a = 0, 1, ...
    (a = 0 is the Fourier basis).
    """
    if not _is_prime(d):
        raise ValueError(f"mub_family needs a prime dimension, got {d}")
    if not 1 <= m <= d + 1:
        raise ValueError(f"need 1 <= m <= d+1 = {d + 1}, got {m}")
    if d == 2:
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        y = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
        return MubFamily(2, (np.eye(2, dtype=complex), h, y)[:m])
    j = np.arange(d)
    bases = [np.eye(d, dtype=complex)]
    for a in range(m - 1):
        phase = (a * j[:, None] ** 2 + j[:, None] * j[None, :]) % d
        bases.append(np.exp(2j * np.pi * phase / d) / np.sqrt(d))
    return MubFamily(d, tuple(bases))


def mub_truncation_isometry(third_basis, r: int) -> np.ndarray:
    """Isometry onto the span of the first r vectors of ``third_basis``."""
    c = as_matrix(third_basis)
    if not 1 <= r <= c.shape[1]:
        raise ValueError(f"need 1 <= r <= {c.shape[1]}, got {r}")
    return c[:, :r].copy()


@dataclass(frozen=True)
class LambdaInterval:
    lo: float      # open end
    hi: float      # closed end

    @property
    def nonempty(self) -> bool:
        return self.lo < self.hi

    def __contains__(self, lam) -> bool:
        return self.lo < lam <= self.hi

    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def lambda_interval(r: int, d: int) -> LambdaInterval:
    """Noise levels where two noisy MUBs are incompatible yet compatible after truncation to r dims."""
    if r < 2:
        raise ValueError("r must be >= 2")
    sd = np.sqrt(d)
    return LambdaInterval(float((2 + sd) / (2 * (1 + sd))), (2 + r) / (2 * (1 + r)))


def mub_region_compatible(lam: float, mu: float, d: int) -> bool:
    """Closed-form compatibility of noisy computational/Fourier bases."""
    # boundary points are compatible; allow round-off on the curve
    return lam + mu <= 1 + 1e-12 or mub_region_distance(lam, mu, d) <= 1e-12


def mub_region_distance(lam: float, mu: float, d: int) -> float:
    """Signed value of the second region inequality; zero on the curved boundary."""
    return lam ** 2 + mu ** 2 + 2 * (d - 2) / d * (1 - lam) * (1 - mu) - 1


def mub_symmetric_threshold(d: int) -> float:
    return 0.5 * (1 + 1 / (1 + np.sqrt(d)))


@dataclass(frozen=True)
class DeltaMembership:
    status: str                     # member | unknown
    isometry: np.ndarray | None
    method: str


def delta_region_member(tup: PovmTuple, r: int, s, extra_basis, budget=None,
                        tol: Tolerances = DEFAULT_TOL) -> DeltaMembership:
    """Is some r-dimensional reduction of the noisy MUB tuple N_s[tup] compatible?

    Certified through truncation of ``extra_basis`` when s lies in the cloning
    region on C^r; otherwise a randomized search, which may return unknown.
    """
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.size != tup.g:
        raise ValueError("one noise parameter per POVM")
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("noise parameters must lie in [0, 1]")
    noisy_tup = apply_noise(tup, s)
    v = mub_truncation_isometry(extra_basis, r)
    if np.all(s == 0) or r == 1:
        return DeltaMembership("member", v, "trivial")
    if unbiasedness_error(tuple(_basis_of(p) for p in tup) + (as_matrix(extra_basis),), tup.dim) > 1e-9:
        raise ValueError("tuple plus extra basis is not a MUB family")
    if in_gamma_clone(s, r, tol).member:
        rep = joint_measurability(reduce(noisy_tup, v, tol), tol)
        if rep.verdict == COMPATIBLE:
            return DeltaMembership("member", v, "truncation+cloning")
    from .search import SearchBudget, certify_R_at_least
    res = certify_R_at_least(noisy_tup, r, budget or SearchBudget(restarts=4, local_steps=10), tol=tol)
    if res.found:
        return DeltaMembership("member", res.isometry, "search")
    return DeltaMembership("unknown", None, "search-exhausted")


def _basis_of(p: Povm) -> np.ndarray:
    """Recover the basis of a rank-one von Neumann POVM (columns up to phase)."""
    cols = []
    for a in p:
        w, q = np.linalg.eigh(a)
        if abs(w[-1] - 1) > 1e-9 or (w.size > 1 and abs(w[-2]) > 1e-9):
            raise ValueError("POVM is not a rank-one projective measurement")
        cols.append(q[:, -1])
    return np.array(cols).T


# ---------------------------------------------------------------------------
# generalized permutations and the kernel bound for two bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GeneralizedPermutation:
    z: np.ndarray
    sigma: tuple[int, ...]

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex).reshape(-1)
        sig = tuple(int(i) for i in self.sigma)
        if sorted(sig) != list(range(len(sig))) or len(sig) != z.size:
            raise ValueError("sigma must be a permutation of range(d) matching len(z)")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "sigma", sig)

    @property
    def dim(self) -> int:
        return self.z.size

    def matrix(self) -> np.ndarray:
        """P(i, j) = z_j delta_{i, sigma(j)}."""
        d = self.dim
        p = np.zeros((d, d), dtype=complex)
        p[list(self.sigma), np.arange(d)] = self.z
        return p


@dataclass(frozen=True, eq=False)
class ZetaBound:
    r: int
    perm: GeneralizedPermutation | None
    subspace: np.ndarray          # d x r orthonormal basis
    strategy: str


def zeta_subspace(u: np.ndarray, perm: GeneralizedPermutation, tol: float = DEFAULT_TOL.kernel) -> np.ndarray:
    """Subspace E with V^dagger (U - P) = 0 for every isometry V onto E.

    On E the reduced basis vectors satisfy V^dagger u_j = z_j V^dagger e_{sigma(j)},
    so both reduced von Neumann POVMs have collinear effects.
    """
    return kernel(dagger(perm.matrix() - u), tol)


def _candidates(u: np.ndarray, strategy: str):
    d = u.shape[0]
    ident = tuple(range(d))
    if strategy == "a":
        w = np.linalg.eigvals(u)
        seen: list[complex] = []
        for lam in w:
            if all(abs(lam - s) > 1e-8 for s in seen):
                seen.append(lam)
                yield GeneralizedPermutation(np.full(d, lam / abs(lam)), ident)
    elif strategy == "b":
        diag = np.diagonal(u)
        z = np.where(np.abs(diag) > 1e-12, diag / np.where(np.abs(diag) > 1e-12, np.abs(diag), 1), 1.0)
        yield GeneralizedPermutation(z, ident)
    elif strategy == "c":
        if d > 6:
            raise ValueError("exhaustive permutation strategy is limited to d <= 6")
        for sig in itertools.permutations(range(d)):
            entries = u[list(sig), np.arange(d)]
            if np.any(np.abs(entries) <= 1e-12):
                continue
            yield GeneralizedPermutation(entries / np.abs(entries), sig)
    else:
        raise ValueError(f"unknown zeta strategy {strategy!r}")


def zeta_lower_bound(u, strategy: str = "a", tol: Tolerances = DEFAULT_TOL) -> ZetaBound:
    """Best kernel dimension over the candidate generalized permutations of ``strategy``.

    ``strategy`` is "a" (eigenvalue multiplicities), "b" (diagonal phases),
    "c" (all permutations, d <= 6) or "all". Ties keep the first candidate.
    Returns a lower bound only.
    """
    u = as_matrix(u)
    if not is_unitary(u, 1e-9):
        raise ValueError("zeta_lower_bound needs a unitary")
    strategies = ("a", "b", "c") if strategy == "all" else (strategy,)
    if strategy == "all" and u.shape[0] > 6:
        strategies = ("a", "b")
    best = ZetaBound(0, None, np.zeros((u.shape[0], 0), dtype=complex), strategy)
    for st in strategies:
        for perm in _candidates(u, st):
            sub = zeta_subspace(u, perm, 1e-8)
            if sub.shape[1] > best.r:
                best = ZetaBound(sub.shape[1], perm, sub, st)
    return best


def two_basis_tuple(u) -> PovmTuple:
    """Computational basis and the basis formed by the columns of ``u``."""
    u = as_matrix(u)
    return PovmTuple((von_neumann(np.eye(u.shape[0])), von_neumann(u)))


def zeta_collinearity_error(u, bound: ZetaBound) -> float:
    """max_j |V^dagger u_j - z_j V^dagger e_sigma(j)|."""
    u = as_matrix(u)
    v = bound.subspace
    if bound.perm is None or v.shape[1] == 0:
        return 0.0
    lhs = dagger(v) @ u
    rhs = dagger(v)[:, list(bound.perm.sigma)] * bound.perm.z[None, :]
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# spin systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpinSystem:
    level: int
    matrices: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]


def spin_system(k: int) -> SpinSystem:
    """2k+1 self-adjoint, unitary, pairwise anticommuting matrices of size 2^k."""
    if k < 1:
        raise ValueError("level must be >= 1")
    mats = [PAULI_X, PAULI_Y, PAULI_Z]
    for _ in range(k - 1):
        eye = np.eye(mats[0].shape[0], dtype=complex)
        mats = [np.kron(PAULI_X, f) for f in mats] + [np.kron(PAULI_Y, eye), np.kron(PAULI_Z, eye)]
    return SpinSystem(k, tuple(mats))


def spin_povms(k: int) -> PovmTuple:
    """Two-outcome projective POVMs ((I + F_x)/2, (I - F_x)/2)."""
    sys_ = spin_system(k)
    eye = np.eye(sys_.dim)
    return PovmTuple(tuple(Povm([(eye + f) / 2, (eye - f) / 2]) for f in sys_.matrices))


def anticommutation_error(sys_: SpinSystem) -> float:
    eye = np.eye(sys_.dim)
    worst = 0.0
    for i, a in enumerate(sys_.matrices):
        for j, b in enumerate(sys_.matrices):
            target = 2 * eye if i == j else 0 * eye
            worst = max(worst, float(np.max(np.abs(a @ b + b @ a - target))))
    return worst


def spin_level_bounds(k: int, t: float, r: int) -> dict:
    """Bookkeeping for a noisy level-k spin tuple: which bounds on R-bar apply.

    Lower bound r holds whenever t <= 1/(2r) (two outcomes per POVM);
    compatibility fails for the full tuple once t > 1/sqrt(2k+1), giving
    R-bar <= 2^k - 1. No SDP is solved.
    """
    g = 2 * k + 1
    lower = r if t <= 1 / (2 * r) else 1
    incompatible = bool(t > 1 / np.sqrt(g))
    return {"level": k, "dim": 2 ** k, "t": float(t), "r_bar_lower": lower,
            "r_bar_upper": 2 ** k - 1 if incompatible else 2 ** k,
            "full_tuple_incompatible": bool(incompatible)}
