"""SDP-backed compatibility decisions for tuples of POVMs.

Joint measurability is decided through the noise-robustness program

    maximize t  s.t.  C_j >= 0,
                      sum_{j : j_x = i} C_j = t*u_x*A^(x)_i + (1 - t*u_x) I/k_x,
                      t <= cap,

which always has a strictly feasible point (t = 0 with the product of
trivial POVMs), so interior-point iterations are well posed even when the
tuple sits on the boundary of the compatible set. The tuple is compatible
iff t* >= 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cloning import in_gamma_clone
from .config import DEFAULT_TOL, Tolerances
from .linalg import dagger, haar_isometry, lambda_min, op_norm, random_unit_vector
from .povm import (JointPovm, Povm, PovmTuple, iter_multi_index, marginal, nonzero_effects,
                   reduce, validate)
from .sdp import SdpInstance, SdpSolution, solve

COMPATIBLE = "compatible"
INCOMPATIBLE = "incompatible"
UNDECIDED = "undecided"


@dataclass
class CompatReport:
    verdict: str
    robustness: float                 # t*; >= 1 exactly when compatible
    margin: float                     # t* - 1
    joint: JointPovm | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def compatible(self) -> bool:
        return self.verdict == COMPATIBLE

    @property
    def incompatible(self) -> bool:
        return self.verdict == INCOMPATIBLE


# ---------------------------------------------------------------------------
# noise robustness / joint measurability
# ---------------------------------------------------------------------------

def robustness_instance(tup: PovmTuple, direction=None, cap: float = 1.0,
                        real: bool | None = None) -> tuple[SdpInstance, list[tuple[int, ...]]]:
    d = tup.dim
    ks = tup.outcome_counts
    u = np.ones(tup.g) if direction is None else np.asarray(direction, dtype=float).reshape(-1)
    if u.shape != (tup.g,):
        raise ValueError(f"direction has length {u.size}, tuple has {tup.g} POVMs")
    if np.any(u < 0):
        raise ValueError("noise direction must be non-negative")
    real = tup.is_real() if real is None else real
    inst = SdpInstance()
    idx = list(iter_multi_index(ks))
    names = [f"C{'_'.join(map(str, j))}" for j in idx]
    for n in names:
        inst.add_block(n, d, real=real)
    inst.add_scalar("t")
    eye = np.eye(d)
    for x, p in enumerate(tup):
        for i in range(p.k):
            members = {n: 1.0 for n, j in zip(names, idx) if j[x] == i}
            inst.add_equality(eye / p.k, blocks=members,
                              scalars={"t": -u[x] * (p[i] - eye / p.k)}, label=f"marginal {x}:{i}")
    inst.bound_scalar("t", upper=cap)
    inst.set_objective("max", scalars={"t": 1.0})
    return inst, idx


def _check_size(tup: PovmTuple, tol: Tolerances):
    size = int(np.prod(tup.outcome_counts)) * tup.dim
    if size > tol.solver_cap:
        raise ValueError(f"joint SDP size prod(k)*d = {size} exceeds solver cap {tol.solver_cap}")


def robustness_report(tup: PovmTuple, direction=None, cap: float = 1.0,
                      tol: Tolerances = DEFAULT_TOL) -> tuple[float, JointPovm | None, SdpSolution]:
    _check_size(tup, tol)
    inst, idx = robustness_instance(tup, direction, cap)
    sol = solve(inst, tolerances=tol)
    if not sol.optimal:
        return float("nan"), None, sol
    d = tup.dim
    joint = np.zeros(tup.outcome_counts + (d, d), dtype=complex)
    for j, blk in zip(idx, inst.blocks):
        joint[j] = sol.blocks[blk.name]
    return sol.scalars["t"], JointPovm(joint), sol


def noise_robustness(tup: PovmTuple, direction=None, cap: float = 1.0,
                     tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest t <= cap such that the noisy tuple with weights t*direction is compatible.

    Raises ``RuntimeError`` when the solver does not reach an optimal status.
    """
    t, _, sol = robustness_report(tup, direction, cap, tol)
    if not sol.optimal:
        raise RuntimeError(f"robustness SDP failed: {sol.message}")
    return t


def _prune(tup: PovmTuple, tol: Tolerances):
    keep = [nonzero_effects(p, tol.psd) for p in tup]
    pruned = PovmTuple(tuple(Povm(p.effects[k]) for p, k in zip(tup, keep)))
    return pruned, keep


def joint_measurability(tup: PovmTuple, tol: Tolerances = DEFAULT_TOL) -> CompatReport:
    """Decide compatibility and return a joint POVM as certificate.

    Zero effects are dropped before solving (their joint entries must
    vanish); the reported robustness refers to the pruned tuple.
    Incompatible requires t* < 1 - 10*tol; compatible requires t* >= 1 - tol
    and a joint whose marginals reproduce the tuple within 10*tol.
    """
    if tup.g == 1:
        p = tup[0]
        joint = JointPovm(p.effects)
        return CompatReport(COMPATIBLE, 1.0, 0.0, joint, {"note": "single POVM"})
    pruned, keep = _prune(tup, tol)
    t, joint_p, sol = robustness_report(pruned, None, 1.0, tol)
    diag = sol.diagnostics()
    if not sol.optimal:
        return CompatReport(UNDECIDED, float("nan"), float("nan"), None, diag)
    margin = t - 1.0
    if t < 1.0 - 10 * tol.sdp:
        diag["certificate"] = "robustness below 1"
        return CompatReport(INCOMPATIBLE, t, margin, None, diag)
    if t < 1.0 - tol.sdp:
        return CompatReport(UNDECIDED, t, margin, None, diag)
    d = tup.dim
    full = np.zeros(tup.outcome_counts + (d, d), dtype=complex)
    for j_p in iter_multi_index(pruned.outcome_counts):
        j = tuple(keep[x][jx] for x, jx in enumerate(j_p))
        full[j] = joint_p.effects[j_p]
    joint = JointPovm(full)
    err = marginal_error(joint, tup)
    diag["marginal_error"] = err
    if err > 10 * tol.sdp * max(1.0, d):
        return CompatReport(UNDECIDED, t, margin, None, diag)
    return CompatReport(COMPATIBLE, t, margin, joint, diag)


def marginal_error(joint: JointPovm, tup: PovmTuple) -> float:
    return max(float(np.max(np.abs(marginal(joint, x).effects - tup[x].effects))) for x in range(tup.g))


def is_compatible(tup: PovmTuple, tol: Tolerances = DEFAULT_TOL) -> bool:
    return joint_measurability(tup, tol).compatible


# ---------------------------------------------------------------------------
# pair of effects
# ---------------------------------------------------------------------------

def _check_effect(e: np.ndarray, tol: Tolerances) -> np.ndarray:
    e = np.asarray(e, dtype=complex)
    if e.ndim != 2 or e.shape[0] != e.shape[1] or op_norm(e - dagger(e)) > tol.herm:
        raise ValueError("effect must be a square Hermitian matrix")
    w = np.linalg.eigvalsh((e + dagger(e)) / 2)
    if w[0] < -tol.psd or w[-1] > 1 + tol.psd:
        raise ValueError(f"not an effect: spectrum in [{w[0]:.3g}, {w[-1]:.3g}]")
    return e


def pair_effect_value(e, f, tol: Tolerances = DEFAULT_TOL) -> float:
    """Value of: min lambda s.t. 0 <= X, X <= E, X <= F, lambda*I + X >= E + F.

    The two-outcome POVMs (E, I-E) and (F, I-F) are compatible iff the value is <= 1.
    """
    e = _check_effect(e, tol)
    f = _check_effect(f, tol)
    if e.shape != f.shape:
        raise ValueError("effects of different dimensions")
    d = e.shape[0]
    real = not (np.any(e.imag) or np.any(f.imag))
    inst = SdpInstance()
    for n in ("X", "SE", "SF", "SL"):
        inst.add_block(n, d, real=real)
    inst.add_scalar("lam")
    inst.add_equality(e, blocks={"X": 1.0, "SE": 1.0})
    inst.add_equality(f, blocks={"X": 1.0, "SF": 1.0})
    inst.add_equality(e + f, blocks={"X": 1.0, "SL": -1.0}, scalars={"lam": np.eye(d)})
    inst.set_objective("min", scalars={"lam": 1.0})
    sol = solve(inst, tolerances=tol)
    if not sol.optimal:
        raise RuntimeError(f"pair-effect SDP failed: {sol.message}")
    return sol.value


# ---------------------------------------------------------------------------
# cloning criterion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CloningVerdict:
    s: np.ndarray
    verdict: str          # compatible | undecided (the criterion is sufficient only)


def cloning_parameters(tup: PovmTuple) -> np.ndarray:
    """s_x = 1 - min_i d*lambda_min(A_i)/Tr(A_i), clipped to [0, 1]."""
    d = tup.dim
    s = []
    for p in tup:
        ratios = []
        for a in p:
            tr = float(np.real(np.trace(a)))
            if tr <= 0:
                raise ValueError("cloning criterion needs effects of positive trace")
            ratios.append(d * lambda_min(a) / tr)
        s.append(1.0 - min(ratios))
    return np.clip(np.array(s), 0.0, 1.0)


def cloning_criterion(tup: PovmTuple, tol: Tolerances = DEFAULT_TOL) -> CloningVerdict:
    s = cloning_parameters(tup)
    if tup.g == 1 or np.all(s <= 0):
        return CloningVerdict(s, COMPATIBLE)
    if tup.dim < 2:
        return CloningVerdict(s, COMPATIBLE)
    mem = in_gamma_clone(s, tup.dim, tol)
    return CloningVerdict(s, COMPATIBLE if mem.member else UNDECIDED)


# ---------------------------------------------------------------------------
# ensembles and guessing probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Ensemble:
    states: np.ndarray      # (k, d, d)
    probs: np.ndarray       # (k,)

    def __post_init__(self):
        st = np.array(self.states, dtype=complex)
        p = np.array(self.probs, dtype=float).reshape(-1)
        if st.ndim != 3 or st.shape[1] != st.shape[2] or st.shape[0] != p.size:
            raise ValueError("ensemble needs states of shape (k, d, d) and k probabilities")
        if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
            raise ValueError("ensemble probabilities must form a simplex vector")
        tr = np.real(np.trace(st, axis1=1, axis2=2))
        if np.any(np.abs(tr - 1) > 1e-9):
            raise ValueError("ensemble states must have unit trace")
        if np.linalg.eigvalsh((st + dagger(st)) / 2)[:, 0].min() < -DEFAULT_TOL.psd:
            raise ValueError("ensemble states must be PSD")
        object.__setattr__(self, "states", st)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def k(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True, eq=False)
class SuperEnsemble:
    ensembles: tuple[Ensemble, ...]
    probs: np.ndarray

    def __post_init__(self):
        ens = tuple(self.ensembles)
        q = np.array(self.probs, dtype=float).reshape(-1)
        if len(ens) != q.size or not ens:
            raise ValueError("need one probability per ensemble")
        if np.any(q < -1e-12) or abs(q.sum() - 1) > 1e-9:
            raise ValueError("superensemble probabilities must form a simplex vector")
        if len({e.dim for e in ens}) != 1:
            raise ValueError("ensembles live in different dimensions")
        object.__setattr__(self, "ensembles", ens)
        object.__setattr__(self, "probs", q)

    @property
    def dim(self) -> int:
        return self.ensembles[0].dim

    @property
    def g(self) -> int:
        return len(self.ensembles)

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return tuple(e.k for e in self.ensembles)


def _discrimination(ops: Sequence[np.ndarray], d: int, tol: Tolerances) -> float:
    """max sum_j Re Tr[G_j M_j] over POVMs G."""
    real = not any(np.any(np.asarray(m).imag) for m in ops)
    inst = SdpInstance()
    names = [inst.add_block(f"G{j}", d, real=real) for j in range(len(ops))]
    inst.add_equality(np.eye(d), blocks={n: 1.0 for n in names})
    inst.set_objective("max", blocks=dict(zip(names, ops)))
    sol = solve(inst, tolerances=tol)
    if not sol.optimal:
        raise RuntimeError(f"discrimination SDP failed: {sol.message}")
    return sol.value


def ensemble_guess(e: Ensemble, tol: Tolerances = DEFAULT_TOL) -> float:
    return _discrimination([p * s for p, s in zip(e.probs, e.states)], e.dim, tol)


def prior_guess(sup: SuperEnsemble, tol: Tolerances = DEFAULT_TOL) -> float:
    """Guessing probability when the ensemble label is known before measuring."""
    return float(sum(q * ensemble_guess(e, tol) for q, e in zip(sup.probs, sup.ensembles)))


def post_guess(sup: SuperEnsemble, tol: Tolerances = DEFAULT_TOL) -> float:
    """Guessing probability when the label arrives after a single joint measurement."""
    d = sup.dim
    ks = sup.outcome_counts
    if int(np.prod(ks)) * d > tol.solver_cap:
        raise ValueError("post-information SDP exceeds solver cap")
    ops = []
    for j in iter_multi_index(ks):
        m = np.zeros((d, d), dtype=complex)
        for x, e in enumerate(sup.ensembles):
            m += sup.probs[x] * e.probs[j[x]] * e.states[j[x]]
        ops.append(m)
    return _discrimination(ops, d, tol)


def witness_value(sup: SuperEnsemble, tup: PovmTuple) -> float:
    """sum_x q_x sum_i p_i Tr[sigma_i A_i]."""
    if sup.outcome_counts != tup.outcome_counts or sup.dim != tup.dim:
        raise ValueError(f"superensemble shape {sup.outcome_counts}/{sup.dim} does not match "
                         f"tuple {tup.outcome_counts}/{tup.dim}")
    total = 0.0
    for q, e, p in zip(sup.probs, sup.ensembles, tup):
        total += q * float(np.real(np.einsum("i,ijk,ikj->", e.probs, e.states, p.effects)))
    return total


def random_superensemble(basis: np.ndarray, outcome_counts: Sequence[int], rng) -> SuperEnsemble:
    """Pure states Haar-distributed in the range of ``basis``; uniform p and q."""
    basis = np.asarray(basis, dtype=complex)
    r = basis.shape[1]
    ens = []
    for k in outcome_counts:
        vecs = [basis @ random_unit_vector(r, rng) for _ in range(k)]
        ens.append(Ensemble(np.array([np.outer(v, np.conj(v)) for v in vecs]), np.full(k, 1.0 / k)))
    g = len(outcome_counts)
    return SuperEnsemble(tuple(ens), np.full(g, 1.0 / g))


def compress_superensemble(sup: SuperEnsemble, v: np.ndarray) -> SuperEnsemble:
    vd = dagger(v)
    return SuperEnsemble(tuple(Ensemble(vd[None] @ e.states @ v[None], e.probs) for e in sup.ensembles),
                         sup.probs)


def restricted_witness_check(tup: PovmTuple, subspace: np.ndarray, samples: int = 32, seed=None,
                             tol: Tolerances = DEFAULT_TOL) -> float:
    """Max over sampled superensembles supported on ``subspace`` of witness - post_guess.

    Both quantities are unchanged by compressing to the subspace, so they are
    evaluated there, which keeps the SDPs small. A positive value certifies
    that the tuple is incompatible on that subspace.
    """
    basis = np.asarray(subspace, dtype=complex)
    rng = np.random.default_rng(seed)
    reduced = reduce(tup, basis, tol)
    worst = -np.inf
    for _ in range(samples):
        sup = random_superensemble(np.eye(basis.shape[1]), tup.outcome_counts, rng)
        worst = max(worst, witness_value(sup, reduced) - post_guess(sup, tol))
    return float(worst)


# ---------------------------------------------------------------------------
# dimension-dependent noise
# ---------------------------------------------------------------------------

def dimension_noise_threshold(outcome_counts: Sequence[int], r: int) -> np.ndarray:
    """Noise weights t_x = 1/(2 r (k_x - 1)) making every r-dimensional reduction compatible."""
    if r < 1:
        raise ValueError("r must be >= 1")
    ks = np.asarray(outcome_counts, dtype=float)
    if np.any(ks < 2):
        raise ValueError("every POVM needs at least two outcomes")
    return 1.0 / (2 * r * (ks - 1))


def intrinsic_noise(tup: PovmTuple) -> np.ndarray:
    """Smallest t_x with A^(x) = N_{t_x}[B^(x)] for some POVM B^(x).

    N_t[B]_i >= (1-t) I/k for every POVM B, and conversely
    B_i = (A_i - (1-t) I/k)/t is a POVM once that bound holds.
    """
    out = []
    for p in tup:
        lm = min(lambda_min(a) for a in p)
        out.append(min(1.0, max(0.0, 1.0 - p.k * lm)))
    return np.array(out)


def random_isometries(d: int, r: int, count: int, seed=None):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield haar_isometry(d, r, rng)
