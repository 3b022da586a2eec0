"""Budgeted search over isometries for bounds on the compatibility dimensions.

R(T) is the largest r with SOME r-dimensional reduction compatible, R-bar(T)
the largest r with EVERY r-dimensional reduction compatible. Certificates
for ``R >= r`` are compatible reductions; falsifiers of ``R-bar >= r`` are
incompatible reductions. Both are re-verified by an independent
joint-measurability solve before being returned.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .compat import (COMPATIBLE, INCOMPATIBLE, intrinsic_noise, joint_measurability,
                     robustness_report)
from .config import DEFAULT_TOL, Tolerances
from .constructions import _basis_of, mub_truncation_isometry, zeta_lower_bound
from .linalg import dagger, haar_isometry, orthonormalize
from .povm import PovmTuple, pairwise_commuting, reduce
from .reductions import ReductionError, commutative_reduction, hermitian_span_basis, scalar_reduction


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 4
    local_steps: int = 12
    step_scale: float = 0.5
    seed: int = 0
    max_seeds: int = 60          # structural seed candidates evaluated before random restarts

    def __post_init__(self):
        if self.restarts < 0 or self.local_steps < 0 or self.max_seeds < 0:
            raise ValueError("budget counts must be non-negative")
        if self.step_scale <= 0:
            raise ValueError("step scale must be positive")


@dataclass
class SearchResult:
    found: bool
    isometry: np.ndarray | None
    robustness: float                 # best t* seen (capped objective)
    evaluations: int
    provenance: str

    @property
    def margin(self) -> float:
        return self.robustness - 1.0


def _robustness(tup: PovmTuple, v: np.ndarray, cap: float, tol: Tolerances) -> float:
    t, _, sol = robustness_report(reduce(tup, v, tol), None, cap, tol)
    return t if sol.optimal else math.nan


def _verify(tup: PovmTuple, v: np.ndarray, want: str, tol: Tolerances) -> bool:
    return joint_measurability(reduce(tup, v, tol), tol).verdict == want


def eigenvector_pool(tup: PovmTuple, atol: float = 1e-9) -> list[np.ndarray]:
    """Eigenvectors of all effects (nonzero eigenvalues first), deduplicated up to phase."""
    pool: list[np.ndarray] = []
    for p in tup:
        for a in p:
            w, q = np.linalg.eigh(a)
            order = np.argsort(-np.abs(w))
            for i in order:
                v = q[:, i]
                if all(abs(abs(np.vdot(u, v)) - 1) > atol for u in pool):
                    pool.append(v)
    return pool


def _subset_seeds(pool: list[np.ndarray], r: int, limit: int):
    d = pool[0].shape[0] if pool else 0
    count = 0
    for combo in itertools.combinations(range(len(pool)), r):
        if count >= limit:
            return
        m = np.array([pool[i] for i in combo]).T
        if np.linalg.matrix_rank(m, tol=1e-8) < r:
            continue
        count += 1
        yield orthonormalize(m) if m.shape[0] == d else m


def structural_seeds(tup: PovmTuple, r: int, budget: SearchBudget):
    """Candidate isometries from structure, in a fixed order."""
    d = tup.dim
    effects = [a for p in tup for a in p]
    try:
        yield "commutative", commutative_reduction(effects, r, seed=budget.seed).isometry
    except ReductionError:
        pass
    yield "coordinate", np.eye(d, dtype=complex)[:, :r]
    seeds = list(_subset_seeds(eigenvector_pool(tup), r, budget.max_seeds))
    yield from (("eigenvectors", v) for v in _rank_by_commutator(tup, seeds, descending=False))


def _rank_by_commutator(tup: PovmTuple, seeds, descending: bool):
    """Order candidate isometries by the cross-commutator norm of the reduced tuple (stable)."""
    scores = [pairwise_commuting(reduce(tup, v)) for v in seeds]
    order = sorted(range(len(seeds)), key=lambda i: -scores[i] if descending else scores[i])
    return [seeds[i] for i in order]


def _local_search(tup, r, budget: SearchBudget, sense: int, cap: float, tol: Tolerances,
                  done):
    """Random restarts with shrinking Gaussian perturbations; sense=+1 maximizes t*, -1 minimizes."""
    rng = np.random.default_rng(budget.seed)
    best_t, best_v, evals = (-np.inf if sense > 0 else np.inf), None, 0
    for _ in range(budget.restarts):
        v = haar_isometry(tup.dim, r, rng)
        t = _robustness(tup, v, cap, tol)
        evals += 1
        if math.isnan(t):
            continue
        step = budget.step_scale
        for _ in range(budget.local_steps):
            if done(t, v):
                return t, v, evals, True
            g = rng.standard_normal(v.shape) + 1j * rng.standard_normal(v.shape)
            cand = orthonormalize(v + step * g / np.sqrt(2))
            tc = _robustness(tup, cand, cap, tol)
            evals += 1
            if not math.isnan(tc) and sense * tc > sense * t:
                v, t = cand, tc
            else:
                step *= 0.7
        if sense * t > sense * best_t:
            best_t, best_v = t, v
        if done(t, v):
            return t, v, evals, True
    return best_t, best_v, evals, False


def certify_R_at_least(tup: PovmTuple, r: int, budget: SearchBudget = SearchBudget(),
                       tol: Tolerances = DEFAULT_TOL) -> SearchResult:
    """Look for an isometry V (d x r) with reduce(tup, V) compatible.

    not-found is not a proof that R < r.
    """
    d = tup.dim
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d = {d}")
    evals = 0
    best = -np.inf
    if r == d:
        v = np.eye(d, dtype=complex)
        ok = _verify(tup, v, COMPATIBLE, tol)
        return SearchResult(ok, v if ok else None, 1.0 if ok else _robustness(tup, v, 1.0, tol), 1, "full-space")
    for tag, v in structural_seeds(tup, r, budget):
        t = _robustness(tup, v, 1.0, tol)
        evals += 1
        best = max(best, t)
        if t >= 1 - tol.sdp and _verify(tup, v, COMPATIBLE, tol):
            return SearchResult(True, v, t, evals, tag)

    def done(t, v):
        return t >= 1 - tol.sdp and _verify(tup, v, COMPATIBLE, tol)

    t, v, n, ok = _local_search(tup, r, budget, +1, 1.0, tol, done)
    evals += n
    best = max(best, t)
    return SearchResult(ok, v if ok else None, float(best), evals, "random-search" if ok else "not-found")


def falsify_Rbar_at_least(tup: PovmTuple, r: int, budget: SearchBudget = SearchBudget(),
                          tol: Tolerances = DEFAULT_TOL, cap: float = 2.0) -> SearchResult:
    """Look for an isometry V (d x r) with reduce(tup, V) certified incompatible.

    The objective is t*(V) with cap ``cap`` > 1 so that compatible
    reductions still give an informative value.
    """
    d = tup.dim
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d = {d}")
    if r == 1:
        return SearchResult(False, None, cap, 0, "one-dimensional reductions are compatible")
    threshold = 1 - 10 * tol.sdp
    evals = 0
    best = np.inf
    seeds = [("coordinate", np.eye(d, dtype=complex)[:, list(c)])
             for c in itertools.islice(itertools.combinations(range(d), r), budget.max_seeds)]
    eig = list(_subset_seeds(eigenvector_pool(tup), r, budget.max_seeds))
    seeds += [("eigenvectors", v) for v in _rank_by_commutator(tup, eig, descending=True)]
    for tag, v in seeds:
        t = _robustness(tup, v, cap, tol)
        evals += 1
        best = min(best, t)
        if t < threshold and _verify(tup, v, INCOMPATIBLE, tol):
            return SearchResult(True, v, t, evals, tag)

    def done(t, v):
        return t < threshold and _verify(tup, v, INCOMPATIBLE, tol)

    t, v, n, ok = _local_search(tup, r, budget, -1, cap, tol, done)
    evals += n
    best = min(best, t)
    return SearchResult(ok, v if ok else None, float(best), evals, "random-search" if ok else "not-found")


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

@dataclass
class DimensionBounds:
    dim: int
    r_lower: int
    r_lower_isometry: np.ndarray | None
    r_bar_lower: int
    r_bar_upper: int
    r_bar_upper_isometry: np.ndarray | None
    provenance: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"dim": self.dim, "r_lower": self.r_lower, "r_bar_lower": self.r_bar_lower,
                "r_bar_upper": self.r_bar_upper, "provenance": dict(self.provenance)}


def dimension_noise_rbar(tup: PovmTuple) -> int:
    """Largest r with t_x <= 1/(2 r (k_x - 1)) for the intrinsic noise of every POVM."""
    t = intrinsic_noise(tup)
    ks = np.array(tup.outcome_counts, dtype=float)
    with np.errstate(divide="ignore"):
        rs = np.where(t > 0, np.floor(1.0 / (2 * np.maximum(t, 1e-300) * np.maximum(ks - 1, 1)) + 1e-12), np.inf)
    return int(max(1, min(tup.dim, rs.min())))


def _structural_lower(tup: PovmTuple, third_basis, tol: Tolerances):
    """Yield (r, isometry, tag) from the structured constructions, each re-verified."""
    d = tup.dim
    if third_basis is not None:
        for r in range(d - 1, 1, -1):
            v = mub_truncation_isometry(third_basis, r)
            if _verify(tup, v, COMPATIBLE, tol):
                yield r, v, "mub-truncation"
                break
    effects = [a for p in tup for a in p]
    k = len(hermitian_span_basis(effects))
    r = min(d, 1 + d // k)
    if r >= 2:
        try:
            v = commutative_reduction(effects, r).isometry
            if _verify(tup, v, COMPATIBLE, tol):
                yield r, v, "commutative"
        except ReductionError:
            pass
    for x in range(tup.g):
        others = [a for y, p in enumerate(tup) if y != x for a in p]
        k = len(hermitian_span_basis(others))
        r = min(d, 1 + d // (k * k))
        if r >= 2:
            try:
                v = scalar_reduction(others, r).isometry
                if _verify(tup, v, COMPATIBLE, tol):
                    yield r, v, "scalar"
            except (ReductionError, RuntimeError):
                pass
    if tup.g == 2:
        try:
            b1, b2 = _basis_of(tup[0]), _basis_of(tup[1])
        except ValueError:
            return
        u = dagger(b1) @ b2
        zb = zeta_lower_bound(u, "all" if d <= 6 else "a", tol)
        if zb.r >= 2:
            v = b1 @ zb.subspace
            if _verify(tup, v, COMPATIBLE, tol):
                yield zb.r, v, "zeta"


def bounds_summary(tup: PovmTuple, budget: SearchBudget = SearchBudget(), third_basis=None,
                   tol: Tolerances = DEFAULT_TOL, max_search_r: int | None = None) -> DimensionBounds:
    """Best certified bounds on R and R-bar, with the construction behind each one."""
    d = tup.dim
    prov: dict = {}
    full = joint_measurability(tup, tol)
    if full.verdict == COMPATIBLE:
        eye = np.eye(d, dtype=complex)
        prov.update(r_lower="compatible tuple", r_bar_lower="compatible tuple", r_bar_upper="dimension")
        return DimensionBounds(d, d, eye, d, d, None, prov)

    r_lower, v_lower = 1, np.eye(d, dtype=complex)[:, :1]
    prov["r_lower"] = "one-dimensional reduction"
    for r, v, tag in _structural_lower(tup, third_basis, tol):
        if r > r_lower:
            r_lower, v_lower, prov["r_lower"] = r, v, tag
    top = d - 1 if max_search_r is None else min(d - 1, max_search_r)
    for r in range(r_lower + 1, top + 1):
        res = certify_R_at_least(tup, r, budget, tol)
        if not res.found:
            break
        r_lower, v_lower, prov["r_lower"] = r, res.isometry, f"search:{res.provenance}"

    r_bar_lower = dimension_noise_rbar(tup)
    prov["r_bar_lower"] = "noise threshold" if r_bar_lower > 1 else "one-dimensional reductions"
    r_bar_upper, v_upper = d, None
    prov["r_bar_upper"] = "dimension"
    if full.verdict == INCOMPATIBLE:
        r_bar_upper, v_upper, prov["r_bar_upper"] = d - 1, np.eye(d, dtype=complex), "full tuple incompatible"
    for r in range(r_bar_lower + 1, d):
        res = falsify_Rbar_at_least(tup, r, budget, tol)
        if res.found:
            r_bar_upper, v_upper, prov["r_bar_upper"] = r - 1, res.isometry, f"search:{res.provenance}"
            break
    return DimensionBounds(d, r_lower, v_lower, r_bar_lower, r_bar_upper, v_upper, prov)
