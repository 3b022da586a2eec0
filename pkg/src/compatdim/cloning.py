"""Asymmetric 1 -> g cloning region with depolarizing marginals.

Two independent routes decide whether a parameter vector ``s`` in [0,1]^g
is achievable on C^d:

* the closed-form optimal-cloning boundary (Kay's equation), scanned along
  the ray {alpha * s}; the region is a down-set containing 0, so membership
  is ``alpha* >= 1``;
* an SDP over Choi matrices of channels M_d -> M_d^{(x)g} whose single-clone
  marginals are the depolarizing channels with weights ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT_TOL, Tolerances
from .sdp import SdpInstance, feasibility


def _check(s, d: int) -> np.ndarray:
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.size < 1:
        raise ValueError("need at least one clone parameter")
    if d < 2:
        raise ValueError("d must be >= 2")
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError(f"clone parameters must lie in [0, 1], got {s}")
    return s


def boundary_residual(s, d: int) -> float:
    """LHS - RHS of the optimal-cloning boundary equation.

    (g+d-1)[g - d^2 + d + (d^2-1) sum s_i] - (sum_i sqrt(s_i (d^2-1) + 1))^2

    Positive means ``s`` lies strictly outside the region along its ray,
    negative strictly inside, zero on the boundary. Along any ray the
    residual is convex and negative at 0, so it has one sign change.
    """
    s = np.asarray(s, dtype=float).reshape(-1)
    g = s.size
    dd = d * d - 1
    lhs = (g + d - 1) * (g - d * d + d + dd * s.sum())
    rhs = np.sqrt(s * dd + 1).sum() ** 2
    return float(lhs - rhs)


@dataclass(frozen=True)
class CloneMembership:
    member: bool
    alpha_star: float      # max{alpha : alpha*s in the region}, clamped to the unit cube
    residual: float        # boundary_residual(s, d)
    method: str            # "formula" | "choi" | "trivial"


class BracketError(RuntimeError):
    pass


def ray_scaling(s, d: int, xtol: float = 1e-14) -> float:
    """Largest alpha with alpha*s in the cloning region, clamped so alpha*s <= 1."""
    s = _check(s, d)
    if np.all(s == 0):
        return np.inf
    hi = 1.0 / s.max()
    f0 = boundary_residual(0 * s, d)
    if f0 >= 0:
        raise BracketError(f"residual at the origin is {f0} >= 0")
    fhi = boundary_residual(hi * s, d)
    if fhi <= 0:
        return hi
    return float(brentq(lambda a: boundary_residual(a * s, d), 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


def in_gamma_clone(s, d: int, tol: Tolerances = DEFAULT_TOL) -> CloneMembership:
    """Membership of ``s`` in the cloning region on C^d.

    Rays with some (but not all) zero coordinates fall outside the domain
    where the boundary equation is stated; those go to the Choi oracle.
    """
    s = _check(s, d)
    if np.all(s == 0):
        return CloneMembership(True, np.inf, boundary_residual(s, d), "trivial")
    if s.size == 1:
        # a single clone is the depolarizing channel itself
        return CloneMembership(True, 1.0 / s[0], boundary_residual(s, d), "trivial")
    if np.any(s == 0):
        res = clone_choi_feasible(s, d, tol)
        if res.status == "numerical-failure":
            raise RuntimeError(f"Choi oracle undecided for s={s}")
        return CloneMembership(res.feasible, np.nan, boundary_residual(s, d), "choi")
    alpha = ray_scaling(s, d)
    # boundary points belong to the region; allow root-finding round-off
    return CloneMembership(alpha >= 1.0 - 1e-12, alpha, boundary_residual(s, d), "formula")


# ---------------------------------------------------------------------------
# Choi-matrix oracle
# ---------------------------------------------------------------------------

def _keep_clone_and_input(j: np.ndarray, d: int, g: int, clone: int) -> np.ndarray:
    """Partial trace of a Choi operator on (out_1..out_g, in) down to (out_clone, in)."""
    n = g + 1
    t = j.reshape((d,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for k in range(g):
        if k != clone:
            col[k] = row[k]
    out = f"{row[clone]}{row[g]}{col[clone]}{col[g]}"
    res = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    return res.reshape(d * d, d * d)


def _trace_outputs(j: np.ndarray, d: int, g: int) -> np.ndarray:
    t = j.reshape(d ** g, d, d ** g, d)
    return np.einsum("aiaj->ij", t)


def depolarizing_choi(s_j: float, d: int) -> np.ndarray:
    """Choi operator (output (x) input) of rho -> s rho + (1-s) Tr(rho) I/d."""
    omega = np.zeros(d * d)
    omega[[a * d + a for a in range(d)]] = 1.0
    return s_j * np.outer(omega, omega) + (1 - s_j) * np.eye(d * d) / d


def clone_choi_instance(s, d: int) -> SdpInstance:
    s = _check(s, d)
    g = s.size
    dim = d ** (g + 1)
    inst = SdpInstance()
    # all data are real, and J feasible => conj(J) feasible, so a real J suffices
    inst.add_block("J", dim, real=True)
    inst.add_equality(np.eye(d), blocks={"J": lambda x: _trace_outputs(x, d, g)}, label="trace-preserving")
    for k in range(g):
        inst.add_equality(depolarizing_choi(s[k], d),
                          blocks={"J": lambda x, k=k: _keep_clone_and_input(x, d, g, k)},
                          label=f"marginal-{k}")
    return inst


@dataclass(frozen=True)
class ChoiVerdict:
    status: str          # feasible | infeasible | numerical-failure
    margin: float        # phase-I margin: > 0 strictly feasible, < 0 infeasible
    choi: np.ndarray | None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def clone_choi_feasible(s, d: int, tol: Tolerances = DEFAULT_TOL) -> ChoiVerdict:
    """Decide existence of a cloning channel with exact depolarizing marginals ``s``."""
    s = _check(s, d)
    g = s.size
    if d ** (g + 1) > tol.solver_cap:
        raise ValueError(f"Choi dimension d^(g+1) = {d ** (g + 1)} exceeds solver cap {tol.solver_cap}")
    res = feasibility(clone_choi_instance(s, d), tolerances=tol)
    choi = res.point.get("J") if res.feasible else None
    return ChoiVerdict(res.status, float(res.margin), choi)


def choi_adjoint(choi: np.ndarray, d: int, g: int):
    """Heisenberg-picture map Y -> Psi(Y) = (Tr_out[J (Y (x) I_in)])^T."""
    def psi(y: np.ndarray) -> np.ndarray:
        big = choi @ np.kron(y, np.eye(d))
        t = big.reshape(d ** g, d, d ** g, d)
        return np.einsum("aiaj->ij", t).T
    return psi


def embed_on_clone(x: np.ndarray, d: int, g: int, clone: int) -> np.ndarray:
    """I^{(x)(clone)} (x) X (x) I^{(x)(g-clone-1)}."""
    return np.kron(np.kron(np.eye(d ** clone), x), np.eye(d ** (g - clone - 1)))
