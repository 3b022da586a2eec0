"""Small dense semidefinite programs with dual information.

An :class:`SdpInstance` has PSD matrix blocks (complex Hermitian or real
symmetric), free real scalars, affine equality constraints and a linear
objective. Equalities are written as matrix equations,

    sum_b L_b(X_b) + sum_s c_s M_s = R,

which are expanded into real rows through the Hermitian parametrization
below. Solving is delegated to the CVXOPT cone solver (primal-dual
interior point on the homogeneous self-dual embedding, dense
factorizations). Complex blocks enter it through the real embedding
X -> [[Re X, -Im X], [Im X, Re X]], which is PSD iff X is.
"""
from __future__ import annotations

import functools
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOL, Tolerances

BlockMap = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Hermitian parametrization: diag, Re(upper), Im(upper)
# ---------------------------------------------------------------------------

def nparams(n: int, real: bool) -> int:
    return n * (n + 1) // 2 if real else n * n


def _upper(n: int):
    return np.triu_indices(n, 1)


def hvec(m: np.ndarray, real: bool = False) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the basis of :func:`hbasis`."""
    m = np.asarray(m)
    iu = _upper(m.shape[0])
    parts = [np.real(np.diagonal(m)), np.real(m[iu])]
    if not real:
        parts.append(np.imag(m[iu]))
    return np.concatenate(parts)


def hmat(x: np.ndarray, n: int, real: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    iu = _upper(n)
    nu = len(iu[0])
    m = np.zeros((n, n), dtype=complex)
    m[np.diag_indices(n)] = x[:n]
    up = x[n:n + nu].astype(complex)
    if not real:
        up = up + 1j * x[n + nu:n + 2 * nu]
    m[iu] = up
    m[(iu[1], iu[0])] = np.conj(up)
    return m


@functools.lru_cache(maxsize=256)
def hbasis(n: int, real: bool = False) -> np.ndarray:
    """Basis matrices B_p with X = sum_p hvec(X)_p B_p (read-only, cached)."""
    out = np.array([hmat(e, n, real) for e in np.eye(nparams(n, real))])
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=256)
def _param_to_hvec(n: int, real: bool) -> np.ndarray:
    """Matrix sending block parameters to complex-Hermitian coordinates."""
    out = np.array([hvec(bp) for bp in hbasis(n, real)]).T
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=256)
def _cone_columns(n: int, real: bool) -> np.ndarray:
    """Column-major vec of the (embedded) basis matrices, one column per parameter."""
    basis = hbasis(n, real)
    emb = basis.real if real else np.array([real_embedding(bp) for bp in basis])
    out = emb.transpose(0, 2, 1).reshape(len(basis), -1).T.copy()
    out.setflags(write=False)
    return out


def real_embedding(m: np.ndarray) -> np.ndarray:
    re, im = np.real(m), np.imag(m)
    return np.block([[re, -im], [im, re]])


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    name: str
    dim: int
    real: bool = False

    @property
    def nparams(self) -> int:
        return nparams(self.dim, self.real)


@dataclass
class RowGroup:
    """Real equality rows: sum_b blocks[b] @ x_b + sum_s scalars[s] * t_s = rhs."""

    blocks: dict[str, np.ndarray]
    scalars: dict[str, np.ndarray]
    rhs: np.ndarray
    label: str = ""


@dataclass
class SdpInstance:
    sense: str = "min"
    blocks: list[Block] = field(default_factory=list)
    scalars: list[str] = field(default_factory=list)
    rows: list[RowGroup] = field(default_factory=list)
    objective_blocks: dict[str, np.ndarray] = field(default_factory=dict)
    objective_scalars: dict[str, float] = field(default_factory=dict)
    objective_constant: float = 0.0

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")

    # -- variables -----------------------------------------------------------
    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def add_block(self, name: str, dim: int, real: bool = False) -> str:
        if dim < 1:
            raise ValueError("block dimension must be >= 1")
        if any(b.name == name for b in self.blocks) or name in self.scalars:
            raise ValueError(f"duplicate variable name {name!r}")
        self.blocks.append(Block(name, int(dim), bool(real)))
        return name

    def add_scalar(self, name: str) -> str:
        if any(b.name == name for b in self.blocks) or name in self.scalars:
            raise ValueError(f"duplicate variable name {name!r}")
        self.scalars.append(name)
        return name

    @property
    def total_block_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    # -- constraints ---------------------------------------------------------
    def add_equality(self, rhs, blocks: Mapping[str, float | BlockMap | np.ndarray] = (),
                     scalars: Mapping[str, object] = (), label: str = "") -> None:
        """Add the matrix equation ``sum L_b(X_b) + sum c_s M_s = rhs``.

        ``blocks`` maps a block name to a float ``c`` (term ``c X_b``), a
        Hermitian matrix ``C`` (scalar term ``Re Tr(C X_b)``, only for 1x1
        ``rhs``) or a callable linear map. ``scalars`` maps a scalar name to
        the Hermitian matrix (or number) multiplying it.
        """
        rhs = np.atleast_2d(np.asarray(rhs, dtype=complex))
        m = rhs.shape[0]
        rows_b: dict[str, np.ndarray] = {}
        for name, term in dict(blocks).items():
            blk = self.block(name)
            basis = hbasis(blk.dim, blk.real)
            if callable(term):
                cols = [hvec(np.atleast_2d(term(bp))) for bp in basis]
            elif np.ndim(term) == 0:
                if blk.dim != m:
                    raise ValueError(f"block {name} has dim {blk.dim}, equation has dim {m}")
                a = float(term) * _param_to_hvec(blk.dim, blk.real)
                rows_b[name] = rows_b.get(name, 0) + a
                continue
            else:
                c = np.asarray(term, dtype=complex)
                if m != 1:
                    raise ValueError("trace-functional terms need a scalar equation")
                cols = [np.array([np.real(np.trace(c @ bp))]) for bp in basis]
            a = np.array(cols).T
            if a.shape[0] != m * m:
                raise ValueError(f"term for block {name} has wrong output size")
            rows_b[name] = rows_b.get(name, 0) + a
        rows_s: dict[str, np.ndarray] = {}
        for name, coeff in dict(scalars).items():
            if name not in self.scalars:
                raise KeyError(name)
            cm = np.atleast_2d(np.asarray(coeff, dtype=complex))
            if cm.shape != (m, m):
                raise ValueError(f"scalar {name} coefficient must be {m}x{m}")
            rows_s[name] = rows_s.get(name, 0) + hvec(cm)
        self.rows.append(RowGroup(rows_b, rows_s, hvec(rhs), label))

    def bound_scalar(self, name: str, lower: float | None = None, upper: float | None = None):
        """Add ``lower <= t`` and/or ``t <= upper`` through 1x1 slack blocks."""
        if lower is not None:
            s = self.add_block(f"_lo_{name}_{len(self.blocks)}", 1, real=True)
            self.add_equality(lower, blocks={s: -1.0}, scalars={name: 1.0}, label=f"{name}>=")
        if upper is not None:
            s = self.add_block(f"_up_{name}_{len(self.blocks)}", 1, real=True)
            self.add_equality(upper, blocks={s: 1.0}, scalars={name: 1.0}, label=f"{name}<=")

    # -- objective -----------------------------------------------------------
    def set_objective(self, sense: str, blocks: Mapping[str, np.ndarray] = (),
                      scalars: Mapping[str, float] = (), constant: float = 0.0) -> None:
        """Objective ``sum_b Re Tr(C_b X_b) + sum_s c_s t_s + constant``."""
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.objective_blocks = {k: np.asarray(v, dtype=complex) for k, v in dict(blocks).items()}
        self.objective_scalars = {k: float(v) for k, v in dict(scalars).items()}
        self.objective_constant = float(constant)

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        def cm(a):
            a = np.asarray(a, dtype=complex)
            return [[float(a.real[i, j]), float(a.imag[i, j])] for i in range(a.shape[0]) for j in range(a.shape[1])]
        return {
            "format": "compatdim.sdp/1",
            "sense": self.sense,
            "blocks": [{"name": b.name, "dim": b.dim, "real": b.real} for b in self.blocks],
            "scalars": list(self.scalars),
            "rows": [{"label": g.label,
                      "blocks": {k: v.tolist() for k, v in g.blocks.items()},
                      "scalars": {k: v.tolist() for k, v in g.scalars.items()},
                      "rhs": g.rhs.tolist()} for g in self.rows],
            "objective": {"blocks": {k: {"shape": list(v.shape), "entries": cm(v)}
                                     for k, v in self.objective_blocks.items()},
                          "scalars": self.objective_scalars,
                          "constant": self.objective_constant},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SdpInstance":
        inst = cls(sense=d["sense"])
        for b in d["blocks"]:
            inst.blocks.append(Block(b["name"], int(b["dim"]), bool(b["real"])))
        inst.scalars = list(d["scalars"])
        for g in d["rows"]:
            inst.rows.append(RowGroup({k: np.array(v, dtype=float) for k, v in g["blocks"].items()},
                                      {k: np.array(v, dtype=float) for k, v in g["scalars"].items()},
                                      np.array(g["rhs"], dtype=float), g.get("label", "")))
        ob = d["objective"]
        for k, v in ob["blocks"].items():
            e = np.array(v["entries"], dtype=float)
            inst.objective_blocks[k] = (e[:, 0] + 1j * e[:, 1]).reshape(v["shape"])
        inst.objective_scalars = {k: float(v) for k, v in ob["scalars"].items()}
        inst.objective_constant = float(ob["constant"])
        return inst


def dump_instance(inst: SdpInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh)


def load_instance(path) -> SdpInstance:
    with open(path) as fh:
        return SdpInstance.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------

@dataclass
class SdpSolution:
    status: str                    # optimal | infeasible | unbounded | numerical-failure
    value: float
    blocks: dict[str, np.ndarray]
    scalars: dict[str, float]
    dual_eq: np.ndarray            # multipliers of the real equality rows
    dual_blocks: dict[str, np.ndarray]
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    seconds: float
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def diagnostics(self) -> dict:
        return {"status": self.status, "primal_residual": self.primal_residual,
                "dual_residual": self.dual_residual, "gap": self.gap,
                "iterations": self.iterations, "seconds": self.seconds,
                "message": self.message}


class SolverCapExceeded(ValueError):
    pass


def _layout(inst: SdpInstance):
    offsets, pos = {}, 0
    for b in inst.blocks:
        offsets[b.name] = pos
        pos += b.nparams
    for s in inst.scalars:
        offsets[s] = pos
        pos += 1
    return offsets, pos


def _assemble(inst: SdpInstance):
    offsets, n = _layout(inst)
    a_rows, b_rows = [], []
    for g in inst.rows:
        rows = np.zeros((len(g.rhs), n))
        for name, coeff in g.blocks.items():
            blk = inst.block(name)
            rows[:, offsets[name]:offsets[name] + blk.nparams] += coeff
        for name, coeff in g.scalars.items():
            rows[:, offsets[name]] += coeff
        a_rows.append(rows)
        b_rows.append(g.rhs)
    a = np.vstack(a_rows) if a_rows else np.zeros((0, n))
    b = np.concatenate(b_rows) if b_rows else np.zeros(0)
    c = np.zeros(n)
    for name, cm in inst.objective_blocks.items():
        blk = inst.block(name)
        c[offsets[name]:offsets[name] + blk.nparams] = np.real(np.einsum("ij,pji->p", cm, hbasis(blk.dim, blk.real)))
    for name, v in inst.objective_scalars.items():
        c[offsets[name]] = v
    return offsets, n, a, b, c


def _independent_rows(a: np.ndarray, b: np.ndarray, tol: float):
    """Select a full-row-rank subset of A x = b; flag inconsistency of dropped rows."""
    keep = np.abs(a).max(axis=1, initial=0.0) > 0
    if not np.any(keep):
        bad = float(np.max(np.abs(b), initial=0.0))
        return np.zeros(0, dtype=int), bad
    idx = np.flatnonzero(keep)
    _, r, piv = scipy.linalg.qr(a[idx].T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-10 * diag[0]))
    sel = np.sort(idx[piv[:rank]])
    # consistency of all rows with the kept ones
    x0, *_ = np.linalg.lstsq(a[sel], b[sel], rcond=None)
    resid = float(np.max(np.abs(a @ x0 - b), initial=0.0))
    return sel, resid


KKT_SOLVER = "chol"


def solve(inst: SdpInstance, tol: float | None = None, tolerances: Tolerances = DEFAULT_TOL,
          max_iters: int = 100) -> SdpSolution:
    """Solve ``inst`` to accuracy ``tol`` (defaults to ``tolerances.sdp``)."""
    import cvxopt
    from cvxopt import solvers

    tol = tolerances.sdp if tol is None else tol
    if inst.total_block_dim > tolerances.solver_cap:
        raise SolverCapExceeded(f"total block dimension {inst.total_block_dim} exceeds cap {tolerances.solver_cap}")
    t0 = time.perf_counter()
    offsets, n, a, b, c = _assemble(inst)
    sign = -1.0 if inst.sense == "max" else 1.0

    sel, incons = _independent_rows(a, b, tol)
    if incons > 1e3 * tol * max(1.0, float(np.max(np.abs(b), initial=0.0))):
        return SdpSolution("infeasible", np.nan, {}, {}, np.zeros(len(b)), {}, incons, np.nan, np.nan, 0,
                           time.perf_counter() - t0, "inconsistent linear equalities")

    # cone constraints: G x + s = h, s in cone, i.e. -X(x) in -cone
    lin_cols, lin_idx = [], []
    psd_blocks = []
    for blk in inst.blocks:
        if blk.dim == 1 and blk.real:
            lin_idx.append(offsets[blk.name])
        else:
            psd_blocks.append(blk)
    g_parts, dims_s = [], []
    if lin_idx:
        gl = np.zeros((len(lin_idx), n))
        gl[np.arange(len(lin_idx)), lin_idx] = -1.0
        g_parts.append(gl)
    for blk in psd_blocks:
        cols = _cone_columns(blk.dim, blk.real)
        m = blk.dim if blk.real else 2 * blk.dim
        gs = np.zeros((m * m, n))
        gs[:, offsets[blk.name]:offsets[blk.name] + blk.nparams] = -cols
        g_parts.append(gs)
        dims_s.append(m)
    if not g_parts:
        raise ValueError("instance has no PSD blocks")
    g = np.vstack(g_parts)
    h = np.zeros(g.shape[0])
    dims = {"l": len(lin_idx), "q": [], "s": dims_s}

    a_red = a[sel]
    b_red = b[sel]
    scale = np.linalg.norm(a_red, axis=1) if len(sel) else np.zeros(0)
    scale[scale == 0] = 1.0
    a_red = a_red / scale[:, None]
    b_red = b_red / scale

    opts = {"show_progress": False, "abstol": tol, "reltol": tol, "feastol": tol, "maxiters": max_iters}
    kwargs = {}
    if len(sel):
        kwargs = {"A": cvxopt.matrix(a_red), "b": cvxopt.matrix(b_red)}
    try:
        gi, gj = np.nonzero(g)
        g_sp = cvxopt.spmatrix(g[gi, gj], gi.tolist(), gj.tolist(), g.shape)
        res = solvers.conelp(cvxopt.matrix(sign * c), g_sp, cvxopt.matrix(h), dims,
                             kktsolver=KKT_SOLVER, options=opts, **kwargs)
    except (ArithmeticError, ValueError) as exc:
        return SdpSolution("numerical-failure", np.nan, {}, {}, np.zeros(len(b)), {}, np.nan, np.nan, np.nan, 0,
                           time.perf_counter() - t0, f"solver error: {exc}")

    status = res["status"]
    iters = int(res.get("iterations", 0))
    y_full = np.zeros(len(b))
    if res.get("y") is not None and len(sel):
        y_full[sel] = np.array(res["y"]).ravel() / scale
    z = np.array(res["z"]).ravel() if res.get("z") is not None else None

    dual_blocks = {}
    if z is not None:
        pos = dims["l"]
        for blk, m in zip(psd_blocks, dims_s):
            zm = z[pos:pos + m * m].reshape(m, m).T
            pos += m * m
            if blk.real:
                dual_blocks[blk.name] = zm.astype(complex)
            else:
                k = blk.dim
                dual_blocks[blk.name] = (zm[:k, :k] + zm[k:, k:]) / 2 + 1j * (zm[k:, :k] - zm[:k, k:]) / 2

    if status == "primal infeasible":
        return SdpSolution("infeasible", np.nan, {}, {}, y_full, dual_blocks,
                           np.nan, np.nan, np.nan, iters, time.perf_counter() - t0,
                           "dual certificate of infeasibility")
    if status == "dual infeasible":
        return SdpSolution("unbounded", -np.inf * sign, {}, {}, y_full, dual_blocks,
                           np.nan, np.nan, np.nan, iters, time.perf_counter() - t0,
                           "primal improving ray")

    x = np.array(res["x"]).ravel()
    blocks = {}
    worst_psd = 0.0
    for blk in inst.blocks:
        xb = x[offsets[blk.name]:offsets[blk.name] + blk.nparams]
        mat = hmat(xb, blk.dim, blk.real)
        blocks[blk.name] = mat
        worst_psd = max(worst_psd, -float(np.linalg.eigvalsh(mat)[0]))
    scalars = {s: float(x[offsets[s]]) for s in inst.scalars}
    bscale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
    primal_res = max(float(np.max(np.abs(a @ x - b), initial=0.0)) / bscale, worst_psd)
    dual_res = float(res.get("dual infeasibility") or 0.0)
    pobj = float(res["primal objective"])
    dobj = float(res["dual objective"])
    gap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
    value = sign * pobj + inst.objective_constant

    ok = status == "optimal"
    if not ok and status == "unknown":
        # accept a stalled iterate only if it meets the same accuracy targets
        ok = primal_res <= 10 * tol and dual_res <= 10 * tol and gap <= 10 * tol
    return SdpSolution("optimal" if ok else "numerical-failure", value, blocks, scalars, y_full,
                       dual_blocks, primal_res, dual_res, gap, iters, time.perf_counter() - t0,
                       "" if ok else f"solver status {status!r}")


# ---------------------------------------------------------------------------
# Phase-I feasibility
# ---------------------------------------------------------------------------

@dataclass
class FeasibilityResult:
    status: str          # feasible | infeasible | numerical-failure
    margin: float        # largest m with all blocks >= m*I (capped at 1); < 0 means infeasible
    point: dict[str, np.ndarray]
    scalars: dict[str, float]
    solution: SdpSolution

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def phase_one(inst: SdpInstance) -> SdpInstance:
    """Minimize tau subject to X_b + tau I >= 0 and the original equalities, tau >= -1."""
    p1 = SdpInstance(sense="min", blocks=list(inst.blocks), scalars=list(inst.scalars) + ["_tau"])
    for g in inst.rows:
        tau_col = np.zeros(len(g.rhs))
        for name, coeff in g.blocks.items():
            blk = inst.block(name)
            tau_col -= coeff @ hvec(np.eye(blk.dim), blk.real)
        sc = dict(g.scalars)
        sc["_tau"] = tau_col
        p1.rows.append(RowGroup(dict(g.blocks), sc, g.rhs.copy(), g.label))
    p1.bound_scalar("_tau", lower=-1.0)
    p1.set_objective("min", scalars={"_tau": 1.0})
    return p1


def feasibility(inst: SdpInstance, tol: float | None = None,
                tolerances: Tolerances = DEFAULT_TOL) -> FeasibilityResult:
    """Decide whether the equalities and PSD constraints of ``inst`` admit a point.

    Feasible when the phase-I value tau* <= tol (point returned), infeasible
    when tau* > 10*tol; anything in between, or a solver failure, is reported
    as numerical-failure. The objective of ``inst`` is ignored.
    """
    tol = tolerances.sdp if tol is None else tol
    p1 = phase_one(inst)
    sol = solve(p1, tol, tolerances)
    if sol.status == "infeasible":
        # equalities alone are inconsistent
        return FeasibilityResult("infeasible", -np.inf, {}, {}, sol)
    if sol.status != "optimal":
        return FeasibilityResult("numerical-failure", np.nan, {}, {}, sol)
    tau = sol.scalars["_tau"]
    point = {b.name: sol.blocks[b.name] - tau * np.eye(b.dim) for b in inst.blocks}
    scalars = {s: sol.scalars[s] for s in inst.scalars}
    if tau <= tol:
        status = "feasible"
    elif tau > 10 * tol:
        status = "infeasible"
    else:
        status = "numerical-failure"
    return FeasibilityResult(status, -tau, point if status == "feasible" else {}, scalars, sol)
