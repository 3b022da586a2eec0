"""Command-line interface.

Exit codes: 0 success (check-compat: compatible), 1 incompatible (check-compat)
or a failing repro case, 2 undecided (check-compat) or usage error, 3 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import io as jio
from .cloning import boundary_residual, clone_choi_feasible, in_gamma_clone
from .compat import (COMPATIBLE, INCOMPATIBLE, joint_measurability, noise_robustness, post_guess, prior_guess,
                     witness_value)
from .config import DEFAULT_TOL, Tolerances
from .constructions import fourier_matrix, mub_family, spin_povms, spin_system, zeta_lower_bound
from .povm import reduce, validate_tuple
from .search import SearchBudget, bounds_summary

EXIT_OK, EXIT_INCOMPATIBLE, EXIT_UNDECIDED, EXIT_BAD_INPUT = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    output: str | None = None
    fmt: str = "json"
    tol: Tolerances = field(default_factory=lambda: DEFAULT_TOL)


def _config(ns) -> RunConfig:
    changes = {k: getattr(ns, k) for k in ("sdp", "psd", "kernel") if getattr(ns, k, None) is not None}
    return RunConfig(ns.command, ns.seed, ns.output, getattr(ns, "format", "json"), DEFAULT_TOL.with_(**changes))


def _emit(cfg: RunConfig, obj=None, text: str | None = None):
    out = text if text is not None else jio.write_json(obj)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(out if out.endswith("\n") else out + "\n")
    else:
        sys.stdout.write(out if out.endswith("\n") else out + "\n")


def _load_tuple(path, tol: Tolerances = DEFAULT_TOL):
    t = jio.tuple_from_json(jio.read_json(path))
    for x, chk in enumerate(validate_tuple(t, tol)):
        if not chk.ok:
            raise ValueError(f"POVM {x} is not valid: min eigenvalue {chk.min_eigenvalue:.3g}, "
                             f"normalization residual {chk.normalization_residual:.3g}")
    return t


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check_compat(ns, cfg):
    t = _load_tuple(ns.tuple, cfg.tol)
    rep = joint_measurability(t, cfg.tol)
    _emit(cfg, jio.report_to_json(rep, t))
    return {COMPATIBLE: EXIT_OK, INCOMPATIBLE: EXIT_INCOMPATIBLE}.get(rep.verdict, EXIT_UNDECIDED)


def cmd_robustness(ns, cfg):
    t = _load_tuple(ns.tuple, cfg.tol)
    direction = None if ns.direction is None else [float(x) for x in ns.direction.split(",")]
    val = noise_robustness(t, direction, ns.cap, cfg.tol)
    _emit(cfg, {"robustness": val, "direction": direction or [1.0] * t.g, "cap": ns.cap})
    return EXIT_OK


def cmd_reduce(ns, cfg):
    t = _load_tuple(ns.tuple, cfg.tol)
    obj = jio.read_json(ns.isometry)
    if isinstance(obj, dict) and "kind" in obj:
        v = jio.certificate_from_json(obj, t).isometry
    else:
        v = jio.isometry_from_json(obj)
    _emit(cfg, jio.tuple_to_json(reduce(t, v, cfg.tol.with_(iso=max(cfg.tol.iso, 1e-9)))))
    return EXIT_OK


def cmd_mub(ns, cfg):
    fam = mub_family(ns.dim, ns.count)
    _emit(cfg, {"dim": fam.dim, "bases": [jio.matrix_to_json(b) for b in fam.bases],
                "tuple": jio.tuple_to_json(fam.povms())})
    return EXIT_OK


def cmd_spin(ns, cfg):
    s = spin_system(ns.level)
    _emit(cfg, {"level": s.level, "dim": s.dim, "matrices": [jio.matrix_to_json(m) for m in s.matrices],
                "tuple": jio.tuple_to_json(spin_povms(ns.level))})
    return EXIT_OK


def cmd_fourier(ns, cfg):
    _emit(cfg, {"dim": ns.dim, "matrix": jio.matrix_to_json(fourier_matrix(ns.dim))})
    return EXIT_OK


def cmd_zeta(ns, cfg):
    obj = jio.read_json(ns.unitary)
    u = jio.matrix_from_json(obj["matrix"] if isinstance(obj, dict) else obj)
    b = zeta_lower_bound(u, ns.strategy, cfg.tol)
    _emit(cfg, {"r": b.r, "strategy": b.strategy,
                "z": None if b.perm is None else jio.matrix_to_json(b.perm.z[None, :])[0],
                "sigma": None if b.perm is None else list(b.perm.sigma),
                "subspace": jio.isometry_to_json(b.subspace)})
    return EXIT_OK


def cmd_bounds(ns, cfg):
    t = _load_tuple(ns.tuple, cfg.tol)
    third = None
    if ns.third_basis:
        obj = jio.read_json(ns.third_basis)
        third = jio.matrix_from_json(obj["matrix"] if isinstance(obj, dict) else obj)
    budget = SearchBudget(ns.restarts, ns.local_steps, ns.step_scale, cfg.seed)
    b = bounds_summary(t, budget, third, cfg.tol, ns.max_search_r)
    out = b.summary()
    if b.r_lower_isometry is not None:
        out["r_lower_certificate"] = jio.make_certificate(jio.R_AT_LEAST, t, b.r_lower_isometry).to_json()
    if b.r_bar_upper_isometry is not None:
        out["r_bar_upper_certificate"] = jio.make_certificate(jio.RBAR_BELOW, t, b.r_bar_upper_isometry).to_json()
    _emit(cfg, out)
    return EXIT_OK


def _clone_point(args):
    s, d, oracle = args
    mem = in_gamma_clone(s, d)
    row = list(s) + [bool(mem.member), mem.alpha_star, boundary_residual(s, d)]
    if oracle:
        row.append(clone_choi_feasible(s, d).status)
    return row


def cmd_clone_region(ns, cfg):
    grid = np.linspace(0, 1, ns.grid)
    points = [tuple(float(x) for x in p) for p in itertools.product(grid, repeat=ns.g)]
    jobs = [(p, ns.d, ns.choi) for p in points]
    if ns.workers > 1:
        with ProcessPoolExecutor(ns.workers) as ex:
            rows = list(ex.map(_clone_point, jobs, chunksize=16))
    else:
        rows = [_clone_point(j) for j in jobs]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = [f"s{i + 1}" for i in range(ns.g)] + ["member", "alpha_star", "boundary_residual"]
    w.writerow(header + (["choi"] if ns.choi else []))
    for row in rows:
        w.writerow([jio.fmt(x) if isinstance(x, float) else x for x in row])
    _emit(cfg, text=buf.getvalue())
    return EXIT_OK


def cmd_witness(ns, cfg):
    sup = jio.superensemble_from_json(jio.read_json(ns.superensemble))
    t = _load_tuple(ns.tuple, cfg.tol)
    pairing = witness_value(sup, t)
    post = post_guess(sup, cfg.tol)
    prior = prior_guess(sup, cfg.tol)
    _emit(cfg, {"pairing": pairing, "prior": prior, "post": post, "fires": bool(pairing > post + cfg.tol.sdp)})
    return EXIT_OK


def cmd_repro(ns, cfg):
    from .repro import run
    lines = run(ns.case, seed=cfg.seed)
    text = "\n".join(line.row() for line in lines)
    fails = sum(not line.passed for line in lines)
    text += f"\n{len(lines) - fails}/{len(lines)} checks passed\n"
    _emit(cfg, text=text)
    return EXIT_OK if fails == 0 else EXIT_INCOMPATIBLE


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--sdp", type=float, help="SDP tolerance override")
    common.add_argument("--psd", type=float, help="PSD tolerance override")
    common.add_argument("--kernel", type=float, help="kernel tolerance override")

    p = argparse.ArgumentParser(prog="compatdim", description="Compatibility of quantum measurements under dimension reduction.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-compat", parents=[common], help="joint measurability with certificate")
    s.add_argument("tuple")
    s.set_defaults(func=cmd_check_compat)

    s = sub.add_parser("robustness", parents=[common], help="largest uniform-noise weight keeping compatibility")
    s.add_argument("tuple")
    s.add_argument("--direction", help="comma-separated non-negative weights, one per POVM")
    s.add_argument("--cap", type=float, default=1.0)
    s.set_defaults(func=cmd_robustness)

    s = sub.add_parser("reduce", parents=[common], help="reduce a tuple by an isometry or certificate")
    s.add_argument("tuple")
    s.add_argument("isometry")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("mub", parents=[common], help="mutually unbiased bases in prime dimension")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--count", type=int, default=2)
    s.set_defaults(func=cmd_mub)

    s = sub.add_parser("spin", parents=[common], help="anticommuting spin system of a given level")
    s.add_argument("--level", type=int, required=True)
    s.set_defaults(func=cmd_spin)

    s = sub.add_parser("fourier", parents=[common], help="normalized Fourier matrix")
    s.add_argument("--dim", type=int, required=True)
    s.set_defaults(func=cmd_fourier)

    s = sub.add_parser("zeta", parents=[common], help="kernel lower bound for a unitary")
    s.add_argument("unitary")
    s.add_argument("--strategy", choices=["a", "b", "c", "all"], default="a")
    s.set_defaults(func=cmd_zeta)

    s = sub.add_parser("bounds", parents=[common], help="certified bounds on R and R-bar")
    s.add_argument("tuple")
    s.add_argument("--restarts", type=int, default=SearchBudget.restarts)
    s.add_argument("--local-steps", type=int, default=SearchBudget.local_steps)
    s.add_argument("--step-scale", type=float, default=SearchBudget.step_scale)
    s.add_argument("--max-search-r", type=int)
    s.add_argument("--third-basis", help="JSON unitary completing a MUB family, enables truncation")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("clone-region", parents=[common], help="CSV sweep of the cloning region")
    s.add_argument("--g", type=int, default=2)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--grid", type=int, default=21)
    s.add_argument("--choi", action="store_true", help="add the Choi-matrix SDP verdict column")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_clone_region)

    s = sub.add_parser("witness", parents=[common], help="witness pairing against guessing probabilities")
    s.add_argument("superensemble")
    s.add_argument("tuple")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("repro", parents=[common], help="recompute the reference cases")
    s.add_argument("--case", default="all")
    s.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = _config(ns)
    try:
        return ns.func(ns, cfg)
    except (ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"compatdim {ns.command}: {exc}\n")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
