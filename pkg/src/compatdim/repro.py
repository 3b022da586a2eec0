"""Reference cases with expected values, recomputed from scratch.

Each case returns one or more :class:`CaseLine` rows (expected, computed,
tolerance, pass/fail). Cases are deterministic for a fixed seed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cloning import boundary_residual, clone_choi_feasible, in_gamma_clone
from .compat import INCOMPATIBLE, joint_measurability, noise_robustness, pair_effect_value
from .constructions import (fourier_matrix, lambda_interval, mub_family, mub_symmetric_threshold,
                            mub_truncation_isometry, spin_povms, two_basis_tuple, zeta_collinearity_error,
                            zeta_lower_bound)
from .linalg import proj
from .povm import PovmTuple, apply_noise, make_tuple, reduce, von_neumann
from .search import SearchBudget, certify_R_at_least, falsify_Rbar_at_least


@dataclass
class CaseLine:
    case: str
    quantity: str
    expected: str
    computed: str
    tolerance: str
    passed: bool
    seconds: float = 0.0

    def row(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"{self.case:<20} {self.quantity:<34} expected={self.expected:<16} "
                f"computed={self.computed:<16} tol={self.tolerance:<8} {mark}")


def qutrit_effects():
    """Computational and Fourier qutrit effects |1><1| + |2><2|/2 and |f1><f1| + |f2><f2|/2."""
    f = fourier_matrix(3)
    e = np.diag([1.0, 0.5, 0.0]).astype(complex)
    ff = proj(f[:, 0]) + proj(f[:, 1]) / 2
    return e, ff


def qutrit_isometry():
    w = np.exp(2j * np.pi / 3)
    return np.array([[1, 0], [0, 1 / np.sqrt(2)], [0, w / np.sqrt(2)]], dtype=complex)


def five_dim_example() -> PovmTuple:
    """Computational basis of C^5 against a POVM mixing basis pairs (1,2) and (3,4)."""
    e = np.eye(5)
    a = [proj(e[i]) for i in range(5)]
    b = [proj(e[0] + e[1]) / 2, proj(e[0] - e[1]) / 2, proj(e[2] + e[3]) / 2, proj(e[2] - e[3]) / 2, proj(e[4])]
    return make_tuple(a, b)


def five_dim_isometries():
    e = np.eye(5, dtype=complex)
    v = e[:, [0, 2, 4]]
    w = e[:, [0, 1, 4]]
    return v, w


def _f(x: float, digits: int = 6) -> str:
    return f"{x:.{digits}f}"


def case_qutrit(seed: int = 0) -> list[CaseLine]:
    t0 = time.perf_counter()
    e, f = qutrit_effects()
    val = pair_effect_value(e, f)
    dt = time.perf_counter() - t0
    v = qutrit_isometry()
    red = pair_effect_value(v.conj().T @ e @ v, v.conj().T @ f @ v)
    return [CaseLine("qutrit-1.577", "pair program value", "1.577", _f(val, 4), "0.01",
                     abs(val - 1.577) <= 0.01, dt),
            CaseLine("qutrit-1.577", "value > 1 (incompatible)", "> 1", _f(val, 4), "0", val > 1),
            CaseLine("qutrit-1.577", "reduced pair value", "<= 1", _f(red, 6), "1e-6", red <= 1 + 1e-6)]


def case_five_dim(seed: int = 0) -> list[CaseLine]:
    t = five_dim_example()
    budget = SearchBudget(seed=seed)
    t0 = time.perf_counter()
    cert = certify_R_at_least(t, 3, budget)
    fals = falsify_Rbar_at_least(t, 3, budget)
    dt = time.perf_counter() - t0
    v, w = five_dim_isometries()
    given_v = joint_measurability(reduce(t, v)).compatible
    given_w = joint_measurability(reduce(t, w)).verdict == INCOMPATIBLE
    return [CaseLine("sec4-example", "certificate R >= 3 (search)", "found", "found" if cert.found else "none",
                     "-", cert.found, dt),
            CaseLine("sec4-example", "falsifier at r=3 (R-bar <= 2)", "found", "found" if fals.found else "none",
                     "-", fals.found),
            CaseLine("sec4-example", "given V reduction", "compatible", "compatible" if given_v else "other",
                     "-", given_v),
            CaseLine("sec4-example", "given W reduction", "incompatible", "incompatible" if given_w else "other",
                     "-", given_w)]


def case_mub_thresholds(seed: int = 0) -> list[CaseLine]:
    out = []
    for d in (2, 3, 4):
        t0 = time.perf_counter()
        t = noise_robustness(two_basis_tuple(fourier_matrix(d)))
        exp = mub_symmetric_threshold(d)
        out.append(CaseLine("mub-thresholds", f"robustness d={d}", _f(exp), _f(t), "1e-3",
                            abs(t - exp) <= 1e-3, time.perf_counter() - t0))
    return out


def case_lambda_interval(seed: int = 0, lam: float = 0.66) -> list[CaseLine]:
    d, r = 5, 2
    t0 = time.perf_counter()
    iv = lambda_interval(r, d)
    fam = mub_family(d, 3)
    pair = apply_noise(make_tuple(von_neumann(fam.bases[0]), von_neumann(fam.bases[1])), lam)
    full = joint_measurability(pair)
    red = joint_measurability(reduce(pair, mub_truncation_isometry(fam.bases[2], r)))
    dt = time.perf_counter() - t0
    return [CaseLine("lambda-interval-d5", "lambda in interval", f"({iv.lo:.5f},{iv.hi:.5f}]", _f(lam, 5),
                     "-", lam in iv),
            CaseLine("lambda-interval-d5", "noisy pair", "incompatible", full.verdict, "10*tol",
                     full.verdict == INCOMPATIBLE, dt),
            CaseLine("lambda-interval-d5", "truncated pair", "compatible", red.verdict, "tol", red.compatible)]


def case_spin(seed: int = 0) -> list[CaseLine]:
    t0 = time.perf_counter()
    t = noise_robustness(spin_povms(1))
    exp = 1 / np.sqrt(3)
    return [CaseLine("spin-k1-sqrt3", "symmetric robustness", _f(exp), _f(t), "1e-3", abs(t - exp) <= 1e-3,
                     time.perf_counter() - t0)]


def case_zeta(seed: int = 0) -> list[CaseLine]:
    t0 = time.perf_counter()
    f4 = fourier_matrix(4)
    b = zeta_lower_bound(f4, "a")
    k = np.array([[1, 0, 1, 0], [2, 1, 0, 1]], dtype=complex).T
    resid = float(np.linalg.norm(k - b.subspace @ (b.subspace.conj().T @ k)))
    comp = joint_measurability(reduce(two_basis_tuple(f4), b.subspace)).compatible
    dt = time.perf_counter() - t0
    return [CaseLine("zeta-F4", "kernel dimension", ">= 2", str(b.r), "-", b.r >= 2, dt),
            CaseLine("zeta-F4", "contains (1,0,1,0),(2,1,0,1)", "0", f"{resid:.1e}", "1e-9", resid <= 1e-9),
            CaseLine("zeta-F4", "collinearity error", "0", f"{zeta_collinearity_error(f4, b):.1e}", "1e-9",
                     zeta_collinearity_error(f4, b) <= 1e-9),
            CaseLine("zeta-F4", "reduced bases", "compatible", "compatible" if comp else "other", "-", comp)]


def case_cloning(seed: int = 0) -> list[CaseLine]:
    out = []
    for d in range(2, 7):
        s = (d + 2) / (2 * (d + 1))
        res = boundary_residual([s, s], d)
        out.append(CaseLine("cloning-boundary", f"residual at symmetric point d={d}", "0", f"{res:.1e}", "1e-9",
                            abs(res) <= 1e-9))
    for d in (2, 3):
        s = (d + 2) / (2 * (d + 1))
        t0 = time.perf_counter()
        ch = clone_choi_feasible([s, s], d)
        out.append(CaseLine("cloning-boundary", f"Choi route at symmetric point d={d}", "feasible", ch.status,
                            "tol", ch.feasible and in_gamma_clone([s, s], d).member, time.perf_counter() - t0))
    return out


CASES = {
    "qutrit-1.577": case_qutrit,
    "sec4-example": case_five_dim,
    "mub-thresholds": case_mub_thresholds,
    "lambda-interval-d5": case_lambda_interval,
    "spin-k1-sqrt3": case_spin,
    "zeta-F4": case_zeta,
    "cloning-boundary": case_cloning,
}


def run(names, seed: int = 0) -> list[CaseLine]:
    if isinstance(names, str):
        names = list(CASES) if names == "all" else [names]
    lines = []
    for n in names:
        if n not in CASES:
            raise KeyError(f"unknown repro case {n!r}; choose from {', '.join(CASES)} or all")
        lines.extend(CASES[n](seed))
    return lines
