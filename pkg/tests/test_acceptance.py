"""One test per acceptance criterion; wall-clock budgets are asserted alongside the values."""
import json
import time

import numpy as np
import pytest

from compatdim import io as jio
from compatdim.cloning import boundary_residual, clone_choi_feasible, in_gamma_clone
from compatdim.compat import (COMPATIBLE, INCOMPATIBLE, joint_measurability, marginal_error, noise_robustness,
                              pair_effect_value, post_guess, prior_guess, random_superensemble)
from compatdim.constructions import (fourier_matrix, lambda_interval, mub_family, mub_truncation_isometry, spin_povms,
                                     two_basis_tuple, zeta_lower_bound)
from compatdim.linalg import haar_isometry
from compatdim.povm import apply_noise, make_tuple, random_povm, reduce, von_neumann
from compatdim.reductions import commutative_reduction, max_cross_element
from compatdim.repro import case_five_dim, qutrit_effects, qutrit_isometry


@pytest.mark.xfail(strict=True, reason="stated E,F give 1.37414 on two independent solvers; 1.57735 = 1+1/sqrt(3) "
                                       "belongs to the sharp projectors |1><1|, |f1><f1|")
def test_criterion_1_qutrit_program_value():
    e, f = qutrit_effects()
    t0 = time.perf_counter()
    val = pair_effect_value(e, f)
    assert time.perf_counter() - t0 < 1.0
    assert abs(val - 1.577) <= 0.01


def test_criterion_1_qualitative_part():
    # the parts of criterion 1 that hold for the stated effects
    e, f = qutrit_effects()
    t0 = time.perf_counter()
    val = pair_effect_value(e, f)
    assert time.perf_counter() - t0 < 1.0
    assert val > 1
    v = qutrit_isometry()
    assert pair_effect_value(v.conj().T @ e @ v, v.conj().T @ f @ v) <= 1 + 1e-6


def test_criterion_2_mub_thresholds():
    t0 = time.perf_counter()
    for d in (2, 3, 4):
        t = noise_robustness(two_basis_tuple(fourier_matrix(d)))
        assert abs(t - 0.5 * (1 + 1 / (1 + np.sqrt(d)))) <= 1e-3
    assert time.perf_counter() - t0 < 10


def test_criterion_3_truncation_end_to_end():
    t0 = time.perf_counter()
    lam = 0.66
    assert lam in lambda_interval(2, 5)
    fam = mub_family(5, 3)
    pair = apply_noise(make_tuple(von_neumann(fam.bases[0]), von_neumann(fam.bases[1])), lam)
    assert joint_measurability(pair).verdict == INCOMPATIBLE
    assert joint_measurability(reduce(pair, mub_truncation_isometry(fam.bases[2], 2))).verdict == COMPATIBLE
    assert time.perf_counter() - t0 < 30


def test_criterion_4_five_dim_example():
    t0 = time.perf_counter()
    lines = case_five_dim(seed=0)
    assert time.perf_counter() - t0 < 60
    assert all(line.passed for line in lines), [line.row() for line in lines]


def test_criterion_5_spin_level_one():
    t0 = time.perf_counter()
    paulis = spin_povms(1)
    assert abs(noise_robustness(paulis) - 1 / np.sqrt(3)) <= 1e-3
    rng = np.random.default_rng(2024)
    for _ in range(20):
        u = rng.uniform(0, 1, 3)
        u = np.maximum(u, 1e-3) / u.max()
        norm = np.linalg.norm(u)
        assert abs(noise_robustness(paulis, u) * norm - 1) <= 1e-3
        assert joint_measurability(apply_noise(paulis, u * (1 - 2e-3) / norm)).verdict == COMPATIBLE
        assert joint_measurability(apply_noise(paulis, u * (1 + 2e-3) / norm)).verdict == INCOMPATIBLE
    assert time.perf_counter() - t0 < 60


def test_criterion_6_cloning_consistency():
    t0 = time.perf_counter()
    grid = np.linspace(0, 1, 21)
    compared = 0
    for a in grid:
        for b in grid:
            s = np.array([a, b])
            mem = in_gamma_clone(s, 2)
            if np.isfinite(mem.alpha_star) and mem.alpha_star > 0:
                # distance to the boundary along the ray
                if np.linalg.norm(s) * abs(1 - 1 / mem.alpha_star) <= 1e-3:
                    continue
            assert clone_choi_feasible(s, 2).feasible == mem.member, (a, b)
            compared += 1
    assert compared > 400
    for d in range(2, 7):
        s = (d + 2) / (2 * (d + 1))
        assert abs(boundary_residual([s, s], d)) <= 1e-9
    assert time.perf_counter() - t0 < 120


def test_criterion_7_zeta_fourier():
    t0 = time.perf_counter()
    f4 = fourier_matrix(4)
    b = zeta_lower_bound(f4)
    assert b.r >= 2
    k = np.array([[1, 0, 1, 0], [2, 1, 0, 1]], dtype=complex).T
    assert np.linalg.norm(k - b.subspace @ (b.subspace.conj().T @ k)) <= 1e-9
    assert joint_measurability(reduce(two_basis_tuple(f4), b.subspace)).verdict == COMPATIBLE
    assert time.perf_counter() - t0 < 5


def test_criterion_8_property_suites():
    rng = np.random.default_rng(8)
    # noise and reduction commute
    for _ in range(200):
        d = int(rng.integers(2, 6))
        r = int(rng.integers(1, d + 1))
        t = make_tuple(*(random_povm(d, int(rng.integers(2, 4)), rng) for _ in range(int(rng.integers(1, 4)))))
        w = rng.uniform(0, 1, t.g)
        v = haar_isometry(d, r, rng)
        lhs, rhs = reduce(apply_noise(t, w), v), apply_noise(reduce(t, v), w)
        assert max(np.abs(p.effects - q.effects).max() for p, q in zip(lhs, rhs)) <= 1e-12
    # any qutrit effect pair reduces to a commuting qubit pair
    for i in range(100):
        effects = [random_povm(3, 2, rng)[0], random_povm(3, 2, rng)[0]]
        red = commutative_reduction(effects, 2, seed=i)
        assert max_cross_element(red.isometry, effects) <= 1e-9
    # prior information never hurts
    for _ in range(50):
        d = int(rng.integers(2, 4))
        sup = random_superensemble(np.eye(d), [int(rng.integers(2, 4)) for _ in range(2)], rng)
        assert prior_guess(sup) >= post_guess(sup) - 1e-7
    # every verdict survives a JSON round trip with its joint POVM
    seen = set()
    for _ in range(30):
        d = int(rng.integers(2, 4))
        t = apply_noise(make_tuple(random_povm(d, 2, rng), random_povm(d, 3, rng)), float(rng.uniform(0.3, 1)))
        rep = joint_measurability(t)
        back = jio.report_from_json(json.loads(jio.write_json(jio.report_to_json(rep, t))))
        assert back.verdict == rep.verdict
        seen.add(rep.verdict)
        if rep.verdict == COMPATIBLE:
            assert marginal_error(back.joint, t) <= 1e-6
            v = np.eye(d, dtype=complex)
            cert = jio.certificate_from_json(json.loads(json.dumps(jio.make_certificate(jio.R_AT_LEAST, t, v).to_json())), t)
            assert cert.check(t)
    assert COMPATIBLE in seen
