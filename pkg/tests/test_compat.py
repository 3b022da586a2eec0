import numpy as np
import pytest

from compatdim.compat import (COMPATIBLE, INCOMPATIBLE, Ensemble, SuperEnsemble, cloning_criterion,
                              cloning_parameters, dimension_noise_threshold, intrinsic_noise, joint_measurability,
                              marginal_error, noise_robustness, pair_effect_value, post_guess, prior_guess,
                              random_superensemble, restricted_witness_check, witness_value)
from compatdim.constructions import fourier_matrix, mub_symmetric_threshold, spin_povms, two_basis_tuple
from compatdim.linalg import haar_isometry, proj
from compatdim.povm import apply_noise, make_tuple, random_povm, reduce, trivial_povm, validate, von_neumann
from compatdim.repro import five_dim_example, five_dim_isometries, qutrit_effects, qutrit_isometry

from conftest import binary_povm

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def qubit_mub():
    return make_tuple(von_neumann(np.eye(2)), von_neumann(H))


def test_identical_bases_compatible():
    a = von_neumann(np.eye(3))
    rep = joint_measurability(make_tuple(a, a))
    assert rep.verdict == COMPATIBLE
    assert rep.robustness >= 1 - 1e-8
    assert validate(rep.joint.flat()).ok


def test_z_and_x_bases_incompatible():
    rep = joint_measurability(qubit_mub())
    assert rep.verdict == INCOMPATIBLE and rep.joint is None
    assert rep.robustness == pytest.approx(1 / np.sqrt(2), abs=1e-6)


def test_five_dim_reduction_compatible():
    v, w = five_dim_isometries()
    t = five_dim_example()
    assert joint_measurability(t).verdict == INCOMPATIBLE
    assert joint_measurability(reduce(t, v)).verdict == COMPATIBLE
    assert joint_measurability(reduce(t, w)).verdict == INCOMPATIBLE


def test_zero_effects_are_pruned_and_restored():
    v, _ = five_dim_isometries()
    t = reduce(five_dim_example(), v)
    rep = joint_measurability(t)
    assert rep.joint.outcome_shape == (5, 5)
    assert marginal_error(rep.joint, t) < 1e-7


@pytest.mark.parametrize("d", [2, 3, 4])
def test_mub_robustness(d):
    assert noise_robustness(two_basis_tuple(fourier_matrix(d))) == pytest.approx(mub_symmetric_threshold(d), abs=1e-6)


def test_robustness_capped_for_compatible():
    assert noise_robustness(make_tuple(trivial_povm(2, 2), von_neumann(H))) == pytest.approx(1.0, abs=1e-7)


def test_pauli_triple_robustness():
    assert noise_robustness(spin_povms(1)) == pytest.approx(1 / np.sqrt(3), abs=1e-6)


def test_directional_robustness(paulis):
    x, _, z = paulis
    t = noise_robustness(make_tuple(binary_povm(x), binary_povm(z)), direction=[1.0, 0.5])
    # compatible iff t1^2 + t2^2 <= 1 for a pair of orthogonal spin directions
    assert t == pytest.approx(1 / np.sqrt(1.25), abs=1e-6)


def test_robustness_rejects_bad_direction():
    with pytest.raises(ValueError):
        noise_robustness(qubit_mub(), direction=[1.0])
    with pytest.raises(ValueError):
        noise_robustness(qubit_mub(), direction=[1.0, -0.1])


def test_monotone_under_reduction(rng):
    t = make_tuple(random_povm(3, 3, rng, rank=1), random_povm(3, 4, rng, rank=1))
    base = noise_robustness(t)
    for _ in range(5):
        assert noise_robustness(reduce(t, haar_isometry(3, 2, rng))) >= base - 1e-7


def test_pair_effect_trivial():
    assert pair_effect_value(np.eye(2) / 2, np.eye(2) / 2) <= 1 + 1e-8


def test_pair_effect_rejects_non_effects():
    with pytest.raises(ValueError):
        pair_effect_value(np.diag([1.5, 0.0]), np.eye(2) / 2)
    with pytest.raises(ValueError):
        pair_effect_value(np.array([[0, 1], [0, 0]]), np.eye(2) / 2)


def test_pair_effect_qutrit_matches_independent_solver():
    cp = pytest.importorskip("cvxpy")
    e, f = qutrit_effects()
    x = cp.Variable((3, 3), hermitian=True)
    lam = cp.Variable()
    prob = cp.Problem(cp.Minimize(lam), [x >> 0, e - x >> 0, f - x >> 0, lam * np.eye(3) + x - e - f >> 0])
    ref = prob.solve(solver=cp.CLARABEL)
    ours = pair_effect_value(e, f)
    assert abs(ours - ref) < 1e-6
    assert ours > 1


def test_pair_effect_sharp_qutrit_projectors():
    f3 = fourier_matrix(3)
    # rank-one projectors with overlap 1/3 give 1 + 1/sqrt(3)
    val = pair_effect_value(proj(np.eye(3)[0]), proj(f3[:, 0]))
    assert val == pytest.approx(1 + 1 / np.sqrt(3), abs=1e-6)


def test_pair_effect_reduced_qutrit_commutes():
    e, f = qutrit_effects()
    v = qutrit_isometry()
    re, rf = v.conj().T @ e @ v, v.conj().T @ f @ v
    assert np.abs(re - np.diag([1, 0.25])).max() < 1e-12
    assert np.abs(rf - np.eye(2) / 2).max() < 1e-12
    assert pair_effect_value(re, rf) <= 1 + 1e-7


def test_cloning_parameters_of_noisy_mubs():
    t = apply_noise(qubit_mub(), 2 / 3)
    s = cloning_parameters(t)
    assert np.abs(s - 2 / 3).max() < 1e-12
    assert cloning_criterion(t).verdict == COMPATIBLE


def test_cloning_criterion_sharp_is_inconclusive():
    v = cloning_criterion(qubit_mub())
    assert np.abs(v.s - 1).max() < 1e-12 and v.verdict == "undecided"


def test_cloning_criterion_trivial():
    v = cloning_criterion(make_tuple(trivial_povm(3, 2), trivial_povm(3, 4)))
    assert np.abs(v.s).max() < 1e-12 and v.verdict == COMPATIBLE


def test_cloning_criterion_rejects_zero_trace():
    t = make_tuple(von_neumann(np.eye(2)), [np.eye(2), np.zeros((2, 2))])
    with pytest.raises(ValueError):
        cloning_criterion(t)


@pytest.mark.parametrize("d", [2, 3])
def test_cloning_criterion_sound(d):
    rng = np.random.default_rng(d)
    hits = 0
    for _ in range(12):
        t = apply_noise(make_tuple(random_povm(d, 2, rng), random_povm(d, 3, rng)), rng.uniform(0.2, 0.8))
        if cloning_criterion(t).verdict == COMPATIBLE:
            hits += 1
            assert joint_measurability(t).verdict == COMPATIBLE
    assert hits > 0


def _ens(states, p):
    return Ensemble(np.array(states), p)


def test_guessing_single_state():
    sup = SuperEnsemble((_ens([proj([1, 0])], [1.0]),), [1.0])
    assert prior_guess(sup) == pytest.approx(1, abs=1e-7)


def test_guessing_orthogonal_states():
    sup = SuperEnsemble((_ens([proj([1, 0]), proj([0, 1])], [0.5, 0.5]),), [1.0])
    assert prior_guess(sup) == pytest.approx(1, abs=1e-7)


def test_helstrom_value():
    plus = np.array([1, 1]) / np.sqrt(2)
    sup = SuperEnsemble((_ens([proj([1, 0]), proj(plus)], [0.5, 0.5]),), [1.0])
    s1, s2 = proj([1, 0]), proj(plus)
    brute = 0.5 * (1 + 0.5 * np.abs(np.linalg.eigvalsh(s1 - s2)).sum())
    assert prior_guess(sup) == pytest.approx(brute, abs=1e-7)
    assert brute == pytest.approx((1 + 1 / np.sqrt(2)) / 2)
    assert post_guess(sup) == pytest.approx(prior_guess(sup), abs=1e-7)


def basis_superensemble():
    t = qubit_mub()
    return SuperEnsemble((_ens(t[0].effects, [0.5, 0.5]), _ens(t[1].effects, [0.5, 0.5])), [0.5, 0.5]), t


def test_post_below_prior_for_mub_superensemble():
    sup, t = basis_superensemble()
    assert prior_guess(sup) == pytest.approx(1, abs=1e-7)
    assert post_guess(sup) < 1 - 1e-3
    assert witness_value(sup, t) == pytest.approx(1)
    assert witness_value(sup, t) > post_guess(sup)


def test_duplicate_ensembles_post_equals_prior():
    plus = np.array([1, 1]) / np.sqrt(2)
    e = _ens([proj([1, 0]), proj(plus)], [0.3, 0.7])
    sup = SuperEnsemble((e, e), [0.4, 0.6])
    assert post_guess(sup) == pytest.approx(prior_guess(sup), abs=1e-6)


def test_witness_of_trivial_povms():
    sup, _ = basis_superensemble()
    t = make_tuple(trivial_povm(2, 2), trivial_povm(2, 2))
    assert witness_value(sup, t) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        witness_value(sup, make_tuple(trivial_povm(2, 3), trivial_povm(2, 2)))


def test_compatible_tuple_never_beats_post(rng):
    t = apply_noise(qubit_mub(), 0.6)
    for _ in range(10):
        sup = random_superensemble(np.eye(2), t.outcome_counts, rng)
        assert witness_value(sup, t) <= post_guess(sup) + 1e-7


def test_restricted_witness_on_compatible_subspace():
    v, _ = five_dim_isometries()
    assert restricted_witness_check(five_dim_example(), v, samples=6, seed=1) <= 1e-7


def test_restricted_witness_finds_qubit_violation():
    assert restricted_witness_check(qubit_mub(), np.eye(2), samples=64, seed=0) > 0


def test_restricted_witness_one_dimensional():
    t = five_dim_example()
    assert restricted_witness_check(t, haar_isometry(5, 1, 3), samples=5, seed=2) <= 1e-7


def test_ensemble_validation():
    with pytest.raises(ValueError):
        Ensemble(np.array([np.eye(2)]), [1.0])
    with pytest.raises(ValueError):
        Ensemble(np.array([proj([1, 0])]), [0.5])


def test_dimension_noise_threshold_values():
    assert np.abs(dimension_noise_threshold((2, 2), 2) - 0.25).max() < 1e-15
    assert dimension_noise_threshold((3,), 2)[0] == pytest.approx(1 / 8)
    assert np.abs(dimension_noise_threshold((2, 5), 1) - [0.5, 0.125]).max() < 1e-15
    with pytest.raises(ValueError):
        dimension_noise_threshold((1, 2), 2)
    with pytest.raises(ValueError):
        dimension_noise_threshold((2, 2), 0)


def test_dimension_noise_threshold_guarantee(rng):
    d, r = 4, 2
    ks = (2, 3)
    t = dimension_noise_threshold(ks, r)
    for _ in range(4):
        tup = make_tuple(random_povm(d, ks[0], rng, rank=2), random_povm(d, ks[1], rng, rank=2))
        red = reduce(apply_noise(tup, t), haar_isometry(d, r, rng))
        assert joint_measurability(red).verdict == COMPATIBLE


def test_intrinsic_noise_recovers_weight():
    t = apply_noise(qubit_mub(), [0.3, 0.8])
    assert np.abs(intrinsic_noise(t) - [0.3, 0.8]).max() < 1e-12
