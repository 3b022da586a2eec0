import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compatdim.linalg import haar_isometry
from compatdim.povm import (JointPovm, Povm, PovmTuple, apply_noise, make_tuple, marginal, noisy,
                            pairwise_commuting, random_povm, reduce, trivial_povm, validate, von_neumann)


def test_validate_flags_negative_effect():
    p = Povm([np.diag([1.2, 0.5]), np.diag([-0.2, 0.5])])
    chk = validate(p)
    assert not chk.ok
    assert chk.worst_effect == 1
    assert abs(chk.min_eigenvalue + 0.2) < 1e-12


def test_validate_flags_normalization():
    chk = validate(Povm([np.eye(2) * 0.5, np.eye(2) * 0.4]))
    assert not chk.ok and abs(chk.normalization_residual - 0.1) < 1e-12


def test_povm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        Povm([np.array([[0, 1], [0, 0]]), np.eye(2)])


def test_tuple_rejects_mixed_dims():
    with pytest.raises(ValueError):
        make_tuple(trivial_povm(2, 2), trivial_povm(3, 2))


def test_noise_endpoints(rng):
    p = random_povm(3, 4, rng)
    assert np.abs(noisy(p, 1.0).effects - p.effects).max() < 1e-15
    assert np.abs(noisy(p, 0.0).effects - trivial_povm(3, 4).effects).max() < 1e-15
    with pytest.raises(ValueError):
        noisy(p, 1.5)


@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 5), k=st.integers(2, 4), t=st.floats(0, 1), seed=st.integers(0, 10_000), data=st.data())
def test_noise_commutes_with_reduction(d, k, t, seed, data):
    rng = np.random.default_rng(seed)
    r = data.draw(st.integers(1, d))
    tup = make_tuple(random_povm(d, k, rng))
    v = haar_isometry(d, r, rng)
    a = reduce(apply_noise(tup, t), v)[0].effects
    b = apply_noise(reduce(tup, v), t)[0].effects
    assert np.abs(a - b).max() < 1e-12


def test_reduction_preserves_povm(rng):
    p = random_povm(4, 3, rng)
    red = reduce(make_tuple(p), haar_isometry(4, 2, rng))[0]
    assert validate(red).ok


def test_reduce_rejects_bad_isometry():
    tup = make_tuple(trivial_povm(3, 2))
    with pytest.raises(ValueError):
        reduce(tup, np.ones((3, 2)))
    with pytest.raises(ValueError):
        reduce(tup, np.eye(4)[:, :2])


def test_marginals_of_diagonal_joint():
    a = von_neumann(np.eye(3))
    joint = np.zeros((3, 3, 3, 3), dtype=complex)
    for i in range(3):
        joint[i, i] = a[i]
    j = JointPovm(joint)
    for x in range(2):
        assert np.abs(marginal(j, x).effects - a.effects).max() < 1e-15
    with pytest.raises(IndexError):
        marginal(j, 2)


def test_commutator_of_z_and_x_bases():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    tup = make_tuple(von_neumann(np.eye(2)), von_neumann(h))
    assert pairwise_commuting(tup) > 0.4
    assert pairwise_commuting(make_tuple(von_neumann(np.eye(2)), trivial_povm(2, 3))) < 1e-15


def test_random_povm_is_valid(rng):
    for rank in (1, 2, None):
        assert validate(random_povm(3, 5, rng, rank)).ok


def test_random_povm_rank_too_small(rng):
    with pytest.raises(ValueError):
        random_povm(4, 2, rng, rank=1)
