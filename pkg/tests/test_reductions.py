import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compatdim.compat import pair_effect_value
from compatdim.povm import random_povm
from compatdim.reductions import (ReductionError, commutative_reduction, hermitian_span_basis, max_cross_element,
                                  scalar_reduction, span_dimension, tverberg_partition)
from compatdim.repro import qutrit_effects, qutrit_isometry


def test_span_dimension():
    assert span_dimension([np.eye(3)]) == 1
    assert span_dimension([np.diag([1, 0, 0]), np.diag([0, 1, 1])]) == 2
    e, f = qutrit_effects()
    assert span_dimension([e, f, np.eye(3) - e]) == 3
    basis = hermitian_span_basis([e, f])
    for b in basis[1:]:
        assert abs(np.trace(b)) < 1e-12


def test_commuting_diagonal_inputs():
    effects = [np.diag([1.0, 0.2, 0.5, 0.1]), np.diag([0.3, 0.3, 0.9, 0.0])]
    red = commutative_reduction(effects, 2)
    assert red.cross_error(effects) < 1e-9


def test_qutrit_pair_reduces_to_commuting():
    e, f = qutrit_effects()
    red = commutative_reduction([e, f], 2)
    v = red.isometry
    re, rf = v.conj().T @ e @ v, v.conj().T @ f @ v
    assert np.abs(re @ rf - rf @ re).max() < 1e-9
    assert pair_effect_value(re, rf) <= 1 + 1e-7


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_random_qutrit_pairs(seed):
    rng = np.random.default_rng(seed)
    effects = [random_povm(3, 2, rng)[0], random_povm(3, 2, rng)[0]]
    red = commutative_reduction(effects, 2, seed=seed)
    assert max_cross_element(red.isometry, effects) <= 1e-9
    assert np.abs(red.isometry.conj().T @ red.isometry - np.eye(2)).max() < 1e-12


def test_greedy_larger_dimension(rng):
    effects = [random_povm(7, 2, rng)[0], random_povm(7, 2, rng)[0]]
    red = commutative_reduction(effects, 3)
    assert red.method == "greedy" and red.cross_error(effects) < 1e-9


def test_precondition_reports_max_r(rng):
    effects = [random_povm(7, 2, rng)[0], random_povm(7, 2, rng)[0]]
    with pytest.raises(ReductionError) as exc:
        commutative_reduction(effects, 4)
    assert exc.value.max_r == 3


def test_tverberg_line():
    part = tverberg_partition([0, 1, 2], 2)
    assert part.parts == ((0, 2), (1,))
    assert abs(part.point[0] - 1) < 1e-9


def test_tverberg_square_diagonals():
    part = tverberg_partition([[0, 0], [1, 0], [1, 1], [0, 1]], 2)
    assert part.parts == ((0, 2), (1, 3))
    assert np.abs(part.point - 0.5).max() < 1e-9


def test_tverberg_single_part():
    part = tverberg_partition([[0, 0], [3, 1]], 1)
    assert part.parts == ((0, 1),)


def test_tverberg_too_few_points():
    with pytest.raises(ValueError):
        tverberg_partition([[0, 0], [1, 1], [2, 0]], 2)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 3), r=st.integers(2, 3))
def test_tverberg_random(seed, n, r):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal(((r - 1) * (n + 1) + 1, n))
    part = tverberg_partition(pts, r)
    for idx, w in zip(part.parts, part.weights):
        assert abs(w.sum() - 1) < 1e-12 and w.min() >= 0
        assert np.abs(w @ pts[list(idx)] - part.point).max() <= 1e-8


def test_scalar_multiples_of_identity():
    red = scalar_reduction([0.3 * np.eye(3), 0.7 * np.eye(3)], 2)
    assert np.abs(red.scalars - [0.3, 0.7]).max() < 1e-12


def test_scalar_single_effect():
    rng = np.random.default_rng(3)
    a = random_povm(4, 2, rng)[0]
    red = scalar_reduction([a], 2)
    assert red.error([a]) <= 1e-8


def test_scalar_three_outcomes():
    rng = np.random.default_rng(4)
    p = random_povm(9, 3, rng)
    red = scalar_reduction(list(p.effects), 2)
    assert red.error(p.effects) <= 1e-8
    assert abs(red.scalars.sum() - 1) < 1e-8


def test_scalar_precondition():
    rng = np.random.default_rng(5)
    p = random_povm(5, 3, rng)
    with pytest.raises(ReductionError):
        scalar_reduction(list(p.effects), 2)


def test_qutrit_fourier_effect_becomes_trivial():
    _, f = qutrit_effects()
    v = qutrit_isometry()
    assert np.abs(v.conj().T @ f @ v - np.eye(2) / 2).max() < 1e-12
    assert np.abs(v.conj().T @ (np.eye(3) - f) @ v - np.eye(2) / 2).max() < 1e-12
