import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compatdim.cloning import (boundary_residual, choi_adjoint, clone_choi_feasible, depolarizing_choi,
                               embed_on_clone, in_gamma_clone, ray_scaling)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_symmetric_point_on_boundary(d):
    s = (d + 2) / (2 * (d + 1))
    assert abs(boundary_residual([s, s], d)) < 1e-9
    assert in_gamma_clone([s, s], d).member
    assert not in_gamma_clone([s + 1e-3, s + 1e-3], d).member


def test_residual_negative_at_origin():
    for g in (2, 3):
        for d in (2, 3):
            assert boundary_residual(np.zeros(g), d) == pytest.approx(-(d - 1) ** 2 * (g + d))


def test_trivial_members():
    assert in_gamma_clone([0, 0], 2).member
    assert in_gamma_clone([1.0], 3).member


def test_perfect_clones_excluded():
    m = in_gamma_clone([1, 1], 2)
    assert not m.member and m.alpha_star == pytest.approx(2 / 3)


def test_one_perfect_clone_with_useless_partner():
    m = in_gamma_clone([1, 0], 2)
    assert m.member and m.method == "choi"


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        in_gamma_clone([1.2, 0.1], 2)
    with pytest.raises(ValueError):
        in_gamma_clone([0.5, 0.5], 1)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.05, 1), b=st.floats(0.05, 1), d=st.integers(2, 5))
def test_region_is_down_set_along_rays(a, b, d):
    alpha = ray_scaling([a, b], d)
    assert in_gamma_clone([alpha * a * 0.999, alpha * b * 0.999], d).member
    if alpha * max(a, b) < 1:
        assert not in_gamma_clone([min(1, alpha * a * 1.001), min(1, alpha * b * 1.001)], d).member


def test_depolarizing_choi_trace():
    j = depolarizing_choi(0.3, 3)
    assert abs(np.trace(j) - 3) < 1e-12
    assert np.linalg.eigvalsh(j).min() > -1e-12


@pytest.mark.parametrize("s,d,expected", [((2 / 3, 2 / 3), 2, True), ((0.7, 0.7), 2, False),
                                          ((0.66, 0.66), 2, True), ((5 / 8, 5 / 8), 3, True),
                                          ((0.6, 0.6), 3, True), ((0.8, 0.4), 2, None)])
def test_choi_route_matches_formula(s, d, expected):
    ch = clone_choi_feasible(s, d)
    formula = in_gamma_clone(s, d).member
    assert ch.status in ("feasible", "infeasible")
    assert ch.feasible == formula
    if expected is not None:
        assert formula == expected


def test_choi_marginals_give_depolarizing_adjoint():
    s = [0.6, 0.55]
    ch = clone_choi_feasible(s, 2)
    psi = choi_adjoint(ch.choi, 2, 2)
    rng = np.random.default_rng(0)
    b = rng.standard_normal((2, 2))
    b = b + b.T
    for x in range(2):
        out = psi(embed_on_clone(b, 2, 2, x))
        assert np.abs(out - (s[x] * b + (1 - s[x]) * np.trace(b) / 2 * np.eye(2))).max() < 1e-6
    assert np.abs(psi(np.eye(4)) - np.eye(2)).max() < 1e-6


def test_choi_cap():
    with pytest.raises(ValueError):
        clone_choi_feasible([0.5] * 5, 3)
