import numpy as np
import pytest

from compatdim.config import DEFAULT_TOL
from compatdim.linalg import random_hermitian
from compatdim.sdp import (SdpInstance, SolverCapExceeded, dump_instance, feasibility, hmat, hvec, load_instance,
                           real_embedding, solve)


def test_hvec_roundtrip(rng):
    for real in (False, True):
        h = random_hermitian(4, rng)
        if real:
            h = h.real.astype(complex)
        assert np.abs(hmat(hvec(h, real), 4, real) - h).max() < 1e-14


def test_real_embedding_preserves_spectrum(rng):
    h = random_hermitian(3, rng)
    w = np.linalg.eigvalsh(h)
    we = np.linalg.eigvalsh(real_embedding(h))
    assert np.abs(np.sort(np.repeat(w, 2)) - we).max() < 1e-12


def test_scalar_lower_bound():
    inst = SdpInstance()
    inst.add_block("X", 1, real=True)
    inst.add_scalar("lam")
    inst.bound_scalar("lam", lower=1.0)
    inst.add_equality(1.0, blocks={"X": 1.0})
    inst.set_objective("min", scalars={"lam": 1.0})
    sol = solve(inst)
    assert sol.optimal and abs(sol.value - 1) < 1e-7


def test_max_trace_below_identity():
    inst = SdpInstance()
    inst.add_block("X", 2)
    inst.add_block("S", 2)
    inst.add_equality(np.eye(2), blocks={"X": 1.0, "S": 1.0})
    inst.set_objective("max", blocks={"X": np.eye(2)})
    sol = solve(inst)
    assert sol.optimal and abs(sol.value - 2) < 1e-7
    assert sol.primal_residual < 1e-8


def test_min_eigenvalue_as_sdp(rng):
    # max t s.t. H - t I >= 0 gives lambda_min(H)
    h = random_hermitian(4, rng)
    inst = SdpInstance()
    inst.add_block("S", 4)
    inst.add_scalar("t")
    inst.add_equality(h, blocks={"S": 1.0}, scalars={"t": np.eye(4)})
    inst.set_objective("max", scalars={"t": 1.0})
    sol = solve(inst)
    assert abs(sol.value - np.linalg.eigvalsh(h)[0]) < 1e-7


def test_trace_functional_equality():
    inst = SdpInstance()
    inst.add_block("X", 2)
    inst.add_equality(1.0, blocks={"X": np.eye(2)})
    inst.set_objective("min", blocks={"X": np.diag([1.0, 3.0])})
    sol = solve(inst)
    assert abs(sol.value - 1) < 1e-7
    assert np.abs(sol.blocks["X"] - np.diag([1, 0])).max() < 1e-4


def test_infeasible_equalities_detected():
    inst = SdpInstance()
    inst.add_block("X", 2)
    inst.add_equality(np.eye(2), blocks={"X": 1.0})
    inst.add_equality(2 * np.eye(2), blocks={"X": 1.0})
    assert solve(inst).status == "infeasible"


def test_phase_one_infeasible():
    inst = SdpInstance()
    inst.add_block("X", 2)
    inst.add_block("Y", 2)
    inst.add_equality(np.zeros((2, 2)), blocks={"X": 1.0, "Y": 1.0})
    inst.add_equality(1.0, blocks={"X": np.eye(2)})
    res = feasibility(inst)
    assert res.status == "infeasible" and res.margin < 0


def test_phase_one_feasible_point():
    inst = SdpInstance()
    inst.add_block("X", 2)
    inst.add_equality(1.0, blocks={"X": np.eye(2)})
    res = feasibility(inst)
    assert res.feasible and res.margin > 0
    assert abs(np.trace(res.point["X"]).real - 1) < 1e-8


def test_cap_enforced():
    inst = SdpInstance()
    inst.add_block("X", 10)
    with pytest.raises(SolverCapExceeded):
        solve(inst, tolerances=DEFAULT_TOL.with_(solver_cap=5))


def test_dump_load_roundtrip(tmp_path):
    inst = SdpInstance()
    inst.add_block("X", 2)
    inst.add_scalar("t")
    inst.add_equality(np.eye(2), blocks={"X": 1.0}, scalars={"t": np.diag([1.0, 0.0])})
    inst.bound_scalar("t", upper=0.5)
    inst.set_objective("max", scalars={"t": 1.0})
    path = tmp_path / "inst.json"
    dump_instance(inst, path)
    a, b = solve(inst), solve(load_instance(path))
    assert abs(a.value - b.value) < 1e-9 and abs(a.value - 0.5) < 1e-7


def test_agrees_with_cvxpy_on_random_discrimination(rng):
    cp = pytest.importorskip("cvxpy")
    d, k = 3, 3
    ops = []
    for _ in range(k):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        ops.append(g @ g.conj().T / k)
    inst = SdpInstance()
    names = [inst.add_block(f"G{j}", d) for j in range(k)]
    inst.add_equality(np.eye(d), blocks={n: 1.0 for n in names})
    inst.set_objective("max", blocks=dict(zip(names, ops)))
    ours = solve(inst).value
    gs = [cp.Variable((d, d), hermitian=True) for _ in range(k)]
    prob = cp.Problem(cp.Maximize(cp.real(sum(cp.trace(o @ g) for o, g in zip(ops, gs)))),
                      [g >> 0 for g in gs] + [sum(gs) == np.eye(d)])
    ref = prob.solve(solver=cp.CLARABEL)
    assert abs(ours - ref) < 1e-6 * max(1, abs(ref))
