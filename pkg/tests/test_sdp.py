"""Interior-point solver: toy problems, residual recomputation, invariants,
and the SDPA export."""

import random
from fractions import Fraction

import gmpy2
import pytest

from zetamult.sdp import (
    SdpError,
    SdpProblem,
    SolverSettings,
    recompute_residuals,
    solve,
    write_sdpa_sparse,
)


def toy_problem(rhs=Fraction(2)):
    return SdpProblem(
        blocks=[("X", 1)],
        equalities=[({("b", "X", 0, 0): Fraction(1)}, rhs)],
        objective={("b", "X", 0, 0): Fraction(1)},
    )


SETTINGS = SolverSettings(precision=128, gap_tol=1e-14, feas_tol=1e-18, max_iterations=100)


def test_toy_forced_by_equality():
    sol = solve(toy_problem(), SETTINGS)
    assert sol.status == "optimal"
    assert abs(float(sol.block_values["X"][0][0]) - 2) < 1e-10
    assert abs(float(sol.objective_primal) - 2) < 1e-10


def test_validation_rejects_empty():
    with pytest.raises(SdpError):
        solve(SdpProblem(blocks=[], equalities=[], objective={}), SETTINGS)
    with pytest.raises(SdpError):
        solve(SdpProblem(blocks=[("X", 1)], equalities=[], objective={}), SETTINGS)


def test_bad_keys_rejected():
    with pytest.raises(SdpError):
        SdpProblem(
            blocks=[("X", 2)],
            equalities=[({("b", "Y", 0, 0): Fraction(1)}, Fraction(0))],
            objective={},
        )
    with pytest.raises(SdpError):
        SdpProblem(
            blocks=[("X", 2)],
            equalities=[({("b", "X", 1, 0): Fraction(1)}, Fraction(0))],  # i > j
            objective={},
        )


def random_feasible_problem(seed: int, side=3, m=4, with_free=False):
    rng = random.Random(seed)
    X0 = [[Fraction(0)] * side for _ in range(side)]
    for i in range(side):
        X0[i][i] = Fraction(rng.randint(2, 6))
    for i in range(side):
        for j in range(i + 1, side):
            X0[i][j] = X0[j][i] = Fraction(1, rng.randint(4, 9))
    p0 = Fraction(rng.randint(-3, 3), 4)
    eqs = []
    for _ in range(m):
        row = {}
        rhs = Fraction(0)
        for i in range(side):
            for j in range(i, side):
                if rng.random() < 0.6:
                    c = Fraction(rng.randint(-3, 3))
                    if c:
                        row[("b", "X", i, j)] = c
                        rhs += c * X0[i][j]
        if with_free:
            fc = Fraction(rng.randint(-2, 2))
            if fc:
                row[("f", 0)] = fc
                rhs += fc * p0
        if row:
            eqs.append((row, rhs))
    obj = {("b", "X", i, i): Fraction(1) for i in range(side)}
    if with_free:
        obj[("f", 0)] = Fraction(1, 3)
    return SdpProblem(
        blocks=[("X", side)],
        equalities=eqs,
        objective=obj,
        free_names=["p0"] if with_free else [],
    )


@pytest.mark.parametrize("seed", [1, 2, 5])
@pytest.mark.parametrize("with_free", [False, True])
def test_random_feasible_solves(seed, with_free):
    prob = random_feasible_problem(seed, with_free=with_free)
    sol = solve(prob, SETTINGS)
    assert sol.status == "optimal"
    assert float(sol.residuals["primal_inf_norm"]) < 1e-12
    assert float(sol.residuals["dual_inf_norm"]) < 1e-12


def test_determinism_bit_identical():
    prob = random_feasible_problem(7, with_free=True)
    s1 = solve(prob, SETTINGS)
    s2 = solve(prob, SETTINGS)
    assert s1.iterations == s2.iterations
    assert s1.objective_primal == s2.objective_primal  # bit identical mpfr
    for name in s1.block_values:
        assert s1.block_values[name] == s2.block_values[name]
    assert s1.free_values == s2.free_values


def test_weak_duality_with_residual_slack():
    # exact identity: pobj - dobj = <X,S> + r_f.p - y.r_p with <X,S> >= 0,
    # so dobj <= pobj + |r_f.p| + |y.r_p| at every iterate
    prob = random_feasible_problem(3, with_free=True)
    sol = solve(prob, SETTINGS)
    for t in sol.trace:
        slack = float(t["rp_inf"]) * (1 + sum(abs(float(v)) for v in sol.y)) + float(
            t["rf_inf"]
        ) * (1 + sum(abs(float(v)) for v in sol.free_values))
        assert float(t["dual_obj"]) <= float(t["primal_obj"]) + 10 * slack + 1e-25


def test_monotone_complementarity_once_feasible():
    prob = random_feasible_problem(11)
    sol = solve(prob, SETTINGS)
    feas = [t for t in sol.trace if t["feasible"]]
    assert len(feas) >= 2
    for a, b in zip(feas, feas[1:]):
        assert float(b["mu"]) <= float(a["mu"]) * (1 + 1e-20)


def test_scaling_equivariance():
    prob = random_feasible_problem(9)
    lam = Fraction(7, 2)
    scaled = SdpProblem(
        blocks=prob.blocks,
        equalities=prob.equalities,
        objective={k: lam * v for k, v in prob.objective.items()},
        free_names=prob.free_names,
    )
    s1 = solve(prob, SETTINGS)
    s2 = solve(scaled, SETTINGS)
    assert s1.status == s2.status == "optimal"
    assert abs(float(s2.objective_primal) - float(lam) * float(s1.objective_primal)) < 1e-9


def test_infeasible_detected():
    # x >= 0 with x = -1 has no solution
    sol = solve(toy_problem(rhs=Fraction(-1)), SolverSettings(
        precision=128, gap_tol=1e-14, feas_tol=1e-18, max_iterations=200))
    assert sol.status in ("infeasible", "max_iterations")
    if sol.status == "max_iterations":
        # must not claim feasibility either way
        assert float(sol.residuals["primal_inf_norm"]) > 1e-6


def test_recompute_residuals_exact_point():
    prob = toy_problem()
    sol = solve(prob, SETTINGS)
    # replace with the exact feasible point: residual must vanish identically
    with gmpy2.context(precision=128):
        sol.block_values["X"] = [[gmpy2.mpfr(2)]]
        rep = recompute_residuals(prob, sol)
        assert float(rep["primal_inf_norm"]) == 0.0
        # perturb one entry by eps: residual >= eps * |coefficient|
        sol.block_values["X"] = [[gmpy2.mpfr(2) + gmpy2.mpfr(2) ** -40]]
        rep = recompute_residuals(prob, sol)
        assert abs(float(rep["primal_inf_norm"]) - 2.0 ** -40) < 1e-20


def test_recompute_residuals_shape_mismatch():
    prob = toy_problem()
    sol = solve(prob, SETTINGS)
    sol.block_values = {"X": [[gmpy2.mpfr(1), gmpy2.mpfr(0)], [gmpy2.mpfr(0), gmpy2.mpfr(1)]]}
    with pytest.raises(SdpError):
        recompute_residuals(prob, sol)


def test_settings_validation():
    with pytest.raises(SdpError):
        SolverSettings(precision=32)
    with pytest.raises(SdpError):
        SolverSettings(gap_tol=-1)
    with pytest.raises(SdpError):
        SolverSettings(step_damping=1.5)


def test_sdpa_export_roundtrip_structure(tmp_path):
    prob = random_feasible_problem(4)
    path = tmp_path / "prob.dat-s"
    write_sdpa_sparse(prob, str(path))
    lines = path.read_text().splitlines()
    m = int(lines[0])
    nblocks = int(lines[1])
    sides = [int(x) for x in lines[2].split()]
    assert m == prob.num_constraints
    assert nblocks == 1 and sides == [3]
    assert len(lines[3].split()) == m
    for ln in lines[4:]:
        matno, blk, i, j, val = ln.split()
        assert 0 <= int(matno) <= m
        assert int(blk) == 1
        assert 1 <= int(i) <= int(j) <= 3
        float(val)


def test_sdpa_export_refuses_free_variables(tmp_path):
    prob = random_feasible_problem(4, with_free=True)
    with pytest.raises(SdpError):
        write_sdpa_sparse(prob, str(tmp_path / "x.dat-s"))
