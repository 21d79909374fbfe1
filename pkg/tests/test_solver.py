import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from fictdom.pipeline import discretize, solve_problem
from fictdom.problems import ProblemSpec
from fictdom.solver import SingularMatrixError, build_saddle_system, solve_saddle


@pytest.fixture(scope="module")
def disc16():
    return discretize(ProblemSpec(n=16))


def test_dimension_mismatch_rejected():
    A = sp.eye(3)
    with pytest.raises(ValueError):
        build_saddle_system(A, sp.csr_matrix((2, 4)), sp.csr_matrix((2, 2)), np.zeros(3), np.zeros(2))
    with pytest.raises(ValueError):
        build_saddle_system(A, sp.csr_matrix((2, 3)), sp.csr_matrix((2, 2)), np.zeros(3), np.zeros(3))


def test_no_multipliers_reduces_to_stiffness_solve(disc16):
    s = disc16.system
    sys0 = build_saddle_system(s.A, sp.csr_matrix((0, s.n_u)), sp.csr_matrix((0, 0)), s.F, np.zeros(0))
    sol = solve_saddle(sys0)
    np.testing.assert_allclose(sol.U, spla.spsolve(s.A.tocsc(), s.F), rtol=1e-12)
    assert sol.lam.size == 0


@pytest.mark.parametrize("n", [8, 16, 32])
def test_system_dimension(n):
    d = discretize(ProblemSpec(n=n))
    assert d.system.block_matrix().shape[0] == (n - 1) ** 2 + len(d.fine)


def test_quadratic_form_identity(disc16):
    s = disc16.system
    rng = np.random.default_rng(0)
    for _ in range(20):
        V, M = rng.standard_normal(s.n_u), rng.standard_normal(s.n_l)
        expected = V @ (s.A @ V) + M @ (s.S @ M)
        K = s.block_matrix()
        x = np.concatenate([V, M])
        assert abs(x @ (K @ x) - expected) <= 1e-12 * abs(expected)
        assert abs(s.quadratic_form(V, M) - expected) <= 1e-12 * abs(expected)


def test_symmetric_form_has_same_solution(disc16):
    s = disc16.system
    K = s.symmetric_matrix()
    assert abs(K - K.T).max() == 0
    x = spla.spsolve(K.tocsc(), s.symmetric_rhs())
    sol = solve_saddle(s)
    np.testing.assert_allclose(x, np.concatenate([sol.U, sol.multipliers]), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("spec", [ProblemSpec(n=16), ProblemSpec(n=8, c_s=0, multiplier_space="macro"),
                                  ProblemSpec(n=24, a=0.37, c_s=10.0)])
def test_residual_contract(spec):
    disc, sol = solve_problem(spec)
    s = disc.system
    assert sol.residual_norm <= 1e-10 * (np.linalg.norm(s.F) + np.linalg.norm(s.G) + 1)
    assert np.all(sol.u[disc.mesh.boundary_vertex_mask()] == 0)
    assert sol.lam.shape == (len(disc.fine),)


def test_determinism():
    _, a = solve_problem(ProblemSpec(n=16))
    _, b = solve_problem(ProblemSpec(n=16))
    assert a.u.tobytes() == b.u.tobytes()
    assert a.lam.tobytes() == b.lam.tobytes()


def test_linear_scaling(disc16):
    s = disc16.system
    sol = solve_saddle(s)
    t = 3.7
    scaled = build_saddle_system(s.A, s.C, s.S, t * s.F, t * s.G)
    sol_t = solve_saddle(scaled)
    np.testing.assert_allclose(sol_t.U, t * sol.U, rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(sol_t.multipliers, t * sol.multipliers, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("n", [8, 16])
def test_singularity_matches_dense_rank(n):
    # independent check: SVD rank of the full block matrix
    for c_s, space, singular in [(0.1, "fine", False), (0.0, "fine", True), (0.0, "macro", False)]:
        d = discretize(ProblemSpec(n=n, c_s=c_s, multiplier_space=space))
        K = d.system.block_matrix().toarray()
        sv = np.linalg.svd(K, compute_uv=False)
        rank_deficient = sv.min() < 1e-12 * sv.max()
        assert rank_deficient == singular
        if singular:
            with pytest.raises(SingularMatrixError) as info:
                solve_saddle(d.system)
            assert info.value.rank == K.shape[0] - 1
            assert "singular" in str(info.value)
        else:
            solve_saddle(d.system)


def test_paper_multiplier_small_and_decreasing():
    norms = []
    for n in (8, 16, 32):
        _, sol = solve_problem(ProblemSpec(n=n))
        norms.append(np.abs(sol.lam).max())
    assert norms[0] > norms[1] > norms[2]
    assert norms[1] < 0.05


def test_report_fields(disc16):
    sol = solve_saddle(disc16.system)
    rep = sol.report
    assert rep.rank == disc16.system.n_u + disc16.system.n_l
    assert rep.relative_min_pivot > 1e-9
    assert not rep.near_singular
