import numpy as np
import pytest

from ldgshishkin import (
    DGFunction2D,
    MeshConfig,
    MixedSolution2D,
    assemble_2d,
    balanced_norm_2d,
    bilinear_form_2d,
    build_shishkin_2d,
    energy_norm_2d,
    error_norms_2d,
    load_functional_2d,
    manufactured_2d_problem,
    solve_ldg_2d,
)
from ldgshishkin.problems import Problem2D


def const_b(value):
    def b(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.full(np.broadcast_shapes(x.shape, y.shape), value)
    return b


def make_mesh(N, eps, sigma=2.0):
    return build_shishkin_2d(MeshConfig(N=N, eps=eps, sigma=sigma))


def poly_problem_2d(eps):
    u = lambda x, y: np.asarray(x) * (1 - np.asarray(x)) * np.asarray(y) * (1 - np.asarray(y))
    ux = lambda x, y: (1 - 2 * np.asarray(x)) * np.asarray(y) * (1 - np.asarray(y))
    uy = lambda x, y: np.asarray(x) * (1 - np.asarray(x)) * (1 - 2 * np.asarray(y))
    lap = lambda x, y: -2 * np.asarray(y) * (1 - np.asarray(y)) - 2 * np.asarray(x) * (1 - np.asarray(x))
    f = lambda x, y: -eps * lap(x, y) + 2.0 * u(x, y)
    return Problem2D(eps=eps, b=const_b(2.0), f=f, beta=1.0, u_exact=u,
                     du_dx_exact=ux, du_dy_exact=uy, lap_u_exact=lap)


def random_triple(mesh, k, rng):
    N = mesh.N
    shape = (N, N, k + 1, k + 1)
    return MixedSolution2D(
        U=DGFunction2D(mesh, k, rng.standard_normal(shape)),
        P=DGFunction2D(mesh, k, rng.standard_normal(shape)),
        Q=DGFunction2D(mesh, k, rng.standard_normal(shape)),
    )


class TestAssembly2D:
    def test_matrix_dimension(self):
        mesh = make_mesh(4, 1e-2)
        p = manufactured_2d_problem(1e-2)
        for k in (1, 2):
            system = assemble_2d(p, mesh, k)
            assert system.matrix.n == 3 * 16 * (k + 1) ** 2

    def test_zero_data_zero_solution(self):
        mesh = make_mesh(4, 1e-2)
        p = Problem2D(eps=1e-2, b=const_b(2.0),
                      f=lambda x, y: 0.0 * (np.asarray(x) + np.asarray(y)), beta=1.0)
        for method in ("condensed", "full"):
            sol = solve_ldg_2d(p, mesh, 1, method=method)
            assert np.max(np.abs(sol.U.coeffs)) == 0.0
            assert np.max(np.abs(sol.P.coeffs)) == 0.0
            assert np.max(np.abs(sol.Q.coeffs)) == 0.0

    def test_interface_coupling_structure(self):
        # P rows of cells in mesh column 3N/4 couple to column 3N/4+1 and
        # vice versa; mirrored for Q across the horizontal interface line
        N, k = 8, 1
        mesh = make_mesh(N, 1e-3)
        p = manufactured_2d_problem(1e-3)
        system = assemble_2d(p, mesh, k)
        A = system.matrix.csr
        lay = system.layout
        J = system.flux.interface_index
        cj = 2  # arbitrary row of cells
        pL = lay.p_slice(J - 1, cj)
        pR = lay.p_slice(J, cj)
        sub = A[pL, :][:, pR].toarray()
        assert np.any(sub != 0.0)
        sub = A[pR, :][:, pL].toarray()
        assert np.any(sub != 0.0)
        qB = lay.q_slice(cj, J - 1)
        qT = lay.q_slice(cj, J)
        assert np.any(A[qB, :][:, qT].toarray() != 0.0)
        # no P-P cross coupling away from the interface
        pa = lay.p_slice(0, cj)
        pb = lay.p_slice(1, cj)
        assert np.all(A[pa, :][:, pb].toarray() == 0.0)


class TestExactness2D:
    @pytest.mark.parametrize("eps", [1.0, 1e-4, 1e-8])
    @pytest.mark.parametrize("method", ["condensed", "full"])
    def test_tensor_quadratic_reproduced(self, eps, method):
        p = poly_problem_2d(eps)
        mesh = make_mesh(8, eps, sigma=3.0)
        sol = solve_ldg_2d(p, mesh, 2, method=method)
        energy, balanced = error_norms_2d(sol, p, mesh)
        assert energy.total <= 1e-8
        assert balanced.total <= 1e-8


class TestEnergyIdentity2D:
    @pytest.mark.parametrize("eps", [1.0, 1e-4, 1e-8])
    @pytest.mark.parametrize("N", [4, 8])
    def test_b_t_t_equals_energy_sq(self, eps, N):
        rng = np.random.default_rng(23)
        p = manufactured_2d_problem(eps)
        mesh = make_mesh(N, eps)
        for _ in range(20):
            T = random_triple(mesh, 1, rng)
            BT = bilinear_form_2d(T, T, p, mesh)
            E2 = energy_norm_2d(T, p, mesh).total ** 2
            assert abs(BT - E2) <= 1e-11 * (1.0 + E2)

    def test_bilinearity(self):
        rng = np.random.default_rng(29)
        p = manufactured_2d_problem(1e-4)
        mesh = make_mesh(4, 1e-4)
        T = random_triple(mesh, 1, rng)
        Z = random_triple(mesh, 1, rng)
        a = -2.5
        Ta = MixedSolution2D(
            U=DGFunction2D(mesh, 1, a * T.U.coeffs),
            P=DGFunction2D(mesh, 1, a * T.P.coeffs),
            Q=DGFunction2D(mesh, 1, a * T.Q.coeffs),
        )
        assert bilinear_form_2d(Ta, Z, p, mesh) == pytest.approx(
            a * bilinear_form_2d(T, Z, p, mesh), rel=1e-11
        )


class TestGalerkinResidual2D:
    def test_solution_satisfies_weak_form(self):
        rng = np.random.default_rng(31)
        eps = 1e-4
        p = manufactured_2d_problem(eps)
        mesh = make_mesh(8, eps)
        T = solve_ldg_2d(p, mesh, 1, method="full")
        scale_T = 1.0 + energy_norm_2d(T, p, mesh).total
        for _ in range(10):
            Z = random_triple(mesh, 1, rng)
            lhs = bilinear_form_2d(T, Z, p, mesh)
            rhs = load_functional_2d(p.f, Z, mesh)
            scale = scale_T * (1.0 + energy_norm_2d(Z, p, mesh).total)
            assert abs(lhs - rhs) <= 1e-8 * scale


class TestNormInequality2D:
    @pytest.mark.parametrize("eps", [1e-2, 1e-6, 1e-10])
    def test_balanced_below_scaled_energy(self, eps):
        rng = np.random.default_rng(37)
        p = manufactured_2d_problem(eps)
        mesh = make_mesh(4, eps)
        for _ in range(10):
            T = random_triple(mesh, 1, rng)
            B = balanced_norm_2d(T, p, mesh).total
            E = energy_norm_2d(T, p, mesh).total
            assert B <= eps**-0.25 * E * (1.0 + 1e-12)


class TestSymmetry:
    def test_solution_symmetric_under_axis_swap(self):
        # u(x, y) = u(y, x) for the manufactured problem; the discrete
        # solution inherits the symmetry through the mirrored fluxes
        eps = 1e-4
        p = manufactured_2d_problem(eps)
        mesh = make_mesh(8, eps)
        sol = solve_ldg_2d(p, mesh, 1, method="full")
        U = sol.U.coeffs
        swapped = np.transpose(U, (1, 0, 3, 2))
        scale = np.max(np.abs(U))
        assert np.max(np.abs(U - swapped)) <= 1e-10 * scale
        # P and Q swap roles under the reflection
        P = sol.P.coeffs
        Q = sol.Q.coeffs
        assert np.max(np.abs(P - np.transpose(Q, (1, 0, 3, 2)))) <= 1e-10 * np.max(np.abs(P))


class TestCondensation:
    @pytest.mark.parametrize("eps", [1e-2, 1e-8])
    def test_condensed_matches_full(self, eps):
        p = manufactured_2d_problem(eps)
        mesh = make_mesh(8, eps)
        a = solve_ldg_2d(p, mesh, 1, method="condensed")
        b = solve_ldg_2d(p, mesh, 1, method="full")
        for fa, fb in ((a.U, b.U), (a.P, b.P), (a.Q, b.Q)):
            scale = np.max(np.abs(fb.coeffs)) + 1e-300
            assert np.max(np.abs(fa.coeffs - fb.coeffs)) <= 1e-9 * scale

    def test_residual_reported(self):
        p = manufactured_2d_problem(1e-8)
        mesh = make_mesh(8, 1e-8)
        sol = solve_ldg_2d(p, mesh, 1, method="condensed")
        assert sol.residual <= 1e-9

    def test_extreme_eps_stays_solvable(self):
        # scaled unknowns plus equilibration keep eps = 1e-12 benign
        p = manufactured_2d_problem(1e-12)
        mesh = make_mesh(8, 1e-12)
        sol = solve_ldg_2d(p, mesh, 1, method="condensed")
        assert sol.residual <= 1e-9
        _, balanced = error_norms_2d(sol, p, mesh)
        assert 0.1 < balanced.total < 1.0


class TestEpsVariation2D:
    def test_balanced_error_eps_uniform_at_fixed_N(self):
        errs = []
        for eps in (1e-4, 1e-8):
            p = manufactured_2d_problem(eps)
            mesh = make_mesh(32, eps)
            sol = solve_ldg_2d(p, mesh, 1)
            _, balanced = error_norms_2d(sol, p, mesh)
            errs.append(balanced.total)
        assert max(errs) / min(errs) <= 1.2
