"""Mixed LDG discretization of -eps u'' + b u = f on a 1D Shishkin mesh.

The first-order system (q = eps u') is discretized cell by cell; the
numerical fluxes upwind U from the left and Q from the right, penalize the
boundary traces of U with weight sqrt(eps) and the jump of Q at the right
transition node 3N/4 with weight 1/sqrt(eps).  That interface term couples
the Q unknowns of the two cells that share the transition node, so the
whole system is solved monolithically (block-banded, cell-major ordering
with Q modes before U modes inside each cell).

For conditioning at extreme eps the system is assembled in the scaled
unknown Qtilde = Q / sqrt(eps); rows and columns are then equilibrated by
powers of two before factorization, and the solution is unscaled on return.
"""

from dataclasses import dataclass

import numpy as np

from .basis import ReferenceBasis, assembly_quad_order, gauss_rule, legendre_table
from .dgfunction import DGFunction1D
from .errors import ConfigurationError, SolverError
from .linalg import BandedMatrix, equilibrate, lu_banded_solve


@dataclass(frozen=True)
class FluxParams:
    """Flux penalty weights: lambda_0 = lambda_N = sqrt(eps) at the domain
    boundary, lambda_q = 1/sqrt(eps) at the penalized interface node 3N/4."""

    lambda_0: float
    lambda_N: float
    lambda_q: float
    interface_index: int

    @classmethod
    def for_problem(cls, eps, N):
        root = float(np.sqrt(eps))
        return cls(lambda_0=root, lambda_N=root, lambda_q=1.0 / root,
                   interface_index=3 * N // 4)


@dataclass
class MixedSolution1D:
    """The discrete pair (U, Q); ``residual`` is the relative residual of
    the equilibrated linear system that produced it."""

    U: DGFunction1D
    Q: DGFunction1D
    residual: float = 0.0

    def __post_init__(self):
        if self.U.mesh is not self.Q.mesh or self.U.degree != self.Q.degree:
            raise ConfigurationError("U and Q must share mesh and degree")


class _Layout1D:
    """Cell-major dof layout: [Qtilde modes | U modes] per cell."""

    def __init__(self, N, k):
        self.N = N
        self.k = k
        self.per_cell = 2 * (k + 1)
        self.n = N * self.per_cell

    def q_index(self, cell_row, mode):
        return cell_row * self.per_cell + mode

    def u_index(self, cell_row, mode):
        return cell_row * self.per_cell + (self.k + 1) + mode


@dataclass
class AssembledSystem:
    """Assembled linear system plus the metadata needed to undo scaling."""

    matrix: BandedMatrix
    rhs: np.ndarray
    layout: _Layout1D
    q_scale: float
    flux: FluxParams


def assemble_1d(problem, mesh, k, quad=None):
    """Assemble the block-banded LDG system for ``problem`` on ``mesh``.

    Volume terms use (k+3)-point Gauss rules per cell (b and f are smooth);
    mass and derivative couplings are exact in the modal basis.
    """
    if k < 1:
        raise ConfigurationError(f"polynomial degree must be >= 1, got {k}")
    N = mesh.N
    eps = problem.eps
    flux = FluxParams.for_problem(eps, N)
    layout = _Layout1D(N, k)
    basis = ReferenceBasis(k)
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    G = basis.stiffness()
    ones = basis.right_values
    alt = basis.left_values
    mass = basis.mass_diag
    s = float(np.sqrt(eps))

    halfh = 0.5 * np.diff(mesh.nodes)
    # b and f at all quadrature points of all cells at once
    X = mesh.nodes[:-1, None] + halfh[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(problem.b(X), dtype=float)
    fvals = np.asarray(problem.f(X), dtype=float)

    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.asarray(r, dtype=np.int64).ravel())
        cols.append(np.asarray(c, dtype=np.int64).ravel())
        vals.append(np.asarray(v, dtype=float).ravel())

    modes = np.arange(k + 1)
    rhs = np.zeros(layout.n)

    for c in range(N):
        i = c + 1  # 1-based cell index; right node index == i
        rq = layout.q_index(c, 0) + modes   # eq1 rows (test r)
        ru = layout.u_index(c, 0) + modes   # eq2 rows (test v)
        qc = layout.q_index(c, 0) + modes   # Qtilde modes of this cell
        uc = layout.u_index(c, 0) + modes

        # eq1: (1/eps)<Q, r> with Q = s * Qtilde  ->  (h/2) mass / sqrt(eps)
        add(rq, qc, halfh[c] * mass / s)
        # eq1: <U, r'>
        add(np.repeat(rq, k + 1), np.tile(uc, k + 1), G)

        # eq1 flux at the right node i: -Uhat_i * r_i^-  (r_i^- modes all 1)
        if i < N:
            # Uhat_i = U_i^- from this cell ...
            add(np.repeat(rq, k + 1), np.tile(uc, k + 1), -np.outer(ones, ones))
            if i == flux.interface_index:
                # ... minus lambda_q [[Q]]; lambda_q * s = 1 in scaled unknowns
                qn = layout.q_index(c + 1, 0) + modes
                add(np.repeat(rq, k + 1), np.tile(qc, k + 1), np.outer(ones, ones))
                add(np.repeat(rq, k + 1), np.tile(qn, k + 1), -np.outer(ones, alt))

        # eq1 flux at the left node i-1: +Uhat_{i-1} * r_{i-1}^+
        if c > 0:
            up = layout.u_index(c - 1, 0) + modes
            add(np.repeat(rq, k + 1), np.tile(up, k + 1), np.outer(alt, ones))
            if c == flux.interface_index:
                qp = layout.q_index(c - 1, 0) + modes
                add(np.repeat(rq, k + 1), np.tile(qp, k + 1), -np.outer(alt, ones))
                add(np.repeat(rq, k + 1), np.tile(qc, k + 1), np.outer(alt, alt))

        # eq2: <Q, v'> with Q = s * Qtilde
        add(np.repeat(ru, k + 1), np.tile(qc, k + 1), s * G)
        # eq2: <b U, v>
        W = (V * (rule.weights * bvals[c])[:, None]).T @ V * halfh[c]
        add(np.repeat(ru, k + 1), np.tile(uc, k + 1), W)

        # eq2 flux at the right node i: -Qhat_i * v_i^-
        if i == N:
            # Qhat_N = Q_N^- - lambda_N U_N^- from this cell
            add(np.repeat(ru, k + 1), np.tile(qc, k + 1), -s * np.outer(ones, ones))
            add(np.repeat(ru, k + 1), np.tile(uc, k + 1),
                flux.lambda_N * np.outer(ones, ones))
        else:
            qn = layout.q_index(c + 1, 0) + modes
            add(np.repeat(ru, k + 1), np.tile(qn, k + 1), -s * np.outer(ones, alt))

        # eq2 flux at the left node i-1: +Qhat_{i-1} * v_{i-1}^+; the upwinded
        # trace Q^+_{i-1} comes from this cell's own left end
        if c == 0:
            # Qhat_0 = Q_0^+ + lambda_0 U_0^+ from this cell
            add(np.repeat(ru, k + 1), np.tile(qc, k + 1), s * np.outer(alt, alt))
            add(np.repeat(ru, k + 1), np.tile(uc, k + 1),
                flux.lambda_0 * np.outer(alt, alt))
        else:
            add(np.repeat(ru, k + 1), np.tile(qc, k + 1), s * np.outer(alt, alt))

        rhs[ru] = halfh[c] * (rule.weights * fvals[c]) @ V

    matrix = BandedMatrix.from_coo(
        layout.n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )
    return AssembledSystem(matrix=matrix, rhs=rhs, layout=layout, q_scale=s, flux=flux)


def solve_ldg_1d(problem, mesh, k, quad=None, residual_tol=1e-10):
    """Assemble, equilibrate and solve; returns the mixed solution (U, Q).

    Raises SolverError (carrying the achieved residual) when the relative
    residual of the equilibrated system exceeds ``residual_tol``.
    """
    system = assemble_1d(problem, mesh, k, quad=quad)
    scaled, r, c = equilibrate(system.matrix)
    result = lu_banded_solve(scaled, r * system.rhs)
    x = c * result.x
    if result.residual > residual_tol:
        raise SolverError(
            f"banded solve reached residual {result.residual:.3e} > {residual_tol:.3e}",
            residual=result.residual,
        )
    layout = system.layout
    per, kk = layout.per_cell, k + 1
    blocks = x.reshape(mesh.N, per)
    Q = DGFunction1D(mesh, k, system.q_scale * blocks[:, :kk].copy())
    U = DGFunction1D(mesh, k, blocks[:, kk:].copy())
    return MixedSolution1D(U=U, Q=Q, residual=result.residual)


def bilinear_form_1d(W, X, problem, mesh, quad=None):
    """Evaluate the compact-form bilinear map B(W; X) by direct quadrature.

    This path is independent of the assembled matrix (volume terms are
    re-integrated, traces re-evaluated), so agreement of B(W; X) with
    <f, v> on the computed solution cross-checks the assembly.
    """
    k = W.U.degree
    eps = problem.eps
    N = mesh.N
    flux = FluxParams.for_problem(eps, N)
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, D = legendre_table(k, rule.points)
    halfh = 0.5 * np.diff(mesh.nodes)
    Xpts = mesh.nodes[:-1, None] + halfh[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(problem.b(Xpts), dtype=float)

    Qv = W.Q.values_at(V)      # (N, nq)
    Uv = W.U.values_at(V)
    rv = X.Q.values_at(V)
    vv = X.U.values_at(V)
    r_dref = X.Q.values_at(D)  # reference derivative; physical = 2/h * this
    v_dref = X.U.values_at(D)

    w = rule.weights
    total = 0.0
    # (1/eps)<Q, r> + <b U, v>
    total += np.sum(halfh[:, None] * w * Qv * rv) / eps
    total += np.sum(halfh[:, None] * w * bvals * Uv * vv)
    # <U, r'> and <Q, v'>: the h/2 Jacobian cancels the 2/h of the derivative
    total += np.sum(w * Uv * r_dref)
    total += np.sum(w * Qv * v_dref)

    U_right, U_left = W.U.right_traces(), W.U.left_traces()
    Q_right, Q_left = W.Q.right_traces(), W.Q.left_traces()
    r_right, r_left = X.Q.right_traces(), X.Q.left_traces()
    v_right, v_left = X.U.right_traces(), X.U.left_traces()

    # - sum_{i=1}^{N-1} U_i^- [[r]]_i
    jump_r = r_right[:-1] - r_left[1:]
    total -= np.sum(U_right[:-1] * jump_r)
    # - sum_{i=0}^{N-1} Q_i^+ [[v]]_i  with [[v]]_0 = -v_0^+
    jump_v = v_right[:-1] - v_left[1:]
    total -= Q_left[0] * (-v_left[0])
    total -= np.sum(Q_left[1:] * jump_v)
    # - (Q v)_N^-
    total -= Q_right[-1] * v_right[-1]
    # boundary penalties on the U jumps
    total += flux.lambda_0 * (-U_left[0]) * (-v_left[0])
    total += flux.lambda_N * U_right[-1] * v_right[-1]
    # interface penalty on the Q jump at node 3N/4
    J = flux.interface_index
    total += flux.lambda_q * (Q_right[J - 1] - Q_left[J]) * (r_right[J - 1] - r_left[J])
    return float(total)


def load_functional_1d(f, X, mesh, quad=None):
    """<f, v_X> for the test pair X = (r, v); companion of bilinear_form_1d."""
    k = X.U.degree
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    halfh = 0.5 * np.diff(mesh.nodes)
    Xpts = mesh.nodes[:-1, None] + halfh[:, None] * (rule.points[None, :] + 1.0)
    fvals = np.asarray(f(Xpts), dtype=float)
    vv = X.U.values_at(V)
    return float(np.sum(halfh[:, None] * rule.weights * fvals * vv))
