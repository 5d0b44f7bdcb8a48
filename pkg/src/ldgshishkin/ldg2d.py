"""Mixed LDG discretization of -eps lap(u) + b u = f on a 2D Shishkin mesh.

The first-order system introduces p = eps u_x and q = eps u_y.  Fluxes
mirror the 1D construction direction by direction: U is upwinded from the
left/bottom, P and Q from the right/top, boundary traces of U are
penalized with sqrt(eps) and the jumps of P (resp. Q) across the vertical
line x = x_{3N/4} (resp. horizontal line y = y_{3N/4}) with 1/sqrt(eps).

The default solver eliminates P and Q element-locally on every cell not
adjacent to its penalized interface line (there the first two equations
are block-diagonal with diagonal modal mass blocks) and factorizes the
reduced sparse system; a full sparse factorization is kept as a fallback.
P and Q are assembled in the scaled unknowns P/sqrt(eps), Q/sqrt(eps).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import ReferenceBasis, assembly_quad_order, gauss_rule, legendre_table
from .dgfunction import DGFunction2D
from .errors import ConfigurationError, SolverError
from .linalg import SparseMatrix, equilibrate, sparse_solve


@dataclass(frozen=True)
class FluxParams2D:
    """Penalty weights of the 2D fluxes (boundary sqrt(eps), interface
    1/sqrt(eps) on both penalized lines through node index 3N/4)."""

    lambda_0y: float
    lambda_Ny: float
    lambda_x0: float
    lambda_xN: float
    lambda_P: float
    lambda_Q: float
    interface_index: int

    @classmethod
    def for_problem(cls, eps, N):
        root = float(np.sqrt(eps))
        return cls(
            lambda_0y=root, lambda_Ny=root, lambda_x0=root, lambda_xN=root,
            lambda_P=1.0 / root, lambda_Q=1.0 / root,
            interface_index=3 * N // 4,
        )


@dataclass
class MixedSolution2D:
    """Discrete triple (U, P, Q) with the achieved linear residual."""

    U: DGFunction2D
    P: DGFunction2D
    Q: DGFunction2D
    residual: float = 0.0

    def __post_init__(self):
        same_mesh = self.U.mesh is self.P.mesh is self.Q.mesh
        same_degree = self.U.degree == self.P.degree == self.Q.degree
        if not (same_mesh and same_degree):
            raise ConfigurationError("U, P and Q must share mesh and degree")


class _Layout2D:
    """Field-major layout: all U dofs, then P, then Q; within a field the
    cells are row-major over (i, j) with x-mode-major local numbering."""

    def __init__(self, N, k):
        self.N = N
        self.k = k
        self.kk = (k + 1) ** 2
        self.field = N * N * self.kk
        self.n = 3 * self.field

    def cell_base(self, ci, cj):
        return (ci * self.N + cj) * self.kk

    def u_slice(self, ci, cj):
        base = self.cell_base(ci, cj)
        return np.arange(base, base + self.kk)

    def p_slice(self, ci, cj):
        return self.field + self.u_slice(ci, cj)

    def q_slice(self, ci, cj):
        return 2 * self.field + self.u_slice(ci, cj)


@dataclass
class AssembledSystem2D:
    matrix: SparseMatrix
    rhs: np.ndarray
    layout: _Layout2D
    pq_scale: float
    flux: FluxParams2D


def _kron_x(xmat, ydiag):
    """Block with entries M[(m,n),(a,b)] = xmat[m,a] * ydiag[n] * delta_nb."""
    kk = xmat.shape[0] * ydiag.size
    return np.einsum("ma,nb->mnab", xmat, np.diag(ydiag)).reshape(kk, kk)


def _kron_y(xdiag, ymat):
    """Block with entries M[(m,n),(a,b)] = xdiag[m] * delta_ma * ymat[n,b]."""
    kk = xdiag.size * ymat.shape[0]
    return np.einsum("ma,nb->mnab", np.diag(xdiag), ymat).reshape(kk, kk)


def assemble_2d(problem, mesh2d, k, quad=None):
    """Assemble the coupled sparse system for the 2D scheme."""
    if k < 1:
        raise ConfigurationError(f"polynomial degree must be >= 1, got {k}")
    N = mesh2d.N
    eps = problem.eps
    flux = FluxParams2D.for_problem(eps, N)
    layout = _Layout2D(N, k)
    basis = ReferenceBasis(k)
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    G = basis.stiffness()
    wbar = basis.mass_diag
    ones = basis.right_values
    alt = basis.left_values
    s = float(np.sqrt(eps))
    J = flux.interface_index
    kk = layout.kk

    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    Xg = mesh2d.mx.nodes[:-1, None] + hx[:, None] * (rule.points[None, :] + 1.0)
    Yg = mesh2d.my.nodes[:-1, None] + hy[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(problem.b(Xg[:, None, :, None], Yg[None, :, None, :]), dtype=float)
    fvals = np.asarray(problem.f(Xg[:, None, :, None], Yg[None, :, None, :]), dtype=float)
    w2 = rule.weights[:, None] * rule.weights[None, :]

    # b-weighted mass blocks and load vectors for every cell at once
    Wblk = np.einsum("ijgh,gh,gm,hn,ga,hb->ijmnab", bvals, w2, V, V, V, V,
                     optimize=True).reshape(N, N, kk, kk)
    Wblk *= (hx[:, None] * hy[None, :])[:, :, None, None]
    Fblk = np.einsum("ijgh,gh,gm,hn->ijmn", fvals, w2, V, V,
                     optimize=True).reshape(N, N, kk)
    Fblk *= (hx[:, None] * hy[None, :])[:, :, None]

    rows, cols, vals = [], [], []

    def add_block(r_idx, c_idx, block):
        rows.append(np.repeat(r_idx, c_idx.size))
        cols.append(np.tile(c_idx, r_idx.size))
        vals.append(np.asarray(block, dtype=float).ravel())

    rhs = np.zeros(layout.n)
    local_mass = np.einsum("m,n->mn", wbar, wbar).reshape(kk)

    for ci in range(N):
        for cj in range(N):
            u_c = layout.u_slice(ci, cj)
            p_c = layout.p_slice(ci, cj)
            q_c = layout.q_slice(ci, cj)
            my_diag = hy[cj] * wbar   # (hy/2) * reference y-mass
            mx_diag = hx[ci] * wbar

            # ---- eq1 (test s): (1/eps)(P, s) + (U, s_x) + x-edge fluxes ----
            add_block(p_c, p_c, np.diag(hx[ci] * hy[cj] * local_mass / s))
            add_block(p_c, u_c, _kron_x(G, my_diag))
            e_right, e_left = ci + 1, ci
            if e_right < N:
                add_block(p_c, u_c, _kron_x(-np.outer(ones, ones), my_diag))
                if e_right == J:
                    p_n = layout.p_slice(ci + 1, cj)
                    add_block(p_c, p_c, _kron_x(np.outer(ones, ones), my_diag))
                    add_block(p_c, p_n, _kron_x(-np.outer(ones, alt), my_diag))
            if e_left > 0:
                u_w = layout.u_slice(ci - 1, cj)
                add_block(p_c, u_w, _kron_x(np.outer(alt, ones), my_diag))
                if e_left == J:
                    p_w = layout.p_slice(ci - 1, cj)
                    add_block(p_c, p_w, _kron_x(-np.outer(alt, ones), my_diag))
                    add_block(p_c, p_c, _kron_x(np.outer(alt, alt), my_diag))

            # ---- eq2 (test r): (1/eps)(Q, r) + (U, r_y) + y-edge fluxes ----
            add_block(q_c, q_c, np.diag(hx[ci] * hy[cj] * local_mass / s))
            add_block(q_c, u_c, _kron_y(mx_diag, G))
            e_top, e_bot = cj + 1, cj
            if e_top < N:
                add_block(q_c, u_c, _kron_y(mx_diag, -np.outer(ones, ones)))
                if e_top == J:
                    q_n = layout.q_slice(ci, cj + 1)
                    add_block(q_c, q_c, _kron_y(mx_diag, np.outer(ones, ones)))
                    add_block(q_c, q_n, _kron_y(mx_diag, -np.outer(ones, alt)))
            if e_bot > 0:
                u_sth = layout.u_slice(ci, cj - 1)
                add_block(q_c, u_sth, _kron_y(mx_diag, np.outer(alt, ones)))
                if e_bot == J:
                    q_w = layout.q_slice(ci, cj - 1)
                    add_block(q_c, q_w, _kron_y(mx_diag, -np.outer(alt, ones)))
                    add_block(q_c, q_c, _kron_y(mx_diag, np.outer(alt, alt)))

            # ---- eq3 (test v): (P, v_x) + (Q, v_y) + (bU, v) + fluxes ----
            add_block(u_c, p_c, s * _kron_x(G, my_diag))
            add_block(u_c, q_c, s * _kron_y(mx_diag, G))
            add_block(u_c, u_c, Wblk[ci, cj])

            # Phat on the right x-edge
            if e_right == N:
                add_block(u_c, p_c, -s * _kron_x(np.outer(ones, ones), my_diag))
                add_block(u_c, u_c,
                          flux.lambda_Ny * _kron_x(np.outer(ones, ones), my_diag))
            else:
                p_n = layout.p_slice(ci + 1, cj)
                add_block(u_c, p_n, -s * _kron_x(np.outer(ones, alt), my_diag))
            # Phat on the left x-edge (upwinded from this cell)
            if e_left == 0:
                add_block(u_c, p_c, s * _kron_x(np.outer(alt, alt), my_diag))
                add_block(u_c, u_c,
                          flux.lambda_0y * _kron_x(np.outer(alt, alt), my_diag))
            else:
                add_block(u_c, p_c, s * _kron_x(np.outer(alt, alt), my_diag))

            # Qhat on the top y-edge
            if e_top == N:
                add_block(u_c, q_c, -s * _kron_y(mx_diag, np.outer(ones, ones)))
                add_block(u_c, u_c,
                          flux.lambda_xN * _kron_y(mx_diag, np.outer(ones, ones)))
            else:
                q_n = layout.q_slice(ci, cj + 1)
                add_block(u_c, q_n, -s * _kron_y(mx_diag, np.outer(ones, alt)))
            # Qhat on the bottom y-edge
            if e_bot == 0:
                add_block(u_c, q_c, s * _kron_y(mx_diag, np.outer(alt, alt)))
                add_block(u_c, u_c,
                          flux.lambda_x0 * _kron_y(mx_diag, np.outer(alt, alt)))
            else:
                add_block(u_c, q_c, s * _kron_y(mx_diag, np.outer(alt, alt)))

            rhs[u_c] = Fblk[ci, cj]

    matrix = SparseMatrix.from_coo(
        layout.n,
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
    )
    return AssembledSystem2D(matrix=matrix, rhs=rhs, layout=layout, pq_scale=s,
                             flux=flux)


def _solve_full(system):
    scaled, r, c = equilibrate(system.matrix)
    result = sparse_solve(scaled, r * system.rhs)
    return c * result.x


def _solve_condensed(system):
    """Eliminate P on cells away from the vertical interface line and Q on
    cells away from the horizontal one, then solve the reduced system."""
    layout = system.layout
    N, kk, M = layout.N, layout.kk, layout.field
    J = system.flux.interface_index
    A = system.matrix.csr

    kept_cols = np.array([J - 1, J])  # 0-based cell columns adjacent to x int.
    cell_ids = np.arange(N * N).reshape(N, N)
    p_kept_cells = cell_ids[kept_cols, :].ravel()
    q_kept_cells = cell_ids[:, kept_cols].ravel()

    def dofs(cells):
        return (cells[:, None] * kk + np.arange(kk)[None, :]).ravel()

    pk = M + dofs(p_kept_cells)
    qk = 2 * M + dofs(q_kept_cells)
    p_all = np.arange(M, 2 * M)
    q_all = np.arange(2 * M, 3 * M)
    pe = np.setdiff1d(p_all, pk)
    qe = np.setdiff1d(q_all, qk)
    u_all = np.arange(M)

    A_csc = A.tocsc()
    diag = A.diagonal()
    inv_dpe = 1.0 / diag[pe]
    inv_dqe = 1.0 / diag[qe]

    B_pe_u = A[pe, :][:, u_all]
    B_qe_u = A[qe, :][:, u_all]
    C_u_pe = A_csc[:, pe][u_all, :]
    C_u_qe = A_csc[:, qe][u_all, :]

    S = (A[u_all, :][:, u_all]
         - C_u_pe @ sp.diags(inv_dpe) @ B_pe_u
         - C_u_qe @ sp.diags(inv_dqe) @ B_qe_u)
    reduced = sp.bmat(
        [
            [S, A_csc[:, pk][u_all, :], A_csc[:, qk][u_all, :]],
            [A[pk, :][:, u_all], A[pk, :][:, pk], None],
            [A[qk, :][:, u_all], None, A[qk, :][:, qk]],
        ],
        format="csr",
    )
    rhs = np.concatenate([system.rhs[u_all], system.rhs[pk], system.rhs[qk]])

    scaled, r, c = equilibrate(SparseMatrix(reduced))
    result = sparse_solve(scaled, r * rhs)
    xr = c * result.x

    nu = u_all.size
    x = np.zeros(layout.n)
    x[u_all] = xr[:nu]
    x[pk] = xr[nu:nu + pk.size]
    x[qk] = xr[nu + pk.size:]
    x[pe] = -inv_dpe * (B_pe_u @ x[u_all])
    x[qe] = -inv_dqe * (B_qe_u @ x[u_all])
    return x


def solve_ldg_2d(problem, mesh2d, k, quad=None, method="condensed",
                 residual_tol=1e-9):
    """Solve the 2D scheme; ``method`` is 'condensed' (default) or 'full'.

    The reported residual is measured on the assembled (scaled) global
    system, which also validates the condensation back-substitution.
    """
    system = assemble_2d(problem, mesh2d, k, quad=quad)
    if method == "condensed":
        x = _solve_condensed(system)
    elif method == "full":
        x = _solve_full(system)
    else:
        raise ConfigurationError(f"unknown 2D solver method {method!r}")

    csr = system.matrix.csr
    fro = np.sqrt((csr.data**2).sum())
    num = np.linalg.norm(csr @ x - system.rhs)
    denom = fro * np.linalg.norm(x) + np.linalg.norm(system.rhs)
    residual = float(num / denom) if denom > 0.0 else 0.0
    if residual > residual_tol:
        raise SolverError(
            f"2D solve reached residual {residual:.3e} > {residual_tol:.3e}",
            residual=residual,
        )

    layout = system.layout
    N, k1, M = layout.N, k + 1, layout.field
    shape = (N, N, k1, k1)
    U = DGFunction2D(mesh2d, k, x[:M].reshape(shape).copy())
    P = DGFunction2D(mesh2d, k, system.pq_scale * x[M:2 * M].reshape(shape))
    Q = DGFunction2D(mesh2d, k, system.pq_scale * x[2 * M:].reshape(shape))
    return MixedSolution2D(U=U, P=P, Q=Q, residual=residual)


def bilinear_form_2d(T, Z, problem, mesh2d, quad=None):
    """Direct quadrature evaluation of the compact 2D form B(T; Z).

    Independent of the assembled matrix: volume terms are re-integrated on
    tensor Gauss grids and every edge term on (k+3)-point edge rules.
    """
    k = T.U.degree
    eps = problem.eps
    N = mesh2d.N
    flux = FluxParams2D.for_problem(eps, N)
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, D = legendre_table(k, rule.points)
    w = rule.weights
    w2 = w[:, None] * w[None, :]
    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    Xg = mesh2d.mx.nodes[:-1, None] + hx[:, None] * (rule.points[None, :] + 1.0)
    Yg = mesh2d.my.nodes[:-1, None] + hy[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(problem.b(Xg[:, None, :, None], Yg[None, :, None, :]), dtype=float)

    def vol(F, Bx, By):
        return np.einsum("ijmn,gm,hn->ijgh", F.coeffs, Bx, By, optimize=True)

    scale = hx[:, None] * hy[None, :]
    total = 0.0
    # (b U, v) + (1/eps)(P, s) + (1/eps)(Q, r)
    Uv, vv = vol(T.U, V, V), vol(Z.U, V, V)
    total += np.einsum("ij,gh,ijgh->", scale, w2, bvals * Uv * vv, optimize=True)
    total += np.einsum("ij,gh,ijgh->", scale, w2, vol(T.P, V, V) * vol(Z.P, V, V),
                       optimize=True) / eps
    total += np.einsum("ij,gh,ijgh->", scale, w2, vol(T.Q, V, V) * vol(Z.Q, V, V),
                       optimize=True) / eps
    # (U, s_x): x-Jacobians cancel, leaving hy/2 per cell
    total += np.einsum("j,gh,ijgh->", hy, w2, Uv * vol(Z.P, D, V), optimize=True)
    # (U, r_y)
    total += np.einsum("i,gh,ijgh->", hx, w2, Uv * vol(Z.Q, V, D), optimize=True)
    # (P, v_x) and (Q, v_y)
    total += np.einsum("j,gh,ijgh->", hy, w2, vol(T.P, V, V) * vol(Z.U, D, V),
                       optimize=True)
    total += np.einsum("i,gh,ijgh->", hx, w2, vol(T.Q, V, V) * vol(Z.U, V, D),
                       optimize=True)

    def yvals(coef):  # modal y-line coefficients -> values at y quad points
        return coef @ V.T

    def xvals(coef):
        return coef @ V.T

    # x-directed edge sums (integrals over J_j with weights hy[j] * w)
    Uright = T.U.x_edge_trace("right")
    Pleft_T, Pright_T = T.P.x_edge_trace("left"), T.P.x_edge_trace("right")
    sleft, sright = Z.P.x_edge_trace("left"), Z.P.x_edge_trace("right")
    vleft, vright = Z.U.x_edge_trace("left"), Z.U.x_edge_trace("right")
    Uleft = T.U.x_edge_trace("left")
    for e in range(1, N):  # interior vertical edges
        jump_s = yvals(sright[e - 1] - sleft[e])
        total -= np.sum(hy[:, None] * w * yvals(Uright[e - 1]) * jump_s)
        jump_v = yvals(vright[e - 1] - vleft[e])
        total -= np.sum(hy[:, None] * w * yvals(Pleft_T[e]) * jump_v)
    # boundary vertical edges: [[v]]_{0,y} = -v^+, [[v]]_{N,y} = v^-
    total -= np.sum(hy[:, None] * w * yvals(Pleft_T[0]) * (-yvals(vleft[0])))
    total -= np.sum(hy[:, None] * w * yvals(Pright_T[-1]) * yvals(vright[-1]))
    total += flux.lambda_0y * np.sum(hy[:, None] * w * yvals(Uleft[0]) * yvals(vleft[0]))
    total += flux.lambda_Ny * np.sum(hy[:, None] * w * yvals(Uright[-1]) * yvals(vright[-1]))
    J = flux.interface_index
    jump_P = yvals(Pright_T[J - 1] - Pleft_T[J])
    jump_sJ = yvals(sright[J - 1] - sleft[J])
    total += flux.lambda_P * np.sum(hy[:, None] * w * jump_P * jump_sJ)

    # y-directed edge sums
    Utop, Ubot = T.U.y_edge_trace("top"), T.U.y_edge_trace("bottom")
    Qbot_T, Qtop_T = T.Q.y_edge_trace("bottom"), T.Q.y_edge_trace("top")
    rbot, rtop = Z.Q.y_edge_trace("bottom"), Z.Q.y_edge_trace("top")
    vbot, vtop = Z.U.y_edge_trace("bottom"), Z.U.y_edge_trace("top")
    for e in range(1, N):
        jump_r = xvals(rtop[:, e - 1] - rbot[:, e])
        total -= np.sum(hx[:, None] * w * xvals(Utop[:, e - 1]) * jump_r)
        jump_v = xvals(vtop[:, e - 1] - vbot[:, e])
        total -= np.sum(hx[:, None] * w * xvals(Qbot_T[:, e]) * jump_v)
    total -= np.sum(hx[:, None] * w * xvals(Qbot_T[:, 0]) * (-xvals(vbot[:, 0])))
    total -= np.sum(hx[:, None] * w * xvals(Qtop_T[:, -1]) * xvals(vtop[:, -1]))
    total += flux.lambda_x0 * np.sum(hx[:, None] * w * xvals(Ubot[:, 0]) * xvals(vbot[:, 0]))
    total += flux.lambda_xN * np.sum(hx[:, None] * w * xvals(Utop[:, -1]) * xvals(vtop[:, -1]))
    jump_Q = xvals(Qtop_T[:, J - 1] - Qbot_T[:, J])
    jump_rJ = xvals(rtop[:, J - 1] - rbot[:, J])
    total += flux.lambda_Q * np.sum(hx[:, None] * w * jump_Q * jump_rJ)
    return float(total)


def load_functional_2d(f, Z, mesh2d, quad=None):
    """(f, v_Z) on the 2D mesh; companion of bilinear_form_2d."""
    k = Z.U.degree
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    w2 = rule.weights[:, None] * rule.weights[None, :]
    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    Xg = mesh2d.mx.nodes[:-1, None] + hx[:, None] * (rule.points[None, :] + 1.0)
    Yg = mesh2d.my.nodes[:-1, None] + hy[:, None] * (rule.points[None, :] + 1.0)
    fvals = np.asarray(f(Xg[:, None, :, None], Yg[None, :, None, :]), dtype=float)
    vv = np.einsum("ijmn,gm,hn->ijgh", Z.U.coeffs, V, V, optimize=True)
    scale = hx[:, None] * hy[None, :]
    return float(np.einsum("ij,gh,ijgh->", scale, w2, fvals * vv, optimize=True))
