"""Energy and balanced norms, error norms and the Shishkin rate formula.

The energy norm weights the flux term by 1/eps, the boundary jumps of U by
sqrt(eps) and the interface jump(s) of the flux at the transition node by
1/sqrt(eps); the balanced norm strengthens these to 1/eps^{3/2}, 1 and
1/eps.  For discrete arguments the flux L2 terms and all jump terms come
from exact modal algebra; only the b-weighted U term needs quadrature.

Error norms against exact solutions use the continuity of the exact pair
analytically: interior jumps of the error reduce to discrete jumps and the
boundary jumps to boundary traces of U, which avoids cancellation at
extreme eps.
"""

from dataclasses import dataclass

import numpy as np

from .basis import assembly_quad_order, error_quad_order, gauss_rule, legendre_table
from .errors import ConfigurationError
from .ldg1d import FluxParams


@dataclass(frozen=True)
class NormBreakdown:
    """Squared contributions per group; ``total`` is the root of their sum."""

    q_term: float
    u_term: float
    boundary_jump_term: float
    interface_jump_term: float

    @property
    def total(self):
        return float(np.sqrt(
            self.q_term + self.u_term + self.boundary_jump_term + self.interface_jump_term
        ))


def _l2_sq_modal_1d(dgf, mesh):
    """Exact squared L2 norm of a 1D DG function (diagonal modal mass)."""
    halfh = 0.5 * np.diff(mesh.nodes)
    wbar = 2.0 / (2.0 * np.arange(dgf.degree + 1) + 1.0)
    return float(np.sum(halfh[:, None] * dgf.coeffs**2 * wbar[None, :]))


def _b_weighted_sq_1d(U, b, mesh, quad):
    rule = gauss_rule(quad)
    V, _ = legendre_table(U.degree, rule.points)
    halfh = 0.5 * np.diff(mesh.nodes)
    X = mesh.nodes[:-1, None] + halfh[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(b(X), dtype=float)
    Uv = U.values_at(V)
    return float(np.sum(halfh[:, None] * rule.weights * bvals * Uv**2))


def _jumps_1d(V, mesh):
    """Boundary jumps of U and the interface jump of Q for a mixed pair."""
    J = 3 * mesh.N // 4
    ju0 = -V.U.left_traces()[0]
    juN = V.U.right_traces()[-1]
    jq = V.Q.right_traces()[J - 1] - V.Q.left_traces()[J]
    return float(ju0), float(juN), float(jq)


def energy_norm_1d(V, problem, mesh, quad=None):
    """Energy norm of a discrete pair; total^2 equals B(V; V)."""
    quad = quad or assembly_quad_order(V.U.degree)
    flux = FluxParams.for_problem(problem.eps, mesh.N)
    ju0, juN, jq = _jumps_1d(V, mesh)
    return NormBreakdown(
        q_term=_l2_sq_modal_1d(V.Q, mesh) / problem.eps,
        u_term=_b_weighted_sq_1d(V.U, problem.b, mesh, quad),
        boundary_jump_term=flux.lambda_0 * ju0**2 + flux.lambda_N * juN**2,
        interface_jump_term=flux.lambda_q * jq**2,
    )


def balanced_norm_1d(V, problem, mesh, quad=None):
    """Balanced norm of a discrete pair (flux weighted by eps^{-3/2})."""
    quad = quad or assembly_quad_order(V.U.degree)
    eps = problem.eps
    ju0, juN, jq = _jumps_1d(V, mesh)
    return NormBreakdown(
        q_term=_l2_sq_modal_1d(V.Q, mesh) / eps**1.5,
        u_term=_b_weighted_sq_1d(V.U, problem.b, mesh, quad),
        boundary_jump_term=ju0**2 + juN**2,
        interface_jump_term=jq**2 / eps,
    )


def error_norms_1d(W, problem, mesh, quad=None):
    """Energy- and balanced-norm errors of W against the exact solution.

    Interior exact jumps vanish, boundary exact values vanish, so the jump
    contributions are discrete traces only (no exact/discrete cancellation).
    """
    if not problem.has_exact:
        raise ConfigurationError("error norms need exact solution handles")
    k = W.U.degree
    quad = quad or error_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    halfh = 0.5 * np.diff(mesh.nodes)
    X = mesh.nodes[:-1, None] + halfh[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(problem.b(X), dtype=float)
    du = np.asarray(problem.u_exact(X), dtype=float) - W.U.values_at(V)
    dq = np.asarray(problem.q_exact(X), dtype=float) - W.Q.values_at(V)
    u_int = float(np.sum(halfh[:, None] * rule.weights * bvals * du**2))
    q_int = float(np.sum(halfh[:, None] * rule.weights * dq**2))
    ju0, juN, jq = _jumps_1d(W, mesh)

    eps = problem.eps
    flux = FluxParams.for_problem(eps, mesh.N)
    energy = NormBreakdown(
        q_term=q_int / eps,
        u_term=u_int,
        boundary_jump_term=flux.lambda_0 * ju0**2 + flux.lambda_N * juN**2,
        interface_jump_term=flux.lambda_q * jq**2,
    )
    balanced = NormBreakdown(
        q_term=q_int / eps**1.5,
        u_term=u_int,
        boundary_jump_term=ju0**2 + juN**2,
        interface_jump_term=jq**2 / eps,
    )
    return energy, balanced


def _l2_sq_modal_2d(dgf, mesh2d):
    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    wbar = 2.0 / (2.0 * np.arange(dgf.degree + 1) + 1.0)
    sq = np.einsum("ijmn,m,n->ij", dgf.coeffs**2, wbar, wbar)
    return float(np.sum(hx[:, None] * hy[None, :] * sq))


def _edge_sq(coef_lines, half_widths, wbar):
    """Sum of integral(trace^2) over a stack of edges given modal coeffs."""
    return float(np.sum(half_widths * (coef_lines**2 @ wbar)))


def _jump_terms_2d(T, mesh2d):
    """Boundary U-jump integrals per axis and interface P/Q jump integrals."""
    k = T.U.degree
    wbar = 2.0 / (2.0 * np.arange(k + 1) + 1.0)
    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    J = 3 * mesh2d.N // 4

    Ul = T.U.x_edge_trace("left")
    Ur = T.U.x_edge_trace("right")
    Ub = T.U.y_edge_trace("bottom")
    Ut = T.U.y_edge_trace("top")
    # [[U]]_{0,y} = -U^+ on x=0; [[U]]_{N,y} = U^- on x=1 (squares drop sign)
    bnd_x = _edge_sq(Ul[0], hy, wbar) + _edge_sq(Ur[-1], hy, wbar)
    bnd_y = _edge_sq(Ub[:, 0], hx, wbar) + _edge_sq(Ut[:, -1], hx, wbar)

    Pjump = T.P.x_edge_trace("right")[J - 1] - T.P.x_edge_trace("left")[J]
    Qjump = T.Q.y_edge_trace("top")[:, J - 1] - T.Q.y_edge_trace("bottom")[:, J]
    int_p = _edge_sq(Pjump, hy, wbar)
    int_q = _edge_sq(Qjump, hx, wbar)
    return bnd_x, bnd_y, int_p, int_q


def _b_weighted_sq_2d(U, b, mesh2d, quad):
    rule = gauss_rule(quad)
    V, _ = legendre_table(U.degree, rule.points)
    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    Xg = mesh2d.mx.nodes[:-1, None] + hx[:, None] * (rule.points[None, :] + 1.0)
    Yg = mesh2d.my.nodes[:-1, None] + hy[:, None] * (rule.points[None, :] + 1.0)
    bvals = np.asarray(
        b(Xg[:, None, :, None], Yg[None, :, None, :]), dtype=float
    )  # (N, N, nq, nq)
    Uv = np.einsum("ijmn,gm,hn->ijgh", U.coeffs, V, V, optimize=True)
    w2 = rule.weights[:, None] * rule.weights[None, :]
    scale = hx[:, None] * hy[None, :]
    return float(np.einsum("ij,gh,ijgh->", scale, w2, bvals * Uv**2, optimize=True))


def energy_norm_2d(T, problem, mesh2d, quad=None):
    """2D energy norm; total^2 equals B(T; T)."""
    quad = quad or assembly_quad_order(T.U.degree)
    eps = problem.eps
    root = float(np.sqrt(eps))
    bnd_x, bnd_y, int_p, int_q = _jump_terms_2d(T, mesh2d)
    return NormBreakdown(
        q_term=(_l2_sq_modal_2d(T.P, mesh2d) + _l2_sq_modal_2d(T.Q, mesh2d)) / eps,
        u_term=_b_weighted_sq_2d(T.U, problem.b, mesh2d, quad),
        boundary_jump_term=root * (bnd_x + bnd_y),
        interface_jump_term=(int_p + int_q) / root,
    )


def balanced_norm_2d(T, problem, mesh2d, quad=None):
    quad = quad or assembly_quad_order(T.U.degree)
    eps = problem.eps
    bnd_x, bnd_y, int_p, int_q = _jump_terms_2d(T, mesh2d)
    return NormBreakdown(
        q_term=(_l2_sq_modal_2d(T.P, mesh2d) + _l2_sq_modal_2d(T.Q, mesh2d)) / eps**1.5,
        u_term=_b_weighted_sq_2d(T.U, problem.b, mesh2d, quad),
        boundary_jump_term=bnd_x + bnd_y,
        interface_jump_term=(int_p + int_q) / eps,
    )


def error_norms_2d(T, problem, mesh2d, quad=None):
    """Energy- and balanced-norm errors of the discrete triple (U, P, Q)."""
    if not problem.has_exact:
        raise ConfigurationError("error norms need exact solution handles")
    k = T.U.degree
    quad = quad or error_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    hx = 0.5 * np.diff(mesh2d.mx.nodes)
    hy = 0.5 * np.diff(mesh2d.my.nodes)
    Xg = mesh2d.mx.nodes[:-1, None] + hx[:, None] * (rule.points[None, :] + 1.0)
    Yg = mesh2d.my.nodes[:-1, None] + hy[:, None] * (rule.points[None, :] + 1.0)
    X4 = Xg[:, None, :, None]
    Y4 = Yg[None, :, None, :]

    def field_vals(F):
        return np.einsum("ijmn,gm,hn->ijgh", F.coeffs, V, V, optimize=True)

    du = np.asarray(problem.u_exact(X4, Y4), dtype=float) - field_vals(T.U)
    dp = np.asarray(problem.p_exact(X4, Y4), dtype=float) - field_vals(T.P)
    dq = np.asarray(problem.q_exact(X4, Y4), dtype=float) - field_vals(T.Q)
    bvals = np.asarray(problem.b(X4, Y4), dtype=float)
    w2 = rule.weights[:, None] * rule.weights[None, :]
    scale = hx[:, None] * hy[None, :]

    def integral(Z):
        return float(np.einsum("ij,gh,ijgh->", scale, w2, Z, optimize=True))

    u_int = integral(bvals * du**2)
    pq_int = integral(dp**2) + integral(dq**2)
    bnd_x, bnd_y, int_p, int_q = _jump_terms_2d(T, mesh2d)

    eps = problem.eps
    root = float(np.sqrt(eps))
    energy = NormBreakdown(
        q_term=pq_int / eps,
        u_term=u_int,
        boundary_jump_term=root * (bnd_x + bnd_y),
        interface_jump_term=(int_p + int_q) / root,
    )
    balanced = NormBreakdown(
        q_term=pq_int / eps**1.5,
        u_term=u_int,
        boundary_jump_term=bnd_x + bnd_y,
        interface_jump_term=(int_p + int_q) / eps,
    )
    return energy, balanced


def rate_shishkin(e_N, e_2N, N):
    """Convergence order in the Shishkin metric N^{-1} ln N.

    r = (log e_N - log e_2N) / log(2 ln N / ln 2N); returns None when either
    error is nonpositive.
    """
    if N < 2:
        raise ConfigurationError(f"rate needs N >= 2, got {N}")
    if e_N <= 0.0 or e_2N <= 0.0:
        return None
    return float((np.log(e_N) - np.log(e_2N)) / np.log(2.0 * np.log(N) / np.log(2.0 * N)))


def linf_error_1d(dgf, exact, mesh, cells=None, samples=40):
    """Sampled sup-norm of (exact - dgf) over the given 1-based cells.

    Debug aid for projection studies; sampling uses a uniform per-cell grid
    including both endpoints.
    """
    cells = range(1, mesh.N + 1) if cells is None else cells
    worst = 0.0
    ts = np.linspace(-1.0, 1.0, samples)
    Vt, _ = legendre_table(dgf.degree, ts)
    for i in cells:
        a, b = mesh.cell(i)
        xs = a + (b - a) * (ts + 1.0) / 2.0
        vals = Vt @ dgf.coeffs[i - 1]
        worst = max(worst, float(np.max(np.abs(np.asarray(exact(xs), dtype=float) - vals))))
    return worst


def l2_error_region_1d(dgf, exact, mesh, cells, quad=None):
    """L2 error of a DG function against ``exact`` over a set of 1-based cells."""
    k = dgf.degree
    quad = quad or error_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    total = 0.0
    for i in cells:
        a, b = mesh.cell(i)
        half = 0.5 * (b - a)
        xs = a + half * (rule.points + 1.0)
        diff = np.asarray(exact(xs), dtype=float) - V @ dgf.coeffs[i - 1]
        total += half * float(np.sum(rule.weights * diff**2))
    return float(np.sqrt(total))


def l2_error_region_2d(dgf, exact, mesh2d, cell_filter, quad=None):
    """L2 error over the 1-based cells (i, j) accepted by ``cell_filter``."""
    k = dgf.degree
    quad = quad or error_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    w2 = rule.weights[:, None] * rule.weights[None, :]
    total = 0.0
    N = mesh2d.N
    for i in range(1, N + 1):
        ax, bx = mesh2d.mx.cell(i)
        xs = ax + 0.5 * (bx - ax) * (rule.points + 1.0)
        for j in range(1, N + 1):
            if not cell_filter(i, j):
                continue
            ay, by = mesh2d.my.cell(j)
            ys = ay + 0.5 * (by - ay) * (rule.points + 1.0)
            vals = V @ dgf.coeffs[i - 1, j - 1] @ V.T
            diff = np.asarray(exact(xs[:, None], ys[None, :]), dtype=float) - vals
            total += 0.25 * (bx - ax) * (by - ay) * float(np.sum(w2 * diff**2))
    return float(np.sqrt(total))
