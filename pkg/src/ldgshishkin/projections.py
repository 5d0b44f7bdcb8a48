"""Cell-local polynomial projections and their composite region-wise forms.

Three local operators are provided on each cell:

* plain L2 projection (diagonal in the modal basis),
* weighted L2 projection with a positive weight b (small Gram solve),
* Gauss-Radau projections: k moment conditions against degree k-1 plus an
  endpoint interpolation condition; the "minus" variant matches the right
  endpoint value, the "plus" variant the left one.

The composite operators dispatch per mesh region: the one tailored to the
primal variable uses the Radau-minus projection on the two fine (layer)
regions and the weighted projection on the coarse interior; the one for
the flux variable uses plain L2 on the first cell and Radau-plus elsewhere.
2D versions act tensorially, one direction at a time.
"""

import numpy as np

from .basis import (
    assembly_quad_order,
    cell_map,
    gauss_rule,
    legendre_table,
)
from .dgfunction import DGFunction1D, DGFunction2D
from .errors import ConfigurationError, ProjectionError

L2 = "l2"
WEIGHTED = "weighted"
GR_MINUS = "gr_minus"
GR_PLUS = "gr_plus"


def _moments(w, cell, k, quad):
    """Modal moments integral(w * P_n) dt on the reference cell, n = 0..k."""
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    vals = np.asarray(w(cell_map(cell, rule.points)), dtype=float)
    return (rule.weights * vals) @ V


def project_l2(w, cell, k, quad=None):
    """L2 projection onto degree k on ``cell``; returns modal coefficients.

    Diagonal in the modal basis: c_n = (2n+1)/2 * integral(w P_n) dt.
    """
    quad = quad or assembly_quad_order(k)
    mom = _moments(w, cell, k, quad)
    n = np.arange(k + 1)
    return (2.0 * n + 1.0) / 2.0 * mom


def project_weighted(w, b, cell, k, quad=None):
    """Weighted L2 projection: <b(pw - w), v> = 0 for all v of degree <= k.

    Solves the (k+1)x(k+1) weighted Gram system per cell.  Raises
    ProjectionError when the weight makes the system singular.
    """
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    xs = cell_map(cell, rule.points)
    bvals = np.asarray(b(xs), dtype=float)
    wvals = np.asarray(w(xs), dtype=float)
    gram = V.T @ (V * (rule.weights * bvals)[:, None])
    rhs = V.T @ (rule.weights * bvals * wvals)
    try:
        coeffs = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise ProjectionError(f"weighted Gram system singular on cell {cell}") from exc
    if not np.all(np.isfinite(coeffs)):
        raise ProjectionError(f"weighted projection produced non-finite values on cell {cell}")
    return coeffs


def _gauss_radau(w, cell, k, endpoint_value, side, quad):
    """Shared Radau solve: k moments against degree k-1 plus one endpoint row.

    Assembled as a small linear system in the modal basis (the moment rows
    are diagonal, the endpoint row is dense).
    """
    mom = _moments(w, cell, k, quad)
    n = np.arange(k + 1)
    A = np.zeros((k + 1, k + 1))
    rhs = np.zeros(k + 1)
    A[:k, :k] = np.diag(2.0 / (2.0 * n[:k] + 1.0))
    rhs[:k] = mom[:k]
    A[k, :] = (-1.0) ** n if side == "left" else 1.0
    rhs[k] = endpoint_value
    return np.linalg.solve(A, rhs)


def project_gr_minus(w, cell, k, quad=None, value_right=None):
    """Radau projection matching w at the right endpoint of ``cell``.

    ``value_right`` overrides the endpoint sample for functions given only
    through one-sided limits.
    """
    quad = quad or assembly_quad_order(k)
    if value_right is None:
        value_right = float(np.asarray(w(cell[1]), dtype=float))
    return _gauss_radau(w, cell, k, value_right, "right", quad)


def project_gr_plus(w, cell, k, quad=None, value_left=None):
    """Radau projection matching w at the left endpoint of ``cell``."""
    quad = quad or assembly_quad_order(k)
    if value_left is None:
        value_left = float(np.asarray(w(cell[0]), dtype=float))
    return _gauss_radau(w, cell, k, value_left, "left", quad)


def composite_project_minus_1d(u, mesh, k, quad=None, b=None):
    """Region-wise projection for the primal variable.

    Radau-minus on cells 1..N/4 and 3N/4+1..N (layer regions), weighted L2
    on the coarse cells N/4+1..3N/4.  ``b`` defaults to weight 1 (plain L2).
    """
    N = mesh.N
    coeffs = np.empty((N, k + 1))
    for i in range(1, N + 1):
        cell = mesh.cell(i)
        if i <= N // 4 or i > 3 * N // 4:
            coeffs[i - 1] = project_gr_minus(u, cell, k, quad=quad)
        elif b is None:
            coeffs[i - 1] = project_l2(u, cell, k, quad=quad)
        else:
            coeffs[i - 1] = project_weighted(u, b, cell, k, quad=quad)
    return DGFunction1D(mesh, k, coeffs)


def composite_project_plus_1d(q, mesh, k, quad=None):
    """Region-wise projection for the flux: plain L2 on cell 1, Radau-plus
    on cells 2..N."""
    N = mesh.N
    coeffs = np.empty((N, k + 1))
    coeffs[0] = project_l2(q, mesh.cell(1), k, quad=quad)
    for i in range(2, N + 1):
        coeffs[i - 1] = project_gr_plus(q, mesh.cell(i), k, quad=quad)
    return DGFunction1D(mesh, k, coeffs)


def _projection_matrix_1d(kind, k, quad):
    """Linear map from (moments, endpoint value) data to modal coefficients.

    Returns a function data -> coefficients where data stacks the k+1
    modal moments and, for Radau kinds, the matched endpoint value.
    """
    n = np.arange(k + 1)
    if kind == L2:
        def apply(mom, endpoint=None):
            return (2.0 * n + 1.0) / 2.0 * mom
        return apply
    if kind in (GR_MINUS, GR_PLUS):
        side = "right" if kind == GR_MINUS else "left"
        A = np.zeros((k + 1, k + 1))
        A[:k, :k] = np.diag(2.0 / (2.0 * n[:k] + 1.0))
        A[k, :] = 1.0 if side == "right" else (-1.0) ** n
        Ainv = np.linalg.inv(A)

        def apply(mom, endpoint):
            rhs = np.concatenate([mom[:k], [endpoint]])
            return Ainv @ rhs
        return apply
    raise ConfigurationError(f"unknown 1D projection kind {kind!r}")


def tensor_project_2d(kind_x, kind_y, z, cell2d, k, quad=None, b=None):
    """Tensor projection on one rectangular cell; returns (k+1)x(k+1) modes.

    kind_x, kind_y in {'l2', 'gr_minus', 'gr_plus'} act separably: moments
    against the full degree in the other direction plus edge-moment
    conditions on the matched edge.  The weighted projection ('weighted' in
    both slots) solves the full 2D Gram system with weight b(x, y).
    """
    (ax, bx), (ay, by) = cell2d
    quad = quad or assembly_quad_order(k)
    rule = gauss_rule(quad)
    V, _ = legendre_table(k, rule.points)
    xs = cell_map((ax, bx), rule.points)
    ys = cell_map((ay, by), rule.points)
    Z = np.asarray(z(xs[:, None], ys[None, :]), dtype=float)

    weighted = WEIGHTED in (kind_x, kind_y)
    if weighted:
        if kind_x != WEIGHTED or kind_y != WEIGHTED:
            raise ConfigurationError(
                "the weighted 2D projection applies in both directions at once"
            )
        if b is None:
            raise ConfigurationError("weighted 2D projection needs the weight handle b")
        B = np.asarray(b(xs[:, None], ys[None, :]), dtype=float)
        WB = (rule.weights[:, None] * rule.weights[None, :]) * B
        # Gram[(m,n),(a,c)] = sum_gh WB[g,h] V[g,m]V[g,a] V[h,n]V[h,c]
        gram = np.einsum("gh,gm,ga,hn,hc->mnac", WB, V, V, V, V, optimize=True)
        rhs = np.einsum("gh,gh,gm,hn->mn", WB, Z, V, V, optimize=True)
        kk = (k + 1) * (k + 1)
        try:
            sol = np.linalg.solve(gram.reshape(kk, kk), rhs.reshape(kk))
        except np.linalg.LinAlgError as exc:
            raise ProjectionError("2D weighted Gram system singular") from exc
        return sol.reshape(k + 1, k + 1)

    # Separable path: project in y for each x quadrature line, then in x.
    apply_x = _projection_matrix_1d(kind_x, k, quad)
    apply_y = _projection_matrix_1d(kind_y, k, quad)

    # y-moments of z along each x line: M[g, n] = sum_h w_h z(x_g, y_h) P_n
    My = (Z * rule.weights[None, :]) @ V
    if kind_y in (GR_MINUS, GR_PLUS):
        y_edge = by if kind_y == GR_MINUS else ay
        edge_vals = np.asarray(z(xs, np.full_like(xs, y_edge)), dtype=float)
        ycoef = np.stack([apply_y(My[g], edge_vals[g]) for g in range(xs.size)])
    else:
        ycoef = np.stack([apply_y(My[g]) for g in range(xs.size)])

    # Each y-mode column is now a function of x sampled at the quad points.
    Mx = (ycoef * rule.weights[:, None]).T @ V  # (k+1 y-modes, k+1 x-moments)
    out = np.empty((k + 1, k + 1))
    if kind_x in (GR_MINUS, GR_PLUS):
        x_edge = bx if kind_x == GR_MINUS else ax
        edge_line = lambda yy: np.asarray(z(np.full_like(yy, x_edge), yy), dtype=float)
        edge_mom = (rule.weights * edge_line(ys)) @ V
        if kind_y in (GR_MINUS, GR_PLUS):
            corner = float(np.asarray(z(x_edge, y_edge), dtype=float))
            edge_coef = apply_y(edge_mom, corner)
        else:
            edge_coef = apply_y(edge_mom)
        for n in range(k + 1):
            out[:, n] = apply_x(Mx[n], edge_coef[n])
    else:
        for n in range(k + 1):
            out[:, n] = apply_x(Mx[n])
    return out


def composite_project_minus_2d(u, mesh2d, k, quad=None, b=None):
    """Region-wise 2D projection for the primal variable.

    Radau-minus in x on the left/right layer strips crossed with the coarse
    y band, Radau-minus in y on the mirrored strips, weighted L2 elsewhere
    (corners, the centre block and the i = N / j = N strips).
    """
    N = mesh2d.N
    q1, q3 = N // 4, 3 * N // 4
    out = DGFunction2D.zeros(mesh2d, k)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            cell = mesh2d.cell(i, j)
            x_strip = (i <= q1) or (q3 + 1 <= i <= N - 1)
            y_strip = (j <= q1) or (q3 + 1 <= j <= N - 1)
            if x_strip and (q1 + 1 <= j <= q3):
                c = tensor_project_2d(GR_MINUS, L2, u, cell, k, quad=quad)
            elif y_strip and (q1 + 1 <= i <= q3):
                c = tensor_project_2d(L2, GR_MINUS, u, cell, k, quad=quad)
            elif b is None:
                c = tensor_project_2d(L2, L2, u, cell, k, quad=quad)
            else:
                c = tensor_project_2d(WEIGHTED, WEIGHTED, u, cell, k, quad=quad, b=b)
            out.coeffs[i - 1, j - 1] = c
    return out


def composite_project_plus_x_2d(p, mesh2d, k, quad=None):
    """2D flux projection in x: plain L2 on column i = 1, Radau-plus in x
    elsewhere."""
    N = mesh2d.N
    out = DGFunction2D.zeros(mesh2d, k)
    for i in range(1, N + 1):
        kind = L2 if i == 1 else GR_PLUS
        for j in range(1, N + 1):
            out.coeffs[i - 1, j - 1] = tensor_project_2d(
                kind, L2, p, mesh2d.cell(i, j), k, quad=quad
            )
    return out


def composite_project_plus_y_2d(q, mesh2d, k, quad=None):
    """2D flux projection in y: plain L2 on row j = 1, Radau-plus in y
    elsewhere."""
    N = mesh2d.N
    out = DGFunction2D.zeros(mesh2d, k)
    for j in range(1, N + 1):
        kind = L2 if j == 1 else GR_PLUS
        for i in range(1, N + 1):
            out.coeffs[i - 1, j - 1] = tensor_project_2d(
                L2, kind, q, mesh2d.cell(i, j), k, quad=quad
            )
    return out
