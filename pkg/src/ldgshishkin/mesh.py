"""Piecewise-uniform Shishkin meshes on (0, 1) and their 2D tensor products.

The 1D mesh concentrates N/4 cells in each boundary-layer region [0, tau]
and [1-tau, 1], with the transition point

    tau = min(1/4, sigma * sqrt(eps) * ln(N) / beta).

Nodes are evaluated branch-by-branch from the closed formula (not by
accumulating widths) so that the mirror symmetry x_i + x_{N-i} = 1 holds at
machine precision.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

FINE_LEFT = "fine_left"
COARSE = "coarse"
FINE_RIGHT = "fine_right"


@dataclass(frozen=True)
class MeshConfig:
    """Parameters of the layer-adapted mesh.

    N must be a multiple of 4 (the three regions hold N/4, N/2, N/4 cells);
    sigma is the mesh constant (the driver pins sigma >= k+1), beta the
    lower-bound constant of the reaction coefficient.
    """

    N: int
    eps: float
    sigma: float
    beta: float = 1.0

    def __post_init__(self):
        if self.N < 4 or self.N % 4 != 0:
            raise ConfigurationError(f"N must be a multiple of 4 and >= 4, got {self.N}")
        if not 0.0 < self.eps <= 1.0:
            raise ConfigurationError(f"eps must lie in (0, 1], got {self.eps}")
        if self.sigma <= 0.0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if self.beta <= 0.0:
            raise ConfigurationError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class Mesh1D:
    """Shishkin mesh nodes 0 = x_0 < ... < x_N = 1.

    ``tau`` is the (possibly capped) transition point; ``clamped`` is set
    when the formula value hit the 1/4 cap and the mesh degenerated to a
    uniform one.  Region boundaries sit at cell indices N/4 and 3N/4.
    """

    config: MeshConfig
    nodes: np.ndarray
    tau: float
    clamped: bool

    @property
    def N(self):
        return self.config.N

    @property
    def eps(self):
        return self.config.eps

    @property
    def widths(self):
        return np.diff(self.nodes)

    @property
    def fine_width(self):
        return 4.0 * self.tau / self.N

    @property
    def coarse_width(self):
        return 2.0 * (1.0 - 2.0 * self.tau) / self.N

    @property
    def interface_index(self):
        """Node index of the right transition point x = 1 - tau."""
        return 3 * self.N // 4

    def cell(self, i):
        """Endpoints (x_{i-1}, x_i) of cell i, 1-based."""
        if not 1 <= i <= self.N:
            raise ConfigurationError(f"cell index {i} outside 1..{self.N}")
        return self.nodes[i - 1], self.nodes[i]

    def dump(self, stream):
        """Write one node per line at 17 significant digits (debug aid)."""
        for x in self.nodes:
            stream.write(f"{x:.17g}\n")


@dataclass(frozen=True)
class Mesh2D:
    """Tensor-product mesh; both axes share the same 1D Shishkin mesh."""

    mx: Mesh1D
    my: Mesh1D = None

    def __post_init__(self):
        if self.my is None:
            object.__setattr__(self, "my", self.mx)
        if self.my.N != self.mx.N:
            raise ConfigurationError("2D mesh requires the same N on both axes")

    @property
    def N(self):
        return self.mx.N

    @property
    def eps(self):
        return self.mx.eps

    @property
    def clamped(self):
        return self.mx.clamped or self.my.clamped

    def cell(self, i, j):
        """Rectangle I_i x J_j for 1-based indices (i, j)."""
        return self.mx.cell(i), self.my.cell(j)


def build_shishkin_1d(cfg):
    """Build the 1D Shishkin mesh for ``cfg``.

    tau = min(1/4, sigma*sqrt(eps)*ln(N)/beta); with t_i = i/N the nodes are
    4*tau*t_i on [0, tau], tau + 2(1-2tau)(t_i - 1/4) in the interior and
    1 - 4*tau*(1 - t_i) on [1-tau, 1].
    """
    N = cfg.N
    tau_formula = cfg.sigma * np.sqrt(cfg.eps) * np.log(N) / cfg.beta
    clamped = bool(tau_formula >= 0.25)
    tau = 0.25 if clamped else float(tau_formula)

    i = np.arange(N + 1)
    t = i / N
    nodes = np.empty(N + 1)
    left = i <= N // 4
    right = i > 3 * N // 4
    mid = ~(left | right)
    nodes[left] = 4.0 * tau * t[left]
    nodes[mid] = tau + 2.0 * (1.0 - 2.0 * tau) * (t[mid] - 0.25)
    nodes[right] = 1.0 - 4.0 * tau * (1.0 - t[right])
    nodes[0] = 0.0
    nodes[N] = 1.0
    return Mesh1D(config=cfg, nodes=nodes, tau=tau, clamped=clamped)


def build_shishkin_2d(cfg):
    """Tensor-product Shishkin mesh: the same 1D mesh on both axes."""
    m = build_shishkin_1d(cfg)
    return Mesh2D(mx=m, my=m)


def region_of(mesh, i):
    """Region of cell i (1-based): fine_left, coarse or fine_right."""
    N = mesh.N
    if not 1 <= i <= N:
        raise ConfigurationError(f"cell index {i} outside 1..{N}")
    if i <= N // 4:
        return FINE_LEFT
    if i <= 3 * N // 4:
        return COARSE
    return FINE_RIGHT
