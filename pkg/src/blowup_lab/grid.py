"""Uniform radial mesh and discrete radial Laplacian on an n-dimensional ball.

For radially symmetric u the Laplacian reduces to

    lap u = u_rr + (n-1)/r * u_r,

discretized with second-order central differences on nodes r_i = i*h,
i = 0..M.  The coordinate singularity at r = 0 is removable: symmetry
(u_r(0) = 0) gives lap u(0) = n * u_rr(0), approximated by the one-sided
second difference 2*n*(u_1 - u_0)/h^2, which keeps order 2.

The boundary node i = M is closed either by an externally pinned value
(its Laplacian row is not used) or by a flux condition through ghost-node
elimination u_{M+1} = u_{M-1} + 2*h*flux; the ghost value is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RadialGrid:
    """Closed uniform mesh on [0, R] with M cells (M+1 nodes)."""

    n_dim: int
    radius: float
    num_cells: int

    @property
    def spacing(self) -> float:
        return self.radius / self.num_cells

    @property
    def nodes(self) -> np.ndarray:
        # linspace pins both endpoints exactly (r_0 = 0, r_M = R)
        return np.linspace(0.0, self.radius, self.num_cells + 1)

    @property
    def num_nodes(self) -> int:
        return self.num_cells + 1

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid integral of values weighted by the radial volume
        element r^(n-1); plain trapezoid in one dimension."""
        w = self.nodes ** (self.n_dim - 1)
        return float(np.trapezoid(values * w, dx=self.spacing))


@dataclass(frozen=True)
class FixedValueEdge:
    """Boundary value held externally (the i = M row is pinned, not evolved)."""

    value: float = 0.0


@dataclass(frozen=True)
class FluxEdge:
    """Outward normal slope u_r(R) imposed through a ghost node."""

    flux: float = 0.0


EdgeClosure = FixedValueEdge | FluxEdge


def build_grid(n_dim: int, radius: float, num_cells: int) -> RadialGrid:
    """Construct a validated grid.

    Raises ValueError for n_dim < 1, radius <= 0 or num_cells < 8.
    """
    if n_dim < 1:
        raise ValueError(f"n_dim must be >= 1, got {n_dim}")
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if num_cells < 8:
        raise ValueError(f"num_cells must be >= 8, got {num_cells}")
    return RadialGrid(n_dim=int(n_dim), radius=float(radius),
                      num_cells=int(num_cells))


def radial_laplacian(grid: RadialGrid, values: np.ndarray,
                     edge: EdgeClosure) -> np.ndarray:
    """Discrete radial Laplacian of a nodal field.

    Interior nodes use the standard second-order stencil; r = 0 uses the
    symmetry closure.  With a FixedValueEdge the boundary entry is 0 (the
    value is maintained by the caller and the row is never integrated);
    with a FluxEdge the ghost node is eliminated algebraically, yielding

        lap u(R) ~ 2*(u_{M-1} - u_M)/h^2 + (2/h + (n-1)/R) * flux.
    """
    if len(values) != grid.num_nodes:
        raise ValueError("field length does not match grid")
    h = grid.spacing
    n = grid.n_dim
    r = grid.nodes
    out = np.empty_like(values)
    out[0] = 2.0 * n * (values[1] - values[0]) / h**2
    out[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h**2
    if n > 1:
        out[1:-1] += ((n - 1) / r[1:-1]) * (values[2:] - values[:-2]) / (2.0 * h)
    if isinstance(edge, FixedValueEdge):
        out[-1] = 0.0
    else:
        out[-1] = (2.0 * (values[-2] - values[-1]) / h**2
                   + (2.0 / h + (n - 1) / grid.radius) * edge.flux)
    return out
