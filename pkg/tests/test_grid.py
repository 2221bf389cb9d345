"""Mesh construction and the discrete radial Laplacian."""

import numpy as np
import pytest

from blowup_lab.grid import (FixedValueEdge, FluxEdge, RadialGrid, build_grid,
                             radial_laplacian)


def test_build_grid_nodes_and_spacing():
    g = build_grid(2, 1.0, 10)
    assert g.spacing == pytest.approx(0.1, abs=0)
    np.testing.assert_allclose(g.nodes, np.arange(11) * 0.1, atol=1e-15)
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == 1.0


def test_build_grid_one_dim_spacing():
    assert build_grid(1, 1.0, 8).spacing == 0.125


@pytest.mark.parametrize("n_dim,radius,cells", [
    (3, 0.0, 10),
    (3, -1.0, 10),
    (1, 1.0, 7),
    (0, 1.0, 10),
])
def test_build_grid_rejects_bad_arguments(n_dim, radius, cells):
    with pytest.raises(ValueError):
        build_grid(n_dim, radius, cells)


def test_spacing_times_cells_recovers_radius():
    for cells in (8, 13, 200, 397):
        g = build_grid(1, 0.7, cells)
        assert g.spacing * g.num_cells == pytest.approx(0.7, rel=1e-15)


@pytest.mark.parametrize("n_dim", [1, 2, 3])
def test_laplacian_exact_on_quadratics(n_dim):
    # central differences are exact on a + b*r^2: lap = 2*n*b everywhere,
    # including r = 0 (coarse enough that h^-2 cancellation stays below
    # the 1e-12 relative exactness floor)
    g = build_grid(n_dim, 1.0, 32)
    vals = 3.0 + 2.0 * g.nodes ** 2
    lap = radial_laplacian(g, vals, FixedValueEdge(float(vals[-1])))
    np.testing.assert_allclose(lap[:-1], 4.0 * n_dim, rtol=1e-12)


def test_laplacian_constant_with_zero_flux_is_zero():
    g = build_grid(2, 1.0, 40)
    vals = np.full(g.num_nodes, 1.7)
    lap = radial_laplacian(g, vals, FluxEdge(0.0))
    np.testing.assert_allclose(lap, 0.0, atol=1e-12)


def test_laplacian_second_order_convergence_quartic():
    # u = r^4, n = 1: the analytic value is 12 r^2; halving h must shrink
    # the max interior error by a factor close to 4 (second order)
    errors = []
    for cells in (32, 64, 128):
        g = build_grid(1, 1.0, cells)
        vals = g.nodes ** 4
        lap = radial_laplacian(g, vals, FixedValueEdge(1.0))
        exact = 12.0 * g.nodes ** 2
        errors.append(np.abs(lap[:-1] - exact[:-1]).max())
    assert 3.5 <= errors[0] / errors[1] <= 4.5
    assert 3.5 <= errors[1] / errors[2] <= 4.5


def test_center_closure_uses_symmetry():
    # at r = 0 the stencil must reduce to 2*n*(u1 - u0)/h^2 (no negative index)
    g = build_grid(3, 1.0, 16)
    vals = np.cos(g.nodes)
    lap = radial_laplacian(g, vals, FixedValueEdge(float(vals[-1])))
    h = g.spacing
    assert lap[0] == pytest.approx(2.0 * 3 * (vals[1] - vals[0]) / h**2, rel=1e-14)


def test_flux_edge_ghost_elimination_matches_hand_expansion():
    # u constant c, flux f: boundary row is (2/h^2)*(h*f) + ((n-1)/R)*f
    g = build_grid(2, 1.5, 24)
    c, f = 0.5, 1.9
    vals = np.full(g.num_nodes, c)
    lap = radial_laplacian(g, vals, FluxEdge(f))
    h = g.spacing
    expected = (2.0 / h**2) * (h * f) + ((2 - 1) / 1.5) * f
    assert lap[-1] == pytest.approx(expected, rel=1e-14)
    np.testing.assert_allclose(lap[:-1], 0.0, atol=1e-12)


def test_fixed_value_edge_has_inert_boundary_row():
    g = build_grid(1, 1.0, 12)
    lap = radial_laplacian(g, g.nodes ** 2, FixedValueEdge(1.0))
    assert lap[-1] == 0.0


def test_laplacian_rejects_wrong_length():
    g = build_grid(1, 1.0, 12)
    with pytest.raises(ValueError):
        radial_laplacian(g, np.zeros(5), FixedValueEdge(0.0))


def test_volume_integral_one_dim_is_trapezoid():
    g = build_grid(1, 1.0, 10)
    vals = np.ones(g.num_nodes)
    assert g.integrate(vals) == pytest.approx(1.0, rel=1e-14)
