import numpy as np
import pytest

from src.transmutant.closed_forms import REFERENCE_KERNELS
from src.transmutant.config_loader import config
from src.transmutant.errors import ConfigError, ConvergenceError, InvalidArgumentError
from src.transmutant.goursat import (
    KtSource,
    Provenance,
    TransmutationKernel,
    boundary_defect,
    free_kernel,
    goursat_residual,
    kernel_kink_report,
    lattice_ratio,
    reparametrize_h,
    solve_goursat,
    solve_kernel,
)
from src.transmutant.grid import make_grid
from src.transmutant.potentials import rational


def _max_diff(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_zero_potential_gives_constant_kernel(unit_grid):
    H = solve_goursat(unit_grid.constant(0.0), 0.5)
    assert H.iterations_used == 1
    assert H.converged

    K = solve_kernel(unit_grid.constant(0.0), 0.5)
    assert _max_diff(K.K, 0.25) == 0.0
    assert _max_diff(K.Kt, 0.0) == 0.0
    assert _max_diff(K.K, free_kernel(unit_grid, 0.5).K) == 0.0


def test_rational_kernel_matches_closed_form(rational_kernel, rational_exact):
    assert rational_kernel.provenance is Provenance.GOURSAT
    assert rational_kernel.kt_source is KtSource.QUADRATURE
    assert _max_diff(rational_kernel.K, rational_exact.K) < 1e-6
    assert _max_diff(rational_kernel.Kt, rational_exact.Kt) < 1e-6


def test_rational_kernel_point_values(rational_kernel):
    # K(x, t; -1) = (t - 1) / (2 (x + 1))
    assert rational_kernel.at(0.25, 0.1) == pytest.approx(-0.9 / 2.5, abs=1e-6)
    assert rational_kernel.kt_at(-0.3, 0.2) == pytest.approx(1 / 1.4, abs=1e-6)


def test_constant_potential_matches_bessel_kernel(const_kernel, unit_grid):
    exact = REFERENCE_KERNELS["const_q1"].on_grid(unit_grid)
    assert _max_diff(const_kernel.K, exact.K) < 1e-6
    # K(x, x; 0) = x / 2 and K(x, -x; 0) = 0
    assert _max_diff(const_kernel.diagonal(), unit_grid.nodes / 2) < 1e-8
    assert _max_diff(const_kernel.antidiagonal(), 0.0) < 1e-12


def test_iteration_defects_decrease(unit_grid):
    H = solve_goursat(unit_grid.constant(1.0), 0)
    assert H.converged
    assert len(H.history) == H.iterations_used > 1
    assert all(later < earlier for earlier, later in zip(H.history, H.history[1:]))
    assert H.history[-1] < config.get("goursat.tol")
    assert H.residual == H.history[-1]


def test_boundary_conditions(rational_kernel, q_rational):
    anti, diag = boundary_defect(rational_kernel, q_rational)
    assert anti < 1e-12
    assert diag < 1e-8


def test_odd_part_in_t_does_not_depend_on_h(q_rational, rational_kernel):
    other = solve_kernel(q_rational, 2)
    assert _max_diff(other.odd_in_t(), rational_kernel.odd_in_t()) < 1e-10


def test_non_convergence_reports_last_iterate(q_rational):
    with pytest.raises(ConvergenceError) as info:
        solve_goursat(q_rational, -1, max_iter=1)
    error = info.value
    assert error.exit_code == 3
    assert error.iterations == 1
    assert error.residual > 0
    assert error.field is not None
    assert not error.field.converged


def test_solver_argument_validation(q_rational):
    with pytest.raises(InvalidArgumentError):
        solve_goursat(q_rational, 0, tol=0.0)
    with pytest.raises(InvalidArgumentError):
        solve_goursat(q_rational, 0, max_iter=0)
    with pytest.raises(InvalidArgumentError):
        solve_goursat(q_rational, 0, m_points=500)


def test_lattice_ratio(rational_grid, monkeypatch):
    assert lattice_ratio(rational_grid, 401) == 1
    assert lattice_ratio(rational_grid, 1201) == 3
    assert lattice_ratio(rational_grid) == 1

    monkeypatch.setitem(config.all["goursat"], "m_ratio", 0)
    with pytest.raises(ConfigError):
        lattice_ratio(rational_grid)


def test_finer_characteristic_lattice(q_rational, rational_exact):
    K = solve_kernel(q_rational, -1, m_points=801)
    assert K.meta["m_points"] == 801
    assert _max_diff(K.K, rational_exact.K) < 1e-6


def test_reparametrization_matches_closed_form(rational_grid, rational_exact):
    moved = reparametrize_h(rational_exact, 2)
    target = REFERENCE_KERNELS["rational_n1_h2"].on_grid(rational_grid)
    assert moved.h == 2
    assert moved.provenance is Provenance.REPARAMETRIZED
    assert _max_diff(moved.K, target.K) < 1e-7
    assert _max_diff(moved.Kt, target.Kt) < 1e-7


def test_reparametrization_round_trip_and_identity(rational_exact):
    back = reparametrize_h(reparametrize_h(rational_exact, 2), -1)
    assert _max_diff(back.K, rational_exact.K) < 1e-12
    assert reparametrize_h(rational_exact, -1) is rational_exact


def test_reparametrized_goursat_kernel_matches_direct_solve(rational_kernel, q_rational):
    direct = solve_kernel(q_rational, 2)
    assert _max_diff(reparametrize_h(rational_kernel, 2).K, direct.K) < 1e-6


def test_pde_residual_of_closed_form_kernel(fine_rational_grid):
    K = REFERENCE_KERNELS["rational_n2"].on_grid(fine_rational_grid)
    q = rational(2).sample(fine_rational_grid)
    assert goursat_residual(K, q) < 5e-4


def test_pde_residual_detects_wrong_potential(fine_rational_grid):
    K = REFERENCE_KERNELS["rational_n2"].on_grid(fine_rational_grid)
    q = rational(1).sample(fine_rational_grid)
    assert goursat_residual(K, q) > 1e-2


def test_kink_report(rational_exact, rational_kernel):
    assert max(kernel_kink_report(rational_exact).values()) < 1e-10
    assert max(kernel_kink_report(rational_kernel).values()) < 1e-4


def test_kernel_without_t_derivative(rational_grid):
    n = rational_grid.n_points
    K = TransmutationKernel(rational_grid, 0, np.zeros((n, n)), None, Provenance.DARBOUX)
    assert K.kt_source is None
    with pytest.raises(InvalidArgumentError):
        K.require_kt()


def test_kernel_rejects_bad_shapes(rational_grid):
    with pytest.raises(InvalidArgumentError):
        TransmutationKernel(rational_grid, 0, np.zeros((3, 3)), None, Provenance.GOURSAT)


def test_kernel_nodes_must_be_grid_nodes(rational_exact):
    with pytest.raises(InvalidArgumentError):
        rational_exact.at(0.1234, 0.0)


def test_small_grid_solves():
    grid = make_grid(0.5, 5)
    K = solve_kernel(rational(1).sample(grid), -1)
    assert K.K.shape == (5, 5)
