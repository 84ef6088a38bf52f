import numpy as np
import pytest

from src.transmutant.dirac import (
    DiracConfig,
    Spinor,
    dirac_kernels,
    dirac_profile,
    dirac_residual,
    dirac_transmute,
    dirac_untransmute,
    free_dirac_solution,
)
from src.transmutant.errors import InvalidArgumentError
from src.transmutant.transmute import ode_residual


def _max_diff(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


@pytest.fixture(scope="module")
def free_mass(unit_grid):
    cfg = DiracConfig(unit_grid, 1.0, unit_grid.constant(0.0), (1.0, 2.0))
    pair, K1, K2 = dirac_kernels(cfg)
    return cfg, pair, K1, K2


def test_mass_must_be_positive(unit_grid):
    with pytest.raises(InvalidArgumentError):
        DiracConfig(unit_grid, 0.0, unit_grid.constant(0.0))
    with pytest.raises(InvalidArgumentError):
        DiracConfig(unit_grid, -1.0, unit_grid.constant(0.0))


def test_energies_are_stored_complex(unit_grid):
    cfg = DiracConfig(unit_grid, 1.0, unit_grid.constant(0.0), (1, 2.5))
    assert cfg.E == (1 + 0j, 2.5 + 0j)


def test_profile_of_constant_mass(unit_grid):
    cfg = DiracConfig(unit_grid, 1.0, unit_grid.constant(0.0))
    p = dirac_profile(cfg)
    x = unit_grid.nodes
    assert _max_diff(p.f.values, np.exp(-x)) < 1e-13
    assert _max_diff(p.q.values, 1.0) == 0.0
    assert p.h == pytest.approx(-1.0)


def test_profile_with_kink_potential(unit_grid):
    cfg = DiracConfig(unit_grid, 1.0, unit_grid.samples(np.tanh))
    p = dirac_profile(cfg)
    x = unit_grid.nodes
    assert _max_diff(p.f.values, np.exp(-x) / np.cosh(x)) < 1e-8
    assert _max_diff(p.q.values, (1 + np.tanh(x)) ** 2 - 1 / np.cosh(x) ** 2) < 1e-6


def test_free_solution_solves_massless_system(unit_grid):
    u = free_dirac_solution(1.5, 0.3, -0.7, unit_grid)
    zero_mass = DiracConfig(unit_grid, 1e-300, unit_grid.constant(0.0))
    assert dirac_residual(zero_mass, u, 1.5) < 1e-6


def test_transmuted_spinors_solve_the_system(free_mass, unit_grid):
    cfg, pair, K1, K2 = free_mass
    assert K1.h == -1
    assert K2.h == 1
    for E in cfg.E:
        psi = dirac_transmute(K1, K2, free_dirac_solution(E, 1.0, 0.0, unit_grid))
        assert dirac_residual(cfg, psi, E) < 5e-4
        assert ode_residual(psi.psi1, pair.p1.q, -E * E) < 5e-3


def test_untransmute_round_trip(free_mass, unit_grid):
    _, _, K1, K2 = free_mass
    u = free_dirac_solution(2.0, 0.4, 1.1, unit_grid)
    back = dirac_untransmute(K1, K2, dirac_transmute(K1, K2, u))
    assert back.max_abs_diff(u) < 1e-6


def test_zero_mode(free_mass, unit_grid):
    cfg, pair, _, _ = free_mass
    mode = Spinor(pair.p1.f, unit_grid.constant(0.0))
    assert dirac_residual(cfg, mode, 0.0) < 5e-5


def test_kernels_must_be_a_pair(free_mass, unit_grid):
    _, _, K1, _ = free_mass
    with pytest.raises(InvalidArgumentError):
        dirac_transmute(K1, K1, free_dirac_solution(1.0, 1.0, 0.0, unit_grid))


def test_kink_potential_transmutation(unit_grid):
    cfg = DiracConfig(unit_grid, 1.0, unit_grid.samples(np.tanh), (1.0,))
    _, K1, K2 = dirac_kernels(cfg)
    psi = dirac_transmute(K1, K2, free_dirac_solution(1.0, 0.0, 1.0, unit_grid))
    assert dirac_residual(cfg, psi, 1.0) < 5e-3
