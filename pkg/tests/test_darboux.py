import numpy as np
import pytest

from src.transmutant.closed_forms import REFERENCE_KERNELS
from src.transmutant.darboux import (
    apply_T1_direct,
    apply_T2_direct,
    commutation_residuals,
    darboux_kernel,
    darboux_kernel_triangle,
    darboux_ladder,
    darboux_transform,
    generalized_derivative,
    generalized_derivative_residual,
    intertwine,
    rational_ladder,
    triangle_branch_gap,
    triangle_mask,
)
from src.transmutant.errors import InvalidArgumentError, VanishingSolutionError
from src.transmutant.formal_powers import build_potential
from src.transmutant.goursat import Provenance, goursat_residual
from src.transmutant.grid import derivative, interior_max, make_grid
from src.transmutant.potentials import SOLITON, rational
from src.transmutant.transmute import apply_T, ode_residual


def _max_diff(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


@pytest.fixture(scope="module")
def pair(fine_rational_grid):
    """q1 = 2/(x+1)^2 with f = (x+1)^2, so h = 2 and q2 = 6/(x+1)^2."""
    f, f_prime = rational(1).solution(fine_rational_grid)
    return darboux_transform(
        build_potential(rational(1).sample(fine_rational_grid), f=f, f_prime=f_prime)
    )


@pytest.fixture(scope="module")
def K1(fine_rational_grid):
    return REFERENCE_KERNELS["rational_n1_h2"].on_grid(fine_rational_grid)


@pytest.fixture(scope="module")
def K2(K1, pair):
    return darboux_kernel(K1, pair)


def test_transformed_potential(pair, fine_rational_grid):
    x = fine_rational_grid.nodes
    assert pair.h == 2
    assert _max_diff(pair.q2.values, 6 / (x + 1) ** 2) < 1e-12
    assert pair.p2.h == pytest.approx(-2.0)
    assert _max_diff(pair.p2.f.values, 1 / (x + 1) ** 2) < 1e-14


def test_darboux_kernel_matches_closed_form(K2, fine_rational_grid):
    exact = REFERENCE_KERNELS["rational_n2"].on_grid(fine_rational_grid)
    assert K2.h == -2
    assert K2.provenance is Provenance.DARBOUX
    assert K2.chain[-1] == "darboux"
    assert _max_diff(K2.K, exact.K) < 1e-7


def test_triangle_variant_agrees_on_its_domain(K1, K2, pair, fine_rational_grid):
    tri = darboux_kernel_triangle(K1, pair)
    mask = triangle_mask(fine_rational_grid)
    assert tri.Kt is None
    assert _max_diff(tri.K[mask], K2.K[mask]) < 1e-6
    assert _max_diff(tri.K[~mask], 0.0) == 0.0
    assert triangle_branch_gap(K1, pair) < 1e-6


def test_darboux_kernel_requires_matching_h(pair, fine_rational_grid):
    wrong = REFERENCE_KERNELS["rational_n1"].on_grid(fine_rational_grid)
    with pytest.raises(InvalidArgumentError):
        darboux_kernel(wrong, pair)
    with pytest.raises(InvalidArgumentError):
        darboux_kernel_triangle(wrong, pair)


def test_direct_operator_forms(K1, K2, pair, fine_rational_grid):
    u = fine_rational_grid.samples(np.cos)
    assert _max_diff(apply_T2_direct(K1, pair, u).values, apply_T(K2, u).values) < 1e-6
    assert _max_diff(apply_T1_direct(K2, pair, u).values, apply_T(K1, u).values) < 1e-6


def test_commutation_relations(K1, K2, pair, fine_rational_grid):
    u = fine_rational_grid.samples(lambda s: s**3)
    first, second = commutation_residuals(K1, K2, pair, u)
    assert first < 5e-4
    assert second < 5e-4


def test_generalized_derivatives(K1, K2, pair, fine_rational_grid):
    u = fine_rational_grid.samples(np.cos)
    derivatives = [np.cos, lambda s: -np.sin(s), lambda s: -np.cos(s), np.sin]
    for k in range(1, 4):
        u_k = fine_rational_grid.samples(derivatives[k])
        assert generalized_derivative_residual(K1, K2, pair, u, k, u_k) < 5e-3
    assert generalized_derivative(pair, u, 0) is u
    with pytest.raises(InvalidArgumentError):
        generalized_derivative(pair, u, -1)


def test_intertwiner_maps_eigenfunctions(K1, pair, fine_rational_grid):
    omega = 2.0
    u = apply_T(K1, fine_rational_grid.samples(lambda s: np.cos(omega * s)))
    v = intertwine(pair, u)
    assert ode_residual(v, pair.q2, -(omega**2)) < 5e-3
    # (D + f'/f)(D - f'/f) u = u'' - q1 u = -omega^2 u
    back = intertwine(pair, v, inverse=True)
    assert interior_max((back - u * -(omega**2)).values, 3) < 1e-5
    assert _max_diff(derivative(u).values - v.values, pair.p1.log_derivative() * u.values) < 1e-12


def test_rational_ladder(fine_rational_grid):
    ladder = rational_ladder(fine_rational_grid, 3)
    x = fine_rational_grid.nodes
    assert [rung.index for rung in ladder] == [0, 1, 2, 3]
    assert [rung.kernel.h for rung in ladder] == [0, -1, -2, -3]
    assert ladder[0].pair is None
    assert _max_diff(ladder[3].q.values, 12 / (x + 1) ** 2) < 1e-10
    exact_1 = REFERENCE_KERNELS["rational_n1"].on_grid(fine_rational_grid)
    exact_2 = REFERENCE_KERNELS["rational_n2"].on_grid(fine_rational_grid)
    assert _max_diff(ladder[1].kernel.K, exact_1.K) < 1e-6
    assert _max_diff(ladder[2].kernel.K, exact_2.K) < 1e-6
    assert goursat_residual(ladder[3].kernel, ladder[3].q) < 5e-4
    assert ladder[3].kernel.chain[-1] == "rung3"


def test_soliton_from_constant_potential(unit_grid):
    ladder = darboux_ladder(unit_grid.constant(1.0), [0.0, 0.0])
    rung = ladder[1]
    assert _max_diff(rung.q.values, SOLITON.q(unit_grid.nodes)) < 1e-8
    exact = REFERENCE_KERNELS["soliton"].on_grid(unit_grid)
    assert _max_diff(rung.kernel.K, exact.K) < 1e-6


@pytest.fixture(scope="module")
def soliton_pair(unit_grid):
    """q1 = 1 with f = cosh, so h = 0 and q2 = 1 - 2 sech^2."""
    return darboux_transform(
        build_potential(
            unit_grid.constant(1.0),
            f=unit_grid.samples(np.cosh),
            f_prime=unit_grid.samples(np.sinh),
        )
    )


def test_soliton_commutation_relations(const_kernel, soliton_pair, unit_grid):
    K2 = darboux_kernel(const_kernel, soliton_pair)
    u = unit_grid.samples(lambda s: np.cos(2 * s))
    first, second = commutation_residuals(const_kernel, K2, soliton_pair, u)
    assert first < 5e-4
    assert second < 5e-4


def test_transforming_twice_restores_potential(pair, soliton_pair):
    for p in (pair, soliton_pair):
        back = darboux_transform(p.p2)
        assert _max_diff(back.q2.values, p.p1.q.values) < 1e-12
        assert back.h == pytest.approx(-p.h)


def test_ladder_arguments(unit_grid):
    with pytest.raises(InvalidArgumentError):
        rational_ladder(unit_grid, 0)
    with pytest.raises(InvalidArgumentError):
        darboux_ladder(unit_grid.constant(1.0), [0.0])


def test_ladder_stops_on_vanishing_solution():
    grid = make_grid(2.0, 201)
    with pytest.raises(VanishingSolutionError):
        darboux_ladder(grid.constant(0.0), [0.0, 1.0])
