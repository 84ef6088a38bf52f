import numpy as np
import pytest

from src.transmutant.closed_forms import REFERENCE_KERNELS
from src.transmutant.errors import InvalidArgumentError
from src.transmutant.goursat import free_kernel
from src.transmutant.grid import even_part, make_grid, odd_part
from src.transmutant.potentials import SOLITON, rational
from src.transmutant.transmute import (
    HalfLineKind,
    apply_T,
    apply_T_inverse,
    half_line_apply,
    half_line_kernels,
    half_line_weights,
    initial_values,
    ode_residual,
    require_kernel_h,
    solution_c,
    solution_e0,
    solution_s,
    symmetric_weights,
    transmutation_residual,
)


def _max_diff(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def test_quadrature_weights(unit_grid):
    x = unit_grid.nodes
    assert _max_diff(symmetric_weights(unit_grid) @ np.ones_like(x), 2 * x) < 1e-13
    assert _max_diff(symmetric_weights(unit_grid) @ x**2, 2 * x**3 / 3) < 1e-13
    assert _max_diff(half_line_weights(unit_grid) @ np.cos(x), np.sin(x)) < 1e-9


def test_free_kernel_maps_one_to_line(unit_grid):
    K = free_kernel(unit_grid, 0.75)
    Tu = apply_T(K, unit_grid.constant(1.0))
    assert _max_diff(Tu.values, 1 + 0.75 * unit_grid.nodes) < 1e-13


def test_rational_images_with_exact_kernel(rational_exact, rational_grid):
    x = rational_grid.nodes
    T = lambda fn: apply_T(rational_exact, rational_grid.samples(fn)).values  # noqa: E731
    assert _max_diff(T(np.ones_like), 1 / (x + 1)) < 1e-12
    assert _max_diff(T(lambda s: s), (x**3 + 3 * x**2 + 3 * x) / (3 * (x + 1))) < 1e-12
    assert _max_diff(T(np.cos), np.cos(x) - np.sin(x) / (x + 1)) < 1e-10


def test_rational_images_with_goursat_kernel(rational_kernel, rational_grid):
    x = rational_grid.nodes
    Tu = apply_T(rational_kernel, rational_grid.samples(np.cos))
    assert _max_diff(Tu.values, np.cos(x) - np.sin(x) / (x + 1)) < 1e-6


def test_inverse_undoes_forward(rational_exact, rational_grid):
    u = rational_grid.samples(lambda s: s**3 - 2 * s)
    back = apply_T_inverse(rational_exact, apply_T(rational_exact, u))
    assert _max_diff(back.values, u.values) < 1e-7
    v = rational_grid.samples(np.exp)
    again = apply_T(rational_exact, apply_T_inverse(rational_exact, v))
    assert _max_diff(again.values, v.values) < 1e-7


def test_transmutation_identity_rational(fine_rational_grid):
    K = REFERENCE_KERNELS["rational_n1"].on_grid(fine_rational_grid)
    q = rational(1).sample(fine_rational_grid)
    for fn in (lambda s: s**2, lambda s: s**3, lambda s: np.cos(2 * s), np.exp):
        assert transmutation_residual(K, q, fine_rational_grid.samples(fn)) < 5e-4


def test_transmutation_identity_constant_potential():
    grid = make_grid(1.0, 401)
    K = REFERENCE_KERNELS["const_q1"].on_grid(grid)
    q = grid.constant(1.0)
    u = grid.samples(lambda s: np.cos(2 * s))
    u_xx = grid.samples(lambda s: -4 * np.cos(2 * s))
    assert transmutation_residual(K, q, u, u_xx) < 5e-4
    # the same kernel does not transmute onto a different potential
    assert transmutation_residual(K, grid.constant(2.0), u, u_xx) > 1e-2


def test_transmutation_identity_soliton():
    grid = make_grid(1.0, 401)
    K = REFERENCE_KERNELS["soliton"].on_grid(grid)
    q = SOLITON.sample(grid)
    u = grid.samples(lambda s: np.cos(2 * s))
    u_xx = grid.samples(lambda s: -4 * np.cos(2 * s))
    assert transmutation_residual(K, q, u, u_xx) < 5e-4
    assert transmutation_residual(K, grid.constant(1.0), u, u_xx) > 1e-2


def test_transmutation_residual_shrinks_with_spacing():
    residuals = []
    for n in (201, 401):
        grid = make_grid(0.5, n)
        K = REFERENCE_KERNELS["rational_n1"].on_grid(grid)
        u = grid.samples(lambda s: np.cos(2 * s))
        residuals.append(transmutation_residual(K, rational(1).sample(grid), u))
    assert residuals[0] / residuals[1] >= 3


def test_free_half_line_solutions(unit_grid):
    h, omega = 0.5, 2.0
    x = unit_grid.nodes
    K = free_kernel(unit_grid, h)
    c = solution_c(K, omega)
    s = solution_s(K, omega)
    assert _max_diff(c.values, np.cos(omega * x) + h * np.sin(omega * x) / omega) < 1e-8
    assert _max_diff(s.values, np.sin(omega * x) / omega) < 1e-14


def test_sine_solution_at_zero_frequency(unit_grid):
    s = solution_s(free_kernel(unit_grid, 0.0), 0.0)
    assert _max_diff(s.values, unit_grid.nodes) < 1e-14


def test_rational_half_line_solutions(rational_exact, q_rational):
    omega = 1.5
    c = solution_c(rational_exact, omega)
    s = solution_s(rational_exact, omega)

    c0, c1 = initial_values(c)
    s0, s1 = initial_values(s)
    assert c0 == pytest.approx(1.0, abs=1e-14)
    assert c1 == pytest.approx(-1.0, abs=1e-6)
    assert s0 == pytest.approx(0.0, abs=1e-14)
    assert s1 == pytest.approx(1.0, abs=1e-6)

    assert ode_residual(c, q_rational, -(omega**2)) < 5e-3
    assert ode_residual(s, q_rational, -(omega**2)) < 5e-3


def test_e0_solution(rational_exact, q_rational):
    omega = 1.5
    e0 = solution_e0(rational_exact, omega)
    assert ode_residual(e0, q_rational, -(omega**2)) < 5e-3
    assert e0.at_origin() == pytest.approx(1.0, abs=1e-14)


def test_half_line_split_reproduces_T(rational_exact, rational_grid):
    cosine, sine = half_line_kernels(rational_exact)
    assert cosine.kind is HalfLineKind.COSINE
    assert sine.kind is HalfLineKind.SINE
    assert cosine.h == rational_exact.h

    u = rational_grid.samples(np.exp)
    split = half_line_apply(cosine, even_part(u)) + half_line_apply(sine, odd_part(u))
    assert _max_diff(split.values, apply_T(rational_exact, u).values) < 1e-6


def test_half_line_triangle_masks_outside(rational_exact):
    cosine, _ = half_line_kernels(rational_exact)
    tri = cosine.triangle()
    c = rational_exact.grid.origin
    assert np.isnan(tri[c + 3, c - 1])
    assert np.isnan(tri[c + 3, c + 4])
    assert not np.isnan(tri[c + 3, c + 3])


def test_grid_mismatch_and_h_checks(rational_exact, unit_grid):
    with pytest.raises(InvalidArgumentError):
        apply_T(rational_exact, unit_grid.constant(1.0))
    require_kernel_h(rational_exact, -1)
    with pytest.raises(InvalidArgumentError):
        require_kernel_h(rational_exact, 2)
