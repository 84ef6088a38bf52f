import numpy as np
import pytest
from scipy import special

from src.transmutant.closed_forms import (
    REFERENCE_KERNELS,
    bessel_I0,
    bessel_I1,
    bessel_I_miller,
    ref_const_q1,
    ref_soliton,
)
from src.transmutant.errors import OutOfDomainError
from src.transmutant.grid import make_grid


def test_series_against_scipy():
    z = np.linspace(0.0, 8.0, 33)
    assert np.max(np.abs(bessel_I0(z) - special.i0(z)) / special.i0(z)) < 1e-13
    assert np.max(np.abs(bessel_I1(z)[1:] - special.i1(z[1:])) / special.i1(z[1:])) < 1e-13
    assert bessel_I1(0.0) == 0


def test_series_on_imaginary_axis_gives_J0():
    # I0(i y) = J0(y)
    y = np.linspace(0.1, 5.0, 11)
    assert np.max(np.abs(bessel_I0(1j * y) - special.j0(y))) < 1e-13


def test_miller_recurrence_agrees_with_series():
    for z in (0.0005, 0.3, 1.0, 2.5, 7.0, 1.5 + 0.5j):
        for order in (0, 1):
            series = bessel_I0(z) if order == 0 else bessel_I1(z)
            assert bessel_I_miller(z, order) == pytest.approx(series, rel=1e-12)


def test_constant_potential_kernel_against_bessel_form():
    x = np.array([0.3, 0.8, 1.0, -0.6])
    t = np.array([0.1, -0.5, 0.2, 0.4])
    z = np.sqrt(x**2 - t**2 + 0j)
    expected = 0.5 * z * special.iv(1, z) / (x - t)
    assert np.max(np.abs(ref_const_q1(x, t) - expected)) < 1e-13


def test_constant_potential_kernel_special_values():
    assert ref_const_q1(0.8, 0.0) == pytest.approx(special.i1(0.8) / 2, rel=1e-13)
    assert ref_const_q1(0.7, 0.7) == pytest.approx(0.35, rel=1e-14)
    assert ref_const_q1(0.7, -0.7) == 0
    # |t| > |x|: the argument of the Bessel function turns imaginary
    assert ref_const_q1(0.2, 0.6).imag == 0


def test_constant_potential_kernel_t_derivative_at_zero():
    grid = make_grid(1.0, 201)
    K = REFERENCE_KERNELS["const_q1"].on_grid(grid)
    for x in (0.25, 0.5, 1.0):
        assert K.kt_at(x, 0.0) == pytest.approx(special.i1(x) / (2 * x), rel=1e-12)


def test_analytic_t_derivative_matches_differences():
    grid = make_grid(1.0, 201)
    ref = REFERENCE_KERNELS["const_q1"]
    analytic = ref.on_grid(grid).Kt
    X, T = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    step = 1e-5
    central = (ref_const_q1(X, T + step) - ref_const_q1(X, T - step)) / (2 * step)
    assert np.max(np.abs(analytic - central)) < 1e-8


def test_soliton_kernel_boundary_values():
    x = np.linspace(-1.0, 1.0, 9)
    # K(x, -x) = h/2 = 0 and K(x, x) = 1/2 int_0^x (1 - 2 sech^2) = x/2 - tanh x
    assert np.max(np.abs(ref_soliton(x, -x))) < 1e-14
    assert np.max(np.abs(ref_soliton(x, x) - (x / 2 - np.tanh(x)))) < 1e-12


def test_rational_kernels_satisfy_boundary_conditions():
    x = np.linspace(-0.9, 0.9, 7)
    for name, integral in (
        ("rational_n1", lambda s: s / (s + 1)),
        ("rational_n1_h2", lambda s: s / (s + 1)),
        ("rational_n2", lambda s: 3 * s / (s + 1)),
    ):
        ref = REFERENCE_KERNELS[name]
        half_h = 0.5 * ref.h
        assert np.max(np.abs(ref.evaluator(x, -x) - half_h)) < 1e-12
        assert np.max(np.abs(ref.evaluator(x, x) - half_h - integral(x))) < 1e-12


def test_reference_domain(rational_grid):
    with pytest.raises(OutOfDomainError):
        REFERENCE_KERNELS["rational_n1"].on_grid(make_grid(1.0, 11))
    ref = REFERENCE_KERNELS["rational_n2"]
    assert np.allclose(ref.q_on_grid(rational_grid).values, 6 / (rational_grid.nodes + 1) ** 2)
