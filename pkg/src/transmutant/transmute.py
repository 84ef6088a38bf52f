"""
Transmutant operators

Application of T_h, its inverse, the half-line operators T_c / T_s, and the
solutions c(w, x; h), s(w, x; inf), e0(iw, x) they produce.

Row quadrature over [-x_i, x_i] (or [0, x_i]) runs on whole grid cells, so the
operators reduce to a fixed weight matrix per grid, cached.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError
from .goursat import TransmutationKernel, reparametrize_h
from .grid import (
    Grid,
    Samples,
    cumulative_from,
    cumulative_weights,
    derivative,
    require_same_grid,
    second_derivative,
)

logger = logging.getLogger("transmutant.transmute")

# Below this |omega * a| the sine solution uses its Taylor expansion
SMALL_OMEGA = 1e-4


class HalfLineKind(str, Enum):
    COSINE = "cosine"
    SINE = "sine"


@dataclass(frozen=True)
class HalfLineKernel:
    """K_c(x, t; h) or K_s(x, t; inf).

    Defined on 0 <= t <= x; values are stored on the full square so that the
    same formulas serve negative x through signed integrals from 0.
    """

    grid: Grid
    kind: HalfLineKind
    values: np.ndarray = field(repr=False)
    h: complex = 0j

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def triangle(self) -> np.ndarray:
        """Values on 0 <= t <= x, NaN elsewhere (for export / inspection)."""
        n, c = self.grid.n_points, self.grid.origin
        i = np.arange(n)[:, None]
        j = np.arange(n)[None, :]
        inside = (j >= c) & (j <= i)
        return np.where(inside, self.values, np.nan)


# ---------------------------------------------------------------------------
# Quadrature weights
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16)
def symmetric_weights(grid: Grid) -> np.ndarray:
    """W[i, j]: weights of int_{-x_i}^{x_i} g(t) dt = sum_j W[i, j] g(t_j)."""
    n, c = grid.n_points, grid.origin
    W = np.zeros((n, n))
    for i in range(n):
        half = abs(i - c)
        if half == 0:
            continue
        row = cumulative_weights(2 * half, 2 * half + 1)
        W[i, c - half : c + half + 1] = np.sign(i - c) * grid.spacing * row
    W.setflags(write=False)
    return W


@lru_cache(maxsize=16)
def half_line_weights(grid: Grid) -> np.ndarray:
    """W[i, j]: weights of int_0^{x_i} g(t) dt (signed), consistent with cumulative_integral."""
    n, c = grid.n_points, grid.origin
    W = np.zeros((n, n))
    for i in range(n):
        if i > c:
            W[i, c:] = grid.spacing * cumulative_weights(i - c, n - c)
        elif i < c:
            W[i, c::-1] = -grid.spacing * cumulative_weights(c - i, c + 1)
    W.setflags(write=False)
    return W


# ---------------------------------------------------------------------------
# T_h and its inverse
# ---------------------------------------------------------------------------


def apply_T(K: TransmutationKernel, u: Samples) -> Samples:
    """T_h u(x) = u(x) + int_{-x}^{x} K(x, t; h) u(t) dt."""
    require_same_grid(K.grid, u.grid, "function")
    W = symmetric_weights(K.grid)
    return u.with_values(u.values + (W * K.K) @ u.values)


def apply_T_inverse(K: TransmutationKernel, v: Samples) -> Samples:
    """T_h^{-1} v(x) = v(x) - int_{-x}^{x} K(t, x; h) v(t) dt."""
    require_same_grid(K.grid, v.grid, "function")
    W = symmetric_weights(K.grid)
    return v.with_values(v.values - (W * K.K.T) @ v.values)


# ---------------------------------------------------------------------------
# Half-line operators
# ---------------------------------------------------------------------------


def half_line_kernels(K: TransmutationKernel) -> Tuple[HalfLineKernel, HalfLineKernel]:
    """(K_c(x, t; h), K_s(x, t; inf)) with h = K.h, built from the h = 0 kernel."""
    grid = K.grid
    h = K.h
    base = reparametrize_h(K, 0)
    odd = base.odd_in_t()
    C = cumulative_from(odd, grid.origin, grid.spacing, axis=1)
    tail = np.diagonal(C)[:, None] - C
    cosine = h + base.K + base.K[:, ::-1] + h * tail
    return (
        HalfLineKernel(grid, HalfLineKind.COSINE, cosine, h),
        HalfLineKernel(grid, HalfLineKind.SINE, odd),
    )


def half_line_apply(kernel: HalfLineKernel, u: Samples) -> Samples:
    """u(x) + int_0^x kernel(x, t) u(t) dt."""
    require_same_grid(kernel.grid, u.grid, "function")
    W = half_line_weights(kernel.grid)
    return u.with_values(u.values + (W * kernel.values) @ u.values)


def _sine_over_omega(omega: complex, x: np.ndarray, a: float) -> np.ndarray:
    if abs(omega) * a < SMALL_OMEGA:
        w2 = omega * omega
        return x - w2 * x**3 / 6.0 + w2 * w2 * x**5 / 120.0
    return np.sin(omega * x) / omega


def solution_c(K: TransmutationKernel, omega: complex) -> Samples:
    """c(w, x; h) = cos wx + int_0^x K_c(x, t; h) cos wt dt."""
    cosine, _ = half_line_kernels(K)
    grid = K.grid
    return half_line_apply(cosine, grid.samples(lambda x: np.cos(omega * x)))


def solution_s(K: TransmutationKernel, omega: complex) -> Samples:
    """s(w, x; inf) = sin wx / w + int_0^x K_s(x, t) sin wt / w dt (x at w = 0)."""
    _, sine = half_line_kernels(K)
    grid = K.grid
    return half_line_apply(sine, grid.samples(lambda x: _sine_over_omega(omega, x, grid.a)))


def solution_e0(K: TransmutationKernel, omega: complex) -> Samples:
    """e0(iw, x) = T[e^{iwx}] with the h = 0 kernel."""
    if K.h != 0:
        logger.debug(f"[TRANSMUTE] reparametrizing kernel from h={K.h} to 0 for e0")
        K = reparametrize_h(K, 0)
    return apply_T(K, K.grid.samples(lambda x: np.exp(1j * omega * x)))


# ---------------------------------------------------------------------------
# Residual checks
# ---------------------------------------------------------------------------


def initial_values(u: Samples) -> Tuple[complex, complex]:
    """(u(0), u'(0)), the derivative by the fourth-order centered stencil."""
    c = u.grid.origin
    return complex(u.values[c]), complex(derivative(u).values[c])


def ode_residual(u: Samples, q: Samples, lam: complex) -> float:
    """max over interior nodes of |u'' - q u - lam u|."""
    require_same_grid(u.grid, q.grid, "potential")
    defect = second_derivative(u).values - q.values * u.values - lam * u.values
    return float(np.max(np.abs(defect[1:-1])))


def transmutation_residual(
    K: TransmutationKernel, q: Samples, u: Samples, u_xx: Optional[Samples] = None
) -> float:
    """Interior max of |(-D^2 + q) T u - T(-u'')|; u'' by differences unless given."""
    require_same_grid(K.grid, q.grid, "potential")
    if u_xx is None:
        u_xx = second_derivative(u)
    Tu = apply_T(K, u)
    left = -second_derivative(Tu).values + q.values * Tu.values
    right = apply_T(K, u_xx * -1.0).values
    return float(np.max(np.abs(left - right)[1:-1]))


def require_kernel_h(K: TransmutationKernel, h: complex, what: str = "kernel"):
    if abs(K.h - complex(h)) > 1e-12 * max(1.0, abs(h)):
        raise InvalidArgumentError(f"{what} has h={K.h}, expected {complex(h)}")
