"""
Transmutant closed forms

Modified Bessel functions I0, I1 (power series plus an independent Miller
recurrence) and the exactly known kernels used as oracles.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import OutOfDomainError
from .goursat import TransmutationKernel
from .grid import Grid

ArrayFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

SERIES_RTOL = 1e-17
MAX_SERIES_TERMS = 400
# Gauss-Legendre nodes for the soliton kernel integral (entire integrand, length <= 2a)
SOLITON_QUAD_POINTS = 40


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _unwrap(value: np.ndarray, like):
    return complex(value) if np.ndim(like) == 0 else value


def _bessel_series(z, order: int):
    z = _as_complex(z)
    quarter = (z / 2.0) ** 2
    term = (z / 2.0) ** order / float(np.prod(np.arange(1, order + 1)))
    term = np.broadcast_to(term, z.shape).astype(complex)
    total = term.copy()
    for k in range(MAX_SERIES_TERMS):
        term = term * quarter / ((k + 1) * (k + 1 + order))
        total = total + term
        if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            break
    return total


def bessel_I0(z):
    """I0 by its power series."""
    return _unwrap(_bessel_series(z, 0), z)


def bessel_I1(z):
    """I1 by its power series."""
    return _unwrap(_bessel_series(z, 1), z)


def bessel_I_miller(z: complex, order: int) -> complex:
    """I_order(z) by descending recurrence normalized with e^z = I0 + 2 sum_k I_k."""
    z = complex(z)
    if abs(z) < 1e-3:
        return complex(_bessel_series(z, order))
    start = 2 * (int(abs(z)) + 20)
    i_above, i_k = 0j, 1e-30 + 0j
    norm = 2.0 * i_k
    kept = {}
    for k in range(start, 0, -1):
        # I_{k-1} = (2k/z) I_k + I_{k+1}
        i_above, i_k = i_k, 2.0 * k / z * i_k + i_above
        if k - 1 <= 1:
            kept[k - 1] = i_k
        if k - 1 >= 1:
            norm += 2.0 * i_k
        if abs(i_k) > 1e250:
            i_above, i_k, norm = i_above * 1e-250, i_k * 1e-250, norm * 1e-250
            kept = {key: value * 1e-250 for key, value in kept.items()}
    norm += kept[0]
    return complex(np.exp(z) * kept[order] / norm)


def _shifted_series(w, shift: int):
    """sum_k w^k / (k! (k + shift)!)."""
    w = _as_complex(w)
    term = np.full(w.shape, 1.0 / float(np.prod(np.arange(1, shift + 1))), dtype=complex)
    total = term.copy()
    for k in range(MAX_SERIES_TERMS):
        term = term * w / ((k + 1) * (k + 1 + shift))
        total = total + term
        if np.all(np.abs(term) <= SERIES_RTOL * np.maximum(np.abs(total), 1e-300)):
            break
    return total


# ---------------------------------------------------------------------------
# Reference kernels
# ---------------------------------------------------------------------------


def ref_rational_n1(x, t):
    """K(x, t; -1) for q = 2/(x+1)^2."""
    return (t - 1.0) / (2.0 * (x + 1.0)) + 0j


def _dt_rational_n1(x, t):
    return 1.0 / (2.0 * (x + 1.0)) + 0.0 * t + 0j


def ref_rational_n1_h2(x, t):
    """K(x, t; 2) for q = 2/(x+1)^2."""
    return (3.0 * x**2 + 6.0 * x + 4.0 - 3.0 * t**2 + 2.0 * t) / (4.0 * (x + 1.0)) + 0j


def _dt_rational_n1_h2(x, t):
    return (2.0 - 6.0 * t) / (4.0 * (x + 1.0)) + 0j


def ref_rational_n2(x, t):
    """K(x, t; -2) for q = 6/(x+1)^2."""
    return ((3.0 * t - 1.0) * (x + 1.0) ** 2 - 3.0 * (t - 1.0) ** 2 * (t + 1.0)) / (
        4.0 * (x + 1.0) ** 2
    ) + 0j


def _dt_rational_n2(x, t):
    return (3.0 * (x + 1.0) ** 2 - 3.0 * (t - 1.0) * (3.0 * t + 1.0)) / (
        4.0 * (x + 1.0) ** 2
    ) + 0j


def ref_const_q1(x, t):
    """K(x, t; 0) for q = 1: (1/2) z I1(z) / (x - t), z = sqrt(x^2 - t^2).

    Written as (x + t)/4 * sum w^k / (k! (k+1)!), w = (x^2 - t^2)/4, which is
    entire and covers t = x as well as |t| > |x|. The sign is fixed by
    K(x, x; 0) = x/2.
    """
    x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    value = (x + t) / 4.0 * _shifted_series((x * x - t * t) / 4.0, 1)
    return _unwrap(value, x + t)


def _dt_const_q1(x, t):
    x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    w = (x * x - t * t) / 4.0
    return _shifted_series(w, 1) / 4.0 - (x + t) * t * _shifted_series(w, 2) / 8.0


def ref_soliton(x, t):
    """K2(x, t; 0) for q = 1 - 2 sech^2 x, the Darboux image of ref_const_q1 under f = cosh.

    K2 = -(1/cosh x) int_{-t}^{x} (R(w)/4 - (s+t) t R'(w)/8) cosh s ds,
    R(w) = sum w^k/(k!(k+1)!), w = (s^2 - t^2)/4, by Gauss-Legendre quadrature.
    """
    x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    xb, tb = np.broadcast_arrays(x, t)
    nodes, weights = leggauss(SOLITON_QUAD_POINTS)
    mid = 0.5 * (xb - tb)
    half = 0.5 * (xb + tb)
    s = mid[..., None] + half[..., None] * nodes
    tt = tb[..., None]
    w = (s * s - tt * tt) / 4.0
    integrand = (
        _shifted_series(w, 1) / 4.0 - (s + tt) * tt * _shifted_series(w, 2) / 8.0
    ) * np.cosh(s)
    value = -half * np.sum(weights * integrand, axis=-1) / np.cosh(xb)
    return _unwrap(value, x + t)


@dataclass(frozen=True)
class ReferenceKernel:
    name: str
    h: complex
    q_description: str
    evaluator: ArrayFn
    potential: Callable[[np.ndarray], np.ndarray]
    a_max: float
    dt_evaluator: Optional[ArrayFn] = None

    def on_grid(self, grid: Grid) -> TransmutationKernel:
        """Sample on a grid; Kt analytic when known, else fourth-order differences."""
        if grid.a >= self.a_max:
            raise OutOfDomainError(f"{self.name} is defined for a < {self.a_max}, got {grid.a}")
        return TransmutationKernel.from_function(
            grid, self.h, self.evaluator, self.dt_evaluator, name=self.name
        )

    def q_on_grid(self, grid: Grid):
        return grid.samples(self.potential)


REFERENCE_KERNELS: Dict[str, ReferenceKernel] = {
    kernel.name: kernel
    for kernel in (
        ReferenceKernel(
            "rational_n1",
            -1,
            "2/(x+1)^2",
            ref_rational_n1,
            lambda x: 2.0 / (x + 1.0) ** 2,
            1.0,
            _dt_rational_n1,
        ),
        ReferenceKernel(
            "rational_n1_h2",
            2,
            "2/(x+1)^2",
            ref_rational_n1_h2,
            lambda x: 2.0 / (x + 1.0) ** 2,
            1.0,
            _dt_rational_n1_h2,
        ),
        ReferenceKernel(
            "rational_n2",
            -2,
            "6/(x+1)^2",
            ref_rational_n2,
            lambda x: 6.0 / (x + 1.0) ** 2,
            1.0,
            _dt_rational_n2,
        ),
        ReferenceKernel(
            "const_q1", 0, "1", ref_const_q1, lambda x: np.ones_like(x), 10.0, _dt_const_q1
        ),
        ReferenceKernel(
            "soliton",
            0,
            "1 - 2 sech^2 x",
            ref_soliton,
            lambda x: 1.0 - 2.0 / np.cosh(x) ** 2,
            10.0,
        ),
    )
}
