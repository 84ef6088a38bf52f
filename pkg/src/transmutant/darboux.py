"""
Transmutant Darboux layer

Darboux transformation q2 = 2 (f'/f)^2 - q1, the transmuted kernel K2 built
from K1 in closed form (full square and triangle variants), the direct
integral form of T2, commutation relations, generalized derivatives, the
eigenfunction intertwiner and the iterated Darboux ladder.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError
from .formal_powers import Potential, build_potential
from .goursat import (
    KtSource,
    Provenance,
    TransmutationKernel,
    free_kernel,
    reparametrize_h,
    solve_kernel,
)
from .grid import (
    Grid,
    Samples,
    cumulative_from,
    cumulative_integral,
    cumulative_simpson,
    derivative,
    derivative_values,
    interior_max,
    require_same_grid,
)
from .metrics import metrics_collector
from .potentials import rational
from .transmute import apply_T, require_kernel_h

logger = logging.getLogger("transmutant.darboux")


@dataclass(frozen=True)
class DarbouxPair:
    """Superpartners: p1 = (q1, f, h) and p2 = (q2, 1/f, -h)."""

    p1: Potential = field(repr=False)
    q2: Samples = field(repr=False)
    p2: Potential = field(repr=False)

    @property
    def grid(self) -> Grid:
        return self.p1.grid

    @property
    def h(self) -> complex:
        return self.p1.h


def darboux_transform(p1: Potential) -> DarbouxPair:
    w = p1.log_derivative()
    q2 = p1.q.with_values(2.0 * w * w - p1.q.values)
    inv_f = p1.f.with_values(1.0 / p1.f.values)
    # (1/f)' = -f'/f^2
    inv_f_prime = p1.f.with_values(-w / p1.f.values)
    p2 = build_potential(q2, f=inv_f, f_prime=inv_f_prime)
    return DarbouxPair(p1=p1, q2=q2, p2=p2)


def darboux_kernel(K1: TransmutationKernel, pair: DarbouxPair) -> TransmutationKernel:
    """K2(x, t; -h) = -(1/f(x)) (int_{-t}^{x} dK1/dt(s, t; h) f(s) ds + (h/2) f(-t))."""
    require_same_grid(pair.grid, K1.grid, "kernel")
    require_kernel_h(K1, pair.h, "K1")
    Kt1 = K1.require_kt()
    grid = K1.grid
    h = pair.h
    f = pair.p1.f.values
    n = grid.n_points

    with metrics_collector.stage("darboux.kernel"):
        # C[i, j] = int_0^{x_i} Kt1(s, t_j) f(s) ds
        C = cumulative_from(Kt1 * f[:, None], grid.origin, grid.spacing, axis=0)
        mirror = n - 1 - np.arange(n)
        from_minus_t = C - C[mirror, np.arange(n)][None, :]
        K2 = -(from_minus_t + 0.5 * h * f[mirror][None, :]) / f[:, None]
        Kt2 = derivative_values(K2, grid.spacing, axis=1)

    logger.debug(f"[DARBOUX] kernel built at h={-h} (Kt by finite differences)")
    return TransmutationKernel(
        grid=grid,
        h=-h,
        K=K2,
        Kt=Kt2,
        provenance=Provenance.DARBOUX,
        kt_source=KtSource.FINITE_DIFFERENCE,
        chain=K1.chain + ("darboux",),
        meta={"parent_h": str(K1.h)},
    )


def _triangle_branches(
    K1: TransmutationKernel, pair: DarbouxPair
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per node: int_{|t|}^{x} Kt1(s, t) f(s) ds (triangle data only), and both branch values."""
    grid = K1.grid
    Kt1 = K1.require_kt()
    n, c = grid.n_points, grid.origin
    f = pair.p1.f.values
    fp = pair.p1.f_prime.values
    q_int = cumulative_integral(pair.p1.q).values
    h = pair.h

    tail = np.zeros((n, n), dtype=complex)
    for j in range(n):
        start = c + abs(j - c)
        column = Kt1[start:, j] * f[start:]
        tail[start:, j] = cumulative_simpson(column, grid.spacing)

    mirror = n - 1 - np.arange(n)
    # column quantities depend on t, the 1/f(x) prefactor on the row
    ft, fpt, qt = f[None, :], fp[None, :], q_int[None, :]
    plus = -(fpt + tail - 0.5 * h * ft - 0.5 * ft * qt) / f[:, None]
    minus = -(tail + 0.5 * h * f[mirror]) / f[:, None]
    return tail, plus, minus


def darboux_kernel_triangle(K1: TransmutationKernel, pair: DarbouxPair) -> TransmutationKernel:
    """K2 on x > 0, |t| <= x from triangle data of K1 only; zero elsewhere, no Kt."""
    require_same_grid(pair.grid, K1.grid, "kernel")
    require_kernel_h(K1, pair.h, "K1")
    grid = K1.grid
    c = grid.origin
    _, plus, minus = _triangle_branches(K1, pair)
    nonnegative_t = np.arange(grid.n_points)[None, :] >= c
    K2 = np.where(triangle_mask(grid), np.where(nonnegative_t, plus, minus), 0.0)
    return TransmutationKernel(
        grid=grid,
        h=-pair.h,
        K=K2,
        Kt=None,
        provenance=Provenance.DARBOUX,
        chain=K1.chain + ("darboux-triangle",),
        meta={"domain": "x>0, |t|<=x"},
    )


def triangle_branch_gap(K1: TransmutationKernel, pair: DarbouxPair) -> float:
    """max over x > 0 of the difference between the t >= 0 and t < 0 formulas at t = 0."""
    c = K1.grid.origin
    _, plus, minus = _triangle_branches(K1, pair)
    return float(np.max(np.abs(plus[c + 1 :, c] - minus[c + 1 :, c])))


def triangle_mask(grid: Grid) -> np.ndarray:
    n, c = grid.n_points, grid.origin
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return (i > c) & (np.abs(j - c) <= i - c)


# ---------------------------------------------------------------------------
# Operator forms
# ---------------------------------------------------------------------------


def apply_T2_direct(K1: TransmutationKernel, pair: DarbouxPair, u: Samples) -> Samples:
    """T2[u] = (1/f) (int_0^x f T1[u'] + u(0))."""
    require_kernel_h(K1, pair.h, "K1")
    f = pair.p1.f
    inner = cumulative_integral(f * apply_T(K1, derivative(u)))
    return u.with_values((inner.values + u.at_origin()) / f.values)


def apply_T1_direct(K2: TransmutationKernel, pair: DarbouxPair, u: Samples) -> Samples:
    """T1[u] = f (int_0^x (1/f) T2[u'] + u(0))."""
    require_kernel_h(K2, -pair.h, "K2")
    f = pair.p1.f
    inv_f = pair.p2.f
    inner = cumulative_integral(inv_f * apply_T(K2, derivative(u)))
    return u.with_values(f.values * (inner.values + u.at_origin()))


def commutation_residuals(
    K1: TransmutationKernel,
    K2: TransmutationKernel,
    pair: DarbouxPair,
    u: Samples,
    margin: int = 2,
) -> Tuple[float, float]:
    """Interior residuals of d/dx f T2 = f T1 d/dx and d/dx (1/f) T1 = (1/f) T2 d/dx."""
    f = pair.p1.f
    inv_f = pair.p2.f
    du = derivative(u)
    T1u, T2u = apply_T(K1, u), apply_T(K2, u)
    first = derivative(f * T2u) - f * apply_T(K1, du)
    second = derivative(inv_f * T1u) - inv_f * apply_T(K2, du)
    return interior_max(first.values, margin), interior_max(second.values, margin)


def generalized_derivative(pair: DarbouxPair, g: Samples, k: int) -> Samples:
    """gamma_0(g) = g, gamma_k(g) = (f^2)^{(-1)^(k-1)} gamma_{k-1}(g)'."""
    if k < 0:
        raise InvalidArgumentError(f"k must be >= 0, got {k}")
    f2 = (pair.p1.f * pair.p1.f).values
    gamma = g
    for step in range(1, k + 1):
        weight = f2 if step % 2 else 1.0 / f2
        gamma = gamma.with_values(weight * derivative(gamma).values)
    return gamma


def generalized_derivative_residual(
    K1: TransmutationKernel,
    K2: TransmutationKernel,
    pair: DarbouxPair,
    u: Samples,
    k: int,
    u_k: Optional[Samples] = None,
) -> float:
    """gamma_k((1/f) T1 u) against f T2 u^(k) (odd k) or (1/f) T1 u^(k) (even k)."""
    f, inv_f = pair.p1.f, pair.p2.f
    if u_k is None:
        u_k = u
        for _ in range(k):
            u_k = derivative(u_k)
    gamma = generalized_derivative(pair, inv_f * apply_T(K1, u), k)
    target = f * apply_T(K2, u_k) if k % 2 else inv_f * apply_T(K1, u_k)
    return interior_max((gamma - target).values, max(2 * k, 1))


def intertwine(pair: DarbouxPair, u: Samples, inverse: bool = False) -> Samples:
    """v = u' - (f'/f) u maps solutions of A1 to A2; inverse=True applies v' + (f'/f) v."""
    w = pair.p1.log_derivative()
    du = derivative(u).values
    return u.with_values(du + w * u.values if inverse else du - w * u.values)


# ---------------------------------------------------------------------------
# Ladder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LadderRung:
    index: int
    q: Samples = field(repr=False)
    kernel: TransmutationKernel = field(repr=False)
    pair: Optional[DarbouxPair] = field(default=None, repr=False)


def rational_ladder(grid: Grid, rungs: int) -> List[LadderRung]:
    """K_n(x, t; -n) for q_n = n(n+1)/(x+1)^2, n = 0..rungs, via f_n = (x+1)^(n+1)."""
    if rungs < 1:
        raise InvalidArgumentError(f"rungs must be >= 1, got {rungs}")
    ladder = [LadderRung(0, rational(0).sample(grid), free_kernel(grid, 0))]
    for n in range(rungs):
        q_n = ladder[-1].q
        f, f_prime = rational(n).solution(grid)
        pair = darboux_transform(build_potential(q_n, f=f, f_prime=f_prime))
        lifted = reparametrize_h(ladder[-1].kernel, pair.h)
        kernel = darboux_kernel(lifted, pair)
        kernel = replace(kernel, chain=kernel.chain + (f"rung{n + 1}",))
        ladder.append(LadderRung(n + 1, pair.q2, kernel, pair))
        logger.info(f"[DARBOUX] rung {n + 1} built (h={kernel.h})")
    return ladder


def darboux_ladder(q: Samples, h_values: Sequence[complex], **solver_args) -> List[LadderRung]:
    """Darboux chain for an arbitrary potential.

    Rung 0 solves the Goursat problem for q at h_values[0]. Each further rung
    integrates a solution of the current potential with slope h_values[n] at 0,
    lifts the current kernel to that h and applies the Darboux kernel formula.
    """
    if len(h_values) < 2:
        raise InvalidArgumentError("a chain needs at least two h values (one Darboux step)")
    ladder = [LadderRung(0, q, solve_kernel(q, h_values[0], **solver_args))]
    for n, h in enumerate(h_values[1:]):
        current = ladder[-1]
        pair = darboux_transform(build_potential(current.q, h=h))
        kernel = darboux_kernel(reparametrize_h(current.kernel, pair.h), pair)
        ladder.append(LadderRung(n + 1, pair.q2, kernel, pair))
        logger.info(f"[DARBOUX] rung {n + 1} built (h={kernel.h})")
    return ladder
