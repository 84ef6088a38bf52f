"""
Transmutant Dirac system

(d/dx + eta) psi1 = E psi2,  (-d/dx + eta) psi2 = E psi1,  eta = m + S(x).

With f = exp(-int_0^x eta) the system factorizes through the Darboux pair
built on f, and diag(T1, T2) maps free solutions (eta = 0) to solutions.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .darboux import DarbouxPair, darboux_kernel, darboux_transform
from .errors import InvalidArgumentError
from .formal_powers import Potential, build_potential
from .goursat import TransmutationKernel, solve_kernel
from .grid import Grid, Samples, cumulative_integral, derivative, interior_max, require_same_grid
from .transmute import apply_T, apply_T_inverse

logger = logging.getLogger("transmutant.dirac")


@dataclass(frozen=True)
class DiracConfig:
    grid: Grid
    m: float
    S: Samples = field(repr=False)
    E: Tuple[complex, ...] = ()

    def __post_init__(self):
        if not self.m > 0:
            raise InvalidArgumentError(f"mass must be positive, got m={self.m}")
        require_same_grid(self.grid, self.S.grid, "scalar potential")
        object.__setattr__(self, "E", tuple(complex(e) for e in self.E))

    @property
    def eta(self) -> Samples:
        return self.S.with_values(self.m + self.S.values)


@dataclass(frozen=True)
class Spinor:
    psi1: Samples
    psi2: Samples

    def __post_init__(self):
        require_same_grid(self.psi1.grid, self.psi2.grid, "spinor component")

    @property
    def grid(self) -> Grid:
        return self.psi1.grid

    def max_abs_diff(self, other: "Spinor") -> float:
        return max((self.psi1 - other.psi1).max_abs(), (self.psi2 - other.psi2).max_abs())


def dirac_profile(cfg: DiracConfig) -> Potential:
    """f = exp(-int_0^x eta), f' = -eta f, q1 = eta^2 - eta', h = -eta(0)."""
    eta = cfg.eta
    f = eta.with_values(np.exp(-cumulative_integral(eta).values))
    f_prime = eta.with_values(-eta.values * f.values)
    if np.ptp(eta.values) == 0:
        eta_prime = np.zeros_like(eta.values)
    else:
        eta_prime = derivative(eta).values
    q1 = eta.with_values(eta.values**2 - eta_prime)
    return build_potential(q1, f=f, f_prime=f_prime)


def dirac_kernels(
    cfg: DiracConfig, **solver_args
) -> Tuple[DarbouxPair, TransmutationKernel, TransmutationKernel]:
    """Darboux pair of the profile, K1 by the Goursat solver at h = -eta(0), K2 by Darboux."""
    pair = darboux_transform(dirac_profile(cfg))
    K1 = solve_kernel(pair.p1.q, pair.h, **solver_args)
    K2 = darboux_kernel(K1, pair)
    logger.info(f"[DIRAC] kernels ready (m={cfg.m}, h={pair.h})")
    return pair, K1, K2


def free_dirac_solution(E: complex, c1: complex, c2: complex, grid: Grid) -> Spinor:
    """u1 = c1 cos Ex + c2 sin Ex, u2 = -c1 sin Ex + c2 cos Ex."""
    E = complex(E)
    x = grid.nodes
    cos, sin = np.cos(E * x), np.sin(E * x)
    return Spinor(
        grid.samples(lambda _: c1 * cos + c2 * sin),
        grid.samples(lambda _: -c1 * sin + c2 * cos),
    )


def _require_pair_kernels(K1: TransmutationKernel, K2: TransmutationKernel, u: Spinor):
    require_same_grid(K1.grid, K2.grid, "kernel")
    require_same_grid(K1.grid, u.grid, "spinor")
    if abs(K1.h + K2.h) > 1e-12 * max(1.0, abs(K1.h)):
        raise InvalidArgumentError(f"K2.h={K2.h} is not -K1.h={-K1.h}")


def dirac_transmute(K1: TransmutationKernel, K2: TransmutationKernel, u: Spinor) -> Spinor:
    _require_pair_kernels(K1, K2, u)
    return Spinor(apply_T(K1, u.psi1), apply_T(K2, u.psi2))


def dirac_untransmute(K1: TransmutationKernel, K2: TransmutationKernel, psi: Spinor) -> Spinor:
    _require_pair_kernels(K1, K2, psi)
    return Spinor(apply_T_inverse(K1, psi.psi1), apply_T_inverse(K2, psi.psi2))


def dirac_residual(cfg: DiracConfig, psi: Spinor, E: complex, margin: int = 1) -> float:
    """Interior max of both equation defects, psi' by fourth-order differences."""
    require_same_grid(cfg.grid, psi.grid, "spinor")
    eta = cfg.eta.values
    E = complex(E)
    p1, p2 = psi.psi1.values, psi.psi2.values
    first = derivative(psi.psi1).values + eta * p1 - E * p2
    second = -derivative(psi.psi2).values + eta * p2 - E * p1
    return max(interior_max(first, margin), interior_max(second, margin))
