"""
Transmutant formal powers

Potentials with a chosen nonvanishing solution f, the recursive integrals
X^(n), X~^(n), the formal powers phi_k / psi_k, and spectral parameter power
series (SPPS) solutions of u'' - q u = lambda u.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .config_loader import config
from .errors import InconsistentInputError, InvalidArgumentError, VanishingSolutionError
from .goursat import TransmutationKernel
from .grid import (
    Samples,
    cumulative_integral,
    derivative,
    interpolate,
    require_same_grid,
    second_derivative,
)
from .transmute import apply_T, require_kernel_h

logger = logging.getLogger("transmutant.formal_powers")


@dataclass(frozen=True)
class Potential:
    """q together with a nonvanishing solution f of f'' = q f, f(0) = 1, f'(0) = h."""

    q: Samples = field(repr=False)
    f: Samples = field(repr=False)
    f_prime: Samples = field(repr=False)
    h: complex
    min_abs_f: float
    residual: float = 0.0

    @property
    def grid(self):
        return self.q.grid

    def log_derivative(self) -> np.ndarray:
        """f'/f per node."""
        return self.f_prime.values / self.f.values


def _integrate_solution(q: Samples, h: complex) -> Tuple[np.ndarray, np.ndarray]:
    """RK4 for (f, f')' = (f', q f) from f(0) = 1, f'(0) = h, marching both ways."""
    grid = q.grid
    n, c, s = grid.n_points, grid.origin, grid.spacing
    q_nodes = q.values
    q_mid = interpolate(q, 0.5 * (grid.nodes[:-1] + grid.nodes[1:]))

    f = np.empty(n, dtype=complex)
    g = np.empty(n, dtype=complex)
    f[c], g[c] = 1.0, h

    def step(i_from: int, i_to: int, q_half: complex):
        d = s if i_to > i_from else -s
        y0, z0 = f[i_from], g[i_from]
        k1f, k1g = z0, q_nodes[i_from] * y0
        k2f, k2g = z0 + 0.5 * d * k1g, q_half * (y0 + 0.5 * d * k1f)
        k3f, k3g = z0 + 0.5 * d * k2g, q_half * (y0 + 0.5 * d * k2f)
        k4f, k4g = z0 + d * k3g, q_nodes[i_to] * (y0 + d * k3f)
        f[i_to] = y0 + d * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
        g[i_to] = z0 + d * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0

    for i in range(c, n - 1):
        step(i, i + 1, q_mid[i])
    for i in range(c, 0, -1):
        step(i, i - 1, q_mid[i - 1])
    return f, g


def _check_nonvanishing(f: np.ndarray) -> float:
    threshold = float(config.get("potential.vanishing_threshold", 1e-8))
    magnitude = np.abs(f)
    index = int(np.argmin(magnitude))
    min_abs_f = float(magnitude[index])
    if not min_abs_f >= threshold:
        raise VanishingSolutionError(
            f"|f| drops to {min_abs_f:.3e} at node {index} (threshold {threshold:g})",
            min_abs_f=min_abs_f,
            index=index,
        )
    return min_abs_f


def solution_residual(q: Samples, f: Samples) -> float:
    """max |f'' - q f| on nodes 2..n-3 with the five-point second difference."""
    defect = second_derivative(f, order=4).values - q.values * f.values
    return float(np.max(np.abs(defect[2:-2])))


def build_potential(
    q: Samples,
    f: Optional[Samples] = None,
    h: Optional[complex] = None,
    f_prime: Optional[Samples] = None,
) -> Potential:
    """Potential from q and either a supplied solution f or the slope h at 0."""
    grid = q.grid
    if f is None:
        if h is None:
            raise InvalidArgumentError("either f or h must be given")
        f_values, g_values = _integrate_solution(q, complex(h))
        f = q.with_values(f_values)
        f_prime = q.with_values(g_values)
    else:
        require_same_grid(grid, f.grid, "solution")
        f0 = f.at_origin()
        if abs(f0) == 0:
            raise VanishingSolutionError("f(0) = 0", min_abs_f=0.0, index=grid.origin)
        if f0 != 1:
            logger.info(f"[POTENTIAL] normalizing supplied f by f(0)={f0}")
            f = f * (1.0 / f0)
            f_prime = None if f_prime is None else f_prime * (1.0 / f0)
        if f_prime is None:
            f_prime = derivative(f)
        else:
            require_same_grid(grid, f_prime.grid, "solution derivative")
        slope = f_prime.at_origin()
        if h is not None and abs(slope - complex(h)) > 1e-6 * max(1.0, abs(h)):
            raise InconsistentInputError(
                f"f'(0)={slope} does not match h={complex(h)}", residual=abs(slope - complex(h))
            )

    min_abs_f = _check_nonvanishing(f.values)
    residual = solution_residual(q, f)
    tolerance = float(config.get("potential.residual_tol", 5e-4))
    if residual > tolerance:
        raise InconsistentInputError(
            f"f'' - q f residual {residual:.3e} exceeds {tolerance:g}", residual=residual
        )
    return Potential(
        q=q,
        f=f,
        f_prime=f_prime,
        h=f_prime.at_origin(),
        min_abs_f=min_abs_f,
        residual=residual,
    )


@dataclass(frozen=True)
class FormalPowerTable:
    potential: Potential = field(repr=False)
    x0: float
    k_max: int
    X: Tuple[Samples, ...] = field(repr=False)
    X_tilde: Tuple[Samples, ...] = field(repr=False)
    phi: Tuple[Samples, ...] = field(repr=False)
    psi: Tuple[Samples, ...] = field(repr=False)

    @property
    def grid(self):
        return self.potential.grid


def build_table(p: Potential, x0: float = 0.0, k_max: int = 10) -> FormalPowerTable:
    """Recursive integrals and formal powers up to k_max."""
    if k_max < 0:
        raise InvalidArgumentError(f"k_max must be >= 0, got {k_max}")
    f = p.f
    f2 = f * f
    inv_f2 = f2.with_values(1.0 / f2.values)
    one = p.grid.constant(1.0)

    X, X_tilde = [one], [one]
    for n in range(1, k_max + 1):
        # X uses f^2 for even n, X~ for odd n
        weight, weight_tilde = (f2, inv_f2) if n % 2 == 0 else (inv_f2, f2)
        X.append(cumulative_integral(X[-1] * weight, x0) * n)
        X_tilde.append(cumulative_integral(X_tilde[-1] * weight_tilde, x0) * n)

    inv_f = f.with_values(1.0 / f.values)
    phi = tuple(f * (X[k] if k % 2 else X_tilde[k]) for k in range(k_max + 1))
    psi = tuple(inv_f * (X_tilde[k] if k % 2 else X[k]) for k in range(k_max + 1))
    logger.debug(f"[POWERS] table built up to k={k_max} from x0={x0}")
    return FormalPowerTable(p, float(x0), k_max, tuple(X), tuple(X_tilde), phi, psi)


def spps_solution(p: Potential, lam: complex, k_max: int = 40) -> Tuple[Samples, Samples]:
    """u1 = sum lam^k phi_2k / (2k)!, u2 = sum lam^k phi_{2k+1} / (2k+1)!."""
    if k_max < 1:
        raise InvalidArgumentError(f"k_max must be >= 1, got {k_max}")
    cutoff = float(config.get("spps.relative_cutoff", 1e-15))
    table = build_table(p, 0.0, k_max)
    lam = complex(lam)

    u1 = np.zeros(p.grid.n_points, dtype=complex)
    u2 = np.zeros(p.grid.n_points, dtype=complex)
    for k in range(k_max // 2 + 1):
        scale = lam**k
        term1 = scale / math.factorial(2 * k) * table.phi[2 * k].values
        u1 += term1
        small = np.max(np.abs(term1)) <= cutoff * np.max(np.abs(u1))
        if 2 * k + 1 <= k_max:
            term2 = scale / math.factorial(2 * k + 1) * table.phi[2 * k + 1].values
            u2 += term2
            small = small and np.max(np.abs(term2)) <= cutoff * np.max(np.abs(u2))
        if k > 0 and small:
            logger.debug(f"[SPPS] series truncated after {k + 1} terms (lambda={lam})")
            break
    return p.q.with_values(u1), p.q.with_values(u2)


def verify_power_mapping(
    K: TransmutationKernel, table: FormalPowerTable, k: int, family: str = "phi"
) -> float:
    """max |T[x^k] - phi_k| (family 'phi', K at h) or |T[x^k] - psi_k| (family 'psi', K at -h)."""
    require_same_grid(K.grid, table.grid, "formal powers")
    if not 0 <= k <= table.k_max:
        raise InvalidArgumentError(f"k={k} outside table range 0..{table.k_max}")
    if family == "phi":
        require_kernel_h(K, table.potential.h)
        target = table.phi[k]
    elif family == "psi":
        require_kernel_h(K, -table.potential.h)
        target = table.psi[k]
    else:
        raise InvalidArgumentError(f"unknown power family {family!r}")
    image = apply_T(K, K.grid.samples(lambda x: x**k))
    return float(np.max(np.abs(image.values - target.values)))


def shifted_power_image(table: FormalPowerTable, k: int) -> Samples:
    """Image of x^k under the h = 0 kernel: phi_k (odd k), phi_k - h/(k+1) phi_{k+1} (even k)."""
    if k % 2:
        return table.phi[k]
    if k + 1 > table.k_max:
        raise InvalidArgumentError(f"even k={k} needs phi_{k + 1}; table stops at {table.k_max}")
    h = table.potential.h
    return table.phi[k] - table.phi[k + 1] * (h / (k + 1))
