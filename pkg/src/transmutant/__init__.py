"""
Transmutant: transmutation-operator kernels for 1D Schrodinger operators.

Goursat solver for K(x, t; h), Darboux kernels, formal powers / SPPS, the
Dirac system with a Lorentz scalar potential, and closed-form oracles.
"""

from .closed_forms import REFERENCE_KERNELS, bessel_I0, bessel_I1, bessel_I_miller
from .darboux import (
    DarbouxPair,
    darboux_kernel,
    darboux_kernel_triangle,
    darboux_ladder,
    darboux_transform,
    rational_ladder,
)
from .dirac import DiracConfig, Spinor, dirac_kernels, dirac_transmute, dirac_untransmute
from .errors import (
    ConfigError,
    ConvergenceError,
    InconsistentInputError,
    InvalidArgumentError,
    InvalidStateError,
    OutOfDomainError,
    TransmutantError,
    VanishingSolutionError,
)
from .formal_powers import FormalPowerTable, Potential, build_potential, build_table, spps_solution
from .goursat import TransmutationKernel, reparametrize_h, solve_goursat, solve_kernel
from .grid import Grid, Samples, make_grid
from .logger import logger  # noqa: F401
from .transmute import apply_T, apply_T_inverse, solution_c, solution_e0, solution_s

__version__ = "0.1.0"
