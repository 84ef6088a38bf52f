"""
Builtin potential catalogue used by the CLI and the verify runner.

Each builtin knows its q, the admissible half-width, and (when one exists)
a closed-form nonvanishing solution f with its derivative.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .grid import Grid, Samples

BUILTINS = ("zero", "rational_n", "const_q", "soliton", "file")

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BuiltinPotential:
    name: str
    q: Fn
    a_max: float = np.inf
    f: Optional[Fn] = None
    f_prime: Optional[Fn] = None

    def sample(self, grid: Grid) -> Samples:
        if grid.a >= self.a_max:
            raise ConfigError(f"potential {self.name} requires a < {self.a_max}, got a={grid.a}")
        return grid.samples(self.q)

    def solution(self, grid: Grid) -> Optional[Tuple[Samples, Samples]]:
        if self.f is None:
            return None
        return grid.samples(self.f), grid.samples(self.f_prime)


def rational(order: int) -> BuiltinPotential:
    """q = n(n+1)/(x+1)^2 with f = (x+1)^(n+1)."""
    if order < 0:
        raise ConfigError(f"rational_n order must be >= 0, got {order}")
    return BuiltinPotential(
        f"rational_n{order}",
        lambda x: order * (order + 1) / (x + 1.0) ** 2,
        a_max=1.0,
        f=lambda x: (x + 1.0) ** (order + 1),
        f_prime=lambda x: (order + 1) * (x + 1.0) ** order,
    )


def constant(value: complex) -> BuiltinPotential:
    value = complex(value)
    root = np.sqrt(value)

    def f(x):
        return np.cosh(root * x)

    def f_prime(x):
        return root * np.sinh(root * x)

    return BuiltinPotential(f"const_q({value})", lambda x: value + 0.0 * x, f=f, f_prime=f_prime)


ZERO = BuiltinPotential(
    "zero", lambda x: 0.0 * x, f=lambda x: 1.0 + 0.0 * x, f_prime=lambda x: 0.0 * x
)

SOLITON = BuiltinPotential(
    "soliton",
    lambda x: 1.0 - 2.0 / np.cosh(x) ** 2,
    f=lambda x: 1.0 / np.cosh(x),
    f_prime=lambda x: -np.tanh(x) / np.cosh(x),
)


def load_samples(path: Path, grid: Grid) -> Samples:
    """Read an `x,re,im` curve file whose nodes must coincide with the grid."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read sampled potential {path}: {e}") from e
    if data.shape != (grid.n_points, 3) or not np.allclose(data[:, 0], grid.nodes, atol=1e-12):
        raise ConfigError(f"{path} does not sample the grid a={grid.a}, n={grid.n_points}")
    return Samples(grid, data[:, 1] + 1j * data[:, 2])


def resolve(name: str, params: Dict) -> BuiltinPotential:
    """Builtin by name; `file` is handled by load_samples."""
    if name == "zero":
        return ZERO
    if name == "rational_n":
        return rational(int(params.get("order", 1)))
    if name == "const_q":
        return constant(params.get("q", 1.0))
    if name == "soliton":
        return SOLITON
    raise ConfigError(f"unknown builtin potential {name!r}; expected one of {BUILTINS}")
