import os
import sys
import tempfile
from pathlib import Path

import pytest

# Keep logs and user config out of the real home directory
os.environ.setdefault("TRANSMUTANT_HOME", tempfile.mkdtemp(prefix="transmutant-test-"))

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.transmutant.closed_forms import REFERENCE_KERNELS  # noqa: E402
from src.transmutant.config_loader import config  # noqa: E402
from src.transmutant.goursat import solve_kernel  # noqa: E402
from src.transmutant.grid import make_grid  # noqa: E402
from src.transmutant.potentials import rational  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_config():
    """Each test starts from the template configuration."""
    config.reload()
    yield
    config.reload()


@pytest.fixture(scope="session")
def rational_grid():
    """a = 0.5 keeps the pole of 2/(x+1)^2 away from the interval."""
    return make_grid(0.5, 201)


@pytest.fixture(scope="session")
def fine_rational_grid():
    return make_grid(0.5, 401)


@pytest.fixture(scope="session")
def unit_grid():
    return make_grid(1.0, 201)


@pytest.fixture(scope="session")
def q_rational(rational_grid):
    return rational(1).sample(rational_grid)


@pytest.fixture(scope="session")
def rational_kernel(q_rational):
    """Goursat kernel K(x, t; -1) for q = 2/(x+1)^2."""
    return solve_kernel(q_rational, -1)


@pytest.fixture(scope="session")
def rational_exact(rational_grid):
    return REFERENCE_KERNELS["rational_n1"].on_grid(rational_grid)


@pytest.fixture(scope="session")
def const_kernel(unit_grid):
    """Goursat kernel K(x, t; 0) for q = 1."""
    return solve_kernel(unit_grid.constant(1.0), 0)


@pytest.fixture(scope="session")
def exact_rational_potential(rational_grid):
    """(q, f, f') for q = 2/(x+1)^2 with f = 1/(x+1), i.e. h = -1."""
    return (
        rational(1).sample(rational_grid),
        rational_grid.samples(lambda x: 1.0 / (x + 1.0)),
        rational_grid.samples(lambda x: -1.0 / (x + 1.0) ** 2),
    )
