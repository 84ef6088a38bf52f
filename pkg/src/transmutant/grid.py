"""
Transmutant core grid

Uniform symmetric grids on [-a, a], sampled functions, and the quadrature,
interpolation and finite-difference primitives every other module builds on.

All quadrature is composite Simpson on uniform nodes. Odd interval counts
close with the 3/8 rule; a single interval uses the 4-point cubic rule so
cumulative integrals stay O(h^4) everywhere.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import InvalidArgumentError, OutOfDomainError

ArrayLike = Union[float, complex, np.ndarray]

# Relative slack used when deciding whether a point is a node / inside [-a, a]
NODE_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Symmetric uniform grid on [-a, a] with the origin as a node."""

    a: float
    n_points: int

    def __post_init__(self):
        if not (self.a > 0 and np.isfinite(self.a)):
            raise InvalidArgumentError(f"half-width must be positive, got a={self.a}")
        if self.n_points < 5 or self.n_points % 2 == 0:
            raise InvalidArgumentError(
                f"n_points must be odd and >= 5, got n_points={self.n_points}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.a / (self.n_points - 1)

    @property
    def origin(self) -> int:
        return (self.n_points - 1) // 2

    @cached_property
    def nodes(self) -> np.ndarray:
        c = self.origin
        # k/c is exactly antisymmetric in k, so the nodes are too, and nodes[-1] == a
        return self.a * (np.arange(self.n_points) - c) / c

    def index_of(self, x: float) -> int:
        """Index of the node equal to x; raises if x is not a node."""
        pos = (float(np.real(x)) + self.a) / self.spacing
        k = int(round(pos))
        if abs(pos - k) > NODE_TOL or not 0 <= k < self.n_points or np.imag(x) != 0:
            raise InvalidArgumentError(f"x0={x} is not a node of {self}")
        return k

    def mirror(self, index: int) -> int:
        return self.n_points - 1 - index

    def samples(self, fn: Callable[[np.ndarray], ArrayLike]) -> "Samples":
        values = np.broadcast_to(np.asarray(fn(self.nodes), dtype=complex), self.nodes.shape)
        return Samples(self, values.copy())

    def constant(self, value: complex) -> "Samples":
        return Samples(self, np.full(self.n_points, value, dtype=complex))


@dataclass(frozen=True)
class Samples:
    """Complex samples of a function on every node of a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise InvalidArgumentError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("samples contain NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.grid.n_points

    def with_values(self, values: np.ndarray) -> "Samples":
        return Samples(self.grid, values)

    def at_origin(self) -> complex:
        return complex(self.values[self.grid.origin])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "Samples") -> "Samples":
        require_same_grid(self.grid, other.grid)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Samples") -> "Samples":
        require_same_grid(self.grid, other.grid)
        return self.with_values(self.values - other.values)

    def __mul__(self, other: Union["Samples", complex, float]) -> "Samples":
        if isinstance(other, Samples):
            require_same_grid(self.grid, other.grid)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__


def make_grid(a: float, n_points: int) -> Grid:
    return Grid(float(a), int(n_points))


def require_same_grid(left: Grid, right: Grid, what: str = "samples"):
    if left != right:
        raise InvalidArgumentError(f"{what} live on {right}, expected {left}")


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def cumulative_simpson(y: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """F[k] = integral from index 0 to index k along axis (uniform step dx)."""
    y = np.moveaxis(np.asarray(y), axis, -1)
    length = y.shape[-1]
    out = np.zeros(y.shape, dtype=np.result_type(y, float))

    if length == 2:
        out[..., 1] = 0.5 * dx * (y[..., 0] + y[..., 1])
    elif length == 3:
        out[..., 1] = dx * (5.0 * y[..., 0] + 8.0 * y[..., 1] - y[..., 2]) / 12.0
        out[..., 2] = dx * (y[..., 0] + 4.0 * y[..., 1] + y[..., 2]) / 3.0
    elif length >= 4:
        pairs = dx / 3.0 * (y[..., 0:-2:2] + 4.0 * y[..., 1:-1:2] + y[..., 2::2])
        out[..., 2::2] = np.cumsum(pairs, axis=-1)
        out[..., 1] = (
            dx * (9.0 * y[..., 0] + 19.0 * y[..., 1] - 5.0 * y[..., 2] + y[..., 3]) / 24.0
        )
        # odd k >= 3: Simpson up to k-3, then 3/8 on the last three intervals
        out[..., 3::2] = out[..., 0:-3:2] + 3.0 * dx / 8.0 * (
            y[..., 0:-3:2] + 3.0 * y[..., 1:-2:2] + 3.0 * y[..., 2:-1:2] + y[..., 3::2]
        )
    return np.moveaxis(out, -1, axis)


def cumulative_from(y: np.ndarray, origin: int, dx: float, axis: int = -1) -> np.ndarray:
    """Signed cumulative integral starting at index origin, marching both ways."""
    y = np.moveaxis(np.asarray(y), axis, -1)
    out = np.zeros(y.shape, dtype=np.result_type(y, float))
    left = cumulative_simpson(y[..., origin::-1], dx)
    out[..., : origin + 1] = -left[..., ::-1]
    out[..., origin:] = cumulative_simpson(y[..., origin:], dx)
    return np.moveaxis(out, -1, axis)


def cumulative_weights(k: int, length: int) -> np.ndarray:
    """Weights (in units of dx) reproducing cumulative_simpson(y)[k] for len(y) == length."""
    w = np.zeros(length)
    if k == 0:
        return w
    if k == 1:
        if length >= 4:
            w[:4] = np.array([9.0, 19.0, -5.0, 1.0]) / 24.0
        elif length == 3:
            w[:3] = np.array([5.0, 8.0, -1.0]) / 12.0
        else:
            w[:2] = 0.5
        return w
    simpson_end = k if k % 2 == 0 else k - 3
    if simpson_end > 0:
        w[0 : simpson_end + 1 : 2] += 2.0 / 3.0
        w[1:simpson_end:2] += 4.0 / 3.0
        w[0] -= 1.0 / 3.0
        w[simpson_end] -= 1.0 / 3.0
    if k % 2 == 1:
        w[k - 3 : k + 1] += 3.0 / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


def cumulative_integral(u: Samples, x0: float = 0.0) -> Samples:
    """F(x_i) = integral of u from x0 to x_i; F(x0) == 0 exactly."""
    grid = u.grid
    origin = grid.index_of(x0)
    return u.with_values(cumulative_from(u.values, origin, grid.spacing))


def integral_between(u: Samples, lower: float, upper: float) -> complex:
    """Definite integral between two nodes."""
    F = cumulative_integral(u, lower)
    return complex(F.values[u.grid.index_of(upper)])


# ---------------------------------------------------------------------------
# Interpolation
# ---------------------------------------------------------------------------


def _lagrange4(values: np.ndarray, grid: Grid, x: np.ndarray) -> np.ndarray:
    n = grid.n_points
    pos = (x + grid.a) / grid.spacing
    nearest = np.clip(np.rint(pos).astype(int), 0, n - 1)
    on_node = np.abs(pos - nearest) <= NODE_TOL

    left = np.clip(np.floor(pos).astype(int), 1, n - 3) - 1
    s = pos - left
    w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0
    w1 = s * (s - 2.0) * (s - 3.0) / 2.0
    w2 = -s * (s - 1.0) * (s - 3.0) / 2.0
    w3 = s * (s - 1.0) * (s - 2.0) / 6.0
    result = (
        w0 * values[left]
        + w1 * values[left + 1]
        + w2 * values[left + 2]
        + w3 * values[left + 3]
    )
    return np.where(on_node, values[nearest], result)


def interpolate(u: Samples, x: ArrayLike) -> ArrayLike:
    """Local 4-point cubic interpolation; exact at nodes, reproduces cubics."""
    grid = u.grid
    xs = np.asarray(x, dtype=float)
    if np.any(np.abs(xs) > grid.a * (1.0 + NODE_TOL)):
        raise OutOfDomainError(f"interpolation point outside [-{grid.a}, {grid.a}]")
    result = _lagrange4(u.values, grid, np.clip(xs, -grid.a, grid.a))
    if xs.ndim == 0:
        return complex(result)
    return result


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------


def second_derivative(u: Samples, order: int = 2) -> Samples:
    """Second derivative by finite differences.

    order=2: centered 3-point stencil inside, one-sided 4-point at the ends.
    order=4: centered 5-point stencil on nodes 2..n-3, one-sided 6-point near the ends.
    """
    y = u.values
    h2 = u.grid.spacing**2
    out = np.empty_like(y)
    if order == 2:
        out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h2
        out[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2
        out[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / h2
    elif order == 4:
        if len(y) < 6:
            raise InvalidArgumentError("order-4 second derivative needs at least 6 nodes")
        out[2:-2] = (-y[4:] + 16.0 * y[3:-1] - 30.0 * y[2:-2] + 16.0 * y[1:-3] - y[:-4]) / (
            12.0 * h2
        )
        edge = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
        inner = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0
        out[0] = edge @ y[:6] / h2
        out[1] = inner @ y[:6] / h2
        out[-1] = edge @ y[-1:-7:-1] / h2
        out[-2] = inner @ y[-1:-7:-1] / h2
    else:
        raise InvalidArgumentError(f"unsupported stencil order {order}")
    return u.with_values(out)


def derivative_values(y: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Fourth-order first derivative of raw arrays along an axis."""
    y = np.moveaxis(np.asarray(y), axis, -1)
    if y.shape[-1] < 5:
        raise InvalidArgumentError("fourth-order derivative needs at least 5 nodes")
    out = np.empty(y.shape, dtype=np.result_type(y, float))
    out[..., 2:-2] = (-y[..., 4:] + 8.0 * y[..., 3:-1] - 8.0 * y[..., 1:-3] + y[..., :-4]) / (
        12.0 * h
    )
    edge = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    inner = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    head = y[..., :5]
    tail = y[..., -1:-6:-1]
    out[..., 0] = head @ edge / h
    out[..., 1] = head @ inner / h
    out[..., -1] = -(tail @ edge) / h
    out[..., -2] = -(tail @ inner) / h
    return np.moveaxis(out, -1, axis)


def derivative(u: Samples) -> Samples:
    """Fourth-order first derivative (centered inside, one-sided at the ends)."""
    return u.with_values(derivative_values(u.values, u.grid.spacing))


def even_part(u: Samples) -> Samples:
    return u.with_values(0.5 * (u.values + u.values[::-1]))


def odd_part(u: Samples) -> Samples:
    return u.with_values(0.5 * (u.values - u.values[::-1]))


def interior_max(values: np.ndarray, margin: int = 1) -> float:
    """Max modulus over nodes margin..n-1-margin."""
    values = np.asarray(values)
    if margin:
        values = values[margin:-margin]
    return float(np.max(np.abs(values)))
