"""
Transmutant Goursat solver

Solves the characteristic integral equation

    H(u, v) = h/2 + 1/2 * int_0^u q + int_0^u int_0^v q(a + b) H(a, b) db da

by Picard iteration on a uniform lattice covering the diamond |u| + |v| <= a
(all four quadrants at once, signed limits), and maps the result onto the
(x, t) square through K(x, t) = H((x + t) / 2, (x - t) / 2).

The lattice step is spacing / (2 * m_ratio), so every kernel node lands on a
lattice node and no 2D interpolation is needed.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .config_loader import config
from .errors import (
    ConfigError,
    ConvergenceError,
    InvalidArgumentError,
    InvalidStateError,
)
from .grid import (
    Grid,
    Samples,
    cumulative_from,
    cumulative_integral,
    derivative_values,
    interpolate,
    require_same_grid,
)
from .metrics import metrics_collector

logger = logging.getLogger("transmutant.goursat")


class Provenance(str, Enum):
    GOURSAT = "goursat"
    CLOSED_FORM = "closed-form"
    DARBOUX = "darboux"
    REPARAMETRIZED = "reparametrized"


class KtSource(str, Enum):
    QUADRATURE = "quadrature"
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class DiamondField:
    """Samples of H(u, v; h) on the characteristic lattice.

    values is zero outside the diamond; extended holds the full lattice square
    (solution of the same equation with q continued linearly past +-a).
    """

    half_width: float
    m_points: int
    values: np.ndarray = field(repr=False)
    h: complex
    iterations_used: int
    residual: float
    grid: Grid
    q: Samples = field(repr=False)
    mask: np.ndarray = field(repr=False)
    extended: np.ndarray = field(repr=False)
    history: Tuple[float, ...] = ()
    converged: bool = True

    @property
    def center(self) -> int:
        return (self.m_points - 1) // 2

    @property
    def ratio(self) -> int:
        return (self.m_points - 1) // (2 * (self.grid.n_points - 1))

    @property
    def step(self) -> float:
        return self.half_width / self.center

    @property
    def axis(self) -> np.ndarray:
        return self.half_width * (np.arange(self.m_points) - self.center) / self.center


@dataclass(frozen=True)
class TransmutationKernel:
    """K(x_i, t_j; h) and its t-partial on the full square, row index = x."""

    grid: Grid
    h: complex
    K: np.ndarray = field(repr=False)
    Kt: Optional[np.ndarray] = field(repr=False)
    provenance: Provenance
    kt_source: Optional[KtSource] = KtSource.QUADRATURE
    chain: Tuple[str, ...] = ()
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        shape = (self.grid.n_points, self.grid.n_points)
        K = np.asarray(self.K, dtype=complex)
        if K.shape != shape:
            raise InvalidArgumentError(f"kernel shape {K.shape} does not match grid {shape}")
        if not np.all(np.isfinite(K)):
            raise InvalidArgumentError("kernel contains NaN or Inf")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "h", complex(self.h))
        if self.Kt is None:
            object.__setattr__(self, "kt_source", None)
            return
        Kt = np.asarray(self.Kt, dtype=complex)
        if Kt.shape != shape or not np.all(np.isfinite(Kt)):
            raise InvalidArgumentError("kernel t-derivative has wrong shape or non-finite entries")
        Kt.setflags(write=False)
        object.__setattr__(self, "Kt", Kt)

    @classmethod
    def from_function(
        cls,
        grid: Grid,
        h: complex,
        fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
        dfn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
        name: str = "closed-form",
    ) -> "TransmutationKernel":
        """Sample an analytic kernel; Kt from dfn, or 4th-order differences in t."""
        X, T = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
        K = np.broadcast_to(np.asarray(fn(X, T), dtype=complex), X.shape)
        if dfn is not None:
            Kt = np.broadcast_to(np.asarray(dfn(X, T), dtype=complex), X.shape)
            source = KtSource.ANALYTIC
        else:
            Kt = derivative_values(K, grid.spacing, axis=1)
            source = KtSource.FINITE_DIFFERENCE
        return cls(grid, h, K, Kt, Provenance.CLOSED_FORM, source, (name,))

    def _index(self, x: float, t: float) -> Tuple[int, int]:
        return self.grid.index_of(x), self.grid.index_of(t)

    def at(self, x: float, t: float) -> complex:
        return complex(self.K[self._index(x, t)])

    def kt_at(self, x: float, t: float) -> complex:
        return complex(self.require_kt()[self._index(x, t)])

    def require_kt(self) -> np.ndarray:
        if self.Kt is None:
            raise InvalidArgumentError(f"kernel ({self.provenance.value}) carries no t-derivative")
        return self.Kt

    def diagonal(self) -> np.ndarray:
        """K(x, x) per node."""
        return np.diagonal(self.K).copy()

    def antidiagonal(self) -> np.ndarray:
        """K(x, -x) per node."""
        return self.K[np.arange(self.grid.n_points), ::-1].diagonal().copy()

    def odd_in_t(self) -> np.ndarray:
        """K(x, t) - K(x, -t); independent of h."""
        return self.K - self.K[:, ::-1]


def free_kernel(grid: Grid, h: complex) -> TransmutationKernel:
    """Kernel of q = 0: K = h/2 everywhere."""
    n = grid.n_points
    return TransmutationKernel(
        grid,
        h,
        np.full((n, n), 0.5 * complex(h)),
        np.zeros((n, n), dtype=complex),
        Provenance.CLOSED_FORM,
        KtSource.ANALYTIC,
        ("free",),
    )


# ---------------------------------------------------------------------------
# Lattice helpers
# ---------------------------------------------------------------------------


def lattice_ratio(grid: Grid, m_points: Optional[int] = None) -> int:
    """Characteristic refinement rho with m_points = 2 * rho * (n_points - 1) + 1."""
    if m_points is None:
        ratio = config.get("goursat.m_ratio", 1)
        if not isinstance(ratio, int) or ratio < 1:
            raise ConfigError(f"goursat.m_ratio must be a positive integer, got {ratio!r}")
        return ratio
    span = 2 * (grid.n_points - 1)
    if m_points < span + 1 or (m_points - 1) % span:
        raise InvalidArgumentError(
            f"m_points={m_points} is not 2*rho*(n_points-1)+1 for n_points={grid.n_points}"
        )
    return (m_points - 1) // span


def _extended_potential(q: Samples, ratio: int) -> Tuple[np.ndarray, np.ndarray]:
    """q on the lattice sum line r*step, |r| <= 2*center, and on the u-axis.

    Beyond +-a the potential is continued by its tangent line.
    """
    grid = q.grid
    center = ratio * (grid.n_points - 1)
    r = np.arange(-2 * center, 2 * center + 1)
    x = grid.a * r / center

    line = np.empty(r.shape, dtype=complex)
    inside = np.abs(r) <= center
    line[inside] = interpolate(q, x[inside])

    dq = derivative_values(q.values, grid.spacing)
    left, right = r < -center, r > center
    line[left] = q.values[0] + dq[0] * (x[left] + grid.a)
    line[right] = q.values[-1] + dq[-1] * (x[right] - grid.a)
    return line, line[center : 3 * center + 1]


def _sum_matrix(line: np.ndarray) -> np.ndarray:
    m = (len(line) + 1) // 2
    idx = np.arange(m)
    return line[np.add.outer(idx, idx)]


def _kernel_indices(grid: Grid, ratio: int) -> Tuple[np.ndarray, np.ndarray]:
    """Lattice (k, l) of kernel node (i, j): u = (x + t)/2, v = (x - t)/2."""
    c = grid.origin
    center = ratio * (grid.n_points - 1)
    i = np.arange(grid.n_points)[:, None]
    j = np.arange(grid.n_points)[None, :]
    return center + (i + j - 2 * c) * ratio, center + (i - j) * ratio


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


def solve_goursat(
    q: Samples,
    h: complex,
    m_points: Optional[int] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> DiamondField:
    """Picard iteration for H(u, v; h) on the characteristic diamond."""
    solver_cfg = config.get_solver_config()
    tol = float(solver_cfg.get("tol", 1e-12) if tol is None else tol)
    max_iter = int(solver_cfg.get("max_iter", 60) if max_iter is None else max_iter)
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise InvalidArgumentError(f"max_iter must be >= 1, got {max_iter}")

    grid = q.grid
    h = complex(h)
    ratio = lattice_ratio(grid, m_points)
    m = 2 * ratio * (grid.n_points - 1) + 1
    center = (m - 1) // 2
    step = grid.a / center

    with metrics_collector.stage("goursat.solve"):
        line, q_u = _extended_potential(q, ratio)
        Q = _sum_matrix(line)
        offsets = np.abs(np.arange(m) - center)
        mask = np.add.outer(offsets, offsets) <= center

        base = 0.5 * h + 0.5 * cumulative_from(q_u, center, step)[:, None]
        H = np.broadcast_to(base, (m, m)).copy()
        history = []
        converged = False
        for iteration in range(1, max_iter + 1):
            inner = cumulative_from(Q * H, center, step, axis=1)
            H_next = base + cumulative_from(inner, center, step, axis=0)
            defect = float(np.max(np.abs(H_next - H)[mask]))
            history.append(defect)
            H = H_next
            logger.debug(f"[GOURSAT] iteration {iteration}: defect={defect:.3e}")
            if defect < tol:
                converged = True
                break

    diamond = DiamondField(
        half_width=grid.a,
        m_points=m,
        values=np.where(mask, H, 0.0),
        h=h,
        iterations_used=len(history),
        residual=history[-1],
        grid=grid,
        q=q,
        mask=mask,
        extended=H,
        history=tuple(history),
        converged=converged,
    )
    if not converged:
        logger.warning(
            f"[GOURSAT] no convergence after {max_iter} iterations (defect={history[-1]:.3e})"
        )
        raise ConvergenceError(
            f"Picard iteration did not reach tol={tol:g} in {max_iter} iterations",
            residual=history[-1],
            iterations=max_iter,
            field=diamond,
        )
    logger.info(
        f"[GOURSAT] converged in {diamond.iterations_used} iterations "
        f"(residual={diamond.residual:.1e}, m_points={m})"
    )
    return diamond


def _require_converged(H: DiamondField):
    if not H.converged:
        raise InvalidStateError(
            f"diamond field did not converge (residual={H.residual:.3e}); no kernel available"
        )


def partial_t_kernel(H: DiamondField, q: Samples) -> np.ndarray:
    """dK/dt = (H_u - H_v)/2 from the differentiated integral equation."""
    _require_converged(H)
    require_same_grid(H.grid, q.grid, "potential")
    ratio, center, step = H.ratio, H.center, H.step
    line, q_u = _extended_potential(q, ratio)
    QH = _sum_matrix(line) * H.extended
    H_u = 0.5 * q_u[:, None] + cumulative_from(QH, center, step, axis=1)
    H_v = cumulative_from(QH, center, step, axis=0)
    k, l = _kernel_indices(H.grid, ratio)
    return 0.5 * (H_u - H_v)[k, l]


def kernel_from_H(H: DiamondField) -> TransmutationKernel:
    _require_converged(H)
    k, l = _kernel_indices(H.grid, H.ratio)
    return TransmutationKernel(
        grid=H.grid,
        h=H.h,
        K=H.extended[k, l],
        Kt=partial_t_kernel(H, H.q),
        provenance=Provenance.GOURSAT,
        kt_source=KtSource.QUADRATURE,
        chain=("goursat",),
        meta={"iterations": H.iterations_used, "residual": H.residual, "m_points": H.m_points},
    )


def solve_kernel(q: Samples, h: complex, **solver_args) -> TransmutationKernel:
    """solve_goursat followed by kernel_from_H."""
    return kernel_from_H(solve_goursat(q, h, **solver_args))


def reparametrize_h(K: TransmutationKernel, h_new: complex) -> TransmutationKernel:
    """K(x, t; h_new) from K(x, t; h) by the change-of-parameter formula."""
    h_new = complex(h_new)
    d = 0.5 * (h_new - K.h)
    if d == 0:
        return K
    grid = K.grid
    D = K.odd_in_t()
    # C[i, j] = int_0^{t_j} D(x_i, s) ds, so int_t^x D = C[i, i] - C[i, j]
    C = cumulative_from(D, grid.origin, grid.spacing, axis=1)
    tail = np.diagonal(C)[:, None] - C
    K_new = d + K.K + d * tail
    Kt_new = None if K.Kt is None else K.Kt - d * D
    return replace(
        K,
        h=h_new,
        K=K_new,
        Kt=Kt_new,
        provenance=Provenance.REPARAMETRIZED,
        kt_source=K.kt_source,
        chain=K.chain + (f"reparametrized(h={h_new})",),
        meta=dict(K.meta),
    )


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def boundary_defect(K: TransmutationKernel, q: Samples) -> Tuple[float, float]:
    """(max |K(x,-x) - h/2|, max |K(x,x) - h/2 - 1/2 int_0^x q|)."""
    require_same_grid(K.grid, q.grid, "potential")
    half_int = 0.5 * cumulative_integral(q).values
    anti = float(np.max(np.abs(K.antidiagonal() - 0.5 * K.h)))
    diag = float(np.max(np.abs(K.diagonal() - 0.5 * K.h - half_int)))
    return anti, diag


def _five_point(A: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order second difference on nodes 2..n-3 along axis (other axis trimmed too)."""
    A = np.moveaxis(A, axis, 0)[:, 2:-2]
    out = (-A[4:] + 16.0 * A[3:-1] - 30.0 * A[2:-2] + 16.0 * A[1:-3] - A[:-4]) / (12.0 * h * h)
    return np.moveaxis(out, 0, axis)


def goursat_residual(K: TransmutationKernel, q: Samples) -> float:
    """Interior |K_xx - q K - K_tt| (five-point differences) plus the boundary defect."""
    require_same_grid(K.grid, q.grid, "potential")
    A = K.K
    s = K.grid.spacing
    core = A[2:-2, 2:-2]
    pde_defect = _five_point(A, 0, s) - q.values[2:-2, None] * core - _five_point(A, 1, s)
    return float(np.max(np.abs(pde_defect))) + max(boundary_defect(K, q))


def kernel_kink_report(K: TransmutationKernel, threshold: float = 1e-3) -> Dict[str, float]:
    """Jump of Kt across t = x and t = -x, from one-sided linear extrapolation."""
    Kt = K.require_kt()
    n = K.grid.n_points
    rows = np.arange(2, n - 2)
    mirror = n - 1 - rows

    def jump(cols):
        from_left = 2.0 * Kt[rows, cols - 1] - Kt[rows, cols - 2]
        from_right = 2.0 * Kt[rows, cols + 1] - Kt[rows, cols + 2]
        return float(np.max(np.abs(from_left - from_right)))

    report = {"diagonal": jump(rows), "antidiagonal": jump(mirror)}
    if max(report.values()) > threshold:
        logger.warning(
            f"[GOURSAT] Kt kink across t=+-x: diagonal={report['diagonal']:.2e}, "
            f"antidiagonal={report['antidiagonal']:.2e}"
        )
    return report
