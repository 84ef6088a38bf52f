"""
Invariant suite runner behind `verify`.

A suite is an ordered list of named checks, each returning a residual that is
compared against its tolerance. Shared kernels are built once, then checks run
on a thread pool capped by `runtime.threads`; results keep declaration order
so the report does not depend on the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from .closed_forms import REFERENCE_KERNELS
from .config_loader import config
from .darboux import (
    commutation_residuals,
    darboux_kernel,
    darboux_kernel_triangle,
    darboux_transform,
    rational_ladder,
    triangle_mask,
)
from .dirac import (
    DiracConfig,
    Spinor,
    dirac_kernels,
    dirac_residual,
    dirac_transmute,
    dirac_untransmute,
    free_dirac_solution,
)
from .errors import TransmutantError
from .formal_powers import build_potential, build_table, spps_solution, verify_power_mapping
from .goursat import boundary_defect, goursat_residual, reparametrize_h, solve_kernel
from .grid import make_grid
from .metrics import metrics_collector
from .potentials import rational
from .transmute import apply_T, apply_T_inverse, ode_residual, transmutation_residual

logger = logging.getLogger("transmutant.verify")

SUITES = ("rational", "dirac", "all")


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    run: Callable[[], float]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: Optional[float]
    tolerance: float
    passed: bool
    error: Optional[str] = None

    def as_dict(self) -> Dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "error": self.error,
        }


def _round(value: float) -> float:
    # seven significant digits
    return float(f"{value:.6e}")


def _evaluate(check: Check) -> CheckResult:
    try:
        residual = float(check.run())
    except (TransmutantError, ValueError, FloatingPointError) as e:
        logger.warning(f"[VERIFY] {check.name} raised {type(e).__name__}: {e}")
        return CheckResult(check.name, None, check.tolerance, False, f"{type(e).__name__}: {e}")
    passed = bool(np.isfinite(residual) and residual <= check.tolerance)
    if not passed:
        logger.warning(f"[VERIFY] {check.name} failed: {residual:.3e} > {check.tolerance:g}")
    return CheckResult(check.name, _round(residual), check.tolerance, passed)


def run_checks(checks: List[Check], threads: Optional[int] = None) -> List[CheckResult]:
    workers = max(1, threads or config.threads)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, checks))


def _max_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def rational_suite(corrupt: float = 0.0) -> List[Check]:
    """Rational family q = n(n+1)/(x+1)^2 on a = 0.5.

    Goursat checks use n = 201 (characteristic lattice of 401 points);
    finite-difference identities use closed-form kernels on n = 401.
    `corrupt` is added to the kernel entering the operator identities.
    """
    coarse = make_grid(0.5, 201)
    fine = make_grid(0.5, 401)
    ref_n1 = REFERENCE_KERNELS["rational_n1"]
    ref_h2 = REFERENCE_KERNELS["rational_n1_h2"]
    ref_n2 = REFERENCE_KERNELS["rational_n2"]

    q1 = rational(1).sample(coarse)
    with metrics_collector.stage("verify.rational.setup"):
        K = solve_kernel(q1, -1)
        K_h2 = solve_kernel(q1, 2)
    if corrupt:
        K = replace(K, K=K.K + corrupt)
    exact_n1 = ref_n1.on_grid(coarse)
    x = coarse.nodes
    f1 = coarse.samples(lambda s: 1 / (s + 1))
    f1_prime = coarse.samples(lambda s: -1 / (s + 1) ** 2)
    table = build_table(build_potential(q1, f=f1, f_prime=f1_prime), k_max=7)

    q1_fine = rational(1).sample(fine)
    K_fine = ref_n1.on_grid(fine)
    if corrupt:
        K_fine = replace(K_fine, K=K_fine.K + corrupt)
    f2, f2_prime = rational(1).solution(fine)
    pair = darboux_transform(build_potential(q1_fine, f=f2, f_prime=f2_prime))
    K1_h2 = ref_h2.on_grid(fine)
    K2 = darboux_kernel(K1_h2, pair)
    ladder = rational_ladder(fine, 3)

    def T(fn):
        return apply_T(K, coarse.samples(fn)).values

    checks = [
        Check("goursat.rational_oracle", 1e-6, lambda: _max_diff(K.K, exact_n1.K)),
        Check("goursat.rational_kt_oracle", 1e-6, lambda: _max_diff(K.Kt, exact_n1.Kt)),
        Check("goursat.boundary", 1e-8, lambda: max(boundary_defect(K, q1))),
        Check("goursat.h_independence", 1e-10, lambda: _max_diff(K.odd_in_t(), K_h2.odd_in_t())),
        Check(
            "reparametrize.h2_oracle",
            1e-7,
            lambda: _max_diff(reparametrize_h(exact_n1, 2).K, ref_h2.on_grid(coarse).K),
        ),
        Check(
            "reparametrize.round_trip",
            1e-10,
            lambda: _max_diff(reparametrize_h(reparametrize_h(K, 2), -1).K, K.K),
        ),
        Check("darboux.n2_oracle", 1e-7, lambda: _max_diff(K2.K, ref_n2.on_grid(fine).K)),
        Check(
            "darboux.triangle_agreement",
            1e-6,
            lambda: _max_diff(
                darboux_kernel_triangle(K1_h2, pair).K[triangle_mask(fine)],
                K2.K[triangle_mask(fine)],
            ),
        ),
        Check("transmute.T_one", 1e-7, lambda: _max_diff(T(np.ones_like), 1 / (x + 1))),
        Check(
            "transmute.T_x",
            1e-7,
            lambda: _max_diff(T(lambda s: s), (x**3 + 3 * x**2 + 3 * x) / (3 * (x + 1))),
        ),
        Check(
            "transmute.T_cos",
            1e-7,
            lambda: _max_diff(T(np.cos), np.cos(x) - np.sin(x) / (x + 1)),
        ),
        Check(
            "transmute.inverse_round_trip",
            1e-7,
            lambda: _max_diff(
                apply_T_inverse(K, apply_T(K, coarse.samples(lambda s: s**3))).values, x**3
            ),
        ),
        Check(
            "powers.phi_mapping",
            1e-6,
            lambda: max(verify_power_mapping(K, table, k) for k in range(7)),
        ),
        Check(
            "spps.lambda_minus_one",
            1e-8,
            lambda: _max_diff(
                spps_solution(table.potential, -1, 40)[0].values, np.cos(x) - np.sin(x) / (x + 1)
            ),
        ),
        Check(
            "transmute.identity",
            5e-4,
            lambda: max(
                transmutation_residual(K_fine, q1_fine, fine.samples(fn))
                for fn in (lambda s: s**2, lambda s: s**3, lambda s: np.cos(2 * s), np.exp)
            ),
        ),
        Check(
            "darboux.commutation",
            5e-4,
            lambda: max(commutation_residuals(K1_h2, K2, pair, fine.samples(lambda s: s**3))),
        ),
        Check(
            "ladder.rung2_oracle",
            1e-6,
            lambda: _max_diff(ladder[2].kernel.K, ref_n2.on_grid(fine).K),
        ),
        Check("ladder.rung3_pde", 5e-4, lambda: goursat_residual(ladder[3].kernel, ladder[3].q)),
    ]
    return checks


def dirac_suite() -> List[Check]:
    """S = 0, m = 1 on a = 1: transmuted spinors, round trip, zero mode."""
    grid = make_grid(1.0, 201)
    cfg = DiracConfig(grid, 1.0, grid.constant(0.0), (1.0, 2.0))
    with metrics_collector.stage("verify.dirac.setup"):
        pair, K1, K2 = dirac_kernels(cfg)
    f = pair.p1.f
    zero_mode = Spinor(f, grid.constant(0.0))

    def transmuted(E):
        return dirac_transmute(K1, K2, free_dirac_solution(E, 1.0, 0.0, grid))

    def round_trip(E):
        u = free_dirac_solution(E, 1.0, 0.0, grid)
        return dirac_untransmute(K1, K2, dirac_transmute(K1, K2, u)).max_abs_diff(u)

    checks = []
    for E in cfg.E:
        label = f"{E.real:g}"
        checks += [
            Check(
                f"dirac.residual_E{label}",
                5e-4,
                lambda E=E: dirac_residual(cfg, transmuted(E), E),
            ),
            Check(f"dirac.round_trip_E{label}", 1e-6, lambda E=E: round_trip(E)),
            Check(
                f"dirac.schrodinger_E{label}",
                5e-3,
                lambda E=E: ode_residual(transmuted(E).psi1, pair.p1.q, -E * E),
            ),
        ]
    checks.append(Check("dirac.zero_mode", 5e-5, lambda: dirac_residual(cfg, zero_mode, 0.0)))
    return checks


def build_suite(name: str, corrupt: float = 0.0) -> List[Check]:
    if name == "rational":
        return rational_suite(corrupt)
    if name == "dirac":
        return dirac_suite()
    if name == "all":
        return rational_suite(corrupt) + dirac_suite()
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")


def run_suite(name: str = "rational", threads: Optional[int] = None, corrupt: float = 0.0) -> Dict:
    """Deterministic report: per-check residual, tolerance, pass/fail, plus totals."""
    checks = build_suite(name, corrupt)
    results = run_checks(checks, threads)
    passed = sum(r.passed for r in results)
    logger.info(f"[VERIFY] {passed}/{len(results)} checks passed (suite={name})")
    return {
        "suite": name,
        "corrupt": corrupt,
        "checks": [r.as_dict() for r in results],
        "passed": passed,
        "failed": len(results) - passed,
        "ok": passed == len(results),
    }
