"""
Transmutant command line

    python -m src.transmutant kernel --builtin rational_n --order 1 --h -1 --a 0.5
    python -m src.transmutant apply --kernel output/kernel.csv --fn monomial:0
    python -m src.transmutant verify --suite all

Job parameters come from flags or from `--config job.json|job.yaml`; flags
given explicitly win over the file. Exceptions are mapped to exit codes in
`run()` only.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    ValidationError,
    field_serializer,
    field_validator,
    model_validator,
)

from .closed_forms import REFERENCE_KERNELS
from .config_loader import config
from .darboux import darboux_ladder, rational_ladder
from .dirac import DiracConfig, dirac_kernels, dirac_residual, dirac_transmute, free_dirac_solution
from .errors import ConfigError, TransmutantError
from .export import (
    read_kernel,
    to_jsonable,
    write_curve_csv,
    write_curves_csv,
    write_json,
    write_kernel,
    write_spinor_csv,
    write_table_csv,
)
from .formal_powers import build_potential, build_table, spps_solution
from .goursat import boundary_defect, goursat_residual, kernel_kink_report, solve_kernel
from .grid import Grid, Samples, make_grid
from .logger import setup_logging
from .metrics import metrics_collector
from .potentials import BUILTINS, load_samples, resolve
from .transmute import apply_T, apply_T_inverse, ode_residual
from .verify import SUITES, run_suite

logger = logging.getLogger("transmutant.cli")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1


def _parse_complex(value: Any) -> Any:
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as e:
            raise ValueError(f"not a complex number: {value!r}") from e
    if isinstance(value, (int, float, np.number)):
        return complex(value)
    return value


class JobConfig(BaseModel):
    """One CLI job: potential, grid and solver parameters, output location."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    potential: Literal["zero", "rational_n", "const_q", "soliton", "file"] = "zero"
    order: int = 1
    q: complex = 1 + 0j
    potential_file: Optional[Path] = None
    a: float = 1.0
    n_points: int = 201
    h: complex = 0j
    k_max: int = 10
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    m_points: Optional[int] = None
    output_dir: Path = Path("output")
    format: Literal["csv", "json"] = "csv"

    @field_validator("h", "q", mode="before")
    @classmethod
    def _complex(cls, value):
        return _parse_complex(value)

    @field_serializer("h", "q")
    def _complex_literal(self, value: complex) -> str:
        return str(complex(value))

    @model_validator(mode="after")
    def _check(self) -> "JobConfig":
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.n_points < 5 or self.n_points % 2 == 0:
            raise ValueError(f"n_points must be odd and >= 5, got {self.n_points}")
        if self.k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {self.k_max}")
        if self.potential == "rational_n":
            if self.order < 0:
                raise ValueError(f"rational_n order must be >= 0, got {self.order}")
            if self.a >= 1.0:
                raise ValueError(f"rational_n has a pole at x = -1, needs a < 1 (a={self.a})")
        if self.potential == "file" and self.potential_file is None:
            raise ValueError("potential 'file' requires potential_file")
        return self

    @property
    def grid(self) -> Grid:
        return make_grid(self.a, self.n_points)

    @property
    def solver_args(self) -> Dict[str, Any]:
        args = {"tol": self.tol, "max_iter": self.max_iter, "m_points": self.m_points}
        return {k: v for k, v in args.items() if v is not None}

    def sample_potential(self, grid: Optional[Grid] = None) -> Samples:
        grid = grid or self.grid
        if self.potential == "file":
            return load_samples(self.potential_file, grid)
        return resolve(self.potential, {"order": self.order, "q": self.q}).sample(grid)


def load_job_file(path: Path) -> Dict[str, Any]:
    """Read a job file (JSON, or YAML for .yaml/.yml)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        if path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except (OSError, ValueError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read job config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"job config {path} must be a mapping")
    return data


def parse_function(spec: str, grid: Grid) -> Samples:
    """monomial:k | cos:w | sin:w | exp:w (e^{iwx}) | file:path."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "monomial":
            k = int(arg or 0)
            if k < 0:
                raise ValueError("negative degree")
            return grid.samples(lambda x: x**k)
        if kind in ("cos", "sin", "exp"):
            omega = complex(arg.replace(" ", "")) if arg else 1.0
            if kind == "cos":
                return grid.samples(lambda x: np.cos(omega * x))
            if kind == "sin":
                return grid.samples(lambda x: np.sin(omega * x))
            return grid.samples(lambda x: np.exp(1j * omega * x))
    except ValueError as e:
        raise ConfigError(f"bad function spec {spec!r}: {e}") from e
    if kind == "file" and arg:
        return load_samples(Path(arg), grid)
    raise ConfigError(
        f"unknown function spec {spec!r}; use monomial:k, cos:w, sin:w, exp:w or file:path"
    )


def parse_scalar(spec: str, grid: Grid) -> Samples:
    """Dirac scalar potential S: zero | const:v | tanh | file:path."""
    kind, _, arg = spec.partition(":")
    if kind == "zero":
        return grid.constant(0.0)
    if kind == "const":
        try:
            return grid.constant(float(arg))
        except ValueError as e:
            raise ConfigError(f"bad scalar potential {spec!r}: {e}") from e
    if kind == "tanh":
        return grid.samples(np.tanh)
    if kind == "file" and arg:
        return load_samples(Path(arg), grid)
    raise ConfigError(f"unknown scalar potential {spec!r}; use zero, const:v, tanh, file:path")


def _out(cfg: JobConfig, stem: str) -> Path:
    return cfg.output_dir / f"{stem}.{cfg.format}"


def _write_samples(cfg: JobConfig, stem: str, curves: Dict[str, Samples]) -> Path:
    path = _out(cfg, stem)
    if cfg.format == "json":
        grid = next(iter(curves.values())).grid
        return write_json(path, {"x": grid.nodes, **{k: v.values for k, v in curves.items()}})
    if len(curves) == 1:
        return write_curve_csv(path, next(iter(curves.values())))
    return write_curves_csv(path, curves)


def _emit_kernel(cfg: JobConfig, stem: str, K, extra: Dict[str, Any]) -> Path:
    if cfg.format == "json":
        return write_json(
            _out(cfg, stem), {"x": K.grid.nodes, "K": K.K, "Kt": K.Kt, "h": K.h, **extra}
        )
    return write_kernel(cfg.output_dir / f"{stem}.csv", K, extra)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_kernel(cfg: JobConfig) -> int:
    grid = cfg.grid
    q = cfg.sample_potential(grid)
    K = solve_kernel(q, cfg.h, **cfg.solver_args)
    anti, diag = boundary_defect(K, q)
    extra = {
        "potential": cfg.potential,
        "boundary_defect": {"antidiagonal": anti, "diagonal": diag},
        "kinks": kernel_kink_report(K),
    }
    path = _emit_kernel(cfg, "kernel", K, extra)
    print(f"kernel written to {path} (iterations={K.meta['iterations']})")
    return EXIT_OK


def cmd_apply(cfg: JobConfig, kernel_file: Optional[Path], fn: str, inverse: bool = False) -> int:
    if kernel_file is not None:
        # an explicit h (flag or job file) overrides the sidecar
        K = read_kernel(kernel_file, h=cfg.h if "h" in cfg.model_fields_set else None)
    else:
        K = solve_kernel(cfg.sample_potential(), cfg.h, **cfg.solver_args)
    u = parse_function(fn, K.grid)
    v = apply_T_inverse(K, u) if inverse else apply_T(K, u)
    path = _write_samples(cfg, "apply_inverse" if inverse else "apply", {"u": v})
    print(f"{'inverse ' if inverse else ''}transmuted {fn} written to {path}")
    return EXIT_OK


def cmd_darboux(cfg: JobConfig, rungs: int, h_chain: Sequence[complex] = ()) -> int:
    grid = cfg.grid
    if cfg.potential in ("zero", "rational_n"):
        start = cfg.order if cfg.potential == "rational_n" else 0
        ladder = rational_ladder(grid, start + rungs)[start:]
    else:
        slopes = list(h_chain) or [cfg.h] * rungs
        if len(slopes) != rungs:
            raise ConfigError(f"--h-chain gives {len(slopes)} slopes for {rungs} rungs")
        ladder = darboux_ladder(cfg.sample_potential(grid), [cfg.h] + slopes, **cfg.solver_args)
    report = []
    for offset, rung in enumerate(ladder[1:], start=1):
        label = f"rung{ladder[0].index + offset}"
        residual = goursat_residual(rung.kernel, rung.q)
        _emit_kernel(cfg, f"{label}_kernel", rung.kernel, {"goursat_residual": residual})
        _write_samples(cfg, f"{label}_q", {"q": rung.q})
        report.append({"rung": label, "h": rung.kernel.h, "goursat_residual": residual})
    write_json(cfg.output_dir / "darboux_report.json", {"rungs": report})
    print(f"{len(report)} Darboux rung(s) written to {cfg.output_dir}")
    return EXIT_OK


def cmd_formal_powers(cfg: JobConfig, x0: float = 0.0) -> int:
    p = build_potential(cfg.sample_potential(), h=cfg.h)
    table = build_table(p, x0=x0, k_max=cfg.k_max)
    path = _out(cfg, "formal_powers")
    if cfg.format == "json":
        phi = [u.values for u in table.phi]
        psi = [u.values for u in table.psi]
        write_json(path, {"x": table.grid.nodes, "phi": phi, "psi": psi})
    else:
        write_table_csv(path, table)
    print(f"formal powers 0..{cfg.k_max} written to {path}")
    return EXIT_OK


def cmd_spps(cfg: JobConfig, lams: Sequence[complex]) -> int:
    q = cfg.sample_potential()
    p = build_potential(q, h=cfg.h)
    curves, residuals = {}, {}
    for index, lam in enumerate(lams):
        u1, u2 = spps_solution(p, lam, max(cfg.k_max, 1))
        curves[f"u1_{index}"], curves[f"u2_{index}"] = u1, u2
        residuals[str(complex(lam))] = max(ode_residual(u1, q, lam), ode_residual(u2, q, lam))
    path = _write_samples(cfg, "spps", curves)
    report = {"lambda": list(lams), "ode_residual": residuals}
    write_json(cfg.output_dir / "spps_report.json", report)
    print(f"SPPS solutions for {len(lams)} lambda value(s) written to {path}")
    return EXIT_OK


def cmd_dirac(
    cfg: JobConfig,
    mass: float,
    scalar: str,
    energies: Sequence[complex],
    c1: complex = 1.0,
    c2: complex = 0.0,
) -> int:
    grid = cfg.grid
    dcfg = DiracConfig(grid, mass, parse_scalar(scalar, grid), tuple(energies))
    pair, K1, K2 = dirac_kernels(dcfg, **cfg.solver_args)
    _emit_kernel(cfg, "dirac_K1", K1, {})
    _emit_kernel(cfg, "dirac_K2", K2, {})
    report = []
    for index, E in enumerate(dcfg.E):
        psi = dirac_transmute(K1, K2, free_dirac_solution(E, c1, c2, grid))
        if cfg.format == "json":
            spinor = {"x": grid.nodes, "psi1": psi.psi1.values, "psi2": psi.psi2.values}
            write_json(_out(cfg, f"dirac_E{index}"), spinor)
        else:
            write_spinor_csv(_out(cfg, f"dirac_E{index}"), psi)
        report.append({"E": E, "residual": dirac_residual(dcfg, psi, E)})
    write_json(cfg.output_dir / "dirac_report.json", {"h": pair.h, "spinors": report})
    print(f"{len(report)} Dirac spinor(s) written to {cfg.output_dir}")
    return EXIT_OK


def cmd_reference(cfg: JobConfig) -> int:
    grid = cfg.grid
    written = []
    for name, ref in sorted(REFERENCE_KERNELS.items()):
        if grid.a >= ref.a_max:
            logger.info(f"[CLI] skipping {name}: defined for a < {ref.a_max}")
            continue
        _emit_kernel(cfg, f"reference_{name}", ref.on_grid(grid), {"q": ref.q_description})
        written.append(name)
    print(f"reference kernels written: {', '.join(written) or 'none'}")
    return EXIT_OK


def cmd_verify(cfg: JobConfig, suite: str, corrupt: float = 0.0) -> int:
    metrics_collector.reset()
    report = run_suite(suite, corrupt=corrupt)
    write_json(cfg.output_dir / "verify_report.json", report)
    write_json(cfg.output_dir / "verify_metrics.json", metrics_collector.get_metrics())
    for check in report["checks"]:
        status = "ok  " if check["passed"] else "FAIL"
        print(f"{status} {check['name']:<34} {check['residual']} <= {check['tolerance']:g}")
    print(f"{report['passed']}/{len(report['checks'])} checks passed")
    return EXIT_OK if report["ok"] else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

_JOB_FLAGS = {
    "builtin": "potential",
    "order": "order",
    "q": "q",
    "potential_file": "potential_file",
    "a": "a",
    "n": "n_points",
    "h": "h",
    "k_max": "k_max",
    "tol": "tol",
    "max_iter": "max_iter",
    "m_points": "m_points",
    "output_dir": "output_dir",
    "format": "format",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    job = common.add_argument_group("job")
    job.add_argument("--config", type=Path, default=None, help="Job file (.json / .yaml)")
    job.add_argument("--builtin", choices=BUILTINS, default=None, help="Builtin potential")
    job.add_argument("--order", type=int, default=None, help="rational_n order")
    job.add_argument("--q", default=None, help="const_q value")
    job.add_argument("--potential-file", type=Path, default=None, help="x,re,im samples of q")
    job.add_argument("--a", type=float, default=None, help="Half-width of [-a, a]")
    job.add_argument("--n", type=int, default=None, help="Number of grid points (odd)")
    job.add_argument("--h", default=None, help="Kernel parameter h (complex literal)")
    job.add_argument("--k-max", type=int, default=None, help="Highest formal power / SPPS order")
    job.add_argument("--tol", type=float, default=None, help="Goursat iteration tolerance")
    job.add_argument("--max-iter", type=int, default=None, help="Goursat iteration cap")
    job.add_argument("--m-points", type=int, default=None, help="Characteristic lattice size")
    job.add_argument("--output-dir", type=Path, default=None, help="Output directory")
    job.add_argument("--format", choices=("csv", "json"), default=None)
    job.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    job.add_argument(
        "--settings", type=Path, default=None, help="System config.yaml (solver, logging)"
    )

    parser = argparse.ArgumentParser(
        prog="transmutant", description="Transmutation kernels for 1D Schrodinger operators"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("kernel", parents=[common], help="Solve the Goursat problem for K(x, t; h)")

    apply_p = sub.add_parser("apply", parents=[common], help="Apply T_h or its inverse")
    apply_p.add_argument("--kernel", type=Path, default=None, help="Kernel CSV (else solved)")
    apply_p.add_argument("--fn", default="monomial:0", help="Function spec, e.g. cos:2")
    apply_p.add_argument("--inverse", action="store_true", help="Apply T_h^{-1}")

    darboux_p = sub.add_parser("darboux", parents=[common], help="Darboux kernel ladder")
    darboux_p.add_argument("--rungs", type=int, default=1)
    darboux_p.add_argument("--h-chain", nargs="*", default=(), help="Slope f'(0) per rung")

    powers_p = sub.add_parser("formal-powers", parents=[common], help="Formal powers phi_k, psi_k")
    powers_p.add_argument("--x0", type=float, default=0.0)

    spps_p = sub.add_parser("spps", parents=[common], help="SPPS solutions u1, u2")
    spps_p.add_argument("--lam", nargs="+", default=["-1"], help="Spectral parameter values")

    dirac_p = sub.add_parser("dirac", parents=[common], help="Transmuted Dirac spinors")
    dirac_p.add_argument("--m", type=float, default=1.0, help="Mass (> 0)")
    dirac_p.add_argument("--S", default="zero", help="zero, const:v, tanh, file:path")
    dirac_p.add_argument("--E", nargs="+", default=["1"], help="Energies")
    dirac_p.add_argument("--c1", default="1")
    dirac_p.add_argument("--c2", default="0")

    sub.add_parser("reference", parents=[common], help="Dump closed-form reference kernels")

    verify_p = sub.add_parser("verify", parents=[common], help="Run the invariant suite")
    verify_p.add_argument("--suite", choices=SUITES, default="rational")
    verify_p.add_argument("--corrupt", type=float, default=0.0, help="Perturb the kernel")
    return parser


def job_from_args(args: argparse.Namespace) -> JobConfig:
    data: Dict[str, Any] = load_job_file(args.config) if args.config else {}
    for flag, key in _JOB_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    try:
        return JobConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid job configuration: {e}") from e


def _complex_list(values: Sequence[str]) -> List[complex]:
    try:
        return [_parse_complex(v) for v in values]
    except ValueError as e:
        raise ConfigError(str(e)) from e


def dispatch(args: argparse.Namespace, cfg: JobConfig) -> int:
    command = args.command
    if command == "kernel":
        return cmd_kernel(cfg)
    if command == "apply":
        return cmd_apply(cfg, args.kernel, args.fn, args.inverse)
    if command == "darboux":
        if args.rungs < 1:
            raise ConfigError(f"--rungs must be >= 1, got {args.rungs}")
        return cmd_darboux(cfg, args.rungs, _complex_list(args.h_chain))
    if command == "formal-powers":
        return cmd_formal_powers(cfg, args.x0)
    if command == "spps":
        return cmd_spps(cfg, _complex_list(args.lam))
    if command == "dirac":
        c1, c2 = _complex_list([args.c1, args.c2])
        return cmd_dirac(cfg, args.m, args.S, _complex_list(args.E), c1, c2)
    if command == "reference":
        return cmd_reference(cfg)
    return cmd_verify(cfg, args.suite, args.corrupt)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, execute, and map exceptions to the exit-code contract."""
    args = build_parser().parse_args(argv)
    try:
        if args.settings:
            if not args.settings.exists():
                raise ConfigError(f"settings file {args.settings} not found")
            config.reload(args.settings)
        if args.settings or args.log_level:
            setup_logging(level=args.log_level)
        cfg = job_from_args(args)
        logger.debug(f"[CLI] {args.command}: {to_jsonable(cfg.model_dump())}")
        return dispatch(args, cfg)
    except TransmutantError as e:
        logger.error(f"[CLI] {args.command} failed: {e}")
        return e.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
