"""
CSV / JSON writers and readers.

Floats are written with `export.significant_digits` significant digits
(17 by default, enough to round-trip doubles); JSON keys are sorted so that
identical inputs produce byte-identical files.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np

from .config_loader import config
from .errors import ConfigError
from .goursat import KtSource, Provenance, TransmutationKernel
from .grid import Samples, make_grid


def _fmt() -> str:
    return f"%.{int(config.get('export.significant_digits', 17))}g"


def _write_table(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([np.asarray(col, dtype=float).ravel() for col in columns])
    np.savetxt(path, data, fmt=_fmt(), delimiter=",", header=",".join(header), comments="")
    return path


def to_jsonable(value: Any) -> Any:
    """Complex numbers become Python complex literals, arrays become lists."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return str(complex(value))
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    return value


def write_json(path: Path, data: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(data), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def kernel_metadata(K: TransmutationKernel) -> Dict[str, Any]:
    return {
        "a": K.grid.a,
        "n_points": K.grid.n_points,
        "h": K.h,
        "provenance": K.provenance,
        "kt_source": K.kt_source,
        "chain": list(K.chain),
        **K.meta,
    }


def write_kernel_csv(path: Path, K: TransmutationKernel) -> Path:
    """Row-major `x,t,re_K,im_K,re_Kt,im_Kt`; Kt columns are nan when absent."""
    X, T = np.meshgrid(K.grid.nodes, K.grid.nodes, indexing="ij")
    Kt = K.Kt if K.Kt is not None else np.full(K.K.shape, np.nan + 0j)
    return _write_table(
        path,
        ("x", "t", "re_K", "im_K", "re_Kt", "im_Kt"),
        (X, T, K.K.real, K.K.imag, Kt.real, Kt.imag),
    )


def write_kernel(path: Path, K: TransmutationKernel, extra: Dict[str, Any] = None) -> Path:
    """Kernel CSV plus a metadata JSON sidecar with the same stem."""
    path = Path(path)
    write_kernel_csv(path, K)
    write_json(path.with_suffix(".json"), {**kernel_metadata(K), **(extra or {})})
    return path


def read_kernel(path: Path, h: complex = None) -> TransmutationKernel:
    """Load a kernel CSV; h comes from the sidecar JSON unless given."""
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read kernel file {path}: {e}") from e
    n = int(round(np.sqrt(data.shape[0])))
    if n * n != data.shape[0] or data.shape[1] != 6:
        raise ConfigError(f"{path} is not a square kernel table")
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else {}
    if h is None:
        if "h" not in meta:
            raise ConfigError(f"h unknown for {path}: no sidecar metadata and no --h given")
        h = complex(meta["h"])
    grid = make_grid(float(np.max(data[:, 0])), n)
    K = (data[:, 2] + 1j * data[:, 3]).reshape(n, n)
    Kt = (data[:, 4] + 1j * data[:, 5]).reshape(n, n)
    has_kt = bool(np.all(np.isfinite(Kt)))
    return TransmutationKernel(
        grid=grid,
        h=h,
        K=K,
        Kt=Kt if has_kt else None,
        provenance=Provenance(meta.get("provenance", Provenance.CLOSED_FORM.value)),
        kt_source=KtSource(meta["kt_source"]) if has_kt and meta.get("kt_source") else None,
        chain=tuple(meta.get("chain", ())) + ("file",),
    )


def write_curve_csv(path: Path, u: Samples) -> Path:
    return _write_table(path, ("x", "re", "im"), (u.grid.nodes, u.values.real, u.values.imag))


def write_curves_csv(path: Path, curves: Dict[str, Samples]) -> Path:
    """Several curves on one grid: `x,<name>_re,<name>_im,...`."""
    grid = next(iter(curves.values())).grid
    header, columns = ["x"], [grid.nodes]
    for name, u in curves.items():
        header += [f"{name}_re", f"{name}_im"]
        columns += [u.values.real, u.values.imag]
    return _write_table(path, header, columns)


def write_table_csv(path: Path, table) -> Path:
    """Formal powers `x,phi0_re,phi0_im,...,psi0_re,psi0_im,...`."""
    header, columns = ["x"], [table.grid.nodes]
    for family in ("phi", "psi"):
        for k, u in enumerate(getattr(table, family)):
            header += [f"{family}{k}_re", f"{family}{k}_im"]
            columns += [u.values.real, u.values.imag]
    return _write_table(path, header, columns)


def write_spinor_csv(path: Path, psi) -> Path:
    p1, p2 = psi.psi1.values, psi.psi2.values
    return _write_table(
        path,
        ("x", "re_psi1", "im_psi1", "re_psi2", "im_psi2"),
        (psi.grid.nodes, p1.real, p1.imag, p2.real, p2.imag),
    )
