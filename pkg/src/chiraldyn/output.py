"""CSV emission with companion run manifests."""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np

from .config import RunManifest, emit_manifest
from .series import EnsembleResult, TimeSeries

CSV_VERSION_LINE = "# chiraldyn-csv v1"
DELTA_VERSION_LINE = "# chiraldyn-delta-csv v1"
BASE_COLUMNS = ("t", "rho_RR", "rho_LL", "re_rho_LR", "im_rho_LR", "X", "Y", "Z", "purity")
STDERR_COLUMNS = ("stderr_rho_RR", "stderr_purity")
DELTA_COLUMNS = ("t", "delta_Z", "delta_rho_RR", "delta_coherence2", "threshold_rho_RR", "threshold_coherence2")
OUTPUT_DIR_ENV = "CHIRALDYN_OUTPUT_DIR"


def fmt(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _write_rows(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "\n".join(",".join(fmt(c[i]) for c in columns) for i in range(len(columns[0])))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(header) + "\n" + body + "\n")


def csv_columns(result: TimeSeries) -> tuple[list[str], list[np.ndarray]]:
    names = list(BASE_COLUMNS)
    cols = [result.times, result.rho_RR, result.rho_LL, result.rho_LR.real, result.rho_LR.imag,
            result.X, result.Y, result.Z, result.purity]
    if isinstance(result, EnsembleResult):
        names += STDERR_COLUMNS
        cols += [result.stderr["rho_RR"], result.stderr["purity"]]
    return names, cols


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".manifest.ini")


def emit_csv(result: TimeSeries, path, manifest: RunManifest | None = None) -> Path:
    """Write ``result`` as CSV (and ``manifest`` next to it, if given).

    Stochastic results carry two extra standard-error columns.  Output is a
    pure function of the data, so re-emitting gives a byte-identical file.
    """
    path = Path(path)
    names, cols = csv_columns(result)
    _write_rows(path, [CSV_VERSION_LINE, ",".join(names)], cols)
    if manifest is not None:
        with open(manifest_path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(emit_manifest(manifest))
    return path


def emit_delta_csv(report, path) -> Path:
    path = Path(path)
    cols = [report.times, report.delta_Z, report.delta_rho_RR, report.delta_coherence2,
            report.threshold_rho_RR, report.threshold_coherence2]
    _write_rows(path, [DELTA_VERSION_LINE, ",".join(DELTA_COLUMNS)], cols)
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of an emitted CSV keyed by header name."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first not in (CSV_VERSION_LINE, DELTA_VERSION_LINE):
            raise ValueError(f"{path}: unrecognized CSV version line {first!r}")
        names = fh.readline().rstrip("\n").split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


def safe_stem(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=+-]+", "_", label).strip("_") or "base"


def default_output_dir(explicit: str | None = None) -> Path:
    return Path(explicit or os.environ.get(OUTPUT_DIR_ENV) or "chiraldyn_out")
