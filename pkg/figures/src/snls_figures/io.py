"""Manifest and CSV readers for snls run directories.

Everything here works off the documented file formats only; nothing is
recomputed from simulator internals. Inputs are checksum-validated against
the manifest before any figure is drawn.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np


class StaleDataError(RuntimeError):
    """A file in the run directory does not match its manifest checksum."""


class SchemaError(RuntimeError):
    """A CSV is missing, empty, or its columns do not match the documented schema."""


TIMESERIES_COLUMNS = ["t", "mass", "energy", "h1_norm", "xgamma_norm", "f_norm", "proj_loss_cum"]
MOMENTS_COLUMNS = ["n", "q", "selector", "estimate", "ci_half_width", "ensemble"]
CONVERGENCE_COLUMNS = ["dt", "err_splitting", "err_ito_euler"]
ALDOUS_COLUMNS = ["delta", "median_statistic", "tail_frequency"]


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def load_manifest(manifest_path: str) -> tuple[dict, str]:
    """Load manifest.json (a file path or its run directory) and verify checksums."""
    if os.path.isdir(manifest_path):
        manifest_path = os.path.join(manifest_path, "manifest.json")
    if not os.path.isfile(manifest_path):
        raise SchemaError(f"manifest not found: {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    run_dir = os.path.dirname(os.path.abspath(manifest_path))
    checksums = manifest.get("checksums", {})
    for name, digest in checksums.items():
        fpath = os.path.join(run_dir, name)
        if not os.path.isfile(fpath):
            raise StaleDataError(f"{name}: listed in manifest but missing on disk")
        if _sha256(fpath) != digest:
            raise StaleDataError(f"{name}: checksum mismatch (stale or edited data)")
    manifest["_run_dir"] = run_dir
    return manifest, run_dir


def read_csv(path: str, expected_columns: list[str]) -> dict[str, np.ndarray]:
    """Parse a documented CSV into column arrays, strict about the header."""
    if not os.path.isfile(path):
        raise SchemaError(f"missing input file {os.path.basename(path)}")
    with open(path) as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines:
        raise SchemaError(f"{os.path.basename(path)}: empty file")
    header = lines[0].split(",")
    if header != expected_columns:
        raise SchemaError(
            f"{os.path.basename(path)}: columns {header} do not match schema {expected_columns}"
        )
    if len(lines) == 1:
        raise SchemaError(f"{os.path.basename(path)}: no data rows")
    cols: dict[str, list] = {c: [] for c in header}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise SchemaError(f"{os.path.basename(path)}: ragged row {ln!r}")
        for c, v in zip(header, parts):
            cols[c].append(v)
    out: dict[str, np.ndarray] = {}
    for c, vals in cols.items():
        try:
            out[c] = np.array([float(v) for v in vals])
        except ValueError:
            out[c] = np.array(vals)  # non-numeric column (e.g. selector)
    return out


def timeseries_files(manifest: dict, run_dir: str) -> list[str]:
    names = sorted(n for n in manifest.get("checksums", {}) if n.startswith("path_") and n.endswith(".csv"))
    if not names:
        raise SchemaError("run directory contains no time-series CSVs")
    return [os.path.join(run_dir, n) for n in names]
