"""The five figure kinds, each with a numbers sidecar.

Figures never recompute simulation quantities: they re-aggregate CSV values,
and every plotted aggregate is written to `<image>.txt` so it can be
re-derived without image inspection. Style is fixed (Agg, 150 dpi) so output
is deterministic for identical inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import (
    ALDOUS_COLUMNS,
    CONVERGENCE_COLUMNS,
    MOMENTS_COLUMNS,
    TIMESERIES_COLUMNS,
    SchemaError,
    load_manifest,
    read_csv,
    timeseries_files,
)

KINDS = ("mass", "energy", "moments", "order", "aldous")

_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "lines.linewidth": 1.2,
}


@dataclass(frozen=True)
class FigureSpec:
    manifest: str
    kind: str
    out: str
    dpi: int = 150
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_sidecar(out_path: str, header: list[str], rows: list[list], extra: dict) -> str:
    sidecar = out_path + ".txt"
    lines = [f"# {k} = {v}" for k, v in extra.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    with open(sidecar, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return sidecar


def _save(fig, spec: FigureSpec):
    fig.savefig(spec.out, dpi=spec.dpi, metadata={"Software": None})
    plt.close(fig)


def render(spec: FigureSpec) -> tuple[str, str]:
    """Render one figure; returns (image path, sidecar path)."""
    manifest, run_dir = load_manifest(spec.manifest)
    with plt.rc_context(_RC):
        return _RENDERERS[spec.kind](spec, manifest, run_dir)


def _render_mass(spec, manifest, run_dir):
    fig, ax = plt.subplots()
    rows = []
    for path in timeseries_files(manifest, run_dir):
        cols = read_csv(path, TIMESERIES_COLUMNS)
        t, m = cols["t"], cols["mass"]
        drift = np.abs(m - m[0]) / m[0]
        label = os.path.basename(path).removesuffix(".csv")
        ax.semilogy(t, np.maximum(drift, 1e-18), label=label)
        rows.append([label, float(np.max(drift)), float(m[0]), float(m[-1])])
    ax.set_xlabel("t")
    ax.set_ylabel("relative mass drift")
    ax.set_title(spec.title or "mass drift |m(t)-m(0)|/m(0)")
    if len(rows) <= 8:
        ax.legend(fontsize=7)
    _save(fig, spec)
    sidecar = _write_sidecar(spec.out, ["path", "max_drift_rel", "mass_initial", "mass_final"],
                             rows, {"kind": "mass", "max_drift_overall": _fmt(max(r[1] for r in rows))})
    return spec.out, sidecar


def _render_energy(spec, manifest, run_dir):
    fig, ax = plt.subplots()
    rows = []
    for path in timeseries_files(manifest, run_dir):
        cols = read_csv(path, TIMESERIES_COLUMNS)
        t, e = cols["t"], cols["energy"]
        label = os.path.basename(path).removesuffix(".csv")
        ax.plot(t, e, label=label)
        rows.append([label, float(e.min()), float(e.max()), float(e[-1])])
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title(spec.title or "energy trajectories")
    if len(rows) <= 8:
        ax.legend(fontsize=7)
    _save(fig, spec)
    sidecar = _write_sidecar(spec.out, ["path", "min_energy", "max_energy", "final_energy"],
                             rows, {"kind": "energy", "min_energy_overall": _fmt(min(r[1] for r in rows))})
    return spec.out, sidecar


def _render_moments(spec, manifest, run_dir):
    cols = read_csv(os.path.join(run_dir, "moments.csv"), MOMENTS_COLUMNS)
    n, est, ci = cols["n"], cols["estimate"], cols["ci_half_width"]
    fig, ax = plt.subplots()
    ax.errorbar(n, est, yerr=ci, fmt="o-", capsize=4)
    ax.set_xlabel("truncation level n")
    ax.set_ylabel(f"moment estimate (q={cols['q'][0]:g}, {cols['selector'][0]})")
    ax.set_title(spec.title or "moment estimates vs truncation level")
    flat = manifest.get("flatness", {})
    if flat:
        ax.annotate(
            f"CI overlap: {flat.get('ci_pairwise_overlap')}  MK p = {flat.get('mk_pvalue', float('nan')):.4f}",
            xy=(0.02, 0.02), xycoords="axes fraction", fontsize=8)
    _save(fig, spec)
    rows = [[int(nv), float(e), float(c)] for nv, e, c in zip(n, est, ci)]
    sidecar = _write_sidecar(spec.out, ["n", "estimate", "ci_half_width"], rows,
                             {"kind": "moments",
                              "ci_pairwise_overlap": flat.get("ci_pairwise_overlap"),
                              "mk_pvalue": flat.get("mk_pvalue")})
    return spec.out, sidecar


def _render_order(spec, manifest, run_dir):
    cols = read_csv(os.path.join(run_dir, "convergence.csv"), CONVERGENCE_COLUMNS)
    dt = cols["dt"]
    fig, ax = plt.subplots()
    slopes = {}
    for scheme in ("splitting", "ito_euler"):
        err = cols[f"err_{scheme}"]
        # independent least-squares fit on the same CSV the report used
        slope, intercept = np.polyfit(np.log2(dt), np.log2(err), 1)
        slopes[scheme] = float(slope)
        ax.loglog(dt, err, "o-", base=2, label=f"{scheme} (slope {slope:.3f})")
    ax.set_xlabel("dt")
    ax.set_ylabel("strong error at T")
    ax.set_title(spec.title or "strong convergence order")
    ax.legend(fontsize=8)
    _save(fig, spec)
    rows = [[float(d), float(a), float(b)]
            for d, a, b in zip(dt, cols["err_splitting"], cols["err_ito_euler"])]
    sidecar = _write_sidecar(spec.out, ["dt", "err_splitting", "err_ito_euler"], rows,
                             {"kind": "order",
                              "slope_splitting": _fmt(slopes["splitting"]),
                              "slope_ito_euler": _fmt(slopes["ito_euler"])})
    return spec.out, sidecar


def _render_aldous(spec, manifest, run_dir):
    cols = read_csv(os.path.join(run_dir, "aldous.csv"), ALDOUS_COLUMNS)
    delta, med = cols["delta"], cols["median_statistic"]
    pos = med > 0
    if np.count_nonzero(pos) < 2:
        raise SchemaError("aldous.csv: fewer than two positive median statistics; cannot regress")
    slope, intercept = np.polyfit(np.log2(delta[pos]), np.log2(med[pos]), 1)
    fig, ax = plt.subplots()
    ax.loglog(delta, med, "o", base=2, label="ensemble median")
    fit = 2.0 ** (intercept + slope * np.log2(delta))
    ax.loglog(delta, fit, "--", base=2, label=f"fit slope {slope:.3f}")
    ax.set_xlabel("lag delta")
    ax.set_ylabel("sup-increment statistic")
    ax.set_title(spec.title or "sampled-lag increment statistic")
    ax.legend(fontsize=8)
    _save(fig, spec)
    rows = [[float(d), float(m), float(f)]
            for d, m, f in zip(delta, med, cols["tail_frequency"])]
    sidecar = _write_sidecar(spec.out, ["delta", "median_statistic", "tail_frequency"], rows,
                             {"kind": "aldous", "loglog_slope": _fmt(float(slope))})
    return spec.out, sidecar


_RENDERERS = {
    "mass": _render_mass,
    "energy": _render_energy,
    "moments": _render_moments,
    "order": _render_order,
    "aldous": _render_aldous,
}
