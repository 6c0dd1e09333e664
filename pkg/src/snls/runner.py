"""Experiment orchestration and persistence.

Writes, per run directory:

* ``path_NNNN.csv``: time series per path (schema: t, mass, energy,
  h1_norm, xgamma_norm, f_norm, proj_loss_cum; 17 significant digits),
* ``summary.csv``: one row per path with sup/final statistics,
* ``moments.csv``: sweep-n moment estimates (sweep runs),
* ``crossn.csv``: pathwise cross-level L2 differences (sweep runs),
* ``convergence.csv``: strong-error table (convergence runs),
* ``aldous.csv``: lag-statistic table (when enabled),
* ``snapshot_*.bin``: binary field snapshots (when configured),
* ``manifest.json``: config echo, seeds, summability, checksums.

Path-level work goes through a bounded worker pool; per-path outputs are
merged in path order, so results are independent of scheduling.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from ._kernels import KERNEL_BACKEND
from .config import RunConfig
from .diagnostics import (
    aldous_statistic,
    aldous_tail_frequency,
    flatness_verdict,
    moment_estimate,
    path_supremum,
    sobolev_norm,
)
from .integrators import (
    CayleyConvergenceError,
    StepperConfig,
    exact_linear_noise_solution,
    init_state,
    run_path,
)
from .noise import IncrementStream
from .snapshots import write_snapshot
from .spectral import Field, l2_norm
from .truncation import (
    TruncationLevel,
    convergence_residual,
    cutoff_p,
    cutoff_s,
    measure_operator_norm,
    pn_mask,
    probe_fields,
    project_Pn,
    smooth_Sn,
)

CSV_COLUMNS = ("t", "mass", "energy", "h1_norm", "xgamma_norm", "f_norm", "proj_loss_cum")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_timeseries_csv(path, records) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(v) for v in (
            r.t, r.mass, r.energy, r.h1_norm, r.xgamma_norm, r.f_norm, r.proj_loss_cum)))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _platform_fingerprint() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "kernel_backend": KERNEL_BACKEND,
    }


def write_manifest(out_dir, config: RunConfig, extra: dict, started: float) -> dict:
    files = sorted(
        f for f in os.listdir(out_dir)
        if f != "manifest.json" and os.path.isfile(os.path.join(out_dir, f))
    )
    manifest = {
        "config": config.raw,
        "code_version": __version__,
        "fingerprint": _platform_fingerprint(),
        "per_path_seeds": [[config.seed, p] for p in range(config.paths)],
        "wall_clock_seconds": time.time() - started,
        "checksums": {f: _sha256(os.path.join(out_dir, f)) for f in files},
    }
    manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# -- single-path worker -------------------------------------------------------


def _snapshot_steps(config: RunConfig) -> tuple[int, ...]:
    steps = []
    for t in config.snapshot_times:
        k = round(t / config.stepper.dt)
        if not 0 <= k <= config.stepper.steps:
            raise ValueError(f"snapshot time {t} outside the horizon")
        steps.append(int(k))
    return tuple(steps)


def _run_one_path(args) -> dict:
    """Worker: integrate one path and reduce it to rows + summary statistics."""
    config, level_n, path_index, keep_fields = args
    stepper = StepperConfig(
        scheme=config.stepper.scheme,
        dt=config.stepper.dt,
        horizon=config.stepper.horizon,
        level=TruncationLevel(level_n),
        dealias=config.stepper.dealias,
        cayley_tol=config.stepper.cayley_tol,
        cayley_max_iter=config.stepper.cayley_max_iter,
    )
    grid = config.grid
    model = config.build_noise(grid)
    u0 = config.build_initial(grid)
    stream = IncrementStream(config.seed, path_index, stepper.dt, stepper.steps, model.mode_count)
    traj = run_path(
        u0,
        stepper,
        model,
        config.nonlinearity,
        stream,
        sample_every=config.sample_every,
        gamma=config.gamma,
        keep_fields=keep_fields,
        snapshot_steps=_snapshot_steps(config),
        path_index=path_index,
    )
    recs = traj.records
    summary = {
        "path": path_index,
        "mass_initial": recs[0].mass,
        "mass_final": recs[-1].mass,
        "mass_drift_rel": max(abs(r.mass - recs[0].mass) for r in recs) / recs[0].mass
        if recs[0].mass > 0
        else 0.0,
        "sup_mass": path_supremum(recs, "mass"),
        "sup_energy": path_supremum(recs, "energy"),
        "sup_h1": path_supremum(recs, "h1"),
        "sup_xgamma": path_supremum(recs, "xgamma"),
        "sup_f_norm": path_supremum(recs, "f_norm"),
        "min_energy": min(r.energy for r in recs),
        "proj_loss_final": recs[-1].proj_loss_cum,
    }
    out = {"records": recs, "summary": summary, "snapshots": list(zip(traj.snapshot_times, traj.snapshots))}
    if keep_fields:
        out["times"] = np.asarray(traj.times)
        out["fields"] = traj.fields
    return out


def _pool_map(fn, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ValueError("--threads must be >= 0")
    return threads if threads > 0 else (os.cpu_count() or 1)


SUMMARY_COLUMNS = (
    "path", "mass_initial", "mass_final", "mass_drift_rel", "sup_mass", "sup_energy",
    "sup_h1", "sup_xgamma", "sup_f_norm", "min_energy", "proj_loss_final",
)


def _write_summary_csv(path, summaries) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for s in summaries:
        lines.append(",".join(_fmt(s[c]) if c != "path" else str(s[c]) for c in SUMMARY_COLUMNS))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- run ----------------------------------------------------------------------


def run_ensemble(config: RunConfig, out_dir, threads: int = 1, quiet: bool = False) -> dict:
    started = time.time()
    os.makedirs(out_dir, exist_ok=True)
    keep_fields = config.retain_fields or config.aldous.enabled
    jobs = [(config, config.stepper.level.n, p, keep_fields) for p in range(config.paths)]
    try:
        results = _pool_map(_run_one_path, jobs, threads)
    except CayleyConvergenceError as exc:
        manifest = write_manifest(out_dir, config, {
            "failure": {
                "kind": "cayley_nonconvergence",
                "message": str(exc),
                "step_index": exc.step_index,
                "path_index": exc.path_index,
            },
        }, started)
        raise

    for p, res in enumerate(results):
        write_timeseries_csv(os.path.join(out_dir, f"path_{p:04d}.csv"), res["records"])
        for t, spec in res["snapshots"]:
            f = Field(config.grid, spec, "spectral", _validate=False)
            write_snapshot(os.path.join(out_dir, f"snapshot_p{p:04d}_t{t:.6f}.bin"), f)
    _write_summary_csv(os.path.join(out_dir, "summary.csv"), [r["summary"] for r in results])

    extra: dict = {"summability": config.build_noise().summability_report()}
    if config.aldous.enabled:
        stats = np.zeros((config.paths, len(config.aldous.deltas)))
        for p, res in enumerate(results):
            for j, delta in enumerate(config.aldous.deltas):
                stats[p, j] = aldous_statistic(
                    res["times"], res["fields"], config.grid, delta, config.aldous.gamma)
        lines = ["delta,median_statistic,tail_frequency"]
        for j, delta in enumerate(config.aldous.deltas):
            med = float(np.median(stats[:, j]))
            tail = aldous_tail_frequency(stats[:, j], config.aldous.eta)
            lines.append(f"{_fmt(delta)},{_fmt(med)},{_fmt(tail)}")
        with open(os.path.join(out_dir, "aldous.csv"), "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        medians = np.median(stats, axis=0)
        pos = medians > 0
        if np.sum(pos) >= 2:
            slope = float(np.polyfit(np.log2(np.asarray(config.aldous.deltas)[pos]),
                                     np.log2(medians[pos]), 1)[0])
        else:
            slope = float("nan")
        extra["aldous"] = {"gamma": config.aldous.gamma, "eta": config.aldous.eta,
                           "loglog_slope": slope}

    manifest = write_manifest(out_dir, config, extra, started)
    if not quiet:
        drift = max(r["summary"]["mass_drift_rel"] for r in results)
        print(f"run: {config.paths} path(s), {config.stepper.steps} steps, "
              f"max relative mass drift {drift:.3e}")
    return manifest


# -- sweep-n ------------------------------------------------------------------


def run_sweep(config: RunConfig, out_dir, threads: int = 1, quiet: bool = False,
              moment_order: float = 2.0, moment_selector: str = "h1") -> dict:
    if not config.sweep:
        raise ValueError("sweep requires [truncation] sweep")
    started = time.time()
    os.makedirs(out_dir, exist_ok=True)
    levels = list(config.sweep)
    per_level: dict[int, list] = {}
    final_fields: dict[int, list[np.ndarray]] = {}
    for n in levels:
        jobs = [(config, n, p, True) for p in range(config.paths)]
        results = _pool_map(_run_one_path, jobs, threads)
        per_level[n] = results
        final_fields[n] = [res["fields"][-1] for res in results]
        for p, res in enumerate(results):
            write_timeseries_csv(os.path.join(out_dir, f"path_n{n:02d}_{p:04d}.csv"), res["records"])

    estimates = []
    lines = ["n,q,selector,estimate,ci_half_width,ensemble"]
    for n in levels:
        sups = np.array([path_supremum(r["records"], moment_selector) for r in per_level[n]])
        est = moment_estimate(sups, moment_order, n, seed=config.seed)
        estimates.append(est)
        lines.append(f"{n},{_fmt(moment_order)},{moment_selector},{_fmt(est.estimate)},"
                     f"{_fmt(est.ci_half_width)},{est.ensemble}")
    with open(os.path.join(out_dir, "moments.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    # pathwise cross-level differences at the final time (shared driving noise)
    lines = ["n_a,n_b,mean_l2_diff,max_l2_diff"]
    for i, na in enumerate(levels):
        for nb in levels[i + 1:]:
            diffs = [
                float(np.sqrt(np.sum(np.abs(a - b) ** 2)))
                for a, b in zip(final_fields[na], final_fields[nb])
            ]
            lines.append(f"{na},{nb},{_fmt(float(np.mean(diffs)))},{_fmt(float(np.max(diffs)))}")
    with open(os.path.join(out_dir, "crossn.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    verdict = flatness_verdict(estimates)
    min_energy = min(r["summary"]["min_energy"] for n in levels for r in per_level[n])
    extra = {
        "sweep_levels": levels,
        "moment": {"order": moment_order, "selector": moment_selector},
        "flatness": verdict,
        "min_energy": min_energy,
        "summability": config.build_noise().summability_report(),
    }
    manifest = write_manifest(out_dir, config, extra, started)
    if not quiet:
        print(f"sweep-n over {levels}: flatness "
              f"{'PASS' if verdict['passed'] else 'FAIL'} "
              f"(MK p={verdict['mk_pvalue']:.4f}, CI overlap={verdict['ci_pairwise_overlap']})")
    return manifest


# -- convergence --------------------------------------------------------------


def run_convergence(config: RunConfig, out_dir, threads: int = 1, quiet: bool = False) -> dict:
    """Strong-error study against the pathwise linear-noise oracle.

    Requires F disabled and a single constant noise coefficient; runs the
    splitting and ito_euler schemes over dt = 2^-e for the configured
    exponents, with shared increments per (path, dt).
    """
    if config.nonlinearity is not None:
        raise ValueError("convergence study requires [nonlinearity] enabled = false")
    if config.noise_modes != 1 or config.noise_family != "constant":
        raise ValueError("convergence study requires a single constant noise coefficient")
    started = time.time()
    os.makedirs(out_dir, exist_ok=True)
    grid = config.grid
    model = config.build_noise(grid)
    c = config.noise_amplitude
    u0 = config.build_initial(grid)
    level = config.stepper.level
    T = config.stepper.horizon
    u0n = init_state(u0, level)

    schemes = ("splitting", "ito_euler")
    dts = [2.0**-e for e in config.dt_exponents]
    mean_errors = {s: [] for s in schemes}
    for dt in dts:
        steps = int(round(T / dt))
        per_scheme = {s: [] for s in schemes}
        for p in range(config.paths):
            stream = IncrementStream(config.seed, p, dt, steps, 1)
            beta_final = float(stream.brownian_values()[-1, 0])
            exact = exact_linear_noise_solution(u0n, T, beta_final, c).to_spectral().data
            for s in schemes:
                stepper = StepperConfig(scheme=s, dt=dt, horizon=T, level=level,
                                        cayley_tol=config.stepper.cayley_tol,
                                        cayley_max_iter=config.stepper.cayley_max_iter)
                traj = run_path(u0, stepper, model, None, stream,
                                sample_every=steps, gamma=config.gamma,
                                keep_fields=True, path_index=p)
                final = traj.fields[-1]
                per_scheme[s].append(float(np.sqrt(np.sum(np.abs(final - exact) ** 2))))
        for s in schemes:
            mean_errors[s].append(float(np.mean(per_scheme[s])))

    slopes = {}
    log_dt = np.log2(dts)
    for s in schemes:
        slopes[s] = float(np.polyfit(log_dt, np.log2(mean_errors[s]), 1)[0])

    lines = ["dt,err_splitting,err_ito_euler"]
    for i, dt in enumerate(dts):
        lines.append(f"{_fmt(dt)},{_fmt(mean_errors['splitting'][i])},{_fmt(mean_errors['ito_euler'][i])}")
    with open(os.path.join(out_dir, "convergence.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    extra = {
        "convergence": {
            "dt": dts,
            "errors": mean_errors,
            "slopes": slopes,
            "paths": config.paths,
            "noise_amplitude": c,
        },
    }
    manifest = write_manifest(out_dir, config, extra, started)
    if not quiet:
        print("convergence: slope splitting "
              f"{slopes['splitting']:.3f}, ito_euler {slopes['ito_euler']:.3f}")
        for i, dt in enumerate(dts):
            print(f"  dt=2^-{config.dt_exponents[i]}: splitting {mean_errors['splitting'][i]:.3e}"
                  f"  ito_euler {mean_errors['ito_euler'][i]:.3e}")
    return manifest


# -- operator tests -------------------------------------------------------------


def run_operator_tests(config: RunConfig, out_dir, quiet: bool = False,
                       levels: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8, 9, 10),
                       probes: int = 100) -> dict:
    """Exact multiplier checks for every operator bound, plus measured constants."""
    started = time.time()
    os.makedirs(out_dir, exist_ok=True)
    grid = config.grid
    seed = config.seed
    alpha = config.nonlinearity.alpha if config.nonlinearity is not None else 3.0
    lam_max = grid.symbols.max_lam_s
    checks = []

    def add(name, passed, measured, bound):
        checks.append({"name": name, "passed": bool(passed),
                       "measured": float(measured), "bound": float(bound)})

    active = [n for n in levels if TruncationLevel(n).is_active(grid)]
    n_ref = active[len(active) // 2] if active else levels[0]
    lvl = TruncationLevel(n_ref)

    # idempotence / composition identities, bit-exact in spectral coefficients
    probes_list = list(probe_fields(grid, 12, seed))
    spectral_probes = [f.to_spectral() for f in probes_list]
    exact_idem = all(
        np.array_equal(project_Pn(project_Pn(f, lvl), lvl).data, project_Pn(f, lvl).data)
        for f in spectral_probes
    )
    add("Pn_idempotent_bitexact", exact_idem, float(exact_idem), 1.0)
    exact_ps = all(
        np.array_equal(project_Pn(smooth_Sn(f, lvl), lvl).data, smooth_Sn(f, lvl).data)
        for f in spectral_probes
    )
    add("PnSn_equals_Sn_bitexact", exact_ps, float(exact_ps), 1.0)
    nested = all(
        np.array_equal(project_Pn(project_Pn(f, TruncationLevel(n_ref + 1)), lvl).data,
                       project_Pn(f, lvl).data)
        for f in spectral_probes
    )
    add("Pn_nesting_bitexact", nested, float(nested), 1.0)

    # contraction of S_n on L2 over random probes
    ratio = measure_operator_norm(lambda f: smooth_Sn(f, lvl), grid, 2.0, probes, seed)
    add("Sn_L2_contraction", ratio <= 1.0 + 1e-12, ratio, 1.0)

    # Bernstein smoothing bounds: multiplier sup checks are exact arithmetic
    sup_half = float(np.max(np.sqrt(grid.symbols.lam_s) * pn_mask(grid, n_ref)))
    add("Pn_H_to_EA_multiplier_sup", sup_half <= 2.0 ** ((n_ref + 1) / 2.0),
        sup_half, 2.0 ** ((n_ref + 1) / 2.0))
    sup_full = float(np.max(grid.symbols.lam_a * pn_mask(grid, n_ref)))
    add("APn_multiplier_sup", sup_full <= 2.0 ** (n_ref + 1), sup_full, 2.0 ** (n_ref + 1))
    worst = 0.0
    for f in probes_list:
        spec = f.to_spectral()
        denom = l2_norm(spec)
        if denom == 0:
            continue
        num = sobolev_norm(project_Pn(spec, lvl), 0.5)
        worst = max(worst, num / denom)
    add("Bernstein_probe_ratio", worst <= 2.0 ** ((n_ref + 1) / 2.0) * (1 + 1e-12),
        worst, 2.0 ** ((n_ref + 1) / 2.0))

    # pointwise sandwich 0 <= s_n <= p_n <= 1 over a dense lambda sweep
    lam_sweep = np.linspace(1e-6, max(4.0 * lvl.upper, lam_max), 10_000)
    s_vals = np.asarray(cutoff_s(lam_sweep, lvl))
    p_vals = np.asarray(cutoff_p(lam_sweep, lvl))
    sandwich = bool(np.all((0.0 <= s_vals) & (s_vals <= p_vals) & (p_vals <= 1.0)))
    add("sn_pn_sandwich", sandwich, float(sandwich), 1.0)
    add("pn_sn_product_identity", bool(np.allclose(p_vals * s_vals, s_vals, rtol=0, atol=0)),
        1.0, 1.0)

    # convergence residuals on a bump across levels: decreasing, -> 0 once inactive
    bump = Field.physical(grid, config.build_initial(grid).to_physical().data)
    residuals = []
    for n in levels:
        rp, rs = convergence_residual(bump, TruncationLevel(n), theta=0.0)
        residuals.append({"n": n, "pn_residual": rp, "sn_residual": rs})
    dec = all(residuals[i + 1]["pn_residual"] <= residuals[i]["pn_residual"] + 1e-300
              for i in range(len(residuals) - 1))
    inactive = [r for r in residuals if 2.0 ** (r["n"] + 1) > lam_max]
    vanish = all(r["pn_residual"] <= 1e-10 and r["sn_residual"] <= 1e-10 for r in inactive)
    add("Pn_residual_monotone", dec, float(dec), 1.0)
    add("residual_vanishes_when_inactive", vanish if inactive else True, float(vanish), 1e-10)

    # measured L^{alpha+1} norms of S_n across the sweep (lower bounds, recorded)
    lp = alpha + 1.0
    sweep_norms = []
    for n in levels:
        val = measure_operator_norm(lambda f, n=n: smooth_Sn(f, TruncationLevel(n)),
                                    grid, lp, max(10, probes // 2), seed + n)
        sweep_norms.append({"n": n, "norm_lower_bound": val})
    values = [s["norm_lower_bound"] for s in sweep_norms]
    add("Sn_Lp_uniformly_bounded", max(values) <= 2.0, max(values), 2.0)

    report = {
        "grid": {"dimension": grid.dimension, "points": grid.points, "length": grid.length},
        "reference_level": n_ref,
        "levels": list(levels),
        "alpha": alpha,
        "probe_seed": seed,
        "checks": checks,
        "residuals": residuals,
        "sn_lp_norms": sweep_norms,
        "all_passed": all(c["passed"] for c in checks),
    }
    with open(os.path.join(out_dir, "operator_tests.json"), "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out_dir, config, {"operator_tests": report["all_passed"]}, started)
    if not quiet:
        for c in checks:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"  [{status}] {c['name']}: measured {c['measured']:.6g} (bound {c['bound']:.6g})")
    return report


# -- report ---------------------------------------------------------------------


def verify_manifest(out_dir) -> tuple[dict, list[str]]:
    path = os.path.join(out_dir, "manifest.json")
    with open(path) as fh:
        manifest = json.load(fh)
    mismatches = []
    for name, digest in manifest.get("checksums", {}).items():
        fpath = os.path.join(out_dir, name)
        if not os.path.isfile(fpath):
            mismatches.append(f"missing file {name}")
        elif _sha256(fpath) != digest:
            mismatches.append(f"checksum mismatch for {name}")
    return manifest, mismatches


def run_report(out_dir, quiet: bool = False) -> int:
    manifest, mismatches = verify_manifest(out_dir)
    if mismatches:
        for m in mismatches:
            print(f"report: {m}")
        return 1
    if quiet:
        return 0
    print(f"manifest OK: {len(manifest.get('checksums', {}))} files verified")
    print(f"code version {manifest.get('code_version')}, "
          f"backend {manifest.get('fingerprint', {}).get('kernel_backend')}")
    if "convergence" in manifest:
        conv = manifest["convergence"]
        print("convergence slopes: " + ", ".join(f"{k}={v:.3f}" for k, v in conv["slopes"].items()))
    if "flatness" in manifest:
        fl = manifest["flatness"]
        print(f"flatness: {'PASS' if fl['passed'] else 'FAIL'} "
              f"(MK p={fl['mk_pvalue']:.4f}, CI overlap={fl['ci_pairwise_overlap']})")
    if "aldous" in manifest:
        print(f"aldous log-log slope: {manifest['aldous']['loglog_slope']:.4f}")
    summary = os.path.join(out_dir, "summary.csv")
    if os.path.isfile(summary):
        with open(summary) as fh:
            rows = fh.read().strip().split("\n")[1:]
        drifts = [float(r.split(",")[3]) for r in rows]
        print(f"paths: {len(rows)}, max relative mass drift {max(drifts):.3e}")
    return 0
