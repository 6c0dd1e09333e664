"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. Budgets are wall-clock on a desk-scale single-core machine.
"""

import json
import os
import time

import numpy as np
import pytest

from snls import Field, Grid, TruncationLevel, lp_norm, project_Pn, smooth_Sn
from snls.cli import main
from snls.diagnostics import sobolev_norm
from snls.nonlinearity import PowerNonlinearity, gn_exponents, gn_ratio
from snls.spectral import inner, white_noise
from snls.truncation import measure_operator_norm, probe_fields

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
TWO_PI = 6.283185307179586


def _cfg(name):
    return os.path.join(CONFIG_DIR, name)


def _report(name, passed, detail, budget, elapsed):
    status = "PASS" if passed else "FAIL"
    print(f"[{status}] {name}: {detail} (runtime {elapsed:.1f}s, budget {budget:.0f}s)")


def _read_csv(path):
    with open(path) as fh:
        rows = fh.read().strip().split("\n")
    header = rows[0].split(",")
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    return header, data


def test_mass_conservation(tmp_path):
    """Splitting + Cayley, truncation inactive: relative mass drift <= 1e-8."""
    started = time.time()
    out = str(tmp_path / "mass")
    code = main(["--quiet", "run", "--config", _cfg("mass_conservation.ini"),
                 "--out", out, "--threads", "1"])
    elapsed = time.time() - started
    header, data = _read_csv(os.path.join(out, "path_0000.csv"))
    masses = data[:, header.index("mass")]
    drift = float(np.max(np.abs(masses - masses[0])) / masses[0])
    ok = code == 0 and drift <= 1e-8 and elapsed < 30.0
    _report("mass-conservation", ok, f"relative drift {drift:.3e} <= 1e-8", 30, elapsed)
    assert code == 0
    assert drift <= 1e-8
    assert elapsed < 30.0


def test_operator_bound_suite(tmp_path):
    """Exact multiplier checks for the P_n / S_n operator bounds."""
    started = time.time()
    grid = Grid(1, 128, TWO_PI)
    n = 4
    lvl = TruncationLevel(n)

    probes = [f.to_spectral() for f in probe_fields(grid, 100, seed=2024)]
    idem = all(np.array_equal(project_Pn(project_Pn(f, lvl), lvl).data,
                              project_Pn(f, lvl).data) for f in probes)
    psn = all(np.array_equal(project_Pn(smooth_Sn(f, lvl), lvl).data,
                             smooth_Sn(f, lvl).data) for f in probes)
    sn_norm = measure_operator_norm(lambda f: smooth_Sn(f, lvl), grid, 2.0, trials=100, seed=7)
    bound = 2.0 ** ((n + 1) / 2.0)
    bernstein = all(
        sobolev_norm(project_Pn(f, lvl), 0.5) <= bound * np.sqrt(np.sum(np.abs(f.data) ** 2)) * (1 + 1e-12)
        for f in probes
    )
    # CLI report on the same grid
    cfgtext = (tmp_path / "ops.ini")
    cfgtext.write_text(
        "[grid]\ndimension = 1\npoints = 128\nlength = 6.283185307179586\n"
        "[nonlinearity]\nenabled = false\n[truncation]\nlevel = 4\n"
        "[stepper]\nscheme = splitting\ndt = 1e-2\nhorizon = 0.1\n"
        "[ensemble]\npaths = 1\nseed = 7\n"
    )
    code = main(["--quiet", "operator-tests", "--config", str(cfgtext),
                 "--out", str(tmp_path / "ops")])
    elapsed = time.time() - started
    ok = idem and psn and sn_norm <= 1.0 + 1e-12 and bernstein and code == 0 and elapsed < 5.0
    _report("operator-bounds", ok,
            f"idempotent={idem}, PnSn=Sn={psn}, ||Sn||_2={sn_norm:.12f}, Bernstein ok={bernstein}",
            5, elapsed)
    assert idem and psn and bernstein
    assert sn_norm <= 1.0 + 1e-12
    assert code == 0
    assert elapsed < 5.0


def test_oracle_equivalence(tmp_path):
    """Pathwise error vs the closed form and the ito_euler strong-order slope."""
    started = time.time()
    out = str(tmp_path / "conv")
    code = main(["--quiet", "convergence", "--config", _cfg("convergence.ini"),
                 "--out", out, "--threads", "1"])
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    conv = manifest["convergence"]
    elapsed = time.time() - started
    split_err_finest = conv["errors"]["splitting"][-1]
    slope = conv["slopes"]["ito_euler"]
    ok = (code == 0 and split_err_finest < 1e-3 and 0.8 <= slope <= 1.2 and elapsed < 120.0)
    _report("oracle-equivalence", ok,
            f"splitting err@dt=2^-10 {split_err_finest:.3e} < 1e-3, ito_euler slope {slope:.3f}",
            120, elapsed)
    assert code == 0
    assert split_err_finest < 1e-3
    assert 0.8 <= slope <= 1.2
    assert elapsed < 120.0


def test_defocusing_moment_flatness(tmp_path):
    """Energy nonnegative at every sample; sweep estimates flat at estimator level."""
    started = time.time()
    out = str(tmp_path / "sweep")
    code = main(["--quiet", "sweep-n", "--config", _cfg("flatness_sweep.ini"),
                 "--out", out, "--threads", "0"])
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    elapsed = time.time() - started

    min_energy = np.inf
    for name in os.listdir(out):
        if name.startswith("path_") and name.endswith(".csv"):
            header, data = _read_csv(os.path.join(out, name))
            min_energy = min(min_energy, float(data[:, header.index("energy")].min()))
    flat = manifest["flatness"]
    ok = (code == 0 and min_energy >= 0.0 and flat["ci_pairwise_overlap"]
          and flat["passed"] and elapsed < 600.0)
    _report("moment-flatness", ok,
            f"min energy {min_energy:.3e} >= 0, CIs overlap={flat['ci_pairwise_overlap']}, "
            f"MK p={flat['mk_pvalue']:.4f}, verdict={'PASS' if flat['passed'] else 'FAIL'}",
            600, elapsed)
    assert code == 0
    assert min_energy >= 0.0
    assert flat["ci_pairwise_overlap"]
    assert flat["passed"]
    assert elapsed < 600.0


def test_nonlinearity_identities():
    """Pointwise gauge identity, norm identity, antiderivative derivative."""
    started = time.time()
    grid = Grid(1, 64, TWO_PI)
    nl = PowerNonlinearity(3.0, +1, 1)
    rng = np.random.default_rng(515)
    gauge_ok = norm_ok = True
    for _ in range(20):
        u = white_noise(grid, rng)
        fu = nl.F(u)
        gauge = np.max(np.abs(np.real(np.conj(1j * u.data) * fu.data)))
        gauge_ok &= gauge <= 1e-12 * max(1.0, np.max(np.abs(u.data)) ** 4)
        lhs = lp_norm(fu, (nl.alpha + 1) / nl.alpha)
        rhs = lp_norm(u, nl.alpha + 1) ** nl.alpha
        norm_ok &= abs(lhs - rhs) <= 1e-12 * rhs
    u = white_noise(grid, rng)
    h = white_noise(grid, rng)
    exact = inner(nl.F(u), h).real
    errs = []
    for eps in (1e-3, 1e-4, 1e-5):
        fd = (nl.F_hat(Field(grid, u.data + eps * h.data, "physical")) - nl.F_hat(u)) / eps
        errs.append(abs(fd - exact))
    fd_ok = errs[1] <= errs[0] / 4 and errs[2] <= errs[1] / 4
    elapsed = time.time() - started
    ok = gauge_ok and norm_ok and fd_ok and elapsed < 5.0
    _report("nonlinearity-identities", ok,
            f"gauge<=1e-12: {gauge_ok}, norm identity: {norm_ok}, "
            f"FD first-order: {fd_ok} (errors {errs[0]:.2e} -> {errs[2]:.2e})", 5, elapsed)
    assert gauge_ok and norm_ok and fd_ok
    assert elapsed < 5.0


def test_gagliardo_nirenberg_admissibility():
    """beta2 = d(alpha-1)/2 < 2 iff alpha < 1 + 4/d, plus a bounded ratio corpus."""
    started = time.time()
    table = [(d, alpha) for d in (1, 2, 3) for alpha in (1.5, 2.0, 3.0, 4.0, 4.9, 5.5, 8.9)]
    exact_ok = all(
        (gn_exponents(d, alpha)[1] < 2.0) == (alpha < 1.0 + 4.0 / d) for d, alpha in table
    )
    grid = Grid(1, 64, TWO_PI)
    nl = PowerNonlinearity(3.0, +1, 1)
    rng = np.random.default_rng(2718)
    ratios = [gn_ratio(white_noise(grid, rng), nl) for _ in range(200)]
    ratio_ok = max(ratios) <= 2.0
    elapsed = time.time() - started
    ok = exact_ok and ratio_ok and elapsed < 10.0
    _report("gagliardo-nirenberg", ok,
            f"exact arithmetic over {len(table)} pairs: {exact_ok}, "
            f"corpus ratio max {max(ratios):.4f} bounded", 10, elapsed)
    assert exact_ok
    assert ratio_ok
    assert elapsed < 10.0


def test_determinism(tmp_path):
    """Identical config + seed reproduce byte-identical CSV output."""
    started = time.time()
    cfgtext = (tmp_path / "det.ini")
    cfgtext.write_text(
        "[grid]\ndimension = 1\npoints = 64\nlength = 6.283185307179586\n"
        "[initial]\ntype = multimode\namplitude = 0.35\nmax_mode = 3\n"
        "[nonlinearity]\nenabled = true\nalpha = 3.0\nkappa = +1\n"
        "[noise]\nmodes = 3\nfamily = fourier\namplitude = 0.2\n"
        "[truncation]\nlevel = 5\n"
        "[stepper]\nscheme = splitting\ndt = 1e-3\nhorizon = 0.2\n"
        "[ensemble]\npaths = 2\nseed = 90210\n"
        "[output]\nsample_every = 10\n"
    )
    outs = []
    for tag in ("a", "b"):
        out = str(tmp_path / tag)
        assert main(["--quiet", "run", "--config", str(cfgtext), "--out", out,
                     "--threads", "1"]) == 0
        outs.append(out)
    identical = True
    for name in sorted(os.listdir(outs[0])):
        if not name.endswith(".csv"):
            continue
        with open(os.path.join(outs[0], name), "rb") as fa, \
             open(os.path.join(outs[1], name), "rb") as fb:
            identical &= fa.read() == fb.read()
    elapsed = time.time() - started
    ok = identical and elapsed < 60.0
    _report("determinism", ok, "byte-identical CSVs across reruns", 60, elapsed)
    assert identical
    assert elapsed < 60.0
