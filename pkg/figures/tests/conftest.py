"""Fixtures: real run directories produced by driving the snls CLI.

The figure pipeline is exercised against actual simulator output (its only
supported inputs); the primary package is touched exclusively through its
command line and file formats.
"""

import os
import subprocess
import sys

import pytest

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir, os.pardir))
CONFIG_DIR = os.path.join(REPO_ROOT, "configs")


def run_snls(*args):
    cmd = [sys.executable, "-m", "snls.cli", "--quiet", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, f"snls {' '.join(args)} failed: {proc.stderr}"


@pytest.fixture(scope="session")
def conservative_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("mass_run"))
    run_snls("run", "--config", os.path.join(CONFIG_DIR, "mass_conservation.ini"),
             "--out", out, "--threads", "1")
    return out


@pytest.fixture(scope="session")
def sweep_run(tmp_path_factory):
    cfg = tmp_path_factory.mktemp("cfg") / "sweep.ini"
    cfg.write_text(
        "[grid]\ndimension = 1\npoints = 64\nlength = 6.283185307179586\n"
        "[initial]\ntype = multimode\namplitude = 0.35\nmax_mode = 3\ndecay = 0.5\n"
        "[nonlinearity]\nenabled = true\nalpha = 3.0\nkappa = +1\n"
        "[noise]\nmodes = 3\nfamily = fourier\namplitude = 0.2\n"
        "[truncation]\nsweep = 4 6 8\n"
        "[stepper]\nscheme = splitting\ndt = 1e-3\nhorizon = 0.2\n"
        "[ensemble]\npaths = 8\nseed = 31415\n"
        "[output]\nsample_every = 10\n"
    )
    out = str(tmp_path_factory.mktemp("sweep_run"))
    run_snls("sweep-n", "--config", str(cfg), "--out", out, "--threads", "1")
    return out


@pytest.fixture(scope="session")
def convergence_run(tmp_path_factory):
    cfg = tmp_path_factory.mktemp("cfg") / "conv.ini"
    cfg.write_text(
        "[grid]\ndimension = 1\npoints = 64\nlength = 6.283185307179586\n"
        "[initial]\ntype = multimode\namplitude = 0.5\nmax_mode = 2\ndecay = 0.5\n"
        "[nonlinearity]\nenabled = false\n"
        "[noise]\nmodes = 1\nfamily = constant\namplitude = 0.25\n"
        "[truncation]\nlevel = 4\n"
        "[stepper]\nscheme = splitting\ndt = 3.90625e-3\nhorizon = 1.0\n"
        "[ensemble]\npaths = 8\nseed = 577215\n"
        "[convergence]\ndt_exponents = 6 7 8\n"
    )
    out = str(tmp_path_factory.mktemp("conv_run"))
    run_snls("convergence", "--config", str(cfg), "--out", out, "--threads", "1")
    return out


@pytest.fixture(scope="session")
def aldous_run(tmp_path_factory):
    cfg = tmp_path_factory.mktemp("cfg") / "aldous.ini"
    cfg.write_text(
        "[grid]\ndimension = 1\npoints = 64\nlength = 6.283185307179586\n"
        "[initial]\ntype = multimode\namplitude = 0.8\nmax_mode = 1\n"
        "[nonlinearity]\nenabled = false\n"
        "[noise]\nmodes = 1\nfamily = constant\namplitude = 5.0\n"
        "[truncation]\nlevel = 4\n"
        "[stepper]\nscheme = splitting\ndt = 7.8125e-3\nhorizon = 1.0\ncayley_max_iter = 200\n"
        "[ensemble]\npaths = 8\nseed = 1101\n"
        "[output]\nsample_every = 1\nretain_fields = true\ngamma = 0.0\n"
        "[aldous]\nenabled = true\ndeltas = 0.0625 0.03125 0.015625\ngamma = 0.0\neta = 1.0\n"
    )
    out = str(tmp_path_factory.mktemp("aldous_run"))
    run_snls("run", "--config", str(cfg), "--out", out, "--threads", "1")
    return out
