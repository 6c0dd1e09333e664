"""Dyadic truncation operators: sharp projection P_n and smooth cutoff S_n.

Both act as diagonal multipliers in the shifted symbol lam_S = 1 + |xi|^2.
P_n keeps the open band lam_S < 2^(n+1); S_n rolls off with a C^2 quintic
over [2^n, 2^(n+1)) and vanishes at and above 2^(n+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .spectral import SPECTRAL, Field, Grid, gaussian_bump, plane_wave, white_noise


@dataclass(frozen=True)
class TruncationLevel:
    """Dyadic level n >= 0 with thresholds 2^n and 2^(n+1) on the S-symbol axis."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"truncation level must be >= 0, got {self.n}")

    @property
    def lower(self) -> float:
        return float(2.0**self.n)

    @property
    def upper(self) -> float:
        return float(2.0 ** (self.n + 1))

    def is_active(self, grid: Grid) -> bool:
        """Whether the cutoff touches any mode realized on the grid."""
        return self.lower <= grid.symbols.max_lam_s


def as_level(n) -> TruncationLevel:
    return n if isinstance(n, TruncationLevel) else TruncationLevel(int(n))


def _quintic_falloff(t):
    # 1 - (6 t^5 - 15 t^4 + 10 t^3): the C^2 smoothstep complement on [0, 1]
    return 1.0 - t**3 * (10.0 + t * (6.0 * t - 15.0))


def cutoff_s(lam, n) -> np.ndarray | float:
    """Smooth cutoff profile s_n(lambda): 1 below 2^n, quintic rolloff, 0 at 2^(n+1)."""
    level = as_level(n)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0.0):
        raise ValueError("cutoff_s is defined on (0, inf)")
    t = lam_arr / level.lower - 1.0
    out = np.where(
        lam_arr < level.lower,
        1.0,
        np.where(lam_arr >= level.upper, 0.0, _quintic_falloff(np.clip(t, 0.0, 1.0))),
    )
    return out if out.ndim else float(out)


def cutoff_p(lam, n) -> np.ndarray | float:
    """Sharp indicator p_n(lambda) of the open interval (0, 2^(n+1))."""
    level = as_level(n)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0.0):
        raise ValueError("cutoff_p is defined on (0, inf)")
    out = (lam_arr < level.upper).astype(float)
    return out if out.ndim else float(out)


@lru_cache(maxsize=64)
def sn_weights(grid: Grid, n: int) -> np.ndarray:
    w = np.asarray(cutoff_s(grid.symbols.lam_s, TruncationLevel(n)))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=64)
def pn_mask(grid: Grid, n: int) -> np.ndarray:
    m = np.asarray(cutoff_p(grid.symbols.lam_s, TruncationLevel(n)))
    m.setflags(write=False)
    return m


def project_Pn(f: Field, n) -> Field:
    """Orthogonal projection: zero every coefficient with lam_S >= 2^(n+1)."""
    level = as_level(n)
    spec = f.to_spectral()
    out = Field(f.grid, K.cmul_real(spec.data, pn_mask(f.grid, level.n)), SPECTRAL, _validate=False)
    return out if f.rep == SPECTRAL else out.to_physical()


def smooth_Sn(f: Field, n) -> Field:
    """Littlewood-Paley smoothing: scale coefficients by s_n(lam_S)."""
    level = as_level(n)
    spec = f.to_spectral()
    out = Field(f.grid, K.cmul_real(spec.data, sn_weights(f.grid, level.n)), SPECTRAL, _validate=False)
    return out if f.rep == SPECTRAL else out.to_physical()


def convergence_residual(f: Field, n, theta: float = 0.0) -> tuple[float, float]:
    """(||(I+A)^theta (P_n f - f)||_2, ||(I+A)^theta (S_n f - f)||_2)."""
    level = as_level(n)
    spec = f.to_spectral().data
    lam_s = f.grid.symbols.lam_s
    wgt2 = lam_s ** (2.0 * theta)
    rp = (pn_mask(f.grid, level.n) - 1.0) * spec
    rs = (sn_weights(f.grid, level.n) - 1.0) * spec
    return (
        float(np.sqrt(K.abs2_wsum(rp, wgt2))),
        float(np.sqrt(K.abs2_wsum(rs, wgt2))),
    )


def probe_fields(grid: Grid, trials: int, seed: int):
    """Yield a mixture of white-noise, plane-wave, and bump probes.

    The first probe is the constant (dc) field so every dyadic scale has a
    guaranteed low-frequency witness; plane-wave modes are drawn log-uniformly
    across scales for the same reason.
    """
    rng = np.random.default_rng(seed)
    half = grid.points // 2
    for i in range(trials):
        kind = i % 3
        if i == 0:
            yield plane_wave(grid, [0] * grid.dimension)
        elif kind == 0:
            yield white_noise(grid, rng)
        elif kind == 1:
            mag = np.rint(2.0 ** rng.uniform(0.0, np.log2(half), size=grid.dimension))
            sign = rng.choice([-1, 1], size=grid.dimension)
            mode = np.clip(sign * mag, -half, half - 1).astype(int)
            yield plane_wave(grid, mode, amplitude=1.0 + 0.5 * rng.standard_normal())
        else:
            width = grid.length * (0.02 + 0.2 * rng.random())
            center = grid.length * rng.random(grid.dimension)
            carrier = rng.integers(-half // 2, half // 2, size=grid.dimension)
            yield gaussian_bump(grid, width, center=center, carrier=carrier)


def measure_operator_norm(op, grid: Grid, p: float, trials: int = 50, seed: int = 0) -> float:
    """Empirical lower bound on the L^p -> L^p operator norm by random probing."""
    from .spectral import lp_norm

    if trials < 1:
        raise ValueError("trials must be >= 1")
    best = 0.0
    for f in probe_fields(grid, trials, seed):
        denom = lp_norm(f, p)
        if denom == 0.0:
            continue
        best = max(best, lp_norm(op(f), p) / denom)
    return best
