"""Observables: mass, energy, fractional Sobolev norms, Aldous statistic, moments."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .nonlinearity import PowerNonlinearity
from .spectral import Field, lp_norm


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-time observables; the CSV row of the time-series schema."""

    t: float
    mass: float
    energy: float
    h1_norm: float
    xgamma_norm: float
    f_norm: float
    proj_loss_cum: float

    def __post_init__(self):
        vals = (self.t, self.mass, self.energy, self.h1_norm, self.xgamma_norm,
                self.f_norm, self.proj_loss_cum)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"non-finite diagnostics at t={self.t}")
        if self.mass < 0:
            raise ValueError("mass must be nonnegative")


def mass(u: Field) -> float:
    """Squared L2 norm ||u||_2^2 (quadrature; equals the Parseval spectral sum)."""
    if u.rep == "spectral":
        return K.abs2_sum(u.data)
    return K.abs2_sum(u.data) * u.grid.cell_volume


def kinetic(u: Field) -> float:
    """(1/2) ||A^(1/2) u||_2^2 via the spectral sum of lam_A |u_hat|^2."""
    spec = u.to_spectral()
    return 0.5 * K.abs2_wsum(spec.data, u.grid.symbols.lam_a)


def energy(u: Field, nl: PowerNonlinearity | None = None) -> float:
    """E(u) = (1/2)||A^(1/2)u||^2 + F_hat(u); the kinetic part alone when F is off."""
    e = kinetic(u)
    if nl is not None:
        e += nl.F_hat(u.to_physical())
    return e


def sobolev_norm(u: Field, theta: float) -> float:
    """||(I+A)^theta u||_2 as the spectral sum with weight lam_S^(2 theta)."""
    spec = u.to_spectral()
    lam_s = u.grid.symbols.lam_s
    if theta == 0.0:
        return float(np.sqrt(K.abs2_sum(spec.data)))
    return float(np.sqrt(K.abs2_wsum(spec.data, lam_s ** (2.0 * theta))))


def default_gamma(dimension: int, alpha: float) -> float:
    """Smallest gamma in [0, 1/2) with X_gamma embedding into L^(alpha+1), plus margin.

    gamma = d(alpha-1)/(4(alpha+1)) + 0.02, capped below 1/2.
    """
    g = dimension * (alpha - 1.0) / (4.0 * (alpha + 1.0)) + 0.02
    return min(g, 0.49)


def make_record(u: Field, t: float, nl: PowerNonlinearity | None, gamma: float,
                proj_loss_cum: float) -> DiagnosticsRecord:
    phys = u.to_physical()
    spec = u.to_spectral()
    f_norm = 0.0
    if nl is not None:
        p = nl.alpha + 1.0
        f_norm = lp_norm(nl.F(phys), p / nl.alpha)
    return DiagnosticsRecord(
        t=t,
        mass=mass(spec),
        energy=energy(spec, nl) if nl is None else kinetic(spec) + nl.F_hat(phys),
        h1_norm=sobolev_norm(spec, 0.5),
        xgamma_norm=sobolev_norm(spec, gamma),
        f_norm=f_norm,
        proj_loss_cum=proj_loss_cum,
    )


# -- Aldous-condition statistic -------------------------------------------


def aldous_statistic(times: np.ndarray, fields: list[np.ndarray], grid, delta: float,
                     gamma: float) -> float:
    """sup over sample pairs |t - s| <= delta of ||u(t) - u(s)||_{X_gamma}.

    `fields` are retained spectral snapshots on a uniform schedule finer than
    delta. The sampled-lag sup is a deterministic surrogate for a
    stopping-time increment bound (a necessary-condition diagnostic only,
    since no finite simulation quantifies over all stopping times).
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    times = np.asarray(times, dtype=float)
    if len(fields) != times.size:
        raise ValueError("snapshots unavailable for the requested schedule")
    if delta == 0.0 or times.size < 2:
        return 0.0
    dt_s = times[1] - times[0]
    lag_max = int(np.floor(delta / dt_s + 1e-12))
    if lag_max < 1:
        return 0.0
    wgt2 = grid.symbols.lam_s ** (2.0 * gamma)
    stack = np.stack(fields)
    sup = 0.0
    for lag in range(1, lag_max + 1):
        diff = stack[lag:] - stack[:-lag]
        vals = np.sqrt(np.sum((diff.real**2 + diff.imag**2) * wgt2[None, ...],
                              axis=tuple(range(1, diff.ndim))))
        sup = max(sup, float(vals.max()))
    return sup


def aldous_tail_frequency(statistics: np.ndarray, eta: float) -> float:
    """Ensemble version: empirical frequency P{statistic >= eta}."""
    stats = np.asarray(statistics, dtype=float)
    return float(np.mean(stats >= eta))


# -- ensemble moment estimation ---------------------------------------------


@dataclass(frozen=True)
class MomentEstimate:
    order: float
    level: int
    ensemble: int
    estimate: float
    ci_half_width: float

    def __post_init__(self):
        if self.ensemble < 1:
            raise ValueError("ensemble size must be >= 1")
        if self.ci_half_width < 0:
            raise ValueError("CI half-width must be >= 0")


_SELECTORS = {
    "mass": lambda r: r.mass,
    "l2": lambda r: np.sqrt(r.mass),
    "h1": lambda r: r.h1_norm,
    "xgamma": lambda r: r.xgamma_norm,
    "energy": lambda r: r.energy,
    "f_norm": lambda r: r.f_norm,
}


def path_supremum(records, selector: str) -> float:
    """sup over the sampled times of the selected norm along one path."""
    sel = _SELECTORS[selector]
    return max(sel(r) for r in records)


def moment_estimate(sup_values: np.ndarray, q: float, level: int,
                    resamples: int = 1000, seed: int = 0) -> MomentEstimate:
    """Empirical mean of (per-path sup)^q with a bootstrap CI (percentile 95%)."""
    sups = np.asarray(sup_values, dtype=float)
    if sups.size < 1:
        raise ValueError("ensemble must be nonempty")
    powered = sups**q
    est = float(np.mean(powered))
    if sups.size == 1:
        return MomentEstimate(q, level, 1, est, 0.0)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, sups.size, size=(resamples, sups.size))
    means = powered[idx].mean(axis=1)
    lo, hi = np.percentile(means, [2.5, 97.5])
    return MomentEstimate(q, level, int(sups.size), est, float((hi - lo) / 2.0))


# -- trend test and the flatness verdict -------------------------------------


def mann_kendall(values) -> tuple[int, float]:
    """Two-sided Mann-Kendall trend test.

    Returns (S, p) with S = sum of sign(x_j - x_i) over i < j. The p-value is
    the exact permutation value for length <= 8 (ties in the observed sequence
    contribute zero to S; the null enumeration is over distinct ranks) and the
    standard normal approximation with continuity correction beyond that.
    """
    x = list(values)
    n = len(x)
    if n < 3:
        return 0, 1.0
    s_obs = sum(int(np.sign(x[j] - x[i])) for i, j in itertools.combinations(range(n), 2))
    if n <= 8:
        count = 0
        total = 0
        for perm in itertools.permutations(range(n)):
            s = sum(int(np.sign(perm[j] - perm[i])) for i, j in itertools.combinations(range(n), 2))
            total += 1
            if abs(s) >= abs(s_obs):
                count += 1
        return s_obs, count / total
    var = n * (n - 1) * (2 * n + 5) / 18.0
    if s_obs == 0:
        return 0, 1.0
    z = (abs(s_obs) - 1.0) / np.sqrt(var)
    from math import erfc

    return s_obs, float(erfc(z / np.sqrt(2.0)))


def flatness_verdict(estimates: list[MomentEstimate], significance: float = 0.05) -> dict:
    """Uniform-in-n boundedness check at the estimator level.

    Passes when the CIs pairwise overlap or the Mann-Kendall test finds no
    monotone trend at the given significance (the constant in the uniform
    moment bound is not computable, only comparisons are).
    """
    vals = [e.estimate for e in estimates]
    s, p = mann_kendall(vals)
    intervals = [(e.estimate - e.ci_half_width, e.estimate + e.ci_half_width) for e in estimates]
    overlap = all(
        max(a[0], b[0]) <= min(a[1], b[1]) + 1e-300
        for a, b in itertools.combinations(intervals, 2)
    )
    no_trend = p >= significance
    return {
        "mk_statistic": s,
        "mk_pvalue": p,
        "ci_pairwise_overlap": overlap,
        "no_trend": no_trend,
        "passed": overlap or no_trend,
    }
