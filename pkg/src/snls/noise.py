"""Multiplicative noise structure: coefficients e_m, truncated operators, Ito correction.

The driving Brownian increments come from a counter-based Philox stream keyed
by (master seed, path index), so ensemble paths can be generated concurrently
and out of order while staying bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from . import _kernels as K
from .spectral import PHYSICAL, Field, Grid, lp_norm
from .truncation import as_level, smooth_Sn


@dataclass(frozen=True)
class NoiseCoefficient:
    """Real multiplier field e_m with its square cached."""

    index: int
    values: np.ndarray = field(repr=False)
    squared: np.ndarray = field(repr=False)

    @classmethod
    def from_values(cls, index: int, values: np.ndarray) -> NoiseCoefficient:
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError(f"noise coefficient {index} contains non-finite values")
        values.setflags(write=False)
        sq = values**2
        sq.setflags(write=False)
        return cls(index=index, values=values, squared=sq)


class NoiseModel:
    """Finitely many real coefficient functions acting by pointwise multiplication."""

    def __init__(self, grid: Grid, coefficients: list[np.ndarray]):
        self.grid = grid
        self.coefficients = [
            NoiseCoefficient.from_values(m, np.broadcast_to(np.asarray(c, dtype=float), grid.shape))
            for m, c in enumerate(coefficients)
        ]
        if self.coefficients:
            total = np.zeros(grid.shape)
            for c in self.coefficients:
                total += c.squared
        else:
            total = np.zeros(grid.shape)
        total.setflags(write=False)
        self.sum_squared = total

    @property
    def mode_count(self) -> int:
        return len(self.coefficients)

    def coefficient(self, m: int) -> NoiseCoefficient:
        if not 0 <= m < len(self.coefficients):
            raise IndexError(f"noise mode {m} out of range [0, {len(self.coefficients)})")
        return self.coefficients[m]

    def summability_report(self) -> dict:
        """Sup-norms and spectral gradient proxies per coefficient, with the sums.

        The gradient proxy approximates the H^{1,p} seminorm on the grid with
        p = d for d >= 3, p = 4 for d = 2, p = 2 for d = 1 (the multiplier
        class norm is not computable from samples; these are reported, never
        asserted).
        """
        d = self.grid.dimension
        p = {1: 2.0, 2: 4.0, 3: 3.0}[d]
        per_mode = []
        for c in self.coefficients:
            e = Field.physical(self.grid, c.values)
            spec = e.to_spectral().data
            grad_p = 0.0
            for xi_axis, axis in zip(self.grid.frequencies, range(d)):
                shape = [1] * d
                shape[axis] = self.grid.points
                dspec = spec * (1j * xi_axis.reshape(shape))
                comp = Field(self.grid, dspec, "spectral", _validate=False).to_physical()
                grad_p += lp_norm(comp, p) ** 2
            per_mode.append(
                {
                    "index": c.index,
                    "sup_norm": float(np.max(np.abs(c.values))),
                    "grad_proxy": float(np.sqrt(grad_p)),
                }
            )
        return {
            "modes": per_mode,
            "sum_sup_sq": float(sum(m["sup_norm"] ** 2 for m in per_mode)),
            "sum_class_sq": float(sum(m["sup_norm"] ** 2 + m["grad_proxy"] ** 2 for m in per_mode)),
            "gradient_proxy_p": p,
        }


# -- coefficient families (selectable by name in the run config) ---------


def build_coefficients(grid: Grid, family: str, modes: int, amplitude: float,
                       decay: float = 0.0, width: float = 0.25) -> NoiseModel:
    """Construct the named coefficient family; amplitudes scale as (m+1)^(-decay)."""
    if modes < 0:
        raise ValueError("noise mode count must be >= 0")
    xs = grid.coordinates()
    coeffs = []
    for m in range(modes):
        amp = amplitude * (m + 1) ** (-decay)
        if family == "constant":
            c = np.full(grid.shape, amp)
        elif family == "fourier":
            c = amp * np.cos(2.0 * np.pi * (m + 1) * xs[0] / grid.length)
        elif family == "bump":
            center = grid.length * (m + 1.0) / (modes + 1.0)
            r2 = np.zeros(grid.shape)
            for x in xs:
                dx = x - center
                dx = dx - grid.length * np.round(dx / grid.length)
                r2 = r2 + dx**2
            c = amp * np.exp(-r2 / (2.0 * (width * grid.length) ** 2))
        elif family == "indicator":
            # tanh-mollified box of relative width `width`, centered per mode
            center = grid.length * (m + 1.0) / (modes + 1.0)
            halfw = 0.5 * width * grid.length
            steep = 40.0 / grid.length
            dx = xs[0] - center
            dx = dx - grid.length * np.round(dx / grid.length)
            c = amp * 0.5 * (np.tanh(steep * (dx + halfw)) - np.tanh(steep * (dx - halfw)))
        else:
            raise ValueError(f"unknown noise family {family!r}")
        coeffs.append(c)
    return NoiseModel(grid, coeffs)


# -- operators ------------------------------------------------------------


def apply_B(f: Field, model: NoiseModel, m: int) -> Field:
    """Pointwise product B_m f = e_m * f (self-adjoint, real multiplier)."""
    c = model.coefficient(m)
    u = f.to_physical()
    return Field(f.grid, K.cmul_real(u.data, c.values), PHYSICAL, _validate=False)


def apply_truncated_B(f: Field, model: NoiseModel, m: int, n) -> Field:
    """S_n B_m S_n f, the noise operator of the truncated equation.

    The outer S_n acts in spectral space, so killed modes are exact zeros;
    output representation follows the input.
    """
    out = smooth_Sn(apply_B(smooth_Sn(f, n), model, m).to_spectral(), n)
    return out if f.rep == "spectral" else out.to_physical()


def mu(f: Field, model: NoiseModel) -> Field:
    """Stratonovich correction mu(f) = -1/2 (sum_m e_m^2) f."""
    u = f.to_physical()
    return Field(f.grid, K.cmul_real(u.data, -0.5 * model.sum_squared), PHYSICAL, _validate=False)


def mu_n(f: Field, model: NoiseModel, n) -> Field:
    """Truncated correction -1/2 sum_m (S_n B_m S_n)^2 f, applied operationally."""
    level = as_level(n)
    grid = f.grid
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for m in range(model.mode_count):
        once = apply_truncated_B(f, model, m, level)
        twice = apply_truncated_B(once, model, m, level)
        acc += twice.to_physical().data if f.rep == PHYSICAL else twice.to_spectral().data
    return Field(grid, -0.5 * acc, f.rep, _validate=False)


# -- increments ------------------------------------------------------------


class IncrementStream:
    """Per-path Brownian increments, deterministic in (seed, path, step, mode).

    The whole horizon is drawn in one vectorized Philox pass at construction,
    which makes sampling random-access and keeps concurrent path generation
    race-free (no shared state between streams).
    """

    def __init__(self, master_seed: int, path_index: int, dt: float, steps: int, modes: int):
        if dt < 0:
            raise ValueError("dt must be >= 0")
        if steps < 0:
            raise ValueError("steps must be >= 0")
        self.master_seed = int(master_seed)
        self.path_index = int(path_index)
        self.dt = float(dt)
        self.steps = int(steps)
        self.modes = int(modes)
        gen = Generator(Philox(key=[self.master_seed, self.path_index]))
        self._increments = gen.standard_normal((self.steps, self.modes)) * np.sqrt(self.dt)
        self._increments.setflags(write=False)

    def sample(self, step: int) -> np.ndarray:
        """Increment vector (dbeta_1, ..., dbeta_M) for the given step."""
        if not 0 <= step < self.steps:
            raise IndexError(f"step {step} outside horizon [0, {self.steps})")
        return self._increments[step]

    def brownian_values(self) -> np.ndarray:
        """beta_m at sample times 0, dt, ..., steps*dt (shape (steps+1, modes))."""
        out = np.zeros((self.steps + 1, self.modes))
        np.cumsum(self._increments, axis=0, out=out[1:])
        return out
