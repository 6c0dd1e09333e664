"""Periodic-box discretization, unitary FFT transforms, and diagonal multipliers.

Conventions (fixed once, everything downstream relies on them):

* modes per axis are k in {-N/2, ..., N/2-1} with frequencies xi_k = 2*pi*k/L,
  Nyquist assigned to -pi*N/L (numpy fftfreq layout);
* the forward transform is the unitary DFT scaled by (L/N)^{d/2}, so the
  quadrature L2 norm of a physical field equals the plain l2 norm of its
  coefficients (Parseval with unit constant);
* the Laplacian symbol is lam_A(xi) = |xi|^2 and the shifted symbol is
  lam_S = 1 + lam_A (strictly positive, lam_S >= 1 everywhere).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels as K


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box [0, L)^d with N points per axis.

    N must be a power of two (>= 8); the box is the same length L along
    every axis.
    """

    dimension: int
    points: int
    length: float

    def __post_init__(self):
        d, n, L = self.dimension, self.points, self.length
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points must be a power of two >= 8, got {n}")
        if not (L > 0.0 and np.isfinite(L)):
            raise ValueError(f"length must be positive and finite, got {L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dimension

    @property
    def mode_count(self) -> int:
        return self.points**self.dimension

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def volume(self) -> float:
        return self.length**self.dimension

    @cached_property
    def axis_coordinates(self) -> np.ndarray:
        x = np.arange(self.points) * self.spacing
        x.setflags(write=False)
        return x

    def coordinates(self) -> list[np.ndarray]:
        """Meshgrid coordinate arrays, one per axis, each of shape grid.shape."""
        axes = [self.axis_coordinates] * self.dimension
        return list(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def frequencies(self) -> list[np.ndarray]:
        """Per-axis frequency arrays xi_k = 2*pi*k/L in fft layout."""
        xi = 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)
        xi.setflags(write=False)
        return [xi] * self.dimension

    @cached_property
    def symbols(self) -> SymbolTable:
        xi = 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)
        mesh = np.meshgrid(*([xi] * self.dimension), indexing="ij")
        lam_a = np.zeros(self.shape)
        for ax in mesh:
            lam_a += ax**2
        lam_s = 1.0 + lam_a
        lam_a.setflags(write=False)
        lam_s.setflags(write=False)
        return SymbolTable(grid=self, lam_a=lam_a, lam_s=lam_s)


@dataclass(frozen=True)
class SymbolTable:
    """Per-mode symbols of A = -Laplacian and S = I - Laplacian."""

    grid: Grid
    lam_a: np.ndarray = field(repr=False)
    lam_s: np.ndarray = field(repr=False)

    @property
    def max_lam_s(self) -> float:
        return float(self.lam_s.max())


PHYSICAL = "physical"
SPECTRAL = "spectral"


class Field:
    """Complex state on a grid, in either the physical or the spectral view.

    Operations are pure: inputs are never modified, outputs are fresh.
    """

    __slots__ = ("grid", "data", "rep")

    def __init__(self, grid: Grid, data: np.ndarray, rep: str, _validate: bool = True):
        if rep not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown representation {rep!r}")
        data = np.asarray(data, dtype=np.complex128)
        if data.shape != grid.shape:
            raise ValueError(f"data shape {data.shape} does not match grid shape {grid.shape}")
        if _validate and not np.all(np.isfinite(data.view(np.float64))):
            raise ValueError("field contains non-finite values")
        self.grid = grid
        self.data = data
        self.rep = rep

    # -- constructors -------------------------------------------------

    @classmethod
    def physical(cls, grid: Grid, values) -> Field:
        return cls(grid, np.broadcast_to(np.asarray(values, dtype=np.complex128), grid.shape).copy(), PHYSICAL)

    @classmethod
    def spectral(cls, grid: Grid, coeffs) -> Field:
        return cls(grid, np.asarray(coeffs, dtype=np.complex128).copy(), SPECTRAL)

    @classmethod
    def zero(cls, grid: Grid, rep: str = PHYSICAL) -> Field:
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), rep, _validate=False)

    # -- views ---------------------------------------------------------

    @property
    def is_physical(self) -> bool:
        return self.rep == PHYSICAL

    def copy(self) -> Field:
        return Field(self.grid, self.data.copy(), self.rep, _validate=False)

    def to_physical(self) -> Field:
        if self.rep == PHYSICAL:
            return self
        return Field(self.grid, _inverse(self.data, self.grid), PHYSICAL, _validate=False)

    def to_spectral(self) -> Field:
        if self.rep == SPECTRAL:
            return self
        return Field(self.grid, _forward(self.data, self.grid), SPECTRAL, _validate=False)

    def __repr__(self):
        return f"Field(d={self.grid.dimension}, N={self.grid.points}, rep={self.rep})"


def _forward(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.fftn(values, norm="ortho") * np.sqrt(grid.cell_volume)


def _inverse(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.ifftn(coeffs, norm="ortho") / np.sqrt(grid.cell_volume)


def forward_transform(f: Field) -> Field:
    """Physical -> spectral, unitary: Parseval holds with unit constant."""
    if not f.is_physical:
        raise ValueError("forward_transform expects a physical field")
    return f.to_spectral()


def inverse_transform(f: Field) -> Field:
    """Spectral -> physical, inverse of forward_transform."""
    if f.is_physical:
        raise ValueError("inverse_transform expects a spectral field")
    return f.to_physical()


def apply_multiplier(f: Field, g, symbol: str = "S") -> Field:
    """Scale the spectral coefficients by g(lambda(xi)) mode-wise.

    g is a scalar function on (0, inf), vectorized over numpy arrays; symbol
    selects lam_A or lam_S. The input representation is preserved. Rejects g
    evaluating to a non-finite value on any realized symbol.
    """
    table = f.grid.symbols
    if symbol == "S":
        lam = table.lam_s
    elif symbol == "A":
        lam = table.lam_a
    else:
        raise ValueError(f"symbol must be 'A' or 'S', got {symbol!r}")
    weights = np.asarray(g(lam), dtype=np.float64)
    if weights.shape != lam.shape:
        weights = np.broadcast_to(weights, lam.shape).copy()
    if not np.all(np.isfinite(weights)):
        raise ValueError("multiplier function is non-finite on a realized symbol value")
    spec = f.to_spectral()
    out = Field(f.grid, K.cmul_real(spec.data, weights), SPECTRAL, _validate=False)
    return out if f.rep == SPECTRAL else out.to_physical()


def lp_norm(f: Field, p: float) -> float:
    """Quadrature L^p norm (sum |f(x_j)|^p * (L/N)^d)^(1/p); p = inf -> max modulus."""
    if p != np.inf and p < 1:
        raise ValueError(f"p must be >= 1 (or inf), got {p}")
    u = f.to_physical().data
    if p == np.inf:
        return K.linf(u)
    if p == 2.0:
        return float(np.sqrt(K.abs2_sum(u) * f.grid.cell_volume))
    return float((K.abs_pow_sum(u, p) * f.grid.cell_volume) ** (1.0 / p))


def l2_norm(f: Field) -> float:
    """L2 norm in whichever representation the field is in (Parseval)."""
    if f.rep == SPECTRAL:
        return float(np.sqrt(K.abs2_sum(f.data)))
    return lp_norm(f, 2.0)


def inner(f: Field, g: Field) -> complex:
    """Quadrature inner product <f, g> = sum f conj(g) * (L/N)^d."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.rep == g.rep == SPECTRAL:
        return complex(np.vdot(g.data, f.data))
    a = f.to_physical().data
    b = g.to_physical().data
    return complex(np.vdot(b, a) * f.grid.cell_volume)


# -- field factories (deterministic unless an explicit rng is passed) ----


def constant_field(grid: Grid, value) -> Field:
    return Field.physical(grid, value)


def plane_wave(grid: Grid, mode, amplitude: complex = 1.0) -> Field:
    """amplitude * exp(i xi_k . x) for an integer mode vector k."""
    k = np.atleast_1d(np.asarray(mode, dtype=int))
    if k.size != grid.dimension:
        raise ValueError(f"mode must have {grid.dimension} components")
    if np.any(k < -grid.points // 2) or np.any(k >= grid.points // 2):
        raise ValueError("mode outside the resolved range")
    phase = np.zeros(grid.shape)
    for kx, x in zip(k, grid.coordinates()):
        phase = phase + (2.0 * np.pi * kx / grid.length) * x
    return Field(grid, amplitude * np.exp(1j * phase), PHYSICAL, _validate=False)


def gaussian_bump(grid: Grid, width: float, center=None, amplitude: complex = 1.0, carrier=None) -> Field:
    """Periodically wrapped Gaussian bump, optionally modulated by a plane wave."""
    if center is None:
        center = [grid.length / 2.0] * grid.dimension
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r2 = np.zeros(grid.shape)
    for c, x in zip(center, grid.coordinates()):
        dx = x - c
        dx = dx - grid.length * np.round(dx / grid.length)
        r2 = r2 + dx**2
    values = amplitude * np.exp(-r2 / (2.0 * width**2))
    out = Field(grid, values, PHYSICAL, _validate=False)
    if carrier is not None:
        out = Field(grid, out.data * plane_wave(grid, carrier).data, PHYSICAL, _validate=False)
    return out


def multimode_field(grid: Grid, amplitude: float, max_mode: int, decay: float = 1.0) -> Field:
    """Band-limited multimode data with golden-ratio phases (no RNG involved).

    Populates every mode vector with |k|_inf <= max_mode using
    coefficients amplitude * (1+|k|^2)^(-decay/2) * exp(2*pi*i*phi*s(k)),
    phi the golden ratio and s(k) an integer mode label, so the field is
    fully determined by the config.
    """
    if max_mode < 0 or max_mode >= grid.points // 2:
        raise ValueError("max_mode outside the resolved range")
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    rng_label = 0
    ks = range(-max_mode, max_mode + 1)
    for kvec in itertools.product(*([ks] * grid.dimension)):
        rng_label += 1
        k2 = float(sum(k * k for k in kvec))
        mag = amplitude * (1.0 + k2) ** (-decay / 2.0)
        coeffs[tuple(np.asarray(kvec) % grid.points)] = mag * np.exp(2j * np.pi * phi * rng_label)
    return Field(grid, coeffs, SPECTRAL, _validate=False)


def white_noise(grid: Grid, rng: np.random.Generator, amplitude: float = 1.0) -> Field:
    """Complex white noise in physical space (testing/probing helper)."""
    values = amplitude * (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    return Field(grid, values, PHYSICAL, _validate=False)
