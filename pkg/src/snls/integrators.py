"""Time discretization of the truncated equation.

Three interchangeable steppers:

* ``splitting``: Strang-ordered linear half / pointwise nonlinear phase flow /
  unitary Cayley noise step / linear half. Every substep is unitary (the
  nonlinear one up to the P_n projection), so mass is conserved to roundoff.
* ``ito_euler``: Euler-Maruyama on the Ito form with the truncated
  Stratonovich correction mu_n in the drift. No conservation claims.
* ``drift_midpoint``: implicit midpoint on the full drift (-iA - i P_n F)
  plus the Cayley noise step; the strict-conservation reference.

The noise substep solves (I + iG/2) u+ = (I - iG/2) u with
G = sum_m dbeta_m S_n M_{e_m} S_n by fixed-point iteration; G is self-adjoint,
so the Cayley transform is unitary and the step preserves the L2 norm to the
iteration tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels as K
from .noise import IncrementStream, NoiseModel
from .nonlinearity import PowerNonlinearity
from .spectral import PHYSICAL, SPECTRAL, Field, Grid, _forward, _inverse
from .truncation import TruncationLevel, as_level, pn_mask, smooth_Sn, sn_weights

SCHEMES = ("splitting", "ito_euler", "drift_midpoint")


class CayleyConvergenceError(RuntimeError):
    """Fixed-point iteration did not converge; dt is too large for ||G||."""

    def __init__(self, message: str, step_index: int | None = None, path_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index
        self.path_index = path_index


@dataclass(frozen=True)
class StepperConfig:
    scheme: str
    dt: float
    horizon: float
    level: TruncationLevel
    dealias: bool = False
    cayley_tol: float = 1e-12
    cayley_max_iter: int = 50

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise ValueError("horizon must be positive")
        steps = self.horizon / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"horizon/dt = {steps} is not an integer step count")
        if self.cayley_tol <= 0:
            raise ValueError("cayley_tol must be positive")
        if self.cayley_max_iter < 1:
            raise ValueError("cayley_max_iter must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class SimState:
    """Evolving per-path state; the field is kept spectral and in range(P_n)."""

    time: float
    field: Field
    beta: np.ndarray
    stream: IncrementStream | None = None


@dataclass
class Trajectory:
    times: list = dc_field(default_factory=list)
    records: list = dc_field(default_factory=list)
    fields: list = dc_field(default_factory=list)  # retained spectral snapshots (optional)
    snapshot_times: list = dc_field(default_factory=list)
    snapshots: list = dc_field(default_factory=list)


def init_state(u0: Field, n) -> Field:
    """Truncated initial value S_n u0 (spectral representation)."""
    return smooth_Sn(u0.to_spectral(), as_level(n))


def step_linear(u: Field, dt: float) -> Field:
    """Exact free flow: mode-wise phase exp(-i lam_A dt). Unitary."""
    spec = u.to_spectral()
    phases = np.exp(-1j * u.grid.symbols.lam_a * dt)
    out = Field(u.grid, K.cmul(spec.data, phases), SPECTRAL, _validate=False)
    return out if u.rep == SPECTRAL else out.to_physical()


_dealias_cache = {}


def _dealias_mask(grid: Grid) -> np.ndarray:
    """2/3-rule mask: keep |k| <= N/3 per axis."""
    if grid not in _dealias_cache:
        keep = np.ones(grid.shape, dtype=float)
        kmax = grid.points // 3
        k1 = np.abs(np.fft.fftfreq(grid.points) * grid.points)
        for axis in range(grid.dimension):
            shape = [1] * grid.dimension
            shape[axis] = grid.points
            keep = keep * (k1.reshape(shape) <= kmax)
        _dealias_cache[grid] = keep
    return _dealias_cache[grid]


def step_nonlinear(u: Field, dt: float, nl: PowerNonlinearity, n, dealias: bool = False) -> Field:
    """Pointwise phase flow u -> u exp(-i kappa |u|^(alpha-1) dt), then P_n.

    The flow preserves the pointwise modulus exactly; only the projection
    (and the optional 2/3-rule mask) can change the L2 norm.
    """
    level = as_level(n)
    phys = u.to_physical()
    rotated = K.nonlinear_phase(phys.data, nl.alpha - 1.0, -nl.kappa * dt)
    spec = _forward(rotated, u.grid)
    spec = K.cmul_real(spec, pn_mask(u.grid, level.n))
    if dealias:
        spec = K.cmul_real(spec, _dealias_mask(u.grid))
    out = Field(u.grid, spec, SPECTRAL, _validate=False)
    return out if u.rep == SPECTRAL else out.to_physical()


class _NoiseAction:
    """Precomputed machinery for applying G = sum_m dbeta_m S_n M_{e_m} S_n."""

    def __init__(self, grid: Grid, model: NoiseModel, level: TruncationLevel):
        self.grid = grid
        self.model = model
        self.sn = sn_weights(grid, level.n)
        self.sup_coeff = (
            max(float(np.max(np.abs(c.values))) for c in model.coefficients)
            if model.mode_count
            else 0.0
        )

    def weighted_coefficient(self, increments: np.ndarray) -> np.ndarray:
        w = np.zeros(self.grid.shape)
        for m in range(self.model.mode_count):
            w += increments[m] * self.model.coefficients[m].values
        return w

    def apply(self, spec: np.ndarray, w: np.ndarray) -> np.ndarray:
        a = _inverse(K.cmul_real(spec, self.sn), self.grid)
        return K.cmul_real(_forward(K.cmul_real(a, w), self.grid), self.sn)


def _cayley_solve(spec: np.ndarray, action: _NoiseAction, w: np.ndarray, tol: float,
                  max_iter: int, norm_bound: float, step_index: int | None = None,
                  path_index: int | None = None) -> np.ndarray:
    """Solve (I + iG/2) u+ = (I - iG/2) u by fixed-point iteration."""
    if norm_bound >= 1.8:
        raise CayleyConvergenceError(
            f"Cayley contraction guard: ||G|| bound {norm_bound:.3g} too large (reduce dt)",
            step_index,
            path_index,
        )
    gu = action.apply(spec, w)
    rhs = K.caxpy(-0.5j, gu, spec)
    ref = K.abs2_sum(spec) ** 0.5
    w_cur = rhs
    for _ in range(max_iter):
        w_new = K.caxpy(-0.5j, action.apply(w_cur, w), rhs)
        if K.diff_norm2(w_new, w_cur) ** 0.5 <= tol * max(ref, 1e-300):
            return w_new
        w_cur = w_new
    raise CayleyConvergenceError(
        f"Cayley fixed point did not converge in {max_iter} iterations (reduce dt)",
        step_index,
        path_index,
    )


def step_noise_cayley(u: Field, increments: np.ndarray, model: NoiseModel, n,
                      tol: float = 1e-12, max_iter: int = 50) -> Field:
    """Unitary Cayley (midpoint) step for the Stratonovich noise. Output in range(P_n)."""
    level = as_level(n)
    if model.mode_count == 0:
        return u.copy()
    action = _NoiseAction(u.grid, model, level)
    w = action.weighted_coefficient(np.asarray(increments, dtype=float))
    bound = 0.5 * float(np.sum(np.abs(increments))) * action.sup_coeff
    spec = u.to_spectral()
    out_data = _cayley_solve(spec.data, action, w, tol, max_iter, bound)
    out = Field(u.grid, out_data, SPECTRAL, _validate=False)
    return out if u.rep == SPECTRAL else out.to_physical()


def step_ito_euler(u: Field, dt: float, increments: np.ndarray, model: NoiseModel,
                   nl: PowerNonlinearity | None, n) -> Field:
    """Single Euler-Maruyama step of the truncated Ito equation."""
    level = as_level(n)
    grid = u.grid
    spec = u.to_spectral()
    drift = K.cmul(spec.data, -1j * grid.symbols.lam_a + 0j)
    if nl is not None:
        drift = drift + -1j * nl.truncated_F(u, level).to_spectral().data
    if model.mode_count:
        from .noise import mu_n

        drift = drift + mu_n(spec, model, level).data
    new = spec.data + dt * drift
    if model.mode_count:
        action = _NoiseAction(grid, model, level)
        for m in range(model.mode_count):
            if increments[m] != 0.0:
                gm = action.apply(spec.data, increments[m] * model.coefficients[m].values)
                new = new - 1j * gm
    out = Field(grid, new, SPECTRAL, _validate=False)
    return out if u.rep == SPECTRAL else out.to_physical()


def step_drift_midpoint(u: Field, dt: float, nl: PowerNonlinearity | None, n,
                        tol: float = 1e-12, max_iter: int = 100) -> Field:
    """Implicit midpoint on the drift -iA - i P_n F; conserves mass exactly.

    The diagonal (I + i dt A/2) factor is inverted exactly in spectral space;
    the fixed point iterates only on the nonlinear term.
    """
    level = as_level(n)
    grid = u.grid
    lam_a = grid.symbols.lam_a
    dinv = 1.0 / (1.0 + 0.5j * dt * lam_a)
    cay = (1.0 - 0.5j * dt * lam_a) * dinv
    spec = u.to_spectral().data
    lin = K.cmul(spec, cay)
    if nl is None:
        out = Field(grid, lin, SPECTRAL, _validate=False)
        return out if u.rep == SPECTRAL else out.to_physical()
    mask = pn_mask(grid, level.n)
    ref = K.abs2_sum(spec) ** 0.5
    w = spec
    for _ in range(max_iter):
        mid = 0.5 * (spec + w)
        um = _inverse(mid, grid)
        fm = nl.F(Field(grid, um, PHYSICAL, _validate=False)).data
        pf = K.cmul_real(_forward(fm, grid), mask)
        w_new = lin + (-1j * dt) * K.cmul(pf, dinv)
        if K.diff_norm2(w_new, w) ** 0.5 <= tol * max(ref, 1e-300):
            w = w_new
            break
        w = w_new
    else:
        raise CayleyConvergenceError(
            f"midpoint fixed point did not converge in {max_iter} iterations (reduce dt)"
        )
    out = Field(grid, w, SPECTRAL, _validate=False)
    return out if u.rep == SPECTRAL else out.to_physical()


def exact_linear_noise_solution(u0: Field, t: float, beta_value: float, c: float) -> Field:
    """Pathwise oracle for F = 0, e_1 = c: u(t) = exp(-itA) exp(-ic beta(t)) u0."""
    spec = u0.to_spectral()
    phases = np.exp(-1j * u0.grid.symbols.lam_a * t) * np.exp(-1j * c * beta_value)
    out = Field(u0.grid, K.cmul(spec.data, phases), SPECTRAL, _validate=False)
    return out if u0.rep == SPECTRAL else out.to_physical()


def run_path(u0: Field, config: StepperConfig, model: NoiseModel,
             nl: PowerNonlinearity | None, stream: IncrementStream,
             sample_every: int = 1, gamma: float = 0.0,
             keep_fields: bool = False, snapshot_steps: tuple[int, ...] = (),
             path_index: int | None = None) -> Trajectory:
    """Integrate one path and sample diagnostics on the given schedule."""
    from .diagnostics import make_record

    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    grid = u0.grid
    level = config.level
    steps = config.steps
    dt = config.dt
    state = init_state(u0, level)
    spec = state.data
    mask = pn_mask(grid, level.n)
    lam_a = grid.symbols.lam_a
    half_phase = np.exp(-1j * lam_a * (0.5 * dt))
    action = _NoiseAction(grid, model, level) if model.mode_count else None
    dealias_w = _dealias_mask(grid) if config.dealias else None
    expo = nl.alpha - 1.0 if nl is not None else 0.0
    coef = -nl.kappa * dt if nl is not None else 0.0

    traj = Trajectory()
    proj_loss = 0.0
    snapshot_set = set(snapshot_steps)
    sim = SimState(time=0.0, field=state, beta=np.zeros(model.mode_count), stream=stream)

    def emit(step_idx: int, spec_data: np.ndarray):
        t = step_idx * dt
        sim.time = t
        sim.field = Field(grid, spec_data, SPECTRAL, _validate=False)
        traj.times.append(t)
        traj.records.append(make_record(sim.field, t, nl, gamma, proj_loss))
        if keep_fields:
            traj.fields.append(spec_data.copy())
        if step_idx in snapshot_set:
            traj.snapshot_times.append(t)
            traj.snapshots.append(spec_data.copy())

    emit(0, spec)
    for k in range(steps):
        if config.scheme == "splitting":
            spec = K.cmul(spec, half_phase)
            if nl is not None:
                u = _inverse(spec, grid)
                u = K.nonlinear_phase(u, expo, coef)
                s2 = _forward(u, grid)
                before = K.abs2_sum(s2)
                s2 = K.cmul_real(s2, mask)
                if dealias_w is not None:
                    s2 = K.cmul_real(s2, dealias_w)
                proj_loss += before - K.abs2_sum(s2)
                spec = s2
            if action is not None:
                db = stream.sample(k)
                w = action.weighted_coefficient(db)
                bound = 0.5 * float(np.sum(np.abs(db))) * action.sup_coeff
                spec = _cayley_solve(spec, action, w, config.cayley_tol,
                                     config.cayley_max_iter, bound, k, path_index)
            spec = K.cmul(spec, half_phase)
        elif config.scheme == "ito_euler":
            f = Field(grid, spec, SPECTRAL, _validate=False)
            db = stream.sample(k) if model.mode_count else np.zeros(0)
            spec = step_ito_euler(f, dt, db, model, nl, level).data
        else:  # drift_midpoint
            f = Field(grid, spec, SPECTRAL, _validate=False)
            spec = step_drift_midpoint(f, dt, nl, level, config.cayley_tol).data
            if action is not None:
                db = stream.sample(k)
                w = action.weighted_coefficient(db)
                bound = 0.5 * float(np.sum(np.abs(db))) * action.sup_coeff
                spec = _cayley_solve(spec, action, w, config.cayley_tol,
                                     config.cayley_max_iter, bound, k, path_index)
        if model.mode_count:
            sim.beta = sim.beta + stream.sample(k)
        if (k + 1) % sample_every == 0 or (k + 1) == steps or (k + 1) in snapshot_set:
            emit(k + 1, spec)
    return traj
