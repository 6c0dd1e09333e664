"""Pseudospectral simulator for the stochastic NLS with multiplicative Stratonovich noise."""

__version__ = "0.1.0"

from ._kernels import KERNEL_BACKEND
from .diagnostics import DiagnosticsRecord, MomentEstimate, energy, mass, sobolev_norm
from .integrators import (
    CayleyConvergenceError,
    SimState,
    StepperConfig,
    Trajectory,
    exact_linear_noise_solution,
    init_state,
    run_path,
    step_ito_euler,
    step_linear,
    step_noise_cayley,
    step_nonlinear,
)
from .noise import IncrementStream, NoiseModel, apply_B, apply_truncated_B, mu, mu_n
from .nonlinearity import PowerNonlinearity
from .spectral import (
    Field,
    Grid,
    SymbolTable,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    lp_norm,
)
from .truncation import (
    TruncationLevel,
    convergence_residual,
    cutoff_p,
    cutoff_s,
    measure_operator_norm,
    project_Pn,
    smooth_Sn,
)

__all__ = [
    "__version__",
    "KERNEL_BACKEND",
    "Grid",
    "Field",
    "SymbolTable",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "lp_norm",
    "TruncationLevel",
    "cutoff_s",
    "cutoff_p",
    "project_Pn",
    "smooth_Sn",
    "convergence_residual",
    "measure_operator_norm",
    "NoiseModel",
    "IncrementStream",
    "apply_B",
    "apply_truncated_B",
    "mu",
    "mu_n",
    "PowerNonlinearity",
    "StepperConfig",
    "SimState",
    "Trajectory",
    "CayleyConvergenceError",
    "init_state",
    "step_linear",
    "step_nonlinear",
    "step_noise_cayley",
    "step_ito_euler",
    "run_path",
    "exact_linear_noise_solution",
    "DiagnosticsRecord",
    "MomentEstimate",
    "mass",
    "energy",
    "sobolev_norm",
]
