"""Focusing/defocusing power nonlinearity kappa*|u|^(alpha-1)*u and its antiderivative."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .spectral import PHYSICAL, Field, lp_norm
from .truncation import project_Pn


def admissible_exponent_range(dimension: int, kappa: int) -> tuple[float, float]:
    """Open admissible interval (1, alpha_max) for the given sign and dimension."""
    if kappa == +1:
        upper = np.inf if dimension <= 2 else 1.0 + 4.0 / (dimension - 2)
    elif kappa == -1:
        upper = 1.0 + 4.0 / dimension
    else:
        raise ValueError(f"kappa must be +1 or -1, got {kappa}")
    return (1.0, upper)


@dataclass(frozen=True)
class PowerNonlinearity:
    """F(u) = kappa |u|^(alpha-1) u with the subcriticality check built in.

    kappa = +1 is defocusing (alpha below 1 + 4/(d-2) for d >= 3, unrestricted
    above 1 otherwise); kappa = -1 is focusing (alpha below 1 + 4/d).
    """

    alpha: float
    kappa: int
    dimension: int

    def __post_init__(self):
        lo, hi = admissible_exponent_range(self.dimension, self.kappa)
        if not (lo < self.alpha < hi):
            kind = "defocusing" if self.kappa == +1 else "focusing"
            raise ValueError(
                f"alpha={self.alpha} not admissible for {kind} nonlinearity in d={self.dimension}: "
                f"need alpha in ({lo}, {hi})"
            )

    @property
    def defocusing(self) -> bool:
        return self.kappa == +1

    def F(self, u: Field) -> Field:
        """Pointwise kappa |u|^(alpha-1) u; F(0) = 0 by construction."""
        v = u.to_physical().data
        mod = np.abs(v)
        amp = np.zeros_like(mod)
        nz = mod > 0.0
        amp[nz] = mod[nz] ** (self.alpha - 1.0)
        return Field(u.grid, self.kappa * amp * v, PHYSICAL, _validate=False)

    def F_hat(self, u: Field) -> float:
        """Antiderivative kappa/(alpha+1) * ||u||_{alpha+1}^{alpha+1} (zero at zero)."""
        p = self.alpha + 1.0
        return self.kappa / p * lp_norm(u, p) ** p

    def truncated_F(self, u: Field, n) -> Field:
        """P_n F(u), the drift nonlinearity of the truncated equation.

        Projection acts in spectral space (killed modes are exact zeros);
        output representation follows the input.
        """
        out = project_Pn(self.F(u).to_spectral(), n)
        return out if u.rep == "spectral" else out.to_physical()

    def lipschitz_ratio(self, u: Field, v: Field) -> float:
        """||F(u)-F(v)||_{(a+1)/a} / ((||u||+||v||)^(a-1) ||u-v||), norms in L^{alpha+1}.

        Diagnostic for the local Lipschitz estimate; expected bounded over a
        corpus, not asserted against any particular constant.
        """
        p = self.alpha + 1.0
        du = Field(u.grid, u.to_physical().data - v.to_physical().data, PHYSICAL)
        if K.abs2_sum(du.data) == 0.0:
            raise ValueError("lipschitz_ratio requires u != v")
        dF = Field(u.grid, self.F(u).data - self.F(v).data, PHYSICAL, _validate=False)
        num = lp_norm(dF, p / self.alpha)
        den = (lp_norm(u, p) + lp_norm(v, p)) ** (self.alpha - 1.0) * lp_norm(du, p)
        return num / den


def gn_exponents(dimension: int, alpha: float) -> tuple[float, float]:
    """Gagliardo-Nirenberg pair (beta1, beta2): beta2 = d(alpha-1)/2, beta1 = alpha+1-beta2."""
    beta2 = dimension * (alpha - 1.0) / 2.0
    return (alpha + 1.0 - beta2, beta2)


def gn_ratio(u: Field, nl: PowerNonlinearity) -> float:
    """||u||_{a+1}^{a+1} / (||u||_2^beta1 * ||u||_{H1}^beta2), the interpolation diagnostic."""
    from .diagnostics import sobolev_norm

    beta1, beta2 = gn_exponents(nl.dimension, nl.alpha)
    p = nl.alpha + 1.0
    num = lp_norm(u, p) ** p
    den = lp_norm(u, 2.0) ** beta1 * sobolev_norm(u, 0.5) ** beta2
    return num / den if den > 0 else np.inf
