"""Pointwise kernel backend, selected at import.

Two complete implementations exist: a Cython extension and a numpy fallback
with identical semantics. Selection is per function: the compiled kernels win
where fusion or a temporary-free reduction matters (nonlinear_phase and the
abs^2/abs^p sums); numpy's SIMD loops already win the plain elementwise
products, so those stay on numpy even when the extension is present (see
benchmarks/bench_kernels.py). `KERNEL_BACKEND` records whether the extension
is in use.
"""

from . import _pykernels

try:
    from . import _cykernels

    KERNEL_BACKEND = "cython"
except ImportError:  # extension not built on this install
    _cykernels = None
    KERNEL_BACKEND = "python"

# elementwise complex products: numpy SIMD is the fastest implementation
cmul = _pykernels.cmul
cmul_real = _pykernels.cmul_real
caxpy = _pykernels.caxpy

if _cykernels is not None:
    nonlinear_phase = _cykernels.nonlinear_phase
    abs2_wsum = _cykernels.abs2_wsum
    abs2_sum = _cykernels.abs2_sum
    abs_pow_sum = _cykernels.abs_pow_sum
    linf = _cykernels.linf
    diff_norm2 = _cykernels.diff_norm2
else:
    nonlinear_phase = _pykernels.nonlinear_phase
    abs2_wsum = _pykernels.abs2_wsum
    abs2_sum = _pykernels.abs2_sum
    abs_pow_sum = _pykernels.abs_pow_sum
    linf = _pykernels.linf
    diff_norm2 = _pykernels.diff_norm2

#: both complete backends, for parity tests and the benchmark
BACKENDS = {"python": _pykernels}
if _cykernels is not None:
    BACKENDS["cython"] = _cykernels

__all__ = [
    "KERNEL_BACKEND",
    "BACKENDS",
    "cmul",
    "cmul_real",
    "caxpy",
    "nonlinear_phase",
    "abs2_wsum",
    "abs2_sum",
    "abs_pow_sum",
    "linf",
    "diff_norm2",
]
