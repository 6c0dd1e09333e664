"""Pure-numpy kernels: reference semantics for the compiled twin."""

import numpy as np


def cmul(u, v):
    """Elementwise complex*complex product (fresh array)."""
    return u * v


def cmul_real(u, w):
    """Elementwise complex*real product (fresh array)."""
    return u * w


def caxpy(a, x, y):
    """y + a*x for complex scalar a and complex arrays x, y."""
    return y + a * x


def nonlinear_phase(u, expo, coef):
    """u * exp(1j*coef*|u|**expo) with |u| = 0 short-circuited.

    The pointwise modulus is preserved exactly (pure phase rotation).
    """
    mod = np.abs(u)
    amp = np.zeros_like(mod)
    nz = mod > 0.0
    amp[nz] = mod[nz] ** expo
    return u * np.exp(1j * coef * amp)


def abs2_wsum(u, w):
    """sum(w * |u|^2) as a float."""
    a = u.real * u.real + u.imag * u.imag
    return float(np.sum(w * a))


def abs2_sum(u):
    """sum(|u|^2) as a float."""
    return float(np.sum(u.real * u.real + u.imag * u.imag))


def abs_pow_sum(u, p):
    """sum(|u|^p) as a float (p > 0)."""
    return float(np.sum(np.abs(u) ** p))


def linf(u):
    """max |u|."""
    return float(np.max(np.abs(u)))


def diff_norm2(a, b):
    """sum(|a - b|^2) as a float."""
    d = a - b
    return float(np.sum(d.real * d.real + d.imag * d.imag))
