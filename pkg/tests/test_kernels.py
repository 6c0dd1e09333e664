"""Backend parity: the compiled kernels must reproduce the numpy fallback."""

import numpy as np
import pytest

from snls._kernels import BACKENDS, KERNEL_BACKEND

pytestmark = pytest.mark.skipif(
    "cython" not in BACKENDS, reason="compiled kernels not built on this install"
)


@pytest.fixture
def arrays():
    rng = np.random.default_rng(99)
    u = rng.standard_normal(257) + 1j * rng.standard_normal(257)
    v = rng.standard_normal(257) + 1j * rng.standard_normal(257)
    w = rng.standard_normal(257)
    u[13] = 0.0  # exercise the |u| = 0 short-circuit
    return u, v, w


def test_backend_selected():
    assert KERNEL_BACKEND in ("cython", "python")


def test_cmul_parity(arrays):
    u, v, _ = arrays
    a = BACKENDS["cython"].cmul(u, v)
    b = BACKENDS["python"].cmul(u, v)
    assert np.allclose(a, b, rtol=1e-15, atol=0)


def test_cmul_real_parity(arrays):
    u, _, w = arrays
    assert np.allclose(BACKENDS["cython"].cmul_real(u, w), BACKENDS["python"].cmul_real(u, w),
                       rtol=1e-15, atol=0)


def test_caxpy_parity(arrays):
    u, v, _ = arrays
    a = 0.3 - 1.7j
    assert np.allclose(BACKENDS["cython"].caxpy(a, u, v), BACKENDS["python"].caxpy(a, u, v),
                       rtol=1e-15, atol=0)


def test_nonlinear_phase_parity_and_modulus(arrays):
    u, _, _ = arrays
    for expo, coef in ((2.0, -0.37), (1.3, 0.21)):
        a = BACKENDS["cython"].nonlinear_phase(u, expo, coef)
        b = BACKENDS["python"].nonlinear_phase(u, expo, coef)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-300)
        assert np.allclose(np.abs(a), np.abs(u), rtol=1e-14)  # pure phase rotation
    assert BACKENDS["cython"].nonlinear_phase(np.zeros(4, complex), 2.0, 1.0).sum() == 0


def test_reductions_parity(arrays):
    u, v, w = arrays
    for name, args in (
        ("abs2_wsum", (u, w)),
        ("abs2_sum", (u,)),
        ("abs_pow_sum", (u, 3.5)),
        ("linf", (u,)),
        ("diff_norm2", (u, v)),
    ):
        a = getattr(BACKENDS["cython"], name)(*args)
        b = getattr(BACKENDS["python"], name)(*args)
        assert a == pytest.approx(b, rel=1e-12)


def test_multidimensional_input():
    rng = np.random.default_rng(7)
    u = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    w = rng.standard_normal((8, 8))
    a = BACKENDS["cython"].cmul_real(u, w)
    assert a.shape == (8, 8)
    assert np.allclose(a, u * w, rtol=1e-15)


def test_readonly_input_accepted():
    u = (np.arange(16) + 1j).astype(complex)
    u.setflags(write=False)
    w = np.ones(16)
    w.setflags(write=False)
    out = BACKENDS["cython"].cmul_real(u, w)
    assert np.allclose(out, u)
