import numpy as np
import pytest

from snls import (
    Field,
    Grid,
    TruncationLevel,
    apply_multiplier,
    convergence_residual,
    cutoff_p,
    cutoff_s,
    lp_norm,
    measure_operator_norm,
    project_Pn,
    smooth_Sn,
)
from snls.diagnostics import mann_kendall, sobolev_norm
from snls.spectral import gaussian_bump, inner, plane_wave
from snls.truncation import pn_mask, sn_weights

from conftest import TWO_PI, random_fields


class TestCutoffProfiles:
    def test_level_validation(self):
        with pytest.raises(ValueError):
            TruncationLevel(-1)

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            cutoff_s(0.0, 3)
        with pytest.raises(ValueError):
            cutoff_p(-1.0, 3)

    @pytest.mark.parametrize("n", [0, 2, 5, 9])
    def test_upper_threshold_is_zero(self, n):
        assert cutoff_s(2.0 ** (n + 1), n) == 0.0
        assert cutoff_p(2.0 ** (n + 1), n) == 0.0

    @pytest.mark.parametrize("n", [0, 2, 5, 9])
    def test_low_frequency_branch_is_one(self, n):
        lams = np.linspace(1e-9, 2.0**n * (1 - 1e-12), 200)
        assert np.all(cutoff_s(lams, n) == 1.0)
        assert np.all(cutoff_p(lams, n) == 1.0)

    def test_midband_value_is_half(self):
        # quintic at t = 1/2 by direct polynomial arithmetic:
        # 1 - (6/32 - 15/16 + 10/8) = 1 - 1/2
        expected = 1.0 - (6.0 / 32.0 - 15.0 / 16.0 + 10.0 / 8.0)
        assert expected == 0.5
        for n in (1, 4, 7):
            assert cutoff_s(1.5 * 2.0**n, n) == pytest.approx(0.5, abs=1e-15)

    def test_strictly_inside_upper_is_kept(self):
        n = 5
        eps = 2.0 ** (n - 4)
        assert cutoff_p(2.0 ** (n + 1) - eps, n) == 1.0

    def test_profile_continuous_and_nonincreasing(self):
        n = 3
        lams = np.linspace(1e-6, 2.0 ** (n + 2), 20001)
        vals = np.asarray(cutoff_s(lams, n))
        assert np.all(np.diff(vals) <= 1e-12)
        assert np.max(np.abs(np.diff(vals))) < 2e-3  # no jumps on a fine sweep

    def test_pn_dominates_sn_on_sweep(self):
        n = 4
        lams = np.random.default_rng(3).uniform(1e-6, 2.0 ** (n + 2), 10_000)
        s = np.asarray(cutoff_s(lams, n))
        p = np.asarray(cutoff_p(lams, n))
        assert np.all((0.0 <= s) & (s <= p) & (p <= 1.0))
        assert np.all(p * s == s)


class TestProjection:
    def test_kills_high_mode(self, grid1d):
        lam_s = 1.0 + (2 * np.pi * 20 / TWO_PI) ** 2  # mode 20 -> lam_s = 401
        n = 7  # 2^8 = 256 < 401
        assert lam_s >= 2.0 ** (n + 1)
        coeffs = np.zeros(grid1d.shape, dtype=complex)
        coeffs[20] = 1.0
        f = Field.spectral(grid1d, coeffs)
        assert np.all(project_Pn(f, n).data == 0)
        # physically constructed wave: killed up to transform roundoff
        fp = plane_wave(grid1d, [20])
        assert lp_norm(project_Pn(fp, n), 2.0) <= 1e-13 * lp_norm(fp, 2.0)

    def test_keeps_low_mode(self, grid1d):
        f = plane_wave(grid1d, [3])
        out = project_Pn(f, 4)  # lam_s = 10 < 32
        assert np.allclose(out.data, f.data, atol=1e-13)

    def test_idempotent_bitexact(self, grid1d):
        for f in random_fields(grid1d, 5):
            once = project_Pn(f.to_spectral(), 4)
            twice = project_Pn(once, 4)
            assert np.array_equal(once.data, twice.data)

    def test_nesting_exact(self, grid1d):
        for f in random_fields(grid1d, 5, seed=21):
            spec = f.to_spectral()
            a = project_Pn(project_Pn(spec, 5), 4)
            b = project_Pn(spec, 4)
            assert np.array_equal(a.data, b.data)

    def test_l2_contraction(self, grid1d):
        for f in random_fields(grid1d, 10, seed=22):
            assert lp_norm(project_Pn(f, 4), 2.0) <= lp_norm(f, 2.0) * (1 + 1e-12)

    def test_smoothing_bound(self, grid1d):
        # ||(I+A)^(1/2) P_n f|| <= 2^((n+1)/2) ||f||, rho = 1
        n = 4
        bound = 2.0 ** ((n + 1) / 2.0)
        for f in random_fields(grid1d, 20, seed=23):
            lhs = sobolev_norm(project_Pn(f, n), 0.5)
            assert lhs <= bound * lp_norm(f, 2.0) * (1 + 1e-12)

    def test_bernstein_laplacian_bound(self, grid1d):
        n = 4
        bound = 2.0 ** (n + 1)
        for f in random_fields(grid1d, 20, seed=24):
            af = apply_multiplier(project_Pn(f, n), lambda lam: lam, "A")
            assert lp_norm(af, 2.0) <= bound * lp_norm(f, 2.0) * (1 + 1e-12)


class TestSmoothing:
    def test_identity_below_lower_threshold(self, grid1d):
        f = plane_wave(grid1d, [2])  # lam_s = 5 < 16 = 2^4
        out = smooth_Sn(f, 4)
        assert np.allclose(out.data, f.data, rtol=1e-13)

    def test_range_inside_projection_bitexact(self, grid1d):
        for f in random_fields(grid1d, 8, seed=25):
            sf = smooth_Sn(f.to_spectral(), 3)
            assert np.array_equal(project_Pn(sf, 3).data, sf.data)

    def test_contraction_100_fields(self, grid1d):
        for f in random_fields(grid1d, 100, seed=26):
            ratio = lp_norm(smooth_Sn(f, 3), 2.0) / lp_norm(f, 2.0)
            assert ratio <= 1.0 + 1e-12

    def test_selfadjoint(self, grid1d):
        fs = random_fields(grid1d, 6, seed=27)
        for f, g in zip(fs[::2], fs[1::2]):
            lhs = inner(smooth_Sn(f, 3), g).real
            rhs = inner(f, smooth_Sn(g, 3)).real
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    def test_commutes_with_multiplier(self, grid1d):
        g = lambda lam: np.exp(-0.05 * lam)
        for f in random_fields(grid1d, 4, seed=28):
            a = smooth_Sn(apply_multiplier(f, g), 3)
            b = apply_multiplier(smooth_Sn(f, 3), g)
            assert np.linalg.norm(a.data - b.data) <= 1e-12 * np.linalg.norm(b.data)

    def test_inactive_level_is_identity(self, grid1d):
        lam_max = grid1d.symbols.max_lam_s
        n = int(np.ceil(np.log2(lam_max)))  # 2^n >= lam_max -> no band touched
        assert not TruncationLevel(n).is_active(grid1d)
        for f in random_fields(grid1d, 3, seed=29):
            spec = f.to_spectral()
            assert np.array_equal(smooth_Sn(spec, n).data, spec.data)


class TestConvergenceResidual:
    def test_band_limited_zero(self, grid1d):
        coeffs = np.zeros(grid1d.shape, dtype=complex)
        coeffs[2] = 1.3 - 0.4j  # lam_s = 5 < 16 = 2^4
        f = Field.spectral(grid1d, coeffs)
        rp, rs = convergence_residual(f, 4)
        assert rp == 0.0 and rs == 0.0

    def test_monotone_in_n(self, random_field):
        prev = np.inf
        for n in range(2, 10):
            rp, _ = convergence_residual(random_field, n)
            assert rp <= prev + 1e-300
            prev = rp

    def test_bump_residual_sweep(self, grid1d):
        f = gaussian_bump(grid1d, width=0.4)
        lam_max = grid1d.symbols.max_lam_s
        values = []
        for n in range(2, 14):
            rp, rs = convergence_residual(f, n, theta=0.25)
            values.append((n, rp, rs))
        for n, rp, rs in values:
            if 2.0 ** (n + 1) > lam_max:
                assert rp <= 1e-10 and rs <= 1e-10
        rps = [v[1] for v in values]
        assert all(b <= a + 1e-300 for a, b in zip(rps, rps[1:]))


class TestOperatorNorm:
    def test_identity_is_one(self, grid1d):
        val = measure_operator_norm(lambda f: f, grid1d, 2.0, trials=10, seed=0)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_sn_l2_at_most_one(self, grid1d):
        val = measure_operator_norm(lambda f: smooth_Sn(f, 3), grid1d, 2.0, trials=30, seed=1)
        assert val <= 1.0 + 1e-12

    def test_trials_validated(self, grid1d):
        with pytest.raises(ValueError):
            measure_operator_norm(lambda f: f, grid1d, 2.0, trials=0)

    def test_sn_lalpha_sweep_bounded_no_growth(self, grid1d_fine):
        # uniform L^{alpha+1} bound: values recorded, no growth trend asserted
        alpha = 3.0
        values = []
        for n in range(2, 11):
            values.append(
                measure_operator_norm(
                    lambda f, n=n: smooth_Sn(f, n), grid1d_fine, alpha + 1.0, trials=20, seed=n
                )
            )
        assert max(values) <= 1.5  # measured constant, generous headroom
        s, p = mann_kendall(values)
        assert not (s > 0 and p < 0.05)
