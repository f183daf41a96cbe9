import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc, gamma
from scipy.stats import ks_2samp

import levy_euler as le
from levy_euler.errors import ValidationError

N = 100_000


def closed_form_c1(alpha):
    # independent oracle for the radial normalization integral
    if alpha == 1.0:
        return np.pi
    return 2 * gamma(2 - alpha) * np.cos(np.pi * alpha / 2) / (alpha * (1 - alpha))


def closed_form_cd(d, alpha):
    return (
        closed_form_c1(alpha)
        * np.pi ** ((d - 1) / 2)
        * gamma((1 + alpha) / 2)
        / gamma((d + alpha) / 2)
    )


class TestSampleStable1d:
    def test_gaussian_branch_moments(self, rng):
        x = le.sample_stable_1d(2.0, 0.0, rng, size=N)
        se_mean = x.std() / np.sqrt(N)
        assert abs(x.mean()) < 4 * se_mean
        # variance 2 under the exponent convention; SE of the sample variance
        se_var = np.sqrt((np.mean((x - x.mean()) ** 4) - x.var() ** 2) / N)
        assert abs(x.var() - 2.0) < 4 * se_var

    def test_cauchy_quartiles(self, rng):
        x = le.sample_stable_1d(1.0, 0.0, rng, size=N)
        q1, q3 = np.quantile(x, [0.25, 0.75])
        # asymptotic SE of a sample quantile: sqrt(p(1-p)/N) / density
        dens = 1 / (np.pi * 2.0)  # standard Cauchy density at +-1
        se = np.sqrt(0.25 * 0.75 / N) / dens
        assert abs(q3 - 1.0) < 4 * se
        assert abs(q1 + 1.0) < 4 * se

    def test_positive_branch_cdf_matches_levy_law(self, rng):
        # oracle: the closed-form one-sided-0.5-stable CDF erfc(1/sqrt(2x)),
        # validated first by integrating its density numerically
        dens = lambda t: t ** (-1.5) * np.exp(-1 / (2 * t)) / np.sqrt(2 * np.pi)
        for x in (0.5, 1.0, 2.0, 5.0):
            num, _ = quad(dens, 0, x, limit=200)
            assert abs(num - erfc(1 / np.sqrt(2 * x))) < 1e-9
        s = le.sample_stable_1d(0.5, 1.0, rng, size=N)
        assert np.all(s > 0)
        for x in (0.5, 1.0, 2.0, 5.0):
            ref = erfc(1 / np.sqrt(2 * x))
            emp = np.mean(s <= x)
            se = np.sqrt(ref * (1 - ref) / N)
            assert abs(emp - ref) < 4 * se

    def test_symmetric_characteristic_function(self, rng):
        for alpha in (0.6, 1.0, 1.4, 1.8):
            x = le.sample_stable_1d(alpha, 0.0, rng, size=N)
            for xi in (0.5, 1.0, 2.0):
                emp = np.cos(xi * x)
                ref = np.exp(-abs(xi) ** alpha)
                assert abs(emp.mean() - ref) < 3 * emp.std() / np.sqrt(N)

    def test_scalar_mode(self, rng):
        v = le.sample_stable_1d(1.5, 0.0, rng)
        assert isinstance(v, float)

    def test_rejects_bad_parameters(self, rng):
        with pytest.raises(ValidationError):
            le.sample_stable_1d(2.5, 0.0, rng)
        with pytest.raises(ValidationError):
            le.sample_stable_1d(0.0, 0.0, rng)
        with pytest.raises(ValidationError):
            le.sample_stable_1d(2.0, 0.5, rng)
        with pytest.raises(ValidationError):
            le.sample_stable_1d(1.5, 1.5, rng)


class TestPositiveStable:
    def test_laplace_transform(self, rng):
        for rho in (0.25, 0.5, 0.75, 0.9):
            s = le.sample_positive_stable(rho, rng, size=N)
            assert np.all(s > 0)
            for lam in (0.5, 1.0, 3.0):
                emp = np.exp(-lam * s)
                ref = np.exp(-(lam**rho))
                assert abs(emp.mean() - ref) < 4 * emp.std() / np.sqrt(N)

    def test_rejects_rho_out_of_range(self, rng):
        with pytest.raises(ValidationError):
            le.sample_positive_stable(1.0, rng)


class TestCharExponentConstant:
    def test_one_dimensional_alpha_one_is_pi(self):
        c = le.char_exponent_constant(1, 1.0)
        assert abs(c.value - np.pi) < 1e-4
        assert c.quad_error < 1e-6

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9, 1.0, 1.2, 1.5, 1.9])
    def test_matches_closed_form_1d(self, alpha):
        c = le.char_exponent_constant(1, alpha)
        assert abs(c.value - closed_form_c1(alpha)) < 1e-6 * closed_form_c1(alpha) + 1e-8

    @pytest.mark.parametrize("d,alpha", [(2, 0.5), (2, 1.5), (3, 1.2)])
    def test_matches_closed_form_dd(self, d, alpha):
        c = le.char_exponent_constant(d, alpha)
        ref = closed_form_cd(d, alpha)
        assert abs(c.value - ref) < 1e-6 * ref

    def test_alpha_near_two_matches_quadratic_limit(self):
        # (2 - alpha) * c(1, alpha) -> 1, monotonically from above
        vals = [(2 - a) * le.char_exponent_constant(1, a).value for a in (1.9, 1.99, 1.999)]
        assert vals[0] > vals[1] > vals[2] > 1.0
        assert vals[2] - 1.0 < 0.01

    def test_cutoff_stability_d2(self):
        # tail integrability: the constant is insensitive to the quadrature split
        c = le.char_exponent_constant(2, 0.5)
        assert c.value > 0 and np.isfinite(c.value)
        assert c.quad_error < 1e-6

    def test_rejects_alpha_two(self):
        with pytest.raises(ValidationError):
            le.char_exponent_constant(1, 2.0)


class TestIsotropicIncrement:
    def test_gaussian_branch_covariance(self, rng):
        spec = le.StableDriverSpec(2.0, 2)
        x = le.sample_isotropic_increment(spec, 0.25, rng, size=N)
        for j in range(2):
            v = x[:, j] ** 2
            assert abs(v.mean() - 0.5) < 4 * v.std() / np.sqrt(N)
        cross = x[:, 0] * x[:, 1]
        assert abs(cross.mean()) < 4 * cross.std() / np.sqrt(N)

    def test_standard_wiener_normalization_switch(self, rng):
        spec = le.StableDriverSpec(2.0, 1, wiener_normalization="standard")
        x = le.sample_isotropic_increment(spec, 0.25, rng, size=N)[:, 0]
        v = x**2
        assert abs(v.mean() - 0.25) < 4 * v.std() / np.sqrt(N)

    def test_characteristic_function_d2(self, rng):
        spec = le.StableDriverSpec(1.5, 2)
        c = le.char_exponent_constant(2, 1.5).value
        x = le.sample_isotropic_increment(spec, 0.35, rng, size=N)
        ref = np.exp(-0.35 * c)
        for th in (0.0, 0.9, 2.2):
            xi = np.array([np.cos(th), np.sin(th)])
            emp = np.cos(x @ xi)
            assert abs(emp.mean() - ref) < 3 * emp.std() / np.sqrt(N)

    def test_self_similarity_ks(self, rng):
        # U over c*dt matches c^(1/alpha) * U over dt in law (1-d projections)
        alpha, cfac = 1.3, 4.0
        spec = le.StableDriverSpec(alpha, 2)
        a = le.sample_isotropic_increment(spec, cfac * 0.2, rng, size=N)
        b = le.sample_isotropic_increment(spec, 0.2, rng, size=N) * cfac ** (1 / alpha)
        direction = np.array([0.6, 0.8])
        assert ks_2samp(a @ direction, b @ direction).pvalue > 0.01

    def test_rotation_invariance_ks(self, rng):
        spec = le.StableDriverSpec(1.5, 2)
        x = le.sample_isotropic_increment(spec, 1.0, rng, size=N)
        th = 0.7
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        y = le.sample_isotropic_increment(spec, 1.0, rng, size=N) @ rot.T
        assert ks_2samp(x[:, 0], y[:, 0]).pvalue > 0.01

    def test_component_symmetry(self, rng):
        spec = le.StableDriverSpec(0.8, 3)
        x = le.sample_isotropic_increment(spec, 1.0, rng, size=N)
        t = np.tanh(x)  # bounded transform: heavy tails make the raw mean useless
        for j in range(3):
            assert abs(t[:, j].mean()) < 4 * t[:, j].std() / np.sqrt(N)

    def test_rejects_nonpositive_dt(self, rng):
        spec = le.StableDriverSpec(1.5, 1)
        with pytest.raises(ValidationError):
            le.sample_isotropic_increment(spec, 0.0, rng)
