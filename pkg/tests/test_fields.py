import numpy as np
import pytest

import levy_euler as le
from levy_euler.errors import DegeneracyError, ValidationError
from levy_euler.fields import CoefficientField, smooth_cutoff, weierstrass_sum

BOX1 = ([-1.0], [1.0])


class TestBuiltinFields:
    def test_constant_field_determinant(self):
        fld = le.builtin_field("constant", {"d": 1, "m": 1, "b": 2.0})
        got = le.nondegeneracy_check(fld, ([-5.0], [5.0]), 17)
        assert got == pytest.approx(2.0)

    def test_sinusoidal_min_determinant(self):
        fld = le.builtin_field(
            "sinusoidal", {"d": 1, "m": 1, "b_base": 1.5, "b_amp": 0.25, "b_freq": 1.0}
        )
        got = le.nondegeneracy_check(fld, ([-np.pi], [np.pi]), 257)
        assert got == pytest.approx(1.25, abs=1e-3)

    def test_affine_bounded_stays_bounded(self):
        fld = le.builtin_field(
            "affine-bounded", {"d": 1, "m": 1, "b_base": 1.0, "b_amp": 0.5, "a_amp": 0.3}
        )
        x = np.linspace(-50, 50, 1001)[:, None]
        assert np.all(np.abs(fld.b(x)[:, 0, 0]) <= 1.5 + 1e-12)
        assert np.all(np.abs(fld.a(x)[:, 0]) <= 0.3 + 1e-12)

    def test_hoelder_perturbed_seminorm_probe(self):
        fld = le.builtin_field(
            "hoelder-perturbed",
            {"d": 1, "m": 1, "beta": 0.75, "b_base": 2.0, "amplitude": 0.1},
        )
        prof_ok = le.holder_seminorm_profile(
            lambda x: fld.b(x)[:, 0, 0], 0.75, BOX1, 11
        )
        prof_bad = le.holder_seminorm_profile(
            lambda x: fld.b(x)[:, 0, 0], 0.90, BOX1, 11
        )
        # declared exponent: stable under refinement; larger exponent: grows
        assert prof_ok[-3:].max() / prof_ok[:3].max() < 2.0
        assert prof_bad[-1] / prof_bad[0] > 2.5

    def test_hoelder_perturbed_preserves_witness(self):
        with pytest.raises(ValidationError):
            le.builtin_field(
                "hoelder-perturbed",
                {"d": 1, "m": 1, "beta": 0.5, "b_base": 1.0, "amplitude": 0.5},
            )

    def test_unknown_name_rejected(self):
        with pytest.raises(ValidationError):
            le.builtin_field("nope", {"d": 1, "m": 1})

    def test_declared_bounds_hold_on_probe_grid(self):
        for name, params in [
            ("constant", {"d": 2, "m": 1, "a": [0.1, -0.2], "b": 1.5, "G": 0.7}),
            ("sinusoidal", {"d": 1, "m": 1, "b_base": 1.0, "b_amp": 0.4,
                            "a_amp": 0.2, "G_base": 0.3, "G_amp": 0.2}),
            ("hoelder-perturbed", {"d": 1, "m": 1, "beta": 0.6, "b_base": 2.0,
                                   "amplitude": 0.3, "G_base": 0.5}),
        ]:
            fld = le.builtin_field(name, params)
            x = np.linspace(-3, 3, 401)
            pts = np.stack([x] * fld.d, axis=1)
            assert np.all(np.linalg.norm(fld.a(pts), axis=1) <= fld.bounds["a"] + 1e-9)
            assert np.all(
                np.linalg.norm(fld.b(pts), axis=(1, 2)) <= fld.bounds["b"] + 1e-9
            )
            assert np.all(
                np.linalg.norm(fld.G(pts), axis=(1, 2)) <= fld.bounds["G"] + 1e-9
            )


class TestNondegeneracyCheck:
    def test_identity_everywhere(self):
        fld = le.builtin_field("constant", {"d": 2, "m": 1, "b": 1.0})
        assert le.nondegeneracy_check(fld, ([-1, -1], [1, 1]), 9) == pytest.approx(1.0)

    def test_diagonal_sinusoid_minimum(self):
        def b(x):
            n = x.shape[0]
            out = np.zeros((n, 2, 2))
            out[:, 0, 0] = 1.0
            out[:, 1, 1] = 1.0 + 0.5 * np.sin(x[:, 0])
            return out

        fld = CoefficientField(
            d=2, m=1, a=lambda x: np.zeros((x.shape[0], 2)), b=b,
            G=lambda x: np.zeros((x.shape[0], 2, 1)), beta_a=None, beta_b=None,
            beta_G=None, bounds={}, c1=0.4, a_is_zero=True,
        )
        got = le.nondegeneracy_check(fld, ([-np.pi, -np.pi], [np.pi, np.pi]), 101)
        assert got == pytest.approx(0.5, abs=5e-3)

    def test_degenerate_field_names_offending_point(self):
        def b(x):
            return x[:, 0][:, None, None] * np.ones((1, 1, 1))

        fld = CoefficientField(
            d=1, m=1, a=lambda x: np.zeros((x.shape[0], 1)), b=b,
            G=lambda x: np.zeros((x.shape[0], 1, 1)), beta_a=None, beta_b=None,
            beta_G=None, bounds={}, c1=0.1, a_is_zero=True,
        )
        with pytest.raises(DegeneracyError) as err:
            le.nondegeneracy_check(fld, BOX1, 41)
        assert abs(err.value.point[0]) < 0.06  # grid point nearest zero


class TestHolderSeminorm:
    def test_constant_is_zero(self):
        for beta in (0.3, 0.5, 1.0):
            assert le.holder_seminorm_estimate(
                lambda x: np.full(x.shape[0], 3.7), beta, BOX1, 6
            ) == 0.0

    def test_sqrt_profile_oracle(self):
        # brute-force oracle: sup |sqrt|x+h| - sqrt|x|| / h^0.5 over a fine grid
        xs = np.linspace(-1, 1, 20001)
        f = np.sqrt(np.abs(xs))
        best = 0.0
        for k in (1, 2, 5, 20, 200):
            q = np.abs(f[k:] - f[:-k]) / (xs[k] - xs[0]) ** 0.5
            best = max(best, q.max())
        est = le.holder_seminorm_estimate(
            lambda x: np.sqrt(np.abs(x[:, 0])), 0.5, BOX1, 10
        )
        assert 1.0 <= est <= 2**0.5
        assert est <= best * 1.05

    def test_affine_zygmund_null(self):
        assert le.holder_seminorm_estimate(
            lambda x: 4.2 * x[:, 0] - 1.0, 1.0, BOX1, 8
        ) == pytest.approx(0.0, abs=1e-9)

    def test_monotone_in_levels(self):
        f = lambda x: np.sqrt(np.abs(x[:, 0]))
        vals = [le.holder_seminorm_estimate(f, 0.5, BOX1, lv) for lv in (3, 5, 7, 9)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_constant_shift_invariance(self):
        f = lambda x: np.abs(x[:, 0]) ** 0.4
        g = lambda x: f(x) + 11.0
        a = le.holder_seminorm_estimate(f, 0.4, BOX1, 8)
        b = le.holder_seminorm_estimate(g, 0.4, BOX1, 8)
        assert a == pytest.approx(b, rel=1e-12)

    def test_radial_power_divergence_slope(self):
        # estimate at exponent beta' > beta grows like 2^(j(beta'-beta))
        beta, beta_p = 0.5, 0.7
        prof = le.holder_seminorm_profile(
            lambda x: np.abs(x[:, 0]) ** beta, beta_p, BOX1, 12
        )
        j = np.arange(1, 13)
        slope = np.polyfit(j, np.log2(prof), 1)[0]
        assert abs(slope - (beta_p - beta)) < 0.1

    def test_weierstrass_declared_exponent(self):
        beta = 0.75
        prof = le.holder_seminorm_profile(
            lambda x: weierstrass_sum(x[:, 0], beta), beta, BOX1, 11
        )
        assert prof.max() / prof.min() < 3.0  # bounded under refinement

    def test_requires_levels_ge_two(self):
        with pytest.raises(ValidationError):
            le.holder_seminorm_estimate(lambda x: x[:, 0], 0.5, BOX1, 1)


class TestTestFunctions:
    def test_radial_power_regularity_declared(self):
        g = le.make_test_function("radial-power", {"beta": 2.25, "support": 3.0})
        assert g.declared_beta == 2.25
        x = np.linspace(-4, 4, 801)[:, None]
        v = g(x)
        assert np.all(np.isfinite(v))
        assert v[0] == 0.0 and v[-1] == 0.0  # cutoff kills the tail

    def test_smooth_cutoff_plateau_and_support(self):
        r = np.array([0.0, 0.3, 0.5, 0.9, 1.0, 2.0])
        s = smooth_cutoff(r)
        assert s[0] == 1.0 and s[1] == 1.0 and s[2] == 1.0
        assert 0 < s[3] < 1
        assert s[4] == 0.0 and s[5] == 0.0

    def test_plane_wave(self):
        g = le.make_test_function("plane-wave", {"freq": [2.0]})
        x = np.array([[0.0], [np.pi / 4]])
        assert g(x) == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_weierstrass_function_bounded(self):
        g = le.make_test_function("weierstrass", {"beta": 0.5})
        x = np.linspace(-10, 10, 2001)[:, None]
        bound = sum(2 ** (-0.5 * j) for j in range(12))
        assert np.all(np.abs(g(x)) <= bound + 1e-12)

    def test_unknown_family_rejected(self):
        with pytest.raises(ValidationError):
            le.make_test_function("bogus", {})


class TestWeierstrassSum:
    def test_doubling_recursion_matches_direct(self):
        t = np.linspace(-7, 7, 1001)
        fast = weierstrass_sum(t, 0.6, levels=10, lam=2.0)
        direct = sum(2 ** (-j * 0.6) * np.cos(2**j * t) for j in range(10))
        assert np.max(np.abs(fast - direct)) < 1e-9
