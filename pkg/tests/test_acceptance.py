"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte-Carlo criteria run at their stated path counts (up to 10^6 paths
per level), so this module dominates the suite's runtime; run with
``pytest tests/test_acceptance.py -s`` to watch the per-criterion lines.
"""

import time

import numpy as np
import pytest
from scipy.special import gamma

import levy_euler as le
from levy_euler.cli import parse_config, run as cli_run
from levy_euler.harness import stream_seed
from levy_euler._streams import stream


def report(num, passed, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if passed else 'FAIL'} - {detail}"
    print(line)
    assert passed, line


def closed_form_cd(d, alpha):
    if alpha == 2.0:
        return 1.0  # Gaussian branch uses exp(-t |xi|^2) directly
    if alpha == 1.0:
        c1 = np.pi
    else:
        c1 = 2 * gamma(2 - alpha) * np.cos(np.pi * alpha / 2) / (alpha * (1 - alpha))
    return c1 * np.pi ** ((d - 1) / 2) * gamma((1 + alpha) / 2) / gamma((d + alpha) / 2)


def test_criterion_1_stable_sampler_characteristic_function():
    t0 = time.time()
    n = 100_000
    t_win = 0.5
    mags = np.array([0.25, 0.4, 0.6, 0.8, 1.0, 1.2, 1.35, 1.5])
    worst = 0.0
    for d, alpha in [(1, 0.7), (1, 1.0), (1, 1.5), (2, 1.5), (2, 2.0)]:
        spec = le.StableDriverSpec(alpha, d)
        rng = stream(101, "cf", d, int(10 * alpha))
        x = le.sample_isotropic_increment(spec, t_win, rng, size=n)
        if alpha == 2.0:
            expo = lambda m: t_win * m**2  # variance 2t per component
        else:
            c = le.char_exponent_constant(d, alpha).value
            expo = lambda m: t_win * c * m**alpha
        for k, m in enumerate(mags):
            ang = 0.4 * k
            xi = m * np.array([np.cos(ang), np.sin(ang)])[:d]
            xi = xi if d == 2 else np.array([m])
            vals = np.cos(x @ xi)
            se = vals.std() / np.sqrt(n)
            dev = abs(vals.mean() - np.exp(-expo(m))) / se
            worst = max(worst, dev)
    elapsed = time.time() - t0
    report(1, worst <= 3.0 and elapsed < 30.0,
           f"empirical char. function within {worst:.2f} SE (<=3), {elapsed:.1f}s (<30s)")


def test_criterion_2_constant_coefficient_exactness():
    t0 = time.time()
    g = le.TestFunction(eval=lambda p: np.tanh(p[:, 0]), declared_beta=None,
                        family="tanh")
    worst = 0.0
    for alpha in (1.5, 2.0):
        fld = le.builtin_field("constant", {"d": 1, "m": 1, "a": 0.2, "b": 0.9,
                                            "G": 0.6})
        z = le.LevyMeasureSpec(rate=2.0,
                               jump=le.JumpDistribution.atoms(
                                   [(0.5, 0.7), (-1.2, 0.3)]),
                               tail_moment_order=3.0, driver_alpha=alpha)
        setup = le.ExperimentSetup(driver=le.StableDriverSpec(alpha, 1), field=fld,
                                   zspec=z, x0=[0.0], T=0.5, g=g)
        pt = le.estimate_weak_error(setup, delta=0.5, delta_ref=0.5 / 1024,
                                    n_paths=100_000, seed=202)
        worst = max(worst, abs(pt.estimate) / pt.stderr)
    elapsed = time.time() - t0
    report(2, worst <= 3.0 and elapsed < 60.0,
           f"1-step vs 1024-step telescoping within {worst:.2f} SE (<=3), "
           f"{elapsed:.1f}s (<60s)")


@pytest.fixture(scope="module")
def smooth_rate_outcome(workers):
    cfg = parse_config("configs/smooth_rate.json")
    setup = cfg.setup()
    grids = cfg.effective["grids"]
    points, rep, env = le.run_rate_experiment(
        setup, grids["n_values"], grids["n_ref"],
        cfg.effective["mc"]["n_paths"], seed=cfg.effective["mc"]["master_seed"],
        workers=workers,
    )
    return cfg, setup, points, rep, env


@pytest.fixture(scope="module")
def hoelder_rate_outcome(workers):
    cfg = parse_config("configs/hoelder_rate.json")
    setup = cfg.setup()
    grids = cfg.effective["grids"]
    points, rep, env = le.run_rate_experiment(
        setup, grids["n_values"], grids["n_ref"],
        cfg.effective["mc"]["n_paths"], seed=cfg.effective["mc"]["master_seed"],
        workers=workers,
    )
    return cfg, setup, points, rep, env


def test_criterion_3_smooth_case_rate(smooth_rate_outcome):
    _, _, points, rep, env = smooth_rate_outcome
    ok = rep.fitted_slope >= 0.8 and env.passed
    report(3, ok, f"smooth-case fitted slope {rep.fitted_slope:.3f} (>=0.8), "
                  f"linear envelope {'holds' if env.passed else 'violated'}")


def test_criterion_4_hoelder_case_rate(hoelder_rate_outcome):
    _, _, points, rep, env = hoelder_rate_outcome
    ok = rep.fitted_slope >= 0.5 - 0.15 and env.passed
    report(4, ok, f"Hoelder-case fitted slope {rep.fitted_slope:.3f} (>=0.35), "
                  f"exponent-0.5 envelope {'holds' if env.passed else 'violated'}")


def test_criterion_5_heavy_tail_envelope(workers):
    cfg = parse_config("configs/heavy_tail_rate.json")
    setup = cfg.setup()
    grids = cfg.effective["grids"]
    points, rep, env = le.run_rate_experiment(
        setup, grids["n_values"], grids["n_ref"],
        cfg.effective["mc"]["n_paths"], seed=cfg.effective["mc"]["master_seed"],
        workers=workers,
    )
    exponent = rep.theory_exponent
    ok = env.passed and exponent == pytest.approx(0.5)
    report(5, ok, f"heavy-tail envelope at exponent {exponent:.2f} "
                  f"{'holds' if env.passed else 'violated'} "
                  f"(fitted slope {rep.fitted_slope:.3f})")


def test_criterion_6_one_step_estimate(smooth_rate_outcome, hoelder_rate_outcome):
    deltas = [2.0**-k for k in range(3, 8)]
    results = []
    for (cfg, setup, *_), tol_target in [
        (smooth_rate_outcome, 1.0),    # smooth f: rate-table slope 1
        (hoelder_rate_outcome, 0.5),   # f in C^0.75, alpha 1.5: slope 0.5
    ]:
        f = setup.f
        _, slope = le.one_step_sweep(f, setup, deltas, 1_000_000,
                                     seed=stream_seed(606, "one-step", 0))
        results.append((slope, tol_target))
    ok = all(s >= t - 0.15 for s, t in results)
    detail = ", ".join(f"slope {s:.3f} vs {t}-0.15" for s, t in results)
    report(6, ok, f"one-step sweep: {detail}")


def test_criterion_7_generator_consistency():
    u = le.make_test_function("plane-wave", {"freq": [1.0]})
    fld = le.builtin_field("constant", {"d": 1, "m": 1, "b": 1.0, "G": 1.0})
    z = le.LevyMeasureSpec(rate=2.0, jump=le.JumpDistribution.atoms([(0.5, 1.0)]),
                           tail_moment_order=1.5, driver_alpha=1.5)
    setup = le.ExperimentSetup(driver=le.StableDriverSpec(1.5, 1), field=fld,
                               zspec=z, x0=[0.0], T=1.0, g=u)
    q = le.QuadratureSpec(radial_nodes=4001, outer_cutoff=4e3, tolerance=0.05)
    rel, detail = le.generator_consistency_check(u, setup, [1e-3], 1_000_000,
                                                 seed=707, quad=q)
    report(7, rel <= 0.05,
           f"generator ratio vs quadrature: relative error {rel:.4f} (<=0.05), "
           f"MC {detail['mc_ratio']:.4f} vs {detail['quadrature_total']:.4f}")


def test_criterion_8_fractional_laplacian_quadrature():
    c11 = le.char_exponent_constant(1, 1.0)
    ok = abs(c11.value - np.pi) <= 1e-4
    worst = 0.0
    for d in (1, 2):
        for alpha in (0.5, 1.0, 1.5):
            xi = np.array([1.0]) if d == 1 else np.array([0.6, 0.8])
            u = lambda p: np.cos(p @ xi)
            q = le.QuadratureSpec(
                radial_nodes=4001,
                outer_cutoff=4e5 if alpha == 0.5 else 4e3,
                tolerance=0.25 if alpha == 0.5 else 0.05,
                angular_nodes=48,
            )
            ref = -closed_form_cd(d, alpha)
            got = le.frac_laplacian(u, np.zeros(d), alpha, q)
            worst = max(worst, abs(got - ref) / abs(ref))
    ok = ok and worst <= 1e-3
    report(8, ok, f"plane-wave identity relative error {worst:.2e} (<=1e-3), "
                  f"c(1,1) = pi to {abs(c11.value - np.pi):.1e} (<=1e-4)")


def test_criterion_9_mollifier_scalings():
    t0 = time.time()
    f = le.make_test_function("radial-power", {"beta": 0.5, "support": 3.0})
    res = le.mollifier_scaling_probe(f, 1.5, [2.0**-k for k in range(2, 9)])
    elapsed = time.time() - t0
    ok = (abs(res.slope_sup_error - 0.5) <= 0.1
          and abs(res.slope_frac_laplacian - (-1.0)) <= 0.15
          and elapsed < 60.0)
    report(9, ok, f"mollifier slopes {res.slope_sup_error:.3f} (0.5 +- 0.1) / "
                  f"{res.slope_frac_laplacian:.3f} (-1.0 +- 0.15), {elapsed:.1f}s (<60s)")


def test_criterion_10_determinism_across_worker_counts(tmp_path):
    cfg = parse_config("configs/constant_exactness.json")
    outputs = []
    for wk in (1, 4, 8):
        outdir = tmp_path / f"w{wk}"
        status = cli_run("rate", cfg, str(outdir), seed=2024, workers=wk)
        assert status == 0
        outputs.append((outdir / "points.csv").read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    report(10, ok, "points.csv byte-identical across worker counts {1, 4, 8}")
