"""Monte-Carlo weak-error estimation, rate fitting, the theoretical rate
table, one-step checks, and generator-consistency checks.

Every estimate is a pure function of (experiment setup, seed): paths are
simulated in fixed-size blocks with per-block streams derived from the seed,
and block partials are reduced in block order, so reruns are bit-identical
regardless of worker count.  Workers parallelize over blocks via fork.
"""

from __future__ import annotations

import multiprocessing
import zlib
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ._streams import block_counts, stream
from .errors import InsufficientPointsError, ValidationError
from .euler import TimeGrid, make_uniform_grid, simulate_paths
from .fields import TestFunction
from .jumps import LevyMeasureSpec, levy_increment_with_counts
from .operators import (QuadratureSpec, apply_principal, apply_subordinated,
                        default_quadrature)
from .stable import StableDriverSpec, sample_isotropic_increment


# --------------------------------------------------------------------------
# experiment description


@dataclass(frozen=True)
class ExperimentSetup:
    """Everything an estimator needs: model, jump measure, test functions,
    declared regularities, and the rate-variant hypothesis parameters."""

    driver: StableDriverSpec
    field: CoefficientField
    zspec: LevyMeasureSpec | None
    x0: np.ndarray
    T: float
    g: TestFunction | None = None
    f: TestFunction | None = None
    variant: str = "main"
    beta: float | None = None
    mu: float | None = None
    exclusion_threshold: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        if self.x0.size != self.driver.dim:
            raise ValidationError("x0 dimension must match the driver dimension")
        if self.T <= 0:
            raise ValidationError("T must be > 0")


# --------------------------------------------------------------------------
# theoretical rate table


def _check(cond, msg, problems):
    if not cond:
        problems.append(msg)


def validate_rate_params(alpha, beta, mu, variant):
    """Hypothesis gate for the selected variant; raises naming each violated
    inequality."""
    problems = []
    _check(0 < alpha <= 2, f"need alpha in (0, 2], got {alpha}", problems)
    _check(0 < beta < 3, f"need beta in (0, 3), got {beta}", problems)
    if variant == "main":
        _check(beta <= mu, f"main variant needs 0 < beta <= mu, got beta={beta}, mu={mu}",
               problems)
        _check(mu < alpha + beta,
               f"main variant needs mu < alpha + beta, got mu={mu} >= {alpha + beta}", problems)
    elif variant == "heavy-tail":
        _check(beta <= mu, f"heavy-tail variant needs beta <= mu, got beta={beta}, mu={mu}",
               problems)
        _check(mu < alpha, f"heavy-tail variant needs mu < alpha, got mu={mu} >= alpha={alpha}",
               problems)
    elif variant == "jump-diffusion":
        _check(alpha == 2, f"jump-diffusion variant needs alpha = 2, got {alpha}", problems)
        _check(0 < mu < 3, f"jump-diffusion variant needs mu in (0, 3), got {mu}", problems)
        if not (mu < 2 or (mu == 2 and beta == 2) or (mu > 2 and beta > 2)):
            problems.append(
                "jump-diffusion rate is defined for mu < 2, for mu = beta = 2, "
                f"or for mu > 2 and beta > 2; got mu={mu}, beta={beta}"
            )
    else:
        problems.append(f"unknown variant {variant!r}")
    if problems:
        raise ValidationError("; ".join(problems))


def rate_model(alpha, beta, mu, variant):
    """(label, exponent) of the theoretical rate for the given hypotheses.

    label is one of 'power', 'log-linear', 'linear'; exponent is the power
    for 'power' and 1 otherwise.
    """
    validate_rate_params(alpha, beta, mu, variant)
    if variant == "main":
        if beta < alpha:
            return "power", beta / alpha
        if beta == alpha:
            return "log-linear", 1.0
        return "linear", 1.0
    if variant == "heavy-tail":
        return "power", min(beta, mu) / alpha
    # jump-diffusion
    if mu < 2:
        return "power", min(beta, mu) / 2.0
    if mu == 2 and beta == 2:
        return "log-linear", 1.0
    return "linear", 1.0


def theoretical_rate(alpha, beta, mu, variant, delta):
    """Value of the theoretical rate bound r(delta) for the given variant."""
    if not 0 < delta < 1:
        raise ValidationError(f"delta must be in (0, 1), got {delta}")
    label, p = rate_model(alpha, beta, mu, variant)
    if label == "power":
        return float(delta**p)
    if label == "log-linear":
        return float(delta * (1 + abs(np.log(delta))))
    return float(delta)


# --------------------------------------------------------------------------
# block-parallel Monte Carlo core

_PAYLOAD = None  # set in the parent before forking workers


def _block_stats(args):
    """Simulate one block and return (sum, sumsq, n_effective, excluded, jumps)."""
    setup, grid, kind, seed, block_index, n_block = args
    rng = stream(seed, "paths", block_index)
    batch = simulate_paths(setup.x0, setup.field, setup.driver, setup.zspec, grid,
                           f=(setup.f.eval if kind == "running" and setup.f else None),
                           rng=rng, n_paths=n_block)
    ok = ~batch.excluded
    if kind == "terminal":
        vals = np.asarray(setup.g.eval(batch.terminal))[ok]
    elif kind == "running":
        vals = batch.running_integral[ok]
    else:
        raise ValidationError(f"unknown estimand kind {kind!r}")
    return (
        float(np.sum(vals)),
        float(np.sum(vals * vals)),
        int(ok.sum()),
        int(batch.excluded.sum()),
        int(batch.jump_count[ok].sum()),
    )


def _worker(block_index):
    setup, grid, kind, seed, counts = _PAYLOAD
    return _block_stats((setup, grid, kind, seed, block_index, counts[block_index]))


class EstimateResult:
    """Mean/stderr plus diagnostics of one Monte-Carlo estimate."""

    __slots__ = ("mean", "stderr", "n_paths", "excluded", "jumps")

    def __init__(self, mean, stderr, n_paths, excluded, jumps):
        self.mean = mean
        self.stderr = stderr
        self.n_paths = n_paths
        self.excluded = excluded
        self.jumps = jumps


def estimate_expectation(kind, setup: ExperimentSetup, grid: TimeGrid,
                         n_paths: int, seed: int, workers: int = 1) -> EstimateResult:
    """Parallel Monte-Carlo mean and CLT standard error of g(Y_T) ('terminal')
    or of the left-endpoint running integral of f ('running').

    Deterministic given (setup, grid, kind, seed) for any worker count.
    """
    if n_paths < 2:
        raise ValidationError("n_paths must be >= 2")
    if kind == "terminal" and setup.g is None:
        raise ValidationError("terminal estimand needs g")
    if kind == "running" and setup.f is None:
        raise ValidationError("running estimand needs f")
    counts = block_counts(n_paths)
    n_blocks = len(counts)

    global _PAYLOAD
    if workers > 1 and n_blocks > 1:
        _PAYLOAD = (setup, grid, kind, seed, counts)
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=min(workers, n_blocks)) as pool:
                parts = pool.map(_worker, range(n_blocks), chunksize=max(1, n_blocks // (4 * workers)))
        finally:
            _PAYLOAD = None
    else:
        parts = [_block_stats((setup, grid, kind, seed, i, counts[i])) for i in range(n_blocks)]

    arr = np.asarray(parts, dtype=np.float64)  # block-ordered: reduction is worker-independent
    s1 = float(np.sum(arr[:, 0]))
    s2 = float(np.sum(arr[:, 1]))
    n_eff = int(np.sum(arr[:, 2]))
    excluded = int(np.sum(arr[:, 3]))
    jumps = int(np.sum(arr[:, 4]))

    if excluded > setup.exclusion_threshold * n_paths:
        raise ValidationError(
            f"excluded fraction {excluded}/{n_paths} exceeds threshold "
            f"{setup.exclusion_threshold}"
        )
    if n_eff < 2:
        raise ValidationError("fewer than 2 effective paths")
    mean = s1 / n_eff
    var = max(s2 - s1 * s1 / n_eff, 0.0) / (n_eff - 1)
    return EstimateResult(mean, float(np.sqrt(var / n_eff)), n_paths, excluded, jumps)


# --------------------------------------------------------------------------
# weak-error points and rate reports


@dataclass(frozen=True)
class WeakErrorPoint:
    delta: float
    estimate: float
    stderr: float
    n_paths: int
    excluded: int

    @property
    def usable(self) -> bool:
        return abs(self.estimate) > 3 * self.stderr


@dataclass(frozen=True)
class RateReport:
    points: tuple
    fitted_slope: float
    slope_ci: tuple
    theory_rate_label: str
    theory_exponent: float
    dropped: int = 0
    residual_power: float = float("nan")
    residual_loglinear: float = float("nan")


def estimate_weak_error(setup: ExperimentSetup, delta: float, delta_ref: float,
                        n_paths: int, seed: int, workers: int = 1,
                        kind: str = "terminal") -> WeakErrorPoint:
    """Signed weak-error estimate: coarse-grid mean minus fine-reference mean,
    with pooled standard error; coarse and reference use independent streams.
    """
    if delta_ref > delta / 16:
        raise ValidationError(
            f"reference step {delta_ref} must be <= delta/16 = {delta / 16}"
        )
    n_c = int(round(setup.T / delta))
    n_r = int(round(setup.T / delta_ref))
    coarse = estimate_expectation(kind, setup, make_uniform_grid(setup.T, n_c),
                                  n_paths, stream_seed(seed, "coarse", n_c), workers)
    ref = estimate_expectation(kind, setup, make_uniform_grid(setup.T, n_r),
                               n_paths, stream_seed(seed, "reference", n_r), workers)
    return _weak_point(coarse, ref, setup.T / n_c)


def _weak_point(coarse: EstimateResult, ref: EstimateResult, delta: float) -> WeakErrorPoint:
    return WeakErrorPoint(
        delta=float(delta),
        estimate=coarse.mean - ref.mean,
        stderr=float(np.hypot(coarse.stderr, ref.stderr)),
        n_paths=coarse.n_paths,
        excluded=coarse.excluded + ref.excluded,
    )


def stream_seed(master_seed: int, label: str, index: int) -> int:
    """Derived integer sub-seed for a labelled estimator run."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF,
                                 zlib.crc32(label.encode()), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def run_rate_experiment(setup: ExperimentSetup, n_values, n_ref: int, n_paths: int,
                        seed: int, workers: int = 1, kind: str = "terminal"):
    """Weak-error sweep against one shared fine reference.

    Returns (points, report, envelope) with points sorted by delta descending.
    """
    n_values = sorted(int(n) for n in n_values)
    if n_ref < 16 * max(n_values):
        raise ValidationError(
            f"reference grid must satisfy n_ref >= 16 * max(n) = {16 * max(n_values)}"
        )
    ref = estimate_expectation(kind, setup, make_uniform_grid(setup.T, n_ref),
                               n_paths, stream_seed(seed, "reference", n_ref), workers)
    points = []
    for n in n_values:
        coarse = estimate_expectation(kind, setup, make_uniform_grid(setup.T, n),
                                      n_paths, stream_seed(seed, "coarse", n), workers)
        points.append(_weak_point(coarse, ref, setup.T / n))
    points.sort(key=lambda p: -p.delta)
    report = fit_rate(points, model="power", alpha=setup.driver.alpha,
                      beta=setup.beta, mu=setup.mu, variant=setup.variant,
                      strict=False)
    env = None
    if setup.beta is not None and setup.mu is not None:
        env = envelope_check(points, setup.driver.alpha, setup.beta, setup.mu, setup.variant)
    return points, report, env


def fit_rate(points, model: str = "power", *, alpha=None, beta=None, mu=None,
             variant="main", strict: bool = True) -> RateReport:
    """Least-squares convergence-order fit over usable points.

    Points indistinguishable from Monte-Carlo noise (|estimate| <= 3 stderr)
    are dropped; fewer than 3 usable points is an error when ``strict`` else
    a NaN-slope report.  The power model regresses log|estimate| on
    log delta (95% CI from residuals); the log-linear model fits
    |estimate| = c * delta * (1 + |ln delta|) by scaling and reports the
    residual comparison against the pure power law.
    """
    points = sorted(points, key=lambda p: -p.delta)
    usable = [p for p in points if p.usable]
    dropped = len(points) - len(usable)
    theory_label, theory_exp = ("power", float("nan"))
    if beta is not None and mu is not None and alpha is not None:
        theory_label, theory_exp = rate_model(alpha, beta, mu, variant)
    if len(usable) < 3:
        if strict:
            raise InsufficientPointsError(
                f"need >= 3 usable points, have {len(usable)} (dropped {dropped} within noise)"
            )
        return RateReport(tuple(points), float("nan"), (float("nan"), float("nan")),
                          theory_label, theory_exp, dropped)

    x = np.log2([p.delta for p in usable])
    y = np.log2([abs(p.estimate) for p in usable])
    n = x.size
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sxx = float(np.sum((x - x.mean()) ** 2))
    if n > 2:
        se = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx))
        tq = float(sps.t.ppf(0.975, n - 2))
        ci = (float(slope - tq * se), float(slope + tq * se))
    else:
        ci = (float(slope), float(slope))
    res_power = float(np.sum(resid**2))

    deltas = np.array([p.delta for p in usable])
    basis = np.log2(deltas * (1 + np.abs(np.log(deltas))))
    c_ll = float(np.mean(y - basis))
    res_ll = float(np.sum((y - (basis + c_ll)) ** 2))

    return RateReport(tuple(points), float(slope), ci, theory_label, theory_exp,
                      dropped, res_power, res_ll)


@dataclass(frozen=True)
class EnvelopeResult:
    passed: bool
    constant: float
    margins: tuple  # per usable point: C*r(delta) + slack - |estimate|, >= 0 when under
    usable: int


def envelope_check(points, alpha, beta, mu, variant) -> EnvelopeResult:
    """Upper-bound acceptance semantics: anchor C at the coarsest usable point
    and require every usable point to stay below C * r(delta).

    Monte-Carlo noise is allowed for through a 3-stderr slack on both the
    anchor and the checked points; empirical decay faster than the bound is
    a pass by construction.
    """
    usable = [p for p in sorted(points, key=lambda q: -q.delta) if p.usable]
    if not usable:
        return EnvelopeResult(True, float("nan"), (), 0)
    anchor = usable[0]
    r0 = theoretical_rate(alpha, beta, mu, variant, anchor.delta)
    c = (abs(anchor.estimate) + 3 * anchor.stderr) / r0
    margins = []
    ok = True
    for p in usable[1:]:
        bound = c * theoretical_rate(alpha, beta, mu, variant, p.delta)
        margin = bound + 3 * p.stderr - abs(p.estimate)
        margins.append(float(margin))
        ok &= margin >= 0
    return EnvelopeResult(bool(ok), float(c), tuple(margins), len(usable))


# --------------------------------------------------------------------------
# one-step estimate


def _frozen_step_samples(setup: ExperimentSetup, h: float, n: int, rng):
    """One Euler step of size h from x0 with coefficients frozen at x0."""
    x0 = setup.x0
    d = setup.driver.dim
    a0 = setup.field.a(x0[None, :])[0]
    b0 = setup.field.b(x0[None, :])[0]
    du = sample_isotropic_increment(setup.driver, h, rng, size=n)
    y = x0[None, :] + h * a0[None, :] + du @ b0.T
    if setup.zspec is not None and setup.zspec.rate > 0:
        g0 = setup.field.G(x0[None, :])[0]
        dz, _ = levy_increment_with_counts(setup.zspec, h, rng, size=n)
        y = y + dz @ g0.T
    return y


def one_step_check(f: TestFunction, setup: ExperimentSetup, delta: float,
                   n_paths: int, seed: int, s_panel: int = 8):
    """Max over a panel of s in (0, delta] of |E[f(Y_s) - f(Y_0)]| from a fixed
    state with frozen coefficients, reported with the theoretical one-step
    bound r(delta, alpha, beta_f).

    Returns (max_over_s, bound, max_stderr).
    """
    if s_panel < 1:
        raise ValidationError("s_panel must be >= 1")
    f0 = float(f(setup.x0[None, :])[0])
    best, best_se = 0.0, 0.0
    for j in range(1, s_panel + 1):
        h = delta * j / s_panel
        rng = stream(seed, "one-step", j)
        y = _frozen_step_samples(setup, h, n_paths, rng)
        vals = np.asarray(f.eval(y)) - f0
        m = float(vals.mean())
        se = float(vals.std(ddof=1) / np.sqrt(n_paths))
        if abs(m) > best:
            best, best_se = abs(m), se
    beta_f = f.declared_beta
    if beta_f is None or beta_f > setup.driver.alpha:
        bound = delta  # smooth / beta > alpha branch of the rate table
    else:
        bound = theoretical_rate(setup.driver.alpha, beta_f, beta_f, "main", delta)
    return best, float(bound), best_se


def one_step_sweep(f: TestFunction, setup: ExperimentSetup, deltas, n_paths: int,
                   seed: int, s_panel: int = 8):
    """One-step maxima across a delta sweep plus their log-log slope."""
    deltas = sorted(float(d) for d in deltas)
    points = []
    for k, dl in enumerate(deltas):
        mx, bound, se = one_step_check(f, setup, dl, n_paths,
                                       stream_seed(seed, "one-step-level", k), s_panel)
        points.append(WeakErrorPoint(dl, mx, se, n_paths, 0))
    usable = [p for p in points if p.usable]
    if len(usable) < 3:
        raise InsufficientPointsError(f"one-step sweep: {len(usable)} usable points < 3")
    x = np.log2([p.delta for p in usable])
    y = np.log2([abs(p.estimate) for p in usable])
    slope = float(np.polyfit(x, y, 1)[0])
    return points, slope


# --------------------------------------------------------------------------
# generator consistency


def generator_consistency_check(u: TestFunction, setup: ExperimentSetup, h_panel,
                                n_paths: int, seed: int,
                                quad: QuadratureSpec | None = None):
    """Monte-Carlo generator ratio against the quadrature operator sum.

    With coefficients frozen at x0 the one-step law is exact, so
    (E[u(Y_h)] - u(x0)) / h converges to the full generator at x0 as h -> 0;
    the comparison side is the principal plus subordinated quadrature.
    Returns (relative_error, detail dict).  The Monte-Carlo ratio is
    extrapolated linearly in h when the panel has more than one point.
    """
    x0 = setup.x0
    alpha = setup.driver.alpha
    u0 = float(u(x0[None, :])[0])
    h_panel = sorted(float(h) for h in np.atleast_1d(h_panel))

    ratios, errs = [], []
    for k, h in enumerate(h_panel):
        rng = stream(seed, "generator", k)
        y = _frozen_step_samples(setup, h, n_paths, rng)
        vals = np.asarray(u.eval(y))
        ratios.append((float(vals.mean()) - u0) / h)
        errs.append(float(vals.std(ddof=1) / np.sqrt(n_paths)) / h)

    if len(h_panel) > 1:
        coef = np.polyfit(h_panel, ratios, 1)
        mc = float(np.polyval(coef, 0.0))
    else:
        mc = ratios[0]

    scale = setup.driver.gaussian_variance_scale if alpha == 2.0 else 1.0
    if quad is None and alpha < 2.0:
        quad = default_quadrature(alpha, setup.driver.dim)
    principal = apply_principal(x0, setup.field, u.eval, x0, alpha, quad,
                                wiener_variance_scale=scale)
    subordinated = apply_subordinated(x0, setup.field, setup.zspec, u.eval, x0, alpha)
    exact = principal + subordinated
    rel = abs(mc - exact) / max(abs(exact), 1e-300)
    detail = {
        "mc_ratio": mc,
        "mc_ratios": ratios,
        "mc_stderrs": errs,
        "principal": principal,
        "subordinated": subordinated,
        "quadrature_total": exact,
    }
    return float(rel), detail
