"""Experiment configuration, orchestration, and deterministic result emission.

Subcommands: ``rate``, ``one-step``, ``check-generator``, ``sample-stable``.
Each run writes ``points.csv`` (delta, estimate, stderr, n_paths, excluded),
``report.csv`` (fitted_slope, ci_lo, ci_hi, theory_exponent, theory_label,
pass) and ``meta.json`` (effective config echo, seed, versions, wall time);
exit status is 0 iff every pass flag is true.  Floats are written with 17
significant digits and '.' decimals so identical configs reproduce
byte-identical points.csv for any worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .errors import ConfigError, LevyEulerError
from .fields import builtin_field, make_test_function
from .harness import (
    ExperimentSetup,
    envelope_check,
    generator_consistency_check,
    one_step_sweep,
    rate_model,
    run_rate_experiment,
    stream_seed,
    validate_rate_params,
)
from ._streams import stream
from .jumps import JumpDistribution, LevyMeasureSpec
from .operators import QuadratureSpec
from .stable import StableDriverSpec, sample_isotropic_increment, sample_stable_1d


def _fmt(x) -> str:
    return "%.17g" % float(x)


class ExperimentConfig:
    """Validated experiment description; ``effective`` echoes the normalized
    dict (after defaults and overrides) for meta.json round-trips."""

    def __init__(self, effective: dict):
        self.effective = effective

    # -- builders ----------------------------------------------------------

    def driver(self) -> StableDriverSpec:
        mdl = self.effective["model"]
        return StableDriverSpec(
            alpha=mdl["alpha"], dim=mdl["d"],
            wiener_normalization=mdl["wiener_normalization"],
        )

    def field(self):
        mdl = self.effective["model"]
        spec = dict(mdl["field"].get("params", {}))
        spec.setdefault("d", mdl["d"])
        spec.setdefault("m", mdl["m"])
        return builtin_field(mdl["field"]["name"], spec)

    def zspec(self):
        z = self.effective.get("z")
        if not z or z.get("rate", 0) == 0:
            return None
        jump = _jump_from_dict(z["jump"])
        return LevyMeasureSpec(rate=z["rate"], jump=jump,
                               tail_moment_order=z["tail_moment_order"],
                               driver_alpha=self.effective["model"]["alpha"])

    def test_function(self, key):
        t = self.effective.get("test", {}).get(key)
        if t is None:
            return None
        return make_test_function(t["family"], t.get("params", {}))

    def setup(self) -> ExperimentSetup:
        mdl = self.effective["model"]
        return ExperimentSetup(
            driver=self.driver(), field=self.field(), zspec=self.zspec(),
            x0=np.asarray(mdl["x0"], dtype=float), T=mdl["T"],
            g=self.test_function("g"), f=self.test_function("f"),
            variant=self.effective["variant"],
            beta=mdl.get("beta"), mu=self.effective.get("z", {}).get("tail_moment_order"),
            exclusion_threshold=self.effective["mc"]["exclusion_threshold"],
        )


def _jump_from_dict(d: dict) -> JumpDistribution:
    kind = d["kind"]
    if kind == "atoms":
        return JumpDistribution.atoms([(e["point"], e["prob"]) for e in d["atoms"]])
    if kind == "gaussian":
        return JumpDistribution.gaussian(d["mean"], d["cov"])
    if kind == "bounded-pareto":
        dirs = None
        if "directions" in d:
            dirs = (d["directions"]["vectors"], d["directions"]["weights"])
        return JumpDistribution.bounded_pareto(
            d["tail_index"], d["lower"], d["upper"], dim=d.get("dim", 1), directions=dirs
        )
    raise ConfigError([f"unknown jump kind {kind!r}"])


_DEFAULTS = {
    "variant": "main",
    "model": {"d": 1, "m": 1, "x0": [0.0], "T": 1.0,
              "wiener_normalization": "exponent-limit", "beta": None},
    "mc": {"n_paths": 100000, "master_seed": 0, "workers": 1,
           "exclusion_threshold": 1e-3},
}


def parse_config_dict(raw: dict) -> ExperimentConfig:
    """Validate a config dict, collecting every violation before raising."""
    problems = []
    eff = json.loads(json.dumps(raw))  # deep copy, JSON-normalized

    eff.setdefault("variant", _DEFAULTS["variant"])
    model = eff.setdefault("model", {})
    for k, v in _DEFAULTS["model"].items():
        model.setdefault(k, v)
    mc = eff.setdefault("mc", {})
    for k, v in _DEFAULTS["mc"].items():
        mc.setdefault(k, v)

    variant = eff["variant"]
    if variant not in ("main", "heavy-tail", "jump-diffusion"):
        problems.append(f"variant must be main|heavy-tail|jump-diffusion, got {variant!r}")

    alpha = model.get("alpha")
    if alpha is None:
        problems.append("model.alpha is required")
    elif not 0 < alpha <= 2:
        problems.append(f"model.alpha must be in (0, 2], got {alpha}")

    if model.get("T", 0) <= 0:
        problems.append("model.T must be > 0")
    needs_field = "grids" in eff or "generator" in eff or "field" in model
    if "field" not in model:
        if needs_field:
            problems.append("model.field is required")
    else:
        fld = model["field"]
        if "name" not in fld:
            problems.append("model.field.name is required")
        elif alpha is not None and alpha < 1:
            params = fld.get("params", {})
            drifty = any(params.get(k) for k in ("a", "a_amp"))
            if drifty:
                problems.append("a must be zero for alpha in (0, 1)")

    beta = model.get("beta")
    mu = eff.get("z", {}).get("tail_moment_order") if eff.get("z") else None
    if beta is not None and mu is not None and alpha is not None:
        try:
            validate_rate_params(alpha, beta, mu, variant)
        except LevyEulerError as exc:
            problems.append(str(exc))

    grids = eff.get("grids")
    if grids is not None:
        n_values = grids.get("n_values", [])
        if not n_values:
            problems.append("grids.n_values must be nonempty")
        t_val = model.get("T", 1.0)
        for n in n_values:
            if t_val / n >= 1.0:
                problems.append(
                    f"grid n={n} gives step {t_val / n} >= 1; the maximum step must "
                    "lie in (0, 1)"
                )
        n_ref = grids.get("n_ref")
        if n_ref is not None and n_values and n_ref < 16 * max(n_values):
            problems.append(
                f"grids.n_ref = {n_ref} < 16 * max(n_values) = {16 * max(n_values)}"
            )

    if mc["n_paths"] < 2:
        problems.append("mc.n_paths must be >= 2")
    if mc["workers"] < 1:
        problems.append("mc.workers must be >= 1")

    if problems:
        raise ConfigError(problems)
    cfg = ExperimentConfig(eff)
    if "field" in model:
        try:  # constructing the objects catches catalog/spec-level violations
            cfg.setup()
        except LevyEulerError as exc:
            raise ConfigError([str(exc)]) from exc
    return cfg


def parse_config(path: str) -> ExperimentConfig:
    """Load and validate a JSON experiment config from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from exc
    return parse_config_dict(raw)


# --------------------------------------------------------------------------
# output writers


def _write_points(path, points):
    lines = ["delta,estimate,stderr,n_paths,excluded"]
    for p in points:
        lines.append(
            f"{_fmt(p.delta)},{_fmt(p.estimate)},{_fmt(p.stderr)},{p.n_paths},{p.excluded}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_report(path, fitted_slope, ci, theory_exponent, theory_label, passed):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("fitted_slope,ci_lo,ci_hi,theory_exponent,theory_label,pass\n")
        fh.write(
            f"{_fmt(fitted_slope)},{_fmt(ci[0])},{_fmt(ci[1])},"
            f"{_fmt(theory_exponent)},{theory_label},{str(passed).lower()}\n"
        )


def _write_meta(path, cfg: ExperimentConfig, seed, workers, wall, extra=None):
    meta = {
        "config": cfg.effective,
        "seed": seed,
        "workers": workers,
        "versions": {
            "levy_euler": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall,
    }
    if extra:
        meta.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_error(outdir, exc):
    with open(os.path.join(outdir, "error.json"), "w", encoding="utf-8") as fh:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, fh, indent=2)
        fh.write("\n")


# --------------------------------------------------------------------------
# subcommand pipelines


def _run_rate(cfg: ExperimentConfig, outdir, seed, workers):
    eff = cfg.effective
    setup = cfg.setup()
    grids = eff["grids"]
    points, report, env = run_rate_experiment(
        setup, grids["n_values"], grids["n_ref"], eff["mc"]["n_paths"],
        seed, workers=workers,
    )
    passed = env.passed if env is not None else all(not p.usable for p in points)
    _write_points(os.path.join(outdir, "points.csv"), points)
    _write_report(os.path.join(outdir, "report.csv"), report.fitted_slope,
                  report.slope_ci, report.theory_exponent, report.theory_rate_label,
                  passed)
    return passed, {"envelope_constant": None if env is None else env.constant}


def _run_one_step(cfg: ExperimentConfig, outdir, seed, workers):
    eff = cfg.effective
    setup = cfg.setup()
    f = setup.f or setup.g
    if f is None:
        raise ConfigError(["one-step runs need test.f (or test.g) in the config"])
    deltas = [eff["model"]["T"] / n for n in eff["grids"]["n_values"]]
    points, slope = one_step_sweep(f, setup, deltas, eff["mc"]["n_paths"], seed,
                                   s_panel=eff.get("one_step", {}).get("s_panel", 8))
    beta_f = f.declared_beta
    alpha = setup.driver.alpha
    if beta_f is None or beta_f > alpha:
        label, exponent = "linear", 1.0
    else:
        label, exponent = rate_model(alpha, beta_f, beta_f, "main")
    tol = eff.get("one_step", {}).get("slope_tolerance", 0.15)
    passed = slope >= exponent - tol
    _write_points(os.path.join(outdir, "points.csv"), points)
    _write_report(os.path.join(outdir, "report.csv"), slope, (slope, slope),
                  exponent, label, passed)
    return passed, {"one_step_slope": slope}


def _run_check_generator(cfg: ExperimentConfig, outdir, seed, workers):
    eff = cfg.effective
    setup = cfg.setup()
    gen = eff.get("generator", {})
    u = setup.g
    if u is None:
        raise ConfigError(["check-generator runs need test.g in the config"])
    h_panel = gen.get("h_panel", [1e-3])
    tol = gen.get("tolerance", 0.05)
    qspec = QuadratureSpec(**gen.get("quadrature", {})) if gen.get("quadrature") else None
    rel, detail = generator_consistency_check(u, setup, h_panel,
                                              eff["mc"]["n_paths"], seed, qspec)
    passed = rel <= tol
    lines = ["delta,estimate,stderr,n_paths,excluded"]
    for h, r, s in zip(h_panel, detail["mc_ratios"], detail["mc_stderrs"]):
        lines.append(f"{_fmt(h)},{_fmt(r)},{_fmt(s)},{eff['mc']['n_paths']},0")
    with open(os.path.join(outdir, "points.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_report(os.path.join(outdir, "report.csv"), rel, (rel, rel), tol,
                  "generator-consistency", passed)
    return passed, {"relative_error": rel, "quadrature_total": detail["quadrature_total"]}


def _run_sample_stable(cfg: ExperimentConfig, outdir, seed, workers):
    eff = cfg.effective
    mdl = eff["model"]
    smp = eff.get("sample", {})
    n = int(smp.get("n_samples", eff["mc"]["n_paths"]))
    dt = float(smp.get("dt", 1.0))
    d = mdl["d"]
    rng = stream(seed, "sample")
    if d == 1 and smp.get("one_dimensional", True):
        vals = sample_stable_1d(mdl["alpha"], smp.get("skew", 0.0), rng, size=n)[:, None]
    else:
        spec = StableDriverSpec(mdl["alpha"], d, mdl["wiener_normalization"])
        vals = sample_isotropic_increment(spec, dt, rng, size=n)
    with open(os.path.join(outdir, "samples.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"x{i}" for i in range(d)) + "\n")
        for row in vals:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    q = np.quantile(vals, [0.25, 0.5, 0.75], axis=0)
    moments = {
        "n": n,
        "mean": [float(v) for v in vals.mean(axis=0)],
        "variance": [float(v) for v in vals.var(axis=0, ddof=1)],
        "quartiles": {"q25": list(map(float, q[0])), "q50": list(map(float, q[1])),
                      "q75": list(map(float, q[2]))},
    }
    with open(os.path.join(outdir, "moments.json"), "w", encoding="utf-8") as fh:
        json.dump(moments, fh, indent=2)
        fh.write("\n")
    return True, {"moments": moments}


_PIPELINES = {
    "rate": _run_rate,
    "one-step": _run_one_step,
    "check-generator": _run_check_generator,
    "sample-stable": _run_sample_stable,
}


def run(subcommand: str, config: ExperimentConfig, outdir: str,
        seed=None, workers=None) -> int:
    """Execute one pipeline; returns the process exit status (0 iff pass)."""
    if subcommand not in _PIPELINES:
        raise ConfigError([f"unknown subcommand {subcommand!r}"])
    os.makedirs(outdir, exist_ok=True)
    eff = config.effective
    seed = int(seed if seed is not None else eff["mc"]["master_seed"])
    workers = int(workers if workers is not None else eff["mc"]["workers"])
    eff = json.loads(json.dumps(eff))
    eff["mc"]["master_seed"] = seed
    eff["mc"]["workers"] = workers
    config = ExperimentConfig(eff)
    t0 = time.time()
    try:
        passed, extra = _PIPELINES[subcommand](config, outdir, seed, workers)
    except Exception as exc:  # any failure: machine-readable error, nonzero exit
        _write_error(outdir, exc)
        return 2
    _write_meta(os.path.join(outdir, "meta.json"), config, seed, workers,
                time.time() - t0, extra)
    return 0 if passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levy-euler",
        description="Weak Euler experiments for stable-driven SDEs with jumps",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _PIPELINES:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="override mc.master_seed (also: LEVY_EULER_SEED)")
        sp.add_argument("--workers", type=int, default=None,
                        help="override mc.workers (also: LEVY_EULER_WORKERS)")
    args = parser.parse_args(argv)

    seed = args.seed
    if seed is None and os.environ.get("LEVY_EULER_SEED"):
        seed = int(os.environ["LEVY_EULER_SEED"])
    workers = args.workers
    if workers is None and os.environ.get("LEVY_EULER_WORKERS"):
        workers = int(os.environ["LEVY_EULER_WORKERS"])

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        os.makedirs(args.out, exist_ok=True)
        _write_error(args.out, exc)
        print(str(exc), file=sys.stderr)
        return 2
    return run(args.subcommand, cfg, args.out, seed=seed, workers=workers)


if __name__ == "__main__":
    sys.exit(main())
