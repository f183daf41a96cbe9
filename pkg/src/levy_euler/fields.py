"""Coefficient fields and test functions with declared regularity, plus
numerical Hoelder-Zygmund seminorm probes and nondegeneracy certificates.

Regularity is declared-plus-probed: the dyadic seminorm probe can certify a
declared exponent is wrong (divergence under refinement) and gives evidence
when it is right, which is the strongest desk-scale check available.  Probe
grids are deterministic so certificates are reproducible.

All maps are vectorized over points: inputs of shape (n, d), outputs (n, d)
for drifts, (n, d, d) for the principal matrix, (n, d, m) for the jump
loading, (n,) for scalar test functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import DegeneracyError, ValidationError

#: default truncation level of the lacunary (Weierstrass-type) sums
WEIERSTRASS_LEVELS = 12


# --------------------------------------------------------------------------
# building blocks


def _smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    lo = t <= 0
    hi = t >= 1
    mid = ~(lo | hi)
    out = np.where(hi, 1.0, 0.0)
    tm = np.clip(t, 1e-12, 1 - 1e-12)
    e0 = np.exp(-1.0 / tm)
    e1 = np.exp(-1.0 / (1.0 - tm))
    out = np.where(mid, e0 / (e0 + e1), out)
    return out


def smooth_cutoff(r, r_plateau=0.5, r_support=1.0):
    """Radial cutoff: 1 on [0, r_plateau], smooth to 0 at r_support."""
    return 1.0 - _smooth_step((np.asarray(r, float) - r_plateau) / (r_support - r_plateau))


def weierstrass_sum(t, beta, levels=WEIERSTRASS_LEVELS, lam=2.0):
    """Lacunary cosine sum sum_j lam^(-j*beta) cos(lam^j t): Hoelder exponent beta.

    For lam = 2 the cosines are generated by the double-angle recursion
    (one cos evaluation total), which matters in the simulation hot loop.
    """
    t = np.asarray(t, dtype=float)
    if lam == 2.0:
        c = np.cos(t)
        out = c.copy()
        w = 1.0
        for _ in range(1, levels):
            c = 2.0 * c * c - 1.0
            w *= 2.0 ** (-beta)
            out += w * c
        return out
    out = np.zeros_like(t)
    for j in range(levels):
        out += lam ** (-j * beta) * np.cos(lam**j * t)
    return out


def weierstrass_sup(beta, levels=WEIERSTRASS_LEVELS, lam=2.0):
    """Sup bound of the lacunary sum."""
    return float(sum(lam ** (-j * beta) for j in range(levels)))


# --------------------------------------------------------------------------
# coefficient fields


@dataclass(frozen=True)
class CoefficientField:
    """Bounded coefficient maps with declared regularity and a nondegeneracy witness.

    ``c1`` is the declared lower bound on |det b| (checked on probe grids);
    ``bounds`` holds sup-norm bounds per map.  ``a_is_zero`` records that the
    drift vanishes identically, required whenever the driver has alpha < 1.
    """

    d: int
    m: int
    a: Callable[[np.ndarray], np.ndarray]
    b: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    beta_a: float | None
    beta_b: float | None
    beta_G: float | None
    bounds: dict
    c1: float
    a_is_zero: bool
    name: str = "custom"
    params: dict = dc_field(default_factory=dict)


def _vec_const(value, shape):
    arr = np.broadcast_to(np.asarray(value, dtype=float), shape).copy()

    def f(x):
        return np.broadcast_to(arr, (x.shape[0],) + shape)

    return f


def _diag_profile(profile, d, axis=0):
    """Scalar profile of one coordinate -> (n, d, d) multiple of the identity."""
    eye = np.eye(d)

    def f(x):
        v = profile(x[:, axis])
        return v[:, None, None] * eye[None, :, :]

    return f


def _rect_profile(profile, d, m, axis=0):
    base = np.zeros((d, m))
    for i in range(min(d, m)):
        base[i, i] = 1.0

    def f(x):
        v = profile(x[:, axis])
        return v[:, None, None] * base[None, :, :]

    return f


def _zero_map(d, cols):
    def f(x):
        return np.zeros((x.shape[0], d) if cols is None else (x.shape[0], d, cols))

    return f


def builtin_field(name: str, params: dict) -> CoefficientField:
    """Catalog of validated coefficient fields.

    Names: ``constant``, ``affine-bounded``, ``sinusoidal``,
    ``hoelder-perturbed``.  ``params`` always carries ``d`` and ``m``;
    remaining keys are per-catalog-entry (see the builders below).
    """
    params = dict(params)
    d = int(params.get("d", 1))
    m = int(params.get("m", 1))
    builders = {
        "constant": _build_constant,
        "affine-bounded": _build_affine_bounded,
        "sinusoidal": _build_sinusoidal,
        "hoelder-perturbed": _build_hoelder_perturbed,
    }
    if name not in builders:
        raise ValidationError(f"unknown field {name!r}; catalog: {sorted(builders)}")
    fld = builders[name](d, m, params)
    # construction-time certificate on a default probe box
    half = float(params.get("probe_halfwidth", np.pi))
    box = (np.full(d, -half), np.full(d, half))
    nondegeneracy_check(fld, box, grid_points=int(params.get("probe_points", 65)))
    return fld


def _build_constant(d, m, p):
    a0 = np.broadcast_to(np.asarray(p.get("a", 0.0), float), (d,))
    b0 = np.asarray(p.get("b", 1.0), dtype=float)
    b0 = b0 * np.eye(d) if b0.ndim == 0 else np.atleast_2d(b0)
    G0 = np.asarray(p.get("G", 0.0), dtype=float)
    if G0.ndim == 0:
        G0 = G0 * np.eye(d, m)
    det = abs(np.linalg.det(b0))
    if det <= 0:
        raise ValidationError("constant field: b must be nonsingular")
    return CoefficientField(
        d=d, m=m,
        a=_vec_const(a0, (d,)), b=_vec_const(b0, (d, d)),
        G=_vec_const(G0, (d, m)),
        beta_a=None, beta_b=None, beta_G=None,
        bounds={"a": float(np.linalg.norm(a0)), "b": float(np.linalg.norm(b0)),
                "G": float(np.linalg.norm(G0))},
        c1=det * (1 - 1e-9), a_is_zero=bool(np.all(a0 == 0)),
        name="constant", params=p,
    )


def _build_affine_bounded(d, m, p):
    """Smoothly clamped affine dependence: base + amp * tanh(<w, x>)."""
    b_base = float(p.get("b_base", 1.0))
    b_amp = float(p.get("b_amp", 0.0))
    a_amp = float(p.get("a_amp", 0.0))
    G_base = float(p.get("G_base", 0.0))
    G_amp = float(p.get("G_amp", 0.0))
    w = np.broadcast_to(np.asarray(p.get("w", 1.0), float), (d,))
    if b_base - abs(b_amp) <= 0:
        raise ValidationError("affine-bounded: need b_base > |b_amp| for nondegeneracy")

    def a_map(x):
        return a_amp * np.tanh(x @ w)[:, None] * np.ones((1, d))

    def b_profile(t):
        return b_base + b_amp * np.tanh(t)

    def G_profile(t):
        return G_base + G_amp * np.tanh(t)

    return CoefficientField(
        d=d, m=m,
        a=a_map if a_amp else _zero_map(d, None),
        b=_diag_profile(b_profile, d, axis=int(p.get("axis", 0))),
        G=_rect_profile(G_profile, d, m, axis=int(p.get("axis", 0))),
        beta_a=None, beta_b=None, beta_G=None,
        bounds={"a": abs(a_amp) * np.sqrt(d), "b": (b_base + abs(b_amp)) * np.sqrt(d),
                "G": (abs(G_base) + abs(G_amp)) * np.sqrt(min(d, m))},
        c1=(b_base - abs(b_amp)) ** d * (1 - 1e-9),
        a_is_zero=a_amp == 0.0,
        name="affine-bounded", params=p,
    )


def _build_sinusoidal(d, m, p):
    b_base = float(p.get("b_base", 1.5))
    b_amp = float(p.get("b_amp", 0.25))
    b_freq = float(p.get("b_freq", 1.0))
    a_amp = float(p.get("a_amp", 0.0))
    a_freq = float(p.get("a_freq", 1.0))
    G_base = float(p.get("G_base", 0.0))
    G_amp = float(p.get("G_amp", 0.0))
    G_freq = float(p.get("G_freq", 1.0))
    axis = int(p.get("axis", 0))
    if b_base - abs(b_amp) <= 0:
        raise ValidationError("sinusoidal: need b_base > |b_amp| for nondegeneracy")

    def a_map(x):
        return a_amp * np.sin(a_freq * x[:, axis])[:, None] * np.ones((1, d))

    return CoefficientField(
        d=d, m=m,
        a=a_map if a_amp else _zero_map(d, None),
        b=_diag_profile(lambda t: b_base + b_amp * np.sin(b_freq * t), d, axis),
        G=_rect_profile(lambda t: G_base + G_amp * np.sin(G_freq * t), d, m, axis),
        beta_a=None, beta_b=None, beta_G=None,
        bounds={"a": abs(a_amp) * np.sqrt(d), "b": (b_base + abs(b_amp)) * np.sqrt(d),
                "G": (abs(G_base) + abs(G_amp)) * np.sqrt(min(d, m))},
        c1=(b_base - abs(b_amp)) ** d * (1 - 1e-9),
        a_is_zero=a_amp == 0.0,
        name="sinusoidal", params=p,
    )


def _build_hoelder_perturbed(d, m, p):
    """Smooth base plus a lacunary perturbation of exact regularity beta."""
    beta = float(p["beta"])
    if not 0 < beta <= 1:
        raise ValidationError("hoelder-perturbed: beta must be in (0, 1]")
    b_base = float(p.get("b_base", 2.0))
    amp = float(p.get("amplitude", 0.1))
    levels = int(p.get("levels", WEIERSTRASS_LEVELS))
    lam = float(p.get("lam", 2.0))
    G_base = float(p.get("G_base", 0.0))
    G_amp = float(p.get("G_amp", 0.0))
    axis = int(p.get("axis", 0))
    wsup = weierstrass_sup(beta, levels, lam)
    if b_base - abs(amp) * wsup <= 0:
        raise ValidationError(
            f"hoelder-perturbed: perturbation too large (|amp|*sup = {abs(amp) * wsup:.3g} "
            f">= b_base = {b_base})"
        )

    def b_profile(t):
        return b_base + amp * weierstrass_sum(t, beta, levels, lam)

    def G_profile(t):
        return G_base + G_amp * weierstrass_sum(t, beta, levels, lam)

    return CoefficientField(
        d=d, m=m,
        a=_zero_map(d, None),
        b=_diag_profile(b_profile, d, axis),
        G=(_rect_profile(G_profile, d, m, axis) if (G_base or G_amp) else _zero_map(d, m)),
        beta_a=None, beta_b=beta, beta_G=beta if G_amp else None,
        bounds={"a": 0.0, "b": (b_base + abs(amp) * wsup) * np.sqrt(d),
                "G": (abs(G_base) + abs(G_amp) * wsup) * np.sqrt(min(d, m))},
        c1=(b_base - abs(amp) * wsup) ** d * (1 - 1e-9),
        a_is_zero=True,
        name="hoelder-perturbed", params=p,
    )


# --------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """Bounded scalar map with a declared Hoelder-Zygmund regularity.

    ``declared_beta`` is None for smooth families.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    declared_beta: float | None
    family: str
    params: dict = dc_field(default_factory=dict)

    def __call__(self, x):
        return self.eval(np.atleast_2d(np.asarray(x, dtype=float)))


def make_test_function(family: str, params: dict) -> TestFunction:
    """Families: smooth-gaussian-mixture, radial-power, weierstrass."""
    p = dict(params)
    if family == "smooth-gaussian-mixture":
        centers = np.atleast_2d(np.asarray(p.get("centers", [[0.0]]), float))
        weights = np.asarray(p.get("weights", np.ones(centers.shape[0])), float)
        widths = np.asarray(p.get("widths", np.ones(centers.shape[0])), float)

        def g(x):
            out = np.zeros(x.shape[0])
            for c, w, s in zip(centers, weights, widths):
                r2 = np.sum((x - c[None, :]) ** 2, axis=1)
                out += w * np.exp(-r2 / (2 * s * s))
            return out

        return TestFunction(eval=g, declared_beta=None, family=family, params=p)

    if family == "radial-power":
        beta = float(p["beta"])
        center = np.atleast_1d(np.asarray(p.get("center", 0.0), float))
        support = float(p.get("support", 3.0))
        scale = float(p.get("scale", 1.0))

        def g(x):
            r = np.linalg.norm(x - center[None, : x.shape[1]], axis=1)
            return scale * r**beta * smooth_cutoff(r / support)

        return TestFunction(eval=g, declared_beta=beta, family=family, params=p)

    if family == "plane-wave":
        freq = np.atleast_1d(np.asarray(p.get("freq", 1.0), float))
        phase = float(p.get("phase", 0.0))
        scale = float(p.get("scale", 1.0))

        def g(x):
            return scale * np.cos(x @ freq[: x.shape[1]] + phase)

        return TestFunction(eval=g, declared_beta=None, family=family, params=p)

    if family == "weierstrass":
        beta = float(p["beta"])
        lam = float(p.get("lam", 2.0))
        levels = int(p.get("levels", WEIERSTRASS_LEVELS))
        axis = int(p.get("axis", 0))
        scale = float(p.get("scale", 1.0))

        def g(x):
            return scale * weierstrass_sum(x[:, axis], beta, levels, lam)

        return TestFunction(eval=g, declared_beta=beta, family=family, params=p)

    raise ValidationError(f"unknown test-function family {family!r}")


# --------------------------------------------------------------------------
# probes


def _as_box(domain):
    lo, hi = domain
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(hi <= lo):
        raise ValidationError("domain must be a box (lo, hi) with hi > lo")
    return lo, hi


_MAX_PROBE_POINTS = 1 << 17


def _lattice(lo, hi, h):
    """Dyadic lattice of spacing h inside the box, strided to a point budget."""
    axes = [np.arange(l, u + 1e-12 * (u - l), h) for l, u in zip(lo, hi)]
    total = int(np.prod([len(ax) for ax in axes]))
    if total > _MAX_PROBE_POINTS:
        stride = int(np.ceil((total / _MAX_PROBE_POINTS) ** (1 / len(axes))))
        axes = [ax[::stride] for ax in axes]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def holder_seminorm_profile(f, beta, domain, levels):
    """Per-level dyadic difference-quotient maxima, j = 1..levels.

    Level j uses |h| = 2^-j * diam along each coordinate axis; for beta = 1
    the second-difference (Zygmund) quotient replaces the first difference.
    """
    if levels < 2:
        raise ValidationError("levels must be >= 2")
    if not 0 < beta <= 1:
        raise ValidationError("beta must be in (0, 1]")
    lo, hi = _as_box(domain)
    d = lo.size
    diam = float(np.max(hi - lo))
    fn = f if callable(f) else f.eval
    maxima = []
    for j in range(1, levels + 1):
        h = diam * 2.0 ** (-j)
        best = 0.0
        for ax in range(d):
            hi_ax = hi.copy()
            hi_ax[ax] -= h
            lo_ax = lo.copy()
            if beta == 1.0:
                lo_ax[ax] += h
            if np.any(hi_ax <= lo_ax):
                continue
            x = _lattice(lo_ax, hi_ax, h)
            step = np.zeros(d)
            step[ax] = h
            if beta == 1.0:
                q = np.abs(fn(x + step) - 2 * fn(x) + fn(x - step)) / h
            else:
                q = np.abs(fn(x + step) - fn(x)) / h**beta
            if q.size:
                best = max(best, float(q.max()))
        maxima.append(best)
    return np.asarray(maxima)


def holder_seminorm_estimate(f, beta, domain, levels):
    """Max dyadic difference quotient over levels 1..levels (monotone in levels)."""
    return float(holder_seminorm_profile(f, beta, domain, levels).max())


def nondegeneracy_check(field: CoefficientField, domain, grid_points: int = 33) -> float:
    """Certified minimum of |det b| on a deterministic grid.

    Raises :class:`DegeneracyError` naming the offending grid point if the
    minimum falls below the field's declared witness.
    """
    if grid_points < 2:
        raise ValidationError("grid_points must be >= 2")
    lo, hi = _as_box(domain)
    d = lo.size
    if d != field.d:
        raise ValidationError(f"domain dimension {d} != field dimension {field.d}")
    if d > 3:
        raise ValidationError("grid certificates support d <= 3")
    axes = [np.linspace(l, u, grid_points) for l, u in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    x = np.stack([g.ravel() for g in grids], axis=1)
    dets = np.abs(np.linalg.det(field.b(x)))
    k = int(np.argmin(dets))
    if dets[k] < field.c1:
        raise DegeneracyError(x[k], dets[k], field.c1)
    return float(dets[k])
