"""Weak Euler scheme: coefficients frozen at the left grid node, exact driver
increments over each interval.

The driver increments are exactly sampleable (stable increments by
subordination, jumps as compound Poisson), so the only discretization error
is the coefficient freezing itself; the scheme telescopes exactly for
constant coefficients.  Running functionals use left endpoints, making the
discrete time integral an exact left Riemann sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PathExplosionError, ValidationError
from .fields import CoefficientField
from .jumps import LevyMeasureSpec, levy_increment_with_counts
from .stable import StableDriverSpec, sample_isotropic_increment

#: paths whose norm exceeds this are aborted and counted as excluded
NORM_CAP = 1e12


@dataclass(frozen=True)
class TimeGrid:
    """Partition 0 = tau_0 < ... < tau_n = T with max step delta."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValidationError("grid needs at least two nodes")
        if nodes[0] != 0.0:
            raise ValidationError("grid must start at 0")
        if np.any(np.diff(nodes) <= 0):
            raise ValidationError("grid nodes must be strictly increasing")

    @property
    def delta(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_steps(self) -> int:
        return self.nodes.size - 1


def make_uniform_grid(T: float, n: int) -> TimeGrid:
    """Uniform grid tau_i = i*T/n."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if T <= 0:
        raise ValidationError(f"T must be > 0, got {T}")
    return TimeGrid(np.linspace(0.0, T, n + 1))


@dataclass(frozen=True)
class PathResult:
    """Terminal state, left-endpoint running integral, and jump-count diagnostic."""

    terminal: np.ndarray
    running_integral: float
    jump_count: int


@dataclass
class BatchResult:
    """Vectorized path batch: arrays indexed by path."""

    terminal: np.ndarray          # (n, d)
    running_integral: np.ndarray  # (n,)
    jump_count: np.ndarray        # (n,)
    excluded: np.ndarray          # (n,) bool: aborted by the explosion guard


def _check_compat(field: CoefficientField, driver: StableDriverSpec,
                  zspec: LevyMeasureSpec | None):
    if field.d != driver.dim:
        raise ValidationError(f"field dimension {field.d} != driver dimension {driver.dim}")
    if zspec is not None and zspec.rate > 0 and field.m != zspec.dim:
        raise ValidationError(f"field jump width {field.m} != jump dimension {zspec.dim}")
    if zspec is not None and zspec.driver_alpha != driver.alpha:
        raise ValidationError("jump spec and driver disagree on alpha")
    if driver.alpha < 1.0 and not field.a_is_zero:
        raise ValidationError("the drift must vanish identically when alpha < 1")


def simulate_paths(x0, field: CoefficientField, driver: StableDriverSpec,
                   zspec: LevyMeasureSpec | None, grid: TimeGrid,
                   f=None, rng=None, n_paths: int = 1) -> BatchResult:
    """Simulate a batch of independent Euler paths from one random stream.

    Draws are made for every path at every step in a fixed order (stable
    increment, then jump increment), so the stream layout depends only on
    (grid, n_paths).  Exploded paths are frozen and flagged, never resampled.
    """
    _check_compat(field, driver, zspec)
    if rng is None:
        raise ValidationError("an explicit rng is required")
    d = driver.dim
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (d,))
    n = int(n_paths)

    y = np.tile(x0, (n, 1))
    running = np.zeros(n)
    jumps = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    any_dead = False
    nodes = grid.nodes
    flat = d == 1 and (zspec is None or zspec.dim == 1)  # scalar fast path

    for i in range(grid.n_steps):
        dt = nodes[i + 1] - nodes[i]
        if f is not None:
            running += np.where(alive, f(y), 0.0) * dt if any_dead else f(y) * dt

        du = sample_isotropic_increment(driver, dt, rng, size=n)
        if zspec is not None and zspec.rate > 0:
            dz, cnt = levy_increment_with_counts(zspec, dt, rng, size=n)
            jumps += np.where(alive, cnt, 0) if any_dead else cnt
        else:
            dz = None

        av = field.a(y)
        bv = field.b(y)
        if flat:
            ynew = y[:, 0] + dt * av[:, 0] + bv[:, 0, 0] * du[:, 0]
            if dz is not None:
                ynew = ynew + field.G(y)[:, 0, 0] * dz[:, 0]
            ynew = ynew[:, None]
        else:
            ynew = y + dt * av + np.einsum("nij,nj->ni", bv, du)
            if dz is not None:
                ynew = ynew + np.einsum("nij,nj->ni", field.G(y), dz)

        bad = ~np.isfinite(ynew).all(axis=1)
        bad |= np.einsum("ni,ni->n", ynew, ynew) > NORM_CAP**2
        if bad.any():
            alive &= ~bad
            any_dead = True
        if any_dead:
            y = np.where(alive[:, None], ynew, y)
        else:
            y = ynew

    return BatchResult(terminal=y, running_integral=running,
                       jump_count=jumps, excluded=~alive)


def simulate_euler_path(x0, field: CoefficientField, driver: StableDriverSpec,
                        zspec: LevyMeasureSpec | None, grid: TimeGrid,
                        f=None, rng=None) -> PathResult:
    """Single Euler path; aborts with :class:`PathExplosionError` on overflow."""
    batch = simulate_paths(x0, field, driver, zspec, grid, f=f, rng=rng, n_paths=1)
    if batch.excluded[0]:
        raise PathExplosionError(grid.n_steps, float(np.linalg.norm(batch.terminal[0])))
    return PathResult(
        terminal=batch.terminal[0],
        running_integral=float(batch.running_integral[0]),
        jump_count=int(batch.jump_count[0]),
    )
