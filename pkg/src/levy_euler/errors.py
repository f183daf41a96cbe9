"""Exception types shared across the package."""


class LevyEulerError(Exception):
    """Base class for all package errors."""


class ValidationError(LevyEulerError, ValueError):
    """A precondition on an operation or spec object is violated."""


class ConfigError(LevyEulerError, ValueError):
    """Experiment configuration is invalid; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations))


class QuadratureToleranceError(LevyEulerError, ArithmeticError):
    """A quadrature could not meet the requested tolerance.

    Carries the achieved error bound so callers can decide whether to relax.
    """

    def __init__(self, achieved, required, what=""):
        self.achieved = float(achieved)
        self.required = float(required)
        msg = f"quadrature error {achieved:.3e} exceeds tolerance {required:.3e}"
        if what:
            msg = f"{what}: {msg}"
        super().__init__(msg)


class DegeneracyError(LevyEulerError, ValueError):
    """|det b| fell below the declared witness on the probe grid."""

    def __init__(self, point, value, c1):
        self.point = point
        self.value = float(value)
        self.c1 = float(c1)
        super().__init__(
            f"|det b| = {value:.6g} < declared witness {c1:.6g} at grid point {point}"
        )


class IntegrabilityError(LevyEulerError, ArithmeticError):
    """An integrand grows too fast for its tail integral; names the region."""

    def __init__(self, region, detail=""):
        self.region = region
        msg = f"tail integrand not integrable on {region}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class MomentDivergenceError(LevyEulerError, ArithmeticError):
    """A requested jump-measure moment diverges; names the failing integral."""

    def __init__(self, integral):
        self.integral = integral
        super().__init__(f"divergent moment: {integral}")


class PathExplosionError(LevyEulerError, ArithmeticError):
    """A simulated path left the admissible region (non-finite or |Y| too large)."""

    def __init__(self, step, norm):
        self.step = int(step)
        self.norm = float(norm)
        super().__init__(f"path aborted at step {step}: |Y| = {norm:.3e}")


class InsufficientPointsError(LevyEulerError, ValueError):
    """Fewer usable sweep points than a fit requires."""
