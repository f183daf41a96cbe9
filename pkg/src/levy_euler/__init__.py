"""Weak Euler simulation for SDEs driven by isotropic stable processes and
finite-activity jumps, with weak-convergence-rate and generator diagnostics.
"""

__version__ = "1.0.0"

from .errors import (
    ConfigError,
    DegeneracyError,
    InsufficientPointsError,
    IntegrabilityError,
    LevyEulerError,
    MomentDivergenceError,
    PathExplosionError,
    QuadratureToleranceError,
    ValidationError,
)
from .stable import (
    CharExponentConstant,
    StableDriverSpec,
    char_exponent_constant,
    sample_isotropic_increment,
    sample_positive_stable,
    sample_stable_1d,
)
from .jumps import (
    JumpDistribution,
    LevyMeasureSpec,
    MomentReport,
    levy_increment,
    moment_report,
)
from .fields import (
    CoefficientField,
    TestFunction,
    builtin_field,
    holder_seminorm_estimate,
    holder_seminorm_profile,
    make_test_function,
    nondegeneracy_check,
    weierstrass_sum,
)
from .euler import (
    PathResult,
    TimeGrid,
    make_uniform_grid,
    simulate_euler_path,
    simulate_paths,
)
from .operators import (
    MollifierSpec,
    QuadratureSpec,
    apply_principal,
    apply_subordinated,
    frac_laplacian,
    mollified,
    mollifier_scaling_probe,
    mollify,
    stable_jump_density,
)
from .harness import (
    EnvelopeResult,
    ExperimentSetup,
    RateReport,
    WeakErrorPoint,
    envelope_check,
    estimate_expectation,
    estimate_weak_error,
    fit_rate,
    generator_consistency_check,
    one_step_check,
    one_step_sweep,
    rate_model,
    run_rate_experiment,
    theoretical_rate,
)
from .cli import ExperimentConfig, parse_config, parse_config_dict, run

__all__ = [name for name in dir() if not name.startswith("_")]
