"""Bergman kernels of the ball and its finite quotients, with jet-based
curvature, Monge-Ampere and Fefferman-J diagnostics."""

from .exceptions import (
    BergmanError,
    ConfigError,
    DegenerateFit,
    EvaluationFailed,
    FitError,
    GroupError,
    IndeterminateFit,
    InsufficientSamples,
    JetError,
    NonpositiveConstantTerm,
    NonpositiveJ,
    NonpositiveKernel,
    NonpositiveMetricDet,
    NotPositiveDefinite,
    NumericConsistencyError,
    OrderCapExceeded,
    PointOutsideBall,
    VanishingConstantTerm,
)
from .fefferman import (
    ball_defining_field,
    bergman_defining_field,
    boundary_order_fit,
    fefferman_chain,
    fefferman_seed,
    fefferman_step,
    perturbed_ball_defining_field,
)
from .geometry import (
    asymptotic_fit,
    b_invariant,
    einstein_constant,
    einstein_diagnostics,
    einstein_residual,
    j_operator,
    j_operator_jet,
    kernel_ma_identity,
    ma_constant,
    ma_residual,
    metric,
    metric_det,
    ricci,
)
from .groups import FiniteUnitaryGroup, cyclic_diagonal, element_det, from_matrices, validate
from .jets import Jet
from .kernels import (
    KernelSpec,
    ScalarField,
    b3_example_closed_form,
    b3_example_potential,
    ball_kernel,
    disc_quotient_closed_form,
    log_field,
    quotient_kernel,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
