"""Finite-dimensional quantum channels, their dilations, convergence
diagnostics for channel sequences, and a parameter-level Gaussian calculus.
"""

from .core import (
    DensityOperator,
    KrausChannel,
    Observable,
    PartialIsometry,
    StinespringIsometry,
    UnitaryOp,
    ValidationError,
    apply_kraus,
    apply_stinespring,
    choi_matrix,
    complementary,
    compose_channels,
    dual_apply,
    max_action_deviation,
    partial_trace,
    tensor,
    tensor_channels,
    trace_norm,
)
from .dilation import (
    TrackedBasisExtension,
    UnitaryDilation,
    complete_unitary,
    complementary_kraus,
    isometry_from_kraus,
    kraus_from_isometry,
    minimal_stinespring,
    purify,
    stinespring_from_unitary,
    tracked_basis_extension,
    tracked_complete_unitary,
    unitary_from_isometry,
)
from .gaussian import (
    GaussianChannel,
    GaussianChannelSequence,
    GaussianState,
    apply_gaussian,
    attenuator,
    attenuator_output_distance,
    char_fn,
    dual_weyl_symbol,
    param_convergence_check,
    validate_channel,
    validate_state,
)
from .sequences import (
    ChannelSequence,
    ConvergenceReport,
    PartialTraceForm,
    channels_from_partial_isometries,
    choi_defect,
    complementary_sequence,
    compose_sequence,
    compression_sequence,
    convergence_report,
    strong_defect,
    strongstar_defect,
    swap_counterexample,
    tensor_sequence,
    weak_defect,
)

__version__ = "0.1.0"
