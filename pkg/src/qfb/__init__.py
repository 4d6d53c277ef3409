"""Local feedback protection of two-qubit entanglement under amplitude damping.

Modules
-------
linalg    4x4 complex kernel and the batched Hessenberg/QR eigensolver
channels  damping Kraus sets, remixing, closed-form damped states
feedback  SU(2) feedback schemes, feedback-corrected maps, repeated maps
measures  subsystem purity, Wootters concurrence, closed-form purities
optimize  stationary analysis, grid sweeps, pattern-search refinement
verify    the invariant suite behind ``qfb verify``
cli       command-line front end
"""

from .channels import (
    KrausSet,
    RemixParams,
    apply_channel,
    bell_state,
    closed_form_rho_prime,
    closed_form_rho_q_prime,
    is_canonical,
    local_kraus,
    product_kraus,
    remix_kraus,
    rho_q,
)
from .errors import DomainError, InvalidState, NonConvergence, NotXState
from .feedback import (
    AngleCombos,
    EulerAngles,
    FeedbackScheme,
    RepeatConfig,
    apply_feedback_channel,
    closed_form_repeat_concurrence,
    closed_form_repeat_state,
    closed_form_rho_dprime_elements,
    closed_form_rho_q_dprime_elements,
    feedback_unitaries,
    optimal_scheme,
    repeat_map,
    su2_from_euler,
)
from .linalg import EigenResult, eigenvalues4, partial_trace_B, tensor
from .measures import (
    concurrence,
    concurrence_x_state,
    purity_closed_form_fb,
    purity_closed_form_nofb,
    purity_closed_form_remix,
    subsystem_purity,
)
from .optimize import (
    SweepConfig,
    SweepResult,
    classify_stationary_sets,
    refine,
    stationary_residuals,
    sweep_canonical,
    sweep_remix,
)

__version__ = "0.1.0"
