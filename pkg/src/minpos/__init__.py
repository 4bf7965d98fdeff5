"""Minimax-optimal sparse state feedback for discrete-time positive linear systems.

The library synthesizes, for plants x(t+1) = A x(t) + B u(t) + F w(t) with
rowwise input bounds |u| <= E x, nonnegative adversarial disturbances, and
stage cost s'x + r'u - gamma'w, the state feedback u = -K x minimizing the
worst-case total cost.  The price vector p comes from a small linear
program, the gain is closed form in p (and as sparse as E), finiteness of
the value is exactly gamma >= F'p, and an independent value-iteration route
plus closed-loop simulation certify the result.
"""

from ._backend import active_backend
from ._version import __version__
from .bellman import (
    GammaViolated,
    ValueIterationTrace,
    Verdict,
    iterate_step,
    value_iterate,
    worst_case_disturbance_gain,
)
from .lp import LpProblem, LpSolution, LpStatus, MaxPivotsExceeded
from .lp import solve as solve_lp
from .model import (
    HypothesisReport,
    ProblemInstance,
    Violation,
    check_hypotheses,
    validate,
)
from .simulate import (
    DemonstrationFailed,
    InfeasibleGain,
    SingularSystem,
    SpectralRadiusResult,
    Trajectory,
    UnstableClosedLoop,
    closed_loop_cost_vector,
    demonstrate_unboundedness,
    gauss_solve,
    rollout,
    spectral_radius,
)
from .synthesis import (
    SynthesisCertificate,
    SynthesisStatus,
    bellman_residual,
    build_lp,
    extract_gain,
    gamma_threshold,
    synthesize,
)

__all__ = [
    "__version__",
    "active_backend",
    "ProblemInstance",
    "Violation",
    "HypothesisReport",
    "validate",
    "check_hypotheses",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MaxPivotsExceeded",
    "solve_lp",
    "SynthesisStatus",
    "SynthesisCertificate",
    "build_lp",
    "gamma_threshold",
    "extract_gain",
    "bellman_residual",
    "synthesize",
    "Verdict",
    "GammaViolated",
    "ValueIterationTrace",
    "worst_case_disturbance_gain",
    "iterate_step",
    "value_iterate",
    "Trajectory",
    "SpectralRadiusResult",
    "InfeasibleGain",
    "UnstableClosedLoop",
    "SingularSystem",
    "DemonstrationFailed",
    "rollout",
    "gauss_solve",
    "closed_loop_cost_vector",
    "spectral_radius",
    "demonstrate_unboundedness",
]
