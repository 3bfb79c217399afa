"""Loss-optimal slack bus selection for high-voltage AC networks.

Ranks slack-bus candidates by the projected resistance distance computed
from the lossless power flow solution, solves the participation-factor
minimization, and validates both against a full Newton-Raphson power flow.
"""

__version__ = "0.1.0"

from .case_io import (
    CaseData,
    deduct_reference_imbalance,
    prepare_network,
    GammaMode,
    Homogeneous,
    Network,
    Tabulated,
    balance_injections,
    build_network,
    load_case,
    parse_matpower,
)
from .graph_metrics import (
    Spectrum,
    build_laplacian,
    decompose,
    gamma_inverse_identity_check,
    resistance_distance,
    resistance_matrix,
    resistance_vector,
)
from .loss_analysis import (
    LossBreakdown,
    LosslessState,
    delta_theta1,
    lossless_state,
    nlo_correction,
    order2_total,
    resistance_form,
    slack_term,
)
from .powerflow import (
    FlowSolution,
    SolverConfig,
    exact_dissipation,
    solve_distributed_slack,
    solve_lossless,
    solve_single_slack,
)
from .slack_select import (
    CandidateScore,
    ParticipationResult,
    filter_candidates,
    optimal_participation,
    rank_candidates,
    sweep_gamma,
    validate_ranking,
)

__all__ = [
    "__version__",
    "CaseData",
    "GammaMode",
    "Homogeneous",
    "Tabulated",
    "Network",
    "parse_matpower",
    "load_case",
    "build_network",
    "balance_injections",
    "deduct_reference_imbalance",
    "prepare_network",
    "Spectrum",
    "build_laplacian",
    "decompose",
    "resistance_distance",
    "resistance_matrix",
    "resistance_vector",
    "gamma_inverse_identity_check",
    "SolverConfig",
    "FlowSolution",
    "solve_lossless",
    "solve_single_slack",
    "solve_distributed_slack",
    "exact_dissipation",
    "LosslessState",
    "LossBreakdown",
    "lossless_state",
    "delta_theta1",
    "order2_total",
    "slack_term",
    "resistance_form",
    "nlo_correction",
    "CandidateScore",
    "ParticipationResult",
    "rank_candidates",
    "filter_candidates",
    "optimal_participation",
    "sweep_gamma",
    "validate_ranking",
]
