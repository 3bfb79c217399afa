"""Slack-bus ranking and participation-factor optimization.

Scores are the projected resistance distance -Omega_g . P computed from the
lossless state only; the constrained quadratic program over participation
factors is solved by projected gradient on the scaled simplex.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import powerflow
from .case_io import Homogeneous, prepare_network
from .errors import EmptyCandidateSet, NoConvergence, NonConvexObjective
from .graph_metrics import resistance_vector
from .loss_analysis import (
    lossless_state,
    nlo_correction,
    order2_total,
    resistance_form,
)

__all__ = [
    "CandidateScore",
    "ParticipationResult",
    "rank_candidates",
    "filter_candidates",
    "optimal_participation",
    "sweep_gamma",
    "validate_ranking",
]

_KKT_TOL = 1e-8
_MAX_PG_ITER = 100_000
_FACTOR_CLIP = 1e-6
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class CandidateScore:
    bus: int  # internal bus index
    score: float  # -Omega_g . P
    predicted_loss_o2: float
    predicted_loss_o3: float
    exact_loss: float | None = None
    iterations: int | None = None
    error: str | None = None
    tied: bool = False  # score degenerate with the best one


@dataclass(frozen=True)
class ParticipationResult:
    buses: tuple[int, ...]  # internal candidate indices
    factors: np.ndarray  # fractions of d0, >= 0, sum to 1
    objective: float  # minimized loss estimate (d0 + o2 + o3 slack parts)
    gamma: float


def filter_candidates(net, min_injection=0.0):
    """Generator buses producing more than ``min_injection`` p.u."""
    if min_injection < 0:
        raise ValueError("min_injection must be nonnegative")
    return frozenset(k for k in net.gen_buses if net.gen_p[k] > min_injection)


def _candidate_list(candidates):
    return sorted(candidates)


def rank_candidates(state, net, candidates, gamma=None):
    """Score every candidate and sort ascending (best first).

    Ties within relative ``1e-9`` of the best score are flagged. Predicted
    losses are the second- and third-order expansion totals for a pure
    single slack at the candidate.
    """
    cand = _candidate_list(candidates)
    if not cand:
        raise EmptyCandidateSet("no slack candidates")
    p = net.injection
    scores = []
    for g_bus in cand:
        omega = resistance_vector(state.spectrum, g_bus).values
        score = float(-(omega @ p))
        q = np.zeros(net.n_buses)
        q[g_bus] = state.d0
        o2 = order2_total(state, net, q, gamma=gamma)
        o3 = o2 + nlo_correction(state, net, q, gamma=gamma)
        scores.append(
            CandidateScore(
                bus=g_bus, score=score, predicted_loss_o2=o2, predicted_loss_o3=o3
            )
        )
    scores.sort(key=lambda c: (c.score, c.bus))
    best = scores[0].score
    scale = max(abs(s.score) for s in scores) or 1.0
    return [
        replace(c, tied=(abs(c.score - best) <= _TIE_RTOL * scale)) for c in scores
    ]


def _project_simplex(x, total):
    """Euclidean projection onto {y >= 0, sum y = total}."""
    if total <= 0:
        return np.zeros_like(x)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - total
    rho = np.nonzero(u - css / np.arange(1, len(x) + 1) > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(x - tau, 0.0)


def _objective_pieces(state, net, candidates, gamma):
    """Hessian/linear term of the o2+o3 slack objective in candidate coords.

    Coordinates are the physical per-candidate slack powers q_c with
    sum q = d0. Returns (H, lin) so the candidate-dependent objective is
    0.5 q^T H q + lin . q (constants dropped).
    """
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    dth0 = state.theta0[i] - state.theta0[j]
    g = gamma * net.b if gamma is not None else net.g
    sin_w = 2.0 * g * vi * vj * np.sin(dth0)
    cos_w = g * vi * vj * np.cos(dth0)

    pinv = state.spectrum.pseudoinverse()
    t_cand = pinv[:, candidates][i] - pinv[:, candidates][j]  # (E, m)
    t_w = (pinv @ state.w)[i] - (pinv @ state.w)[j]  # (E,)

    hess = 2.0 * (t_cand.T * cos_w) @ t_cand
    lin = t_cand.T @ sin_w - 2.0 * (t_cand.T * cos_w) @ t_w
    return hess, lin


def optimal_participation(state, net, candidates, gamma=None):
    """Minimize the o2+o3 loss estimate over the participation simplex.

    Projected gradient with fixed step 1/L (L the largest Hessian
    eigenvalue); stops when the KKT residual drops below 1e-8. Factors
    below 1e-6 are clamped to zero and the rest renormalized.
    """
    cand = _candidate_list(candidates)
    if not cand:
        raise EmptyCandidateSet("no slack candidates")
    d0 = state.d0
    m = len(cand)
    eff_gamma = gamma if gamma is not None else _mean_edge_gamma(net)

    if d0 == 0.0 or m == 1:
        # nothing to distribute, or no choice: fall back to the score argmin
        scores = rank_candidates(state, net, cand, gamma=gamma)
        factors = np.zeros(m)
        factors[cand.index(scores[0].bus)] = 1.0
        return ParticipationResult(
            buses=tuple(cand), factors=factors, objective=d0, gamma=eff_gamma
        )

    hess, lin = _objective_pieces(state, net, cand, gamma)
    eigs = np.linalg.eigvalsh(hess)
    hnorm = max(abs(eigs[0]), abs(eigs[-1]))
    if eigs[0] < -1e-10 * max(hnorm, 1.0):
        raise NonConvexObjective(
            f"quadratic loss model has negative curvature {eigs[0]:.3e}"
        )

    def grad(q):
        return hess @ q + lin

    q = np.full(m, d0 / m)
    if hnorm <= 0:
        # objective is linear: the optimum is the vertex with smallest slope
        q = np.zeros(m)
        q[int(np.argmin(lin))] = d0
    else:
        step = 1.0 / hnorm
        for _ in range(_MAX_PG_ITER):
            q_next = _project_simplex(q - step * grad(q), d0)
            kkt = np.max(np.abs(q_next - q)) / step
            q = q_next
            if kkt < _KKT_TOL * max(d0, 1.0):
                break

    factors = q / d0
    factors[factors < _FACTOR_CLIP] = 0.0
    factors /= factors.sum()
    q_full = np.zeros(net.n_buses)
    q_full[cand] = factors * d0
    objective = order2_total(state, net, q_full, gamma=gamma) + nlo_correction(
        state, net, q_full, gamma=gamma
    )
    return ParticipationResult(
        buses=tuple(cand), factors=factors, objective=objective, gamma=eff_gamma
    )


def _mean_edge_gamma(net):
    return float(np.mean(net.g / net.b))


def validate_ranking(case, mode, candidates=None, cfg=None, min_injection=0.0):
    """Rank candidates and fill in the exact Newton-Raphson loss for each.

    ``candidates`` holds internal bus indices; None selects every generator
    injecting more than ``min_injection``. Per-candidate solver failures are
    recorded on the row instead of aborting the run.
    """
    cfg = cfg or powerflow.SolverConfig()
    gamma = mode.gamma if isinstance(mode, Homogeneous) else None
    net = prepare_network(case, mode)
    base = powerflow.solve_lossless(net, cfg)
    state = lossless_state(net, base.theta, gamma=gamma)
    if candidates is None:
        candidates = filter_candidates(net, min_injection)
    rows = rank_candidates(state, net, candidates, gamma=gamma)

    out = []
    warm = replace_cfg_start(cfg, base.theta)
    for row in rows:
        try:
            sol = powerflow.solve_single_slack(net, row.bus, warm)
        except NoConvergence as exc:
            out.append(replace(row, error=str(exc)))
            continue
        out.append(
            replace(
                row,
                exact_loss=powerflow.exact_dissipation(net, sol.theta),
                iterations=sol.iterations,
            )
        )
    return net, state, out


def replace_cfg_start(cfg, theta):
    from dataclasses import replace as _replace

    return _replace(cfg, start=theta)


def sweep_gamma(case, candidates=None, gammas=(), cfg=None, min_injection=0.0):
    """Participation factors per gamma for a homogeneous-conductance sweep.

    Rebuilds the network and re-solves the lossless flow at every gamma.
    Returns rows ``(gamma, buses, factors, error)``; a failed point carries
    its error message and the sweep continues.
    """
    if not len(gammas):
        raise ValueError("empty gamma list")
    if any(g < 0 for g in gammas):
        raise ValueError("gamma values must be nonnegative")
    cfg = cfg or powerflow.SolverConfig()
    rows = []
    for gamma in gammas:
        try:
            net = prepare_network(case, Homogeneous(gamma))
            base = powerflow.solve_lossless(net, cfg)
            state = lossless_state(net, base.theta, gamma=gamma)
            cand = (
                filter_candidates(net, min_injection)
                if candidates is None
                else candidates
            )
            if gamma == 0.0:
                scores = rank_candidates(state, net, cand, gamma=gamma)
                order = sorted(cand)
                factors = np.zeros(len(order))
                factors[order.index(scores[0].bus)] = 1.0
                result = ParticipationResult(
                    buses=tuple(order), factors=factors, objective=0.0, gamma=0.0
                )
            else:
                result = optimal_participation(state, net, cand, gamma=gamma)
            rows.append((gamma, result, None))
        except Exception as exc:  # noqa: BLE001 - sweep must survive bad points
            rows.append((gamma, None, str(exc)))
    return rows
