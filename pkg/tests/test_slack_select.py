"""Candidate ranking, simplex projection and participation optimization."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from slackopt import (
    Homogeneous,
    exact_dissipation,
    filter_candidates,
    lossless_state,
    nlo_correction,
    optimal_participation,
    order2_total,
    prepare_network,
    rank_candidates,
    solve_distributed_slack,
    solve_lossless,
    solve_single_slack,
    sweep_gamma,
    validate_ranking,
)
from slackopt.errors import EmptyCandidateSet
from slackopt.slack_select import _project_simplex

from conftest import CASE57, toy_network

GAMMA = 0.1


@pytest.fixture(scope="module")
def net57():
    from slackopt import load_case

    return prepare_network(load_case(CASE57), Homogeneous(GAMMA))


@pytest.fixture(scope="module")
def state57(net57):
    return lossless_state(net57, solve_lossless(net57).theta, gamma=GAMMA)


def test_filter_candidates(net57):
    cand = filter_candidates(net57)
    assert cand == frozenset(k for k in net57.gen_buses if net57.gen_p[k] > 0)
    huge = filter_candidates(net57, min_injection=1e6)
    assert huge == frozenset()
    with pytest.raises(ValueError):
        filter_candidates(net57, min_injection=-1.0)


def test_rank_candidates_sorted_and_scored(net57, state57):
    rows = rank_candidates(state57, net57, filter_candidates(net57), gamma=GAMMA)
    scores = [r.score for r in rows]
    assert scores == sorted(scores)
    assert all(r.predicted_loss_o3 >= r.predicted_loss_o2 for r in rows)
    with pytest.raises(EmptyCandidateSet):
        rank_candidates(state57, net57, frozenset(), gamma=GAMMA)


def test_rank_flags_symmetric_tie():
    # ring with generators at mirror-image buses: their scores tie exactly
    net = toy_network([(0, 1), (1, 2), (2, 3), (0, 3)], b=[1.0] * 4,
                      gen_p=[0.25, 0.0, 0.25, 0.0],
                      load_p=[0.0, 0.3, 0.0, 0.2])
    state = lossless_state(net, solve_lossless(net).theta, gamma=GAMMA)
    rows = rank_candidates(state, net, {0, 2}, gamma=GAMMA)
    assert all(r.tied for r in rows)
    assert rows[0].score > 0


@settings(max_examples=100, deadline=None)
@given(
    x=arrays(np.float64, st.integers(1, 12),
             elements=st.floats(-5, 5, allow_nan=False)),
    total=st.floats(0.01, 4.0),
)
def test_project_simplex_properties(x, total):
    y = _project_simplex(x, total)
    assert np.all(y >= 0)
    assert y.sum() == pytest.approx(total, abs=1e-9)
    # projection is no farther from x than any random feasible point
    rng = np.random.default_rng(0)
    for _ in range(5):
        z = rng.dirichlet(np.ones(len(x))) * total
        assert np.linalg.norm(x - y) <= np.linalg.norm(x - z) + 1e-9
    # idempotent
    assert np.allclose(_project_simplex(y, total), y, atol=1e-12)


def test_singleton_candidate_gets_factor_one(net57, state57):
    only = min(filter_candidates(net57))
    res = optimal_participation(state57, net57, {only}, gamma=GAMMA)
    assert res.buses == (only,)
    assert res.factors[0] == 1.0


def test_symmetric_pair_splits_evenly():
    net = toy_network([(0, 1), (1, 2)], b=[1.0, 1.0],
                      gen_p=[0.25, 0.0, 0.25], load_p=[0.0, 0.5, 0.0])
    state = lossless_state(net, solve_lossless(net).theta, gamma=GAMMA)
    res = optimal_participation(state, net, {0, 2}, gamma=GAMMA)
    assert np.allclose(res.factors, [0.5, 0.5], atol=1e-6)


def test_optimum_dominates_vertices(net57, state57):
    cand = sorted(filter_candidates(net57))
    res = optimal_participation(state57, net57, cand, gamma=GAMMA)
    assert res.factors.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(res.factors >= 0)
    for g_bus in cand:
        q = np.zeros(net57.n_buses)
        q[g_bus] = state57.d0
        vertex = order2_total(state57, net57, q, gamma=GAMMA) + nlo_correction(
            state57, net57, q, gamma=GAMMA
        )
        assert res.objective <= vertex + 1e-12


def test_optimum_beats_vertices_in_exact_flow(case118):
    # the analytic optimum must also win in the full Newton solve
    net = prepare_network(case118, Homogeneous(GAMMA))
    state = lossless_state(net, solve_lossless(net).theta, gamma=GAMMA)
    cand = sorted(filter_candidates(net))
    res = optimal_participation(state, net, cand, gamma=GAMMA)
    alpha = np.zeros(net.n_buses)
    alpha[list(res.buses)] = res.factors
    dist = solve_distributed_slack(net, alpha)
    dist_loss = exact_dissipation(net, dist.theta)
    best_single = min(
        exact_dissipation(net, solve_single_slack(net, g).theta)
        for g in cand
    )
    assert dist_loss <= best_single + 1e-9


def test_validate_ranking_orders_match(case57):
    net, state, rows = validate_ranking(case57, Homogeneous(GAMMA))
    assert all(r.error is None for r in rows)
    exact = [r.exact_loss for r in rows]
    assert exact == sorted(exact)  # score order == exact-loss order here
    rel = [abs(r.predicted_loss_o3 - r.exact_loss) / r.exact_loss for r in rows]
    assert max(rel) < 0.01


def test_sweep_gamma_zero_is_indicator(case57):
    rows = sweep_gamma(case57, gammas=[0.0, GAMMA])
    (g0, res0, err0), (g1, res1, err1) = rows
    assert err0 is None and err1 is None
    assert g0 == 0.0
    assert sorted(res0.factors.tolist()) == pytest.approx(
        [0.0] * (len(res0.factors) - 1) + [1.0]
    )
    assert res1.factors.sum() == pytest.approx(1.0)


def test_sweep_gamma_input_validation(case57):
    with pytest.raises(ValueError):
        sweep_gamma(case57, gammas=[])
    with pytest.raises(ValueError):
        sweep_gamma(case57, gammas=[-0.1])
