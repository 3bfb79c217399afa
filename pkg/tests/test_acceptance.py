"""Acceptance gate: one test per release criterion, each printing a
single PASS/FAIL line with the measured quantity.

Criteria that need the Pegase-89/1354 case files skip loudly when the
files are absent from data/ (they are not redistributable from this
environment); dropping the standard MATPOWER files there activates them.
"""

import time

import numpy as np
import pytest

from slackopt import (
    Homogeneous,
    SolverConfig,
    Tabulated,
    exact_dissipation,
    filter_candidates,
    gamma_inverse_identity_check,
    load_case,
    lossless_state,
    nlo_correction,
    optimal_participation,
    order2_total,
    prepare_network,
    rank_candidates,
    resistance_matrix,
    solve_distributed_slack,
    solve_lossless,
    solve_single_slack,
    sweep_gamma,
    validate_ranking,
)
from slackopt.graph_metrics import decompose, laplacian_from_weights

from conftest import CASE57, CASE118, CASE89, CASE1354, random_connected_graph

needs_pegase89 = pytest.mark.skipif(
    not CASE89.exists(),
    reason=f"Pegase-89 case file not bundled; place it at {CASE89}",
)
needs_pegase1354 = pytest.mark.skipif(
    not CASE1354.exists(),
    reason=f"Pegase-1354 case file not bundled; place it at {CASE1354}",
)


def report(criterion, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def unit_current_resistance(lap, i, j):
    n = lap.shape[0]
    rhs = np.zeros(n)
    rhs[i], rhs[j] = 1.0, -1.0
    x, *_ = np.linalg.lstsq(lap, rhs, rcond=None)
    return x[i] - x[j]


def affine_fit_residual(scores, losses):
    a = np.vstack([scores, np.ones_like(scores)]).T
    coef, *_ = np.linalg.lstsq(a, losses, rcond=None)
    resid = losses - a @ coef
    spread = losses.max() - losses.min()
    return float(np.sqrt(np.mean(resid**2)) / spread)


def single_slack_losses(case, gamma, warm=True):
    net, state, rows = validate_ranking(case, Homogeneous(gamma))
    assert all(r.error is None for r in rows)
    return net, state, rows


def test_criterion_1_metric_suite_random_graphs():
    rng = np.random.default_rng(20260823)
    t0 = time.perf_counter()
    worst = 0.0
    for trial in range(200):
        n, ei, ej, w = random_connected_graph(rng, n_max=50)
        lap = laplacian_from_weights(n, ei, ej, w)
        mat = resistance_matrix(decompose(lap))
        assert np.min(mat) >= -1e-9
        assert np.max(np.abs(mat - mat.T)) < 1e-9
        triples = rng.integers(0, n, size=(20, 3))
        for i, j, k in triples:
            assert mat[i, j] <= mat[i, k] + mat[k, j] + 1e-9
        i, j = sorted(rng.choice(n, size=2, replace=False))
        worst = max(worst, abs(mat[i, j] - unit_current_resistance(lap, i, j)))
    elapsed = time.perf_counter() - t0
    report(
        "criterion 1 (metric suite, 200 random graphs)",
        worst < 1e-9 and elapsed < 10.0,
        f"max oracle deviation {worst:.2e}, runtime {elapsed:.1f}s",
    )


def test_criterion_2_identity_suite():
    t0 = time.perf_counter()
    cases = [CASE57, CASE118] + ([CASE89] if CASE89.exists() else [])
    worst_inv = worst_proj = 0.0
    for path in cases:
        net = prepare_network(load_case(path), Homogeneous(0.1))
        base = solve_lossless(net)
        state = lossless_state(net, base.theta, gamma=0.1)
        worst_inv = max(worst_inv, gamma_inverse_identity_check(state.spectrum))
        i, j = net.edge_i, net.edge_j
        flows = net.b * net.voltage[i] * net.voltage[j] * np.sin(
            base.theta[i] - base.theta[j]
        )
        vecs = state.spectrum.vectors
        dev = np.max(np.abs(
            vecs[:, 1:].T @ net.injection
            - (vecs[i, 1:] - vecs[j, 1:]).T @ flows
        ))
        worst_proj = max(worst_proj, float(dev))
    elapsed = time.perf_counter() - t0
    pegase = "with" if CASE89.exists() else "WITHOUT (file absent)"
    report(
        "criterion 2 (identity suite)",
        worst_inv < 1e-8 and worst_proj < 1e-8 and elapsed < 30.0,
        f"inverse {worst_inv:.2e}, projection {worst_proj:.2e}, "
        f"runtime {elapsed:.1f}s, {pegase} Pegase-89",
    )


def test_criterion_3_losses_affine_in_score():
    worst = 0.0
    argmins_agree = True
    for path in (CASE57, CASE118):
        net, state, rows = single_slack_losses(load_case(path), 0.01)
        scores = np.array([r.score for r in rows])
        losses = np.array([r.exact_loss for r in rows])
        worst = max(worst, affine_fit_residual(scores, losses))
        argmins_agree &= rows[int(np.argmin(losses))].bus == rows[0].bus
    report(
        "criterion 3 (losses affine in the score at gamma=0.01)",
        worst < 0.01 and argmins_agree,
        f"worst relative fit residual {worst:.4f}, argmin agreement {argmins_agree}",
    )


def test_criterion_4_third_order_accuracy():
    net, state, rows = single_slack_losses(load_case(CASE57), 0.1)
    rel = max(
        abs(r.predicted_loss_o3 - r.exact_loss) / r.exact_loss for r in rows
    )
    report(
        "criterion 4 (third-order expansion within 1% at gamma=0.1)",
        rel < 0.01,
        f"worst relative error {rel:.5f} over {len(rows)} candidates",
    )


def test_criterion_5_cube_scaling_of_remainder():
    case = load_case(CASE57)
    gaps = {}
    for gamma in (0.01, 0.02):
        net, state, rows = single_slack_losses(case, gamma)
        gaps[gamma] = np.array(
            [abs(r.exact_loss - r.predicted_loss_o2) for r in rows]
        )
    ratios = gaps[0.02] / gaps[0.01]
    ok = bool(np.all((ratios >= 6.0) & (ratios <= 10.0)))
    report(
        "criterion 5 (remainder scales like gamma^3)",
        ok,
        f"gap ratios {np.round(ratios, 2).tolist()} (expect ~8 in [6, 10])",
    )


@needs_pegase1354
def test_criterion_6_loss_spread_large_case():
    case = load_case(CASE1354)
    t0 = time.perf_counter()
    results = {}
    for mode, window in ((Homogeneous(0.2), (0.20, 0.40)),
                         (Tabulated(), (0.05, 0.15))):
        net, state, rows = validate_ranking(case, mode, min_injection=10.0)
        losses = np.array([r.exact_loss for r in rows if r.error is None])
        spread = float(losses.max() / losses.min() - 1.0)
        results[type(mode).__name__] = (spread, window)
    elapsed = time.perf_counter() - t0
    ok = all(lo <= s <= hi for s, (lo, hi) in results.values()) and elapsed < 300
    report(
        "criterion 6 (Pegase-1354 loss spreads)",
        ok,
        f"{results}, runtime {elapsed:.0f}s",
    )


def test_criterion_7a_single_slack_regime_small_case():
    rows = sweep_gamma(load_case(CASE57), gammas=[0.05, 0.2, 0.4, 0.6])
    counts = {g: int(np.count_nonzero(res.factors)) for g, res, err in rows}
    ok = all(err is None for _, _, err in rows) and all(
        c == 1 for c in counts.values()
    )
    report(
        "criterion 7a (single nonzero factor across the sweep)",
        ok,
        f"nonzero factor counts {counts}",
    )


def test_criterion_7b_shared_regime_medium_case():
    net = prepare_network(load_case(CASE118), Homogeneous(0.1))
    state = lossless_state(net, solve_lossless(net).theta, gamma=0.1)
    res = optimal_participation(state, net, filter_candidates(net), gamma=0.1)
    nz = {net.bus_ids[res.buses[k]]: float(f)
          for k, f in enumerate(res.factors) if f > 0}
    ok = (
        len(nz) == 3
        and all(0.2 <= f <= 0.45 for f in nz.values())
        and abs(sum(nz.values()) - 1.0) < 1e-9
    )
    report(
        "criterion 7b (three comparable factors at gamma=0.1)",
        ok,
        f"factors {nz}",
    )


@needs_pegase89
def test_criterion_7c_regime_transition():
    rows = sweep_gamma(load_case(CASE89), gammas=[0.1, 0.4])
    counts = {g: int(np.count_nonzero(res.factors)) for g, res, err in rows}
    ok = all(err is None for _, _, err in rows)
    ok = ok and counts[0.1] == 1 and counts[0.4] > 1
    report(
        "criterion 7c (single slack below gamma=0.2, shared at 0.4)",
        ok,
        f"nonzero factor counts {counts}",
    )


def test_criterion_8_conservation_everywhere():
    worst = 0.0
    for path in (CASE57, CASE118):
        net = prepare_network(load_case(path), Homogeneous(0.1))
        base = solve_lossless(net)
        warm = SolverConfig(start=base.theta)
        for g_bus in sorted(filter_candidates(net)):
            sol = solve_single_slack(net, g_bus, warm)
            worst = max(
                worst, abs(sol.total_slack - exact_dissipation(net, sol.theta))
            )
        state = lossless_state(net, base.theta, gamma=0.1)
        res = optimal_participation(state, net, filter_candidates(net),
                                    gamma=0.1)
        alpha = np.zeros(net.n_buses)
        alpha[list(res.buses)] = res.factors
        sol = solve_distributed_slack(net, alpha, warm)
        worst = max(
            worst, abs(sol.total_slack - exact_dissipation(net, sol.theta))
        )
    report(
        "criterion 8 (slack equals dissipation for every solve)",
        worst < 1e-10,
        f"worst conservation gap {worst:.2e} p.u.",
    )


def test_criterion_9_vanishing_ratio_limit():
    ok = True
    detail = []
    cases = [CASE57, CASE118] + ([CASE89] if CASE89.exists() else [])
    for path in cases:
        case = load_case(path)
        net = prepare_network(case, Homogeneous(1e-4))
        state = lossless_state(net, solve_lossless(net).theta, gamma=1e-4)
        cand = filter_candidates(net)
        scores = rank_candidates(state, net, cand, gamma=1e-4)
        res = optimal_participation(state, net, cand, gamma=1e-4)
        nz = [res.buses[k] for k, f in enumerate(res.factors) if f > 0]
        is_indicator = nz == [scores[0].bus] and res.factors.max() == 1.0
        ok &= is_indicator
        detail.append(f"{case.name}: support {nz} vs argmin {scores[0].bus}")
    if not CASE89.exists():
        detail.append("Pegase-89 absent, checked on the bundled cases only")
    report(
        "criterion 9 (gamma->0 limit is the score argmin indicator)",
        ok,
        "; ".join(detail),
    )
