"""Newton-Raphson active power flow with fixed voltage magnitudes.

Three variants share one Newton loop:
  * lossless  -- g_ij = 0, balanced injections, reference phase at bus 0;
  * single slack -- one generator absorbs the losses, its phase is the
    reference and its power equation is dropped;
  * distributed slack -- losses shared as s * alpha with the scale s an
    extra unknown, all N power equations kept.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParticipation,
    NoConvergence,
    OverloadedLineWarning,
    SlackNotGenerator,
)

__all__ = [
    "SolverConfig",
    "FlowSolution",
    "solve_lossless",
    "solve_single_slack",
    "solve_distributed_slack",
    "exact_dissipation",
]


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10  # max p.u. active-power mismatch
    max_iterations: int = 50
    start: np.ndarray | None = None  # warm-start phases; None means flat

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class FlowSolution:
    theta: np.ndarray  # radians, reference bus at 0
    slack_injection: np.ndarray  # p.u. per bus
    iterations: int
    residual: float  # max mismatch at the enforced equations
    overloaded: bool = False  # some |dtheta| >= pi/2 at the solution

    @property
    def total_slack(self):
        return float(self.slack_injection.sum())


def _flows(net, theta):
    """Per-bus active power leaving each bus, split and total."""
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    dth = theta[i] - theta[j]
    sin_flow = net.b * vi * vj * np.sin(dth)
    out = np.zeros(net.n_buses)
    np.add.at(out, i, sin_flow)
    np.add.at(out, j, -sin_flow)
    # resistive part: V_i sum_j g_ij (V_i - V_j cos dth)
    gi = net.g * vi * (vi - vj * np.cos(dth))
    gj = net.g * vj * (vj - vi * np.cos(dth))
    np.add.at(out, i, gi)
    np.add.at(out, j, gj)
    return out


def _jacobian(net, theta):
    """d(power at bus)/d(theta) as a dense (n, n) matrix."""
    n = net.n_buses
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    dth = theta[i] - theta[j]
    cos_w = net.b * vi * vj * np.cos(dth)
    sin_gw = net.g * vi * vj * np.sin(dth)
    jac = np.zeros((n, n))
    # susceptive block is the weighted Laplacian
    np.add.at(jac, (i, j), -cos_w)
    np.add.at(jac, (j, i), -cos_w)
    np.add.at(jac, (i, i), cos_w)
    np.add.at(jac, (j, j), cos_w)
    # conductive block (antisymmetric edge pattern)
    np.add.at(jac, (i, j), -sin_gw)
    np.add.at(jac, (j, i), sin_gw)
    np.add.at(jac, (i, i), sin_gw)
    np.add.at(jac, (j, j), -sin_gw)
    return jac


def exact_dissipation(net, theta):
    """Total resistive loss of a phase profile, p.u."""
    theta = np.asarray(theta, dtype=float)
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    loss = net.g * (vi * vi + vj * vj - 2.0 * vi * vj * np.cos(theta[i] - theta[j]))
    return float(loss.sum())


def _check_overload(net, theta):
    dth = np.abs(theta[net.edge_i] - theta[net.edge_j])
    if np.any(dth >= np.pi / 2):
        warnings.warn(
            f"{int(np.sum(dth >= np.pi/2))} line(s) with |dtheta| >= pi/2",
            OverloadedLineWarning,
            stacklevel=3,
        )
        return True
    return False


def _newton(net, mismatch, jacobian, theta0, cfg, free):
    """Generic damped-free Newton loop over the phase unknowns in ``free``."""
    theta = theta0.copy()
    res = np.max(np.abs(mismatch(theta)))
    for it in range(1, cfg.max_iterations + 1):
        if res < cfg.tolerance:
            return theta, it - 1, res
        f = mismatch(theta)
        jac = jacobian(theta)
        step = np.linalg.solve(jac, f)
        theta[free] -= step
        res = np.max(np.abs(mismatch(theta)))
    if res < cfg.tolerance:
        return theta, cfg.max_iterations, res
    raise NoConvergence(cfg.max_iterations, res)


def _start_theta(net, cfg):
    if cfg.start is not None:
        theta = np.asarray(cfg.start, dtype=float).copy()
        if theta.shape != (net.n_buses,):
            raise ValueError("warm-start phases must have one entry per bus")
        return theta
    return np.zeros(net.n_buses)


def solve_lossless(net, cfg=SolverConfig()):
    """Solve the lossless flow; requires balanced injections.

    Bus 0 is the phase reference and its (redundant) equation is dropped.
    """
    p = net.injection
    if abs(p.sum()) > 1e-9:
        raise ValueError(
            f"lossless solve needs balanced injections (sum = {p.sum():.3e}); "
            "call balance_injections first"
        )
    lossless = net if not net.g.any() else _zero_conductance(net)
    free = np.arange(1, net.n_buses)

    def mismatch(theta):
        return (_flows(lossless, theta) - p)[free]

    def jacobian(theta):
        return _jacobian(lossless, theta)[np.ix_(free, free)]

    theta, iters, res = _newton(lossless, mismatch, jacobian, _start_theta(net, cfg),
                                cfg, free)
    theta -= theta[0]
    over = _check_overload(net, theta)
    return FlowSolution(
        theta=theta,
        slack_injection=np.zeros(net.n_buses),
        iterations=iters,
        residual=res,
        overloaded=over,
    )


def _zero_conductance(net):
    from dataclasses import replace

    return replace(net, g=np.zeros_like(net.g))


def solve_single_slack(net, slack, cfg=SolverConfig()):
    """Full lossy flow with one slack generator absorbing the imbalance.

    ``slack`` is an internal bus index; its phase is the reference and its
    power equation is dropped. The returned slack injection closes the
    balance exactly at the solved phases.
    """
    if slack not in net.gen_buses:
        raise SlackNotGenerator(f"bus index {slack} has no in-service generation")
    p = net.injection
    free = np.array([k for k in range(net.n_buses) if k != slack])

    def mismatch(theta):
        return (_flows(net, theta) - p)[free]

    def jacobian(theta):
        return _jacobian(net, theta)[np.ix_(free, free)]

    theta, iters, res = _newton(net, mismatch, jacobian, _start_theta(net, cfg),
                                cfg, free)
    theta -= theta[slack]
    slack_injection = np.zeros(net.n_buses)
    slack_injection[slack] = _flows(net, theta)[slack] - p[slack]
    over = _check_overload(net, theta)
    return FlowSolution(
        theta=theta,
        slack_injection=slack_injection,
        iterations=iters,
        residual=res,
        overloaded=over,
    )


def solve_distributed_slack(net, alpha, cfg=SolverConfig()):
    """Lossy flow with losses shared as s * alpha over the generators.

    ``alpha`` must be a nonnegative participation vector supported on
    generator buses and summing to one. Unknowns are the n-1 non-reference
    phases plus the slack scale s; all n power equations are enforced.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (net.n_buses,):
        raise BadParticipation("alpha must have one entry per bus")
    if np.any(alpha < 0):
        raise BadParticipation("alpha must be nonnegative")
    if abs(alpha.sum() - 1.0) > 1e-9:
        raise BadParticipation(f"alpha must sum to 1 (got {alpha.sum():.12g})")
    support = set(np.nonzero(alpha)[0].tolist())
    if not support <= net.gen_buses:
        raise BadParticipation("alpha supported on non-generator buses")

    p = net.injection
    n = net.n_buses
    theta = _start_theta(net, cfg)
    s = 0.0
    res = np.inf
    for it in range(cfg.max_iterations + 1):
        f = _flows(net, theta) - p - s * alpha
        res = np.max(np.abs(f))
        if res < cfg.tolerance:
            theta = theta - theta[0]
            over = _check_overload(net, theta)
            return FlowSolution(
                theta=theta,
                slack_injection=s * alpha,
                iterations=it,
                residual=res,
                overloaded=over,
            )
        if it == cfg.max_iterations:
            break
        jac_full = _jacobian(net, theta)
        jac = np.zeros((n, n))
        jac[:, : n - 1] = jac_full[:, 1:]  # phases of buses 1..n-1
        jac[:, n - 1] = -alpha  # ds column
        step = np.linalg.solve(jac, f)
        theta[1:] -= step[: n - 1]
        s -= step[n - 1]
    raise NoConvergence(cfg.max_iterations, res)
