"""Perturbative expansion of transmission losses around the lossless flow.

All slack vectors at call boundaries are in physical power units, i.e. the
caller passes the actual compensation power (the expansion coefficient
times its power of the conductance ratio). This keeps one convention for
homogeneous and tabulated conductances: internally the expansion uses the
per-edge conductance g_ij, which equals gamma * b_ij in the homogeneous
case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolated
from .graph_metrics import Spectrum, build_laplacian, decompose, resistance_vector

__all__ = [
    "LosslessState",
    "lossless_state",
    "delta_theta1",
    "order2_total",
    "slack_term",
    "resistance_form",
    "nlo_correction",
    "LossBreakdown",
]

_CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class LosslessState:
    """Everything the expansion needs, computed from the lossless solution.

    ``v`` is the susceptance-weighted mismatch vector
    v_i = sum_j b_ij V_i (V_i - V_j cos dtheta0); ``w`` is its conductance
    analogue (w = gamma * v for homogeneous networks) and drives the
    first-order phase correction L dtheta = deltaP - w. ``d0`` is the
    leading dissipation evaluated at the lossless phases.
    """

    theta0: np.ndarray
    spectrum: Spectrum
    v: np.ndarray
    w: np.ndarray
    d0: float


def lossless_state(net, theta0, gamma=None):
    """Build the :class:`LosslessState` for a solved lossless flow.

    ``gamma`` overrides the network's conductances with gamma * b (useful
    when the network object itself is lossless); pass None to use the
    conductances stored on the network.
    """
    theta0 = np.asarray(theta0, dtype=float)
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    dth = theta0[i] - theta0[j]
    g = gamma * net.b if gamma is not None else net.g

    spectrum = decompose(build_laplacian(net, theta0))

    v = np.zeros(net.n_buses)
    np.add.at(v, i, net.b * vi * (vi - vj * np.cos(dth)))
    np.add.at(v, j, net.b * vj * (vj - vi * np.cos(dth)))
    w = np.zeros(net.n_buses)
    np.add.at(w, i, g * vi * (vi - vj * np.cos(dth)))
    np.add.at(w, j, g * vj * (vj - vi * np.cos(dth)))

    d0 = float(np.sum(g * (vi * vi + vj * vj - 2.0 * vi * vj * np.cos(dth))))
    return LosslessState(theta0=theta0, spectrum=spectrum, v=v, w=w, d0=d0)


def _edge_conductance(net, gamma):
    return gamma * net.b if gamma is not None else net.g


def delta_theta1(state, net, deltaP1):
    """First-order phase corrections differenced over edges.

    ``deltaP1`` is the physical slack vector; the correction solves
    L dtheta = deltaP1 - w through the pseudoinverse.
    """
    dtheta = state.spectrum.solve(np.asarray(deltaP1, dtype=float) - state.w)
    return dtheta[net.edge_i] - dtheta[net.edge_j]


def _check_constraint(state, deltaP1):
    gap = abs(float(np.sum(deltaP1)) - state.d0)
    if gap > _CONSTRAINT_TOL:
        raise ConstraintViolated(
            f"sum of slack vector differs from leading dissipation by {gap:.3e}"
        )


def order2_total(state, net, deltaP1, gamma=None):
    """Dissipation estimate through second order in the conductance ratio.

    Includes the slack-independent piece; ``deltaP1`` must sum to ``d0``.
    """
    deltaP1 = np.asarray(deltaP1, dtype=float)
    _check_constraint(state, deltaP1)
    g = _edge_conductance(net, gamma)
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    sin0 = np.sin(state.theta0[i] - state.theta0[j])
    ddth = delta_theta1(state, net, deltaP1)
    return state.d0 + float(np.sum(2.0 * g * vi * vj * sin0 * ddth))


def slack_term(state, p, deltaP1, gamma):
    """Slack-dependent second-order piece, spectral form.

    Equals 2 * gamma * sum_l lambda_l^{-1} (u_l . p)(u_l . deltaP1) with
    ``deltaP1`` in physical units.
    """
    spec = state.spectrum
    up = spec.vectors[:, 1:].T @ np.asarray(p, dtype=float)
    uq = spec.vectors[:, 1:].T @ np.asarray(deltaP1, dtype=float)
    return float(2.0 * gamma * np.sum(up * uq / spec.eigenvalues[1:]))


def resistance_form(state, p, g_bus, gamma):
    """Resistance-distance form of the slack-dependent second-order loss.

    Returns ``(slack_dependent, offset)`` where slack_dependent is
    gamma * d0 * (-Omega_g . p) and the offset is the candidate-independent
    remainder; their sum equals :func:`slack_term` for a single slack of
    size d0 at ``g_bus``.
    """
    p = np.asarray(p, dtype=float)
    spec = state.spectrum
    omega = resistance_vector(spec, g_bus).values
    slack_dependent = gamma * state.d0 * float(-(omega @ p))
    u2 = spec.vectors[:, 1:] ** 2
    offset = gamma * state.d0 * float(np.sum((u2.T @ p) / spec.eigenvalues[1:]))
    return slack_dependent, offset


def nlo_correction(state, net, deltaP1, gamma=None):
    """Third-order dissipation term, quadratic in the phase correction.

    Nonnegative whenever all lossless phase differences are below pi/2.
    """
    deltaP1 = np.asarray(deltaP1, dtype=float)
    _check_constraint(state, deltaP1)
    g = _edge_conductance(net, gamma)
    i, j = net.edge_i, net.edge_j
    vi, vj = net.voltage[i], net.voltage[j]
    cos0 = np.cos(state.theta0[i] - state.theta0[j])
    ddth = delta_theta1(state, net, deltaP1)
    return float(np.sum(g * vi * vj * cos0 * ddth * ddth))


@dataclass(frozen=True)
class LossBreakdown:
    """All expansion terms for one slack choice, plus the exact loss if known."""

    d0: float
    slack_term: float
    nlo_term: float
    analytic_total: float
    exact: float | None = None
