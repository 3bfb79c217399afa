"""Spectral machinery for the operating-point weighted Laplacian.

The Laplacian edge weight between buses i and j is
b_ij * V_i * V_j * cos(theta0_i - theta0_j), i.e. the linearization of the
lossless flow around the operating point. Resistance distances are read off
the deflated spectral pseudoinverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotConnected

__all__ = [
    "build_laplacian",
    "laplacian_from_weights",
    "Spectrum",
    "decompose",
    "resistance_distance",
    "resistance_matrix",
    "ResistanceVector",
    "resistance_vector",
    "gamma_inverse_identity_check",
]

_CONNECTIVITY_RTOL = 1e-9  # lambda_2 > rtol * lambda_N required


def laplacian_from_weights(n, edge_i, edge_j, weights):
    """Dense weighted Laplacian from an edge list."""
    lap = np.zeros((n, n))
    np.add.at(lap, (edge_i, edge_j), -np.asarray(weights, dtype=float))
    np.add.at(lap, (edge_j, edge_i), -np.asarray(weights, dtype=float))
    np.fill_diagonal(lap, -lap.sum(axis=1))
    return lap


def build_laplacian(net, theta0):
    """Operating-point weighted Laplacian of a network at phases ``theta0``."""
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (net.n_buses,):
        raise ValueError("theta0 must have one entry per bus")
    i, j = net.edge_i, net.edge_j
    w = net.b * net.voltage[i] * net.voltage[j] * np.cos(theta0[i] - theta0[j])
    return laplacian_from_weights(net.n_buses, i, j, w)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a weighted Laplacian.

    ``eigenvalues`` are ascending with the zero mode clamped to exactly 0 and
    its eigenvector replaced by the normalized constant vector; ``vectors``
    holds orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    _pinv: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n(self):
        return len(self.eigenvalues)

    def pseudoinverse(self):
        """Moore-Penrose pseudoinverse, zero mode deflated. Cached."""
        if self._pinv is None:
            t = self.vectors[:, 1:]
            inv = t / self.eigenvalues[1:]
            object.__setattr__(self, "_pinv", inv @ t.T)
        return self._pinv

    def solve(self, rhs):
        """Minimum-norm solution of L x = rhs (rhs projected off the kernel)."""
        return self.pseudoinverse() @ rhs


def decompose(lap):
    """Spectrum of a symmetric weighted Laplacian.

    Raises :class:`NotConnected` if the second eigenvalue is not positive
    relative to the largest one.
    """
    lap = np.asarray(lap, dtype=float)
    vals, vecs = np.linalg.eigh(lap)
    n = lap.shape[0]
    if n > 1 and vals[1] <= _CONNECTIVITY_RTOL * abs(vals[-1]):
        raise NotConnected(
            f"lambda_2 = {vals[1]:.3e} vs lambda_N = {vals[-1]:.3e}"
        )
    vals = vals.copy()
    vals[0] = 0.0
    vecs = vecs.copy()
    vecs[:, 0] = 1.0 / np.sqrt(n)
    return Spectrum(eigenvalues=vals, vectors=vecs)


def resistance_distance(spectrum, i, j):
    """Effective two-point resistance between buses i and j."""
    d = spectrum.vectors[i, 1:] - spectrum.vectors[j, 1:]
    return float(np.sum(d * d / spectrum.eigenvalues[1:]))


def resistance_matrix(spectrum):
    """All-pairs resistance distances as an (n, n) array."""
    pinv = spectrum.pseudoinverse()
    diag = np.diag(pinv)
    return diag[:, None] + diag[None, :] - 2.0 * pinv


@dataclass(frozen=True)
class ResistanceVector:
    """Resistance distances from one anchor bus to every bus."""

    anchor: int
    values: np.ndarray


def resistance_vector(spectrum, g):
    """Resistance distances from anchor bus ``g`` to all buses."""
    pinv = spectrum.pseudoinverse()
    diag = np.diag(pinv)
    values = diag + pinv[g, g] - 2.0 * pinv[g]
    values = values.copy()
    values[g] = 0.0
    return ResistanceVector(anchor=g, values=values)


def gamma_inverse_identity_check(spectrum):
    """Max deviation of the regularized-inverse identity.

    With G = L + (1/N) u1^T u1 (u1 the normalized constant row vector),
    the inverse satisfies G^{-1}_ij = 1 + Lpinv_ij. Returns
    max_ij |G^{-1}_ij - 1 - Lpinv_ij| computed with a dense solve,
    independent of the spectral pseudoinverse it is checking.
    """
    n = spectrum.n
    lap = (spectrum.vectors * spectrum.eigenvalues) @ spectrum.vectors.T
    gamma_mat = lap + np.full((n, n), 1.0 / n**2)
    gamma_inv = np.linalg.inv(gamma_mat)
    return float(np.max(np.abs(gamma_inv - 1.0 - spectrum.pseudoinverse())))
