"""Undirected random-walk case: Dirichlet spectrum and spectral Green operator.

For ``W = D^-1 A`` with symmetric ``A``, the interior block ``N_ii`` is similar
to the symmetric matrix ``M = D^1/2 N_ii D^-1/2 = I - L_ii`` (Dirichlet
restriction of the normalised Laplacian), so it has a real spectrum and an
orthonormal eigenbasis in the symmetrised coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotRandomWalkSystem, SpectralGapViolation
from .graph import InfluenceSystem

SYM_TOL = 1e-12


def degrees(system: InfluenceSystem) -> np.ndarray:
    """Recover ``D`` for a random-walk system and check that ``D W`` is symmetric."""
    if system.adjacency is not None:
        deg = system.adjacency.sum(axis=1)
    else:
        # 0/1 adjacency: every nonzero entry of row i equals 1/deg(i).
        deg = (system.weights > 0).sum(axis=1).astype(float)
    dw = deg[:, None] * system.weights
    if np.max(np.abs(dw - dw.T)) > SYM_TOL * max(1.0, float(deg.max())):
        raise NotRandomWalkSystem("D W is not symmetric; W is not a reversible random walk")
    return deg


@dataclass(frozen=True)
class DirichletSpectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # orthonormal columns, symmetrised coordinates
    degrees: np.ndarray  # D restricted to the interior
    interior: np.ndarray

    @property
    def lambda_max(self) -> float:
        """Spectral radius of ``N_ii`` (largest eigenvalue modulus)."""
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    def symmetric_matrix(self) -> np.ndarray:
        u, lam = self.eigenvectors, self.eigenvalues
        return (u * lam) @ u.T

    def laplacian(self) -> np.ndarray:
        """Dirichlet Laplacian ``L_ii = I - M``."""
        return np.eye(self.eigenvalues.size) - self.symmetric_matrix()


def dirichlet_spectrum(system: InfluenceSystem, interior) -> DirichletSpectrum:
    interior = np.asarray(sorted(int(i) for i in interior), dtype=int)
    deg = degrees(system)[interior]
    n_ii = system.weights[np.ix_(interior, interior)]
    root = np.sqrt(deg)
    m = root[:, None] * n_ii / root[None, :]
    m = 0.5 * (m + m.T)
    lam, u = np.linalg.eigh(m)
    order = np.argsort(lam)[::-1]
    return DirichletSpectrum(lam[order], u[:, order], deg, interior)


def _check_gap(spectrum: DirichletSpectrum, s: float) -> None:
    if not 0 < s < 1:
        raise ValueError("homogeneous susceptibility must lie in (0, 1)")
    if s * spectrum.lambda_max >= 1:
        raise SpectralGapViolation(f"s * lambda_max = {s * spectrum.lambda_max:.6g} >= 1")


def spectral_green(spectrum: DirichletSpectrum, s: float) -> np.ndarray:
    """``(I - s N_ii)^-1`` assembled from the eigenpairs, in random-walk coordinates."""
    _check_gap(spectrum, s)
    u, lam = spectrum.eigenvectors, spectrum.eigenvalues
    g_sym = (u / (1.0 - s * lam)) @ u.T
    root = np.sqrt(spectrum.degrees)
    return g_sym * root[None, :] / root[:, None]


def sharpened_rate(spectrum: DirichletSpectrum, s: float, t: int) -> float:
    """Contraction factor ``(s lambda_max)^t``.

    It bounds the error exactly in the degree-weighted norm
    ``||x||_D = ||D^1/2 x||_2``; see :func:`weighted_norm`.
    """
    _check_gap(spectrum, s)
    return (s * spectrum.lambda_max) ** t


def weighted_norm(spectrum: DirichletSpectrum, x) -> float:
    return float(np.linalg.norm(np.sqrt(spectrum.degrees) * np.asarray(x)))


def spectrum_rows(spectrum: DirichletSpectrum):
    """``(k, lambda_k)`` pairs for CSV output, 1-based ``k``."""
    return [(k + 1, float(v)) for k, v in enumerate(spectrum.eigenvalues)]
