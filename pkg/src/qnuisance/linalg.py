"""Dense complex matrix primitives for small Hilbert spaces (d <= 4).

Everything is a plain complex ndarray; functions validate structure rather
than wrapping arrays in classes. All operations are pure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianInput, NotPsd, RankDeficientState
from .tolerances import DEFAULT, Tolerances

PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)
I2 = np.eye(2, dtype=complex)


def hermitize(a):
    """Return the Hermitian part (A + A†)/2."""
    a = np.asarray(a, dtype=complex)
    return (a + a.conj().T) / 2.0


def herm_deviation(a):
    """Max-entry magnitude of A - A†."""
    a = np.asarray(a, dtype=complex)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def require_hermitian(a, tol: Tolerances = DEFAULT):
    """Validate Hermiticity to tol.hermiticity_error and return the symmetrized matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {a.shape}")
    dev = herm_deviation(a)
    if dev > tol.hermiticity_error:
        raise NonHermitianInput(f"matrix deviates from Hermiticity by {dev:.3e}")
    return hermitize(a)


def bloch_state(s):
    """Qubit density matrix (I + s·σ)/2 from a Bloch vector."""
    s = np.asarray(s, dtype=float)
    return 0.5 * (I2 + s[0] * PAULI[0] + s[1] * PAULI[1] + s[2] * PAULI[2])


def bloch_of_state(rho):
    """Bloch vector of a 2x2 density matrix."""
    return np.array([np.trace(rho @ p).real for p in PAULI])


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order with one projector per distinct eigenvalue.

    Eigenvalues closer than the merge gap share a projector, so projectors are
    idempotent, mutually orthogonal and complete by construction.
    """
    eigenvalues: np.ndarray       # (k,) distinct values, ascending
    projectors: tuple             # k Hermitian projectors

    def reconstruct(self):
        out = np.zeros_like(self.projectors[0])
        for lam, p in zip(self.eigenvalues, self.projectors):
            out = out + lam * p
        return out


def eig_hermitian(h, tol: Tolerances = DEFAULT) -> EigenDecomposition:
    """Spectral decomposition with degenerate eigenvalues merged (gap < tol.eigen_gap)."""
    h = require_hermitian(h, tol)
    vals, vecs = np.linalg.eigh(h)
    groups = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] >= tol.eigen_gap:
            groups.append((start, i))
            start = i
    eigenvalues = np.array([vals[a:b].mean() for a, b in groups])
    projectors = []
    for a, b in groups:
        block = vecs[:, a:b]
        projectors.append(hermitize(block @ block.conj().T))
    return EigenDecomposition(eigenvalues, tuple(projectors))


def require_psd(a, tol: Tolerances = DEFAULT):
    """Validate positive semidefiniteness; returns (symmetrized matrix, clipped eigs, vecs)."""
    a = require_hermitian(a, tol)
    vals, vecs = np.linalg.eigh(a)
    if vals[0] < -tol.psd_error:
        raise NotPsd(f"min eigenvalue {vals[0]:.3e} below -{tol.psd_error:.0e}")
    vals = np.where(vals < 0.0, 0.0, vals)
    return a, vals, vecs


def psd_sqrt(a, tol: Tolerances = DEFAULT):
    """Principal square root of a PSD matrix (eigenvalues clipped at 0)."""
    _, vals, vecs = require_psd(a, tol)
    return hermitize((vecs * np.sqrt(vals)) @ vecs.conj().T)


def fidelity(a, b, tol: Tolerances = DEFAULT) -> float:
    """Tr sqrt(sqrt(A) B sqrt(A)) for PSD matrices A, B."""
    ra = psd_sqrt(a, tol)
    _, _, _ = require_psd(b, tol)
    m = hermitize(ra @ np.asarray(b, dtype=complex) @ ra)
    vals = np.linalg.eigvalsh(m)
    vals = np.where(vals < 0.0, 0.0, vals)
    return float(np.sum(np.sqrt(vals)))


def solve_sld(rho, drho, tol: Tolerances = DEFAULT):
    """Symmetric-logarithmic-derivative solve: drho = (rho L + L rho)/2 for Hermitian L.

    Solved in the eigenbasis of rho: L_ab = 2 drho_ab / (lam_a + lam_b).
    Requires a full-rank state and a traceless derivative.
    """
    rho = require_hermitian(rho, tol)
    drho = require_hermitian(drho, tol)
    tr = abs(np.trace(drho))
    if tr > 10 * tol.unit_trace:
        raise NonHermitianInput(f"derivative must be traceless, got trace magnitude {tr:.3e}")
    vals, vecs = np.linalg.eigh(rho)
    if vals[0] <= tol.rank_deficient:
        raise RankDeficientState(f"state eigenvalue {vals[0]:.3e} at or below {tol.rank_deficient:.0e}")
    d_tilde = vecs.conj().T @ drho @ vecs
    denom = vals[:, None] + vals[None, :]
    l_tilde = 2.0 * d_tilde / denom
    return hermitize(vecs @ l_tilde @ vecs.conj().T)
