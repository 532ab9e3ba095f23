import numpy as np
import pytest

from qnuisance.linalg import PAULI, I2, hermitize

SIGMA1, SIGMA2, SIGMA3 = PAULI


def random_psd(rng, d, jitter=0.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return hermitize(a @ a.conj().T) / d + jitter * np.eye(d)


def random_spd(rng, d):
    a = rng.normal(size=(d, d))
    return a @ a.T + (0.1 + rng.uniform()) * np.eye(d)


def random_state(rng, d):
    m = random_psd(rng, d, jitter=0.05)
    return m / np.trace(m).real


def random_traceless(rng, d):
    h = hermitize(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return h - np.trace(h).real * np.eye(d) / d


def random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


def weight_grid_search(M, W_I, rounds=18, width=7):
    """Independent oracle for the weight-elimination minimum.

    Minimizes Tr(W_n M) over the free W_IN entries with W_N pinned at its PSD
    boundary W_NI W_I^-1 W_IN (the W_N trace term is increasing in W_N).
    Pure grid search with halving windows around the incumbent; the objective
    is evaluated on whole grids at once through its quadratic normal form.
    """
    M = np.asarray(M, dtype=float)
    W_I = np.atleast_2d(np.asarray(W_I, dtype=float))
    m = W_I.shape[0]
    k = M.shape[0] - m
    dim = m * k
    W_I_inv = np.linalg.inv(W_I)
    M_NI, M_NN = M[m:, :m], M[m:, m:]
    base = float(np.trace(W_I @ M[:m, :m]))

    def quadratic(x):
        X = x.reshape(m, k)
        return float(np.trace(X.T @ W_I_inv @ X @ M_NN))

    lin = 2.0 * M_NI.T.ravel()                       # gradient of 2 Tr(X M_NI)
    Q = np.empty((dim, dim))
    basis = np.eye(dim)
    singles = np.array([quadratic(basis[a]) for a in range(dim)])
    for a in range(dim):
        for b in range(dim):
            Q[a, b] = 0.5 * (quadratic(basis[a] + basis[b]) - singles[a] - singles[b])

    center = np.zeros(dim)
    span = 10.0 * (1.0 + float(np.max(np.abs(M))) * float(np.max(np.abs(W_I)))
                   / max(np.linalg.eigvalsh((M_NN + M_NN.T) / 2)[0], 1e-3))
    best = base
    for _ in range(rounds):
        axes = [np.linspace(c - span, c + span, width) for c in center]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        vals = base + pts @ lin + np.einsum("pa,ab,pb->p", pts, Q, pts)
        idx = int(np.argmin(vals))
        if vals[idx] < best:
            best = float(vals[idx])
            center = pts[idx]
        span /= 2.0
    return best
