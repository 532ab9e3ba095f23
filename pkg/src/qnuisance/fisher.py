"""SLD Fisher information, classical Fisher information of a POVM, and
Schur-complement partial information.

Conventions: G_ij = Re Tr(rho L_i L_j), which equals the symmetric inner
product (L_i, L_j) for Hermitian SLDs. Dual SLDs are L^i = sum_j (G^-1)_ji L_j.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models as _models
from .errors import InvalidPovm, SingularFisher, SingularNuisanceBlock
from .linalg import hermitize, solve_sld
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class FisherBundle:
    """SLD operators, the SLD Fisher matrix, its inverse, and the dual SLDs."""
    slds: tuple
    G: np.ndarray
    G_inv: np.ndarray
    duals: tuple


@dataclass(frozen=True)
class BlockSplit:
    """Interest/nuisance block decomposition of a symmetric matrix."""
    m: int
    II: np.ndarray
    IN: np.ndarray
    NI: np.ndarray
    NN: np.ndarray


def block_split(matrix, m) -> BlockSplit:
    matrix = np.asarray(matrix, dtype=float)
    return BlockSplit(m=m, II=matrix[:m, :m], IN=matrix[:m, m:],
                      NI=matrix[m:, :m], NN=matrix[m:, m:])


def sld_fisher(model, theta, tol: Tolerances = DEFAULT) -> FisherBundle:
    """SLD Fisher bundle of the model at theta.

    Raises RankDeficientState off the interior of state space and
    SingularFisher when cond(G) exceeds the regularity threshold.
    """
    rho = _models.evaluate(model, theta, tol)
    derivs = _models.derivatives(model, theta, tol)
    slds = tuple(solve_sld(rho, d, tol) for d in derivs)
    n = len(slds)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = np.trace(rho @ slds[i] @ slds[j]).real
    G = (G + G.T) / 2.0
    if not np.all(np.isfinite(G)) or np.linalg.cond(G) > tol.singular_cond:
        raise SingularFisher(
            f"SLD Fisher matrix of model {model.name} is singular at theta={np.asarray(theta).tolist()}")
    G_inv = np.linalg.inv(G)
    G_inv = (G_inv + G_inv.T) / 2.0
    duals = tuple(
        hermitize(sum(G_inv[j, i] * slds[j] for j in range(n))) for i in range(n))
    return FisherBundle(slds=slds, G=G, G_inv=G_inv, duals=duals)


@dataclass(frozen=True)
class ClassicalFisher:
    """Classical Fisher information matrix of a POVM with its numerical rank."""
    matrix: np.ndarray
    rank: int


def outcome_scores(model, theta, povm, tol: Tolerances = DEFAULT):
    """(probabilities, score matrix) over outcomes with p above the floor.

    Scores are d/d theta_j log p(x); outcomes below the probability floor are
    excluded (the score is undefined there).
    """
    rho = _models.evaluate(model, theta, tol)
    derivs = _models.derivatives(model, theta, tol)
    effects = getattr(povm, "effects", povm)
    p = np.array([np.trace(rho @ e).real for e in effects])
    if np.any(p < -tol.povm_sum):
        raise InvalidPovm("negative outcome probability; POVM effects are not PSD")
    dp = np.array([[np.trace(d @ e).real for d in derivs] for e in effects])
    keep = p > tol.probability_floor
    scores = dp[keep] / p[keep, None]
    return p[keep], scores, keep


def classical_fisher(model, theta, povm, tol: Tolerances = DEFAULT) -> ClassicalFisher:
    """Fisher information of the outcome distribution of a POVM at theta."""
    p, scores, _ = outcome_scores(model, theta, povm, tol)
    J = (scores.T * p) @ scores
    J = (J + J.T) / 2.0
    return ClassicalFisher(matrix=J, rank=int(np.linalg.matrix_rank(J)))


def partial_fisher(J, m, tol: Tolerances = DEFAULT):
    """Schur complement J_II - J_IN J_NN^-1 J_NI: information about the
    parameters of interest when the nuisance parameters are unknown."""
    J = np.asarray(J, dtype=float)
    if m >= J.shape[0]:
        return J[:m, :m].copy()
    blocks = block_split(J, m)
    if np.linalg.cond(blocks.NN) > tol.singular_cond:
        raise SingularNuisanceBlock("nuisance block of the Fisher matrix is singular")
    out = blocks.II - blocks.IN @ np.linalg.solve(blocks.NN, blocks.NI)
    return (out + out.T) / 2.0


def information_loss(J, m, tol: Tolerances = DEFAULT):
    """(partial information)^-1 - (J_II)^-1: the inverse-variance cost of not
    knowing the nuisance parameters. Zero iff the off-diagonal block vanishes."""
    J = np.asarray(J, dtype=float)
    partial = partial_fisher(J, m, tol)
    loss = np.linalg.inv(partial) - np.linalg.inv(J[:m, :m])
    return (loss + loss.T) / 2.0
