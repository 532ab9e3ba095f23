"""Scalar and matrix estimation-error bounds.

Covers the SLD Cramer-Rao bound, the Nagaoka bound (two-parameter qubit),
the Hayashi-Gill-Massar bound (three-parameter qubit), the weight-matrix
limit of either, the nuisance-elimination bounds for the 1+1 / 1+2 / 2+1
qubit partitions, the determinant tradeoff check, and the classical
weight-matrix elimination closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DeltaOutOfRange,
    NonConvergent,
    NonPositiveWeight,
    NotBlockDiagonal,
    NotPsd,
    NuisanceVarianceTooSmall,
    ShapeMismatch,
    SingularNuisanceBlock,
)
from .fisher import block_split
from .linalg import fidelity
from .tolerances import DEFAULT, Tolerances

WEIGHT_LIMIT_KINDS = ("nagaoka-1+1", "hgm-1+2", "hgm-2+1")


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric PSD weight for the scalar figure of merit Tr(W V)."""
    W: np.ndarray
    strict: bool = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.W, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ShapeMismatch(f"weight matrix must be square, got {w.shape}")
        if np.max(np.abs(w - w.T)) > 1e-10:
            raise NonPositiveWeight("weight matrix must be symmetric")
        vals = np.linalg.eigvalsh(w)
        if vals[0] < -1e-10:
            raise NonPositiveWeight(f"weight matrix has eigenvalue {vals[0]:.3e} < 0")
        object.__setattr__(self, "W", (w + w.T) / 2.0)
        object.__setattr__(self, "strict", bool(vals[0] > DEFAULT.weight_strict))

    @classmethod
    def identity(cls, k):
        return cls(np.eye(k))


@dataclass(frozen=True)
class MseBlocks:
    """Interest/nuisance blocks of a mean-square-error matrix."""
    V_II: np.ndarray
    V_IN: np.ndarray
    V_NN: np.ndarray

    def assemble(self):
        v_in = np.atleast_2d(np.asarray(self.V_IN, dtype=float))
        top = np.hstack([np.atleast_2d(self.V_II), v_in])
        bottom = np.hstack([v_in.T, np.atleast_2d(self.V_NN)])
        return np.vstack([top, bottom])


@dataclass(frozen=True)
class BoundResult:
    """A bound value with a named breakdown of its terms."""
    value: float
    components: dict
    optimal_weights: Optional[dict] = None


def _weight(w, size=None):
    w = w.W if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    w = np.atleast_2d(w)
    if size is not None and w.shape != (size, size):
        raise ShapeMismatch(f"expected a {size}x{size} weight, got {w.shape}")
    return w


def sld_cr_bound(W, G_inv) -> float:
    """Tr(W G^-1): the SLD Cramer-Rao bound on the weighted MSE trace."""
    W = _weight(W)
    G_inv = np.atleast_2d(np.asarray(G_inv, dtype=float))
    if W.shape != G_inv.shape:
        raise ShapeMismatch(f"weight {W.shape} vs G^-1 {G_inv.shape}")
    return float(np.trace(W @ G_inv))


def nagaoka_bound(W, G_inv) -> float:
    """Tr(W G^-1) + 2 sqrt(det(W G^-1)): achievable two-parameter qubit bound."""
    W = _weight(W, 2)
    G_inv = np.asarray(G_inv, dtype=float)
    if G_inv.shape != (2, 2):
        raise ShapeMismatch(f"Nagaoka bound needs a 2x2 G^-1, got {G_inv.shape}")
    det = np.linalg.det(W @ G_inv)
    if det < -1e-12:
        raise NonPositiveWeight("negative det(W G^-1); inputs are not PSD")
    return float(np.trace(W @ G_inv) + 2.0 * np.sqrt(max(det, 0.0)))


def hgm_bound(W, G_inv, tol: Tolerances = DEFAULT) -> float:
    """Squared fidelity F(G^-1, W)^2: achievable three-parameter qubit bound."""
    W = _weight(W, 3)
    G_inv = np.asarray(G_inv, dtype=float)
    if G_inv.shape != (3, 3):
        raise ShapeMismatch(f"HGM bound needs a 3x3 G^-1, got {G_inv.shape}")
    return float(fidelity(G_inv.astype(complex), W.astype(complex), tol) ** 2)


def _embed_weight(W_I, n, eps):
    k = W_I.shape[0]
    W = np.zeros((n, n))
    W[:k, :k] = W_I
    for i in range(k, n):
        W[i, i] = eps
    return W


def weight_limit_bound(bound_kind, W_I, G_inv, tol: Tolerances = DEFAULT) -> BoundResult:
    """Nuisance elimination by the weight-matrix limit W_n -> W_I (+) eps I.

    Evaluates the parent bound on a geometric epsilon ladder (1e-2 .. 1e-8)
    and Richardson-extrapolates the sqrt(eps) leading term. For the 1+1 kind
    the closed limit Tr(W_I) * g^11 is also computed and must agree to 1e-6.
    """
    if bound_kind not in WEIGHT_LIMIT_KINDS:
        raise ShapeMismatch(f"unknown weight-limit kind {bound_kind!r}")
    n, m, parent = {
        "nagaoka-1+1": (2, 1, nagaoka_bound),
        "hgm-1+2": (3, 1, hgm_bound),
        "hgm-2+1": (3, 2, hgm_bound),
    }[bound_kind]
    W_I = _weight(W_I, m)
    G_inv = np.asarray(G_inv, dtype=float)
    if G_inv.shape != (n, n):
        raise ShapeMismatch(f"{bound_kind} needs a {n}x{n} G^-1, got {G_inv.shape}")

    ladder = [10.0 ** (-k) for k in range(2, 9)]
    values = [parent(_embed_weight(W_I, n, eps), G_inv) for eps in ladder]
    # corrections are c*sqrt(eps) + d*eps + O(eps^(3/2)); two Richardson levels
    root = np.sqrt(10.0)
    level1 = [
        (root * values[i + 1] - values[i]) / (root - 1.0) for i in range(len(values) - 1)
    ]
    extrapolants = [
        (10.0 * level1[i + 1] - level1[i]) / 9.0 for i in range(len(level1) - 1)
    ]
    value = extrapolants[-1]
    gap = abs(extrapolants[-1] - extrapolants[-2])
    if gap > tol.weight_limit_cauchy * max(1.0, abs(value)):
        raise NonConvergent(
            f"weight-limit extrapolation not Cauchy for {bound_kind}: gap {gap:.3e}")

    blocks = block_split(G_inv, m)
    if bound_kind == "nagaoka-1+1":
        closed = float(W_I[0, 0] * G_inv[0, 0])
    elif bound_kind == "hgm-1+2":
        closed = float(W_I[0, 0] * G_inv[0, 0])
    else:
        closed = nagaoka_bound(W_I, blocks.II)
    if bound_kind == "nagaoka-1+1" and abs(value - closed) > 1e-6 * max(1.0, abs(closed)):
        raise NonConvergent(
            f"weight-limit extrapolation {value!r} disagrees with the closed limit {closed!r}")

    return BoundResult(value=float(value), components={
        "closed_form": closed,
        "parent_bound": bound_kind,
        "last_epsilon": ladder[-1],
        "extrapolation_gap": gap,
    })


def nui_bound_11(G_inv, V_IN, V_NN, tol: Tolerances = DEFAULT) -> BoundResult:
    """Nuisance-elimination bound for the 1+1 qubit model.

    value = g11 + (det G^-1 + (V_IN - g12)^2) / (V_NN - g22), valid for
    estimators whose nuisance MSE exceeds the SLD floor g22.
    """
    G_inv = np.asarray(G_inv, dtype=float)
    if G_inv.shape != (2, 2):
        raise ShapeMismatch(f"1+1 bound needs a 2x2 G^-1, got {G_inv.shape}")
    g11, g12, g22 = G_inv[0, 0], G_inv[0, 1], G_inv[1, 1]
    V_IN = float(V_IN)
    V_NN = float(V_NN)
    slack = V_NN - g22
    if slack <= tol.nuisance_floor_margin:
        raise NuisanceVarianceTooSmall(
            f"V_NN = {V_NN!r} must exceed the SLD floor g22 = {g22!r}")
    det = float(np.linalg.det(G_inv))
    tradeoff = (det + (V_IN - g12) ** 2) / slack
    return BoundResult(
        value=float(g11 + tradeoff),
        components={
            "baseline": float(g11),
            "tradeoff": float(tradeoff),
            "symmetric_relaxation": float(g11 + det / slack),
            "parent_bound": "nagaoka-1+1",
        },
    )


def tradeoff_det_check(V_II, G_II_sup) -> float:
    """det(V - G^II) - det(G^II); nonnegative for locally unbiased estimators."""
    V_II = np.asarray(V_II, dtype=float)
    G_II_sup = np.asarray(G_II_sup, dtype=float)
    if V_II.shape != (2, 2) or G_II_sup.shape != (2, 2):
        raise ShapeMismatch("tradeoff check is for 2x2 blocks")
    return float(np.linalg.det(V_II - G_II_sup) - np.linalg.det(G_II_sup))


def nui_bound_12(g11_sup, G_NN_sup, V_NN, tol: Tolerances = DEFAULT) -> BoundResult:
    """Nuisance-elimination bound for the 1+2 qubit model (orthogonalized blocks).

    delta_N = sqrt(det G^NN / det(V_NN - G^NN)); value = g11 (1 + 2 d/(1-d)).
    """
    g11 = float(g11_sup)
    G_NN = np.asarray(G_NN_sup, dtype=float)
    V_NN = np.asarray(V_NN, dtype=float)
    if G_NN.shape != (2, 2) or V_NN.shape != (2, 2):
        raise ShapeMismatch("1+2 bound needs 2x2 nuisance blocks")
    slack = V_NN - G_NN
    vals = np.linalg.eigvalsh((slack + slack.T) / 2.0)
    if vals[0] <= tol.nuisance_floor_margin:
        raise NuisanceVarianceTooSmall("V_NN - G^NN must be positive definite")
    delta = float(np.sqrt(np.linalg.det(G_NN) / np.linalg.det(slack)))
    if delta >= 1.0:
        raise DeltaOutOfRange(f"delta_N = {delta!r} >= 1; no finite bound")
    value = g11 * (1.0 + 2.0 * delta / (1.0 - delta))
    return BoundResult(value=float(value), components={
        "baseline": g11,
        "delta_N": delta,
        "parent_bound": "hgm-1+2",
    })


def nui_bound_21(W_I, G_II_sup, g33_sup, V_33, tol: Tolerances = DEFAULT) -> BoundResult:
    """Nuisance-elimination bound for the 2+1 qubit model (orthogonalized blocks).

    value = C^N[W_I](1 + g33/(V33 - g33)) with C^N the Nagaoka form on G^II;
    the information loss C^N g33/(V33 - g33) is reported alongside.
    """
    W_I = _weight(W_I, 2)
    G_II = np.asarray(G_II_sup, dtype=float)
    g33 = float(g33_sup)
    V_33 = float(V_33)
    slack = V_33 - g33
    if slack <= tol.nuisance_floor_margin:
        raise NuisanceVarianceTooSmall(
            f"V_33 = {V_33!r} must exceed the SLD floor g33 = {g33!r}")
    cn = nagaoka_bound(W_I, G_II)
    loss = cn * g33 / slack
    return BoundResult(value=float(cn + loss), components={
        "nagaoka_interest": float(cn),
        "information_loss": float(loss),
        "parent_bound": "hgm-2+1",
    })


def split_orthogonal_blocks(G_inv, m, tol: Tolerances = DEFAULT):
    """Interest/nuisance blocks of G^-1, refusing non-block-diagonal input.

    The 1+2 / 2+1 elimination bounds are derived for orthogonalized models;
    off-block entries above tol.block_orthogonality raise NotBlockDiagonal
    rather than being silently projected away.
    """
    blocks = block_split(np.asarray(G_inv, dtype=float), m)
    off = float(np.max(np.abs(blocks.IN))) if blocks.IN.size else 0.0
    if off > tol.block_orthogonality:
        raise NotBlockDiagonal(
            f"interest/nuisance off-block magnitude {off:.3e}; orthogonalize the model first")
    return blocks


def classical_weight_elimination(M, W_I, tol: Tolerances = DEFAULT) -> BoundResult:
    """Closed-form minimum of Tr(W_n M) over admissible nuisance weight blocks.

    min over (W_IN, W_N) with W_n >= 0, W_I > 0 fixed equals
    Tr(W_I (M_II - M_IN M_NN^-1 M_NI)), attained at W_NI = -M_NN^-1 M_NI W_I,
    W_N = W_NI W_I^-1 W_IN. The Schur complement of M is also the classical
    MSE-tradeoff residual, returned in the components.
    """
    M = np.asarray(M, dtype=float)
    W_I = _weight(W_I)
    m = W_I.shape[0]
    n = M.shape[0]
    if M.shape != (n, n) or not (0 < m < n):
        raise ShapeMismatch(f"need square M with 0 < m < n, got M {M.shape}, m = {m}")
    if np.max(np.abs(M - M.T)) > 1e-9:
        raise ShapeMismatch("M must be symmetric")
    if np.linalg.eigvalsh(W_I)[0] <= DEFAULT.weight_strict:
        raise NonPositiveWeight("interest weight must be strictly positive definite")
    blocks = block_split(M, m)
    if np.linalg.cond(blocks.NN) > tol.singular_cond:
        raise SingularNuisanceBlock("nuisance block of M is singular")

    schur = blocks.II - blocks.IN @ np.linalg.solve(blocks.NN, blocks.NI)
    schur = (schur + schur.T) / 2.0
    value = float(np.trace(W_I @ schur))

    W_NI = -np.linalg.solve(blocks.NN, blocks.NI) @ W_I
    W_IN = W_NI.T
    W_N = W_NI @ np.linalg.solve(W_I, W_IN)
    W_full = np.block([[W_I, W_IN], [W_NI, W_N]])
    direct = float(np.trace(W_full @ M))
    if abs(direct - value) > 1e-8 * max(1.0, abs(value)):
        raise NonConvergent(
            f"optimal-weight evaluation {direct!r} disagrees with the Schur value {value!r}")

    return BoundResult(
        value=value,
        components={"direct_evaluation": direct,
                    "tradeoff_residual_min_eig": float(np.linalg.eigvalsh(schur)[0])},
        optimal_weights={"W_IN": W_IN, "W_N": W_N, "W_full": W_full,
                         "tradeoff_residual": schur},
    )
