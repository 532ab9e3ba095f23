"""POVMs, locally unbiased estimators, MSE evaluation, and the brute-force
measurement-optimization oracle.

The oracle minimizes Tr(W_I V_I[Pi]) over measurement families, where
V_I[Pi] is the smallest interest-block MSE any locally unbiased estimator
for the parameters of interest can reach with the POVM Pi (the interest
block of the pseudo-inverse of the classical Fisher matrix). Candidates
that cannot support such an estimator are skipped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import models as _models
from .errors import (
    EmptyFeasibleSet,
    InvalidPovm,
    RequiresSingleInterest,
    SingularFisher,
    SingularNuisanceScores,
)
from .fisher import outcome_scores, sld_fisher
from .linalg import PAULI, I2, bloch_state, eig_hermitian, hermitize, require_hermitian
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class Povm:
    """Finite collection of PSD effects summing to the identity."""
    effects: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.effects) != len(self.labels):
            raise InvalidPovm("one label per effect required")
        object.__setattr__(self, "effects",
                           tuple(np.asarray(e, dtype=complex) for e in self.effects))


@dataclass(frozen=True)
class PovmDiagnostics:
    ok: bool
    messages: tuple


def validate_povm(p: Povm, tol: Tolerances = DEFAULT) -> PovmDiagnostics:
    """Check effect positivity and completeness; returns diagnostics, never raises."""
    messages = []
    dim = p.effects[0].shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    for label, e in zip(p.labels, p.effects):
        if e.shape != (dim, dim):
            messages.append(f"effect {label!r}: shape {e.shape} != {(dim, dim)}")
            continue
        dev = float(np.max(np.abs(e - e.conj().T)))
        if dev > tol.hermiticity_error:
            messages.append(f"effect {label!r}: non-Hermitian by {dev:.3e}")
            continue
        low = float(np.linalg.eigvalsh(hermitize(e))[0])
        if low < -tol.psd_clip:
            messages.append(f"effect {label!r}: min eigenvalue {low:.3e} < -{tol.psd_clip:.0e}")
        total += e
    dev = float(np.max(np.abs(total - np.eye(dim))))
    if dev > tol.povm_sum:
        messages.append(f"effects sum to identity only within {dev:.3e} > {tol.povm_sum:.0e}")
    return PovmDiagnostics(ok=not messages, messages=tuple(messages))


def pvm_from_observable(h, tol: Tolerances = DEFAULT) -> Povm:
    """Projection measurement onto the eigenspaces of a Hermitian operator."""
    decomp = eig_hermitian(require_hermitian(h, tol), tol)
    return Povm(effects=decomp.projectors, labels=tuple(float(v) for v in decomp.eigenvalues))


def pvm_from_direction(direction) -> Povm:
    """Qubit PVM {(I +/- n.sigma)/2} for a unit Bloch direction."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    obs = sum(n[k] * PAULI[k] for k in range(3))
    return Povm(effects=(0.5 * (I2 + obs), 0.5 * (I2 - obs)), labels=(1.0, -1.0))


def optimal_interest_pvm(model, theta, tol: Tolerances = DEFAULT) -> Povm:
    """Optimal projection measurement for a single parameter of interest.

    For m = 1 the most-informative measurement is the PVM of the dual SLD
    L^1 = sum_j (G^-1)_j1 L_j; its interest-MSE floor equals (G^-1)_11.
    """
    if model.m != 1:
        raise RequiresSingleInterest(f"model has m = {model.m}; the dual-SLD PVM needs m = 1")
    bundle = sld_fisher(model, theta, tol)
    return pvm_from_observable(bundle.duals[0], tol)


@dataclass(frozen=True)
class Estimator:
    """Outcome-label -> estimate table; vectors of length m (interest) or n (full)."""
    table: dict

    def vector(self, label):
        return self.table[label]

    def width(self):
        return len(next(iter(self.table.values())))


def interest_mse_floor(J, m, tol: Tolerances = DEFAULT):
    """Smallest interest-block MSE over locally unbiased estimators given J.

    Equals the interest block of pinv(J); feasible only when every null
    direction of J has vanishing interest components (otherwise no locally
    unbiased estimator for the parameters of interest exists).
    """
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    floor = 1e-12 * max(1.0, float(np.max(np.abs(J))))
    pinv = _sym_pinv(J, floor)
    residual = float(np.max(np.abs((np.eye(n) - J @ pinv)[:, :m]))) if n else 0.0
    if residual > 1e-8:
        return None
    return pinv[:m, :m]


def _score_data(model, theta, povm, tol):
    p, scores, keep = outcome_scores(model, theta, povm, tol)
    J = (scores.T * p) @ scores
    J = (J + J.T) / 2.0
    return p, scores, keep, J


def _sym_pinv(a, floor):
    """Pseudo-inverse of a symmetric matrix zeroing eigenvalues below floor.

    The floor is absolute (tied to the full Fisher scale by the caller), so a
    numerically dead nuisance block is treated as exactly zero instead of
    being inverted into noise.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return a.copy()
    vals, vecs = np.linalg.eigh((a + a.T) / 2.0)
    inv = np.where(np.abs(vals) > floor, 1.0 / np.where(vals == 0.0, 1.0, vals), 0.0)
    return (vecs * inv) @ vecs.T


def locally_unbiased_estimator(model, theta, povm, scope="full",
                               tol: Tolerances = DEFAULT) -> Estimator:
    """Construct a locally unbiased estimator at theta for the given POVM.

    scope="full": canonical construction theta + J^-1 s(x); its MSE is J^-1.
    scope="interest": effective-score construction for the parameters of
    interest, valid even when the nuisance scores are degenerate.
    """
    theta = np.asarray(theta, dtype=float)
    p, scores, keep, J = _score_data(model, theta, povm, tol)
    m = model.m
    labels = list(povm.labels)
    table = {}

    if scope == "full":
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > tol.singular_cond:
            raise SingularFisher("classical Fisher matrix is singular; no full-scope estimator")
        coef = np.linalg.inv(J)
        idx = 0
        for i, label in enumerate(labels):
            if keep[i]:
                table[label] = theta + coef @ scores[idx]
                idx += 1
            else:
                table[label] = theta.copy()
        return Estimator(table=dict(table))

    if scope != "interest":
        raise ValueError(f"scope must be 'full' or 'interest', got {scope!r}")

    J_II, J_IN, J_NN = J[:m, :m], J[:m, m:], J[m:, m:]
    floor = 1e-12 * max(1.0, float(np.max(np.abs(J))))
    if J_IN.size:
        m_star = J_IN @ _sym_pinv(J_NN, floor)
    else:
        m_star = np.zeros((m, 0))
    eff = scores[:, :m] - scores[:, m:] @ m_star.T
    partial = J_II - m_star @ J_IN.T
    partial = (partial + partial.T) / 2.0
    # the effective information must survive on the scale of the full Fisher
    # matrix, otherwise projecting out the nuisance scores consumed everything
    if not np.all(np.isfinite(partial)) \
            or np.linalg.eigvalsh(partial)[0] <= 1e-10 * max(1.0, float(np.max(np.abs(J)))) \
            or np.linalg.cond(partial) > tol.singular_cond:
        raise SingularNuisanceScores("effective interest scores are degenerate")
    # nuisance insensitivity of the effective scores
    cross = (eff.T * p) @ scores[:, m:]
    if cross.size and np.max(np.abs(cross)) > 1e-6 * max(1.0, float(np.max(np.abs(J)))):
        raise SingularNuisanceScores(
            "nuisance sensitivity cannot be cancelled; no interest-scope estimator")
    coef = np.linalg.inv(partial)
    idx = 0
    for i, label in enumerate(labels):
        if keep[i]:
            table[label] = theta[:m] + coef @ eff[idx]
            idx += 1
        else:
            table[label] = theta[:m].copy()
    return Estimator(table=dict(table))


@dataclass(frozen=True)
class UnbiasednessReport:
    ok: bool
    value_residuals: np.ndarray
    deriv_residuals: np.ndarray


def check_local_unbiasedness(model, theta, povm, est: Estimator, scope="full",
                             tol: Tolerances = DEFAULT) -> UnbiasednessReport:
    """Residuals of E[est_i] = theta_i and d/d theta_j E[est_i] = delta_ij.

    Derivatives are taken over all n parameters (interest scope included);
    expectations are differentiated by the same central-difference policy as
    model derivatives. Passes iff every residual is below tol.lu_residual.
    """
    theta = np.asarray(theta, dtype=float)
    width = est.width()
    rows = range(width)
    target = theta[:width]

    def expectations(at):
        rho = _models.evaluate(model, at, tol)
        probs = np.array([np.trace(rho @ e).real for e in povm.effects])
        vals = np.array([est.vector(label) for label in povm.labels])
        return probs @ vals

    e0 = expectations(theta)
    value_residuals = np.abs(e0 - target)

    deriv = np.empty((width, model.n))
    for j in range(model.n):
        h = tol.fd_step * max(1.0, abs(theta[j]))
        for attempt in range(2):
            tp = theta.copy(); tp[j] += h
            tm = theta.copy(); tm[j] -= h
            if model.domain(tp) and model.domain(tm):
                break
            h /= 10.0
        deriv[:, j] = (expectations(tp) - expectations(tm)) / (2.0 * h)
    expected = np.zeros((width, model.n))
    for i in rows:
        expected[i, i] = 1.0
    deriv_residuals = np.abs(deriv - expected)
    ok = bool(np.max(value_residuals) < tol.lu_residual
              and np.max(deriv_residuals) < tol.lu_residual)
    return UnbiasednessReport(ok=ok, value_residuals=value_residuals,
                              deriv_residuals=deriv_residuals)


def mse_matrix(model, theta, povm, est: Estimator, tol: Tolerances = DEFAULT):
    """Mean-square-error matrix sum_x p(x) (est(x) - theta)(est(x) - theta)^T."""
    theta = np.asarray(theta, dtype=float)
    width = est.width()
    rho = _models.evaluate(model, theta, tol)
    probs = np.array([np.trace(rho @ e).real for e in povm.effects])
    devs = np.array([est.vector(label) for label in povm.labels]) - theta[:width]
    out = (devs.T * probs) @ devs
    return (out + out.T) / 2.0


def randomize_povms(p_star: Povm, p0: Povm, eps: float,
                    tol: Tolerances = DEFAULT) -> Povm:
    """Probabilistic mixture: perform p_star with probability 1 - eps, p0 with eps.

    The classical Fisher matrix of the mixture is the same convex combination
    of the component Fisher matrices.
    """
    if not (0.0 < eps < 1.0):
        raise InvalidPovm(f"mixing probability must lie in (0, 1), got {eps!r}")
    for q in (p_star, p0):
        diag = validate_povm(q, tol)
        if not diag.ok:
            raise InvalidPovm("; ".join(diag.messages))
    effects = tuple((1.0 - eps) * e for e in p_star.effects) + tuple(eps * e for e in p0.effects)
    labels = tuple((0, l) for l in p_star.labels) + tuple((1, l) for l in p0.labels)
    return Povm(effects=effects, labels=labels)


# --- measurement-optimization oracle ------------------------------------------

ORACLE_FAMILIES = ("pvm-grid", "random-4-outcome", "mixtures")


@dataclass(frozen=True)
class OracleConfig:
    """Deterministic search configuration for the measurement oracle."""
    seed: int = 0
    grid_density: int = 32          # polar/azimuthal subdivisions of the Bloch sphere
    refinement_rounds: int = 3
    candidates: tuple = ("pvm-grid", "random-4-outcome")
    n_random: Optional[int] = None          # random 4-outcome POVMs (default 2 * grid_density)
    mixture_epsilons: tuple = (0.5, 0.25, 0.1, 0.01)
    mixture_circle_nodes: int = 16          # axes per principal great circle for mixture pairs

    def __post_init__(self):
        if self.grid_density < 8:
            raise InvalidPovm("grid_density must be at least 8")
        if self.refinement_rounds < 0:
            raise InvalidPovm("refinement_rounds must be nonnegative")
        unknown = set(self.candidates) - set(ORACLE_FAMILIES)
        if unknown:
            raise InvalidPovm(f"unknown candidate families {sorted(unknown)}")


@dataclass(frozen=True)
class OracleResult:
    value: float
    povm: Povm
    descriptor: dict
    trace: tuple               # incumbent value after the sweep and each refinement round
    evaluated: int
    skipped: int


def _direction(polar, azim):
    sp = np.sin(polar)
    return np.array([sp * np.cos(azim), sp * np.sin(azim), np.cos(polar)])


def _grid_angles(g):
    angles = [(0.0, 0.0)]
    for j in range(1, g // 2 + 1):
        polar = j * np.pi / g
        on_equator = (2 * j == g)
        azim_count = g // 2 if on_equator else g
        for i in range(azim_count):
            angles.append((polar, i * 2.0 * np.pi / g))
    return angles


def _circle_axes(nodes):
    """Axes on the three principal great circles (antipodes removed)."""
    axes = []
    for k in range(nodes // 2):
        a = k * 2.0 * np.pi / nodes
        c, s = np.cos(a), np.sin(a)
        axes.append((np.pi / 2.0, a))                       # xy-plane
    for k in range(nodes // 2):
        a = k * 2.0 * np.pi / nodes
        axes.append((a if a <= np.pi else a - np.pi, 0.0))  # xz-plane
    for k in range(nodes // 2):
        a = k * 2.0 * np.pi / nodes
        axes.append((a if a <= np.pi else a - np.pi, np.pi / 2.0))  # yz-plane
    seen = set()
    out = []
    for polar, azim in axes:
        n = _direction(polar, azim)
        key = tuple(np.round(n if n[np.argmax(np.abs(n))] >= 0 else -n, 12))
        if key not in seen:
            seen.add(key)
            out.append((polar, azim))
    return out


def _random_4_outcome(rng, dim=2):
    """Random 4-outcome POVM from normalized positive combinations."""
    raw = []
    for _ in range(4):
        w = rng.normal(size=3)
        w = w / np.linalg.norm(w) * rng.uniform(0.0, 0.999)
        raw.append(rng.uniform(0.05, 1.0) * bloch_state(w))
    total = sum(raw)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    effects = tuple(hermitize(inv_sqrt @ e @ inv_sqrt) for e in raw)
    return Povm(effects=effects, labels=tuple(range(4)))


def _mixture_povm(angles_a, angles_b, eps):
    return randomize_povms(pvm_from_direction(_direction(*angles_a)),
                           pvm_from_direction(_direction(*angles_b)), eps)


def oracle_minimize(model, theta, W_I, cfg: OracleConfig,
                    tol: Tolerances = DEFAULT) -> OracleResult:
    """Minimize Tr(W_I V_I[Pi]) over the configured measurement families.

    Deterministic given cfg.seed. Candidates whose interest scores are
    linearly dependent (smallest weighted singular value below the
    independence threshold), or that cannot support an interest-scope
    locally unbiased estimator, are skipped. Refinement rounds halve the
    angular grid spacing around the incumbent.
    """
    if model.dim != 2:
        raise InvalidPovm("the oracle searches qubit measurement families only")
    theta = np.asarray(theta, dtype=float)
    W_I = np.atleast_2d(np.asarray(getattr(W_I, "W", W_I), dtype=float))
    m = model.m
    rho = _models.evaluate(model, theta, tol)
    derivs = _models.derivatives(model, theta, tol)
    counters = {"evaluated": 0, "skipped": 0}

    def objective(povm):
        effects = povm.effects
        p = np.array([np.trace(rho @ e).real for e in effects])
        dp = np.array([[np.trace(d @ e).real for d in derivs] for e in effects])
        keep = p > tol.probability_floor
        scores = dp[keep] / p[keep, None]
        weighted = np.sqrt(p[keep])[:, None] * scores
        counters["evaluated"] += 1
        if weighted.shape[0] < m or \
                np.linalg.svd(weighted[:, :m], compute_uv=False)[-1] < tol.score_independence:
            counters["skipped"] += 1
            return None
        J = weighted.T @ weighted
        floor = interest_mse_floor((J + J.T) / 2.0, m, tol)
        if floor is None:
            counters["skipped"] += 1
            return None
        return float(np.trace(W_I @ floor))

    def build(desc):
        kind = desc[0]
        if kind == "pvm":
            return pvm_from_direction(_direction(*desc[1]))
        if kind == "mixture":
            return _mixture_povm(desc[1], desc[2], desc[3])
        return desc[1]  # ("random4", povm, index)

    candidates = []
    if "pvm-grid" in cfg.candidates:
        candidates.extend(("pvm", ang) for ang in _grid_angles(cfg.grid_density))
    if "random-4-outcome" in cfg.candidates:
        rng = np.random.default_rng(cfg.seed)
        count = cfg.n_random if cfg.n_random is not None else 2 * cfg.grid_density
        candidates.extend(("random4", _random_4_outcome(rng), i) for i in range(count))
    if "mixtures" in cfg.candidates:
        axes = _circle_axes(cfg.mixture_circle_nodes)
        for i in range(len(axes)):
            for j in range(i + 1, len(axes)):
                for eps in cfg.mixture_epsilons:
                    candidates.append(("mixture", axes[i], axes[j], eps))

    best_value = None
    best_desc = None
    for desc in candidates:
        v = objective(build(desc))
        if v is not None and (best_value is None or v < best_value - 0.0):
            best_value, best_desc = v, desc
    if best_value is None:
        raise EmptyFeasibleSet("every candidate measurement was skipped")

    trace = [best_value]
    spacing = np.pi / cfg.grid_density
    for _ in range(cfg.refinement_rounds):
        spacing /= 2.0
        offsets = [k * spacing for k in (-2, -1, 0, 1, 2)]
        local = []
        if best_desc[0] == "pvm":
            p0, a0 = best_desc[1]
            local = [("pvm", (min(max(p0 + dp, 0.0), np.pi), a0 + da))
                     for dp in offsets for da in offsets]
        elif best_desc[0] == "mixture":
            (pa, aa), (pb, ab), eps = best_desc[1], best_desc[2], best_desc[3]
            patch_a = [(min(max(pa + dp, 0.0), np.pi), aa + da)
                       for dp in offsets for da in offsets]
            patch_b = [(min(max(pb + dp, 0.0), np.pi), ab + da)
                       for dp in offsets for da in offsets]
            local = [("mixture", ca, cb, eps) for ca in patch_a for cb in patch_b]
        for desc in local:
            v = objective(build(desc))
            if v is not None and v < best_value:
                best_value, best_desc = v, desc
        trace.append(best_value)

    desc = best_desc
    if desc[0] == "pvm":
        info = {"family": "pvm-grid", "polar": desc[1][0], "azimuth": desc[1][1],
                "direction": _direction(*desc[1]).tolist()}
    elif desc[0] == "mixture":
        info = {"family": "mixtures", "epsilon": desc[3],
                "direction_a": _direction(*desc[1]).tolist(),
                "direction_b": _direction(*desc[2]).tolist()}
    else:
        info = {"family": "random-4-outcome", "index": desc[2],
                "bloch_effects": [
                    [float(np.trace(e @ PAULI[k]).real) for k in range(3)]
                    for e in desc[1].effects]}
    return OracleResult(value=best_value, povm=build(desc), descriptor=info,
                        trace=tuple(trace), evaluated=counters["evaluated"],
                        skipped=counters["skipped"])
