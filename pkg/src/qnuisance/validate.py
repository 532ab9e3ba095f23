"""Runtime property suites surfaced by the `validate` CLI subcommand.

Each named check samples randomized instances (deterministic in the seed)
and returns a list of violation messages; an empty list means the invariant
held. Tolerances can be overridden per check name, which the test harness
uses to inject failures and exercise the reporting path.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import bounds as _bounds
from . import fisher as _fisher
from . import linalg as _linalg
from . import metrology as _metrology
from . import models as _models
from . import povm as _povm

CHECKS = {}


def register(name):
    def wrap(fn):
        CHECKS[name] = fn
        return fn
    return wrap


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    failures: tuple
    elapsed: float


def run_all(seed=2024, scale=1.0, overrides=None, names=None):
    overrides = overrides or {}
    selected = names or sorted(CHECKS)
    results = []
    for name in selected:
        fn = CHECKS[name]
        rng = np.random.default_rng([seed, abs(hash(name)) % (2 ** 32)])
        start = time.perf_counter()
        failures = fn(rng, scale, overrides.get(name))
        results.append(CheckResult(name=name, ok=not failures,
                                   failures=tuple(failures),
                                   elapsed=time.perf_counter() - start))
    return results


def _count(base, scale):
    return max(1, int(round(base * scale)))


def _random_psd(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return _linalg.hermitize(a @ a.conj().T) * scale / d


def _random_spd(rng, d):
    a = rng.normal(size=(d, d))
    return a @ a.T + (0.1 + rng.uniform()) * np.eye(d)


def _random_full_rank_state(rng, d):
    m = _random_psd(rng, d)
    m = m + 0.05 * np.eye(d)
    return m / np.trace(m).real


def _random_traceless_hermitian(rng, d):
    h = _linalg.hermitize(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return h - np.trace(h).real * np.eye(d) / d


MODEL_SAMPLERS = {
    "A": lambda rng: _disc_point(rng, 2, 0.95),
    "B": lambda rng: _disc_point(rng, 3, 0.95),
    "C": lambda rng: _disc_point(rng, 2, 0.95 * np.sqrt(1.0 - 0.36)),
    "D": lambda rng: _disc_point(rng, 3, 0.95),
    "E": lambda rng: np.array([rng.uniform(0.05, 0.95), rng.uniform(0.0, 2.0 * np.pi)]),
    "F": lambda rng: np.array([rng.uniform(-3.0, 3.0), rng.uniform(0.05, 2.0)]),
}
MODEL_FIXED = {"C": 0.6}


def builtin_with_sampler(name):
    return _models.make_builtin(name, MODEL_FIXED.get(name)), MODEL_SAMPLERS[name]


def _disc_point(rng, n, radius):
    v = rng.normal(size=n)
    v /= np.linalg.norm(v)
    return v * radius * rng.uniform(0.05, 1.0) ** (1.0 / n)


def _random_direction(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


# --- linalg -------------------------------------------------------------------

@register("linalg.sld_solver")
def _check_sld_solver(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for _ in range(_count(50, scale)):
        d = int(rng.integers(2, 5))
        rho = _random_full_rank_state(rng, d)
        drho = _random_traceless_hermitian(rng, d)
        sld = _linalg.solve_sld(rho, drho)
        recon = 0.5 * (rho @ sld + sld @ rho)
        if _linalg.herm_deviation(sld) > tol:
            failures.append(f"non-Hermitian SLD at d={d}")
        if np.max(np.abs(recon - drho)) > tol:
            failures.append(f"reconstruction residual above {tol:g} at d={d}")
        if abs(np.trace(rho @ sld).real) > tol:
            failures.append(f"Tr(rho L) above {tol:g} at d={d}")
    return failures


@register("linalg.fidelity_symmetry")
def _check_fidelity_symmetry(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for d in (2, 3):
        for _ in range(_count(100, scale)):
            a, b = _random_psd(rng, d), _random_psd(rng, d)
            gap = abs(_linalg.fidelity(a, b) - _linalg.fidelity(b, a))
            if gap > tol:
                failures.append(f"asymmetry {gap:.3e} at d={d}")
    return failures


@register("linalg.psd_sqrt_roundtrip")
def _check_psd_sqrt(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for _ in range(_count(100, scale)):
        d = int(rng.integers(2, 5))
        a = _random_psd(rng, d)
        r = _linalg.psd_sqrt(a)
        if np.max(np.abs(r @ r - a)) > tol:
            failures.append(f"sqrt roundtrip residual above {tol:g} at d={d}")
    return failures


@register("linalg.projector_completeness")
def _check_projectors(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-10
    failures = []
    for _ in range(_count(60, scale)):
        d = int(rng.integers(2, 5))
        h = _linalg.hermitize(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        dec = _linalg.eig_hermitian(h)
        total = sum(dec.projectors)
        if np.max(np.abs(total - np.eye(d))) > tol:
            failures.append(f"projector completeness residual above {tol:g} at d={d}")
        if np.max(np.abs(dec.reconstruct() - _linalg.hermitize(h))) > 1e-10:
            failures.append(f"spectral reconstruction residual at d={d}")
    return failures


# --- models -------------------------------------------------------------------

@register("models.state_validity")
def _check_state_validity(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-10
    failures = []
    for name in _models.BUILTIN_NAMES:
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(50, scale)):
            rho = _models.evaluate(model, sampler(rng))
            if abs(np.trace(rho).real - 1.0) > tol:
                failures.append(f"model {name}: trace deviates")
            if np.linalg.eigvalsh(rho)[0] < -tol:
                failures.append(f"model {name}: negative eigenvalue")
    return failures


@register("models.fd_vs_closed")
def _check_fd_vs_closed(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-6
    failures = []
    for name in _models.BUILTIN_NAMES:
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(10, scale)):
            theta = sampler(rng)
            closed = _models.derivatives(model, theta)
            fd = _models.finite_difference_derivatives(model, theta)
            for c, f in zip(closed, fd):
                ref = max(1.0, float(np.max(np.abs(c))))
                if np.max(np.abs(c - f)) / ref > tol:
                    failures.append(f"model {name}: FD mismatch at {theta.tolist()}")
    return failures


@register("models.orthogonalized_offblock")
def _check_orthogonalized(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-8
    failures = []
    for name in ("A", "B", "C", "D"):
        base = _models.make_builtin(name, MODEL_FIXED.get(name))
        repar = _models.builtin_orthogonalization(name, MODEL_FIXED.get(name))
        model = _models.orthogonalize(base, repar)
        for _ in range(_count(20, scale)):
            xi = np.concatenate([
                _disc_point(rng, base.m, 0.9) if base.m > 1 else rng.uniform(-0.9, 0.9, 1),
                rng.uniform(-1.5, 1.5, base.n - base.m)])
            if not model.domain(xi):
                continue
            bundle = _fisher.sld_fisher(model, xi)
            off = np.max(np.abs(bundle.G[:base.m, base.m:]))
            if off > tol:
                failures.append(f"model {name}: off-block {off:.3e} at xi={xi.tolist()}")
    return failures


# --- fisher -------------------------------------------------------------------

@register("fisher.data_processing")
def _check_data_processing(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-8
    failures = []
    for name in _models.BUILTIN_NAMES:
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(10, scale)):
            theta = sampler(rng)
            bundle = _fisher.sld_fisher(model, theta)
            for _ in range(_count(10, scale)):
                pvm = _povm.pvm_from_direction(_random_direction(rng))
                J = _fisher.classical_fisher(model, theta, pvm).matrix
                low = np.linalg.eigvalsh(bundle.G - J)[0]
                if low < -tol:
                    failures.append(f"model {name}: G - J has eigenvalue {low:.3e}")
    return failures


@register("fisher.schur_inequality")
def _check_schur(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-10
    failures = []
    for _ in range(_count(100, scale)):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n))
        J = _random_spd(rng, n)
        loss = _fisher.information_loss(J, m)
        if np.linalg.eigvalsh(loss)[0] < -tol:
            failures.append("information loss not PSD")
        partial = _fisher.partial_fisher(J, m)
        gap = np.linalg.eigvalsh(J[:m, :m] - partial)[0]
        if gap < -tol:
            failures.append("partial information exceeds the known-nuisance block")
    return failures


@register("fisher.gill_massar")
def _check_gill_massar(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-8
    failures = []
    for name in _models.BUILTIN_NAMES:
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(10, scale)):
            theta = sampler(rng)
            bundle = _fisher.sld_fisher(model, theta)
            for _ in range(_count(10, scale)):
                pvm = _povm.pvm_from_direction(_random_direction(rng))
                J = _fisher.classical_fisher(model, theta, pvm).matrix
                val = float(np.trace(J @ bundle.G_inv))
                if val > 1.0 + tol:
                    failures.append(f"model {name}: Tr(J G^-1) = {val!r}")
    return failures


@register("fisher.dual_basis")
def _check_dual_basis(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-8
    failures = []
    for name in _models.BUILTIN_NAMES:
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(10, scale)):
            theta = sampler(rng)
            bundle = _fisher.sld_fisher(model, theta)
            rho = _models.evaluate(model, theta)
            n = model.n
            for i in range(n):
                for j in range(n):
                    val = np.trace(rho @ (bundle.duals[i] @ bundle.slds[j]
                                          + bundle.slds[j] @ bundle.duals[i])).real / 2.0
                    if abs(val - (1.0 if i == j else 0.0)) > tol:
                        failures.append(f"model {name}: dual-basis defect at ({i},{j})")
    return failures


@register("fisher.lemma1_reparametrization")
def _check_lemma1(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-6
    failures = []
    for name in ("A", "B"):
        base = _models.make_builtin(name)
        repar = _models.builtin_orthogonalization(name)
        orth = _models.orthogonalize(base, repar)
        for _ in range(_count(5, scale)):
            theta = MODEL_SAMPLERS[name](rng)
            pvm = _povm.pvm_from_direction([1.0, 0.0, 0.0])
            try:
                est = _povm.locally_unbiased_estimator(base, theta, pvm, scope="interest")
            except _povm.SingularNuisanceScores:
                continue
            rep = _povm.check_local_unbiasedness(base, theta, pvm, est, scope="interest")
            xi = repar.inverse(theta)
            rep_xi = _povm.check_local_unbiasedness(orth, xi, pvm, est, scope="interest")
            worst = max(np.max(rep_xi.value_residuals), np.max(rep_xi.deriv_residuals))
            if not rep.ok or worst > tol:
                failures.append(f"model {name}: unbiasedness broken by reparametrization "
                                f"(residual {worst:.3e})")
    return failures


# --- bounds -------------------------------------------------------------------

@register("bounds.nagaoka_dominates_sld")
def _check_nagaoka_sld(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-12
    failures = []
    for _ in range(_count(100, scale)):
        G_inv = _random_spd(rng, 2)
        W = _random_spd(rng, 2)
        gap = _bounds.nagaoka_bound(W, G_inv) - _bounds.sld_cr_bound(W, G_inv)
        if gap < -tol:
            failures.append("Nagaoka bound below SLD bound")
    return failures


@register("bounds.nui11_dominates_limit")
def _check_nui11(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for _ in range(_count(100, scale)):
        G_inv = _random_spd(rng, 2)
        v_nn = G_inv[1, 1] + rng.uniform(0.05, 10.0)
        v_in = rng.normal()
        res = _bounds.nui_bound_11(G_inv, v_in, v_nn)
        limit = _bounds.weight_limit_bound("nagaoka-1+1", [[1.0]], G_inv)
        if res.value < limit.value - tol:
            failures.append("elimination bound below the weight-limit bound")
    return failures


@register("bounds.nui12_exceeds_baseline")
def _check_nui12(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 0.0
    failures = []
    for _ in range(_count(100, scale)):
        g11 = rng.uniform(0.1, 5.0)
        G_NN = _random_spd(rng, 2)
        slack = _random_spd(rng, 2)
        # slack total G_NN + spd keeps delta_N < 1
        res = _bounds.nui_bound_12(g11, G_NN, 2.0 * G_NN + slack)
        if not res.value > g11 + tol:
            failures.append("1+2 bound does not exceed the baseline")
    return failures


@register("bounds.classical_elimination")
def _check_classical_elimination(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-8
    failures = []
    for _ in range(_count(100, scale)):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n))
        M = _random_spd(rng, n)
        W_I = _random_spd(rng, m)
        res = _bounds.classical_weight_elimination(M, W_I)
        if abs(res.components["direct_evaluation"] - res.value) > tol * max(1.0, abs(res.value)):
            failures.append("optimal weights do not reproduce the Schur value")
        W_full = res.optimal_weights["W_full"]
        if np.linalg.eigvalsh((W_full + W_full.T) / 2.0)[0] < -1e-9:
            failures.append("assembled optimal weight matrix not PSD")
    return failures


@register("bounds.nuisance_rescaling_invariance")
def _check_rescaling(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for _ in range(_count(100, scale)):
        G_inv = _random_spd(rng, 2)
        v_nn = G_inv[1, 1] + rng.uniform(0.05, 5.0)
        v_in = rng.normal()
        a = rng.uniform(0.2, 5.0)
        base = _bounds.nui_bound_11(G_inv, v_in, v_nn).value
        scaled_G = np.array([[G_inv[0, 0], G_inv[0, 1] / a],
                             [G_inv[0, 1] / a, G_inv[1, 1] / a ** 2]])
        scaled = _bounds.nui_bound_11(scaled_G, v_in / a, v_nn / a ** 2).value
        if abs(base - scaled) > tol * max(1.0, abs(base)):
            failures.append("1+1 bound not invariant under nuisance rescaling")
    return failures


# --- povm ---------------------------------------------------------------------

@register("povm.oracle_candidates_valid")
def _check_oracle_candidates(rng, scale, tol_override):
    failures = []
    for _ in range(_count(20, scale)):
        q = _povm._random_4_outcome(rng)
        diag = _povm.validate_povm(q)
        if not diag.ok:
            failures.append("; ".join(diag.messages))
    grid = _povm._grid_angles(16)
    for ang in grid[:: max(1, len(grid) // 40)]:
        diag = _povm.validate_povm(_povm.pvm_from_direction(_povm._direction(*ang)))
        if not diag.ok:
            failures.append("; ".join(diag.messages))
    return failures


@register("povm.oracle_monotone")
def _check_oracle_monotone(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 0.0
    failures = []
    model = _models.make_builtin("A")
    cfg = _povm.OracleConfig(seed=7, grid_density=16, refinement_rounds=3,
                             candidates=("pvm-grid",))
    for _ in range(_count(3, scale)):
        theta = MODEL_SAMPLERS["A"](rng)
        res = _povm.oracle_minimize(model, theta, [[1.0]], cfg)
        diffs = np.diff(res.trace)
        if np.any(diffs > tol):
            failures.append("incumbent value increased across refinement rounds")
    return failures


@register("povm.oracle_vs_limit")
def _check_oracle_vs_limit(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    cfg = _povm.OracleConfig(seed=11, grid_density=16, refinement_rounds=1,
                             candidates=("pvm-grid", "random-4-outcome"))
    for name in ("A", "C", "E"):
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(3, scale)):
            theta = sampler(rng)
            bundle = _fisher.sld_fisher(model, theta)
            res = _povm.oracle_minimize(model, theta, [[1.0]], cfg)
            limit = _bounds.weight_limit_bound("nagaoka-1+1", [[1.0]], bundle.G_inv)
            if res.value < limit.value - tol:
                failures.append(f"model {name}: oracle beat the most-informative bound")
    return failures


@register("povm.model_b_sigma1")
def _check_model_b(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    model = _models.make_builtin("B")
    cfg = _povm.OracleConfig(seed=3, grid_density=16, refinement_rounds=0,
                             candidates=("pvm-grid",))
    for _ in range(_count(10, scale)):
        theta = MODEL_SAMPLERS["B"](rng)
        res = _povm.oracle_minimize(model, theta, [[1.0]], cfg)
        direction = np.asarray(res.descriptor["direction"])
        if abs(abs(direction[0]) - 1.0) > 1e-9:
            failures.append(f"optimum away from the sigma1 node: {direction.tolist()}")
        if abs(res.value - (1.0 - theta[0] ** 2)) > max(tol, 1e-9):
            failures.append("optimal value differs from 1 - t1^2")
    return failures


@register("povm.randomize_additivity")
def _check_randomize(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-8
    failures = []
    for name in ("A", "B"):
        model, sampler = builtin_with_sampler(name)
        for _ in range(_count(10, scale)):
            theta = sampler(rng)
            p1 = _povm.pvm_from_direction(_random_direction(rng))
            p2 = _povm.pvm_from_direction(_random_direction(rng))
            eps = rng.uniform(0.05, 0.95)
            mixed = _povm.randomize_povms(p1, p2, eps)
            Jm = _fisher.classical_fisher(model, theta, mixed).matrix
            Ja = _fisher.classical_fisher(model, theta, p1).matrix
            Jb = _fisher.classical_fisher(model, theta, p2).matrix
            if np.max(np.abs(Jm - ((1 - eps) * Ja + eps * Jb))) > tol:
                failures.append(f"model {name}: Fisher additivity violated")
    return failures


# --- metrology ----------------------------------------------------------------

@register("metrology.partial_le_full")
def _check_partial_le_full(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for preset in sorted(_metrology.FIG1_PRESETS):
        times = _metrology.default_time_grid(_metrology.FIG1_PRESETS[preset][2],
                                             _count(60, scale))
        for variant in _metrology.VARIANTS:
            series = _metrology.fisher_time_series(_metrology.preset_spec(preset, variant), times)
            for g, gp, st in zip(series.g11, series.g11_partial, series.status):
                if st == _metrology.STATUS_OK and gp > g + tol * max(1.0, g):
                    failures.append(f"{preset} variant {variant}: partial exceeds full")
    return failures


@register("metrology.variant3_equality")
def _check_variant3(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-9
    failures = []
    for preset in sorted(_metrology.FIG1_PRESETS):
        times = _metrology.default_time_grid(_metrology.FIG1_PRESETS[preset][2],
                                             _count(60, scale))
        series = _metrology.fisher_time_series(_metrology.preset_spec(preset, 3), times)
        for g, gp, st in zip(series.g11, series.g11_partial, series.status):
            if st == _metrology.STATUS_OK and abs(g - gp) > tol * max(1.0, abs(g)):
                failures.append(f"{preset}: variant-3 equality broken")
    return failures


@register("metrology.variant1_to_2")
def _check_variant_convergence(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-3
    failures = []
    om, b2, G = _metrology.FIG1_PRESETS["fig1a"]
    times = _metrology.default_time_grid(G, _count(100, scale))
    series = {v: _metrology.fisher_time_series(_metrology.preset_spec("fig1a", v), times)
              for v in (1, 2)}
    t_late = 30.0 / G
    idx = int(np.argmin(np.abs(times - t_late)))
    for field in ("g11_over_t2", "g11_partial_over_t2"):
        a = getattr(series[1], field)
        b = getattr(series[2], field)
        scale_ref = max(np.nanmax(np.abs(a)), np.nanmax(np.abs(b)))
        if abs(a[idx] - b[idx]) > tol * scale_ref:
            failures.append(f"fig1a {field}: variants 1 and 2 apart at Gamma*t = 30")
    return failures


@register("metrology.bloch_norm_monotone")
def _check_bloch_norm(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-12
    failures = []
    for preset in sorted(_metrology.FIG1_PRESETS):
        G = _metrology.FIG1_PRESETS[preset][2]
        times = _metrology.default_time_grid(G, _count(60, scale))
        for variant in _metrology.VARIANTS:
            spec = _metrology.preset_spec(preset, variant)
            r0 = np.linalg.norm(spec.s0)
            for t in times:
                if np.linalg.norm(_metrology.evolve_bloch(spec, t)) > r0 + tol:
                    failures.append(f"{preset} variant {variant}: Bloch norm grew")
                    break
    return failures


@register("metrology.derivative_consistency")
def _check_metrology_derivs(rng, scale, tol_override):
    tol = tol_override if tol_override is not None else 1e-6
    failures = []
    for preset in sorted(_metrology.FIG1_PRESETS):
        om, b2, G = _metrology.FIG1_PRESETS[preset]
        for variant in (1, 2, 3):
            spec = _metrology.preset_spec(preset, variant)
            # keep h * omega * t small so the central difference resolves the phase
            for t in (0.3 / G, 1.0 / G):
                _, ds = _metrology.bloch_derivatives(spec, t)
                params = [om, b2, G]
                for i in range(ds.shape[1]):
                    if variant == 3 and i == 1:
                        # variant-3 parameters are (omega, gamma); vary gamma via b^2
                        h = 1e-5 * max(1.0, b2 / G)
                        sp = _metrology.NoiseModelSpec(variant, om, (b2 / G + h) * G, G, spec.s0)
                        sm = _metrology.NoiseModelSpec(variant, om, (b2 / G - h) * G, G, spec.s0)
                    else:
                        h = 1e-5 * max(1.0, abs(params[i]))
                        pp, pm = list(params), list(params)
                        pp[i] += h
                        pm[i] -= h
                        sp = _metrology.NoiseModelSpec(variant, *pp, spec.s0)
                        sm = _metrology.NoiseModelSpec(variant, *pm, spec.s0)
                    fd = (_metrology.evolve_bloch(sp, t) - _metrology.evolve_bloch(sm, t)) / (2.0 * h)
                    ref = max(float(np.max(np.abs(ds[:, i]))), 1e-12)
                    if np.max(np.abs(fd - ds[:, i])) / ref > tol:
                        failures.append(f"{preset} variant {variant}: closed-form derivative "
                                        f"{i} disagrees with finite differences")
    return failures
