"""Command-line front end.

Subcommands:
  bounds         G, G^-1, blocks and every applicable bound at one point (JSON)
  scan           Fisher-information time series for the noise models (CSV)
  oracle         brute-force measurement optimization (JSON)
  orthogonalize  evaluate a built-in model in orthogonalized coordinates (JSON)
  validate       run the property suites (exit 0 iff all hold)

Exit codes: 0 success, 1 property failure, 2 invalid input, 3 infeasible
computation. CSV output is UTF-8 with \\n line endings and 17 significant
digits so files diff meaningfully across runs.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as _bounds
from . import fisher as _fisher
from . import metrology as _metrology
from . import models as _models
from . import povm as _povm
from . import validate as _validate
from .errors import InfeasibleError, InvalidInputError, QNuisanceError

_FLOAT_FMT = "%.17g"


def _fmt(x):
    return _FLOAT_FMT % float(x)


def _parse_floats(text):
    return [float(part) for part in text.split(",") if part.strip()]


def _matrix_json(m):
    return [[float(v) for v in row] for row in np.atleast_2d(np.asarray(m, dtype=float))]


def _emit(payload, path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _build_model(args):
    fixed = None
    if getattr(args, "fixed", None):
        values = _parse_floats(args.fixed)
        fixed = values[0] if len(values) == 1 else values
    return _models.make_builtin(args.model, fixed), fixed


def _parse_weight(text, m):
    if not text:
        return np.eye(m)
    values = _parse_floats(text)
    if len(values) == m:
        return np.diag(values)
    if len(values) == m * m:
        return np.array(values).reshape(m, m)
    raise InvalidInputError(
        f"--weight needs {m} (diagonal) or {m * m} (row-major) entries, got {len(values)}")


# --- bounds -------------------------------------------------------------------

def run_bounds(args) -> int:
    model, fixed = _build_model(args)
    theta = np.array(_parse_floats(args.theta))
    bundle = _fisher.sld_fisher(model, theta)
    m, n = model.m, model.n
    W_I = _parse_weight(args.weight, m)
    blocks = _fisher.block_split(bundle.G_inv, m)

    out = {
        "model": model.name,
        "fixed": fixed,
        "theta": [float(v) for v in theta],
        "m": m,
        "n": n,
        "weight_interest": _matrix_json(W_I),
        "G": _matrix_json(bundle.G),
        "G_inv": _matrix_json(bundle.G_inv),
        "blocks": {
            "II": _matrix_json(blocks.II),
            "IN": _matrix_json(blocks.IN),
            "NN": _matrix_json(blocks.NN),
        },
        "bounds": {},
        "information_loss": {},
    }
    bounds_out = out["bounds"]
    loss_out = out["information_loss"]

    bounds_out["sld_cr_full"] = _bounds.sld_cr_bound(np.eye(n), bundle.G_inv)
    bounds_out["sld_cr_interest"] = _bounds.sld_cr_bound(W_I, blocks.II)
    if n == 2:
        bounds_out["nagaoka_full"] = _bounds.nagaoka_bound(np.eye(2), bundle.G_inv)
    if n == 3:
        bounds_out["hgm_full"] = _bounds.hgm_bound(np.eye(3), bundle.G_inv)

    kind = {(2, 1): "nagaoka-1+1", (3, 1): "hgm-1+2", (3, 2): "hgm-2+1"}.get((n, m))
    if kind:
        limit = _bounds.weight_limit_bound(kind, W_I, bundle.G_inv)
        bounds_out["weight_limit"] = limit.value
        bounds_out["weight_limit_closed_form"] = limit.components["closed_form"]

    v_nn = _parse_floats(args.vnn) if args.vnn else None
    v_in = _parse_floats(args.vin) if args.vin else None
    if v_nn is not None:
        g11 = float(bundle.G_inv[0, 0])
        known_floor = 1.0 / float(bundle.G[0, 0])
        if kind == "nagaoka-1+1":
            res = _bounds.nui_bound_11(bundle.G_inv, (v_in or [0.0])[0], v_nn[0])
            bounds_out["nui_bound_11"] = res.value
            bounds_out["nui_bound_11_components"] = res.components
            loss_out["nui_11"] = res.value - known_floor
        elif kind == "hgm-1+2":
            ortho = _bounds.split_orthogonal_blocks(bundle.G_inv, m)
            res = _bounds.nui_bound_12(g11, ortho.NN, np.diag(v_nn))
            bounds_out["nui_bound_12"] = res.value
            bounds_out["nui_bound_12_components"] = res.components
            loss_out["nui_12"] = res.value - known_floor
        elif kind == "hgm-2+1":
            ortho = _bounds.split_orthogonal_blocks(bundle.G_inv, m)
            res = _bounds.nui_bound_21(W_I, ortho.II, float(ortho.NN[0, 0]), v_nn[0])
            bounds_out["nui_bound_21"] = res.value
            bounds_out["nui_bound_21_components"] = res.components
            loss_out["nui_21"] = res.components["information_loss"]

    _emit(out, args.out)
    return 0


# --- scan ---------------------------------------------------------------------

def _scan_times(args, gamma_corr):
    tmin = args.tmin if args.tmin is not None else 0.01 / gamma_corr
    tmax = args.tmax if args.tmax is not None else 30.0 / gamma_corr
    if args.tcount == 1:
        if tmin <= 0:
            raise InvalidInputError("need tmin > 0")
        return np.array([tmin])
    if tmin <= 0 or tmax <= tmin:
        raise InvalidInputError("need 0 < tmin < tmax")
    if args.tspacing == "log":
        return np.geomspace(tmin, tmax, args.tcount)
    return np.linspace(tmin, tmax, args.tcount)


def run_scan(args) -> int:
    if args.preset:
        omega, b2, gamma_corr = _metrology.FIG1_PRESETS[args.preset]
        s0 = _metrology.FIG1_S0
    else:
        if args.omega is None or args.b2 is None or args.gamma is None:
            raise InvalidInputError("scan needs --preset or all of --omega --b2 --gamma")
        omega, b2, gamma_corr = args.omega, args.b2, args.gamma
        s0 = tuple(_parse_floats(args.s0)) if args.s0 else _metrology.FIG1_S0
    variants = _metrology.VARIANTS if args.variant == "all" else (int(args.variant),)
    times = _scan_times(args, gamma_corr)

    lines = ["t,variant,g11_over_t2,g11_partial_over_t2,status"]
    for variant in variants:
        spec = _metrology.NoiseModelSpec(variant=variant, omega=omega, b2=b2,
                                         gamma_corr=gamma_corr, s0=s0)
        series = _metrology.fisher_time_series(spec, times)
        for t, g, gp, st in zip(series.times, series.g11_over_t2,
                                series.g11_partial_over_t2, series.status):
            lines.append(f"{_fmt(t)},{variant},{_fmt(g)},{_fmt(gp)},{st}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# --- oracle -------------------------------------------------------------------

def run_oracle(args) -> int:
    model, fixed = _build_model(args)
    theta = np.array(_parse_floats(args.theta))
    W_I = _parse_weight(args.weight, model.m)
    cfg = _povm.OracleConfig(seed=args.seed, grid_density=args.grid_density,
                             refinement_rounds=args.refinements,
                             candidates=tuple(args.families.split(",")))
    result = _povm.oracle_minimize(model, theta, W_I, cfg)
    out = {
        "model": model.name,
        "fixed": fixed,
        "theta": [float(v) for v in theta],
        "weight_interest": _matrix_json(W_I),
        "seed": args.seed,
        "grid_density": args.grid_density,
        "refinement_rounds": args.refinements,
        "families": sorted(cfg.candidates),
        "value": result.value,
        "best_povm": result.descriptor,
        "incumbent_trace": list(result.trace),
        "candidates_evaluated": result.evaluated,
        "candidates_skipped": result.skipped,
    }
    _emit(out, args.out)
    return 0


# --- orthogonalize --------------------------------------------------------------

def run_orthogonalize(args) -> int:
    fixed = None
    if args.fixed:
        values = _parse_floats(args.fixed)
        fixed = values[0] if len(values) == 1 else values
    base = _models.make_builtin(args.model, fixed)
    repar = _models.builtin_orthogonalization(args.model, fixed)
    model = _models.orthogonalize(base, repar)
    xi = np.array(_parse_floats(args.theta))
    bundle = _fisher.sld_fisher(model, xi)
    blocks = _fisher.block_split(bundle.G_inv, model.m)
    out = {
        "model": base.name,
        "fixed": fixed,
        "xi": [float(v) for v in xi],
        "theta": [float(v) for v in repar.forward(xi)],
        "G_xi": _matrix_json(bundle.G),
        "G_xi_inv": _matrix_json(bundle.G_inv),
        "off_block_max": float(np.max(np.abs(blocks.IN))) if blocks.IN.size else 0.0,
        "blocks": {"II": _matrix_json(blocks.II), "NN": _matrix_json(blocks.NN)},
    }
    _emit(out, args.out)
    return 0


# --- validate -------------------------------------------------------------------

def run_validate(args) -> int:
    overrides = {}
    for item in args.override_tol or []:
        name, _, value = item.partition("=")
        if not value:
            raise InvalidInputError(f"--override-tol expects name=value, got {item!r}")
        if name not in _validate.CHECKS:
            raise InvalidInputError(f"unknown invariant {name!r}")
        overrides[name] = float(value)
    results = _validate.run_all(seed=args.seed, scale=args.samples, overrides=overrides)
    report = {
        "seed": args.seed,
        "samples_scale": args.samples,
        "checks": [
            {"name": r.name, "ok": r.ok, "failures": list(r.failures),
             "elapsed_s": round(r.elapsed, 4)}
            for r in results
        ],
        "ok": all(r.ok for r in results),
    }
    _emit(report, args.out)
    for r in results:
        status = "pass" if r.ok else "FAIL"
        sys.stderr.write(f"{status}  {r.name}\n")
    return 0 if report["ok"] else 1


# --- parser ---------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="qnuisance",
        description="Quantum estimation-error bounds with nuisance parameters")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_model_args(p):
        p.add_argument("--model", required=True, choices=_models.BUILTIN_NAMES)
        p.add_argument("--fixed", help="fixed model data (s3 for C, comma Bloch vector for F)")
        p.add_argument("--theta", required=True, help="comma-separated parameter vector")
        p.add_argument("--weight", help="interest weight: m diagonal or m*m row-major entries")

    p_bounds = sub.add_parser("bounds", help="bounds and Fisher data at one point")
    add_model_args(p_bounds)
    p_bounds.add_argument("--vin", help="assumed interest-nuisance MSE entries")
    p_bounds.add_argument("--vnn", help="assumed nuisance MSE diagonal entries")
    p_bounds.add_argument("--out")
    p_bounds.add_argument("--format", choices=("json",), default="json")
    p_bounds.set_defaults(func=run_bounds)

    p_scan = sub.add_parser("scan", help="noise-model Fisher time series (CSV)")
    p_scan.add_argument("--preset", choices=sorted(_metrology.FIG1_PRESETS))
    p_scan.add_argument("--omega", type=float)
    p_scan.add_argument("--b2", type=float)
    p_scan.add_argument("--gamma", type=float, help="noise correlation rate")
    p_scan.add_argument("--s0", help="initial Bloch vector, comma separated")
    p_scan.add_argument("--variant", choices=("1", "2", "3", "all"), default="all")
    p_scan.add_argument("--tmin", type=float)
    p_scan.add_argument("--tmax", type=float)
    p_scan.add_argument("--tcount", type=int, default=200)
    p_scan.add_argument("--tspacing", choices=("linear", "log"), default="log")
    p_scan.add_argument("--out")
    p_scan.add_argument("--format", choices=("csv",), default="csv")
    p_scan.set_defaults(func=run_scan)

    p_oracle = sub.add_parser("oracle", help="brute-force measurement optimization")
    add_model_args(p_oracle)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--grid-density", type=int, default=32)
    p_oracle.add_argument("--refinements", type=int, default=3)
    p_oracle.add_argument("--families", default="pvm-grid,random-4-outcome")
    p_oracle.add_argument("--out")
    p_oracle.add_argument("--format", choices=("json",), default="json")
    p_oracle.set_defaults(func=run_oracle)

    p_orth = sub.add_parser("orthogonalize", help="built-in model in orthogonal coordinates")
    p_orth.add_argument("--model", required=True, choices=("A", "B", "C", "D"))
    p_orth.add_argument("--fixed")
    p_orth.add_argument("--theta", required=True,
                        help="xi coordinates (interest entries equal theta)")
    p_orth.add_argument("--out")
    p_orth.set_defaults(func=run_orthogonalize)

    p_val = sub.add_parser("validate", help="run the property suites")
    p_val.add_argument("--seed", type=int, default=2024)
    p_val.add_argument("--samples", type=float, default=1.0,
                       help="sample-count scale factor for every suite")
    p_val.add_argument("--override-tol", action="append",
                       help="name=value tolerance override (harness self-test hook)")
    p_val.add_argument("--out")
    p_val.set_defaults(func=run_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return 3
    except (InvalidInputError, QNuisanceError, ValueError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
