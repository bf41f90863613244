"""Command-line front end writing plot-ready CSV and JSON artifacts.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import classify_phase, critical_coupling, mean_photon_estimate, regime, Regime
from .model import ModelParams, TruncationError, TruncationSpec
from .scaling import (
    ScalingError,
    collapse_coordinates,
    fit_scaling,
    synthetic_dataset,
    universal_f,
)
from .solver import SolverConfig, solve_ground_state
from .sweep import order_parameter_mode, run_sweep, to_dataset

log = logging.getLogger("tmrabi")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 2, 3
# gamma = alpha / beta^2 built from decimal inputs rarely equals 1 exactly in binary
GAMMA_TOL = 1e-12


class ConfigError(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


# --- argument helpers ---------------------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included) or a single number or a comma list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ConfigError(f"invalid range {text!r}: need step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return np.round(start + step * np.arange(count), 12)
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse range {text!r}") from None


def parse_geometric(text: str) -> np.ndarray:
    """``start:stop:count`` geometric grid."""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ConfigError(f"cannot parse geometric grid {text!r}") from None
    if not (0 < start < stop) or count < 2:
        raise ConfigError(f"invalid geometric grid {text!r}")
    return np.array([float(f"{v:.12g}") for v in np.geomspace(start, stop, count)])


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the clock for byte-identical reruns
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
           else _dt.datetime.now(_dt.timezone.utc))
    return now.isoformat(timespec="seconds")


def make_manifest(args: argparse.Namespace, resolved: dict) -> dict:
    inputs = {}
    if getattr(args, "config", None):
        inputs[str(args.config)] = _sha256(args.config)
    return {
        "command": args.command,
        "argv": list(getattr(args, "argv", [])),
        "config_file": dict(getattr(args, "config_values", {})),
        "config": resolved,
        "version": __version__,
        "timestamp": _timestamp(),
        "inputs": inputs,
        "seed": args.seed,
    }


def _resolved(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "argv", "config_values"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        tol_energy=args.tol_energy,
        max_krylov=args.max_krylov,
        max_restarts=args.max_restarts,
        trunc_growth=args.trunc_growth,
        trunc_tol=args.trunc_tol,
        tail_tol=args.tail_tol,
        seed=args.seed,
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- commands -----------------------------------------------------------------------


def cmd_phase_diagram(args) -> int:
    gammas, Rs = parse_range(args.gamma), parse_range(args.R_range)
    if gammas.size == 0 or Rs.size == 0 or np.any(gammas <= 0) or np.any(Rs < 0):
        raise ConfigError("gamma values must be positive and R values non-negative")
    rows = []
    for g in gammas:
        for R in Rs:
            ph = classify_phase(ModelParams(alpha=float(g) * args.beta**2, beta=args.beta, R=float(R)),
                                boundary_tol=args.boundary_tol)
            rows.append((float(g), float(R), ph.label.value, ph.y1, ph.y2, ph.energy))
    out = _out_dir(args)
    write_csv(out / "phase_diagram.csv", ["gamma", "R", "label", "y1", "y2", "E0"], rows)
    write_json(out / "manifest.json", make_manifest(args, _resolved(args)))
    return EXIT_OK


def mean_photon_rows(gammas, Rs, beta, mode="both"):
    rows = []
    for g in gammas:
        alpha = float(g) * beta**2
        boundary = regime(alpha, beta, GAMMA_TOL) is Regime.ALPHA_EQUALS_BETA_SQ
        for R in Rs:
            if boundary:
                n1 = n2 = (0.0 if R <= 1.0 else None)
            else:
                n1, n2 = mean_photon_estimate(ModelParams(alpha=alpha, beta=beta, R=float(R)))
            row = [float(g), float(R)]
            if mode in ("both", "1"):
                row.append(n1)
            if mode in ("both", "2"):
                row.append(n2)
            row.append(int(boundary))
            rows.append(row)
    return rows


def cmd_mean_photon(args) -> int:
    if args.delta != 0:
        raise ConfigError("mean-photon is only defined for delta = 0")
    if args.gamma is not None:
        gammas = parse_range(args.gamma)
    else:
        gammas = np.array([args.alpha / args.beta**2])
    Rs = parse_range(args.R_range)
    header = ["gamma", "R"]
    if args.mode in ("both", "1"):
        header.append("n1_over_eta")
    if args.mode in ("both", "2"):
        header.append("n2_over_eta")
    header.append("boundary")
    out = _out_dir(args)
    write_csv(out / "mean_photon.csv", header, mean_photon_rows(gammas, Rs, args.beta, args.mode))
    write_json(out / "manifest.json", make_manifest(args, _resolved(args)))
    return EXIT_OK


def cmd_scaling(args) -> int:
    if args.delta != 0:
        raise ConfigError("scaling analysis requires delta = 0")
    etas = parse_geometric(args.eta_geometric) if args.eta_geometric else parse_range(args.eta_list)
    Rs = parse_range(args.R_range)
    if len(set(etas.tolist())) < 4:
        raise ConfigError("scaling needs at least four distinct eta values")
    if np.any(etas <= 0) or Rs.size < 3:
        raise ConfigError("eta values must be positive and at least three R values are required")
    base = ModelParams(alpha=args.alpha, beta=args.beta, delta=0.0, R=float(Rs[0]), eta=1.0)
    mode = order_parameter_mode(args.alpha, args.beta)
    out = _out_dir(args)
    crit = critical_coupling(args.alpha, args.beta)

    if args.synthetic:
        data = synthetic_dataset(crit.Rc, 2.0 / 3.0, 1.5, etas, Rs, regime=mode)
        raw_header = ["eta", "R", "n_over_eta"]
        raw_rows = [(e, R, n) for e, R, n in data.points]
        write_csv(out / "scaling_raw.csv", raw_header, raw_rows)
    else:
        points = run_sweep(base, etas, Rs, _solver_config(args), workers=args.workers)
        bad = [p for p in points if p.error or not p.converged]
        raw_header = ["eta", "R", "n1_over_eta", "n2_over_eta", "energy", "parity",
                      "n1_max", "n2_max", "iterations", "converged"]
        raw_rows = [(p.eta, p.R, p.n1 / p.eta, p.n2 / p.eta, p.energy, p.parity,
                     p.n1_max, p.n2_max, p.iterations, int(p.converged)) for p in points]
        write_csv(out / "scaling_raw.csv", raw_header, raw_rows)
        if bad:
            for p in bad:
                print(f"eta={p.eta:g} R={p.R:g}: {p.error or 'Lanczos did not converge'}", file=sys.stderr)
            raise NonConvergence(f"{len(bad)} of {len(points)} points failed")
        data = to_dataset(points, base, mode)

    eta_min = args.eta_min if args.eta_min is not None else "auto"
    try:
        nu_range = tuple(float(v) for v in args.nu_range.split(":"))
    except ValueError:
        raise ConfigError(f"cannot parse nu range {args.nu_range!r}") from None
    if len(nu_range) != 2:
        raise ConfigError("nu range must be lo:hi")
    try:
        fit = fit_scaling(data, eta_min=eta_min, nu_range=nu_range)
    except ScalingError as exc:
        raise NonConvergence(str(exc)) from None

    used = data.restrict(fit.eta_min)
    eta, x, y = collapse_coordinates(used, fit.Rc_est, fit.slope, fit.nu)
    R = np.array([p[1] for p in used.points])
    write_csv(out / "scaling_collapsed.csv", ["eta", "R", "x", "y"], zip(eta, R, x, y))

    manifest = make_manifest(args, _resolved(args))
    report = {
        "alpha": args.alpha,
        "beta": args.beta,
        "mode": mode,
        "Rc_analytic": crit.Rc,
        "fit": asdict(fit),
        "etas": etas,
        "R_grid": Rs,
        "synthetic": bool(args.synthetic),
        "manifest": manifest,
    }
    write_json(out / "fit_report.json", report)
    write_json(out / "manifest.json", manifest)
    return EXIT_OK


def cmd_universal_f(args) -> int:
    rprimes = parse_range(args.rprime)
    if rprimes.size == 0:
        raise ConfigError("empty r' range")
    params = ModelParams(alpha=args.alpha, beta=args.beta)
    try:
        rows = universal_f(args.branch, params, rprimes, trunc_1d=args.trunc_1d)
    except ScalingError as exc:
        raise NonConvergence(str(exc)) from None
    out = _out_dir(args)
    write_csv(out / "universal_f.csv", ["rprime", "f"], rows)
    write_json(out / "manifest.json", make_manifest(args, _resolved(args)))
    return EXIT_OK


def cmd_solve(args) -> int:
    params = ModelParams(alpha=args.alpha, beta=args.beta, delta=args.delta, R=args.R, eta=args.eta)
    config = _solver_config(args)
    if args.n1_max is not None and args.n2_max is not None:
        config = SolverConfig(**{**asdict(config), "initial_trunc": TruncationSpec(args.n1_max, args.n2_max)})
    try:
        res = solve_ground_state(params, config)
    except TruncationError as exc:
        raise NonConvergence(str(exc)) from None
    out = _out_dir(args)
    trunc = res.trunc_used
    atom, n1, n2 = trunc.quantum_numbers()
    keep = np.flatnonzero(np.abs(res.vector) > args.amplitude_cutoff)
    write_csv(out / "state.csv", ["atom", "n1", "n2", "amplitude"],
              ((int(atom[i]) + 1, int(n1[i]), int(n2[i]), float(res.vector[i])) for i in keep))
    summary = {
        "params": asdict(params),
        "energy": res.energy,
        "n1": res.n1,
        "n2": res.n2,
        "n1_over_eta": res.n1 / params.eta,
        "n2_over_eta": res.n2 / params.eta,
        "parity": res.parity,
        "trunc_used": asdict(trunc),
        "iterations": res.iterations,
        "converged": res.converged,
        "residual": res.residual,
        "manifest": make_manifest(args, _resolved(args)),
    }
    write_json(out / "solve.json", summary)
    if not res.converged:
        raise NonConvergence("Lanczos did not reach the requested tolerance")
    return EXIT_OK


# --- parser -------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--beta", type=float, default=1.2)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out", default="out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="flat key = value file; command-line flags take precedence")
    p.add_argument("-v", "--verbose", action="store_true")


def _solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverConfig()
    p.add_argument("--tol-energy", type=float, default=d.tol_energy)
    p.add_argument("--max-krylov", type=int, default=d.max_krylov)
    p.add_argument("--max-restarts", type=int, default=d.max_restarts)
    p.add_argument("--trunc-growth", type=float, default=d.trunc_growth)
    p.add_argument("--trunc-tol", type=float, default=d.trunc_tol)
    p.add_argument("--tail-tol", type=float, default=d.tail_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmrabi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-diagram", help="analytic phase diagram on a (gamma, R) grid")
    _common(p)
    p.add_argument("--gamma", default="0.5:2.0:0.05")
    p.add_argument("--R", dest="R_range", default="0:2:0.05")
    p.add_argument("--boundary-tol", type=float, default=GAMMA_TOL)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("mean-photon", help="analytic mean photon numbers per eta")
    _common(p)
    p.add_argument("--gamma", default=None, help="gamma range; overrides --alpha (alpha = gamma beta^2)")
    p.add_argument("--R", dest="R_range", default="0:2:0.05")
    p.add_argument("--mode", choices=["both", "1", "2"], default="both")
    p.set_defaults(func=cmd_mean_photon)

    p = sub.add_parser("scaling", help="ED sweep, critical point and exponent fits")
    _common(p)
    _solver_flags(p)
    p.add_argument("--eta", dest="eta_list", default="4000,8000,16000,32000,64000,128000")
    p.add_argument("--eta-geometric", default=None, help="start:stop:count geometric eta grid")
    p.add_argument("--R", dest="R_range", default="0.742:0.749:0.0005")
    p.add_argument("--eta-min", type=float, default=None, help="fit window start (default: automatic)")
    p.add_argument("--nu-range", default="0.8:3.0")
    p.add_argument("--synthetic", action="store_true", help="use exact-scaling synthetic data instead of ED")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("universal-f", help="scaling function of the quartic critical model")
    _common(p)
    p.add_argument("--branch", choices=["mode1", "mode2"], default="mode1")
    p.add_argument("--rprime", default="-5:10:0.5")
    p.add_argument("--trunc-1d", type=int, default=64)
    p.set_defaults(func=cmd_universal_f)

    p = sub.add_parser("solve", help="single-point exact diagonalization dump")
    _common(p)
    _solver_flags(p)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=100.0)
    p.add_argument("--n1-max", type=int, default=None)
    p.add_argument("--n2-max", type=int, default=None)
    p.add_argument("--amplitude-cutoff", type=float, default=1e-12)
    p.set_defaults(func=cmd_solve)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    args.argv, args.config_values = list(argv), {}
    if not args.config:
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        dest = {"R": "R_range" if "R_range" in actions else "R", "eta": "eta_list" if "eta_list" in actions else "eta"}.get(key, key)
        if dest not in actions or dest in ("help", "func", "config", "command"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        action = actions[dest]
        try:
            if action.const is True and action.nargs == 0:
                defaults[dest] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[dest] = action.type(raw) if action.type else raw
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for config key {key!r}") from None
    sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    args.argv, args.config_values = list(argv), values
    return args


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if args.workers < 1:
            raise ConfigError("workers must be at least 1")
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
