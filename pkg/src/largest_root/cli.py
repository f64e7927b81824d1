"""Command line front end.

Subcommands (``largest-root <cmd> --help`` for flags)::

    cdf            F(t) at one point or on a grid
    roc            ROC of the largest-root detector by threshold inversion
    roc-balanced   closed-form ROC for n == m
    optimal-p      bracket, approximation and exact integer argmax of P_D in p
    simulate       Monte Carlo draws, empirical CDF or empirical ROC, with KS
    validate       cross-check suite (quick | full)

Output is CSV on stdout (header, rows, then ``# key=value`` summary lines)
or a single JSON object with ``--json``. Numbers carry 12 significant
digits in both formats. Exit status: 0 ok, 1 validation failure, 2 usage or
domain error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .detector import (
    DetectorParams,
    cdf_quantile,
    db_to_linear,
    dimension_for,
    optimal_p_approx,
    optimal_p_bounds,
    optimal_p_exact,
    roc_balanced,
    roc_curve,
    round_half_up,
    threshold_for_pf,
)
from .distribution import EnsembleParams, cdf_max_eig
from .exceptions import DomainError, NumericalError
from .montecarlo import SimConfig, empirical_cdf, ks_statistic, simulate_max_eig

SCHEMA_VERSION = "1"
DEFAULT_SEED = 20240611
SEED_ENV = "LRL_SEED"
DEFAULT_PF_POINTS = 99
DEFAULT_T_POINTS = 50
# central 99.9% of the analytic mass
T_GRID_QUANTILES = (0.0005, 0.9995)

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE = 0, 1, 2


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % float(x)


def _json_number(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, (bool, np.bool_)):
        return int(x)
    v = float(fmt(x))
    if math.isfinite(v):
        return v
    return fmt(x)  # JSON has no inf/nan literals


@dataclass
class OutputRecord:
    command: str
    params: dict
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        for k, v in self.summary.items():
            buf.write(f"# {k}={fmt(v)}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        obj = {
            "schema_version": self.schema_version,
            "command": self.command,
            "params": {k: (_json_number(v) if isinstance(v, (int, float, np.number)) else v)
                       for k, v in self.params.items()},
            "columns": list(self.columns),
            "rows": [[_json_number(v) for v in row] for row in self.rows],
            "summary": {k: _json_number(v) for k, v in self.summary.items()},
        }
        return json.dumps(obj) + "\n"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _ensemble(args) -> EnsembleParams:
    return EnsembleParams(args.m, args.n, args.p)


def _spike_from_args(args, default=None) -> float:
    if args.eta is not None and args.snr_db is not None:
        raise UsageError("give either --eta or --snr-db, not both")
    if args.eta is not None:
        return float(args.eta)
    if args.snr_db is not None:
        return float(db_to_linear(args.snr_db))
    if default is None:
        raise UsageError("one of --eta or --snr-db is required")
    return default


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _pf_grid(points: int) -> np.ndarray:
    if points < 2:
        raise UsageError("--points must be at least 2")
    return np.arange(1, points + 1) / (points + 1)


def _t_grid(args, params, eta) -> np.ndarray:
    points = DEFAULT_T_POINTS if args.points is None else args.points
    if points < 2:
        raise UsageError("--points must be at least 2")
    lo, hi = args.t_min, args.t_max
    if lo is None or hi is None:
        q_lo, q_hi = cdf_quantile(params, eta, np.array(T_GRID_QUANTILES), precision=args.precision)
        lo = q_lo if lo is None else lo
        hi = q_hi if hi is None else hi
    if not 0 < lo < hi:
        raise UsageError("need 0 < --t-min < --t-max")
    return np.logspace(math.log10(lo), math.log10(hi), points)


# ---------------------------------------------------------------- commands

def cmd_cdf(args):
    params = _ensemble(args)
    eta = float(args.eta)
    rec_params = {"m": params.m, "n": params.n, "p": params.p, "eta": eta}
    if args.t is not None:
        value = cdf_max_eig(params, eta, args.t, precision=args.precision)
        rec = OutputRecord("cdf", {**rec_params, "t": args.t}, ["t", "F"], [(args.t, value)])
        return rec, fmt(value) + "\n"
    t = _t_grid(args, params, eta)
    F = cdf_max_eig(params, eta, t, precision=args.precision)
    return OutputRecord("cdf", rec_params, ["t", "F"], list(zip(t, F))), None


def cmd_roc(args):
    params = _ensemble(args)
    gamma = float(db_to_linear(args.snr_db))
    curve = roc_curve(DetectorParams(params, gamma), _pf_grid(args.points or DEFAULT_PF_POINTS),
                      precision=args.precision)
    rows = list(zip(curve.p_f, curve.p_d, curve.thresholds))
    rec = OutputRecord("roc", {"m": params.m, "n": params.n, "p": params.p, "snr_db": args.snr_db,
                               "gamma": gamma}, ["p_f", "p_d", "mu_th"], rows)
    return rec, None


def cmd_roc_balanced(args):
    if args.m is None or args.p is None:
        raise UsageError("--m and --p are required")
    EnsembleParams(args.m, args.m, args.p)
    gamma = float(db_to_linear(args.snr_db))
    pf = _pf_grid(args.points or DEFAULT_PF_POINTS)
    rows = list(zip(pf, roc_balanced(args.m, args.p, gamma, pf)))
    rec = OutputRecord("roc-balanced", {"m": args.m, "p": args.p, "snr_db": args.snr_db, "gamma": gamma},
                       ["p_f", "p_d"], rows)
    return rec, None


def cmd_optimal_p(args):
    gamma = float(db_to_linear(args.snr_db))
    pf, nu = args.pf, args.nu
    lower, upper = optimal_p_bounds(pf, gamma, nu)
    approx = optimal_p_approx(pf, gamma, nu)
    p_round = max(1, int(round_half_up(approx)))
    p_star, pd_star = optimal_p_exact(pf, gamma, nu)
    rows = [
        ("lower", lower, nu * lower, roc_balanced(nu * lower, lower, gamma, pf)),
        ("upper", upper, nu * upper, roc_balanced(nu * upper, upper, gamma, pf)),
        ("approx", approx, nu * approx, roc_balanced(nu * approx, approx, gamma, pf)),
        ("approx_rounded", p_round, int(dimension_for(p_round, nu)),
         roc_balanced(dimension_for(p_round, nu), p_round, gamma, pf)),
        ("exact", p_star, int(dimension_for(p_star, nu)), pd_star),
    ]
    rec = OutputRecord("optimal-p", {"pf": pf, "snr_db": args.snr_db, "gamma": gamma, "nu": nu},
                       ["label", "p", "m", "p_d"], rows)
    return rec, None


def cmd_simulate(args):
    params = _ensemble(args)
    eta = _spike_from_args(args, default=0.0)
    seed = _resolve_seed(args)
    trials = args.trials
    rec_params = {"m": params.m, "n": params.n, "p": params.p, "eta": eta, "trials": trials,
                  "seed": seed, "mode": args.mode}

    def analytic(x):
        return cdf_max_eig(params, eta, x, precision=args.precision)

    h1 = simulate_max_eig(SimConfig(params, eta, trials, seed), threads=args.threads)
    summary = {"ks": ks_statistic(h1, analytic)}
    if args.mode == "samples":
        rows = list(zip(range(trials), h1.values))
        return OutputRecord("simulate", rec_params, ["trial", "lambda_max"], rows, summary), None
    if args.mode == "cdf":
        t = _t_grid(args, params, eta)
        rows = list(zip(t, empirical_cdf(h1, t), analytic(t)))
        return OutputRecord("simulate", rec_params, ["t", "F_empirical", "F_analytic"], rows, summary), None
    # roc: H0 draws from the next seed, thresholds from the analytic P_F
    h0 = simulate_max_eig(SimConfig(params, 0.0, trials, seed + 1), threads=args.threads)
    summary["ks_h0"] = ks_statistic(h0, lambda x: cdf_max_eig(params, 0.0, x, precision=args.precision))
    dp = DetectorParams(params, eta)
    pf = _pf_grid(args.points or 19)
    mu = np.atleast_1d(threshold_for_pf(dp, pf, precision=args.precision))
    s0, s1 = np.sort(h0.detector_statistic()), np.sort(h1.detector_statistic())
    pf_emp = 1.0 - np.searchsorted(s0, mu, side="right") / trials
    pd_emp = 1.0 - np.searchsorted(s1, mu, side="right") / trials
    pd_an = roc_curve(dp, pf, precision=args.precision).p_d
    rows = list(zip(pf, mu, pf_emp, pd_emp, pd_an))
    summary["max_abs_pd_dev"] = float(np.max(np.abs(pd_emp - pd_an)))
    summary["max_abs_pf_dev"] = float(np.max(np.abs(pf_emp - pf)))
    return OutputRecord("simulate", rec_params, ["p_f", "mu_th", "p_f_empirical", "p_d_empirical", "p_d_analytic"],
                        rows, summary), None


def cmd_validate(args):
    from .validation import format_table, run_checks
    results = run_checks(args.level, threads=args.threads, seed=_resolve_seed(args))
    return results, format_table(results) + "\n"


# ---------------------------------------------------------------- parser

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON object instead of CSV")
    common.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")

    ens = argparse.ArgumentParser(add_help=False)
    ens.add_argument("--m", type=int, required=True, help="dimension")
    ens.add_argument("--n", type=int, required=True, help="noise-only sample count")
    ens.add_argument("--p", type=int, required=True, help="signal-plus-noise sample count")

    tgrid = argparse.ArgumentParser(add_help=False)
    tgrid.add_argument("--t-min", type=float, help="grid start (default: 0.0005 quantile)")
    tgrid.add_argument("--t-max", type=float, help="grid end (default: 0.9995 quantile)")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    mc.add_argument("--threads", type=_positive_int, help="worker threads (default: CPU count)")

    prec = argparse.ArgumentParser(add_help=False)
    prec.add_argument("--precision", choices=("double", "auto", "high"), default="auto",
                      help="determinant arithmetic (default auto: extended precision where doubles lose digits)")

    ap = argparse.ArgumentParser(prog="largest-root", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cdf", parents=[common, ens, tgrid, prec], help="CDF of the largest eigenvalue")
    p.add_argument("--eta", type=float, default=0.0, help="spike strength, linear (default 0)")
    p.add_argument("--t", type=float, help="single evaluation point; prints one number")
    p.add_argument("--points", type=int, help=f"grid size (default {DEFAULT_T_POINTS})")
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("roc", parents=[common, ens, prec], help="detector ROC by threshold inversion")
    p.add_argument("--snr-db", type=float, required=True, help="SNR in dB (use --snr-db=-inf for 0)")
    p.add_argument("--points", type=int, help=f"number of P_F points (default {DEFAULT_PF_POINTS})")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("roc-balanced", parents=[common], help="closed-form ROC for n == m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--points", type=int, help=f"number of P_F points (default {DEFAULT_PF_POINTS})")
    p.set_defaults(func=cmd_roc_balanced)

    p = sub.add_parser("optimal-p", parents=[common], help="sample count maximising P_D at m = n = nu p")
    p.add_argument("--pf", type=float, required=True, help="false-alarm probability")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0, help="ratio m/p (default 1)")
    p.set_defaults(func=cmd_optimal_p)

    p = sub.add_parser("simulate", parents=[common, ens, tgrid, mc, prec], help="Monte Carlo run with KS summary")
    p.add_argument("--eta", type=float, help="spike strength, linear")
    p.add_argument("--snr-db", type=float, help="spike strength in dB")
    p.add_argument("--trials", type=_positive_int, default=10_000)
    p.add_argument("--mode", choices=("samples", "cdf", "roc"), default="samples")
    p.add_argument("--points", type=int, help="t-grid size (cdf) or P_F-grid size (roc, default 19)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", parents=[mc], help="run the cross-check suite")
    p.add_argument("level", nargs="?", choices=("quick", "full"), default="quick")
    p.set_defaults(func=cmd_validate)
    return ap


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        result, text = args.func(args)
    except (UsageError, DomainError, NumericalError, ValueError) as exc:
        print(f"largest-root {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "validate":
        _emit(text, None)
        return EXIT_OK if all(r.passed for r in result) else EXIT_VALIDATION
    if args.json:
        text = result.to_json()
    elif text is None:
        text = result.to_csv()
    _emit(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
