"""Command-line front end.

Subcommands
-----------
rate      scalar AVC capacities (randomized / deterministic coding)
dpc       dirty-paper rate at given parameters, or optimized
mimo      rank-one jammer rates for a parallel channel
figure    CSV data behind the dbc, dpc and mimo221 figures
sim       Monte Carlo error estimates (rotated code, broadcast code, DPC encoder)

Exit codes: 0 success, 2 usage or validation error, 3 numeric failure,
4 infeasible regime (the JSON payload still carries a status field).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channel import ScalarAvcSpec
from .dpc_opt import dpc_gamma_threshold, optimize_dpc
from .errors import BracketError, FeasibilityError, GavcError, ParameterError
from .mimo import (
    MimoSpec,
    full_rank_rate,
    maxmin_rate_221,
    maxmin_solver_general,
    optimal_jam_index,
    rate_wfillnew,
    upper_bound_rate,
    worst_g_oracle,
)
from .rates import (
    BroadcastSpec,
    DpcParams,
    DpcSpec,
    alpha0,
    broadcast_region,
    deterministic_capacity,
    dpc_capacity_condition,
    dpc_outer_bound,
    dpc_rate,
    key_size_schedule,
    randomized_capacity,
)

log = logging.getLogger("gavc")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4
SEED_ENV = "GAVC_SEED"
SIG = 12

# Column layouts of the figure CSVs.
FIGURE_COLUMNS = {
    "dbc": ["alpha", "r1_bits", "r2_bits", "kind"],
    "dpc": [
        "gamma", "dpc_rate_bits", "costa_rate_bits", "outer_bound_bits",
        "avc_no_interference_bits", "avc_threshold_margin", "costa_threshold_margin",
    ],
    "mimo221": ["lambda", "maxmin_rate_bits", "r_wfill_bits", "r_wfill_rank_one_bits", "upper_bound_bits", "case"],
}


class _Infeasible(Exception):
    def __init__(self, payload):
        super().__init__(payload.get("status", "infeasible"))
        self.payload = payload


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), f".{SIG}g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dump_json(payload: dict, stamp: bool = True) -> str:
    """Sorted, indented JSON. ``timestamp`` is the only field that varies between runs."""
    payload = dict(payload)
    if stamp:
        payload["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# rate / dpc / mimo


def cmd_rate(args) -> dict:
    spec = ScalarAvcSpec(args.gamma, args.lambda_, args.sigma_w2)
    out = {"gamma": spec.gamma, "lambda": spec.lambda_, "sigma_w2": spec.sigma_w2}
    if args.deterministic:
        out.update(c_d_bits=deterministic_capacity(spec), formula="deterministic_capacity")
    else:
        out.update(c_r_bits=randomized_capacity(spec), formula="randomized_capacity")
    return out


def cmd_dpc(args) -> dict:
    spec = DpcSpec(args.gamma, args.lambda_, args.sigma_w2, args.sigma_t2)
    out = {
        "gamma": spec.gamma, "lambda": spec.lambda_, "sigma_w2": spec.sigma_w2, "sigma_t2": spec.sigma_t2,
        "outer_bound_bits": dpc_outer_bound(spec), "alpha0": alpha0(spec),
        "capacity_condition": dpc_capacity_condition(spec),
    }
    try:
        out["gamma_star"] = dpc_gamma_threshold(spec.lambda_, spec.sigma_t2, spec.sigma_w2)
    except BracketError:
        out["gamma_star"] = None
    if (args.alpha is None) != (args.rho is None):
        raise ParameterError("give both --alpha and --rho, or neither")
    if args.alpha is not None:
        params = DpcParams.of(spec, args.alpha, args.rho)
        try:
            rate = dpc_rate(spec, params)
        except FeasibilityError as exc:
            raise _Infeasible({**out, "alpha": args.alpha, "rho": args.rho, "status": "infeasible", "detail": str(exc)})
        out.update(alpha=args.alpha, rho=args.rho, rate_bits=rate, status="ok", formula="dpc_rate")
        return out
    res = optimize_dpc(spec, grid_step=args.grid_step)
    out.update(status=res.status, rate_bits=res.achievable_rate, formula="optimize_dpc", grid_step=args.grid_step)
    if res.best_params is not None:
        out.update(alpha=res.best_params.alpha, rho=res.best_params.rho, feasibility_margin=res.feasibility_margin)
    if not res.feasible:
        raise _Infeasible(out)
    return out


def cmd_mimo(args) -> dict:
    spec = MimoSpec(tuple(args.nu), args.gamma, args.lambda_)
    out = {"nu": list(args.nu), "gamma": args.gamma, "lambda": args.lambda_}
    out["r_wfill_bits"] = full_rank_rate(spec)
    if spec.is_sorted:
        out["upper_bound_bits"] = upper_bound_rate(spec)
        solved = maxmin_solver_general(spec)
        out.update(maxmin_rate_bits=solved.rate, maxmin_powers=solved.allocation.powers, maxmin_jam_index=solved.jam_index)
        if spec.m == 2:
            closed = maxmin_rate_221(spec)
            out.update(closed_form_bits=closed.rate, closed_form_case=closed.case)
    if args.sx is not None:
        if len(args.sx) != spec.m:
            raise ParameterError(f"--sx needs {spec.m} entries")
        oracle = worst_g_oracle(spec, np.diag(args.sx), seed=args.seed)
        out.update(
            sx=list(args.sx),
            jam_index=optimal_jam_index(args.sx, spec.nu, spec.lambda_),
            oracle_rate_bits=oracle.rate,
            oracle_direction=oracle.direction.g,
            seed=args.seed,
        )
    return out


# --------------------------------------------------------------------------
# figures


def _sweep(lo: float, hi: float, step: float, flag: str) -> np.ndarray:
    if not step > 0:
        raise ParameterError(f"--{flag}-step must be > 0")
    if hi < lo:
        raise ParameterError(f"--{flag}-max must be >= --{flag}-min")
    return np.round(np.arange(lo, hi + step / 2, step), 12)


def figure_dbc(args) -> tuple[list[str], list[list]]:
    spec = BroadcastSpec(args.gamma, args.lambda_, args.sigma1_2, args.sigma2_2)
    cols = FIGURE_COLUMNS["dbc"]
    if spec.lambda_ >= spec.gamma:
        log.warning("region is empty: lambda >= gamma")
        return cols, []
    if args.alpha_steps < 1:
        raise ParameterError("--alpha-steps must be >= 1")
    lo = spec.lambda_ / spec.gamma
    grid = np.minimum(lo + (1 - lo) * np.arange(1, args.alpha_steps + 1) / args.alpha_steps, 1.0)
    region = broadcast_region(spec, grid)
    rows = [[p.alpha, p.r1, p.r2, p.kind] for p in region.curve]
    rows += [[p.alpha, p.r1, p.r2, p.kind] for p in region.segment]
    return cols, rows


def figure_dpc(args) -> tuple[list[str], list[list]]:
    gammas = _sweep(args.gamma_min, args.gamma_max, args.gamma_step, "gamma")
    rows = []
    for g in gammas:
        spec = DpcSpec(float(g), args.lambda_, args.sigma_w2, args.sigma_t2)
        opt = optimize_dpc(spec, grid_step=args.grid_step)
        costa = DpcParams.of(spec, alpha0(spec), 0.0) if g > 0 else None
        costa_margin = (costa.received_power - spec.lambda_) if costa is not None else -spec.lambda_
        costa_rate = dpc_rate(spec, costa) if costa is not None and costa_margin >= 0 else 0.0
        rows.append([
            g, opt.achievable_rate, costa_rate, dpc_outer_bound(spec),
            deterministic_capacity(spec.scalar), g - spec.lambda_, costa_margin,
        ])
    return FIGURE_COLUMNS["dpc"], rows


def figure_mimo221(args) -> tuple[list[str], list[list]]:
    lams = _sweep(args.lambda_min, args.lambda_max, args.lambda_step, "lambda")
    rows = []
    for lam in lams:
        spec = MimoSpec(tuple(args.nu), args.gamma, float(lam))
        closed = maxmin_rate_221(spec)
        rows.append([lam, closed.rate, full_rank_rate(spec), rate_wfillnew(spec), upper_bound_rate(spec), closed.case])
    return FIGURE_COLUMNS["mimo221"], rows


FIGURES = {"dbc": figure_dbc, "dpc": figure_dpc, "mimo221": figure_mimo221}


def cmd_figure(args) -> str:
    cols, rows = FIGURES[args.name](args)
    return write_csv(cols, rows)


# --------------------------------------------------------------------------
# simulation


def _sim_config(args) -> dict:
    keys = [
        "model", "n", "rate_frac", "gamma", "lambda_", "sigma_w2", "jammer", "k", "k_rule",
        "trials", "seed", "messages", "message_sample", "block_size",
        "alpha", "sigma1_2", "sigma2_2", "sigma_t2", "r_bin_offset", "r_u_gap", "ensemble",
    ]
    cfg = {k.rstrip("_"): getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    cfg["version"] = __version__
    return cfg


def cmd_sim(args) -> dict:
    from .sim import (  # deferred: the simulator pulls in scipy.stats
        JAMMERS,
        DpcEncoderConfig,
        FixedVector,
        bin_rate_threshold,
        build_code,
        build_dpc_code,
        encoder_failure_trials,
        run_broadcast_trials,
        run_trials,
    )

    if args.lambda_eq_gamma:
        args.lambda_ = args.gamma
    config = _sim_config(args)
    payload = {"config": config}

    if args.model == "avc":
        spec = ScalarAvcSpec(args.gamma, args.lambda_, args.sigma_w2)
        k = args.k if args.k is not None else key_size_schedule(args.n, args.k_rule)
        config["k_effective"] = k
        rate = args.rate_frac * randomized_capacity(spec)
        config["rate_bits"] = rate
        codebook, keys = build_code(args.n, rate, spec.gamma, k, args.seed)
        if args.jammer == "fixed":
            jammer = FixedVector.toward_codeword(codebook, spec.lambda_, 0)
        else:
            jammer = JAMMERS[args.jammer](spec.lambda_)
        report = run_trials(
            codebook, keys, spec, jammer, args.trials, args.seed,
            messages=args.messages, message_sample=args.message_sample,
            block_size=args.block_size, workers=args.workers,
        )
        payload["result"] = report.to_dict()
        payload["rate_hat"] = report.average.rate_hat
        payload["ci95"] = report.average.ci95
        if spec.lambda_ >= spec.gamma:
            payload["note"] = "symmetrizable regime: lambda >= gamma, deterministic codes have zero capacity"
        return payload

    if args.model == "dbc":
        bspec = BroadcastSpec(args.gamma, args.lambda_, args.sigma1_2, args.sigma2_2)
        region = broadcast_region(bspec, [args.alpha])
        if region.empty:
            raise ParameterError("broadcast region is empty when lambda >= gamma; raise --gamma or lower --lambda")
        point = region.curve[0]
        r1, r2 = args.rate_frac * point.r1, args.rate_frac * point.r2
        config.update(r1_bits=r1, r2_bits=r2)
        jammer = JAMMERS[args.jammer](bspec.lambda_)
        mode = "ensemble" if args.ensemble else "auto"
        report = run_broadcast_trials(bspec, args.alpha, r1, r2, args.n, jammer, args.trials, args.seed, mode=mode)
        payload["result"] = report.to_dict()
        return payload

    if args.model == "dpc-encoder":
        spec = DpcSpec(args.gamma, args.lambda_, args.sigma_w2, args.sigma_t2)
        a0 = alpha0(spec)
        threshold = bin_rate_threshold(spec, a0, 0.0)
        r_bin = threshold + args.r_bin_offset
        cfg = DpcEncoderConfig(args.n, r_bin, r_bin + args.r_u_gap, a0, 0.0, spec)
        config.update(alpha=a0, rho=0.0, r_bin_bits=r_bin, threshold_bits=threshold)
        failure = encoder_failure_trials(build_dpc_code(cfg, args.seed), args.trials, args.seed)
        payload["result"] = {"failure": failure.to_dict(), "success_rate": 1 - failure.rate_hat}
        return payload

    raise ParameterError(f"unknown model {args.model!r}")


# --------------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gavc", description="Gaussian arbitrarily varying channel toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rate", help="scalar AVC capacity")
    r.add_argument("--gamma", type=float, required=True)
    r.add_argument("--lambda", dest="lambda_", type=float, required=True)
    r.add_argument("--sigma-w2", type=float, required=True)
    r.add_argument("--deterministic", action="store_true", help="deterministic coding, average error")
    r.add_argument("--out")

    d = sub.add_parser("dpc", help="dirty-paper coding rate")
    d.add_argument("--gamma", type=float, required=True)
    d.add_argument("--lambda", dest="lambda_", type=float, required=True)
    d.add_argument("--sigma-w2", type=float, required=True)
    d.add_argument("--sigma-t2", type=float, required=True)
    d.add_argument("--alpha", type=float)
    d.add_argument("--rho", type=float)
    d.add_argument("--grid-step", type=float, default=0.01)
    d.add_argument("--out")

    m = sub.add_parser("mimo", help="parallel channel with a rank-one jammer")
    m.add_argument("--nu", type=float, nargs="+", required=True)
    m.add_argument("--gamma", type=float, required=True)
    m.add_argument("--lambda", dest="lambda_", type=float, required=True)
    m.add_argument("--sx", type=float, nargs="+", help="diagonal input covariance for the jam-direction check")
    m.add_argument("--seed", type=int, default=_default_seed())
    m.add_argument("--out")

    f = sub.add_parser("figure", help="CSV data for a figure")
    f.add_argument("name", choices=sorted(FIGURES))
    f.add_argument("--gamma", type=float)
    f.add_argument("--lambda", dest="lambda_", type=float)
    f.add_argument("--sigma1-2", type=float, default=0.1)
    f.add_argument("--sigma2-2", type=float, default=5.0)
    f.add_argument("--alpha-steps", type=int, default=100)
    f.add_argument("--sigma-w2", type=float, default=1.0)
    f.add_argument("--sigma-t2", type=float, default=2.0)
    f.add_argument("--gamma-min", type=float, default=0.05)
    f.add_argument("--gamma-max", type=float, default=10.0)
    f.add_argument("--gamma-step", type=float, default=0.05)
    f.add_argument("--grid-step", type=float, default=0.02)
    f.add_argument("--nu", type=float, nargs=2, default=[1.0, 3.0])
    f.add_argument("--lambda-min", type=float, default=0.0)
    f.add_argument("--lambda-max", type=float, default=10.0)
    f.add_argument("--lambda-step", type=float, default=0.1)
    f.add_argument("--out")

    s = sub.add_parser("sim", help="Monte Carlo error estimates")
    s.add_argument("--model", choices=["avc", "dbc", "dpc-encoder"], default="avc")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--rate-frac", type=float, default=0.5)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
    s.add_argument("--lambda-eq-gamma", action="store_true")
    s.add_argument("--sigma-w2", type=float, default=6.25)
    s.add_argument("--jammer", choices=["none", "gaussian", "sphere", "fixed", "symmetrize", "orthogonal"], default="sphere")
    s.add_argument("--k", type=int, help="key count; overrides --k-rule")
    s.add_argument("--k-rule", default="nlogn")
    s.add_argument("--trials", type=int, default=10000)
    s.add_argument("--seed", type=int, default=_default_seed())
    s.add_argument("--messages", choices=["auto", "sweep", "sample", "uniform"], default="auto")
    s.add_argument("--message-sample", type=int, default=8)
    s.add_argument("--block-size", type=int, default=1000)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--alpha", type=float, default=0.5, help="dbc power split")
    s.add_argument("--sigma1-2", type=float, default=0.1)
    s.add_argument("--sigma2-2", type=float, default=5.0)
    s.add_argument("--ensemble", action="store_true", help="dbc: force the ensemble estimator")
    s.add_argument("--sigma-t2", type=float, default=12.0)
    s.add_argument("--r-bin-offset", type=float, default=0.25, help="dpc-encoder: bits above the threshold")
    s.add_argument("--r-u-gap", type=float, default=0.25)
    s.add_argument("--out")
    return p


_FIGURE_DEFAULTS = {
    "dbc": {"gamma": 6.0, "lambda_": 1.0},
    "dpc": {"lambda_": 5.0},
    "mimo221": {"gamma": 4.0},
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "figure":
        for k, v in _FIGURE_DEFAULTS[args.name].items():
            if getattr(args, k) is None:
                setattr(args, k, v)
    try:
        if args.command == "figure":
            _emit(cmd_figure(args), args.out)
            return EXIT_OK
        handler = {"rate": cmd_rate, "dpc": cmd_dpc, "mimo": cmd_mimo, "sim": cmd_sim}[args.command]
        _emit(dump_json(handler(args)), args.out)
        return EXIT_OK
    except _Infeasible as exc:
        _emit(dump_json(exc.payload), args.out)
        return EXIT_INFEASIBLE
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FeasibilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BracketError, GavcError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
