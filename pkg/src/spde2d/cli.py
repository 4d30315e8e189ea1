"""Command-line entry point: ``spde2d <subcommand> [options]``.

Exit codes: 0 success, 2 invalid configuration, 3 estimation degenerate in
all replications.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import rng
from .coeff import fit_coeff, increment_stats
from .config import ExperimentConfig, load_config
from .errors import DegenerateDataError, InvalidConfigError
from .fieldio import read_binary, read_csv, write_binary, write_csv
from .harness import config_conditions, run_mc
from .phi import phi
from .reaction import approx_coordinate_path, estimate_reaction
from .simulate import assemble_field, simulate_coordinates

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE = 0, 2, 3


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        over["reps"] = args.reps
    if getattr(args, "threads", None) is not None:
        over["threads"] = args.threads
    if getattr(args, "out", None) is not None:
        over["out"] = args.out
    return cfg.replace(**over).validate()


def _read_field(path):
    p = Path(path)
    if p.suffix == ".csv":
        return read_csv(p)
    return read_binary(p)[0]


def cmd_simulate(args) -> int:
    cfg = _config(args)
    seed = rng.replication_seed(cfg.seed, 0)
    params, sg = cfg.params(), cfg.spatial_grid()
    coeffs = simulate_coordinates(params, cfg.noise(), cfg.spectrum(), cfg.truncation(), cfg.time_grid(), seed, sg)
    fld = assemble_field(coeffs, params, sg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        path = out / "field.csv"
        write_csv(fld, path)
    else:
        path = out / "field.bin"
        write_binary(fld, path, cfg.to_text())
    print(path)
    return EXIT_OK


def _fit_coeff(cfg, fld):
    if (fld.N, fld.M1, fld.M2) != (cfg.N, cfg.M1, cfg.M2):
        raise InvalidConfigError("field grid does not match the configuration")
    th = cfg.spatial_thinning()
    stats = increment_stats(fld, th, cfg.alpha, cfg.epsilon)
    return fit_coeff(stats, th, cfg.xi_box())


def cmd_fit_coeff(args) -> int:
    cfg = _config(args)
    est = _fit_coeff(cfg, _read_field(args.field))
    for k in ("kappa_hat", "eta_hat", "theta2_hat", "theta1_hat", "eta1_hat", "contrast"):
        print(f"{k} = {getattr(est, k)!r}")
    print(f"flagged = {est.flagged}")
    return EXIT_OK


def cmd_fit_reaction(args) -> int:
    cfg = _config(args)
    fld = _read_field(args.field)
    est = _fit_coeff(cfg, fld)
    path = approx_coordinate_path(fld, cfg.mode, est.kappa_hat, est.eta_hat, cfg.temporal_thinning())
    rx = estimate_reaction(path, est, cfg.noise(), cfg.mu0 if cfg.mu0_known else None,
                           (cfg.lambda_lo, cfg.lambda_hi), (cfg.mu_lo, cfg.mu_hi),
                           x0=cfg.spectrum().get(cfg.mode) or None)
    for k in ("lambda_hat", "theta0_hat", "mu_hat", "mu0_hat", "sd_lambda", "sd_mu", "contrast"):
        print(f"{k} = {getattr(rx, k)!r}")
    print(f"flagged = {rx.flagged}")
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = _config(args)
    table, results = run_mc(cfg, out_dir=cfg.out)
    for (name, subset), (mean, sd, count) in table.stats.items():
        if subset == "all":
            print(f"{name:11s} mean={mean:.6g} sd={sd:.6g} n={count}")
    print(f"failed={table.n_failed} flagged={table.n_flagged} -> {cfg.out}")
    return EXIT_DEGENERATE if table.n_failed == table.n_reps else EXIT_OK


def cmd_phi(args) -> int:
    if args.r is not None:
        r = args.r
    else:
        r = _config(args).spatial_thinning().r
    grid = np.linspace(args.theta2_min, args.theta2_max, args.points)
    lines = ["theta2,phi"] + [f"{float(t)!r},{phi(r, args.alpha, float(t))!r}" for t in grid]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check_conditions(args) -> int:
    cfg = _config(args)
    text = config_conditions(cfg).to_text()
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "conditions.txt").write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spde2d", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="output directory"):
        sp.add_argument("--config", help="key=value config file (defaults used when omitted)")
        sp.add_argument("--seed", type=int, help="base seed (u64)")
        sp.add_argument("--out", help=out_help)

    sp = sub.add_parser("simulate", help="simulate one field and write it")
    common(sp)
    sp.add_argument("--format", choices=("csv", "binary"), default="binary")
    sp.set_defaults(func=cmd_simulate)

    for name, func in (("fit-coeff", cmd_fit_coeff), ("fit-reaction", cmd_fit_reaction)):
        sp = sub.add_parser(name, help=f"{name.replace('-', ' ')} from a stored field")
        common(sp)
        sp.add_argument("--field", required=True, help="field file (.bin or .csv)")
        sp.set_defaults(func=func)

    sp = sub.add_parser("mc", help="Monte Carlo replications with summary tables")
    common(sp)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--threads", type=int)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("phi", help="tabulate phi over a theta2 grid")
    sp.add_argument("--config", help="take r from the config's spatial thinning")
    sp.add_argument("--r", type=float)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--theta2-min", type=float, default=0.05)
    sp.add_argument("--theta2-max", type=float, default=2.0)
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--out", help="CSV file (stdout when omitted)")
    sp.set_defaults(func=cmd_phi)

    sp = sub.add_parser("check-conditions", help="evaluate the asymptotic conditions for a config")
    common(sp)
    sp.set_defaults(func=cmd_check_conditions)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
