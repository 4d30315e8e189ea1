"""Monte Carlo replication of the full pipeline: simulate, assemble, fit the
coefficients, then fit the reaction parameter."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import rng
from .coeff import fit_coeff, increment_stats
from .conditions import ConditionReport, check_conditions
from .config import ExperimentConfig
from .errors import InvalidConfigError
from .reaction import approx_coordinate_path, estimate_reaction
from .simulate import assemble_field, simulate_coordinates

ESTIMATORS = ("theta1_hat", "eta1_hat", "theta2_hat", "theta0_hat", "mu0_hat")

# fixed column order of replications.csv
REPLICATION_COLUMNS = (
    "rep", "seed",
    "theta1_hat", "eta1_hat", "theta2_hat", "kappa_hat", "eta_hat",
    "theta0_hat", "mu0_hat", "lambda_hat", "mu_hat",
    "contrast_u", "contrast_v",
    "flagged", "flags", "failed", "error",
)


@dataclass
class ReplicationResult:
    rep: int
    seed: int
    theta1_hat: float = math.nan
    eta1_hat: float = math.nan
    theta2_hat: float = math.nan
    kappa_hat: float = math.nan
    eta_hat: float = math.nan
    theta0_hat: float = math.nan
    mu0_hat: float = math.nan
    lambda_hat: float = math.nan
    mu_hat: float = math.nan
    contrast_u: float = math.nan
    contrast_v: float = math.nan
    flags: str = ""
    failed: bool = False
    error: str = ""
    wall_time: float = 0.0

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def row(self) -> list:
        out = []
        for c in REPLICATION_COLUMNS:
            v = getattr(self, c)
            if isinstance(v, bool):
                v = int(v)
            elif isinstance(v, float):
                v = repr(v)
            out.append(v)
        return out


def run_replication(cfg: ExperimentConfig, rep_index: int) -> ReplicationResult:
    """One deterministic pass of the pipeline.

    Estimator failures are recorded on the result, never raised.
    """
    t0 = time.perf_counter()
    seed = rng.replication_seed(cfg.seed, rep_index)
    res = ReplicationResult(rep_index, seed)
    flags = []
    try:
        params, noise = cfg.params(), cfg.noise()
        sg = cfg.spatial_grid()
        coeffs = simulate_coordinates(params, noise, cfg.spectrum(), cfg.truncation(), cfg.time_grid(), seed, sg)
        fld = assemble_field(coeffs, params, sg)
        del coeffs
        th = cfg.spatial_thinning()
        stats = increment_stats(fld, th, noise.alpha, noise.epsilon)
        est = fit_coeff(stats, th, cfg.xi_box())
        res.kappa_hat, res.eta_hat, res.theta2_hat = est.kappa_hat, est.eta_hat, est.theta2_hat
        res.theta1_hat, res.eta1_hat, res.contrast_u = est.theta1_hat, est.eta1_hat, est.contrast
        flags += [f"coeff:{k}" for k, v in est.at_bound.items() if v]
        if est.budget_exhausted:
            flags.append("coeff:budget")
        path = approx_coordinate_path(fld, cfg.mode, est.kappa_hat, est.eta_hat, cfg.temporal_thinning())
        del fld
        rx = estimate_reaction(path, est, noise, cfg.mu0 if cfg.mu0_known else None,
                               (cfg.lambda_lo, cfg.lambda_hi), (cfg.mu_lo, cfg.mu_hi))
        res.lambda_hat, res.theta0_hat, res.contrast_v = rx.lambda_hat, rx.theta0_hat, rx.contrast
        if rx.mu_hat is not None:
            res.mu_hat, res.mu0_hat = rx.mu_hat, rx.mu0_hat
        flags += [f"reaction:{k}" for k, v in rx.at_bound.items() if v]
    except InvalidConfigError:
        raise
    except Exception as exc:  # estimator failures are data, not crashes
        res.failed = True
        res.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    res.flags = ";".join(flags)
    res.wall_time = time.perf_counter() - t0
    return res


@dataclass
class SummaryTable:
    config: ExperimentConfig
    n_reps: int
    n_failed: int
    n_flagged: int
    stats: dict = field(default_factory=dict)  # (estimator, subset) -> (mean, sd, count)
    reference: Optional[dict] = None

    def mean(self, name: str, subset: str = "all") -> float:
        return self.stats[(name, subset)][0]

    def sd(self, name: str, subset: str = "all") -> float:
        return self.stats[(name, subset)][1]

    def rows(self) -> list:
        out = []
        for (name, subset), (mean, sd, count) in self.stats.items():
            ref_mean = ref_sd = dev = math.nan
            if self.reference and f"{name[:-4]}_mean" in self.reference:
                ref_mean = self.reference[f"{name[:-4]}_mean"]
                ref_sd = self.reference[f"{name[:-4]}_sd"]
                dev = mean - ref_mean
            out.append([name, subset, count, repr(mean), repr(sd), repr(ref_mean), repr(ref_sd), repr(dev)])
        return out


SUMMARY_COLUMNS = ("estimator", "subset", "count", "mean", "sd", "ref_mean", "ref_sd", "deviation")


def _mean_sd(values):
    v = np.asarray([x for x in values if math.isfinite(x)], dtype=float)
    if len(v) == 0:
        return math.nan, math.nan, 0
    sd = float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
    return float(np.mean(v)), sd, len(v)


def summarize(cfg: ExperimentConfig, results, reference: Optional[dict] = None) -> SummaryTable:
    ok = [r for r in results if not r.failed]
    clean = [r for r in ok if not r.flagged]
    table = SummaryTable(cfg, len(results), len(results) - len(ok), sum(r.flagged for r in ok), reference=reference)
    for name in ESTIMATORS:
        table.stats[(name, "all")] = _mean_sd(getattr(r, name) for r in ok)
        table.stats[(name, "unflagged")] = _mean_sd(getattr(r, name) for r in clean)
    return table


def load_reference(table: int, m1: int, n: int) -> Optional[dict]:
    """Row of a shipped reference table, or None if the (m1, n) pair is absent."""
    text = resources.files("spde2d").joinpath(f"data/table{table}_reference.csv").read_text()
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    for row in csv.DictReader(io.StringIO(body)):
        if int(row["m1"]) == m1 and int(row["n"]) == n:
            return {k: float(v) for k, v in row.items() if k not in ("m1", "n")}
    return None


def config_conditions(cfg: ExperimentConfig) -> ConditionReport:
    th = cfg.spatial_thinning()
    return check_conditions(cfg.params(), cfg.spectrum(), cfg.alpha, cfg.epsilon, cfg.N, cfg.M1, cfg.M2,
                            th.m, cfg.n, cfg.mode, cfg.alpha0)


def write_replications(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPLICATION_COLUMNS)
        for r in sorted(results, key=lambda r: r.rep):
            w.writerow(r.row())


def read_replications(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        r = ReplicationResult(int(row["rep"]), int(row["seed"]))
        for c in REPLICATION_COLUMNS[2:]:
            if c == "flagged":
                continue
            if c in ("flags", "error"):
                setattr(r, c, row[c])
            elif c == "failed":
                r.failed = row[c] == "1"
            else:
                setattr(r, c, float(row[c]))
        out.append(r)
    return out


def write_summary(table: SummaryTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        w.writerows(table.rows())
        w.writerow(["replications", "", table.n_reps, "", "", "", "", ""])
        w.writerow(["failed", "", table.n_failed, "", "", "", "", ""])
        w.writerow(["flagged", "", table.n_flagged, "", "", "", "", ""])


def run_mc(cfg: ExperimentConfig, threads: Optional[int] = None, out_dir=None, reference: bool = True):
    """Run ``cfg.reps`` replications on a bounded thread pool.

    Returns ``(SummaryTable, results)``.  When ``out_dir`` is set, writes
    replications.csv, timings.csv, summary.csv and conditions.txt there.
    """
    cfg.validate()
    threads = threads or cfg.threads
    if threads == 1:
        results = [run_replication(cfg, i) for i in range(cfg.reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: run_replication(cfg, i), range(cfg.reps)))
    ref = load_reference(1, cfg.m1, cfg.n) if reference else None
    table = summarize(cfg, results, ref)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_replications(results, out / "replications.csv")
        with open(out / "timings.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rep", "wall_time"])
            w.writerows([r.rep, repr(r.wall_time)] for r in results)
        write_summary(table, out / "summary.csv")
        (out / "conditions.txt").write_text(config_conditions(cfg).to_text())
        (out / "config.txt").write_text(cfg.to_text())
    return table, results
