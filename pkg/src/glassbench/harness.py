"""Disorder-averaged experiments: fixed-restart and fixed-budget protocols.

For every (N, params) point, ``nreal`` coupling matrices are drawn and each
realization gets a number of restarts from uniform random initial spins.

    tau  = mean number of flips over all non-truncated trajectories
    H_N  = mean over realizations of (lowest energy over restarts) / N

All randomness comes from ``derive_seed(master_seed, realization, restart,
role)``, so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import re
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cache

import numpy as np

from .dynamics import Termination, TrajectoryParams, run_trajectory
from .sk import generate_couplings, random_spins

log = logging.getLogger(__name__)

RESULTS_HEADER = ["algorithm", "N", "lambda1_0", "k", "m", "epsilon", "protocol", "nreal",
                  "restarts", "tau_mean", "tau_stderr", "h_n_mean", "h_n_stderr",
                  "trajectories", "step_limit_count", "master_seed"]
FITS_HEADER = ["algorithm", "lambda1_0", "k", "exponent", "intercept", "r_squared", "points_used"]

SEED_METHOD = "blake2b-64(le u64 master, realization, restart, role)"


class StreamRole(IntEnum):
    DISORDER = 0
    INITIAL = 1
    DYNAMICS = 2


def derive_seed(master_seed: int, realization_index: int, restart_index: int, stream_role: int) -> int:
    """Stable 64-bit seed for one random stream.

    BLAKE2b with an 8-byte digest over the little-endian packing of the four
    integers.  Changing this function changes every published result.
    """
    if realization_index < 0 or restart_index < 0 or stream_role < 0:
        raise ValueError("seed indices must be nonnegative")
    payload = struct.pack("<4Q", master_seed & (2**64 - 1), realization_index, restart_index,
                          int(stream_role))
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass
class ExperimentConfig:
    sizes: list
    params_grid: list
    nreal: int = 50
    restarts_per_sample: object = "min(N,50)"
    protocol: str = "fixed_restarts"
    budget_per_sample: float | None = None
    master_seed: int = 20070301
    h_n_mode: str = "best_visited"

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes: must be nonempty")
        if any(int(n) < 1 for n in self.sizes):
            raise ValueError("sizes: every N must be >= 1")
        if not self.params_grid:
            raise ValueError("params_grid: must be nonempty")
        if int(self.nreal) < 1:
            raise ValueError(f"nreal: must be >= 1, got {self.nreal}")
        if self.protocol not in ("fixed_restarts", "fixed_budget"):
            raise ValueError(f"protocol: unknown value {self.protocol!r}")
        if (self.protocol == "fixed_budget") != (self.budget_per_sample is not None):
            raise ValueError("budget_per_sample: set iff protocol == 'fixed_budget'")
        if self.budget_per_sample is not None and not self.budget_per_sample > 0:
            raise ValueError("budget_per_sample: must be positive")
        if self.h_n_mode not in ("best_visited", "final_only"):
            raise ValueError(f"h_n_mode: unknown value {self.h_n_mode!r}")
        self.restarts_for(1)

    def restarts_for(self, n: int) -> int | None:
        """Resolve ``restarts_per_sample`` (int, "N", "min(N,c)" or None) at size n."""
        r = self.restarts_per_sample
        if r is None:
            if self.protocol == "fixed_budget":
                return None
            raise ValueError("restarts_per_sample: required for fixed_restarts")
        if isinstance(r, str):
            if r == "N":
                return n
            match = re.fullmatch(r"min\(N,\s*(\d+)\)", r)
            if not match:
                raise ValueError(f"restarts_per_sample: cannot parse {r!r}")
            return min(n, int(match.group(1)))
        if int(r) < 1:
            raise ValueError(f"restarts_per_sample: must be >= 1, got {r}")
        return int(r)


@dataclass
class ResultRow:
    N: int
    params: TrajectoryParams
    protocol: str
    nreal: int
    restarts: int
    tau_mean: float
    tau_stderr: float
    h_n_mean: float
    h_n_stderr: float
    trajectories: int
    step_limit_count: int
    master_seed: int
    per_realization_best: np.ndarray = field(repr=False)
    low_coverage: bool = False

    @property
    def variant(self):
        return self.params.variant


@dataclass
class FitResult:
    exponent: float
    intercept: float
    r_squared: float
    points_used: int


@dataclass
class SampleOutcome:
    """All restarts of one disorder realization."""

    flips: np.ndarray
    energies: np.ndarray
    limited: np.ndarray
    elapsed: float


def _trajectory_energy(tr, mode: str) -> float:
    if mode == "final_only":
        return tr.final_energy
    return min(tr.best_minimum_energy, tr.final_energy)


@cache
def _warm_up() -> None:
    # Load the compiled kernel before any wall clock starts.
    run_trajectory(generate_couplings(2, 0), [1, -1], TrajectoryParams("alg2", 1.0), seed=0)


def run_sample(n: int, params: TrajectoryParams, master_seed: int, realization: int,
               restarts: int | None, budget: float | None = None,
               h_n_mode: str = "best_visited") -> SampleOutcome:
    """Restarts on one realization: a fixed count, or until the budget runs out."""
    J = generate_couplings(n, derive_seed(master_seed, realization, 0, StreamRole.DISORDER))
    flips, energies, limited = [], [], []
    if budget is not None:
        _warm_up()
    start = time.perf_counter()
    j = 0
    while True:
        if restarts is not None and j >= restarts:
            break
        if budget is not None and j > 0 and time.perf_counter() - start >= budget:
            break
        s0 = random_spins(n, np.random.default_rng(
            derive_seed(master_seed, realization, j, StreamRole.INITIAL)))
        tr = run_trajectory(J, s0, params,
                            seed=derive_seed(master_seed, realization, j, StreamRole.DYNAMICS))
        flips.append(tr.flips)
        energies.append(_trajectory_energy(tr, h_n_mode))
        limited.append(tr.termination is Termination.STEP_LIMIT)
        j += 1
    return SampleOutcome(np.array(flips, dtype=np.int64), np.array(energies),
                         np.array(limited, dtype=bool), time.perf_counter() - start)


def _run_sample_args(args):
    return run_sample(*args)


def _stderr(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def aggregate(n: int, params: TrajectoryParams, cfg: ExperimentConfig, samples) -> ResultRow:
    flips = np.concatenate([s.flips for s in samples])
    limited = np.concatenate([s.limited for s in samples])
    kept = flips[~limited]
    best = np.array([s.energies.min() / n if len(s.energies) else math.nan for s in samples])
    restarts = [len(s.flips) for s in samples]
    if limited.any():
        log.warning("N=%d %s: %d trajectories hit max_steps and are excluded from tau",
                    n, params.variant.value, int(limited.sum()))
    return ResultRow(
        N=n, params=params, protocol=cfg.protocol, nreal=cfg.nreal,
        restarts=min(restarts) if cfg.protocol == "fixed_budget" else restarts[0],
        tau_mean=float(kept.mean()) if len(kept) else math.nan,
        tau_stderr=_stderr(kept.astype(float)),
        h_n_mean=float(np.mean(best)), h_n_stderr=_stderr(best),
        trajectories=int(len(flips)), step_limit_count=int(limited.sum()),
        master_seed=cfg.master_seed, per_realization_best=best,
        low_coverage=cfg.protocol == "fixed_budget" and min(restarts) < 2,
    )


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def _run(cfg: ExperimentConfig, workers: int | None) -> list[ResultRow]:
    workers = default_workers() if workers is None else workers
    points = [(n, p) for p in cfg.params_grid for n in cfg.sizes]
    tasks = [(n, p, cfg.master_seed, r, cfg.restarts_for(n), cfg.budget_per_sample, cfg.h_n_mode)
             for n, p in points for r in range(cfg.nreal)]
    outcomes = _map(_run_sample_args, tasks, workers)
    rows = []
    for idx, (n, p) in enumerate(points):
        rows.append(aggregate(n, p, cfg, outcomes[idx * cfg.nreal:(idx + 1) * cfg.nreal]))
    return rows


def run_fixed_restarts(cfg: ExperimentConfig, workers: int | None = 1) -> list[ResultRow]:
    if cfg.protocol != "fixed_restarts":
        raise ValueError("protocol: run_fixed_restarts needs protocol == 'fixed_restarts'")
    return _run(cfg, workers)


def run_fixed_budget(cfg: ExperimentConfig, workers: int | None = 1) -> list[ResultRow]:
    """Wall-clock budget per realization; a running trajectory always completes.

    ``restarts_per_sample``, when set, caps the number of restarts.
    """
    if cfg.protocol != "fixed_budget":
        raise ValueError("protocol: run_fixed_budget needs protocol == 'fixed_budget'")
    rows = _run(cfg, workers)
    for row in rows:
        if row.low_coverage:
            log.warning("N=%d %s: budget allowed fewer than 2 restarts on some realization",
                        row.N, row.variant.value)
    return rows


def run_experiment(cfg: ExperimentConfig, workers: int | None = 1) -> list[ResultRow]:
    if cfg.protocol == "fixed_budget":
        return run_fixed_budget(cfg, workers)
    return run_fixed_restarts(cfg, workers)


def fit_exponent(points) -> FitResult:
    """Least squares fit of ln(tau) = a ln(N) + b."""
    points = list(points)
    if len(points) < 3:
        raise ValueError(f"need at least 3 points for a fit, got {len(points)}")
    n = np.array([p[0] for p in points], dtype=float)
    tau = np.array([p[1] for p in points], dtype=float)
    if np.any(tau <= 0) or np.any(n <= 0):
        raise ValueError("fit needs strictly positive N and tau")
    x, y = np.log(n), np.log(tau)
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(a), float(b), min(max(r2, 0.0), 1.0), len(points))


def fit_rows(rows) -> list[tuple[tuple, FitResult]]:
    """One fit per (variant, lambda1_0, k) group with at least 3 sizes."""
    groups: dict[tuple, list] = {}
    for row in rows:
        key = (row.params.variant.value, row.params.lambda1_0, row.params.k)
        if row.tau_mean > 0 and math.isfinite(row.tau_mean):
            groups.setdefault(key, []).append((row.N, row.tau_mean))
    return [(key, fit_exponent(pts)) for key, pts in groups.items() if len(pts) >= 3]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_results_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for r in rows:
            p = r.params
            w.writerow([p.variant.value, r.N, fmt(p.lambda1_0), fmt(p.k), fmt(p.m), fmt(p.epsilon),
                        r.protocol, r.nreal, r.restarts, fmt(r.tau_mean), fmt(r.tau_stderr),
                        fmt(r.h_n_mean), fmt(r.h_n_stderr), r.trajectories, r.step_limit_count,
                        r.master_seed])


def write_fits_csv(path, fits) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FITS_HEADER)
        for (alg, lam, k), f in fits:
            w.writerow([alg, fmt(lam), fmt(k), fmt(f.exponent), fmt(f.intercept),
                        fmt(f.r_squared), f.points_used])


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return list(reader)


def fit_results_csv(path) -> list[tuple[tuple, FitResult]]:
    groups: dict[tuple, list] = {}
    for rec in read_results_csv(path):
        key = (rec["algorithm"], float(rec["lambda1_0"]), float(rec["k"]))
        tau = float(rec["tau_mean"])
        if tau > 0 and math.isfinite(tau):
            groups.setdefault(key, []).append((int(rec["N"]), tau))
    return [(key, fit_exponent(pts)) for key, pts in groups.items() if len(pts) >= 3]


def monotonicity_report(rows) -> list[str]:
    """Report-only: H_N should not increase with N beyond two standard errors."""
    notes = []
    by_point: dict[tuple, list] = {}
    for r in rows:
        by_point.setdefault((r.params.variant.value, r.params.lambda1_0, r.params.k), []).append(r)
    for key, group in by_point.items():
        group = sorted(group, key=lambda r: r.N)
        for a, b in zip(group, group[1:]):
            if b.h_n_mean - a.h_n_mean > 2 * math.hypot(a.h_n_stderr, b.h_n_stderr):
                notes.append(f"{key}: H_N rises from N={a.N} ({a.h_n_mean:.5f}) "
                             f"to N={b.N} ({b.h_n_mean:.5f})")
    return notes

