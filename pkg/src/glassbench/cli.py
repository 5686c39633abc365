"""Command-line driver: sweep, trace, density, oracle, fit."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import SEED_ENV, ConfigError, config_echo, load_config
from .dynamics import TrajectoryParams, run_trajectory
from .harness import (
    SEED_METHOD,
    StreamRole,
    default_workers,
    derive_seed,
    fit_results_csv,
    fit_rows,
    fmt,
    monotonicity_report,
    run_experiment,
    write_fits_csv,
    write_results_csv,
)
from .oracle import CENSUS_MAX_N, enumerate_local_minima, exact_ground_state
from .schedule import density_table
from .sk import COUPLING_METHOD, generate_couplings, random_spins

RNG_METHOD_ID = f"couplings={COUPLING_METHOD}; seeds={SEED_METHOD}; uniforms=numpy-pcg64/random"
TRACE_HEADER = ["step", "site", "D", "delta_paper", "delta_exact", "energy", "regime", "lambda2_t"]

log = logging.getLogger("glassbench")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_atomic(path: Path, writer) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def cmd_sweep(args) -> int:
    overrides = {"nreal": args.nreal, "master_seed": args.master_seed}
    if overrides["master_seed"] is None and os.environ.get(SEED_ENV):
        overrides["master_seed"] = int(os.environ[SEED_ENV])
    if args.sizes:
        overrides["sizes"] = args.sizes
    cfg = load_config(args.config, overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    rows = run_experiment(cfg, workers=args.workers)
    fits = fit_rows(rows)
    results_path, fits_path = out / "results.csv", out / "fits.csv"
    _write_atomic(results_path, lambda p: write_results_csv(p, rows))
    _write_atomic(fits_path, lambda p: write_fits_csv(p, fits))
    for note in monotonicity_report(rows):
        log.info("monotonicity: %s", note)
    low = [r.N for r in rows if r.low_coverage]
    manifest = {
        "config_echo": config_echo(cfg),
        "tool_version": __version__,
        "rng_method_id": RNG_METHOD_ID,
        "started": started,
        "finished": _now(),
        "outputs": {"results": str(results_path), "fits": str(fits_path)},
        "step_limit_total": sum(r.step_limit_count for r in rows),
        "low_coverage_sizes": low,
        "one_sided_rate_after_switch": {"alg2": "lambda1", "alg3": "lambda1(t*)"},
    }
    _write_atomic(out / "manifest.json",
                  lambda p: Path(p).write_text(json.dumps(manifest, indent=2) + "\n"))
    for (alg, lam, k), f in fits:
        print(f"{alg} lambda1_0={lam:g} k={k:g}: a={f.exponent:.3f} r2={f.r_squared:.3f}")
    return 0


def _trace_params(args, record_mode="full") -> TrajectoryParams:
    return TrajectoryParams(args.variant, args.lambda1, k=args.k, m=args.m, epsilon=args.epsilon,
                            max_steps=args.max_steps, record_mode=record_mode,
                            spectrum_scale=args.spectrum_scale, empty_class=args.empty_class)


def cmd_trace(args) -> int:
    params = _trace_params(args)
    J = generate_couplings(args.n, derive_seed(args.seed, 0, 0, StreamRole.DISORDER))
    s0 = random_spins(args.n, np.random.default_rng(derive_seed(args.seed, 0, 0, StreamRole.INITIAL)))
    tr = run_trajectory(J, s0, params, seed=derive_seed(args.seed, 0, 0, StreamRole.DYNAMICS))
    scale = 2.0 / math.sqrt(args.n)

    def write(path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for st in tr.steps:
                w.writerow([int(st["t"]), int(st["site"]), fmt(st["D"]), fmt(st["delta"]),
                            fmt(scale * st["delta"]), fmt(st["energy"]),
                            "two_sided" if st["regime"] == 0 else "one_sided", fmt(st["lambda2"])])

    _write_atomic(Path(args.out), write)
    print(f"{tr.flips} flips, {tr.draws} draws, {tr.termination.value}, "
          f"final energy {tr.final_energy:.6f}, best minimum {tr.best_minimum_energy:.6f}")
    return 0


def cmd_density(args) -> int:
    grid = np.linspace(args.xmin, args.xmax, args.points)
    rows = density_table(args.variant, args.lambda1, args.k, args.t, grid, m=args.m)

    def write(path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "f"])
            for t, x, f in rows:
                w.writerow([t, fmt(x), fmt(f)])

    _write_atomic(Path(args.out), write)
    return 0


def cmd_oracle(args) -> int:
    seed = derive_seed(args.seed, args.realization, 0, StreamRole.DISORDER)
    J = generate_couplings(args.n, seed)
    spins, energy = exact_ground_state(J)
    doc = {"n": args.n, "disorder_seed": seed, "ground_energy": energy,
           "ground_energy_per_spin": energy / args.n, "ground_state": spins.tolist()}
    if args.n <= CENSUS_MAX_N:
        doc["minima_count"] = enumerate_local_minima(J).counts
    print(json.dumps(doc))
    return 0


def cmd_fit(args) -> int:
    fits = fit_results_csv(args.results)
    if args.out:
        _write_atomic(Path(args.out), lambda p: write_fits_csv(p, fits))
    for (alg, lam, k), f in fits:
        print(f"{alg} lambda1_0={lam:g} k={k:g}: a={f.exponent:.3f} "
              f"intercept={f.intercept:.3f} r2={f.r_squared:.3f} points={f.points_used}")
    return 0


def _add_dynamics_flags(p, density_only=False):
    p.add_argument("--variant", required=True, choices=["alg0", "alg1", "alg2", "alg3"])
    p.add_argument("--lambda1", type=float, required=True, help="lambda, lambda1 or lambda1(0)")
    p.add_argument("--k", type=float, default=0.98)
    p.add_argument("--m", type=float, default=1000.0)
    if density_only:
        return
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--spectrum-scale", choices=["sqrt_n", "unit"], default="sqrt_n")
    p.add_argument("--empty-class", choices=["skip", "conditional"], default="skip")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glassbench", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", default=".")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--nreal", type=int)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--sizes", type=int, nargs="+")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="write one full trajectory as CSV")
    _add_dynamics_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="trace.csv")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("density", help="tabulate acceptance densities f_t(x)")
    _add_dynamics_flags(p, density_only=True)
    p.add_argument("--t", type=int, nargs="+", default=[0])
    p.add_argument("--xmin", type=float, default=-5.0)
    p.add_argument("--xmax", type=float, default=5.0)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("--out", default="density.csv")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("oracle", help="exact ground state of one instance as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True, help="master seed, as in sweep")
    p.add_argument("--realization", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("fit", help="refit exponents from a results.csv")
    p.add_argument("results")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is None and args.command == "sweep":
        args.workers = default_workers()
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"glassbench {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
