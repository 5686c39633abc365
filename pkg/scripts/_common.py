import argparse

from glassbench.harness import fit_rows, write_fits_csv, write_results_csv

SIZES = [25, 50, 75, 100, 150, 200]


def parser(doc):
    p = argparse.ArgumentParser(description=doc)
    p.add_argument("--sizes", type=int, nargs="+", default=SIZES)
    p.add_argument("--nreal", type=int, default=50)
    p.add_argument("--restarts", default="min(N,25)")
    p.add_argument("--master-seed", type=int, default=20070301)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="prefix for results/fits CSV files")
    return p


def restarts(value):
    return int(value) if value.isdigit() else value


def report(rows, out=None):
    fits = dict(fit_rows(rows))
    print(f"{'alg':5} {'lambda':>8} {'k':>6} {'a':>7} {'r2':>7}   tau(N)")
    for (alg, lam, k), f in fits.items():
        taus = " ".join(f"{r.tau_mean:.0f}" for r in rows
                        if (r.params.variant.value, r.params.lambda1_0, r.params.k) == (alg, lam, k))
        print(f"{alg:5} {lam:8g} {k:6g} {f.exponent:7.3f} {f.r_squared:7.4f}   {taus}")
    if out:
        write_results_csv(f"{out}results.csv", rows)
        write_fits_csv(f"{out}fits.csv", list(fits.items()))
    limited = sum(r.step_limit_count for r in rows)
    if limited:
        print(f"warning: {limited} trajectories hit max_steps")
