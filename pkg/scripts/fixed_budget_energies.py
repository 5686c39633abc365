"""Best energy per spin under an equal wall-clock budget per realization."""

from _common import parser

from glassbench.dynamics import TrajectoryParams
from glassbench.harness import ExperimentConfig, run_fixed_budget, write_results_csv

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--budget", type=float, default=1.0, help="seconds per realization")
    p.set_defaults(nreal=20)
    args = p.parse_args()
    grid = [TrajectoryParams("alg0", 1.0), TrajectoryParams("alg0", 100.0),
            TrajectoryParams("alg2", 1.0, k=0.995), TrajectoryParams("alg3", 100.0, k=0.995)]
    cfg = ExperimentConfig(args.sizes, grid, nreal=args.nreal, protocol="fixed_budget",
                           budget_per_sample=args.budget, restarts_per_sample=None,
                           master_seed=args.master_seed)
    rows = run_fixed_budget(cfg, workers=args.workers)
    print(f"{'alg':5} {'lambda':>7} {'k':>6} {'N':>4} {'restarts':>8} {'H_N':>10} {'stderr':>8}")
    for r in rows:
        p_ = r.params
        flag = "  low coverage" if r.low_coverage else ""
        print(f"{p_.variant.value:5} {p_.lambda1_0:7g} {p_.k:6g} {r.N:4d} {r.restarts:8d} "
              f"{r.h_n_mean:10.5f} {r.h_n_stderr:8.5f}{flag}")
    if args.out:
        write_results_csv(f"{args.out}results.csv", rows)
