"""Flip-count exponents of the one-sided dynamics over a range of lambda."""

from _common import parser, report, restarts

from glassbench.dynamics import TrajectoryParams
from glassbench.harness import ExperimentConfig, run_fixed_restarts

LAMBDAS = [1, 2, 5, 10, 20, 50, 100]

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--lambdas", type=float, nargs="+", default=LAMBDAS)
    args = p.parse_args()
    grid = [TrajectoryParams("alg0", lam) for lam in args.lambdas]
    cfg = ExperimentConfig(args.sizes, grid, nreal=args.nreal,
                           restarts_per_sample=restarts(args.restarts), master_seed=args.master_seed)
    report(run_fixed_restarts(cfg, workers=args.workers), args.out)
