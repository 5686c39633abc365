"""Flip-count exponents of the annealed variants across lambda1 and k."""

from _common import parser, report, restarts

from glassbench.dynamics import TrajectoryParams
from glassbench.harness import ExperimentConfig, run_fixed_restarts

KS = [0.98, 0.99, 0.995]

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--variants", nargs="+", default=["alg1", "alg2", "alg3"])
    p.add_argument("--lambdas", type=float, nargs="+", default=[1.0, 2.0, 10.0, 100.0])
    p.add_argument("--ks", type=float, nargs="+", default=KS)
    p.add_argument("--empty-class", choices=["skip", "conditional"], default="skip")
    args = p.parse_args()
    grid = [TrajectoryParams(v, lam, k=k, empty_class=args.empty_class)
            for v in args.variants for lam in args.lambdas for k in args.ks
            if not (v == "alg3" and lam <= 1)]
    cfg = ExperimentConfig(args.sizes, grid, nreal=args.nreal,
                           restarts_per_sample=restarts(args.restarts), master_seed=args.master_seed)
    report(run_fixed_restarts(cfg, workers=args.workers), args.out)
