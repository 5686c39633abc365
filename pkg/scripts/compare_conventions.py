"""Exponents under each choice of spectrum units and empty-class handling.

Runs the same parameter points four times so the effect of the two
convention switches on the fitted exponents can be read off directly.
"""

from _common import parser, report, restarts

from glassbench.dynamics import TrajectoryParams
from glassbench.harness import ExperimentConfig, run_fixed_restarts

POINTS = [("alg0", 1.0, 0.98), ("alg0", 100.0, 0.98), ("alg2", 1.0, 0.98),
          ("alg2", 1.0, 0.995), ("alg3", 2.0, 0.98), ("alg3", 100.0, 0.995)]

if __name__ == "__main__":
    p = parser(__doc__)
    p.set_defaults(nreal=20, restarts="10")
    args = p.parse_args()
    for scale in ("sqrt_n", "unit"):
        for empty in ("skip", "conditional"):
            print(f"\nspectrum_scale={scale} empty_class={empty}")
            grid = [TrajectoryParams(v, lam, k=k, spectrum_scale=scale, empty_class=empty)
                    for v, lam, k in POINTS]
            cfg = ExperimentConfig(args.sizes, grid, nreal=args.nreal,
                                   restarts_per_sample=restarts(args.restarts),
                                   master_seed=args.master_seed)
            report(run_fixed_restarts(cfg, workers=args.workers))
