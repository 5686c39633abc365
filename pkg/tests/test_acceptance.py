"""Acceptance criteria, one test each, every one at its stated tolerance.

Each test records a PASS/FAIL line that the terminal summary prints.  Step
limit counts from every run here are tallied for the termination criterion.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from glassbench.dynamics import Termination, TrajectoryParams, run_trajectory
from glassbench.harness import (
    ExperimentConfig,
    StreamRole,
    derive_seed,
    fit_rows,
    run_fixed_restarts,
    write_results_csv,
)
from glassbench.oracle import exact_ground_state, replay_validate
from glassbench.schedule import Regime, crossing_time, density_value, schedule_at
from glassbench.sk import EnergyState, apply_flip, generate_couplings, random_spins, recompute_error

pytestmark = pytest.mark.slow

SIZES = [25, 50, 75, 100, 150, 200]
MAX_STEPS = 10**6
STEP_LIMITS: dict[str, int] = {}

SWEEP_POINTS = {
    ("alg0", 1.0, 0.98): TrajectoryParams("alg0", 1.0),
    ("alg0", 100.0, 0.98): TrajectoryParams("alg0", 100.0),
    ("alg2", 1.0, 0.98): TrajectoryParams("alg2", 1.0, k=0.98),
    ("alg2", 1.0, 0.99): TrajectoryParams("alg2", 1.0, k=0.99),
    ("alg2", 1.0, 0.995): TrajectoryParams("alg2", 1.0, k=0.995),
    ("alg3", 2.0, 0.98): TrajectoryParams("alg3", 2.0, k=0.98),
    ("alg3", 100.0, 0.995): TrajectoryParams("alg3", 100.0, k=0.995),
}


def tally(name, count):
    STEP_LIMITS[name] = STEP_LIMITS.get(name, 0) + int(count)


@pytest.fixture(scope="module")
def sweep():
    cfg = ExperimentConfig(SIZES, list(SWEEP_POINTS.values()), nreal=50,
                           restarts_per_sample="min(N,25)", master_seed=1)
    assert all(p.max_steps == MAX_STEPS for p in cfg.params_grid)
    rows = run_fixed_restarts(cfg, workers=None)
    tally("exponent sweep", sum(r.step_limit_count for r in rows))
    return dict(fit_rows(rows))


def within(x, target, tol):
    return abs(x - target) <= tol


def test_c1_alg0_exponents(sweep, report):
    lo, hi = sweep[("alg0", 1.0, 0.98)], sweep[("alg0", 100.0, 0.98)]
    ok = (within(lo.exponent, 1.027, 0.20) and within(hi.exponent, 1.932, 0.25)
          and lo.r_squared >= 0.95 and hi.r_squared >= 0.95)
    report("C1 alg0 exponents", ok,
           f"lambda=1 a={lo.exponent:.3f} (1.027+-0.20) r2={lo.r_squared:.4f}; "
           f"lambda=100 a={hi.exponent:.3f} (1.932+-0.25) r2={hi.r_squared:.4f}")
    assert ok


def test_c2_alg2_trend(sweep, report):
    target = {0.98: 0.549, 0.99: 0.475, 0.995: 0.299}
    a = {k: sweep[("alg2", 1.0, k)].exponent for k in target}
    ranked = a[0.98] > a[0.99] > a[0.995]
    close = all(within(a[k], target[k], 0.25) for k in target)
    report("C2 alg2 trend in k", ranked and close,
           ", ".join(f"k={k}: a={a[k]:.3f} ({target[k]}+-0.25)" for k in target)
           + f"; strictly decreasing={ranked}")
    assert ranked and close


def test_c3_alg3_exponents(sweep, report):
    a = sweep[("alg3", 2.0, 0.98)].exponent
    b = sweep[("alg3", 100.0, 0.995)].exponent
    ok = within(a, 0.531, 0.20) and within(b, 0.220, 0.15)
    report("C3 alg3 exponents", ok,
           f"(2, 0.98) a={a:.3f} (0.531+-0.20); (100, 0.995) a={b:.3f} (0.220+-0.15)")
    assert ok


def test_c4_oracle_equivalence(report):
    n, nreal, master = 12, 50, 4
    cfg = ExperimentConfig([n], [TrajectoryParams("alg2", 1.0, k=0.995)], nreal=nreal,
                           restarts_per_sample=240, master_seed=master)
    (row,) = run_fixed_restarts(cfg, workers=None)
    tally("oracle equivalence", row.step_limit_count)
    ground = np.array([exact_ground_state(generate_couplings(
        n, derive_seed(master, r, 0, StreamRole.DISORDER)))[1] / n for r in range(nreal)])
    hits = np.abs(row.per_realization_best - ground) * n <= 1e-9
    gap = abs(row.h_n_mean - ground.mean())
    ok = hits.mean() >= 0.95 and gap <= 0.02
    report("C4 oracle equivalence N=12", ok,
           f"exact hits {hits.sum()}/{nreal} (>=95%), |h_n_mean - oracle| = {gap:.2e} (<=0.02)")
    assert ok


def prefix_tuples():
    sizes, lams, ks = [16, 24, 32, 48, 64], [1.0, 2.0, 5.0, 10.0], [0.98, 0.99, 0.995]
    for i in range(100):
        yield i, sizes[i % 5], lams[(i // 5) % 4], ks[i % 3]


def test_c5_prefix_coincidence(report):
    master, mismatches, limited = 77, [], 0
    for i, n, lam, k in prefix_tuples():
        J = generate_couplings(n, derive_seed(master, i, 0, StreamRole.DISORDER))
        s0 = random_spins(n, np.random.default_rng(derive_seed(master, i, 0, StreamRole.INITIAL)))
        seed = derive_seed(master, i, 0, StreamRole.DYNAMICS)
        a = run_trajectory(J, s0, TrajectoryParams("alg1", lam, k=k, record_mode="full"), seed=seed)
        b = run_trajectory(J, s0, TrajectoryParams("alg2", lam, k=k, record_mode="full"), seed=seed)
        limited += (a.termination is Termination.STEP_LIMIT) + (b.termination is Termination.STEP_LIMIT)
        # alg1 halts at its first one-flip-stable configuration.
        same = (a.termination is Termination.STABLE_STOP
                and b.steps[: len(a.steps)].tobytes() == a.steps.tobytes()
                and len(b.visited_minima) > 0 and b.visited_minima["t"][0] == a.draws)
        if not same:
            mismatches.append(i)
    tally("prefix coincidence", limited)
    report("C5 alg1/alg2 prefix coincidence", not mismatches,
           f"{100 - len(mismatches)}/100 tuples identical through the first minimum")
    assert not mismatches


def test_c6_crossing_time(report):
    m = 1000.0
    got = {k: crossing_time("alg2", 1.0, k, m) for k in (0.98, 0.99, 0.995)}
    closed = {k: math.ceil(math.log(2.0 / (m + 1)) / math.log(k)) for k in got}
    ok = got == closed and got[0.98] == 308
    report("C6 regime switch time", ok,
           ", ".join(f"k={k}: t*={got[k]} (closed form {closed[k]})" for k in got))
    assert ok


def _normalization_error(s):
    d = s.density()
    neg = integrate.quad(lambda x: density_value(d, x), -60.0 / d.lambda_neg, 0.0, epsabs=1e-13)[0]
    pos = 0.0
    if d.kind is Regime.TWO_SIDED:
        pos = integrate.quad(lambda x: density_value(d, x), 1e-300, 60.0 / d.lambda_pos, epsabs=1e-13)[0]
    return abs(neg + pos - 1.0)


def test_c7_numerical_hygiene(report, tmp_path):
    rng = np.random.default_rng(7)

    # Density normalization over random reachable schedule states.
    worst_norm = 0.0
    for _ in range(1000):
        variant = ["alg1", "alg2", "alg3"][rng.integers(3)]
        lam = float(rng.uniform(1.05, 100.0)) if variant == "alg3" else float(10 ** rng.uniform(-1, 2))
        k = float(rng.uniform(0.9, 0.999))
        s = schedule_at(variant, lam, k, int(rng.integers(0, 1500)))
        worst_norm = max(worst_norm, _normalization_error(s))

    # Incremental energy against recomputation over 1e5 flips.
    J = generate_couplings(100, 3)
    state = EnergyState.from_spins(J, random_spins(100, rng))
    worst_drift = 0.0
    for step, i in enumerate(rng.integers(0, 100, size=100_000), start=1):
        apply_flip(state, int(i))
        if step % 1000 == 0:
            worst_drift = max(worst_drift, max(recompute_error(state)))

    # Replay of fresh full trajectories.
    replays, limited = 0, 0
    points = [("alg0", 1.0), ("alg0", 100.0), ("alg1", 1.0), ("alg2", 1.0), ("alg3", 2.0), ("alg3", 100.0)]
    for r in range(100):
        variant, lam = points[r % len(points)]
        n = 30 + 10 * (r % 5)
        Jr = generate_couplings(n, derive_seed(8, r, 0, StreamRole.DISORDER))
        s0 = random_spins(n, np.random.default_rng(derive_seed(8, r, 0, StreamRole.INITIAL)))
        tr = run_trajectory(Jr, s0, TrajectoryParams(variant, lam, k=0.99, record_mode="full"),
                            seed=derive_seed(8, r, 0, StreamRole.DYNAMICS))
        limited += tr.termination is Termination.STEP_LIMIT
        replays += bool(replay_validate(Jr, tr, s0))

    # Worker-count invariance.
    cfg = ExperimentConfig([25, 50, 75], [TrajectoryParams("alg2", 1.0), TrajectoryParams("alg3", 10.0, k=0.99)],
                           nreal=8, restarts_per_sample=5, master_seed=9)
    rows1 = run_fixed_restarts(cfg, workers=1)
    rows8 = run_fixed_restarts(cfg, workers=8)
    write_results_csv(tmp_path / "w1.csv", rows1)
    write_results_csv(tmp_path / "w8.csv", rows8)
    identical = (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w8.csv").read_bytes()
    limited += sum(r.step_limit_count for r in rows1 + rows8)
    tally("numerical hygiene", limited)

    ok = worst_norm <= 1e-6 and worst_drift <= 1e-9 and replays == 100 and identical
    report("C7 numerical hygiene", ok,
           f"max |norm-1|={worst_norm:.1e}, max drift={worst_drift:.1e}, replays {replays}/100, "
           f"results.csv 1 vs 8 workers identical={identical}")
    assert ok


def test_c8_no_step_limits(report):
    total = sum(STEP_LIMITS.values())
    ok = total == 0 and len(STEP_LIMITS) > 0
    report("C8 termination", ok,
           f"{total} step_limit terminations (max_steps={MAX_STEPS}) across: "
           + ", ".join(f"{k}={v}" for k, v in STEP_LIMITS.items()))
    assert ok
