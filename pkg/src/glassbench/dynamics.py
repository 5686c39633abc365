"""Single trajectories of the annealed greedy/reluctant dynamics.

Each iteration: scan the flip spectrum, apply the variant's stop rule, draw
D from the current acceptance density, flip the site whose spectrum entry is
closest to D among entries of the same sign, then tick the schedule.

Two engines run the same loop: a compiled one (default) and a plain Python
one built from the ``sk`` and ``schedule`` primitives.  They are required to
agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import _kernel as K
from .schedule import (
    Regime,
    ScheduleState,
    Variant,
    advance,
    conditional_sample,
    init_schedule,
    sample,
    tail_probability,
)
from .sk import CouplingMatrix, EnergyState, apply_flip, as_spins, delta_spectrum

STEP_DTYPE = np.dtype([
    ("t", np.int64),
    ("site", np.int64),
    ("D", np.float64),
    ("delta", np.float64),
    ("energy", np.float64),
    ("regime", np.int8),
    ("lambda2", np.float64),
])
MINIMUM_DTYPE = np.dtype([("t", np.int64), ("energy", np.float64)])

UNIFORM_BLOCK = 1024


class Termination(str, Enum):
    STABLE_STOP = "stable_stop"
    TAIL_STOP = "tail_stop"
    STEP_LIMIT = "step_limit"


_TERM_CODES = {K.TERM_STABLE: Termination.STABLE_STOP, K.TERM_TAIL: Termination.TAIL_STOP,
               K.TERM_LIMIT: Termination.STEP_LIMIT}


@dataclass(frozen=True)
class TrajectoryParams:
    """Control parameters of one trajectory.

    ``spectrum_scale`` sets the units the dynamics work in: ``"sqrt_n"``
    divides the flip spectrum by sqrt(N) before comparing it with D,
    ``"unit"`` uses the raw spectrum.  ``empty_class`` decides what happens
    when D lands on a sign with no matching spectrum entry: ``"skip"`` makes
    no flip but still ticks the schedule, ``"conditional"`` draws D from the
    nonempty side only.
    """

    variant: Variant
    lambda1_0: float
    k: float = 0.98
    m: float = 1000.0
    epsilon: float = 1e-4
    max_steps: int = 10**6
    record_mode: str = "summary"
    spectrum_scale: str = "sqrt_n"
    empty_class: str = "skip"

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.lambda1_0 > 0:
            raise ValueError(f"lambda1_0: must be positive, got {self.lambda1_0}")
        if self.variant is not Variant.ALG0 and not 0 < self.k < 1:
            raise ValueError(f"k: must lie in (0, 1), got {self.k}")
        if self.variant is Variant.ALG3 and not self.lambda1_0 > 1:
            raise ValueError(f"lambda1_0: alg3 needs lambda1_0 > 1, got {self.lambda1_0}")
        if not self.m > 0:
            raise ValueError(f"m: must be positive, got {self.m}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon: must be positive, got {self.epsilon}")
        if int(self.max_steps) < 1:
            raise ValueError(f"max_steps: must be >= 1, got {self.max_steps}")
        if self.record_mode not in ("full", "minima_only", "summary"):
            raise ValueError(f"record_mode: unknown value {self.record_mode!r}")
        if self.spectrum_scale not in ("sqrt_n", "unit"):
            raise ValueError(f"spectrum_scale: unknown value {self.spectrum_scale!r}")
        if self.empty_class not in ("skip", "conditional"):
            raise ValueError(f"empty_class: unknown value {self.empty_class!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d

    def spectrum_factor(self, n: int) -> float:
        return 1.0 / math.sqrt(n) if self.spectrum_scale == "sqrt_n" else 1.0


@dataclass
class Trajectory:
    params: TrajectoryParams
    steps: np.ndarray
    visited_minima: np.ndarray
    minima_count: int
    final_energy: float
    best_minimum_energy: float
    termination: Termination
    flips: int
    draws: int
    final_spins: np.ndarray = field(repr=False)

    @property
    def energies(self) -> np.ndarray:
        return self.steps["energy"]


def select_site(spectrum, D: float, rule: str = "same_sign") -> int | None:
    """Index of the entry closest to D within the admissible sign class.

    ``rule="negative_only"`` admits entries < 0, ``"same_sign"`` entries
    with ``entry * D > 0``.  Returns None when no entry is admissible.
    Ties go to the lowest index.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if rule == "negative_only":
        mask = spectrum < 0
    elif rule == "same_sign":
        mask = spectrum * D > 0
    else:
        raise ValueError(f"unknown selection rule {rule!r}")
    if not mask.any():
        return None
    dist = np.where(mask, np.abs(spectrum - D), np.inf)
    return int(np.argmin(dist))


def greedy_reluctant_character(p: TrajectoryParams) -> str:
    """Report label for a parameter point; no effect on the dynamics."""
    lam = p.lambda1_0
    if lam < 10 ** 0.5:
        return "greedy-like"
    if lam > 10 ** 1.5:
        return "reluctant-like"
    return "intermediate"


class UniformStream:
    """Block-buffered uniforms; same sequence as repeated ``rng.random()``."""

    def __init__(self, rng: np.random.Generator, block: int = UNIFORM_BLOCK):
        self.rng = rng
        self.block = block
        self.buf = np.empty(0)
        self.pos = 0

    def random(self) -> float:
        if self.pos >= self.buf.shape[0]:
            self.refill()
        u = self.buf[self.pos]
        self.pos += 1
        return float(u)

    def refill(self):
        rest = self.buf[self.pos:]
        self.buf = np.concatenate([rest, self.rng.random(self.block)])
        self.pos = 0


def _as_generator(rng, seed) -> np.random.Generator:
    if rng is not None:
        return rng
    if seed is None:
        raise ValueError("pass either rng or seed")
    return np.random.Generator(np.random.PCG64(seed))


def run_trajectory(J: CouplingMatrix, spins0, params: TrajectoryParams, rng=None, *,
                   seed: int | None = None, engine: str = "compiled") -> Trajectory:
    """Run one trajectory from ``spins0`` until the variant's stop rule fires."""
    s0 = as_spins(spins0, J.n)
    rng = _as_generator(rng, seed)
    if engine == "compiled":
        return _run_compiled(J, s0, params, rng)
    if engine == "python":
        return _run_python(J, s0, params, rng)
    raise ValueError(f"unknown engine {engine!r}")


def _finish(params, steps, minima, count, state_energy, best, term, flips, draws, spins):
    return Trajectory(
        params=params,
        steps=steps,
        visited_minima=minima,
        minima_count=count,
        final_energy=float(state_energy),
        best_minimum_energy=float(best),
        termination=term,
        flips=int(flips),
        draws=int(draws),
        final_spins=spins,
    )


def _run_compiled(J, s0, params, rng):
    n = J.n
    sched = init_schedule(params.variant, params.lambda1_0, params.k, params.m)
    state = EnergyState.from_spins(J, s0)
    spins = state.spins
    fields = state.fields
    fstate = np.array([state.energy, np.inf, sched.lambda_neg, sched.lambda2, sched.weight_pos])
    istate = np.zeros(9, dtype=np.int64)
    istate[K.I_REGIME] = 0 if sched.regime is Regime.TWO_SIDED else 1
    istate[K.I_TERM] = K.TERM_RUNNING
    istate[K.I_LAST_MIN] = -1
    cfg_f = np.array([params.lambda1_0, sched.lambda2_0, params.k, params.m, params.epsilon,
                      params.spectrum_factor(n), 2.0 / math.sqrt(n)])
    rec_steps = params.record_mode == "full"
    rec_minima = params.record_mode in ("full", "minima_only")
    cfg_i = np.array([params.variant.code, 1 if params.empty_class == "skip" else 0,
                      int(params.max_steps), int(rec_steps), int(rec_minima)], dtype=np.int64)
    uniforms = np.empty(0)
    steps = np.empty((256 if rec_steps else 0, K.STEP_COLUMNS))
    minima = np.empty((64 if rec_minima else 0, 2))
    while True:
        status = K.run_kernel(J.values, spins, fields, fstate, istate, cfg_f, cfg_i,
                              uniforms, steps, minima)
        if status == K.DONE:
            break
        if status == K.NEED_UNIFORMS:
            uniforms = np.concatenate([uniforms[istate[K.I_UPOS]:], rng.random(UNIFORM_BLOCK)])
            istate[K.I_UPOS] = 0
        elif status == K.STEPS_FULL:
            steps = np.concatenate([steps, np.empty_like(steps)])
        elif status == K.MINIMA_FULL:
            minima = np.concatenate([minima, np.empty_like(minima)])

    nsteps = istate[K.I_NSTEPS]
    rec = np.empty(nsteps, dtype=STEP_DTYPE)
    for col, name in enumerate(STEP_DTYPE.names):
        rec[name] = steps[:nsteps, col]
    nmin = istate[K.I_NMIN_REC]
    mins = np.empty(nmin, dtype=MINIMUM_DTYPE)
    mins["t"] = minima[:nmin, 0]
    mins["energy"] = minima[:nmin, 1]
    return _finish(params, rec, mins, int(istate[K.I_NMIN]), fstate[K.F_ENERGY],
                   fstate[K.F_BEST], _TERM_CODES[int(istate[K.I_TERM])],
                   istate[K.I_FLIPS], istate[K.I_T], spins)


def _run_python(J, s0, params, rng):
    state = EnergyState.from_spins(J, s0)
    sched: ScheduleState = init_schedule(params.variant, params.lambda1_0, params.k, params.m)
    uniforms = UniformStream(rng)
    factor = params.spectrum_factor(J.n)
    multi = params.variant in (Variant.ALG2, Variant.ALG3)
    steps, minima = [], []
    count, best, last_min = 0, math.inf, -1
    term = None
    while True:
        spectrum = delta_spectrum(state) * factor
        any_neg = bool(np.any(spectrum < 0))
        positive = spectrum[spectrum > 0]
        if not any_neg:
            if last_min != state.flips:
                count += 1
                last_min = state.flips
                best = min(best, state.energy)
                minima.append((sched.t, state.energy))
            if not multi or sched.regime is Regime.ONE_SIDED or positive.size == 0:
                term = Termination.STABLE_STOP
                break
            if tail_probability(sched.density(), float(positive.min())) < params.epsilon:
                term = Termination.TAIL_STOP
                break
        if sched.t >= params.max_steps:
            term = Termination.STEP_LIMIT
            break

        density = sched.density()
        if params.empty_class == "skip" or (any_neg and positive.size > 0):
            D = sample(density, uniforms)
        else:
            D = conditional_sample(density, "negative" if any_neg else "positive", uniforms)
        rule = "negative_only" if params.variant is Variant.ALG0 else "same_sign"
        site = select_site(spectrum, D, rule)
        if site is not None:
            delta = float(state.spins[site] * state.fields[site])
            apply_flip(state, site)
            two_sided = sched.regime is Regime.TWO_SIDED
            steps.append((sched.t, site, D, delta, state.energy, 0 if two_sided else 1,
                          sched.lambda2 if two_sided else math.nan))
        sched = advance(sched)

    if params.record_mode != "full":
        steps = []
    if params.record_mode == "summary":
        minima = []
    return _finish(params, np.array(steps, dtype=STEP_DTYPE), np.array(minima, dtype=MINIMUM_DTYPE),
                   count, state.energy, best, term, state.flips, sched.t, state.spins)
