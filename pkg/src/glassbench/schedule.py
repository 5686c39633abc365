"""Exponential acceptance densities and their annealing schedules.

Every density used by the dynamics has the form

    f(x) = w_neg * a * exp(a * x)        for x <= 0
    f(x) = w_pos * b * exp(-b * x)       for x >  0

with ``w_neg + w_pos == 1``.  The one-sided density is the case ``w_neg == 1``.
In terms of the constants of the individual algorithms, ``c1(t) = a * w_neg``
and ``c2 = b * w_pos`` for algorithms 1 and 2, while algorithm 3 has
``w_neg = 1/lambda1(t)`` and ``w_pos = 1/lambda2(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class Variant(str, Enum):
    ALG0 = "alg0"
    ALG1 = "alg1"
    ALG2 = "alg2"
    ALG3 = "alg3"

    @property
    def code(self) -> int:
        return int(self.value[-1])


class Regime(str, Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED = "one_sided"


@dataclass(frozen=True)
class DensitySpec:
    kind: Regime
    lambda_neg: float
    lambda_pos: float | None = None
    weight_neg: float = 1.0

    def __post_init__(self):
        if not self.lambda_neg > 0:
            raise ValueError(f"lambda_neg must be positive, got {self.lambda_neg}")
        if self.kind is Regime.ONE_SIDED:
            if self.weight_neg != 1.0 or self.lambda_pos is not None:
                raise ValueError("one-sided density has weight_neg == 1 and no positive rate")
        else:
            if self.lambda_pos is None or not self.lambda_pos > 0:
                raise ValueError("two-sided density needs a positive lambda_pos")
            if not 0 < self.weight_neg <= 1:
                raise ValueError(f"weight_neg must lie in (0, 1], got {self.weight_neg}")

    @property
    def weight_pos(self) -> float:
        return 1.0 - self.weight_neg


def one_sided(rate: float) -> DensitySpec:
    return DensitySpec(Regime.ONE_SIDED, float(rate))


@dataclass(frozen=True)
class ScheduleState:
    variant: Variant
    t: int
    k: float
    m: float
    lambda1_0: float
    lambda2_0: float
    regime: Regime
    # Current rates and weights; frozen once the regime is one-sided.
    lambda_neg: float
    lambda2: float
    weight_pos: float

    @property
    def weight_neg(self) -> float:
        return 1.0 - self.weight_pos

    @property
    def frozen_lambda_neg(self) -> float | None:
        return self.lambda_neg if self.regime is Regime.ONE_SIDED else None

    def density(self) -> DensitySpec:
        if self.regime is Regime.ONE_SIDED:
            return one_sided(self.lambda_neg)
        return DensitySpec(Regime.TWO_SIDED, self.lambda_neg, self.lambda2, self.weight_neg)


def _switches(variant: Variant, weight_pos: float, m: float) -> bool:
    return variant in (Variant.ALG2, Variant.ALG3) and (1.0 - weight_pos) > m * weight_pos


def init_schedule(variant, lambda1_0: float, k: float = 0.98, m: float = 1000.0) -> ScheduleState:
    variant = Variant(variant)
    if not lambda1_0 > 0:
        raise ValueError(f"lambda1_0 must be positive, got {lambda1_0}")
    if variant is Variant.ALG0:
        return ScheduleState(variant, 0, k, m, lambda1_0, math.nan, Regime.ONE_SIDED,
                             lambda1_0, math.nan, 0.0)
    if not 0 < k < 1:
        raise ValueError(f"k must lie in (0, 1), got {k}")
    if not m > 0:
        raise ValueError(f"m must be positive, got {m}")
    if variant is Variant.ALG3:
        if not lambda1_0 > 1:
            raise ValueError(f"alg3 needs lambda1_0 > 1, got {lambda1_0}")
        lambda2_0 = lambda1_0 / (lambda1_0 - 1.0)
        weight_pos = 1.0 / lambda2_0
    else:
        # Equal probability of decreasing and increasing moves at t = 0.
        lambda2_0 = lambda1_0
        weight_pos = 0.5
    regime = Regime.ONE_SIDED if _switches(variant, weight_pos, m) else Regime.TWO_SIDED
    return ScheduleState(variant, 0, k, m, lambda1_0, lambda2_0, regime,
                         lambda1_0, lambda2_0, weight_pos)


def advance(s: ScheduleState) -> ScheduleState:
    """One tick of the geometric schedule lambda2(t) = lambda2(0) / k**t.

    The rates stop evolving once the regime is one-sided; the returned state
    then differs from ``s`` only in ``t``.
    """
    t = s.t + 1
    if s.regime is Regime.ONE_SIDED:
        return replace(s, t=t)
    kt = s.k ** float(t)
    lambda2 = s.lambda2_0 / kt if kt > 0.0 else math.inf
    if s.variant is Variant.ALG3:
        weight_pos = 1.0 / lambda2
        lambda_neg = lambda2 / (lambda2 - 1.0)
    else:
        weight_pos = 0.5 * kt
        lambda_neg = s.lambda1_0
    regime = Regime.ONE_SIDED if _switches(s.variant, weight_pos, s.m) else Regime.TWO_SIDED
    return replace(s, t=t, regime=regime, lambda_neg=lambda_neg, lambda2=lambda2,
                   weight_pos=weight_pos)


def schedule_at(variant, lambda1_0: float, k: float, t: int, m: float = 1000.0) -> ScheduleState:
    s = init_schedule(variant, lambda1_0, k, m)
    for _ in range(t):
        s = advance(s)
    return s


def crossing_time(variant, lambda1_0: float, k: float, m: float = 1000.0, limit: int = 10**7) -> int:
    """First t at which the schedule is one-sided, found by iteration."""
    s = init_schedule(variant, lambda1_0, k, m)
    while s.regime is Regime.TWO_SIDED:
        if s.t >= limit:
            raise RuntimeError("regime switch not reached")
        s = advance(s)
    return s.t


def density_value(d: DensitySpec, x: float) -> float:
    if x <= 0:
        return d.weight_neg * d.lambda_neg * math.exp(d.lambda_neg * x)
    if d.kind is Regime.ONE_SIDED:
        return 0.0
    return d.weight_pos * d.lambda_pos * math.exp(-d.lambda_pos * x)


def tail_probability(d: DensitySpec, x: float) -> float:
    """P(D >= x) for a positive threshold x."""
    if not x > 0:
        raise ValueError(f"tail threshold must be positive, got {x}")
    if d.kind is Regime.ONE_SIDED:
        return 0.0
    return d.weight_pos * math.exp(-d.lambda_pos * x)


def _magnitude(u: float, rate: float) -> float:
    # u in [0, 1) so 1 - u in (0, 1].
    return -math.log1p(-u) / rate


def sample(d: DensitySpec, rng) -> float:
    """Inverse-CDF draw; always consumes exactly two uniforms."""
    u_side = rng.random()
    u_mag = rng.random()
    if u_side < d.weight_neg:
        return -_magnitude(u_mag, d.lambda_neg)
    return _magnitude(u_mag, d.lambda_pos)


def conditional_sample(d: DensitySpec, side: str, rng) -> float:
    """Draw from the density restricted to one side; consumes one uniform."""
    if side == "negative":
        return -_magnitude(rng.random(), d.lambda_neg)
    if side != "positive":
        raise ValueError(f"side must be 'negative' or 'positive', got {side!r}")
    if d.kind is Regime.ONE_SIDED:
        raise ValueError("one-sided density has no positive support")
    return _magnitude(rng.random(), d.lambda_pos)


def density_table(variant, lambda1_0: float, k: float, times, grid, m: float = 1000.0):
    """Rows (t, x, f_t(x)) for each requested time on a fixed x grid."""
    rows = []
    s = init_schedule(variant, lambda1_0, k, m)
    for t in sorted(set(int(t) for t in times)):
        while s.t < t:
            s = advance(s)
        d = s.density()
        rows.extend((t, float(x), density_value(d, float(x))) for x in np.asarray(grid, dtype=float))
    return rows
