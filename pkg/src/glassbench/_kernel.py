"""Compiled trajectory loop.

Mirrors ``dynamics._run_python`` operation for operation so that both engines
produce bit-identical trajectories.  The kernel is resumable: it returns a
status code whenever it needs more uniforms or more record space, leaving
all state in the passed arrays.
"""

import math

import numpy as np
from numba import njit

DONE = 0
NEED_UNIFORMS = 1
STEPS_FULL = 2
MINIMA_FULL = 3

# fstate slots
F_ENERGY, F_BEST, F_LAMBDA_NEG, F_LAMBDA2, F_WEIGHT_POS = range(5)
# istate slots
(I_T, I_FLIPS, I_REGIME, I_TERM, I_NSTEPS, I_NMIN_REC, I_NMIN, I_UPOS,
 I_LAST_MIN) = range(9)
# cfg_f slots
C_LAMBDA1_0, C_LAMBDA2_0, C_K, C_M, C_EPS, C_DSCALE, C_ESCALE = range(7)
# cfg_i slots
C_VARIANT, C_SKIP, C_MAX_STEPS, C_REC_STEPS, C_REC_MINIMA = range(5)

TERM_RUNNING = -1
TERM_STABLE = 0
TERM_TAIL = 1
TERM_LIMIT = 2

STEP_COLUMNS = 7  # t, site, D, raw delta, energy, regime, lambda2


@njit(cache=True, error_model="numpy")
def run_kernel(J, spins, fields, fstate, istate, cfg_f, cfg_i, uniforms, steps, minima):
    n = spins.shape[0]
    variant = cfg_i[C_VARIANT]
    skip = cfg_i[C_SKIP] == 1
    dscale = cfg_f[C_DSCALE]
    escale = cfg_f[C_ESCALE]
    while True:
        any_neg = False
        any_pos = False
        min_pos = np.inf
        for i in range(n):
            de = spins[i] * fields[i] * dscale
            if de < 0.0:
                any_neg = True
            elif de > 0.0:
                any_pos = True
                if de < min_pos:
                    min_pos = de

        if not any_neg:
            if istate[I_LAST_MIN] != istate[I_FLIPS]:
                if cfg_i[C_REC_MINIMA] == 1:
                    if istate[I_NMIN_REC] >= minima.shape[0]:
                        return MINIMA_FULL
                    minima[istate[I_NMIN_REC], 0] = istate[I_T]
                    minima[istate[I_NMIN_REC], 1] = fstate[F_ENERGY]
                    istate[I_NMIN_REC] += 1
                istate[I_NMIN] += 1
                istate[I_LAST_MIN] = istate[I_FLIPS]
                if fstate[F_ENERGY] < fstate[F_BEST]:
                    fstate[F_BEST] = fstate[F_ENERGY]
            if variant <= 1 or istate[I_REGIME] == 1 or not any_pos:
                istate[I_TERM] = TERM_STABLE
                return DONE
            w_neg = 1.0 - fstate[F_WEIGHT_POS]
            tail = (1.0 - w_neg) * math.exp(-fstate[F_LAMBDA2] * min_pos)
            if tail < cfg_f[C_EPS]:
                istate[I_TERM] = TERM_TAIL
                return DONE

        if istate[I_T] >= cfg_i[C_MAX_STEPS]:
            istate[I_TERM] = TERM_LIMIT
            return DONE

        unconditional = skip or (any_neg and any_pos)
        need = 2 if unconditional else 1
        if istate[I_UPOS] + need > uniforms.shape[0]:
            return NEED_UNIFORMS
        if cfg_i[C_REC_STEPS] == 1 and istate[I_NSTEPS] >= steps.shape[0]:
            return STEPS_FULL

        two_sided = istate[I_REGIME] == 0
        w_neg = 1.0 - fstate[F_WEIGHT_POS] if two_sided else 1.0
        upos = istate[I_UPOS]
        if unconditional:
            negative = uniforms[upos] < w_neg
            u_mag = uniforms[upos + 1]
        else:
            negative = any_neg
            u_mag = uniforms[upos]
        istate[I_UPOS] = upos + need
        if negative:
            d = -(-math.log1p(-u_mag) / fstate[F_LAMBDA_NEG])
        else:
            d = -math.log1p(-u_mag) / fstate[F_LAMBDA2]

        best = -1
        best_dist = np.inf
        for i in range(n):
            de = spins[i] * fields[i] * dscale
            if (de < 0.0) if variant == 0 else (de * d > 0.0):
                dist = abs(de - d)
                if dist < best_dist:
                    best_dist = dist
                    best = i

        if best >= 0:
            de_raw = spins[best] * fields[best]
            fstate[F_ENERGY] += escale * de_raw
            spins[best] = -spins[best]
            two_s = 2.0 * spins[best]
            for j in range(n):
                fields[j] += two_s * J[best, j]
            istate[I_FLIPS] += 1
            if cfg_i[C_REC_STEPS] == 1:
                r = istate[I_NSTEPS]
                steps[r, 0] = istate[I_T]
                steps[r, 1] = best
                steps[r, 2] = d
                steps[r, 3] = de_raw
                steps[r, 4] = fstate[F_ENERGY]
                steps[r, 5] = istate[I_REGIME]
                steps[r, 6] = fstate[F_LAMBDA2] if two_sided else np.nan
                istate[I_NSTEPS] = r + 1

        istate[I_T] += 1
        if variant >= 1 and two_sided:
            kt = cfg_f[C_K] ** float(istate[I_T])
            if kt > 0.0:
                lambda2 = cfg_f[C_LAMBDA2_0] / kt
            else:
                lambda2 = np.inf
            if variant == 3:
                w_pos = 1.0 / lambda2
                fstate[F_LAMBDA_NEG] = lambda2 / (lambda2 - 1.0)
            else:
                w_pos = 0.5 * kt
            fstate[F_LAMBDA2] = lambda2
            fstate[F_WEIGHT_POS] = w_pos
            if variant >= 2 and (1.0 - w_pos) > cfg_f[C_M] * w_pos:
                istate[I_REGIME] = 1
