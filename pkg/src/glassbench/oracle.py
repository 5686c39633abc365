"""Exhaustive ground truth for small instances.

Configurations are enumerated in Gray-code order so consecutive ones differ
by a single flip and energies/fields update in O(N).  A configuration is
packed into an integer with bit i set when spin i is -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .dynamics import Termination, Trajectory, Variant
from .schedule import schedule_at, tail_probability
from .sk import CouplingMatrix, as_spins, hamiltonian, local_fields

GROUND_STATE_MAX_N = 24
CENSUS_MAX_N = 20
REPLAY_TOL = 1e-9


class SizeLimitError(ValueError):
    pass


def unpack(bits: int, n: int) -> np.ndarray:
    return np.array([-1 if (bits >> i) & 1 else 1 for i in range(n)], dtype=np.int8)


def pack(spins) -> int:
    return sum(1 << i for i, s in enumerate(spins) if s < 0)


@njit(cache=True)
def _gray_scan(J, n_free, collect_minima):
    """Walk 2**n_free configurations of spins 0..n_free-1 (the rest stay +1).

    Returns (best_bits, best_energy, minima_bits, minima_energy).
    """
    n = J.shape[0]
    scale = 1.0 / math.sqrt(n)
    spins = np.ones(n, dtype=np.float64)
    fields = np.zeros(n)
    for i in range(n):
        for j in range(n):
            fields[i] += J[i, j]
    energy = -0.5 * np.sum(fields) * scale
    bits = 0
    best_bits = 0
    best_e = energy
    cap = 1024 if collect_minima else 0
    mbits = np.empty(cap, dtype=np.int64)
    menergy = np.empty(cap)
    count = 0
    total = 1 << n_free
    for step in range(total):
        if step > 0:
            # Flip the lowest set bit of the step counter.
            i = 0
            while not (step >> i) & 1:
                i += 1
            energy += 2.0 * scale * spins[i] * fields[i]
            spins[i] = -spins[i]
            bits ^= 1 << i
            two_s = 2.0 * spins[i]
            for j in range(n):
                fields[j] += two_s * J[i, j]
            if energy < best_e:
                best_e = energy
                best_bits = bits
        if collect_minima:
            stable = True
            for j in range(n):
                if spins[j] * fields[j] < 0.0:
                    stable = False
                    break
            if stable:
                if count == mbits.shape[0]:
                    mbits = np.concatenate((mbits, np.empty(count, dtype=np.int64)))
                    menergy = np.concatenate((menergy, np.empty(count)))
                mbits[count] = bits
                menergy[count] = energy
                count += 1
    return best_bits, best_e, mbits[:count], menergy[:count]


def exact_ground_state(J: CouplingMatrix) -> tuple[np.ndarray, float]:
    """A ground state and its energy; spin 0 is fixed to +1 by symmetry."""
    if J.n > GROUND_STATE_MAX_N:
        raise SizeLimitError(f"exact enumeration limited to N <= {GROUND_STATE_MAX_N}, got {J.n}")
    if J.n == 1:
        return np.ones(1, dtype=np.int8), 0.0
    # Enumerate spins 1..N-1 with spin 0 pinned: permute spin 0 to the end.
    order = np.r_[1:J.n, 0]
    Jp = np.ascontiguousarray(J.values[np.ix_(order, order)])
    bits, _, _, _ = _gray_scan(Jp, J.n - 1, False)
    spins = np.empty(J.n, dtype=np.int8)
    spins[order] = unpack(int(bits), J.n)
    return spins, hamiltonian(J, spins)


@dataclass
class Census:
    n: int
    ground_energy: float
    ground_configs: list
    minima_bits: np.ndarray
    minima_energies: np.ndarray

    @property
    def counts(self) -> int:
        return int(self.minima_bits.shape[0])

    @property
    def minima(self):
        return [(unpack(int(b), self.n), float(e))
                for b, e in zip(self.minima_bits, self.minima_energies)]

    def contains(self, spins) -> bool:
        return pack(spins) in set(int(b) for b in self.minima_bits)


def enumerate_local_minima(J: CouplingMatrix, degeneracy_tol: float = 1e-9) -> Census:
    """Every one-flip-stable configuration, scanned over all 2**N states."""
    if J.n > CENSUS_MAX_N:
        raise SizeLimitError(f"census limited to N <= {CENSUS_MAX_N}, got {J.n}")
    values = np.ascontiguousarray(J.values)
    _, _, bits, energies = _gray_scan(values, J.n, True)
    # Replace accumulated Gray-walk energies with direct evaluations.
    energies = np.array([hamiltonian(J, unpack(int(b), J.n)) for b in bits])
    order = np.argsort(bits)
    bits, energies = bits[order], energies[order]
    ground = float(energies.min())
    ground_configs = [unpack(int(b), J.n) for b, e in zip(bits, energies)
                      if e <= ground + degeneracy_tol]
    return Census(J.n, ground, ground_configs, bits, energies)


@dataclass
class ReplayResult:
    ok: bool
    first_divergence: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def replay_validate(J: CouplingMatrix, tr: Trajectory, spins0, tol: float = REPLAY_TOL) -> ReplayResult:
    """Re-run the recorded flips with from-scratch evaluations at each step."""
    if tr.params.record_mode != "full":
        raise ValueError("replay needs a trajectory recorded with record_mode='full'")
    spins = as_spins(spins0, J.n).copy()
    factor = tr.params.spectrum_factor(J.n)
    alg0 = tr.params.variant is Variant.ALG0
    for idx, step in enumerate(tr.steps):
        site = int(step["site"])
        if not 0 <= site < J.n:
            return ReplayResult(False, idx, "site out of range")
        spectrum = spins * local_fields(J, spins)
        if abs(spectrum[site] - step["delta"]) > tol:
            return ReplayResult(False, idx, "spectrum entry mismatch")
        scaled = spectrum * factor
        D = step["D"]
        admissible = scaled < 0 if alg0 else scaled * D > 0
        if not admissible[site]:
            return ReplayResult(False, idx, "selected entry has the wrong sign")
        if np.abs(scaled[site] - D) > np.abs(scaled[admissible] - D).min():
            return ReplayResult(False, idx, "selected entry is not the closest to D")
        spins[site] = -spins[site]
        if abs(hamiltonian(J, spins) - step["energy"]) > tol:
            return ReplayResult(False, idx, "energy mismatch")
    n_steps = len(tr.steps)
    if tr.termination is Termination.STEP_LIMIT:
        return ReplayResult(True)
    spectrum = spins * local_fields(J, spins)
    if np.any(spectrum < 0):
        return ReplayResult(False, n_steps, "stopping configuration is not one-flip stable")
    if tr.termination is Termination.TAIL_STOP:
        sched = schedule_at(tr.params.variant, tr.params.lambda1_0, tr.params.k, tr.draws, tr.params.m)
        positive = spectrum[spectrum > 0] * factor
        if tail_probability(sched.density(), float(positive.min())) >= tr.params.epsilon:
            return ReplayResult(False, n_steps, "tail probability above epsilon at stop")
    if abs(hamiltonian(J, spins) - tr.final_energy) > tol:
        return ReplayResult(False, n_steps, "final energy mismatch")
    return ReplayResult(True)
