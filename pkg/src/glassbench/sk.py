"""Sherrington-Kirkpatrick instances and incrementally maintained energy state.

Energies follow H(J, s) = -(1/sqrt(N)) * sum_{i<j} J_ij s_i s_j.  The flip
spectrum is kept in the unnormalized convention dE_i = s_i * sum_{j!=i} J_ij s_j;
the exact Hamiltonian change on flipping i is (2/sqrt(N)) * dE_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Identifies the exact draw sequence used to fill a coupling matrix.
COUPLING_METHOD = "numpy-pcg64/standard_normal/triu-rowmajor"


@dataclass(frozen=True)
class CouplingMatrix:
    n: int
    values: np.ndarray
    seed: int
    method: str = COUPLING_METHOD

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.n)


def generate_couplings(n: int, seed: int) -> CouplingMatrix:
    """Draw a symmetric Gaussian coupling matrix with zero diagonal.

    The upper triangle is filled in row-major order from a PCG64 stream
    seeded with ``seed``; identical ``(n, seed)`` give bit-identical matrices.
    """
    if n < 1:
        raise ValueError(f"invalid size n={n}, need n >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    values = np.zeros((n, n), dtype=np.float64)
    iu = np.triu_indices(n, k=1)
    values[iu] = rng.standard_normal(len(iu[0]))
    values.T[iu] = values[iu]
    values.setflags(write=False)
    return CouplingMatrix(n=n, values=values, seed=int(seed))


def coupling_from_array(values, seed: int = -1) -> CouplingMatrix:
    """Wrap a user-supplied symmetric matrix (used in tests and small examples)."""
    values = np.array(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 1:
        raise ValueError("coupling matrix must be square and non-empty")
    if not np.array_equal(values, values.T):
        raise ValueError("coupling matrix must be symmetric")
    if np.any(np.diag(values) != 0):
        raise ValueError("coupling matrix must have zero diagonal")
    values.setflags(write=False)
    return CouplingMatrix(n=values.shape[0], values=values, seed=seed, method="explicit")


def as_spins(spins, n: int | None = None) -> np.ndarray:
    """Validate a +/-1 vector and return it as an int8 array."""
    arr = np.asarray(spins)
    if arr.ndim != 1:
        raise ValueError("spin configuration must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"spin configuration has length {arr.shape[0]}, expected {n}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spin entries must be exactly -1 or +1")
    return arr.astype(np.int8)


def random_spins(n: int, rng: np.random.Generator) -> np.ndarray:
    return (2 * rng.integers(0, 2, size=n) - 1).astype(np.int8)


def hamiltonian(J: CouplingMatrix, spins) -> float:
    s = as_spins(spins, J.n).astype(np.float64)
    return float(-0.5 * (s @ J.values @ s) / J.sqrt_n)


def local_fields(J: CouplingMatrix, spins) -> np.ndarray:
    s = as_spins(spins, J.n).astype(np.float64)
    return J.values @ s


@dataclass
class EnergyState:
    """Spin configuration plus cached local fields, energy and flip counter.

    Single owner: one trajectory mutates one state.
    """

    J: CouplingMatrix
    spins: np.ndarray
    fields: np.ndarray
    energy: float
    flips: int = 0

    @classmethod
    def from_spins(cls, J: CouplingMatrix, spins) -> "EnergyState":
        s = as_spins(spins, J.n).copy()
        fields = J.values @ s.astype(np.float64)
        energy = float(-0.5 * (s.astype(np.float64) @ fields) / J.sqrt_n)
        return cls(J=J, spins=s, fields=fields, energy=energy)

    def copy(self) -> "EnergyState":
        return EnergyState(self.J, self.spins.copy(), self.fields.copy(), self.energy, self.flips)

    @property
    def n(self) -> int:
        return self.J.n


def delta_spectrum(state: EnergyState) -> np.ndarray:
    return state.spins * state.fields


def exact_deltas(state: EnergyState) -> np.ndarray:
    """Exact Hamiltonian change for each single flip."""
    return (2.0 / state.J.sqrt_n) * delta_spectrum(state)


def apply_flip(state: EnergyState, i: int) -> EnergyState:
    """Flip spin ``i`` in place, updating fields and energy in O(N)."""
    if not 0 <= i < state.n:
        raise ValueError(f"site index {i} out of range for N={state.n}")
    de = state.spins[i] * state.fields[i]
    state.energy += (2.0 / state.J.sqrt_n) * de
    state.spins[i] = -state.spins[i]
    # J_ii == 0, so the row update leaves fields[i] untouched.
    state.fields += (2.0 * state.spins[i]) * state.J.values[i]
    state.flips += 1
    return state


def min_delta(state: EnergyState) -> tuple[int, float]:
    spectrum = delta_spectrum(state)
    i = int(np.argmin(spectrum))  # argmin returns the first minimizer
    return i, float(spectrum[i])


def is_one_flip_stable(state: EnergyState) -> bool:
    # Zero entries count as stable.
    return not bool(np.any(delta_spectrum(state) < 0))


def recompute_error(state: EnergyState) -> tuple[float, float]:
    """Max field deviation and energy deviation against a from-scratch evaluation."""
    fields = local_fields(state.J, state.spins)
    return (
        float(np.max(np.abs(fields - state.fields))),
        abs(hamiltonian(state.J, state.spins) - state.energy),
    )
