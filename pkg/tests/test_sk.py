import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glassbench.oracle import enumerate_local_minima
from glassbench.sk import (
    EnergyState,
    apply_flip,
    as_spins,
    delta_spectrum,
    exact_deltas,
    generate_couplings,
    hamiltonian,
    is_one_flip_stable,
    min_delta,
    random_spins,
    recompute_error,
)


def brute_energy(J, s):
    n = J.n
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += J.values[i, j] * s[i] * s[j]
    return -total / math.sqrt(n)


class TestCouplings:
    def test_one_spin_is_zero(self):
        J = generate_couplings(1, 5)
        assert J.values.shape == (1, 1)
        assert J.values[0, 0] == 0.0

    def test_two_spins_symmetric(self):
        J = generate_couplings(2, 5)
        assert J.values[0, 1] == J.values[1, 0]
        assert J.values[0, 0] == J.values[1, 1] == 0.0

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError, match="invalid size"):
            generate_couplings(0, 1)

    def test_deterministic_and_seed_sensitive(self):
        a = generate_couplings(30, 99)
        assert np.array_equal(a.values, generate_couplings(30, 99).values)
        assert not np.array_equal(a.values, generate_couplings(30, 100).values)

    def test_immutable(self):
        J = generate_couplings(4, 1)
        with pytest.raises(ValueError):
            J.values[0, 1] = 3.0

    def test_moments_n1000(self):
        J = generate_couplings(1000, 2024)
        upper = J.values[np.triu_indices(1000, k=1)]
        assert abs(upper.mean()) < 0.01
        assert abs(upper.var() - 1.0) < 0.1
        assert np.array_equal(J.values, J.values.T)
        assert not np.any(np.diag(J.values))


class TestHamiltonian:
    def test_single_spin(self):
        assert hamiltonian(generate_couplings(1, 3), [1]) == 0.0

    def test_two_spins(self, two_spin):
        assert hamiltonian(two_spin, [1, 1]) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)

    def test_matches_double_loop(self, rng):
        J = generate_couplings(10, 77)
        for _ in range(20):
            s = random_spins(10, rng)
            assert abs(hamiltonian(J, s) - brute_energy(J, s)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hamiltonian(generate_couplings(3, 1), [1, 1])

    def test_bad_spin_values(self):
        with pytest.raises(ValueError):
            as_spins([1, 0, -1])


class TestSpectrum:
    def test_two_spin_aligned(self, two_spin):
        st_ = EnergyState.from_spins(two_spin, [1, 1])
        assert delta_spectrum(st_).tolist() == [1.0, 1.0]

    def test_two_spin_antialigned(self, two_spin):
        st_ = EnergyState.from_spins(two_spin, [1, -1])
        assert delta_spectrum(st_).tolist() == [-1.0, -1.0]

    def test_flip_and_recompute(self, rng):
        J = generate_couplings(12, 31)
        s = random_spins(12, rng)
        state = EnergyState.from_spins(J, s)
        spectrum = delta_spectrum(state)
        before = hamiltonian(J, s)
        for i in range(12):
            t = s.copy()
            t[i] = -t[i]
            assert abs((2 / math.sqrt(12)) * spectrum[i] - (hamiltonian(J, t) - before)) < 1e-9
        assert np.allclose(exact_deltas(state), (2 / math.sqrt(12)) * spectrum, rtol=0, atol=1e-15)


class TestApplyFlip:
    def test_two_spin_flip(self, two_spin):
        state = apply_flip(EnergyState.from_spins(two_spin, [1, -1]), 0)
        assert state.spins.tolist() == [-1, -1]
        assert state.energy == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
        assert state.flips == 1

    def test_involution(self, rng):
        J = generate_couplings(20, 8)
        state = EnergyState.from_spins(J, random_spins(20, rng))
        ref = state.copy()
        apply_flip(state, 7)
        apply_flip(state, 7)
        assert np.array_equal(state.spins, ref.spins)
        assert abs(state.energy - ref.energy) < 1e-12

    def test_out_of_range(self, two_spin):
        state = EnergyState.from_spins(two_spin, [1, 1])
        with pytest.raises(ValueError):
            apply_flip(state, 2)
        with pytest.raises(ValueError):
            apply_flip(state, -1)

    def test_long_random_walk_stays_consistent(self):
        rng = np.random.default_rng(5)
        J = generate_couplings(100, 6)
        state = EnergyState.from_spins(J, random_spins(100, rng))
        sites = rng.integers(0, 100, size=100_000)
        for step, i in enumerate(sites, start=1):
            apply_flip(state, int(i))
            if step % 1000 == 0:
                field_err, energy_err = recompute_error(state)
                assert field_err < 1e-9 and energy_err < 1e-9, step


class TestMinDelta:
    def test_tie_goes_to_lowest_index(self, two_spin):
        assert min_delta(EnergyState.from_spins(two_spin, [1, 1])) == (0, 1.0)

    def test_explicit_spectrum(self):
        # Spectrum (-3, -1, 2) realised by a state with chosen fields.
        J = generate_couplings(3, 0)
        state = EnergyState(J, np.array([1, 1, 1], dtype=np.int8), np.array([-3.0, -1.0, 2.0]), 0.0)
        assert min_delta(state) == (0, -3.0)

    def test_scan_oracle(self, rng):
        J = generate_couplings(20, 44)
        state = EnergyState.from_spins(J, random_spins(20, rng))
        spectrum = [state.spins[i] * sum(J.values[i, j] * state.spins[j] for j in range(20) if j != i)
                    for i in range(20)]
        best = 0
        for i in range(1, 20):
            if spectrum[i] < spectrum[best]:
                best = i
        i, v = min_delta(state)
        assert i == best and abs(v - spectrum[best]) < 1e-12


class TestStability:
    def test_two_spin_cases(self, two_spin):
        assert is_one_flip_stable(EnergyState.from_spins(two_spin, [1, 1]))
        assert not is_one_flip_stable(EnergyState.from_spins(two_spin, [1, -1]))

    def test_agrees_with_census(self):
        J = generate_couplings(10, 123)
        census = enumerate_local_minima(J)
        found = []
        for s in itertools.product([1, -1], repeat=10):
            if is_one_flip_stable(EnergyState.from_spins(J, s)):
                found.append(tuple(s))
        assert sorted(found) == sorted(tuple(c.tolist()) for c, _ in census.minima)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 30), seed=st.integers(0, 2**32), flips=st.lists(st.integers(0, 10**6), max_size=60))
def test_incremental_consistency(n, seed, flips):
    J = generate_couplings(n, seed)
    state = EnergyState.from_spins(J, random_spins(n, np.random.default_rng(seed)))
    for f in flips:
        apply_flip(state, f % n)
    field_err, energy_err = recompute_error(state)
    assert field_err < 1e-9 and energy_err < 1e-9
    assert state.flips == len(flips)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 25), seed=st.integers(0, 2**32))
def test_global_flip_symmetry(n, seed):
    J = generate_couplings(n, seed)
    s = random_spins(n, np.random.default_rng(seed + 1))
    assert hamiltonian(J, s) == pytest.approx(hamiltonian(J, -s), abs=1e-12)
    a = delta_spectrum(EnergyState.from_spins(J, s))
    b = delta_spectrum(EnergyState.from_spins(J, -s))
    assert np.allclose(a, b, atol=1e-12)
