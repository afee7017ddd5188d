import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tonksqsl.errors import GridTooSmallError, InvalidArgumentError, InvalidStateError
from tonksqsl.spectral import (
    OrbitalSet,
    PotentialSpec,
    ansatz_width,
    apply_hamiltonian,
    apply_kinetic,
    build_grid,
    eigen_residuals,
    fix_phase,
    hamiltonian_matrix,
    orbital_widths,
    slater_energy_stats,
    stationary_states,
)
from tonksqsl.sta import ansatz_energy

# E0 of -1/2 d^2 + 1/2 x^4, converged on [-12, 12] with 4096 points
QUARTIC_E0 = 0.530181045


class TestGrid:
    def test_small_example(self):
        g = build_grid(10, 5, min_points=5)
        np.testing.assert_allclose(g.x, [-10, -5, 0, 5, 10])
        assert g.dx == 5

    def test_dx(self):
        assert build_grid(12, 1024).dx == pytest.approx(24 / 1023, rel=1e-15)

    @pytest.mark.parametrize("half, m", [(0, 64), (-1, 64), (5, 8), (5, 64.5)])
    def test_rejects(self, half, m):
        with pytest.raises(InvalidArgumentError):
            build_grid(half, m)

    def test_default_minimum(self):
        with pytest.raises(InvalidArgumentError):
            build_grid(10, 5)

    def test_wavenumbers_fft_order(self):
        g = build_grid(4, 16)
        assert g.k[0] == 0
        assert g.k[1] > 0 and g.k[-1] < 0


class TestPotential:
    def test_values(self):
        g = build_grid(2, 5, min_points=5)
        np.testing.assert_allclose(PotentialSpec(2, 3.0)(g), 1.5 * g.x**4)
        np.testing.assert_allclose(PotentialSpec(1, 1.0, x0=1.0)(g), 0.5 * (g.x - 1) ** 2)

    @pytest.mark.parametrize("q, lam", [(0, 1.0), (1.5, 1.0), (2, 0.0), (2, float("nan"))])
    def test_rejects(self, q, lam):
        with pytest.raises(InvalidArgumentError):
            PotentialSpec(q, lam)


    def test_inverted_trap_allowed(self):
        g = build_grid(2, 5, min_points=5)
        np.testing.assert_allclose(PotentialSpec(2, -2.0)(g), -g.x**4)
        with pytest.raises(InvalidArgumentError):
            stationary_states(build_grid(6, 64), PotentialSpec(2, -2.0), 1)


class TestOperators:
    def test_kinetic_of_plane_wave(self):
        g = build_grid(np.pi, 65)
        # periodic with period n_points * dx; pick a commensurate wave
        k = 2 * np.pi * 3 / (g.n_points * g.dx)
        psi = np.exp(1j * k * g.x)
        np.testing.assert_allclose(apply_kinetic(psi, g), 0.5 * k**2 * psi, atol=1e-10)

    def test_matrix_matches_operator(self):
        g = build_grid(5, 64)
        pot = PotentialSpec(2, 2.0)
        rng = np.random.default_rng(1)
        psi = rng.normal(size=g.n_points) + 1j * rng.normal(size=g.n_points)
        np.testing.assert_allclose(hamiltonian_matrix(g, pot) @ psi,
                                   apply_hamiltonian(psi, g, pot), atol=1e-9)

    def test_matrix_hermitian(self):
        h = hamiltonian_matrix(build_grid(5, 64), PotentialSpec(2, 1.0))
        np.testing.assert_allclose(h, h.conj().T, atol=1e-12)

    def test_fix_phase(self):
        psi = np.array([[0.1, -2.0j, 0.3]])
        out = fix_phase(psi)
        assert out[0, 1] == pytest.approx(2.0)
        np.testing.assert_allclose(np.abs(out), np.abs(psi))

    def test_fix_phase_tie_goes_left(self):
        out = fix_phase(np.array([[-1.0, 0.0, 1.0]]))
        np.testing.assert_allclose(out[0], [1.0, 0.0, -1.0])


class TestStationaryStates:
    def test_harmonic_spectrum(self):
        orbs = stationary_states(build_grid(12, 256), PotentialSpec(1, 1.0), 31)
        np.testing.assert_allclose(orbs.energies, np.arange(31) + 0.5, atol=1e-4)

    def test_quartic_ground_energy(self):
        orbs = stationary_states(build_grid(6, 256), PotentialSpec(2, 1.0), 1)
        assert orbs.energies[0] == pytest.approx(QUARTIC_E0, abs=1e-6)
        assert round(orbs.energies[0], 4) == 0.5302

    def test_orthonormal_and_normalized(self):
        orbs = stationary_states(build_grid(6, 256), PotentialSpec(2, 1.0), 20)
        assert orbs.orthonormality_error() < 1e-8
        norms = np.sum(np.abs(orbs.amplitudes) ** 2, axis=1) * orbs.grid.dx
        np.testing.assert_allclose(norms, 1.0, atol=1e-10)

    def test_residuals(self):
        pot = PotentialSpec(2, 1.0)
        orbs = stationary_states(build_grid(6, 256), pot, 10)
        assert np.max(eigen_residuals(orbs, pot)) < 1e-8

    def test_phase_convention(self):
        orbs = stationary_states(build_grid(6, 128), PotentialSpec(2, 1.0), 4)
        for psi in orbs.amplitudes:
            peak = psi[np.argmax(np.abs(psi) >= np.abs(psi).max() * (1 - 1e-8))]
            assert peak.real > 0 and abs(peak.imag) < 1e-14

    def test_leakage_names_index(self):
        with pytest.raises(GridTooSmallError) as info:
            stationary_states(build_grid(3, 128), PotentialSpec(2, 1.0), 10)
        assert info.value.index <= 9

    def test_virial_quartic(self):
        g = build_grid(7, 512)
        pot = PotentialSpec(2, 1.0)
        orbs = stationary_states(g, pot, 30)
        kin = np.sum(orbs.amplitudes.conj() * apply_kinetic(orbs.amplitudes, g), axis=1).real * g.dx
        v = np.sum(np.abs(orbs.amplitudes) ** 2 * pot(g), axis=1) * g.dx
        np.testing.assert_allclose(kin, 2 * v, rtol=1e-3)

    def test_close_to_ansatz_energies(self):
        orbs = stationary_states(build_grid(8, 512), PotentialSpec(2, 1.0), 51)
        ansatz = np.array([ansatz_energy(n, 1.0) for n in range(51)])
        assert np.max(np.abs(ansatz / orbs.energies - 1)) < 0.05


class TestEnergyStats:
    def test_eigenstates_have_no_spread(self):
        pot = PotentialSpec(2, 1.0)
        orbs = stationary_states(build_grid(6, 256), pot, 5)
        mean, std = slater_energy_stats(orbs, pot)
        assert mean == pytest.approx(np.sum(orbs.energies), abs=1e-9)
        assert std < 1e-6

    def test_harmonic_ground(self):
        pot = PotentialSpec(1, 1.0)
        orbs = stationary_states(build_grid(12, 256), pot, 1)
        mean, std = slater_energy_stats(orbs, pot)
        assert mean == pytest.approx(0.5, abs=1e-6)
        assert std < 1e-6

    def test_invariant_under_occupied_rotation(self, quartic_pair, random_unitary):
        a, _ = quartic_pair
        pot = PotentialSpec(2, 8.0)
        u = random_unitary(2, np.random.default_rng(3))
        rotated = OrbitalSet(a.grid, u @ a.amplitudes)
        np.testing.assert_allclose(slater_energy_stats(rotated, pot),
                                   slater_energy_stats(a, pot), rtol=1e-12)

    def test_rejects_non_orthonormal(self, quartic_grid):
        psi = np.exp(-quartic_grid.x**2)
        with pytest.raises(InvalidStateError):
            slater_energy_stats(OrbitalSet(quartic_grid, [psi, psi]), PotentialSpec(2, 1.0))


class TestWidths:
    def test_examples(self):
        assert ansatz_width(0, 1) == pytest.approx((1.0, 3 ** (-1 / 6)), rel=1e-12)
        assert ansatz_width(0, 1)[1] == pytest.approx(0.8327, abs=1e-4)
        ho, qu = ansatz_width(1, 1)
        assert ho == pytest.approx(1.732, abs=1e-3)
        assert qu == pytest.approx(1.3250, abs=1e-3)

    def test_rejects(self):
        with pytest.raises(InvalidArgumentError):
            ansatz_width(0, 0.0)
        with pytest.raises(InvalidArgumentError):
            ansatz_width(-1, 1.0)

    def test_numerical_widths_track_approximation(self):
        # sigma_ho = sqrt(2n+1) is sqrt(2) times the rms width of a harmonic state
        orbs = stationary_states(build_grid(8, 512), PotentialSpec(2, 1.0), 51)
        approx = np.array([ansatz_width(n, 1.0)[1] for n in range(51)])
        ratio = np.sqrt(2) * orbital_widths(orbs) / approx
        assert np.max(np.abs(ratio - 1)) < 0.05

    def test_harmonic_rms_width(self):
        orbs = stationary_states(build_grid(12, 256), PotentialSpec(1, 1.0), 10)
        sigma = np.array([ansatz_width(n, 1.0)[0] for n in range(10)])
        np.testing.assert_allclose(np.sqrt(2) * orbital_widths(orbs), sigma, rtol=1e-6)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(0, 60), lam=st.floats(0.1, 50))
    def test_quartic_width_scaling(self, n, lam):
        # sigma_quartic scales as lam^(-1/6)
        _, s1 = ansatz_width(n, lam)
        _, s2 = ansatz_width(n, 64 * lam)
        assert s2 == pytest.approx(s1 / 2, rel=1e-12)
