import numpy as np
import pytest

from tonksqsl.errors import InvalidArgumentError, PropagationDivergedError
from tonksqsl import propagate
from tonksqsl.manybody import many_body_fidelity
from tonksqsl.oracle import reference_integrator
from tonksqsl.propagate import RampSchedule, Trajectory, eval_ramp, evolve
from tonksqsl.spectral import PotentialSpec, build_grid, slater_energy_stats, stationary_states
from tonksqsl.sta import design_ramp


class TestRamps:
    def test_linear_midpoint(self):
        assert eval_ramp(RampSchedule.linear(1, 8, 2), 1.0) == pytest.approx(4.5)

    def test_quench_semantics(self):
        ramp = RampSchedule.constant(1, 8, 2)
        assert eval_ramp(ramp, 0.0) == 8
        assert ramp.preparation_strength == 1

    def test_sampled_endpoints(self):
        ramp = design_ramp(0, 2, 1.0, 8.0, 1.0).schedule()
        assert eval_ramp(ramp, 0.0) == pytest.approx(1.0, abs=1e-6)
        assert eval_ramp(ramp, 1.0) == pytest.approx(8.0, abs=1e-6)

    def test_sampled_interpolates(self):
        t = np.linspace(0, 1, 11)
        ramp = RampSchedule.sampled(t, 1 + t**2)
        assert eval_ramp(ramp, 0.55) == pytest.approx(1 + 0.55**2, abs=1e-12)

    @pytest.mark.parametrize("t", [-0.1, 2.1])
    def test_outside_range(self, t):
        with pytest.raises(InvalidArgumentError):
            eval_ramp(RampSchedule.linear(1, 8, 2), t)

    def test_bad_construction(self):
        with pytest.raises(InvalidArgumentError):
            RampSchedule("cubic", 1, 8, 2)
        with pytest.raises(InvalidArgumentError):
            RampSchedule.linear(1, 8, 0)
        with pytest.raises(InvalidArgumentError):
            RampSchedule.sampled([0, 2, 1, 3], [1, 2, 3, 4])


@pytest.fixture(scope="module")
def quench_setup():
    grid = build_grid(6, 128)
    orbs = stationary_states(grid, PotentialSpec(2, 1.0), 2)
    return grid, orbs


class TestEvolve:
    def test_snapshot_times(self, quench_setup):
        _, orbs = quench_setup
        traj = evolve(orbs, RampSchedule.constant(1, 8, 0.1), 2, dt=1e-3, record_every=30)
        # 100 steps rounded up to a multiple of 30
        assert traj.times[-1] == 0.1
        np.testing.assert_allclose(np.diff(traj.times), 0.1 / 4, rtol=1e-12)
        assert len(traj) == 5
        assert isinstance(traj, Trajectory)

    def test_stationary_fidelity(self, quench_setup):
        _, orbs = quench_setup
        traj = evolve(orbs, RampSchedule.constant(1, 1, 1.0), 2, dt=1e-3, record_every=100)
        for k in range(len(traj)):
            assert many_body_fidelity(orbs, traj.orbitals(k)) == pytest.approx(1, abs=1e-8)

    def test_unitarity_and_gram(self, quench_setup):
        _, orbs = quench_setup
        traj = evolve(orbs, RampSchedule.linear(1, 8, 0.5), 2, dt=1e-3, record_every=50)
        for k in range(len(traj)):
            o = traj.orbitals(k)
            norms = np.sum(np.abs(o.amplitudes) ** 2, axis=1) * o.grid.dx
            np.testing.assert_allclose(norms, 1, atol=1e-8)
            assert o.orthonormality_error() < 1e-6

    def test_energy_conservation(self, quench_setup):
        _, orbs = quench_setup
        pot = PotentialSpec(2, 8.0)
        final = evolve(orbs, RampSchedule.constant(1, 8, 10.0), 2).final
        e0, _ = slater_energy_stats(orbs, pot)
        e1, _ = slater_energy_stats(final, pot)
        assert abs(e1 / e0 - 1) < 1e-6

    def test_dt_convergence(self, quench_setup):
        _, orbs = quench_setup
        ramp = RampSchedule.constant(1, 8, 0.5)
        a = evolve(orbs, ramp, 2, dt=1e-4).final
        b = evolve(orbs, ramp, 2, dt=5e-5).final
        assert 1 - many_body_fidelity(a, b) < 1e-8
        # observables converge at second order: the error is ~4x the change
        f1, f2 = many_body_fidelity(orbs, a), many_body_fidelity(orbs, b)
        assert abs(f1 - f2) < 5e-8

    def test_matches_crank_nicolson(self):
        # CN oracle with Richardson extrapolation in dt; fine grid for its
        # fourth-order stencil
        grid = build_grid(6, 1536)
        orbs = stationary_states(grid, PotentialSpec(2, 1.0), 2)
        ramp = RampSchedule.constant(1, 8, 0.5)
        split = evolve(orbs, ramp, 2, dt=1e-4).final.amplitudes
        coarse = reference_integrator(orbs, ramp, 1e-4).amplitudes
        fine = reference_integrator(orbs, ramp, 5e-5).amplitudes
        oracle = (4 * fine - coarse) / 3
        assert np.max(np.abs(split - oracle)) < 1e-6

    def test_harmonic_sta_is_exact(self):
        grid = build_grid(12, 256)
        orbs = stationary_states(grid, PotentialSpec(1, 1.0), 10)
        target = stationary_states(grid, PotentialSpec(1, 8.0), 10)
        ramp = design_ramp(9, 1, 1.0, 8.0, 0.5).schedule()
        final = evolve(orbs, ramp, 1, dt=1e-4).final
        assert many_body_fidelity(target, final) > 0.999

    def test_divergence_detected(self, quench_setup, monkeypatch):
        _, orbs = quench_setup
        # a negative tolerance makes any roundoff drift count as divergence
        monkeypatch.setattr(propagate, "NORM_DRIFT_TOL", -1.0)
        with pytest.raises(PropagationDivergedError) as info:
            evolve(orbs, RampSchedule.constant(1, 8, 0.01), 2, dt=1e-3, record_every=5)
        assert info.value.step == 5

    def test_rejects_bad_dt(self, quench_setup):
        _, orbs = quench_setup
        with pytest.raises(InvalidArgumentError):
            evolve(orbs, RampSchedule.constant(1, 1, 0.01), 2, dt=0)

    def test_head(self, quench_setup):
        _, orbs = quench_setup
        traj = evolve(orbs, RampSchedule.constant(1, 8, 0.1), 2, dt=1e-3, record_every=10)
        cut = traj.head(4)
        assert len(cut) == 4 and cut.times[-1] == pytest.approx(0.03)
        with pytest.raises(InvalidArgumentError):
            traj.head(100)


def test_diverged_error_carries_step():
    err = PropagationDivergedError(12, 3e-5)
    assert err.step == 12 and "12" in str(err)
