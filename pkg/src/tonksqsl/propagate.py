"""Time evolution of orbital sets under a time-dependent trap strength."""
import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError, PropagationDivergedError
from .spectral import Grid, OrbitalSet, PotentialSpec, kinetic_phase_factors

DEFAULT_DT = 1e-4
NORM_DRIFT_TOL = 1e-6
_T_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class RampSchedule:
    """Trap strength lam(t) on ``[0, t_f]``.

    ``constant`` means a sudden quench: the state is prepared at ``lam_i`` and
    evolves under ``lam_f`` for all ``t >= 0``.
    """

    kind: str
    lam_i: float
    lam_f: float
    t_f: float
    times: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "sampled"):
            raise InvalidArgumentError(f"unknown ramp kind {self.kind!r}")
        if not self.t_f > 0:
            raise InvalidArgumentError(f"ramp duration must be positive, got {self.t_f}")
        if self.kind == "sampled":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or t.size < 4:
                raise InvalidArgumentError("sampled ramp needs >= 4 matching samples")
            if abs(t[0]) > _T_EPS or abs(t[-1] - self.t_f) > 1e-9 * self.t_f:
                raise InvalidArgumentError("samples must span [0, t_f]")
            if np.any(np.diff(t) <= 0):
                raise InvalidArgumentError("sample times must increase")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "_spline", CubicSpline(t, v))

    @classmethod
    def constant(cls, lam_i, lam_f, t_f):
        return cls("constant", lam_i, lam_f, t_f)

    @classmethod
    def linear(cls, lam_i, lam_f, t_f):
        return cls("linear", lam_i, lam_f, t_f)

    @classmethod
    def sampled(cls, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls("sampled", float(values[0]), float(values[-1]), float(times[-1]),
                   times, values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.lam_f)
        if self.kind == "linear":
            return self.lam_i + (self.lam_f - self.lam_i) * t / self.t_f
        return self._spline(t)

    @property
    def preparation_strength(self) -> float:
        return self.lam_i


def eval_ramp(ramp: RampSchedule, t) -> float:
    """Trap strength at time ``t`` (``0 <= t <= t_f``)."""
    if t < -_T_EPS or t > ramp.t_f * (1 + _T_EPS) + _T_EPS:
        raise InvalidArgumentError(f"t={t} outside [0, {ramp.t_f}]")
    return float(ramp(min(max(t, 0.0), ramp.t_f)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of an evolved orbital set at uniformly spaced times."""

    grid: Grid
    times: np.ndarray
    amplitudes: np.ndarray  # (n_snapshots, n_orbitals, n_points)
    ramp: RampSchedule
    q: int
    x0: float = 0.0

    def __len__(self):
        return self.times.size

    @property
    def record_dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def orbitals(self, k) -> OrbitalSet:
        return OrbitalSet(self.grid, self.amplitudes[k])

    @property
    def final(self) -> OrbitalSet:
        return self.orbitals(-1)

    @property
    def initial(self) -> OrbitalSet:
        return self.orbitals(0)

    def strength(self, k) -> float:
        """Hamiltonian strength acting at snapshot ``k``."""
        return eval_ramp(self.ramp, float(self.times[k]))

    def potential(self, k) -> PotentialSpec:
        return PotentialSpec(self.q, self.strength(k), self.x0)

    def head(self, count) -> "Trajectory":
        """The first ``count`` snapshots (the ramp is kept as is)."""
        if not 1 <= count <= len(self):
            raise InvalidArgumentError(f"cannot keep {count} of {len(self)} snapshots")
        return dataclasses.replace(self, times=self.times[:count],
                                   amplitudes=self.amplitudes[:count])


def _step_count(t_f, dt, record_every):
    """Smallest multiple of ``record_every`` steps whose step is at most ``dt``."""
    blocks = int(np.ceil(t_f / (dt * record_every) - 1e-9))
    return max(blocks, 1) * record_every


def evolve(initial: OrbitalSet, ramp: RampSchedule, q: int, dt=DEFAULT_DT,
           record_every=None, x0=0.0, check_every=None) -> Trajectory:
    """Strang split-step evolution of every orbital in ``initial``.

    Each step applies half a kinetic step in momentum space, the full
    potential phase with the strength evaluated at the step midpoint, and
    the second kinetic half. The step count is rounded up so that it is a
    multiple of ``record_every`` and the last snapshot sits exactly at
    ``ramp.t_f``; the effective step therefore never exceeds ``dt``.

    Parameters
    ----------
    record_every : int or None
        Steps between snapshots. ``None`` records only ``t=0`` and ``t_f``.
    check_every : int or None
        Interval for the norm-drift check; defaults to every snapshot.

    Raises
    ------
    PropagationDivergedError
        If the norm of any orbital drifts by more than 1e-6.
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    grid = initial.grid
    n_steps = _step_count(ramp.t_f, dt, record_every or 1)
    if record_every is None:
        record_every = n_steps
    h = ramp.t_f / n_steps
    mid_times = (np.arange(n_steps) + 0.5) * h
    strengths = np.asarray(ramp(mid_times), dtype=float)
    shape = PotentialSpec(q, 1.0, x0).shape(grid) * h

    half_kin = np.exp(-0.5j * h * kinetic_phase_factors(grid))
    full_kin = half_kin * half_kin
    n_rec = n_steps // record_every + 1
    out = np.empty((n_rec,) + initial.amplitudes.shape, dtype=np.complex128)
    out[0] = initial.amplitudes
    norms0 = np.sum(np.abs(initial.amplitudes) ** 2, axis=1) * grid.dx
    check_every = check_every or record_every

    phi = scipy.fft.fft(initial.amplitudes, axis=-1) * half_kin
    rec = 1
    for step in range(n_steps):
        psi = scipy.fft.ifft(phi, axis=-1)
        psi *= np.exp(-1j * strengths[step] * shape)
        phi = scipy.fft.fft(psi, axis=-1)
        done = step + 1
        if done % record_every == 0:
            out[rec] = scipy.fft.ifft(phi * half_kin, axis=-1)
            rec += 1
        if done % check_every == 0 or done == n_steps:
            norms = np.sum(np.abs(phi) ** 2, axis=1) / grid.n_points * grid.dx
            drift = float(np.max(np.abs(norms - norms0)))
            if not drift <= NORM_DRIFT_TOL:
                raise PropagationDivergedError(done, drift)
        if done < n_steps:
            phi *= full_kin
    times = np.arange(n_rec) * (record_every * h)
    times[-1] = ramp.t_f
    return Trajectory(grid, times, out, ramp, q, x0)
