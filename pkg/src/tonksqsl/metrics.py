"""Schatten norms, trace distances, RSPDM speeds and quantum speed limits."""
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, InvalidStateError
from .manybody import (
    FERMI,
    RSPDM,
    CoherenceSpectrum,
    coherence_spectrum,
    many_body_fidelity,
    rspdm,
)
from .propagate import Trajectory
from .spectral import (
    OrbitalSet,
    PotentialSpec,
    apply_hamiltonian,
    slater_energy_stats,
    stationary_states,
)

OCCUPATION_TOL = 1e-4
#: Natural occupations below this are left out of the approximate sums.
TRUNCATION_TOL = 1e-8


def schatten_norm(kernel, dx, p=1.0) -> float:
    """``(sum_k s_k^p)^(1/p)`` over the singular values of ``kernel * dx``.

    Rows and columns that are identically zero are dropped first; they carry
    no singular weight.
    """
    if p < 1:
        raise InvalidArgumentError(f"Schatten index must be >= 1, got {p}")
    k = np.asarray(kernel)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {k.shape}")
    live = np.flatnonzero(np.any(k != 0, axis=0) | np.any(k != 0, axis=1))
    if live.size == 0:
        return 0.0
    sub = k[np.ix_(live, live)] * dx
    scale = np.max(np.abs(sub))
    if np.max(np.abs(sub - sub.conj().T)) <= 1e-12 * scale:
        s = np.abs(np.linalg.eigvalsh(0.5 * (sub + sub.conj().T)))
    else:
        s = np.linalg.svd(sub, compute_uv=False)
    if math.isinf(p):
        return float(s.max())
    return float(np.sum(s**p) ** (1.0 / p))


def _check_pair(a: RSPDM, b: RSPDM):
    if a.grid != b.grid:
        raise InvalidArgumentError("RSPDMs live on different grids")
    if a.n_particles != b.n_particles:
        raise InvalidArgumentError("RSPDMs have different particle numbers")


def trace_distance(a: RSPDM, b: RSPDM) -> float:
    _check_pair(a, b)
    return 0.5 * schatten_norm(a.kernel - b.kernel, a.grid.dx, 1)


SPEED_METHODS = ("exact", "record")
#: Size of the orbital displacement ``eps * ||psi_dot||`` used for the exact rate.
RATE_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class SpeedSeries:
    """``v(t) = ||d rho / dt||_1`` at every snapshot and its time average.

    ``one_sided`` marks snapshots where a first-order one-sided difference
    replaced the central difference (``method="record"`` only).
    """

    times: np.ndarray
    speeds: np.ndarray
    statistics: str
    one_sided: np.ndarray
    average: float
    method: str = "exact"

    @property
    def interior(self):
        return ~self.one_sided

    def head(self, count) -> "SpeedSeries":
        """Series cut to the first ``count`` snapshots, average recomputed.

        Speeds keep their original stencils, so a cut placed one snapshot
        before a one-sided end leaves a central difference at the new end.
        """
        if not 2 <= count <= self.times.size:
            raise InvalidArgumentError(f"cannot keep {count} of {self.times.size} snapshots")
        t, v = self.times[:count], self.speeds[:count]
        avg = float(np.trapezoid(v, t) / (t[-1] - t[0]))
        return SpeedSeries(t, v, self.statistics, self.one_sided[:count], avg, self.method)


def _check_method(method):
    if method not in SPEED_METHODS:
        raise InvalidArgumentError(f"speed method must be one of {SPEED_METHODS}")


def _speed_from(rho_a: RSPDM, rho_b: RSPDM, span) -> float:
    return schatten_norm((rho_b.kernel - rho_a.kernel) / span, rho_a.grid.dx, 1)


def rspdm_rate(orbs: OrbitalSet, pot: PotentialSpec, statistics: str, n_jobs=1,
               step=RATE_STEP):
    """RSPDM and its time derivative under the Hamiltonian ``pot``.

    The orbitals move as ``psi_dot = -i h psi``, so the derivative of the
    kernel is its directional derivative along ``psi_dot``. It is taken as a
    central difference ``(rho[psi + eps psi_dot] - rho[psi - eps psi_dot]) / (2 eps)``
    with ``eps ||psi_dot|| = step``. The truncation error is ``O(step^2)``
    and, unlike a difference between recorded snapshots, does not grow with
    the frequencies present in the state. For fermions the result equals
    ``-i [h, rho]`` up to roundoff.

    Returns
    -------
    rho : RSPDM
        Mean of the two displaced kernels, equal to the kernel at ``psi``
        up to ``O(step^2)``.
    rate : np.ndarray
        The kernel of ``d rho / dt``.
    """
    psi = orbs.amplitudes
    psi_dot = -1j * apply_hamiltonian(psi, orbs.grid, pot)
    norm = float(np.max(np.sqrt(np.sum(np.abs(psi_dot) ** 2, axis=1) * orbs.grid.dx)))
    if norm == 0:
        rho = rspdm(orbs, statistics, n_jobs)
        return rho, np.zeros_like(rho.kernel)
    eps = step / norm
    plus = rspdm(OrbitalSet(orbs.grid, psi + eps * psi_dot), statistics, n_jobs)
    minus = rspdm(OrbitalSet(orbs.grid, psi - eps * psi_dot), statistics, n_jobs)
    mean = RSPDM(orbs.grid, 0.5 * (plus.kernel + minus.kernel), statistics, len(orbs))
    return mean, (plus.kernel - minus.kernel) / (2 * eps)


def instantaneous_speed(traj: Trajectory, statistics: str, k: int, n_jobs=1,
                        method="exact"):
    """Speed at snapshot ``k`` and whether it is a one-sided estimate.

    ``method="exact"`` differentiates along the Schrodinger flow of the
    Hamiltonian acting at that snapshot (see :func:`rspdm_rate`).
    ``method="record"`` uses ``(rho_{k+1} - rho_{k-1}) / (2 dt_record)`` and
    falls back to a first-order one-sided difference at the two ends; its
    error grows like ``(omega dt_record)^2``.
    """
    _check_method(method)
    last = len(traj) - 1
    if not -len(traj) <= k <= last:
        raise InvalidArgumentError(f"snapshot index {k} out of range")
    k = k % len(traj)
    if method == "exact":
        _, rate = rspdm_rate(traj.orbitals(k), traj.potential(k), statistics, n_jobs)
        return schatten_norm(rate, traj.grid.dx, 1), False
    if last < 1:
        raise InvalidArgumentError("need at least two snapshots")
    lo, hi = max(k - 1, 0), min(k + 1, last)
    span = traj.times[hi] - traj.times[lo]
    rho_lo = rspdm(traj.orbitals(lo), statistics, n_jobs)
    rho_hi = rspdm(traj.orbitals(hi), statistics, n_jobs)
    return _speed_from(rho_lo, rho_hi, span), (k == 0 or k == last)


def average_speed(traj: Trajectory, statistics: str, n_jobs=1, observer=None,
                  method="exact") -> SpeedSeries:
    """Speeds at all snapshots and their trapezoid time average.

    ``observer(k, rho)`` is called with the RSPDM of every snapshot, for
    callers that need other per-snapshot quantities. With ``method="record"``
    RSPDMs are kept in a three-slot window, so memory does not grow with the
    trajectory length.
    """
    _check_method(method)
    n = len(traj)
    if n < 3:
        raise InvalidArgumentError(f"need at least 3 snapshots, got {n}")
    t = traj.times
    speeds = np.empty(n)
    one_sided = np.zeros(n, dtype=bool)
    if method == "exact":
        for k in range(n):
            rho, rate = rspdm_rate(traj.orbitals(k), traj.potential(k), statistics, n_jobs)
            if observer is not None:
                observer(k, rho)
            speeds[k] = schatten_norm(rate, traj.grid.dx, 1)
    else:
        window = deque(maxlen=3)
        for k in range(n):
            window.append(rspdm(traj.orbitals(k), statistics, n_jobs))
            if observer is not None:
                observer(k, window[-1])
            if k == 1:
                speeds[0] = _speed_from(window[0], window[1], t[1] - t[0])
            if k >= 2:
                speeds[k - 1] = _speed_from(window[0], window[2], t[k] - t[k - 2])
        speeds[-1] = _speed_from(window[-2], window[-1], t[-1] - t[-2])
        one_sided[[0, -1]] = True
    avg = float(np.trapezoid(speeds, t) / (t[-1] - t[0]))
    return SpeedSeries(t.copy(), speeds, statistics, one_sided, avg, method)


@dataclass(frozen=True)
class QSLReport:
    """Speed-limit bounds for one evolution, in units of 1/w0.

    ``mean_energy`` is measured from the zero of the trap potential
    (``energy_reference="absolute"``) or from the instantaneous many-body
    ground energy (``"ground"``). Infinite bounds are flagged in ``flags``.
    """

    energy_std: float
    mean_energy: float
    fidelity: float
    bures_angle: float
    mt_bound: float
    ml_bound: float
    unified_bound: float
    trace_distance: float = float("nan")
    average_speed: float = float("nan")
    geometric_bound: float = float("nan")
    duration: float = float("nan")
    energy_reference: str = "absolute"
    flags: tuple = field(default_factory=tuple)


#: Fidelities this close to 1 are roundoff of an exact overlap.
FIDELITY_ROUNDOFF = 1e-13
#: Energy spread, relative to the mean, below which a state counts as stationary.
SPREAD_FLOOR = 1e-8


def bures_angle(fidelity) -> float:
    """``arccos(sqrt(F))`` with ``F`` clamped to ``[0, 1]``.

    The angle grows like ``sqrt(1 - F)``, so determinant roundoff near
    ``F = 1`` would otherwise show up as an angle of order 1e-8.
    """
    if fidelity >= 1.0 - FIDELITY_ROUNDOFF:
        return 0.0
    return float(np.arccos(np.sqrt(max(fidelity, 0.0))))


def _ratio(num, den, name, flags, floor=0.0):
    if num == 0:
        return 0.0
    if den <= floor:
        flags.append(f"{name}-infinite")
        return float("inf")
    return num / den


ENERGY_REFERENCES = ("absolute", "ground")


def _reference_energy(grid, pot, n, reference, cache):
    if reference == "absolute":
        return 0.0
    if pot.lam not in cache:
        cache[pot.lam] = float(np.sum(stationary_states(grid, pot, n).energies))
    return cache[pot.lam]


def _check_reference(reference):
    if reference not in ENERGY_REFERENCES:
        raise InvalidArgumentError(f"energy_reference must be one of {ENERGY_REFERENCES}")


def trajectory_energy_stats(traj: Trajectory, n_particles=None, stride=1,
                            energy_reference="absolute"):
    """Time-averaged ``dH`` and ``<H>`` along a trajectory.

    Each snapshot is measured against the Hamiltonian acting at that time.
    With ``energy_reference="ground"`` the mean is taken relative to that
    Hamiltonian's N-particle ground energy (sum of its lowest ``N`` levels).
    Averages use the trapezoid rule over the sampled snapshots.
    """
    _check_reference(energy_reference)
    idx = np.arange(0, len(traj), stride)
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    n = n_particles or traj.amplitudes.shape[1]
    cache = {}
    means, stds = [], []
    for k in idx:
        pot = traj.potential(k)
        mean, std = slater_energy_stats(traj.orbitals(k), pot)
        means.append(mean - _reference_energy(traj.grid, pot, n, energy_reference, cache))
        stds.append(std)
    t = traj.times[idx]
    if t[-1] == t[0]:
        return float(stds[0]), float(means[0])
    span = t[-1] - t[0]
    return float(np.trapezoid(stds, t) / span), float(np.trapezoid(means, t) / span)


def qsl_report(initial: OrbitalSet, final: OrbitalSet, pot: PotentialSpec = None,
               traj: Trajectory = None, statistics=FERMI, speeds: SpeedSeries = None,
               duration=None, energy_stride=1, n_jobs=1,
               energy_reference="absolute") -> QSLReport:
    """Unified Mandelstam-Tamm / Margolus-Levitin and trace-distance bounds.

    The energy statistics come from ``traj`` (time averages under the
    instantaneous Hamiltonian) when given, otherwise from ``initial`` under
    the static trap ``pot``. The geometric bound ``2 T_D / v_avg`` is filled
    in when ``speeds`` is supplied.

    The default absolute energy (trap minimum at zero) gives a valid bound
    for driven runs too. The ground-referenced mean is the sharper choice
    for a static Hamiltonian, but time-averaged along a nearly adiabatic
    ramp it becomes small and the resulting ML value can exceed the actual
    duration.
    """
    _check_reference(energy_reference)
    flags = []
    if traj is not None:
        d_h, e_rel = trajectory_energy_stats(traj, len(initial), energy_stride,
                                             energy_reference)
        duration = float(traj.times[-1] - traj.times[0]) if duration is None else duration
    elif pot is not None:
        mean, d_h = slater_energy_stats(initial, pot)
        e_rel = mean - _reference_energy(initial.grid, pot, len(initial), energy_reference, {})
    else:
        raise InvalidArgumentError("need either a trajectory or a static potential")
    fid = many_body_fidelity(initial, final)
    angle = bures_angle(fid)
    mt = _ratio(angle, d_h, "mt", flags, SPREAD_FLOOR * abs(e_rel))
    ml = _ratio(2.0 / np.pi * angle**2, e_rel, "ml", flags)
    report = dict(energy_std=d_h, mean_energy=e_rel, fidelity=fid, bures_angle=angle,
                  mt_bound=mt, ml_bound=ml, unified_bound=max(mt, ml),
                  duration=float("nan") if duration is None else float(duration),
                  energy_reference=energy_reference)
    if speeds is not None:
        td = trace_distance(rspdm(initial, statistics, n_jobs), rspdm(final, statistics, n_jobs))
        report.update(trace_distance=td, average_speed=speeds.average,
                      geometric_bound=_ratio(2 * td, speeds.average, "geometric", flags))
    return QSLReport(**report, flags=tuple(flags))


def _truncation_index(occ):
    small = np.flatnonzero(occ < TRUNCATION_TOL)
    return int(small[0]) if small.size else occ.size


@dataclass(frozen=True)
class TraceDistanceParts:
    full: float
    tg_approx: float
    fermi_approx: float


def natural_overlaps(target: CoherenceSpectrum, final: CoherenceSpectrum) -> np.ndarray:
    """``Delta[m, n] = <chi_m|phi_n>`` between target and final natural orbitals."""
    return target.natural_orbitals.conj() @ final.natural_orbitals.T * target.grid.dx


def trace_distance_decomposed(final: CoherenceSpectrum, target: CoherenceSpectrum,
                              overlaps=None, n_particles=None,
                              fermi_overlaps=None) -> TraceDistanceParts:
    """Trace distance from natural occupations and orbital overlaps.

    ``full`` diagonalizes ``rho_f - rho_tau`` written in the target natural
    basis, ``kappa_m delta_ml - sum_n theta_n Delta_mn conj(Delta_ln)``, which
    is exact when all orbitals are kept. ``tg_approx`` keeps only the diagonal
    of its square, ``kappa_m^2 + sum_n |Delta_mn|^2 (theta_n^2 - 2 theta_n kappa_m)``,
    with ``m`` and ``n`` running up to the first occupation below
    ``TRUNCATION_TOL``. ``fermi_approx`` sets ``kappa = theta = 1`` on the
    lowest N orbitals and sums ``sqrt(1 - sum_{n<N} |Delta_mn|^2)`` over the
    occupied ``m < N`` only. Leaving out the unoccupied target orbitals makes it
    about half of ``full`` for nearly adiabatic runs.

    A Fermi sea has a degenerate spectrum, so its natural orbitals are only
    fixed up to a rotation of the occupied space and the ``fermi_approx`` sum
    depends on that choice. Pass ``fermi_overlaps`` (the N x N matrix
    ``<target orbital m|evolved orbital n>``) to use the single-particle
    orbitals instead.

    ``tg_approx`` equals ``sum_m ||(rho_f - rho_tau) chi_m|| / 2`` when nothing
    is truncated, which bounds ``full`` from above.
    """
    theta = final.occupations
    kappa = target.occupations
    n = n_particles or int(round(np.sum(kappa)))
    for name, occ in (("final", theta), ("target", kappa)):
        if abs(np.sum(occ) - n) > OCCUPATION_TOL:
            raise InvalidStateError(f"{name} occupations sum to {np.sum(occ):.6f}, expected {n}")
    delta = natural_overlaps(target, final) if overlaps is None else np.asarray(overlaps)
    diff = np.diag(kappa) - (delta * theta) @ delta.conj().T
    full = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
    mt = _truncation_index(kappa)
    nt = _truncation_index(theta)
    w = np.abs(delta[:mt, :nt]) ** 2
    k, th = kappa[:mt], theta[:nt]
    diag_sq = k**2 + w @ th**2 - 2 * k * (w @ th)
    tg = 0.5 * float(np.sum(np.sqrt(np.clip(diag_sq, 0.0, None))))
    occ = delta[:n, :n] if fermi_overlaps is None else np.asarray(fermi_overlaps)
    occ_leak = 1.0 - np.sum(np.abs(occ) ** 2, axis=1)
    fermi = 0.5 * float(np.sum(np.sqrt(np.clip(occ_leak, 0.0, None))))
    return TraceDistanceParts(full, tg, fermi)
