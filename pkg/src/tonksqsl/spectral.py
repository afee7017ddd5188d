"""Grids, power-law traps and stationary states of the single-particle problem.

Units follow the harmonic reference scale: lengths in sqrt(hbar / m w0), time in
1/w0, energy in hbar w0. The single-particle Hamiltonian is

    h = -1/2 d^2/dx^2 + 1/2 lam (x - x0)^(2q)

with the kinetic term applied spectrally (diagonal in momentum space) and the
potential applied pointwise.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import GridTooSmallError, InvalidArgumentError, InvalidStateError

#: Boundary amplitude above which a stationary state is considered leaking.
LEAKAGE_THRESHOLD = 1e-6
#: Tolerance of the orthonormality check applied to incoming orbital sets.
ORTHONORMALITY_TOL = 1e-6


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid including both end points.

    The FFT treats the grid as periodic with period ``n_points * dx``.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise InvalidArgumentError("a grid needs at least two points")
        if not self.x_max > self.x_min:
            raise InvalidArgumentError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2 * np.pi * scipy.fft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


def build_grid(x_half_width, n_points, *, min_points=16) -> Grid:
    """Symmetric grid on ``[-x_half_width, x_half_width]``."""
    if not x_half_width > 0:
        raise InvalidArgumentError(f"half width must be positive, got {x_half_width}")
    if int(n_points) != n_points or n_points < min_points:
        raise InvalidArgumentError(
            f"n_points must be an integer >= {min_points}, got {n_points}"
        )
    return Grid(-float(x_half_width), float(x_half_width), int(n_points))


@dataclass(frozen=True)
class PotentialSpec:
    """Power-law trap ``V(x) = 1/2 lam (x - x0)^(2q)``.

    ``lam`` may be negative: short STA ramps pass through an inverted trap.
    Only :func:`stationary_states` needs a confining one.
    """

    q: int
    lam: float
    x0: float = 0.0

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise InvalidArgumentError(f"q must be a positive integer, got {self.q}")
        if not np.isfinite(self.lam) or self.lam == 0:
            raise InvalidArgumentError(f"trap strength must be finite and nonzero, got {self.lam}")

    def shape(self, grid: Grid) -> np.ndarray:
        """The potential per unit strength, ``1/2 (x - x0)^(2q)``."""
        return 0.5 * (grid.x - self.x0) ** (2 * self.q)

    def __call__(self, grid: Grid) -> np.ndarray:
        return self.lam * self.shape(grid)

    def with_strength(self, lam) -> "PotentialSpec":
        return PotentialSpec(self.q, lam, self.x0)


@dataclass(frozen=True, eq=False)
class OrbitalSet:
    """Ordered single-particle orbitals sampled on a grid.

    ``amplitudes`` has shape ``(n_orbitals, n_points)``. ``energies`` is
    optional (evolved orbitals have none).
    """

    grid: Grid
    amplitudes: np.ndarray
    energies: np.ndarray = field(default=None)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128, ndmin=2)
        if amp.ndim != 2 or amp.shape[1] != self.grid.n_points:
            raise InvalidArgumentError(
                f"amplitudes of shape {amp.shape} do not match grid of "
                f"{self.grid.n_points} points"
            )
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        if self.energies is not None:
            en = np.array(self.energies, dtype=float)
            en.flags.writeable = False
            object.__setattr__(self, "energies", en)

    def __len__(self):
        return self.amplitudes.shape[0]

    @property
    def n_orbitals(self) -> int:
        return self.amplitudes.shape[0]

    def gram(self) -> np.ndarray:
        return self.amplitudes.conj() @ self.amplitudes.T * self.grid.dx

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(len(self)))))

    def check_orthonormal(self, tol=ORTHONORMALITY_TOL):
        err = self.orthonormality_error()
        if not err < tol:
            raise InvalidStateError(f"orbitals are not orthonormal (error {err:.2e})")
        return self

    def lowest(self, count) -> "OrbitalSet":
        """The first ``count`` orbitals."""
        if count > len(self):
            raise InvalidArgumentError(f"requested {count} of {len(self)} orbitals")
        en = None if self.energies is None else self.energies[:count]
        return OrbitalSet(self.grid, self.amplitudes[:count], en)


def kinetic_phase_factors(grid: Grid) -> np.ndarray:
    """Kinetic energies ``k^2 / 2`` in FFT order."""
    return 0.5 * grid.k**2


def apply_kinetic(psi, grid: Grid) -> np.ndarray:
    """Apply ``-1/2 d^2/dx^2`` spectrally along the last axis."""
    return scipy.fft.ifft(kinetic_phase_factors(grid) * scipy.fft.fft(psi, axis=-1), axis=-1)


def apply_hamiltonian(psi, grid: Grid, pot: PotentialSpec) -> np.ndarray:
    return apply_kinetic(psi, grid) + pot(grid) * psi


def kinetic_matrix(grid: Grid) -> np.ndarray:
    """Dense Fourier-spectral kinetic operator (real symmetric circulant)."""
    column = scipy.fft.ifft(kinetic_phase_factors(grid)).real
    return scipy.linalg.circulant(column)


def hamiltonian_matrix(grid: Grid, pot: PotentialSpec) -> np.ndarray:
    h = kinetic_matrix(grid)
    h[np.diag_indices_from(h)] += pot(grid)
    return h


def fix_phase(psi: np.ndarray) -> np.ndarray:
    """Rotate each row so its largest-magnitude sample is real and positive.

    Ties within a relative 1e-8 (odd-parity states) go to the leftmost sample
    so that the convention is reproducible.
    """
    psi = np.array(psi, dtype=np.complex128, ndmin=2)
    mag = np.abs(psi)
    peak = mag.max(axis=1, keepdims=True)
    idx = np.argmax(mag >= peak * (1 - 1e-8), axis=1)
    ref = psi[np.arange(psi.shape[0]), idx]
    return psi * (np.abs(ref) / ref)[:, None]


def stationary_states(grid: Grid, pot: PotentialSpec, count: int,
                      leakage_threshold=LEAKAGE_THRESHOLD) -> OrbitalSet:
    """Lowest ``count`` eigenpairs of the discretized single-particle Hamiltonian.

    Raises
    ------
    GridTooSmallError
        If any returned orbital exceeds ``leakage_threshold`` at either end of
        the grid.
    """
    if count < 1 or count > grid.n_points:
        raise InvalidArgumentError(f"invalid state count {count}")
    if pot.lam < 0:
        raise InvalidArgumentError(f"an inverted trap (lam={pot.lam}) has no bound states")
    h = hamiltonian_matrix(grid, pot)
    energies, vecs = scipy.linalg.eigh(h, subset_by_index=[0, count - 1])
    psi = fix_phase(vecs.T / np.sqrt(grid.dx))
    edge = np.maximum(np.abs(psi[:, 0]), np.abs(psi[:, -1]))
    bad = np.flatnonzero(edge >= leakage_threshold)
    if bad.size:
        raise GridTooSmallError(int(bad[0]), float(edge[bad[0]]), leakage_threshold)
    return OrbitalSet(grid, psi, energies)


def eigen_residuals(orbs: OrbitalSet, pot: PotentialSpec) -> np.ndarray:
    """``||h psi_n - E_n psi_n||`` (continuum norm) for every orbital."""
    hpsi = apply_hamiltonian(orbs.amplitudes, orbs.grid, pot)
    r = hpsi - orbs.energies[:, None] * orbs.amplitudes
    return np.sqrt(np.sum(np.abs(r) ** 2, axis=1) * orbs.grid.dx)


def one_body_matrix(orbs: OrbitalSet, pot: PotentialSpec):
    """Matrix ``<psi_m|h|psi_n>`` together with ``h psi``."""
    hpsi = apply_hamiltonian(orbs.amplitudes, orbs.grid, pot)
    return orbs.amplitudes.conj() @ hpsi.T * orbs.grid.dx, hpsi


def slater_energy_stats(orbs: OrbitalSet, pot: PotentialSpec):
    """Mean and standard deviation of ``H = sum_i h(x_i)`` in a Slater determinant.

    Uses the one-body operator identities

        <H>   = sum_n <n|h|n>
        dH^2  = sum_n || (1 - P) h |n> ||^2

    with ``P`` the projector on the occupied orbitals. They only depend on
    the occupied subspace, so they hold for the Tonks-Girardeau state as
    well. The residual form avoids the cancellation in
    ``<h^2> - sum |<m|h|n>|^2`` near eigenstates.
    """
    orbs.check_orthonormal()
    hmat, hpsi = one_body_matrix(orbs, pot)
    mean = float(np.trace(hmat).real)
    resid = hpsi - hmat.T @ orbs.amplitudes
    var = float(np.sum(np.abs(resid) ** 2) * orbs.grid.dx)
    return mean, float(np.sqrt(var))


def ansatz_width(n, lam):
    """Harmonic and approximate quartic widths of the n-th trap state.

    Returns ``(sigma_ho, sigma_quartic)`` with ``sigma_ho = sqrt(2 n + 1)``
    and ``sigma_quartic = sigma_ho * ((2n+1) / (3 lam (2n^2+2n+1)))^(1/6)``.
    """
    if n < 0:
        raise InvalidArgumentError(f"n must be non-negative, got {n}")
    if not lam > 0:
        raise InvalidArgumentError(f"trap strength must be positive, got {lam}")
    sigma_ho = np.sqrt(2.0 * (n + 0.5))
    ratio = (2 * n + 1) / (3.0 * lam * (2 * n * n + 2 * n + 1))
    return float(sigma_ho), float(sigma_ho * ratio ** (1.0 / 6.0))


def orbital_widths(orbs: OrbitalSet, x0=0.0) -> np.ndarray:
    """``sqrt(<(x - x0)^2>)`` of each orbital."""
    x2 = (orbs.grid.x - x0) ** 2
    return np.sqrt(np.sum(np.abs(orbs.amplitudes) ** 2 * x2, axis=1) * orbs.grid.dx)


def ground_energy(grid: Grid, pot: PotentialSpec, n_particles: int) -> float:
    """Many-body ground energy: the sum of the lowest single-particle levels."""
    return float(np.sum(stationary_states(grid, pot, n_particles).energies))
