"""Many-body quantities of the Fermi sea and its Tonks-Girardeau image.

Everything here is built from the occupied single-particle orbitals: the
overlap matrix and determinant fidelity, the one-body density matrices
(RSPDMs) for both statistics, their natural-orbital spectra and the density.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidStateError
from .spectral import Grid, OrbitalSet

FERMI = "fermi"
TG = "tg"
STATISTICS = (FERMI, TG)

HERMITICITY_TOL = 1e-8
#: Relative density below which a grid point is excluded from the TG pair
#: sweep. Positivity gives |rho(x, x')|^2 <= n(x) n(x'), so skipped entries
#: are bounded by sqrt(SUPPORT_CUTOFF) * max n.
SUPPORT_CUTOFF = 1e-24
#: Target size (complex entries) of one block of stacked N x N matrices.
_BLOCK_ENTRIES = 4_000_000


def _check_statistics(statistics):
    if statistics not in STATISTICS:
        raise InvalidArgumentError(f"statistics must be one of {STATISTICS}, got {statistics!r}")


@dataclass(frozen=True, eq=False)
class RSPDM:
    """Reduced single-particle density matrix sampled on a grid.

    ``kernel[i, j]`` is rho(x_i, x_j); the operator acting on wavefunctions
    is ``kernel * dx``.
    """

    grid: Grid
    kernel: np.ndarray
    statistics: str
    n_particles: int

    @property
    def operator(self) -> np.ndarray:
        return self.kernel * self.grid.dx

    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.kernel).real

    def trace(self) -> float:
        return float(np.sum(self.diagonal()) * self.grid.dx)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.kernel - self.kernel.conj().T)))


@dataclass(frozen=True, eq=False)
class CoherenceSpectrum:
    """Occupations ``theta`` (descending) and natural orbitals (rows)."""

    occupations: np.ndarray
    natural_orbitals: np.ndarray
    grid: Grid

    @property
    def theta0(self) -> float:
        return float(self.occupations[0])


def _check_same(a: OrbitalSet, b: OrbitalSet):
    if a.grid != b.grid:
        raise InvalidArgumentError("orbital sets live on different grids")
    if len(a) != len(b):
        raise InvalidArgumentError(f"orbital counts differ: {len(a)} vs {len(b)}")


def overlap_matrix(a: OrbitalSet, b: OrbitalSet) -> np.ndarray:
    """``P[i, j] = <a_i|b_j>`` by Riemann sum."""
    _check_same(a, b)
    return a.amplitudes.conj() @ b.amplitudes.T * a.grid.dx


def many_body_fidelity(a: OrbitalSet, b: OrbitalSet) -> float:
    """``|det P|^2``; identical for the Fermi and Tonks-Girardeau states."""
    return float(abs(np.linalg.det(overlap_matrix(a, b))) ** 2)


def density(orbs: OrbitalSet) -> np.ndarray:
    orbs.check_orthonormal()
    return np.sum(np.abs(orbs.amplitudes) ** 2, axis=0)


def fermi_rspdm(orbs: OrbitalSet) -> RSPDM:
    """``rho(x, x') = sum_n psi_n(x) conj(psi_n(x'))``."""
    orbs.check_orthonormal()
    psi = orbs.amplitudes
    return RSPDM(orbs.grid, psi.T @ psi.conj(), FERMI, len(orbs))


def _cumulative_products(psi, dx):
    """Trapezoid running integral ``C[j] = int_{x_0}^{x_j} psi_a psi_b^* dy``.

    Returns an array of shape ``(M, N, N)``.
    """
    outer = np.einsum("am,bm->mab", psi, psi.conj())
    cum = np.empty_like(outer)
    cum[0] = 0.0
    np.cumsum(0.5 * dx * (outer[1:] + outer[:-1]), axis=0, out=cum[1:])
    return cum


def _tg_block(rows, cols, cum, psi_t, n):
    """Kernel entries for index pairs ``(rows[p], cols[p])``.

    With ``P = 1 - 2 (C[col] - C[row])`` the Pezer-Buljan kernel is
    ``u^T adj(P)^T w = w^T adj(P) u`` for ``u = psi(x_row)``,
    ``w = conj(psi(x_col))``. It is read off one bordered determinant,
    ``det [[P, u], [w^T, 0]] = -w^T adj(P) u``, which needs no inverse and
    stays accurate when P is singular.
    """
    m = rows.size
    bordered = np.zeros((m, n + 1, n + 1), dtype=np.complex128)
    bordered[:, :n, :n] = np.eye(n) - 2.0 * (cum[cols] - cum[rows])
    bordered[:, :n, n] = psi_t[rows]
    bordered[:, n, :n] = psi_t[cols].conj()
    return -np.linalg.det(bordered)


def tg_rspdm(orbs: OrbitalSet, n_jobs=1, support_cutoff=SUPPORT_CUTOFF) -> RSPDM:
    """One-body density matrix of the Tonks-Girardeau gas.

    The kernel is evaluated for ``x_j >= x_i`` from the running-integral
    matrix ``P(x_i, x_j) = 1 - 2 int_{x_i}^{x_j} psi psi^H dy`` (trapezoid
    rule, accumulated once for the whole grid), the lower triangle follows
    from Hermiticity, and the diagonal is the density. Grid points where the
    density is below ``support_cutoff`` times its maximum are skipped since their entries are
    bounded by positivity.
    """
    orbs.check_orthonormal()
    grid = orbs.grid
    n = len(orbs)
    psi = orbs.amplitudes
    dens = np.sum(np.abs(psi) ** 2, axis=0)
    support = np.flatnonzero(dens > support_cutoff * dens.max())
    kernel = np.zeros((grid.n_points, grid.n_points), dtype=np.complex128)
    if n == 1:
        kernel = psi.T @ psi.conj()
        return RSPDM(grid, kernel, TG, n)

    cum = _cumulative_products(psi, grid.dx)
    psi_t = np.ascontiguousarray(psi.T)
    iu, ju = np.triu_indices(support.size, k=1)
    rows, cols = support[iu], support[ju]
    block = max(1, _BLOCK_ENTRIES // (n * n))
    chunks = [(rows[s:s + block], cols[s:s + block]) for s in range(0, rows.size, block)]

    def work(chunk):
        return _tg_block(chunk[0], chunk[1], cum, psi_t, n)

    if n_jobs and n_jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(work, chunks))
    else:
        values = [work(c) for c in chunks]
    if values:
        vals = np.concatenate(values)
        kernel[rows, cols] = vals
        kernel[cols, rows] = vals.conj()
    kernel[np.diag_indices(grid.n_points)] = dens
    return RSPDM(grid, kernel, TG, n)


def rspdm(orbs: OrbitalSet, statistics: str, n_jobs=1) -> RSPDM:
    _check_statistics(statistics)
    if statistics == FERMI:
        return fermi_rspdm(orbs)
    return tg_rspdm(orbs, n_jobs=n_jobs)


def coherence_spectrum(rho: RSPDM, tol=HERMITICITY_TOL) -> CoherenceSpectrum:
    """Natural occupations and orbitals from the Hermitian operator ``kernel*dx``."""
    err = rho.hermiticity_error()
    if not err < tol:
        raise InvalidStateError(f"RSPDM is not Hermitian (error {err:.2e})")
    op = 0.5 * (rho.operator + rho.operator.conj().T)
    theta, vecs = np.linalg.eigh(op)
    order = np.argsort(theta)[::-1]
    orbitals = vecs[:, order].T / np.sqrt(rho.grid.dx)
    return CoherenceSpectrum(theta[order], orbitals, rho.grid)
