"""Brute-force references for two and three particles.

These routines build the full many-body wavefunction on a coarse grid and
compute observables by direct quadrature. They are deliberately naive and
share no code path with :mod:`tonksqsl.manybody` beyond the grid and the
orbital container. The Crank-Nicolson integrator is an independent check of
the split-step propagator.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, OracleFailure
from .manybody import FERMI, RSPDM, STATISTICS, TG
from .spectral import Grid, OrbitalSet, PotentialSpec, apply_hamiltonian

MAX_POINTS_3 = 96


@dataclass(frozen=True, eq=False)
class FullWavefunction:
    grid: Grid
    tensor: np.ndarray
    statistics: str

    @property
    def n_particles(self) -> int:
        return self.tensor.ndim

    def norm(self) -> float:
        return float(np.sum(np.abs(self.tensor) ** 2) * self.grid.dx ** self.n_particles)


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def ordering_sign(grid: Grid, n: int) -> np.ndarray:
    """``prod_{j<k} sign(x_k - x_j)`` on the n-fold product grid."""
    x = grid.x
    s = np.ones((grid.n_points,) * n)
    for j, k in itertools.combinations(range(n), 2):
        shape_j = [1] * n
        shape_k = [1] * n
        shape_j[j] = -1
        shape_k[k] = -1
        s = s * np.sign(x.reshape(shape_k) - x.reshape(shape_j))
    return s


def build_full_state(orbs: OrbitalSet, statistics: str) -> FullWavefunction:
    """Slater tensor (``fermi``) or its sign-mapped bosonic image (``tg``)."""
    if statistics not in STATISTICS:
        raise InvalidArgumentError(f"unknown statistics {statistics!r}")
    n = len(orbs)
    if n not in (2, 3):
        raise InvalidArgumentError(f"the oracle supports N in {{2, 3}}, got {n}")
    if n == 3 and orbs.grid.n_points > MAX_POINTS_3:
        raise InvalidArgumentError(f"N=3 oracle grid capped at {MAX_POINTS_3} points")
    psi = orbs.amplitudes
    letters = "abc"[:n]
    tensor = np.zeros((orbs.grid.n_points,) * n, dtype=np.complex128)
    for perm in itertools.permutations(range(n)):
        operands = [psi[perm[j]] for j in range(n)]
        tensor += _perm_sign(perm) * np.einsum(",".join(letters) + "->" + letters, *operands)
    tensor /= math.sqrt(math.factorial(n))
    if statistics == TG:
        tensor = tensor * ordering_sign(orbs.grid, n)
    return FullWavefunction(orbs.grid, tensor, statistics)


def brute_rspdm(state: FullWavefunction) -> RSPDM:
    """``rho(x, x') = N int Psi(x, ...) conj(Psi(x', ...)) dx_2 ... dx_N``."""
    n = state.n_particles
    m = state.grid.n_points
    flat = state.tensor.reshape(m, -1)
    kernel = n * (flat @ flat.conj().T) * state.grid.dx ** (n - 1)
    return RSPDM(state.grid, kernel, state.statistics, n)


def brute_fidelity(a: FullWavefunction, b: FullWavefunction) -> float:
    if a.grid != b.grid or a.tensor.shape != b.tensor.shape:
        raise InvalidArgumentError("wavefunctions live on different spaces")
    if a.statistics != b.statistics:
        raise InvalidArgumentError("wavefunctions have different statistics")
    amp = np.vdot(a.tensor, b.tensor) * a.grid.dx ** a.n_particles
    return float(abs(amp) ** 2)


def _apply_many_body_h(tensor, grid, pot):
    out = np.zeros_like(tensor)
    for axis in range(tensor.ndim):
        moved = np.moveaxis(tensor, axis, -1)
        out += np.moveaxis(apply_hamiltonian(moved, grid, pot), -1, axis)
    return out


def brute_energy_stats(state: FullWavefunction, pot: PotentialSpec):
    """``<H>`` and ``dH`` by applying the N-body Hamiltonian to the full tensor."""
    w = state.grid.dx ** state.n_particles
    h_psi = _apply_many_body_h(state.tensor, state.grid, pot)
    mean = float(np.vdot(state.tensor, h_psi).real * w)
    resid = h_psi - mean * state.tensor
    return mean, float(np.sqrt(np.vdot(resid, resid).real * w))


def fd_eigenstates(grid: Grid, pot: PotentialSpec, count: int) -> OrbitalSet:
    """Eigenstates of the compact fourth-order finite-difference Hamiltonian.

    Solves ``(-1/2 D2 + B V) psi = E B psi`` with the tridiagonal Numerov
    pair ``D2 = delta^2 / dx^2`` and ``B = 1 + delta^2 / 12``.
    """
    d2, b = _numerov_operators(grid)
    v = pot(grid)
    a = -0.5 * d2 + b * v[None, :]
    energies, vecs = scipy.linalg.eig(a, b)
    order = np.argsort(energies.real)[:count]
    psi = vecs[:, order].T.real
    psi /= np.sqrt(np.sum(psi**2, axis=1, keepdims=True) * grid.dx)
    idx = np.argmax(np.abs(psi) >= np.abs(psi).max(axis=1, keepdims=True) * (1 - 1e-8), axis=1)
    psi *= np.sign(psi[np.arange(count), idx])[:, None]
    return OrbitalSet(grid, psi, energies.real[order])


def _numerov_operators(grid):
    m = grid.n_points
    lap = (np.diag(np.full(m - 1, 1.0), -1) - 2 * np.eye(m) + np.diag(np.full(m - 1, 1.0), 1))
    return lap / grid.dx**2, np.eye(m) + lap / 12.0


def _banded(m, lower, diag, upper):
    ab = np.zeros((3, m), dtype=np.complex128)
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    return ab


def reference_integrator(orbs: OrbitalSet, ramp, dt, q=2, x0=0.0) -> OrbitalSet:
    """Crank-Nicolson evolution with the compact tridiagonal stencil.

    Each step solves ``(B + i dt/2 A(t+dt/2)) psi' = (B - i dt/2 A(t+dt/2)) psi``
    with ``A = -1/2 D2 + B V``, Dirichlet boundaries. Fourth order in space,
    second order in time.
    """
    grid = orbs.grid
    m = grid.n_points
    n_steps = max(1, int(round(ramp.t_f / dt)))
    h = ramp.t_f / n_steps
    inv_dx2 = 1.0 / grid.dx**2
    shape = PotentialSpec(q, 1.0, x0).shape(grid)
    psi = np.array(orbs.amplitudes, dtype=np.complex128).T
    for step in range(n_steps):
        lam = float(ramp((step + 0.5) * h))
        v = lam * shape
        # A = -1/2 D2 + B V, B = tridiag(1/12, 10/12, 1/12)
        a_diag = inv_dx2 + (10.0 / 12.0) * v
        a_lo = -0.5 * inv_dx2 + v[:-1] / 12.0
        a_up = -0.5 * inv_dx2 + v[1:] / 12.0
        c = 0.5j * h
        lhs = _banded(m, 1 / 12 + c * a_lo, 10 / 12 + c * a_diag, 1 / 12 + c * a_up)
        rhs = (10 / 12 - c * a_diag)[:, None] * psi
        rhs[1:] += (1 / 12 - c * a_lo)[:, None] * psi[:-1]
        rhs[:-1] += (1 / 12 - c * a_up)[:, None] * psi[1:]
        psi = scipy.linalg.solve_banded((1, 1), lhs, rhs)
        if not np.all(np.isfinite(psi)):
            raise OracleFailure(f"non-finite amplitudes at step {step + 1}")
    return OrbitalSet(grid, psi.T)
