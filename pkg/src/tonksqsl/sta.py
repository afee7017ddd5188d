"""Variational shortcut-to-adiabaticity design for power-law trap compression.

The n-th trap state is approximated by a scaled, chirped Hermite-Gaussian
with width ``a``. Its Euler-Lagrange equations reduce, for a centred trap, to
the Ermakov-like equation

    a'' + lam(t) D(n, q) a^(2q-1) = a^-3,

whose fixed point at constant ``lam`` is ``a_c = (D lam)^(-1/(2q+2))``. A
quintic ``a(t)`` matching ``a_c`` with vanishing first and second derivatives
at both ends is inverted for the ramp ``lam(t)``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DesignInfeasibleError, InvalidArgumentError, InvalidStateError
from .propagate import RampSchedule

DEFAULT_SAMPLES = 4001


def hermite_moment(n: int, k: int) -> float:
    """``<n| xi^(2k) |n>`` for the unit-length harmonic oscillator.

    Exact: ``||X^k e_n||^2`` with the tridiagonal position matrix
    ``X = (a + a^dagger)/sqrt(2)`` truncated at level ``n + k``.
    """
    if n < 0 or k < 0:
        raise InvalidArgumentError("n and k must be non-negative")
    size = n + k + 1
    off = np.sqrt(np.arange(1, size) / 2.0)
    v = np.zeros(size)
    v[n] = 1.0
    for _ in range(k):
        w = np.zeros(size)
        w[1:] += off * v[:-1]
        w[:-1] += off * v[1:]
        v = w
    return float(v @ v)


def moment_binomial_sum(n: int, q: int) -> float:
    """The printed binomial form of ``<n| xi^(2q) |n>``.

    ``(2q)!/2^(2q) * 2^n/n! * sum_j C(n, j)^2 j! / (2^j (q - n + j)!)`` for
    ``j`` from ``max(0, n - q)`` to ``n``. Kept as a cross-check of
    :func:`hermite_moment`.
    """
    total = 0.0
    for j in range(max(0, n - q), n + 1):
        total += math.comb(n, j) ** 2 * math.factorial(j) / (2.0**j * math.factorial(q - n + j))
    return math.factorial(2 * q) / 4.0**q * 2.0**n / math.factorial(n) * total


def quartic_coefficient(n: int) -> float:
    """``B(n) = 3 (2n^2 + 2n + 1) / 8``, the quartic moment coefficient."""
    return 3.0 * (2 * n * n + 2 * n + 1) / 8.0


def general_coefficients(n: int, q: int):
    """Moment table and the compression coefficient ``D(n, q)``.

    ``table[k] = C(2q, 2k) <n|xi^(2k)|n>``, so that for the ansatz centred at
    ``xi`` the trap expectation is

        <(x - x0)^(2q)> = sum_k table[k] (xi - x0)^(2q-2k) a^(2k).

    ``D(n, q) = 2 q <n|xi^(2q)|n> / (2n + 1)``; it equals 1 for ``q = 1`` and
    ``3 (2n^2+2n+1)/(2n+1)`` for ``q = 2``.
    """
    if n < 0 or q < 1:
        raise InvalidArgumentError(f"need n >= 0 and q >= 1, got n={n}, q={q}")
    moments = np.array([hermite_moment(n, k) for k in range(q + 1)])
    table = np.array([math.comb(2 * q, 2 * k) for k in range(q + 1)]) * moments
    return table, 2.0 * q * moments[q] / (2 * n + 1)


def compression_coefficient(n: int, q: int) -> float:
    if q == 2:
        # exact rational form, avoids roundoff in the q=2 consistency identity
        return 8.0 * quartic_coefficient(n) / (2 * n + 1)
    return general_coefficients(n, q)[1]


def scaling_fixed_point(n: int, q: int, lam: float) -> float:
    """Stationary width ``a_c = (D(n, q) lam)^(-1/(2q+2))``."""
    if not lam > 0:
        raise InvalidArgumentError(f"trap strength must be positive, got {lam}")
    return float((compression_coefficient(n, q) * lam) ** (-1.0 / (2 * q + 2)))


@dataclass(frozen=True)
class ScalingPolynomial:
    """Quintic width ``a(t) = sum_i coeffs[i] t^i`` for one design."""

    coeffs: np.ndarray
    t_f: float
    n: int
    q: int
    lam_i: float
    lam_f: float

    def __call__(self, t, deriv=0):
        poly = np.polynomial.Polynomial(self.coeffs)
        return poly.deriv(deriv)(np.asarray(t, dtype=float)) if deriv else poly(np.asarray(t, dtype=float))

    @property
    def coefficient(self) -> float:
        return compression_coefficient(self.n, self.q)


def design_scaling(n, q, lam_i, lam_f, t_f) -> ScalingPolynomial:
    """Unique quintic with ``a = a_c`` and ``a' = a'' = 0`` at both ends."""
    if not t_f > 0:
        raise InvalidArgumentError(f"t_f must be positive, got {t_f}")
    a0 = scaling_fixed_point(n, q, lam_i)
    a1 = scaling_fixed_point(n, q, lam_f)
    rows = []
    for t in (0.0, float(t_f)):
        rows.append([t**i for i in range(6)])
        rows.append([i * t ** (i - 1) if i >= 1 else 0.0 for i in range(6)])
        rows.append([i * (i - 1) * t ** (i - 2) if i >= 2 else 0.0 for i in range(6)])
    rhs = np.array([a0, 0.0, 0.0, a1, 0.0, 0.0])
    if lam_f == lam_i:
        coeffs = np.array([a0, 0.0, 0.0, 0.0, 0.0, 0.0])
    else:
        coeffs = np.linalg.solve(np.array(rows), rhs)
    return ScalingPolynomial(coeffs, float(t_f), int(n), int(q), float(lam_i), float(lam_f))


@dataclass(frozen=True, eq=False)
class STARamp:
    """Trap strength obtained by inverting the Ermakov-like equation."""

    times: np.ndarray
    values: np.ndarray
    n: int
    q: int
    lam_i: float
    lam_f: float
    t_f: float

    @property
    def negative(self) -> bool:
        """True when the trap is inverted somewhere on the mesh."""
        return bool(np.any(self.values <= 0))

    def schedule(self) -> RampSchedule:
        return RampSchedule.sampled(self.times, self.values)


def ramp_values(poly: ScalingPolynomial, t) -> np.ndarray:
    """``lam(t) = (a^-3 - a'') / (D a^(2q-1))`` with the exact second derivative."""
    a = poly(t)
    if np.any(a <= 0):
        raise DesignInfeasibleError("scaling factor is not positive on the mesh")
    add = poly(t, deriv=2)
    return (a**-3 - add) / (poly.coefficient * a ** (2 * poly.q - 1))


def ramp_from_scaling(poly: ScalingPolynomial, samples=DEFAULT_SAMPLES) -> STARamp:
    if samples < 4:
        raise InvalidArgumentError("need at least 4 samples")
    t = np.linspace(0.0, poly.t_f, int(samples))
    lam = ramp_values(poly, t)
    return STARamp(t, lam, poly.n, poly.q, poly.lam_i, poly.lam_f, poly.t_f)


def design_ramp(n, q, lam_i, lam_f, t_f, samples=DEFAULT_SAMPLES) -> STARamp:
    return ramp_from_scaling(design_scaling(n, q, lam_i, lam_f, t_f), samples)


def ermakov_residual(poly: ScalingPolynomial, ramp: STARamp) -> float:
    """``max |a'' + lam D a^(2q-1) - a^-3|`` over the ramp mesh."""
    if (poly.n, poly.q) != (ramp.n, ramp.q) or not np.isclose(poly.t_f, ramp.t_f):
        raise InvalidArgumentError("polynomial and ramp belong to different designs")
    t = ramp.times
    a = poly(t)
    res = poly(t, deriv=2) + ramp.values * poly.coefficient * a ** (2 * poly.q - 1) - a**-3
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class VariationalState:
    """Ansatz parameters: width, chirp, slope and centre."""

    a: float
    b: float = 0.0
    c: float = 0.0
    xi: float = 0.0

    def as_array(self):
        return np.array([self.a, self.b, self.c, self.xi])


def variational_ode_rhs(state: VariationalState, lam, n, q, x0=0.0):
    """Time derivatives ``(a', b', c', xi')`` from the Euler-Lagrange equations.

    With ``d = x0 - xi`` and ``C_k = table[k] d^(2q-2k) a^(2k)``:

        a'  = 2 a b
        b'  = 1/(2 a^4) - 2 b^2 - lam / ((2n+1) a^2) sum_k k C_k
        c'  = lam sum_k (q - k) C_k / d
        xi' = c
    """
    a, b, c, xi = state.a, state.b, state.c, state.xi
    if not a > 0:
        raise InvalidStateError(f"width must be positive, got {a}")
    table, _ = general_coefficients(n, q)
    k = np.arange(q + 1)
    d = x0 - xi
    terms = table * d ** (2 * q - 2 * k) * a ** (2 * k)
    db = 0.5 / a**4 - 2 * b * b - lam / ((2 * n + 1) * a * a) * np.sum(k * terms)
    # (q - k) C_k / d without dividing by d: lower the power of d by one
    kk = k[:-1]
    dc = lam * np.sum((q - kk) * table[:-1] * d ** (2 * q - 2 * kk - 1) * a ** (2 * kk))
    return 2 * a * b, float(db), float(dc), c


def newton_residual(xi_ddot, lam, a, xi, n, q, x0):
    """Residual of ``xi'' - lam sum_k (q-k) C_k / (x0 - xi) = 0``."""
    _, _, dc, _ = variational_ode_rhs(VariationalState(a, 0.0, 0.0, xi), lam, n, q, x0)
    return xi_ddot - dc


def integrate_variational(ramp, n, q, t_eval, initial=None, x0=0.0, rtol=1e-11, atol=1e-12):
    """Integrate the variational equations under ``ramp`` (a callable lam(t)).

    Starts from the stationary width at ``ramp(0)`` unless ``initial`` is
    given. Returns the solution array of shape ``(4, len(t_eval))``.
    """
    if initial is None:
        initial = VariationalState(scaling_fixed_point(n, q, float(ramp(0.0))))

    def rhs(t, y):
        return variational_ode_rhs(VariationalState(*y), float(ramp(t)), n, q, x0)

    t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(rhs, (t_eval[0], t_eval[-1]), initial.as_array(), t_eval=t_eval,
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise DesignInfeasibleError(sol.message)
    return sol.y


def ansatz_energy(n: int, lam: float, q: int = 2) -> float:
    """Energy of the stationary Hermite-Gaussian ansatz.

    ``(2n+1)/(4 a^2) + 1/2 lam <n|xi^(2q)|n> a^(2q)`` at ``a = a_c``; for
    ``q = 2`` the trap term is ``a^4 lam B(n)``.
    """
    if not lam > 0:
        raise InvalidArgumentError(f"trap strength must be positive, got {lam}")
    a = scaling_fixed_point(n, q, lam)
    if q == 2:
        trap = a**4 * lam * quartic_coefficient(n)
    else:
        trap = 0.5 * lam * hermite_moment(n, q) * a ** (2 * q)
    return float((2 * n + 1) / (4 * a * a) + trap)
