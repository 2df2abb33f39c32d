"""Special functions for the spherical-radial construction.

Normalized generalized Laguerre polynomials (radial side), Gegenbauer
polynomials normalized to ``P_k(1) = 1`` (spherical side), dimensions of
spherical-harmonic spaces, and the two series that describe the integrand
``cos(<omega, x - y>)``: the power-series coefficients of its spherical
average and its Gegenbauer coefficients on the sphere.

Gamma ratios are evaluated in log space throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "SeriesCoeffs",
    "laguerre_normalized",
    "gegenbauer",
    "harmonic_dim",
    "log_harmonic_dim",
    "sphere_constant",
    "zonal_mean",
    "beta_coeffs",
    "lambda_bound",
    "lambda_k",
    "lambda_coeffs",
    "harmonic_tail_bound",
]

@dataclass(frozen=True)
class SeriesCoeffs:
    """Truncated coefficient sequence with a certified bound on the dropped tail."""

    values: tuple[float, ...]
    truncation_index: int
    tail_bound: float

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def laguerre_normalized(m: int, alpha: float, x):
    """Orthonormal generalized Laguerre polynomial ``l_m^alpha(x)``.

    Orthonormal with respect to ``x^alpha e^{-x} / Gamma(alpha + 1)`` on
    ``[0, inf)``. Evaluated with the three-term recurrence of the normalized
    family, which stays finite where ``sqrt(m! / Gamma(m + alpha + 1)) L_m``
    would overflow.
    """
    if m < 0:
        raise DomainError(f"degree must be non-negative, got {m}")
    if not alpha > -1:
        raise DomainError(f"alpha must be > -1, got {alpha}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise DomainError("laguerre_normalized is defined for x >= 0")

    prev = np.zeros_like(x_arr)
    cur = np.ones_like(x_arr)
    for n in range(m):
        nxt = ((2 * n + 1 + alpha - x_arr) * cur
               - math.sqrt(n * (n + alpha)) * prev) / math.sqrt((n + 1) * (n + alpha + 1))
        prev, cur = cur, nxt
    return cur if cur.ndim else float(cur)


def gegenbauer(k: int, d: int, t):
    """Gegenbauer polynomial on ``S^{d-1}`` normalized so that ``P_k(1) = 1``."""
    if k < 0:
        raise DomainError(f"degree must be non-negative, got {k}")
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if isinstance(t, float):
        return _gegenbauer_scalar(k, d, t)
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1):
        raise DomainError("gegenbauer is defined for |t| <= 1")

    prev = np.ones_like(t_arr)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = t_arr.copy()
    for j in range(1, k):
        nxt = ((2 * j + d - 2) * t_arr * cur - j * prev) / (j + d - 2)
        prev, cur = cur, nxt
    return cur if cur.ndim else float(cur)


def _gegenbauer_scalar(k: int, d: int, t: float) -> float:
    if abs(t) > 1:
        raise DomainError("gegenbauer is defined for |t| <= 1")
    if k == 0:
        return 1.0
    prev, cur = 1.0, t
    for j in range(1, k):
        prev, cur = cur, ((2 * j + d - 2) * t * cur - j * prev) / (j + d - 2)
    return cur


def log_harmonic_dim(d: int, k: int) -> float:
    """``log N(d, k)``, finite for any size."""
    if d < 2 or k < 0:
        raise DomainError(f"need d >= 2 and k >= 0, got d={d}, k={k}")
    if k == 0:
        return 0.0
    if d == 2:
        return math.log(2.0)
    return (math.log(2 * k + d - 2) - math.log(k)
            + math.lgamma(k + d - 2) - math.lgamma(d - 1) - math.lgamma(k))


def harmonic_dim(d: int, k: int) -> int:
    """Dimension ``N(d, k)`` of degree-``k`` spherical harmonics on ``S^{d-1}`` (exact integer)."""
    if d < 2 or k < 0:
        raise DomainError(f"need d >= 2 and k >= 0, got d={d}, k={k}")
    if k == 0:
        return 1
    if d == 2:
        return 2
    return (2 * k + d - 2) * math.comb(k + d - 3, d - 2) // k


def sphere_constant(d: int) -> float:
    """``Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2))``, the density of ``<v, theta>``."""
    return math.exp(math.lgamma(d / 2) - 0.5 * math.log(math.pi) - math.lgamma((d - 1) / 2))


def zonal_mean(func: Callable[[float], float], d: int, tol: float = 1e-13,
               limit: int = 200) -> float:
    """Average of ``func(<v, theta>)`` over the uniform measure on ``S^{d-1}``.

    This is the one-dimensional Funk-Hecke integral
    ``c_d * int_{-1}^{1} func(t) (1 - t^2)^{(d-3)/2} dt``. For ``d = 2`` the
    weight is singular at the endpoints and the integral is taken in the
    angle ``t = cos(phi)`` instead.
    """
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if d == 2:
        val, err, info = _quad(lambda phi: func(math.cos(phi)), 0.0, math.pi, tol, limit)
        scale = 1.0 / math.pi
    else:
        expo = (d - 3) / 2
        if expo == 0:
            integrand = func
        else:
            def integrand(t):
                return func(t) * (1.0 - t * t) ** expo
        val, err, info = _quad(integrand, -1.0, 1.0, tol, limit)
        scale = sphere_constant(d)
    return scale * val


def _quad(f, a, b, tol, limit):
    res = integrate.quad(f, a, b, epsabs=tol, epsrel=min(tol, 1e-10), limit=limit,
                         full_output=1)
    val, err = res[0], res[1]
    # a fourth element is QUADPACK's warning message (ier > 0)
    if len(res) > 3 and err > tol:
        raise ConvergenceError(
            f"adaptive quadrature did not reach tol={tol:g} (error estimate {err:g}): {res[3]}")
    return val, err, res[2]


def beta_coeffs(d: int, c2: float, n_max: int, xi: float = 1.0) -> SeriesCoeffs:
    """Power-series coefficients of the spherical average ``fbar(xi)``.

    ``values[n] = (-c2)^n Gamma(d/2) / (n! Gamma(d/2 + n))`` where
    ``c2 = |x - y|^2 / (2 sigma^2)``. ``tail_bound`` bounds
    ``sum_{n > n_max} |values[n]| xi^n`` (ratio test on the majorant).
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if c2 < 0 or xi < 0:
        raise DomainError("c2 and xi must be >= 0")
    half_d = d / 2
    lg_half_d = math.lgamma(half_d)
    vals = []
    for n in range(n_max + 1):
        if n == 0:
            vals.append(1.0)
        elif c2 == 0:
            vals.append(0.0)
        else:
            logmag = n * math.log(c2) + lg_half_d - math.lgamma(n + 1) - math.lgamma(half_d + n)
            vals.append((-1.0) ** n * math.exp(logmag))

    x = c2 * xi
    if x == 0:
        tail = 0.0
    else:
        n1 = n_max + 1
        log_next = n1 * math.log(x) + lg_half_d - math.lgamma(n1 + 1) - math.lgamma(half_d + n1)
        # successive-term ratios x / ((n+1)(d/2+n)) decrease in n
        q = x / ((n1 + 1) * (half_d + n1))
        tail = math.exp(log_next) / (1 - q) if q < 1 else math.inf
    return SeriesCoeffs(tuple(vals), n_max, tail)


def lambda_bound(d: int, beta: float, k: int) -> float:
    """Upper bound ``Gamma((d-1)/2) / Gamma(k + (d-1)/2) * (beta / 2)^k`` on ``|lambda_k|``."""
    if k == 0:
        return 1.0
    if beta == 0:
        return 0.0
    h = (d - 1) / 2
    return math.exp(math.lgamma(h) - math.lgamma(k + h) + k * math.log(beta / 2))


def harmonic_tail_bound(d: int, beta: float, k: int) -> float:
    """Certified bound on ``sum_{j >= k} N(d, j) lambda_j^2`` from :func:`lambda_bound`."""
    if beta == 0:
        return 0.0
    k += k % 2  # odd coefficients vanish

    def majorant(j):
        return math.exp(log_harmonic_dim(d, j) + 2 * math.log(lambda_bound(d, beta, j)))

    t0 = majorant(k)
    q = majorant(k + 2) / t0
    # consecutive ratios of the majorant are non-increasing in j
    return t0 / (1 - q) if q < 1 else math.inf


def lambda_k(d: int, beta: float, k: int, tol: float = 1e-13) -> float:
    """One Gegenbauer coefficient of ``cos(beta <v, .>)``; exactly 0 for odd ``k``."""
    if k % 2 == 1 or (beta == 0 and k > 0):
        return 0.0
    if beta == 0:
        return 1.0
    return zonal_mean(lambda t: math.cos(beta * t) * gegenbauer(k, d, t), d, tol)


def lambda_coeffs(d: int, beta: float, k_max: int, tol: float = 1e-13) -> SeriesCoeffs:
    """Gegenbauer coefficients of ``n -> cos(beta <v, n>)`` on ``S^{d-1}``.

    ``values[k] = c_d * int cos(beta t) P_k(t) (1 - t^2)^{(d-3)/2} dt``, by
    adaptive quadrature to absolute tolerance ``tol``. Odd coefficients are
    exactly zero by parity and are not integrated. ``tail_bound`` bounds
    ``sum_{k > k_max} N(d, k) lambda_k^2``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    if beta < 0:
        raise DomainError("beta must be >= 0")
    vals = tuple(lambda_k(d, beta, k, tol) for k in range(k_max + 1))
    return SeriesCoeffs(vals, k_max, harmonic_tail_bound(d, beta, k_max + 1))
