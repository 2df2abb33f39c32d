"""Radial quadrature: generalized Gauss-Laguerre rule for the Gamma(d/2, 1) density.

After the change of variable ``xi = sigma^2 r^2 / 2`` the radial part of the
Gaussian spectral measure becomes ``p(xi) = xi^{d/2-1} e^{-xi} / Gamma(d/2)``.
Its Gaussian quadrature comes from the Jacobi matrix of the generalized
Laguerre polynomials with ``alpha = d/2 - 1`` (Golub-Welsch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import ConvergenceError, DomainError, PreconditionError
from .orthopoly import beta_coeffs

__all__ = [
    "KernelSpec",
    "RadialRule",
    "tridiagonal_eigen",
    "gauss_laguerre",
    "radii",
    "f_bar",
    "radial_quadrature_error",
    "radial_error_envelope",
]


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel ``exp(-|x - y|^2 / (2 sigma^2))`` on ``R^d``."""

    d: int
    sigma: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise PreconditionError(f"d must be an integer >= 2, got {self.d}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise PreconditionError(f"sigma must be finite and positive, got {self.sigma}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "sigma", float(self.sigma))

    def kernel(self, dist):
        dist = np.asarray(dist, dtype=float)
        return np.exp(-dist**2 / (2 * self.sigma**2))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialRule:
    """Nodes ``xi`` (ascending) and weights ``a`` of the M_R-point rule."""

    order: int
    xi: np.ndarray
    a: np.ndarray
    alpha: float
    d: int

    def __post_init__(self):
        object.__setattr__(self, "xi", _frozen(self.xi))
        object.__setattr__(self, "a", _frozen(self.a))
        if self.xi.shape != (self.order,) or self.a.shape != (self.order,):
            raise PreconditionError("node/weight arrays must have length `order`")

    def __eq__(self, other):
        if not isinstance(other, RadialRule):
            return NotImplemented
        return (self.order == other.order and self.d == other.d
                and self.alpha == other.alpha
                and np.array_equal(self.xi, other.xi) and np.array_equal(self.a, other.a))

    def __hash__(self):
        return hash((self.order, self.d, self.xi.tobytes(), self.a.tobytes()))

    def moment(self, p: int) -> float:
        """Quadrature approximation of ``E[xi^p]``."""
        return float(np.sum(self.a * self.xi**p))


def tridiagonal_eigen(diag, offdiag, max_iter: int = 60):
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal matrix.

    Implicit-shift QL iteration (Wilkinson shift). Only the first row of the
    eigenvector matrix is accumulated, which is all Golub-Welsch needs.

    Returns
    -------
    evals : ndarray, ascending
    first : ndarray, first component of each unit eigenvector
    """
    d = np.array(diag, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = offdiag
    z = np.zeros(n)
    z[0] = 1.0
    eps = np.finfo(float).eps

    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise ConvergenceError(f"QL iteration did not converge for eigenvalue {l}")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # underflow: split the matrix and restart
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    return d[order], z[order]


def gauss_laguerre(d: int, M_R: int) -> RadialRule:
    """Gaussian quadrature for ``p(xi) = xi^{d/2-1} e^{-xi} / Gamma(d/2)``.

    Examples
    --------
    >>> rule = gauss_laguerre(4, 1)
    >>> float(rule.xi[0]), float(rule.a[0])
    (2.0, 1.0)
    """
    if M_R < 1:
        raise PreconditionError(f"M_R must be >= 1, got {M_R}")
    if d < 2:
        raise PreconditionError(f"d must be >= 2, got {d}")
    alpha = d / 2 - 1
    i = np.arange(1, M_R + 1, dtype=float)
    diag = 2 * i - 1 + alpha
    off = np.sqrt(i[:-1] * (i[:-1] + alpha))
    xi, first = tridiagonal_eigen(diag, off)
    a = first**2
    a /= a.sum()
    return RadialRule(order=M_R, xi=xi, a=a, alpha=alpha, d=d)


def radii(rule: RadialRule, spec: KernelSpec) -> np.ndarray:
    """Frequency radii ``r_i = sqrt(2 xi_i) / sigma``."""
    if rule.d != spec.d:
        raise PreconditionError(f"rule has d={rule.d} but kernel has d={spec.d}")
    return np.sqrt(2.0 * rule.xi) / spec.sigma


# Beyond this argument the alternating series loses more than ~e^{2 sqrt(x)} eps.
_SERIES_LIMIT = 25.0


def _f_bar_scalar(d: int, x: float, tol: float) -> float:
    if x == 0.0:
        return 1.0
    if x > _SERIES_LIMIT:
        # closed form: Gamma(nu + 1) x^{-nu/2} J_nu(2 sqrt(x)), nu = d/2 - 1
        nu = d / 2 - 1
        s = math.sqrt(x)
        return math.exp(math.lgamma(nu + 1) - nu * math.log(s)) * float(special.jv(nu, 2 * s))
    # truncate once the exponential-tail envelope x^{N+1}/(N+1)! e^x drops below tol
    n = 0
    log_env = math.inf
    while log_env > math.log(tol):
        n += 1
        log_env = (n + 1) * math.log(x) - math.lgamma(n + 2) + x
    coeffs = beta_coeffs(d, x, n)
    return math.fsum(coeffs.values)


def f_bar(d: int, c2: float, xi, tol: float = 1e-16):
    """Spherical average of ``cos(<omega, x - y>)`` at radius ``sqrt(2 xi) / sigma``.

    ``c2 = |x - y|^2 / (2 sigma^2)``. Summed as the power series in ``xi``
    whose coefficients are ``beta_coeffs(d, c2, .)``, truncated when the
    exponential-tail envelope certifies a remainder below ``tol``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if c2 < 0:
        raise DomainError("c2 must be >= 0")
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0):
        raise DomainError("xi must be >= 0")
    out = np.array([_f_bar_scalar(d, c2 * float(v), tol) for v in xi_arr.ravel()])
    out = np.clip(out, -1.0, 1.0).reshape(xi_arr.shape)
    return out if out.ndim else float(out)


def radial_quadrature_error(rule: RadialRule, spec: KernelSpec, dist: float,
                            method: str = "auto") -> float:
    """Signed radial error ``int fbar p - sum_i a_i fbar(xi_i)`` at ``|x - y| = dist``.

    The exact integral equals the kernel value ``exp(-c2)``. Two routes:

    ``"direct"``
        ``exp(-c2) - sum_i a_i fbar(xi_i)``.
    ``"moments"``
        Expand ``fbar`` in its power series and subtract term by term. The
        terms of degree below ``2 M_R`` vanish by exactness, so the sum starts
        at ``2 M_R``: ``sum_n (-c2)^n / n! * (1 - Q[xi^n] / E[xi^n])``. This
        avoids the cancellation of the direct route, whose floor is ~1e-16.

    ``"auto"`` uses moments for ``c2 <= 2`` and direct otherwise.
    """
    if not (math.isfinite(dist) and dist >= 0):
        raise DomainError(f"dist must be finite and >= 0, got {dist}")
    if rule.d != spec.d:
        raise PreconditionError(f"rule has d={rule.d} but kernel has d={spec.d}")
    if dist == 0:
        return 0.0
    c2 = dist**2 / (2 * spec.sigma**2)
    if method == "auto":
        method = "moments" if c2 <= 2.0 else "direct"
    if method == "direct":
        return math.exp(-c2) - math.fsum(rule.a * f_bar(rule.d, c2, rule.xi))
    if method != "moments":
        raise ValueError(f"unknown method {method!r}")

    half_d = rule.d / 2
    lg_half_d = math.lgamma(half_d)
    log_a = np.log(rule.a)
    log_xi = np.log(rule.xi)
    terms = []
    n = 2 * rule.order
    while True:
        log_ratio = log_a + n * log_xi + lg_half_d - math.lgamma(half_d + n)
        defect = 1.0 - math.fsum(np.exp(log_ratio))
        log_mag = n * math.log(c2) - math.lgamma(n + 1)
        terms.append((-1.0) ** n * math.exp(log_mag) * defect)
        # remaining terms are bounded by the exponential tail c2^{n+1}/(n+1)! e^{c2}
        log_tail = (n + 1) * math.log(c2) - math.lgamma(n + 2) + c2
        total = math.fsum(terms)
        if log_tail < -745 or (total != 0 and log_tail < math.log(1e-17 * abs(total))):
            return total
        n += 1


def radial_error_envelope(d: int, M_R: int, c: float, L: float = 1.0) -> float:
    """``L c^2 / sqrt(Gamma(d/2)) * (c^2 / (2 M_R - 1))^{2 M_R - 1}``.

    ``c = |x - y| / (sqrt(2) sigma)``. ``L`` is an unspecified universal
    constant; only the dependence on ``M_R`` is meaningful.
    """
    if c == 0:
        return 0.0
    k = 2 * M_R - 1
    log_val = (math.log(L) + 2 * math.log(c) - 0.5 * math.lgamma(d / 2)
               + k * (2 * math.log(c) - math.log(k)))
    return math.exp(log_val) if log_val < 709 else math.inf
