"""Error metrics, bound evaluators and replication experiments."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import ConvergenceError, PreconditionError, SRFFError
from .features import FeatureMap, kappa_hat
from .orthopoly import harmonic_tail_bound, lambda_k, log_harmonic_dim
from .radial import f_bar, radial_error_envelope
from .spherical import haar_batch, make_rng

__all__ = [
    "ErrorReport",
    "REPORT_FIELDS",
    "rel_frobenius",
    "spectral_deviation",
    "default_ridge",
    "radial_bound_term",
    "spherical_bound_term_mc",
    "spherical_bound_term_omc",
    "bound_thm1",
    "bound_thm2",
    "mc_error_series",
    "parseval_sum",
    "replicate_mse",
    "spherical_stage_mse",
]


@dataclass
class ErrorReport:
    method: str
    d: int
    sigma: float
    M_R: int
    M_S: int
    M_total: int
    seed: int
    rel_frobenius: float
    spectral_dev: Optional[float] = None
    pointwise_mse: Optional[float] = None
    seeds_used: int = 1
    bound_thm1: Optional[float] = None
    bound_thm2: Optional[float] = None
    ridge: Optional[float] = None
    wall_time: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("rel_frobenius", "spectral_dev"):
            val = getattr(self, name)
            if val is not None and not (val >= 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be finite and >= 0, got {val}")

    def as_dict(self) -> dict:
        return asdict(self)


REPORT_FIELDS = tuple(ErrorReport.__dataclass_fields__)


def rel_frobenius(K, K_hat) -> float:
    """``|K - K_hat|_F / |K|_F``."""
    K = np.asarray(K, dtype=float)
    K_hat = np.asarray(K_hat, dtype=float)
    if K.shape != K_hat.shape:
        raise PreconditionError(f"shape mismatch: {K.shape} vs {K_hat.shape}")
    denom = np.linalg.norm(K)
    if denom == 0:
        raise PreconditionError("reference matrix has zero Frobenius norm")
    return float(np.linalg.norm(K - K_hat) / denom)


def default_ridge(K) -> float:
    K = np.asarray(K, dtype=float)
    return 1e-8 * float(np.trace(K)) / K.shape[0]


def spectral_deviation(K, K_hat, ridge: Optional[float] = None) -> float:
    """``| (K + ridge I)^{-1/2} (K_hat + ridge I) (K + ridge I)^{-1/2} - I |_2``.

    ``ridge`` defaults to ``1e-8 * trace(K) / n``; Gaussian Gram matrices of
    a few thousand points are singular to working precision without it.
    Both matrices are shifted so that ``K_hat = K`` gives exactly 0; with
    ``ridge = 0`` this is the unregularized deviation.
    """
    K = np.asarray(K, dtype=float)
    K_hat = np.asarray(K_hat, dtype=float)
    if K.shape != K_hat.shape or K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise PreconditionError("K and K_hat must be square matrices of the same shape")
    if ridge is None:
        ridge = default_ridge(K)
    n = K.shape[0]
    evals, V = np.linalg.eigh(0.5 * (K + K.T) + ridge * np.eye(n))
    if evals[0] <= 0:
        raise SRFFError(f"K + ridge*I is not positive definite (min eigenvalue {evals[0]:.3g}); "
                        "increase the ridge")
    W = (V / np.sqrt(evals)) @ V.T
    D = W @ (K_hat + ridge * np.eye(n)) @ W
    D = 0.5 * (D + D.T) - np.eye(n)
    return float(np.max(np.abs(np.linalg.eigvalsh(D))))


def _exp_or_inf(log_val: float) -> float:
    return math.exp(log_val) if log_val < 709.7 else math.inf


def radial_bound_term(d: int, M_R: int, c: float, L: float = 1.0) -> float:
    """Radial part of both bounds (including the outer factor 2)."""
    return 2.0 * radial_error_envelope(d, M_R, c, L)


def _check_bound_args(d, M_R, M_S, c, L):
    if d < 2 or M_R < 1 or M_S < 1 or c < 0 or L <= 0:
        raise PreconditionError("need d >= 2, M_R >= 1, M_S >= 1, c >= 0, L > 0")


def spherical_bound_term_mc(d: int, M_R: int, M_S: int, c: float) -> float:
    """``2 * (8 / M_S) * A^2 c^4 exp(4 A c^2)`` with ``A = (4 M_R + d) / (d - 1)``."""
    if c == 0:
        return 0.0
    A = (4 * M_R + d) / (d - 1)
    return _exp_or_inf(math.log(16.0 / M_S) + 2 * math.log(A) + 4 * math.log(c) + 4 * A * c * c)


def spherical_bound_term_omc(d: int, M_R: int, M_S: int, c: float) -> float:
    """``2 * (2 / M_S) * A^4 c^8 exp(4 A c^2)`` with ``A = (4 M_R + d) / (d - 1)``."""
    if c == 0:
        return 0.0
    A = (4 * M_R + d) / (d - 1)
    return _exp_or_inf(math.log(4.0 / M_S) + 4 * math.log(A) + 8 * math.log(c) + 4 * A * c * c)


def bound_thm1(d: int, M_R: int, M_S: int, c: float, L: float = 1.0) -> float:
    """Mean-square error bound for SR maps with Monte Carlo spherical nodes.

    ``c = |x - y| / (sqrt(2) sigma)``; ``L`` is the unspecified constant of the
    radial term. Returns ``inf`` on overflow.
    """
    _check_bound_args(d, M_R, M_S, c, L)
    return radial_bound_term(d, M_R, c, L) + spherical_bound_term_mc(d, M_R, M_S, c)


def bound_thm2(d: int, M_R: int, M_S: int, c: float, L: float = 1.0) -> float:
    """Mean-square error bound for SR maps with orthogonal Monte Carlo nodes."""
    _check_bound_args(d, M_R, M_S, c, L)
    return radial_bound_term(d, M_R, c, L) + spherical_bound_term_omc(d, M_R, M_S, c)


def _harmonic_energy(d: int, beta: float, k_min: int, rel_tol: float, tol: float,
                     k_cap: int = 400) -> float:
    if beta == 0:
        return 1.0 if k_min == 0 else 0.0
    terms = []
    k = k_min + (k_min % 2)
    while k <= k_cap:
        lam = lambda_k(d, beta, k, tol)
        terms.append(math.exp(log_harmonic_dim(d, k)) * lam * lam)
        total = math.fsum(terms)
        if total > 0 and harmonic_tail_bound(d, beta, k + 2) < rel_tol * total:
            return total
        k += 2
    raise ConvergenceError(f"harmonic series did not converge by k={k_cap}")


def mc_error_series(d: int, beta: float, M_S: int, k_min: int = 2, factor: float = 1.0,
                    rel_tol: float = 1e-12, tol: float = 1e-13) -> float:
    """``(factor / M_S) * sum_{k >= k_min} N(d, k) lambda_k^2`` at ``beta = r |x - y|``.

    With ``k_min=2, factor=1`` this is the exact mean-square error of the
    Monte Carlo spherical rule; with ``k_min=4, factor=3`` it bounds the
    orthogonal Monte Carlo error. Summation stops when the coefficient bound
    certifies the remaining mass below ``rel_tol`` of the partial sum.
    """
    if beta < 0 or M_S < 1:
        raise PreconditionError("need beta >= 0 and M_S >= 1")
    return factor / M_S * _harmonic_energy(d, beta, k_min, rel_tol, tol)


def parseval_sum(d: int, beta: float, rel_tol: float = 1e-13, tol: float = 1e-13) -> float:
    """``sum_{k >= 0} N(d, k) lambda_k^2``, i.e. the sphere average of ``cos^2``."""
    return _harmonic_energy(d, beta, 0, rel_tol, tol)


def _mean_and_se(sq: np.ndarray) -> tuple[float, float]:
    n = sq.size
    mean = float(np.mean(sq))
    se = float(np.std(sq, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def replicate_mse(map_builder: Callable[[int, int], FeatureMap], x, y, replications: int,
                  seed: int = 0) -> tuple[float, float]:
    """Empirical ``E|kappa - kappa_hat|^2`` and its standard error.

    ``map_builder(seed, stream_id)`` is called once per replication with
    ``stream_id = 0, 1, ...``; each replication therefore has its own
    independent random stream and the result does not depend on the order in
    which replications are evaluated.
    """
    if replications < 100:
        raise PreconditionError("replications must be >= 100")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sq = np.empty(replications)
    exact = None
    for rep in range(replications):
        fmap = map_builder(seed, rep)
        if exact is None:
            exact = float(fmap.spec.kernel(np.linalg.norm(x - y)))
        sq[rep] = (exact - kappa_hat(fmap, x, y)) ** 2
    return _mean_and_se(sq)


def spherical_stage_mse(kind: str, d: int, beta: float, M_S: int, replications: int,
                        seed: int = 0, stream_id: int = 0,
                        chunk: int = 20000) -> tuple[float, float]:
    """Mean-square error of the spherical rule alone on ``theta -> cos(beta <v, theta>)``.

    The radius is fixed (no radial rule), so this is exactly the quantity
    whose expectation :func:`mc_error_series` describes. ``kind`` is ``"mc"``
    or ``"omc"``. By rotation invariance ``v`` is the first basis vector.
    Rules are drawn in vectorized chunks from one ``(seed, stream_id)``
    stream.
    """
    kind = kind.lower()
    if kind not in ("mc", "omc"):
        raise PreconditionError("kind must be 'mc' or 'omc'")
    if kind == "omc" and M_S % d:
        raise PreconditionError(f"OMC needs M_S to be a multiple of d={d}, got {M_S}")
    # sphere average of cos(beta <v, .>) is fbar at c2 * xi = beta^2 / 4
    exact = f_bar(d, beta * beta / 4, 1.0)
    rng = make_rng(seed, stream_id)
    out = []
    done = 0
    while done < replications:
        n = min(chunk, replications - done)
        if kind == "mc":
            g = rng.standard_normal((n, M_S, d))
            first = g[..., 0] / np.linalg.norm(g, axis=-1)
        else:
            B = haar_batch(rng, d, n * (M_S // d))
            # first coordinate of every column
            first = B[:, 0, :].reshape(n, M_S)
        est = np.mean(np.cos(beta * first), axis=1)
        out.append((est - exact) ** 2)
        done += n
    return _mean_and_se(np.concatenate(out))
