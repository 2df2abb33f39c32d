"""Fourier feature maps for the Gaussian kernel.

A map is a set of frequencies ``n_m`` and weights ``w_m`` defining

    kappa_hat(x, y) = sum_m w_m cos(<n_m, x - y>).

Spherical-radial (SR) maps take the tensor product of the radial
Gauss-Laguerre rule with a spherical rule; RFF, ORF and QMC (Halton) are the
usual baselines.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special
from scipy.spatial.distance import cdist

from .exceptions import PreconditionError
from .radial import KernelSpec, gauss_laguerre, radii
from .spherical import haar_batch, make_rng, okq_weights, sample_sphere

__all__ = [
    "FeatureMap",
    "Dataset",
    "METHODS",
    "SR_METHODS",
    "BASELINE_METHODS",
    "build_sr",
    "build_rff",
    "build_orf",
    "build_qmc_halton",
    "build_map",
    "halton",
    "kappa_hat",
    "feature_matrix",
    "gram_exact",
    "gram_hat",
]

SR_METHODS = ("SR_MC", "SR_OMC", "SR_SOMC", "SR_OKQ_MC", "SR_OKQ_OMC", "SR_OKQ_SOMC")
BASELINE_METHODS = ("RFF", "ORF", "QMC_HALTON")
METHODS = SR_METHODS + BASELINE_METHODS


@dataclass(frozen=True, eq=False)
class FeatureMap:
    spec: KernelSpec
    freqs: np.ndarray
    w: np.ndarray
    method: str
    M_R: int = 0
    M_S: int = 0

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float)
        w = np.array(self.w, dtype=float)
        if freqs.ndim != 2 or freqs.shape[1] != self.spec.d or w.shape != (freqs.shape[0],):
            raise PreconditionError("freqs must be (M, d) and w must be (M,)")
        freqs.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "w", w)

    @property
    def M(self) -> int:
        return self.freqs.shape[0]

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def signed(self) -> bool:
        return bool(np.any(self.w < 0))


@dataclass(frozen=True, eq=False)
class Dataset:
    rows: np.ndarray
    labels: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise PreconditionError("dataset rows must form a 2-d array")
        if not np.all(np.isfinite(rows)):
            raise PreconditionError("dataset contains non-finite entries")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def build_sr(spec: KernelSpec, M_R: int, M_S: int, spherical_kind: str = "omc",
             okq: Optional[dict] = None, seed: int = 0, stream_id: int = 0) -> FeatureMap:
    """Spherical-radial map with frequencies ``r_i theta_j`` and weights ``a_i b_j``.

    ``okq`` (``{"bandwidth": ..., "jitter": ...}``) reweights the spherical rule
    by optimal kernel quadrature. Frequencies are ordered radius-major.
    """
    rule_r = gauss_laguerre(spec.d, M_R)
    r = radii(rule_r, spec)
    rule_s = sample_sphere(spherical_kind, spec.d, M_S, seed, stream_id)
    method = "SR_" + rule_s.kind.upper()
    if okq is not None:
        rule_s = okq_weights(rule_s, okq.get("bandwidth", 1.0), okq.get("jitter"))
        method = "SR_OKQ_" + rule_s.base_kind.upper()
    freqs = (r[:, None, None] * rule_s.theta[None, :, :]).reshape(-1, spec.d)
    w = np.outer(rule_r.a, rule_s.b).ravel()
    return FeatureMap(spec, freqs, w, method, M_R, M_S)


def build_rff(spec: KernelSpec, M: int, seed: int = 0, stream_id: int = 0) -> FeatureMap:
    """i.i.d. frequencies from ``N(0, sigma^-2 I)``."""
    if M < 1:
        raise PreconditionError(f"M must be >= 1, got {M}")
    freqs = make_rng(seed, stream_id).standard_normal((M, spec.d)) / spec.sigma
    return FeatureMap(spec, freqs, np.full(M, 1.0 / M), "RFF")


def build_orf(spec: KernelSpec, M: int, seed: int = 0, stream_id: int = 0) -> FeatureMap:
    """Orthogonal random features.

    Directions are the columns of independent Haar matrices; each column gets
    its own chi(d) radius, so every frequency is marginally ``N(0, sigma^-2 I)``.
    """
    d = spec.d
    if M < 1 or M % d:
        raise PreconditionError(f"ORF needs M to be a positive multiple of d={d}, got {M}")
    rng = make_rng(seed, stream_id)
    blocks = haar_batch(rng, d, M // d)
    dirs = np.transpose(blocks, (0, 2, 1)).reshape(M, d)
    radius = np.sqrt(rng.chisquare(d, size=M))
    return FeatureMap(spec, dirs * (radius / spec.sigma)[:, None], np.full(M, 1.0 / M), "ORF")


def _first_primes(n: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < n:
        if all(cand % p for p in primes if p * p <= cand):
            primes.append(cand)
        cand += 1
    return primes


_PRIMES = _first_primes(64)


def halton(M: int, d: int, start: int = 1) -> np.ndarray:
    """Unscrambled Halton points with indices ``start, ..., start + M - 1``."""
    if d > len(_PRIMES):
        raise PreconditionError(f"Halton is limited to d <= {len(_PRIMES)}, got {d}")
    idx = np.arange(start, start + M, dtype=np.int64)
    out = np.zeros((M, d))
    for j, base in enumerate(_PRIMES[:d]):
        k = idx.copy()
        scale = 1.0 / base
        while np.any(k > 0):
            out[:, j] += (k % base) * scale
            k //= base
            scale /= base
    return out


def build_qmc_halton(spec: KernelSpec, M: int) -> FeatureMap:
    """Deterministic frequencies ``Phi^{-1}(Halton_m) / sigma``, ``m = 1..M``."""
    if M < 1:
        raise PreconditionError(f"M must be >= 1, got {M}")
    freqs = special.ndtri(halton(M, spec.d)) / spec.sigma
    return FeatureMap(spec, freqs, np.full(M, 1.0 / M), "QMC_HALTON")


def build_map(method: str, spec: KernelSpec, M_R: int = 0, M_S: int = 0, M: int = 0,
              seed: int = 0, stream_id: int = 0, okq_bandwidth: float = 1.0,
              okq_jitter: Optional[float] = None) -> FeatureMap:
    """Build any map by method name (``"SR_OMC"``, ``"rff"``, ``"sr-okq-somc"``, ...)."""
    key = method.upper().replace("-", "_")
    if key == "QMC":
        key = "QMC_HALTON"
    if key in SR_METHODS:
        kind = key.rsplit("_", 1)[1].lower()
        okq = {"bandwidth": okq_bandwidth, "jitter": okq_jitter} if "OKQ" in key else None
        return build_sr(spec, M_R, M_S, kind, okq, seed, stream_id)
    if key == "RFF":
        return build_rff(spec, M, seed, stream_id)
    if key == "ORF":
        return build_orf(spec, M, seed, stream_id)
    if key == "QMC_HALTON":
        return build_qmc_halton(spec, M)
    raise PreconditionError(f"unknown method {method!r}")


def config_stream(*parts) -> int:
    """Stable 32-bit stream id for a configuration tuple."""
    return zlib.crc32("|".join(map(str, parts)).encode())


def kappa_hat(fmap: FeatureMap, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (fmap.d,) or y.shape != (fmap.d,):
        raise PreconditionError(f"x and y must be vectors of length {fmap.d}")
    return float(np.dot(fmap.w, np.cos(fmap.freqs @ (x - y))))


def _rows(data) -> np.ndarray:
    return data.rows if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, float))


def feature_matrix(fmap: FeatureMap, data) -> np.ndarray:
    """``n x 2M`` matrix with columns ``sqrt(w_m) cos<n_m, x>, sqrt(w_m) sin<n_m, x>``.

    Its Gram ``Phi Phi^T`` equals ``gram_hat``. Maps with negative weights
    have no real feature matrix; use :func:`gram_hat` for them.
    """
    X = _rows(data)
    if X.shape[1] != fmap.d:
        raise PreconditionError(f"data has d={X.shape[1]} but the map has d={fmap.d}")
    if fmap.signed:
        raise PreconditionError("map has negative weights; use gram_hat / kappa_hat instead")
    proj = X @ fmap.freqs.T
    sw = np.sqrt(fmap.w)
    out = np.empty((X.shape[0], 2 * fmap.M))
    out[:, 0::2] = sw * np.cos(proj)
    out[:, 1::2] = sw * np.sin(proj)
    return out


def _symmetrize_upper(K: np.ndarray) -> np.ndarray:
    iu = np.triu_indices_from(K, 1)
    K[(iu[1], iu[0])] = K[iu]
    return K


def gram_exact(spec: KernelSpec, data) -> np.ndarray:
    X = _rows(data)
    if X.shape[1] != spec.d:
        raise PreconditionError(f"data has d={X.shape[1]} but the kernel has d={spec.d}")
    sq = cdist(X, X, "sqeuclidean")
    return _symmetrize_upper(np.exp(-sq / (2 * spec.sigma**2)))


def gram_hat(fmap: FeatureMap, data) -> np.ndarray:
    """Pairwise ``kappa_hat`` via ``C diag(w) C^T + S diag(w) S^T`` (signed weights allowed)."""
    X = _rows(data)
    if X.shape[1] != fmap.d:
        raise PreconditionError(f"data has d={X.shape[1]} but the map has d={fmap.d}")
    proj = X @ fmap.freqs.T
    C = np.cos(proj)
    S = np.sin(proj)
    K = (C * fmap.w) @ C.T + (S * fmap.w) @ S.T
    # kappa_hat(x, x) = sum(w) exactly; cos^2 + sin^2 is only 1 to rounding
    total = np.sum(fmap.w)
    np.fill_diagonal(K, total)
    K = _symmetrize_upper(K)
    # duplicate points get bit-identical rows (rounding in the products depends on position)
    _, inverse, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    for group in np.flatnonzero(counts > 1):
        idx = np.flatnonzero(inverse == group)
        K[idx, :] = K[idx[0], :]
        K[:, idx] = K[:, idx[0]][:, None]
        K[np.ix_(idx, idx)] = total
    return K
