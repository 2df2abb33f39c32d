"""Quadrature rules on the unit sphere S^{d-1}.

Four families: i.i.d. uniform points (MC), columns of independent Haar
orthogonal matrices (OMC), the antipodally symmetrized variant (SOMC), and
optimal-kernel-quadrature reweighting of any of them (OKQ).

Every sampler is a pure function of ``(seed, stream_id)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .exceptions import PreconditionError, SRFFError
from .orthopoly import zonal_mean

__all__ = [
    "SphericalRule",
    "make_rng",
    "sample_sphere_mc",
    "sample_haar_orthogonal",
    "haar_batch",
    "sample_sphere_omc",
    "sample_sphere_somc",
    "sample_sphere",
    "sphere_kernel_gram",
    "sphere_kernel_mean",
    "okq_weights",
    "SPHERICAL_KINDS",
]

SPHERICAL_KINDS = ("mc", "omc", "somc")


def make_rng(seed: int = 0, stream_id: int = 0) -> np.random.Generator:
    """Independent generator for the pair ``(seed, stream_id)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream_id),)))


@dataclass(frozen=True, eq=False)
class SphericalRule:
    """Nodes ``theta`` (one unit vector per row) and weights ``b``.

    ``kind`` is one of ``"mc"``, ``"omc"``, ``"somc"`` or ``"okq"``; OKQ rules
    also record the kind of their nodes and the sphere-kernel bandwidth.
    """

    d: int
    theta: np.ndarray
    b: np.ndarray
    kind: str
    base_kind: Optional[str] = None
    sphere_bandwidth: Optional[float] = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        b = np.array(self.b, dtype=float)
        if theta.ndim != 2 or theta.shape[1] != self.d or b.shape != (theta.shape[0],):
            raise PreconditionError("theta must be (M_S, d) and b must be (M_S,)")
        theta.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "b", b)

    @property
    def M_S(self) -> int:
        return self.theta.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SphericalRule):
            return NotImplemented
        return (self.d == other.d and self.kind == other.kind
                and self.base_kind == other.base_kind
                and self.sphere_bandwidth == other.sphere_bandwidth
                and np.array_equal(self.theta, other.theta)
                and np.array_equal(self.b, other.b))

    def __hash__(self):
        return hash((self.d, self.kind, self.theta.tobytes(), self.b.tobytes()))

    def integrate(self, func) -> float:
        """Apply the rule to ``func``, which maps an (M_S, d) array to M_S values."""
        return float(np.dot(self.b, func(self.theta)))


def _check_dim(d: int, M_S: int):
    if d < 2:
        raise PreconditionError(f"d must be >= 2, got {d}")
    if M_S < 1:
        raise PreconditionError(f"M_S must be >= 1, got {M_S}")


def _unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    bad = norms == 0
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms[bad] = np.linalg.norm(g[bad], axis=1)
        bad = norms == 0
    return g / norms[:, None]


def sample_sphere_mc(d: int, M_S: int, seed: int = 0, stream_id: int = 0) -> SphericalRule:
    """``M_S`` i.i.d. uniform points on ``S^{d-1}`` with weights ``1/M_S``."""
    _check_dim(d, M_S)
    theta = _unit_rows(make_rng(seed, stream_id), M_S, d)
    return SphericalRule(d, theta, np.full(M_S, 1.0 / M_S), "mc")


def haar_batch(rng: np.random.Generator, d: int, size: Optional[int] = None) -> np.ndarray:
    """Haar-distributed orthogonal matrices, shape ``(d, d)`` or ``(size, d, d)``.

    QR of a Gaussian matrix, with the columns of Q multiplied by the signs of
    diag(R); without that correction Q is not Haar distributed.
    """
    shape = (d, d) if size is None else (size, d, d)
    while True:
        z = rng.standard_normal(shape)
        q, r = np.linalg.qr(z)
        diag = np.diagonal(r, axis1=-2, axis2=-1)
        if np.all(np.abs(diag) > 0):
            break
    return q * np.sign(diag)[..., None, :]


def sample_haar_orthogonal(d: int, seed: int = 0, stream_id: int = 0) -> np.ndarray:
    """One Haar-distributed ``d x d`` orthogonal matrix."""
    if d < 2:
        raise PreconditionError(f"d must be >= 2, got {d}")
    return haar_batch(make_rng(seed, stream_id), d)


def sample_sphere_omc(d: int, M_S: int, seed: int = 0, stream_id: int = 0) -> SphericalRule:
    """Columns of ``M_S / d`` independent Haar matrices, weights ``1/M_S``."""
    _check_dim(d, M_S)
    if M_S % d:
        raise PreconditionError(f"OMC needs M_S to be a multiple of d={d}, got {M_S}")
    blocks = haar_batch(make_rng(seed, stream_id), d, M_S // d)
    # rows of B^T are the columns of B
    theta = np.transpose(blocks, (0, 2, 1)).reshape(M_S, d)
    return SphericalRule(d, theta, np.full(M_S, 1.0 / M_S), "omc")


def sample_sphere_somc(d: int, M_S: int, seed: int = 0, stream_id: int = 0) -> SphericalRule:
    """Blocks ``B_1, -B_1, B_2, -B_2, ...`` of Haar matrices, weights ``1/M_S``."""
    _check_dim(d, M_S)
    if M_S % (2 * d):
        raise PreconditionError(f"SOMC needs M_S to be a multiple of 2d={2 * d}, got {M_S}")
    blocks = haar_batch(make_rng(seed, stream_id), d, M_S // (2 * d))
    cols = np.transpose(blocks, (0, 2, 1))
    theta = np.stack([cols, -cols], axis=1).reshape(M_S, d)
    return SphericalRule(d, theta, np.full(M_S, 1.0 / M_S), "somc")


def sample_sphere(kind: str, d: int, M_S: int, seed: int = 0, stream_id: int = 0) -> SphericalRule:
    samplers = {"mc": sample_sphere_mc, "omc": sample_sphere_omc, "somc": sample_sphere_somc}
    try:
        sampler = samplers[kind.lower()]
    except KeyError:
        raise PreconditionError(f"unknown spherical kind {kind!r}; expected one of "
                                f"{', '.join(SPHERICAL_KINDS)}") from None
    return sampler(d, M_S, seed, stream_id)


def sphere_kernel_gram(theta: np.ndarray, bandwidth: float) -> np.ndarray:
    """Gram matrix of ``exp(-|u - v|^2 / (2 h^2))`` for unit vectors (rows of theta)."""
    cos = np.clip(theta @ theta.T, -1.0, 1.0)
    K = np.exp(-(1.0 - cos) / bandwidth**2)
    return 0.5 * (K + K.T)


def sphere_kernel_mean(d: int, bandwidth: float, tol: float = 1e-12) -> float:
    """Kernel mean ``int exp(-|u - theta|^2 / (2 h^2)) dpi(theta)``, constant in ``u``."""
    if bandwidth <= 0:
        raise PreconditionError("sphere bandwidth must be positive")
    inv_h2 = 1.0 / bandwidth**2
    return zonal_mean(lambda t: math.exp(-(1.0 - t) * inv_h2), d, tol)


def okq_weights(rule: SphericalRule, sphere_bandwidth: float = 1.0,
                jitter: Optional[float] = None) -> SphericalRule:
    """Reweight ``rule`` with optimal kernel quadrature weights.

    Solves ``(K + jitter I) w = mu 1`` where ``K`` is the Gram matrix of the
    Gaussian kernel restricted to the sphere and ``mu`` its (constant) kernel
    mean. Weights may come out negative. ``jitter`` defaults to
    ``1e-10 * M_S``.
    """
    if sphere_bandwidth <= 0:
        raise PreconditionError("sphere bandwidth must be positive")
    theta = rule.theta
    M = rule.M_S
    if jitter is None:
        jitter = 1e-10 * M
    if jitter < 0:
        raise PreconditionError("jitter must be >= 0")
    if M > 1 and len(np.unique(theta, axis=0)) < M:
        raise PreconditionError("OKQ needs distinct nodes; the rule contains duplicates")

    K = sphere_kernel_gram(theta, sphere_bandwidth)
    mu = sphere_kernel_mean(rule.d, sphere_bandwidth)
    try:
        factor = linalg.cho_factor(K + jitter * np.eye(M), lower=True)
    except linalg.LinAlgError as exc:
        raise SRFFError(
            f"sphere-kernel Gram matrix is numerically singular (jitter={jitter:g}); "
            "increase the jitter or use distinct, well-separated nodes") from exc
    w = linalg.cho_solve(factor, np.full(M, mu))
    base = rule.base_kind if rule.kind == "okq" else rule.kind
    return SphericalRule(rule.d, theta, w, "okq", base_kind=base,
                         sphere_bandwidth=float(sphere_bandwidth))
