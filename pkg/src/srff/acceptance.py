"""Acceptance checks with runtime budgets.

Each check returns a :class:`CheckResult`; ``run_checks`` drives them for
``srff verify`` and the test suite. ``scale`` multiplies the replication
counts (``scale < 1`` gives a quick smoke run with wider error bars); the
runtime budget is always enforced.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import mc_error_series, parseval_sum, rel_frobenius, spherical_stage_mse
from .datasets import median_heuristic, synthetic_gaussian
from .features import build_rff, build_sr, gram_exact, gram_hat, kappa_hat
from .radial import KernelSpec, f_bar, gauss_laguerre, radial_error_envelope, radial_quadrature_error
from .spherical import haar_batch, make_rng, okq_weights, sample_sphere_omc

__all__ = ["CheckResult", "CHECKS", "run_checks", "MC_SERIES_D3_BETA1"]

# sum_{k>=2} N(3, k) lambda_k^2 at beta = 1, from the closed form
# (1 + sin(2)/2)/2 - sin(1)^2 evaluated at 40 digits
MC_SERIES_D3_BETA1 = 0.019250938432849230


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} "
                f"({self.elapsed:.2f}s / budget {self.budget:g}s)")


def _reps(n: int, scale: float, floor: int = 100) -> int:
    return max(floor, int(round(n * scale)))


def check_quadrature_exactness(scale: float = 1.0):
    worst_mom = worst_sum = 0.0
    szego_ok = True
    for d in (2, 4, 8, 16, 32, 784):
        for M_R in range(1, 11):
            rule = gauss_laguerre(d, M_R)
            worst_sum = max(worst_sum, abs(math.fsum(rule.a) - 1.0))
            exact = 1.0
            for p in range(2 * M_R):
                if p:
                    exact *= d / 2 + p - 1
                approx = math.fsum(rule.a * rule.xi**p)
                worst_mom = max(worst_mom, abs(approx - exact) / exact)
            szego_ok &= bool(rule.xi[-1] <= 4 * M_R + d)
    ok = worst_mom <= 1e-10 and worst_sum <= 1e-12 and szego_ok
    return ok, (f"max moment rel err {worst_mom:.2e} (tol 1e-10), "
                f"max |sum a - 1| {worst_sum:.2e} (tol 1e-12), largest-node bound held: {szego_ok}")


def check_orthogonality(scale: float = 1.0):
    rng = make_rng(2024, 2)
    worst = {}
    for d in (4, 16, 64):
        B = haar_batch(rng, d, 1000)
        G = np.einsum("nij,nik->njk", B, B) - np.eye(d)
        worst[d] = float(np.max(np.sum(np.abs(G), axis=2)))
    ok = max(worst.values()) <= 1e-12
    return ok, "max |B^T B - I|_inf " + ", ".join(f"d={d}: {v:.2e}" for d, v in worst.items())


def check_mc_identity(scale: float = 1.0):
    reps = _reps(100_000, scale)
    parts, ok = [], True
    for M_S in (4, 16):
        theory = MC_SERIES_D3_BETA1 / M_S
        series = mc_error_series(3, 1.0, M_S)
        mean, se = spherical_stage_mse("mc", 3, 1.0, M_S, reps, seed=3, stream_id=M_S)
        z = (mean - theory) / se
        ok &= abs(z) <= 4 and abs(series - theory) <= 1e-12 * theory
        parts.append(f"M_S={M_S}: empirical {mean:.6g} vs series {series:.6g} ({z:+.2f} SE)")
    return ok, "; ".join(parts) + f"; {reps} replications"


def check_omc_bound(scale: float = 1.0):
    reps = _reps(100_000, scale)
    parts, ok = [], True
    for d in (4, 8):
        bound = mc_error_series(d, 1.0, d, k_min=4, factor=3)
        omc, se_o = spherical_stage_mse("omc", d, 1.0, d, reps, seed=4, stream_id=2 * d)
        mc, se_m = spherical_stage_mse("mc", d, 1.0, d, reps, seed=4, stream_id=2 * d + 1)
        sep = (mc - omc) / math.hypot(se_o, se_m)
        ok &= omc <= bound + 4 * se_o and sep > 2
        parts.append(f"d={d}: OMC {omc:.3g} (bound {bound:.3g}), MC {mc:.3g}, separation {sep:.1f} SE")
    return ok, "; ".join(parts)


def check_radial_decay(scale: float = 1.0):
    spec = KernelSpec(4, 1.0)
    c2 = 0.5
    c = math.sqrt(c2)
    orders = range(1, 7)
    log_err = [math.log(abs(radial_quadrature_error(gauss_laguerre(4, m), spec, 1.0))) for m in orders]
    log_env = [math.log(radial_error_envelope(4, m, c)) for m in orders]
    d_err = np.diff(log_err)
    d_env = np.diff(log_env)
    decreasing = bool(np.all(d_err < 0))
    steep = d_err <= d_env
    ok = decreasing and bool(np.all(steep))
    steps = ", ".join(f"{m}->{m + 1}: {e:.2f} vs {v:.2f}"
                      for m, e, v in zip(orders, d_err, d_env))
    return ok, (f"log-error decreasing: {decreasing}; step differences (measured vs envelope) "
                f"{steps}; steepness held at {int(steep.sum())}/{steep.size} steps")


def check_kernel_consistency(scale: float = 1.0):
    spec = KernelSpec(2, 1.0)
    x = np.array([0.3, -0.2])
    y = x + np.array([0.6, 0.8])
    vals = [kappa_hat(build_sr(spec, 8, 256, "omc", seed=s, stream_id=6), x, y) for s in range(100)]
    mean = float(np.mean(vals))
    target = float(spec.kernel(1.0))
    ok = abs(mean - target) <= 0.01
    return ok, (f"mean kappa_hat {mean:.6f} vs kernel exp(-1/2) {target:.6f} "
                f"(|diff| {abs(mean - target):.2e}, tol 0.01); "
                f"literal target exp(-1/4) differs by {abs(mean - math.exp(-0.25)):.3f}")


def _trend_runs(d: int, n: int = 1000, n_seeds: int = 20):
    data = synthetic_gaussian(n, d, seed=7, stream_id=d)
    spec = KernelSpec(d, median_heuristic(data, max_pairs=None))
    K = gram_exact(spec, data)
    rows = []
    for M in (d, 2 * d, 4 * d, 8 * d):
        M_R = 2 if d == 4 else 1
        if (M // M_R) % d:
            M_R = 1
        sr, rff = [], []
        for s in range(n_seeds):
            sr.append(rel_frobenius(K, gram_hat(build_sr(spec, M_R, M // M_R, "omc", seed=s,
                                                         stream_id=0), data)))
            rff.append(rel_frobenius(K, gram_hat(build_rff(spec, M, seed=s, stream_id=1), data)))
        rows.append((M, M_R, np.array(sr), np.array(rff)))
    return rows


def check_trend(scale: float = 1.0):
    ok = True
    parts = []
    for d in (4, 16):
        rows = _trend_runs(d)
        means = [r[2].mean() for r in rows]
        wins = [float(np.mean(r[2] <= r[3])) for r in rows]
        dec = bool(np.all(np.diff(means) < 0))
        ok &= dec and min(wins) >= 0.8
        parts.append(f"d={d}: SR-OMC wins " + "/".join(f"{w:.0%}" for w in wins)
                     + " at M=" + "/".join(str(r[0]) for r in rows)
                     + ", mean d_F " + " > ".join(f"{m:.4f}" for m in means)
                     + f" (decreasing: {dec})")
    return ok, "; ".join(parts)


def check_parseval(scale: float = 1.0):
    worst = 0.0
    for d in (3, 8):
        for beta in (0.5, 1.0, 2.0):
            lhs = parseval_sum(d, beta)
            rhs = 0.5 * (1.0 + f_bar(d, beta * beta, 1.0))
            worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-8, f"max |series - closed form| {worst:.2e} (tol 1e-8)"


def check_okq(scale: float = 1.0):
    d = 4
    rng = make_rng(9, 0)
    cases = []
    for _ in range(5):
        r = float(rng.uniform(0.5, 2.0))
        v = rng.standard_normal(d)
        cases.append((r, v / np.linalg.norm(v)))
    ok = True
    parts = []
    const_err = []
    for M_S in (8, 16, 32):
        uni = sample_sphere_omc(d, M_S, seed=9, stream_id=M_S)
        okq = okq_weights(uni, 1.0)
        const_err.append(abs(math.fsum(okq.b) - 1.0))
        wins = 0
        for r, v in cases:
            exact = f_bar(d, r * r / 4, 1.0)
            f = lambda th: np.cos(r * th @ v)
            wins += abs(okq.integrate(f) - exact) <= abs(uni.integrate(f) - exact)
        ok &= wins >= 4
        parts.append(f"M_S={M_S}: OKQ <= uniform in {wins}/5, constant error {const_err[-1]:.2e}")
    const_ok = bool(np.all(np.diff(const_err) <= 0))
    ok &= const_ok
    return ok, "; ".join(parts) + f"; constant error non-increasing in M_S: {const_ok}"


def check_determinism(scale: float = 1.0):
    from .cli import main

    import contextlib
    import io
    import os
    import tempfile

    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        for threads in (1, 4):
            path = os.path.join(tmp, f"out{threads}.csv")
            args = ["approx", "--data", "gaussian", "--d", "4", "--n", "300",
                    "--methods", "SR_OMC,SR_SOMC,SR_OKQ_OMC,RFF,ORF,QMC_HALTON,exact",
                    "--mr", "1,2", "--ms", "8,16", "--seeds", "0,1,2",
                    "--replications", "100", "--spectral",
                    "--threads", str(threads), "--out", path]
            with contextlib.redirect_stdout(io.StringIO()):
                code = main(args)
            if code != 0:
                return False, f"approx exited with {code} at threads={threads}"
            with open(path, "rb") as fh:
                outs.append(fh.read())
    same = outs[0] == outs[1]
    rows = outs[0].count(b"\n") - 2
    return same, f"{rows} rows, byte-identical across thread counts 1 and 4: {same}"


CHECKS: dict[int, tuple[str, Callable, float]] = {
    1: ("quadrature exactness", check_quadrature_exactness, 5.0),
    2: ("Haar orthogonality", check_orthogonality, 10.0),
    3: ("MC spherical error identity", check_mc_identity, 60.0),
    4: ("OMC bound and OMC < MC", check_omc_bound, 120.0),
    5: ("radial decay exponent", check_radial_decay, 5.0),
    6: ("kernel consistency", check_kernel_consistency, 10.0),
    7: ("SR-OMC vs RFF trend", check_trend, 300.0),
    8: ("Parseval closure", check_parseval, 5.0),
    9: ("OKQ sanity", check_okq, 30.0),
    10: ("determinism", check_determinism, 60.0),
}


def run_check(number: int, scale: float = 1.0) -> CheckResult:
    name, fn, budget = CHECKS[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn(scale)
    except Exception as exc:  # a crash is a failed check, reported with its cause
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    if elapsed >= budget:
        ok = False
        detail += " [over runtime budget]"
    return CheckResult(number, name, bool(ok), detail, elapsed, budget)


def run_checks(only: Optional[Sequence[int]] = None, scale: float = 1.0,
               report: Optional[Callable[[str], None]] = None) -> list[CheckResult]:
    results = []
    for number in (only or sorted(CHECKS)):
        res = run_check(number, scale)
        if report is not None:
            report(res.line())
        results.append(res)
    return results
