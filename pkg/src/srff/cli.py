"""Command-line harness.

Subcommands::

    srff quad     --radial --d D --mr M_R | --spherical --kind omc --d D --ms M_S [--okq]
    srff approx   --data gaussian|sphere:R|csv:PATH --methods ... --mr ... --ms ... --seeds ...
    srff bounds   --d D --mr ... --ms ... --c ...
    srff verify   [--only 1,3] [--scale 0.1] [--rule FILE]
    srff dataset gen --kind gaussian|sphere --n N --d D [--radius R] --out FILE

``approx`` writes the report CSV described in :mod:`srff.io`: a
``# srff-report v1`` line, a header row, then one row per
``(method, M_R, M_S, seed)``. Baselines (RFF, ORF, QMC_HALTON) use
``M = M_R * M_S`` features so every row compares maps of equal size;
``exact`` compares the exact Gram with itself. Each configuration draws from
the stream ``(seed, crc32(method, M_R, M_S))``, so results do not depend on
the thread count (``--threads`` or ``SRFF_THREADS``).

Exit codes: 0 ok, 1 usage or precondition error, 2 data error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import io as srff_io
from .analysis import (ErrorReport, bound_thm1, bound_thm2, default_ridge, mc_error_series,
                       radial_bound_term, rel_frobenius, replicate_mse, spectral_deviation,
                       spherical_bound_term_mc, spherical_bound_term_omc)
from .datasets import (load_csv, median_heuristic, save_csv, subsample, synthetic_gaussian,
                       synthetic_sphere)
from .exceptions import DataError, PreconditionError, SRFFError
from .features import (METHODS, Dataset, build_map, config_stream, gram_exact,
                       gram_hat)
from .radial import KernelSpec, gauss_laguerre
from .spherical import okq_weights, sample_sphere

__all__ = ["main", "build_parser", "load_csv", "median_heuristic"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _method_list(text: str) -> list[str]:
    out = []
    for tok in text.split(","):
        key = tok.strip().upper().replace("-", "_")
        if key == "QMC":
            key = "QMC_HALTON"
        if key != "EXACT" and key not in METHODS:
            raise argparse.ArgumentTypeError(
                f"unknown method {tok!r}; choose from {', '.join(METHODS)}, exact")
        out.append(key)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srff", description="Spherical-radial Fourier features for the Gaussian kernel")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("quad", help="write a radial or spherical quadrature rule file")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--radial", action="store_true")
    g.add_argument("--spherical", action="store_true")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--mr", type=int, help="radial order M_R")
    q.add_argument("--ms", type=int, help="number of spherical nodes M_S")
    q.add_argument("--kind", choices=("mc", "omc", "somc"), default="omc")
    q.add_argument("--okq", action="store_true", help="reweight spherical nodes by kernel quadrature")
    q.add_argument("--okq-bandwidth", type=float, default=1.0)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default="-")

    a = sub.add_parser("approx", help="kernel-matrix approximation errors over a grid")
    a.add_argument("--data", default="gaussian",
                   help="gaussian | sphere:RADIUS | csv:PATH (default gaussian)")
    a.add_argument("--header", action="store_true", help="CSV input has a header row")
    a.add_argument("--d", type=int, help="dimension (required for synthetic data)")
    a.add_argument("--n", type=int, default=1000, help="points used (seeded subsample)")
    a.add_argument("--data-seed", type=int, default=0)
    a.add_argument("--sigma", default="median", help="bandwidth or 'median' (median heuristic)")
    a.add_argument("--max-pairs", type=int, default=100_000)
    a.add_argument("--methods", type=_method_list, default=["SR_OMC"])
    a.add_argument("--mr", type=_int_list, default=[1])
    a.add_argument("--ms", type=_int_list, required=True)
    a.add_argument("--seeds", type=_int_list, default=[0])
    a.add_argument("--replications", type=int, default=0,
                   help="if >= 100, also estimate the pointwise MSE at the first data pair")
    a.add_argument("--okq-bandwidth", type=float, default=1.0)
    a.add_argument("--okq-jitter", type=float)
    a.add_argument("--spectral", action="store_true", help="also compute the spectral deviation")
    a.add_argument("--ridge", type=float, help="ridge for the spectral deviation")
    a.add_argument("--L", type=float, default=1.0, help="radial-term constant of the bounds")
    a.add_argument("--threads", type=int)
    a.add_argument("--with-timing", action="store_true", help="add a wall_time column")
    a.add_argument("--out", default="-")

    b = sub.add_parser("bounds", help="tabulate error bounds and spherical error series")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--mr", type=_int_list, default=[1])
    b.add_argument("--ms", type=_int_list, required=True)
    b.add_argument("--c", type=_float_list, default=[0.5])
    b.add_argument("--L", type=float, default=1.0)
    b.add_argument("--out", default="-")

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", type=_int_list)
    v.add_argument("--scale", type=float, default=1.0, help="replication multiplier")
    v.add_argument("--rule", help="also validate a rule file")

    ds = sub.add_parser("dataset", help="dataset utilities")
    dsub = ds.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gen = dsub.add_parser("gen", help="write a synthetic dataset as CSV")
    gen.add_argument("--kind", choices=("gaussian", "sphere"), default="gaussian")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--radius", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    return p


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def cmd_quad(args) -> int:
    if args.radial:
        if args.mr is None:
            raise UsageError("quad --radial needs --mr")
        rule = gauss_laguerre(args.d, args.mr)
    else:
        if args.ms is None:
            raise UsageError("quad --spherical needs --ms")
        rule = sample_sphere(args.kind, args.d, args.ms, args.seed, 0)
        if args.okq:
            rule = okq_weights(rule, args.okq_bandwidth)
    text = srff_io.dumps_rule(rule)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


def _load_data(args) -> Dataset:
    src = args.data
    if src.startswith("csv:"):
        data = load_csv(src[4:], header=args.header)
        if args.d is not None and args.d != data.d:
            raise DataError(f"--d {args.d} does not match the data dimension {data.d}")
    elif src == "gaussian" or src.startswith("sphere:"):
        if args.d is None:
            raise UsageError("synthetic data needs --d")
        if src == "gaussian":
            data = synthetic_gaussian(args.n, args.d, seed=args.data_seed)
        else:
            try:
                radius = float(src.split(":", 1)[1])
            except ValueError:
                raise UsageError(f"bad sphere radius in {src!r}") from None
            data = synthetic_sphere(args.n, args.d, radius, seed=args.data_seed)
    else:
        raise UsageError(f"unknown data source {src!r}")
    return subsample(data, args.n, args.data_seed)


def _sigma(args, data: Dataset) -> float:
    if args.sigma == "median":
        return median_heuristic(data, args.max_pairs, args.data_seed)
    try:
        return float(args.sigma)
    except ValueError:
        raise UsageError(f"--sigma must be a number or 'median', got {args.sigma!r}") from None


def _configs(args) -> list[tuple[str, int, int, int]]:
    out = []
    for method in args.methods:
        for M_R in args.mr:
            for M_S in args.ms:
                for seed in args.seeds:
                    out.append((method, M_R, M_S, seed))
    return out


def _run_config(cfg, spec: KernelSpec, data: Dataset, K: np.ndarray, args) -> ErrorReport:
    method, M_R, M_S, seed = cfg
    t0 = time.perf_counter()
    stream = config_stream(method, M_R, M_S)
    M_total = M_R * M_S
    is_sr = method.startswith("SR_")

    def builder(s, rep):
        return build_map(method, spec, M_R=M_R, M_S=M_S, M=M_total, seed=s,
                         stream_id=config_stream(method, M_R, M_S, rep),
                         okq_bandwidth=args.okq_bandwidth, okq_jitter=args.okq_jitter)

    if method == "EXACT":
        K_hat = K
    else:
        fmap = build_map(method, spec, M_R=M_R, M_S=M_S, M=M_total, seed=seed, stream_id=stream,
                         okq_bandwidth=args.okq_bandwidth, okq_jitter=args.okq_jitter)
        K_hat = gram_hat(fmap, data)
    ridge = args.ridge if args.ridge is not None else default_ridge(K)
    report = ErrorReport(method=method, d=spec.d, sigma=spec.sigma, M_R=M_R, M_S=M_S,
                         M_total=M_total, seed=seed, rel_frobenius=rel_frobenius(K, K_hat),
                         ridge=ridge if args.spectral else None)
    if args.spectral:
        report.spectral_dev = spectral_deviation(K, K_hat, ridge)
    x, y = data.rows[0], data.rows[1]
    if args.replications and method != "EXACT":
        mean, _ = replicate_mse(builder, x, y, args.replications, seed)
        report.pointwise_mse = mean
        report.seeds_used = args.replications
    if is_sr:
        c = float(np.linalg.norm(x - y)) / (math.sqrt(2) * spec.sigma)
        report.bound_thm1 = bound_thm1(spec.d, M_R, M_S, c, args.L)
        report.bound_thm2 = bound_thm2(spec.d, M_R, M_S, c, args.L)
    report.wall_time = time.perf_counter() - t0
    return report


def cmd_approx(args) -> int:
    if args.replications and args.replications < 100:
        raise UsageError("--replications must be 0 or >= 100")
    if len(set(args.seeds)) != len(args.seeds):
        raise UsageError("--seeds must be distinct")
    data = _load_data(args)
    if data.n < 2:
        raise DataError("need at least two data points")
    spec = KernelSpec(data.d, _sigma(args, data))
    K = gram_exact(spec, data)
    configs = _configs(args)
    threads = args.threads or int(os.environ.get("SRFF_THREADS", "1"))
    if threads < 1:
        raise UsageError("thread count must be >= 1")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves input order whatever the completion order
        reports = list(pool.map(lambda cfg: _run_config(cfg, spec, data, K, args), configs))
    fh = _open_out(args.out)
    try:
        srff_io.write_reports(reports, fh, with_timing=args.with_timing)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


BOUNDS_COLUMNS = ("d", "M_R", "M_S", "c", "beta", "bound_thm1", "bound_thm2", "radial_term",
                  "spherical_term_mc", "spherical_term_omc", "ratio_omc_mc", "mc_series",
                  "omc_series")


def cmd_bounds(args) -> int:
    d = args.d
    rows = []
    for c in args.c:
        if c < 0:
            raise UsageError("--c values must be >= 0")
        # beta = r |x - y| at the mean radial node xi = d/2
        beta = c * math.sqrt(2 * d)
        for M_R in args.mr:
            for M_S in args.ms:
                t_mc = spherical_bound_term_mc(d, M_R, M_S, c)
                t_omc = spherical_bound_term_omc(d, M_R, M_S, c)
                ratio = t_omc / t_mc if t_mc > 0 and math.isfinite(t_mc) else math.nan
                rows.append((d, M_R, M_S, c, beta, bound_thm1(d, M_R, M_S, c, args.L),
                             bound_thm2(d, M_R, M_S, c, args.L),
                             radial_bound_term(d, M_R, c, args.L), t_mc, t_omc, ratio,
                             mc_error_series(d, beta, M_S),
                             mc_error_series(d, beta, M_S, k_min=4, factor=3)))
    fh = _open_out(args.out)
    try:
        fh.write(",".join(BOUNDS_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(srff_io.fmt(v) for v in row) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def validate_rule(rule) -> list[str]:
    """Consistency problems of a parsed rule (empty list if none)."""
    problems = []
    if isinstance(rule, srff_io.RadialRule):
        ref = gauss_laguerre(rule.d, rule.order)
        if not (np.allclose(rule.xi, ref.xi, rtol=1e-12) and np.allclose(rule.a, ref.a, rtol=1e-10)):
            problems.append("radial nodes/weights differ from the Gauss-Laguerre rule")
    else:
        norms = np.linalg.norm(rule.theta, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-12):
            problems.append(f"spherical nodes not unit length (max deviation {np.max(abs(norms - 1)):.2e})")
        if rule.kind != "okq" and not np.allclose(rule.b, 1.0 / rule.M_S, rtol=1e-12):
            problems.append("uniform-weight rule has non-uniform weights")
        if rule.kind in ("omc", "somc"):
            d = rule.d
            for i in range(0, rule.M_S, d):
                B = rule.theta[i:i + d]
                if np.max(np.abs(B @ B.T - np.eye(d))) > 1e-12:
                    problems.append(f"nodes {i}..{i + d - 1} are not orthonormal")
                    break
    return problems


def cmd_verify(args) -> int:
    from .acceptance import CHECKS, run_checks

    failed = False
    if args.rule:
        try:
            rule = srff_io.read_rule(args.rule)
            problems = validate_rule(rule)
        except (DataError, OSError) as exc:
            problems = [str(exc)]
        status = "FAIL" if problems else "PASS"
        print(f"[{status}] rule file {args.rule}: " + ("; ".join(problems) or "consistent"))
        failed |= bool(problems)
    only = args.only
    if only is not None:
        bad = [n for n in only if n not in CHECKS]
        if bad:
            raise UsageError(f"unknown check numbers {bad}; valid: 1-{len(CHECKS)}")
    if only is None and args.rule:
        only = []
    t0 = time.perf_counter()
    results = run_checks(only, args.scale, report=lambda s: print(s, flush=True)) if only != [] else []
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed in {time.perf_counter() - t0:.1f}s")
    failed |= n_fail > 0
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_dataset(args) -> int:
    if args.kind == "gaussian":
        data = synthetic_gaussian(args.n, args.d, seed=args.seed)
    else:
        data = synthetic_sphere(args.n, args.d, args.radius, seed=args.seed)
    save_csv(data, args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"quad": cmd_quad, "approx": cmd_approx, "bounds": cmd_bounds,
                   "verify": cmd_verify, "dataset": cmd_dataset}[args.command]
        return handler(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"srff: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PreconditionError as exc:
        print(f"srff: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SRFFError as exc:
        print(f"srff: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
