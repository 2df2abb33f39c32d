"""Text formats: quadrature rule files and error-report CSV.

Rule file (``srff-rule v1``)::

    srff-rule v1
    type spherical
    d 4
    kind okq base omc bandwidth 1
    node 0.5 -0.5 0.5 0.5 weight 0.25
    ...

Radial files use ``type radial`` and carry ``alpha`` instead of ``kind``;
their nodes are the scalar ``xi_i``. Floats are written with 17 significant
digits, which round-trips IEEE doubles exactly.

Report CSV: a ``# srff-report v1`` line, then a header row with
:data:`REPORT_COLUMNS`, one row per configuration. ``wall_time`` is only
written when requested so that reports stay byte-reproducible.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, TextIO, Union

import numpy as np

from .analysis import ErrorReport
from .exceptions import DataError
from .radial import RadialRule
from .spherical import SphericalRule

__all__ = [
    "RULE_MAGIC",
    "REPORT_MAGIC",
    "REPORT_COLUMNS",
    "fmt",
    "dumps_rule",
    "loads_rule",
    "write_rule",
    "read_rule",
    "write_reports",
    "write_matrix_csv",
]

RULE_MAGIC = "srff-rule v1"
REPORT_MAGIC = "# srff-report v1"
REPORT_COLUMNS = ("method", "d", "sigma", "M_R", "M_S", "M_total", "seed",
                  "rel_frobenius", "spectral_dev", "pointwise_mse", "seeds_used",
                  "bound_thm1", "bound_thm2", "ridge")

Rule = Union[RadialRule, SphericalRule]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def dumps_rule(rule: Rule) -> str:
    lines = [RULE_MAGIC]
    if isinstance(rule, RadialRule):
        lines += ["type radial", f"d {rule.d}", f"alpha {fmt(rule.alpha)}"]
        nodes = rule.xi[:, None]
        weights = rule.a
    elif isinstance(rule, SphericalRule):
        lines += ["type spherical", f"d {rule.d}"]
        kind = f"kind {rule.kind}"
        if rule.kind == "okq":
            kind += f" base {rule.base_kind} bandwidth {fmt(rule.sphere_bandwidth)}"
        lines.append(kind)
        nodes = rule.theta
        weights = rule.b
    else:
        raise TypeError(f"cannot serialize {type(rule).__name__}")
    for node, w in zip(nodes, weights):
        lines.append("node " + " ".join(fmt(v) for v in node) + " weight " + fmt(w))
    return "\n".join(lines) + "\n"


def _float(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise DataError(f"line {lineno}: expected a number, got {tok!r}") from None


def loads_rule(text: str) -> Rule:
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0][1] != RULE_MAGIC:
        raise DataError(f"line 1: missing '{RULE_MAGIC}' header")
    meta = {}
    nodes, weights = [], []
    for lineno, ln in lines[1:]:
        tok = ln.split()
        if tok[0] == "node":
            if "weight" not in tok or tok.index("weight") != len(tok) - 2:
                raise DataError(f"line {lineno}: expected 'node <coords...> weight <w>'")
            nodes.append([_float(t, lineno) for t in tok[1:-2]])
            weights.append(_float(tok[-1], lineno))
        elif tok[0] in ("type", "d", "alpha") and len(tok) == 2:
            meta[tok[0]] = tok[1]
        elif tok[0] == "kind":
            meta["kind"] = tok[1] if len(tok) > 1 else ""
            extra = tok[2:]
            if len(extra) % 2:
                raise DataError(f"line {lineno}: malformed kind line")
            meta.update(zip(extra[0::2], extra[1::2]))
        else:
            raise DataError(f"line {lineno}: unrecognized entry {tok[0]!r}")

    if "type" not in meta or "d" not in meta:
        raise DataError("rule file lacks 'type' or 'd'")
    try:
        d = int(meta["d"])
    except ValueError:
        raise DataError(f"invalid dimension {meta['d']!r}") from None
    if not nodes:
        raise DataError("rule file contains no nodes")
    width = {len(n) for n in nodes}
    if meta["type"] == "radial":
        if width != {1}:
            raise DataError("radial nodes must be scalars")
        alpha = float(meta.get("alpha", d / 2 - 1))
        return RadialRule(order=len(nodes), xi=np.array(nodes)[:, 0], a=np.array(weights),
                          alpha=alpha, d=d)
    if meta["type"] == "spherical":
        if width != {d}:
            raise DataError(f"spherical nodes must have {d} components")
        kind = meta.get("kind")
        if kind not in ("mc", "omc", "somc", "okq"):
            raise DataError(f"unknown spherical kind {kind!r}")
        bw = meta.get("bandwidth")
        return SphericalRule(d, np.array(nodes), np.array(weights), kind,
                             base_kind=meta.get("base"),
                             sphere_bandwidth=None if bw is None else float(bw))
    raise DataError(f"unknown rule type {meta['type']!r}")


def write_rule(rule: Rule, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_rule(rule))


def read_rule(path) -> Rule:
    with open(path) as fh:
        return loads_rule(fh.read())


def write_reports(reports: Iterable[ErrorReport], fh: TextIO, with_timing: bool = False) -> None:
    cols = REPORT_COLUMNS + (("wall_time",) if with_timing else ())
    fh.write(REPORT_MAGIC + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(cols)
    for rep in reports:
        row = rep.as_dict()
        writer.writerow([fmt(row[c]) for c in cols])


def reports_to_string(reports: Iterable[ErrorReport], with_timing: bool = False) -> str:
    buf = io.StringIO()
    write_reports(reports, buf, with_timing)
    return buf.getvalue()


def write_matrix_csv(M, fh: TextIO) -> None:
    """Row-major CSV with 17 significant digits."""
    for row in np.atleast_2d(M):
        fh.write(",".join(fmt(v) for v in row) + "\n")
