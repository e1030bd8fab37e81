"""Tolerance-windowed boundary matching and segmentation metrics.

Boundaries match one-to-one when their time difference is within the
tolerance. Matching is greedy in time order, which attains the maximum
matching cardinality for windows on a line (the test suite proves this
against an exhaustive oracle). Metrics follow the usual boundary-detection
set: precision, recall, F-value, over-segmentation rate, and R-value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InputError
from .postprocess import BoundaryList
from .util import atomic_write


@dataclass(frozen=True)
class MatchCounts:
    n_hit: int
    n_f: int
    n_ref: int

    def __post_init__(self):
        if not 0 <= self.n_hit <= min(self.n_f, self.n_ref):
            raise ValueError(f"inconsistent counts {self}")

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.n_hit + other.n_hit, self.n_f + other.n_f,
                           self.n_ref + other.n_ref)


@dataclass(frozen=True)
class EvalReport:
    counts: MatchCounts
    prc: float
    rcl: float
    f_value: float
    os: float
    r1: float
    r2: float
    r_value: float
    tolerance_s: float


def match_boundaries(pred: BoundaryList, ref: BoundaryList, tolerance_s: float) -> MatchCounts:
    """One-to-one matching of |pred - ref| <= tolerance pairs.

    Two pointers walk both sorted lists; the smaller head advances when the
    pair is out of tolerance. For intervals on a line this greedy scheme is
    maximum-cardinality.
    """
    if tolerance_s < 0:
        raise ValueError("tolerance_s must be >= 0")
    p, r = np.asarray(pred.times), np.asarray(ref.times)
    for name, arr in (("pred", p), ("ref", r)):
        if arr.size > 1 and np.any(np.diff(arr) < 0):
            raise ValueError(f"{name} boundaries are not sorted")
    hits = i = j = 0
    while i < p.size and j < r.size:
        if abs(p[i] - r[j]) <= tolerance_s:
            hits += 1
            i += 1
            j += 1
        elif p[i] < r[j]:
            i += 1
        else:
            j += 1
    return MatchCounts(hits, int(p.size), int(r.size))


def compose_scores(prc: float, rcl: float, os: float) -> tuple[float, float]:
    """F-value (harmonic mean of precision and recall, 0 at 0/0) and
    R-value: 1 - (|r1| + |r2|)/2 with r1 = sqrt((1-RCL)^2 + OS^2) and
    r2 = (-OS + RCL - 1)/sqrt(2)."""
    if prc + rcl > 0:
        f_value = 2.0 * prc * rcl / (prc + rcl)
    else:
        f_value = 0.0
    r1 = math.sqrt((1.0 - rcl) ** 2 + os ** 2)
    r2 = (-os + rcl - 1.0) / math.sqrt(2.0)
    r_value = 1.0 - (abs(r1) + abs(r2)) / 2.0
    return f_value, r_value


def metrics_from_counts(c: MatchCounts, tolerance_s: float = float("nan")) -> EvalReport:
    """PRC = hits/detected (0 when nothing detected), RCL = hits/reference,
    OS = detected/reference - 1, then the composite scores."""
    if c.n_ref < 1:
        raise ValueError("n_ref must be >= 1")
    prc = c.n_hit / c.n_f if c.n_f else 0.0
    rcl = c.n_hit / c.n_ref
    os = c.n_f / c.n_ref - 1.0
    f_value, r_value = compose_scores(prc, rcl, os)
    r1 = math.sqrt((1.0 - rcl) ** 2 + os ** 2)
    r2 = (-os + rcl - 1.0) / math.sqrt(2.0)
    return EvalReport(counts=c, prc=prc, rcl=rcl, f_value=f_value, os=os,
                      r1=r1, r2=r2, r_value=r_value, tolerance_s=tolerance_s)


def evaluate_corpus(preds: Mapping[str, BoundaryList], refs: Mapping[str, BoundaryList],
                    tolerance_s: float, aggregate: str = "micro") -> EvalReport:
    """Corpus-level report over matching utterance sets.

    micro (default): pool hit/detected/reference counts, then compute rates.
    macro: average per-utterance prc/rcl/os, then compose the F and R scores
    from the averaged rates; pooled counts are still reported.
    """
    if set(preds) != set(refs):
        missing = sorted(set(refs) - set(preds))
        extra = sorted(set(preds) - set(refs))
        raise InputError(f"utterance sets differ (missing={missing[:5]}, extra={extra[:5]})")
    if aggregate not in ("micro", "macro"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    per_utt = [match_boundaries(preds[u], refs[u], tolerance_s) for u in sorted(preds)]
    if not per_utt:
        raise ValueError("empty corpus")
    total = per_utt[0]
    for c in per_utt[1:]:
        total = total + c
    if aggregate == "micro":
        return metrics_from_counts(total, tolerance_s)
    rates = [(metrics_from_counts(c, tolerance_s) if c.n_ref else None) for c in per_utt]
    rates = [r for r in rates if r is not None]
    prc = float(np.mean([r.prc for r in rates]))
    rcl = float(np.mean([r.rcl for r in rates]))
    os = float(np.mean([r.os for r in rates]))
    f_value, r_value = compose_scores(prc, rcl, os)
    r1 = math.sqrt((1.0 - rcl) ** 2 + os ** 2)
    r2 = (-os + rcl - 1.0) / math.sqrt(2.0)
    return EvalReport(counts=total, prc=prc, rcl=rcl, f_value=f_value, os=os,
                      r1=r1, r2=r2, r_value=r_value, tolerance_s=tolerance_s)


REPORT_KEYS = ("n_hit", "n_f", "n_ref", "prc", "rcl", "f_value", "os",
               "r1", "r2", "r_value", "tolerance_s")


def _report_values(r: EvalReport) -> dict[str, str]:
    return {
        "n_hit": str(r.counts.n_hit),
        "n_f": str(r.counts.n_f),
        "n_ref": str(r.counts.n_ref),
        "prc": f"{r.prc:.6f}",
        "rcl": f"{r.rcl:.6f}",
        "f_value": f"{r.f_value:.6f}",
        "os": f"{r.os:.6f}",
        "r1": f"{r.r1:.6f}",
        "r2": f"{r.r2:.6f}",
        "r_value": f"{r.r_value:.6f}",
        "tolerance_s": f"{r.tolerance_s:.6f}",
    }


def format_report(r: EvalReport) -> str:
    """Structured text form: one key=value per line."""
    values = _report_values(r)
    return "".join(f"{k}={values[k]}\n" for k in REPORT_KEYS)


def report_csv_header() -> str:
    return ",".join(REPORT_KEYS)


def report_csv_row(r: EvalReport) -> str:
    values = _report_values(r)
    return ",".join(values[k] for k in REPORT_KEYS)


def write_report(path: str | Path, r: EvalReport) -> None:
    with atomic_write(path) as fh:
        fh.write(format_report(r))
