"""Forecast error metrics and the Wilcoxon signed-rank comparison.

Percentage errors follow the underprediction-positive convention:
pe = 100 * (actual - forecast) / actual, so a positive mean percentage
error means the forecasts run low.
"""

import csv
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from .errors import MetricError, ParameterError, ShapeError

__all__ = [
    "ErrorRecord",
    "MetricsSummary",
    "WilcoxonResult",
    "percentage_errors",
    "summarize",
    "wilcoxon_signed_rank",
    "write_metrics_csv",
]

A_BETTER = "A better"
B_BETTER = "B better"
INDISTINGUISHABLE = "indistinguishable"


@dataclass(frozen=True)
class ErrorRecord:
    date: date | None
    hour: int
    actual: float
    forecast: float
    pe: float  # percent, positive = underprediction
    ape: float  # |pe|


@dataclass(frozen=True)
class MetricsSummary:
    mape: float
    median_ape: float
    rmse: float
    mpe: float
    std_pe: float
    n_records: int
    std_pe_degenerate: bool = False


def percentage_errors(actual, forecast, day: date | None = None,
                      hours: Sequence[int] | None = None) -> list[ErrorRecord]:
    """Per-sample signed and absolute percentage errors."""
    a = np.asarray(actual, dtype=float).ravel()
    f = np.asarray(forecast, dtype=float).ravel()
    if a.shape != f.shape:
        raise ShapeError(f"actual has {a.size} entries, forecast {f.size}")
    zero = np.flatnonzero(a == 0.0)
    if zero.size:
        raise MetricError(f"actual value is zero at index {zero[0]}")
    if hours is None:
        hours = range(a.size)
    pe = 100.0 * (a - f) / a
    return [
        ErrorRecord(day, int(h), float(av), float(fv), float(p), float(abs(p)))
        for h, av, fv, p in zip(hours, a, f, pe)
    ]


def summarize(records: Sequence[ErrorRecord]) -> MetricsSummary:
    """MAPE, median APE, RMSE, MPE and the sample std of PE over records.

    RMSE is in series units. With a single record the PE std is undefined
    and reported as 0 with `std_pe_degenerate` set.
    """
    if not records:
        raise ParameterError("no error records to summarize")
    pe = np.array([r.pe for r in records])
    ape = np.abs(pe)
    err = np.array([r.actual - r.forecast for r in records])
    degenerate = len(records) == 1
    return MetricsSummary(
        mape=float(ape.mean()),
        median_ape=float(np.median(ape)),
        rmse=float(np.sqrt((err ** 2).mean())),
        mpe=float(pe.mean()),
        std_pe=0.0 if degenerate else float(pe.std(ddof=1)),
        n_records=len(records),
        std_pe_degenerate=degenerate,
    )


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min(W+, W-)
    p_value: float
    decision: str
    w_plus: float
    w_minus: float
    n_effective: int


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..N with ties sharing the average of their rank span."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, t_obs: float) -> float:
    # Subset-sum count of the null W+ distribution on doubled ranks
    # (midranks are half-integers, so 2r is always integral).
    weights = np.rint(2.0 * ranks).astype(int)
    total = int(weights.sum())
    counts = np.zeros(total + 1, dtype=float)
    counts[0] = 1.0
    for w in weights:
        shifted = np.zeros_like(counts)
        shifted[w:] = counts[: total + 1 - w]
        counts = counts + shifted
    le = counts[: int(math.floor(2.0 * t_obs + 1e-9)) + 1].sum()
    return min(1.0, 2.0 * le / 2.0 ** len(ranks))


def _normal_p(ranks: np.ndarray, t_obs: float) -> float:
    # W+ is a sum of independent r_i * Bernoulli(1/2): mean sum(r)/2,
    # variance sum(r^2)/4 (exact under midrank ties).
    mu = ranks.sum() / 2.0
    sigma = math.sqrt((ranks ** 2).sum() / 4.0)
    z = (t_obs - mu + 0.5) / sigma  # continuity correction
    p = 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0))
    return min(1.0, max(0.0, p))


def wilcoxon_signed_rank(ape_a, ape_b, alpha: float = 0.05,
                         method: str = "auto") -> WilcoxonResult:
    """Two-sided paired signed-rank test on absolute percentage errors.

    Zero differences are dropped. The p-value is exact (full sign-pattern
    distribution) for up to 12 effective pairs, otherwise a normal
    approximation with continuity and tie corrections; `method` can force
    either branch. When p < alpha the decision names the input with the
    smaller APE sum, otherwise the pair is indistinguishable.
    """
    if method not in ("auto", "exact", "normal"):
        raise ParameterError(f"unknown method {method!r}")
    a = np.asarray(ape_a, dtype=float).ravel()
    b = np.asarray(ape_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"APE vectors differ in length: {a.size} vs {b.size}")
    d = a - b
    d = d[d != 0.0]
    n_eff = d.size
    if n_eff == 0:
        return WilcoxonResult(0.0, 1.0, INDISTINGUISHABLE, 0.0, 0.0, 0)
    if n_eff < 5:
        raise ParameterError(f"need >= 5 nonzero differences, got {n_eff}")

    ranks = _midranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    t_obs = min(w_plus, w_minus)

    if method == "exact" or (method == "auto" and n_eff <= 12):
        p = _exact_p(ranks, t_obs)
    else:
        p = _normal_p(ranks, t_obs)

    decision = INDISTINGUISHABLE
    if p < alpha:
        sum_a, sum_b = float(a.sum()), float(b.sum())
        if sum_a < sum_b:
            decision = A_BETTER
        elif sum_b < sum_a:
            decision = B_BETTER
    return WilcoxonResult(t_obs, p, decision, w_plus, w_minus, n_eff)


def write_metrics_csv(summaries: dict[str, MetricsSummary], target) -> None:
    """Metric-by-method table (one row per metric, one column per method)."""
    rows = [
        ("MAPE", "mape"),
        ("Median(APE)", "median_ape"),
        ("RMSE", "rmse"),
        ("MPE", "mpe"),
        ("Std(PE)", "std_pe"),
    ]
    methods = list(summaries)

    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(["metric"] + methods)
        for label, attr in rows:
            writer.writerow([label] + [repr(getattr(summaries[m], attr)) for m in methods])

    if hasattr(target, "write"):
        _write(target)
    else:
        with open(target, "w", newline="") as fh:
            _write(fh)
