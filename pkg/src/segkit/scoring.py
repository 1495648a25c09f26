"""WER scoring: edit alignment, error decomposition, bootstrap intervals.

WER is corpus-level: error counts are summed over utterances and divided by
the total reference word count, so WER always decomposes exactly into the
substitution, deletion, and insertion rates. Confidence intervals come from
a percentile bootstrap over utterances; paired metrics (relative WER
reduction between two systems) resample both systems with the same indices
by carrying both systems' per-utterance counts in one record.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .errors import ConfigurationError, UndefinedMetricError

T = TypeVar("T")


@dataclass(frozen=True)
class ErrorCounts:
    """Edit-alignment tallies for one utterance or an aggregate."""

    hits: int = 0
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_len: int = 0

    def __post_init__(self) -> None:
        if min(self.hits, self.substitutions, self.deletions, self.insertions) < 0:
            raise ConfigurationError("error counts must be non-negative")
        if self.hits + self.substitutions + self.deletions != self.ref_len:
            raise ConfigurationError("hits + subs + dels must equal ref_len")

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(
            hits=self.hits + other.hits,
            substitutions=self.substitutions + other.substitutions,
            deletions=self.deletions + other.deletions,
            insertions=self.insertions + other.insertions,
            ref_len=self.ref_len + other.ref_len,
        )


def edit_align(ref: Sequence[str], hyp: Sequence[str]) -> ErrorCounts:
    """Minimal unit-cost edit alignment between word sequences.

    The backtrace resolves cost ties deterministically: diagonal
    (match/substitution) first, then deletion, then insertion, which fixes
    the S/D/I split whenever multiple decompositions share the minimum cost.
    """
    n, m = len(ref), len(hyp)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    dp[0] = list(range(m + 1))
    for i in range(1, n + 1):
        row = dp[i]
        prev = dp[i - 1]
        r = ref[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (r != hyp[j - 1])
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best

    hits = subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            if ref[i - 1] == hyp[j - 1]:
                hits += 1
            else:
                subs += 1
            i -= 1
            j -= 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return ErrorCounts(
        hits=hits, substitutions=subs, deletions=dels, insertions=ins, ref_len=n
    )


@dataclass(frozen=True)
class WerRates:
    """Percent rates: total WER plus its SUB/DEL/INS components."""

    wer: float
    sub: float
    del_: float
    ins: float


def wer(counts: ErrorCounts) -> WerRates:
    """Corpus rates from aggregated counts; WER = SUB + DEL + INS."""
    if counts.ref_len <= 0:
        raise UndefinedMetricError("reference corpus is empty")
    scale = 100.0 / counts.ref_len
    errors = counts.substitutions + counts.deletions + counts.insertions
    return WerRates(
        wer=errors * scale,
        sub=counts.substitutions * scale,
        del_=counts.deletions * scale,
        ins=counts.insertions * scale,
    )


def relative_reduction(base: float, new: float) -> float:
    """Relative improvement of ``new`` over ``base``, in percent."""
    if base == 0:
        raise UndefinedMetricError("relative reduction undefined for zero base")
    return 100.0 * (base - new) / base


@dataclass(frozen=True)
class BootstrapResult:
    """Point estimate plus percentile bounds from B resampled replicates."""

    mean: float
    lower: float
    upper: float
    num_replicates: int
    alpha: float
    frac_below_zero: float
    replicates: np.ndarray | None = None

    def render(self, decimals: int = 2) -> str:
        return format_interval(self.mean, self.lower, self.upper, decimals)


def format_interval(mean: float, lower: float, upper: float, decimals: int = 2) -> str:
    """Render as mean_[lower, upper], e.g. "6.1_[2.4, 10.1]"."""
    return f"{mean:.{decimals}f}_[{lower:.{decimals}f}, {upper:.{decimals}f}]"


def bootstrap_ci(
    stats: Sequence[T],
    metric: Callable[[Sequence[T]], float],
    *,
    num_replicates: int = 5000,
    alpha: float = 0.05,
    seed: int = 0,
    ids: Sequence[str] | None = None,
    keep_replicates: bool = False,
) -> BootstrapResult:
    """Percentile bootstrap over per-utterance stats.

    ``metric`` maps a list of per-utterance records to one number (e.g. sum
    the counts, take the corpus ratio); it is evaluated once on the full
    set (the reported mean) and once per replicate of N records resampled
    with replacement. Bounds are the empirical alpha/2 and 1-alpha/2
    percentiles. When ``ids`` is given, records are first sorted by id so
    the result is invariant to input order under the same seed.
    """
    if len(stats) == 0:
        raise UndefinedMetricError("cannot bootstrap an empty corpus")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must be in (0, 1), got {alpha}")
    if num_replicates < 1:
        raise ConfigurationError("need at least one replicate")

    items = list(stats)
    if ids is not None:
        if len(ids) != len(items):
            raise ConfigurationError("ids and stats must have equal length")
        items = [s for _, s in sorted(zip(ids, items), key=lambda p: p[0])]

    mean = float(metric(items))
    n = len(items)
    rng = np.random.default_rng(seed)
    replicates = np.empty(num_replicates)
    for b in range(num_replicates):
        idx = rng.integers(0, n, size=n)
        replicates[b] = metric([items[i] for i in idx])

    lower = float(np.percentile(replicates, 100.0 * alpha / 2.0))
    upper = float(np.percentile(replicates, 100.0 * (1.0 - alpha / 2.0)))
    return BootstrapResult(
        mean=mean,
        lower=lower,
        upper=upper,
        num_replicates=num_replicates,
        alpha=alpha,
        frac_below_zero=float(np.mean(replicates < 0.0)),
        replicates=replicates if keep_replicates else None,
    )
