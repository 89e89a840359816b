"""Annualized performance metrics and break-count attribution tables.

All metrics are computed from daily excess returns over cash on an
inclusive window and annualized with a 252 trading-day year:

* excess return p.a. (%) = mean * 252 * 100
* stdev p.a. (%)         = stdev(ddof=1) * sqrt(252) * 100
* Sharpe p.a.            = mean / stdev * sqrt(252)
* Treynor p.a. (%)       = excess return p.a. / market beta
* alphas p.a. (%)        = daily regression alpha * 252 * 100

Undefined ratios (zero stdev, zero market beta, empty groups) are NaN,
never silently 0. Aggregation mirrors the reporting layout: per-fund
rows grouped by break count with equal-weighted means, plus top and
bottom deciles by excess return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .breaks import BreakSet
from .marketdata import MIN_ALIGNED_OBS, AlignedSample
from .regress import DEFAULT_SIG_LEVEL, RegressionResult, fit_benchmark_adjusted, subsample
from .stylebox import (
    STYLE_BOX_LABELS,
    BreakShift,
    IntensityClass,
    RegimeStyle,
    StyleBox,
)

#: Annualization factor for daily data.
TRADING_DAYS_PER_YEAR = 252


class PerfError(ValueError):
    """Window or inputs unusable for metric computation."""


@dataclass(frozen=True)
class FundMetrics:
    """Annualized performance of one fund (or one regime window)."""

    fund_id: str
    excess_return_pa: float
    stdev_pa: float
    sharpe_pa: float
    treynor_pa: float
    ff3_alpha_pa: float
    agt_alpha_pa: float
    n_breaks: int

    def __post_init__(self) -> None:
        if not math.isnan(self.stdev_pa) and self.stdev_pa < 0.0:
            raise PerfError("FundMetrics: negative stdev_pa")
        if self.n_breaks < 0:
            raise PerfError("FundMetrics: negative n_breaks")


#: Numeric FundMetrics fields carried into deltas and group means.
METRIC_FIELDS = (
    "excess_return_pa",
    "stdev_pa",
    "sharpe_pa",
    "treynor_pa",
    "ff3_alpha_pa",
    "agt_alpha_pa",
)


def annualized_metrics(
    sample: AlignedSample,
    window: tuple[int, int],
    ff3_fit: RegressionResult,
    agt_fit: RegressionResult,
    n_breaks: int = 0,
    annualization: int = TRADING_DAYS_PER_YEAR,
) -> FundMetrics:
    """Annualized metrics on an inclusive window.

    The fits must have been estimated on the same window; their alphas
    and the market beta are annualized as-is.
    """
    start, end = window
    if not 0 <= start <= end < sample.n:
        raise PerfError(f"{sample.fund_id}: bad window {window}")
    if end - start + 1 < 2:
        raise PerfError(f"{sample.fund_id}: window shorter than 2 observations")
    e = (sample.r_fund - sample.rf)[start : end + 1]
    mean = float(e.mean())
    sd = float(e.std(ddof=1))

    a = float(annualization)
    excess_pa = mean * a * 100.0
    stdev_pa = sd * math.sqrt(a) * 100.0
    sharpe_pa = mean / sd * math.sqrt(a) if sd > 0.0 else float("nan")
    beta_mkt = ff3_fit.loading("mkt_rf").coef
    treynor_pa = excess_pa / beta_mkt if beta_mkt != 0.0 else float("nan")
    return FundMetrics(
        fund_id=sample.fund_id,
        excess_return_pa=excess_pa,
        stdev_pa=stdev_pa,
        sharpe_pa=sharpe_pa,
        treynor_pa=treynor_pa,
        ff3_alpha_pa=ff3_fit.loading("alpha").coef * a * 100.0,
        agt_alpha_pa=agt_fit.loading("alpha").coef * a * 100.0,
        n_breaks=n_breaks,
    )


@dataclass(frozen=True)
class GroupRow:
    """One break-count bucket: counts plus equal-weighted metric means."""

    group: str
    funds: int
    breaks: int
    excess_return_pa: float
    stdev_pa: float
    sharpe_pa: float
    ff3_alpha_pa: float
    agt_alpha_pa: float


@dataclass(frozen=True)
class GroupReport:
    """Performance by break count, one row per bucket plus the with-breaks row."""

    rows: tuple[GroupRow, ...]

    def row(self, group: str) -> GroupRow:
        for r in self.rows:
            if r.group == group:
                return r
        raise KeyError(group)


#: Label of the funds-with-at-least-one-break aggregate row.
WITH_BREAKS_GROUP = "all_with_breaks"


def _mean_or_nan(values: list[float]) -> float:
    return float(np.mean(values)) if values else float("nan")


def _group_row(group: str, members: list[FundMetrics]) -> GroupRow:
    means = {
        name: _mean_or_nan([getattr(m, name) for m in members])
        for name in METRIC_FIELDS
    }
    return GroupRow(
        group=group,
        funds=len(members),
        breaks=sum(m.n_breaks for m in members),
        excess_return_pa=means["excess_return_pa"],
        stdev_pa=means["stdev_pa"],
        sharpe_pa=means["sharpe_pa"],
        ff3_alpha_pa=means["ff3_alpha_pa"],
        agt_alpha_pa=means["agt_alpha_pa"],
    )


def group_by_break_count(
    metrics: list[FundMetrics], max_m: int | None = None
) -> GroupReport:
    """Bucket funds by break count and average each bucket.

    Rows run m = 0..max_m (default: largest observed count) even when a
    bucket is empty, followed by the aggregate row over all funds with
    at least one break. Empty input yields an empty report.
    """
    if not metrics:
        return GroupReport(rows=())
    top = max(m.n_breaks for m in metrics)
    if max_m is not None:
        top = max(top, max_m)
    rows = []
    for m in range(top + 1):
        rows.append(_group_row(str(m), [x for x in metrics if x.n_breaks == m]))
    rows.append(_group_row(WITH_BREAKS_GROUP, [x for x in metrics if x.n_breaks >= 1]))
    return GroupReport(rows=tuple(rows))


#: Columns of the serialized group report, in order.
GROUP_CSV_HEADER = "group,funds,breaks,excess_return_pa,stdev_pa,sharpe_pa,ff3_alpha_pa,agt_alpha_pa"


def render_group_csv(report: GroupReport) -> str:
    lines = [GROUP_CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.group},{r.funds},{r.breaks},{r.excess_return_pa!r},{r.stdev_pa!r},"
            f"{r.sharpe_pa!r},{r.ff3_alpha_pa!r},{r.agt_alpha_pa!r}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HistogramRow:
    n_breaks: int
    funds: int
    breaks: int


@dataclass(frozen=True)
class BreakHistogram:
    """Funds per break count; totals cover only funds with breaks."""

    rows: tuple[HistogramRow, ...]
    total_funds_with_breaks: int
    total_breaks: int


def break_histogram(metrics: list[FundMetrics], max_m: int | None = None) -> BreakHistogram:
    """Tally funds by break count, totaling over the m >= 1 rows.

    The zero-break bucket is listed for completeness but excluded from
    the totals, which count only funds that broke and their breaks.
    """
    top = max((m.n_breaks for m in metrics), default=0)
    if max_m is not None:
        top = max(top, max_m)
    rows = []
    for m in range(top + 1):
        funds = sum(1 for x in metrics if x.n_breaks == m)
        rows.append(HistogramRow(n_breaks=m, funds=funds, breaks=m * funds))
    return BreakHistogram(
        rows=tuple(rows),
        total_funds_with_breaks=sum(r.funds for r in rows if r.n_breaks >= 1),
        total_breaks=sum(r.breaks for r in rows),
    )


@dataclass(frozen=True)
class MetricsDelta:
    """Post-minus-pre change per metric field."""

    excess_return_pa: float
    stdev_pa: float
    sharpe_pa: float
    treynor_pa: float
    ff3_alpha_pa: float
    agt_alpha_pa: float


def metrics_delta(pre: FundMetrics, post: FundMetrics) -> MetricsDelta:
    return MetricsDelta(
        **{name: getattr(post, name) - getattr(pre, name) for name in METRIC_FIELDS}
    )


@dataclass(frozen=True)
class ShiftComparison:
    """Performance on the two regimes flanking one break."""

    fund_id: str
    break_index: int
    pre: FundMetrics
    post: FundMetrics
    delta: MetricsDelta
    intensity: IntensityClass
    style_from: StyleBox
    style_to: StyleBox


def pre_post_compare(
    sample: AlignedSample,
    bs: BreakSet,
    styles: tuple[RegimeStyle, ...],
    shifts: tuple[BreakShift, ...],
    break_pos: int,
    sig_level: float = DEFAULT_SIG_LEVEL,
    hac: bool = False,
    min_window: int = MIN_ALIGNED_OBS,
) -> ShiftComparison | None:
    """Compare the regimes before and after break number ``break_pos``.

    Returns None (caller records the omission) when either flanking
    regime is shorter than ``min_window``: annualized ratios on a few
    dozen points would be noise dressed as signal.
    """
    if not 0 <= break_pos < bs.chosen_m:
        raise PerfError(f"{sample.fund_id}: break position {break_pos} out of range")
    win_pre = bs.regime_windows[break_pos]
    win_post = bs.regime_windows[break_pos + 1]
    if min(w[1] - w[0] + 1 for w in (win_pre, win_post)) < min_window:
        return None

    def _metrics(window: tuple[int, int], style: RegimeStyle) -> FundMetrics:
        agt = fit_benchmark_adjusted(
            subsample(sample, *window), sig_level=sig_level, hac=hac
        )
        return annualized_metrics(
            sample, window, style.fit, agt, n_breaks=bs.chosen_m
        )

    pre = _metrics(win_pre, styles[break_pos])
    post = _metrics(win_post, styles[break_pos + 1])
    shift = shifts[break_pos]
    return ShiftComparison(
        fund_id=sample.fund_id,
        break_index=shift.break_index,
        pre=pre,
        post=post,
        delta=metrics_delta(pre, post),
        intensity=shift.intensity,
        style_from=shift.style_from,
        style_to=shift.style_to,
    )


#: Canonical key order for the decile histograms.
INTENSITY_LABELS = tuple(c.value for c in IntensityClass)


@dataclass(frozen=True)
class DecileReport:
    """Top and bottom deciles by excess return, with shift composition."""

    decile_size: int
    top_fund_ids: tuple[str, ...]
    bottom_fund_ids: tuple[str, ...]
    top_intensity: tuple[tuple[str, int], ...]
    bottom_intensity: tuple[tuple[str, int], ...]
    top_destinations: tuple[tuple[str, int], ...]
    bottom_destinations: tuple[tuple[str, int], ...]


def _intensity_histogram(shifts: list[BreakShift]) -> tuple[tuple[str, int], ...]:
    counts = {label: 0 for label in INTENSITY_LABELS}
    for s in shifts:
        counts[s.intensity.value] += 1
    return tuple(counts.items())


def _destination_histogram(shifts: list[BreakShift]) -> tuple[tuple[str, int], ...]:
    counts = {label: 0 for label in STYLE_BOX_LABELS}
    for s in shifts:
        counts[s.style_to.label] += 1
    return tuple(counts.items())


def decile_analysis(
    metrics: list[FundMetrics],
    shifts_by_fund: dict[str, tuple[BreakShift, ...]],
) -> DecileReport:
    """Composition of the best and worst deciles by excess return.

    Decile size is ceil(N/10); ranking ties break by fund_id. The
    histograms pool every graded break of the decile's funds.
    """
    n = len(metrics)
    if n < 10:
        raise PerfError(f"decile analysis needs at least 10 funds, got {n}")
    size = math.ceil(n / 10)
    desc = sorted(metrics, key=lambda m: (-m.excess_return_pa, m.fund_id))
    asc = sorted(metrics, key=lambda m: (m.excess_return_pa, m.fund_id))
    top_ids = tuple(m.fund_id for m in desc[:size])
    bottom_ids = tuple(m.fund_id for m in asc[:size])

    def _pool(ids: tuple[str, ...]) -> list[BreakShift]:
        out: list[BreakShift] = []
        for fund_id in ids:
            out.extend(shifts_by_fund.get(fund_id, ()))
        return out

    top_pool, bottom_pool = _pool(top_ids), _pool(bottom_ids)
    return DecileReport(
        decile_size=size,
        top_fund_ids=top_ids,
        bottom_fund_ids=bottom_ids,
        top_intensity=_intensity_histogram(top_pool),
        bottom_intensity=_intensity_histogram(bottom_pool),
        top_destinations=_destination_histogram(top_pool),
        bottom_destinations=_destination_histogram(bottom_pool),
    )
