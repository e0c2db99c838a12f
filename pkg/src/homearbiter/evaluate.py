"""Strategy scoring: satisfaction gain, harmonic fairness, group-size sweeps."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Sequence

from .aggregate import STRATEGIES, resolve_with_strategy
from .config import RunConfig
from .detect import detect_conflicts
from .intervals import TimeOfDayInterval, intervals_overlap
from .model import ConflictSituation, ServiceEvent, ServiceRequest, normalize_location
from .preferences import PreferenceTable, filter_lookback


@dataclass(frozen=True)
class EvaluationConfig:
    strategies: tuple[str, ...] = STRATEGIES
    group_sizes: tuple[int, ...] = (2, 3)
    adopted_threshold: float = 0.6
    seed: int = 0
    recommendation_list_size: int = 2

    def __post_init__(self) -> None:
        if not self.strategies:
            raise ValueError("need at least one strategy")
        if any(g < 2 for g in self.group_sizes):
            raise ValueError("group sizes must be at least 2")
        if not 0 < self.adopted_threshold <= 1:
            raise ValueError("adopted_threshold must be in (0, 1]")
        if self.recommendation_list_size < 1:
            raise ValueError("recommendation_list_size must be positive")


def satisfaction_gain(
    table: PreferenceTable,
    group: Sequence[str],
    recommended: Sequence[str],
    adopted: Iterable[str],
) -> float:
    """Mean over members of their score sum across recommended-and-adopted items."""
    if not recommended:
        raise ValueError("recommended list must be non-empty")
    adopted_set = set(adopted)
    counted = [item for item in recommended if item in adopted_set]
    return sum(table.score(member, item) for member in group for item in counted) / len(group)


def adopted_items(
    history: Sequence[ServiceEvent],
    resident: str,
    window: TimeOfDayInterval,
    *,
    service_id: str | None = None,
    location: str | None = None,
    attribute: str = "channel",
    threshold: float = 0.6,
    lookback_days: int | None = None,
) -> set[str]:
    """Items the resident used on strictly more than ``threshold`` of active days.

    A day is active when the resident has any window-overlapping usage on it;
    an item is adopted when the number of distinct active days carrying that
    item exceeds ``threshold`` times the number of active days.
    """
    loc = normalize_location(location) if location is not None else None
    item_days: dict[str, set[dt.date]] = {}
    active_days: set[dt.date] = set()
    for event in filter_lookback(history, lookback_days):
        if event.resident != resident:
            continue
        if service_id is not None and event.service_id != service_id:
            continue
        if loc is not None and event.location != loc:
            continue
        if not intervals_overlap(event.interval, window):
            continue
        active_days.add(event.date)
        value = event.attribute(attribute)
        if value is not None:
            item_days.setdefault(value.item_label(), set()).add(event.date)
    if not active_days:
        return set()
    cutoff = threshold * len(active_days)
    return {item for item, days in item_days.items() if len(days) > cutoff}


def harmonic_satisfaction(table: PreferenceTable, group: Sequence[str], recommended: Sequence[str]) -> float:
    """Harmonic mean of per-member score sums over the recommended list.

    A member with a zero sum makes the metric 0 (maximal unfairness).
    """
    sums = [sum(table.score(member, item) for item in recommended) for member in group]
    if any(s <= 0 for s in sums):
        return 0.0
    return len(group) / sum(1.0 / s for s in sums)


def average_satisfaction(table: PreferenceTable, group: Sequence[str], chosen: str) -> float:
    """Mean of members' scores for the chosen item, each normalized by their own best.

    Members with an all-zero row carry no signal and are excluded.
    """
    shares = []
    for member in group:
        best = table.max_score(member)
        if best > 0:
            shares.append(table.score(member, chosen) / best)
    if not shares:
        return 0.0
    return sum(shares) / len(shares)


@dataclass(frozen=True)
class SituationMetrics:
    strategy: str
    situation_key: str
    group_size: int
    chosen: tuple[str, ...]
    recommended: tuple[str, ...]
    sg: float
    harmonic: float
    avg_satisfaction: float
    harmonic_zero_members: tuple[str, ...] = ()
    excluded_members: tuple[str, ...] = ()


@dataclass(frozen=True)
class ReportRow:
    strategy: str
    group_size: int
    conflict_count: int
    sg: float | None
    harmonic: float | None
    avg_satisfaction: float | None


@dataclass(frozen=True)
class MetricReport:
    rows: tuple[ReportRow, ...]
    details: tuple[SituationMetrics, ...]

    def to_csv_text(self, meta_lines: Sequence[str] = ()) -> str:
        lines = [f"# {m}" for m in meta_lines]
        lines.append("strategy,group_size,conflicts,sg,harmonic,avg_satisfaction")
        for row in self.rows:
            def fmt(x: float | None) -> str:
                return "" if x is None else f"{x:.6f}"
            lines.append(
                f"{row.strategy},{row.group_size},{row.conflict_count},"
                f"{fmt(row.sg)},{fmt(row.harmonic)},{fmt(row.avg_satisfaction)}"
            )
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "rows": [
                {
                    "strategy": r.strategy,
                    "group_size": r.group_size,
                    "conflicts": r.conflict_count,
                    "sg": None if r.sg is None else round(r.sg, 6),
                    "harmonic": None if r.harmonic is None else round(r.harmonic, 6),
                    "avg_satisfaction": None if r.avg_satisfaction is None else round(r.avg_satisfaction, 6),
                }
                for r in self.rows
            ],
            "details": [
                {
                    "strategy": d.strategy,
                    "situation": d.situation_key,
                    "group_size": d.group_size,
                    "chosen": list(d.chosen),
                    "recommended": list(d.recommended),
                    "sg": round(d.sg, 6),
                    "harmonic": round(d.harmonic, 6),
                    "avg_satisfaction": round(d.avg_satisfaction, 6),
                    "harmonic_zero_members": list(d.harmonic_zero_members),
                    "excluded_members": list(d.excluded_members),
                }
                for d in self.details
            ],
        }

    def plot_series(self, meta_lines: Sequence[str] = ()) -> dict[str, str]:
        """Per-metric TSV series: group size rows, one strategy per column."""
        strategies = sorted({r.strategy for r in self.rows})
        sizes = sorted({r.group_size for r in self.rows})
        by_cell = {(r.strategy, r.group_size): r for r in self.rows}
        series = {}
        for metric in ("sg", "harmonic", "avg_satisfaction"):
            lines = [f"# {m}" for m in meta_lines]
            lines.append("group_size\t" + "\t".join(strategies))
            for size in sizes:
                cells = []
                for strategy in strategies:
                    row = by_cell.get((strategy, size))
                    value = getattr(row, metric) if row else None
                    cells.append("" if value is None else f"{value:.6f}")
                lines.append(f"{size}\t" + "\t".join(cells))
            series[metric] = "\n".join(lines) + "\n"
        return series


def _situation_key(situation: ConflictSituation) -> str:
    return "/".join(
        [situation.service_id, situation.location, situation.attribute,
         str(situation.window.start), str(situation.window.end)]
    )


def run_experiment(
    history: Sequence[ServiceEvent],
    requests: Sequence[ServiceRequest],
    cfg: EvaluationConfig,
    run_cfg: RunConfig | None = None,
) -> MetricReport:
    """Score every strategy on every detected conflict, bucketed by group size.

    Deterministic for fixed inputs and configuration: conflicts come from a
    canonical detection pass and all aggregation is order-independent.
    """
    run_cfg = run_cfg or RunConfig(adopted_threshold=cfg.adopted_threshold)
    situations = detect_conflicts(requests)
    by_size: dict[int, list[ConflictSituation]] = {g: [] for g in cfg.group_sizes}
    for situation in situations:
        size = len(situation.requests)
        if size in by_size:
            by_size[size].append(situation)

    details: list[SituationMetrics] = []
    rows: list[ReportRow] = []
    for strategy in cfg.strategies:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        for size in cfg.group_sizes:
            cell = by_size[size]
            if not cell:
                rows.append(ReportRow(strategy, size, 0, None, None, None))
                continue
            sgs, harms, sats = [], [], []
            for situation in cell:
                resolution = resolve_with_strategy(situation, history, run_cfg, strategy)
                table = resolution.diagnostics.table
                members = sorted(situation.residents)
                recommended = tuple(item for item, _ in resolution.ranked[: cfg.recommendation_list_size])
                adopted: set[str] = set()
                for member in members:
                    adopted |= adopted_items(
                        history,
                        member,
                        situation.window,
                        service_id=situation.service_id,
                        location=situation.location,
                        attribute=situation.attribute,
                        threshold=cfg.adopted_threshold,
                        lookback_days=run_cfg.lookback_days,
                    )
                sg = satisfaction_gain(table, members, recommended, adopted)
                harmonic = harmonic_satisfaction(table, members, recommended)
                chosen_top = resolution.ranked[0][0]
                avg_sat = average_satisfaction(table, members, chosen_top)
                zero_members = tuple(
                    m for m in members if sum(table.score(m, i) for i in recommended) <= 0
                )
                excluded = tuple(m for m in members if table.max_score(m) <= 0)
                details.append(
                    SituationMetrics(
                        strategy=strategy,
                        situation_key=_situation_key(situation),
                        group_size=size,
                        chosen=resolution.chosen,
                        recommended=recommended,
                        sg=sg,
                        harmonic=harmonic,
                        avg_satisfaction=avg_sat,
                        harmonic_zero_members=zero_members,
                        excluded_members=excluded,
                    )
                )
                sgs.append(sg)
                harms.append(harmonic)
                sats.append(avg_sat)
            rows.append(
                ReportRow(
                    strategy=strategy,
                    group_size=size,
                    conflict_count=len(cell),
                    sg=sum(sgs) / len(sgs),
                    harmonic=sum(harms) / len(harms),
                    avg_satisfaction=sum(sats) / len(sats),
                )
            )
    return MetricReport(rows=tuple(rows), details=tuple(details))
