"""Preference aggregation: latent-space resolution and classic baselines.

The resolver builds a residents-by-items preference matrix for the
conflicting group, factorizes it, and truncates the factorization to the
leading components that carry an ``alpha`` share of the spectrum.  The
requested items' rows of the truncated item-feature matrix are averaged
into a latent request centroid; projecting the centroid back through the
resident factors yields a per-resident consensus score vector.  Items whose
preference columns sit closest to that consensus (in Euclidean distance)
are the resolution choices, because they are the candidates the whole group
is most likely to accept.

Baselines rank items by their column mean (avg), minimum (lm, least
misery), or maximum (mp, most pleasure); use-first simply grants the
earliest requester's value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import RunConfig
from .errors import DataError
from .linalg import TruncatedSvd, svd, truncate
from .model import ConflictSituation, ServiceEvent
from .preferences import PreferenceTable, build_preference_table

SVD_STRATEGY = "svd"
BASELINES = ("avg", "lm", "mp", "use-first")
STRATEGIES = (SVD_STRATEGY,) + BASELINES

# Latent request coordinates are quantized to this many decimals before the
# projection step; published reference outputs use 2-decimal centroids.
CENTROID_DECIMALS = 2


@dataclass(frozen=True)
class PreferenceMatrix:
    """Scores of each group resident (rows) for each candidate item (columns)."""

    residents: tuple[str, ...]
    items: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self) -> None:
        if self.scores.shape != (len(self.residents), len(self.items)):
            raise ValueError("matrix shape does not match residents/items")

    def column(self, item: str) -> np.ndarray:
        return self.scores[:, self.item_index(item)]

    def item_index(self, item: str) -> int:
        try:
            return self.items.index(item)
        except ValueError:
            raise KeyError(f"item {item!r} is not a candidate") from None


@dataclass(frozen=True)
class ResolutionDiagnostics:
    table: PreferenceTable
    matrix: PreferenceMatrix
    singular_values: np.ndarray | None = None
    rank: int | None = None
    centroid: np.ndarray | None = None
    consensus: np.ndarray | None = None


@dataclass(frozen=True)
class Resolution:
    """Ranked candidates for one conflict situation.

    ``ranked`` pairs each item with its ranking figure: the consensus
    distance (ascending) for the svd strategy, the aggregate score
    (descending) for avg/lm/mp, and the requested start second for
    use-first.  ``chosen`` holds the leading ``k`` items.
    """

    strategy: str
    ranked: tuple[tuple[str, float], ...]
    chosen: tuple[str, ...]
    diagnostics: ResolutionDiagnostics | None = None


def build_item_set(table: PreferenceTable, situation: ConflictSituation, top_n: int) -> tuple[str, ...]:
    """Candidate items: each member's ``top_n`` scored items plus all requested values.

    Ordered lexicographically; the order fixes the matrix columns.
    """
    if top_n < 1:
        raise ValueError("top_n must be positive")
    items: set[str] = set()
    for resident in situation.residents:
        row = table.row(resident)
        if not row:
            continue  # the resident's request still contributes below
        items.update(table.top_items(resident, top_n))
    for request in situation.requests:
        items.add(request.value.item_label())
    for resident in situation.residents:
        if not table.row(resident) and all(r.resident != resident for r in situation.requests):
            raise DataError(f"resident {resident!r} has neither history nor a request")
    return tuple(sorted(items))


def build_preference_matrix(
    table: PreferenceTable,
    item_set: Sequence[str],
    residents: Sequence[str],
) -> PreferenceMatrix:
    """Assemble the group score matrix; unscored cells are 0."""
    if not item_set:
        raise ValueError("item set must be non-empty")
    scores = np.array([[table.score(r, i) for i in item_set] for r in residents], dtype=np.float64)
    return PreferenceMatrix(residents=tuple(residents), items=tuple(item_set), scores=scores)


def request_centroid(
    tsvd: TruncatedSvd,
    item_set: Sequence[str],
    situation: ConflictSituation,
) -> np.ndarray:
    """Mean of the requested items' rows of the truncated item-feature matrix."""
    items = list(item_set)
    rows = []
    for request in situation.requests:
        label = request.value.item_label()
        try:
            idx = items.index(label)
        except ValueError:
            raise DataError(f"requested item {label!r} missing from the item set") from None
        rows.append(tsvd.V_w[idx])
    return np.mean(rows, axis=0)


def consensus_scores(tsvd: TruncatedSvd, centroid: np.ndarray) -> np.ndarray:
    """Project a latent centroid back to per-resident score space."""
    centroid = np.asarray(centroid, dtype=np.float64)
    if centroid.shape != (tsvd.rank,):
        raise ValueError(f"centroid has shape {centroid.shape}, expected ({tsvd.rank},)")
    return tsvd.A_w @ (tsvd.singular_values * centroid)


def consensus_distance(matrix: PreferenceMatrix, item: str, consensus: np.ndarray) -> float:
    """Euclidean distance between an item's score column and the consensus vector."""
    column = matrix.column(item)
    if consensus.shape != column.shape:
        raise ValueError(f"consensus has shape {consensus.shape}, expected {column.shape}")
    return float(np.linalg.norm(column - consensus))


def resolve(situation: ConflictSituation, history: Sequence[ServiceEvent], cfg: RunConfig) -> Resolution:
    """Full latent-space pipeline for one situation.

    Preference table -> item set -> matrix -> SVD -> truncation at
    ``cfg.alpha`` -> request centroid (quantized) -> consensus scores ->
    items ranked by ascending consensus distance; ties break
    lexicographically.  The first ``cfg.k`` items are chosen.
    """
    table = build_preference_table(history, situation, lookback_days=cfg.lookback_days)
    item_set = build_item_set(table, situation, cfg.top_n)
    residents = tuple(sorted(situation.residents))
    matrix = build_preference_matrix(table, item_set, residents)
    factors = svd(matrix.scores)
    tsvd = truncate(factors, cfg.alpha)
    centroid = np.round(request_centroid(tsvd, item_set, situation), CENTROID_DECIMALS)
    consensus = consensus_scores(tsvd, centroid)
    ranked = tuple(
        sorted(((item, consensus_distance(matrix, item, consensus)) for item in item_set),
               key=lambda pair: (pair[1], pair[0]))
    )
    diagnostics = ResolutionDiagnostics(
        table=table,
        matrix=matrix,
        singular_values=factors.singular_values,
        rank=tsvd.rank,
        centroid=centroid,
        consensus=consensus,
    )
    return Resolution(
        strategy=SVD_STRATEGY,
        ranked=ranked,
        chosen=tuple(item for item, _ in ranked[: cfg.k]),
        diagnostics=diagnostics,
    )


def _rank_descending(matrix: PreferenceMatrix, fold) -> tuple[tuple[str, float], ...]:
    pairs = [(item, float(fold(matrix.scores[:, j]))) for j, item in enumerate(matrix.items)]
    return tuple(sorted(pairs, key=lambda pair: (-pair[1], pair[0])))


def rank_by_average(matrix: PreferenceMatrix) -> tuple[tuple[str, float], ...]:
    return _rank_descending(matrix, np.mean)


def rank_by_least_misery(matrix: PreferenceMatrix) -> tuple[tuple[str, float], ...]:
    return _rank_descending(matrix, np.min)


def rank_by_most_pleasure(matrix: PreferenceMatrix) -> tuple[tuple[str, float], ...]:
    return _rank_descending(matrix, np.max)


def use_first_choice(situation) -> str:
    """Value requested by whoever asked earliest (ties: smallest resident id).

    Accepts a :class:`ConflictSituation` or any non-empty request sequence.
    """
    requests = situation.requests if isinstance(situation, ConflictSituation) else tuple(situation)
    if not requests:
        raise ValueError("use-first needs at least one request")
    first = min(requests, key=lambda r: (r.interval.start, r.resident))
    return first.value.item_label()


def resolve_with_strategy(
    situation: ConflictSituation,
    history: Sequence[ServiceEvent],
    cfg: RunConfig,
    strategy: str,
) -> Resolution:
    """Resolve one situation with any supported strategy label."""
    if strategy == SVD_STRATEGY:
        return resolve(situation, history, cfg)
    if strategy not in BASELINES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    table = build_preference_table(history, situation, lookback_days=cfg.lookback_days)
    item_set = build_item_set(table, situation, cfg.top_n)
    residents = tuple(sorted(situation.residents))
    matrix = build_preference_matrix(table, item_set, residents)
    diagnostics = ResolutionDiagnostics(table=table, matrix=matrix)
    if strategy == "use-first":
        winner = min(situation.requests, key=lambda r: (r.interval.start, r.resident))
        ranked = ((winner.value.item_label(), float(winner.interval.start)),)
        return Resolution(strategy=strategy, ranked=ranked, chosen=(ranked[0][0],), diagnostics=diagnostics)
    fold = {"avg": rank_by_average, "lm": rank_by_least_misery, "mp": rank_by_most_pleasure}[strategy]
    ranked = fold(matrix)
    return Resolution(strategy=strategy, ranked=ranked, chosen=tuple(i for i, _ in ranked[: cfg.k]), diagnostics=diagnostics)
