"""Conflict detection and resolution for IoT services in shared homes."""

from .config import RunConfig
from .errors import ArbiterError, ConvergenceError, DataError, ParseError
from .intervals import TimeOfDayInterval, intersect, overlap_length
from .model import AttributeValue, ConflictSituation, ServiceEvent, ServiceRequest
from .detect import detect_conflicts, is_conflict
from .preferences import (
    OverlappingEvent,
    PreferenceTable,
    build_preference_table,
    event_window_proximity,
    find_overlapping_events,
    frequency,
    preference_score,
    temporal_proximity,
)
from .linalg import SvdResult, TruncatedSvd, l2_norm, matmul, svd, transpose, truncate
from .aggregate import (
    PreferenceMatrix,
    Resolution,
    build_item_set,
    build_preference_matrix,
    consensus_distance,
    consensus_scores,
    rank_by_average,
    rank_by_least_misery,
    rank_by_most_pleasure,
    request_centroid,
    resolve,
    resolve_with_strategy,
    use_first_choice,
)
from .evaluate import (
    EvaluationConfig,
    MetricReport,
    adopted_items,
    average_satisfaction,
    harmonic_satisfaction,
    run_experiment,
    satisfaction_gain,
)
from .ingest import (
    BinningSpec,
    StabilizationConfig,
    apply_bins,
    augment_channels,
    compute_bins,
    load_ratings_table,
    load_requests,
    load_store,
    merge_households,
    parse_event_log,
    stabilize,
    write_store,
)

__version__ = "0.1.0"
