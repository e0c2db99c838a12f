"""Command line surface: ingest -> detect -> resolve -> evaluate, plus demo.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Every output file starts with a header carrying the full run configuration
and the SHA-256 digests of the inputs, so any result can be reproduced.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .aggregate import STRATEGIES, SVD_STRATEGY, resolve_with_strategy
from .config import RunConfig
from .demo import run_reference_check
from .detect import detect_conflicts
from .errors import ArbiterError, DataError
from .evaluate import EvaluationConfig, run_experiment
from .ingest import (
    PRNG_NAME,
    StabilizationConfig,
    apply_bins,
    augment_channels,
    compute_bins,
    dumps_json,
    load_requests,
    load_store,
    merge_households,
    parse_event_log,
    sha256_file,
    stabilize,
    write_store,
)
from .intervals import TimeOfDayInterval, format_hms, parse_hms
from .model import ConflictSituation

CONFLICTS_SCHEMA = "homearbiter-conflicts/1"
RESOLUTIONS_SCHEMA = "homearbiter-resolutions/1"
REPORT_SCHEMA = "homearbiter-report/1"


def config_options(command):
    options = [
        click.option("--alpha", type=float, default=0.97, show_default=True,
                     help="Spectrum share kept by the low-rank truncation."),
        click.option("--top-n", type=int, default=3, show_default=True,
                     help="Scored items per resident feeding the candidate set."),
        click.option("--k", type=int, default=1, show_default=True,
                     help="Number of items chosen per resolution."),
        click.option("--settling-window", type=int, default=60, show_default=True,
                     help="Seconds under which rapid value changes fold together."),
        click.option("--bin-count", type=int, default=5, show_default=True,
                     help="Bins for numeric attributes."),
        click.option("--lookback-days", type=int, default=None,
                     help="Only use history from the trailing N days."),
        click.option("--seed", type=int, default=0, show_default=True,
                     help="Seed for all randomized steps."),
        click.option("--adopted-threshold", type=float, default=0.6, show_default=True,
                     help="Active-day share above which an item counts as adopted."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _build_config(kwargs: dict) -> RunConfig:
    try:
        return RunConfig(
            alpha=kwargs.pop("alpha"),
            top_n=kwargs.pop("top_n"),
            k=kwargs.pop("k"),
            settling_window=kwargs.pop("settling_window"),
            bin_count=kwargs.pop("bin_count"),
            lookback_days=kwargs.pop("lookback_days"),
            seed=kwargs.pop("seed"),
            adopted_threshold=kwargs.pop("adopted_threshold"),
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _input_digests(paths) -> list[dict]:
    return [{"path": Path(p).name, "sha256": sha256_file(p)} for p in paths]


def _write_lines(lines, out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _window_json(window: TimeOfDayInterval) -> dict:
    return {"start": format_hms(window.start), "end": format_hms(window.end)}


@click.group()
@click.version_option(version=__version__)
def cli() -> None:
    """Detect and resolve conflicting service requests in a shared home."""


@cli.command()
@click.argument("logs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Canonical event store to write.")
@click.option("--residents", default=None,
              help="Comma-separated resident ids assigned to the log files in order.")
@click.option("--location-map", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON file mapping sensor labels to locations.")
@click.option("--channels", default=None,
              help="Comma-separated channel labels; TV events lacking a channel get one at random.")
@config_options
def ingest(logs, out, residents, location_map, channels, **kwargs) -> None:
    """Parse raw event logs into a stabilized, binned event store."""
    cfg = _build_config(kwargs)
    loc_map = None
    if location_map:
        try:
            loc_map = json.loads(Path(location_map).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{location_map}: bad JSON location map: {exc.msg}") from exc
        if not isinstance(loc_map, dict):
            raise DataError(f"{location_map}: location map must be a JSON object")

    warnings: list[str] = []
    if residents:
        ids = [r.strip() for r in residents.split(",")]
        if len(ids) != len(logs):
            raise click.UsageError(f"--residents names {len(ids)} ids for {len(logs)} log files")
        per_resident = []
        for resident, path in zip(ids, logs):
            result = parse_event_log(path, resident=resident, location_map=loc_map)
            warnings.extend(f"{Path(path).name}: {w}" for w in result.warnings)
            per_resident.append((resident, result.events))
        events = merge_households(per_resident)
    else:
        events = []
        for path in logs:
            result = parse_event_log(path, location_map=loc_map)
            warnings.extend(f"{Path(path).name}: {w}" for w in result.warnings)
            events.extend(result.events)
        events.sort(key=lambda e: (e.date, e.interval.start, e.resident, e.event_id))

    events = stabilize(events, StabilizationConfig(settling_window=cfg.settling_window))

    numeric_values: dict[tuple[str, str], list[float]] = {}
    for event in events:
        for name, value in event.attributes.items():
            if value.kind == "numeric":
                numeric_values.setdefault((event.service_id, name), []).append(value.value)
    bins = []
    specs = {}
    for (service_id, attribute), values in sorted(numeric_values.items()):
        if len(set(values)) < cfg.bin_count:
            warnings.append(
                f"{service_id}/{attribute}: {len(set(values))} distinct values, fewer than "
                f"{cfg.bin_count} bins; left numeric"
            )
            continue
        spec = compute_bins(values, cfg.bin_count, attribute=attribute)
        specs[(service_id, attribute)] = spec
        bins.append({
            "service_id": service_id,
            "attribute": attribute,
            "bin_count": spec.bin_count,
            "boundaries": list(spec.boundaries),
            "lo": spec.lo,
            "hi": spec.hi,
        })
    if specs:
        binned = []
        for event in events:
            for (service_id, attribute), spec in specs.items():
                value = event.attribute(attribute)
                if event.service_id == service_id and value is not None and value.kind == "numeric":
                    event = apply_bins(event, spec, warnings)
            binned.append(event)
        events = binned

    if channels:
        labels = [c.strip() for c in channels.split(",") if c.strip()]
        events = augment_channels(events, labels, seed=cfg.seed)

    header = {
        "config": cfg.as_dict(),
        "inputs": _input_digests(logs),
        "bins": bins,
        "prng": PRNG_NAME,
        "warnings": warnings,
    }
    write_store(out, events, header)
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"wrote {len(events)} events to {out}", err=True)


def _load_inputs(store_path: str, requests_path: str, cfg: RunConfig):
    store = load_store(store_path)
    requests = load_requests(requests_path, bin_specs=store.bin_specs())
    header = {
        "config": cfg.as_dict(),
        "inputs": _input_digests([store_path, requests_path]),
    }
    return store, requests, header


def _situation_json(situation: ConflictSituation) -> dict:
    return {
        "service_id": situation.service_id,
        "location": situation.location,
        "attribute": situation.attribute,
        "window": _window_json(situation.window),
        "request_ids": [r.request_id for r in situation.requests],
        "residents": list(situation.residents),
    }


@cli.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--requests", "requests_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, help="Output file; stdout when omitted.")
@config_options
def detect(store_path, requests_path, out, **kwargs) -> None:
    """Report conflict situations among the current requests."""
    cfg = _build_config(kwargs)
    store, requests, header = _load_inputs(store_path, requests_path, cfg)
    situations = detect_conflicts(requests)
    lines = [dumps_json({"schema": CONFLICTS_SCHEMA, **header})]
    lines.extend(dumps_json(_situation_json(s)) for s in situations)
    _write_lines(lines, out)


def _load_conflict_stream(path: str, requests) -> list[ConflictSituation]:
    by_id = {r.request_id: r for r in requests}
    situations = []
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    where = "stdin" if path == "-" else path
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}:{lineno}: bad JSON in conflict stream: {exc.msg}") from exc
        if "schema" in obj:
            continue
        try:
            members = tuple(by_id[i] for i in obj["request_ids"])
            situations.append(
                ConflictSituation(
                    service_id=obj["service_id"],
                    location=obj["location"],
                    attribute=obj["attribute"],
                    window=TimeOfDayInterval(parse_hms(obj["window"]["start"]), parse_hms(obj["window"]["end"])),
                    requests=members,
                )
            )
        except KeyError as exc:
            raise DataError(f"{where}:{lineno}: conflict stream references unknown key {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise DataError(f"{where}:{lineno}: bad conflict record: {exc}") from exc
    return situations


def _round6(values) -> list:
    return [round(float(v), 6) for v in values]


@cli.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--requests", "requests_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--conflicts", "conflicts_path", default=None,
              help="Resolve a previously detected conflict stream ('-' for stdin) instead of re-detecting.")
@click.option("--strategy", type=click.Choice(STRATEGIES), default=SVD_STRATEGY, show_default=True)
@click.option("--dump-preferences", "dump_preferences", type=click.Path(dir_okay=False), default=None,
              help="Write the per-situation preference tables as CSV.")
@click.option("--debug", is_flag=True, help="Embed matrices and factors in the output.")
@click.option("--out", default=None, help="Output file; stdout when omitted.")
@config_options
def resolve(store_path, requests_path, conflicts_path, strategy, dump_preferences, debug, out, **kwargs) -> None:
    """Resolve detected conflicts and rank the candidate items."""
    cfg = _build_config(kwargs)
    store, requests, header = _load_inputs(store_path, requests_path, cfg)
    if conflicts_path is not None:
        situations = _load_conflict_stream(conflicts_path, requests)
    else:
        situations = detect_conflicts(requests)

    lines = [dumps_json({"schema": RESOLUTIONS_SCHEMA, "strategy": strategy, **header})]
    preference_rows: list[str] = [
        f"# config: {dumps_json(header['config'])}",
        f"# inputs: {dumps_json(header['inputs'])}",
    ]
    for situation in situations:
        resolution = resolve_with_strategy(situation, store.events, cfg, strategy)
        record = _situation_json(situation)
        record["strategy"] = strategy
        record["ranked"] = [[item, round(value, 6)] for item, value in resolution.ranked]
        record["chosen"] = list(resolution.chosen)
        diag = resolution.diagnostics
        if debug and diag is not None:
            record["debug"] = {
                "residents": list(diag.matrix.residents),
                "items": list(diag.matrix.items),
                "scores": [_round6(row) for row in diag.matrix.scores],
            }
            if diag.singular_values is not None:
                record["debug"].update(
                    singular_values=_round6(diag.singular_values),
                    rank=diag.rank,
                    request_centroid=_round6(diag.centroid),
                    consensus_scores=_round6(diag.consensus),
                )
        if diag is not None:
            window = situation.window
            preference_rows.append(
                f"# situation: {situation.service_id}/{situation.location}/{situation.attribute}"
                f"/{format_hms(window.start)}-{format_hms(window.end)}"
            )
            for (resident, item), score in sorted(diag.table.entries.items()):
                preference_rows.append(f"{resident},{item},{score:.4f}")
        lines.append(dumps_json(record))
    _write_lines(lines, out)
    if dump_preferences:
        table_lines = preference_rows[:2] + ["resident,item,score"] + preference_rows[2:]
        Path(dump_preferences).write_text("\n".join(table_lines) + "\n", encoding="utf-8", newline="\n")


@cli.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--requests", "requests_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-prefix", required=True, help="Reports are written as PREFIX.csv and PREFIX.json.")
@click.option("--strategies", default=",".join(STRATEGIES), show_default=True,
              help="Comma-separated strategy labels to score.")
@click.option("--group-sizes", default="2,3", show_default=True,
              help="Comma-separated conflict group sizes to bucket.")
@click.option("--list-size", type=int, default=2, show_default=True,
              help="Length of each strategy's recommendation list.")
@click.option("--plot-data", is_flag=True, help="Also write PREFIX.<metric>.tsv series.")
@config_options
def evaluate(store_path, requests_path, out_prefix, strategies, group_sizes, list_size, plot_data, **kwargs) -> None:
    """Score resolution strategies across the detected conflicts."""
    cfg = _build_config(kwargs)
    store, requests, header = _load_inputs(store_path, requests_path, cfg)
    try:
        eval_cfg = EvaluationConfig(
            strategies=tuple(s.strip() for s in strategies.split(",") if s.strip()),
            group_sizes=tuple(int(g) for g in group_sizes.split(",") if g.strip()),
            adopted_threshold=cfg.adopted_threshold,
            seed=cfg.seed,
            recommendation_list_size=list_size,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    report = run_experiment(store.events, requests, eval_cfg, cfg)

    meta = [
        f"config: {dumps_json(header['config'])}",
        f"inputs: {dumps_json(header['inputs'])}",
        f"strategies: {','.join(eval_cfg.strategies)} list_size: {eval_cfg.recommendation_list_size}",
    ]
    Path(f"{out_prefix}.csv").write_text(report.to_csv_text(meta), encoding="utf-8", newline="\n")
    payload = {"schema": REPORT_SCHEMA, **header, "list_size": eval_cfg.recommendation_list_size}
    payload.update(report.to_json_obj())
    Path(f"{out_prefix}.json").write_text(dumps_json(payload) + "\n", encoding="utf-8", newline="\n")
    if plot_data:
        for metric, text in report.plot_series(meta).items():
            Path(f"{out_prefix}.{metric}.tsv").write_text(text, encoding="utf-8", newline="\n")
    click.echo(f"wrote {out_prefix}.csv and {out_prefix}.json", err=True)


@cli.command()
def demo() -> None:
    """Run the built-in reference scenario and grade it against known outputs."""
    result = run_reference_check()
    for line in result.lines:
        click.echo(line)
    if not result.passed:
        raise ArbiterError("reference scenario produced unexpected values")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except ArbiterError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except Exception as exc:  # pragma: no cover - last-resort guard
        click.echo(f"internal error: {exc}", err=True)
        return 3


def entrypoint() -> None:
    sys.exit(main())
