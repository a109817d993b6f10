"""Single entry-point command; every subcommand is a thin adapter over the
library. Exit codes: 0 success, 1 domain error, 2 usage error."""

from __future__ import annotations

import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import click

from . import contests, datasources, domain, evaluation, llm, pipeline, rules, scoring
from .errors import Fantasy11Error

MODES = ("live", "mock", "replay")
FORMATS = ("text", "csv", "json")

@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file with default values for any flag.")
@click.pass_context
def cli(ctx, config_path):
    """Fantasy cricket toolkit: scoring, analytics, and team generation."""
    defaults = {}
    if config_path:
        defaults = json.loads(Path(config_path).read_text(encoding="utf-8"))
        if not isinstance(defaults, dict):
            raise click.UsageError("--config must contain a JSON object")
    # config file supplies per-subcommand defaults; explicit flags win
    ctx.default_map = defaults


def _load_rules(path: Optional[str]) -> rules.RulesSchema:
    return rules.load_rules(path) if path else rules.default_rules()


def _load_scoring(path: Optional[str]) -> scoring.ScoringSchema:
    return scoring.load_scoring_schema(path) if path else scoring.default_scoring_schema()


def _roles_of(pool) -> dict:
    return {pid: player.role for pid, player in pool.items()}


def _fixture_paths(fixtures: str) -> tuple[Path, Path, Path]:
    root = Path(fixtures)
    return root / "llm", root / "search", root / "weather"


def _gateway_and_clients(
    mode: str, fixtures: Optional[str], record: Optional[str],
    worker_model: str, reviewer_model: str, llm_base: str,
) -> tuple[pipeline.LlmGateway, pipeline.DataClients]:
    if mode in ("mock", "replay"):
        if not fixtures:
            raise click.UsageError(f"--fixtures is required in {mode} mode")
        llm_dir, search_dir, weather_dir = _fixture_paths(fixtures)
        backend = llm.MockBackend(llm_dir)
        gateway = pipeline.LlmGateway(worker=backend, reviewer=backend)
        clients = pipeline.DataClients(
            weather=datasources.FixtureWeatherClient(weather_dir),
            search=datasources.FixtureSearchClient(search_dir),
            clock=lambda: datasources.FIXED_CLOCK,
        )
        return gateway, clients
    key = os.environ.get(llm.LIVE_KEY_ENV, "")
    if not key:
        raise click.UsageError(f"live mode requires the {llm.LIVE_KEY_ENV} environment variable")
    backend = llm.LiveBackend(
        llm_base, key, {llm.WORKER: worker_model, llm.REVIEWER: reviewer_model}
    )
    if record:
        llm_dir, search_dir, weather_dir = _fixture_paths(record)
        backend = llm.RecordingBackend(backend, llm_dir)
        search_client = datasources.RecordingSearchClient(
            datasources.LiveSearchClient(os.environ.get("FANCRIC_SEARCH_KEY", "")),
            search_dir,
        )
        weather_client = datasources.RecordingWeatherClient(
            datasources.LiveWeatherClient(), weather_dir
        )
    else:
        search_client = datasources.LiveSearchClient(os.environ.get("FANCRIC_SEARCH_KEY", ""))
        weather_client = datasources.LiveWeatherClient()
    gateway = pipeline.LlmGateway(worker=backend, reviewer=backend)
    clients = pipeline.DataClients(
        weather=weather_client, search=search_client,
        clock=lambda: datetime.now(timezone.utc),
    )
    return gateway, clients


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option("--entries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--malformed-threshold", type=float, default=0.05, show_default=True)
@click.option("--malformed-out", type=click.Path(dir_okay=False), default=None,
              help="Sidecar report path (default <entries>.malformed.log).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def ingest(entries, malformed_threshold, malformed_out, out):
    """Deduplicate a contest entry file and report the population."""
    entry_set = contests.ingest_entries(entries, malformed_threshold=malformed_threshold)
    sidecar = malformed_out or f"{entries}.malformed.log"
    if entry_set.malformed:
        lines = [f"{m.lineno}\t{m.code}" for m in entry_set.malformed]
        Path(sidecar).write_text("\n".join(lines) + "\n", encoding="utf-8")
    report = {
        "raw_count": entry_set.raw_count,
        "unique_count": entry_set.unique_count,
        "malformed_count": len(entry_set.malformed),
        "malformed_report": sidecar if entry_set.malformed else None,
        "source_digest": entry_set.source_digest,
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", out)


@cli.command()
@click.option("--entries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--perfs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scoring", "scoring_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--bin-width", type=float, default=25.0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="text", show_default=True)
@click.option("--histogram-out", type=click.Path(dir_okay=False), default=None,
              help="Write the histogram as CSV bin_lower,bin_upper,count.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def stats(entries, players, perfs, scoring_path, bin_width, fmt, histogram_out, out):
    """Score-distribution summary of a contest entry population."""
    schema = _load_scoring(scoring_path)
    pool = domain.load_players(players)
    perf_map = domain.load_performances(perfs)
    entry_set = contests.ingest_entries(entries)
    points = contests.score_entries(entry_set, perf_map, _roles_of(pool), schema)
    summary = contests.summarize(entry_set, points, bin_width=bin_width)
    doc = {
        "n": summary.n,
        "mean": summary.mean,
        "std": summary.std,
        "min": summary.min,
        "max": summary.max,
        "median": summary.median,
        "ks_statistic": summary.ks_statistic,
        "unique_count": entry_set.unique_count,
    }
    if histogram_out:
        lines = ["bin_lower,bin_upper,count"]
        lines += [f"{b.bin_lower:g},{b.bin_upper:g},{b.count}" for b in summary.histogram]
        Path(histogram_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if fmt == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        keys = list(doc)
        text = ",".join(keys) + "\n" + ",".join(str(doc[k]) for k in keys) + "\n"
    else:
        width = max(len(k) for k in doc)
        text = "\n".join(f"{k:<{width}}  {doc[k]}" for k in doc) + "\n"
    _emit(text, out)


@cli.command()
@click.option("--entries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def woc(entries, players, rules_path, out):
    """Wisdom-of-crowds team from pick frequencies."""
    schema = _load_rules(rules_path)
    pool = domain.load_players(players)
    entry_set = contests.ingest_entries(entries)
    freqs = contests.pick_frequencies(entry_set)
    team = contests.wisdom_of_crowds_team(freqs, schema, pool)
    _emit(json.dumps(domain.team_to_dict(team), indent=2, sort_keys=True) + "\n", out)


@cli.command("dream-team")
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--perfs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--scoring", "scoring_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def dream_team_cmd(players, perfs, rules_path, scoring_path, out):
    """Exact maximum-score valid team for a finished match."""
    pool = domain.load_players(players)
    perf_map = domain.load_performances(perfs)
    team, score = contests.dream_team(
        pool, perf_map, _load_rules(rules_path), _load_scoring(scoring_path)
    )
    doc = domain.team_to_dict(team)
    doc["total_points"] = float(score.total)
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


@cli.command()
@click.option("--teams", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--perfs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scoring", "scoring_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def score(teams, players, perfs, scoring_path, fmt, out):
    """Fantasy points for each team in a teams file."""
    schema = _load_scoring(scoring_path)
    pool = domain.load_players(players)
    roles = _roles_of(pool)
    perf_map = domain.load_performances(perfs)
    results = []
    for team in domain.load_teams(teams):
        ts = scoring.score_team(team, perf_map, roles, schema)
        results.append(
            {
                "name": team.name,
                "captain": team.captain,
                "vice_captain": team.vice_captain,
                "total": float(ts.total),
                "captain_bonus": float(ts.captain_bonus),
                "vice_captain_bonus": float(ts.vice_captain_bonus),
                "per_player": {pid: float(p) for pid, p in sorted(ts.per_player.items())},
            }
        )
    if fmt == "json":
        text = json.dumps({"teams": results}, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        lines = ["name,captain,vice_captain,total"]
        lines += [f"{r['name'] or ''},{r['captain']},{r['vice_captain']},{r['total']}" for r in results]
        text = "\n".join(lines) + "\n"
    else:
        text = "\n".join(
            f"{r['name'] or '(unnamed)'}: total={r['total']} "
            f"(C {r['captain']} +{r['captain_bonus']}, VC {r['vice_captain']} +{r['vice_captain_bonus']})"
            for r in results
        ) + "\n"
    _emit(text, out)


@cli.command()
@click.option("--teams", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False), default=None)
def validate(teams, players, rules_path):
    """Check every team against the lineup rules; exit 1 on any violation."""
    schema = _load_rules(rules_path)
    pool = domain.load_players(players)
    any_bad = False
    for i, team in enumerate(domain.load_teams(teams)):
        report = rules.validate_team(team, pool, schema)
        label = team.name or f"team[{i}]"
        if report.ok:
            click.echo(f"{label}: ok")
        else:
            any_bad = True
            for violation in report.violations:
                click.echo(f"{label}: {violation}")
    if any_bad:
        raise Fantasy11Error("one or more teams violate the rules")


def _generation_options(fn):
    fn = click.option("--match", "match_path", required=True,
                      type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False),
                      default=None)(fn)
    fn = click.option("--n", type=int, default=10, show_default=True)(fn)
    fn = click.option("--mode", type=click.Choice(MODES), default="mock", show_default=True)(fn)
    fn = click.option("--fixtures", type=click.Path(exists=True, file_okay=False), default=None)(fn)
    fn = click.option("--record", type=click.Path(file_okay=False), default=None,
                      help="In live mode, record fixtures into this directory.")(fn)
    fn = click.option("--prompts", type=click.Path(exists=True, file_okay=False), default=None)(fn)
    fn = click.option("--worker-model", default="gpt-4o-mini", show_default=True)(fn)
    fn = click.option("--reviewer-model", default="gpt-4o", show_default=True)(fn)
    fn = click.option("--llm-base", default="https://api.openai.com/v1", show_default=True)(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None)(fn)
    return fn


@cli.command()
@_generation_options
@click.option("--stats", "stats_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--max-review-iters", type=int, default=2, show_default=True)
@click.option("--concurrency", type=int, default=4, show_default=True)
@click.option("--transcript-out", type=click.Path(dir_okay=False), default=None)
def generate(match_path, players, rules_path, n, mode, fixtures, record, prompts,
             worker_model, reviewer_model, llm_base, out, stats_path, results_path,
             max_review_iters, concurrency, transcript_out):
    """Run the multi-agent pipeline and emit n named teams."""
    match = domain.load_match_context(match_path)
    pool = domain.load_players(players)
    stat_store = datasources.load_player_stats(stats_path)
    results = datasources.load_match_results(results_path) if results_path else ()
    gateway, clients = _gateway_and_clients(
        mode, fixtures, record, worker_model, reviewer_model, llm_base
    )
    config = pipeline.PipelineConfig(
        max_review_iters=max_review_iters,
        profile_concurrency=concurrency,
        prompts_dir=Path(prompts) if prompts else None,
    )
    result = pipeline.run_pipeline(
        match, n, pool=pool, rules=_load_rules(rules_path), stats=stat_store,
        gateway=gateway, clients=clients, results=results, config=config,
    )
    if transcript_out:
        Path(transcript_out).write_text(result.transcript.to_jsonl(), encoding="utf-8")
    doc = {
        "teams": [domain.team_to_dict(t) for t in result.teams],
        "llm_calls": result.llm_calls,
        "llm_budget": result.llm_budget,
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


@cli.command()
@_generation_options
def baseline(match_path, players, rules_path, n, mode, fixtures, record, prompts,
             worker_model, reviewer_model, llm_base, out):
    """Generate a slate with the single-prompt baseline."""
    match = domain.load_match_context(match_path)
    pool = domain.load_players(players)
    gateway, _ = _gateway_and_clients(
        mode, fixtures, record, worker_model, reviewer_model, llm_base
    )
    config = pipeline.PipelineConfig(prompts_dir=Path(prompts) if prompts else None)
    teams = evaluation.prompt_engineering_baseline(
        match, pool, n, gateway.worker, _load_rules(rules_path), config=config
    )
    doc = {"teams": [domain.team_to_dict(t) for t in teams]}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


def _evaluation_rows_text(rows, aggregate) -> str:
    header = f"{'team':<28} {'points':>8} {'pct':>6} {'C':>2} {'VC':>2} {'P':>3} {'win':>4}"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r.team_label:<28} {r.total_points:>8.1f} {r.percentile:>6.1f} "
            f"{r.c_in_dt:>2} {r.vc_in_dt:>2} {r.players_in_dt:>3} {'Y' if r.win else 'N':>4}"
        )
    lines.append(
        f"{'average/win-rate':<28} {aggregate.points_avg:>8.2f} {aggregate.percentile_avg:>6.1f} "
        f"{aggregate.c_in_dt_avg:>2.1f} {aggregate.vc_in_dt_avg:>2.1f} "
        f"{aggregate.players_in_dt_avg:>3.1f} {aggregate.win_pct:>3.0f}%"
    )
    return "\n".join(lines) + "\n"


@cli.command()
@click.option("--teams", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--perfs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--entries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--scoring", "scoring_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--win-floor", type=float, default=evaluation.DEFAULT_WIN_FLOOR, show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="text", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def evaluate(teams, players, perfs, entries, rules_path, scoring_path, win_floor, fmt, out):
    """Evaluate teams against the realized match and the contest field."""
    rules_schema = _load_rules(rules_path)
    schema = _load_scoring(scoring_path)
    pool = domain.load_players(players)
    roles = _roles_of(pool)
    perf_map = domain.load_performances(perfs)
    entry_set = contests.ingest_entries(entries)
    points = contests.score_entries(entry_set, perf_map, roles, schema)
    dt, _ = contests.dream_team(pool, perf_map, rules_schema, schema)
    rows = [
        evaluation.evaluate_team(
            team, dt, perf_map, roles, schema, entry_set, points,
            win_floor=win_floor, label=team.name or f"team[{i}]",
        )
        for i, team in enumerate(domain.load_teams(teams))
    ]
    aggregate = evaluation.aggregate_report(rows)
    if fmt == "json":
        text = json.dumps(
            {"rows": [_row_dict(r) for r in rows], "aggregate": _agg_dict(aggregate)},
            indent=2, sort_keys=True,
        ) + "\n"
    elif fmt == "csv":
        lines = ["team_label,total_points,percentile,c_in_dt,vc_in_dt,players_in_dt,win"]
        lines += [
            f"{r.team_label},{r.total_points},{r.percentile},{r.c_in_dt},{r.vc_in_dt},"
            f"{r.players_in_dt},{'Y' if r.win else 'N'}"
            for r in rows
        ]
        text = "\n".join(lines) + "\n"
    else:
        text = _evaluation_rows_text(rows, aggregate)
    _emit(text, out)


def _row_dict(row) -> dict:
    return {
        "team_label": row.team_label,
        "total_points": row.total_points,
        "percentile": row.percentile,
        "c_in_dt": row.c_in_dt,
        "vc_in_dt": row.vc_in_dt,
        "players_in_dt": row.players_in_dt,
        "win": row.win,
    }


def _agg_dict(agg) -> dict:
    return {
        "n_teams": agg.n_teams,
        "points_avg": agg.points_avg,
        "percentile_avg": agg.percentile_avg,
        "c_in_dt_avg": agg.c_in_dt_avg,
        "vc_in_dt_avg": agg.vc_in_dt_avg,
        "players_in_dt_avg": agg.players_in_dt_avg,
        "win_pct": agg.win_pct,
        "highest_percentile": agg.highest_percentile,
    }


@cli.command()
@_generation_options
@click.option("--stats", "stats_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--perfs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--entries", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scoring", "scoring_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--n-values", default="1,5,10,15,20", show_default=True)
@click.option("--generators", default="agentic,baseline", show_default=True)
@click.option("--win-floor", type=float, default=evaluation.DEFAULT_WIN_FLOOR, show_default=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="text", show_default=True)
def ablate(match_path, players, rules_path, n, mode, fixtures, record, prompts,
           worker_model, reviewer_model, llm_base, out, stats_path, results_path,
           perfs, entries, scoring_path, n_values, generators, win_floor, fmt):
    """Sweep slate sizes for both generators and tabulate the metrics."""
    match = domain.load_match_context(match_path)
    pool = domain.load_players(players)
    rules_schema = _load_rules(rules_path)
    schema = _load_scoring(scoring_path)
    roles = _roles_of(pool)
    perf_map = domain.load_performances(perfs)
    stat_store = datasources.load_player_stats(stats_path)
    results = datasources.load_match_results(results_path) if results_path else ()
    entry_set = contests.ingest_entries(entries)
    points = contests.score_entries(entry_set, perf_map, roles, schema)
    dt, _ = contests.dream_team(pool, perf_map, rules_schema, schema)
    gateway, clients = _gateway_and_clients(
        mode, fixtures, record, worker_model, reviewer_model, llm_base
    )
    config = pipeline.PipelineConfig(prompts_dir=Path(prompts) if prompts else None)

    def agentic(k: int):
        return pipeline.run_pipeline(
            match, k, pool=pool, rules=rules_schema, stats=stat_store,
            gateway=gateway, clients=clients, results=results, config=config,
        ).teams

    def baseline_gen(k: int):
        return evaluation.prompt_engineering_baseline(
            match, pool, k, gateway.worker, rules_schema, config=config
        )

    available = {"agentic": agentic, "baseline": baseline_gen}
    chosen = {}
    for name in (g.strip() for g in generators.split(",")):
        if name not in available:
            raise click.UsageError(f"unknown generator {name!r}")
        chosen[name] = available[name]
    ns = [int(v) for v in n_values.split(",") if v.strip()]
    report = evaluation.run_ablation(
        ns, chosen, dt, perf_map, roles, schema, entry_set, points, win_floor=win_floor
    )
    text = {"text": report.to_text, "csv": report.to_csv, "json": report.to_json}[fmt]()
    _emit(text, out)


@cli.group()
def transcript():
    """Dump or replay pipeline transcripts."""


@transcript.command("dump")
@_generation_options
@click.option("--stats", "stats_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False), default=None)
def transcript_dump(match_path, players, rules_path, n, mode, fixtures, record, prompts,
                    worker_model, reviewer_model, llm_base, out, stats_path, results_path):
    """Run the pipeline and write its transcript (JSONL)."""
    match = domain.load_match_context(match_path)
    pool = domain.load_players(players)
    stat_store = datasources.load_player_stats(stats_path)
    results = datasources.load_match_results(results_path) if results_path else ()
    gateway, clients = _gateway_and_clients(
        mode, fixtures, record, worker_model, reviewer_model, llm_base
    )
    config = pipeline.PipelineConfig(prompts_dir=Path(prompts) if prompts else None)
    result = pipeline.run_pipeline(
        match, n, pool=pool, rules=_load_rules(rules_path), stats=stat_store,
        gateway=gateway, clients=clients, results=results, config=config,
    )
    _emit(result.transcript.to_jsonl(), out)


class _TranscriptBackend:
    """Serves responses recorded in a transcript, keyed by fingerprint; the
    replayed exchange mirrors the original byte for byte."""

    def __init__(self, records):
        self.responses = {
            r["fingerprint"]: (r["response"], r.get("model_used", ""))
            for r in records
            if r["kind"] == "llm_exchange"
        }

    def send(self, request):
        fp = llm.fingerprint_request(request)
        if fp not in self.responses:
            raise llm.MissingFixtureError(fp, "not present in transcript")
        content, model_used = self.responses[fp]
        return llm.ChatResponse(content, model_used)


@transcript.command("replay")
@click.option("--transcript", "transcript_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--match", "match_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--players", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--stats", "stats_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--results", "results_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--fixtures", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--n", type=int, default=10, show_default=True)
@click.option("--prompts", type=click.Path(exists=True, file_okay=False), default=None)
def transcript_replay(transcript_path, match_path, players, stats_path, results_path,
                      rules_path, fixtures, n, prompts):
    """Re-run a pipeline against a saved transcript and verify identity."""
    records = [
        json.loads(line)
        for line in Path(transcript_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    match = domain.load_match_context(match_path)
    pool = domain.load_players(players)
    stat_store = datasources.load_player_stats(stats_path)
    results = datasources.load_match_results(results_path) if results_path else ()
    _, search_dir, weather_dir = _fixture_paths(fixtures)
    backend = _TranscriptBackend(records)
    gateway = pipeline.LlmGateway(worker=backend, reviewer=backend)
    clients = pipeline.DataClients(
        weather=datasources.FixtureWeatherClient(weather_dir),
        search=datasources.FixtureSearchClient(search_dir),
        clock=lambda: datasources.FIXED_CLOCK,
    )
    config = pipeline.PipelineConfig(prompts_dir=Path(prompts) if prompts else None)
    result = pipeline.run_pipeline(
        match, n, pool=pool, rules=_load_rules(rules_path), stats=stat_store,
        gateway=gateway, clients=clients, results=results, config=config,
    )
    replayed = result.transcript.to_jsonl()
    original = Path(transcript_path).read_text(encoding="utf-8")
    if replayed == original:
        click.echo("replay OK: transcript is byte-identical")
    else:
        raise Fantasy11Error("replay mismatch: transcripts differ")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 130
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except Fantasy11Error as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
