#!/usr/bin/env python3
"""Post-match evaluation and the slate-size sweep.

Evaluates generated teams against the realized match and the contest
field (points, percentile, best-team hit rates, win flags), then runs the
ablation grid across n in {1, 5, 10, 15, 20} for both generators.
Run: python demos/05_evaluate_and_ablate.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fantasy11.contests import dream_team, ingest_entries, score_entries
from fantasy11.datasources import (
    FIXED_CLOCK,
    FixtureSearchClient,
    FixtureWeatherClient,
    load_match_results,
    load_player_stats,
)
from fantasy11.domain import load_match_context, load_performances, load_players
from fantasy11.evaluation import (
    aggregate_report,
    evaluate_team,
    prompt_engineering_baseline,
    run_ablation,
)
from fantasy11.llm import MockBackend
from fantasy11.pipeline import DataClients, LlmGateway, PipelineConfig, run_pipeline
from fantasy11.rules import default_rules
from fantasy11.scoring import default_scoring_schema

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
DATA = FIXTURES / "data"

match = load_match_context(DATA / "match.json")
pool = load_players(DATA / "players.csv")
roles = {pid: p.role for pid, p in pool.items()}
rules = default_rules()
schema = default_scoring_schema()
perfs = load_performances(DATA / "perfs.csv")
stats = load_player_stats(DATA / "stats.csv")
results = load_match_results(DATA / "results.csv")
entry_set = ingest_entries(DATA / "entries.csv")
points = score_entries(entry_set, perfs, roles, schema)
dt, dt_score = dream_team(pool, perfs, rules, schema)

backend = MockBackend(FIXTURES / "llm")
gateway = LlmGateway(worker=backend, reviewer=backend)
clients = DataClients(
    weather=FixtureWeatherClient(FIXTURES / "weather"),
    search=FixtureSearchClient(FIXTURES / "search"),
    clock=lambda: FIXED_CLOCK,
)
config = PipelineConfig()


def agentic(n):
    return run_pipeline(
        match, n, pool=pool, rules=rules, stats=stats, gateway=gateway,
        clients=clients, results=results, config=config,
    ).teams


def baseline(n):
    return prompt_engineering_baseline(match, pool, n, backend, rules, config=config)


print(f"best-possible benchmark: {float(dt_score.total)} points "
      f"(C {pool[dt.captain].name}, VC {pool[dt.vice_captain].name})\n")

print("=== Evaluating the ten pipeline teams ===")
rows = [
    evaluate_team(team, dt, perfs, roles, schema, entry_set, points,
                  label=team.name)
    for team in agentic(10)
]
print(f"{'team':<24} {'points':>7} {'pct':>6}  C VC  P  win")
for r in rows:
    print(f"{r.team_label:<24} {r.total_points:>7.1f} {r.percentile:>6.1f}  "
          f"{r.c_in_dt} {r.vc_in_dt:>2} {r.players_in_dt:>2}  {'Y' if r.win else 'N'}")
agg = aggregate_report(rows)
print(f"{'average / win rate':<24} {agg.points_avg:>7.2f} {agg.percentile_avg:>6.1f}  "
      f"{agg.c_in_dt_avg:.1f} {agg.vc_in_dt_avg:.1f} {agg.players_in_dt_avg:>4.1f} "
      f"{agg.win_pct:.0f}%\n")

print("=== Slate-size sweep: pipeline with baseline in parentheses ===")
report = run_ablation(
    (1, 5, 10, 15, 20),
    {"agentic": agentic, "baseline": baseline},
    dt, perfs, roles, schema, entry_set, points,
)
print(report.to_text())
print("equivalent CLI: fantasy11 ablate --match ... --mode mock --fixtures fixtures")
