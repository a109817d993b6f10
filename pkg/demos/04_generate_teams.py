#!/usr/bin/env python3
"""Generate fantasy teams with the multi-agent pipeline, fully offline.

Every LLM exchange, search, and weather lookup replays from the fixture
pack, so the run is deterministic: two invocations print identical bytes.
Run: python demos/04_generate_teams.py   (writes out/teams.json,
out/transcript.jsonl)
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fantasy11.datasources import (
    FIXED_CLOCK,
    FixtureSearchClient,
    FixtureWeatherClient,
    load_match_results,
    load_player_stats,
)
from fantasy11.domain import load_match_context, load_players, team_to_dict
from fantasy11.llm import MockBackend
from fantasy11.pipeline import DataClients, LlmGateway, run_pipeline
from fantasy11.rules import default_rules

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
DATA = FIXTURES / "data"
OUT = ROOT / "out"
OUT.mkdir(exist_ok=True)

match = load_match_context(DATA / "match.json")
pool = load_players(DATA / "players.csv")
stats = load_player_stats(DATA / "stats.csv")
results = load_match_results(DATA / "results.csv")

print(f"match: {match.home_franchise.name} vs {match.away_franchise.name}, "
      f"{match.venue.city}, {match.scheduled_start.date()}")
print(f"history loaded: {len(stats)} stat rows "
      "(rows at or after the first ball are dropped by the temporal guard)\n")

backend = MockBackend(FIXTURES / "llm")
result = run_pipeline(
    match, 10,
    pool=pool,
    rules=default_rules(),
    stats=stats,
    gateway=LlmGateway(worker=backend, reviewer=backend),
    clients=DataClients(
        weather=FixtureWeatherClient(FIXTURES / "weather"),
        search=FixtureSearchClient(FIXTURES / "search"),
        clock=lambda: FIXED_CLOCK,
    ),
    results=results,
)

print("=== Agent flow (from the transcript) ===")
for record in result.transcript.records:
    if record["kind"] == "agent_step":
        print(f"  [{record['agent']}] {record['detail']}")
print(f"\nLLM calls used: {result.llm_calls} (budget {result.llm_budget})\n")

print("=== Generated slate ===")
for team in result.teams:
    captain = pool[team.captain].name
    vice = pool[team.vice_captain].name
    print(f"  {team.name:<22} C: {captain:<18} VC: {vice}")

(OUT / "teams.json").write_text(
    json.dumps({"teams": [team_to_dict(t) for t in result.teams]}, indent=2, sort_keys=True)
)
(OUT / "transcript.jsonl").write_text(result.transcript.to_jsonl())
print("\nwrote out/teams.json and out/transcript.jsonl")
print("equivalent CLI: fantasy11 generate --match ... --mode mock --fixtures fixtures --n 10")
