#!/usr/bin/env python3
"""Solve for the best possible team of a finished match, exactly.

Loads the sample match's 22 players and realized stat lines, runs the
branch-and-bound solver over every rule-valid 11-subset, and shows that no
sampled entry can beat it. Run: python demos/02_dream_team.py
"""

import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fantasy11.contests import dream_team
from fantasy11.domain import FantasyTeam, load_performances, load_players
from fantasy11.rules import default_rules, validate_team
from fantasy11.scoring import default_scoring_schema, score_player, score_team

DATA = Path(__file__).resolve().parents[1] / "fixtures" / "data"

pool = load_players(DATA / "players.csv")
perfs = load_performances(DATA / "perfs.csv")
rules = default_rules()
schema = default_scoring_schema()

print(f"pool: {len(pool)} players, search space C(22,11) = 705432 subsets")
started = time.perf_counter()
team, score = dream_team(pool, perfs, rules, schema)
elapsed = time.perf_counter() - started
print(f"solved in {elapsed * 1000:.0f} ms\n")

print("=== Best possible team ===")
bases = {pid: score_player(perfs[pid], pool[pid].role, schema) for pid in team.players}
for pid in sorted(team.players, key=lambda p: -bases[p]):
    tag = " (C)" if pid == team.captain else (" (VC)" if pid == team.vice_captain else "")
    print(f"  {pool[pid].name:<22} {pool[pid].role.value:<4} base {float(bases[pid]):5.1f}{tag}")
print(f"total with multipliers: {float(score.total)}\n")

print("=== No random entry beats it ===")
rng = random.Random(7)
ids = sorted(pool)
best_random = 0.0
checked = 0
while checked < 2000:
    members = rng.sample(ids, 11)
    entry = FantasyTeam(members, members[0], members[1])
    if not validate_team(entry, pool, rules).ok:
        continue
    checked += 1
    total = float(score_team(entry, perfs, {p: pool[p].role for p in members}, schema).total)
    best_random = max(best_random, total)
print(f"best of {checked} random valid entries: {best_random}")
print(f"margin to the solved optimum: {float(score.total) - best_random:+.1f} points")
