#!/usr/bin/env python3
"""Walk through fantasy-point scoring and lineup validation.

Scores a few stat lines against the shipped scoring config, then shows how
the rules engine reports violations and repairs an illegal lineup.
Run from the repository root: python demos/01_scoring_and_rules.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fantasy11.domain import (
    BattingLine,
    BowlingLine,
    FantasyTeam,
    PlayerMatchPerformance,
    PlayerRole,
    load_players,
)
from fantasy11.rules import default_rules, describe_rules, repair_team, validate_team
from fantasy11.scoring import default_scoring_schema, score_player, score_team

DATA = Path(__file__).resolve().parents[1] / "fixtures" / "data"

schema = default_scoring_schema()
rules = default_rules()

print("=== Scoring a fifty off 30 balls ===")
innings = PlayerMatchPerformance(
    player_id="demo-bat",
    batting=BattingLine(runs=50, balls_faced=30, fours=4, sixes=2),
)
points = score_player(innings, PlayerRole.BATTER, schema)
print("components: 4 (in XI) + 50 (runs) + 4 (fours) + 4 (sixes) "
      "+ 8 (fifty) + 4 (strike-rate band)")
print(f"base points: {points}\n")

print("=== Scoring a five-wicket haul ===")
spell = PlayerMatchPerformance(
    player_id="demo-bowl",
    bowling=BowlingLine(legal_balls=24, maidens=2, runs_conceded=12,
                        wickets=5, bowled_or_lbw_count=3),
)
print(f"base points: {score_player(spell, PlayerRole.BOWLER, schema)}")
print("(wickets, bowled bonus, five-for, maidens, and the economy band)\n")

print("=== Team scoring with captain multipliers ===")
pool = load_players(DATA / "players.csv")
lsg = [pid for pid, p in pool.items() if p.franchise_id == "LKO"]
mi = [pid for pid, p in pool.items() if p.franchise_id == "MUM"]
members = lsg[:6] + mi[:5]
team = FantasyTeam(members, captain=lsg[0], vice_captain=mi[0])
perfs = {pid: PlayerMatchPerformance(pid) for pid in members}
score = score_team(team, perfs, {pid: pool[pid].role for pid in members}, schema)
print(f"XI-only bases sum with 2x captain and 1.5x vice: total = {score.total}\n")

print("=== Lineup rules ===")
print(describe_rules(rules))
print()

print("=== Validation reports every violation ===")
ten_players = FantasyTeam(members[:10], members[0], members[1])
report = validate_team(ten_players, pool, rules)
for violation in report.violations:
    print(f"  {violation}")
print()

print("=== Repair swaps in the missing pieces ===")
all_lsg = FantasyTeam(lsg, lsg[0], lsg[1])  # 11 players from one franchise
report = validate_team(all_lsg, pool, rules)
print("violations before repair:", ", ".join(report.codes()))
fixed = repair_team(all_lsg, rules, pool)
kept = len(all_lsg.players & fixed.players)
print(f"repaired team keeps {kept}/11 members and passes: "
      f"{validate_team(fixed, pool, rules).ok}")
