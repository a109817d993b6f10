#!/usr/bin/env python3
"""Analyze a contest entry population: dedup, score distribution,
normality distance, pick frequencies, and the wisdom-of-crowds team.

Run: python demos/03_contest_analytics.py   (writes out/histogram.csv)
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fantasy11.contests import (
    ingest_entries,
    percentile_rank,
    pick_frequencies,
    score_entries,
    summarize,
    wisdom_of_crowds_team,
)
from fantasy11.domain import load_performances, load_players
from fantasy11.rules import default_rules
from fantasy11.scoring import default_scoring_schema

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "fixtures" / "data"
OUT = ROOT / "out"
OUT.mkdir(exist_ok=True)

print("=== Ingest and dedup ===")
entry_set = ingest_entries(DATA / "entries.csv")
print(f"raw entries:    {entry_set.raw_count}")
print(f"unique teams:   {entry_set.unique_count}")
print(f"source digest:  {entry_set.source_digest[:16]}...\n")

pool = load_players(DATA / "players.csv")
perfs = load_performances(DATA / "perfs.csv")
roles = {pid: p.role for pid, p in pool.items()}
schema = default_scoring_schema()
points = score_entries(entry_set, perfs, roles, schema)

print("=== Score distribution (multiplicity-weighted) ===")
summary = summarize(entry_set, points)
print(f"n={summary.n}  mean={summary.mean:.2f}  std={summary.std:.2f}")
print(f"min={summary.min}  median={summary.median}  max={summary.max}")
print(f"distance from a fitted normal (KS statistic): {summary.ks_statistic:.4f}\n")

hist_path = OUT / "histogram.csv"
with open(hist_path, "w") as fh:
    fh.write("bin_lower,bin_upper,count\n")
    for b in summary.histogram:
        fh.write(f"{b.bin_lower:g},{b.bin_upper:g},{b.count}\n")
print(f"histogram written to {hist_path.relative_to(ROOT)} "
      f"({len(summary.histogram)} bins of width 25)\n")

print("=== Crowd favourites ===")
freqs = pick_frequencies(entry_set)
by_captain = sorted(pool, key=lambda p: -freqs.get(p).as_captain)[:3]
by_vice = sorted(pool, key=lambda p: -freqs.get(p).as_vice_captain)[:3]
print("most captained:      ",
      ", ".join(f"{pool[p].name} ({freqs.get(p).as_captain})" for p in by_captain))
print("most vice-captained: ",
      ", ".join(f"{pool[p].name} ({freqs.get(p).as_vice_captain})" for p in by_vice))

woc = wisdom_of_crowds_team(freqs, default_rules(), pool)
print("\n=== Wisdom-of-crowds team ===")
print(f"captain:      {pool[woc.captain].name}")
print(f"vice-captain: {pool[woc.vice_captain].name}")
print("members:      " + ", ".join(sorted(pool[p].name for p in woc.players)))

from fantasy11.scoring import score_team

woc_total = float(score_team(woc, perfs, roles, schema).total)
pct = percentile_rank(woc_total, entry_set, points)
print(f"\nscored on the real match: {woc_total} points "
      f"-> better than {pct:.1f}% of the field")
