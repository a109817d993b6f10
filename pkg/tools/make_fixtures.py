#!/usr/bin/env python3
"""Regenerate the committed fixture pack under fixtures/.

Builds the sample match data (players, stats, results, realized
performances, contest entries), the weather and search fixtures, and then
records LLM fixtures by running the full pipeline and the baseline
generator against a deterministic rule-based responder for every slate
size the ablation sweep uses.

Run from the repository root:  python tools/make_fixtures.py
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import shutil
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from fantasy11.datasources import (  # noqa: E402
    FIXED_CLOCK,
    FixtureSearchClient,
    FixtureWeatherClient,
    load_match_results,
    load_player_stats,
    slugify,
    weather_query_key,
)
from fantasy11.domain import load_match_context, load_players  # noqa: E402
from fantasy11.evaluation import prompt_engineering_baseline  # noqa: E402
from fantasy11.llm import ChatResponse, RecordingBackend  # noqa: E402
from fantasy11.pipeline import (  # noqa: E402
    DataClients,
    LlmGateway,
    PipelineConfig,
    run_pipeline,
)
from fantasy11.rules import default_rules  # noqa: E402

FIXTURES = ROOT / "fixtures"
DATA = FIXTURES / "data"

UTC = timezone.utc
MATCH_START = datetime(2023, 5, 16, 14, 0, tzinfo=UTC)

HOME = ("LKO", "Lucknow Super Giants", "LSG")
AWAY = ("MUM", "Mumbai Indians", "MI")

STOINIS = "101004"
SKY = "102004"
DEKOCK = "101001"

# player_id, name, role, franchise, credit, hand, style
PLAYERS = [
    ("101001", "Quinton de Kock", "WK", "LKO", "9", "left", ""),
    ("101002", "Kyle Mayers", "BAT", "LKO", "8.5", "left", ""),
    ("101003", "Deepak Hooda", "BAT", "LKO", "7.5", "right", "off spin"),
    ("101004", "Marcus Stoinis", "AR", "LKO", "8.5", "right", "medium"),
    ("101005", "Nicholas Pooran", "WK", "LKO", "8.5", "left", ""),
    ("101006", "Ayush Badoni", "BAT", "LKO", "7", "right", ""),
    ("101007", "Krunal Pandya", "AR", "LKO", "8", "left", "slow left-arm"),
    ("101008", "Ravi Bishnoi", "BOWL", "LKO", "8", "right", "leg spin"),
    ("101009", "Yash Thakur", "BOWL", "LKO", "7", "right", "medium fast"),
    ("101010", "Naveen-ul-Haq", "BOWL", "LKO", "7", "right", "fast medium"),
    ("101011", "Mohsin Khan", "BOWL", "LKO", "7.5", "left", "fast medium"),
    ("102001", "Rohit Sharma", "BAT", "MUM", "9", "right", ""),
    ("102002", "Ishan Kishan", "WK", "MUM", "8.5", "left", ""),
    ("102003", "Cameron Green", "AR", "MUM", "8.5", "right", "fast medium"),
    ("102004", "Suryakumar Yadav", "BAT", "MUM", "9", "right", ""),
    ("102005", "Tilak Varma", "BAT", "MUM", "7.5", "left", ""),
    ("102006", "Tim David", "BAT", "MUM", "7.5", "right", ""),
    ("102007", "Nehal Wadhera", "BAT", "MUM", "6.5", "left", ""),
    ("102008", "Chris Jordan", "BOWL", "MUM", "7", "right", "fast"),
    ("102009", "Piyush Chawla", "BOWL", "MUM", "7", "right", "leg spin"),
    ("102010", "Jason Behrendorff", "BOWL", "MUM", "7", "left", "fast medium"),
    ("102011", "Kumar Kartikeya", "BOWL", "MUM", "6.5", "left", "slow left-arm"),
]

# realized match stat lines: runs,balls,fours,sixes,dismissed,kind,
# legal,maidens,rc,wkts,blbw,catches,st,rod,roi
MATCH_PERFS = {
    "101001": (70, 52, 5, 3, 1, "caught", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "101002": (12, 10, 2, 0, 1, "bowled", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "101003": (5, 8, 0, 0, 1, "caught", 0, 0, 0, 0, 0, 0, 0, 0, 1),
    "101004": (89, 47, 6, 6, 0, "", 12, 0, 14, 0, 0, 1, 0, 0, 0),
    "101005": (1, 2, 0, 0, 0, "", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "101006": (0, 0, 0, 0, 0, "", 0, 0, 0, 0, 0, 1, 0, 0, 0),
    "101007": (9, 5, 1, 0, 0, "", 24, 0, 29, 1, 0, 0, 0, 0, 0),
    "101008": (0, 0, 0, 0, 0, "", 24, 0, 27, 1, 0, 0, 0, 1, 0),
    "101009": (0, 0, 0, 0, 0, "", 24, 0, 34, 2, 1, 0, 0, 0, 0),
    "101010": (2, 4, 0, 0, 0, "", 24, 0, 36, 2, 1, 1, 0, 0, 0),
    "101011": (0, 0, 0, 0, 0, "", 24, 0, 30, 0, 0, 0, 0, 0, 0),
    "102001": (37, 26, 4, 2, 1, "lbw", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "102002": (13, 12, 2, 0, 1, "caught", 0, 0, 0, 0, 0, 1, 1, 0, 0),
    "102003": (44, 30, 4, 2, 1, "caught", 12, 0, 18, 0, 0, 0, 0, 0, 0),
    "102004": (39, 25, 5, 1, 1, "run_out", 0, 0, 0, 0, 0, 1, 0, 0, 0),
    "102005": (28, 20, 2, 1, 1, "stumped", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "102006": (21, 12, 1, 2, 0, "", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "102007": (6, 7, 0, 0, 1, "caught", 0, 0, 0, 0, 0, 0, 0, 0, 0),
    "102008": (2, 3, 0, 0, 0, "", 18, 0, 31, 1, 0, 0, 0, 0, 0),
    "102009": (0, 0, 0, 0, 0, "", 24, 0, 28, 1, 1, 1, 0, 0, 0),
    "102010": (0, 0, 0, 0, 0, "", 24, 0, 23, 1, 1, 0, 0, 0, 0),
    "102011": (0, 0, 0, 0, 0, "", 24, 0, 33, 0, 0, 0, 0, 0, 0),
}

SEARCH_FIXTURES = {
    "win odds Lucknow Super Giants vs Mumbai Indians IPL 2023": (
        ("https://odds.example/ipl-2023-63",),
        "Bookmakers price Lucknow Super Giants at decimal odds 1.95 and "
        "Mumbai Indians at 1.87 for the Lucknow fixture, an almost even "
        "contest with a slight edge to the visitors.",
    ),
    "pitch report Ekana Cricket Stadium Lucknow": (
        ("https://news.example/ekana-pitch",),
        "Reports from recent fixtures say the Ekana surface typically "
        "produces low-scoring games with an equal contest between batting "
        "and bowling; spinners grip hard in the second innings and chasing "
        "sides struggle under lights.",
    ),
    "fantasy team tips LSG vs MI IPL 2023": (
        ("https://tips.example/lsg-mi",),
        "Crowd threads emphasise prioritizing all-rounders and top-order "
        "batsmen, backing proven finishers, and spreading picks across both "
        "sides when the odds are close.",
    ),
    "best fantasy cricket strategies IPL": (
        ("https://tips.example/ipl-general",),
        "General advice: anchor lineups around in-form top-order batsmen, "
        "pick wicket-taking spinners at spin-friendly venues, and choose "
        "captains who bat in the top four or bowl four overs.",
    ),
    "fantasy contest rules IPL": (
        ("https://rules.example/fantasy-11",),
        "Entries field 11 players under a 100 credit cap with 1-4 keepers, "
        "3-6 batters, 1-4 all-rounders, 3-6 bowlers and at most 7 players "
        "from one franchise; a captain scores double and a vice-captain "
        "one-and-a-half times.",
    ),
}


def pool_by_id():
    return {row[0]: row for row in PLAYERS}


def role_of(pid):
    return pool_by_id()[pid][2]


def credit_of(pid):
    return float(pool_by_id()[pid][4])


def franchise_of(pid):
    return pool_by_id()[pid][3]


def career_rating(pid):
    if pid == STOINIS:
        return 7
    return max(3, min(9, int(credit_of(pid)) - 1))


def form_rating(pid):
    if pid == STOINIS:
        return 8
    wobble = int(hashlib.sha256(pid.encode()).hexdigest(), 16) % 3 - 1
    return max(2, min(9, career_rating(pid) + wobble))


def write_players():
    lines = ["player_id,name,role,franchise,credit,hand,style"]
    lines += [",".join(row) for row in PLAYERS]
    (DATA / "players.csv").write_text("\n".join(lines) + "\n")


def write_match():
    doc = {
        "match_id": "ipl-2023-63",
        "season": 2023,
        "tournament": "IPL",
        "home_franchise": {"franchise_id": HOME[0], "name": HOME[1], "short_code": HOME[2]},
        "away_franchise": {"franchise_id": AWAY[0], "name": AWAY[1], "short_code": AWAY[2]},
        "venue": {
            "name": "Ekana Cricket Stadium",
            "city": "Lucknow",
            "latitude": 26.8103,
            "longitude": 80.8853,
        },
        "scheduled_start": "2023-05-16T14:00:00Z",
        "toss": {"winner": "MUM", "decision": "bowl"},
        "playing_xi": {
            "LKO": [row[0] for row in PLAYERS if row[3] == "LKO"],
            "MUM": [row[0] for row in PLAYERS if row[3] == "MUM"],
        },
    }
    (DATA / "match.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_perfs():
    header = (
        "match_id,player_id,runs,balls,fours,sixes,dismissed,dismissal_kind,"
        "legal_balls,maidens,runs_conceded,wickets,bowled_lbw,catches,stumpings,"
        "ro_direct,ro_indirect"
    )
    lines = [header]
    for pid, row in MATCH_PERFS.items():
        lines.append("ipl-2023-63," + pid + "," + ",".join(str(v) for v in row))
    (DATA / "perfs.csv").write_text("\n".join(lines) + "\n")


def write_history():
    """Three seasons of head-to-head history plus a post-match row the
    temporal guard must drop."""
    rng = random.Random(63)
    results = []
    stats_lines = []
    for season in (2021, 2022, 2023):
        n_matches = 8 if season == 2023 else 12
        for k in range(n_matches):
            date = datetime(season, 4, 2, 14, 0, tzinfo=UTC) + timedelta(days=5 * k)
            assert date < MATCH_START or season < 2023
            match_id = f"h2h-{season}-{k:02d}"
            home, away = (HOME[0], AWAY[0]) if k % 2 == 0 else (AWAY[0], HOME[0])
            batting_first = home if rng.random() < 0.5 else away
            winner = home if rng.random() < 0.52 else away
            results.append(
                f"{match_id},{date.date().isoformat()},{home},{away},{batting_first},{winner}"
            )
            for pid, name, role, franchise, credit, _, _ in PLAYERS:
                if rng.random() < 0.15:  # rested
                    continue
                stats_lines.append(
                    history_row(rng, match_id, date, pid, role, season, franchise)
                )
    # one future row per side: the guard must remove these
    future = MATCH_START + timedelta(days=4)
    for pid in (STOINIS, SKY):
        stats_lines.append(
            history_row(
                random.Random(1), "h2h-2023-99", future, pid, role_of(pid), 2023,
                franchise_of(pid),
            )
        )
    results_header = "match_id,match_date,home_franchise,away_franchise,batting_first,winner"
    (DATA / "results.csv").write_text(results_header + "\n" + "\n".join(results) + "\n")
    stats_header = (
        "match_id,player_id,runs,balls,fours,sixes,dismissed,dismissal_kind,"
        "legal_balls,maidens,runs_conceded,wickets,bowled_lbw,catches,stumpings,"
        "ro_direct,ro_indirect,match_date,franchise"
    )
    (DATA / "stats.csv").write_text(stats_header + "\n" + "\n".join(stats_lines) + "\n")


def history_row(rng, match_id, date, pid, role, season, franchise):
    bat_mean = {"WK": 24, "BAT": 28, "AR": 18, "BOWL": 5}[role]
    if pid == STOINIS and season == 2023:
        bat_mean = 42  # strong recent form anchor
    runs = max(0, int(rng.gauss(bat_mean, bat_mean * 0.6)))
    balls = max(1, int(runs / 1.35) + rng.randint(0, 4)) if runs else rng.randint(0, 4)
    fours = runs // 8
    sixes = runs // 15
    dismissed = 1 if (runs or balls) and rng.random() < 0.65 else 0
    bowls = role in ("AR", "BOWL")
    legal = (24 if role == "BOWL" else rng.choice([0, 6, 12, 18, 24])) if bowls else 0
    rc = int(legal * rng.uniform(1.0, 1.7)) if legal else 0
    wkts = min(4, max(0, int(rng.gauss(1.2, 1.0)))) if legal else 0
    blbw = rng.randint(0, wkts) if wkts else 0
    maidens = 1 if legal >= 12 and rng.random() < 0.05 else 0
    catches = 1 if rng.random() < 0.25 else 0
    stumpings = 1 if role == "WK" and rng.random() < 0.15 else 0
    cells = [
        match_id, pid, runs, balls, fours, sixes, dismissed, "",
        legal, maidens, rc, wkts, blbw, catches, stumpings, 0, 0,
        date.date().isoformat(), franchise,
    ]
    return ",".join(str(c) for c in cells)


TEAM_SHAPES = [(1, 4, 3, 3), (1, 5, 2, 3), (2, 4, 2, 3), (1, 4, 2, 4), (2, 3, 2, 4)]


def interleaved_buckets(ids):
    buckets = {}
    for code in ("WK", "BAT", "AR", "BOWL"):
        home = sorted(p for p in ids if role_of(p) == code and franchise_of(p) == HOME[0])
        away = sorted(p for p in ids if role_of(p) == code and franchise_of(p) == AWAY[0])
        mixed = []
        for i in range(max(len(home), len(away))):
            if i < len(home):
                mixed.append(home[i])
            if i < len(away):
                mixed.append(away[i])
        buckets[code] = mixed
    return buckets


def rotate(seq, k):
    if not seq:
        return []
    k %= len(seq)
    return list(seq[k:]) + list(seq[:k])


def build_team(ids, index, offset=0):
    buckets = interleaved_buckets(ids)
    wk_n, bat_n, ar_n, bowl_n = TEAM_SHAPES[(index + offset) % len(TEAM_SHAPES)]
    members = (
        rotate(buckets["WK"], index + offset)[:wk_n]
        + rotate(buckets["BAT"], index + offset)[:bat_n]
        + rotate(buckets["AR"], index + offset)[:ar_n]
        + rotate(buckets["BOWL"], index + offset)[:bowl_n]
    )
    # rotations can stack one side past the 7-per-franchise cap; swap
    # surplus members for same-role players from the other side
    while True:
        counts = {HOME[0]: 0, AWAY[0]: 0}
        for p in members:
            counts[franchise_of(p)] += 1
        surplus = next((f for f, c in counts.items() if c > 7), None)
        if surplus is None:
            return members
        other = AWAY[0] if surplus == HOME[0] else HOME[0]
        swapped = False
        for i, p in enumerate(members):
            if franchise_of(p) != surplus:
                continue
            replacement = next(
                (q for q in buckets[role_of(p)]
                 if franchise_of(q) == other and q not in members),
                None,
            )
            if replacement is not None:
                members[i] = replacement
                swapped = True
                break
        assert swapped, "cannot balance franchises"


def ranked(members):
    return sorted(members, key=lambda p: (-(career_rating(p) + form_rating(p)), p))


def pick_captains(members, index):
    order = ranked(members)
    captain, vice = order[0], order[1]
    if index == 3 and STOINIS in members:
        captain = STOINIS
        vice = next(p for p in order if p != STOINIS)
    elif index == 1 and STOINIS in members:
        vice = STOINIS
        captain = next(p for p in order if p != STOINIS)
    if captain == vice:
        vice = next(p for p in order if p != captain)
    return captain, vice


TEAM_NAME_BANK = [
    "Top Order Titans", "Powerplay Pioneers", "Spin City Squad",
    "Death Overs Unit", "Ekana Enforcers", "Chase Masters",
    "New Ball Hunters", "Middle Order Wall", "Boundary Riders",
    "Lucknow L248s", "Twilight Tacticians", "Even Odds Eleven",
    "Dew Factor XI", "Second Innings Spinners", "Finisher Factory",
    "Hitman Core", "Sky High Eleven", "Quick Start XI", "Captain Table XI",
]


def team_name_for(captain):
    if captain == STOINIS:
        return "Strategic Strikers"
    idx = int(hashlib.sha256(captain.encode()).hexdigest(), 16) % len(TEAM_NAME_BANK)
    return TEAM_NAME_BANK[idx]


class ResponderBackend:
    """Deterministic stand-in for a live model: answers every pipeline and
    baseline prompt from the prompt text alone."""

    def __init__(self):
        self.pool_ids = [row[0] for row in PLAYERS]

    def send(self, request):
        text = request.messages[-1].content
        for probe, handler in (
            ("TASK: career_profile", self.career),
            ("TASK: form_assessment", self.form),
            ("TASK: strategy_brief", self.strategy),
            ("TASK: propose_teams", self.propose),
            ("TASK: fix_team", self.fix),
            ("TASK: review_slate", self.review),
            ("TASK: revise_teams", self.revise),
            ("TASK: name_team", self.name_team),
            ("Extract the decimal win odds", self.odds),
            ("Summarize the pitch characteristics", self.pitch),
            ("Fantasy 11 teams based on the following 22 players", self.baseline),
        ):
            if probe in text:
                return ChatResponse(handler(text), f"responder:{request.model_tag}")
        raise AssertionError(f"responder has no rule for prompt: {text[:120]!r}")

    # --- per-prompt handlers ---

    def odds(self, text):
        ids = re.search(r"using the franchise ids (\S+) and (\S+)", text)
        home, away = ids.group(1), ids.group(2).rstrip(".")
        return json.dumps(
            {"odds": [
                {"franchise": home, "decimal_odds": 1.95},
                {"franchise": away, "decimal_odds": 1.87},
            ]}
        )

    def pitch(self, text):
        return json.dumps(
            {"summary": (
                "The venue typically leads to low-scoring games with an equal "
                "contest between batting and bowling; spin grows into the game "
                "and totals near 170 are competitive."
            )}
        )

    def career(self, text):
        pid = re.search(r"PLAYER_ID: (\S+)", text).group(1)
        role = re.search(r"ROLE: (\S+)", text).group(1)
        debutant = "DEBUTANT: yes" in text
        strengths = {
            "WK": ["quick hands behind the stumps", "powerplay intent"],
            "BAT": ["strong top-order record", "boundary hitting"],
            "AR": ["high-impact all-round game", "finishing ability"],
            "BOWL": ["wicket-taking threat", "change of pace"],
        }[role]
        weaknesses = ["inconsistent against quality spin"] if role != "BOWL" else [
            "expensive at the death"
        ]
        description = f"{role} with a settled method; profile id {pid}"
        if debutant:
            description = f"uncapped {role}; no prior tournament record"
        return json.dumps(
            {
                "description": description,
                "strengths": strengths,
                "weaknesses": weaknesses,
                "career_rating": career_rating(pid),
            }
        )

    def form(self, text):
        pid = re.search(r"PLAYER_ID: (\S+)", text).group(1)
        return json.dumps(
            {
                "form_rating": form_rating(pid),
                "notes": "trending with the bat and holding shape with the ball",
            }
        )

    def strategy(self, text):
        pair = re.search(r"franchise (\S+) \(home\) vs franchise (\S+) \(away\)", text)
        home, away = pair.group(1), pair.group(2).rstrip(",")
        return json.dumps(
            {
                "team_strengths": {
                    home: ["robust batting depth", "home conditions knowledge"],
                    away: ["formidable batting lineup", "seasoned bowling"],
                },
                "team_weaknesses": {
                    home: ["middle-order inconsistency under pressure"],
                    away: ["middle-order consistency and ground fielding"],
                },
                "recommendations": [
                    "prioritize all-rounders and top-order batsmen",
                    "emphasize home top-order batters given the challenging pitch",
                    "prefer spinners for the second innings as the surface slows",
                    "keep picks balanced across both sides with odds nearly equal",
                ],
            }
        )

    def _n_from(self, text, pattern):
        return int(re.search(pattern, text).group(1))

    def propose(self, text):
        n = self._n_from(text, r"Build (\d+) distinct fantasy teams")
        teams = []
        for i in range(n):
            members = build_team(self.pool_ids, i)
            captain, vice = pick_captains(members, i)
            teams.append(
                {"players": members, "captain": captain, "vice_captain": vice}
            )
        return json.dumps({"teams": teams})

    def fix(self, text):
        members = build_team(self.pool_ids, 0)
        captain, vice = pick_captains(members, 0)
        return json.dumps({"players": members, "captain": captain, "vice_captain": vice})

    def review(self, text):
        return json.dumps(
            {
                "feedback": [
                    "captains should be known match winners; favour the in-form "
                    "all-rounder where present",
                    "keep role balance but re-check vice-captain picks against "
                    "recent form ratings",
                ]
            }
        )

    def revise(self, text):
        slate = json.loads(re.search(r"Current slate:\n(\[.*?\])\n\nReviewer feedback",
                                     text, re.DOTALL).group(1))
        n = self._n_from(text, r"containing exactly (\d+) teams")
        assert len(slate) == n
        revised = []
        for i, team in enumerate(slate):
            captain, vice = pick_captains(team["players"], i)
            revised.append(
                {"players": team["players"], "captain": captain, "vice_captain": vice}
            )
        return json.dumps({"teams": revised})

    def name_team(self, text):
        team = json.loads(re.search(r"Team:\n(\{.*?\})\n\nStrategy", text, re.DOTALL).group(1))
        captain = team["captain"]
        name = team_name_for(captain)
        rationale = (
            "Built around a top-order core with the captaincy on the most "
            "in-form scorer; bowling picks chase the second-innings grip."
        )
        if captain == STOINIS:
            rationale = (
                "Anchored by the in-form all-rounder as captain for his "
                "batting impact plus bowling overs; the rest follows the "
                "balanced-sides recommendation."
            )
        return json.dumps({"name": name, "rationale": rationale})

    def baseline(self, text):
        n = self._n_from(text, r"generate (\d+) Fantasy 11 teams")
        teams = []
        for i in range(n):
            members = build_team(self.pool_ids, i, offset=2)
            order = ranked(members)
            captain = order[(i + 1) % 3]
            vice = next(p for p in order if p != captain)
            teams.append(
                {"players": members, "captain": captain, "vice_captain": vice}
            )
        return json.dumps({"teams": teams})


def write_weather():
    match = load_match_context(DATA / "match.json")
    rng = random.Random(516)
    for start, end in match.innings_windows:
        times = []
        t = start.replace(minute=0, second=0, microsecond=0)
        while t <= end:
            times.append(t)
            t += timedelta(hours=1)
        payload = {
            "hourly": {
                "time": [x.strftime("%Y-%m-%dT%H:%M") for x in times],
                "temperature_2m": [round(33.5 - 0.8 * i + rng.random(), 1) for i in range(len(times))],
                "wind_speed_10m": [round(9.0 + rng.random() * 4, 1) for _ in times],
                "cloud_cover": [round(20 + rng.random() * 15) for _ in times],
                "relative_humidity_2m": [round(48 + rng.random() * 10) for _ in times],
                "dew_point_2m": [round(20.5 + rng.random() * 2, 1) for _ in times],
            }
        }
        key = weather_query_key(match.venue.latitude, match.venue.longitude, start, end)
        (FIXTURES / "weather" / f"{key}.json").write_text(
            json.dumps(payload, indent=1, sort_keys=True)
        )


def write_search():
    lines = []
    for query, (sources, answer) in SEARCH_FIXTURES.items():
        slug = slugify(query)
        body = "sources: " + " ".join(sources) + "\n" + answer + "\n"
        (FIXTURES / "search" / f"{slug}.txt").write_text(body)
        lines.append(f"{slug}\t{query}")
    (FIXTURES / "search" / "index.tsv").write_text("\n".join(lines) + "\n")


def write_entries():
    """Synthetic contest entries with popularity anchors: the most captained
    player is the away top-order star, the most vice-captained the home
    keeper. About a quarter of the raw lines are planted duplicates."""
    rng = random.Random(1280)
    ids = [row[0] for row in PLAYERS]
    captain_weight = {pid: 1.0 for pid in ids}
    captain_weight[SKY] = 12.0
    captain_weight[STOINIS] = 6.0
    captain_weight["102001"] = 5.0
    vice_weight = {pid: 1.0 for pid in ids}
    vice_weight[DEKOCK] = 10.0
    vice_weight[SKY] = 4.0
    pick_weight = {pid: credit_of(pid) ** 2 for pid in ids}

    def weighted(pop, weights, k):
        chosen = []
        avail = list(pop)
        for _ in range(k):
            total = sum(weights[p] for p in avail)
            r = rng.random() * total
            acc = 0.0
            for p in avail:
                acc += weights[p]
                if acc >= r:
                    chosen.append(p)
                    avail.remove(p)
                    break
        return chosen

    buckets = {code: [p for p in ids if role_of(p) == code]
               for code in ("WK", "BAT", "AR", "BOWL")}
    lines = []
    teams = []
    for i in range(3000):
        shape = TEAM_SHAPES[rng.randrange(len(TEAM_SHAPES))]
        members = (
            weighted(buckets["WK"], pick_weight, shape[0])
            + weighted(buckets["BAT"], pick_weight, shape[1])
            + weighted(buckets["AR"], pick_weight, shape[2])
            + weighted(buckets["BOWL"], pick_weight, shape[3])
        )
        captain = weighted(members, captain_weight, 1)[0]
        vice = weighted([p for p in members if p != captain], vice_weight, 1)[0]
        teams.append((members, captain, vice))
    for i, (members, captain, vice) in enumerate(teams):
        lines.append(f"c63-{i:06d},{';'.join(members)},{captain},{vice}")
    for j in range(1000):  # planted duplicates
        members, captain, vice = teams[rng.randrange(len(teams))]
        lines.append(f"c63-d{j:05d},{';'.join(members)},{captain},{vice}")
    rng.shuffle(lines)
    (DATA / "entries.csv").write_text("\n".join(lines) + "\n")


def record_llm_fixtures():
    match = load_match_context(DATA / "match.json")
    pool = load_players(DATA / "players.csv")
    stats = load_player_stats(DATA / "stats.csv")
    results = load_match_results(DATA / "results.csv")
    responder = ResponderBackend()
    recorder = RecordingBackend(responder, FIXTURES / "llm")
    gateway = LlmGateway(worker=recorder, reviewer=recorder)
    clients = DataClients(
        weather=FixtureWeatherClient(FIXTURES / "weather"),
        search=FixtureSearchClient(FIXTURES / "search"),
        clock=lambda: FIXED_CLOCK,
    )
    config = PipelineConfig()
    rules = default_rules()
    for n in (1, 5, 10, 15, 20):
        result = run_pipeline(
            match, n, pool=pool, rules=rules, stats=stats, gateway=gateway,
            clients=clients, results=results, config=config,
        )
        assert len(result.teams) == n
        prompt_engineering_baseline(match, pool, n, recorder, rules, config=config)
        print(f"recorded n={n}: {result.llm_calls} pipeline calls")


def main():
    for sub in ("data", "llm", "search", "weather"):
        directory = FIXTURES / sub
        if directory.exists():
            shutil.rmtree(directory)
        directory.mkdir(parents=True)
    write_players()
    write_match()
    write_perfs()
    write_history()
    write_weather()
    write_search()
    write_entries()
    record_llm_fixtures()
    n_fixtures = len(list((FIXTURES / "llm").glob("*.txt")))
    print(f"done: {n_fixtures} llm fixtures")


if __name__ == "__main__":
    main()
