"""Builders for scripted pipeline tests: a two-XI match, stat history,
fixture clients, and deterministic agent responses."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

from fantasy11.datasources import (
    FIXED_CLOCK,
    FixtureSearchClient,
    FixtureWeatherClient,
    HistoricalStatStore,
    MatchResult,
    StatRow,
    slugify,
    weather_query_key,
)
from fantasy11.domain import Franchise, MatchContext, Toss, Venue
from fantasy11.pipeline import DataClients

from conftest import perf, player

UTC = timezone.utc
START = datetime(2023, 5, 16, 14, 0, tzinfo=UTC)

HOME = Franchise("LKO", "Lucknow Super Giants", "LSG")
AWAY = Franchise("MUM", "Mumbai Indians", "MI")
VENUE = Venue("Ekana Cricket Stadium", "Lucknow", 26.8103, 80.8853)

XI_SHAPE = ("WK", "BAT", "BAT", "BAT", "BAT", "AR", "AR", "AR", "BOWL", "BOWL", "BOWL")


def build_pool():
    pool = {}
    for side, franchise in (("h", HOME), ("a", AWAY)):
        for i, code in enumerate(XI_SHAPE):
            pid = f"{side}{i:02d}"
            pool[pid] = player(pid, code, franchise.franchise_id, "9")
    return pool


def xi_ids(side):
    return tuple(f"{side}{i:02d}" for i in range(11))


def build_match(toss=True):
    windows = (
        (START, START + timedelta(minutes=100)),
        (START + timedelta(minutes=115), START + timedelta(minutes=215)),
    )
    return MatchContext(
        match_id="t20-63",
        season=2023,
        tournament="IPL",
        home_franchise=HOME,
        away_franchise=AWAY,
        venue=VENUE,
        scheduled_start=START,
        innings_windows=windows,
        toss=Toss(HOME.franchise_id, "bat") if toss else None,
        playing_xi={HOME.franchise_id: xi_ids("h"), AWAY.franchise_id: xi_ids("a")},
    )


def build_stats(pool, matches_per_player=4):
    """History strictly before the match plus one leaked future row that the
    guard must drop."""
    rows = []
    for pid in sorted(pool):
        for k in range(matches_per_player):
            rows.append(
                StatRow(
                    match_id=f"hist-{k}",
                    match_date=START - timedelta(days=30 * (k + 1)),
                    performance=perf(pid, runs=10 * (k + 1), balls=10 * (k + 1)),
                    franchise_id=pool[pid].franchise_id,
                )
            )
        rows.append(
            StatRow(
                match_id="future",
                match_date=START + timedelta(days=1),
                performance=perf(pid, runs=999, balls=100),
                franchise_id=pool[pid].franchise_id,
            )
        )
    return HistoricalStatStore(rows=tuple(rows))


def build_results():
    out = []
    for k in range(4):
        out.append(
            MatchResult(
                match_id=f"hist-{k}",
                match_date=START - timedelta(days=30 * (k + 1)),
                home_franchise=HOME.franchise_id if k % 2 == 0 else AWAY.franchise_id,
                away_franchise=AWAY.franchise_id if k % 2 == 0 else HOME.franchise_id,
                batting_first=HOME.franchise_id if k < 2 else AWAY.franchise_id,
                winner=AWAY.franchise_id if k % 2 == 0 else HOME.franchise_id,
            )
        )
    return tuple(out)


def write_weather_fixtures(weather_dir, match):
    weather_dir.mkdir(parents=True, exist_ok=True)
    for start, end in match.innings_windows:
        times = []
        t = start.replace(minute=0, second=0, microsecond=0)
        while t <= end:
            times.append(t)
            t += timedelta(hours=1)
        payload = {
            "hourly": {
                "time": [x.strftime("%Y-%m-%dT%H:%M") for x in times],
                "temperature_2m": [31.0] * len(times),
                "wind_speed_10m": [12.0] * len(times),
                "cloud_cover": [35.0] * len(times),
                "relative_humidity_2m": [58.0] * len(times),
                "dew_point_2m": [21.0] * len(times),
            }
        }
        key = weather_query_key(
            match.venue.latitude, match.venue.longitude, start, end
        )
        (weather_dir / f"{key}.json").write_text(json.dumps(payload))


SEARCH_FIXTURES = {
    "win odds Lucknow Super Giants vs Mumbai Indians IPL 2023":
        "Bookmakers list Lucknow Super Giants at decimal odds 1.95 and "
        "Mumbai Indians at 1.87, an almost even contest.",
    "pitch report Ekana Cricket Stadium Lucknow":
        "The surface at the Ekana typically produces low-scoring games with "
        "an equal contest between batting and bowling; spinners grip in the "
        "second innings.",
    "fantasy team tips LSG vs MI IPL 2023":
        "Crowd favourites emphasise all-rounders and top-order batsmen for "
        "short-format contests.",
    "best fantasy cricket strategies IPL":
        "Popular strategy threads recommend balancing both sides and backing "
        "in-form captains.",
    "fantasy contest rules IPL":
        "Standard contests require 11 players within a credit cap, role "
        "minimums, and a per-franchise limit.",
}


def write_search_fixtures(search_dir, fixtures=None, empty_tips=False):
    search_dir.mkdir(parents=True, exist_ok=True)
    fixtures = dict(SEARCH_FIXTURES if fixtures is None else fixtures)
    if empty_tips:
        for query in list(fixtures):
            if "tips" in query or "strategies" in query:
                fixtures[query] = ""
    lines = []
    for query, answer in fixtures.items():
        slug = slugify(query)
        (search_dir / f"{slug}.txt").write_text(answer + "\n")
        lines.append(f"{slug}\t{query}")
    (search_dir / "index.tsv").write_text("\n".join(lines) + "\n")


def build_clients(tmp_path, match, empty_tips=False):
    weather_dir = tmp_path / "weather"
    search_dir = tmp_path / "search"
    write_weather_fixtures(weather_dir, match)
    write_search_fixtures(search_dir, empty_tips=empty_tips)
    return DataClients(
        weather=FixtureWeatherClient(weather_dir),
        search=FixtureSearchClient(search_dir),
        clock=lambda: FIXED_CLOCK,
    )


def rotate(seq, k):
    k %= len(seq)
    return list(seq[k:]) + list(seq[:k])


def valid_teams_json(pool, n, star=None):
    """Deterministic rotation over role buckets; buckets interleave the two
    franchises so every rotation stays inside the 7-per-franchise cap."""
    buckets = {}
    for code in ("WK", "BAT", "AR", "BOWL"):
        home = sorted(p for p in pool if pool[p].role.value == code and p.startswith("h"))
        away = sorted(p for p in pool if pool[p].role.value == code and p.startswith("a"))
        mixed = []
        for pair in zip(home, away):
            mixed.extend(pair)
        buckets[code] = mixed
    teams = []
    for i in range(n):
        members = (
            rotate(buckets["WK"], i)[:1]
            + rotate(buckets["BAT"], i)[:4]
            + rotate(buckets["AR"], i)[:3]
            + rotate(buckets["BOWL"], i)[:3]
        )
        captain = star if (star and star in members) else members[1]
        vice = members[2] if members[2] != captain else members[3]
        teams.append({"players": members, "captain": captain, "vice_captain": vice})
    return teams


def career_response(pid, rating=6):
    return json.dumps(
        {
            "description": f"player {pid} profile",
            "strengths": ["powerplay hitting"],
            "weaknesses": ["pace off the ball"],
            "career_rating": rating,
        }
    )


def form_response(pid, rating=5):
    return json.dumps({"form_rating": rating, "notes": f"recent trend for {pid}"})


ODDS_RESPONSE = json.dumps(
    {
        "odds": [
            {"franchise": HOME.franchise_id, "decimal_odds": 1.95},
            {"franchise": AWAY.franchise_id, "decimal_odds": 1.87},
        ]
    }
)

PITCH_RESPONSE = json.dumps(
    {"summary": "Low-scoring venue with an equal contest between bat and ball."}
)

STRATEGY_RESPONSE = json.dumps(
    {
        "team_strengths": {HOME.franchise_id: ["strong top order"],
                           AWAY.franchise_id: ["deep batting"]},
        "team_weaknesses": {HOME.franchise_id: ["middle-order collapses"],
                            AWAY.franchise_id: ["inconsistent fielding"]},
        "recommendations": [
            "prioritise all-rounders and top-order batsmen",
            "balance picks across both franchises",
        ],
    }
)

FEEDBACK_RESPONSE = json.dumps(
    {"feedback": ["captain choices should favour in-form all-rounders"]}
)


def name_response(i):
    return json.dumps({"name": f"Team {i + 1}", "rationale": "balanced composition"})


def worker_script(pool, n, max_review_iters=2, star=None):
    """Response sequence for the worker backend under sequential profiling."""
    order = list(xi_ids("h")) + list(xi_ids("a"))
    teams = valid_teams_json(pool, n, star=star)
    script = [ODDS_RESPONSE, PITCH_RESPONSE]
    script += [career_response(pid) for pid in order]
    script += [form_response(pid) for pid in order]
    script += [STRATEGY_RESPONSE]
    script += [json.dumps({"teams": teams})]
    for _ in range(max_review_iters):
        script += [json.dumps({"teams": teams})]  # revision resubmits the slate
    script += [name_response(i) for i in range(n)]
    return script


def reviewer_script(max_review_iters=2):
    return [FEEDBACK_RESPONSE] * max_review_iters
