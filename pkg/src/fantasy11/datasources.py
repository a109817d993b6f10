"""External fact acquisition: per-innings weather, search-mediated answers,
and historical player statistics with a temporal leakage guard.

Every fetcher has a live client and a fixture client with identical wire
payloads, so offline runs exercise the same parsing paths. The stat store
records its guard cutoff; downstream agents refuse stores that were never
guarded, which makes look-ahead leakage impossible by construction.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence

import requests

from .domain import (
    PERFORMANCE_HEADER,
    PlayerMatchPerformance,
    parse_performance_row,
    parse_utc,
)
from .errors import BackendError, DataLoadError, MissingFixtureError

HOURLY_FIELDS = (
    "temperature_2m",
    "wind_speed_10m",
    "cloud_cover",
    "relative_humidity_2m",
    "dew_point_2m",
)

# deterministic stand-in for "now" used by fixture-backed clients
FIXED_CLOCK = datetime(2000, 1, 1, tzinfo=timezone.utc)

Clock = Callable[[], datetime]


class EmptyAnswerError(BackendError):
    """Search provider returned no usable answer text."""


@dataclass(frozen=True, slots=True)
class WeatherSnapshot:
    innings_index: int  # 1 or 2
    temperature_c: float
    wind_speed_kmh: float
    cloud_cover_pct: float
    humidity_pct: float
    dew_point_c: float
    fetched_at: datetime

    def __post_init__(self):
        if not 0 <= self.cloud_cover_pct <= 100:
            raise DataLoadError(f"cloud cover {self.cloud_cover_pct} outside [0,100]")
        if not 0 <= self.humidity_pct <= 100:
            raise DataLoadError(f"humidity {self.humidity_pct} outside [0,100]")


@dataclass(frozen=True, slots=True)
class SearchAnswer:
    query: str
    answer: str
    sources: tuple[str, ...]
    fetched_at: datetime


def _hour_floor(stamp: datetime) -> datetime:
    return stamp.replace(minute=0, second=0, microsecond=0)


def weather_query_key(latitude: float, longitude: float,
                      start: datetime, end: datetime) -> str:
    canonical = json.dumps(
        [f"{latitude:.4f}", f"{longitude:.4f}",
         _hour_floor(start).isoformat(), _hour_floor(end).isoformat()],
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class WeatherClient(Protocol):
    def hourly(self, latitude: float, longitude: float,
               start: datetime, end: datetime) -> dict: ...


class LiveWeatherClient:
    """Hourly forecast fetcher (open-meteo wire format)."""

    def __init__(
        self,
        base_url: str = "https://api.open-meteo.com/v1/forecast",
        *,
        max_retries: int = 3,
        backoff_s: float = 0.5,
        timeout_s: float = 30.0,
        session: Optional[requests.Session] = None,
    ):
        self.base_url = base_url
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self.session = session or requests.Session()

    def hourly(self, latitude, longitude, start, end):
        params = {
            "latitude": f"{latitude:.4f}",
            "longitude": f"{longitude:.4f}",
            "hourly": ",".join(HOURLY_FIELDS),
            "timezone": "UTC",
            "start_hour": _hour_floor(start).strftime("%Y-%m-%dT%H:%M"),
            "end_hour": _hour_floor(end).strftime("%Y-%m-%dT%H:%M"),
        }
        last_error = "no attempt"
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                resp = self.session.get(self.base_url, params=params, timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_error = str(exc)
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise BackendError(f"weather HTTP {resp.status_code}: {resp.text[:200]}")
            return resp.json()
        raise BackendError(f"weather fetch failed after {self.max_retries} attempts ({last_error})")


class FixtureWeatherClient:
    """Reads recorded wire payloads from ``<dir>/<query-key>.json``."""

    def __init__(self, fixtures_dir: str | Path):
        self.fixtures_dir = Path(fixtures_dir)

    def hourly(self, latitude, longitude, start, end):
        key = weather_query_key(latitude, longitude, start, end)
        path = self.fixtures_dir / f"{key}.json"
        if not path.is_file():
            raise MissingFixtureError(key, f"weather window {start.isoformat()}")
        return json.loads(path.read_text(encoding="utf-8"))


class RecordingWeatherClient:
    def __init__(self, inner: WeatherClient, record_dir: str | Path):
        self.inner = inner
        self.record_dir = Path(record_dir)
        self.record_dir.mkdir(parents=True, exist_ok=True)

    def hourly(self, latitude, longitude, start, end):
        payload = self.inner.hourly(latitude, longitude, start, end)
        key = weather_query_key(latitude, longitude, start, end)
        (self.record_dir / f"{key}.json").write_text(
            json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8"
        )
        return payload


def fetch_innings_weather(
    latitude: float,
    longitude: float,
    windows: Sequence[tuple[datetime, datetime]],
    client: WeatherClient,
    clock: Optional[Clock] = None,
) -> tuple[WeatherSnapshot, WeatherSnapshot]:
    """One snapshot per innings window, each variable averaged over the
    hourly points falling inside the window (endpoints inclusive)."""
    if len(windows) != 2:
        raise DataLoadError("expected exactly two innings windows")
    now = clock() if clock is not None else datetime.now(timezone.utc)
    snapshots = []
    for index, (start, end) in enumerate(windows, start=1):
        if start >= end:
            raise DataLoadError("innings window must run forward")
        payload = client.hourly(latitude, longitude, start, end)
        try:
            hourly = payload["hourly"]
            times = [parse_utc(t) for t in hourly["time"]]
            series = {name: hourly[name] for name in HOURLY_FIELDS}
        except (KeyError, TypeError) as exc:
            raise BackendError(f"malformed weather payload: {exc!r}") from None
        picked = [i for i, t in enumerate(times) if start <= t <= end]
        if not picked:
            raise BackendError(
                f"no hourly points inside window {start.isoformat()}..{end.isoformat()}"
            )
        means = {
            name: sum(series[name][i] for i in picked) / len(picked)
            for name in HOURLY_FIELDS
        }
        snapshots.append(
            WeatherSnapshot(
                innings_index=index,
                temperature_c=means["temperature_2m"],
                wind_speed_kmh=means["wind_speed_10m"],
                cloud_cover_pct=means["cloud_cover"],
                humidity_pct=means["relative_humidity_2m"],
                dew_point_c=means["dew_point_2m"],
                fetched_at=now,
            )
        )
    return snapshots[0], snapshots[1]


def slugify(text: str, max_len: int = 48) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:8]
    return f"{slug[:max_len]}-{digest}"


class SearchClient(Protocol):
    def search(self, query: str) -> SearchAnswer: ...


class FixtureSearchClient:
    """Answers come from ``<dir>/<slug>.txt``; ``index.tsv`` maps slugs to
    the exact query strings they serve. A file may start with a
    ``sources:`` line listing URLs; the rest is the answer text."""

    def __init__(self, fixtures_dir: str | Path, clock: Optional[Clock] = None):
        self.fixtures_dir = Path(fixtures_dir)
        self.clock = clock or (lambda: FIXED_CLOCK)

    def _slug_for(self, query: str) -> str:
        index = self.fixtures_dir / "index.tsv"
        if index.is_file():
            for line in index.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                slug, _, recorded = line.partition("\t")
                if recorded == query:
                    return slug
        return slugify(query)

    def search(self, query: str) -> SearchAnswer:
        if not query:
            raise BackendError("empty search query")
        slug = self._slug_for(query)
        path = self.fixtures_dir / f"{slug}.txt"
        if not path.is_file():
            raise MissingFixtureError(slug, f"query {query!r}")
        text = path.read_text(encoding="utf-8")
        sources: tuple[str, ...] = ()
        if text.startswith("sources:"):
            first, _, rest = text.partition("\n")
            sources = tuple(u for u in first[len("sources:"):].split() if u)
            text = rest
        answer = text.strip()
        if not answer:
            raise EmptyAnswerError(f"fixture for {query!r} has no answer text")
        return SearchAnswer(query, answer, sources, self.clock())


class LiveSearchClient:
    """Agentic-search HTTP client (Tavily-style answer endpoint)."""

    def __init__(
        self,
        api_key: str,
        base_url: str = "https://api.tavily.com/search",
        *,
        timeout_s: float = 30.0,
        session: Optional[requests.Session] = None,
    ):
        self.api_key = api_key
        self.base_url = base_url
        self.timeout_s = timeout_s
        self.session = session or requests.Session()

    def search(self, query: str) -> SearchAnswer:
        if not query:
            raise BackendError("empty search query")
        try:
            resp = self.session.post(
                self.base_url,
                json={"api_key": self.api_key, "query": query, "include_answer": True},
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise BackendError(f"search transport error: {exc}") from None
        if resp.status_code != 200:
            raise BackendError(f"search HTTP {resp.status_code}")
        body = resp.json()
        answer = (body.get("answer") or "").strip()
        if not answer:
            raise EmptyAnswerError(f"no answer for {query!r}")
        sources = tuple(
            r.get("url", "") for r in body.get("results", []) if r.get("url")
        )
        return SearchAnswer(query, answer, sources, datetime.now(timezone.utc))


class RecordingSearchClient:
    def __init__(self, inner: SearchClient, record_dir: str | Path):
        self.inner = inner
        self.record_dir = Path(record_dir)
        self.record_dir.mkdir(parents=True, exist_ok=True)

    def search(self, query: str) -> SearchAnswer:
        answer = self.inner.search(query)
        slug = slugify(query)
        body = ""
        if answer.sources:
            body += "sources: " + " ".join(answer.sources) + "\n"
        body += answer.answer + "\n"
        (self.record_dir / f"{slug}.txt").write_text(body, encoding="utf-8")
        index = self.record_dir / "index.tsv"
        existing = index.read_text(encoding="utf-8") if index.exists() else ""
        if not any(line.split("\t", 1)[0] == slug for line in existing.splitlines()):
            with open(index, "a", encoding="utf-8") as fh:
                fh.write(f"{slug}\t{query}\n")
        return answer


def search_answer(query: str, client: SearchClient) -> SearchAnswer:
    """Resolve one query through whichever search client is configured."""
    return client.search(query)


@dataclass(frozen=True, slots=True)
class StatRow:
    match_id: str
    match_date: datetime
    performance: PlayerMatchPerformance
    franchise_id: Optional[str] = None

    @property
    def player_id(self) -> str:
        return self.performance.player_id

    @property
    def season(self) -> int:
        return self.match_date.year


@dataclass(frozen=True)
class HistoricalStatStore:
    """Per-match stat lines across seasons, indexed by player, date-sorted.

    ``cutoff`` is None until :func:`apply_temporal_guard` runs; agents must
    refuse unguarded stores.
    """

    rows: tuple[StatRow, ...]
    cutoff: Optional[datetime] = None

    def __post_init__(self):
        by_player: dict[str, list[StatRow]] = {}
        for row in self.rows:
            by_player.setdefault(row.player_id, []).append(row)
        for pid in by_player:
            by_player[pid].sort(key=lambda r: (r.match_date, r.match_id))
        object.__setattr__(
            self, "_by_player", {pid: tuple(rs) for pid, rs in by_player.items()}
        )

    @property
    def guarded(self) -> bool:
        return self.cutoff is not None

    def players(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_player))  # type: ignore[attr-defined]

    def rows_for(self, player_id: str) -> tuple[StatRow, ...]:
        return self._by_player.get(player_id, ())  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.rows)


STATS_HEADER = PERFORMANCE_HEADER + ["match_date"]


def load_player_stats(paths: str | Path | Sequence[str | Path]) -> HistoricalStatStore:
    """Load one or more stats CSVs (performance schema + ``match_date``,
    optional trailing ``franchise``) into an unguarded store."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    rows: list[StatRow] = []
    seen: set[tuple[str, str]] = set()
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataLoadError(f"{path}: empty file, expected a header")
            cols = [c.strip() for c in header]
            if cols[: len(STATS_HEADER)] != STATS_HEADER:
                raise DataLoadError(
                    f"{path}: header mismatch, expected {','.join(STATS_HEADER)}[,franchise]"
                )
            has_franchise = len(cols) > len(STATS_HEADER) and cols[len(STATS_HEADER)] == "franchise"
            for lineno, row in enumerate(reader, start=2):
                if not row or not any(cell.strip() for cell in row):
                    continue
                where = f"{path}:{lineno}"
                match_id, perf = parse_performance_row(row, where)
                date_cell = (
                    row[len(PERFORMANCE_HEADER)].strip()
                    if len(row) > len(PERFORMANCE_HEADER)
                    else ""
                )
                if not date_cell:
                    raise DataLoadError(f"{where}: missing match_date")
                try:
                    match_date = parse_utc(date_cell)
                except ValueError:
                    raise DataLoadError(f"{where}: bad match_date {date_cell!r}") from None
                franchise = None
                if has_franchise and len(row) > len(STATS_HEADER):
                    franchise = row[len(STATS_HEADER)].strip() or None
                key = (match_id, perf.player_id)
                if key in seen:
                    raise DataLoadError(f"{where}: DuplicateRow {key}")
                seen.add(key)
                rows.append(StatRow(match_id, match_date, perf, franchise))
    return HistoricalStatStore(rows=tuple(rows))


def apply_temporal_guard(
    store: HistoricalStatStore, cutoff: datetime
) -> HistoricalStatStore:
    """Drop every row dated at or after ``cutoff``; the result remembers its
    cutoff so downstream consumers can verify it."""
    kept = tuple(row for row in store.rows if row.match_date < cutoff)
    return HistoricalStatStore(rows=kept, cutoff=cutoff)


@dataclass(frozen=True, slots=True)
class MatchResult:
    match_id: str
    match_date: datetime
    home_franchise: str
    away_franchise: str
    batting_first: str
    winner: str


RESULTS_HEADER = ["match_id", "match_date", "home_franchise", "away_franchise",
                  "batting_first", "winner"]


def load_match_results(path: str | Path) -> tuple[MatchResult, ...]:
    """Match-level outcomes used for franchise win-loss records."""
    out: list[MatchResult] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != RESULTS_HEADER:
            raise DataLoadError(f"{path}: expected header {','.join(RESULTS_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) < len(RESULTS_HEADER):
                raise DataLoadError(f"{path}:{lineno}: expected {len(RESULTS_HEADER)} fields")
            cells = [c.strip() for c in row]
            out.append(
                MatchResult(
                    match_id=cells[0],
                    match_date=parse_utc(cells[1]),
                    home_franchise=cells[2],
                    away_franchise=cells[3],
                    batting_first=cells[4],
                    winner=cells[5],
                )
            )
    return tuple(out)


def filter_results(
    results: Sequence[MatchResult], cutoff: datetime
) -> tuple[MatchResult, ...]:
    return tuple(r for r in results if r.match_date < cutoff)
