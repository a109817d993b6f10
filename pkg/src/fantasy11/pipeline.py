"""Multi-agent team generation: a supervisor routes over a typed blackboard
through research, career profiling, form assessment, strategy, and a
selector with a bounded review loop.

Routing is deterministic (a pure function of slot states), every LLM
exchange is transcribed, and under fixture backends a whole run is a pure
function of its inputs: two runs give byte-identical transcripts.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

from .datasources import (
    HistoricalStatStore,
    MatchResult,
    SearchClient,
    WeatherClient,
    fetch_innings_weather,
    filter_results,
    search_answer,
)
from .domain import (
    CareerProfile,
    FantasyTeam,
    FormAssessment,
    MatchContext,
    Player,
    SeasonAggregate,
    SplitAggregate,
)
from .errors import (
    CannotProduceValidSlateError,
    Fantasy11Error,
    MalformedAfterRetriesError,
    PipelineError,
    StuckStateError,
    UnknownPlayerError,
)
from .llm import (
    Backend,
    ChatRequest,
    ChatResponse,
    PayloadDescriptor,
    REVIEWER,
    WORKER,
    complete_structured,
    fingerprint_request,
    make_request,
)
from .rules import RulesSchema, describe_rules, validate_team

RESEARCHER = "researcher"
CAREER_PROFILER = "career_profiler"
FORM_ASSESSOR = "form_assessor"
STRATEGIZER = "strategizer"
SELECTOR = "selector"
DONE = "done"

MAX_TEAMS = 20

PROMPTS_DIR = Path(__file__).parent / "prompts"


@dataclass(frozen=True, slots=True)
class OddsQuote:
    franchise_id: str
    decimal_odds: float
    source: str
    fetched_at: datetime

    def __post_init__(self):
        if not self.decimal_odds > 1.0:
            raise Fantasy11Error(f"decimal odds must exceed 1.0, got {self.decimal_odds}")


@dataclass(frozen=True, slots=True)
class PitchReport:
    summary: str
    sources: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class TeamRecord:
    wins: int
    losses: int
    batting_first: tuple[int, int]  # (wins, losses) when batting first
    batting_second: tuple[int, int]


@dataclass(frozen=True, slots=True)
class StrategyBrief:
    team_records: Mapping[str, TeamRecord]
    team_strengths: Mapping[str, tuple[str, ...]]
    team_weaknesses: Mapping[str, tuple[str, ...]]
    tips: tuple[str, ...]
    recommendations: tuple[str, ...]

    def __post_init__(self):
        if not self.recommendations:
            raise Fantasy11Error("a strategy brief needs at least one recommendation")


@dataclass
class Slot:
    name: str
    payload: Any = None
    provenance: str = ""
    filled_at: Optional[int] = None

    @property
    def filled(self) -> bool:
        return self.filled_at is not None


class Blackboard:
    """Shared typed state the supervisor routes agents over.

    Slots fill exactly once, except ``proposed_teams`` and
    ``review_feedback`` which the review loop may rewrite. The match pool
    (the selectable players, keyed by id) travels with the board so every
    agent sees the same roster.
    """

    SLOT_NAMES = (
        "weather", "odds", "pitch", "career_profiles", "form",
        "strategy", "proposed_teams", "review_feedback", "final_teams",
    )
    REWRITABLE = frozenset({"proposed_teams", "review_feedback"})

    def __init__(self, match_context: MatchContext, pool: Mapping[str, Player]):
        self.match_context = match_context
        self.pool = dict(pool)
        self.rules_advisory: str = "(none)"
        self.team_fix_attempts: dict[int, int] = {}
        self._slots: dict[str, Slot] = {name: Slot(name) for name in self.SLOT_NAMES}
        self._seq = 0

    def slot(self, name: str) -> Slot:
        return self._slots[name]

    def filled(self, name: str) -> bool:
        return self._slots[name].filled

    def payload(self, name: str) -> Any:
        slot = self._slots[name]
        if not slot.filled:
            raise PipelineError(f"slot {name!r} read before it was filled")
        return slot.payload

    def fill(self, name: str, payload: Any, provenance: str) -> None:
        slot = self._slots[name]
        if slot.filled and name not in self.REWRITABLE:
            raise PipelineError(f"slot {name!r} may only fill once")
        self._seq += 1
        slot.payload = payload
        slot.provenance = provenance
        slot.filled_at = self._seq

    @property
    def review_iterations(self) -> int:
        slot = self._slots["review_feedback"]
        return len(slot.payload) if slot.filled else 0

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"match_id": self.match_context.match_id, "slots": {}}
        for name in self.SLOT_NAMES:
            slot = self._slots[name]
            out["slots"][name] = {
                "filled": slot.filled,
                "provenance": slot.provenance,
                "filled_at": slot.filled_at,
            }
        return out


class Transcript:
    """Ordered, replayable log: one record per agent step, slot fill, fetch,
    and LLM exchange (including retries)."""

    def __init__(self):
        self.records: list[dict] = []

    def append(self, kind: str, **fields: Any) -> None:
        record = {"seq": len(self.records), "kind": kind}
        record.update(fields)
        self.records.append(record)

    def llm_exchange(self, agent: str, request: ChatRequest, response: ChatResponse) -> None:
        self.append(
            "llm_exchange",
            agent=agent,
            model_tag=request.model_tag,
            fingerprint=fingerprint_request(request),
            request_messages=[[m.role, m.content] for m in request.messages],
            response=response.content,
            model_used=response.model_used,
        )

    @property
    def llm_calls(self) -> int:
        return sum(1 for r in self.records if r["kind"] == "llm_exchange")

    def to_jsonl(self) -> str:
        return "\n".join(
            json.dumps(r, sort_keys=True, ensure_ascii=True) for r in self.records
        ) + "\n"


@dataclass(frozen=True)
class PipelineConfig:
    max_review_iters: int = 2
    per_team_attempts: int = 3
    form_window: int = 10
    profile_concurrency: int = 4
    worker_temperature: float = 1.0
    reviewer_temperature: float = 0.2
    prompts_dir: Optional[Path] = None

    def template_dir(self) -> Path:
        return Path(self.prompts_dir) if self.prompts_dir else PROMPTS_DIR


@dataclass(frozen=True)
class LlmGateway:
    worker: Backend
    reviewer: Backend


@dataclass(frozen=True)
class DataClients:
    weather: WeatherClient
    search: SearchClient
    clock: Optional[Callable[[], datetime]] = None


@dataclass(frozen=True)
class GenerationResult:
    teams: tuple[FantasyTeam, ...]
    transcript: Transcript
    blackboard: Blackboard
    llm_calls: int
    llm_budget: int
    evaluation: Any = None


_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z_0-9]*)\}")


def render_template(template: str, values: Mapping[str, Any]) -> str:
    """Replace ``{name}`` for known names only; unknown braces pass through
    (templates legitimately contain JSON braces)."""
    return _PLACEHOLDER.sub(
        lambda m: str(values[m.group(1)]) if m.group(1) in values else m.group(0),
        template,
    )


def load_template(name: str, prompts_dir: Path) -> tuple[str, str]:
    """Read ``<name>.tmpl``; an optional system section sits above a ``---``
    line, the user section below it."""
    text = (prompts_dir / f"{name}.tmpl").read_text(encoding="utf-8")
    if "\n---\n" in text:
        system, _, user = text.partition("\n---\n")
        return system.strip(), user.strip()
    return "", text.strip()


def build_prompt(
    name: str,
    values: Mapping[str, Any],
    config: PipelineConfig,
    model_tag: str,
    temperature: float,
) -> ChatRequest:
    system, user = load_template(name, config.template_dir())
    return make_request(
        model_tag,
        render_template(user, values),
        system=render_template(system, values),
        temperature=temperature,
    )


def route_next(board: Blackboard, config: PipelineConfig) -> str:
    """Deterministic supervisor: next agent purely from slot states."""
    if board.filled("final_teams"):
        return DONE
    if not (board.filled("weather") and board.filled("odds") and board.filled("pitch")):
        return RESEARCHER
    if not board.filled("career_profiles"):
        return CAREER_PROFILER
    if not board.filled("form"):
        return FORM_ASSESSOR
    if not board.filled("strategy"):
        return STRATEGIZER
    if (
        not board.filled("proposed_teams")
        or board.review_iterations <= config.max_review_iters
    ):
        return SELECTOR
    raise StuckStateError("no routing rule applies; blackboard is inconsistent")


_RATING_DESCRIPTOR = PayloadDescriptor(
    fields={"description": str, "strengths": list, "weaknesses": list, "career_rating": int},
    check=lambda p: (
        ([] if 1 <= p["career_rating"] <= 10 else ["career_rating must be in 1..10"])
        + ([] if all(isinstance(s, str) for s in p["strengths"] + p["weaknesses"])
           else ["strengths and weaknesses must be strings"])
    ),
)

_FORM_DESCRIPTOR = PayloadDescriptor(
    fields={"form_rating": int, "notes": str},
    check=lambda p: [] if 1 <= p["form_rating"] <= 10 else ["form_rating must be in 1..10"],
)

_PITCH_DESCRIPTOR = PayloadDescriptor(
    fields={"summary": str},
    check=lambda p: [] if p["summary"].strip() else ["summary must be non-empty"],
)

_NAME_DESCRIPTOR = PayloadDescriptor(
    fields={"name": str, "rationale": str},
    check=lambda p: [] if p["name"].strip() else ["name must be non-empty"],
)

_FEEDBACK_DESCRIPTOR = PayloadDescriptor(
    fields={"feedback": list},
    check=lambda p: (
        [] if p["feedback"] and all(isinstance(s, str) for s in p["feedback"])
        else ["feedback must be a non-empty list of strings"]
    ),
)


def _odds_descriptor(franchise_ids: frozenset[str]) -> PayloadDescriptor:
    def check(payload: dict) -> list[str]:
        problems = []
        seen = set()
        for item in payload["odds"]:
            if not isinstance(item, dict):
                problems.append("each odds item must be an object")
                continue
            fid = item.get("franchise")
            odds = item.get("decimal_odds")
            if fid not in franchise_ids:
                problems.append(f"franchise must be one of {sorted(franchise_ids)}")
            elif fid in seen:
                problems.append(f"duplicate franchise {fid}")
            else:
                seen.add(fid)
            if not isinstance(odds, (int, float)) or isinstance(odds, bool) or not odds > 1:
                problems.append("decimal_odds must be a number > 1")
        if not seen:
            problems.append("at least one franchise quote required")
        return problems

    return PayloadDescriptor(fields={"odds": list}, check=check)


def _strategy_descriptor() -> PayloadDescriptor:
    def check(payload: dict) -> list[str]:
        problems = []
        recs = payload["recommendations"]
        if not recs or not all(isinstance(s, str) and s.strip() for s in recs):
            problems.append("recommendations must be a non-empty list of strings")
        for key in ("team_strengths", "team_weaknesses"):
            for fid, items in payload[key].items():
                if not isinstance(items, list):
                    problems.append(f"{key}[{fid}] must be a list")
        return problems

    return PayloadDescriptor(
        fields={"team_strengths": dict, "team_weaknesses": dict, "recommendations": list},
        check=check,
    )


def _teams_descriptor(n: int) -> PayloadDescriptor:
    def check(payload: dict) -> list[str]:
        teams = payload["teams"]
        if len(teams) != n:
            return [f"need exactly {n} teams, got {len(teams)}"]
        problems = []
        for i, team in enumerate(teams):
            problems.extend(_raw_team_problems(team, f"teams[{i}]"))
        return problems

    return PayloadDescriptor(fields={"teams": list}, check=check)


_SINGLE_TEAM_DESCRIPTOR = PayloadDescriptor(
    fields={"players": list, "captain": str, "vice_captain": str},
    check=lambda p: _raw_team_problems(p, "team"),
)


def _raw_team_problems(team: object, label: str) -> list[str]:
    if not isinstance(team, dict):
        return [f"{label} must be an object"]
    problems = []
    players = team.get("players")
    if not isinstance(players, list) or not all(isinstance(p, str) and p for p in players):
        problems.append(f"{label}.players must be a list of player ids")
    for key in ("captain", "vice_captain"):
        if not isinstance(team.get(key), str) or not team.get(key):
            problems.append(f"{label}.{key} must be a player id")
    return problems


def _season_aggregates(stats: HistoricalStatStore, player_id: str) -> tuple[SeasonAggregate, ...]:
    by_season: dict[int, list] = {}
    for row in stats.rows_for(player_id):
        by_season.setdefault(row.season, []).append(row)
    out = []
    for season in sorted(by_season):
        rows = by_season[season]
        runs = sum(r.performance.batting.runs for r in rows)
        balls = sum(r.performance.batting.balls_faced for r in rows)
        wickets = sum(r.performance.bowling.wickets for r in rows)
        legal = sum(r.performance.bowling.legal_balls for r in rows)
        conceded = sum(r.performance.bowling.runs_conceded for r in rows)
        catches = sum(r.performance.fielding.catches for r in rows)
        out.append(
            SeasonAggregate(
                season=season,
                matches=len(rows),
                runs=runs,
                balls_faced=balls,
                strike_rate=100.0 * runs / balls if balls else 0.0,
                wickets=wickets,
                legal_balls=legal,
                economy=6.0 * conceded / legal if legal else 0.0,
                catches=catches,
            )
        )
    return tuple(out)


def _split_aggregate(rows: Sequence) -> SplitAggregate:
    runs = sum(r.performance.batting.runs for r in rows)
    balls = sum(r.performance.batting.balls_faced for r in rows)
    wickets = sum(r.performance.bowling.wickets for r in rows)
    legal = sum(r.performance.bowling.legal_balls for r in rows)
    conceded = sum(r.performance.bowling.runs_conceded for r in rows)
    return SplitAggregate(
        matches=len(rows),
        runs=runs,
        balls_faced=balls,
        strike_rate=100.0 * runs / balls if balls else 0.0,
        wickets=wickets,
        legal_balls=legal,
        economy=6.0 * conceded / legal if legal else 0.0,
    )


def _form_splits(
    stats: HistoricalStatStore,
    player_id: str,
    window: int,
    results_by_match: Mapping[str, MatchResult],
) -> Mapping[str, SplitAggregate]:
    rows = stats.rows_for(player_id)[-window:]
    home, away, first, second = [], [], [], []
    for row in rows:
        result = results_by_match.get(row.match_id)
        if result is None or row.franchise_id is None:
            continue
        if row.franchise_id == result.home_franchise:
            home.append(row)
        elif row.franchise_id == result.away_franchise:
            away.append(row)
        if row.franchise_id == result.batting_first:
            first.append(row)
        elif row.franchise_id in (result.home_franchise, result.away_franchise):
            second.append(row)
    return {
        "overall": _split_aggregate(rows),
        "home": _split_aggregate(home),
        "away": _split_aggregate(away),
        "batting_first": _split_aggregate(first),
        "batting_second": _split_aggregate(second),
    }


def team_records_from_results(
    results: Sequence[MatchResult], franchise_ids: Sequence[str]
) -> dict[str, TeamRecord]:
    """Win-loss tallies per franchise, split by batting first or second."""
    out = {}
    for fid in franchise_ids:
        wins = losses = 0
        bf = [0, 0]
        bs = [0, 0]
        for result in results:
            if fid not in (result.home_franchise, result.away_franchise):
                continue
            won = result.winner == fid
            wins += won
            losses += not won
            bucket = bf if result.batting_first == fid else bs
            bucket[0 if won else 1] += 1
        out[fid] = TeamRecord(wins, losses, (bf[0], bf[1]), (bs[0], bs[1]))
    return out


def _require_guarded(stats: HistoricalStatStore, match: MatchContext) -> None:
    if not stats.guarded:
        raise PipelineError("agents require a temporally guarded stat store")
    if stats.cutoff > match.scheduled_start:  # type: ignore[operator]
        raise PipelineError("stat store cutoff lies after match start (leakage risk)")


def _xi_ids(match: MatchContext) -> tuple[str, ...]:
    ids = match.pool_player_ids()
    if ids is None:
        raise PipelineError("playing XIs are required before profiling")
    return ids


def _format_aggregates(aggs: Sequence[SeasonAggregate]) -> str:
    if not aggs:
        return "(no prior matches)"
    lines = [
        f"{a.season}: matches={a.matches} runs={a.runs} balls={a.balls_faced} "
        f"SR={a.strike_rate:.1f} wkts={a.wickets} balls_bowled={a.legal_balls} "
        f"econ={a.economy:.2f} catches={a.catches}"
        for a in aggs
    ]
    return "\n".join(lines)


def _format_splits(splits: Mapping[str, SplitAggregate]) -> str:
    lines = []
    for name, s in splits.items():
        lines.append(
            f"{name}: matches={s.matches} runs={s.runs} SR={s.strike_rate:.1f} "
            f"wkts={s.wickets} econ={s.economy:.2f}"
        )
    return "\n".join(lines)


def run_researcher(
    board: Blackboard,
    clients: DataClients,
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
) -> Blackboard:
    """Fill weather (both innings), win odds, and the pitch report."""
    match = board.match_context
    transcript.append("agent_step", agent=RESEARCHER, detail="start")
    if match.toss is not None:
        transcript.append(
            "agent_step", agent=RESEARCHER,
            detail=f"toss: {match.toss.winner} chose to {match.toss.decision}",
        )
    if match.playing_xi is not None:
        transcript.append(
            "agent_step", agent=RESEARCHER,
            detail=f"playing XIs known for {sorted(match.playing_xi)}",
        )
    observe = lambda req, resp: transcript.llm_exchange(RESEARCHER, req, resp)

    try:
        snapshots = fetch_innings_weather(
            match.venue.latitude, match.venue.longitude,
            match.innings_windows, clients.weather, clock=clients.clock,
        )
    except Fantasy11Error as exc:
        raise PipelineError(f"researcher failed filling slot 'weather': {exc}") from exc
    board.fill("weather", snapshots, f"weather@{match.venue.latitude:.4f},{match.venue.longitude:.4f}")
    transcript.append("agent_step", agent=RESEARCHER, detail="weather filled")

    home, away = match.home_franchise, match.away_franchise
    odds_query = f"win odds {home.name} vs {away.name} {match.tournament} {match.season}"
    try:
        odds_answer = search_answer(odds_query, clients.search)
    except Fantasy11Error as exc:
        raise PipelineError(f"researcher failed filling slot 'odds': {exc}") from exc
    transcript.append("search", agent=RESEARCHER, query=odds_query, answer=odds_answer.answer)
    request = build_prompt(
        "researcher_odds",
        {
            "home_id": home.franchise_id, "home_name": home.name,
            "away_id": away.franchise_id, "away_name": away.name,
            "answer_text": odds_answer.answer,
        },
        config, WORKER, config.worker_temperature,
    )
    payload = complete_structured(
        request,
        _odds_descriptor(frozenset({home.franchise_id, away.franchise_id})),
        gateway.worker, max_attempts=config.per_team_attempts, observer=observe,
    )
    fetched = clients.clock() if clients.clock else odds_answer.fetched_at
    quotes = tuple(
        OddsQuote(item["franchise"], float(item["decimal_odds"]),
                  odds_query, fetched)
        for item in payload["odds"]
    )
    board.fill("odds", quotes, f"search:{odds_query}")
    transcript.append("agent_step", agent=RESEARCHER, detail="odds filled")

    pitch_query = f"pitch report {match.venue.name} {match.venue.city}"
    try:
        pitch_answer = search_answer(pitch_query, clients.search)
    except Fantasy11Error as exc:
        raise PipelineError(f"researcher failed filling slot 'pitch': {exc}") from exc
    transcript.append("search", agent=RESEARCHER, query=pitch_query, answer=pitch_answer.answer)
    request = build_prompt(
        "researcher_pitch",
        {
            "venue_name": match.venue.name, "venue_city": match.venue.city,
            "answer_text": pitch_answer.answer,
        },
        config, WORKER, config.worker_temperature,
    )
    payload = complete_structured(
        request, _PITCH_DESCRIPTOR, gateway.worker,
        max_attempts=config.per_team_attempts, observer=observe,
    )
    board.fill(
        "pitch",
        PitchReport(payload["summary"].strip(), pitch_answer.sources),
        f"search:{pitch_query}",
    )
    transcript.append("agent_step", agent=RESEARCHER, detail="pitch filled")
    return board


def _fan_out(
    player_ids: Sequence[str],
    task: Callable[[str], tuple[Any, list[tuple[ChatRequest, ChatResponse]]]],
    transcript: Transcript,
    agent: str,
    concurrency: int,
) -> dict[str, Any]:
    """Run per-player LLM tasks concurrently but transcribe them in input
    order so transcripts stay deterministic."""
    def safe(pid: str):
        try:
            return pid, *task(pid), None
        except Fantasy11Error as exc:
            return pid, None, [], exc

    results: dict[str, Any] = {}
    failures: list[str] = []
    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        for pid, value, exchanges, error in pool.map(safe, player_ids):
            for req, resp in exchanges:
                transcript.llm_exchange(agent, req, resp)
            if error is not None:
                failures.append(f"{pid}: {error}")
            else:
                results[pid] = value
    if failures:
        raise PipelineError(f"{agent} failed for players: " + "; ".join(failures))
    return results


def run_career_profiler(
    board: Blackboard,
    stats: HistoricalStatStore,
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
) -> Blackboard:
    """Deterministic season aggregates per player, then one structured
    rating call each."""
    match = board.match_context
    _require_guarded(stats, match)
    pool_ids = _xi_ids(match)
    transcript.append("agent_step", agent=CAREER_PROFILER, detail=f"profiling {len(pool_ids)} players")
    roles = _pool_roles(board)

    def task(pid: str):
        aggs = _season_aggregates(stats, pid)
        request = build_prompt(
            "career",
            {
                "player_id": pid,
                "role": roles[pid].value,
                "debutant": "yes" if not aggs else "no",
                "aggregates": _format_aggregates(aggs),
            },
            config, WORKER, config.worker_temperature,
        )
        exchanges: list[tuple[ChatRequest, ChatResponse]] = []
        payload = complete_structured(
            request, _RATING_DESCRIPTOR, gateway.worker,
            max_attempts=config.per_team_attempts,
            observer=lambda rq, rs: exchanges.append((rq, rs)),
        )
        profile = CareerProfile(
            player_id=pid,
            per_season=aggs,
            strengths=tuple(payload["strengths"]),
            weaknesses=tuple(payload["weaknesses"]),
            career_rating=payload["career_rating"],
            description=payload["description"],
        )
        return profile, exchanges

    profiles = _fan_out(pool_ids, task, transcript, CAREER_PROFILER, config.profile_concurrency)
    board.fill("career_profiles", profiles, f"stats+llm for {len(pool_ids)} players")
    return board


def run_form_assessor(
    board: Blackboard,
    stats: HistoricalStatStore,
    results: Sequence[MatchResult],
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
) -> Blackboard:
    """Last-K window splits per player, then one structured form call each."""
    match = board.match_context
    _require_guarded(stats, match)
    pool_ids = _xi_ids(match)
    profiles: Mapping[str, CareerProfile] = board.payload("career_profiles")
    guarded_results = filter_results(results, stats.cutoff)  # type: ignore[arg-type]
    results_by_match = {r.match_id: r for r in guarded_results}
    transcript.append("agent_step", agent=FORM_ASSESSOR, detail=f"assessing {len(pool_ids)} players")
    roles = _pool_roles(board)

    def task(pid: str):
        splits = _form_splits(stats, pid, config.form_window, results_by_match)
        request = build_prompt(
            "form",
            {
                "player_id": pid,
                "role": roles[pid].value,
                "career_rating": profiles[pid].career_rating,
                "window_size": config.form_window,
                "splits": _format_splits(splits),
            },
            config, WORKER, config.worker_temperature,
        )
        exchanges: list[tuple[ChatRequest, ChatResponse]] = []
        payload = complete_structured(
            request, _FORM_DESCRIPTOR, gateway.worker,
            max_attempts=config.per_team_attempts,
            observer=lambda rq, rs: exchanges.append((rq, rs)),
        )
        assessment = FormAssessment(
            player_id=pid,
            window_size=config.form_window,
            splits=splits,
            form_rating=payload["form_rating"],
            notes=payload["notes"],
        )
        return assessment, exchanges

    form = _fan_out(pool_ids, task, transcript, FORM_ASSESSOR, config.profile_concurrency)
    board.fill("form", form, f"last-{config.form_window} splits + llm")
    return board


def _pool_roles(board: Blackboard) -> Mapping[str, Any]:
    return {pid: player.role for pid, player in board.pool.items()}


def _ratings_table(board: Blackboard) -> str:
    pool = board.pool
    profiles: Mapping[str, CareerProfile] = board.payload("career_profiles")
    form: Mapping[str, FormAssessment] = board.payload("form")
    lines = []
    for pid in _xi_ids(board.match_context):
        player = pool[pid]
        lines.append(
            f"{pid} {player.role.value} {player.franchise_id} "
            f"career={profiles[pid].career_rating} form={form[pid].form_rating}"
        )
    return "\n".join(lines)


def _players_table(board: Blackboard) -> str:
    pool = board.pool
    profiles: Mapping[str, CareerProfile] = board.payload("career_profiles")
    form: Mapping[str, FormAssessment] = board.payload("form")
    lines = []
    for pid in _xi_ids(board.match_context):
        player = pool[pid]
        credit = f"{player.credit_half / 2:g}"
        lines.append(
            f"{pid} {player.role.value} {player.franchise_id} {credit} "
            f"career={profiles[pid].career_rating} form={form[pid].form_rating}"
        )
    return "\n".join(lines)


def run_strategizer(
    board: Blackboard,
    stats: HistoricalStatStore,
    results: Sequence[MatchResult],
    clients: DataClients,
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
) -> Blackboard:
    """Deterministic franchise records plus tips searches feed one
    structured strategy call."""
    from .datasources import EmptyAnswerError

    match = board.match_context
    _require_guarded(stats, match)
    home, away = match.home_franchise, match.away_franchise
    guarded_results = filter_results(results, stats.cutoff)  # type: ignore[arg-type]
    records = team_records_from_results(
        guarded_results, [home.franchise_id, away.franchise_id]
    )
    transcript.append("agent_step", agent=STRATEGIZER, detail="records computed")

    tips: list[str] = []
    tip_queries = [
        f"fantasy team tips {home.short_code} vs {away.short_code} {match.tournament} {match.season}",
        f"best fantasy cricket strategies {match.tournament}",
    ]
    for query in tip_queries:
        try:
            answer = search_answer(query, clients.search)
        except EmptyAnswerError:
            transcript.append("search", agent=STRATEGIZER, query=query, answer="")
            continue
        transcript.append("search", agent=STRATEGIZER, query=query, answer=answer.answer)
        tips.append(answer.answer)

    records_text = "\n".join(
        f"{fid}: {r.wins}-{r.losses} overall, batting first {r.batting_first[0]}-{r.batting_first[1]}, "
        f"batting second {r.batting_second[0]}-{r.batting_second[1]}"
        for fid, r in records.items()
    )
    weather_text = "\n".join(
        f"innings {w.innings_index}: {w.temperature_c:.1f}C wind {w.wind_speed_kmh:.1f}km/h "
        f"cloud {w.cloud_cover_pct:.0f}% humidity {w.humidity_pct:.0f}% dew point {w.dew_point_c:.1f}C"
        for w in board.payload("weather")
    )
    odds_text = "\n".join(
        f"{q.franchise_id}: {q.decimal_odds:.2f}" for q in board.payload("odds")
    )
    request = build_prompt(
        "strategize",
        {
            "home_id": home.franchise_id,
            "away_id": away.franchise_id,
            "tournament": match.tournament,
            "season": match.season,
            "records": records_text,
            "ratings": _ratings_table(board),
            "weather": weather_text,
            "odds": odds_text,
            "pitch": board.payload("pitch").summary,
            "tips": "\n".join(tips) if tips else "(none)",
        },
        config, WORKER, config.worker_temperature,
    )
    payload = complete_structured(
        request, _strategy_descriptor(), gateway.worker,
        max_attempts=config.per_team_attempts,
        observer=lambda rq, rs: transcript.llm_exchange(STRATEGIZER, rq, rs),
    )
    brief = StrategyBrief(
        team_records=records,
        team_strengths={k: tuple(v) for k, v in payload["team_strengths"].items()},
        team_weaknesses={k: tuple(v) for k, v in payload["team_weaknesses"].items()},
        tips=tuple(tips),
        recommendations=tuple(payload["recommendations"]),
    )
    board.fill("strategy", brief, "records+tips+llm")
    return board


class _SelectorBudget:
    """Shared retry pool: per-team fixes and slate-level re-prompts all draw
    from the same ``n * per_team_attempts`` allowance."""

    def __init__(self, total: int):
        self.remaining = total

    def try_take(self) -> bool:
        if self.remaining <= 0:
            return False
        self.remaining -= 1
        return True


def _settle_team(
    raw: dict,
    board: Blackboard,
    rules: RulesSchema,
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
    budget: _SelectorBudget,
    attempts_used: int,
    context: Mapping[str, Any],
) -> tuple[FantasyTeam, int]:
    """Validate one raw team dict, re-prompting with violation codes until
    it passes or the per-team/shared budget runs out."""
    pool = board.pool
    xi = frozenset(_xi_ids(board.match_context))
    current = raw
    while True:
        problems = _raw_team_problems(current, "team")
        team: Optional[FantasyTeam] = None
        if not problems:
            team = FantasyTeam(
                current["players"], current["captain"], current["vice_captain"]
            )
            unknown = [pid for pid in team.players if pid not in pool]
            if unknown:
                problems = [f"UnknownPlayer: {pid}" for pid in sorted(unknown)]
            else:
                report = validate_team(team, pool, rules, playing_xi=xi)
                if report.ok:
                    return team, attempts_used
                problems = [str(v) for v in report.violations]
        if attempts_used >= config.per_team_attempts or not budget.try_take():
            raise CannotProduceValidSlateError(
                "team could not be made valid: " + "; ".join(problems)
            )
        attempts_used += 1
        request = build_prompt(
            "selector_fix",
            {
                "team_json": json.dumps(current, sort_keys=True),
                "violations": "; ".join(problems),
                **context,
            },
            config, WORKER, config.worker_temperature,
        )
        payload = complete_structured(
            request, _SINGLE_TEAM_DESCRIPTOR, gateway.worker, max_attempts=1,
            observer=lambda rq, rs: transcript.llm_exchange(SELECTOR, rq, rs),
        )
        current = payload


def _conditions_text(board: Blackboard) -> str:
    pitch: PitchReport = board.payload("pitch")
    weather = board.payload("weather")
    toss = board.match_context.toss
    parts = [f"pitch: {pitch.summary}"]
    parts.append(
        "weather innings 1/2: "
        + ", ".join(f"{w.temperature_c:.1f}C {w.humidity_pct:.0f}%RH" for w in weather)
    )
    if toss is not None:
        parts.append(f"toss: {toss.winner} chose to {toss.decision}")
    return " | ".join(parts)


def run_selector(
    board: Blackboard,
    rules: RulesSchema,
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
    n: int,
    budget: _SelectorBudget,
) -> Blackboard:
    """One selector stage per call: propose, then review+revise per
    iteration, finalizing (names and rationales) after the last review."""
    strategy: StrategyBrief = board.payload("strategy")
    match = board.match_context
    context = {
        "rules_text": describe_rules(rules),
        "players_table": _players_table(board),
    }
    observe_worker = lambda rq, rs: transcript.llm_exchange(SELECTOR, rq, rs)
    observe_reviewer = lambda rq, rs: transcript.llm_exchange(SELECTOR, rq, rs)

    def settle_slate(raw_teams: list[dict]) -> list[FantasyTeam]:
        settled = []
        for i, raw in enumerate(raw_teams):
            team, used = _settle_team(
                raw, board, rules, gateway, transcript, config, budget,
                attempts_used=board.team_fix_attempts.get(i, 0),
                context=context,
            )
            board.team_fix_attempts[i] = used
            settled.append(team)
        return settled

    if not board.filled("proposed_teams"):
        transcript.append("agent_step", agent=SELECTOR, detail=f"proposing {n} teams")
        advisory = board.rules_advisory
        request = build_prompt(
            "selector_propose",
            {
                "n": n,
                "home_id": match.home_franchise.franchise_id,
                "away_id": match.away_franchise.franchise_id,
                "recommendations": "\n".join(strategy.recommendations),
                "conditions": _conditions_text(board),
                "rules_advisory": advisory,
                **context,
            },
            config, WORKER, config.worker_temperature,
        )
        payload = complete_structured(
            request, _teams_descriptor(n), gateway.worker,
            max_attempts=1 + config.per_team_attempts,
            observer=observe_worker, retry_gate=budget.try_take,
        )
        teams = settle_slate(payload["teams"])
        board.fill("proposed_teams", teams, "selector proposal")
        if config.max_review_iters == 0:
            _finalize_slate(board, rules, gateway, transcript, config, n)
        return board

    if board.review_iterations < config.max_review_iters:
        iteration = board.review_iterations + 1
        transcript.append("agent_step", agent=SELECTOR, detail=f"review round {iteration}")
        slate = board.payload("proposed_teams")
        slate_json = json.dumps(
            [
                {
                    "players": list(t.sorted_players()),
                    "captain": t.captain,
                    "vice_captain": t.vice_captain,
                }
                for t in slate
            ],
            sort_keys=True,
        )
        review_request = build_prompt(
            "review",
            {
                "home_id": match.home_franchise.franchise_id,
                "away_id": match.away_franchise.franchise_id,
                "slate_json": slate_json,
                "ratings": _ratings_table(board),
                "recommendations": "\n".join(strategy.recommendations),
            },
            config, REVIEWER, config.reviewer_temperature,
        )
        feedback_payload = complete_structured(
            review_request, _FEEDBACK_DESCRIPTOR, gateway.reviewer,
            max_attempts=1 + config.per_team_attempts,
            observer=observe_reviewer, retry_gate=budget.try_take,
        )
        feedback = [str(item) for item in feedback_payload["feedback"]]
        all_feedback = list(board.payload("review_feedback")) if board.filled("review_feedback") else []
        all_feedback.append("\n".join(feedback))
        board.fill("review_feedback", all_feedback, f"review round {iteration}")

        revise_request = build_prompt(
            "revise",
            {
                "n": n,
                "slate_json": slate_json,
                "feedback": "\n".join(feedback),
                **context,
            },
            config, WORKER, config.worker_temperature,
        )
        revised_payload = complete_structured(
            revise_request, _teams_descriptor(n), gateway.worker,
            max_attempts=1 + config.per_team_attempts,
            observer=observe_worker, retry_gate=budget.try_take,
        )
        teams = settle_slate(revised_payload["teams"])
        board.fill("proposed_teams", teams, f"revised after round {iteration}")
        if board.review_iterations >= config.max_review_iters:
            _finalize_slate(board, rules, gateway, transcript, config, n)
        return board

    _finalize_slate(board, rules, gateway, transcript, config, n)
    return board


def _finalize_slate(
    board: Blackboard,
    rules: RulesSchema,
    gateway: LlmGateway,
    transcript: Transcript,
    config: PipelineConfig,
    n: int,
) -> None:
    strategy: StrategyBrief = board.payload("strategy")
    pool = board.pool
    xi = frozenset(_xi_ids(board.match_context))
    slate = board.payload("proposed_teams")
    transcript.append("agent_step", agent=SELECTOR, detail="finalizing slate")
    final = []
    for team in slate:
        report = validate_team(team, pool, rules, playing_xi=xi)
        if not report.ok:
            raise CannotProduceValidSlateError(
                "settled team failed final validation: "
                + "; ".join(report.codes())
            )
        team_json = json.dumps(
            {
                "players": list(team.sorted_players()),
                "captain": team.captain,
                "vice_captain": team.vice_captain,
            },
            sort_keys=True,
        )
        request = build_prompt(
            "name_team",
            {
                "team_json": team_json,
                "recommendations": "\n".join(strategy.recommendations),
            },
            config, WORKER, config.worker_temperature,
        )
        try:
            payload = complete_structured(
                request, _NAME_DESCRIPTOR, gateway.worker, max_attempts=1,
                observer=lambda rq, rs: transcript.llm_exchange(SELECTOR, rq, rs),
            )
        except MalformedAfterRetriesError as exc:
            raise PipelineError(f"naming call failed: {exc}") from exc
        final.append(team.with_details(payload["name"].strip(), payload["rationale"]))
    if len(final) != n:
        raise CannotProduceValidSlateError(f"expected {n} final teams, got {len(final)}")
    board.fill("final_teams", final, "named and validated")


def llm_call_budget(pool_size: int, n: int, max_review_iters: int,
                    per_team_attempts: int = 3) -> int:
    """Documented worst-case LLM call count for one run: research (2, odds
    extraction + pitch distillation), two rating calls per player, one
    strategy call, one proposal plus the shared fix pool, critique and
    revision per review round, and one naming call per team."""
    return (
        2
        + 2 * pool_size
        + 1
        + (1 + n * per_team_attempts)
        + 2 * max_review_iters
        + n
    )


def run_pipeline(
    match: MatchContext,
    n: int,
    *,
    pool: Mapping[str, Player],
    rules: RulesSchema,
    stats: HistoricalStatStore,
    gateway: LlmGateway,
    clients: DataClients,
    results: Sequence[MatchResult] = (),
    config: PipelineConfig = PipelineConfig(),
    evaluator: Optional[Callable[[tuple[FantasyTeam, ...]], Any]] = None,
) -> GenerationResult:
    """Supervisor-driven run producing ``n`` named, rule-valid teams.

    The stat store is re-guarded at the match start unconditionally, so no
    agent can observe rows from the match itself or later. ``evaluator``,
    when given, runs once the slate is final (post-match scoring hook).
    """
    from .datasources import apply_temporal_guard

    if not 1 <= n <= MAX_TEAMS:
        raise PipelineError(f"n must be in 1..{MAX_TEAMS}, got {n}")
    xi = match.pool_player_ids()
    if xi is None:
        raise PipelineError("match context must carry both playing XIs")
    missing = [pid for pid in xi if pid not in pool]
    if missing:
        raise UnknownPlayerError(f"XI players missing from pool: {missing}")
    guarded = apply_temporal_guard(stats, match.scheduled_start)

    board = Blackboard(match, {pid: pool[pid] for pid in xi})
    transcript = Transcript()
    budget = _SelectorBudget(n * config.per_team_attempts)

    try:
        rules_advisory = search_answer(
            f"fantasy contest rules {match.tournament}", clients.search
        ).answer
        transcript.append(
            "search", agent=SELECTOR,
            query=f"fantasy contest rules {match.tournament}", answer=rules_advisory,
        )
    except Fantasy11Error:
        rules_advisory = "(none)"
    board.rules_advisory = rules_advisory

    max_steps = 8 + config.max_review_iters + 2
    steps = 0
    try:
        while True:
            agent = route_next(board, config)
            if agent == DONE:
                break
            steps += 1
            if steps > max_steps:
                raise StuckStateError(f"routing exceeded {max_steps} steps")
            if agent == RESEARCHER:
                run_researcher(board, clients, gateway, transcript, config)
            elif agent == CAREER_PROFILER:
                run_career_profiler(board, guarded, gateway, transcript, config)
            elif agent == FORM_ASSESSOR:
                run_form_assessor(board, guarded, results, gateway, transcript, config)
            elif agent == STRATEGIZER:
                run_strategizer(board, guarded, results, clients, gateway, transcript, config)
            elif agent == SELECTOR:
                run_selector(board, rules, gateway, transcript, config, n, budget)
    except Fantasy11Error as exc:
        if not getattr(exc, "board_dump", None):
            exc.board_dump = board.to_dict()  # type: ignore[attr-defined]
            exc.transcript = transcript  # type: ignore[attr-defined]
        raise

    teams = tuple(board.payload("final_teams"))
    budget_limit = llm_call_budget(len(xi), n, config.max_review_iters, config.per_team_attempts)
    if transcript.llm_calls > budget_limit:
        raise PipelineError(
            f"llm call budget exceeded: {transcript.llm_calls} > {budget_limit}"
        )
    evaluation = evaluator(teams) if evaluator is not None else None
    if evaluation is not None:
        transcript.append("agent_step", agent="evaluator", detail="post-match scoring attached")
    return GenerationResult(
        teams=teams,
        transcript=transcript,
        blackboard=board,
        llm_calls=transcript.llm_calls,
        llm_budget=budget_limit,
        evaluation=evaluation,
    )
