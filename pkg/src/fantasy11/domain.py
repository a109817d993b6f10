"""Core vocabulary types: players, matches, performances, fantasy teams.

Everything here is an immutable value object, safe to share across threads.
Credits are 0.5-step decimals stored internally as integer half-credits so
no floating point ever enters budget arithmetic.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import DataLoadError, MalformedTeamError

TEAM_SIZE = 11


class PlayerRole(Enum):
    """Roster role; every player has exactly one."""

    WICKETKEEPER = "WK"
    BATTER = "BAT"
    ALL_ROUNDER = "AR"
    BOWLER = "BOWL"

    @classmethod
    def from_code(cls, code: str) -> "PlayerRole":
        try:
            return cls(code.strip().upper())
        except ValueError:
            raise DataLoadError(f"unknown role code {code!r}") from None


class BattingHand(Enum):
    LEFT = "left"
    RIGHT = "right"
    UNKNOWN = "unknown"


class DismissalKind(Enum):
    BOWLED = "bowled"
    LBW = "lbw"
    CAUGHT = "caught"
    STUMPED = "stumped"
    RUN_OUT = "run_out"
    HIT_WICKET = "hit_wicket"
    OTHER = "other"


def parse_half_steps(text: str, what: str = "credit") -> int:
    """Parse a 0.5-granular decimal like ``9.5`` into integer half-units."""
    value = text.strip()
    try:
        whole, _, frac = value.partition(".")
        half = int(whole) * 2
        if frac:
            if frac not in ("0", "5", "00", "50"):
                raise ValueError
            half += 1 if frac.startswith("5") else 0
    except ValueError:
        raise DataLoadError(f"{what} {value!r} is not a 0.5-step decimal") from None
    return half


def half_steps_to_str(half: int) -> str:
    return f"{half // 2}.5" if half % 2 else str(half // 2)


@dataclass(frozen=True, slots=True)
class Player:
    """One squad member; ``player_id`` is opaque and is the only identity used
    on reasoning paths (display names never feed selection logic)."""

    player_id: str
    name: str
    role: PlayerRole
    franchise_id: str
    credit_half: int
    batting_hand: BattingHand = BattingHand.UNKNOWN
    bowling_style: Optional[str] = None
    description: Optional[str] = None

    def __post_init__(self):
        if not self.player_id:
            raise DataLoadError("player_id must be non-empty")
        if self.credit_half <= 0:
            raise DataLoadError(f"player {self.player_id}: credit must be > 0")

    @property
    def credit(self) -> float:
        return self.credit_half / 2


@dataclass(frozen=True, slots=True)
class Franchise:
    franchise_id: str
    name: str
    short_code: str

    def __post_init__(self):
        if not self.short_code:
            raise DataLoadError("franchise short_code must be non-empty")


@dataclass(frozen=True, slots=True)
class Venue:
    name: str
    city: str
    latitude: float
    longitude: float


@dataclass(frozen=True, slots=True)
class Toss:
    winner: str
    decision: str  # "bat" | "bowl"


@dataclass(frozen=True, slots=True)
class MatchContext:
    """Everything known about a fixture before the first ball."""

    match_id: str
    season: int
    tournament: str
    home_franchise: Franchise
    away_franchise: Franchise
    venue: Venue
    scheduled_start: datetime
    innings_windows: tuple[tuple[datetime, datetime], tuple[datetime, datetime]]
    toss: Optional[Toss] = None
    playing_xi: Optional[Mapping[str, tuple[str, ...]]] = None

    def __post_init__(self):
        if self.home_franchise.franchise_id == self.away_franchise.franchise_id:
            raise DataLoadError("home and away franchises must differ")
        (a0, a1), (b0, b1) = self.innings_windows
        if not (a0 < a1 <= b0 < b1):
            raise DataLoadError("innings windows must be ordered and non-overlapping")
        if self.playing_xi is not None:
            for fid, ids in self.playing_xi.items():
                if len(set(ids)) != TEAM_SIZE:
                    raise DataLoadError(
                        f"playing XI for {fid} must list exactly {TEAM_SIZE} distinct players"
                    )

    @property
    def franchises(self) -> tuple[Franchise, Franchise]:
        return (self.home_franchise, self.away_franchise)

    def pool_player_ids(self) -> Optional[tuple[str, ...]]:
        if self.playing_xi is None:
            return None
        ids: list[str] = []
        for fid in (self.home_franchise.franchise_id, self.away_franchise.franchise_id):
            ids.extend(self.playing_xi.get(fid, ()))
        return tuple(ids)


@dataclass(frozen=True, slots=True)
class BattingLine:
    runs: int = 0
    balls_faced: int = 0
    fours: int = 0
    sixes: int = 0
    dismissed: bool = False
    dismissal_kind: Optional[DismissalKind] = None


@dataclass(frozen=True, slots=True)
class BowlingLine:
    legal_balls: int = 0
    maidens: int = 0
    runs_conceded: int = 0
    wickets: int = 0
    bowled_or_lbw_count: int = 0


@dataclass(frozen=True, slots=True)
class FieldingLine:
    catches: int = 0
    stumpings: int = 0
    runouts_direct: int = 0
    runouts_indirect: int = 0


@dataclass(frozen=True, slots=True)
class PlayerMatchPerformance:
    """Raw per-match stat line; the only input the scoring engine consumes."""

    player_id: str
    played: bool = True
    batting: BattingLine = field(default_factory=BattingLine)
    bowling: BowlingLine = field(default_factory=BowlingLine)
    fielding: FieldingLine = field(default_factory=FieldingLine)


def did_not_play(player_id: str) -> PlayerMatchPerformance:
    """Zero stat line for a player outside the XI (scores 0 by contract)."""
    return PlayerMatchPerformance(player_id=player_id, played=False)


@dataclass(frozen=True, slots=True)
class Violation:
    """Machine-readable invariant breach; ``code`` values are stable strings."""

    code: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}" if self.detail else self.code


def validate_performance(perf: PlayerMatchPerformance) -> list[Violation]:
    """Return every violated stat-line invariant; empty list means clean."""
    out: list[Violation] = []
    b, bw, f = perf.batting, perf.bowling, perf.fielding
    counts = {
        "runs": b.runs,
        "balls_faced": b.balls_faced,
        "fours": b.fours,
        "sixes": b.sixes,
        "legal_balls": bw.legal_balls,
        "maidens": bw.maidens,
        "runs_conceded": bw.runs_conceded,
        "wickets": bw.wickets,
        "bowled_or_lbw_count": bw.bowled_or_lbw_count,
        "catches": f.catches,
        "stumpings": f.stumpings,
        "runouts_direct": f.runouts_direct,
        "runouts_indirect": f.runouts_indirect,
    }
    for name, value in counts.items():
        if value < 0:
            out.append(Violation("NegativeCount", f"{name}={value}"))
    if 4 * b.fours + 6 * b.sixes > b.runs:
        out.append(
            Violation(
                "BoundaryRunsExceedTotal",
                f"4*{b.fours} + 6*{b.sixes} > {b.runs}",
            )
        )
    if bw.bowled_or_lbw_count > bw.wickets:
        out.append(
            Violation(
                "DismissalKindExceedsWickets",
                f"bowled_or_lbw={bw.bowled_or_lbw_count} > wickets={bw.wickets}",
            )
        )
    if bw.maidens > bw.legal_balls // 6:
        out.append(
            Violation(
                "MaidensExceedOvers",
                f"maidens={bw.maidens} > floor({bw.legal_balls}/6)",
            )
        )
    if b.dismissal_kind is not None and not b.dismissed:
        out.append(Violation("DismissalKindWithoutDismissal", b.dismissal_kind.value))
    return out


@dataclass(frozen=True)
class FantasyTeam:
    """11 players with a captain and vice-captain.

    Construction is permissive about the player count so that the rules
    engine can report CountViolation on, say, a 10-player entry; use
    :meth:`structural_violations` or :func:`canonical_signature` when the
    strict invariants must hold.
    """

    players: frozenset[str]
    captain: str
    vice_captain: str
    name: Optional[str] = None
    rationale: Optional[str] = None

    def __init__(
        self,
        players: Iterable[str],
        captain: str,
        vice_captain: str,
        name: Optional[str] = None,
        rationale: Optional[str] = None,
    ):
        members = players if type(players) is frozenset else frozenset(players)
        # frozen dataclass: populate the instance dict directly
        self.__dict__.update(
            players=members,
            captain=captain,
            vice_captain=vice_captain,
            name=name,
            rationale=rationale,
        )
        if not captain or not vice_captain or not all(members):
            raise MalformedTeamError("player ids must be non-empty strings")

    def structural_violations(self) -> list[Violation]:
        out: list[Violation] = []
        if len(self.players) != TEAM_SIZE:
            out.append(
                Violation("CountViolation", f"{len(self.players)} players, need {TEAM_SIZE}")
            )
        if self.captain not in self.players:
            out.append(Violation("CaptainOutsideTeam", self.captain))
        if self.vice_captain not in self.players:
            out.append(Violation("ViceCaptainOutsideTeam", self.vice_captain))
        if self.captain == self.vice_captain:
            out.append(Violation("CaptainViceCaptainSame", self.captain))
        return out

    def sorted_players(self) -> tuple[str, ...]:
        return tuple(sorted(self.players))

    def with_details(self, name: Optional[str], rationale: Optional[str]) -> "FantasyTeam":
        return FantasyTeam(self.players, self.captain, self.vice_captain, name, rationale)


def canonical_signature(team: FantasyTeam) -> bytes:
    """32-byte identity of (membership, captain, vice-captain).

    The signature is the SHA-256 digest of ``captain|vice|p1;...;p11`` with
    players sorted, so it is independent of listing order and has fixed
    length regardless of id width. Captain and vice-captain are part of the
    identity: same 11 with different C or VC hash differently.
    """
    problems = team.structural_violations()
    if problems:
        raise MalformedTeamError("; ".join(str(p) for p in problems))
    encoded = "|".join((team.captain, team.vice_captain, ";".join(sorted(team.players))))
    return hashlib.sha256(encoded.encode("utf-8")).digest()


PLAYERS_HEADER = ["player_id", "name", "role", "franchise", "credit", "hand", "style"]
PERFORMANCE_HEADER = [
    "match_id", "player_id", "runs", "balls", "fours", "sixes", "dismissed",
    "dismissal_kind", "legal_balls", "maidens", "runs_conceded", "wickets",
    "bowled_lbw", "catches", "stumpings", "ro_direct", "ro_indirect",
]


def _check_header(actual: Optional[list[str]], expected: list[str], path: object) -> None:
    if actual is None or [c.strip() for c in actual[: len(expected)]] != expected:
        raise DataLoadError(f"{path}: expected header {','.join(expected)}")


def load_players(path: str | Path) -> dict[str, Player]:
    """Read the players CSV into an id-keyed pool."""
    pool: dict[str, Player] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), PLAYERS_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) < 5:
                raise DataLoadError(f"{path}:{lineno}: expected at least 5 fields")
            pid, name, role, franchise, credit = (cell.strip() for cell in row[:5])
            hand = row[5].strip().lower() if len(row) > 5 and row[5].strip() else "unknown"
            style = row[6].strip() if len(row) > 6 and row[6].strip() else None
            if pid in pool:
                raise DataLoadError(f"{path}:{lineno}: duplicate player_id {pid!r}")
            try:
                batting_hand = BattingHand(hand)
            except ValueError:
                raise DataLoadError(f"{path}:{lineno}: unknown hand {hand!r}") from None
            pool[pid] = Player(
                player_id=pid,
                name=name,
                role=PlayerRole.from_code(role),
                franchise_id=franchise,
                credit_half=parse_half_steps(credit, "credit"),
                batting_hand=batting_hand,
                bowling_style=style,
            )
    return pool


def _parse_bool(cell: str, where: str) -> bool:
    v = cell.strip().lower()
    if v in ("1", "true", "yes", "y"):
        return True
    if v in ("0", "false", "no", "n", ""):
        return False
    raise DataLoadError(f"{where}: bad boolean {cell!r}")


def parse_performance_row(row: list[str], where: str = "<row>") -> tuple[str, PlayerMatchPerformance]:
    """Parse one performance CSV row into (match_id, performance)."""
    if len(row) < len(PERFORMANCE_HEADER):
        raise DataLoadError(f"{where}: expected {len(PERFORMANCE_HEADER)} fields, got {len(row)}")
    text = [cell.strip() for cell in row]
    try:
        ints = [int(text[i]) for i in (2, 3, 4, 5, 8, 9, 10, 11, 12, 13, 14, 15, 16)]
    except ValueError as exc:
        raise DataLoadError(f"{where}: non-integer count ({exc})") from None
    runs, balls, fours, sixes, legal, maidens, conceded, wkts, blbw, catches, stumps, rod, roi = ints
    kind = None
    if text[7]:
        try:
            kind = DismissalKind(text[7].lower())
        except ValueError:
            raise DataLoadError(f"{where}: unknown dismissal kind {text[7]!r}") from None
    perf = PlayerMatchPerformance(
        player_id=text[1],
        played=True,
        batting=BattingLine(runs, balls, fours, sixes, _parse_bool(text[6], where), kind),
        bowling=BowlingLine(legal, maidens, conceded, wkts, blbw),
        fielding=FieldingLine(catches, stumps, rod, roi),
    )
    return text[0], perf


def load_performances(path: str | Path) -> dict[str, PlayerMatchPerformance]:
    """Read a single match's performance CSV keyed by player id."""
    out: dict[str, PlayerMatchPerformance] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), PERFORMANCE_HEADER, path)
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            _, perf = parse_performance_row(row, f"{path}:{lineno}")
            if perf.player_id in out:
                raise DataLoadError(f"{path}:{lineno}: duplicate player {perf.player_id!r}")
            out[perf.player_id] = perf
    return out


def parse_utc(text: str) -> datetime:
    """ISO-8601 to aware UTC datetime (accepts trailing Z)."""
    stamp = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


@dataclass(frozen=True, slots=True)
class SeasonAggregate:
    """Deterministic per-season totals behind a career profile."""

    season: int
    matches: int
    runs: int
    balls_faced: int
    strike_rate: float
    wickets: int
    legal_balls: int
    economy: float
    catches: int


@dataclass(frozen=True, slots=True)
class CareerProfile:
    player_id: str
    per_season: tuple[SeasonAggregate, ...]
    strengths: tuple[str, ...]
    weaknesses: tuple[str, ...]
    career_rating: int
    description: str = ""

    def __post_init__(self):
        if not 1 <= self.career_rating <= 10:
            raise DataLoadError(f"career_rating {self.career_rating} outside 1..10")


@dataclass(frozen=True, slots=True)
class SplitAggregate:
    matches: int
    runs: int
    balls_faced: int
    strike_rate: float
    wickets: int
    legal_balls: int
    economy: float


@dataclass(frozen=True, slots=True)
class FormAssessment:
    player_id: str
    window_size: int
    splits: Mapping[str, SplitAggregate]
    form_rating: int
    notes: str = ""

    def __post_init__(self):
        if self.window_size < 1:
            raise DataLoadError("form window must cover at least one match")
        if not 1 <= self.form_rating <= 10:
            raise DataLoadError(f"form_rating {self.form_rating} outside 1..10")


@dataclass(frozen=True, slots=True)
class ContestEntry:
    entry_id: str
    team: FantasyTeam
    points: Optional[float] = None


DEFAULT_INNINGS_MINUTES = ((0, 100), (115, 215))


def default_innings_windows(
    start: datetime,
) -> tuple[tuple[datetime, datetime], tuple[datetime, datetime]]:
    """T20 innings estimate: first innings plus a break, then the second."""
    from datetime import timedelta

    (a0, a1), (b0, b1) = DEFAULT_INNINGS_MINUTES
    return (
        (start + timedelta(minutes=a0), start + timedelta(minutes=a1)),
        (start + timedelta(minutes=b0), start + timedelta(minutes=b1)),
    )


def match_context_from_dict(doc: dict) -> MatchContext:
    """Build a MatchContext from its JSON document form."""
    try:
        home = Franchise(**doc["home_franchise"])
        away = Franchise(**doc["away_franchise"])
        venue = Venue(**doc["venue"])
        start = parse_utc(doc["scheduled_start"])
        raw_windows = doc.get("innings_windows")
        if raw_windows:
            windows = tuple(
                (parse_utc(w[0]), parse_utc(w[1])) for w in raw_windows
            )
        else:
            windows = default_innings_windows(start)
        toss = Toss(**doc["toss"]) if doc.get("toss") else None
        xi = doc.get("playing_xi")
        playing_xi = (
            {fid: tuple(ids) for fid, ids in xi.items()} if xi else None
        )
        return MatchContext(
            match_id=str(doc["match_id"]),
            season=int(doc["season"]),
            tournament=str(doc["tournament"]),
            home_franchise=home,
            away_franchise=away,
            venue=venue,
            scheduled_start=start,
            innings_windows=windows,  # type: ignore[arg-type]
            toss=toss,
            playing_xi=playing_xi,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataLoadError(f"bad match document: {exc!r}") from None


def load_match_context(path: str | Path) -> MatchContext:
    return match_context_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def team_to_dict(team: FantasyTeam) -> dict:
    out: dict = {
        "players": list(team.sorted_players()),
        "captain": team.captain,
        "vice_captain": team.vice_captain,
    }
    if team.name is not None:
        out["name"] = team.name
    if team.rationale is not None:
        out["rationale"] = team.rationale
    return out


def team_from_dict(doc: dict) -> FantasyTeam:
    try:
        return FantasyTeam(
            doc["players"],
            doc["captain"],
            doc["vice_captain"],
            name=doc.get("name"),
            rationale=doc.get("rationale"),
        )
    except (KeyError, TypeError) as exc:
        raise DataLoadError(f"bad team document: {exc!r}") from None


def save_teams(teams: Iterable[FantasyTeam], path: str | Path) -> None:
    doc = {"teams": [team_to_dict(t) for t in teams]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_teams(path: str | Path) -> list[FantasyTeam]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "teams" not in doc:
        raise DataLoadError(f"{path}: expected an object with a 'teams' list")
    return [team_from_dict(item) for item in doc["teams"]]
