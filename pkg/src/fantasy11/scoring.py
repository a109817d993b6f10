"""Fantasy-points computation under a configurable scoring schema.

All arithmetic is exact: point values parse into ``fractions.Fraction`` and
no float ever enters a score. Milestone and haul bonuses award the highest
crossed threshold only (never cumulative). Rate bands are half-open
``[low, high)`` intervals with ``null`` meaning unbounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .domain import FantasyTeam, PlayerMatchPerformance, PlayerRole, validate_performance
from .errors import ConfigError, Fantasy11Error, MalformedTeamError, MissingPerformanceError

Points = Fraction

ALL_ROLES = frozenset(PlayerRole)


@dataclass(frozen=True, slots=True)
class ThresholdBonus:
    threshold: int
    points: Points


@dataclass(frozen=True, slots=True)
class DuckPenalty:
    points: Points
    applies_to_roles: frozenset[PlayerRole]


@dataclass(frozen=True, slots=True)
class CatchHaulBonus:
    threshold: int
    points: Points


@dataclass(frozen=True, slots=True)
class RateBand:
    """Points for a rate (economy or strike rate) inside [low, high)."""

    min_volume: int
    low: Optional[Fraction]
    high: Optional[Fraction]
    points: Points
    applies_to_roles: frozenset[PlayerRole] = ALL_ROLES

    def contains(self, rate: Fraction) -> bool:
        if self.low is not None and rate < self.low:
            return False
        if self.high is not None and rate >= self.high:
            return False
        return True

    def overlaps(self, other: "RateBand") -> bool:
        lo_a = self.low if self.low is not None else Fraction(-(10**9))
        hi_a = self.high if self.high is not None else Fraction(10**9)
        lo_b = other.low if other.low is not None else Fraction(-(10**9))
        hi_b = other.high if other.high is not None else Fraction(10**9)
        return lo_a < hi_b and lo_b < hi_a


@dataclass(frozen=True, slots=True)
class ScoringSchema:
    per_run: Points
    four_bonus: Points
    six_bonus: Points
    milestone_bonuses: tuple[ThresholdBonus, ...]
    duck_penalty: DuckPenalty
    per_wicket: Points
    bowled_lbw_bonus: Points
    haul_bonuses: tuple[ThresholdBonus, ...]
    per_maiden: Points
    per_catch: Points
    catch_haul_bonus: CatchHaulBonus
    per_stumping: Points
    runout_direct: Points
    runout_indirect: Points
    playing_xi_points: Points
    economy_bands: tuple[RateBand, ...]
    strike_rate_bands: tuple[RateBand, ...]
    captain_multiplier: Fraction
    vice_captain_multiplier: Fraction


@dataclass(frozen=True, slots=True)
class TeamScore:
    """Team total with the per-player bases it decomposes into."""

    total: Points
    per_player: Mapping[str, Points]
    captain_bonus: Points
    vice_captain_bonus: Points


def _frac(value: object, where: str) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise ConfigError(f"{where}: expected a number, got {value!r}")


def _roles(raw: object, where: str) -> frozenset[PlayerRole]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: applies_to_roles must be a non-empty list")
    return frozenset(PlayerRole(code) for code in raw)


def _thresholds(raw: object, key: str, where: str) -> tuple[ThresholdBonus, ...]:
    if not isinstance(raw, list):
        raise ConfigError(f"{where}: expected a list")
    out = []
    prev = None
    for item in raw:
        t = int(item[key])
        if prev is not None and t <= prev:
            raise ConfigError(f"DecreasingThresholds: {where} at {t}")
        prev = t
        out.append(ThresholdBonus(t, _frac(item["points"], where)))
    return tuple(out)


def _bands(raw: object, range_key: str, volume_key: str, where: str) -> tuple[RateBand, ...]:
    if not isinstance(raw, list):
        raise ConfigError(f"{where}: expected a list")
    out: list[RateBand] = []
    for item in raw:
        low_raw, high_raw = item[range_key]
        low = None if low_raw is None else _frac(low_raw, where)
        high = None if high_raw is None else _frac(high_raw, where)
        if low is not None and high is not None and low >= high:
            raise ConfigError(f"InconsistentBounds: {where} range [{low}, {high})")
        roles = _roles(item["applies_to_roles"], where) if "applies_to_roles" in item else ALL_ROLES
        out.append(RateBand(int(item[volume_key]), low, high, _frac(item["points"], where), roles))
    for i, a in enumerate(out):
        for b in out[i + 1 :]:
            if a.overlaps(b):
                raise ConfigError(f"OverlappingBands: {where}")
    return tuple(out)


REQUIRED_SCORING_FIELDS = (
    "per_run", "four_bonus", "six_bonus", "milestone_bonuses", "duck_penalty",
    "per_wicket", "bowled_lbw_bonus", "haul_bonuses", "per_maiden", "per_catch",
    "catch_haul_bonus", "per_stumping", "runout_direct", "runout_indirect",
    "playing_xi_points", "economy_bands", "strike_rate_bands",
    "captain_multiplier", "vice_captain_multiplier",
)


def parse_scoring_schema(config_text: str) -> ScoringSchema:
    """Parse a JSON scoring document into an exact-arithmetic schema."""
    try:
        doc = json.loads(config_text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scoring config is not valid JSON: {exc}") from None
    for key in REQUIRED_SCORING_FIELDS:
        if key not in doc:
            raise ConfigError(f"MissingField: {key}")
    try:
        return _build_schema(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"MissingField: malformed scoring entry ({exc!r})") from None


def _build_schema(doc: dict) -> ScoringSchema:
    c_mult = _frac(doc["captain_multiplier"], "captain_multiplier")
    vc_mult = _frac(doc["vice_captain_multiplier"], "vice_captain_multiplier")
    if not c_mult >= vc_mult >= 1:
        raise ConfigError(
            f"MultiplierOrder: need captain >= vice >= 1, got {c_mult} / {vc_mult}"
        )
    duck = doc["duck_penalty"]
    catch_haul = doc["catch_haul_bonus"]
    return ScoringSchema(
        per_run=_frac(doc["per_run"], "per_run"),
        four_bonus=_frac(doc["four_bonus"], "four_bonus"),
        six_bonus=_frac(doc["six_bonus"], "six_bonus"),
        milestone_bonuses=_thresholds(doc["milestone_bonuses"], "runs_threshold", "milestone_bonuses"),
        duck_penalty=DuckPenalty(
            _frac(duck["points"], "duck_penalty"),
            _roles(duck["applies_to_roles"], "duck_penalty"),
        ),
        per_wicket=_frac(doc["per_wicket"], "per_wicket"),
        bowled_lbw_bonus=_frac(doc["bowled_lbw_bonus"], "bowled_lbw_bonus"),
        haul_bonuses=_thresholds(doc["haul_bonuses"], "wickets_threshold", "haul_bonuses"),
        per_maiden=_frac(doc["per_maiden"], "per_maiden"),
        per_catch=_frac(doc["per_catch"], "per_catch"),
        catch_haul_bonus=CatchHaulBonus(
            int(catch_haul["threshold"]), _frac(catch_haul["points"], "catch_haul_bonus")
        ),
        per_stumping=_frac(doc["per_stumping"], "per_stumping"),
        runout_direct=_frac(doc["runout_direct"], "runout_direct"),
        runout_indirect=_frac(doc["runout_indirect"], "runout_indirect"),
        playing_xi_points=_frac(doc["playing_xi_points"], "playing_xi_points"),
        economy_bands=_bands(doc["economy_bands"], "economy_range", "min_legal_balls", "economy_bands"),
        strike_rate_bands=_bands(doc["strike_rate_bands"], "sr_range", "min_balls_faced", "strike_rate_bands"),
        captain_multiplier=c_mult,
        vice_captain_multiplier=vc_mult,
    )


def load_scoring_schema(path: str | Path) -> ScoringSchema:
    return parse_scoring_schema(Path(path).read_text(encoding="utf-8"))


def default_scoring_schema() -> ScoringSchema:
    return load_scoring_schema(Path(__file__).parent / "config" / "default_scoring.json")


def _highest_crossed(bonuses: Sequence[ThresholdBonus], value: int) -> Points:
    won = Fraction(0)
    for bonus in bonuses:
        if value >= bonus.threshold:
            won = bonus.points
    return won


def score_player(
    perf: PlayerMatchPerformance, role: PlayerRole, schema: ScoringSchema
) -> Points:
    """Base (multiplier-free) points for one stat line."""
    problems = validate_performance(perf)
    if problems:
        raise Fantasy11Error(
            f"performance for {perf.player_id} is invalid: "
            + "; ".join(str(p) for p in problems)
        )
    if not perf.played:
        return Fraction(0)
    b, bw, f = perf.batting, perf.bowling, perf.fielding
    total = schema.playing_xi_points
    total += b.runs * schema.per_run
    total += b.fours * schema.four_bonus
    total += b.sixes * schema.six_bonus
    total += _highest_crossed(schema.milestone_bonuses, b.runs)
    if b.dismissed and b.runs == 0 and role in schema.duck_penalty.applies_to_roles:
        total += schema.duck_penalty.points
    total += bw.wickets * schema.per_wicket
    total += bw.bowled_or_lbw_count * schema.bowled_lbw_bonus
    total += _highest_crossed(schema.haul_bonuses, bw.wickets)
    total += bw.maidens * schema.per_maiden
    total += f.catches * schema.per_catch
    if f.catches >= schema.catch_haul_bonus.threshold:
        total += schema.catch_haul_bonus.points
    total += f.stumpings * schema.per_stumping
    total += f.runouts_direct * schema.runout_direct
    total += f.runouts_indirect * schema.runout_indirect
    if bw.legal_balls > 0:
        economy = Fraction(6 * bw.runs_conceded, bw.legal_balls)
        for band in schema.economy_bands:
            if bw.legal_balls >= band.min_volume and band.contains(economy):
                total += band.points
                break
    if b.balls_faced > 0:
        strike_rate = Fraction(100 * b.runs, b.balls_faced)
        for band in schema.strike_rate_bands:
            if (
                b.balls_faced >= band.min_volume
                and role in band.applies_to_roles
                and band.contains(strike_rate)
            ):
                total += band.points
                break
    return total


def score_team(
    team: FantasyTeam,
    perfs: Mapping[str, PlayerMatchPerformance],
    roles: Mapping[str, PlayerRole],
    schema: ScoringSchema,
) -> TeamScore:
    """Score a team: sum of bases plus captain and vice-captain bonuses."""
    problems = team.structural_violations()
    if problems:
        raise MalformedTeamError("; ".join(str(p) for p in problems))
    per_player: dict[str, Points] = {}
    for pid in team.sorted_players():
        if pid not in perfs:
            raise MissingPerformanceError(pid)
        per_player[pid] = score_player(perfs[pid], roles[pid], schema)
    captain_bonus = (schema.captain_multiplier - 1) * per_player[team.captain]
    vice_bonus = (schema.vice_captain_multiplier - 1) * per_player[team.vice_captain]
    total = sum(per_player.values(), Fraction(0)) + captain_bonus + vice_bonus
    return TeamScore(
        total=total,
        per_player=per_player,
        captain_bonus=captain_bonus,
        vice_captain_bonus=vice_bonus,
    )


def optimal_captains(bases: Mapping[str, Points]) -> tuple[str, str]:
    """Captain = highest base, vice = second highest; ties break on id.

    For any multipliers with captain >= vice >= 1 this assignment maximizes
    the team total for a fixed membership.
    """
    if len(bases) < 2:
        raise Fantasy11Error("need at least two players to pick C and VC")
    ranked = sorted(bases, key=lambda pid: (-bases[pid], pid))
    return ranked[0], ranked[1]
