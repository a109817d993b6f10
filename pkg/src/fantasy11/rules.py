"""Lineup-legality checking against a configurable constraint schema.

All checks are pure functions over immutable inputs. Violations carry
stable string codes so downstream re-prompt loops can consume them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .domain import FantasyTeam, Player, PlayerRole, Violation, parse_half_steps
from .errors import ConfigError, InfeasibleError, MalformedTeamError, UnknownPlayerError

ROLE_ORDER = (
    PlayerRole.WICKETKEEPER,
    PlayerRole.BATTER,
    PlayerRole.ALL_ROUNDER,
    PlayerRole.BOWLER,
)


class PoolRestriction(Enum):
    PLAYING_XI_ONLY = "PlayingXIOnly"
    FULL_SQUAD = "FullSquad"


@dataclass(frozen=True, slots=True)
class RoleBound:
    min: int
    max: int


@dataclass(frozen=True, slots=True)
class RulesSchema:
    total_players: int
    role_bounds: Mapping[PlayerRole, RoleBound]
    max_per_franchise: int
    credit_budget_half: int
    pool_restriction: PoolRestriction = PoolRestriction.PLAYING_XI_ONLY

    @property
    def credit_budget(self) -> float:
        return self.credit_budget_half / 2


@dataclass(frozen=True, slots=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)


def parse_rules(config_text: str) -> RulesSchema:
    """Parse a JSON rules document; raises ConfigError on any inconsistency."""
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"rules config is not valid JSON: {exc}") from None
    for key in ("total_players", "role_bounds", "max_per_franchise", "credit_budget"):
        if key not in doc:
            raise ConfigError(f"MissingField: {key}")
    bounds: dict[PlayerRole, RoleBound] = {}
    for role in ROLE_ORDER:
        raw = doc["role_bounds"].get(role.value)
        if raw is None:
            raise ConfigError(f"MissingField: role_bounds.{role.value}")
        lo, hi = int(raw["min"]), int(raw["max"])
        if lo < 0 or lo > hi:
            raise ConfigError(f"InconsistentBounds: {role.value} min={lo} max={hi}")
        bounds[role] = RoleBound(lo, hi)
    total = int(doc["total_players"])
    if not sum(b.min for b in bounds.values()) <= total <= sum(b.max for b in bounds.values()):
        raise ConfigError("InconsistentBounds: role bounds cannot sum to total_players")
    max_per_franchise = int(doc["max_per_franchise"])
    if not 0 < max_per_franchise < total:
        raise ConfigError("InconsistentBounds: max_per_franchise must be in (0, total_players)")
    budget = parse_half_steps(str(doc["credit_budget"]), "credit_budget")
    if budget <= 0:
        raise ConfigError("InconsistentBounds: credit_budget must be > 0")
    restriction = PoolRestriction(doc.get("pool_restriction", "PlayingXIOnly"))
    return RulesSchema(
        total_players=total,
        role_bounds=bounds,
        max_per_franchise=max_per_franchise,
        credit_budget_half=budget,
        pool_restriction=restriction,
    )


def load_rules(path: str | Path) -> RulesSchema:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


def default_rules() -> RulesSchema:
    return load_rules(Path(__file__).parent / "config" / "default_rules.json")


ROLE_LABELS = {
    PlayerRole.WICKETKEEPER: "wicketkeepers",
    PlayerRole.BATTER: "batters",
    PlayerRole.ALL_ROUNDER: "all-rounders",
    PlayerRole.BOWLER: "bowlers",
}


def describe_rules(rules: RulesSchema) -> str:
    """Deterministic plain-text rendering used in prompts and reports."""
    lines = [f"- exactly {rules.total_players} players per team"]
    for role in ROLE_ORDER:
        bound = rules.role_bounds[role]
        lines.append(f"- {ROLE_LABELS[role]} ({role.value}): between {bound.min} and {bound.max}")
    lines.append(f"- at most {rules.max_per_franchise} players from any one franchise")
    budget = rules.credit_budget_half
    budget_text = f"{budget // 2}.5" if budget % 2 else str(budget // 2)
    lines.append(f"- total credits at most {budget_text}")
    pool_text = (
        "only players in the playing XI"
        if rules.pool_restriction is PoolRestriction.PLAYING_XI_ONLY
        else "any squad player"
    )
    lines.append(f"- selectable pool: {pool_text}")
    return "\n".join(lines)


def validate_team(
    team: FantasyTeam,
    pool: Mapping[str, Player],
    rules: RulesSchema,
    playing_xi: Optional[frozenset[str] | set[str]] = None,
) -> ValidationReport:
    """Check a team against every constraint; reports all violations, not
    just the first. Raises UnknownPlayerError if a member is not in ``pool``.

    ``playing_xi`` narrows the allowed pool when the schema restricts
    selection to fielded players; leave it None to skip that check.
    """
    players = team.players
    violations: list[Violation] = []
    if len(players) != rules.total_players:
        violations.append(
            Violation("CountViolation", f"{len(players)} players, need {rules.total_players}")
        )
    if team.captain not in players:
        violations.append(Violation("CaptainOutsideTeam", team.captain))
    if team.vice_captain not in players:
        violations.append(Violation("ViceCaptainOutsideTeam", team.vice_captain))
    if team.captain == team.vice_captain:
        violations.append(Violation("CaptainViceCaptainSame", team.captain))

    role_counts: dict[PlayerRole, int] = {}
    franchise_counts: dict[str, int] = {}
    credit_half = 0
    pool_get = pool.get
    for pid in players:
        player = pool_get(pid)
        if player is None:
            raise UnknownPlayerError(f"player {pid!r} not in pool")
        role_counts[player.role] = role_counts.get(player.role, 0) + 1
        franchise_counts[player.franchise_id] = franchise_counts.get(player.franchise_id, 0) + 1
        credit_half += player.credit_half
    for role in ROLE_ORDER:
        bound = rules.role_bounds[role]
        n = role_counts.get(role, 0)
        if n < bound.min:
            violations.append(
                Violation("RoleCountBelowMin", f"{role.value}: {n} < {bound.min}")
            )
        elif n > bound.max:
            violations.append(
                Violation("RoleCountAboveMax", f"{role.value}: {n} > {bound.max}")
            )
    for fid in sorted(franchise_counts):
        if franchise_counts[fid] > rules.max_per_franchise:
            violations.append(
                Violation(
                    "FranchiseQuotaViolation",
                    f"{fid}: {franchise_counts[fid]} > {rules.max_per_franchise}",
                )
            )
    if credit_half > rules.credit_budget_half:
        violations.append(
            Violation(
                "CreditBudgetExceeded",
                f"{credit_half / 2} > {rules.credit_budget_half / 2}",
            )
        )
    if playing_xi is not None and rules.pool_restriction is PoolRestriction.PLAYING_XI_ONLY:
        for pid in sorted(team.players):
            if pid not in playing_xi:
                violations.append(Violation("PoolRestrictionViolation", pid))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _assign_captains(
    members: frozenset[str],
    prior: FantasyTeam,
    preference: Mapping[str, float],
) -> tuple[str, str]:
    """Keep the prior C/VC when they survived the swap; otherwise refill by
    preference weight (desc), ties by player id."""
    ranked = sorted(members, key=lambda pid: (-preference.get(pid, 0.0), pid))
    captain = prior.captain if prior.captain in members else ranked[0]
    if prior.vice_captain in members and prior.vice_captain != captain:
        vice = prior.vice_captain
    else:
        vice = next(pid for pid in ranked if pid != captain)
    return captain, vice


def repair_team(
    candidate: FantasyTeam,
    rules: RulesSchema,
    pool: Mapping[str, Player],
    preference: Optional[Mapping[str, float]] = None,
) -> FantasyTeam:
    """Return a rule-valid team changing as few members as possible.

    Among minimal-swap repairs, prefers maximal total preference weight,
    then the lexicographically smallest membership. The candidate's captain
    and vice-captain are preserved whenever they survive the swap.
    """
    preference = preference or {}
    if len(pool) < rules.total_players:
        raise InfeasibleError(
            f"pool has {len(pool)} players, need {rules.total_players}"
        )
    if len(candidate.players) != rules.total_players:
        raise MalformedTeamError(
            f"repair candidate must have {rules.total_players} members"
        )
    for pid in candidate.players:
        if pid not in pool:
            raise UnknownPlayerError(f"player {pid!r} not in pool")
    if validate_team(candidate, pool, rules).ok:
        return candidate

    size = rules.total_players
    current = sorted(candidate.players)
    outsiders = sorted(set(pool) - candidate.players)

    for swaps in range(1, size + 1):
        if swaps > len(outsiders):
            break
        best: Optional[tuple[float, tuple[str, ...], frozenset[str]]] = None
        for kept in combinations(current, size - swaps):
            for added in combinations(outsiders, swaps):
                members = frozenset(kept) | frozenset(added)
                captain, vice = _assign_captains(members, candidate, preference)
                trial = FantasyTeam(members, captain, vice)
                if not validate_team(trial, pool, rules).ok:
                    continue
                weight = sum(preference.get(pid, 0.0) for pid in members)
                key = (-weight, tuple(sorted(members)))
                if best is None or key < (-best[0], best[1]):
                    best = (weight, tuple(sorted(members)), members)
        if best is not None:
            members = best[2]
            captain, vice = _assign_captains(members, candidate, preference)
            return FantasyTeam(members, captain, vice)
    raise InfeasibleError("pool admits no rule-valid team within reach of the candidate")


def feasible_team_exists(pool: Mapping[str, Player], rules: RulesSchema) -> bool:
    """Cheap existence probe used before expensive searches."""
    ids = sorted(pool)
    if len(ids) < rules.total_players:
        return False
    try:
        some = FantasyTeam(ids[: rules.total_players], ids[0], ids[1])
        repair_team(some, rules, pool)
        return True
    except (InfeasibleError, MalformedTeamError):
        return False


def iter_valid_teams(
    pool: Mapping[str, Player],
    rules: RulesSchema,
) -> Iterable[frozenset[str]]:
    """Yield every rule-valid membership (ignoring C/VC) by enumeration.

    Exponential in pool size; intended for small pools and oracle tests.
    """
    ids = sorted(pool)
    for members in combinations(ids, rules.total_players):
        team = FantasyTeam(members, members[0], members[1])
        if validate_team(team, pool, rules).ok:
            yield frozenset(members)
