"""Post-match evaluation and experiment harness.

Scores generated teams against the realized performances, ranks them inside
the contest population, measures hit rates against the best possible team,
and aggregates slates into report rows. Also hosts the single-prompt
baseline generator and the ablation runner that sweeps slate sizes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .contests import ContestEntrySet, percentile_rank
from .domain import FantasyTeam, MatchContext, Player, PlayerMatchPerformance, PlayerRole
from .errors import CannotProduceValidSlateError, Fantasy11Error, MalformedAfterRetriesError
from .llm import Backend, PayloadDescriptor, WORKER, complete_structured, make_request
from .pipeline import (
    PipelineConfig,
    Transcript,
    _raw_team_problems,
    _teams_descriptor,
    build_prompt,
    render_template,
)
from .rules import RulesSchema, describe_rules, validate_team
from .scoring import ScoringSchema, score_team

DEFAULT_WIN_FLOOR = 33.3


def is_win(percentile: float, win_floor: float = DEFAULT_WIN_FLOOR) -> bool:
    """Contest win: the entry fee comes back when a team finishes at or
    above the floor percentile (default: top two thirds of the field)."""
    return percentile >= win_floor


@dataclass(frozen=True, slots=True)
class EvaluationRow:
    """One team's post-match line: points, field percentile, hit rates
    against the best-possible team, and the win flag."""

    team_label: str
    total_points: float
    percentile: float
    c_in_dt: int
    vc_in_dt: int
    players_in_dt: int
    win: bool


@dataclass(frozen=True, slots=True)
class AggregateReport:
    n_teams: int
    points_avg: float
    percentile_avg: float
    c_in_dt_avg: float
    vc_in_dt_avg: float
    players_in_dt_avg: float
    win_pct: float
    highest_percentile: float


def evaluate_team(
    team: FantasyTeam,
    dt: FantasyTeam,
    perfs: Mapping[str, PlayerMatchPerformance],
    roles: Mapping[str, PlayerRole],
    schema: ScoringSchema,
    entry_set: ContestEntrySet,
    points: Mapping[bytes, object],
    win_floor: float = DEFAULT_WIN_FLOOR,
    label: Optional[str] = None,
) -> EvaluationRow:
    """Score one team and place it inside the contest field."""
    score = score_team(team, perfs, roles, schema)
    pct = percentile_rank(score.total, entry_set, points)
    return EvaluationRow(
        team_label=label or team.name or f"C={team.captain}",
        total_points=float(score.total),
        percentile=pct,
        c_in_dt=int(team.captain == dt.captain),
        vc_in_dt=int(team.vice_captain == dt.vice_captain),
        players_in_dt=len(team.players & dt.players),
        win=is_win(pct, win_floor),
    )


def aggregate_report(rows: Sequence[EvaluationRow]) -> AggregateReport:
    """Arithmetic means per column; win rate as a percentage."""
    if not rows:
        raise Fantasy11Error("cannot aggregate an empty row set")
    n = len(rows)
    return AggregateReport(
        n_teams=n,
        points_avg=sum(r.total_points for r in rows) / n,
        percentile_avg=sum(r.percentile for r in rows) / n,
        c_in_dt_avg=sum(r.c_in_dt for r in rows) / n,
        vc_in_dt_avg=sum(r.vc_in_dt for r in rows) / n,
        players_in_dt_avg=sum(r.players_in_dt for r in rows) / n,
        win_pct=100.0 * sum(r.win for r in rows) / n,
        highest_percentile=max(r.percentile for r in rows),
    )


_BASELINE_SYSTEM = "You are a cricket analyst."


def prompt_engineering_baseline(
    match: MatchContext,
    pool: Mapping[str, Player],
    n: int,
    backend: Backend,
    rules: RulesSchema,
    *,
    config: PipelineConfig = PipelineConfig(),
    transcript: Optional[Transcript] = None,
    temperature: float = 1.0,
    max_fix_attempts: int = 3,
) -> list[FantasyTeam]:
    """Single few-shot prompt that asks for the whole slate at once; each
    returned team is validated and individually re-requested when invalid."""
    xi = match.pool_player_ids()
    if xi is None:
        raise Fantasy11Error("match context must carry both playing XIs")
    xi_pool = {pid: pool[pid] for pid in xi}
    home_ids = [pid for pid in xi if pool[pid].franchise_id == match.home_franchise.franchise_id]
    away_ids = [pid for pid in xi if pool[pid].franchise_id == match.away_franchise.franchise_id]

    _, template = _load_baseline_template(config)
    user = render_template(
        template,
        {
            "teamA": match.home_franchise.name,
            "teamB": match.away_franchise.name,
            "city": match.venue.city,
            "n": n,
            "playerTeamA": ", ".join(home_ids),
            "playerTeamB": ", ".join(away_ids),
        },
    )
    request = make_request(WORKER, user, system=_BASELINE_SYSTEM, temperature=temperature)
    observer = (
        (lambda rq, rs: transcript.llm_exchange("baseline", rq, rs))
        if transcript is not None
        else None
    )
    payload = complete_structured(
        request, _teams_descriptor(n), backend,
        max_attempts=max_fix_attempts, observer=observer,
    )

    players_table = "\n".join(
        f"{pid} {pool[pid].role.value} {pool[pid].franchise_id} {pool[pid].credit_half / 2:g}"
        for pid in xi
    )
    teams: list[FantasyTeam] = []
    for raw in payload["teams"]:
        teams.append(
            _settle_baseline_team(
                raw, xi_pool, rules, backend, config, temperature,
                players_table, max_fix_attempts, observer,
            )
        )
    return teams


def _load_baseline_template(config: PipelineConfig) -> tuple[str, str]:
    from .pipeline import load_template

    return load_template("baseline", config.template_dir())


_SINGLE_TEAM = PayloadDescriptor(
    fields={"players": list, "captain": str, "vice_captain": str},
    check=lambda p: _raw_team_problems(p, "team"),
)


def _settle_baseline_team(
    raw: dict,
    pool: Mapping[str, Player],
    rules: RulesSchema,
    backend: Backend,
    config: PipelineConfig,
    temperature: float,
    players_table: str,
    max_fix_attempts: int,
    observer,
) -> FantasyTeam:
    current = raw
    for attempt in range(max_fix_attempts + 1):
        problems = _raw_team_problems(current, "team")
        if not problems:
            team = FantasyTeam(current["players"], current["captain"], current["vice_captain"])
            unknown = sorted(pid for pid in team.players if pid not in pool)
            if unknown:
                problems = [f"UnknownPlayer: {pid}" for pid in unknown]
            else:
                report = validate_team(team, pool, rules, playing_xi=frozenset(pool))
                if report.ok:
                    return team
                problems = [str(v) for v in report.violations]
        if attempt == max_fix_attempts:
            break
        request = build_prompt(
            "selector_fix",
            {
                "team_json": json.dumps(current, sort_keys=True),
                "violations": "; ".join(problems),
                "rules_text": describe_rules(rules),
                "players_table": players_table,
            },
            config, WORKER, temperature,
        )
        try:
            current = complete_structured(
                request, _SINGLE_TEAM, backend, max_attempts=1, observer=observer
            )
        except MalformedAfterRetriesError as exc:
            raise CannotProduceValidSlateError(f"baseline fix call failed: {exc}") from exc
    raise CannotProduceValidSlateError(
        "baseline team could not be made valid: " + "; ".join(problems)
    )


ABLATION_METRICS = (
    ("points_avg", "Points Avg."),
    ("percentile_avg", "Rank Avg."),
    ("cvc_in_dt", "C/VC in DT"),
    ("players_in_dt_avg", "Players in DT"),
    ("win_pct", "Win %"),
    ("highest_percentile", "Highest Rank"),
)


@dataclass(frozen=True)
class AblationCell:
    report: AggregateReport

    def metric(self, key: str) -> float:
        if key == "cvc_in_dt":
            return (self.report.c_in_dt_avg + self.report.vc_in_dt_avg) / 2
        return getattr(self.report, key)


@dataclass(frozen=True)
class AblationReport:
    """Slate-size sweep: one row per n, one cell per generator."""

    n_values: tuple[int, ...]
    generator_names: tuple[str, ...]
    cells: Mapping[tuple[int, str], AblationCell]
    rows: Mapping[tuple[int, str], tuple[EvaluationRow, ...]]

    def to_text(self) -> str:
        primary, *others = self.generator_names
        header = ["n"] + [label for _, label in ABLATION_METRICS]
        rows = [header]
        for n in self.n_values:
            cells = [str(n)]
            for key, _ in ABLATION_METRICS:
                value = f"{self.cells[(n, primary)].metric(key):.4g}"
                extras = " ".join(
                    f"({self.cells[(n, name)].metric(key):.4g})" for name in others
                )
                cells.append(f"{value} {extras}".strip())
            rows.append(cells)
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = [
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows
        ]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["n", "generator"] + [key for key, _ in ABLATION_METRICS]
        )
        for n in self.n_values:
            for name in self.generator_names:
                cell = self.cells[(n, name)]
                writer.writerow(
                    [n, name] + [_fmt(cell.metric(key)) for key, _ in ABLATION_METRICS]
                )
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "n_values": list(self.n_values),
            "generators": list(self.generator_names),
            "grid": [
                {
                    "n": n,
                    "generator": name,
                    **{key: self.cells[(n, name)].metric(key) for key, _ in ABLATION_METRICS},
                }
                for n in self.n_values
                for name in self.generator_names
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def run_ablation(
    n_values: Sequence[int],
    generators: Mapping[str, Callable[[int], Sequence[FantasyTeam]]],
    dt: FantasyTeam,
    perfs: Mapping[str, PlayerMatchPerformance],
    roles: Mapping[str, PlayerRole],
    schema: ScoringSchema,
    entry_set: ContestEntrySet,
    points: Mapping[bytes, object],
    win_floor: float = DEFAULT_WIN_FLOOR,
) -> AblationReport:
    """Generate, evaluate, and aggregate one slate per (generator, n)."""
    if not n_values or not generators:
        raise Fantasy11Error("ablation needs at least one n and one generator")
    cells: dict[tuple[int, str], AblationCell] = {}
    rows: dict[tuple[int, str], tuple[EvaluationRow, ...]] = {}
    for n in n_values:
        for name, generate in generators.items():
            teams = list(generate(n))
            if len(teams) != n:
                raise Fantasy11Error(
                    f"generator {name!r} returned {len(teams)} teams for n={n}"
                )
            evaluated = tuple(
                evaluate_team(
                    team, dt, perfs, roles, schema, entry_set, points,
                    win_floor=win_floor, label=f"{name}-{n}-{i + 1}",
                )
                for i, team in enumerate(teams)
            )
            rows[(n, name)] = evaluated
            cells[(n, name)] = AblationCell(aggregate_report(evaluated))
    return AblationReport(
        n_values=tuple(n_values),
        generator_names=tuple(generators),
        cells=cells,
        rows=rows,
    )
