"""Fantasy cricket toolkit: lineup rules, fantasy-point scoring, contest
analytics at scale, an exact best-team solver, and a multi-agent
LLM pipeline for generating contest entries."""

from .domain import (
    CareerProfile,
    ContestEntry,
    FantasyTeam,
    FormAssessment,
    Franchise,
    MatchContext,
    Player,
    PlayerMatchPerformance,
    PlayerRole,
    Venue,
    canonical_signature,
    validate_performance,
)
from .rules import RulesSchema, ValidationReport, parse_rules, repair_team, validate_team
from .scoring import (
    ScoringSchema,
    TeamScore,
    optimal_captains,
    parse_scoring_schema,
    score_player,
    score_team,
)
from .contests import (
    ContestEntrySet,
    ContestSummary,
    PickFrequencies,
    dream_team,
    ingest_entries,
    ks_normal_statistic,
    percentile_rank,
    pick_frequencies,
    summarize,
    wisdom_of_crowds_team,
)
from .evaluation import AggregateReport, EvaluationRow, aggregate_report, evaluate_team

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "CareerProfile",
    "ContestEntry",
    "ContestEntrySet",
    "ContestSummary",
    "EvaluationRow",
    "FantasyTeam",
    "FormAssessment",
    "Franchise",
    "MatchContext",
    "PickFrequencies",
    "Player",
    "PlayerMatchPerformance",
    "PlayerRole",
    "RulesSchema",
    "ScoringSchema",
    "TeamScore",
    "ValidationReport",
    "Venue",
    "aggregate_report",
    "canonical_signature",
    "dream_team",
    "evaluate_team",
    "ingest_entries",
    "ks_normal_statistic",
    "optimal_captains",
    "parse_rules",
    "parse_scoring_schema",
    "percentile_rank",
    "pick_frequencies",
    "repair_team",
    "score_player",
    "score_team",
    "summarize",
    "validate_performance",
    "validate_team",
    "wisdom_of_crowds_team",
]
