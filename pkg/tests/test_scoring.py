import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from fantasy11.domain import FantasyTeam, PlayerRole
from fantasy11.errors import ConfigError, MissingPerformanceError
from fantasy11.scoring import (
    default_scoring_schema,
    optimal_captains,
    parse_scoring_schema,
    score_player,
    score_team,
)

from conftest import ROLE_CODES, make_pool, perf, random_perfs

DATA = Path(__file__).parent / "data"


def load_cases():
    doc = json.loads((DATA / "scoring_cases.json").read_text())
    return doc["cases"]


def perf_from_case(spec: dict):
    return perf(**spec)


class TestParseScoringSchema:
    def test_shipped_default_multipliers(self):
        schema = default_scoring_schema()
        assert schema.captain_multiplier == Fraction(2)
        assert schema.vice_captain_multiplier == Fraction(3, 2)
        assert schema.per_run == 1
        assert schema.playing_xi_points == 4

    def test_multiplier_order_enforced(self):
        doc = json.loads(
            (Path(__file__).parents[1] / "src/fantasy11/config/default_scoring.json").read_text()
        )
        doc["vice_captain_multiplier"] = 2.5
        with pytest.raises(ConfigError, match="MultiplierOrder"):
            parse_scoring_schema(json.dumps(doc))

    def test_overlapping_bands_rejected(self):
        doc = json.loads(
            (Path(__file__).parents[1] / "src/fantasy11/config/default_scoring.json").read_text()
        )
        doc["economy_bands"].append(
            {"min_legal_balls": 12, "economy_range": [4, 5.5], "points": 1}
        )
        with pytest.raises(ConfigError, match="OverlappingBands"):
            parse_scoring_schema(json.dumps(doc))

    def test_decreasing_thresholds_rejected(self):
        doc = json.loads(
            (Path(__file__).parents[1] / "src/fantasy11/config/default_scoring.json").read_text()
        )
        doc["milestone_bonuses"] = [
            {"runs_threshold": 50, "points": 8},
            {"runs_threshold": 30, "points": 4},
        ]
        with pytest.raises(ConfigError, match="DecreasingThresholds"):
            parse_scoring_schema(json.dumps(doc))


class TestScorePlayer:
    @pytest.mark.parametrize("case", load_cases(), ids=lambda c: c["id"])
    def test_hand_scored_corpus(self, case):
        schema = default_scoring_schema()
        got = score_player(perf_from_case(case["perf"]), ROLE_CODES[case["role"]], schema)
        assert got == Fraction(case["expected"]), case["derivation"]

    def test_not_played_scores_zero(self):
        schema = default_scoring_schema()
        loaded = perf(runs=50, balls=20, played=False)
        assert score_player(loaded, PlayerRole.BATTER, schema) == 0

    def test_invalid_performance_rejected(self):
        schema = default_scoring_schema()
        with pytest.raises(Exception, match="invalid"):
            score_player(perf(runs=3, fours=1), PlayerRole.BATTER, schema)


def team_and_inputs(rng, schema):
    pool = make_pool()
    perfs = random_perfs(pool, rng)
    ids = sorted(pool)
    members = rng.sample(ids, 11)
    team = FantasyTeam(members, members[0], members[1])
    roles = {pid: p.role for pid, p in pool.items()}
    return team, perfs, roles


class TestScoreTeam:
    def test_all_zero_total_is_xi_points_only(self):
        schema = default_scoring_schema()
        pool = make_pool()
        ids = sorted(pool)[:11]
        team = FantasyTeam(ids, ids[0], ids[1])
        perfs = {pid: perf(pid, played=False) for pid in ids}
        roles = {pid: pool[pid].role for pid in ids}
        assert score_team(team, perfs, roles, schema).total == 0

    def test_missing_performance(self):
        schema = default_scoring_schema()
        pool = make_pool()
        ids = sorted(pool)[:11]
        team = FantasyTeam(ids, ids[0], ids[1])
        perfs = {pid: perf(pid) for pid in ids[:-1]}
        roles = {pid: pool[pid].role for pid in ids}
        with pytest.raises(MissingPerformanceError):
            score_team(team, perfs, roles, schema)

    def test_swap_cvc_delta(self, rng):
        # exact algebra: swapping C and VC moves the total by
        # (c_mult - vc_mult) * (base[C] - base[VC])
        schema = default_scoring_schema()
        for _ in range(50):
            team, perfs, roles = team_and_inputs(rng, schema)
            swapped = FantasyTeam(team.players, team.vice_captain, team.captain)
            a = score_team(team, perfs, roles, schema)
            b = score_team(swapped, perfs, roles, schema)
            delta = (schema.captain_multiplier - schema.vice_captain_multiplier) * (
                a.per_player[team.captain] - a.per_player[team.vice_captain]
            )
            assert a.total - b.total == delta

    def test_total_matches_independent_recomputation(self, rng):
        # brute-force oracle: sum bases + 1.0*base[C] + 0.5*base[VC]
        schema = default_scoring_schema()
        for _ in range(25):
            team, perfs, roles = team_and_inputs(rng, schema)
            ts = score_team(team, perfs, roles, schema)
            bases = {
                pid: score_player(perfs[pid], roles[pid], schema)
                for pid in team.players
            }
            expected = (
                sum(bases.values(), Fraction(0))
                + Fraction(1) * bases[team.captain]
                + Fraction(1, 2) * bases[team.vice_captain]
            )
            assert ts.total == expected

    def test_half_point_granularity(self, rng):
        schema = default_scoring_schema()
        for _ in range(25):
            team, perfs, roles = team_and_inputs(rng, schema)
            total = score_team(team, perfs, roles, schema).total
            assert (total * 2).denominator == 1


class TestProperties:
    @given(runs=st.integers(min_value=0, max_value=150), extra=st.integers(1, 30))
    @settings(max_examples=60, deadline=None)
    def test_runs_monotonicity_without_sr_bands(self, runs, extra):
        doc = json.loads(
            (Path(__file__).parents[1] / "src/fantasy11/config/default_scoring.json").read_text()
        )
        doc["strike_rate_bands"] = []
        schema = parse_scoring_schema(json.dumps(doc))
        lo = score_player(perf(runs=runs, balls=max(runs, 1)), PlayerRole.BATTER, schema)
        hi = score_player(
            perf(runs=runs + extra, balls=max(runs + extra, 1)), PlayerRole.BATTER, schema
        )
        assert hi >= lo

    @given(k=st.sampled_from([Fraction(1, 2), Fraction(2), Fraction(3), Fraction(5, 2)]))
    @settings(max_examples=10, deadline=None)
    def test_linearity_under_schema_scaling(self, k):
        base_doc = json.loads(
            (Path(__file__).parents[1] / "src/fantasy11/config/default_scoring.json").read_text()
        )
        scaled_doc = json.loads(json.dumps(base_doc))
        scalar_keys = [
            "per_run", "four_bonus", "six_bonus", "per_wicket", "bowled_lbw_bonus",
            "per_maiden", "per_catch", "per_stumping", "runout_direct",
            "runout_indirect", "playing_xi_points",
        ]
        for key in scalar_keys:
            scaled_doc[key] = float(Fraction(base_doc[key]) * k)
        for key in ("milestone_bonuses", "haul_bonuses"):
            for item in scaled_doc[key]:
                item["points"] = float(Fraction(item["points"]) * k)
        scaled_doc["duck_penalty"]["points"] = float(
            Fraction(base_doc["duck_penalty"]["points"]) * k
        )
        scaled_doc["catch_haul_bonus"]["points"] = float(
            Fraction(base_doc["catch_haul_bonus"]["points"]) * k
        )
        for key in ("economy_bands", "strike_rate_bands"):
            for item in scaled_doc[key]:
                item["points"] = float(Fraction(item["points"]) * k)
        base = parse_scoring_schema(json.dumps(base_doc))
        scaled = parse_scoring_schema(json.dumps(scaled_doc))
        rng = random.Random(99)
        pool = make_pool()
        perfs = random_perfs(pool, rng)
        for pid, p in pool.items():
            assert score_player(perfs[pid], p.role, scaled) == k * score_player(
                perfs[pid], p.role, base
            )

    def test_cvc_lemma(self, rng):
        # for fixed membership, C = argmax base and VC = runner-up maximize
        # the total over all ordered C/VC pairs (ties by id)
        schema = default_scoring_schema()
        for _ in range(30):
            team, perfs, roles = team_and_inputs(rng, schema)
            bases = {
                pid: score_player(perfs[pid], roles[pid], schema) for pid in team.players
            }
            captain, vice = optimal_captains(bases)
            best = score_team(
                FantasyTeam(team.players, captain, vice), perfs, roles, schema
            ).total
            for c in team.players:
                for v in team.players:
                    if c == v:
                        continue
                    other = score_team(
                        FantasyTeam(team.players, c, v), perfs, roles, schema
                    ).total
                    assert best >= other
