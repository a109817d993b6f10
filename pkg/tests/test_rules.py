import json
from itertools import combinations

import pytest

from fantasy11.domain import FantasyTeam
from fantasy11.errors import ConfigError, InfeasibleError, UnknownPlayerError
from fantasy11.rules import (
    PoolRestriction,
    default_rules,
    parse_rules,
    repair_team,
    validate_team,
)

from conftest import make_pool, player
from oracles import naive_team_ok


def rules_doc(**overrides):
    doc = {
        "total_players": 11,
        "role_bounds": {
            "WK": {"min": 1, "max": 4},
            "BAT": {"min": 3, "max": 6},
            "AR": {"min": 1, "max": 4},
            "BOWL": {"min": 3, "max": 6},
        },
        "max_per_franchise": 7,
        "credit_budget": 100,
        "pool_restriction": "PlayingXIOnly",
    }
    doc.update(overrides)
    return doc


class TestParseRules:
    def test_shipped_default(self):
        rules = default_rules()
        assert rules.total_players == 11
        bounds = {r.value: (b.min, b.max) for r, b in rules.role_bounds.items()}
        assert bounds == {"WK": (1, 4), "BAT": (3, 6), "AR": (1, 4), "BOWL": (3, 6)}
        assert rules.max_per_franchise == 7
        assert rules.credit_budget == 100
        assert rules.pool_restriction is PoolRestriction.PLAYING_XI_ONLY

    def test_inconsistent_bounds(self):
        doc = rules_doc()
        doc["role_bounds"]["BAT"] = {"min": 7, "max": 6}
        with pytest.raises(ConfigError, match="InconsistentBounds"):
            parse_rules(json.dumps(doc))

    def test_missing_budget(self):
        doc = rules_doc()
        del doc["credit_budget"]
        with pytest.raises(ConfigError, match="MissingField"):
            parse_rules(json.dumps(doc))

    def test_budget_not_positive(self):
        with pytest.raises(ConfigError):
            parse_rules(json.dumps(rules_doc(credit_budget=0)))

    def test_mins_cannot_reach_total(self):
        doc = rules_doc(total_players=25)
        with pytest.raises(ConfigError, match="InconsistentBounds"):
            parse_rules(json.dumps(doc))


class TestValidateTeam:
    def test_count_violation(self):
        pool = make_pool()
        ids = sorted(pool)[:10]
        report = validate_team(FantasyTeam(ids, ids[0], ids[1]), pool, default_rules())
        assert not report.ok
        assert "CountViolation" in report.codes()

    def test_franchise_quota(self):
        pool = make_pool("2WK 5BAT 3AR 4BOWL", franchises=("F1",))
        extra = make_pool("1WK 1BAT 1AR 1BOWL", franchises=("F2",))
        for pid, p in extra.items():
            pool["x" + pid] = player("x" + pid, p.role, "F2")
        ids = sorted(p for p in pool if not p.startswith("x"))[:8]
        ids += sorted(p for p in pool if p.startswith("x"))[:3]
        report = validate_team(FantasyTeam(ids, ids[0], ids[1]), pool, default_rules())
        assert "FranchiseQuotaViolation" in report.codes()

    def test_unknown_player_is_an_error(self):
        pool = make_pool()
        ids = sorted(pool)[:10] + ["ghost"]
        with pytest.raises(UnknownPlayerError):
            validate_team(FantasyTeam(ids, ids[0], ids[1]), pool, default_rules())

    def test_credit_budget(self):
        pool = make_pool(credit="10")
        ids = sorted(pool)[:11]
        tight = parse_rules(json.dumps(rules_doc(credit_budget=100)))
        report = validate_team(FantasyTeam(ids, ids[0], ids[1]), pool, tight)
        assert "CreditBudgetExceeded" in report.codes()

    def test_pool_restriction(self):
        pool = make_pool()
        ids = sorted(pool)[:11]
        xi = frozenset(ids[:-1])
        report = validate_team(
            FantasyTeam(ids, ids[0], ids[1]), pool, default_rules(), playing_xi=xi
        )
        assert "PoolRestrictionViolation" in report.codes()

    def test_all_violations_reported_not_just_first(self):
        pool = make_pool()
        bowl = [p for p, pl in pool.items() if pl.role.value == "BOWL"]
        bat = [p for p, pl in pool.items() if pl.role.value == "BAT"]
        ids = (bowl + bat)[:10]
        team = FantasyTeam(ids, ids[0], ids[0])
        report = validate_team(team, pool, default_rules())
        codes = set(report.codes())
        assert {"CountViolation", "CaptainViceCaptainSame"} <= codes

    def test_exhaustive_agreement_small_pool(self):
        # oracle equivalence over every C(14,11) membership
        pool = make_pool("2WK 5BAT 3AR 4BOWL")
        rules = default_rules()
        ids = sorted(pool)
        mine, oracle = [], []
        for members in combinations(ids, 11):
            team = FantasyTeam(members, members[0], members[1])
            mine.append(validate_team(team, pool, rules).ok)
            oracle.append(naive_team_ok(members, members[0], members[1], pool, rules))
        assert mine == oracle
        assert any(mine)


class TestRepairTeam:
    def test_valid_candidate_is_fixed_point(self):
        pool = make_pool()
        rules = default_rules()
        wk = [p for p, pl in pool.items() if pl.role.value == "WK"]
        bat = [p for p, pl in pool.items() if pl.role.value == "BAT"]
        ar = [p for p, pl in pool.items() if pl.role.value == "AR"]
        bowl = [p for p, pl in pool.items() if pl.role.value == "BOWL"]
        ids = wk[:1] + bat[:4] + ar[:3] + bowl[:3]
        team = FantasyTeam(ids, ids[0], ids[1])
        assert validate_team(team, pool, rules).ok
        assert repair_team(team, rules, pool) is team

    def test_missing_keeper_single_swap(self):
        pool = make_pool("1WK 6BAT 3AR 4BOWL")
        rules = default_rules()
        wk = [p for p, pl in pool.items() if pl.role.value == "WK"]
        bat = sorted(p for p, pl in pool.items() if pl.role.value == "BAT")
        ar = sorted(p for p, pl in pool.items() if pl.role.value == "AR")
        bowl = sorted(p for p, pl in pool.items() if pl.role.value == "BOWL")
        ids = bat[:6] + ar[:2] + bowl[:3]  # keeperless but one swap away
        candidate = FantasyTeam(ids, ids[0], ids[1])
        assert not validate_team(candidate, pool, rules).ok
        # oracle: enumerate all single swaps, keep valid ones with max weight
        weight = {pid: float(i) for i, pid in enumerate(sorted(pool))}
        best = None
        for out_pid in candidate.players:
            members = (set(candidate.players) - {out_pid}) | {wk[0]}
            if naive_team_ok(members, *_cvc(members, candidate, weight), pool, rules):
                w = sum(weight[p] for p in members)
                key = (-w, tuple(sorted(members)))
                if best is None or key < best[0]:
                    best = (key, members)
        repaired = repair_team(candidate, rules, pool, weight)
        assert repaired.players == frozenset(best[1])
        assert wk[0] in repaired.players
        assert validate_team(repaired, pool, rules).ok

    def test_small_pool_infeasible(self):
        pool = make_pool("1WK 4BAT 2AR 3BOWL")  # only 10 players
        ids = sorted(pool) + ["ghost"]
        with pytest.raises(InfeasibleError):
            repair_team(FantasyTeam(ids, ids[0], ids[1]), default_rules(), pool)

    def test_repair_output_always_valid(self, rng):
        rules = default_rules()
        for trial in range(20):
            pool = make_pool("2WK 5BAT 3AR 4BOWL")
            ids = sorted(pool)
            members = rng.sample(ids, 11)
            candidate = FantasyTeam(members, members[0], members[1])
            repaired = repair_team(candidate, rules, pool)
            assert validate_team(repaired, pool, rules).ok


def _cvc(members, prior, weight):
    ranked = sorted(members, key=lambda pid: (-weight.get(pid, 0.0), pid))
    captain = prior.captain if prior.captain in members else ranked[0]
    vice = (
        prior.vice_captain
        if prior.vice_captain in members and prior.vice_captain != captain
        else next(p for p in ranked if p != captain)
    )
    return captain, vice
