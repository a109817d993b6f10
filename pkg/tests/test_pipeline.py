import json
import random
from datetime import timedelta

import pytest

from fantasy11.datasources import apply_temporal_guard
from fantasy11.errors import (
    CannotProduceValidSlateError,
    PipelineError,
)
from fantasy11.llm import ScriptedBackend
from fantasy11.pipeline import (
    Blackboard,
    CAREER_PROFILER,
    DONE,
    FORM_ASSESSOR,
    LlmGateway,
    PipelineConfig,
    RESEARCHER,
    SELECTOR,
    STRATEGIZER,
    Transcript,
    llm_call_budget,
    render_template,
    route_next,
    run_career_profiler,
    run_form_assessor,
    run_pipeline,
    run_researcher,
    run_strategizer,
    team_records_from_results,
)
from fantasy11.rules import default_rules, validate_team

import pipeline_helpers as ph
from conftest import perf
from pipeline_helpers import START, build_clients, build_match, build_pool, build_results, build_stats

CFG = PipelineConfig(profile_concurrency=1)


def fresh_board():
    return Blackboard(build_match(), build_pool())


def guarded_stats(pool=None):
    return apply_temporal_guard(build_stats(pool or build_pool()), START)


class TestRendering:
    def test_known_placeholders_only(self):
        text = 'Use {n} teams. Reply {"teams": [...]} with {n} and {unknown}.'
        out = render_template(text, {"n": 3})
        assert out == 'Use 3 teams. Reply {"teams": [...]} with 3 and {unknown}.'


class TestRouting:
    def test_fresh_board_routes_to_researcher(self):
        assert route_next(fresh_board(), CFG) == RESEARCHER

    def test_precedence_chain(self):
        board = fresh_board()
        board.fill("weather", (), "t")
        assert route_next(board, CFG) == RESEARCHER  # odds and pitch still empty
        board.fill("odds", (), "t")
        board.fill("pitch", None, "t")
        assert route_next(board, CFG) == CAREER_PROFILER
        board.fill("career_profiles", {}, "t")
        assert route_next(board, CFG) == FORM_ASSESSOR
        board.fill("form", {}, "t")
        assert route_next(board, CFG) == STRATEGIZER
        board.fill("strategy", None, "t")
        assert route_next(board, CFG) == SELECTOR

    def test_exhausted_review_still_selector_then_done(self):
        board = fresh_board()
        for name in ("weather", "odds", "pitch", "career_profiles", "form", "strategy"):
            board.fill(name, {}, "t")
        board.fill("proposed_teams", [], "t")
        board.fill("review_feedback", ["r1", "r2"], "t")
        assert board.review_iterations == CFG.max_review_iters
        assert route_next(board, CFG) == SELECTOR  # finalization visit
        board.fill("final_teams", [], "t")
        assert route_next(board, CFG) == DONE

    def test_fuzzed_walks_terminate_within_bounds(self):
        # simulate each agent's slot effects over randomized boards
        rng = random.Random(11)
        research = ("weather", "odds", "pitch")
        linear = ("career_profiles", "form", "strategy")
        for _ in range(10_000):
            board = fresh_board()
            for name in research + linear:
                if rng.random() < 0.5:
                    board.fill(name, {}, "t")
            if all(board.filled(s) for s in research + linear):
                if rng.random() < 0.5:
                    board.fill("proposed_teams", [], "t")
                    for k in range(rng.randint(0, CFG.max_review_iters)):
                        board.fill("review_feedback",
                                   ["x"] * (k + 1), "t")
            visits = {SELECTOR: 0}
            for step in range(20):
                agent = route_next(board, CFG)
                if agent == DONE:
                    break
                if agent == RESEARCHER:
                    for name in research:
                        if not board.filled(name):
                            board.fill(name, {}, "t")
                elif agent == CAREER_PROFILER:
                    board.fill("career_profiles", {}, "t")
                elif agent == FORM_ASSESSOR:
                    board.fill("form", {}, "t")
                elif agent == STRATEGIZER:
                    board.fill("strategy", {}, "t")
                elif agent == SELECTOR:
                    visits[SELECTOR] += 1
                    if not board.filled("proposed_teams"):
                        board.fill("proposed_teams", [], "t")
                        if CFG.max_review_iters == 0:
                            board.fill("final_teams", [], "t")
                    elif board.review_iterations < CFG.max_review_iters:
                        fb = (list(board.payload("review_feedback"))
                              if board.filled("review_feedback") else [])
                        board.fill("review_feedback", fb + ["x"], "t")
                        if board.review_iterations >= CFG.max_review_iters:
                            board.fill("final_teams", [], "t")
                    else:
                        board.fill("final_teams", [], "t")
            else:
                pytest.fail("walk did not terminate")
            assert visits[SELECTOR] <= 1 + CFG.max_review_iters + 1


class TestResearcher:
    def test_fills_three_slots(self, tmp_path):
        board = fresh_board()
        clients = build_clients(tmp_path, board.match_context)
        gateway = LlmGateway(
            worker=ScriptedBackend([ph.ODDS_RESPONSE, ph.PITCH_RESPONSE]),
            reviewer=ScriptedBackend([]),
        )
        transcript = Transcript()
        run_researcher(board, clients, gateway, transcript, CFG)
        assert board.filled("weather") and board.filled("odds") and board.filled("pitch")
        snaps = board.payload("weather")
        assert snaps[0].temperature_c == 31.0
        quotes = board.payload("odds")
        assert {q.franchise_id for q in quotes} == {"LKO", "MUM"}
        assert "low-scoring" in board.payload("pitch").summary.lower()
        assert board.slot("pitch").provenance.startswith("search:")

    def test_missing_weather_fixture_names_slot(self, tmp_path):
        board = fresh_board()
        clients = build_clients(tmp_path, board.match_context)
        for f in (tmp_path / "weather").iterdir():
            f.unlink()
        gateway = LlmGateway(worker=ScriptedBackend([]), reviewer=ScriptedBackend([]))
        with pytest.raises(PipelineError, match="weather"):
            run_researcher(board, clients, gateway, Transcript(), CFG)


def profiled_board(tmp_path, pool=None, career_rating=6):
    pool = pool or build_pool()
    board = Blackboard(build_match(), pool)
    order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
    backend = ScriptedBackend([ph.career_response(p, career_rating) for p in order])
    gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
    run_career_profiler(board, guarded_stats(pool), gateway, Transcript(), CFG)
    return board


class TestCareerProfiler:
    def test_aggregates_hand_checked(self, tmp_path):
        board = profiled_board(tmp_path)
        profile = board.payload("career_profiles")["h00"]
        # history: runs 10,20,30,40 across 4 matches, dates 30/60/90/120 days
        # before the match, all the same season or prior year
        seasons = {agg.season: agg for agg in profile.per_season}
        total_runs = sum(agg.runs for agg in profile.per_season)
        total_matches = sum(agg.matches for agg in profile.per_season)
        assert total_runs == 100 and total_matches == 4
        for agg in profile.per_season:
            assert agg.strike_rate == pytest.approx(100.0)  # runs == balls
        assert profile.career_rating == 6

    def test_guard_required(self):
        board = fresh_board()
        gateway = LlmGateway(worker=ScriptedBackend([]), reviewer=ScriptedBackend([]))
        with pytest.raises(PipelineError, match="guard"):
            run_career_profiler(board, build_stats(board.pool), gateway, Transcript(), CFG)

    def test_three_match_history_hand_computed(self):
        # runs 30+10+24 = 64 off 20+10+18 = 48 balls -> SR 133.33...;
        # 24+12 legal balls for 45+15 conceded -> economy 10.0
        from fantasy11.datasources import HistoricalStatStore, StatRow, apply_temporal_guard
        from datetime import timedelta

        pool = build_pool()
        spec = [
            ("m1", 120, dict(runs=30, balls=20, legal=24, rc=45, wkts=1)),
            ("m2", 60, dict(runs=10, balls=10)),
            ("m3", 30, dict(runs=24, balls=18, legal=12, rc=15, wkts=2, catches=1)),
        ]
        rows = [
            StatRow("keep-" + mid, START - timedelta(days=days),
                    perf("h05", **kw), "LKO")
            for mid, days, kw in spec
        ]
        other = [
            StatRow("pad", START - timedelta(days=9), perf(pid), pool[pid].franchise_id)
            for pid in pool if pid != "h05"
        ]
        stats = apply_temporal_guard(
            HistoricalStatStore(rows=tuple(rows + other)), START
        )
        board = Blackboard(build_match(), pool)
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        backend = ScriptedBackend([ph.career_response(p) for p in order])
        gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
        run_career_profiler(board, stats, gateway, Transcript(), CFG)
        (agg,) = board.payload("career_profiles")["h05"].per_season
        assert (agg.matches, agg.runs, agg.balls_faced) == (3, 64, 48)
        assert agg.strike_rate == pytest.approx(100.0 * 64 / 48)
        assert agg.wickets == 3 and agg.legal_balls == 36
        assert agg.economy == pytest.approx(6.0 * 60 / 36)
        assert agg.catches == 1

    def test_debutant_flagged(self):
        pool = build_pool()
        board = Blackboard(build_match(), pool)
        stats = apply_temporal_guard(
            build_stats({pid: pool[pid] for pid in pool if pid != "h05"}), START
        )
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        backend = ScriptedBackend([ph.career_response(p) for p in order])
        gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
        run_career_profiler(board, stats, gateway, Transcript(), CFG)
        debut_request = next(
            r for r in backend.requests if "PLAYER_ID: h05" in r.messages[-1].content
        )
        assert "DEBUTANT: yes" in debut_request.messages[-1].content
        assert board.payload("career_profiles")["h05"].per_season == ()

    def test_out_of_range_rating_retried(self):
        pool = build_pool()
        board = Blackboard(build_match(), pool)
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        script = []
        for i, pid in enumerate(order):
            if i == 0:
                script.append(ph.career_response(pid, rating=12))  # rejected
            script.append(ph.career_response(pid, rating=7))
        backend = ScriptedBackend(script)
        gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
        transcript = Transcript()
        run_career_profiler(board, guarded_stats(pool), gateway, transcript, CFG)
        assert board.payload("career_profiles")["h00"].career_rating == 7
        assert transcript.llm_calls == len(order) + 1


class TestFormAssessor:
    def test_short_history_window_ok(self):
        pool = build_pool()
        board = profiled_board(None, pool)
        # strip h00's history to one match
        stats = guarded_stats(pool)
        from fantasy11.datasources import HistoricalStatStore

        rows = tuple(
            r for r in stats.rows if not (r.player_id == "h00" and r.match_id != "hist-0")
        )
        stats = HistoricalStatStore(rows=rows, cutoff=stats.cutoff)
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        backend = ScriptedBackend([ph.form_response(p, 8) for p in order])
        gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
        run_form_assessor(board, stats, build_results(), gateway, Transcript(), CFG)
        form = board.payload("form")["h00"]
        assert form.window_size == CFG.form_window
        assert form.splits["overall"].matches == 1
        assert form.form_rating == 8

    def test_home_away_split_matches_brute_force(self):
        pool = build_pool()
        board = profiled_board(None, pool)
        stats = guarded_stats(pool)
        results = build_results()
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        backend = ScriptedBackend([ph.form_response(p) for p in order])
        gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
        run_form_assessor(board, stats, results, gateway, Transcript(), CFG)
        splits = board.payload("form")["h00"].splits
        by_match = {r.match_id: r for r in results}
        rows = stats.rows_for("h00")[-CFG.form_window:]
        home_rows = [
            r for r in rows
            if r.match_id in by_match and by_match[r.match_id].home_franchise == r.franchise_id
        ]
        assert splits["home"].matches == len(home_rows)
        assert splits["home"].runs == sum(r.performance.batting.runs for r in home_rows)
        first_rows = [
            r for r in rows
            if r.match_id in by_match and by_match[r.match_id].batting_first == r.franchise_id
        ]
        assert splits["batting_first"].matches == len(first_rows)


class TestStrategizer:
    def setup_board(self, tmp_path, empty_tips=False):
        pool = build_pool()
        board = profiled_board(None, pool)
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        backend = ScriptedBackend([ph.form_response(p) for p in order])
        gateway = LlmGateway(worker=backend, reviewer=ScriptedBackend([]))
        run_form_assessor(board, guarded_stats(pool), build_results(), gateway, Transcript(), CFG)
        clients = build_clients(tmp_path, board.match_context, empty_tips=empty_tips)
        # researcher slots needed by the strategy prompt
        run_researcher(
            board, clients,
            LlmGateway(worker=ScriptedBackend([ph.ODDS_RESPONSE, ph.PITCH_RESPONSE]),
                       reviewer=ScriptedBackend([])),
            Transcript(), CFG,
        )
        return board, clients

    def test_records_match_hand_count(self, tmp_path):
        board, clients = self.setup_board(tmp_path)
        records = team_records_from_results(
            build_results(), ["LKO", "MUM"]
        )
        # hand tally over build_results(): k=0..3, winner alternates MUM/LKO
        assert records["LKO"].wins == 2 and records["LKO"].losses == 2
        assert records["MUM"].wins == 2 and records["MUM"].losses == 2
        assert records["LKO"].batting_first == (1, 1)
        gateway = LlmGateway(worker=ScriptedBackend([ph.STRATEGY_RESPONSE]),
                             reviewer=ScriptedBackend([]))
        transcript = Transcript()
        run_strategizer(board, guarded_stats(), build_results(), clients, gateway, transcript, CFG)
        brief = board.payload("strategy")
        assert brief.team_records["LKO"].wins == 2
        assert brief.recommendations
        assert any("all-rounders" in t for t in brief.tips)

    def test_empty_tips_still_fills(self, tmp_path):
        board, clients = self.setup_board(tmp_path, empty_tips=True)
        gateway = LlmGateway(worker=ScriptedBackend([ph.STRATEGY_RESPONSE]),
                             reviewer=ScriptedBackend([]))
        run_strategizer(board, guarded_stats(), build_results(), clients, gateway, Transcript(), CFG)
        brief = board.payload("strategy")
        assert brief.tips == ()
        assert brief.recommendations


def run_full_pipeline(tmp_path, n=3, max_review_iters=2, worker_script=None,
                      reviewer_script=None, star=None, config=None):
    pool = build_pool()
    match = build_match()
    stats = build_stats(pool)
    clients = build_clients(tmp_path, match)
    worker = ScriptedBackend(
        worker_script
        if worker_script is not None
        else ph.worker_script(pool, n, max_review_iters, star=star)
    )
    reviewer = ScriptedBackend(
        reviewer_script if reviewer_script is not None else ph.reviewer_script(max_review_iters)
    )
    cfg = config or PipelineConfig(profile_concurrency=1, max_review_iters=max_review_iters)
    result = run_pipeline(
        match, n, pool=pool, rules=default_rules(), stats=stats,
        gateway=LlmGateway(worker=worker, reviewer=reviewer),
        clients=clients, results=build_results(), config=cfg,
    )
    return result, pool


class TestRunPipeline:
    def test_produces_n_valid_named_teams(self, tmp_path):
        result, pool = run_full_pipeline(tmp_path, n=3)
        assert len(result.teams) == 3
        for team in result.teams:
            assert validate_team(team, pool, default_rules()).ok
            assert team.name
            assert team.rationale

    def test_call_budget_documented_formula(self, tmp_path):
        n = 3
        result, _ = run_full_pipeline(tmp_path, n=n)
        assert result.llm_budget == llm_call_budget(22, n, 2, 3)
        assert result.llm_calls <= result.llm_budget
        # happy path: 2 research + 44 ratings + 1 strategy + 1 propose
        # + 2 revisions + 2 critiques + n names
        assert result.llm_calls == 2 + 44 + 1 + 1 + 4 + n

    def test_deterministic_transcripts(self, tmp_path):
        a, _ = run_full_pipeline(tmp_path, n=2)
        b, _ = run_full_pipeline(tmp_path, n=2)
        assert a.transcript.to_jsonl() == b.transcript.to_jsonl()
        assert [t.players for t in a.teams] == [t.players for t in b.teams]

    def test_n_bounds(self, tmp_path):
        with pytest.raises(PipelineError):
            run_full_pipeline(tmp_path, n=0)
        with pytest.raises(PipelineError):
            run_full_pipeline(tmp_path, n=21)

    def test_review_loop_runs_even_for_single_team(self, tmp_path):
        result, _ = run_full_pipeline(tmp_path, n=1)
        reviews = [
            r for r in result.transcript.records
            if r["kind"] == "agent_step" and "review round" in r.get("detail", "")
        ]
        assert len(reviews) == 2
        assert len(result.teams) == 1

    def test_invalid_team_triggers_reprompt_with_codes(self, tmp_path):
        n = 2
        pool = build_pool()
        teams = ph.valid_teams_json(pool, n)
        bad = dict(teams[0])
        bad["players"] = bad["players"][:10] + [bad["players"][0]]  # 10 distinct
        first_slate = json.dumps({"teams": [bad, teams[1]]})
        fixed_slate = json.dumps({"teams": teams})
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        worker = (
            [ph.ODDS_RESPONSE, ph.PITCH_RESPONSE]
            + [ph.career_response(p) for p in order]
            + [ph.form_response(p) for p in order]
            + [ph.STRATEGY_RESPONSE]
            + [first_slate]
            + [json.dumps(teams[0])]  # fix for the bad team
            + [fixed_slate, fixed_slate]  # two revisions
            + [ph.name_response(i) for i in range(n)]
        )
        result, pool = run_full_pipeline(
            tmp_path, n=n, worker_script=worker,
        )
        fix_exchanges = [
            r for r in result.transcript.records
            if r["kind"] == "llm_exchange"
            and any("CountViolation" in m[1] for m in r["request_messages"])
        ]
        assert fix_exchanges, "expected a re-prompt carrying the violation code"
        for team in result.teams:
            assert validate_team(team, pool, default_rules()).ok

    def test_unfixable_slate_raises(self, tmp_path):
        n = 1
        pool = build_pool()
        bad_team = {
            "players": sorted(pool)[:10] + [sorted(pool)[0]],
            "captain": sorted(pool)[0],
            "vice_captain": sorted(pool)[1],
        }
        order = list(ph.xi_ids("h")) + list(ph.xi_ids("a"))
        worker = (
            [ph.ODDS_RESPONSE, ph.PITCH_RESPONSE]
            + [ph.career_response(p) for p in order]
            + [ph.form_response(p) for p in order]
            + [ph.STRATEGY_RESPONSE]
            + [json.dumps({"teams": [bad_team]})]
            + [json.dumps(bad_team)] * 10
        )
        with pytest.raises(CannotProduceValidSlateError):
            run_full_pipeline(tmp_path, n=n, worker_script=worker)

    def test_no_network_in_mock_mode(self, tmp_path, monkeypatch):
        import requests

        def boom(*args, **kwargs):
            raise AssertionError("network touched in mock mode")

        monkeypatch.setattr(requests.Session, "request", boom)
        result, _ = run_full_pipeline(tmp_path, n=2)
        assert len(result.teams) == 2

    def test_leakage_guard_by_construction(self, tmp_path):
        # the planted future row (runs=999) must never reach any prompt
        result, _ = run_full_pipeline(tmp_path, n=2)
        for record in result.transcript.records:
            if record["kind"] == "llm_exchange":
                for _, content in record["request_messages"]:
                    assert "999" not in content

    def test_rewrite_protection(self):
        board = fresh_board()
        board.fill("weather", (), "t")
        with pytest.raises(PipelineError, match="once"):
            board.fill("weather", (), "t")
        board.fill("proposed_teams", [], "t")
        board.fill("proposed_teams", [], "t")  # rewritable
