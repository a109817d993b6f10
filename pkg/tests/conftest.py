"""Shared builders for tests."""

from __future__ import annotations

import random

import pytest

from fantasy11.domain import (
    BattingLine,
    BowlingLine,
    FieldingLine,
    Player,
    PlayerMatchPerformance,
    PlayerRole,
)

ROLE_CODES = {
    "WK": PlayerRole.WICKETKEEPER,
    "BAT": PlayerRole.BATTER,
    "AR": PlayerRole.ALL_ROUNDER,
    "BOWL": PlayerRole.BOWLER,
}


def perf(
    pid="p1",
    runs=0, balls=0, fours=0, sixes=0, out=False, kind=None,
    legal=0, maidens=0, rc=0, wkts=0, blbw=0,
    catches=0, st=0, rod=0, roi=0,
    played=True,
) -> PlayerMatchPerformance:
    return PlayerMatchPerformance(
        player_id=pid,
        played=played,
        batting=BattingLine(runs, balls, fours, sixes, out, kind),
        bowling=BowlingLine(legal, maidens, rc, wkts, blbw),
        fielding=FieldingLine(catches, st, rod, roi),
    )


def player(pid, role="BAT", franchise="F1", credit="9", name=None) -> Player:
    from fantasy11.domain import parse_half_steps

    return Player(
        player_id=pid,
        name=name or pid.upper(),
        role=ROLE_CODES[role] if isinstance(role, str) else role,
        franchise_id=franchise,
        credit_half=parse_half_steps(str(credit)),
    )


def make_pool(composition="2WK 5BAT 3AR 4BOWL", franchises=("F1", "F2"), credit="9"):
    """Pool like '2WK 5BAT 3AR 4BOWL'; players alternate franchises."""
    pool = {}
    i = 0
    for part in composition.split():
        count = int("".join(ch for ch in part if ch.isdigit()))
        code = "".join(ch for ch in part if ch.isalpha())
        for _ in range(count):
            pid = f"p{i:02d}"
            pool[pid] = player(pid, code, franchises[i % len(franchises)], credit)
            i += 1
    return pool


def random_perfs(pool, rng: random.Random):
    """Plausible random stat lines for every player in the pool."""
    out = {}
    for pid, pl in pool.items():
        bats = pl.role in (ROLE_CODES["WK"], ROLE_CODES["BAT"], ROLE_CODES["AR"])
        bowls = pl.role in (ROLE_CODES["AR"], ROLE_CODES["BOWL"])
        runs = rng.randint(0, 80) if bats else rng.randint(0, 25)
        fours = min(runs // 4, rng.randint(0, 8))
        sixes = min((runs - 4 * fours) // 6, rng.randint(0, 4))
        balls = max(runs // 2, 1) if runs else rng.randint(0, 5)
        wkts = rng.randint(0, 4) if bowls else 0
        legal = rng.choice([0, 6, 12, 18, 24]) if bowls else 0
        if wkts and not legal:
            legal = 12
        rc = rng.randint(0, max(1, 2 * legal)) if legal else 0
        out[pid] = perf(
            pid,
            runs=runs, balls=balls, fours=fours, sixes=sixes,
            out=rng.random() < 0.5 and bats,
            legal=legal, maidens=rng.randint(0, legal // 12) if legal else 0,
            rc=rc, wkts=wkts, blbw=rng.randint(0, wkts) if wkts else 0,
            catches=rng.randint(0, 2), st=0, rod=0, roi=rng.randint(0, 1),
        )
    return out


@pytest.fixture
def rng():
    return random.Random(20230516)
