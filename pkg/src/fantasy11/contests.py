"""Contest-entry analytics: ingestion with dedup, distribution statistics,
wisdom-of-crowds team construction, and the exact best-possible-team solver.

Designed for millions of rows: ingestion is a single streaming pass whose
memory is bounded by the number of *unique* teams, and every statistic is
multiplicity-weighted so the unique store stands in for the raw stream.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from io import TextIOBase
from math import lcm
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .domain import TEAM_SIZE, FantasyTeam, Player, PlayerMatchPerformance, PlayerRole
from .errors import (
    DegenerateSampleError,
    Fantasy11Error,
    InfeasibleError,
    IngestError,
    MissingPerformanceError,
)
from .rules import RulesSchema, repair_team, validate_team
from .scoring import ScoringSchema, TeamScore, optimal_captains, score_player, score_team

EntrySource = Union[str, Path, IO[str], Iterable[str]]


@dataclass(frozen=True, slots=True)
class UniqueEntry:
    signature: bytes
    team: FantasyTeam
    multiplicity: int


@dataclass(frozen=True, slots=True)
class MalformedLine:
    lineno: int
    code: str


@dataclass(frozen=True)
class ContestEntrySet:
    """Deduplicated entry population; multiplicities preserve the raw counts."""

    raw_count: int
    unique: tuple[UniqueEntry, ...]
    source_digest: str
    malformed: tuple[MalformedLine, ...] = ()

    @cached_property
    def by_signature(self) -> Mapping[bytes, UniqueEntry]:
        return {u.signature: u for u in self.unique}

    @property
    def unique_count(self) -> int:
        return len(self.unique)


def _iter_lines(source: EntrySource) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8", newline="") as fh:
                yield from fh
        except OSError as exc:
            raise IngestError(f"cannot read {source}: {exc}") from None
    elif isinstance(source, TextIOBase) or hasattr(source, "read"):
        yield from source  # type: ignore[misc]
    else:
        yield from source  # type: ignore[misc]


def ingest_entries(
    source: EntrySource, *, malformed_threshold: float = 0.05
) -> ContestEntrySet:
    """Stream entry lines into a deduplicated set.

    Line format: ``entry_id,p1;p2;...;p11,captain_id,vc_id``. Malformed
    lines are recorded (not fatal) unless their fraction exceeds
    ``malformed_threshold``, in which case the whole ingest aborts.
    """
    digest = hashlib.sha256()
    counts: dict[bytes, int] = {}
    teams: dict[bytes, FantasyTeam] = {}
    malformed: list[MalformedLine] = []
    total = 0
    raw_count = 0

    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
        total += 1
        parts = line.split(",")
        if len(parts) != 4:
            malformed.append(MalformedLine(lineno, "FieldCount"))
            continue
        entry_id, ids_field, captain, vice = parts
        if not entry_id or not captain or not vice:
            malformed.append(MalformedLine(lineno, "EmptyField"))
            continue
        ids = ids_field.split(";")
        if len(ids) != TEAM_SIZE or not all(ids):
            malformed.append(MalformedLine(lineno, "PlayerCount"))
            continue
        ordered = sorted(ids)
        if any(a == b for a, b in zip(ordered, ordered[1:])):
            malformed.append(MalformedLine(lineno, "DuplicatePlayers"))
            continue
        if captain == vice:
            malformed.append(MalformedLine(lineno, "CaptainViceCaptainSame"))
            continue
        if captain not in ids or vice not in ids:
            malformed.append(MalformedLine(lineno, "CaptainOutsideTeam"))
            continue
        key = hashlib.sha256(
            "|".join((captain, vice, ";".join(ordered))).encode("utf-8")
        ).digest()
        raw_count += 1
        if key in counts:
            counts[key] += 1
        else:
            counts[key] = 1
            teams[key] = FantasyTeam(ids, captain, vice)

    if total and len(malformed) / total > malformed_threshold:
        raise IngestError(
            f"{len(malformed)} of {total} lines malformed "
            f"(threshold {malformed_threshold:.2%})"
        )
    unique = tuple(
        UniqueEntry(sig, teams[sig], counts[sig]) for sig in sorted(counts)
    )
    return ContestEntrySet(
        raw_count=raw_count,
        unique=unique,
        source_digest=digest.hexdigest(),
        malformed=tuple(malformed),
    )


def write_entries(entry_set: ContestEntrySet, path: str | Path) -> None:
    """Serialize the unique teams back to the entry line format (one line per
    unique team, synthetic entry ids)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, entry in enumerate(entry_set.unique):
            team = entry.team
            fh.write(
                f"u{i:07d},{';'.join(team.sorted_players())},"
                f"{team.captain},{team.vice_captain}\n"
            )


@dataclass(frozen=True, slots=True)
class PickCount:
    as_captain: int = 0
    as_vice_captain: int = 0
    in_team: int = 0


@dataclass(frozen=True)
class PickFrequencies:
    counts: Mapping[str, PickCount]

    def get(self, player_id: str) -> PickCount:
        return self.counts.get(player_id, PickCount())


def pick_frequencies(entry_set: ContestEntrySet) -> PickFrequencies:
    """Multiplicity-weighted captain/vice/membership tallies."""
    as_c: dict[str, int] = {}
    as_v: dict[str, int] = {}
    in_t: dict[str, int] = {}
    for entry in entry_set.unique:
        m = entry.multiplicity
        as_c[entry.team.captain] = as_c.get(entry.team.captain, 0) + m
        as_v[entry.team.vice_captain] = as_v.get(entry.team.vice_captain, 0) + m
        for pid in entry.team.players:
            in_t[pid] = in_t.get(pid, 0) + m
    return PickFrequencies(
        {
            pid: PickCount(as_c.get(pid, 0), as_v.get(pid, 0), in_t.get(pid, 0))
            for pid in sorted(in_t)
        }
    )


def wisdom_of_crowds_team(
    freqs: PickFrequencies,
    rules: RulesSchema,
    pool: Mapping[str, Player],
) -> FantasyTeam:
    """Most-picked captain, most-picked vice (captain excluded), then the
    nine most-picked remaining players; repaired if the result breaks rules.
    All ties break on player id."""
    ids = sorted(pool)
    if len(ids) < rules.total_players:
        raise InfeasibleError(f"pool has {len(ids)} players, need {rules.total_players}")
    captain = min(ids, key=lambda p: (-freqs.get(p).as_captain, p))
    vice = min(
        (p for p in ids if p != captain),
        key=lambda p: (-freqs.get(p).as_vice_captain, p),
    )
    rest = sorted(
        (p for p in ids if p not in (captain, vice)),
        key=lambda p: (-freqs.get(p).in_team, p),
    )[: rules.total_players - 2]
    team = FantasyTeam([captain, vice, *rest], captain, vice)
    if validate_team(team, pool, rules).ok:
        return team
    preference = {pid: float(freqs.get(pid).in_team) for pid in ids}
    return repair_team(team, rules, pool, preference)


@dataclass(frozen=True, slots=True)
class HistogramBin:
    bin_lower: float
    bin_upper: float
    count: int


@dataclass(frozen=True, slots=True)
class ContestSummary:
    n: int
    mean: float
    std: float
    min: float
    max: float
    median: float
    histogram: tuple[HistogramBin, ...]
    ks_statistic: Optional[float]


def _scores_and_weights(
    entry_set: ContestEntrySet, points: Mapping[bytes, object]
) -> tuple[np.ndarray, np.ndarray]:
    values = np.empty(len(entry_set.unique), dtype=float)
    weights = np.empty(len(entry_set.unique), dtype=np.int64)
    for i, entry in enumerate(entry_set.unique):
        if entry.signature not in points:
            raise Fantasy11Error(
                f"no points for signature {entry.signature.hex()[:12]}..."
            )
        values[i] = float(points[entry.signature])
        weights[i] = entry.multiplicity
    return values, weights


def summarize(
    entry_set: ContestEntrySet,
    points: Mapping[bytes, object],
    *,
    bin_width: float = 25.0,
) -> ContestSummary:
    """Multiplicity-weighted distribution statistics over scored entries.

    Median is the lower weighted median; the histogram uses fixed-width bins
    aligned to multiples of ``bin_width``; ``ks_statistic`` is None for a
    degenerate (zero-variance) population.
    """
    if not entry_set.unique:
        raise DegenerateSampleError("empty contest")
    if bin_width <= 0:
        raise Fantasy11Error("bin_width must be positive")
    values, weights = _scores_and_weights(entry_set, points)
    n = int(weights.sum())
    mean = float(np.average(values, weights=weights))
    std = float(math.sqrt(np.average((values - mean) ** 2, weights=weights)))
    vmin = float(values.min())
    vmax = float(values.max())

    order = np.argsort(values, kind="mergesort")
    cum = np.cumsum(weights[order])
    median_idx = int(np.searchsorted(2 * cum, n, side="left"))
    median = float(values[order[median_idx]])

    start = math.floor(vmin / bin_width) * bin_width
    idx = np.clip(np.floor((values - start) / bin_width).astype(np.int64), 0, None)
    nbins = int(idx.max()) + 1
    bin_counts = np.bincount(idx, weights=weights, minlength=nbins).astype(np.int64)
    histogram = tuple(
        HistogramBin(start + i * bin_width, start + (i + 1) * bin_width, int(c))
        for i, c in enumerate(bin_counts)
    )
    try:
        ks = ks_normal_statistic(values, weights)
    except DegenerateSampleError:
        ks = None
    return ContestSummary(
        n=n, mean=mean, std=std, min=vmin, max=vmax,
        median=median, histogram=histogram, ks_statistic=ks,
    )


def percentile_rank(
    score: object, entry_set: ContestEntrySet, points: Mapping[bytes, object]
) -> float:
    """Percent of entries scoring strictly below ``score`` (ties earn no
    half-credit)."""
    if not entry_set.unique:
        raise DegenerateSampleError("empty contest")
    below = 0
    n = 0
    for entry in entry_set.unique:
        if entry.signature not in points:
            raise Fantasy11Error(
                f"no points for signature {entry.signature.hex()[:12]}..."
            )
        n += entry.multiplicity
        if points[entry.signature] < score:  # type: ignore[operator]
            below += entry.multiplicity
    return 100.0 * below / n


def ks_normal_statistic(
    scores: Sequence[float] | np.ndarray,
    weights: Optional[Sequence[int] | np.ndarray] = None,
) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the (weighted) empirical
    CDF and a normal fitted to the sample's own mean and population std.

    The sup runs over both the left and right empirical CDF limits at every
    sample point, so step discontinuities are handled exactly.
    """
    values = np.asarray(scores, dtype=float)
    if weights is None:
        w = np.ones(values.shape, dtype=np.int64)
    else:
        w = np.asarray(weights, dtype=np.int64)
    n = int(w.sum())
    if values.size == 0 or n < 2:
        raise DegenerateSampleError("need at least two observations")
    mean = float(np.average(values, weights=w))
    sigma = float(math.sqrt(np.average((values - mean) ** 2, weights=w)))
    if sigma == 0.0:
        raise DegenerateSampleError("zero variance")

    order = np.argsort(values, kind="mergesort")
    v = values[order]
    cum = np.cumsum(w[order]).astype(float)
    # collapse duplicates: keep the last cumulative weight per distinct value
    keep = np.append(v[1:] != v[:-1], True)
    v_u = v[keep]
    f_right = cum[keep] / n
    f_left = np.concatenate(([0.0], f_right[:-1]))
    z = (v_u - mean) / sigma
    root2 = math.sqrt(2.0)
    phi = np.fromiter((0.5 * (1.0 + math.erf(x / root2)) for x in z), dtype=float)
    return float(max(np.max(np.abs(f_right - phi)), np.max(np.abs(phi - f_left))))


def dream_team(
    pool: Mapping[str, Player],
    perfs: Mapping[str, PlayerMatchPerformance],
    rules: RulesSchema,
    schema: ScoringSchema,
) -> tuple[FantasyTeam, TeamScore]:
    """Exact maximum-score rule-valid team over the pool.

    Depth-first branch and bound over players in descending base-point
    order, with role-quota, franchise-quota, and budget pruning plus an
    optimistic score bound. Captain and vice-captain follow from the
    top-two bases (ties on id); score ties between teams resolve to the
    lexicographically smallest membership. Exact arithmetic throughout:
    bases are rescaled to integers, never floats.
    """
    ids = sorted(pool)
    size = rules.total_players
    if len(ids) < size:
        raise InfeasibleError(f"pool has {len(ids)} players, need {size}")
    for pid in ids:
        if pid not in perfs:
            raise MissingPerformanceError(pid)
    bases = {pid: score_player(perfs[pid], pool[pid].role, schema) for pid in ids}

    scale = 1
    for b in bases.values():
        scale = lcm(scale, b.denominator)
    dc = schema.captain_multiplier - 1
    dv = schema.vice_captain_multiplier - 1
    mult_scale = lcm(dc.denominator, dv.denominator)
    mc = int(dc * mult_scale)
    mv = int(dv * mult_scale)

    players = sorted(ids, key=lambda pid: (-bases[pid], pid))
    n = len(players)
    b_int = [int(bases[pid] * scale) for pid in players]
    role_idx = {role: k for k, role in enumerate(rules.role_bounds)}
    p_role = [role_idx[pool[pid].role] for pid in players]
    p_franchise = [pool[pid].franchise_id for pid in players]
    p_credit = [pool[pid].credit_half for pid in players]
    role_min = [rules.role_bounds[r].min for r in role_idx]
    role_max = [rules.role_bounds[r].max for r in role_idx]
    budget = rules.credit_budget_half
    franchise_cap = rules.max_per_franchise

    prefix = [0] * (n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] + b_int[i]
    suffix_role = [[0] * len(role_idx) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for k in range(len(role_idx)):
            suffix_role[i][k] = suffix_role[i + 1][k] + (1 if p_role[i] == k else 0)

    NEG = float("-inf")
    best_score: Optional[int] = None
    best_members: Optional[tuple[str, ...]] = None
    picked: list[int] = []

    def leaf_score(sum_b: int, top1: int, top2: int) -> int:
        return mult_scale * sum_b + mc * top1 + mv * top2

    def dfs(i: int, count: int, role_counts: list[int], fr_counts: dict[str, int],
            credit: int, sum_b: int, top1: float, top2: float) -> None:
        nonlocal best_score, best_members
        if count == size:
            if any(role_counts[k] < role_min[k] for k in range(len(role_idx))):
                return
            score = leaf_score(sum_b, int(top1), int(top2))
            members = tuple(sorted(players[j] for j in picked))
            if (
                best_score is None
                or score > best_score
                or (score == best_score and members < best_members)  # type: ignore[operator]
            ):
                best_score = score
                best_members = members
            return
        need = size - count
        if n - i < need:
            return
        deficit = 0
        for k in range(len(role_idx)):
            short = role_min[k] - role_counts[k]
            if short > suffix_role[i][k]:
                return
            if short > 0:
                deficit += short
        if deficit > need:
            return
        if best_score is not None:
            bound_sum = sum_b + prefix[i + need] - prefix[i]
            cands = [top1, top2, float(b_int[i])]
            if need >= 2 and i + 1 < n:
                cands.append(float(b_int[i + 1]))
            cands.sort(reverse=True)
            m1 = int(cands[0]) if cands[0] != NEG else 0
            m2 = int(cands[1]) if cands[1] != NEG else 0
            if mult_scale * bound_sum + mc * m1 + mv * m2 < best_score:
                return
        # branch: pick player i
        r = p_role[i]
        fid = p_franchise[i]
        if (
            role_counts[r] < role_max[r]
            and fr_counts.get(fid, 0) < franchise_cap
            and credit + p_credit[i] <= budget
        ):
            role_counts[r] += 1
            fr_counts[fid] = fr_counts.get(fid, 0) + 1
            picked.append(i)
            nb = float(b_int[i])
            nt1, nt2 = (nb, top1) if nb > top1 else (top1, max(top2, nb))
            dfs(i + 1, count + 1, role_counts, fr_counts,
                credit + p_credit[i], sum_b + b_int[i], nt1, nt2)
            picked.pop()
            role_counts[r] -= 1
            fr_counts[fid] -= 1
        # branch: skip player i
        dfs(i + 1, count, role_counts, fr_counts, credit, sum_b, top1, top2)

    dfs(0, 0, [0] * len(role_idx), {}, 0, 0, NEG, NEG)
    if best_members is None:
        raise InfeasibleError("no rule-valid team exists for this pool")

    member_bases = {pid: bases[pid] for pid in best_members}
    captain, vice = optimal_captains(member_bases)
    team = FantasyTeam(best_members, captain, vice)
    roles = {pid: pool[pid].role for pid in best_members}
    return team, score_team(team, perfs, roles, schema)


def score_entries(
    entry_set: ContestEntrySet,
    perfs: Mapping[str, PlayerMatchPerformance],
    roles: Mapping[str, PlayerRole],
    schema: ScoringSchema,
) -> dict[bytes, Fraction]:
    """Score every unique team once; returns signature -> exact total."""
    base_cache: dict[str, Fraction] = {}

    def base(pid: str) -> Fraction:
        if pid not in base_cache:
            if pid not in perfs:
                raise MissingPerformanceError(pid)
            base_cache[pid] = score_player(perfs[pid], roles[pid], schema)
        return base_cache[pid]

    dc = schema.captain_multiplier - 1
    dv = schema.vice_captain_multiplier - 1
    out: dict[bytes, Fraction] = {}
    for entry in entry_set.unique:
        team = entry.team
        total = sum((base(pid) for pid in team.players), Fraction(0))
        total += dc * base(team.captain) + dv * base(team.vice_captain)
        out[entry.signature] = total
    return out
