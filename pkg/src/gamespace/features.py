"""The four 16-feature extractors and the feature-matrix CSV format."""

from __future__ import annotations

import csv
import json
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .agents import DEFAULT_OPPONENT_BUDGET, FIXED_OPPONENTS, AgentSpec, default_roster, fixed_opponent
from .ntbea import Fingerprint, fingerprint_feature_names
from .rng import child_rng
from .runner import play_game

N_FEATURES = 16

ATTRIBUTE_NAMES = [
    "copy_time", "fm_time", "decisions_mean", "decisions_cov",
    "components_start", "components_mean", "components_cov",
    "hidden_start", "hidden_mean", "hidden_cov",
    "actions_mean", "actions_cov", "actions_max_mean", "actions_skew",
    "score_mean", "score_cov",
]
TIMING_FEATURES = ("copy_time", "fm_time")


class DegenerateStatistic(UserWarning):
    pass


class SpaceMismatch(ValueError):
    pass


class RosterTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class EnvKey:
    game: str
    players: int
    opponent: str | None = None

    def label(self) -> str:
        return f"{self.game}/{self.players}p" + (f"/{self.opponent}" if self.opponent else "")


@dataclass
class FeatureRow:
    env: EnvKey
    values: list
    names: list
    games: int = 0
    seed: int = 0

    def __post_init__(self):
        if len(self.values) != N_FEATURES or len(self.names) != N_FEATURES:
            raise ValueError(f"a feature row has exactly {N_FEATURES} features")
        self.values = [float(v) for v in self.values]
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("feature values must be finite")

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- game attributes ---------------------------------------------------------------------

def cov(values, what: str = "") -> float:
    """Population standard deviation over mean; 0 (with a warning) if the mean is 0."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return 0.0
    m = float(x.mean())
    if m == 0.0:
        warnings.warn(f"zero mean in coefficient of variation{' of ' + what if what else ''}",
                      DegenerateStatistic, stacklevel=2)
        return 0.0
    return float(x.std() / m)


def _median_of_batch_means(totals, counts, batches: int) -> float:
    n = len(totals)
    k = max(1, min(batches, n))
    bounds = np.linspace(0, n, k + 1).round().astype(int)
    means = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        c = sum(counts[lo:hi])
        if c:
            means.append(sum(totals[lo:hi]) / c)
    return float(statistics.median(means)) if means else 0.0


def attribute_features(telemetries: list, batches: int = 10) -> list:
    """Sixteen game-attribute statistics from per-game telemetry."""
    if len(telemetries) < 2:
        raise ValueError("game attributes need at least two games")
    copy_t = _median_of_batch_means([t.copy_time_total for t in telemetries],
                                    [t.copy_count for t in telemetries], batches)
    fm_t = _median_of_batch_means([t.fm_time_total for t in telemetries],
                                  [t.fm_count for t in telemetries], batches)
    decisions = [t.decisions for t in telemetries]
    played = [t for t in telemetries if t.decisions > 0]
    if not played:
        raise ValueError("no decisions were recorded")

    def per_game(attr, fn):
        return float(np.mean([fn(getattr(t, attr)) for t in played]))

    pooled_actions = np.concatenate([np.asarray(t.action_space_size, dtype=float) for t in played])
    if pooled_actions.size >= 3 and pooled_actions.std() > 0:
        skew = float(sps.skew(pooled_actions, bias=False))
    else:
        skew = 0.0
    return [
        copy_t,
        fm_t,
        float(np.mean(decisions)),
        cov(decisions, "decisions"),
        per_game("component_count", lambda s: s[0]),
        per_game("component_count", np.mean),
        per_game("component_count", lambda s: cov(s, "component count")),
        per_game("hidden_fraction", lambda s: s[0]),
        per_game("hidden_fraction", np.mean),
        per_game("hidden_fraction", lambda s: cov(s, "hidden fraction")),
        per_game("action_space_size", np.mean),
        per_game("action_space_size", lambda s: cov(s, "action space")),
        per_game("action_space_size", max),
        skew,
        per_game("score", np.mean),
        per_game("score", lambda s: cov(s, "score")),
    ]


def _attribute_game(job):
    game, players, opponent, seed, i, opp_budget, opp_ms = job
    spec = fixed_opponent(opponent, opp_budget, opp_ms)
    return play_game(game, [spec] * players, seed, "attributes", game, players, opponent, i).telemetry


def game_attribute_row(env: EnvKey, games_n: int, seed: int, opponent_budget: int = DEFAULT_OPPONENT_BUDGET,
                       batches: int = 10, workers: int = 1, opponent_ms: float | None = None) -> FeatureRow:
    """Every seat plays ``env.opponent``; statistics over ``games_n`` games."""
    if games_n < 2:
        raise ValueError("games_n must be >= 2")
    jobs = [(env.game, env.players, env.opponent, seed, i, opponent_budget, opponent_ms) for i in range(games_n)]
    tels = _pmap(_attribute_game, jobs, workers)
    return FeatureRow(env, attribute_features(tels, batches), list(ATTRIBUTE_NAMES), games_n, seed)


# -- fingerprints ------------------------------------------------------------------------

def ntbea_row(env: EnvKey, fp: Fingerprint) -> FeatureRow:
    names = fingerprint_feature_names()
    if fp.game and (fp.game, fp.players, fp.opponent) != (env.game, env.players, env.opponent):
        raise SpaceMismatch(f"fingerprint for {fp.game}/{fp.players}/{fp.opponent} does not match {env.label()}")
    feats = fp.features()
    if len(feats) != len(names):
        raise SpaceMismatch(f"fingerprint has {len(feats)} features, expected {len(names)}")
    return FeatureRow(env, feats, names, fp.runs, fp.seed)


# -- win rates ---------------------------------------------------------------------------

def _performance_game(job):
    game, players, agent, opp, seed, coords = job
    res = play_game(game, [agent] + [opp] * (players - 1), seed, *coords)
    return res.credit(res.seats.index(0))


def agent_performance_row(env: EnvKey, roster: list, games_n: int, seed: int,
                          opponent_budget: int = DEFAULT_OPPONENT_BUDGET, workers: int = 1,
                          opponent_ms: float | None = None) -> FeatureRow:
    """Win rate of each roster agent in one random seat against ``env.opponent``."""
    if games_n < 1:
        raise ValueError("games_n must be >= 1")
    if len(roster) != N_FEATURES:
        raise ValueError(f"roster must have {N_FEATURES} agents")
    opp = fixed_opponent(env.opponent, opponent_budget, opponent_ms)
    jobs = [(env.game, env.players, agent, opp, seed,
             ("performance", env.game, env.players, env.opponent, a, i))
            for a, agent in enumerate(roster) for i in range(games_n)]
    credits = _pmap(_performance_game, jobs, workers)
    rates = [sum(credits[a * games_n:(a + 1) * games_n]) / games_n for a in range(len(roster))]
    return FeatureRow(env, rates, [a.name for a in roster], games_n, seed)


def round_robin_schedule(roster_size: int, players: int, games_per_agent: int, rng) -> list:
    """Random line-ups of distinct agents until every agent has enough games."""
    if roster_size < players:
        raise RosterTooSmall(f"roster of {roster_size} cannot fill {players} seats")
    counts = [0] * roster_size
    schedule = []
    while min(counts) < games_per_agent:
        lineup = rng.sample(range(roster_size), players)
        for a in lineup:
            counts[a] += 1
        schedule.append(lineup)
    return schedule


def _rr_game(job):
    game, specs, lineup, seed, coords = job
    res = play_game(game, specs, seed, *coords)
    return [(lineup[idx], res.credit(seat)) for seat, idx in enumerate(res.seats)]


def round_robin_rows(game: str, player_count: int, roster: list, games_per_agent: int, seed: int,
                     workers: int = 1) -> FeatureRow:
    """Win rates from a random-line-up tournament among the roster."""
    if len(roster) < player_count:
        raise RosterTooSmall(f"roster of {len(roster)} cannot fill {player_count} seats")
    rng = child_rng(seed, "roundrobin", game, player_count, "schedule")
    schedule = round_robin_schedule(len(roster), player_count, games_per_agent, rng)
    jobs = [(game, [roster[a] for a in lineup], lineup, seed, ("roundrobin", game, player_count, g))
            for g, lineup in enumerate(schedule)]
    wins = [0.0] * len(roster)
    played = [0] * len(roster)
    for result in _pmap(_rr_game, jobs, workers):
        for a, c in result:
            wins[a] += c
            played[a] += 1
    rates = [w / n if n else 0.0 for w, n in zip(wins, played)]
    names = [a.name for a in roster]
    if len(rates) != N_FEATURES:
        raise ValueError(f"roster must have {N_FEATURES} agents")
    return FeatureRow(EnvKey(game, player_count, None), rates, names, min(played), seed)


# -- CSV ---------------------------------------------------------------------------------

FEATURE_COLUMNS = [f"f{i:02d}" for i in range(1, N_FEATURES + 1)]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_feature_csv(rows: list, path, space: str = "") -> Path:
    """Write rows plus a ``.json`` sidecar with feature names and row metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = rows[0].names if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["game", "players", "opponent"] + FEATURE_COLUMNS)
        for r in rows:
            if r.names != names:
                raise ValueError("rows disagree on feature names")
            w.writerow([r.env.game, r.env.players, r.env.opponent or ""] + [_fmt(v) for v in r.values])
    side = {
        "space": space,
        "features": dict(zip(FEATURE_COLUMNS, names)),
        "rows": [{"games": r.games, "seed": r.seed} for r in rows],
    }
    sidecar_path(path).write_text(json.dumps(side, indent=1, sort_keys=True) + "\n")
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(".json")


def read_feature_csv(path) -> list:
    path = Path(path)
    side_file = sidecar_path(path)
    side = json.loads(side_file.read_text()) if side_file.exists() else {}
    names = [side.get("features", {}).get(c, c) for c in FEATURE_COLUMNS]
    meta = side.get("rows", [])
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["game", "players", "opponent"] + FEATURE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for i, rec in enumerate(reader):
            env = EnvKey(rec["game"], int(rec["players"]), rec["opponent"] or None)
            m = meta[i] if i < len(meta) else {}
            rows.append(FeatureRow(env, [float(rec[c]) for c in FEATURE_COLUMNS], names,
                                   m.get("games", 0), m.get("seed", 0)))
    return rows


def rows_to_matrix(rows: list, drop: tuple = ()):
    """``DataMatrix`` of the rows, optionally without some named features."""
    from .analysis import DataMatrix

    names = rows[0].names
    keep = [i for i, n in enumerate(names) if n not in drop]
    values = np.array([[r.values[i] for i in keep] for r in rows], dtype=float)
    labels = [(r.env.game, r.env.players, r.env.opponent) for r in rows]
    return DataMatrix(values, [names[i] for i in keep], labels)


__all__ = [
    "ATTRIBUTE_NAMES", "TIMING_FEATURES", "N_FEATURES", "FEATURE_COLUMNS", "FIXED_OPPONENTS",
    "DegenerateStatistic", "SpaceMismatch", "RosterTooSmall", "EnvKey", "FeatureRow",
    "attribute_features", "cov", "game_attribute_row", "ntbea_row", "agent_performance_row",
    "round_robin_schedule", "round_robin_rows", "write_feature_csv", "read_feature_csv",
    "sidecar_path", "rows_to_matrix", "default_roster", "AgentSpec",
]
