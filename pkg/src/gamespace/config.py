"""Experiment configuration: a YAML file overlaid on a named scale preset.

Schema (every key optional except ``seed``; unknown keys are errors)::

    seed: 12345                    # master seed
    out: results                   # output directory
    workers: 1                     # process pool size
    games: [dotsandboxes, loveletter, uno, diamant]
    player_counts: [2, 3, 4]
    opponents: [RND, OSLA, SimpleMCTS]
    roster: null                   # path to a YAML list of agent specs, null = built-in 16
    budgets:
      mcts_iterations: 128         # roster / NTBEA candidate agents
      opponent_iterations: 64      # SimpleMCTS opponent
      mcts_ms: null                # wall-clock budgets override iterations when set
      opponent_ms: null
    attributes: {games: 100, batches: 10}
    performance: {games: 100}
    roundrobin: {games_per_agent: 500}
    ntbea: {runs: 10, iterations: 300, neighbours: 50, kappa: 2.0}
    analysis:
      reps: 200
      quantile: 0.99               # null = mean random eigenvalue
      alpha: 0.05
      cca: [[attributes, ntbea], [attributes, performance], [ntbea, performance]]
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import yaml

from .agents import FIXED_OPPONENTS
from .games import GAME_IDS, PLAYER_COUNTS

SPACES = ("attributes", "ntbea", "performance", "roundrobin")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


_DESK = {
    "seed": None,
    "out": "results",
    "workers": 1,
    "games": list(GAME_IDS),
    "player_counts": list(PLAYER_COUNTS),
    "opponents": list(FIXED_OPPONENTS),
    "roster": None,
    "budgets": {"mcts_iterations": 128, "opponent_iterations": 64, "mcts_ms": None, "opponent_ms": None},
    "attributes": {"games": 100, "batches": 10},
    "performance": {"games": 100},
    "roundrobin": {"games_per_agent": 500},
    "ntbea": {"runs": 10, "iterations": 300, "neighbours": 50, "kappa": 2.0},
    "analysis": {
        "reps": 200, "quantile": 0.99, "alpha": 0.05,
        "cca": [["attributes", "ntbea"], ["attributes", "performance"], ["ntbea", "performance"]],
    },
}

_FULL_OVERRIDES = {
    "budgets": {"mcts_ms": 40.0, "opponent_ms": 20.0},
    "attributes": {"games": 1000},
    "performance": {"games": 1000},
    "roundrobin": {"games_per_agent": 10000},
    "ntbea": {"runs": 30, "iterations": 4800},
}

SCALES = ("desk", "full")


def scale_defaults(scale: str = "desk") -> dict:
    if scale not in SCALES:
        raise ConfigError(f"scale: unknown scale {scale!r}; choose from {SCALES}")
    cfg = copy.deepcopy(_DESK)
    if scale == "full":
        _merge(cfg, copy.deepcopy(_FULL_OVERRIDES), "")
    return cfg


def _merge(base: dict, over: dict, path: str):
    for k, v in over.items():
        where = f"{path}.{k}" if path else str(k)
        if k not in base:
            raise ConfigError(f"{where}: unknown key")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where}: expected a mapping")
            _merge(base[k], v, where)
        else:
            base[k] = v


def _int(cfg, path, lo=None, allow_none=False):
    v = _get(cfg, path)
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}: must be >= {lo}")


def _num(cfg, path, lo=None, hi=None, allow_none=False):
    v = _get(cfg, path)
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {v!r}")
    if lo is not None and v <= lo:
        raise ConfigError(f"{path}: must be > {lo}")
    if hi is not None and v >= hi:
        raise ConfigError(f"{path}: must be < {hi}")


def _get(cfg, path):
    node = cfg
    for part in path.split("."):
        node = node[part]
    return node


def _subset(cfg, path, allowed):
    v = _get(cfg, path)
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a non-empty list")
    for x in v:
        if x not in allowed:
            raise ConfigError(f"{path}: {x!r} not in {list(allowed)}")
    if len(set(v)) != len(v):
        raise ConfigError(f"{path}: duplicate entries")


def validate(cfg: dict) -> dict:
    if cfg.get("seed") is None:
        raise ConfigError("seed: a master seed is required")
    _int(cfg, "seed", 0)
    if not isinstance(cfg["out"], str) or not cfg["out"]:
        raise ConfigError("out: expected a directory path")
    _int(cfg, "workers", 1)
    _subset(cfg, "games", GAME_IDS)
    _subset(cfg, "player_counts", PLAYER_COUNTS)
    _subset(cfg, "opponents", FIXED_OPPONENTS)
    if cfg["roster"] is not None and not isinstance(cfg["roster"], str):
        raise ConfigError("roster: expected a file path or null")
    _int(cfg, "budgets.mcts_iterations", 1)
    _int(cfg, "budgets.opponent_iterations", 1)
    _num(cfg, "budgets.mcts_ms", 0, allow_none=True)
    _num(cfg, "budgets.opponent_ms", 0, allow_none=True)
    _int(cfg, "attributes.games", 2)
    _int(cfg, "attributes.batches", 1)
    _int(cfg, "performance.games", 1)
    _int(cfg, "roundrobin.games_per_agent", 1)
    _int(cfg, "ntbea.runs", 1)
    _int(cfg, "ntbea.iterations", 1)
    _int(cfg, "ntbea.neighbours", 1)
    _num(cfg, "ntbea.kappa")
    if cfg["ntbea"]["kappa"] < 0:
        raise ConfigError("ntbea.kappa: must be >= 0")
    _int(cfg, "analysis.reps", 20)
    _num(cfg, "analysis.quantile", 0.0, 1.0, allow_none=True)
    _num(cfg, "analysis.alpha", 0.0, 1.0)
    pairs = cfg["analysis"]["cca"]
    if not isinstance(pairs, list):
        raise ConfigError("analysis.cca: expected a list of [space, space] pairs")
    for pair in pairs:
        if not (isinstance(pair, list) and len(pair) == 2 and all(s in SPACES for s in pair)):
            raise ConfigError(f"analysis.cca: bad pair {pair!r}; spaces are {list(SPACES)}")
    return cfg


def make_config(overrides: dict | None = None, scale: str = "desk") -> dict:
    cfg = scale_defaults(scale)
    if overrides:
        if not isinstance(overrides, dict):
            raise ConfigError("config: top level must be a mapping")
        _merge(cfg, overrides, "")
    return validate(cfg)


def load_config(path=None, scale: str = "desk", seed: int | None = None, out: str | None = None) -> dict:
    """Scale preset, then the file, then command-line overrides."""
    over = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
        try:
            over = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
        if not isinstance(over, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    if seed is not None:
        over["seed"] = seed
    if out is not None:
        over["out"] = out
    try:
        return make_config(over, scale)
    except ConfigError as exc:
        if path is not None:
            raise ConfigError(f"{path}: {exc}") from exc
        raise


def dump_config(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def parse_config(text: str, scale: str = "desk") -> dict:
    return make_config(yaml.safe_load(text) or {}, scale)


def config_hash(cfg: dict) -> str:
    """Hash of everything that affects results (not ``out`` or ``workers``)."""
    relevant = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    blob = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
