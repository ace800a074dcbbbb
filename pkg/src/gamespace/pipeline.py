"""Pipeline stages behind the command-line interface.

Each data stage is split into units (one per feature row).  Finished
units are cached under ``units/<stage>/`` and listed in the manifest, so
``resume=True`` skips them; a stage completed under the same config hash
is skipped entirely.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import yaml

from .agents import AgentSpec, default_roster
from .config import config_hash, dump_config
from .features import (
    EnvKey, FeatureRow, agent_performance_row, game_attribute_row, ntbea_row, round_robin_rows,
    write_feature_csv,
)
from .manifest import Manifest
from .ntbea import Fingerprint, fingerprint

log = logging.getLogger("gamespace")

DATA_STAGES = ("attributes", "fingerprint", "performance", "roundrobin")
SPACE_FILES = {"attributes": "attributes.csv", "ntbea": "ntbea.csv",
               "performance": "performance.csv", "roundrobin": "roundrobin.csv"}


class Context:
    def __init__(self, cfg: dict, resume: bool = False):
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.resume = resume
        self.hash = config_hash(cfg)
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "config.yaml").write_text(dump_config(cfg))
        self.manifest = Manifest(self.out, self.hash)
        self.manifest.save()

    @property
    def seed(self) -> int:
        return self.cfg["seed"]

    def envs(self):
        for g in self.cfg["games"]:
            for p in self.cfg["player_counts"]:
                for o in self.cfg["opponents"]:
                    yield EnvKey(g, p, o)

    def roster(self) -> list:
        b = self.cfg["budgets"]
        path = self.cfg["roster"]
        if path is None:
            return default_roster(b["mcts_iterations"], b["mcts_ms"])
        specs = yaml.safe_load(Path(path).read_text())
        if not isinstance(specs, list):
            raise ValueError(f"{path}: roster file must be a list of agent specs")
        return [AgentSpec.from_dict(d) for d in specs]


def _unit_name(env: EnvKey) -> str:
    return f"{env.game}_{env.players}p" + (f"_{env.opponent}" if env.opponent else "")


def _row_to_json(row: FeatureRow) -> dict:
    return {"game": row.env.game, "players": row.env.players, "opponent": row.env.opponent,
            "values": row.values, "names": row.names, "games": row.games, "seed": row.seed}


def _row_from_json(d: dict) -> FeatureRow:
    return FeatureRow(EnvKey(d["game"], d["players"], d["opponent"]), d["values"], d["names"],
                      d["games"], d["seed"])


def _run_units(ctx: Context, stage: str, units: list, compute) -> list:
    """``units`` is a list of (name, arg); ``compute(arg)`` returns a FeatureRow."""
    unit_dir = ctx.out / "units" / stage
    unit_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for name, arg in units:
        f = unit_dir / f"{name}.json"
        if ctx.resume and ctx.manifest.unit_done(stage, name) and f.exists():
            rows.append(_row_from_json(json.loads(f.read_text())))
            continue
        log.info("%s: %s", stage, name)
        row = compute(arg)
        f.write_text(json.dumps(_row_to_json(row), sort_keys=True) + "\n")
        ctx.manifest.mark_unit(stage, name)
        rows.append(row)
    return rows


def _begin(ctx: Context, stage: str) -> bool:
    """False when the stage can be skipped."""
    if ctx.resume and ctx.manifest.is_complete(stage):
        log.info("%s: already complete, nothing to do", stage)
        return False
    if not ctx.resume:
        ctx.manifest.reset_stage(stage)
    return True


def run_attributes(ctx: Context) -> Path:
    path = ctx.out / SPACE_FILES["attributes"]
    if not _begin(ctx, "attributes"):
        return path
    c, b = ctx.cfg, ctx.cfg["budgets"]
    rows = _run_units(ctx, "attributes", [(_unit_name(e), e) for e in ctx.envs()],
                      lambda e: game_attribute_row(e, c["attributes"]["games"], ctx.seed,
                                                   b["opponent_iterations"], c["attributes"]["batches"],
                                                   c["workers"], b["opponent_ms"]))
    write_feature_csv(rows, path, "attributes")
    ctx.manifest.complete("attributes", [path, path.with_suffix(".json")])
    return path


def run_fingerprint(ctx: Context) -> Path:
    path = ctx.out / SPACE_FILES["ntbea"]
    if not _begin(ctx, "fingerprint"):
        return path
    c, b, nt = ctx.cfg, ctx.cfg["budgets"], ctx.cfg["ntbea"]
    fp_dir = ctx.out / "fingerprints"
    log_dir = ctx.out / "ntbea_logs"
    fp_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def compute(env):
        fp = fingerprint(env.game, env.players, env.opponent, nt["runs"], nt["iterations"], ctx.seed,
                         b["mcts_iterations"], nt["neighbours"], nt["kappa"], b["opponent_iterations"],
                         b["mcts_ms"], b["opponent_ms"], log_dir=log_dir)
        fp.save(fp_dir / f"{_unit_name(env)}.json")
        return ntbea_row(env, fp)

    envs = list(ctx.envs())
    rows = _run_units(ctx, "fingerprint", [(_unit_name(e), e) for e in envs], compute)
    written += [fp_dir / f"{_unit_name(e)}.json" for e in envs]
    written += sorted(log_dir.glob("*.csv"))
    write_feature_csv(rows, path, "ntbea")
    ctx.manifest.complete("fingerprint", [path, path.with_suffix(".json")] + written)
    return path


def run_performance(ctx: Context) -> Path:
    path = ctx.out / SPACE_FILES["performance"]
    if not _begin(ctx, "performance"):
        return path
    c, b = ctx.cfg, ctx.cfg["budgets"]
    roster = ctx.roster()
    rows = _run_units(ctx, "performance", [(_unit_name(e), e) for e in ctx.envs()],
                      lambda e: agent_performance_row(e, roster, c["performance"]["games"], ctx.seed,
                                                      b["opponent_iterations"], c["workers"], b["opponent_ms"]))
    write_feature_csv(rows, path, "performance")
    ctx.manifest.complete("performance", [path, path.with_suffix(".json")])
    return path


def run_roundrobin(ctx: Context) -> Path:
    path = ctx.out / SPACE_FILES["roundrobin"]
    if not _begin(ctx, "roundrobin"):
        return path
    c = ctx.cfg
    roster = ctx.roster()
    units = [(f"{g}_{p}p", (g, p)) for g in c["games"] for p in c["player_counts"]]
    rows = _run_units(ctx, "roundrobin", units,
                      lambda gp: round_robin_rows(gp[0], gp[1], roster, c["roundrobin"]["games_per_agent"],
                                                  ctx.seed, c["workers"]))
    write_feature_csv(rows, path, "roundrobin")
    ctx.manifest.complete("roundrobin", [path, path.with_suffix(".json")])
    return path


def run_analyze(ctx: Context, spaces: list | None = None, cca_pairs: list | None = None,
                plots: bool = True) -> list:
    from . import report

    a = ctx.cfg["analysis"]
    out = ctx.out / "analysis"
    files = []
    available = [s for s, f in SPACE_FILES.items() if (ctx.out / f).exists()]
    spaces = available if spaces is None else spaces
    if not spaces:
        raise FileNotFoundError(f"no feature CSVs found in {ctx.out}")
    for s in spaces:
        csv_path = ctx.out / SPACE_FILES[s]
        if not csv_path.exists():
            raise FileNotFoundError(f"{csv_path}: run the {s} stage first")
        files += report.analyze_space(csv_path, s, out / s, ctx.seed, a["reps"], a["quantile"])["files"]
    pairs = a["cca"] if cca_pairs is None else cca_pairs
    for x, y in pairs:
        px, py = ctx.out / SPACE_FILES[x], ctx.out / SPACE_FILES[y]
        if cca_pairs is None and not (px.exists() and py.exists()):
            continue
        files += report.analyze_cca(px, py, x, y, out / f"cca_{x}_{y}")["files"]
    fp_dir = ctx.out / "fingerprints"
    if fp_dir.exists():
        files += report.analyze_fingerprints(fp_dir, out / "homogeneity.csv", a["alpha"])["files"]
    ctx.manifest.complete("analyze", files)
    if plots:
        files += run_plot(ctx)
    return files


def run_plot(ctx: Context) -> list:
    from . import plotting

    src = ctx.out / "analysis"
    dst = ctx.out / "plots"
    if not src.exists():
        raise FileNotFoundError(f"{src}: run the analyze stage first")
    files = []
    for space in SPACE_FILES:
        d = src / space
        if not (d / "scores.csv").exists():
            continue
        files.append(plotting.scatter(d / "scores.csv", dst / f"{space}_pca.svg", False, f"{space}: PCA"))
        files.append(plotting.scatter(d / "scores.csv", dst / f"{space}_rotated.svg", True,
                                      f"{space}: rotated components"))
        files.append(plotting.scree(d / "scree.csv", dst / f"{space}_scree.svg", f"{space}: scree"))
        files.append(plotting.loadings(d / "pca_loadings.csv", dst / f"{space}_loadings.svg",
                                       f"{space}: loadings"))
    for d in sorted(src.glob("cca_*")):
        f = d / "cca_loadings.csv"
        if f.exists():
            files.append(plotting.cca_circle(f, dst / f"{d.name}.svg", d.name.replace("_", " ")))
    fp_dir = ctx.out / "fingerprints"
    if fp_dir.exists():
        groups = {}
        for p in sorted(fp_dir.glob("*.json")):
            fp = Fingerprint.load(p)
            groups.setdefault((fp.game, fp.opponent), []).append(fp)
        for (game, opp), fps in sorted(groups.items()):
            files.append(plotting.fingerprint_facets(fps, dst / f"fingerprint_{game}_{opp}.svg",
                                                     f"{game} vs {opp}"))
    ctx.manifest.complete("plot", files)
    return files
