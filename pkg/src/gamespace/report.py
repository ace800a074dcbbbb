"""Analysis stage: run the statistics over feature CSVs and write report files."""

from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path

import numpy as np

from .analysis import (
    DegenerateGroups, RowCountMismatch, bonferroni, cca, homogeneity_test, mann_whitney_clustering,
    parallel_analysis, pca, standardize,
)
from .features import read_feature_csv, rows_to_matrix
from .ntbea import Fingerprint, _FP_DIMS, marginal_homogeneity_table
from .rng import child_generator

GROUPINGS = (("game", 0), ("players", 1), ("opponent", 2))


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path: Path, header: list, rows: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def read_table(path) -> tuple:
    """``(header, rows)`` of a report CSV, values left as strings."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, list(r)


def _cluster_rows(space, dim_label, points, labels_by_group):
    out = []
    for group, labels in labels_by_group:
        if labels is None:
            out.append([space, dim_label, "mann-whitney-clustering", group, None, None, None])
            continue
        try:
            res = mann_whitney_clustering(points, labels)
        except DegenerateGroups:
            out.append([space, dim_label, "mann-whitney-clustering", group, None, None, None])
            continue
        out.append([space, dim_label, res.method, group, res.statistic, res.p_value, f"{res.sizes[0]}/{res.sizes[1]}"])
    return out


def analyze_space(csv_path, space: str, out_dir, seed: int, reps: int = 200,
                  quantile: float | None = 0.99) -> dict:
    """Standardise, count components, PCA + varimax, clustering tests."""
    out_dir = Path(out_dir)
    rows = read_feature_csv(csv_path)
    if len(rows) < 3:
        raise ValueError(f"{space}: need at least 3 rows to analyse, got {len(rows)}")
    raw = rows_to_matrix(rows)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        m = standardize(raw)
    dropped = [c for c in raw.columns if c not in m.columns]
    p = len(m.columns)
    pa = parallel_analysis(m, reps=reps, quantile=quantile, rng=child_generator(seed, "parallel", space))
    k = min(max(2, pa.count), p)
    res = pca(m, k, rotate=k >= 2)
    files = []
    files.append(_write(out_dir / "scree.csv", ["component", "eigenvalue", "random_mean", "threshold"],
                        [[i + 1, res.eigenvalues[i], pa.random_mean[i], pa.threshold[i]] for i in range(p)]))
    pcs = [f"pc{i + 1}" for i in range(k)]
    rcs = [f"rc{i + 1}" for i in range(k)] if res.rotated is not None else []
    load_rows = []
    for j, name in enumerate(m.columns):
        r = [name] + list(res.loadings[j])
        if res.rotated is not None:
            r += list(res.rotated[j])
        load_rows.append(r)
    files.append(_write(out_dir / "pca_loadings.csv", ["feature"] + pcs + rcs, load_rows))
    score_rows = []
    for i, lab in enumerate(m.rows):
        r = [lab[0], lab[1], lab[2] or ""] + list(res.scores[i])
        if res.rotated_scores is not None:
            r += list(res.rotated_scores[i])
        score_rows.append(r)
    files.append(_write(out_dir / "scores.csv", ["game", "players", "opponent"] + pcs + rcs, score_rows))
    labels_by_group = []
    for group, idx in GROUPINGS:
        labs = [lab[idx] for lab in m.rows]
        labels_by_group.append((group, None if any(v is None for v in labs) else labs))
    tests = _cluster_rows(space, "full", m.values, labels_by_group)
    tests += _cluster_rows(space, "pca2", res.scores[:, :2], labels_by_group)
    files.append(_write(out_dir / "tests.csv", ["space", "dims", "method", "grouping", "statistic", "p", "sizes"], tests))
    summary = {
        "space": space, "rows": len(rows), "features": p, "dropped_constant": dropped,
        "significant_components": pa.count, "components_kept": k, "quantile": quantile, "reps": reps,
        "explained": [float(v) for v in res.explained()[:k]],
        "warnings": [str(w.message) for w in caught],
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    files.append(summary_path)
    return {"files": files, "summary": summary}


def _aligned(rows_a, rows_b, name_a, name_b):
    if len(rows_a) != len(rows_b):
        raise RowCountMismatch(f"{name_a} has {len(rows_a)} rows, {name_b} has {len(rows_b)}; "
                               "the spaces cannot be compared")
    key = lambda r: (r.env.game, r.env.players, r.env.opponent or "")  # noqa: E731
    a = sorted(rows_a, key=key)
    b = sorted(rows_b, key=key)
    if [key(r) for r in a] != [key(r) for r in b]:
        raise RowCountMismatch(f"{name_a} and {name_b} do not describe the same environments")
    return a, b


def analyze_cca(csv_a, csv_b, name_a: str, name_b: str, out_dir) -> dict:
    a_rows, b_rows = _aligned(read_feature_csv(csv_a), read_feature_csv(csv_b), name_a, name_b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        xa = standardize(rows_to_matrix(a_rows))
        xb = standardize(rows_to_matrix(b_rows))
    res = cca(xa, xb)
    k = len(res.correlations)
    out_dir = Path(out_dir)
    ccs = [f"cc{i + 1}" for i in range(k)]
    rows = [[name_a, n] + list(res.x_loadings[j]) for j, n in enumerate(xa.columns)]
    rows += [[name_b, n] + list(res.y_loadings[j]) for j, n in enumerate(xb.columns)]
    files = [
        _write(out_dir / "cca_loadings.csv", ["set", "feature"] + ccs, rows),
        _write(out_dir / "cca_correlations.csv", ["component", "correlation"],
               [[i + 1, r] for i, r in enumerate(res.correlations)]),
    ]
    return {"files": files, "correlations": [float(r) for r in res.correlations]}


def analyze_fingerprints(fp_dir, out_path, alpha: float = 0.05) -> dict:
    """Homogeneity of each parameter's recommendations across player counts."""
    fps = [Fingerprint.load(p) for p in sorted(Path(fp_dir).glob("*.json"))]
    groups = {}
    for fp in fps:
        groups.setdefault((fp.game, fp.opponent), []).append(fp)
    entries = []
    for (game, opp), members in sorted(groups.items()):
        members.sort(key=lambda f: f.players)
        if len(members) < 2:
            continue
        for name, short, _ in _FP_DIMS:
            table = marginal_homogeneity_table(members, name)
            res = homogeneity_test(table)
            entries.append((game, opp, short, "/".join(str(f.players) for f in members), res))
    rows = []
    threshold = None
    if entries:
        significant, threshold = bonferroni([e[4] for e in entries], alpha)
        sig_ids = {id(r) for r in significant}
        for game, opp, short, players, res in entries:
            rows.append([game, opp, short, players, res.method, res.statistic, res.p_value,
                         threshold, int(id(res) in sig_ids)])
    path = _write(Path(out_path), ["game", "opponent", "parameter", "players", "method", "statistic", "p",
                                   "threshold", "significant"], rows)
    return {"files": [path], "tests": len(rows), "threshold": threshold}
