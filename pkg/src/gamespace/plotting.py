"""SVG figures rendered with matplotlib from the analysis CSVs.

Output is deterministic: fixed hash salt for element ids and no date
metadata.  Scatter points live in groups whose id starts with
``points-``, one ``<use>`` marker per data row.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .report import read_table  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "gamespace",
    "svg.fonttype": "none",
    "font.size": 9,
})

PLAYER_MARKERS = {2: "o", 3: "s", 4: "^"}
INNER_CIRCLE = 1 / np.sqrt(2)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def _colours(keys):
    cmap = plt.get_cmap("tab10")
    return {k: cmap(i % 10) for i, k in enumerate(sorted(set(keys)))}


def scatter(scores_csv, path, rotated: bool = False, title: str = "") -> Path:
    """2-D projection coloured by game, marker shape by player count."""
    header, rows = read_table(scores_csv)
    cx, cy = ("rc1", "rc2") if rotated else ("pc1", "pc2")
    if cx not in header:
        cx, cy = "pc1", "pc2"
    ix, iy = header.index(cx), header.index(cy)
    colours = _colours(r[0] for r in rows)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    groups = {}
    for r in rows:
        groups.setdefault((r[0], int(r[1])), []).append((float(r[ix]), float(r[iy])))
    for (game, players), pts in sorted(groups.items()):
        pts = np.array(pts)
        coll = ax.scatter(pts[:, 0], pts[:, 1], color=colours[game],
                          marker=PLAYER_MARKERS.get(players, "D"), s=36, label=f"{game} {players}p")
        coll.set_gid(f"points-{game}-{players}")
    ax.axhline(0, color="0.85", lw=0.6, zorder=0)
    ax.axvline(0, color="0.85", lw=0.6, zorder=0)
    ax.set_xlabel(cx.upper())
    ax.set_ylabel(cy.upper())
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7, loc="best", frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def scree(scree_csv, path, title: str = "") -> Path:
    """Real eigenvalues against the random-data reference lines."""
    _, rows = read_table(scree_csv)
    comp = [int(r[0]) for r in rows]
    real = [float(r[1]) for r in rows]
    mean = [float(r[2]) for r in rows]
    thr = [float(r[3]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(comp, real, "o-", label="data")
    ax.plot(comp, mean, "--", color="0.4", label="random (mean)")
    if thr != mean:
        ax.plot(comp, thr, ":", color="0.4", label="random (threshold)")
    ax.set_xlabel("component")
    ax.set_ylabel("eigenvalue")
    ax.set_xticks(comp)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def loadings(loadings_csv, path, title: str = "") -> Path:
    """Horizontal bars, one panel per (rotated if present) component."""
    header, rows = read_table(loadings_csv)
    cols = [c for c in header[1:] if c.startswith("rc")] or header[1:]
    names = [r[0] for r in rows]
    fig, axes = plt.subplots(1, len(cols), figsize=(2.6 * len(cols) + 1.2, 0.25 * len(names) + 1.2),
                             sharey=True, squeeze=False)
    y = np.arange(len(names))
    for ax, c in zip(axes[0], cols):
        i = header.index(c)
        vals = np.array([float(r[i]) for r in rows])
        ax.barh(y, vals, color=np.where(vals >= 0, "tab:blue", "tab:red"))
        ax.set_xlim(-1, 1)
        ax.axvline(0, color="0.3", lw=0.6)
        ax.set_title(c.upper())
    axes[0][0].set_yticks(y)
    axes[0][0].set_yticklabels(names)
    axes[0][0].invert_yaxis()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def cca_circle(loadings_csv, path, title: str = "") -> Path:
    """Feature loadings on the first two canonical pairs with unit and 0.707 circles."""
    header, rows = read_table(loadings_csv)
    if "cc2" not in header:
        raise ValueError("CCA circle plot needs at least two canonical components")
    i1, i2 = header.index("cc1"), header.index("cc2")
    sets = sorted(set(r[0] for r in rows), key=[r[0] for r in rows].index)
    fig, axes = plt.subplots(1, len(sets), figsize=(4.5 * len(sets), 4.5), squeeze=False)
    t = np.linspace(0, 2 * np.pi, 361)
    for ax, s in zip(axes[0], sets):
        ax.plot(np.cos(t), np.sin(t), color="0.3", lw=0.8)
        ax.plot(INNER_CIRCLE * np.cos(t), INNER_CIRCLE * np.sin(t), color="0.6", lw=0.6, ls="--")
        mine = [r for r in rows if r[0] == s]
        xs = np.array([float(r[i1]) for r in mine])
        ys = np.array([float(r[i2]) for r in mine])
        coll = ax.scatter(xs, ys, s=16, color="tab:blue")
        coll.set_gid(f"points-{s}")
        for r, x, yv in zip(mine, xs, ys):
            ax.annotate(r[1], (x, yv), fontsize=6, xytext=(2, 2), textcoords="offset points")
        ax.set_xlim(-1.1, 1.1)
        ax.set_ylim(-1.1, 1.1)
        ax.set_aspect("equal")
        ax.set_xlabel("CC1")
        ax.set_ylabel("CC2")
        ax.set_title(s)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def fingerprint_facets(fingerprints: list, path, title: str = "") -> Path:
    """Recommended-setting counts per parameter, one bar group per player count."""
    from .ntbea import _FP_DIMS

    fps = sorted(fingerprints, key=lambda f: f.players)
    fig, axes = plt.subplots(1, len(_FP_DIMS), figsize=(2.1 * len(_FP_DIMS), 2.8))
    width = 0.8 / max(1, len(fps))
    for ax, (name, short, values) in zip(axes, _FP_DIMS):
        x = np.arange(len(values))
        for i, fp in enumerate(fps):
            ax.bar(x + i * width - 0.4 + width / 2, fp.counts[name], width, label=f"{fp.players}p")
        ax.set_xticks(x)
        ax.set_xticklabels([str(v).lower() if isinstance(v, bool) else str(v) for v in values],
                           rotation=45, fontsize=7)
        ax.set_title(short)
    axes[0].set_ylabel("runs")
    axes[-1].legend(fontsize=7, frameon=False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)
