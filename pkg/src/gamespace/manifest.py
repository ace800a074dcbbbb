"""Run manifest: config hash, stage markers, per-unit progress, file inventory."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def csv_rows(path) -> int | None:
    """Data rows (excluding header) of a CSV, ``None`` for other files."""
    path = Path(path)
    if path.suffix != ".csv":
        return None
    with open(path) as fh:
        return max(0, sum(1 for _ in fh) - 1)


class Manifest:
    def __init__(self, out_dir, config_hash: str):
        self.out = Path(out_dir)
        self.path = self.out / MANIFEST_NAME
        self.config_hash = config_hash
        self.data = {"config_hash": config_hash, "tool_version": __version__, "stages": {}, "files": {}}
        if self.path.exists():
            old = json.loads(self.path.read_text())
            if old.get("config_hash") == config_hash:
                self.data = old
                self.data["tool_version"] = __version__

    def save(self):
        self.out.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.data, indent=1, sort_keys=True) + "\n")
        tmp.replace(self.path)

    def stage(self, name: str) -> dict:
        return self.data["stages"].setdefault(name, {"complete": False, "units": []})

    def is_complete(self, name: str) -> bool:
        st = self.data["stages"].get(name)
        return bool(st and st.get("complete"))

    def unit_done(self, stage: str, unit: str) -> bool:
        return unit in self.stage(stage)["units"]

    def mark_unit(self, stage: str, unit: str):
        units = self.stage(stage)["units"]
        if unit not in units:
            units.append(unit)
            units.sort()
        self.save()

    def reset_stage(self, stage: str):
        self.data["stages"][stage] = {"complete": False, "units": []}
        self.save()

    def complete(self, stage: str, files: list):
        st = self.stage(stage)
        st["complete"] = True
        st["files"] = sorted(str(Path(f).relative_to(self.out)) for f in files)
        for f in files:
            self.record_file(f)
        self.save()

    def record_file(self, path):
        path = Path(path)
        rel = str(path.relative_to(self.out))
        entry = {"sha256": sha256_file(path)}
        rows = csv_rows(path)
        if rows is not None:
            entry["rows"] = rows
        self.data["files"][rel] = entry

    def verify(self) -> list:
        """Problems found when checking recorded files against disk."""
        problems = []
        for rel, entry in sorted(self.data["files"].items()):
            p = self.out / rel
            if not p.exists():
                problems.append(f"{rel}: missing")
                continue
            if sha256_file(p) != entry["sha256"]:
                problems.append(f"{rel}: checksum differs")
            if "rows" in entry and csv_rows(p) != entry["rows"]:
                problems.append(f"{rel}: row count differs")
        return problems
