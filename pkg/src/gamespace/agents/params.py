"""The MCTS parameter space and its flat ``key=value`` text form."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

TREE_POLICIES = ("UCB", "Alpha", "EXP3", "RM")
OPPONENT_TREES = ("MaxN", "Paranoid", "SelfOnly")
FINAL_POLICIES = ("Robust", "Simple")

# (field name, short key used in text form, ordered values)
DIMENSIONS = (
    ("tree_policy", "tree", TREE_POLICIES),
    ("opponent_tree", "opp", OPPONENT_TREES),
    ("final_policy", "final", FINAL_POLICIES),
    ("tree_depth", "depth", (1, 3, 10, 30, 100)),
    ("rollout_length", "rollout", (0, 3, 10, 30, 100)),
    ("redeterminise", "is", (False, True)),
    ("open_loop", "ol", (False, True)),
    ("K", "k", (0.01, 0.1, 1.0, 10.0, 100.0)),
    ("epsilon", "eps", (0.01, 0.03, 0.1, 0.3)),
)
# K and epsilon are continuous-valued knobs left out of fingerprints.
FINGERPRINT_DIMENSIONS = tuple(d[0] for d in DIMENSIONS[:7])

_SHORT = {d[1]: d for d in DIMENSIONS}
_BY_FIELD = {d[0]: d for d in DIMENSIONS}


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class MctsParams:
    tree_policy: str = "UCB"
    opponent_tree: str = "Paranoid"
    final_policy: str = "Robust"
    tree_depth: int = 10
    rollout_length: int = 10
    redeterminise: bool = False
    open_loop: bool = True
    K: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        for name, _, values in DIMENSIONS:
            if getattr(self, name) not in values:
                raise ParamError(f"{name}={getattr(self, name)!r} not in {values}")

    def to_text(self) -> str:
        parts = []
        for name, short, _ in DIMENSIONS:
            v = getattr(self, name)
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = repr(v)
            parts.append(f"{short}={v}")
        return ",".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "MctsParams":
        kwargs = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            key, sep, raw = item.partition("=")
            if not sep or key.strip() not in _SHORT:
                raise ParamError(f"bad parameter item {item!r}")
            name, _, values = _SHORT[key.strip()]
            kwargs[name] = _parse_value(raw.strip(), values, name)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MctsParams":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParamError(f"unknown MCTS parameters: {sorted(extra)}")
        return cls(**{k: _parse_value(v, _BY_FIELD[k][2], k) for k, v in d.items()})

    def to_point(self) -> tuple:
        """Index tuple into :data:`DIMENSIONS`."""
        return tuple(values.index(getattr(self, name)) for name, _, values in DIMENSIONS)

    @classmethod
    def from_point(cls, point) -> "MctsParams":
        return cls(**{name: values[i] for (name, _, values), i in zip(DIMENSIONS, point)})


def _parse_value(raw, values, name):
    if isinstance(raw, str):
        for v in values:
            if isinstance(v, bool):
                if raw.lower() == str(v).lower():
                    return v
            elif isinstance(v, (int, float)):
                try:
                    if float(raw) == v:
                        return v
                except ValueError:
                    pass
            elif raw.lower() == v.lower():
                return v
    else:
        for v in values:
            if type(raw) is bool or type(v) is bool:
                if raw is v:
                    return v
            elif raw == v:
                return v
    raise ParamError(f"{name}={raw!r} not in {values}")


def space_size() -> int:
    size = 1
    for _, _, values in DIMENSIONS:
        size *= len(values)
    return size
