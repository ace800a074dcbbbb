"""N-Tuple Bandit Evolutionary Algorithm and the multi-run fingerprint.

The optimiser keeps bandit statistics (visit count, value sum) for every
1-tuple, every 2-tuple and the full tuple of a discrete search space.  Each
iteration evaluates the current point once, updates the tables, samples
mutated neighbours and moves to the neighbour with the highest
``estimate + kappa * bonus``.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .agents import DEFAULT_OPPONENT_BUDGET, AgentSpec, DIMENSIONS, FINGERPRINT_DIMENSIONS, MctsParams, fixed_opponent
from .rng import child_rng

DEFAULT_NEIGHBOURS = 50
DEFAULT_KAPPA = 2.0
DEFAULT_ITERATIONS = 300
DEFAULT_RUNS = 10


class EmptySpace(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    """Ordered discrete dimensions: ``((name, values), ...)``."""

    dimensions: tuple

    def __post_init__(self):
        if not self.dimensions or any(len(v) == 0 for _, v in self.dimensions):
            raise EmptySpace("search space has no points")

    @classmethod
    def mcts(cls) -> "SearchSpace":
        return cls(tuple((short, tuple(values)) for _, short, values in DIMENSIONS))

    @property
    def names(self) -> list:
        return [name for name, _ in self.dimensions]

    @property
    def arities(self) -> list:
        return [len(v) for _, v in self.dimensions]

    @property
    def size(self) -> int:
        return math.prod(self.arities)

    def __len__(self):
        return len(self.dimensions)

    def values(self, point) -> tuple:
        return tuple(vals[i] for (_, vals), i in zip(self.dimensions, point))

    def to_text(self, point) -> str:
        parts = []
        for (name, vals), i in zip(self.dimensions, point):
            v = vals[i]
            parts.append(f"{name}={str(v).lower() if isinstance(v, bool) else v}")
        return ",".join(parts)

    def random_point(self, rng) -> tuple:
        return tuple(rng.randrange(a) for a in self.arities)


class NTupleModel:
    """Bandit statistics over 1-tuples, 2-tuples and the full tuple."""

    def __init__(self, space: SearchSpace):
        d = len(space)
        self.space = space
        tuples = [(i,) for i in range(d)]
        tuples += list(itertools.combinations(range(d), 2))
        full = tuple(range(d))
        if full not in tuples:
            tuples.append(full)
        self.tuples = tuples
        # one dict per tuple: projected point -> [count, sum]
        self.tables = [dict() for _ in tuples]
        self.total = 0

    def _cells(self, point):
        for idx, tbl in zip(self.tuples, self.tables):
            yield tbl, tuple(point[i] for i in idx)

    def update(self, point, value: float):
        self.total += 1
        for tbl, key in self._cells(point):
            cell = tbl.get(key)
            if cell is None:
                tbl[key] = [1, value]
            else:
                cell[0] += 1
                cell[1] += value

    def cell(self, tuple_dims, point):
        """``(count, sum)`` for one tuple's cell at ``point``."""
        tbl = self.tables[self.tuples.index(tuple(tuple_dims))]
        c = tbl.get(tuple(point[i] for i in tuple_dims))
        return (0, 0.0) if c is None else (c[0], c[1])

    def estimate(self, point) -> float:
        """Mean of the cell means over the visited tuples (0 if none)."""
        acc, m = 0.0, 0
        for tbl, key in self._cells(point):
            c = tbl.get(key)
            if c is not None:
                acc += c[1] / c[0]
                m += 1
        return acc / m if m else 0.0

    def bonus(self, point) -> float:
        ln = math.log(self.total + 1)
        acc = 0.0
        for tbl, key in self._cells(point):
            c = tbl.get(key)
            acc += math.sqrt(ln / ((c[0] if c else 0) + 1))
        return acc / len(self.tuples)

    def full_visits(self, point) -> int:
        c = self.tables[-1].get(tuple(point))
        return c[0] if c else 0


@dataclass
class NtbeaResult:
    best: tuple
    model: NTupleModel
    visits: dict          # point -> times evaluated
    log: list = field(default_factory=list)   # (iteration, point, value, running_best)

    def __iter__(self):
        # allows ``best, model = ntbea_optimize(...)``
        return iter((self.best, self.model))


def _mutate(point, arities, rng):
    d = len(point)
    p = 1.0 / d
    out = list(point)
    changed = False
    for i in range(d):
        if arities[i] > 1 and rng.random() < p:
            out[i] = _other_value(point[i], arities[i], rng)
            changed = True
    if not changed:
        free = [i for i in range(d) if arities[i] > 1]
        if free:
            i = free[rng.randrange(len(free))]
            out[i] = _other_value(point[i], arities[i], rng)
    return tuple(out)


def _other_value(cur, arity, rng):
    v = rng.randrange(arity - 1)
    return v if v < cur else v + 1


def ntbea_optimize(space: SearchSpace, evaluator, iterations: int, neighbours: int = DEFAULT_NEIGHBOURS,
                   kappa: float = DEFAULT_KAPPA, rng=None, start=None) -> NtbeaResult:
    """Optimise ``evaluator(point, iteration) -> float`` over ``space``.

    ``evaluator`` receives the index tuple and the iteration number.  The
    recommendation is the most evaluated point, ties broken by the model
    estimate and then by first visit.
    """
    if space.size == 0:
        raise EmptySpace("search space has no points")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if rng is None:
        import random
        rng = random.Random()
    model = NTupleModel(space)
    arities = space.arities
    point = tuple(start) if start is not None else space.random_point(rng)
    visits = {}
    log = []
    best_seen = -math.inf
    for it in range(iterations):
        value = float(evaluator(point, it))
        model.update(point, value)
        visits[point] = visits.get(point, 0) + 1
        best_seen = max(best_seen, value)
        log.append((it, point, value, best_seen))
        if it == iterations - 1:
            break
        best_cands, best_val = [], -math.inf
        for _ in range(neighbours):
            cand = _mutate(point, arities, rng)
            v = model.estimate(cand) + kappa * model.bonus(cand)
            if v > best_val + 1e-12:
                best_cands, best_val = [cand], v
            elif v >= best_val - 1e-12:
                best_cands.append(cand)
        if best_cands:
            point = best_cands[rng.randrange(len(best_cands))]
    top = max(visits.values())
    tied = [p for p in visits if visits[p] == top]
    best = max(tied, key=model.estimate) if len(tied) > 1 else tied[0]
    return NtbeaResult(best, model, visits, log)


def write_run_log(result: NtbeaResult, space: SearchSpace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "point", "evaluation", "running_best"])
        for it, point, value, best in result.log:
            w.writerow([it, space.to_text(point), f"{value:g}", f"{best:g}"])


# ---------------------------------------------------------------------------------------
# fingerprints

_FP_DIMS = [d for d in DIMENSIONS if d[0] in FINGERPRINT_DIMENSIONS]


def fingerprint_feature_names() -> list:
    names = []
    for _, short, values in _FP_DIMS:
        for v in values[1:]:
            names.append(f"{short}={str(v).lower() if isinstance(v, bool) else v}")
    return names


@dataclass
class Fingerprint:
    """Counts of recommended settings per parameter over independent runs."""

    counts: dict                       # field name -> list of counts per value
    runs: int
    game: str = ""
    players: int = 0
    opponent: str = ""
    seed: int = 0
    recommended: list = field(default_factory=list)   # MctsParams text per run

    @classmethod
    def from_params(cls, params: list, **meta) -> "Fingerprint":
        counts = {}
        for name, _, values in _FP_DIMS:
            c = [0] * len(values)
            for p in params:
                c[values.index(getattr(p, name))] += 1
            counts[name] = c
        return cls(counts, len(params), recommended=[p.to_text() for p in params], **meta)

    def features(self) -> list:
        """Counts with the first value of each parameter dropped."""
        out = []
        for name, _, _ in _FP_DIMS:
            out.extend(self.counts[name][1:])
        return out

    def to_dict(self) -> dict:
        return {
            "game": self.game, "players": self.players, "opponent": self.opponent,
            "seed": self.seed, "runs": self.runs, "counts": self.counts,
            "feature_names": fingerprint_feature_names(), "features": self.features(),
            "recommended": self.recommended,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Fingerprint":
        return cls(counts={k: list(v) for k, v in d["counts"].items()}, runs=d["runs"],
                   game=d.get("game", ""), players=d.get("players", 0),
                   opponent=d.get("opponent", ""), seed=d.get("seed", 0),
                   recommended=list(d.get("recommended", [])))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Fingerprint":
        return cls.from_dict(json.loads(Path(path).read_text()))


def game_evaluator(game: str, players: int, opponent: str, budget: int, seed: int, *coords,
                   opponent_budget: int | None = None, budget_ms: float | None = None,
                   opponent_ms: float | None = None):
    """Evaluator for NTBEA: one game of MCTS(point) against the fixed opponent."""
    from .runner import play_game

    space = SearchSpace.mcts()
    opp = fixed_opponent(opponent, opponent_budget or DEFAULT_OPPONENT_BUDGET, opponent_ms)

    def evaluate(point, it):
        params = MctsParams.from_point(point)
        me = AgentSpec("MCTS", name="candidate", params=params, budget=budget, budget_ms=budget_ms)
        specs = [me] + [opp] * (players - 1)
        res = play_game(game, specs, seed, *coords, it)
        seat = res.seats.index(0)
        return res.utilities[seat]

    evaluate.space = space
    return evaluate


def fingerprint(game: str, players: int, opponent: str, runs: int = DEFAULT_RUNS,
                iters_per_run: int = DEFAULT_ITERATIONS, seed: int = 0, budget: int = 128,
                neighbours: int = DEFAULT_NEIGHBOURS, kappa: float = DEFAULT_KAPPA,
                opponent_budget: int | None = None, budget_ms: float | None = None,
                opponent_ms: float | None = None, log_dir=None, run_hook=None) -> Fingerprint:
    """Run ``runs`` independent optimisations and count the recommendations.

    ``log_dir`` receives one CSV per run; ``run_hook(run, params)`` is
    called after each run.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    chosen = []
    for r in range(runs):
        chosen.append(fingerprint_run(game, players, opponent, r, iters_per_run, seed, budget,
                                      neighbours, kappa, opponent_budget, log_dir,
                                      budget_ms=budget_ms, opponent_ms=opponent_ms))
        if run_hook is not None:
            run_hook(r, chosen[-1])
    return Fingerprint.from_params(chosen, game=game, players=players, opponent=opponent, seed=seed)


def fingerprint_run(game, players, opponent, run, iterations, seed, budget=128,
                    neighbours=DEFAULT_NEIGHBOURS, kappa=DEFAULT_KAPPA, opponent_budget=None,
                    log_dir=None, budget_ms=None, opponent_ms=None) -> MctsParams:
    """One NTBEA run; returns the recommended parameters."""
    space = SearchSpace.mcts()
    coords = ("ntbea", game, players, opponent, run)
    ev = game_evaluator(game, players, opponent, budget, seed, *coords, opponent_budget=opponent_budget,
                        budget_ms=budget_ms, opponent_ms=opponent_ms)
    res = ntbea_optimize(space, ev, iterations, neighbours, kappa, child_rng(seed, *coords, "search"))
    if log_dir is not None:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        write_run_log(res, space, Path(log_dir) / f"ntbea_{game}_{players}p_{opponent}_run{run:02d}.csv")
    return MctsParams.from_point(res.best)


def marginal_homogeneity_table(fingerprints: list, parameter: str) -> list:
    """Rows = fingerprints (one per player count), columns = parameter values."""
    if len(fingerprints) < 2:
        raise DimensionMismatch("need fingerprints for at least two player counts")
    names = {name: short for name, short, _ in _FP_DIMS}
    shorts = {short: name for name, short in names.items()}
    name = shorts.get(parameter, parameter)
    if name not in names:
        raise DimensionMismatch(f"parameter {parameter!r} is not part of the fingerprint")
    width = None
    rows = []
    for fp in fingerprints:
        if name not in fp.counts:
            raise DimensionMismatch(f"fingerprint lacks parameter {name!r}")
        row = list(fp.counts[name])
        if width is not None and len(row) != width:
            raise DimensionMismatch("fingerprints disagree on the parameter's value count")
        width = len(row)
        rows.append(row)
    return rows
