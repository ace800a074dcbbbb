from __future__ import annotations

import csv
import random

import pytest
from hypothesis import given, settings, strategies as st

from gamespace.agents import MctsParams
from gamespace.ntbea import (
    DimensionMismatch, EmptySpace, Fingerprint, NTupleModel, SearchSpace, _mutate, fingerprint,
    fingerprint_feature_names, marginal_homogeneity_table, ntbea_optimize, write_run_log,
)

GRID = SearchSpace((("a", (0, 1, 2)), ("b", (0, 1, 2))))


def test_mcts_space_shape():
    space = SearchSpace.mcts()
    assert space.size == 48_000
    assert space.names == ["tree", "opp", "final", "depth", "rollout", "is", "ol", "k", "eps"]


def test_empty_space_rejected():
    with pytest.raises(EmptySpace):
        SearchSpace(())
    with pytest.raises(EmptySpace):
        SearchSpace((("a", ()),))


@pytest.mark.parametrize("target", [(0, 0), (2, 1), (1, 2)])
def test_finds_single_rewarded_point(target):
    for seed in range(5):
        res = ntbea_optimize(GRID, lambda p, it: 1.0 if p == target else 0.0, 200, rng=random.Random(seed))
        assert res.best == target


def test_constant_evaluator_visits_sum_to_iterations():
    res = ntbea_optimize(GRID, lambda p, it: 0.25, 57, rng=random.Random(0))
    assert sum(res.visits.values()) == 57
    assert res.model.total == 57
    best, model = res
    assert best in res.visits and model is res.model


def test_zero_iterations_rejected():
    with pytest.raises(ValueError):
        ntbea_optimize(GRID, lambda p, it: 0.0, 0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), iters=st.integers(1, 120), noise=st.floats(0, 1))
def test_model_consistency(seed, iters, noise):
    space = SearchSpace(tuple((f"d{i}", tuple(range(3))) for i in range(4)))
    r = random.Random(seed + 1)
    evals = {}

    def evaluator(p, it):
        v = sum(p) / 8 + r.gauss(0, noise)
        evals.setdefault(p, []).append(v)
        return v

    res = ntbea_optimize(space, evaluator, iters, neighbours=10, rng=random.Random(seed))
    model = res.model
    full = tuple(range(4))
    for p, vs in evals.items():
        count, total = model.cell(full, p)
        assert count == len(vs) == res.visits[p]
        assert total / count == pytest.approx(sum(vs) / len(vs))
    for i in range(4):
        assert sum(model.cell((i,), (v,) * 4)[0] for v in range(3)) == iters


def test_running_best_is_monotone_on_fixed_schedule():
    space = SearchSpace(tuple((f"d{i}", (0, 1)) for i in range(6)))
    f = lambda p, it: sum(p) / 6  # noqa: E731
    prev = -1.0
    for n in range(1, 60):
        res = ntbea_optimize(space, f, n, neighbours=8, rng=random.Random(3))
        best_seen = max(v for _, _, v, _ in res.log)
        assert best_seen >= prev
        prev = best_seen
        bests = [b for *_, b in res.log]
        assert bests == sorted(bests)


@settings(max_examples=200)
@given(point=st.lists(st.integers(0, 4), min_size=1, max_size=9), seed=st.integers(0, 10**6))
def test_mutation_always_moves(point, seed):
    arities = [5] * len(point)
    out = _mutate(tuple(point), arities, random.Random(seed))
    assert out != tuple(point)
    assert all(0 <= v < 5 for v in out)


def test_run_log_columns(tmp_path):
    res = ntbea_optimize(GRID, lambda p, it: float(p[0]), 12, rng=random.Random(0))
    path = tmp_path / "log.csv"
    write_run_log(res, GRID, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iteration", "point", "evaluation", "running_best"]
    assert len(rows) == 13
    assert rows[1][1].startswith("a=")


# ---- fingerprints ---------------------------------------------------------------

def test_feature_vector_drops_one_value_per_parameter():
    names = fingerprint_feature_names()
    assert len(names) == 16 == 3 + 2 + 1 + 4 + 4 + 1 + 1
    assert "ol=true" in names and "ol=false" not in names


@settings(max_examples=50)
@given(points=st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2), st.integers(0, 1), st.integers(0, 4),
                                 st.integers(0, 4), st.integers(0, 1), st.integers(0, 1),
                                 st.integers(0, 4), st.integers(0, 3)), min_size=1, max_size=30))
def test_fingerprint_counts_reconstruct(points):
    params = [MctsParams.from_point(p) for p in points]
    fp = Fingerprint.from_params(params)
    feats = fp.features()
    assert len(feats) == 16
    i = 0
    for name, counts in fp.counts.items():
        assert sum(counts) == len(points)
        kept = feats[i:i + len(counts) - 1]
        assert counts[0] == fp.runs - sum(kept)
        i += len(counts) - 1


def test_fingerprint_all_open_loop():
    fp = Fingerprint.from_params([MctsParams(open_loop=True)] * 30)
    feats = dict(zip(fingerprint_feature_names(), fp.features()))
    assert feats["ol=true"] == 30
    dropped = Fingerprint.from_params([MctsParams(tree_policy="UCB")] * 30)
    feats = dict(zip(fingerprint_feature_names(), dropped.features()))
    assert feats["tree=Alpha"] == feats["tree=EXP3"] == feats["tree=RM"] == 0


def test_single_run_fingerprint(tmp_path):
    fp = fingerprint("diamant", 2, "RND", runs=1, iters_per_run=4, seed=1, budget=4, neighbours=5,
                     log_dir=tmp_path)
    assert all(sum(c) == 1 for c in fp.counts.values())
    assert len(list(tmp_path.glob("*.csv"))) == 1
    path = tmp_path / "fp.json"
    fp.save(path)
    assert Fingerprint.load(path) == fp


def test_fingerprint_is_deterministic():
    a = fingerprint("diamant", 2, "OSLA", runs=2, iters_per_run=5, seed=7, budget=4, neighbours=5)
    b = fingerprint("diamant", 2, "OSLA", runs=2, iters_per_run=5, seed=7, budget=4, neighbours=5)
    assert a == b


def _fp(players, ol_true, runs=10):
    params = [MctsParams(open_loop=i < ol_true) for i in range(runs)]
    return Fingerprint.from_params(params, players=players)


def test_homogeneity_table_shapes():
    fps = [_fp(2, 5), _fp(3, 5), _fp(4, 5)]
    assert marginal_homogeneity_table(fps, "ol") == [[5, 5]] * 3
    table = marginal_homogeneity_table(fps, "rollout_length")
    assert len(table) == 3 and all(len(r) == 5 and sum(r) == 10 for r in table)
    shifted = marginal_homogeneity_table([_fp(2, 10), _fp(3, 5), _fp(4, 0)], "open_loop")
    assert len({tuple(r) for r in shifted}) == 3


def test_homogeneity_table_errors():
    with pytest.raises(DimensionMismatch):
        marginal_homogeneity_table([_fp(2, 1)], "ol")
    with pytest.raises(DimensionMismatch):
        marginal_homogeneity_table([_fp(2, 1), _fp(3, 1)], "k")
