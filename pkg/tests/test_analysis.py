from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gamespace.analysis import (
    AllConstant, DataMatrix, DegenerateGroups, EmptyTable, NotStandardized, RowCountMismatch,
    TestResult as Result, bonferroni, cca, chi_squared, fisher_exact, homogeneity_test,
    is_standardized, mann_whitney, mann_whitney_clustering, parallel_analysis, pca,
    projection_matrix, standardize, varimax_criterion, varimax_rotate,
)


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# ---- standardize ----------------------------------------------------------------

def test_standardize_simple_column():
    out = standardize(np.array([[1.0], [2.0], [3.0]]))
    assert np.allclose(out[:, 0], [-1.0, 0.0, 1.0], atol=1e-15)


@settings(max_examples=50)
@given(arrays(np.float64, st.tuples(st.integers(3, 30), st.integers(1, 6)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_standardize_moments_and_idempotence(x):
    if np.any(np.ptp(x, axis=0) < 1e-6 * (1 + np.abs(x).max())):
        return
    z = standardize(x)
    assert np.all(np.abs(z.mean(axis=0)) < 1e-12)
    assert np.all(np.abs(z.var(axis=0, ddof=1) - 1) < 1e-9)
    assert np.max(np.abs(standardize(z) - z)) < 1e-12


def test_standardize_drops_constant_column_with_warning():
    m = DataMatrix(np.array([[1.0, 5.0], [2.0, 5.0], [4.0, 5.0]]), ["a", "b"], [0, 1, 2])
    with pytest.warns(UserWarning, match="b"):
        out = standardize(m)
    assert out.columns == ["a"]
    assert out.values.shape == (3, 1)
    with pytest.raises(AllConstant):
        standardize(np.ones((4, 2)))


# ---- PCA ------------------------------------------------------------------------

def test_pca_on_diagonal_line():
    t = np.linspace(-1, 1, 9)
    res = pca(standardize(np.column_stack([t, t])), 2)
    assert res.eigenvalues == pytest.approx([2.0, 0.0], abs=1e-12)
    assert np.allclose(np.abs(res.loadings[:, 0]), 1.0)


def test_pca_requires_standardized_input():
    with pytest.raises(NotStandardized):
        pca(np.random.default_rng(0).normal(5, 2, (10, 3)), 2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), p=st.integers(2, 8))
def test_pca_reconstruction_trace_and_orthogonality(seed, p):
    x = np.random.default_rng(seed).standard_normal((p + 8, p))
    res = pca(standardize(x), p)
    corr = np.corrcoef(x, rowvar=False)
    assert np.max(np.abs(res.loadings @ res.loadings.T - corr)) < 1e-8
    assert abs(res.eigenvalues.sum() - p) < 1e-9
    assert np.all(np.diff(res.eigenvalues) <= 1e-12) and np.all(res.eigenvalues >= 0)
    gram = res.vectors.T @ res.vectors
    assert np.allclose(gram, np.eye(p), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(2, 5))
def test_rotation_preserves_subspace(seed, k):
    z = standardize(np.random.default_rng(seed).standard_normal((40, 10)))
    res = pca(z, k, rotate=True)
    assert np.max(np.abs(projection_matrix(res.loadings) - projection_matrix(res.rotated))) < 1e-8
    assert np.allclose(res.rotated_scores @ res.rotated_scores.T, res.scores @ res.scores.T, atol=1e-8)


# ---- varimax --------------------------------------------------------------------

def test_varimax_fixed_point():
    a = np.zeros((6, 2))
    a[:3, 0] = [0.9, 0.8, 0.7]
    a[3:, 1] = [0.6, 0.85, 0.75]
    rotated, r = varimax_rotate(a, return_rotation=True)
    assert np.allclose(r, np.eye(2), atol=1e-9)
    assert np.allclose(rotated, a, atol=1e-9)


def test_varimax_recovers_45_degree_mix():
    sparse = np.zeros((8, 2))
    sparse[:4, 0] = [0.9, 0.8, 0.85, 0.7]
    sparse[4:, 1] = [0.75, 0.9, 0.8, 0.65]
    mixed = sparse @ rotation(math.pi / 4)
    rotated = varimax_rotate(mixed)
    # column order and sign are arbitrary after rotation
    best = min(np.max(np.abs(np.abs(rotated[:, list(order)]) - sparse)) for order in ((0, 1), (1, 0)))
    assert best < 0.05
    assert abs((rotated ** 2).sum() - (mixed ** 2).sum()) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), normalize=st.booleans())
def test_varimax_criterion_non_decreasing(seed, normalize):
    a = np.random.default_rng(seed).uniform(-1, 1, (9, 3))
    history = []
    rotated = varimax_rotate(a, normalize=normalize, history=history)
    assert all(b >= a_ - 1e-12 for a_, b in zip(history, history[1:]))
    assert varimax_criterion(rotated) >= varimax_criterion(a) - 1e-12
    assert np.allclose((rotated ** 2).sum(axis=1), (a ** 2).sum(axis=1), atol=1e-9)


# ---- parallel analysis ----------------------------------------------------------

def test_parallel_analysis_rejects_tiny_reps():
    z = np.random.default_rng(0).standard_normal((30, 4))
    with pytest.raises(ValueError):
        parallel_analysis(z, reps=1)


def test_parallel_analysis_deterministic_and_scree_shapes():
    z = np.random.default_rng(1).standard_normal((50, 6))
    a = parallel_analysis(z, reps=40, rng=np.random.default_rng(3))
    b = parallel_analysis(z, reps=40, rng=np.random.default_rng(3))
    assert a.count == b.count
    assert np.array_equal(a.threshold, b.threshold)
    assert len(a.eigenvalues) == len(a.random_mean) == 6
    assert np.all(a.threshold >= a.random_mean)
    mean = parallel_analysis(z, reps=40, quantile=None, rng=np.random.default_rng(3))
    assert np.array_equal(mean.threshold, mean.random_mean)


def test_parallel_analysis_counts_planted_factor():
    rng = np.random.default_rng(4)
    f = rng.standard_normal((72, 1))
    x = f @ np.full((1, 10), 0.9) + 0.1 * rng.standard_normal((72, 10))
    assert parallel_analysis(x, rng=np.random.default_rng(5)).count == 1


# ---- CCA ------------------------------------------------------------------------

def test_cca_identity_and_permutation():
    rng = np.random.default_rng(6)
    x = standardize(rng.standard_normal((72, 6)))
    perm = rng.permutation(6)
    res = cca(x, x[:, perm])
    assert np.all(np.abs(res.correlations - 1) < 1e-6)
    for i in range(6):
        dists = np.linalg.norm(res.x_loadings - res.y_loadings[i], axis=1)
        assert int(np.argmin(dists)) == perm[i]


def test_cca_independent_inputs_below_point_nine():
    firsts = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        firsts.append(cca(standardize(rng.standard_normal((72, 16))),
                          standardize(rng.standard_normal((72, 16)))).correlations[0])
    assert max(firsts) < 0.9


def test_cca_properties():
    rng = np.random.default_rng(7)
    x = standardize(rng.standard_normal((60, 4)))
    y = standardize(np.column_stack([x[:, 0] + 0.5 * rng.standard_normal(60), rng.standard_normal((60, 2))]))
    res = cca(x, y)
    r = res.correlations
    assert len(r) == 3
    assert np.all((r >= 0) & (r <= 1)) and np.all(np.diff(r) <= 1e-12)
    emp = [np.corrcoef(res.x_scores[:, i], res.y_scores[:, i])[0, 1] for i in range(3)]
    assert np.allclose(emp, r, atol=1e-10)
    assert np.all(np.abs(res.x_loadings) <= 1 + 1e-12)


def test_cca_row_mismatch():
    with pytest.raises(RowCountMismatch):
        cca(np.zeros((6, 2)), np.zeros((18, 2)))


# ---- Mann-Whitney ---------------------------------------------------------------

@settings(max_examples=100)
@given(a=st.lists(st.integers(0, 5), min_size=1, max_size=12), b=st.lists(st.integers(0, 5), min_size=1, max_size=12))
def test_mann_whitney_swap_symmetry(a, b):
    ra, rb = mann_whitney(a, b), mann_whitney(b, a)
    assert ra.statistic + rb.statistic == pytest.approx(len(a) * len(b))
    assert ra.p_value == rb.p_value
    assert 0.0 <= ra.p_value <= 1.0


def test_mann_whitney_normal_matches_scipy():
    from scipy.stats import mannwhitneyu

    rng = np.random.default_rng(8)
    a = rng.integers(0, 10, 30).astype(float)
    b = rng.integers(2, 12, 25).astype(float)
    ours = mann_whitney(a, b)
    ref = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert ours.statistic == pytest.approx(ref.statistic)
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-10)


def test_clustering_separated_groups():
    rng = np.random.default_rng(9)
    pts = np.vstack([rng.normal(0, 0.1, (9, 3)), rng.normal(1.0, 0.1, (9, 3))])
    res = mann_whitney_clustering(pts, ["a"] * 9 + ["b"] * 9)
    assert res.p_value < 1e-4
    assert res.sizes == (72, 153)


def test_clustering_null_rarely_significant():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(100 + seed)
        pts = rng.standard_normal((18, 4))
        labels = list(rng.permutation(["a"] * 6 + ["b"] * 6 + ["c"] * 6))
        hits += mann_whitney_clustering(pts, labels).p_value > 0.01
    assert hits >= 95


def test_clustering_degenerate_groups():
    with pytest.raises(DegenerateGroups):
        mann_whitney_clustering(np.zeros((4, 2)), ["a"] * 4)
    with pytest.raises(DegenerateGroups):
        mann_whitney_clustering(np.eye(3), ["a", "b", "c"])


# ---- contingency tests ----------------------------------------------------------

def brute_fisher(table):
    """Enumerate every table with the observed margins."""
    t = np.asarray(table)
    rows, cols = t.sum(axis=1), t.sum(axis=0)
    n = t.sum()

    def logp(m):
        return (sum(math.lgamma(r + 1) for r in rows) + sum(math.lgamma(c + 1) for c in cols)
                - math.lgamma(n + 1) - sum(math.lgamma(v + 1) for v in m.ravel()))

    def tables(r, remaining):
        if r == len(rows) - 1:
            yield [list(remaining)]
            return
        for first in itertools.product(*[range(min(c, rows[r]) + 1) for c in remaining]):
            if sum(first) == rows[r]:
                for rest in tables(r + 1, [c - f for c, f in zip(remaining, first)]):
                    yield [list(first)] + rest

    obs = logp(t)
    return sum(math.exp(logp(np.array(m))) for m in tables(0, list(cols))
               if logp(np.array(m)) <= obs + 1e-7 * abs(obs))


def test_fisher_two_by_two_closed_form():
    assert fisher_exact([[10, 0], [0, 10]]).p_value == pytest.approx(2 / math.comb(20, 10), rel=1e-12)
    assert fisher_exact([[3, 3], [3, 3]]).p_value == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(t=arrays(np.int64, st.tuples(st.integers(2, 3), st.integers(2, 3)), elements=st.integers(0, 5)))
def test_fisher_matches_enumeration(t):
    if np.any(t.sum(axis=0) == 0) or np.any(t.sum(axis=1) == 0):
        return
    assert fisher_exact(t).p_value == pytest.approx(brute_fisher(t), rel=1e-9, abs=1e-14)


@settings(max_examples=50)
@given(a=st.integers(0, 12), b=st.integers(0, 12), c=st.integers(0, 12), d=st.integers(0, 12))
def test_fisher_exchange_invariance(a, b, c, d):
    if a + b == 0 or c + d == 0 or a + c == 0 or b + d == 0:
        return
    p = fisher_exact([[a, b], [c, d]]).p_value
    assert fisher_exact([[c, d], [a, b]]).p_value == pytest.approx(p, rel=1e-12)
    assert fisher_exact([[b, a], [d, c]]).p_value == pytest.approx(p, rel=1e-12)
    assert fisher_exact([[a, c], [b, d]]).p_value == pytest.approx(p, rel=1e-12)


def test_homogeneity_switches_method():
    assert homogeneity_test([[3, 4, 3], [3, 4, 3]]).p_value == pytest.approx(1.0)
    assert homogeneity_test([[3, 4, 3], [5, 1, 4]]).method.startswith("fisher")
    big = [[30, 10, 0], [10, 30, 0], [20, 20, 0]]
    res = homogeneity_test(big)
    assert res.method.startswith("chi")
    from scipy.stats import chi2_contingency

    assert res.p_value == pytest.approx(chi2_contingency(np.array(big)[:, :2], correction=False)[1])
    assert homogeneity_test([[2, 2], [50, 60]]).method.startswith("fisher")


def test_contingency_errors():
    with pytest.raises(EmptyTable):
        homogeneity_test([[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        homogeneity_test([[1, -1], [2, 2]])
    with pytest.raises(ValueError):
        chi_squared([[1, 2]])


def test_strong_player_count_effect_detected():
    # ten runs per player count; recommendation shifts from one value to another
    table = [[9, 1, 0], [2, 7, 1], [0, 1, 9]]
    assert homogeneity_test(table).p_value < 1e-3


# ---- Bonferroni -----------------------------------------------------------------

def test_bonferroni_examples():
    sig, thr = bonferroni([Result(0.0, 1e-5, "x")] * 216)
    assert thr == pytest.approx(2.3148e-4, rel=1e-4)
    assert len(sig) == 216
    sig, thr = bonferroni([Result(0.0, 0.04, "x")])
    assert thr == 0.05 and len(sig) == 1
    sig, _ = bonferroni([Result(0.0, 1.0, "x")] * 5)
    assert sig == []
    with pytest.raises(ValueError):
        bonferroni([])


def test_result_p_clipped():
    assert Result(0.0, 1.0000000001, "x").p_value == 1.0
