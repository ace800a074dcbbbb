"""Rank and contingency tests with a common result type."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

EXACT_MW_MAX = 8
EXACT_FISHER_MAX_TOTAL = 40
_REL_TOL = 1e-7


class DegenerateGroups(ValueError):
    pass


class EmptyTable(ValueError):
    pass


@dataclass
class TestResult:
    statistic: float
    p_value: float
    method: str
    sizes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.p_value = float(min(1.0, max(0.0, self.p_value)))


# -- Mann-Whitney ------------------------------------------------------------------------

def midranks(values) -> np.ndarray:
    return sps.rankdata(values, method="average")


def _exact_u_pvalue(ranks, n1, u_obs):
    """Two-sided p by enumerating every split of the pooled midranks."""
    n = len(ranks)
    mu2 = n1 * (n - n1)              # twice the null mean of U
    dev = abs(2 * u_obs - mu2)
    base = n1 * (n1 + 1)
    hits = total = 0
    # midranks are multiples of 1/2; doubled they are exact integers
    r2 = [int(round(2 * r)) for r in ranks]
    for idx in itertools.combinations(range(n), n1):
        u2 = sum(r2[i] for i in idx) - base      # 2U
        total += 1
        if abs(u2 - mu2) >= dev:
            hits += 1
    return hits / total


def mann_whitney(a, b, exact: bool | None = None) -> TestResult:
    """Two-sided Mann-Whitney U test; statistic is U for sample ``a``.

    Uses exact enumeration when both samples have at most 8 values (or
    when ``exact`` is forced), else the normal approximation with tie and
    continuity corrections.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise DegenerateGroups("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    if exact is None:
        exact = n1 <= EXACT_MW_MAX and n2 <= EXACT_MW_MAX
    if exact:
        p = _exact_u_pvalue(ranks, n1, u)
        return TestResult(u, p, "mann-whitney-exact", (n1, n2))
    n = n1 + n2
    _, counts = np.unique(pooled, return_counts=True)
    tie = float((counts ** 3 - counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return TestResult(u, 1.0, "mann-whitney-normal", (n1, n2))
    mu = n1 * n2 / 2.0
    z = max(abs(u - mu) - 0.5, 0.0) / math.sqrt(var)
    p = 2.0 * sps.norm.sf(z)
    return TestResult(u, p, "mann-whitney-normal", (n1, n2))


def pairwise_distances(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def mann_whitney_clustering(points, labels) -> TestResult:
    """Compare same-label pair distances with all pair distances."""
    x = np.asarray(getattr(points, "values", points), dtype=float)
    labels = list(labels)
    if len(labels) != x.shape[0]:
        raise DegenerateGroups("one label per point is required")
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    if len(groups) < 2:
        raise DegenerateGroups("need at least two distinct labels")
    if min(len(g) for g in groups.values()) < 2:
        raise DegenerateGroups("every label needs at least two points")
    d = pairwise_distances(x)
    iu = np.triu_indices(len(labels), 1)
    all_d = d[iu]
    same = np.array([labels[i] == labels[j] for i, j in zip(*iu)])
    res = mann_whitney(all_d[same], all_d)
    res.method = "mann-whitney-clustering"
    return res


# -- contingency tables ------------------------------------------------------------------

def _check_table(table):
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] < 2:
        raise EmptyTable("need a 2-D table with at least two rows")
    if np.any(t < 0) or np.any(t != np.round(t)):
        raise ValueError("cells must be non-negative integers")
    t = t.astype(int)
    if t.sum() == 0:
        raise EmptyTable("table is empty")
    return t


def _compositions(c, caps):
    """Ways to spread ``c`` over rows, each bounded by its remaining total."""
    if len(caps) == 1:
        if c <= caps[0]:
            yield (c,)
        return
    rest_cap = sum(caps[1:])
    for v in range(max(0, c - rest_cap), min(c, caps[0]) + 1):
        for tail in _compositions(c - v, caps[1:]):
            yield (v,) + tail


def _fisher_enumerate(t):
    """Exact ``(p, probability of the observed table)`` over all tables
    with the observed margins.

    Column-by-column enumeration; a partial table whose completions are
    all inside (or all outside) the tail is summed in closed form.
    """
    t = t[:, t.sum(axis=0) > 0]
    rows = tuple(int(v) for v in t.sum(axis=1))
    cols = [int(v) for v in t.sum(axis=0)]
    total = sum(rows)
    ncol = len(cols)
    if ncol <= 1:
        return 1.0, 1.0
    lf = [math.lgamma(i + 1) for i in range(total + 1)]
    lnum = sum(lf[r] for r in rows) + sum(lf[c] for c in cols) - lf[total]
    l_obs = lnum - sum(lf[int(v)] for v in t.ravel())
    limit = l_obs + math.log1p(_REL_TOL)
    col_tail = [sum(lf[c] for c in cols[j:]) for j in range(ncol)]
    bounds_memo = {}

    def bounds(j, remaining):
        # (min, max) of the summed log-factorials over completions from column j
        key = (j, remaining)
        hit = bounds_memo.get(key)
        if hit is not None:
            return hit
        if j == ncol - 1:
            v = sum(lf[x] for x in remaining)
            out = (v, v)
        else:
            lo, hi = math.inf, -math.inf
            for col in _compositions(cols[j], remaining):
                here = sum(lf[x] for x in col)
                a, b = bounds(j + 1, tuple(r - x for r, x in zip(remaining, col)))
                lo = min(lo, here + a)
                hi = max(hi, here + b)
            out = (lo, hi)
        bounds_memo[key] = out
        return out

    acc = 0.0
    slack = 1e-9

    def walk(j, remaining, lden):
        nonlocal acc
        lo, hi = bounds(j, remaining)
        if lnum - lden - hi > limit + slack:
            return
        if lnum - lden - lo <= limit - slack or j == ncol - 1:
            if j == ncol - 1 and lnum - lden - lo > limit:
                return
            # sum over completions of prod 1/n! = m! / (prod R! prod C!)
            m = sum(remaining)
            lsub = lf[m] - sum(lf[r] for r in remaining) - col_tail[j]
            acc += math.exp(lnum - lden + lsub)
            return
        for col in _compositions(cols[j], remaining):
            walk(j + 1, tuple(r - x for r, x in zip(remaining, col)), lden + sum(lf[x] for x in col))

    walk(0, rows, 0.0)
    return min(acc, 1.0), math.exp(l_obs)


def fisher_exact(table) -> TestResult:
    t = _check_table(table)
    p, p_obs = _fisher_enumerate(t)
    return TestResult(p_obs, p, "fisher-exact", tuple(int(v) for v in t.sum(axis=1)))


def chi_squared(table) -> TestResult:
    t = _check_table(table)
    t = t[:, t.sum(axis=0) > 0]
    t = t[t.sum(axis=1) > 0]
    sizes = tuple(int(v) for v in t.sum(axis=1))
    if t.shape[0] < 2 or t.shape[1] < 2:
        return TestResult(0.0, 1.0, "chi-squared", sizes)
    expected = np.outer(t.sum(axis=1), t.sum(axis=0)) / t.sum()
    stat = float(((t - expected) ** 2 / expected).sum())
    dof = (t.shape[0] - 1) * (t.shape[1] - 1)
    return TestResult(stat, float(sps.chi2.sf(stat, dof)), "chi-squared", sizes)


def homogeneity_test(table) -> TestResult:
    """Fisher exact for 2x2 or small tables, chi-squared otherwise."""
    t = _check_table(table)
    if t.shape == (2, 2) or t.sum() <= EXACT_FISHER_MAX_TOTAL:
        return fisher_exact(t)
    return chi_squared(t)


def bonferroni(results: list, alpha: float = 0.05):
    """Results with ``p < alpha / m`` and the threshold used."""
    if not results:
        raise ValueError("need at least one result")
    threshold = alpha / len(results)
    return [r for r in results if r.p_value < threshold], threshold
