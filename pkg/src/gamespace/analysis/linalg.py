"""Standardisation, PCA with varimax rotation, parallel analysis and CCA."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


class AllConstant(ValueError):
    pass


class NotStandardized(ValueError):
    pass


class RowCountMismatch(ValueError):
    pass


@dataclass
class DataMatrix:
    """Labelled ``n x p`` matrix; ``rows`` holds one label tuple per row."""

    values: np.ndarray
    columns: list
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("data matrix must be 2-D")
        if not self.rows:
            self.rows = [(i,) for i in range(self.values.shape[0])]
        if len(self.columns) != self.values.shape[1] or len(self.rows) != self.values.shape[0]:
            raise ValueError("labels do not match matrix shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("data matrix has missing or non-finite values")

    @property
    def shape(self):
        return self.values.shape


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, DataMatrix) else np.asarray(m, dtype=float)


def standardize(m, tol: float = 1e-12):
    """Columns to mean 0 and unit sample variance (divisor ``n-1``).

    Constant columns are dropped with a warning.  Returns the same kind
    of object it was given.
    """
    x = _values(m)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two rows")
    mean = x.mean(axis=0)
    centred = x - mean
    sd = np.sqrt((centred ** 2).sum(axis=0) / (n - 1))
    scale = np.maximum(np.abs(mean), 1.0)
    keep = sd > tol * scale
    if not keep.any():
        raise AllConstant("every column is constant")
    if not keep.all():
        dropped = [i for i in range(x.shape[1]) if not keep[i]]
        if isinstance(m, DataMatrix):
            dropped = [m.columns[i] for i in dropped]
        warnings.warn(f"dropping constant columns: {dropped}", stacklevel=2)
    z = centred[:, keep] / sd[keep]
    # second pass removes rounding left by the first
    z = z - z.mean(axis=0)
    z = z / np.sqrt((z ** 2).sum(axis=0) / (n - 1))
    if isinstance(m, DataMatrix):
        return DataMatrix(z, [c for c, k in zip(m.columns, keep) if k], list(m.rows))
    return z


def is_standardized(x, tol: float = 1e-8) -> bool:
    x = _values(x)
    n = x.shape[0]
    if n < 2:
        return False
    mean = x.mean(axis=0)
    var = ((x - mean) ** 2).sum(axis=0) / (n - 1)
    return bool(np.all(np.abs(mean) < tol) and np.all(np.abs(var - 1.0) < tol))


def correlation(x) -> np.ndarray:
    z = _values(x)
    return z.T @ z / (z.shape[0] - 1)


def _sym_eig_desc(a):
    vals, vecs = np.linalg.eigh((a + a.T) / 2.0)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    # sign convention: largest-magnitude entry of each vector is positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


@dataclass
class PcaResult:
    eigenvalues: np.ndarray        # all p, descending
    vectors: np.ndarray            # p x p eigenvectors (columns)
    loadings: np.ndarray           # p x k, eigvec * sqrt(eigval)
    scores: np.ndarray             # n x k projections
    rotated: np.ndarray | None = None
    rotation: np.ndarray | None = None
    rotated_scores: np.ndarray | None = None
    columns: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def explained(self) -> np.ndarray:
        return self.eigenvalues / self.eigenvalues.sum()


def pca(m, k: int, rotate: bool = False) -> PcaResult:
    """PCA of the correlation matrix of a standardised matrix."""
    z = _values(m)
    if not is_standardized(z):
        raise NotStandardized("input columns must have mean 0 and unit variance")
    p = z.shape[1]
    if not 1 <= k <= p:
        raise ValueError(f"k must be in [1, {p}]")
    vals, vecs = _sym_eig_desc(correlation(z))
    vals = np.clip(vals, 0.0, None)
    loadings = vecs[:, :k] * np.sqrt(vals[:k])
    scores = z @ vecs[:, :k]
    res = PcaResult(vals, vecs, loadings, scores,
                    columns=list(m.columns) if isinstance(m, DataMatrix) else [])
    if rotate and k >= 2:
        rot, r = varimax_rotate(loadings, return_rotation=True)
        res.rotated = rot
        res.rotation = r
        res.rotated_scores = scores @ r
    return res


def varimax_criterion(loadings) -> float:
    l2 = np.asarray(loadings) ** 2
    p = l2.shape[0]
    return float(((l2 ** 2).sum(axis=0) * p - l2.sum(axis=0) ** 2).sum() / p ** 2)


def varimax_rotate(loadings, normalize: bool = True, tol: float = 1e-8, max_sweeps: int = 500,
                   return_rotation: bool = False, history: list | None = None):
    """Orthogonal varimax rotation by sweeps of pairwise planar rotations.

    Each pair rotation is the exact maximiser for that plane, so the
    criterion never decreases.  With ``normalize`` rows are scaled to unit
    communality during the rotation (Kaiser).  ``history`` collects the
    criterion after each sweep.
    """
    a = np.array(loadings, dtype=float)
    p, k = a.shape
    if k < 2:
        raise ValueError("varimax needs at least two components")
    if normalize:
        h = np.sqrt((a ** 2).sum(axis=1))
        h[h == 0] = 1.0
        a = a / h[:, None]
    rot = np.eye(k)
    crit = varimax_criterion(a)
    if history is not None:
        history.append(crit)
    for _ in range(max_sweeps):
        for i in range(k - 1):
            for j in range(i + 1, k):
                x, y = a[:, i], a[:, j]
                u = x * x - y * y
                v = 2.0 * x * y
                big_a, big_b = u.sum(), v.sum()
                big_c = (u * u - v * v).sum()
                big_d = 2.0 * (u * v).sum()
                num = big_d - 2.0 * big_a * big_b / p
                den = big_c - (big_a * big_a - big_b * big_b) / p
                phi = np.arctan2(num, den) / 4.0
                if abs(phi) < 1e-15:
                    continue
                c, s = np.cos(phi), np.sin(phi)
                g = np.array([[c, -s], [s, c]])
                a[:, [i, j]] = a[:, [i, j]] @ g
                rot[:, [i, j]] = rot[:, [i, j]] @ g
        new = varimax_criterion(a)
        if history is not None:
            history.append(new)
        gain = new - crit
        crit = new
        if gain < tol:
            break
    out = np.asarray(loadings, dtype=float) @ rot
    if return_rotation:
        return out, rot
    return out


def projection_matrix(loadings) -> np.ndarray:
    """Orthogonal projector onto the column space of ``loadings``."""
    q, _ = np.linalg.qr(np.asarray(loadings, dtype=float))
    return q @ q.T


@dataclass
class ParallelAnalysis:
    count: int
    eigenvalues: np.ndarray        # real data, descending
    threshold: np.ndarray          # per component
    random_mean: np.ndarray
    quantile: float | None
    reps: int

    def __int__(self):
        return self.count


def random_eigenvalues(n: int, p: int, reps: int, rng: np.random.Generator) -> np.ndarray:
    """``reps x p`` descending correlation eigenvalues of standard normal data."""
    x = rng.standard_normal((reps, n, p))
    x = x - x.mean(axis=1, keepdims=True)
    x = x / np.sqrt((x ** 2).sum(axis=1, keepdims=True) / (n - 1))
    c = np.einsum("rni,rnj->rij", x, x) / (n - 1)
    return np.linalg.eigvalsh(c)[:, ::-1]


def parallel_analysis(m, reps: int = 200, quantile: float | None = 0.99, rng=None) -> ParallelAnalysis:
    """Count leading eigenvalues above those of random data of the same shape.

    ``quantile=None`` uses the mean simulated eigenvalue as threshold.
    """
    if reps < 20:
        raise ValueError("parallel analysis needs reps >= 20")
    if rng is None:
        rng = np.random.default_rng()
    z = _values(m)
    if not is_standardized(z):
        z = standardize(z)
    n, p = z.shape
    real, _ = _sym_eig_desc(correlation(z))
    sims = random_eigenvalues(n, p, reps, rng)
    mean = sims.mean(axis=0)
    thr = mean if quantile is None else np.quantile(sims, quantile, axis=0)
    count = 0
    for lam, t in zip(real, thr):
        if lam > t:
            count += 1
        else:
            break
    return ParallelAnalysis(count, real, thr, mean, quantile, reps)


@dataclass
class CcaResult:
    x_scores: np.ndarray
    y_scores: np.ndarray
    x_loadings: np.ndarray         # p x k, corr(feature, own projection)
    y_loadings: np.ndarray         # q x k
    correlations: np.ndarray       # k, descending
    x_weights: np.ndarray
    y_weights: np.ndarray


def _inv_sqrt(s):
    vals, vecs = np.linalg.eigh((s + s.T) / 2.0)
    vals = np.clip(vals, 1e-300, None)
    return (vecs / np.sqrt(vals)) @ vecs.T


def _corr_cols(a, b):
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    na = np.sqrt((a ** 2).sum(axis=0))
    nb = np.sqrt((b ** 2).sum(axis=0))
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    return (a / na).T @ (b / nb)


def cca(x, y, k: int | None = None, ridge: float = 1e-6) -> CcaResult:
    """Canonical correlation analysis with a trace-relative ridge."""
    xv, yv = _values(x), _values(y)
    if xv.shape[0] != yv.shape[0]:
        raise RowCountMismatch(f"row counts differ: {xv.shape[0]} vs {yv.shape[0]}")
    n, p = xv.shape
    q = yv.shape[1]
    kmax = min(p, q, n - 1)
    k = kmax if k is None else k
    if not 1 <= k <= kmax:
        raise ValueError(f"k must be in [1, {kmax}]")
    xc = xv - xv.mean(axis=0)
    yc = yv - yv.mean(axis=0)
    sxx = xc.T @ xc / (n - 1)
    syy = yc.T @ yc / (n - 1)
    sxy = xc.T @ yc / (n - 1)
    sxx = sxx + ridge * np.trace(sxx) / p * np.eye(p)
    syy = syy + ridge * np.trace(syy) / q * np.eye(q)
    wx, wy = _inv_sqrt(sxx), _inv_sqrt(syy)
    u, s, vt = np.linalg.svd(wx @ sxy @ wy)
    a = wx @ u[:, :k]
    b = wy @ vt.T[:, :k]
    xs, ys = xc @ a, yc @ b
    r = np.diag(_corr_cols(xs, ys)).copy()
    flip = r < 0
    b[:, flip] *= -1
    ys[:, flip] *= -1
    r = np.clip(np.abs(r), 0.0, 1.0)
    # near-degenerate spectra: keep the reported correlations descending
    order = np.argsort(-r, kind="stable")
    r, a, b, xs, ys = r[order], a[:, order], b[:, order], xs[:, order], ys[:, order]
    return CcaResult(xs, ys, _corr_cols(xc, xs), _corr_cols(yc, ys), r, a, b)
