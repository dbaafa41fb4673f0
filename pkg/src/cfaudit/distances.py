"""Distribution distances between two embedding sets.

Three realism metrics over pre-extracted features: the Frechet distance
between Gaussian fits (FID), the unbiased squared MMD with a degree-3
polynomial kernel averaged over seeded subsets (KID), and the biased RBF
MMD on unit-normalized rows (CMMD).

All accumulation happens in float64. Reductions go through numpy's
pairwise summation, so a given input yields bit-identical results
run to run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingMatrix
from .errors import MetricError

KID_MAX_SUBSET = 1000
KID_DEFAULT_SUBSETS = 100
CMMD_DEFAULT_BANDWIDTH = 10.0
CMMD_DEFAULT_SCALE = 1000.0

_SYM_TOL = 1e-8


def _check_symmetric(a: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    if float(np.abs(a - a.T).max()) > _SYM_TOL * scale:
        raise MetricError(f"{what} is not symmetric")


@dataclass(frozen=True)
class GaussianStats:
    """Mean, covariance and sample count of one embedding set."""

    mean: np.ndarray
    covariance: np.ndarray
    sample_count: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.shape[0], mean.shape[0]):
            raise MetricError(
                f"mean of dim {mean.shape} does not match covariance {cov.shape}"
            )
        _check_symmetric(cov, "covariance")
        if self.sample_count < 2:
            raise MetricError("need at least 2 samples for a covariance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def fit_gaussian(matrix: EmbeddingMatrix) -> GaussianStats:
    """Column mean and unbiased sample covariance of an embedding matrix."""
    if matrix.n < 2:
        raise MetricError(f"need >=2 samples to fit a Gaussian, got {matrix.n}")
    rows = matrix.rows.astype(np.float64)
    mean = rows.mean(axis=0)
    cov = np.cov(rows, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, covariance=cov, sample_count=matrix.n)


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Symmetric square root of a symmetric PSD matrix via eigh.

    Eigenvalues slightly below zero (within 1e-8 of the largest, numerical
    noise from the decomposition) are clamped to 0; anything more negative
    means the input was genuinely indefinite and is an error.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MetricError(f"expected a square matrix, got shape {a.shape}")
    _check_symmetric(a, "matrix")
    eigvals, eigvecs = np.linalg.eigh(a)
    cutoff = -1e-8 * max(float(eigvals.max(initial=0.0)), 1e-4)
    if float(eigvals.min(initial=0.0)) < cutoff:
        raise MetricError(
            f"matrix is indefinite (eigenvalue {float(eigvals.min()):.3e})"
        )
    root = eigvecs @ np.diag(np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    return (root + root.T) / 2.0


def frechet_distance(p: GaussianStats, q: GaussianStats) -> float:
    """Frechet distance between two Gaussian fits.

    ||mu_p - mu_q||^2 + Tr(C_p + C_q - 2 (C_p C_q)^(1/2)), with the trace
    term evaluated through the symmetric sandwich
    Tr((C_p^(1/2) C_q C_p^(1/2))^(1/2)) so no complex arithmetic appears.
    Identical stats return exactly 0.
    """
    if p.dim != q.dim:
        raise MetricError(f"dim mismatch: {p.dim} vs {q.dim}")
    if np.array_equal(p.mean, q.mean) and np.array_equal(p.covariance, q.covariance):
        return 0.0
    delta = p.mean - q.mean
    root_p = sqrtm_psd(p.covariance)
    sandwich = root_p @ q.covariance @ root_p
    eigvals = np.linalg.eigvalsh((sandwich + sandwich.T) / 2.0)
    cutoff = -1e-8 * max(float(eigvals.max(initial=0.0)), 1e-4)
    if float(eigvals.min(initial=0.0)) < cutoff:
        raise MetricError("covariance product is indefinite")
    trace_cross = float(np.sqrt(np.clip(eigvals, 0.0, None)).sum())
    value = (
        float(delta @ delta)
        + float(np.trace(p.covariance))
        + float(np.trace(q.covariance))
        - 2.0 * trace_cross
    )
    if value < -1e-6:
        raise MetricError(f"distance came out negative ({value:.3e})")
    return max(value, 0.0)


def _polynomial_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a.shape[1]
    return (a @ b.T / d + 1.0) ** 3


def _mmd2_unbiased(kxx: np.ndarray, kyy: np.ndarray, kxy: np.ndarray) -> float:
    m = kxx.shape[0]
    sum_xx = float(kxx.sum() - np.trace(kxx))
    sum_yy = float(kyy.sum() - np.trace(kyy))
    sum_xy = float(kxy.sum())
    return sum_xx / (m * (m - 1)) + sum_yy / (m * (m - 1)) - 2.0 * sum_xy / (m * m)


def kid_unbiased(
    x: EmbeddingMatrix,
    y: EmbeddingMatrix,
    subset_size: int | None = None,
    n_subsets: int = KID_DEFAULT_SUBSETS,
    seed: int = 0,
) -> tuple[float, float]:
    """Mean and standard deviation of unbiased MMD^2 over seeded subsets.

    The kernel is (a.b/d + 1)^3. Each of ``n_subsets`` rounds draws
    ``subset_size`` rows without replacement from each set; the default
    subset size is min(1000, n).
    """
    if x.dim != y.dim:
        raise MetricError(f"dim mismatch: {x.dim} vs {y.dim}")
    n = min(x.n, y.n)
    if subset_size is None:
        subset_size = min(KID_MAX_SUBSET, n)
    if subset_size < 2:
        raise MetricError(f"subset size {subset_size} is below the minimum of 2")
    if subset_size > n:
        raise MetricError(
            f"subset size {subset_size} exceeds the smaller set ({n} rows)"
        )
    if n_subsets < 1:
        raise MetricError("need at least one subset")
    xr = x.rows.astype(np.float64)
    yr = y.rows.astype(np.float64)
    rng = np.random.default_rng(seed)
    estimates = np.empty(n_subsets, dtype=np.float64)
    for t in range(n_subsets):
        xi = xr[rng.choice(x.n, size=subset_size, replace=False)]
        yi = yr[rng.choice(y.n, size=subset_size, replace=False)]
        estimates[t] = _mmd2_unbiased(
            _polynomial_kernel(xi, xi),
            _polynomial_kernel(yi, yi),
            _polynomial_kernel(xi, yi),
        )
    return float(estimates.mean()), float(estimates.std(ddof=0))


def cmmd(
    x: EmbeddingMatrix,
    y: EmbeddingMatrix,
    bandwidth: float = CMMD_DEFAULT_BANDWIDTH,
    scale: float = CMMD_DEFAULT_SCALE,
) -> float:
    """Scaled biased MMD^2 with a Gaussian RBF kernel on unit-normalized rows.

    k(a, b) = exp(-||a - b||^2 / (2 sigma^2)) with sigma = ``bandwidth``;
    the V-statistic (all pairs incl. i = j) keeps the value non-negative,
    and identical inputs give exactly 0.
    """
    if x.dim != y.dim:
        raise MetricError(f"dim mismatch: {x.dim} vs {y.dim}")
    if x.n == 0 or y.n == 0:
        raise MetricError("both embedding sets must be non-empty")
    if bandwidth <= 0:
        raise MetricError(f"bandwidth must be positive, got {bandwidth}")

    def unit(rows: np.ndarray) -> np.ndarray:
        out = rows.astype(np.float64)
        norms = np.linalg.norm(out, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise MetricError(f"zero-norm row {int(zero[0])}")
        return out / norms[:, None]

    def rbf(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        sq = np.clip(
            (a * a).sum(axis=1)[:, None]
            + (b * b).sum(axis=1)[None, :]
            - 2.0 * (a @ b.T),
            0.0,
            None,
        )
        return np.exp(-sq / (2.0 * bandwidth * bandwidth))

    xu = unit(x.rows)
    yu = unit(y.rows)
    mmd2 = (
        float(rbf(xu, xu).mean())
        + float(rbf(yu, yu).mean())
        - 2.0 * float(rbf(xu, yu).mean())
    )
    return scale * max(mmd2, 0.0)
