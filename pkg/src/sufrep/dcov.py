"""Empirical distance covariance, its gradient, and permutation thresholds.

Two estimators are provided, both built from the pairwise Euclidean
distance matrices a_ij = ||Z_i - Z_j|| and b_ij = ||Y_i - Y_j||:

``dcov_v``
    The V-statistic  S1 + S2 - 2*S3  with

        S1 = (1/n^2) sum_ij a_ij b_ij
        S2 = ((1/n^2) sum_ij a_ij) ((1/n^2) sum_ij b_ij)
        S3 = (1/n^3) sum_i (sum_j a_ij)(sum_u b_iu).

    It is non-negative, O(n^2), and differentiable almost everywhere, so
    it is the form used inside training loops.

``dcov_u``
    The combinatorially normalized form: the first term averages a_ij b_ij
    over the C(n,2) unordered pairs, the second multiplies the two pair
    averages, and the third subtracts twice the mean of a_ij b_iu over all
    ordered triples of distinct indices (i, j, u).  It can be slightly
    negative in finite samples and is the form reported as a modality
    utility.

All estimators are invariant under a simultaneous row permutation of Z
and Y, invariant under translations, and 1-homogeneous under scaling of
either argument.

Reduction order note: every sum here is a numpy reduction over the full
n x n distance matrices in C row-major order, so results are bit-stable
for fixed inputs.
"""

import numba
import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError, InsufficientSamplesError

# Pairs closer than this are treated as coincident; their unit vector (and
# hence their gradient contribution) is taken to be zero.
ZERO_DIST = 1e-12


def _as_sample_matrix(m, name):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DataError(f"{name} must be a vector or matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise DataError(f"{name} contains non-finite values")
    return m


def _paired(z, y):
    z = _as_sample_matrix(z, "Z")
    y = _as_sample_matrix(y, "Y")
    if z.shape[0] != y.shape[0]:
        raise DataError(f"row counts differ: {z.shape[0]} vs {y.shape[0]}")
    return z, y


def pairwise_distances(m: np.ndarray) -> np.ndarray:
    """Symmetric matrix of Euclidean distances between rows of ``m``."""
    m = _as_sample_matrix(m, "input")
    return cdist(m, m)


def _vstat_from_dists(a, b):
    n = a.shape[0]
    s1 = float((a * b).sum()) / (n * n)
    s2 = (float(a.sum()) / (n * n)) * (float(b.sum()) / (n * n))
    s3 = float(a.sum(axis=1) @ b.sum(axis=1)) / (n**3)
    return s1 + s2 - 2.0 * s3


def _ustat_from_dists(a, b, row_a=None, row_b=None):
    n = a.shape[0]
    if row_a is None:
        row_a = a.sum(axis=1)
    if row_b is None:
        row_b = b.sum(axis=1)
    sum_ab = float((a * b).sum())
    pairs = n * (n - 1)
    term1 = sum_ab / pairs
    term2 = (float(a.sum()) / pairs) * (float(b.sum()) / pairs)
    # sum of a_ij b_iu over ordered triples of distinct indices
    triple_sum = float(row_a @ row_b) - sum_ab
    term3 = 2.0 * triple_sum / (pairs * (n - 2))
    return term1 + term2 - term3


def dcov_v(z, y) -> float:
    """V-statistic distance covariance between the rows of ``z`` and ``y``.

    Requires n >= 2 aligned rows.  Zero exactly when either argument is
    constant across rows; never negative.
    """
    z, y = _paired(z, y)
    if z.shape[0] < 2:
        raise InsufficientSamplesError(f"need at least 2 rows, got {z.shape[0]}")
    return _vstat_from_dists(cdist(z, z), cdist(y, y))


def dcov_u(z, y) -> float:
    """Pair/triple-normalized distance covariance (may be slightly negative).

    Requires n >= 3.  Used for reported utilities; ``dcov_v`` is the form
    differentiated during training.
    """
    z, y = _paired(z, y)
    if z.shape[0] < 3:
        raise InsufficientSamplesError(f"need at least 3 rows, got {z.shape[0]}")
    return _ustat_from_dists(cdist(z, z), cdist(y, y))


def dcor(z, y) -> float:
    """Distance correlation in [0, 1] built from the V-statistic.

    Returns 0 when either marginal distance variance vanishes (constant
    rows), by convention.
    """
    z, y = _paired(z, y)
    if z.shape[0] < 2:
        raise InsufficientSamplesError(f"need at least 2 rows, got {z.shape[0]}")
    a = cdist(z, z)
    b = cdist(y, y)
    vzz = _vstat_from_dists(a, a)
    vyy = _vstat_from_dists(b, b)
    if vzz <= 0.0 or vyy <= 0.0:
        return 0.0
    r = _vstat_from_dists(a, b) / np.sqrt(vzz * vyy)
    return float(min(max(r, 0.0), 1.0))


def dcov_grad(z, y) -> np.ndarray:
    """Exact gradient of ``dcov_v(z, y)`` with respect to the entries of ``z``.

    Uses d||Z_i - Z_j||/dZ_i = (Z_i - Z_j) / ||Z_i - Z_j||, with the
    convention that coincident rows (distance below ``ZERO_DIST``)
    contribute zero.  Returns an array shaped like ``z`` (an (n, d)
    matrix even if ``z`` was passed as a vector).
    """
    z, y = _paired(z, y)
    n = z.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"need at least 2 rows, got {n}")
    a = cdist(z, z)
    b = cdist(y, y)
    row_b = b.sum(axis=1)
    # double-centered b; for symmetric b the column means equal the row means
    bc = b - row_b[:, None] / n - row_b[None, :] / n + b.sum() / (n * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(a < ZERO_DIST, 0.0, bc / a)
    np.fill_diagonal(w, 0.0)
    grad = (2.0 / (n * n)) * (w.sum(axis=1)[:, None] * z - w @ z)
    return grad


@numba.njit(cache=True, fastmath=True)
def _permuted_cross_sum(a, b, pi):
    """sum_ij a_ij * b[pi_i, pi_j] without materializing the permuted matrix."""
    n = a.shape[0]
    total = 0.0
    for i in range(n):
        ai = a[i]
        bi = b[pi[i]]
        acc = 0.0
        for j in range(n):
            acc += ai[j] * bi[pi[j]]
        total += acc
    return total


def perm_threshold(z, y, num_perms=199, level=0.05, seed=0) -> float:
    """Permutation-null threshold for the pair/triple-normalized estimator.

    Computes ``dcov_u(z, y_pi)`` for ``num_perms`` independent row
    permutations ``pi`` of ``y`` and returns the empirical (1 - level)
    quantile (inverse-ECDF convention, so level -> 0 returns the maximum
    permuted statistic).  Deterministic given ``seed``.
    """
    if num_perms < 19:
        raise ConfigError(f"need at least 19 permutations, got {num_perms}")
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must be in (0, 1), got {level}")
    z, y = _paired(z, y)
    n = z.shape[0]
    if n < 3:
        raise InsufficientSamplesError(f"need at least 3 rows, got {n}")
    a = cdist(z, z)
    b = cdist(y, y)
    row_a = a.sum(axis=1)
    row_b = b.sum(axis=1)
    # only the first and third terms move under permutation; both reduce to
    # the permuted cross sum and an O(n) row-sum pairing
    pairs = n * (n - 1)
    term2 = (float(a.sum()) / pairs) * (float(b.sum()) / pairs)
    rng = np.random.default_rng(seed)
    stats = np.empty(num_perms)
    for t in range(num_perms):
        pi = rng.permutation(n)
        sum_ab = _permuted_cross_sum(a, b, pi)
        triple_sum = float(row_a @ row_b[pi]) - sum_ab
        stats[t] = sum_ab / pairs + term2 - 2.0 * triple_sum / (pairs * (n - 2))
    stats.sort()
    k = int(np.ceil((1.0 - level) * num_perms)) - 1
    return float(stats[k])
