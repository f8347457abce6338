"""Count splitting and its closed-form theory.

nb_count_split decomposes each matrix entry X_ij by a Dirichlet-multinomial
draw with parameters (eps_1 b'_j, ..., eps_M b'_j); columns with b'_j = +inf
take the exact multinomial (Poisson splitting) path.  When b'_j equals the
data's true overdispersion b_j, the folds are mutually independent with
NB(eps_m mu, eps_m b) marginals.

Entry (i, j) draws from RNG stream i*p + j regardless of traversal order,
chunking, or thread count, so output is bitwise reproducible.  Zero entries
allocate zeros without consuming any draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import _dirichlet_multinomial_core, _multinomial_core
from .errors import DataError, ParameterError
from .matrix import CountMatrix
from .rng import uniform_block

_CHUNK = 1 << 21  # entries per uniform-generation batch; results are chunk-invariant


@dataclass(frozen=True)
class ThinPlan:
    """Fold count M, fold weights eps (sum 1), per-column thinning dispersion b'.

    b_prime is a scalar (broadcast over columns) or a length-p vector; every
    value must be positive or +inf.  Weights that do not sum to 1 within
    1e-12 are rejected rather than renormalized.
    """

    n_folds: int
    eps: tuple
    b_prime: object

    def __post_init__(self):
        if not isinstance(self.n_folds, int) or self.n_folds < 2:
            raise ParameterError(f"n_folds must be an integer >= 2, got {self.n_folds!r}")
        eps = np.asarray(self.eps, dtype=np.float64)
        if eps.ndim != 1 or eps.size != self.n_folds:
            raise ParameterError(f"eps must have length {self.n_folds}")
        if np.any(eps <= 0) or np.any(eps >= 1) or not np.all(np.isfinite(eps)):
            raise ParameterError("every eps_m must lie strictly inside (0, 1)")
        if abs(eps.sum() - 1.0) > 1e-12:
            raise ParameterError(f"eps must sum to 1 within 1e-12, got {float(eps.sum())!r}")
        object.__setattr__(self, "eps", tuple(float(e) for e in eps))
        bp = np.asarray(self.b_prime, dtype=np.float64)
        if bp.ndim > 1:
            raise ParameterError("b_prime must be a scalar or a vector")
        if np.any(np.isnan(bp)) or np.any(bp <= 0):
            raise ParameterError("every b_prime must be positive or +inf")
        if bp.ndim == 0:
            object.__setattr__(self, "b_prime", float(bp))
        else:
            bp = bp.copy()
            bp.setflags(write=False)
            object.__setattr__(self, "b_prime", bp)

    def eps_array(self):
        return np.asarray(self.eps, dtype=np.float64)

    def b_prime_for(self, n_cols):
        """b' as a length-n_cols vector; validates vector length."""
        if np.ndim(self.b_prime) == 0:
            return np.full(n_cols, self.b_prime)
        if len(self.b_prime) != n_cols:
            raise ParameterError(
                f"b_prime has length {len(self.b_prime)}, matrix has {n_cols} columns")
        return np.asarray(self.b_prime, dtype=np.float64)


@dataclass(frozen=True)
class FoldSet:
    """M same-shape folds that sum entrywise to the input matrix."""

    folds: tuple
    plan: ThinPlan
    seed: int

    def __len__(self):
        return len(self.folds)

    def fold(self, m):
        if not 0 <= m < len(self.folds):
            raise ParameterError(f"fold index {m} out of range")
        return self.folds[m]


def split_entry_values(values, stream_ids, b_prime, eps, seed):
    """Split raw entry values; returns an (n_entries, M) int64 array.

    Each entry draws only from its own stream: positions 0..2M-1 feed the
    Gamma pairs and 2M..3M-2 the binomial walk (finite b'), or 0..M-2 feed
    the binomial walk (infinite b').
    """
    values = np.asarray(values, dtype=np.int64)
    stream_ids = np.asarray(stream_ids, dtype=np.uint64)
    b_prime = np.asarray(b_prime, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    m = eps.size
    out = np.empty((values.size, m), dtype=np.int64)
    finite = np.isfinite(b_prime)
    for sel, is_finite in ((np.nonzero(finite)[0], True), (np.nonzero(~finite)[0], False)):
        for lo in range(0, sel.size, _CHUNK):
            idx = sel[lo:lo + _CHUNK]
            if is_finite:
                u = uniform_block(seed, stream_ids[idx], 3 * m - 1)
                alphas = eps[None, :] * b_prime[idx, None]
                out[idx] = _dirichlet_multinomial_core(values[idx], alphas, u)
            else:
                u = uniform_block(seed, stream_ids[idx], m - 1)
                probs = np.broadcast_to(eps, (idx.size, m))
                out[idx] = _multinomial_core(values[idx], probs, u)
    return out


def nb_count_split(X: CountMatrix, plan: ThinPlan, seed) -> FoldSet:
    """Split X into plan.n_folds independent folds (per-entry Dirichlet-multinomial)."""
    if not isinstance(X, CountMatrix):
        raise DataError("X must be a CountMatrix")
    b_prime_cols = plan.b_prime_for(X.n_cols)
    rows, cols, vals = X.coo()
    stream_ids = rows.astype(np.uint64) * np.uint64(X.n_cols) + cols.astype(np.uint64)
    fold_vals = split_entry_values(vals, stream_ids, b_prime_cols[cols], plan.eps_array(), seed)
    folds = []
    for m in range(plan.n_folds):
        if X.is_sparse:
            keep = fold_vals[:, m] > 0
            folds.append(CountMatrix.from_coo(X.n_rows, X.n_cols, rows[keep], cols[keep],
                                              fold_vals[keep, m], X.row_names, X.col_names))
        else:
            dense = np.zeros(X.shape, dtype=np.int64)
            dense[rows, cols] = fold_vals[:, m]
            folds.append(CountMatrix.from_dense(dense, X.row_names, X.col_names))
    return FoldSet(tuple(folds), plan, int(seed))


def poisson_count_split(X: CountMatrix, eps, seed) -> FoldSet:
    """Multinomial splitting of each entry; identical to nb_count_split with b' = +inf."""
    eps = np.asarray(eps, dtype=np.float64)
    return nb_count_split(X, ThinPlan(eps.size, tuple(eps), math.inf), seed)


def fold_complement(fs: FoldSet, m) -> CountMatrix:
    """Entrywise sum of all folds except m (the input minus fold m)."""
    if not 0 <= m < len(fs.folds):
        raise ParameterError(f"fold index {m} out of range")
    total = np.zeros(fs.folds[0].shape, dtype=np.int64)
    for k, fold in enumerate(fs.folds):
        if k != m:
            total += fold.to_dense()
    return fs.folds[m].like(total)


def _check_domain(**kwargs):
    for name, (value, allow_inf) in kwargs.items():
        value = float(value)
        if math.isnan(value) or value <= 0 or (math.isinf(value) and not allow_inf):
            raise ParameterError(f"{name} must be positive{' (or +inf)' if allow_inf else ' and finite'}, got {value!r}")


def _check_eps(eps_m):
    eps_m = float(eps_m)
    if not 0 < eps_m < 1:
        raise ParameterError(f"eps_m must lie strictly inside (0, 1), got {eps_m!r}")
    return eps_m


def correlation_at_infinite_bprime(mu, b, eps_m):
    """Correlation between a fold and its complement when splitting NB(mu, b) with b' = +inf."""
    _check_domain(mu=(mu, False), b=(b, True))
    eps_m = _check_eps(eps_m)
    if math.isinf(b):
        return 0.0
    w = eps_m * (1.0 - eps_m)
    return math.sqrt(w) / math.sqrt(b * b / (mu * mu) + b / mu + w)


def thinning_moments(mu, b, b_prime, eps_m):
    """(mean, variance, covariance-with-complement) of fold m when NB(mu, b) is split with b'."""
    _check_domain(mu=(mu, False), b=(b, True), b_prime=(b_prime, True))
    eps_m = _check_eps(eps_m)
    mu, b, b_prime = float(mu), float(b), float(b_prime)
    ratio = 0.0 if math.isinf(b_prime) else (b + 1.0) / (b_prime + 1.0)
    quad = 0.0 if math.isinf(b) else mu * mu / b
    var_x = mu + quad
    w = eps_m * (1.0 - eps_m)
    mean = eps_m * mu
    if math.isinf(b):
        # quad vanishes but quad * (ratio - 1) has the finite limit
        # mu^2 / (b' + 1) when b' is finite
        cross = 0.0 if math.isinf(b_prime) else mu * mu / (b_prime + 1.0)
    else:
        cross = quad * (ratio - 1.0)
    var = eps_m * var_x + w * cross
    cov = -w * cross
    return mean, var, cov


def fisher_information_nb(mu, b):
    """Fisher information about mu in one NB(mu, b) observation: b/((b+mu) mu)."""
    _check_domain(mu=(mu, False), b=(b, True))
    if math.isinf(b):
        return 1.0 / mu
    return b / ((b + mu) * mu)


def fold_information(mu, b, eps_m):
    """Fisher information about mu carried by fold m: eps_m times the total.

    Values are arranged so that fold_information(eps) and
    fold_information(1-eps) sum to fisher_information_nb exactly in floating
    point (whenever 1-eps is itself exactly representable): the majority side
    is total - fl(eps_small * total) rounded once, and the minority side is
    that value's exact complement, so the pair reconstructs the total with no
    rounding at all.  Each side is within one ulp of eps_m * total.
    """
    eps_m = _check_eps(eps_m)
    total = fisher_information_nb(mu, b)
    # 1 - eps is exact for eps in [0.5, 1) (same binade as 1), so both calls
    # of a complementary pair agree on the minority weight
    small = min(eps_m, 1.0 - eps_m)
    majority = total - small * total
    if eps_m > 0.5:
        return majority
    return total - majority
