"""Per-gene overdispersion estimation.

Two steps: (1) for each gene, a profile maximum-likelihood estimate of b
from an NB regression of the gene's counts on an intercept plus a
log-total-count offset whose coefficient is fixed at 1; (2) a Gaussian
kernel regression (Silverman bandwidth) of the overdispersion factor
log1p(mean/b) on log10 mean expression, back-transformed to the smoothed
b_hat.  Genes whose MLE diverged enter the smoother with factor 0 and take
their b_hat from it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, EstimationError
from .glm import fit_nb_glm
from .matrix import CountMatrix


@dataclass
class DispersionEstimate:
    """Per-gene smoothed dispersions, raw MLEs, mean expressions, and flags.

    diagnostics[j] is one of "ok" (finite MLE), "mle_inf" (profile likelihood
    monotone, b_hat taken from the smoother), "all_zero" (gene has no counts,
    b_hat = +inf), or the same with ",unsmoothed" appended when too few genes
    had finite MLEs to fit the smoother.
    """

    b_hat: np.ndarray
    b_mle: np.ndarray
    mean_expr: np.ndarray
    diagnostics: tuple


def nb_profile_mle_dispersion(y, offsets):
    """Profile-ML overdispersion of counts y with fixed log-exposure offsets.

    Returns +inf when the profile likelihood keeps increasing in b (the
    counts look Poisson or underdispersed).
    """
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    offsets = np.asarray(offsets, dtype=np.float64).reshape(-1)
    if y.size < 2:
        raise DataError("need at least 2 observations")
    if offsets.size != y.size:
        raise DataError("offsets must match y in length")
    if np.all(y == 0):
        raise EstimationError("all-zero response has no dispersion estimate")
    fit = fit_nb_glm(y, np.ones((y.size, 1)), offset=offsets)
    return fit.dispersion_b


def _silverman_bandwidth(x):
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    h = 0.9 * spread * x.size ** (-0.2)
    return max(h, 1e-8)


def _kernel_smooth(x, t, x_query, bandwidth):
    z = (x_query[:, None] - x[None, :]) / bandwidth
    w = np.exp(-0.5 * z * z)
    return (w @ t) / w.sum(axis=1)


def estimate_dispersions(X: CountMatrix, bandwidth=None) -> DispersionEstimate:
    """Smoothed per-gene dispersion estimates for a cells-by-genes matrix."""
    if X.n_rows < 2:
        raise DataError("need at least 2 rows")
    totals = X.row_totals()
    keep = totals > 0
    if keep.sum() < 2:
        raise DataError("fewer than 2 cells with nonzero totals")
    offsets = np.log(totals[keep].astype(np.float64))
    p = X.n_cols
    mean_expr = np.asarray(X.col_means(), dtype=np.float64)
    b_mle = np.empty(p)
    flags = []
    for j in range(p):
        y = X.column(j)[keep]
        if not np.any(y):
            b_mle[j] = np.nan
            flags.append("all_zero")
            continue
        b_mle[j] = nb_profile_mle_dispersion(y, offsets)
        flags.append("mle_inf" if math.isinf(b_mle[j]) else "ok")

    fit_sel = ~np.isnan(b_mle)
    b_hat = np.full(p, np.inf)
    n_finite = int(np.sum(np.isfinite(b_mle[fit_sel])))
    if n_finite < 5:
        warnings.warn(f"only {n_finite} genes with finite dispersion MLE; returning raw values unsmoothed")
        b_hat[fit_sel] = b_mle[fit_sel]
        flags = [f + ",unsmoothed" for f in flags]
        return DispersionEstimate(b_hat, b_mle, mean_expr, tuple(flags))

    x = np.log10(mean_expr[fit_sel])
    with np.errstate(invalid="ignore"):
        factor = np.where(np.isfinite(b_mle[fit_sel]), mean_expr[fit_sel] / b_mle[fit_sel], 0.0)
    t = np.log1p(factor)
    h = _silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    t_hat = _kernel_smooth(x, t, x, h)
    factor_hat = np.expm1(t_hat)
    smoothed = np.where(factor_hat > 0, mean_expr[fit_sel] / np.where(factor_hat > 0, factor_hat, 1.0), np.inf)
    b_hat[fit_sel] = smoothed
    return DispersionEstimate(b_hat, b_mle, mean_expr, tuple(flags))
