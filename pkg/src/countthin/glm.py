"""Negative binomial regression with a log link and Wald inference.

Coefficients and dispersion are estimated by full maximum likelihood:
iteratively reweighted least squares for the coefficients given b,
alternating with a golden-section search over log b given the fitted means,
until the joint log-likelihood stabilizes.  A profile optimum at the upper
search boundary is reported as b = +inf and the coefficients are refit
under the exact Poisson model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaln

from .errors import ConvergenceWarning, DataError, ParameterError, SingularDesignError

_LOG_B_LO = math.log(1e-4)
_LOG_B_HI = math.log(1e8)
_COEF_CLIP = 30.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class GlmFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    wald_z: np.ndarray
    p_values: np.ndarray
    dispersion_b: float
    log_likelihood: float
    converged: bool
    iterations: int


class _YSummary:
    """Per-response constants reused across likelihood evaluations."""

    def __init__(self, y):
        self.y = y
        self.unique, self.counts = np.unique(y, return_counts=True)
        self.lgamma_y1 = float(np.sum(gammaln(y + 1.0)))


def _nb_loglik(ys: _YSummary, mu, b):
    y = ys.y
    if math.isinf(b):
        return float(np.sum(y * np.log(mu)) - np.sum(mu) - ys.lgamma_y1)
    # lgamma(y+b) - lgamma(b) - y*log(b), grouped by unique y; the explicit
    # log1p sum avoids the gammaln cancellation that dominates at large b
    if b > 1e4 and ys.unique[-1] < 5e6:
        steps = np.log1p(np.arange(int(ys.unique[-1])) / b)
        csum = np.concatenate([[0.0], np.cumsum(steps)])
        bracket = csum[ys.unique.astype(np.int64)]
    else:
        bracket = gammaln(ys.unique + b) - gammaln(b) - ys.unique * math.log(b)
    lg = float(np.dot(ys.counts, bracket)) - ys.lgamma_y1
    lg += float(np.sum(y * np.log(mu)) - np.sum((b + y) * np.log1p(mu / b)))
    return lg


def _irls(y, design, b, offset, beta_start=None, max_iter=50, tol=1e-10):
    """Coefficients given dispersion b; returns (beta, mu, converged, clipped)."""
    n, q = design.shape
    if beta_start is None:
        beta = np.zeros(q)
        if np.all(design[:, 0] == 1.0):
            beta[0] = math.log(max(y.mean(), 1e-8))
    else:
        beta = beta_start.copy()
    clipped = False
    converged = False
    for _ in range(max_iter):
        eta = design @ beta + offset
        mu = np.exp(np.clip(eta, -700, 700))
        mu = np.maximum(mu, 1e-300)
        w = mu if math.isinf(b) else mu * b / (mu + b)
        z = (eta - offset) + (y - mu) / mu
        xw = design * w[:, None]
        try:
            new_beta = np.linalg.solve(xw.T @ design, xw.T @ z)
        except np.linalg.LinAlgError:
            break
        if np.any(np.abs(new_beta) > _COEF_CLIP):
            new_beta = np.clip(new_beta, -_COEF_CLIP, _COEF_CLIP)
            clipped = True
        step = np.max(np.abs(new_beta - beta))
        beta = new_beta
        if step < tol:
            converged = True
            break
    eta = design @ beta + offset
    mu = np.maximum(np.exp(np.clip(eta, -700, 700)), 1e-300)
    return beta, mu, converged, clipped


def _golden_log_b(evaluate, lo=_LOG_B_LO, hi=_LOG_B_HI, tol=1e-6):
    """Maximize a unimodal function of log b on [lo, hi]; returns argmax."""
    a, d = lo, hi
    c = d - _GOLDEN * (d - a)
    e = a + _GOLDEN * (d - a)
    fc, fe = evaluate(c), evaluate(e)
    while d - a > tol:
        if fc >= fe:
            d, e, fe = e, c, fc
            c = d - _GOLDEN * (d - a)
            fc = evaluate(c)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (d - a)
            fe = evaluate(e)
    return (a + d) / 2.0


def _profile_dispersion(ys: _YSummary, mu):
    """Profile-ML dispersion given means mu: +inf unless a finite b beats the Poisson fit."""
    log_b = _golden_log_b(lambda t: _nb_loglik(ys, mu, math.exp(t)))
    if log_b >= _LOG_B_HI - 1e-5:
        return math.inf
    ll_finite = _nb_loglik(ys, mu, math.exp(log_b))
    ll_poisson = _nb_loglik(ys, mu, math.inf)
    if ll_finite <= ll_poisson + 1e-8 * (abs(ll_poisson) + 1.0):
        return math.inf
    return math.exp(log_b)


def _check_response(y):
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size == 0:
        raise DataError("empty response")
    if np.any(y < 0) or np.any(y != np.floor(y)) or not np.all(np.isfinite(y)):
        raise DataError("response must be nonnegative integers")
    return y


def fit_nb_glm(y, design, offset=None, max_outer=100) -> GlmFit:
    """Fit counts y on a full-rank design (n x q) by full ML; log link."""
    y = _check_response(y)
    design = np.asarray(design, dtype=np.float64)
    if design.ndim != 2 or design.shape[0] != y.size:
        raise DataError(f"design must be 2-D with {y.size} rows")
    n, q = design.shape
    if n < q + 1:
        raise DataError(f"need at least q+1={q + 1} observations, got {n}")
    if np.linalg.matrix_rank(design) < q:
        raise SingularDesignError("design matrix is rank deficient")
    offset = np.zeros(n) if offset is None else np.asarray(offset, dtype=np.float64)
    ys = _YSummary(y)

    b = math.inf
    beta, mu, irls_ok, clipped = _irls(y, design, b, offset)
    ll = _nb_loglik(ys, mu, b)
    outer = 0
    outer_converged = False
    for outer in range(1, max_outer + 1):
        b = _profile_dispersion(ys, mu)
        beta, mu, irls_ok, clipped = _irls(y, design, b, offset, beta_start=beta)
        new_ll = _nb_loglik(ys, mu, b)
        if abs(new_ll - ll) <= 1e-9 * (abs(ll) + 1.0):
            ll = new_ll
            outer_converged = True
            break
        ll = new_ll

    if math.isinf(b):
        d = mu
    else:
        d = b * mu * (b + y) / (b + mu) ** 2
    info = design.T @ (design * d[:, None])
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.maximum(np.diag(cov), 0.0))
        invertible = bool(np.all(se > 0))
    except np.linalg.LinAlgError:
        se = np.full(q, np.nan)
        invertible = False
    converged = bool(irls_ok and outer_converged and not clipped and invertible)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, 0.0)
    p = erfc(np.abs(z) / math.sqrt(2.0))
    return GlmFit(beta, se, z, p, b, ll, converged, outer)


def wald_pvalue(fit: GlmFit, index) -> float:
    """Two-sided normal tail p-value of coefficient `index`; 1.0 when the fit did not converge."""
    if not 0 <= index < fit.coefficients.size:
        raise ParameterError(f"coefficient index {index} out of range")
    if not fit.converged:
        warnings.warn("fit did not converge; reporting conservative p = 1", ConvergenceWarning)
        return 1.0
    return float(fit.p_values[index])
