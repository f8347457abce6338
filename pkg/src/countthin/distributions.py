"""Seeded samplers and density evaluators.

All samplers are driven by an explicit RngStream and consume a fixed number
of uniforms per draw, so vectorized and scalar calls agree bitwise:

    poisson 1, nb 1, beta 1, gamma 2, beta-binomial 2,
    multinomial M-1, dirichlet 2M, dirichlet-multinomial 3M-1.

Gamma draws use the inverse CDF of Gamma(shape+1) boosted down by a uniform
power, computed in log space; that construction stays accurate for shapes
as small as 1e-3, which arise when thinning with very small b'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv, gammaincinv, gammaln

from ._kernels import binom_quantile, nb_quantile, poisson_quantile
from .errors import ParameterError
from .rng import RngStream


@dataclass(frozen=True)
class NBParams:
    """Negative binomial with mean mu and overdispersion b (variance mu + mu^2/b).

    b = math.inf selects the exact Poisson code path, not a large-b
    approximation.
    """

    mu: float
    b: float

    def __post_init__(self):
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu) and self.mu > 0):
            raise ParameterError(f"mu must be positive and finite, got {self.mu!r}")
        if not (isinstance(self.b, (int, float)) and self.b > 0) or math.isnan(self.b):
            raise ParameterError(f"b must be positive (or +inf), got {self.b!r}")

    @property
    def is_poisson(self):
        return math.isinf(self.b)

    def variance(self):
        if self.is_poisson:
            return self.mu
        return self.mu + self.mu * self.mu / self.b


def _n_draws(size):
    if size is None:
        return 1
    n = int(size)
    if n < 0:
        raise ParameterError("size must be nonnegative")
    return n


def _scalar_or_vector(values, size):
    if size is None:
        return values[0]
    return values


def _check_positive(value, name):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")
    return value


def _check_total(total):
    if total < 0:
        raise ParameterError(f"total must be nonnegative, got {total!r}")
    if total != int(total):
        raise ParameterError(f"total must be an integer, got {total!r}")
    return int(total)


def sample_poisson(mu, rng: RngStream, size=None):
    """Poisson(mu) draws; one uniform per draw."""
    mu = _check_positive(mu, "mu")
    n = _n_draws(size)
    u = rng.uniforms(n)
    draws = poisson_quantile(u, np.full(n, mu))
    return _scalar_or_vector(draws, size)


def sample_nb(params: NBParams, rng: RngStream, size=None):
    """NB(mu, b) draws; Poisson(mu) when b is +inf; one uniform per draw."""
    n = _n_draws(size)
    u = rng.uniforms(n)
    if params.is_poisson:
        draws = poisson_quantile(u, np.full(n, params.mu))
    else:
        draws = nb_quantile(u, np.full(n, params.mu), np.full(n, params.b))
    return _scalar_or_vector(draws, size)


def _log_gamma_draws(alphas, u1, u2):
    """log of Gamma(alphas, 1) draws: log Ginv(a+1, u1) + log(u2)/a."""
    return np.log(gammaincinv(alphas + 1.0, u1)) + np.log(u2) / alphas


def sample_gamma(shape, rate, rng: RngStream, size=None):
    """Gamma(shape, rate) draws (mean shape/rate); two uniforms per draw."""
    shape = _check_positive(shape, "shape")
    rate = _check_positive(rate, "rate")
    n = _n_draws(size)
    u = rng.uniforms(2 * n).reshape(n, 2)
    draws = np.exp(_log_gamma_draws(np.full(n, shape), u[:, 0], u[:, 1])) / rate
    return _scalar_or_vector(draws, size)


def sample_beta(a, b, rng: RngStream, size=None):
    """Beta(a, b) draws by inverse CDF; one uniform per draw."""
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    n = _n_draws(size)
    draws = betaincinv(a, b, rng.uniforms(n))
    return _scalar_or_vector(draws, size)


def _check_alphas(alphas):
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.ndim != 1 or alphas.size < 2:
        raise ParameterError("alphas must be a vector with at least 2 components")
    if not np.all(np.isfinite(alphas)) or np.any(alphas <= 0):
        raise ParameterError("all alphas must be positive and finite")
    return alphas


def _suffix_logsumexp(logg):
    """lse[:, m] = logsumexp(logg[:, m:]) computed right to left."""
    lse = np.empty_like(logg)
    lse[:, -1] = logg[:, -1]
    for m in range(logg.shape[1] - 2, -1, -1):
        lse[:, m] = np.logaddexp(logg[:, m], lse[:, m + 1])
    return lse


def sample_dirichlet(alphas, rng: RngStream, size=None):
    """Dirichlet(alphas) draws via normalized Gamma draws; 2M uniforms per draw."""
    alphas = _check_alphas(alphas)
    n = _n_draws(size)
    m = alphas.size
    u = rng.uniforms(2 * m * n).reshape(n, 2 * m)
    logg = _log_gamma_draws(np.broadcast_to(alphas, (n, m)), u[:, 0::2], u[:, 1::2])
    draws = np.exp(logg - _suffix_logsumexp(logg)[:, :1])
    if size is None:
        return draws[0]
    return draws


def _check_probs(probs):
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 2:
        raise ParameterError("probs must be a vector with at least 2 components")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise ParameterError("probabilities must be nonnegative and finite")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ParameterError(f"probabilities must sum to 1, got {float(probs.sum())!r}")
    return probs


def _multinomial_core(totals, probs, u):
    """Sequential conditional binomials; totals (N,), probs (N, M), u (N, M-1)."""
    n, m = probs.shape
    suffix = np.flip(np.cumsum(np.flip(probs, axis=1), axis=1), axis=1)
    remaining = totals.astype(np.int64).copy()
    out = np.empty((n, m), dtype=np.int64)
    for j in range(m - 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            p = probs[:, j] / suffix[:, j]
        p = np.clip(np.nan_to_num(p, nan=0.0), 0.0, 1.0)
        k = binom_quantile(np.ascontiguousarray(u[:, j]), remaining, p)
        out[:, j] = k
        remaining -= k
    out[:, m - 1] = remaining
    return out


def _dirichlet_multinomial_core(totals, alphas, u):
    """Dirichlet draw then multinomial draw, sharing one uniform block.

    totals (N,), alphas (N, M), u (N, 3M-1): columns 0..2M-1 feed the Gamma
    draws (pairs per component), columns 2M..3M-2 feed the binomial walk.
    Conditional probabilities come from suffix log-sum-exps of the log-Gamma
    draws, which is exact even when alphas are small enough that the linear
    scale underflows.
    """
    n, m = alphas.shape
    logg = _log_gamma_draws(alphas, u[:, 0:2 * m:2], u[:, 1:2 * m:2])
    lse = _suffix_logsumexp(logg)
    remaining = totals.astype(np.int64).copy()
    out = np.empty((n, m), dtype=np.int64)
    for j in range(m - 1):
        p = np.clip(np.exp(logg[:, j] - lse[:, j]), 0.0, 1.0)
        k = binom_quantile(np.ascontiguousarray(u[:, 2 * m + j]), remaining, p)
        out[:, j] = k
        remaining -= k
    out[:, m - 1] = remaining
    return out


def sample_multinomial(total, probs, rng: RngStream, size=None):
    """Multinomial(total, probs) draws; M-1 uniforms per draw."""
    total = _check_total(total)
    probs = _check_probs(probs)
    n = _n_draws(size)
    m = probs.size
    u = rng.uniforms((m - 1) * n).reshape(n, m - 1)
    draws = _multinomial_core(np.full(n, total), np.broadcast_to(probs, (n, m)), u)
    if size is None:
        return draws[0]
    return draws


def sample_dirichlet_multinomial(total, alphas, rng: RngStream, size=None):
    """DirichletMultinomial(total, alphas) draws; 3M-1 uniforms per draw."""
    total = _check_total(total)
    alphas = _check_alphas(alphas)
    n = _n_draws(size)
    m = alphas.size
    u = rng.uniforms((3 * m - 1) * n).reshape(n, 3 * m - 1)
    draws = _dirichlet_multinomial_core(np.full(n, total), np.broadcast_to(alphas, (n, m)), u)
    if size is None:
        return draws[0]
    return draws


def sample_beta_binomial(total, a, b, rng: RngStream, size=None):
    """BetaBinomial(total, a, b) draws via Beta then Binomial; two uniforms per draw.

    Distributionally equal to the first component of a two-part
    Dirichlet-multinomial with alphas (a, b), but built by a different
    construction so the two samplers cross-validate each other.
    """
    total = _check_total(total)
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    n = _n_draws(size)
    u = rng.uniforms(2 * n).reshape(n, 2)
    p = betaincinv(a, b, u[:, 0])
    draws = binom_quantile(np.ascontiguousarray(u[:, 1]), np.full(n, total, dtype=np.int64), p)
    return _scalar_or_vector(draws, size)


def nb_log_pmf(x, params: NBParams):
    """Exact NB(mu, b) log pmf at integer x >= 0; requires finite b."""
    if params.is_poisson:
        raise ParameterError("nb_log_pmf requires finite b")
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr < 0) or not np.all(x_arr == np.floor(x_arr)):
        raise ParameterError("x must be a nonnegative integer")
    mu, b = params.mu, params.b
    # lgamma(x+b) - lgamma(b) - x*log(b), summed term by term when b is so
    # large that cancellation in gammaln would cost more than 1e-6 absolute
    if b > 1e6 and x_arr.size and x_arr.max() < 5e6:
        steps = np.log1p(np.arange(int(x_arr.max())) / b)
        csum = np.concatenate([[0.0], np.cumsum(steps)])
        bracket = csum[x_arr.astype(np.int64)]
    else:
        bracket = gammaln(x_arr + b) - gammaln(b) - x_arr * math.log(b)
    with np.errstate(invalid="ignore"):
        lp = bracket + x_arr * math.log(mu) - (b + x_arr) * math.log1p(mu / b) - gammaln(x_arr + 1.0)
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(lp)
    return lp
