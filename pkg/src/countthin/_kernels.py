"""Jitted inverse-CDF kernels for discrete distributions.

Each kernel maps a uniform in (0, 1) to the smallest k with CDF(k) >= u by
walking a pmf recurrence.  For large means the walk starts 20 standard
deviations below the mean (the mass below that point is far under 1e-80,
beyond what a 53-bit uniform can select), so the cost per draw is O(sd)
instead of O(mean).
"""

import math

import numba
import numpy as np

_JIT = dict(cache=True, nogil=True)


@numba.njit(**_JIT)
def binom_quantile(u, n, p):
    """Binomial(n[i], p[i]) quantiles at u[i]; n int64, result int64."""
    out = np.empty(u.shape[0], dtype=np.int64)
    for i in range(u.shape[0]):
        ni = n[i]
        pi = p[i]
        ui = u[i]
        if ni <= 0 or pi <= 0.0:
            out[i] = 0
            continue
        if pi >= 1.0:
            out[i] = ni
            continue
        # work on the smaller-p side so the walk stays short
        flip = pi > 0.5
        pe = 1.0 - pi if flip else pi
        ue = 1.0 - ui if flip else ui
        q = 1.0 - pe
        mean = ni * pe
        k0 = 0
        if mean > 30.0:
            k0 = int(mean - 20.0 * math.sqrt(mean * q) - 5.0)
            if k0 < 0:
                k0 = 0
        if k0 > 0:
            lp = (math.lgamma(ni + 1.0) - math.lgamma(k0 + 1.0) - math.lgamma(ni - k0 + 1.0)
                  + k0 * math.log(pe) + (ni - k0) * math.log(q))
            pmf = math.exp(lp)
        else:
            pmf = q ** ni
        cdf = pmf
        k = k0
        r = pe / q
        if not flip:
            while cdf < ui and k < ni:
                pmf *= (ni - k) / (k + 1.0) * r
                k += 1
                cdf += pmf
                if pmf <= 0.0:
                    break
            out[i] = k
        else:
            # k solves the mirrored problem: result = ni - 1 - (largest k with CDF(k) <= ue)
            if cdf > ue:
                out[i] = ni - k0 if k0 > 0 else ni
                continue
            while k < ni:
                step = pmf * (ni - k) / (k + 1.0) * r
                if cdf + step > ue or step <= 0.0:
                    break
                pmf = step
                k += 1
                cdf += pmf
            out[i] = ni - 1 - k
    return out


@numba.njit(**_JIT)
def poisson_quantile(u, mu):
    """Poisson(mu[i]) quantiles at u[i]."""
    out = np.empty(u.shape[0], dtype=np.int64)
    for i in range(u.shape[0]):
        m = mu[i]
        ui = u[i]
        if m <= 0.0:
            out[i] = 0
            continue
        k0 = 0
        if m > 30.0:
            k0 = int(m - 20.0 * math.sqrt(m) - 5.0)
            if k0 < 0:
                k0 = 0
        if k0 > 0:
            pmf = math.exp(k0 * math.log(m) - m - math.lgamma(k0 + 1.0))
        else:
            pmf = math.exp(-m)
        cdf = pmf
        k = k0
        while cdf < ui:
            k += 1
            pmf *= m / k
            cdf += pmf
            if pmf <= 0.0:
                break
        out[i] = k
    return out


@numba.njit(**_JIT)
def nb_quantile(u, mu, b):
    """NB(mu[i], b[i]) quantiles at u[i]; variance mu + mu^2/b."""
    out = np.empty(u.shape[0], dtype=np.int64)
    for i in range(u.shape[0]):
        m = mu[i]
        bi = b[i]
        ui = u[i]
        if m <= 0.0:
            out[i] = 0
            continue
        q = m / (bi + m)
        k0 = 0
        if m > 30.0:
            k0 = int(m - 20.0 * math.sqrt(m + m * m / bi) - 5.0)
            if k0 < 0:
                k0 = 0
        if k0 > 0:
            lp = (math.lgamma(k0 + bi) - math.lgamma(bi) - math.lgamma(k0 + 1.0)
                  - bi * math.log1p(m / bi) + k0 * math.log(q))
            pmf = math.exp(lp)
        else:
            pmf = math.exp(-bi * math.log1p(m / bi))
        cdf = pmf
        k = k0
        while cdf < ui:
            pmf *= (k + bi) / (k + 1.0) * q
            k += 1
            cdf += pmf
            if pmf <= 0.0:
                break
        out[i] = k
    return out
