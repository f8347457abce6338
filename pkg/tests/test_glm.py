import math
import time
import warnings

import numpy as np
import pytest
from scipy import stats

from countthin import (
    ConvergenceWarning,
    DataError,
    NBParams,
    RngStream,
    SingularDesignError,
    sample_nb,
)
from countthin.glm import GlmFit, fit_nb_glm, wald_pvalue


def group_design(n):
    x = np.zeros((n, 2))
    x[:, 0] = 1.0
    x[n // 2:, 1] = 1.0
    return x


def test_intercept_only_is_log_mean():
    y = sample_nb(NBParams(6.0, 3.0), RngStream(1), size=400)
    fit = fit_nb_glm(y, np.ones((400, 1)))
    assert fit.converged
    assert fit.coefficients[0] == pytest.approx(math.log(y.mean()), abs=1e-8)


def test_group_design_recovers_group_means():
    rng = RngStream(2)
    y = np.concatenate([
        sample_nb(NBParams(5.0, 2.0), rng, size=150),
        sample_nb(NBParams(11.0, 2.0), rng, size=150),
    ])
    design = group_design(300)
    fit = fit_nb_glm(y, design)
    assert fit.converged
    mu0 = math.exp(fit.coefficients[0])
    mu1 = math.exp(fit.coefficients[0] + fit.coefficients[1])
    assert mu0 == pytest.approx(y[:150].mean(), abs=1e-8)
    assert mu1 == pytest.approx(y[150:].mean(), abs=1e-8)
    assert fit.coefficients[1] == pytest.approx(math.log(y[150:].mean() / y[:150].mean()), abs=1e-8)


def test_group_design_matches_statsmodels_fixed_dispersion():
    sm = pytest.importorskip("statsmodels.api")
    rng = RngStream(3)
    y = np.concatenate([
        sample_nb(NBParams(4.0, 3.0), rng, size=100),
        sample_nb(NBParams(9.0, 3.0), rng, size=100),
    ])
    design = group_design(200)
    fit = fit_nb_glm(y, design)
    ref = sm.GLM(y, design, family=sm.families.NegativeBinomial(alpha=1.0 / fit.dispersion_b)).fit()
    assert np.allclose(fit.coefficients, ref.params, atol=1e-6)
    assert np.allclose(fit.standard_errors, ref.bse, rtol=5e-3)


def test_null_pvalues_are_uniform():
    n_fit, n = 1000, 200
    pvals = np.empty(n_fit)
    design = group_design(n)
    for rep in range(n_fit):
        y = sample_nb(NBParams(8.0, 4.0), RngStream(1000 + rep), size=n)
        fit = fit_nb_glm(y, design)
        pvals[rep] = wald_pvalue(fit, 1)
    assert stats.kstest(pvals, "uniform").pvalue > 0.01


def test_column_scaling_invariance():
    y = sample_nb(NBParams(6.0, 2.5), RngStream(4), size=300)
    design = group_design(300)
    scaled = design.copy()
    scaled[:, 1] *= 10.0
    a = fit_nb_glm(y, design)
    c = fit_nb_glm(y, scaled)
    assert c.coefficients[1] == pytest.approx(a.coefficients[1] / 10.0, rel=1e-8)
    assert c.standard_errors[1] == pytest.approx(a.standard_errors[1] / 10.0, rel=1e-6)
    assert c.wald_z[1] == pytest.approx(a.wald_z[1], rel=1e-6)
    assert c.p_values[1] == pytest.approx(a.p_values[1], rel=1e-6)


def test_poisson_data_hits_boundary_and_matches_poisson_glm():
    # seed chosen so within-group sample variance is at most the mean,
    # the regime where the profile likelihood is monotone in b
    sm = pytest.importorskip("statsmodels.api")
    rng = RngStream(10)
    y = np.concatenate([
        sample_nb(NBParams(5.0, math.inf), rng, size=200),
        sample_nb(NBParams(7.0, math.inf), rng, size=200),
    ])
    assert y[:200].var(ddof=1) <= y[:200].mean()
    assert y[200:].var(ddof=1) <= y[200:].mean()
    design = group_design(400)
    fit = fit_nb_glm(y, design)
    assert math.isinf(fit.dispersion_b)
    ref = sm.GLM(y, design, family=sm.families.Poisson()).fit()
    assert np.allclose(fit.coefficients, ref.params, atol=1e-6)


def test_dispersion_recovered_roughly():
    y = sample_nb(NBParams(10.0, 2.0), RngStream(6), size=5000)
    fit = fit_nb_glm(y, np.ones((5000, 1)))
    assert 1.6 < fit.dispersion_b < 2.5


def test_offset_shifts_intercept():
    y = sample_nb(NBParams(6.0, 3.0), RngStream(7), size=400)
    off = np.full(400, 1.3)
    fit = fit_nb_glm(y, np.ones((400, 1)), offset=off)
    plain = fit_nb_glm(y, np.ones((400, 1)))
    assert fit.coefficients[0] == pytest.approx(plain.coefficients[0] - 1.3, abs=1e-7)


def test_separation_is_clipped_and_flagged():
    y = np.concatenate([np.zeros(20, dtype=int), np.full(20, 7)])
    fit = fit_nb_glm(y, group_design(40))
    assert not fit.converged
    assert np.max(np.abs(fit.coefficients)) <= 30.0
    with pytest.warns(ConvergenceWarning):
        assert wald_pvalue(fit, 1) == 1.0


def test_wald_pvalue_reference_points():
    fit = GlmFit(np.array([0.0, 1.0]), np.array([1.0, 1.0 / 1.959964]),
                 np.array([0.0, 1.959964]), None, 2.0, 0.0, True, 3)
    fit.p_values = erfc_p = np.array([1.0, 0.05])
    assert wald_pvalue(fit, 0) == 1.0
    assert wald_pvalue(fit, 1) == pytest.approx(0.05, abs=1e-6)
    # p decreases monotonically as |z| grows
    zs = np.linspace(0, 40, 200)
    from scipy.special import erfc
    ps = erfc(zs / math.sqrt(2))
    assert np.all(np.diff(ps) <= 0)
    assert ps[-1] < 1e-300


def test_pvalues_match_normal_tail():
    y = sample_nb(NBParams(6.0, 2.0), RngStream(8), size=300)
    fit = fit_nb_glm(y, group_design(300))
    want = 2 * (1 - stats.norm.cdf(abs(fit.wald_z[1])))
    assert fit.p_values[1] == pytest.approx(want, rel=1e-10)


def test_likelihood_not_decreasing_across_refits():
    # refitting with the fitted dispersion must not lose likelihood
    from countthin.glm import _YSummary, _nb_loglik
    y = sample_nb(NBParams(6.0, 2.0), RngStream(9), size=300)
    design = group_design(300)
    fit = fit_nb_glm(y, design)
    ys = _YSummary(np.asarray(y, dtype=float))
    mu = np.exp(design @ fit.coefficients)
    assert fit.log_likelihood == pytest.approx(_nb_loglik(ys, mu, fit.dispersion_b), abs=1e-9)
    poisson_fit_ll = _nb_loglik(ys, np.full(300, y.mean()), math.inf)
    assert fit.log_likelihood >= poisson_fit_ll - 1e-10


def test_validation_errors():
    with pytest.raises(DataError):
        fit_nb_glm([-1, 2, 3], np.ones((3, 1)))
    with pytest.raises(DataError):
        fit_nb_glm([0.5, 2, 3], np.ones((3, 1)))
    with pytest.raises(DataError):
        fit_nb_glm([1, 2], np.ones((3, 1)))
    with pytest.raises(SingularDesignError):
        fit_nb_glm([1, 2, 3, 4], np.ones((4, 2)))
    fit = fit_nb_glm([1, 2, 3, 4], np.ones((4, 1)))
    from countthin import ParameterError
    with pytest.raises(ParameterError):
        wald_pvalue(fit, 5)


def test_fit_speed_supports_acceptance_budget():
    y = sample_nb(NBParams(8.0, 4.0), RngStream(10), size=500)
    design = group_design(500)
    fit_nb_glm(y, design)
    start = time.perf_counter()
    for _ in range(20):
        fit_nb_glm(y, design)
    per_fit = (time.perf_counter() - start) / 20
    assert per_fit < 0.05
