import math

import numpy as np
import pytest
from scipy.stats import chisquare

from countthin import NBParams, nb_log_pmf
from countthin.errors import ParameterError
from countthin.simgen import generate_dataset, generate_toy


def test_reproducible_bitwise():
    x1, t1 = generate_dataset(40, 30, 3, 1.5, 5.0, seed=101)
    x2, t2 = generate_dataset(40, 30, 3, 1.5, 5.0, seed=101)
    assert np.array_equal(x1.to_dense(), x2.to_dense())
    assert np.array_equal(t1.Lambda, t2.Lambda)
    assert np.array_equal(t1.true_labels, t2.true_labels)
    x3, _ = generate_dataset(40, 30, 3, 1.5, 5.0, seed=102)
    assert not np.array_equal(x1.to_dense(), x3.to_dense())


def test_shapes_and_invariants():
    n, p, k = 50, 37, 4
    x, truth = generate_dataset(n, p, k, 2.0, 1.0, seed=7)
    assert x.shape == (n, p)
    assert truth.L.shape == (n, k)
    assert truth.beta.shape == (p, k)
    assert truth.Lambda.shape == (n, p)
    assert np.all(truth.L[:, 0] == 1.0)
    assert np.all(truth.gamma == 1.0)
    assert truth.true_labels.min() >= 0 and truth.true_labels.max() < k
    assert np.all(truth.b == truth.Lambda.mean(axis=0) / truth.tau)
    assert np.all(x.to_dense() >= 0)


def test_log_lambda_matches_linear_predictor():
    _, truth = generate_dataset(30, 25, 3, 1.5, 5.0, seed=11)
    assert np.max(np.abs(np.log(truth.Lambda) - truth.L @ truth.beta.T)) < 1e-10


def test_beta_blocks_k3_p100():
    _, truth = generate_dataset(20, 100, 3, 1.5, 1.0, seed=13)
    beta = truth.beta
    assert np.all(beta[0:5, 1] == 1.5) and np.all(beta[5:10, 2] == 1.5)
    off = beta[:, 1:].copy()
    off[0:5, 0] = 0.0
    off[5:10, 1] = 0.0
    assert np.all(off == 0.0)
    assert np.array_equal(truth.de_genes, np.arange(10))


def test_k_star_one_has_constant_columns_and_no_de():
    _, truth = generate_dataset(25, 12, 1, 1.5, 1.0, seed=17)
    assert truth.beta.shape == (12, 1)
    assert truth.de_genes.size == 0
    assert np.all(truth.Lambda == truth.Lambda[0, :])
    assert np.all(truth.true_labels == 0)


def test_cluster_assignment_uniform():
    counts = np.zeros(3, dtype=np.int64)
    for rep in range(1000):
        _, truth = generate_dataset(12, 3, 3, 1.0, 1.0, seed=5000 + rep)
        counts += np.bincount(truth.true_labels, minlength=3)
    assert chisquare(counts).pvalue > 1e-3


def test_variance_mean_ratio_matches_tau():
    # k_star = 1 makes Lambda constant within each column, so the
    # variance/mean ratio is exactly 1 + tau in expectation
    for tau in (1.0, 5.0):
        x, truth = generate_dataset(4000, 6, 1, 0.0, tau, seed=int(19 + tau))
        dense = x.to_dense().astype(float)
        ratio = dense.var(axis=0, ddof=1) / dense.mean(axis=0)
        assert np.all(np.abs(ratio - (1.0 + tau)) < 0.25 * (1.0 + tau))


def test_within_cluster_ratio_tracks_gene_dispersion():
    x, truth = generate_dataset(6000, 8, 2, 1.5, 5.0, seed=23)
    dense = x.to_dense().astype(float)
    for c in (0, 1):
        rows = truth.true_labels == c
        lam = truth.Lambda[rows][0]  # constant within a cluster
        expected = 1.0 + lam / truth.b
        ratio = dense[rows].var(axis=0, ddof=1) / dense[rows].mean(axis=0)
        assert np.all(np.abs(ratio - expected) < 0.2 * expected)


def _nb_central_moments(mu, b, upto):
    ks = np.arange(upto)
    pmf = np.exp(nb_log_pmf(ks, NBParams(mu, b)))
    assert pmf.sum() > 1.0 - 1e-12
    mean = float(np.sum(ks * pmf))
    var = float(np.sum((ks - mean) ** 2 * pmf))
    mu4 = float(np.sum((ks - mean) ** 4 * pmf))
    return mean, var, mu4


def test_toy_matches_nb_5_5_moments():
    draws = np.concatenate(
        [generate_toy(seed=3000 + rep).to_dense().ravel() for rep in range(400)]
    ).astype(float)
    mean, var, mu4 = _nb_central_moments(5.0, 5.0, 200)
    n = draws.size
    assert abs(mean - 5.0) < 1e-9 and abs(var - 10.0) < 1e-9
    assert abs(draws.mean() - mean) < 5.0 * math.sqrt(var / n)
    assert abs(draws.var(ddof=1) - var) < 5.0 * math.sqrt((mu4 - var**2) / n)


def test_toy_shape_and_reproducibility():
    a = generate_toy(seed=31)
    assert a.shape == (100, 2)
    assert np.array_equal(a.to_dense(), generate_toy(seed=31).to_dense())
    assert not np.array_equal(a.to_dense(), generate_toy(seed=32).to_dense())


def test_validation():
    with pytest.raises(ParameterError):
        generate_dataset(0, 5, 1, 1.0, 1.0, seed=1)
    with pytest.raises(ParameterError):
        generate_dataset(5, 0, 1, 1.0, 1.0, seed=1)
    with pytest.raises(ParameterError):
        generate_dataset(5, 5, 0, 1.0, 1.0, seed=1)
    with pytest.raises(ParameterError):
        generate_dataset(5, 5, 2, 1.0, 0.0, seed=1)
    with pytest.raises(ParameterError):
        generate_dataset(5, 5, 2, math.inf, 1.0, seed=1)
    with pytest.raises(ParameterError):
        generate_dataset(5, 5, 2, 1.0, math.nan, seed=1)
    with pytest.raises(ParameterError):
        generate_dataset(10, 100, 21, 1.0, 1.0, seed=1)  # 21 blocks of 5 > 100
    generate_dataset(10, 100, 20, 1.0, 1.0, seed=1)  # 20 blocks of 5 fit exactly
