"""Deterministic generators for the simulated benchmark datasets."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ._kernels import nb_quantile
from .errors import ParameterError
from .matrix import CountMatrix
from .rng import RngStream, _label_hash, _mix64, uniform_block

__all__ = ["SimTruth", "generate_dataset", "generate_toy"]


@dataclass(frozen=True)
class SimTruth:
    """Ground truth for a generated dataset.

    L is the n x K* latent indicator matrix (first column all ones), beta
    the p x K* coefficient matrix (baseline log-means in column 0, the
    differential blocks after), and Lambda = exp(L beta^T) the cell-by-gene
    mean matrix. gamma holds the size factors (identically one here).
    b contains the per-gene overdispersions, column means of Lambda divided
    by tau, so that Var(X_ij) is approximately Lambda_ij * (1 + tau).
    """

    L: np.ndarray
    beta: np.ndarray
    Lambda: np.ndarray
    gamma: np.ndarray
    K_star: int
    tau: float
    beta_star: float
    b: np.ndarray
    true_labels: np.ndarray
    de_genes: np.ndarray


def _check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ParameterError(f"{name} must be >= 1, got {value}")
    return int(value)


def _entry_seed(seed, label):
    # re-key the per-entry streams so a later thinning pass run with the
    # same user seed never shares uniforms with the generation pass
    return _mix64(int(seed) ^ _label_hash(label))


def _draw_nb_matrix(lam, b, seed, label):
    n, p = lam.shape
    u = uniform_block(_entry_seed(seed, label), np.arange(n * p, dtype=np.uint64), 1)[:, 0]
    draws = nb_quantile(u, np.ascontiguousarray(lam.ravel()), np.tile(b, n))
    return draws.reshape(n, p)


def generate_dataset(n, p, k_star, beta_star, tau, seed):
    """Latent-cluster counts: log Lambda = L beta^T, X_ij ~ NB(Lambda_ij, b_j).

    Cells are assigned to k_star clusters with equal probability. Baseline
    log-means beta_j0 are standard normal. For k_star > 1, each non-baseline
    cluster gets a disjoint block of ceil(0.05 p) genes whose coefficient is
    beta_star; those blocks are the truly differential genes.
    """
    n = _check_positive_int(n, "n")
    p = _check_positive_int(p, "p")
    k_star = _check_positive_int(k_star, "k_star")
    beta_star = float(beta_star)
    tau = float(tau)
    if not math.isfinite(beta_star):
        raise ParameterError(f"beta_star must be finite, got {beta_star}")
    if not math.isfinite(tau) or tau <= 0.0:
        raise ParameterError(f"tau must be positive and finite, got {tau}")
    block = -(-p // 20)  # ceil(0.05 p)
    if k_star > 1 and k_star * block > p:
        raise ParameterError(
            f"k_star={k_star} differential blocks of {block} genes exceed p={p}"
        )

    root = RngStream(seed)
    labels = np.minimum(
        (root.child("labels").uniforms(n) * k_star).astype(np.int64), k_star - 1
    )
    beta = np.zeros((p, k_star))
    beta[:, 0] = ndtri(root.child("baseline").uniforms(p))
    for k in range(1, k_star):
        beta[(k - 1) * block : k * block, k] = beta_star
    de_genes = np.arange((k_star - 1) * block, dtype=np.int64)

    L = np.zeros((n, k_star))
    L[:, 0] = 1.0
    for k in range(1, k_star):
        L[labels == k, k] = 1.0
    Lambda = np.exp(L @ beta.T)
    b = Lambda.mean(axis=0) / tau

    X = CountMatrix.from_dense(_draw_nb_matrix(Lambda, b, seed, "entries"))
    truth = SimTruth(
        L=L,
        beta=beta,
        Lambda=Lambda,
        gamma=np.ones(n),
        K_star=k_star,
        tau=tau,
        beta_star=beta_star,
        b=b,
        true_labels=labels,
        de_genes=de_genes,
    )
    return X, truth


def generate_toy(seed):
    """100 cells x 2 genes of i.i.d. NB(5, 5) counts (mean 5, variance 10)."""
    lam = np.full((100, 2), 5.0)
    b = np.full(2, 5.0)
    return CountMatrix.from_dense(_draw_nb_matrix(lam, b, seed, "toy"))
