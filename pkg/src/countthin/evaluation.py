"""Downstream procedures run on split counts.

K-means on log-transformed counts, held-out MSE selection of the cluster
count, M-fold cross-validated selection, per-gene differential expression
across two estimated clusters, two cluster-reproducibility checks, and the
row-splitting baseline they are compared against.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError, ParameterError
from .glm import fit_nb_glm, wald_pvalue
from .matrix import CountMatrix
from .rng import RngStream, derive_stream_id
from .thinning import ThinPlan, fold_complement, nb_count_split

__all__ = [
    "ClusterModel",
    "ConfusionResult",
    "KSelectionResult",
    "adjusted_rand_index",
    "best_diagonal_permutation",
    "de_test",
    "intradataset_cv_naive",
    "intradataset_cv_split",
    "kmeans_log",
    "nbcv_select_k",
    "sample_split_baseline",
    "select_k",
]


@dataclass(frozen=True)
class ClusterModel:
    """K-means fit on log(X+1); centroids live in log space."""

    assignments: np.ndarray
    centroids: np.ndarray
    K: int
    inertia: float


@dataclass(frozen=True)
class KSelectionResult:
    mse_by_k: dict
    k_selected: int
    eps_used: float


@dataclass(frozen=True)
class ConfusionResult:
    """Cross-tabulation of two labelings plus the display permutation.

    The matrix is stored unpermuted; permutation reorders its columns to
    maximize the diagonal (identity for rectangular matrices). The ARI is
    computed from the labelings and does not depend on the permutation.
    """

    matrix: np.ndarray
    row_labels: tuple
    col_labels: tuple
    permutation: np.ndarray
    ari: float

    def permuted_matrix(self):
        return self.matrix[:, self.permutation]


def _log_counts(X):
    if not isinstance(X, CountMatrix):
        raise DataError("expected a CountMatrix")
    return np.log1p(X.to_dense().astype(np.float64))


def _check_count(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _pick_index(rng, weights):
    total = weights.sum()
    if total <= 0.0:
        return min(int(rng.uniforms(1)[0] * weights.size), weights.size - 1)
    u = rng.uniforms(1)[0] * total
    return min(int(np.searchsorted(np.cumsum(weights), u)), weights.size - 1)


def _kmeanspp_centers(data, K, rng):
    centers = np.empty((K, data.shape[1]))
    first = min(int(rng.uniforms(1)[0] * data.shape[0]), data.shape[0] - 1)
    centers[0] = data[first]
    d2 = np.sum((data - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        centers[k] = data[_pick_index(rng, d2)]
        d2 = np.minimum(d2, np.sum((data - centers[k]) ** 2, axis=1))
    return centers


def _lloyd(data, centers, max_iter=100):
    n = data.shape[0]
    x2 = np.sum(data**2, axis=1)
    assign = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = x2[:, None] - 2.0 * (data @ centers.T) + np.sum(centers**2, axis=1)[None, :]
        new_assign = d2.argmin(axis=1)
        point_d2 = np.sum((data - centers[new_assign]) ** 2, axis=1)
        for k in range(centers.shape[0]):
            if not np.any(new_assign == k):
                far = int(point_d2.argmax())
                centers[k] = data[far]
                new_assign[far] = k
                point_d2[far] = 0.0
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for k in range(centers.shape[0]):
            members = assign == k
            if np.any(members):
                centers[k] = data[members].mean(axis=0)
    inertia = float(np.sum((data - centers[assign]) ** 2))
    return assign, centers, inertia


def kmeans_log(X: CountMatrix, K, seed, n_restarts=10) -> ClusterModel:
    """Best of n_restarts k-means++/Lloyd runs on log(X+1)."""
    data = _log_counts(X)
    K = _check_count(K, "K", 1)
    if K > data.shape[0]:
        raise ParameterError(f"K={K} exceeds the number of rows {data.shape[0]}")
    root = RngStream(seed)
    best = None
    for restart in range(_check_count(n_restarts, "n_restarts", 1)):
        rng = root.child(restart)
        assign, centers, inertia = _lloyd(data, _kmeanspp_centers(data, K, rng))
        if best is None or inertia < best[2]:
            best = (assign, centers, inertia)
    return ClusterModel(assignments=best[0], centroids=best[1], K=K, inertia=best[2])


def _cluster_means(dense, assignments, K):
    means = np.zeros((K, dense.shape[1]))
    for k in range(K):
        members = assignments == k
        if np.any(members):
            means[k] = dense[members].mean(axis=0)
    return means


def _mse_curve(train, test, eps, k_max, seed, label):
    train_dense = train.to_dense().astype(np.float64)
    log_test = _log_counts(test)
    scale = (1.0 - eps) / eps
    mse_by_k = {}
    for K in range(1, k_max + 1):
        model = kmeans_log(train, K, derive_stream_id(seed, f"{label}-k{K}"))
        mu_train = _cluster_means(train_dense, model.assignments, K)[model.assignments]
        mse_by_k[K] = float(np.mean((log_test - np.log1p(scale * mu_train)) ** 2))
    return mse_by_k


def _argmin_k(mse_by_k):
    best_k = None
    for K in sorted(mse_by_k):
        if best_k is None or mse_by_k[K] < mse_by_k[best_k]:
            best_k = K
    return best_k


def select_k(train: CountMatrix, test: CountMatrix, eps, k_max, seed) -> KSelectionResult:
    """Held-out MSE over K = 1..k_max; expects E[test] = ((1-eps)/eps) E[train].

    For each K the training matrix is clustered, each training entry's mean
    is estimated by its within-cluster sample mean, the test-set mean is the
    scaled training mean, and the squared error is measured between
    log(test+1) and log(scaled mean + 1). Ties select the smaller K.
    """
    if not isinstance(train, CountMatrix) or not isinstance(test, CountMatrix):
        raise DataError("train and test must be CountMatrix instances")
    if train.shape != test.shape:
        raise DataError(f"shape mismatch: train {train.shape} vs test {test.shape}")
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    k_max = _check_count(k_max, "k_max", 1)
    mse_by_k = _mse_curve(train, test, eps, k_max, seed, "select-k")
    return KSelectionResult(mse_by_k=mse_by_k, k_selected=_argmin_k(mse_by_k), eps_used=eps)


def nbcv_select_k(X: CountMatrix, M, b_prime, k_max, seed) -> KSelectionResult:
    """M-fold cross-validated K selection; MSE totalled across folds.

    X is split into M equal-weight folds; fold m is held out while its
    complement (eps = (M-1)/M of the information) is clustered.
    """
    M = _check_count(M, "M", 2)
    k_max = _check_count(k_max, "k_max", 1)
    plan = ThinPlan(M, (1.0 / M,) * M, b_prime)
    fs = nb_count_split(X, plan, derive_stream_id(seed, "nbcv-split"))
    eps = (M - 1) / M
    total = {K: 0.0 for K in range(1, k_max + 1)}
    for m in range(M):
        train = fold_complement(fs, m)
        curve = _mse_curve(train, fs.folds[m], eps, k_max, seed, f"nbcv-fold{m}")
        for K, value in curve.items():
            total[K] += value
    return KSelectionResult(mse_by_k=total, k_selected=_argmin_k(total), eps_used=eps)


def _two_group_pvalues(test_dense, labels):
    n = labels.size
    design = np.column_stack([np.ones(n), labels.astype(np.float64)])
    sizes = np.bincount(labels, minlength=2)
    if sizes.min() < 2:
        warnings.warn("a cluster has fewer than 2 members; returning p = 1 for all genes")
        return np.ones(test_dense.shape[1])
    pvals = np.empty(test_dense.shape[1])
    for j in range(test_dense.shape[1]):
        y = test_dense[:, j]
        if not y.any():
            pvals[j] = 1.0
            continue
        pvals[j] = wald_pvalue(fit_nb_glm(y, design), 1)
    return pvals


def de_test(train: CountMatrix, test: CountMatrix, seed):
    """Per-gene Wald p-values for expression differences across 2 clusters.

    Clusters are estimated on log(train+1) with K = 2; each test column is
    then regressed on the cluster indicator with an NB GLM. Genes that are
    identically zero, or any fit that fails to converge, report p = 1.
    """
    if not isinstance(train, CountMatrix) or not isinstance(test, CountMatrix):
        raise DataError("train and test must be CountMatrix instances")
    if train.shape != test.shape:
        raise DataError(f"shape mismatch: train {train.shape} vs test {test.shape}")
    if train.n_rows < 4:
        raise DataError("differential expression needs at least 4 rows")
    model = kmeans_log(train, 2, derive_stream_id(seed, "de-cluster"))
    return _two_group_pvalues(test.to_dense(), model.assignments)


def adjusted_rand_index(a, b):
    """Hubert-Arabie adjusted Rand index between two labelings."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise DataError(f"label vectors differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        raise DataError("label vectors are empty")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_cells = comb2(table.astype(np.float64)).sum()
    sum_rows = comb2(table.sum(axis=1).astype(np.float64)).sum()
    sum_cols = comb2(table.sum(axis=0).astype(np.float64)).sum()
    expected = sum_rows * sum_cols / comb2(float(a.size))
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))


def best_diagonal_permutation(matrix):
    """Column order maximizing the diagonal sum of a square count matrix."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError(f"matrix must be square, got shape {m.shape}")
    _, cols = linear_sum_assignment(m, maximize=True)
    return cols


def _confusion(rows_labels, cols_labels, k_rows, k_cols):
    matrix = np.zeros((k_rows, k_cols), dtype=np.int64)
    np.add.at(matrix, (rows_labels, cols_labels), 1)
    if k_rows == k_cols:
        permutation = best_diagonal_permutation(matrix)
    else:
        permutation = np.arange(k_cols)
    return ConfusionResult(
        matrix=matrix,
        row_labels=tuple(range(k_rows)),
        col_labels=tuple(range(k_cols)),
        permutation=permutation,
        ari=adjusted_rand_index(rows_labels, cols_labels),
    )


def _nearest_centroid_predict(train_data, train_labels, test_data, K):
    present = np.unique(train_labels)
    centroids = np.stack([train_data[train_labels == k].mean(axis=0) for k in present])
    d2 = (
        np.sum(test_data**2, axis=1)[:, None]
        - 2.0 * (test_data @ centroids.T)
        + np.sum(centroids**2, axis=1)[None, :]
    )
    return present[d2.argmin(axis=1)], present.size < K


def intradataset_cv_naive(X: CountMatrix, K, n_folds, seed) -> ConfusionResult:
    """Reuse-the-data reproducibility check.

    The full matrix is clustered once; cells are then split into folds and
    each fold's labels are re-predicted by a nearest-centroid classifier
    trained on the other folds' log counts against the full-data labels.
    Because those labels were estimated from all cells, the check is biased
    toward confirming them.
    """
    K = _check_count(K, "K", 1)
    n_folds = _check_count(n_folds, "n_folds", 2)
    data = _log_counts(X)
    if n_folds > data.shape[0]:
        raise ParameterError(f"n_folds={n_folds} exceeds the number of rows")
    model = kmeans_log(X, K, derive_stream_id(seed, "naive-cluster"))
    order = np.argsort(RngStream(seed, derive_stream_id(0, "naive-folds")).uniforms(data.shape[0]))
    fold_of = np.empty(data.shape[0], dtype=np.int64)
    fold_of[order] = np.arange(data.shape[0]) % n_folds
    predicted = np.empty(data.shape[0], dtype=np.int64)
    any_missing = False
    for m in range(n_folds):
        held = fold_of == m
        labels, missing = _nearest_centroid_predict(
            data[~held], model.assignments[~held], data[held], K
        )
        predicted[held] = labels
        any_missing = any_missing or missing
    if any_missing:
        warnings.warn("a training fold was missing some cluster label; trained on present labels only")
    return _confusion(model.assignments, predicted, K, K)


def intradataset_cv_split(X: CountMatrix, K, b_prime, seed) -> ConfusionResult:
    """Count-splitting reproducibility check.

    X is split into two independent eps = 0.5 folds which are clustered
    separately; agreement between the two labelings measures whether the
    clusters reproduce on an independent realization of the data.
    """
    K = _check_count(K, "K", 1)
    plan = ThinPlan(2, (0.5, 0.5), b_prime)
    fs = nb_count_split(X, plan, derive_stream_id(seed, "cv-split"))
    labels1 = kmeans_log(fs.folds[0], K, derive_stream_id(seed, "cv-cluster1")).assignments
    labels2 = kmeans_log(fs.folds[1], K, derive_stream_id(seed, "cv-cluster2")).assignments
    return _confusion(labels1, labels2, K, K)


def _knn3_transfer(train_data, train_labels, test_data):
    d2 = (
        np.sum(test_data**2, axis=1)[:, None]
        - 2.0 * (test_data @ train_data.T)
        + np.sum(train_data**2, axis=1)[None, :]
    )
    labels = np.empty(test_data.shape[0], dtype=np.int64)
    for i in range(test_data.shape[0]):
        order = np.argsort(d2[i], kind="stable")[:3]
        votes = train_labels[order]
        counts = np.bincount(votes)
        top = counts.max()
        if (counts == top).sum() > 1:
            labels[i] = votes[0]  # three-way tie: fall back to the nearest
        else:
            labels[i] = counts.argmax()
    return labels


def sample_split_baseline(X: CountMatrix, mode, seed, k_max=10):
    """Row-splitting baseline: first half of the cells train, second half test.

    Training rows are clustered on the log scale and test rows inherit the
    majority label of their 3 nearest training rows (Euclidean distance on
    log counts). mode="select-k" returns the held-out MSE curve against
    within-cluster training means; mode="de" returns per-gene p-values from
    NB regressions of the test rows on the transferred labels. The label
    transfer reads the test rows, so the test set is not truly held out.
    """
    if mode not in ("select-k", "de"):
        raise ParameterError(f"mode must be 'select-k' or 'de', got {mode!r}")
    data = _log_counts(X)
    n = data.shape[0]
    if n < 8:
        raise DataError(f"need at least 8 rows, got {n}")
    if n % 2:
        raise DataError(f"need an even number of rows, got {n}")
    half = n // 2
    dense = X.to_dense()
    train = CountMatrix.from_dense(dense[:half])
    train_dense = dense[:half].astype(np.float64)
    train_data, test_data = data[:half], data[half:]

    if mode == "de":
        model = kmeans_log(train, 2, derive_stream_id(seed, "baseline-de"))
        labels = _knn3_transfer(train_data, model.assignments, test_data)
        return _two_group_pvalues(dense[half:], labels)

    k_max = _check_count(k_max, "k_max", 1)
    mse_by_k = {}
    log_test = test_data
    for K in range(1, k_max + 1):
        model = kmeans_log(train, K, derive_stream_id(seed, f"baseline-k{K}"))
        labels = _knn3_transfer(train_data, model.assignments, test_data)
        mu = _cluster_means(train_dense, model.assignments, K)[labels]
        mse_by_k[K] = float(np.mean((log_test - np.log1p(mu)) ** 2))
    return KSelectionResult(mse_by_k=mse_by_k, k_selected=_argmin_k(mse_by_k), eps_used=0.5)
