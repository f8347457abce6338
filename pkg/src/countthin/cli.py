"""Command-line front end.

Subcommands: thin, theory, simulate, select-k, nbcv, de, cv,
estimate-dispersion, check. Exit codes: 0 success, 1 a check failed,
2 usage or IO error. All randomness flows from --seed; replications and
stages use child streams derived by fixed labels, so rerunning a command
with the same arguments reproduces byte-identical outputs. --threads (or
the COUNTTHIN_THREADS variable) parallelizes replications without changing
any output.

Result tables are TSV. Column schemas:
  select-k:  rep method K mse mse_scaled selected
  nbcv:      rep K mse mse_scaled selected
  de:        rep method gene p_value
  cv:        rep mode ari diag_fraction   (plus summary.tsv: mode mean_ari mean_diag_fraction)
mse_scaled is the per-replication, per-method min-max normalization of the
MSE curve to [0, 1] used for plotting; selected marks the argmin K.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from ._io import (
    format_float,
    matrix_format,
    read_dispersions,
    read_matrix,
    write_dispersions,
    write_matrix,
)
from .dispersion import estimate_dispersions
from .errors import CountThinError, DataError
from .evaluation import de_test, intradataset_cv_naive, intradataset_cv_split, nbcv_select_k, sample_split_baseline, select_k
from .matrix import CountMatrix
from .rng import derive_stream_id
from .simgen import generate_dataset, generate_toy
from .thinning import (
    ThinPlan,
    correlation_at_infinite_bprime,
    fisher_information_nb,
    fold_information,
    nb_count_split,
    thinning_moments,
)


def _thread_count(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("COUNTTHIN_THREADS")
    return max(1, int(env)) if env else 1


def _map_reps(fn, reps, threads):
    if threads <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def _parse_positive_float(text, name):
    try:
        value = math.inf if text == "inf" else float(text)
    except ValueError:
        raise DataError(f"{name} must be a number, got {text!r}")
    if math.isnan(value) or value <= 0:
        raise DataError(f"{name} must be positive, got {text}")
    return value


def _parse_eps_list(text, m):
    try:
        eps = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise DataError(f"--eps must be comma-separated numbers, got {text!r}")
    if len(eps) != m:
        raise DataError(f"--eps lists {len(eps)} weights but --folds is {m}")
    return eps


def _resolve_dispersion(source, X):
    """Dispersion source: 'inf', 'estimate', 'file:PATH', or a positive number."""
    if source == "inf":
        return math.inf
    if source == "estimate":
        return estimate_dispersions(X).b_hat
    if source.startswith("file:"):
        _, values = read_dispersions(source[5:])
        if values.size != X.n_cols:
            raise DataError(
                f"dispersion file lists {values.size} genes, matrix has {X.n_cols} columns"
            )
        return values
    return _parse_positive_float(source, "--dispersion")


def _gene_ids(X):
    if X.col_names is not None:
        return tuple(X.col_names)
    return tuple(f"gene{j}" for j in range(X.n_cols))


def _apply_min_cells(X, min_cells):
    if min_cells is None:
        return X, np.arange(X.n_cols)
    dense = X.to_dense()
    keep = np.flatnonzero((dense > 0).sum(axis=0) >= min_cells)
    if keep.size == 0:
        raise DataError(f"--min-cells {min_cells} removed every gene")
    if keep.size == X.n_cols:
        return X, keep
    names = None if X.col_names is None else tuple(X.col_names[k] for k in keep)
    return CountMatrix.from_dense(dense[:, keep], X.row_names, names), keep


def _write_manifest(outdir, command, params):
    payload = {"command": command, "version": __version__, "parameters": params}
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_cell(v) for v in row) + "\n")


def _cell(value):
    if isinstance(value, float):
        return format_float(value) if not math.isnan(value) else "nan"
    return str(value)


def _ensure_outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _child_seed(seed, label):
    return derive_stream_id(seed, label)


def _scaled(curve):
    values = np.array([curve[k] for k in sorted(curve)])
    lo, hi = values.min(), values.max()
    if hi == lo:
        return {k: 0.0 for k in curve}
    return {k: (curve[k] - lo) / (hi - lo) for k in curve}


# ---------------------------------------------------------------- thin


def _fold_pred_corr(mean_m, var_m, cov, var_rest):
    if var_m <= 0 or var_rest <= 0:
        return math.nan
    return cov / math.sqrt(var_m * var_rest)


def _empirical_corr(a, b):
    if a.size < 3 or a.std() == 0 or b.std() == 0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


def cmd_thin(args):
    fmt = matrix_format(args.input, args.format)
    X = read_matrix(args.input, fmt)
    X, kept = _apply_min_cells(X, args.min_cells)
    b_prime = _resolve_dispersion(args.dispersion, X)
    eps = _parse_eps_list(args.eps, args.folds)
    plan = ThinPlan(args.folds, eps, b_prime)
    fs = nb_count_split(X, plan, _child_seed(args.seed, "thin"))

    outdir = _ensure_outdir(args.out)
    ext = ".mtx" if fmt == "mtx" else ".csv"
    for m, fold in enumerate(fs.folds):
        write_matrix(fold, os.path.join(outdir, f"fold_{m + 1}{ext}"), fmt)

    # diagnostics: per gene, empirical fold moments and fold-vs-complement
    # correlations next to the predictions implied by the assumed truth
    b_true = _resolve_dispersion(args.true_b, X) if args.true_b else b_prime
    b_prime_cols = plan.b_prime_for(X.n_cols)
    b_true_cols = np.broadcast_to(np.asarray(b_true, dtype=np.float64), (X.n_cols,))
    dense = X.to_dense()
    fold_dense = [f.to_dense() for f in fs.folds]
    header = ["gene", "mean", "b_prime"]
    for m in range(args.folds):
        header += [
            f"fold{m + 1}_mean_emp",
            f"fold{m + 1}_mean_pred",
            f"fold{m + 1}_var_emp",
            f"fold{m + 1}_var_pred",
            f"fold{m + 1}_corr_emp",
            f"fold{m + 1}_corr_pred",
        ]
    rows = []
    ids = _gene_ids(X)
    for j in range(X.n_cols):
        mu = float(dense[:, j].mean())
        row = [ids[j], mu, float(b_prime_cols[j])]
        for m in range(args.folds):
            col = fold_dense[m][:, j].astype(np.float64)
            rest = dense[:, j].astype(np.float64) - col
            if mu > 0:
                mean_p, var_p, cov_p = thinning_moments(mu, b_true_cols[j], b_prime_cols[j], eps[m])
                _, var_rest, _ = thinning_moments(mu, b_true_cols[j], b_prime_cols[j], 1.0 - eps[m])
                corr_p = _fold_pred_corr(mean_p, var_p, cov_p, var_rest)
            else:
                mean_p = var_p = 0.0
                corr_p = math.nan
            row += [
                float(col.mean()),
                mean_p,
                float(col.var(ddof=1)) if col.size > 1 else math.nan,
                var_p,
                _empirical_corr(col, rest),
                corr_p,
            ]
        rows.append(row)
    _write_tsv(os.path.join(outdir, "report.tsv"), header, rows)
    _write_manifest(
        outdir,
        "thin",
        {
            "input": args.input,
            "format": fmt,
            "folds": args.folds,
            "eps": list(eps),
            "dispersion": args.dispersion,
            "true_b": args.true_b,
            "min_cells": args.min_cells,
            "kept_genes": [int(k) for k in kept] if args.min_cells is not None else None,
            "seed": args.seed,
            "threads": _thread_count(args),
        },
    )
    return 0


# ---------------------------------------------------------------- theory


def cmd_theory(args):
    mu = _parse_positive_float(args.mu, "--mu")
    b = _parse_positive_float(args.b, "--b")
    b_prime = _parse_positive_float(args.bprime, "--bprime")
    eps = float(args.eps)
    mean, var, cov = thinning_moments(mu, b, b_prime, eps)
    _, var_rest, _ = thinning_moments(mu, b, b_prime, 1.0 - eps)
    corr = _fold_pred_corr(mean, var, cov, var_rest)
    lines = [
        ("fold_mean", mean),
        ("fold_variance", var),
        ("fold_complement_covariance", cov),
        ("fold_complement_correlation", corr),
        ("correlation_at_infinite_bprime", correlation_at_infinite_bprime(mu, b, eps)),
        ("fisher_information_total", fisher_information_nb(mu, b)),
        ("fisher_information_fold", fold_information(mu, b, eps)),
        ("fisher_information_complement", fold_information(mu, b, 1.0 - eps)),
    ]
    for name, value in lines:
        print(f"{name}\t{format_float(value)}")
    return 0


# ---------------------------------------------------------------- simulate


def cmd_simulate(args):
    outdir = _ensure_outdir(args.out)
    ext = ".mtx" if args.format == "mtx" else ".csv"
    seed = _child_seed(args.seed, "simulate")
    if args.toy:
        X = generate_toy(seed)
        truth_payload = {"toy": True, "n": 100, "p": 2, "b": [5.0, 5.0]}
        b_values = np.array([5.0, 5.0])
    else:
        X, truth = generate_dataset(args.n, args.p, args.k_star, args.beta_star, args.tau, seed)
        truth_payload = {
            "n": args.n,
            "p": args.p,
            "k_star": truth.K_star,
            "tau": truth.tau,
            "beta_star": truth.beta_star,
            "true_labels": [int(c) for c in truth.true_labels],
            "de_genes": [int(g) for g in truth.de_genes],
            "b": [float(v) for v in truth.b],
        }
        b_values = truth.b
    write_matrix(X, os.path.join(outdir, f"matrix{ext}"), args.format)
    with open(os.path.join(outdir, "truth.json"), "w", encoding="utf-8") as fh:
        json.dump(truth_payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_dispersions(os.path.join(outdir, "dispersions.tsv"), _gene_ids(X), b_values)
    _write_manifest(
        outdir,
        "simulate",
        {
            "toy": args.toy,
            "n": args.n,
            "p": args.p,
            "k_star": args.k_star,
            "beta_star": args.beta_star,
            "tau": args.tau,
            "format": args.format,
            "seed": args.seed,
        },
    )
    return 0


# ---------------------------------------------------------------- select-k


def _split_pair(X, eps, b_prime, seed):
    fs = nb_count_split(X, ThinPlan(2, (eps, 1.0 - eps), b_prime), seed)
    return fs.folds[0], fs.folds[1]


def cmd_select_k(args):
    X = read_matrix(args.input, args.format)
    X, _ = _apply_min_cells(X, args.min_cells)
    methods = args.methods.split(",")
    for method in methods:
        if method not in ("naive", "nbcs", "pcs", "samplesplit"):
            raise DataError(f"unknown method {method!r}")
    b_prime = _resolve_dispersion(args.dispersion, X) if "nbcs" in methods else None
    eps = float(args.eps)

    def one_rep(r):
        rows = []
        for method in methods:
            label = f"select-k-rep{r}-{method}"
            if method == "naive":
                res = select_k(X, X, 0.5, args.k_max, _child_seed(args.seed, label))
            elif method == "samplesplit":
                res = sample_split_baseline(X, "select-k", _child_seed(args.seed, label), args.k_max)
            else:
                bp = math.inf if method == "pcs" else b_prime
                train, test = _split_pair(X, eps, bp, _child_seed(args.seed, label + "-split"))
                res = select_k(train, test, eps, args.k_max, _child_seed(args.seed, label))
            scaled = _scaled(res.mse_by_k)
            for k in sorted(res.mse_by_k):
                rows.append(
                    [r, method, k, res.mse_by_k[k], scaled[k], int(k == res.k_selected)]
                )
        return rows

    all_rows = _map_reps(one_rep, args.reps, _thread_count(args))
    outdir = _ensure_outdir(args.out)
    _write_tsv(
        os.path.join(outdir, "results.tsv"),
        ["rep", "method", "K", "mse", "mse_scaled", "selected"],
        [row for rep_rows in all_rows for row in rep_rows],
    )
    _write_manifest(
        outdir,
        "select-k",
        {
            "input": args.input,
            "methods": args.methods,
            "eps": eps,
            "k_max": args.k_max,
            "dispersion": args.dispersion,
            "min_cells": args.min_cells,
            "reps": args.reps,
            "seed": args.seed,
            "threads": _thread_count(args),
        },
    )
    return 0


# ---------------------------------------------------------------- nbcv


def cmd_nbcv(args):
    X = read_matrix(args.input, args.format)
    X, _ = _apply_min_cells(X, args.min_cells)
    b_prime = _resolve_dispersion(args.dispersion, X)

    def one_rep(r):
        res = nbcv_select_k(X, args.m, b_prime, args.k_max, _child_seed(args.seed, f"nbcv-rep{r}"))
        scaled = _scaled(res.mse_by_k)
        return [
            [r, k, res.mse_by_k[k], scaled[k], int(k == res.k_selected)]
            for k in sorted(res.mse_by_k)
        ]

    all_rows = _map_reps(one_rep, args.reps, _thread_count(args))
    outdir = _ensure_outdir(args.out)
    _write_tsv(
        os.path.join(outdir, "results.tsv"),
        ["rep", "K", "mse", "mse_scaled", "selected"],
        [row for rep_rows in all_rows for row in rep_rows],
    )
    _write_manifest(
        outdir,
        "nbcv",
        {
            "input": args.input,
            "m": args.m,
            "k_max": args.k_max,
            "dispersion": args.dispersion,
            "min_cells": args.min_cells,
            "reps": args.reps,
            "seed": args.seed,
            "threads": _thread_count(args),
        },
    )
    return 0


# ---------------------------------------------------------------- de


def cmd_de(args):
    X = read_matrix(args.input, args.format)
    X, _ = _apply_min_cells(X, args.min_cells)
    methods = args.methods.split(",")
    for method in methods:
        if method not in ("naive", "nbcs", "pcs", "samplesplit"):
            raise DataError(f"unknown method {method!r}")
    b_prime = _resolve_dispersion(args.dispersion, X) if "nbcs" in methods else None
    eps = float(args.eps)
    ids = _gene_ids(X)

    def one_rep(r):
        rows = []
        for method in methods:
            label = f"de-rep{r}-{method}"
            if method == "naive":
                pvals = de_test(X, X, _child_seed(args.seed, label))
            elif method == "samplesplit":
                pvals = sample_split_baseline(X, "de", _child_seed(args.seed, label))
            else:
                bp = math.inf if method == "pcs" else b_prime
                train, test = _split_pair(X, eps, bp, _child_seed(args.seed, label + "-split"))
                pvals = de_test(train, test, _child_seed(args.seed, label))
            rows += [[r, method, ids[j], float(pvals[j])] for j in range(len(ids))]
        return rows

    all_rows = _map_reps(one_rep, args.reps, _thread_count(args))
    outdir = _ensure_outdir(args.out)
    _write_tsv(
        os.path.join(outdir, "results.tsv"),
        ["rep", "method", "gene", "p_value"],
        [row for rep_rows in all_rows for row in rep_rows],
    )
    _write_manifest(
        outdir,
        "de",
        {
            "input": args.input,
            "methods": args.methods,
            "eps": eps,
            "dispersion": args.dispersion,
            "min_cells": args.min_cells,
            "reps": args.reps,
            "seed": args.seed,
            "threads": _thread_count(args),
        },
    )
    return 0


# ---------------------------------------------------------------- cv


def cmd_cv(args):
    X = read_matrix(args.input, args.format)
    X, _ = _apply_min_cells(X, args.min_cells)
    modes = args.modes.split(",")
    for mode in modes:
        if mode not in ("naive", "split"):
            raise DataError(f"unknown mode {mode!r}")
    b_prime = _resolve_dispersion(args.dispersion, X) if "split" in modes else None

    def one_rep(r):
        rows = []
        for mode in modes:
            seed = _child_seed(args.seed, f"cv-rep{r}-{mode}")
            if mode == "naive":
                res = intradataset_cv_naive(X, args.k, args.folds, seed)
                diag = int(np.trace(res.matrix))
            else:
                res = intradataset_cv_split(X, args.k, b_prime, seed)
                diag = int(np.trace(res.permuted_matrix()))
            rows.append([r, mode, float(res.ari), diag / X.n_rows])
        return rows

    all_rows = _map_reps(one_rep, args.reps, _thread_count(args))
    flat = [row for rep_rows in all_rows for row in rep_rows]
    outdir = _ensure_outdir(args.out)
    _write_tsv(os.path.join(outdir, "results.tsv"), ["rep", "mode", "ari", "diag_fraction"], flat)
    summary = []
    for mode in modes:
        rows = [row for row in flat if row[1] == mode]
        summary.append(
            [
                mode,
                float(np.mean([row[2] for row in rows])),
                float(np.mean([row[3] for row in rows])),
            ]
        )
    _write_tsv(
        os.path.join(outdir, "summary.tsv"), ["mode", "mean_ari", "mean_diag_fraction"], summary
    )
    _write_manifest(
        outdir,
        "cv",
        {
            "input": args.input,
            "modes": args.modes,
            "k": args.k,
            "folds": args.folds,
            "dispersion": args.dispersion,
            "min_cells": args.min_cells,
            "reps": args.reps,
            "seed": args.seed,
            "threads": _thread_count(args),
        },
    )
    return 0


# ---------------------------------------------------------------- estimate-dispersion


def cmd_estimate_dispersion(args):
    X = read_matrix(args.input, args.format)
    X, _ = _apply_min_cells(X, args.min_cells)
    est = estimate_dispersions(X)
    outdir = _ensure_outdir(args.out)
    ids = _gene_ids(X)
    write_dispersions(os.path.join(outdir, "dispersions.tsv"), ids, est.b_hat)
    _write_tsv(
        os.path.join(outdir, "details.tsv"),
        ["gene", "b_hat", "b_mle", "mean_expr", "flags"],
        [
            [ids[j], float(est.b_hat[j]), float(est.b_mle[j]), float(est.mean_expr[j]), est.diagnostics[j]]
            for j in range(len(ids))
        ],
    )
    _write_manifest(
        outdir,
        "estimate-dispersion",
        {"input": args.input, "min_cells": args.min_cells},
    )
    return 0


# ---------------------------------------------------------------- check


def cmd_check(args):
    original = read_matrix(args.original, args.format)
    folds = [read_matrix(path, args.format) for path in args.folds]
    ok = True

    shapes = all(f.shape == original.shape for f in folds)
    print(f"shape agreement: {'pass' if shapes else 'FAIL'}")
    ok &= shapes

    if shapes:
        total = np.zeros(original.shape, dtype=np.int64)
        for f in folds:
            total += f.to_dense()
        additive = np.array_equal(total, original.to_dense())
        print(f"exact additivity: {'pass' if additive else 'FAIL'}")
        ok &= additive

    nonneg = all(f.to_dense().min() >= 0 for f in folds) if folds else False
    print(f"nonnegative folds: {'pass' if nonneg else 'FAIL'}")
    ok &= nonneg

    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def _add_common_io(sub, with_min_cells=True):
    sub.add_argument("input", help="count matrix (.mtx or .csv)")
    sub.add_argument("--format", choices=("mtx", "csv"), default=None, help="override format inference")
    if with_min_cells:
        sub.add_argument(
            "--min-cells",
            type=int,
            default=None,
            help="drop genes with nonzero counts in fewer than this many cells",
        )


def _add_run_args(sub, reps_default=1):
    sub.add_argument("--seed", type=int, required=True, help="master seed; all randomness derives from it")
    sub.add_argument("--reps", type=int, default=reps_default, help="number of replications")
    sub.add_argument("--threads", type=int, default=None, help="worker threads (default $COUNTTHIN_THREADS or 1)")
    sub.add_argument("--out", required=True, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="countthin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"countthin {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    thin = subs.add_parser("thin", help="split a count matrix into independent folds")
    _add_common_io(thin)
    thin.add_argument("--folds", type=int, default=2, help="number of folds M")
    thin.add_argument("--eps", default="0.5,0.5", help="comma-separated fold weights summing to 1")
    thin.add_argument(
        "--dispersion",
        default="inf",
        help="b' source: 'inf', 'estimate', 'file:PATH', or a positive number",
    )
    thin.add_argument(
        "--true-b",
        default=None,
        help="assumed true dispersion for the report's predicted moments (defaults to --dispersion)",
    )
    thin.add_argument("--seed", type=int, required=True)
    thin.add_argument("--threads", type=int, default=None)
    thin.add_argument("--out", required=True)
    thin.set_defaults(func=cmd_thin)

    theory = subs.add_parser("theory", help="closed-form moments and information for one entry")
    theory.add_argument("--mu", required=True)
    theory.add_argument("--b", required=True)
    theory.add_argument("--bprime", required=True)
    theory.add_argument("--eps", type=float, required=True)
    theory.set_defaults(func=cmd_theory)

    sim = subs.add_parser("simulate", help="generate a benchmark dataset with ground truth")
    sim.add_argument("--n", type=int, default=200)
    sim.add_argument("--p", type=int, default=100)
    sim.add_argument("--k-star", type=int, default=1)
    sim.add_argument("--beta-star", type=float, default=1.5)
    sim.add_argument("--tau", type=float, default=1.0)
    sim.add_argument("--toy", action="store_true", help="emit the 100x2 NB(5,5) toy matrix instead")
    sim.add_argument("--format", choices=("mtx", "csv"), default="csv")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    selk = subs.add_parser("select-k", help="held-out MSE curves for K selection")
    _add_common_io(selk)
    selk.add_argument("--methods", default="nbcs", help="comma list of naive,nbcs,pcs,samplesplit")
    selk.add_argument("--eps", type=float, default=0.5, help="training fold weight for nbcs/pcs")
    selk.add_argument("--k-max", type=int, default=10)
    selk.add_argument("--dispersion", default="inf")
    _add_run_args(selk)
    selk.set_defaults(func=cmd_select_k)

    nbcv = subs.add_parser("nbcv", help="M-fold cross-validated K selection")
    _add_common_io(nbcv)
    nbcv.add_argument("--m", type=int, default=10, help="number of folds")
    nbcv.add_argument("--k-max", type=int, default=10)
    nbcv.add_argument("--dispersion", default="inf")
    _add_run_args(nbcv)
    nbcv.set_defaults(func=cmd_nbcv)

    de = subs.add_parser("de", help="per-gene differential expression across 2 estimated clusters")
    _add_common_io(de)
    de.add_argument("--methods", default="nbcs", help="comma list of naive,nbcs,pcs,samplesplit")
    de.add_argument("--eps", type=float, default=0.5)
    de.add_argument("--dispersion", default="inf")
    _add_run_args(de)
    de.set_defaults(func=cmd_de)

    cv = subs.add_parser("cv", help="cluster reproducibility checks")
    _add_common_io(cv)
    cv.add_argument("--modes", default="split", help="comma list of naive,split")
    cv.add_argument("--k", type=int, required=True, help="number of clusters")
    cv.add_argument("--folds", type=int, default=5, help="folds for the naive check")
    cv.add_argument("--dispersion", default="inf")
    _add_run_args(cv)
    cv.set_defaults(func=cmd_cv)

    est = subs.add_parser("estimate-dispersion", help="per-gene overdispersion estimates")
    _add_common_io(est)
    est.add_argument("--out", required=True)
    est.set_defaults(func=cmd_estimate_dispersion)

    check = subs.add_parser("check", help="verify folds reconstruct the original matrix")
    check.add_argument("original")
    check.add_argument("folds", nargs="+", help="fold files")
    check.add_argument("--format", choices=("mtx", "csv"), default=None)
    check.set_defaults(func=cmd_check)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CountThinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
