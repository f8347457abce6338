"""Matrix and dispersion-table file formats used by the command line."""

import math
import os

import numpy as np

from .errors import DataError
from .matrix import CountMatrix

_MM_HEADER = "%%matrixmarket matrix coordinate integer general"


def matrix_format(path, fmt=None):
    """Resolve 'mtx'/'csv' from an explicit flag or the file extension."""
    if fmt is not None:
        if fmt not in ("mtx", "csv"):
            raise DataError(f"unknown matrix format {fmt!r} (expected 'mtx' or 'csv')")
        return fmt
    ext = os.path.splitext(path)[1].lower()
    if ext == ".mtx":
        return "mtx"
    if ext == ".csv":
        return "csv"
    raise DataError(f"cannot infer matrix format from {path!r}; pass --format")


def read_matrix(path, fmt=None) -> CountMatrix:
    fmt = matrix_format(path, fmt)
    try:
        if fmt == "mtx":
            return _read_mtx(path)
        return _read_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def write_matrix(X: CountMatrix, path, fmt=None):
    fmt = matrix_format(path, fmt)
    try:
        if fmt == "mtx":
            _write_mtx(X, path)
        else:
            np.savetxt(path, X.to_dense(), fmt="%d", delimiter=",")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _read_mtx(path) -> CountMatrix:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if header.strip().lower() != _MM_HEADER:
            raise DataError(f"{path}: unsupported MatrixMarket header {header.strip()!r}")
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        sizes = line.split()
        if len(sizes) != 3:
            raise DataError(f"{path}: malformed size line {line.strip()!r}")
        n_rows, n_cols, nnz = (int(s) for s in sizes)
        if nnz == 0:
            body = fh.read().strip()
            if body:
                raise DataError(f"{path}: expected 0 'row col value' entries")
            data = np.empty((0, 3), dtype=np.int64)
        else:
            data = np.loadtxt(fh, dtype=np.int64, ndmin=2)
    if data.size == 0:
        data = np.empty((0, 3), dtype=np.int64)
    if data.shape[0] != nnz or (nnz and data.shape[1] != 3):
        raise DataError(f"{path}: expected {nnz} 'row col value' entries, got shape {data.shape}")
    return CountMatrix.from_coo(
        n_rows, n_cols, data[:, 0] - 1, data[:, 1] - 1, data[:, 2]
    )


def _write_mtx(X: CountMatrix, path):
    rows, cols, vals = X.coo()
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate integer general\n")
        fh.write(f"{X.n_rows} {X.n_cols} {vals.size}\n")
        for r, c, v in zip(rows, cols, vals):
            fh.write(f"{r + 1} {c + 1} {v}\n")


def _read_csv(path) -> CountMatrix:
    data = np.loadtxt(path, dtype=np.int64, delimiter=",", ndmin=2)
    return CountMatrix.from_dense(data)


def format_float(value):
    """Shortest decimal text that parses back to the same float."""
    if math.isinf(value):
        return "inf"
    return repr(float(value))


def write_dispersions(path, gene_ids, b_hat):
    if len(gene_ids) != len(b_hat):
        raise DataError("gene_ids and b_hat lengths differ")
    with open(path, "w", encoding="utf-8") as fh:
        for gene, value in zip(gene_ids, b_hat):
            fh.write(f"{gene}\t{format_float(value)}\n")


def read_dispersions(path):
    """Dispersion table: `gene_id<TAB>b_hat`, literal `inf` for +infinity."""
    genes = []
    values = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 'gene_id<TAB>b_hat'")
                try:
                    value = math.inf if parts[1] == "inf" else float(parts[1])
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad dispersion {parts[1]!r}") from exc
                if math.isnan(value) or value <= 0:
                    raise DataError(f"{path}:{lineno}: dispersion must be positive, got {parts[1]}")
                genes.append(parts[0])
                values.append(value)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not genes:
        raise DataError(f"{path}: empty dispersion file")
    return tuple(genes), np.array(values)
