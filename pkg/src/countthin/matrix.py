"""Count matrix container.

A CountMatrix is an n x p nonnegative-integer matrix stored either dense
(int64 ndarray) or sparse as (row, col, value) triplets sorted by (row, col)
with no duplicates and no explicit zeros.  Internal arrays are read-only;
operations that derive new matrices preserve the input's storage layout.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _check_names(names, expected, what):
    if names is None:
        return None
    names = tuple(str(v) for v in names)
    if len(names) != expected:
        raise DataError(f"{what} has {len(names)} entries, expected {expected}")
    return names


def _as_int64(values, what):
    arr = np.asarray(values)
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise DataError(f"{what} must be integer valued")
        arr = arr.astype(np.int64)
    elif arr.dtype.kind in "iu":
        arr = arr.astype(np.int64)
    elif arr.size == 0:
        arr = arr.astype(np.int64)
    else:
        raise DataError(f"{what} must be numeric, got dtype {arr.dtype}")
    return arr


class CountMatrix:
    __slots__ = ("n_rows", "n_cols", "row_names", "col_names", "_dense", "_rows", "_cols", "_vals")

    def __init__(self):
        raise TypeError("use CountMatrix.from_dense or CountMatrix.from_coo")

    @classmethod
    def _new(cls):
        obj = object.__new__(cls)
        obj._dense = obj._rows = obj._cols = obj._vals = None
        return obj

    @classmethod
    def from_dense(cls, values, row_names=None, col_names=None):
        arr = _as_int64(values, "matrix")
        if arr.ndim != 2:
            raise DataError(f"matrix must be 2-D, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise DataError("matrix entries must be nonnegative")
        obj = cls._new()
        obj.n_rows, obj.n_cols = arr.shape
        obj._dense = _frozen(arr)
        obj.row_names = _check_names(row_names, obj.n_rows, "row_names")
        obj.col_names = _check_names(col_names, obj.n_cols, "col_names")
        return obj

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, values, row_names=None, col_names=None):
        """Sparse constructor; triplets are canonicalized (sorted, explicit zeros dropped)."""
        if n_rows < 0 or n_cols < 0:
            raise DataError("matrix dimensions must be nonnegative")
        rows = _as_int64(rows, "rows").reshape(-1)
        cols = _as_int64(cols, "cols").reshape(-1)
        vals = _as_int64(values, "values").reshape(-1)
        if not rows.size == cols.size == vals.size:
            raise DataError("rows, cols, values must have equal lengths")
        if vals.size:
            if rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols:
                raise DataError("triplet indices out of range")
            if vals.min() < 0:
                raise DataError("matrix entries must be nonnegative")
        keep = vals != 0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if np.any(dup):
                raise DataError("duplicate (row, col) triplets")
        obj = cls._new()
        obj.n_rows, obj.n_cols = int(n_rows), int(n_cols)
        obj._rows, obj._cols, obj._vals = _frozen(rows), _frozen(cols), _frozen(vals)
        obj.row_names = _check_names(row_names, obj.n_rows, "row_names")
        obj.col_names = _check_names(col_names, obj.n_cols, "col_names")
        return obj

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def is_sparse(self):
        return self._dense is None

    @property
    def nnz(self):
        if self.is_sparse:
            return int(self._vals.size)
        return int(np.count_nonzero(self._dense))

    def coo(self):
        """(rows, cols, values) of the nonzero entries, sorted by (row, col)."""
        if self.is_sparse:
            return self._rows, self._cols, self._vals
        rows, cols = np.nonzero(self._dense)
        return rows.astype(np.int64), cols.astype(np.int64), self._dense[rows, cols]

    def to_dense(self):
        if self.is_sparse:
            out = np.zeros(self.shape, dtype=np.int64)
            out[self._rows, self._cols] = self._vals
            return out
        return self._dense

    def column(self, j):
        if not 0 <= j < self.n_cols:
            raise DataError(f"column {j} out of range")
        if self.is_sparse:
            out = np.zeros(self.n_rows, dtype=np.int64)
            sel = self._cols == j
            out[self._rows[sel]] = self._vals[sel]
            return out
        return self._dense[:, j].copy()

    def row_totals(self):
        if self.is_sparse:
            return np.bincount(self._rows, weights=self._vals.astype(float), minlength=self.n_rows).astype(np.int64)
        return self._dense.sum(axis=1)

    def col_means(self):
        if self.is_sparse:
            sums = np.bincount(self._cols, weights=self._vals.astype(float), minlength=self.n_cols)
            return sums / max(self.n_rows, 1)
        return self._dense.mean(axis=0)

    def like(self, dense_values):
        """New matrix with these entries, in this matrix's storage layout."""
        if self.is_sparse:
            rows, cols = np.nonzero(dense_values)
            return CountMatrix.from_coo(self.n_rows, self.n_cols, rows, cols,
                                        np.asarray(dense_values)[rows, cols],
                                        self.row_names, self.col_names)
        return CountMatrix.from_dense(dense_values, self.row_names, self.col_names)

    def equals(self, other):
        """Entrywise equality, insensitive to storage layout."""
        if self.shape != other.shape:
            return False
        return np.array_equal(self.to_dense(), other.to_dense())

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"CountMatrix({self.n_rows}x{self.n_cols}, {kind}, nnz={self.nnz})"
