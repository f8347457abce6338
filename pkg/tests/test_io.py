import math

import numpy as np
import pytest

from countthin import CountMatrix, DataError
from countthin._io import (
    format_float,
    matrix_format,
    read_dispersions,
    read_matrix,
    write_dispersions,
    write_matrix,
)


def random_counts(rng, n, p, density=0.4):
    return np.where(rng.random((n, p)) < density, rng.integers(0, 50, (n, p)), 0)


def test_format_inference_and_override(tmp_path):
    assert matrix_format("x.mtx") == "mtx"
    assert matrix_format("x.csv") == "csv"
    assert matrix_format("x.dat", "mtx") == "mtx"
    with pytest.raises(DataError):
        matrix_format("x.dat")
    with pytest.raises(DataError):
        matrix_format("x.csv", "tsv")


def test_mtx_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    dense = random_counts(rng, 17, 9)
    rows, cols = np.nonzero(dense)
    x = CountMatrix.from_coo(17, 9, rows, cols, dense[rows, cols])
    path = tmp_path / "m.mtx"
    write_matrix(x, str(path))
    back = read_matrix(str(path))
    assert back.equals(x)
    assert back.is_sparse
    first = path.read_text().splitlines()[0]
    assert first == "%%MatrixMarket matrix coordinate integer general"


def test_mtx_all_zero_matrix(tmp_path):
    x = CountMatrix.from_coo(4, 3, [], [], [])
    path = tmp_path / "z.mtx"
    write_matrix(x, str(path))
    back = read_matrix(str(path))
    assert back.shape == (4, 3)
    assert back.to_dense().sum() == 0


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    x = CountMatrix.from_dense(random_counts(rng, 11, 5))
    path = tmp_path / "m.csv"
    write_matrix(x, str(path))
    back = read_matrix(str(path))
    assert back.equals(x)
    assert not back.is_sparse


def test_mtx_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 3\n")
    with pytest.raises(DataError):
        read_matrix(str(path))


def test_mtx_rejects_entry_count_mismatch(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 3\n"
    )
    with pytest.raises(DataError):
        read_matrix(str(path))


def test_mtx_rejects_out_of_range_indices(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate integer general\n2 2 1\n3 1 5\n"
    )
    with pytest.raises((DataError, Exception)):
        read_matrix(str(path))


def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataError):
        read_matrix(str(tmp_path / "nope.csv"))


def test_format_float_round_trips():
    for value in (0.0, 1.5, 1 / 3, 1e-300, 123456.789, math.inf):
        text = format_float(value)
        assert float(text) == value
    assert format_float(math.inf) == "inf"


def test_dispersions_round_trip(tmp_path):
    path = tmp_path / "b.tsv"
    ids = ("gene0", "gene1", "gene2")
    values = np.array([4.0, math.inf, 1 / 3])
    write_dispersions(str(path), ids, values)
    got_ids, got_values = read_dispersions(str(path))
    assert got_ids == ids
    assert np.array_equal(got_values, values)
    # second write is byte-identical
    path2 = tmp_path / "b2.tsv"
    write_dispersions(str(path2), ids, values)
    assert path.read_bytes() == path2.read_bytes()


@pytest.mark.parametrize(
    "body",
    [
        "gene0\t-1.0\n",
        "gene0\tnan\n",
        "gene0\n",
        "gene0\t1.0\textra\n",
        "gene0\tnot_a_number\n",
        "",
    ],
)
def test_dispersions_rejects_malformed(tmp_path, body):
    path = tmp_path / "bad.tsv"
    path.write_text(body)
    with pytest.raises(DataError):
        read_dispersions(str(path))
