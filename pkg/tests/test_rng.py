import numpy as np
import pytest

from countthin import ParameterError, RngStream, derive_stream_id, uniform_block
from countthin.rng import _philox4

# Known-answer vectors for the Philox4x32-10 block cipher, from the
# reference implementation's test suite (counter words, key words, output).
KAT = [
    ((0x00000000, 0x00000000, 0x00000000, 0x00000000),
     (0x00000000, 0x00000000),
     (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF, 0xFFFFFFFF, 0xFFFFFFFF, 0xFFFFFFFF),
     (0xFFFFFFFF, 0xFFFFFFFF),
     (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
     (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


def philox_reference(ctr, key):
    """Independent scalar Philox4x32-10 on Python ints."""
    mask = 0xFFFFFFFF
    x = list(ctr)
    k0, k1 = key
    for _ in range(10):
        p0 = (0xD2511F53 * x[0]) & 0xFFFFFFFFFFFFFFFF
        p1 = (0xCD9E8D57 * x[2]) & 0xFFFFFFFFFFFFFFFF
        x = [(p1 >> 32) ^ x[1] ^ k0, p1 & mask, (p0 >> 32) ^ x[3] ^ k1, p0 & mask]
        k0 = (k0 + 0x9E3779B9) & mask
        k1 = (k1 + 0xBB67AE85) & mask
    return tuple(x)


def run_philox(ctr, key):
    words = _philox4(*(np.array([w], dtype=np.uint64) for w in ctr),
                     np.uint64(key[0]), np.uint64(key[1]))
    return tuple(int(w[0]) for w in words)


def test_philox_known_answers():
    for ctr, key, expected in KAT:
        assert run_philox(ctr, key) == expected
        assert philox_reference(ctr, key) == expected


def test_philox_matches_scalar_reference_on_random_inputs():
    rng = np.random.default_rng(0)
    for _ in range(50):
        ctr = tuple(int(w) for w in rng.integers(0, 2**32, 4))
        key = tuple(int(w) for w in rng.integers(0, 2**32, 2))
        assert run_philox(ctr, key) == philox_reference(ctr, key)


def uniform_reference(seed, stream_id, index):
    """Draw `index` of a stream, from the scalar reference cipher."""
    ctr = (stream_id & 0xFFFFFFFF, stream_id >> 32, (index >> 1) & 0xFFFFFFFF, index >> 33)
    words = philox_reference(ctr, (seed & 0xFFFFFFFF, seed >> 32))
    w0, w1 = words[2 * (index & 1)], words[2 * (index & 1) + 1]
    return ((w0 >> 6) * 2.0**27 + (w1 >> 5) + 0.5) * 2.0**-53


def test_uniforms_match_scalar_reference():
    seed, stream = 987654321, 12345
    got = RngStream(seed, stream).uniforms(17)
    want = [uniform_reference(seed, stream, t) for t in range(17)]
    assert np.array_equal(got, np.array(want))


def test_uniform_block_offsets_and_shapes():
    block = uniform_block(7, [3, 900, 2**63 + 5], 9)
    assert block.shape == (3, 9)
    assert np.array_equal(block[1], RngStream(7, 900).uniforms(9))
    tail = uniform_block(7, [900], 4, start=5)[0]
    assert np.array_equal(tail, block[1, 5:9])
    assert uniform_block(7, [1], 0).shape == (1, 0)


def test_stream_position_advances():
    a = RngStream(3, 8)
    first = a.uniforms(5)
    second = a.uniforms(5)
    whole = RngStream(3, 8).uniforms(10)
    assert np.array_equal(np.concatenate([first, second]), whole)


def test_same_seed_same_stream_reproduces():
    assert np.array_equal(RngStream(11, 4).uniforms(100), RngStream(11, 4).uniforms(100))


def test_distinct_streams_and_seeds_differ():
    base = RngStream(11, 4).uniforms(100)
    assert not np.array_equal(base, RngStream(11, 5).uniforms(100))
    assert not np.array_equal(base, RngStream(12, 4).uniforms(100))


def test_uniforms_lie_strictly_inside_unit_interval():
    u = RngStream(0, 0).uniforms(200000)
    assert u.min() > 0.0
    assert u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * 0.2887 / np.sqrt(u.size)


def test_child_streams_are_deterministic_and_disjoint_from_entry_ids():
    root = RngStream(5)
    a = root.child("kmeans")
    b = root.child("kmeans")
    c = root.child("split")
    assert a.stream_id == b.stream_id
    assert a.stream_id != c.stream_id
    assert a.stream_id >= 2**63
    assert derive_stream_id(0, 17) >= 2**63
    assert not np.array_equal(a.uniforms(50), c.uniforms(50))


def test_integers_respect_bound():
    draws = RngStream(9).integers(10000, 7)
    assert draws.min() >= 0
    assert draws.max() <= 6
    assert len(np.unique(draws)) == 7


def test_parameter_validation():
    with pytest.raises(ParameterError):
        RngStream(-1)
    with pytest.raises(ParameterError):
        RngStream(2**64)
    with pytest.raises(ParameterError):
        RngStream(0).uniforms(-1)
    with pytest.raises(ParameterError):
        RngStream(0).integers(5, 0)
    with pytest.raises(ParameterError):
        uniform_block(1, [0], 5, start=-1)
