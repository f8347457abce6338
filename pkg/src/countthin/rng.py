"""Counter-based random number streams.

Uniform variates come from the Philox4x32-10 block cipher: the output at
(seed, stream_id, draw index) is a pure function of those three values, so
draws can be produced in any order, in any chunking, on any number of
threads, and still be bitwise identical.  Each 53-bit double lies strictly
inside (0, 1).

Stream ids below 2**63 are reserved for per-entry streams (entry (i, j) of
an n x p matrix uses stream i*p + j); ids derived from labels via `child`
always have the top bit set, so the two families never collide.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ParameterError

_MASK32 = np.uint64(0xFFFFFFFF)
_MULT0 = np.uint64(0xD2511F53)
_MULT1 = np.uint64(0xCD9E8D57)
_WEYL0 = np.uint64(0x9E3779B9)
_WEYL1 = np.uint64(0xBB67AE85)
_U64 = 0xFFFFFFFFFFFFFFFF
_CHILD_BIT = 1 << 63


def _philox4(c0, c1, c2, c3, k0, k1):
    """Ten Philox4x32 rounds; all values are uint64 holding 32-bit words."""
    shift = np.uint64(32)
    for _ in range(10):
        p0 = _MULT0 * c0
        p1 = _MULT1 * c2
        c0, c1, c2, c3 = (p1 >> shift) ^ c1 ^ k0, p1 & _MASK32, (p0 >> shift) ^ c3 ^ k1, p0 & _MASK32
        k0 = (k0 + _WEYL0) & _MASK32
        k1 = (k1 + _WEYL1) & _MASK32
    return c0, c1, c2, c3


def _to_doubles(w0, w1):
    # 26 + 27 = 53 random bits; the half-bit offset keeps 0 and 1 excluded
    hi = (w0 >> np.uint64(6)).astype(np.float64)
    lo = (w1 >> np.uint64(5)).astype(np.float64)
    return (hi * 134217728.0 + lo + 0.5) * 2.0**-53


def _check_u64(value, name):
    value = int(value)
    if not 0 <= value <= _U64:
        raise ParameterError(f"{name} must fit in 64 unsigned bits, got {value}")
    return value


def uniform_block(seed, stream_ids, count, start=0):
    """Doubles at positions start..start+count-1 of each stream.

    Returns an array of shape (len(stream_ids), count).
    """
    seed = _check_u64(seed, "seed")
    if count < 0 or start < 0:
        raise ParameterError("count and start must be nonnegative")
    sid = np.ascontiguousarray(stream_ids, dtype=np.uint64).reshape(-1)
    if count == 0:
        return np.empty((sid.size, 0), dtype=np.float64)
    first_call = start >> 1
    n_calls = ((start + count - 1) >> 1) - first_call + 1
    calls = np.uint64(first_call) + np.arange(n_calls, dtype=np.uint64)
    shape = (sid.size, n_calls)
    c0 = np.broadcast_to((sid & _MASK32)[:, None], shape)
    c1 = np.broadcast_to((sid >> np.uint64(32))[:, None], shape)
    c2 = np.broadcast_to((calls & _MASK32)[None, :], shape)
    c3 = np.broadcast_to((calls >> np.uint64(32))[None, :], shape)
    k0 = np.uint64(seed & 0xFFFFFFFF)
    k1 = np.uint64(seed >> 32)
    r0, r1, r2, r3 = _philox4(c0, c1, c2, c3, k0, k1)
    out = np.empty((sid.size, 2 * n_calls), dtype=np.float64)
    out[:, 0::2] = _to_doubles(r0, r1)
    out[:, 1::2] = _to_doubles(r2, r3)
    lead = start - 2 * first_call
    return out[:, lead:lead + count]


def _mix64(z):
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & _U64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
    return z ^ (z >> 31)


def _label_hash(label):
    if isinstance(label, str):
        return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")
    return _mix64(_check_u64(label, "label"))


def derive_stream_id(parent_id, label):
    """Deterministic child stream id; top bit set to avoid entry-stream ids."""
    parent_id = _check_u64(parent_id, "parent_id")
    return _mix64(parent_id ^ _label_hash(label)) | _CHILD_BIT


class RngStream:
    """One logical stream of uniforms, identified by (seed, stream_id)."""

    __slots__ = ("seed", "stream_id", "_pos")

    def __init__(self, seed, stream_id=0):
        self.seed = _check_u64(seed, "seed")
        self.stream_id = _check_u64(stream_id, "stream_id")
        self._pos = 0

    def uniforms(self, n):
        """The next n doubles in (0, 1), advancing the stream position."""
        if n < 0:
            raise ParameterError("n must be nonnegative")
        out = uniform_block(self.seed, [self.stream_id], n, start=self._pos)[0]
        self._pos += n
        return out

    def integers(self, n, bound):
        """n integers uniform on {0, .., bound-1} (floor of scaled uniforms)."""
        if bound <= 0:
            raise ParameterError("bound must be positive")
        return np.minimum((self.uniforms(n) * bound).astype(np.int64), bound - 1)

    def child(self, label):
        """Independent stream derived from this stream's id and a label."""
        return RngStream(self.seed, derive_stream_id(self.stream_id, label))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, pos={self._pos})"
