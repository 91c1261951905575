"""Deterministic random streams and discrete samplers.

The generator is counter-based: every output is a pure function of
(seed, stream_id, position), so streams never need jumping or state
hand-off.  Distinct stream ids index disjoint keyed sequences, which makes
per-replication streams independent by construction and lets replication
loops run in parallel while reproducing sequential results exactly.
"""

import math
from functools import lru_cache

import numpy as np

from pppkit import _kernels

_M64 = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# splitmix64 finalizer, used once per stream to spread seed/stream bits
# before they become Philox keys.
_MIX_MUL1 = 0xBF58476D1CE4E5B9
_MIX_MUL2 = 0x94D049BB133111EB
# Keeps (seed=x, stream=x) from producing the symmetric key pair (m, m).
_STREAM_SALT = 0x6A09E667F3BCC909

CHUNK_MEAN_LIMIT = 10.0


def _mix64(value):
    z = value & _M64
    z = ((z ^ (z >> 30)) * _MIX_MUL1) & _M64
    z = ((z ^ (z >> 27)) * _MIX_MUL2) & _M64
    return z ^ (z >> 31)


@lru_cache(maxsize=128)
def _poisson_cum_table(mean):
    """Cumulative pmf table for inversion search, truncated far in the tail.

    Built with the forward recurrence p_{k} = p_{k-1} * mean / k in plain
    double arithmetic; the inversion index is the first entry exceeding the
    drawn uniform.  The truncation point carries negligible mass (the table
    extends at least 12 standard deviations plus 50 past the mean).
    """
    cap = int(math.ceil(mean + 12.0 * math.sqrt(mean) + 50.0))
    p = math.exp(-mean)
    cum = p
    table = [cum]
    for k in range(1, cap):
        p *= mean / k
        cum += p
        table.append(cum)
    return np.array(table)


def _validate_probs(probs):
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("probs must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("probs must be finite and non-negative")
    total = float(arr.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probs must sum to 1 within 1e-9, got {total!r}")
    return arr


class RngStream:
    """A deterministic stream addressed by (seed, stream_id, position).

    Identical construction arguments and call sequences reproduce identical
    outputs on every platform and backend.  Instances are cheap; create one
    per replication with stream_id = replication index rather than sharing
    a stream across concurrent work.
    """

    __slots__ = ("seed", "stream_id", "_k0", "_k1", "_pos",
                 "_blk_index", "_blk")

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed) & _M64
        self.stream_id = int(stream_id) & _M64
        self._k0 = _mix64(self.seed)
        self._k1 = _mix64(self.stream_id ^ _STREAM_SALT)
        self._pos = 0
        self._blk_index = -1
        self._blk = None

    def __repr__(self):
        return (f"RngStream(seed={self.seed}, stream_id={self.stream_id}, "
                f"position={self._pos})")

    @property
    def position(self):
        """Number of unit uniforms consumed so far."""
        return self._pos

    def next_unit_uniform(self):
        """One uniform draw in [0, 1) with 53-bit resolution."""
        pos = self._pos
        block = pos >> 2
        if block != self._blk_index:
            self._blk = _kernels.philox4(self._k0, self._k1, block)
            self._blk_index = block
        self._pos = pos + 1
        return (self._blk[pos & 3] >> 11) * _INV53

    def unit_uniforms(self, n):
        """n uniform draws in [0, 1) as a float64 array."""
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        out = _kernels.fill_unit(self._k0, self._k1, self._pos, n)
        self._pos += n
        return out

    def poisson_count(self, mean):
        """A Poisson draw by inversion, chunked for large means.

        Means above CHUNK_MEAN_LIMIT are split into ceil(mean / limit)
        equal chunks whose draws are summed; the split is exact because
        merged counts of independent Poisson variables add their means.
        """
        mean = float(mean)
        if not math.isfinite(mean) or mean < 0.0:
            raise ValueError(f"mean must be finite and >= 0, got {mean!r}")
        if mean == 0.0:
            return 0
        if mean <= CHUNK_MEAN_LIMIT:
            chunks = 1
        else:
            chunks = math.ceil(mean / CHUNK_MEAN_LIMIT)
        table = _poisson_cum_table(mean / chunks)
        total = 0
        for _ in range(chunks):
            u = self.next_unit_uniform()
            total += int(np.searchsorted(table, u, side="right"))
        return total

    def poisson_counts(self, mean, n):
        """n Poisson draws; identical to n poisson_count calls in sequence."""
        mean = float(mean)
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        if not math.isfinite(mean) or mean < 0.0:
            raise ValueError(f"mean must be finite and >= 0, got {mean!r}")
        if mean == 0.0:
            return np.zeros(n, dtype=np.int64)
        if mean <= CHUNK_MEAN_LIMIT:
            chunks = 1
        else:
            chunks = math.ceil(mean / CHUNK_MEAN_LIMIT)
        table = _poisson_cum_table(mean / chunks)
        us = self.unit_uniforms(n * chunks)
        ks = np.searchsorted(table, us, side="right").astype(np.int64)
        if chunks == 1:
            return ks
        return ks.reshape(n, chunks).sum(axis=1)

    def categorical(self, probs):
        """One index drawn from probs by inversion on a single uniform."""
        cums = np.cumsum(_validate_probs(probs))
        u = self.next_unit_uniform()
        k = int(np.searchsorted(cums, u, side="right"))
        return min(k, cums.size - 1)

    def categoricals(self, probs, n):
        """n categorical draws; identical to n categorical calls in sequence."""
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        cums = np.cumsum(_validate_probs(probs))
        us = self.unit_uniforms(n)
        ks = np.searchsorted(cums, us, side="right").astype(np.int64)
        return np.minimum(ks, cums.size - 1)
