"""Deterministic, splittable random streams.

A stream is identified by a 64-bit key derived from the experiment seed
and a tuple of integer indices, e.g. ``(domain, circuit, trajectory,
qubit)``.  Values inside a stream are addressed by position, so any slice
of any stream can be regenerated independently of how the work was
scheduled.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels

#: domain tags keep noise and shot streams disjoint for the same indices
NOISE = 1
SHOTS = 2


def derive_keys(seed, *indices):
    """Hash ``seed`` and broadcastable integer ``indices`` into uint64 keys.

    >>> derive_keys(7, 1, 0, 3).shape
    ()
    """
    with np.errstate(over="ignore"):
        k = _kernels.mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF) + _kernels.GOLDEN)
        for idx in indices:
            arr = np.asarray(idx, dtype=np.int64).astype(np.uint64)
            k = _kernels.mix64((k ^ arr) + _kernels.GOLDEN)
    return np.asarray(k, dtype=np.uint64)


@dataclass(frozen=True)
class StreamId:
    """Identifier of a single stream: seed plus an index path."""

    seed: int
    path: tuple = ()

    def key(self):
        return np.uint64(derive_keys(self.seed, *self.path))

    def child(self, *indices):
        return StreamId(self.seed, self.path + tuple(int(i) for i in indices))


class Stream:
    """Sequential view of one counter-based stream."""

    def __init__(self, stream_id, position=0):
        self.id = stream_id
        self._key = np.array([stream_id.key()], dtype=np.uint64)
        self.position = int(position)

    def normals(self, n):
        out = _kernels.stream_normals(self._key, self.position, n)[0]
        self.position += n
        return out

    def uniforms(self, n):
        out = _kernels.stream_uniforms(self._key, self.position, n)[0]
        self.position += n
        return out

    def skip(self, n):
        self.position += int(n)
