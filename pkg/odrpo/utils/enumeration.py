"""
Combinatorial helpers
=====================

Lexicographic enumeration of the count simplex S_n = {s in N^K : sum s = n}
and the seed-splitting rule shared by every stochastic experiment.
"""

import hashlib
from functools import lru_cache
from math import comb

import numpy as np

from odrpo.exceptions import TooLarge

SEED_MASK = (1 << 64) - 1


def simplex_size(k, n):
    """|S_n| for K levels: C(n + K - 1, K - 1)."""
    if n < 0:
        return 0
    return comb(n + k - 1, k - 1)


def iter_simplex(k, n):
    """Yield every count tuple of length k summing to n, in lexicographic order."""
    if k == 1:
        yield (n,)
        return
    for value in range(n + 1):
        for rest in iter_simplex(k - 1, n - value):
            yield (value,) + rest


@lru_cache(maxsize=64)
def _simplex_array(k, n):
    array = np.array(list(iter_simplex(k, n)), dtype=int).reshape(-1, k)
    array.setflags(write=False)
    return array


def enumerate_statistics(k, n, limit=None):
    """All statistics vectors of S_n as an (|S_n|, K) integer array.

    Args:
        k (int): number of reward levels K
        n (int): total count
        limit (int): maximum allowed |S_n|; None disables the guard

    Returns:
        numpy.ndarray: read-only array, one row per statistics vector

    Raises:
        TooLarge: when |S_n| exceeds ``limit``
    """
    size = simplex_size(k, n)
    if limit is not None and size > limit:
        raise TooLarge(f"|S_{n}| = {size} for K={k} exceeds the enumeration limit {limit}")
    return _simplex_array(k, n)


def derive_seed(seed, *indices):
    """Split a 64-bit seed: seed XOR a stable hash of the index path."""
    key = ':'.join(str(int(i)) for i in indices).encode('ascii')
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return (int(seed) ^ int.from_bytes(digest, 'little')) & SEED_MASK


def derived_rng(seed, *indices):
    return np.random.default_rng(derive_seed(seed, *indices))
