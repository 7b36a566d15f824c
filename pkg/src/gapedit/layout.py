"""
Padded strings and the code spaces derived from them.

``PAD`` is the code ``alphabet_size``; it fills both strings up to
``n_padded``. Hash residues map alphabet symbols to themselves, PAD to
``p - 2`` and BOTTOM to ``p - 1`` so every position code is a distinct
residue modulo ``p``.
"""

from __future__ import annotations

import math

import numpy as np

from .strings import BOTTOM, Text

MERSENNE31 = (1 << 31) - 1


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    for d in (2, 3, 5, 7, 11, 13):
        if q % d == 0:
            return q == d
    r = 17
    while r * r <= q:
        if q % r == 0:
            return False
        r += 2
    return True


def choose_prime(n_padded: int, alphabet_size: int) -> int:
    """Smallest prime at least ``max(n**4, alphabet_size + 3)``, capped at 2**31 - 1."""
    target = max(n_padded ** 4, alphabet_size + 3, 5)
    if target >= MERSENNE31:
        return MERSENNE31
    q = target
    while not _is_prime(q):
        q += 1
    return min(q, MERSENNE31)


def padded_symbols(text: Text, n_padded: int) -> np.ndarray:
    """Symbols of ``text`` followed by PAD up to ``n_padded``."""
    if len(text) > n_padded:
        raise ValueError("text longer than n_padded")
    out = np.full(n_padded, text.alphabet_size, dtype=np.int64)
    out[:len(text)] = text.symbols
    return out


def hash_codes(sym: np.ndarray, alphabet_size: int, p: int) -> np.ndarray:
    """Residue per symbol code (alphabet, PAD or BOTTOM)."""
    h = sym.astype(np.int64).copy()
    h[sym == alphabet_size] = p - 2
    h[sym == BOTTOM] = p - 1
    return h


class PaddedY:
    """Padded Y with sentinel margins on both sides.

    Parameters
    ----------
    text : Text
    n_padded : int
    margin : int
        Number of BOTTOM cells stored on each side so that any window
        ``[start, start + len)`` with ``-margin <= start`` and
        ``start + len <= n_padded + margin`` is a plain slice.
    p : int
        Hash modulus.

    Attributes
    ----------
    sym : int64[n_padded + 2 margin]
        Symbol codes, BOTTOM outside, PAD in the padding.
    hcode : int64[...]
        Hash residues of ``sym``.
    dense : int64[...]
        Codes remapped to ``[0, sigma)`` for bit-vector kernels.
    """

    def __init__(self, text: Text, n_padded: int, margin: int, p: int):
        self.n = len(text)
        self.n_padded = int(n_padded)
        self.alphabet_size = text.alphabet_size
        self.margin = int(margin)
        self.p = int(p)
        core = padded_symbols(text, n_padded)
        self.core = core
        self.sym = np.concatenate([
            np.full(self.margin, BOTTOM, dtype=np.int64), core,
            np.full(self.margin, BOTTOM, dtype=np.int64)])
        self.hcode = hash_codes(self.sym, self.alphabet_size, self.p)
        uniq, inv = np.unique(self.sym, return_inverse=True)
        self.dense = inv.astype(np.int64)
        self.sigma = int(uniq.size)


def margin_for(M: int) -> int:
    """Margin covering every window shifted by at most ``M``."""
    return int(M) + 2


def log_n(n_padded: int) -> float:
    return math.log(max(n_padded, 4))
