"""
Symbol sequences and exact distance oracles.

A :class:`Text` is an immutable integer-coded string. Reads outside
``[0, len)`` yield :data:`BOTTOM`, a sentinel that only equals itself, so a
window of any length at any offset is well defined. The padding symbol used
to round lengths up to a power of the branching factor is the first code past
the alphabet (``alphabet_size``) and is an ordinary symbol from the point of
view of every distance.

The distance functions accept a :class:`Text`, a :class:`Window`, a numpy
array, a ``str``/``bytes`` object, or any sequence of ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import _kernels

BOTTOM = -1
EXCEEDS = None

BYTES = "bytes"
UNICODE = "unicode"
_ALPHABET_SIZES = {BYTES: 256, UNICODE: 0x110000}


class Text:
    """Immutable integer-coded symbol sequence.

    Parameters
    ----------
    symbols : array_like of int
        Non-negative codes, each ``< alphabet_size``.
    alphabet_size : int, optional
        Size of the alphabet. Defaults to ``max(symbols) + 1`` (at least 1).

    Notes
    -----
    The backing array is read-only. :data:`BOTTOM` can never be stored.
    """

    __slots__ = ("_sym", "alphabet_size")

    def __init__(self, symbols, alphabet_size: int | None = None):
        arr = np.array(symbols, dtype=np.int64).reshape(-1)
        if arr.size and arr.min() < 0:
            raise ValueError("symbols must be non-negative")
        top = int(arr.max()) + 1 if arr.size else 1
        if alphabet_size is None:
            alphabet_size = top
        if top > alphabet_size:
            raise ValueError(f"symbol {top - 1} outside alphabet of size {alphabet_size}")
        arr.setflags(write=False)
        self._sym = arr
        self.alphabet_size = int(alphabet_size)

    @classmethod
    def from_str(cls, s: str) -> "Text":
        """Code points as symbols over the full Unicode alphabet."""
        return cls(np.fromiter(map(ord, s), dtype=np.int64, count=len(s)),
                   _ALPHABET_SIZES[UNICODE])

    @classmethod
    def from_bytes(cls, b: bytes) -> "Text":
        return cls(np.frombuffer(bytes(b), dtype=np.uint8).astype(np.int64),
                   _ALPHABET_SIZES[BYTES])

    @property
    def symbols(self) -> np.ndarray:
        return self._sym

    def __len__(self) -> int:
        return int(self._sym.shape[0])

    def __getitem__(self, index):
        return self._sym[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Text):
            return NotImplemented
        return np.array_equal(self._sym, other._sym)

    def __hash__(self) -> int:
        return hash(self._sym.tobytes())

    def __repr__(self) -> str:
        head = ",".join(map(str, self._sym[:8].tolist()))
        more = ",..." if len(self) > 8 else ""
        return f"Text([{head}{more}], len={len(self)}, alphabet_size={self.alphabet_size})"


@dataclass(frozen=True)
class Window:
    """Lazy view ``text[start : start + length]`` with BOTTOM outside the text."""

    text: Text
    start: int
    length: int

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, p: int) -> int:
        if not 0 <= p < self.length:
            raise IndexError(p)
        return read_at(self.text, self.start + p)

    def to_array(self) -> np.ndarray:
        return _window_array(self.text.symbols, self.start, self.length)


SymbolSource = Union[Text, Window, np.ndarray, str, bytes, Sequence[int]]


def read_at(text: Text, index: int) -> int:
    """Symbol at ``index`` or :data:`BOTTOM` when out of range.

    Examples
    --------
    >>> t = Text([0, 1, 2])
    >>> read_at(t, 1), read_at(t, -1), read_at(t, 3)
    (1, -1, -1)
    """
    if 0 <= index < len(text):
        return int(text.symbols[index])
    return BOTTOM


def window(text: Text, start: int, length: int) -> Window:
    """Window of ``length`` symbols starting at ``start`` (may be negative)."""
    if length < 0:
        raise ValueError("window length must be non-negative")
    return Window(text, int(start), int(length))


def _window_array(sym: np.ndarray, start: int, length: int) -> np.ndarray:
    out = np.full(length, BOTTOM, dtype=np.int64)
    lo = max(start, 0)
    hi = min(start + length, sym.shape[0])
    if hi > lo:
        out[lo - start:hi - start] = sym[lo:hi]
    return out


def as_array(source: SymbolSource) -> np.ndarray:
    """Materialize any accepted symbol source as an ``int64`` array."""
    if isinstance(source, Text):
        return source.symbols
    if isinstance(source, Window):
        return source.to_array()
    if isinstance(source, str):
        return np.fromiter(map(ord, source), dtype=np.int64, count=len(source))
    if isinstance(source, (bytes, bytearray, memoryview)):
        return np.frombuffer(bytes(source), dtype=np.uint8).astype(np.int64)
    return np.asarray(source, dtype=np.int64).reshape(-1)


def hamming(a: SymbolSource, b: SymbolSource) -> int:
    """Number of mismatching positions of two equal-length sources."""
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise ValueError(f"hamming needs equal lengths, got {x.size} and {y.size}")
    return int(np.count_nonzero(x != y))


def edit_distance(a: SymbolSource, b: SymbolSource) -> int:
    """Exact Levenshtein distance by the full quadratic program.

    Examples
    --------
    >>> edit_distance("kitten", "sitting")
    3
    """
    return int(_kernels.ed_full(as_array(a), as_array(b)))


def edit_distance_banded(a: SymbolSource, b: SymbolSource, bound: int):
    """Exact distance if it is at most ``bound``, else :data:`EXCEEDS` (``None``).

    Runs in ``O(max(|a|, |b|) * bound)`` time.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    d = int(_kernels.ed_banded(as_array(a), as_array(b), int(bound)))
    return EXCEEDS if d < 0 else d


def edit_distance_fast(a: SymbolSource, b: SymbolSource) -> int:
    """Exact distance with bit-parallel vectors; for long inputs."""
    x, y = as_array(a), as_array(b)
    if x.size == 0 or y.size == 0:
        return int(x.size + y.size)
    _, inv = np.unique(np.concatenate([x, y]), return_inverse=True)
    inv = inv.astype(np.int64)
    sigma = int(inv.max()) + 1
    return int(_kernels.ed_myers(inv[:x.size], inv[x.size:], sigma))


@dataclass(frozen=True)
class Alignment:
    """Monotone map ``A(0..|X|)`` with ``A(|X|) = |Y|`` and ``A(0) = 0`` for non-empty X."""

    map: np.ndarray

    def pieces(self, a: SymbolSource, b: SymbolSource):
        """Yield ``(X[i], Y[A(i):A(i+1)])`` for every position i of X."""
        x, y = as_array(a), as_array(b)
        for i in range(x.size):
            yield x[i:i + 1], y[self.map[i]:self.map[i + 1]]

    def cost(self, a: SymbolSource, b: SymbolSource) -> int:
        """Sum of per-character distances; equals ED(a, b) for an optimal map."""
        x, y = as_array(a), as_array(b)
        if x.size == 0:
            return int(y.size)
        return sum(edit_distance(p, q) for p, q in self.pieces(x, y))


def optimal_alignment(a: SymbolSource, b: SymbolSource) -> Alignment:
    """Alignment read off a backtrace of the DP table.

    The backtrace walks from ``(|X|, |Y|)`` to ``(0, 0)`` preferring the
    diagonal, then deletion of ``X[i-1]``, then insertion. ``A(i)`` for
    ``i < |X|`` is the smallest column visited by the path on row ``i`` and
    ``A(|X|) = |Y|``.
    """
    x, y = as_array(a), as_array(b)
    D = _kernels.ed_table(x, y)
    i, j = x.size, y.size
    amap = np.full(x.size + 1, -1, dtype=np.int64)
    amap[x.size] = y.size
    row_min = {i: j}
    while i > 0 or j > 0:
        if i > 0 and j > 0 and D[i, j] == D[i - 1, j - 1] + (x[i - 1] != y[j - 1]):
            i, j = i - 1, j - 1
        elif i > 0 and D[i, j] == D[i - 1, j] + 1:
            i -= 1
        else:
            j -= 1
        row_min[i] = min(row_min.get(i, j), j)
    for r in range(x.size):
        amap[r] = row_min[r]
    return Alignment(amap)


def coerce_text(obj, alphabet: str | None = None) -> Text:
    """Build a :class:`Text` from str, bytes, Text or an int sequence."""
    if isinstance(obj, Text):
        return obj
    if isinstance(obj, str):
        return Text.from_str(obj)
    if isinstance(obj, (bytes, bytearray, memoryview)):
        return Text.from_bytes(obj)
    size = _ALPHABET_SIZES.get(alphabet) if alphabet else None
    return Text(obj, size)
