"""
Subsampled fingerprint tables answering Matching queries.

For every internal node v a sample ``H_v`` of positions is drawn at rate
``min(1, c_H ln n / t_v)`` together with one hash coefficient per sampled
position. The fingerprint of a window is ``sum_j a_j code(window[H_v[j]])
mod p``. Y's table maps the fingerprint of ``Y_{v,s}`` for every ``s`` in the
shift universe to a representative shift (smallest ``|s|``, ties to the
negative one).

Leaves are single characters. Their sample is either empty or the single
position, and because coefficients are nonzero the single-position hash is
injective, so the leaf table is represented implicitly by Y itself: the
stored shift for character c is the nearest occurrence of c. That is the
same answer an explicit table would give.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import randomness as rnd
from .layout import PaddedY, hash_codes, log_n
from .strings import BOTTOM
from .tree import PrecisionTree


@dataclass
class SampleLevel:
    """Samples and coefficients of all nodes at one internal depth."""

    ptr: np.ndarray      # int64[N + 1]
    pos: np.ndarray      # int64[total], offsets inside the node
    coef: np.ndarray     # int64[total]

    def node(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.ptr[j], self.ptr[j + 1]
        return self.pos[a:b], self.coef[a:b]

    def sizes(self) -> np.ndarray:
        return np.diff(self.ptr)


@dataclass
class Samples:
    """Public per-repetition randomness for matching (shared by X and Y)."""

    p: int
    levels: list            # SampleLevel per internal depth
    leaf_sampled: np.ndarray  # bool[n]
    leaf_coef: np.ndarray     # int64[n]


def sample_rate(t, c_h: float, n_padded: int):
    return np.minimum(1.0, c_h * log_n(n_padded) / np.asarray(t, dtype=np.float64))


def build_samples(tree: PrecisionTree, c_h: float, p: int) -> Samples:
    """Draw ``H_v`` and hash coefficients for every node of ``tree``."""
    rng = tree.rng
    levels = []
    for d in range(tree.depth):
        ids = tree.level(d)
        m = int(tree.level_len[d])
        rate = sample_rate(tree.t[ids], c_h, tree.n)
        mask = np.ones((ids.size, m), dtype=bool)
        part = np.flatnonzero(rate < 1.0)
        if part.size:
            U = rng.uniform(ids[part][:, None], rnd.SAMPLE, np.arange(m, dtype=np.uint64)[None, :])
            mask[part] = U < rate[part][:, None]
        counts = mask.sum(axis=1)
        ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        pos = np.nonzero(mask)[1].astype(np.int64)
        owner = np.repeat(ids, counts)
        coef = _coefficients(rng, owner, pos, p)
        levels.append(SampleLevel(ptr, pos, coef))
    leaves = tree.level(tree.depth)
    rate = sample_rate(tree.t[leaves], c_h, tree.n)
    sampled = rate >= 1.0
    part = np.flatnonzero(~sampled)
    if part.size:
        U = rng.uniform(leaves[part], rnd.SAMPLE, np.uint64(0))
        sampled[part] = U < rate[part]
    leaf_coef = _coefficients(rng, leaves, np.zeros(leaves.size, dtype=np.int64), p)
    return Samples(p, levels, sampled, leaf_coef)


def _coefficients(rng, owner, pos, p: int) -> np.ndarray:
    if owner.size == 0:
        return np.empty(0, dtype=np.int64)
    w = rng.words(owner.astype(np.uint64), rnd.COEF, pos.astype(np.uint64))
    return (w % np.uint64(p - 1)).astype(np.int64) + 1


def fingerprint(source, positions, coefs, p: int, alphabet_size: int) -> int:
    """Fingerprint of ``source`` (symbol codes) on the sampled positions.

    Parameters
    ----------
    source : array_like of int
        Symbols of the window, BOTTOM allowed.
    positions, coefs : int arrays
        ``H_v`` and its coefficients.
    """
    src = np.asarray(source, dtype=np.int64)
    if len(positions) == 0:
        return 0
    h = hash_codes(src[np.asarray(positions)], alphabet_size, p)
    return int(_kernels.fingerprints_segments(
        h, np.zeros(1, dtype=np.int64), np.array([0, len(h)], dtype=np.int64),
        np.arange(len(h), dtype=np.int64), np.asarray(coefs, dtype=np.int64), p)[0])


class MatchingIndex:
    """One-sided fingerprint tables over Y for one repetition.

    Parameters
    ----------
    tree : PrecisionTree
    samples : Samples
    y : PaddedY
    tables : list of (keys, shifts), optional
        Preloaded per-level tables; computed from ``y`` when omitted.

    Notes
    -----
    Table keys are ``local_node_index * p + fingerprint`` in one sorted
    ``int64`` array per level so a lookup is a single binary search.
    """

    def __init__(self, tree: PrecisionTree, samples: Samples, y: PaddedY, tables=None):
        self.tree = tree
        self.samples = samples
        self.y = y
        self.p = samples.p
        self.tables = tables if tables is not None else self._build()

    def _build(self):
        tree, y, p = self.tree, self.y, self.p
        shifts = tree.S.array()
        base = y.margin
        tables = []
        for d in range(tree.depth):
            lv = self.samples.levels[d]
            starts = tree.level_starts(d)
            fp = _kernels.level_fingerprints(y.hcode, base, starts, lv.ptr, lv.pos,
                                             lv.coef, shifts, p)
            keys, reps = build_table(fp, shifts, p)
            tables.append((keys, reps))
        return tables

    def entries_attempted(self) -> int:
        return sum(self.tree.B ** d for d in range(self.tree.depth)) * len(self.tree.S)

    def lookup(self, v: int, fp: int):
        """Stored shift for ``fp`` at internal node ``v``, or None."""
        d, j = self.tree.node_index(v)
        keys, reps = self.tables[d]
        key = j * self.p + int(fp)
        i = int(np.searchsorted(keys, key))
        if i < keys.size and keys[i] == key:
            return int(reps[i])
        return None

    def leaf_lookup(self, v: int, symbol: int):
        """Nearest shift at which Y's character equals ``symbol`` (leaf table)."""
        d, j = self.tree.node_index(v)
        M = self.tree.S.hi
        s = int(_kernels.nearest_occurrence(self.y.sym, self.y.margin + j, int(symbol), M))
        return None if s > M else s


def build_table(fp: np.ndarray, shifts: np.ndarray, p: int):
    """Collapse an ``(N, |S|)`` fingerprint matrix into sorted keys and shifts."""
    N, ns = fp.shape
    keys = (np.arange(N, dtype=np.int64)[:, None] * p + fp).reshape(-1)
    sh = np.broadcast_to(shifts, (N, ns)).reshape(-1)
    order = np.lexsort((sh > 0, np.abs(sh), keys))
    keys = keys[order]
    sh = sh[order]
    first = np.ones(keys.size, dtype=bool)
    first[1:] = keys[1:] != keys[:-1]
    return keys[first], sh[first].astype(np.int32)


def preprocess_matching_y(y: PaddedY, tree: PrecisionTree, samples: Samples) -> MatchingIndex:
    """Fingerprint tables for every internal node and every shift."""
    return MatchingIndex(tree, samples, y)


def preprocess_matching_x(x_core: np.ndarray, tree: PrecisionTree, samples: Samples,
                          alphabet_size: int) -> np.ndarray:
    """Fingerprint of ``X_v`` for every node (leaves included).

    ``x_core`` is X padded to ``n_padded`` with PAD.
    """
    p = samples.p
    h = hash_codes(np.asarray(x_core, dtype=np.int64), alphabet_size, p)
    out = np.zeros(tree.n_nodes, dtype=np.int64)
    for d in range(tree.depth):
        lv = samples.levels[d]
        ids = tree.level(d)
        out[ids] = _kernels.fingerprints_segments(h, tree.level_starts(d), lv.ptr,
                                                  lv.pos, lv.coef, p)
    leaves = tree.level(tree.depth)
    fl = (samples.leaf_coef * h) % p
    fl[~samples.leaf_sampled] = 0
    out[leaves] = fl
    return out


def leaf_symbols_from_fingerprints(fps: np.ndarray, samples: Samples, alphabet_size: int,
                                   leaf_idx: np.ndarray | None = None) -> np.ndarray:
    """Invert single-position leaf fingerprints back to symbol codes.

    Unsampled leaves decode to BOTTOM; callers treat them as Close(0).
    """
    p = samples.p
    coef = samples.leaf_coef if leaf_idx is None else samples.leaf_coef[leaf_idx]
    inv = _kernels.modpow_vec(coef, p - 2, p)
    h = (np.asarray(fps, dtype=np.int64) % p) * inv % p
    sym = h.copy()
    sym[h == p - 2] = alphabet_size
    sym[h == p - 1] = BOTTOM
    return sym


class XReader:
    """Counting accessor for the padded query string X."""

    def __init__(self, x_core: np.ndarray, alphabet_size: int, p: int):
        self.core = np.asarray(x_core, dtype=np.int64)
        self.alphabet_size = alphabet_size
        self.p = p
        self.hcode = hash_codes(self.core, alphabet_size, p)
        self.reads = 0

    def read(self, positions: np.ndarray) -> np.ndarray:
        self.reads += int(len(positions))
        return self.core[positions]

    def fingerprint(self, start: int, positions: np.ndarray, coefs: np.ndarray) -> int:
        self.reads += int(len(positions))
        if len(positions) == 0:
            return 0
        return int(_kernels.fingerprints_segments(
            self.hcode, np.array([start], dtype=np.int64),
            np.array([0, len(positions)], dtype=np.int64), positions, coefs, self.p)[0])


def matching_query(index: MatchingIndex, v: int, x) -> int | None:
    """Answer the Matching query at ``v``.

    Parameters
    ----------
    index : MatchingIndex
    v : int
        Node id.
    x : XReader or numpy array
        An :class:`XReader` (one-sided, reads ``|H_v|`` characters) or the
        per-node X fingerprints produced by :func:`preprocess_matching_x`
        (two-sided, reads nothing).

    Returns
    -------
    int or None
        The shift ``s*`` for Close(s*), None for Far.
    """
    tree = index.tree
    d, j = tree.node_index(v)
    if d == tree.depth:
        if isinstance(x, XReader):
            if not index.samples.leaf_sampled[j]:
                return 0
            sym = int(x.read(np.array([j]))[0])
        else:
            if not index.samples.leaf_sampled[j]:
                return 0
            sym = int(leaf_symbols_from_fingerprints(
                np.array([x[v]]), index.samples, index.y.alphabet_size, np.array([j]))[0])
        return index.leaf_lookup(v, sym)
    pos, coef = index.samples.levels[d].node(j)
    start = j * int(tree.level_len[d])
    if isinstance(x, XReader):
        fp = x.fingerprint(start, pos, coef)
    else:
        fp = int(x[v])
    return index.lookup(v, fp)
