"""
Shifted-distance tables over Y.

Entry ``(v, s~, s')`` holds ``ED(Y_{v,s~}, Y_{v,s'})`` capped at
``M + k`` (``M = max S``), where ``s~`` ranges over the node's shift set and
``s'`` over the shift universe. A query ``(v, s, s')`` rounds ``s`` to the
nearest ``s~`` in ``S_v`` and returns ``min(entry, M + t_v)``.

Storage
-------
Entries depend only on Y, the node's position and the two shifts, not on the
sampled tolerances. Rows are therefore keyed by ``(depth, node index, s~)``
and shared by all repetitions; each row is a dense vector over ``s' in S``
with ``-1`` marking entries not yet computed. :meth:`materialize` fills every
entry any repetition can ask for. Without it, rows are filled on first use;
this defers preprocessing work but never changes a value.

Leaf entries are single-character comparisons and are answered directly
from the stored padded Y.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .layout import PaddedY
from .tree import PrecisionTree, ShiftSet


class ShiftedDistanceIndex:
    """Capped exact distances between shifted windows of Y.

    Parameters
    ----------
    y : PaddedY
    S : ShiftSet
        Shift universe.
    k : int
        Largest tolerance, fixes the storage cap ``M + k``.
    level_len : array of int
        Window length per depth.
    """

    def __init__(self, y: PaddedY, S: ShiftSet, k: int, level_len):
        self.y = y
        self.S = S
        self.M = int(S.hi)
        self.k = int(k)
        self.level_len = np.asarray(level_len, dtype=np.int64)
        self.cap = self.M + self.k
        self.dtype = np.int16 if self.cap < np.iinfo(np.int16).max else np.int32
        self.rows: dict[tuple[int, int, int], np.ndarray] = {}
        self.fills = 0

    # -- storage -------------------------------------------------------------
    def _row(self, d: int, j: int, st: int) -> np.ndarray:
        key = (d, j, st)
        row = self.rows.get(key)
        if row is None:
            row = np.full(2 * self.M + 1, -1, dtype=self.dtype)
            self.rows[key] = row
        return row

    def entries(self, d: int, j: int, st: int, s_prime: np.ndarray) -> np.ndarray:
        """Stored (capped at ``M + k``) entries, computing missing ones."""
        row = self._row(d, j, st)
        idx = s_prime + self.M
        vals = row[idx]
        missing = vals < 0
        if missing.any():
            sp = s_prime[missing]
            m = int(self.level_len[d])
            p = self.y.margin + j * m + st
            got = _kernels.shifted_row(self.y.dense, self.y.sigma, p, m,
                                       (sp - st).astype(np.int64), self.cap)
            row[sp + self.M] = got
            self.fills += int(sp.size)
            vals = row[idx]
        return vals

    def materialize(self, trees) -> int:
        """Fill every entry reachable from the given trees; returns new fills."""
        before = self.fills
        S_all = self.S.array()
        wanted: dict[tuple[int, int], set] = {}
        for tree in trees:
            for d in range(tree.depth):
                ids = tree.level(d)
                for j, v in enumerate(ids):
                    step = int(tree.step[v])
                    wanted.setdefault((d, j), set()).add(step)
        for (d, j), steps in sorted(wanted.items()):
            sts = set()
            for step in steps:
                m = (self.M // step) * step
                sts.update(range(-m, m + 1, step))
            for st in sorted(sts):
                self.entries(d, j, st, S_all)
        return self.fills - before

    def nbytes(self) -> int:
        return sum(r.nbytes for r in self.rows.values())

    # -- queries -------------------------------------------------------------
    def query_row(self, tree: PrecisionTree, v: int, s: int, s_prime: np.ndarray) -> np.ndarray:
        """Query ``(v, s, s')`` for a vector of ``s'``; returns floats."""
        d, j = tree.node_index(v)
        Sv = tree.node_shifts(v)
        st = Sv.round(int(s))
        if d == tree.depth:
            c = self.y.margin + j
            sym = self.y.sym
            return (sym[c + s_prime] != sym[c + st]).astype(np.float64)
        vals = self.entries(d, j, st, np.asarray(s_prime, dtype=np.int64)).astype(np.float64)
        return np.minimum(vals, self.M + tree.t[v])

    def shifted_distance_query(self, tree: PrecisionTree, v: int, s: int, s_prime: int) -> float:
        if s not in self.S or s_prime not in self.S:
            raise ValueError("shifts must lie in the shift universe")
        return float(self.query_row(tree, v, s, np.array([s_prime]))[0])


def preprocess_shifted(y: PaddedY, trees, k: int) -> ShiftedDistanceIndex:
    """Build and fully materialize the table for the given trees."""
    tree0 = trees[0]
    idx = ShiftedDistanceIndex(y, tree0.S, k, tree0.level_len)
    idx.materialize(trees)
    return idx
