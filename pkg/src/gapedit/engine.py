"""
Pruning rule, main recursion, exact-leaf baseline and the top-level gap decision.

The recursion mirrors the algorithm line by line:

1. Ask the matching index about ``X_v``. On Close(s*) answer the whole
   shift vector from the shifted-distance table (pruning).
2. Otherwise, a leaf returns its exact single-character distances.
3. Otherwise, recurse on every child, move each child's vector onto ``S_v``
   with the range-minimum transfer and combine per shift with Recover using
   ``beta = t_v`` and the children's precisions.

Nodes whose children are leaves are handled by a fused compiled kernel that
performs steps 1 to 3 for all B leaves at once; ``fused=False`` switches to the
node-by-node path, which the tests use to check that both agree.

Work is measured in operations (node visits, table lookups and character
reads). A repetition that exceeds its budget is abandoned and votes FAR.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .matching import MatchingIndex, XReader, leaf_symbols_from_fingerprints, matching_query
from .psl import recover_matrix
from .shifted import ShiftedDistanceIndex
from .strings import BOTTOM
from .tree import PrecisionTree, ShiftSet

CLOSE = "CLOSE"
FAR = "FAR"


@dataclass
class QueryStats:
    """Instrumentation counters of one query (or one repetition).

    Attributes
    ----------
    x_reads, y_reads : int
        Character reads of X and Y during the query phase.
    nodes_visited : int
    prune_hits, prune_fails : int
        Matching answered Close (node pruned) or Far (node failed).
    leaf_hits : int
        Leaves that returned exact distances after a failed prune.
    table_lookups : int
        Matching lookups plus shifted-distance entries read.
    ops : int
        Budget metric: visits + lookups + reads.
    sd_fills : int
        Shifted-distance entries computed on first use (deferred
        preprocessing; zero when the table was materialized).
    repetitions, timed_out : int
    wall_nanos : int
    """

    x_reads: int = 0
    y_reads: int = 0
    nodes_visited: int = 0
    prune_hits: int = 0
    prune_fails: int = 0
    leaf_hits: int = 0
    table_lookups: int = 0
    ops: int = 0
    sd_fills: int = 0
    repetitions: int = 0
    timed_out: int = 0
    wall_nanos: int = 0

    def merge(self, other: "QueryStats") -> "QueryStats":
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GapVerdict:
    """Final decision of a gap query.

    ``estimate`` is the median of the per-repetition root estimates at shift
    0 (``inf`` for repetitions that timed out or were skipped as FAR by the
    length rule).
    """

    decision: str
    estimate: float
    threshold: float
    timed_out: bool
    repetition_votes: dict = field(default_factory=dict)
    estimates: list = field(default_factory=list)

    @property
    def close(self) -> bool:
        return self.decision == CLOSE

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimate"] = _json_float(self.estimate)
        d["estimates"] = [_json_float(e) for e in self.estimates]
        return d


def _json_float(x: float):
    return x if math.isfinite(x) else None


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# Range-minimum transfer
# ---------------------------------------------------------------------------


def range_min_transfer(T, T_prime, b) -> np.ndarray:
    """``a_s = min_{s' in T'} b_{s'} + 2|s - s'|`` for every ``s`` in ``T``.

    Parameters
    ----------
    T, T_prime : sorted integer arrays (or :class:`ShiftSet`)
    b : array of float, one value per element of ``T_prime``

    Notes
    -----
    Forward sweep keeps ``min b_{s'} - 2 s'`` over ``s' <= s``; backward sweep
    keeps ``min b_{s'} + 2 s'`` over ``s' >= s``. Linear in ``|T| + |T'|``.
    """
    if isinstance(T, ShiftSet) and isinstance(T_prime, ShiftSet):
        return _kernels.transfer_progressions(T.lo, T.step, len(T), T_prime.lo, T_prime.step,
                                              np.asarray(b, dtype=np.float64))
    T = np.asarray(T.array() if isinstance(T, ShiftSet) else T, dtype=np.int64)
    Tp = np.asarray(T_prime.array() if isinstance(T_prime, ShiftSet) else T_prime, dtype=np.int64)
    b = np.asarray(b, dtype=np.float64)
    if Tp.size == 0:
        raise ValueError("T' must be non-empty")
    if b.shape != Tp.shape:
        raise ValueError("b must have one value per element of T'")
    return _transfer_sorted(T, Tp, b)


def _transfer_sorted(T, Tp, b):
    out = np.full(T.size, np.inf)
    best = np.inf
    j = 0
    for i, s in enumerate(T.tolist()):
        while j < Tp.size and Tp[j] <= s:
            best = min(best, b[j] - 2.0 * Tp[j])
            j += 1
        out[i] = best + 2.0 * s
    best = np.inf
    j = Tp.size - 1
    for i in range(T.size - 1, -1, -1):
        s = T[i]
        while j >= 0 and Tp[j] >= s:
            best = min(best, b[j] + 2.0 * Tp[j])
            j -= 1
        out[i] = min(out[i], best - 2.0 * s)
    return out


# ---------------------------------------------------------------------------
# Query context (one repetition)
# ---------------------------------------------------------------------------


class QueryContext:
    """Indexes and counters used by one repetition of the recursion.

    Parameters
    ----------
    tree : PrecisionTree
    matching : MatchingIndex
    shifted : ShiftedDistanceIndex
    x : XReader or ndarray
        Raw X (one-sided) or per-node X fingerprints (two-sided).
    c1, c2 : float
        Recover constants.
    budget : int, optional
        Operation budget; None for unlimited.
    fused : bool
        Use the compiled leaf-block kernel.
    """

    def __init__(self, tree: PrecisionTree, matching: MatchingIndex,
                 shifted: ShiftedDistanceIndex, x, c1: float, c2: float,
                 budget: int | None = None, fused: bool = True):
        self.tree = tree
        self.matching = matching
        self.shifted = shifted
        self.x = x
        self.c1 = c1
        self.c2 = c2
        self.budget = budget
        self.fused = fused
        self.stats = QueryStats()
        self.one_sided = isinstance(x, XReader)
        self._fail_log = None

    def _charge(self, ops: int):
        self.stats.ops += ops
        if self.budget is not None and self.stats.ops > self.budget:
            raise BudgetExceeded

    def match(self, v: int):
        """Matching query with accounting."""
        before = self.x.reads if self.one_sided else 0
        s_star = matching_query(self.matching, v, self.x)
        reads = (self.x.reads - before) if self.one_sided else 0
        self.stats.x_reads += reads
        self.stats.table_lookups += 1
        self._charge(1 + reads)
        return s_star


def prune_node(ctx: QueryContext, v: int):
    """Pruning rule: table-backed estimate over ``S_v`` or None for FAIL."""
    s_star = ctx.match(v)
    if s_star is None:
        ctx.stats.prune_fails += 1
        return None
    ctx.stats.prune_hits += 1
    Sv = ctx.tree.node_shifts(v)
    fills = ctx.shifted.fills
    vals = ctx.shifted.query_row(ctx.tree, v, s_star, Sv.array())
    ctx.stats.sd_fills += ctx.shifted.fills - fills
    ctx.stats.table_lookups += len(Sv)
    ctx._charge(len(Sv))
    return vals


def approx_node(ctx: QueryContext, v: int) -> np.ndarray:
    """Main recursion: estimates of ``ED(X_v, Y_{v,s})`` for every ``s`` in ``S_v``."""
    tree = ctx.tree
    ctx.stats.nodes_visited += 1
    ctx._charge(1)
    vals = prune_node(ctx, v)
    if vals is not None:
        return vals
    Sv = tree.node_shifts(v)
    if tree.is_leaf(v):
        # sampled leaf whose character occurs nowhere within the shift range
        ctx.stats.leaf_hits += 1
        return _leaf_exact(ctx, v, Sv)
    children = tree.children(v)
    if ctx.fused and tree.node_depth(v) == tree.depth - 1:
        return _leaf_block(ctx, v, children, Sv)
    A = np.empty((children.size, len(Sv)))
    for i, c in enumerate(children):
        est = approx_node(ctx, int(c))
        A[i] = range_min_transfer(Sv, tree.node_shifts(int(c)), est)
    return recover_matrix(A, tree.u[children], tree.lam, float(tree.t[v]), ctx.c1, ctx.c2)


def _leaf_exact(ctx: QueryContext, v: int, Sv: ShiftSet) -> np.ndarray:
    """Exact single-character distances; reached only after a Far answer.

    A Far answer at a leaf means its (sampled, already read) character does
    not occur in Y within the shift range, so every distance is 1.
    """
    return np.ones(len(Sv))


def _leaf_block(ctx: QueryContext, v: int, children: np.ndarray, Sv: ShiftSet) -> np.ndarray:
    tree = ctx.tree
    samples = ctx.matching.samples
    y = ctx.matching.y
    j0 = int(children[0] - tree.level_offset[tree.depth])
    idx = np.arange(j0, j0 + children.size)
    sampled = samples.leaf_sampled[idx]
    if ctx.one_sided:
        pos = idx[sampled]
        chars = np.full(idx.size, BOTTOM, dtype=np.int64)
        chars[sampled] = ctx.x.read(pos)
        nread = int(pos.size)
    else:
        chars = leaf_symbols_from_fingerprints(ctx.x[children], samples, y.alphabet_size, idx)
        nread = 0
    R, hits, fails, lookups = _kernels.leaf_block(
        y.sym, y.margin, idx, chars, sampled, tree.step[children], tree.S.hi,
        Sv.lo, Sv.step, len(Sv), tree.u[children], float(tree.t[v]), tree.lam,
        ctx.c1, ctx.c2)
    st = ctx.stats
    st.x_reads += nread
    st.nodes_visited += children.size
    st.prune_hits += int(hits)
    st.prune_fails += int(fails)
    st.leaf_hits += int(fails)
    st.table_lookups += int(lookups)
    ctx._charge(children.size + int(lookups) + nread)
    return R


def run_repetition(ctx: QueryContext) -> tuple[float, bool]:
    """Root estimate at shift 0 and whether the budget ran out."""
    tree = ctx.tree
    try:
        vals = approx_node(ctx, 0)
    except BudgetExceeded:
        ctx.stats.timed_out += 1
        return math.inf, True
    S0 = tree.node_shifts(0)
    return float(vals[S0.index(0)]), False


def default_budget(tree: PrecisionTree, factor: float, fail_per_level: float = 2.0) -> int:
    """Analytic per-repetition budget for close instances.

    Level d is charged for ``N_d`` visited nodes, where ``N_0 = 1`` and
    ``N_d = min(B**d, B * min(N_{d-1}, fail_per_level * k))``, each with one
    visit, one matching lookup and ``|S|`` table lookups, plus at most the
    whole string in reads per level. The result is scaled by ``factor``.
    """
    B, k, nS = tree.B, tree.k, len(tree.S)
    total, N = 0.0, 1
    for d in range(tree.depth + 1):
        if d > 0:
            N = min(B ** d, B * min(N, fail_per_level * k))
        total += N * (2 + nS) + min(tree.n, N * int(tree.level_len[d]))
    return int(factor * total)


# ---------------------------------------------------------------------------
# Exact-leaf baseline
# ---------------------------------------------------------------------------


def baseline_recursive(x_core: np.ndarray, y_core: np.ndarray, tree: PrecisionTree,
                 max_cells: int = 50_000_000) -> np.ndarray:
    """Simple recombination: exact leaves, plain sums, ``S_v = S`` everywhere.

    Parameters
    ----------
    x_core, y_core : int arrays of length ``n_padded``
        Padded strings.
    tree : PrecisionTree
        Only its shape and shift universe are used.

    Returns
    -------
    ndarray
        Root estimates over the shift universe.
    """
    S = tree.S
    shifts = S.array()
    n = tree.n
    if n * shifts.size > max_cells:
        raise ValueError(f"baseline refuses n={n} with |S|={shifts.size} (cap {max_cells} cells)")
    M = S.hi
    ext = np.concatenate([np.full(M, BOTTOM), np.asarray(y_core, dtype=np.int64), np.full(M, BOTTOM)])
    pos = np.arange(n)[:, None] + shifts[None, :] + M
    est = (np.asarray(x_core)[:, None] != ext[pos]).astype(np.float64)
    twice = 2.0 * shifts.astype(np.float64)
    for d in range(tree.depth - 1, -1, -1):
        # transfer every child row from S to S, then sum siblings
        fwd = np.minimum.accumulate(est - twice, axis=1) + twice
        bwd = np.minimum.accumulate((est + twice)[:, ::-1], axis=1)[:, ::-1] - twice
        moved = np.minimum(fwd, bwd)
        est = moved.reshape(-1, tree.B, shifts.size).sum(axis=1)
    return est[0]


# library API name
baseline_eq1 = baseline_recursive
