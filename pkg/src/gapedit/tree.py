"""
Precision tree, shift universe and per-node shift sets.

The tree is stored as flat arrays indexed by a breadth-first node id: level
``d`` holds ``B**d`` nodes with ids ``level_offset[d] + j`` for
``j = 0 .. B**d - 1`` and node ``(d, j)`` covers positions
``[j * n / B**d, (j + 1) * n / B**d)``.

Tolerances follow ``t_root = k`` and ``t_v = t_parent * u_v / 3`` with
``u_v ~ Exp(lambda)`` conditioned on ``u_v >= u_min``. The root has no
``u``; its entry is stored as ``nan``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import randomness as rnd


def default_branching(n: int) -> int:
    """``max(2, ceil(2 ** sqrt(log2 n * log2 log2 n)))`` for ``n >= 4``."""
    if n < 4:
        return 2
    lg = math.log2(n)
    return max(2, math.ceil(2.0 ** math.sqrt(lg * math.log2(lg))))


def tree_depth(n: int, B: int) -> int:
    """Smallest d with ``B**d >= n``."""
    d, size = 0, 1
    while size < n:
        size *= B
        d += 1
    return d


def choose_branching(n: int, branching: int | None = None,
                     shrink: bool = True) -> tuple[int, int]:
    """Branching factor and depth for a string of length ``n``.

    With ``shrink`` the default factor is lowered to the smallest value of the
    same depth, ``ceil(n ** (1/depth))``, which keeps the shift universe and
    depth unchanged while minimizing padding. An explicit ``branching`` is
    used verbatim.
    """
    n = max(int(n), 1)
    if branching is not None:
        if branching < 2:
            raise ValueError("branching must be at least 2")
        return int(branching), tree_depth(n, int(branching))
    B = default_branching(n)
    d = tree_depth(n, B)
    if shrink and d > 0:
        b = max(2, math.ceil(n ** (1.0 / d) - 1e-9))
        while b ** d < n:
            b += 1
        while b > 2 and (b - 1) ** d >= n:
            b -= 1
        B = b
    return B, d


@dataclass(frozen=True)
class ShiftSet:
    """Arithmetic progression ``{lo, lo + step, ..., hi}``, symmetric about 0."""

    lo: int
    hi: int
    step: int = 1

    def __post_init__(self):
        if self.step < 1 or self.lo > 0 or self.hi < 0 or self.lo % self.step or self.hi % self.step:
            raise ValueError(f"invalid shift set {self}")

    def __len__(self) -> int:
        return (self.hi - self.lo) // self.step + 1

    def __contains__(self, s) -> bool:
        return self.lo <= s <= self.hi and (s - self.lo) % self.step == 0

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1, self.step))

    def array(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, self.step, dtype=np.int64)

    def index(self, s: int) -> int:
        if s not in self:
            raise ValueError(f"shift {s} not in {self}")
        return (s - self.lo) // self.step

    def round(self, s: int) -> int:
        """Nearest member; ties go to the smaller magnitude, then the negative one."""
        from ._kernels import round_to_step
        return int(round_to_step(int(s), self.step, self.lo, self.hi))

    @property
    def bound(self) -> int:
        return self.hi


def shift_universe(k: int, n_padded: int, B: int, shift_base: float = 3.0) -> ShiftSet:
    """``S = {-M, ..., M}`` with ``M = k * ceil(shift_base ** depth)``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    d = tree_depth(n_padded, B)
    M = int(k) * math.ceil(shift_base ** d)
    return ShiftSet(-M, M, 1)


def node_step(t_v) -> np.ndarray | int:
    """``max(1, floor(t_v / 2))`` elementwise."""
    st = np.maximum(1, np.floor(np.asarray(t_v, dtype=np.float64) / 2.0)).astype(np.int64)
    return int(st) if st.ndim == 0 else st


def shifts_for_step(step: int, S: ShiftSet) -> ShiftSet:
    m = (S.hi // step) * step
    return ShiftSet(-m, m, int(step))


@dataclass(frozen=True)
class TreeConfig:
    """Everything that determines one precision tree.

    Parameters
    ----------
    n_padded : int
        Number of leaves, a power of ``branching``.
    branching : int
    k : int
        Root tolerance.
    c_lambda : float
        ``lambda = c_lambda * ln(max(n_padded, 4))``.
    u_min : float, optional
        Rejection threshold; ``n_padded ** -3`` when omitted.
    master_seed : bytes
    shift_base : float
    repetition : int
    """

    n_padded: int
    branching: int
    k: int
    c_lambda: float = 0.25
    u_min: float | None = None
    master_seed: bytes = field(default=b"\0" * 32, repr=False)
    shift_base: float = 3.0
    repetition: int = 0

    def __post_init__(self):
        if self.branching < 2:
            raise ValueError("branching must be at least 2")
        if self.branching ** tree_depth(self.n_padded, self.branching) != self.n_padded:
            raise ValueError("n_padded must be a power of branching")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.c_lambda <= 0:
            raise ValueError("c_lambda must be positive")
        if self.u_min is not None and not 0 < self.u_min < 1:
            raise ValueError("u_min must lie in (0, 1)")
        object.__setattr__(self, "master_seed", rnd.normalize_seed(self.master_seed))

    @property
    def lam(self) -> float:
        return self.c_lambda * math.log(max(self.n_padded, 4))

    @property
    def u_floor(self) -> float:
        return self.u_min if self.u_min is not None else float(self.n_padded) ** -3.0

    @property
    def depth(self) -> int:
        return tree_depth(self.n_padded, self.branching)


class PrecisionTree:
    """Balanced B-ary tree with sampled tolerances.

    Attributes
    ----------
    n, B, depth : int
    level_offset : int64[depth + 2]
        First node id of each level; ``level_offset[-1]`` is the node count.
    level_len : int64[depth + 1]
        Range length of the nodes at each level.
    u, t : float64[n_nodes]
        Precision draw and tolerance per node.
    step : int64[n_nodes]
        Step of the node's shift set.
    S : ShiftSet
        Shift universe.
    """

    def __init__(self, config: TreeConfig, rng: rnd.RandomSource | None = None):
        self.config = config
        self.n = config.n_padded
        self.B = config.branching
        self.depth = config.depth
        self.k = config.k
        self.lam = config.lam
        self.rng = rng or rnd.RandomSource(config.master_seed, config.repetition)
        sizes = [self.B ** d for d in range(self.depth + 1)]
        self.level_offset = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.level_len = np.array([self.n // s for s in sizes], dtype=np.int64)
        self.n_nodes = int(self.level_offset[-1])
        self.S = shift_universe(self.k, self.n, self.B, config.shift_base)
        ids = np.arange(1, self.n_nodes, dtype=np.uint64)
        u = np.full(self.n_nodes, np.nan)
        if ids.size:
            u[1:] = rnd.sample_exponential(self.lam, config.u_floor, self.rng, ids)
        t = np.empty(self.n_nodes)
        t[0] = float(self.k)
        for d in range(1, self.depth + 1):
            a, b = self.level_offset[d], self.level_offset[d + 1]
            pa, pb = self.level_offset[d - 1], self.level_offset[d]
            t[a:b] = np.repeat(t[pa:pb], self.B) * u[a:b] / 3.0
        self.u = u
        self.t = t
        self.step = node_step(t)

    # -- structure ---------------------------------------------------------
    def node_depth(self, v: int) -> int:
        return int(np.searchsorted(self.level_offset, v, side="right") - 1)

    def node_index(self, v: int) -> tuple[int, int]:
        d = self.node_depth(v)
        return d, int(v - self.level_offset[d])

    def node_range(self, v: int) -> tuple[int, int]:
        """``(start, length)`` of the node's leaf interval."""
        d, j = self.node_index(v)
        m = int(self.level_len[d])
        return j * m, m

    def height(self, v: int) -> int:
        return self.depth - self.node_depth(v)

    def is_leaf(self, v: int) -> bool:
        return self.node_depth(v) == self.depth

    def children(self, v: int) -> np.ndarray:
        d, j = self.node_index(v)
        if d == self.depth:
            return np.empty(0, dtype=np.int64)
        first = self.level_offset[d + 1] + j * self.B
        return np.arange(first, first + self.B, dtype=np.int64)

    def parent(self, v: int) -> int:
        d, j = self.node_index(v)
        if d == 0:
            return -1
        return int(self.level_offset[d - 1] + j // self.B)

    def level(self, d: int) -> np.ndarray:
        return np.arange(self.level_offset[d], self.level_offset[d + 1], dtype=np.int64)

    def level_starts(self, d: int) -> np.ndarray:
        return np.arange(self.B ** d, dtype=np.int64) * self.level_len[d]

    # -- shifts ------------------------------------------------------------
    def node_shifts(self, v: int) -> ShiftSet:
        return shifts_for_step(int(self.step[v]), self.S)

    def tolerance_bytes(self) -> bytes:
        """Canonical little-endian encoding of the tolerances."""
        return self.t.astype("<f8").tobytes()


def build_tree(config: TreeConfig) -> PrecisionTree:
    """Build the precision tree described by ``config``."""
    return PrecisionTree(config)


def node_shifts(tree: PrecisionTree, v: int, S: ShiftSet | None = None) -> ShiftSet:
    """``S_v``: multiples of ``max(1, floor(t_v/2))`` inside ``S``."""
    return shifts_for_step(int(tree.step[v]), S or tree.S)
