"""
Preprocessing of Y (and optionally X) and the top-level gap query.

``preprocess_y`` builds, for every repetition, an independently seeded
precision tree with its matching tables, plus one shifted-distance table
shared by all repetitions. ``preprocess_x`` builds the X-side fingerprints
for two-sided queries; it needs nothing from Y except the configuration.
``gap_query`` runs the repetitions and takes the majority vote.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import GapConfig, Resolved
from .engine import (CLOSE, FAR, GapVerdict, QueryContext, QueryStats, default_budget,
                     run_repetition)
from .layout import PaddedY, margin_for, padded_symbols
from .matching import MatchingIndex, Samples, XReader, build_samples, preprocess_matching_x
from .shifted import ShiftedDistanceIndex
from .strings import Text, coerce_text
from .tree import PrecisionTree, TreeConfig

SIDE_X = "X"
SIDE_Y = "Y"
SIDE_BOTH = "BOTH"


def tree_digest(tree: PrecisionTree) -> bytes:
    """16-byte digest identifying a repetition's tolerances."""
    return hashlib.blake2b(tree.tolerance_bytes(), digest_size=16).digest()


def tree_for(cfg: Resolved, repetition: int) -> PrecisionTree:
    return PrecisionTree(TreeConfig(
        n_padded=cfg.n_padded, branching=cfg.branching, k=cfg.k, c_lambda=cfg.c_lambda,
        u_min=cfg.u_min, master_seed=cfg.seed_bytes, shift_base=cfg.shift_base,
        repetition=repetition))


@dataclass
class Repetition:
    """Tree, public samples and (Y side) matching tables of one repetition."""

    tree: PrecisionTree
    samples: Samples
    matching: MatchingIndex | None = None


def build_repetition(cfg: Resolved, r: int, y: PaddedY | None = None, tables=None) -> Repetition:
    tree = tree_for(cfg, r)
    samples = build_samples(tree, cfg.c_h, cfg.prime)
    matching = MatchingIndex(tree, samples, y, tables) if y is not None else None
    return Repetition(tree, samples, matching)


@dataclass
class XIndex:
    """Per-repetition fingerprints of every node of X."""

    config: Resolved
    fingerprints: list = field(default_factory=list)
    tree_digests: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.config.n


@dataclass
class YIndex:
    """Everything a query needs about Y.

    Attributes
    ----------
    config : Resolved
    y : PaddedY
    reps : list of Repetition
    shifted : ShiftedDistanceIndex
    side : str
        ``"Y"`` or ``"BOTH"`` (Y's own X-side fingerprints attached).
    x_side : XIndex, optional
    build_seconds : float
    """

    config: Resolved
    y: PaddedY
    reps: list
    shifted: ShiftedDistanceIndex
    side: str = SIDE_Y
    x_side: XIndex | None = None
    materialized: bool = False
    build_seconds: float = 0.0

    @property
    def n(self) -> int:
        return self.config.n

    def materialize(self) -> int:
        """Fill every shifted-distance entry any repetition may request."""
        added = self.shifted.materialize([r.tree for r in self.reps])
        self.materialized = True
        return added

    def as_x_index(self) -> XIndex:
        if self.x_side is None:
            raise ValueError("index was not built with side BOTH")
        return self.x_side

    def summary(self) -> dict:
        table_entries = sum(int(t[0].size) for r in self.reps for t in r.matching.tables)
        return dict(n=self.config.n, n_padded=self.config.n_padded, B=self.config.branching,
                    depth=self.config.depth, k=self.config.k, reps=len(self.reps),
                    shift_bound=self.config.shift_bound, matching_entries=table_entries,
                    shifted_rows=len(self.shifted.rows), shifted_bytes=self.shifted.nbytes(),
                    materialized=self.materialized, seconds=self.build_seconds)


def _text(obj, cfg: GapConfig | Resolved) -> Text:
    return coerce_text(obj, cfg.alphabet)


def _check_alphabet(text: Text, cfg: Resolved):
    if text.alphabet_size > cfg.alphabet_size or (len(text) and int(text.symbols.max()) >= cfg.alphabet_size):
        raise ValueError(f"symbols exceed the {cfg.alphabet} alphabet")


def preprocess_y(Y, config: GapConfig, materialize: bool = False, side: str = SIDE_Y) -> YIndex:
    """Build the Y index for all repetitions.

    Parameters
    ----------
    Y : str, bytes, Text or int sequence
    config : GapConfig
    materialize : bool
        Fill the whole shifted-distance table now (required for two-sided
        queries to do no work on Y at query time). Otherwise entries are
        computed on first use.
    side : {"Y", "BOTH"}
        ``"BOTH"`` also stores Y's own X-side fingerprints.
    """
    t0 = time.perf_counter()
    text = _text(Y, config)
    cfg = config.resolve(len(text))
    _check_alphabet(text, cfg)
    if cfg.k > max(cfg.n, 1):
        raise ValueError(f"k={cfg.k} exceeds the input length {cfg.n}")
    if cfg.n > cfg.n_padded:
        raise ValueError(f"pad_to={config.pad_to} is shorter than Y ({cfg.n})")
    y = PaddedY(Text(text.symbols, cfg.alphabet_size), cfg.n_padded,
                margin_for(cfg.shift_bound), cfg.prime)
    reps = [build_repetition(cfg, r, y) for r in range(cfg.reps)]
    tree0 = reps[0].tree
    shifted = ShiftedDistanceIndex(y, tree0.S, cfg.k, tree0.level_len)
    idx = YIndex(cfg, y, reps, shifted, side=side)
    if side == SIDE_BOTH:
        idx.x_side = _x_fingerprints(text, cfg, [r.tree for r in reps], [r.samples for r in reps])
    if materialize or side == SIDE_BOTH:
        idx.materialize()
    idx.build_seconds = time.perf_counter() - t0
    return idx


def _x_core(text: Text, cfg: Resolved) -> np.ndarray:
    """X padded to ``n_padded``; symbols beyond it are dropped (tail charged later)."""
    return padded_symbols(Text(text.symbols[:cfg.n_padded], cfg.alphabet_size), cfg.n_padded)


def _x_fingerprints(text: Text, cfg: Resolved, trees, samples) -> XIndex:
    core = _x_core(text, cfg)
    fps = [preprocess_matching_x(core, t, s, cfg.alphabet_size) for t, s in zip(trees, samples)]
    return XIndex(cfg, fps, [tree_digest(t) for t in trees])


def preprocess_x(X, config: GapConfig) -> XIndex:
    """X-side fingerprints for two-sided queries (independent of Y)."""
    text = _text(X, config)
    cfg = config.resolve(len(text))
    _check_alphabet(text, cfg)
    reps = [build_repetition(cfg, r) for r in range(cfg.reps)]
    return _x_fingerprints(text, cfg, [r.tree for r in reps], [r.samples for r in reps])


class IncompatibleIndex(ValueError):
    """Raised when X and Y indexes were built with different parameters."""

    def __init__(self, field_name: str, a, b):
        super().__init__(f"incompatible indexes: field '{field_name}' differs ({a!r} vs {b!r})")
        self.field = field_name


def check_compatible(a: Resolved, b: Resolved):
    name = a.mismatch(b)
    if name is not None:
        raise IncompatibleIndex(name, getattr(a, name), getattr(b, name))


def gap_query(x_input, y_index: YIndex, early_stop: bool = True, fused: bool = True,
              reps: int | None = None, budget: int | None = -1):
    """Decide ``ED(X, Y) <= k`` versus ``ED(X, Y) >= K``.

    Parameters
    ----------
    x_input : str, bytes, Text, int sequence or XIndex
        Raw X for a one-sided query, or X's index for a two-sided query.
    y_index : YIndex
    early_stop : bool
        Stop once the majority is decided. The verdict is unchanged; the
        counters then cover only the repetitions that ran.
    fused : bool
        Use the compiled leaf-block kernel.
    reps : int, optional
        Run only the first ``reps`` repetitions.
    budget : int, optional
        ``-1`` (default) uses the index configuration, ``None`` or ``0``
        disables the budget, any other value is the per-repetition budget.

    Returns
    -------
    (GapVerdict, QueryStats, list of QueryStats)
        Verdict, aggregated counters and per-repetition counters.
    """
    t0 = time.perf_counter_ns()
    cfg = y_index.config
    theta = cfg.threshold
    two_sided = isinstance(x_input, XIndex)
    if two_sided:
        check_compatible(x_input.config, cfg)
        n_x = x_input.n
        if not y_index.materialized:
            y_index.materialize()
    else:
        text = _text(x_input, cfg)
        _check_alphabet(text, cfg)
        n_x = len(text)
    R = len(y_index.reps) if reps is None else min(int(reps), len(y_index.reps))
    total = QueryStats()
    per_rep = []
    if abs(n_x - cfg.n) > theta:
        total.wall_nanos = time.perf_counter_ns() - t0
        verdict = GapVerdict(FAR, math.inf, theta, False, {CLOSE: 0, FAR: R}, [])
        return verdict, total, per_rep
    # ED(X, Y) is within `tail` of the distance with X truncated; charging it
    # keeps close pairs close up to an additive 2 * tail <= 2 * ED
    tail = max(0, n_x - cfg.n_padded)
    if not two_sided:
        x_core = _x_core(text, cfg)
    if budget == -1:
        budget = cfg.budget
        if budget == -1:
            budget = default_budget(y_index.reps[0].tree, cfg.budget_factor)
    budget = budget or None
    votes = {CLOSE: 0, FAR: 0}
    estimates = []
    any_timeout = False
    for r in range(R):
        rep = y_index.reps[r]
        x = x_input.fingerprints[r] if two_sided else XReader(x_core, cfg.alphabet_size, cfg.prime)
        ctx = QueryContext(rep.tree, rep.matching, y_index.shifted, x, cfg.c1, cfg.c2,
                           budget=budget, fused=fused)
        t_rep = time.perf_counter_ns()
        est, timed_out = run_repetition(ctx)
        est += tail
        ctx.stats.repetitions = 1
        ctx.stats.wall_nanos = time.perf_counter_ns() - t_rep
        per_rep.append(ctx.stats)
        total.merge(ctx.stats)
        estimates.append(est)
        any_timeout |= timed_out
        votes[CLOSE if (est <= theta and not timed_out) else FAR] += 1
        if early_stop and (votes[CLOSE] > R / 2 or votes[FAR] >= R - R // 2):
            break
    decision = CLOSE if votes[CLOSE] > R / 2 else FAR
    total.wall_nanos = time.perf_counter_ns() - t0
    verdict = GapVerdict(decision, float(np.median(estimates)), theta, any_timeout, votes, estimates)
    return verdict, total, per_rep
