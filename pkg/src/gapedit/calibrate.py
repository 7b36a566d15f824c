"""
Empirical calibration of the free constants.

* :func:`kappa_study` measures root-estimate / ED ratios on planted close
  instances and sets ``kappa = 2 * p99``. It also records the largest
  FAIL-node count per repetition relative to ``k log2 n`` (``C_eff``).
* :func:`recover_study` grid-searches ``(c1, c2)`` against the Recover
  contract harness.
* :func:`precision_study` measures the mean of ``1 / t_v`` per depth over
  independent trees and fits ``(C, c)`` in ``C (c ln n)^d / t``.
"""

from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np

from . import psl
from .config import GapConfig
from .index import gap_query, preprocess_y
from .instances import InstanceSpec, generate
from .tree import PrecisionTree, TreeConfig, choose_branching

CALIBRATION_VERSION = 1


def _pct(a, q) -> float:
    return float(np.percentile(a, q)) if len(a) else math.nan


def kappa_study(ns=(1024, 4096), ks=(4, 16, 64), trials: int = 100, seed: int = 0,
                sigma: int = 4, base: GapConfig | None = None, reps: int | None = None) -> dict:
    """Ratios of the voted root estimate to the exact ED on planted pairs.

    Each trial plants exactly ``k`` edits into a fresh random Y and runs every
    repetition without early stopping and without a budget. The voted
    estimate (median over repetitions) is the quantity the majority compares
    with the threshold, so its ratio to ED is what ``kappa`` must cover.

    Returns
    -------
    dict
        ``kappa``, ``C_eff`` and per-cell percentiles.
    """
    cells, ratios_all, ceff = [], [], 0.0
    for n in ns:
        for k in ks:
            cfg = replace(base, k=k) if base is not None else GapConfig(k=k, seed=seed)
            if reps is not None:
                cfg = replace(cfg, reps=reps)
            ratios, fails = [], []
            t0 = time.perf_counter()
            for i in range(trials):
                inst = generate(InstanceSpec("planted", n, sigma, seed=seed * 100_003 + i, d=k))
                if not inst.ed:
                    continue
                idx = preprocess_y(inst.y, replace(cfg, seed=seed * 1_000_003 + i))
                verdict, _, per = gap_query(inst.x, idx, early_stop=False, budget=0)
                ratios.append(verdict.estimate / inst.ed)
                fails.append(max(s.prune_fails for s in per))
            ratios_all += ratios
            c = max(fails, default=0) / (k * math.log2(n))
            ceff = max(ceff, c)
            cells.append(dict(n=n, k=k, trials=len(ratios), p50=_pct(ratios, 50),
                              p90=_pct(ratios, 90), p99=_pct(ratios, 99),
                              max=max(ratios, default=math.nan), max_fails=max(fails, default=0),
                              C_eff=c, seconds=time.perf_counter() - t0))
    p99 = _pct(ratios_all, 99)
    return dict(kappa=max(1.0, 2.0 * p99), p99=p99, C_eff=ceff, cells=cells)


def recover_study(c1s=(2.0, 2.1, 2.2, 2.25, 2.3, 2.4, 2.5), c2s=None, trials: int = 10_000,
                  seed: int = 0, delta_target: float = 0.01) -> dict:
    """Grid search over Recover constants; ``c2s=None`` searches ``c2 = c1``."""
    grid = []
    pairs = [(a, a) for a in c1s] if c2s is None else [(a, b) for a in c1s for b in c2s]
    for c1, c2 in pairs:
        rep = psl.recover_contract_harness(trials=trials, c1=c1, c2=c2, seed=seed,
                                           delta_target=delta_target)
        bad = max(rep.cells, key=lambda c: c["violation_rate"])
        grid.append(dict(c1=c1, c2=c2, worst=rep.worst, worst_cell=bad, seconds=rep.seconds))
    best = min(grid, key=lambda g: g["worst"])
    return dict(c1=best["c1"], c2=best["c2"], worst=best["worst"],
                passed=best["worst"] <= delta_target, delta_target=delta_target, grid=grid)


def precision_study(n_padded: int = 4096, trees: int = 10_000, k: int = 16,
                    c_lambda: float | None = None, seed: int = 0, C: float = 10.0) -> dict:
    """Mean of ``1 / t_v`` per depth over independent trees.

    For each depth ``d >= 1`` the smallest ``c`` with
    ``mean(1/t_v) <= C (c ln n)^d / t`` is reported; the overall ``c`` is the
    largest of them.
    """
    B, depth = choose_branching(n_padded)
    kw = {} if c_lambda is None else dict(c_lambda=c_lambda)
    sums = np.zeros(depth + 1)
    counts = np.zeros(depth + 1)
    t0 = time.perf_counter()
    for r in range(trees):
        tree = PrecisionTree(TreeConfig(n_padded=B ** depth, branching=B, k=k, master_seed=seed,
                                        repetition=r, **kw))
        for d in range(depth + 1):
            a, b = tree.level_offset[d], tree.level_offset[d + 1]
            sums[d] += np.sum(1.0 / tree.t[a:b])
            counts[d] += b - a
    means = sums / counts
    L = math.log(B ** depth)
    per_depth = []
    for d in range(1, depth + 1):
        per_depth.append(dict(depth=d, mean_inv_t=float(means[d]),
                              c_needed=float((means[d] * k / C) ** (1.0 / d) / L)))
    c = max((p["c_needed"] for p in per_depth), default=0.0)
    lam = tree.lam
    return dict(n_padded=int(B ** depth), B=B, depth=depth, trees=trees, k=k, lam=lam,
                C=C, c=c, per_depth=per_depth, seconds=time.perf_counter() - t0)


def calibrate(ns=(1024, 4096), ks=(4, 16, 64), trials: int = 100, seed: int = 0,
              recover_trials: int = 10_000, precision_trees: int = 2_000,
              reps: int | None = None) -> dict:
    """Run all studies and return a versioned constants record."""
    kap = kappa_study(ns, ks, trials, seed, reps=reps)
    rec = recover_study(trials=recover_trials, seed=seed)
    pre = precision_study(trees=precision_trees, seed=seed)
    base = GapConfig(k=1)
    return dict(version=CALIBRATION_VERSION, kappa=kap["kappa"], c_h=base.c_h,
                c1=rec["c1"], c2=rec["c2"], C_eff=kap["C_eff"],
                c_lambda=base.c_lambda, precision=dict(C=pre["C"], c=pre["c"]),
                kappa_study=kap, recover_study=rec, precision_study=pre,
                recover_passed=rec["passed"])
