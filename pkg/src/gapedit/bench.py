"""
Benchmark suites with oracle-labelled instances.

Every row is one query. The CSV header is fixed (:data:`CSV_FIELDS`):

``suite, n, k, mode, kind, d, ed, label, verdict, correct, x_reads, y_reads,
ops, nodes_visited, prune_fails, reps_run, wall_nanos``

``label`` is the oracle class (``CLOSE`` when ED <= k, ``FAR`` when
ED >= 4 theta, ``GAP`` otherwise, in which case ``correct`` is empty).
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import replace

import numpy as np

from .config import GapConfig
from .engine import CLOSE, FAR
from .index import SIDE_BOTH, gap_query, preprocess_x, preprocess_y
from .instances import InstanceSpec, far_instance, generate

CSV_FIELDS = ("suite", "n", "k", "mode", "kind", "d", "ed", "label", "verdict", "correct",
              "x_reads", "y_reads", "ops", "nodes_visited", "prune_fails", "reps_run",
              "wall_nanos")

SUITES = ("smoke", "gap", "sweep", "two-sided")


def label_for(ed: int | None, k: int, theta: float) -> str:
    if ed is None:
        return "GAP"
    if ed <= k:
        return CLOSE
    if ed >= 4 * theta:
        return FAR
    return "GAP"


def _row(suite, n, k, mode, kind, d, ed, label, verdict, stats) -> dict:
    correct = "" if label == "GAP" else int(verdict.decision == label)
    return dict(suite=suite, n=n, k=k, mode=mode, kind=kind, d=d, ed=ed, label=label,
                verdict=verdict.decision, correct=correct, x_reads=stats.x_reads,
                y_reads=stats.y_reads, ops=stats.ops, nodes_visited=stats.nodes_visited,
                prune_fails=stats.prune_fails, reps_run=stats.repetitions,
                wall_nanos=stats.wall_nanos)


def gap_suite(ns=(1024, 4096), ks=(4, 16, 64), trials: int = 200, seed: int = 0,
              base: GapConfig | None = None, sigma_close: int = 4, sigma_far: int = 256,
              suite: str = "gap") -> list:
    """Planted close pairs and oracle-verified far pairs per ``(n, k)`` cell.

    Far pairs need ``ED >= 4 kappa k``; when that exceeds what any pair of
    length-``n`` strings can reach, the cell has no far rows and a single
    row with ``kind = "far-infeasible"`` records it.
    """
    rows = []
    for n in ns:
        for k in ks:
            cfg = replace(base, k=k) if base is not None else GapConfig(k=k, seed=seed)
            theta = cfg.kappa * k
            for i in range(trials):
                inst = generate(InstanceSpec("planted", n, sigma_close, seed=seed * 7919 + i, d=k))
                idx = preprocess_y(inst.y, replace(cfg, seed=seed * 1_000_003 + i))
                verdict, stats, _ = gap_query(inst.x, idx)
                rows.append(_row(suite, n, k, "one-sided", "planted", k, inst.ed,
                                 label_for(inst.ed, k, theta), verdict, stats))
            need = math.ceil(4 * theta)
            if need > n:
                rows.append(dict(suite=suite, n=n, k=k, mode="one-sided", kind="far-infeasible",
                                 d="", ed="", label=FAR, verdict="", correct="", x_reads="",
                                 y_reads="", ops="", nodes_visited="", prune_fails="",
                                 reps_run="", wall_nanos=""))
                continue
            for i in range(trials):
                inst = far_instance(n, need, sigma_far, seed=seed * 7919 + i)
                if inst is None:
                    continue
                idx = preprocess_y(inst.y, replace(cfg, seed=seed * 1_000_003 + i))
                verdict, stats, _ = gap_query(inst.x, idx)
                rows.append(_row(suite, n, k, "one-sided", "random", "", inst.ed,
                                 label_for(inst.ed, k, theta), verdict, stats))
    return rows


def sweep_suite(n: int = 1 << 16, ks=(4, 16, 64, 256, 1024), trials: int = 3, reps: int = 3,
                seed: int = 0, sigma: int = 4, budget: int | None = 0) -> list:
    """One-sided character reads of X against k at fixed n (close pairs, d = k)."""
    rows = []
    for k in ks:
        cfg = GapConfig(k=k, seed=seed, reps=reps)
        for i in range(trials):
            inst = generate(InstanceSpec("planted", n, sigma, seed=seed * 7919 + i, d=k),
                            verify=False)
            idx = preprocess_y(inst.y, replace(cfg, seed=seed * 1_000_003 + i))
            verdict, stats, _ = gap_query(inst.x, idx, early_stop=False, budget=budget)
            rows.append(_row("sweep", n, k, "one-sided", "planted", k, "", "GAP", verdict, stats))
    return rows


def two_sided_suite(n: int = 1024, ks=(2, 4, 8, 16), trials: int = 3, reps: int = 3,
                    seed: int = 0, sigma: int = 4) -> list:
    """Two-sided queries: both strings preprocessed, query reads nothing."""
    rows = []
    for k in ks:
        cfg = GapConfig(k=k, seed=seed, reps=reps)
        for i in range(trials):
            inst = generate(InstanceSpec("planted", n, sigma, seed=seed * 7919 + i, d=k))
            c = replace(cfg, seed=seed * 1_000_003 + i)
            yi = preprocess_y(inst.y, c, materialize=True, side=SIDE_BOTH)
            xi = preprocess_x(inst.x, replace(c, pad_to=yi.config.n_padded))
            verdict, stats, _ = gap_query(xi, yi, early_stop=False)
            rows.append(_row("two-sided", n, k, "two-sided", "planted", k, inst.ed,
                             label_for(inst.ed, k, cfg.kappa * k), verdict, stats))
    return rows


def run_suite(name: str, seed: int = 0, **kw) -> list:
    if name == "smoke":
        return gap_suite(ns=(256,), ks=(2, 4), trials=kw.pop("trials", 5), seed=seed,
                         suite="smoke", **kw)
    if name == "gap":
        return gap_suite(seed=seed, **kw)
    if name == "sweep":
        return sweep_suite(seed=seed, **kw)
    if name == "two-sided":
        return two_sided_suite(seed=seed, **kw)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def summarize(rows) -> dict:
    """Per-cell correctness and read counts."""
    cells: dict = {}
    for r in rows:
        key = (r["suite"], r["n"], r["k"], r["mode"])
        c = cells.setdefault(key, dict(suite=r["suite"], n=r["n"], k=r["k"], mode=r["mode"],
                                       labelled=0, correct=0, x_reads=[], ops=[],
                                       far_infeasible=False))
        if r["kind"] == "far-infeasible":
            c["far_infeasible"] = True
            continue
        if r["correct"] != "":
            c["labelled"] += 1
            c["correct"] += int(r["correct"])
        c["x_reads"].append(r["x_reads"])
        c["ops"].append(r["ops"])
    out = []
    for c in cells.values():
        c["accuracy"] = c["correct"] / c["labelled"] if c["labelled"] else None
        xr, ops = c.pop("x_reads"), c.pop("ops")
        c["x_reads_mean"] = float(np.mean(xr)) if xr else None
        c["ops_mean"] = float(np.mean(ops)) if ops else None
        out.append(c)
    return dict(cells=out, generated=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
