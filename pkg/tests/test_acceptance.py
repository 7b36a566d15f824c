"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the ``acceptance criteria`` section of the terminal summary.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from gapedit import GapConfig, gap_query, preprocess_x, preprocess_y
from gapedit import config as C
from gapedit import index_io, psl
from gapedit.bench import gap_suite, sweep_suite, two_sided_suite
from gapedit.calibrate import precision_study
from gapedit.engine import range_min_transfer
from gapedit.index import SIDE_BOTH
from gapedit.instances import InstanceSpec, generate
from gapedit.matching import XReader, matching_query
from gapedit.strings import edit_distance, edit_distance_banded, edit_distance_fast, hamming

pytestmark = pytest.mark.acceptance


def _clamped(s: np.ndarray, i: int, j: int) -> np.ndarray:
    return s[max(i, 0):min(j, s.size)]


# ---------------------------------------------------------------------------
# 1. oracle suite
# ---------------------------------------------------------------------------


def test_ac1_oracle_suite(acceptance):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    mismatches = checked = 0
    for _ in range(1000):
        n = int(rng.integers(0, 257))
        a = rng.integers(0, int(rng.integers(2, 6)), n)
        b = a.copy()
        for _ in range(int(rng.integers(0, 12))):
            if b.size and rng.random() < 0.5:
                b = np.delete(b, int(rng.integers(b.size)))
            else:
                b = np.insert(b, int(rng.integers(b.size + 1)), int(rng.integers(4)))
        if rng.random() < 0.2:
            b = rng.integers(0, 4, int(rng.integers(0, 257)))
        ed = edit_distance(a, b)
        bound = int(rng.integers(0, 2 * ed + 3))
        got = edit_distance_banded(a, b, bound)
        if ed <= bound:
            checked += 1
            mismatches += got != ed
        else:
            mismatches += got is not None
    secs = time.perf_counter() - t0
    ok = mismatches == 0 and secs < 60
    acceptance("AC1", ok, f"{mismatches} mismatches on 1000 pairs ({checked} within bound), "
                          f"{secs:.1f}s (limit 60s)")
    assert ok


# ---------------------------------------------------------------------------
# 2. divide and conquer
# ---------------------------------------------------------------------------


def _piece_costs(x: np.ndarray, y: np.ndarray, cuts, shifts) -> np.ndarray:
    """``ED(X_i, Y_{i,s})`` for every piece i and shift s (clamped windows)."""
    out = np.empty((len(cuts) - 1, shifts.size), dtype=np.int64)
    for i in range(len(cuts) - 1):
        xi = x[cuts[i]:cuts[i + 1]]
        for c, s in enumerate(shifts):
            out[i, c] = edit_distance_fast(xi, _clamped(y, cuts[i] + s, cuts[i + 1] + s))
    return out


def test_ac2_divide_and_conquer(acceptance):
    rng = np.random.default_rng(202)
    upper_bad = lower_bad = 0
    for _ in range(500):
        n = int(rng.integers(1, 129))
        y = rng.integers(0, int(rng.integers(2, 5)), n)
        if rng.random() < 0.3:
            x = rng.integers(0, 4, n)
        else:
            x = y.copy()
            for _ in range(int(rng.integers(0, 8))):
                r = rng.random()
                if r < 0.4:
                    x[int(rng.integers(n))] = int(rng.integers(4))
                else:
                    # paired deletion and insertion keeps both lengths n
                    x = np.insert(np.delete(x, int(rng.integers(n))),
                                  int(rng.integers(n)), int(rng.integers(4)))
        ed = edit_distance(x, y)
        B = int(rng.integers(1, min(n, 8) + 1))
        inner = np.sort(rng.choice(np.arange(1, n), B - 1, replace=False)) if B > 1 else []
        cuts = [0, *map(int, inner), n]
        shifts = np.arange(-n, n + 1)
        costs = _piece_costs(x, y, cuts, shifts)
        # both bullets are separable over pieces, so per-piece minima decide them
        best_upper = int(np.sum(np.min(costs + 2 * np.abs(shifts)[None, :], axis=1)))
        upper_bad += ed > best_upper
        small = 2 * np.abs(shifts) <= ed
        best_lower = int(np.sum(np.min(costs[:, small], axis=1)))
        lower_bad += best_lower > 2 * ed
    ok = upper_bad == 0 and lower_bad == 0
    acceptance("AC2", ok, f"500 pairs: {upper_bad} violations of the sum upper bound, "
                          f"{lower_bad} of the bounded-shift existence bullet")
    assert ok


# ---------------------------------------------------------------------------
# 3. expected precision
# ---------------------------------------------------------------------------


def test_ac3_expected_precision(acceptance):
    t0 = time.perf_counter()
    res = precision_study(n_padded=4096, trees=10_000, k=16, C=10.0, seed=3)
    secs = time.perf_counter() - t0
    ok = res["C"] <= 10 and res["c"] <= 8 and secs < 300
    per = ", ".join(f"d{p['depth']}: c={p['c_needed']:.2f}" for p in res["per_depth"])
    acceptance("AC3", ok, f"10^4 trees at n_padded=4096 (B={res['B']}): C={res['C']:.0f}, "
                          f"c={res['c']:.2f} ({per}), {secs:.0f}s (limits C<=10, c<=8, 300s)")
    assert ok


# ---------------------------------------------------------------------------
# 4. range minimum
# ---------------------------------------------------------------------------


def test_ac4_range_minimum(acceptance):
    rng = np.random.default_rng(404)
    bad = 0
    for _ in range(1000):
        T = np.sort(rng.choice(np.arange(-500, 501), int(rng.integers(1, 201)), replace=False))
        Tp = np.sort(rng.choice(np.arange(-500, 501), int(rng.integers(1, 201)), replace=False))
        b = rng.integers(0, 300, Tp.size).astype(np.float64)
        got = range_min_transfer(T, Tp, b)
        want = np.min(b[None, :] + 2 * np.abs(T[:, None] - Tp[None, :]), axis=1)
        bad += not np.array_equal(got, want)
    acceptance("AC4", bad == 0, f"{bad} mismatches on 1000 instances (|T|, |T'| <= 200)")
    assert bad == 0


# ---------------------------------------------------------------------------
# 5. Recover contract
# ---------------------------------------------------------------------------


def test_ac5_recover_contract(acceptance):
    rep = psl.recover_contract_harness(trials=10_000, c1=C.C1, c2=C.C2, seed=5,
                                       Bs=(8, 32, 256), lams=(8.0, 16.0), alphas=(1.0, 2.0),
                                       betas=(0.0, 1.0, 10.0))
    worst = max(rep.cells, key=lambda c: c["violation_rate"])
    ok = rep.worst <= 0.01 and rep.seconds < 900
    acceptance("AC5", ok, f"{len(rep.cells)} cells x 10^4 trials, c1={C.C1}, c2={C.C2}: worst "
                          f"violation rate {rep.worst:.4f} (family={worst['family']}, "
                          f"adversary={worst['adversary']}), {rep.seconds:.0f}s "
                          f"(limits 0.01, 900s)")
    assert ok


# ---------------------------------------------------------------------------
# 6. matching soundness and completeness
# ---------------------------------------------------------------------------


def _window(y, start, m, s):
    return y.sym[y.margin + start + s: y.margin + start + s + m]


def test_ac6_matching(acceptance):
    rng = np.random.default_rng(606)
    n, k = 1024, 8
    sound_trials = sound_bad = complete_trials = complete_bad = 0
    for inst in range(10):
        idx = preprocess_y(rng.integers(0, 4, n), GapConfig(k=k, seed=600 + inst, reps=3))
        y = idx.y
        S = idx.reps[0].tree.S.array()
        while complete_trials < 1000 * (inst + 1):
            rep = idx.reps[int(rng.integers(len(idx.reps)))]
            tree = rep.tree
            v = int(rng.integers(tree.n_nodes))
            start, m = tree.node_range(v)
            x = y.core.copy()
            x[start:start + m] = _window(y, start, m, int(rng.choice(S)))
            reader = XReader(x, y.alphabet_size, y.p)
            complete_trials += 1
            complete_bad += matching_query(rep.matching, v, reader) is None
        while sound_trials < 1000 * (inst + 1):
            rep = idx.reps[int(rng.integers(len(idx.reps)))]
            tree = rep.tree
            v = int(rng.integers(tree.level_offset[tree.depth]))
            start, m = tree.node_range(v)
            h = math.floor(tree.t[v] / 2) + 1
            if h > m:
                continue
            xv = _window(y, start, m, int(rng.choice(S))).copy()
            pos = rng.choice(m, h, replace=False)
            xv[pos] = (np.maximum(xv[pos], 0) + rng.integers(1, 4, h)) % 4
            hd = [hamming(xv, _window(y, start, m, int(s))) for s in S]
            if min(hd) <= tree.t[v] / 2:
                continue
            x = y.core.copy()
            x[start:start + m] = xv
            reader = XReader(x, y.alphabet_size, y.p)
            sound_trials += 1
            s_star = matching_query(rep.matching, v, reader)
            if s_star is not None and hamming(xv, _window(y, start, m, s_star)) > tree.t[v] / 2:
                sound_bad += 1
    rate = sound_bad / sound_trials
    ok = complete_bad == 0 and rate <= 0.01
    acceptance("AC6", ok, f"completeness {complete_bad}/{complete_trials} Far on exact matches; "
                          f"soundness {sound_bad}/{sound_trials} = {rate:.4f} "
                          f"(limit 0.01) at n={n}, k={k}")
    assert ok


# ---------------------------------------------------------------------------
# 7. shifted-distance envelope
# ---------------------------------------------------------------------------


def test_ac7_shifted_envelope(acceptance):
    rng = np.random.default_rng(707)
    idx = preprocess_y(rng.integers(0, 4, 4096), GapConfig(k=16, seed=7, reps=3))
    y, sd = idx.y, idx.shifted
    S = idx.reps[0].tree.S.array()
    bad = 0
    for _ in range(1000):
        tree = idx.reps[int(rng.integers(len(idx.reps)))].tree
        v = int(rng.integers(tree.n_nodes))
        s = int(rng.choice(S))
        sp = int(rng.choice(tree.node_shifts(v).array()))
        start, m = tree.node_range(v)
        exact = edit_distance_fast(_window(y, start, m, s), _window(y, start, m, sp))
        got = sd.shifted_distance_query(tree, v, s, sp)
        bad += not (exact - tree.t[v] / 2 <= got <= exact + tree.t[v] / 2)
    acceptance("AC7", bad == 0, f"{bad} envelope violations on 1000 (v, s, s') at n=4096, k=16")
    assert bad == 0


# ---------------------------------------------------------------------------
# 8. pruning efficiency
# ---------------------------------------------------------------------------


def test_ac8_pruning_efficiency(acceptance):
    n, trials, reps = 4096, 20, 5
    parts, ok = [], True
    for k in (4, 16, 64):
        bound = 10 * k * math.log2(n)
        worst = 0
        for i in range(trials):
            inst = generate(InstanceSpec("planted", n, 4, seed=800 + i, d=k))
            idx = preprocess_y(inst.y, GapConfig(k=k, seed=8000 + i, reps=reps))
            _, _, per = gap_query(inst.x, idx, early_stop=False, budget=0)
            worst = max(worst, max(s.prune_fails for s in per))
        ok &= worst <= bound
        parts.append(f"k={k}: max {worst} <= {bound:.0f}")
    acceptance("AC8", ok, f"FAIL nodes per repetition, n={n}, {trials} close pairs x {reps} "
                          f"repetitions: " + "; ".join(parts))
    assert ok


# ---------------------------------------------------------------------------
# 9. end-to-end gap decision
# ---------------------------------------------------------------------------


def test_ac9_gap_decision(acceptance):
    t0 = time.perf_counter()
    rows = gap_suite(ns=(1024, 4096), ks=(4, 16, 64), trials=200, seed=9)
    secs = time.perf_counter() - t0
    parts, ok = [], secs < 1800
    for n in (1024, 4096):
        for k in (4, 16, 64):
            cell = [r for r in rows if r["n"] == n and r["k"] == k]
            close = [r for r in cell if r["label"] == "CLOSE" and r["kind"] != "far-infeasible"]
            far = [r for r in cell if r["label"] == "FAR" and r["kind"] != "far-infeasible"]
            infeasible = any(r["kind"] == "far-infeasible" for r in cell)
            c_ok = sum(r["correct"] for r in close)
            f_ok = sum(r["correct"] for r in far)
            labelled = len(close) + len(far)
            acc = (c_ok + f_ok) / labelled if labelled else 0.0
            cell_ok = len(close) == 200 and len(far) == 200 and acc >= 0.99
            ok &= cell_ok
            far_txt = "far infeasible (4*theta > n)" if infeasible else f"far {f_ok}/{len(far)}"
            parts.append(f"n={n},k={k}: close {c_ok}/{len(close)}, {far_txt}")
    acceptance("AC9", ok, f"kappa={C.KAPPA:g}, {secs:.0f}s (limit 1800s); " + "; ".join(parts))
    assert ok


# ---------------------------------------------------------------------------
# 10. sublinearity evidence
# ---------------------------------------------------------------------------


def _slope(ks, ys) -> float:
    return float(np.polyfit(np.log(ks), np.log(ys), 1)[0])


def test_ac10_sublinearity(acceptance):
    n, ks = 1 << 16, (4, 16, 64, 256, 1024)
    rows = sweep_suite(n=n, ks=ks, trials=2, reps=3, seed=10)
    reads = [float(np.mean([r["x_reads"] / r["reps_run"] for r in rows if r["k"] == k]))
             for k in ks]
    i_min = int(np.argmin(reads))
    diffs = np.diff(reads)
    shape_ok = 0 < i_min < len(ks) - 1 and not (np.all(diffs <= 0) or np.all(diffs >= 0))
    L4 = math.log2(n) ** 4
    c_q = max(r / ((n / k + k) * L4) for r, k in zip(reads, ks))
    one_ok = shape_ok and c_q <= 32

    ts_ks = (4, 16, 64)
    ts = two_sided_suite(n=4096, ks=ts_ks, trials=1, reps=3, seed=10)
    zero = all(r["x_reads"] == 0 and r["y_reads"] == 0 for r in ts)
    ops = [float(np.mean([r["ops"] / r["reps_run"] for r in ts if r["k"] == k])) for k in ts_ks]
    slope = _slope(ts_ks, ops)
    two_ok = zero and slope <= 1.5
    ok = one_ok and two_ok
    reads_txt = ", ".join(f"{k}:{r:.0f}" for k, r in zip(ks, reads))
    ops_txt = ", ".join(f"{k}:{o:.0f}" for k, o in zip(ts_ks, ops))
    acceptance("AC10", ok,
               f"one-sided n=2^16 x_reads/rep {{{reads_txt}}}, minimum at k={ks[i_min]} "
               f"({'interior' if shape_ok else 'not interior'}), C_q={c_q:.2e} (<= 32); "
               f"two-sided n=4096 reads zero={zero}, ops/rep {{{ops_txt}}}, "
               f"slope {slope:.2f} (limit 1.5)")
    assert ok


# ---------------------------------------------------------------------------
# 11. determinism and compatibility
# ---------------------------------------------------------------------------


def _cli(*args) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "gapedit.cli", *map(str, args)],
                          capture_output=True, text=True)


def test_ac11_determinism(acceptance, tmp_path):
    rng = np.random.default_rng(1111)
    y = rng.integers(97, 101, 700).astype(np.uint8)
    xs = {"close": y.copy(), "far": rng.integers(0, 256, 700).astype(np.uint8)}
    xs["close"][[5, 300, 650]] = 122
    (tmp_path / "y.bin").write_bytes(y.tobytes())
    flags = ["--k", 4, "--seed", 1234, "--pad-to", 1024, "--reps", 5]
    cfg = GapConfig(k=4, seed=1234, pad_to=1024, reps=5)
    yi = preprocess_y(y.astype(np.int64), cfg, materialize=True)
    r = _cli("preprocess", tmp_path / "y.bin", "--side", "Y", "--materialize", *flags,
             "--out", tmp_path / "y.gedi")
    same_files = r.returncode == 0 and (tmp_path / "y.gedi").read_bytes() == index_io.dumps(yi)
    same_verdicts = True
    for name, x in xs.items():
        (tmp_path / f"{name}.bin").write_bytes(x.tobytes())
        r = _cli("preprocess", tmp_path / f"{name}.bin", "--side", "X", *flags,
                 "--out", tmp_path / f"{name}.gedi")
        xi = preprocess_x(x.astype(np.int64), cfg)
        same_files &= r.returncode == 0 and (
            tmp_path / f"{name}.gedi").read_bytes() == index_io.dumps(xi)
        q = _cli("query", tmp_path / f"{name}.gedi", tmp_path / "y.gedi", "--no-early-stop")
        local, _, _ = gap_query(xi, yi, early_stop=False)
        remote = json.loads(q.stdout)["verdict"] if q.stdout else None
        same_verdicts &= remote == json.loads(json.dumps(local.to_dict()))
    both = preprocess_y(y.astype(np.int64), cfg, side=SIDE_BOTH)
    blobs = [index_io.dumps(yi), index_io.dumps(xi), index_io.dumps(both)]
    round_trip = all(index_io.dumps(index_io.loads(b)) == b for b in blobs)
    ok = same_files and same_verdicts and round_trip
    acceptance("AC11", ok, f"separate-process index files identical={same_files}, verdicts "
                           f"identical={same_verdicts}, round trip byte-identical={round_trip}")
    assert ok
