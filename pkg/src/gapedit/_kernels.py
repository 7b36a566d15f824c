"""
Compiled kernels shared by the string, index and engine layers.

Everything here takes plain numpy arrays and scalars so numba can compile it
without object mode. Python wrappers in the sibling modules validate inputs
and translate sentinels before calling in.

Conventions
-----------
* Symbol arrays are ``int64`` or ``int32``. Equality is the only relation
  used on them, so sentinel values (BOTTOM, PAD) need no special casing.
* Modular arithmetic uses ``p < 2**31`` so a product of two residues fits in
  a signed 64-bit integer.
* Unsigned 64-bit arithmetic in the SipHash kernel relies on numba's
  wrap-around semantics for ``uint64``; every literal is cast explicitly to
  avoid silent promotion to float64.
"""

import numpy as np
from numba import njit

INT_INF = np.int64(1) << np.int64(60)

# ---------------------------------------------------------------------------
# Edit distance
# ---------------------------------------------------------------------------


@njit(cache=True)
def ed_full(a, b):
    """Quadratic Levenshtein DP with two rolling rows."""
    la = a.shape[0]
    lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = np.arange(lb + 1, dtype=np.int64)
    cur = np.empty(lb + 1, dtype=np.int64)
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            d = prev[j] + 1
            if d < best:
                best = d
            d = cur[j - 1] + 1
            if d < best:
                best = d
            cur[j] = best
        prev, cur = cur, prev
    return prev[lb]


@njit(cache=True)
def ed_table(a, b):
    """Full DP table, used for alignment backtracking."""
    la = a.shape[0]
    lb = b.shape[0]
    D = np.empty((la + 1, lb + 1), dtype=np.int64)
    for j in range(lb + 1):
        D[0, j] = j
    for i in range(1, la + 1):
        D[i, 0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            best = D[i - 1, j - 1] + (0 if ai == b[j - 1] else 1)
            d = D[i - 1, j] + 1
            if d < best:
                best = d
            d = D[i, j - 1] + 1
            if d < best:
                best = d
            D[i, j] = best
    return D


@njit(cache=True)
def ed_banded(a, b, bound):
    """Ukkonen band of half-width ``bound``.

    Returns the exact distance when it is at most ``bound`` and ``-1``
    otherwise. Cells outside the band are treated as infinite, which can only
    overestimate, and any path with cost <= bound stays inside the band.
    """
    la = a.shape[0]
    lb = b.shape[0]
    if abs(la - lb) > bound:
        return -1
    if la == 0 or lb == 0:
        d = la if lb == 0 else lb
        return d if d <= bound else -1
    inf = bound + 1
    prev = np.full(lb + 1, inf, dtype=np.int64)
    cur = np.full(lb + 1, inf, dtype=np.int64)
    for j in range(0, min(lb, bound) + 1):
        prev[j] = j
    for i in range(1, la + 1):
        lo = i - bound
        if lo < 0:
            lo = 0
        hi = i + bound
        if hi > lb:
            hi = lb
        # cell left of the band must read as infinite
        if lo > 0:
            cur[lo - 1] = inf
        else:
            cur[0] = i if i <= bound else inf
        ai = a[i - 1]
        jstart = lo if lo > 0 else 1
        row_min = inf if lo > 0 else cur[0]
        for j in range(jstart, hi + 1):
            best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            d = prev[j] + 1
            if d < best:
                best = d
            d = cur[j - 1] + 1
            if d < best:
                best = d
            if best > inf:
                best = inf
            cur[j] = best
            if best < row_min:
                row_min = best
        if hi < lb:
            cur[hi + 1] = inf
        if row_min > bound:
            return -1
        prev, cur = cur, prev
    return prev[lb] if prev[lb] <= bound else -1


@njit(cache=True)
def _peq_build(pattern, sigma, nblocks):
    peq = np.zeros((sigma, nblocks), dtype=np.uint64)
    one = np.uint64(1)
    for i in range(pattern.shape[0]):
        blk = i >> 6
        peq[pattern[i], blk] |= one << np.uint64(i & 63)
    return peq


@njit(cache=True)
def _myers_with_peq(peq, m, text):
    """Global edit distance via Myers/Hyyro block bit-vectors.

    ``peq`` holds the pattern (length ``m``); ``text`` holds dense codes in
    ``[0, sigma)``.
    """
    n = text.shape[0]
    if m == 0:
        return n
    if n == 0:
        return m
    nblocks = (m + 63) >> 6
    Pv = np.empty(nblocks, dtype=np.uint64)
    Mv = np.zeros(nblocks, dtype=np.uint64)
    for bk in range(nblocks):
        Pv[bk] = ~np.uint64(0)
    one = np.uint64(1)
    high_last = one << np.uint64((m - 1) & 63)
    high_full = one << np.uint64(63)
    score = m
    for j in range(n):
        c = text[j]
        hin = 1
        for bk in range(nblocks):
            pv = Pv[bk]
            mv = Mv[bk]
            eq = peq[c, bk]
            xv = eq | mv
            if hin < 0:
                eq |= one
            xh = (((eq & pv) + pv) ^ pv) | eq
            ph = mv | ~(xh | pv)
            mh = pv & xh
            high = high_last if bk == nblocks - 1 else high_full
            hout = 0
            if ph & high:
                hout = 1
            elif mh & high:
                hout = -1
            ph = ph << one
            mh = mh << one
            if hin < 0:
                mh |= one
            elif hin > 0:
                ph |= one
            Pv[bk] = mh | ~(xv | ph)
            Mv[bk] = ph & xv
            hin = hout
        score += hin
    return score


@njit(cache=True)
def ed_myers(a, b, sigma):
    """Bit-parallel global edit distance for dense codes in ``[0, sigma)``."""
    m = a.shape[0]
    if m == 0:
        return b.shape[0]
    nblocks = (m + 63) >> 6
    peq = _peq_build(a, sigma, nblocks)
    return _myers_with_peq(peq, m, b)


# ---------------------------------------------------------------------------
# Shifted-distance rows
# ---------------------------------------------------------------------------


@njit(cache=True)
def shifted_row(ext, sigma, p, m, deltas, cap):
    """ED(ext[p:p+m], ext[p+d:p+d+m]) capped at ``cap`` for each d in deltas.

    ``ext`` holds dense codes with enough sentinel margin that every slice is
    in range. The band method is chosen when it is cheaper than bit vectors.
    """
    out = np.empty(deltas.shape[0], dtype=np.int32)
    pat = ext[p:p + m]
    nblocks = (m + 63) >> 6
    use_band = (2 * cap + 1) < 4 * nblocks
    if m <= 1:
        for t in range(deltas.shape[0]):
            q = p + deltas[t]
            d = 0
            if m == 1 and ext[p] != ext[q]:
                d = 1
            out[t] = d if d < cap else cap
        return out
    if use_band:
        for t in range(deltas.shape[0]):
            q = p + deltas[t]
            d = ed_banded(pat, ext[q:q + m], cap)
            out[t] = cap if d < 0 else d
        return out
    peq = _peq_build(pat, sigma, nblocks)
    for t in range(deltas.shape[0]):
        q = p + deltas[t]
        if deltas[t] == 0:
            out[t] = 0
            continue
        d = _myers_with_peq(peq, m, ext[q:q + m])
        out[t] = d if d < cap else cap
    return out


# ---------------------------------------------------------------------------
# SipHash-2-4 on three 64-bit words
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _rotl(x, b):
    return (x << np.uint64(b)) | (x >> np.uint64(64 - b))


@njit(cache=True, inline="always")
def _sipround(v0, v1, v2, v3):
    v0 = v0 + v1
    v1 = _rotl(v1, 13)
    v1 ^= v0
    v0 = _rotl(v0, 32)
    v2 = v2 + v3
    v3 = _rotl(v3, 16)
    v3 ^= v2
    v0 = v0 + v3
    v3 = _rotl(v3, 21)
    v3 ^= v0
    v2 = v2 + v1
    v1 = _rotl(v1, 17)
    v1 ^= v2
    v2 = _rotl(v2, 32)
    return v0, v1, v2, v3


@njit(cache=True)
def siphash_words(k0, k1, w0, w1, w2):
    """SipHash-2-4 of the 24-byte little-endian message (w0, w1, w2).

    Vectorized over equally shaped ``uint64`` arrays ``w0, w1, w2``.
    """
    n = w0.shape[0]
    out = np.empty(n, dtype=np.uint64)
    c0 = np.uint64(0x736F6D6570736575)
    c1 = np.uint64(0x646F72616E646F6D)
    c2 = np.uint64(0x6C7967656E657261)
    c3 = np.uint64(0x7465646279746573)
    tail = np.uint64(24) << np.uint64(56)
    ff = np.uint64(0xFF)
    for i in range(n):
        v0 = k0 ^ c0
        v1 = k1 ^ c1
        v2 = k0 ^ c2
        v3 = k1 ^ c3
        for m in (w0[i], w1[i], w2[i]):
            v3 ^= m
            v0, v1, v2, v3 = _sipround(v0, v1, v2, v3)
            v0, v1, v2, v3 = _sipround(v0, v1, v2, v3)
            v0 ^= m
        v3 ^= tail
        v0, v1, v2, v3 = _sipround(v0, v1, v2, v3)
        v0, v1, v2, v3 = _sipround(v0, v1, v2, v3)
        v0 ^= tail
        v2 ^= ff
        for _ in range(4):
            v0, v1, v2, v3 = _sipround(v0, v1, v2, v3)
        out[i] = v0 ^ v1 ^ v2 ^ v3
    return out


# ---------------------------------------------------------------------------
# Fingerprints
# ---------------------------------------------------------------------------


@njit(cache=True)
def fingerprints_over_shifts(hcode, base, positions, coefs, shifts, p):
    """Fingerprint of ``hcode[base + s + positions]`` for every s in shifts."""
    out = np.empty(shifts.shape[0], dtype=np.int64)
    for t in range(shifts.shape[0]):
        off = base + shifts[t]
        acc = np.int64(0)
        for j in range(positions.shape[0]):
            acc = (acc + coefs[j] * hcode[off + positions[j]]) % p
        out[t] = acc
    return out


@njit(cache=True)
def fingerprints_segments(hcode, starts, seg_ptr, positions, coefs, p):
    """One fingerprint per segment; segment i owns positions[seg_ptr[i]:seg_ptr[i+1]]."""
    nseg = starts.shape[0]
    out = np.empty(nseg, dtype=np.int64)
    for i in range(nseg):
        acc = np.int64(0)
        base = starts[i]
        for j in range(seg_ptr[i], seg_ptr[i + 1]):
            acc = (acc + coefs[j] * hcode[base + positions[j]]) % p
        out[i] = acc
    return out


@njit(cache=True)
def modpow_vec(a, e, p):
    out = np.empty(a.shape[0], dtype=np.int64)
    for i in range(a.shape[0]):
        base = a[i] % p
        r = np.int64(1)
        x = e
        while x > 0:
            if x & 1:
                r = (r * base) % p
            base = (base * base) % p
            x >>= 1
        out[i] = r
    return out


# ---------------------------------------------------------------------------
# Engine helpers
# ---------------------------------------------------------------------------


@njit(cache=True)
def nearest_occurrence(ext, center, symbol, radius):
    """Offset s with ext[center+s] == symbol minimizing |s|, ties to negative.

    Returns ``radius + 1`` when no occurrence lies within ``[-radius, radius]``.
    """
    if ext[center] == symbol:
        return 0
    for r in range(1, radius + 1):
        if ext[center - r] == symbol:
            return -r
        if ext[center + r] == symbol:
            return r
    return radius + 1


@njit(cache=True)
def round_to_step(s, step, lo, hi):
    """Nearest multiple of ``step`` in [lo, hi]; ties to smaller |.|, then negative."""
    f = (s // step) * step
    c = f + step if f != s else f
    if f < lo:
        f = lo
    if c > hi:
        c = hi
    df = s - f
    dc = c - s
    if df < dc:
        return f
    if dc < df:
        return c
    af = abs(f)
    ac = abs(c)
    if af < ac:
        return f
    if ac < af:
        return c
    return f if f < c else c


@njit(cache=True)
def transfer_progressions(lo_t, step_t, n_t, lo_s, step_s, b):
    """Range-min transfer between two arithmetic progressions.

    a[i] = min_j b[j] + 2 |(lo_t + i step_t) - (lo_s + j step_s)| via a
    forward sweep (sources at or left of the target) and a backward sweep.
    """
    n_s = b.shape[0]
    out = np.empty(n_t, dtype=np.float64)
    # forward: best = min_j<=idx (b[j] - 2 s_j), a = best + 2 s
    j = 0
    best = np.inf
    for i in range(n_t):
        s = lo_t + i * step_t
        while j < n_s and lo_s + j * step_s <= s:
            cand = b[j] - 2.0 * (lo_s + j * step_s)
            if cand < best:
                best = cand
            j += 1
        out[i] = best + 2.0 * s
    j = n_s - 1
    best = np.inf
    for i in range(n_t - 1, -1, -1):
        s = lo_t + i * step_t
        while j >= 0 and lo_s + j * step_s >= s:
            cand = b[j] + 2.0 * (lo_s + j * step_s)
            if cand < best:
                best = cand
            j -= 1
        v = best - 2.0 * s
        if v < out[i]:
            out[i] = v
    return out


@njit(cache=True)
def leaf_block(ext, ext_off, starts, chars, sampled, steps, M,
               lo_v, step_v, n_v, u_leaf, beta, lam, c1, c2):
    """Fused processing of the B leaf children of one failing node.

    For each leaf: matching against the nearest occurrence of its character
    within the shift universe, exact single-character shifted distances when
    it prunes, all-ones when it does not, transfer to the parent's shift set,
    and accumulation of the Recover terms.

    Returns (recover values over the parent's shifts, prune hits, prune
    fails, table lookups).
    """
    nleaf = starts.shape[0]
    R = np.zeros(n_v, dtype=np.float64)
    hits = 0
    fails = 0
    lookups = 0
    for j in range(nleaf):
        step = steps[j]
        lo_j = -(M // step) * step
        n_j = 2 * (M // step) + 1
        vals = np.empty(n_j, dtype=np.float64)
        center = ext_off + starts[j]
        lookups += 1
        if sampled[j]:
            s_star = nearest_occurrence(ext, center, chars[j], M)
        else:
            s_star = 0
        if s_star > M:
            fails += 1
            for t in range(n_j):
                vals[t] = 1.0
        else:
            hits += 1
            st = round_to_step(s_star, step, lo_j, -lo_j)
            ref = ext[center + st]
            for t in range(n_j):
                vals[t] = 0.0 if ext[center + lo_j + t * step] == ref else 1.0
            lookups += n_j
        a = transfer_progressions(lo_v, step_v, n_v, lo_j, step, vals)
        thr = c1 * beta * u_leaf[j]
        bonus = c2 * beta / lam
        for i in range(n_v):
            if a[i] > thr:
                R[i] += a[i] - thr + bonus
    return R, hits, fails, lookups


@njit(cache=True)
def level_fingerprints(hcode, base, starts, ptr, positions, coefs, shifts, p):
    """Fingerprints of every node of a level at every shift.

    Node i owns ``positions[ptr[i]:ptr[i+1]]``; row i column t is the
    fingerprint of ``hcode[base + starts[i] + shifts[t] + H_i]``.
    """
    nn = starts.shape[0]
    ns = shifts.shape[0]
    out = np.empty((nn, ns), dtype=np.int64)
    for i in range(nn):
        a = ptr[i]
        b = ptr[i + 1]
        for t in range(ns):
            off = base + starts[i] + shifts[t]
            acc = np.int64(0)
            for j in range(a, b):
                acc = (acc + coefs[j] * hcode[off + positions[j]]) % p
            out[i, t] = acc
    return out
