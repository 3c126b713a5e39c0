"""Compiled sweep kernel behind the exact p == 2 deepest-fit search.

The search enumerates every candidate line through a pair of observations
with distinct x and needs the exact indicator-count depth of each.  Doing
that naively costs O(n^2) depth evaluations of O(n log n) each; the kernel
instead anchors one observation at a time and rotates the line through it.
In slope order every other observation changes residual sign exactly once,
so the state needed for the depth minimisation can be kept incrementally.

Depth of the line through the anchor and the current batch of collinear
points, written in cut form (see ``empirical._cut_scan_p2``):

    count = n_online + min(P + min(0, min_k S_k),  N - max(0, max_k S_k))

with P/N the positive/negative residual counts over points off the line,
S_k the prefix sums of (neg - pos) grouped by distinct covariate value
(so k ranges exactly over the valid cut gaps), and n_online the points on
the candidate line: the anchor, the slope batch, and duplicates of the
anchor.  A sqrt-decomposed prefix structure answers min/max prefix queries;
its per-block summaries are refreshed lazily, only when the cheap bound
count <= n_online + min(P, N) fails to prune the event.  Event slopes are
sorted with an LSD radix sort on bit-ordered float keys, which is what
keeps the kernel usable at n in the thousands.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["sweep_deepest", "prepare_sorted"]


def prepare_sorted(x: np.ndarray, y: np.ndarray):
    """Sort by x and build group ids of distinct covariate values."""
    order = np.argsort(x, kind="stable")
    xs = np.ascontiguousarray(x[order], dtype=np.float64)
    ys = np.ascontiguousarray(y[order], dtype=np.float64)
    n = xs.size
    gid = np.zeros(n, dtype=np.int64)
    g = 0
    for i in range(1, n):
        if xs[i] != xs[i - 1]:
            g += 1
        gid[i] = g
    return xs, ys, gid, g + 1, order


@njit(cache=True)
def _radix_sort(keys, payload, ne, kbuf, pbuf, counts):
    """In-place LSD radix sort of keys[:ne] (uint64) with payload."""
    src_k, src_p = keys, payload
    dst_k, dst_p = kbuf, pbuf
    for shift in range(0, 64, 8):
        for b in range(256):
            counts[b] = 0
        for i in range(ne):
            counts[(src_k[i] >> shift) & 0xFF] += 1
        total = 0
        for b in range(256):
            c = counts[b]
            counts[b] = total
            total += c
        for i in range(ne):
            b = (src_k[i] >> shift) & 0xFF
            dst_k[counts[b]] = src_k[i]
            dst_p[counts[b]] = src_p[i]
            counts[b] += 1
        src_k, dst_k = dst_k, src_k
        src_p, dst_p = dst_p, src_p
    # 8 passes: data ends up back in the original arrays
    return keys, payload


@njit(cache=True)
def _block_rebuild(d, B, b, G, bminp, bmaxp):
    lo = b * B
    hi = min(G, lo + B)
    s = 0
    mn = d[lo]
    mx = d[lo]
    for j in range(lo, hi):
        s += d[j]
        if s < mn:
            mn = s
        if s > mx:
            mx = s
    bminp[b] = mn
    bmaxp[b] = mx


@njit(cache=True)
def _query(bsum, bminp, bmaxp, nblocks, P, N):
    run = 0
    mn = 0
    mx = 0
    for b in range(nblocks):
        v = run + bminp[b]
        if v < mn:
            mn = v
        v = run + bmaxp[b]
        if v > mx:
            mx = v
        run += bsum[b]
    a = P + mn
    bb = N - mx
    return a if a < bb else bb


@njit(cache=True)
def _sweep(xs, ys, gid, G, anchors, out_anchor, out_slope):
    """Single pass: maximal candidate count, with the argmax events collected.

    Returns (best count, number of pair events, number collected; negative
    collected count signals buffer overflow).
    """
    n = xs.size
    B = 16
    while B * B < G:
        B *= 2
    nblocks = (G + B - 1) // B
    d = np.zeros(G, dtype=np.int64)
    bsum = np.zeros(nblocks, dtype=np.int64)
    bminp = np.zeros(nblocks, dtype=np.int64)
    bmaxp = np.zeros(nblocks, dtype=np.int64)
    dirty = np.zeros(nblocks, dtype=np.bool_)
    dirty_stack = np.empty(nblocks, dtype=np.int64)
    contrib = np.zeros(n, dtype=np.int64)
    slopes = np.empty(n, dtype=np.float64)
    sbits = slopes.view(np.uint64)
    keys = np.empty(n, dtype=np.uint64)
    kbuf = np.empty(n, dtype=np.uint64)
    epoint = np.empty(n, dtype=np.int64)
    pbuf = np.empty(n, dtype=np.int64)
    counts = np.empty(256, dtype=np.int64)
    sign_flip = np.uint64(0x8000000000000000)
    best = -1
    ncol = 0
    cap = out_anchor.size
    overflow = False
    nevents = 0
    for ai in range(anchors.size):
        a = anchors[ai]
        xa = xs[a]
        ya = ys[a]
        ne = 0
        n0_base = 1
        P = 0
        N = 0
        for i in range(G):
            d[i] = 0
        for c in range(n):
            if c == a:
                contrib[c] = 0
                continue
            if xs[c] == xa:
                if ys[c] == ya:
                    contrib[c] = 0
                    n0_base += 1
                else:
                    contrib[c] = -1 if ys[c] > ya else 1
                    if contrib[c] == -1:
                        P += 1
                    else:
                        N += 1
                    d[gid[c]] += contrib[c]
                continue
            contrib[c] = -1 if xs[c] > xa else 1  # residual sign at slope -inf
            if contrib[c] == -1:
                P += 1
            else:
                N += 1
            d[gid[c]] += contrib[c]
            m = (ys[c] - ya) / (xs[c] - xa)
            if m == 0.0:
                m = 0.0  # fold -0.0 and +0.0 onto one key
            slopes[ne] = m
            bits = sbits[ne]
            if bits & sign_flip:
                keys[ne] = ~bits
            else:
                keys[ne] = bits | sign_flip
            epoint[ne] = c
            ne += 1
        if ne == 0:
            continue
        _radix_sort(keys, epoint, ne, kbuf, pbuf, counts)
        for b in range(nblocks):
            s = 0
            lo = b * B
            hi = min(G, lo + B)
            for j in range(lo, hi):
                s += d[j]
            bsum[b] = s
            _block_rebuild(d, B, b, G, bminp, bmaxp)
            dirty[b] = False
        ndirty = 0
        k = 0
        while k < ne:
            key = keys[k]
            k2 = k
            Prm = 0
            Nrm = 0
            while k2 < ne and keys[k2] == key:
                if contrib[epoint[k2]] == -1:
                    Prm += 1
                else:
                    Nrm += 1
                k2 += 1
            bs = k2 - k
            nevents += bs
            n_online = n0_base + bs
            P2 = P - Prm
            N2 = N - Nrm
            cap2 = P2 if P2 < N2 else N2
            if n_online + cap2 >= best:
                # materialise the on-line state exactly and query it
                for t in range(k, k2):
                    c = epoint[t]
                    g = gid[c]
                    d[g] -= contrib[c]
                    bsum[g // B] -= contrib[c]
                    if not dirty[g // B]:
                        dirty[g // B] = True
                        dirty_stack[ndirty] = g // B
                        ndirty += 1
                for t in range(ndirty):
                    b = dirty_stack[t]
                    _block_rebuild(d, B, b, G, bminp, bmaxp)
                    dirty[b] = False
                ndirty = 0
                cnt = n_online + _query(bsum, bminp, bmaxp, nblocks, P2, N2)
                if cnt > best:
                    best = cnt
                    ncol = 0
                if cnt == best:
                    if ncol < cap:
                        # slope recovered from the key; all batch members share it
                        c0 = epoint[k]
                        out_anchor[ncol] = a
                        out_slope[ncol] = (ys[c0] - ya) / (xs[c0] - xa)
                        ncol += 1
                    else:
                        overflow = True
                for t in range(k, k2):
                    c = epoint[t]
                    g = gid[c]
                    nc = 1 if xs[c] > xa else -1
                    contrib[c] = nc
                    d[g] += nc
                    bsum[g // B] += nc
                    if not dirty[g // B]:
                        dirty[g // B] = True
                        dirty_stack[ndirty] = g // B
                        ndirty += 1
            else:
                # pruned: apply the net pre -> post flip in one lazy touch
                for t in range(k, k2):
                    c = epoint[t]
                    g = gid[c]
                    nc = 1 if xs[c] > xa else -1
                    delta = nc - contrib[c]
                    contrib[c] = nc
                    d[g] += delta
                    bsum[g // B] += delta
                    if not dirty[g // B]:
                        dirty[g // B] = True
                        dirty_stack[ndirty] = g // B
                        ndirty += 1
            P = P - Prm + Nrm
            N = N - Nrm + Prm
            k = k2
    if overflow:
        ncol = -1
    return best, nevents, ncol


def sweep_deepest(xs, ys, gid, G, cap: int = 65536):
    """Max candidate count and all (anchor position, slope) events attaining it.

    Anchors are visited central-covariate-first so the incumbent rises
    quickly and the bound prunes most events.
    """
    anchors = np.argsort(np.abs(xs - np.median(xs)), kind="stable").astype(np.int64)
    out_a = np.empty(cap, dtype=np.int64)
    out_s = np.empty(cap, dtype=np.float64)
    best, nevents, ncol = _sweep(xs, ys, gid, np.int64(G), anchors, out_a, out_s)
    if ncol < 0:  # pragma: no cover - astronomically many ties
        raise RuntimeError("tie buffer overflow in deepest-fit collection")
    return int(best), int(nevents), out_a[:ncol].copy(), out_s[:ncol].copy()
