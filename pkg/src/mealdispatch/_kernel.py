"""Compiled engine for the dispatch solver.

Array-based twins of the scheduling and search logic in scheduling.py and
grasp.py, jitted with numba. Everything here operates on the packed epoch
arrays built in grasp._build_pack; identifiers are integer ranks (orders
and couriers sorted by id), so lexicographic tie-breaking is plain integer
comparison.

The distance matrix is built here with the exact scalar formula from
model.haversine_km; compiled libm matches CPython's bit for bit, which the
test suite verifies, so both engines see identical travel times. On top of
it sit per-speed-class integer travel-time tables (when the snapshot is
small enough to afford them; the fallback divides out of the float matrix
and yields the same integers either way).

Construction keeps the candidate pool in a bucket structure ordered by
(greedy value, courier rank, order rank): per-value doubly linked lists
plus block-summed counts, so committing one candidate costs O(C + alive)
instead of repacking and rescanning every pair. Selection of the j-th
cheapest candidate walks 256 block sums, then 256 bucket counts, then one
bucket list, exactly reproducing the reference's sorted-list indexing.

Local search exploits two facts. A probe's delta is separable: replacing
position i of courier c re-prices courier c alone, so the R table caches
that re-priced cost per (slot, incoming order) and a swap only invalidates
the two touched couriers' rows. And greedy bundling is causal: the walk
state on reaching position i depends only on earlier elements, so each row
rebuild walks the unchanged prefix once and re-walks only from the bundle
containing position i - 1. Pair bests and the global best-swap scan then
reduce to table lookups, keeping full descent affordable at dispatch
scale.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_SM_G = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

_NBUCKETS = 1 << 16  # value buckets; the last one collects overflow values
_NBLOCKS = 256

# Swap search builds an (assigned x assigned) table and a (C x C) pair
# matrix; past these sizes a static solve should be split into epochs.
_LS_MAX_ASSIGNED = 8192
_LS_MAX_COURIERS = 4096


@njit(cache=True, nogil=True)
def build_dist_matrix(lats, lons):
    n = lats.shape[0]
    out = np.empty((n, n), np.float64)
    for i in range(n):
        out[i, i] = 0.0
        for j in range(i + 1, n):
            p1 = math.radians(lats[i])
            p2 = math.radians(lats[j])
            dp = math.radians(lats[j] - lats[i])
            dl = math.radians(lons[j] - lons[i])
            h = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
            d = 2.0 * 6371.0 * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))
            out[i, j] = d
            out[j, i] = d
    return out


@njit(cache=True, nogil=True)
def build_tt_tables(D, speeds):
    """Integer travel seconds per speed class: TT[s, i, j] for speeds[s]."""
    S = speeds.shape[0]
    P = D.shape[0]
    out = np.empty((S, P, P), np.int32)
    for s in range(S):
        v = speeds[s]
        for i in range(P):
            for j in range(P):
                out[s, i, j] = np.int32(math.ceil(D[i, j] * 3600.0 / v))
    return out


@njit(inline="always")
def _sm64_next(state):
    state = state + _SM_G
    z = state
    z = (z ^ (z >> _S30)) * _SM_M1
    z = (z ^ (z >> _S27)) * _SM_M2
    return state, z ^ (z >> _S31)


@njit(inline="always")
def _tt2(TT2, D, use_tt, p, q, speed):
    if use_tt == 1:
        return np.int64(TT2[p, q])
    return np.int64(math.ceil(D[p, q] * 3600.0 / speed))


@njit(inline="always")
def _drop_before(o_dead, x, y):
    # Drop-off ordering: earliest deadline first, ties by order rank.
    return o_dead[x] < o_dead[y] or (o_dead[x] == o_dead[y] and x < y)


@njit(inline="always")
def _schedule_bundle(
    TT2, D, use_tt,
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    speed, off_t, cur_pt, cur_t, dispatch,
    b0, b1, b2, bsize,
):
    """Schedule one bundle from a courier state.

    Returns (feasible, completion time, end point, routing seconds).
    """
    depart = dispatch if dispatch > cur_t else cur_t
    rpt = o_rest_pt[b0]
    arrive = depart + _tt2(TT2, D, use_tt, cur_pt, rpt, speed)
    ready = o_ready[b0]
    psrv = o_psrv[b0]
    if bsize >= 2:
        if o_ready[b1] > ready:
            ready = o_ready[b1]
        if o_psrv[b1] > psrv:
            psrv = o_psrv[b1]
    if bsize == 3:
        if o_ready[b2] > ready:
            ready = o_ready[b2]
        if o_psrv[b2] > psrv:
            psrv = o_psrv[b2]
    pickup_begin = arrive if arrive > ready else ready
    t = pickup_begin + psrv

    d0, d1, d2 = b0, b1, b2
    if bsize >= 2 and _drop_before(o_dead, d1, d0):
        d0, d1 = d1, d0
    if bsize == 3:
        if _drop_before(o_dead, d2, d1):
            d1, d2 = d2, d1
        if _drop_before(o_dead, d1, d0):
            d0, d1 = d1, d0

    ok = True
    p = rpt
    t = t + _tt2(TT2, D, use_tt, p, o_user_pt[d0], speed) + o_dsrv[d0]
    if t > o_dead[d0]:
        ok = False
    p = o_user_pt[d0]
    if bsize >= 2:
        t = t + _tt2(TT2, D, use_tt, p, o_user_pt[d1], speed) + o_dsrv[d1]
        if t > o_dead[d1]:
            ok = False
        p = o_user_pt[d1]
    if bsize == 3:
        t = t + _tt2(TT2, D, use_tt, p, o_user_pt[d2], speed) + o_dsrv[d2]
        if t > o_dead[d2]:
            ok = False
        p = o_user_pt[d2]
    if t > off_t:
        ok = False
    return ok, t, p, t - depart


@njit(inline="always")
def _bundled_tail(
    TT2, D, use_tt,
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    speed, off_t, dispatch,
    seq, length, rpos, rord, i0, pt0, t0,
):
    """Greedy-bundle positions [i0, length) from state (pt0, t0).

    The order at position rpos is virtually replaced by rord (rpos == -1
    means no replacement). Merges consecutive same-restaurant orders up to
    three while the merged route stays feasible, exactly like
    scheduling._greedy_bundles. Returns (routing seconds, all feasible,
    any bundle of size > 1).
    """
    cur_pt = pt0
    cur_t = t0
    total = np.int64(0)
    all_ok = True
    any_multi = False
    i = i0
    while i < length:
        base = rord if i == rpos else seq[i]
        bsize = 1
        # last successful merge doubles as the final bundle schedule
        ok = False
        comp = np.int64(0)
        endp = np.int32(0)
        rt = np.int64(0)
        while bsize < 3 and i + bsize < length:
            nxt = rord if i + bsize == rpos else seq[i + bsize]
            if o_rest_pt[nxt] != o_rest_pt[base]:
                break
            b1 = rord if i + 1 == rpos else seq[i + 1]
            b2 = np.int32(0)
            if bsize == 2:
                b2 = rord if i + 2 == rpos else seq[i + 2]
            mok, mcomp, mendp, mrt = _schedule_bundle(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                speed, off_t, cur_pt, cur_t, dispatch,
                base, b1, b2, bsize + 1,
            )
            if not mok:
                break
            ok, comp, endp, rt = mok, mcomp, mendp, mrt
            bsize += 1
        if bsize == 1:
            ok, comp, endp, rt = _schedule_bundle(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                speed, off_t, cur_pt, cur_t, dispatch,
                base, np.int32(0), np.int32(0), 1,
            )
        else:
            any_multi = True
        if not ok:
            all_ok = False
        total += rt
        cur_pt = endp
        cur_t = comp
        i += bsize
    return total, all_ok, any_multi


@njit(inline="always")
def _singleton_tail(
    TT2, D, use_tt,
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    speed, off_t, dispatch,
    seq, length, rpos, rord, i0, pt0, t0,
):
    """Schedule positions [i0, length) as singleton routes from (pt0, t0)."""
    cur_pt = pt0
    cur_t = t0
    total = np.int64(0)
    all_ok = True
    for k in range(i0, length):
        o = rord if k == rpos else seq[k]
        ok, comp, endp, rt = _schedule_bundle(
            TT2, D, use_tt,
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            speed, off_t, cur_pt, cur_t, dispatch,
            o, np.int32(0), np.int32(0), 1,
        )
        if not ok:
            all_ok = False
        total += rt
        cur_pt = endp
        cur_t = comp
    return total, all_ok


@njit(cache=True, nogil=True)
def _eval_repl(
    TT2, D, use_tt,
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    speed, off_t, start_pt, start_t, dispatch,
    seq, length, rpos, rord,
):
    """Total routing time of one courier sequence, order at rpos replaced
    by rord (rpos == -1: unchanged). Mirrors plan_courier_routes: greedy
    bundles first, whole-plan singleton fallback if those break.
    Returns (total routing seconds, feasible).
    """
    total, all_ok, any_multi = _bundled_tail(
        TT2, D, use_tt,
        o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
        speed, off_t, dispatch,
        seq, length, rpos, rord, 0, start_pt, start_t,
    )
    if all_ok or not any_multi:
        return total, all_ok
    return _singleton_tail(
        TT2, D, use_tt,
        o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
        speed, off_t, dispatch,
        seq, length, rpos, rord, 0, start_pt, start_t,
    )


@njit(inline="always")
def _singleton(
    TT2, D, use_tt,
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    speed, off_t, cur_pt, cur_t, dispatch, o,
):
    """Feasibility, completion, and travel legs of a one-order route."""
    depart = dispatch if dispatch > cur_t else cur_t
    leg1 = _tt2(TT2, D, use_tt, cur_pt, o_rest_pt[o], speed)
    arrive = depart + leg1
    pickup_begin = arrive if arrive > o_ready[o] else o_ready[o]
    leg2 = _tt2(TT2, D, use_tt, o_rest_pt[o], o_user_pt[o], speed)
    complete = pickup_begin + o_psrv[o] + leg2 + o_dsrv[o]
    feas = complete <= o_dead[o] and complete <= off_t
    return feas, complete, leg1, leg2


# ---------------------------------------------------------------------------
# Candidate pool: buckets of equal greedy value, each a doubly linked list
# sorted by (courier rank, order rank); node handle is courier * O + order.
# Values >= _NBUCKETS - 1 share the last bucket, ordered by full value first.


@njit(inline="always")
def _pool_node_before(val, idxa, idxb):
    return val[idxa] < val[idxb] or (val[idxa] == val[idxb] and idxa < idxb)


@njit(inline="always")
def _pool_insert(head, tail, nxt, prv, counts, blocks, val, idx, v):
    val[idx] = v
    b = v if v < _NBUCKETS - 1 else _NBUCKETS - 1
    counts[b] += 1
    blocks[b >> 8] += 1
    t = tail[b]
    if t == -1:
        head[b] = idx
        tail[b] = idx
        nxt[idx] = -1
        prv[idx] = -1
        return
    if _pool_node_before(val, t, idx):
        nxt[t] = idx
        prv[idx] = t
        nxt[idx] = -1
        tail[b] = idx
        return
    cur = head[b]
    while not _pool_node_before(val, idx, cur):
        cur = nxt[cur]
    p = prv[cur]
    nxt[idx] = cur
    prv[idx] = p
    prv[cur] = idx
    if p == -1:
        head[b] = idx
    else:
        nxt[p] = idx


@njit(inline="always")
def _pool_remove(head, tail, nxt, prv, counts, blocks, val, idx):
    v = val[idx]
    b = v if v < _NBUCKETS - 1 else _NBUCKETS - 1
    counts[b] -= 1
    blocks[b >> 8] -= 1
    p = prv[idx]
    n = nxt[idx]
    if p == -1:
        head[b] = n
    else:
        nxt[p] = n
    if n == -1:
        tail[b] = p
    else:
        prv[n] = p
    val[idx] = -1


@njit(inline="always")
def _pool_select(head, nxt, counts, blocks, j):
    """Node handle of the j-th smallest (value, courier, order) key."""
    bk = 0
    while j >= blocks[bk]:
        j -= blocks[bk]
        bk += 1
    b = bk << 8
    while j >= counts[b]:
        j -= counts[b]
        b += 1
    cur = head[b]
    while j > 0:
        cur = nxt[cur]
        j -= 1
    return cur


@njit(cache=True, nogil=True)
def _construct(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    alpha, rng_state, static_mode, full_leg,
    seqs, lens,
):
    """Randomized greedy construction; fills seqs/lens, returns rng state."""
    C = c_pos_pt.shape[0]
    O = o_rest_pt.shape[0]
    cur_pt = c_pos_pt.astype(np.int32)
    cur_t = c_avail.copy()
    alive = np.empty(O, np.int32)
    alive_pos = np.empty(O, np.int32)
    for o in range(O):
        alive[o] = o
        alive_pos[o] = o
    n_alive = O

    head = np.full(_NBUCKETS, -1, np.int32)
    tail = np.full(_NBUCKETS, -1, np.int32)
    counts = np.zeros(_NBUCKETS, np.int32)
    blocks = np.zeros(_NBLOCKS, np.int32)
    nxt = np.empty(C * O, np.int32)
    prv = np.empty(C * O, np.int32)
    val = np.full(C * O, -1, np.int32)
    total = 0

    for c in range(C):
        TT2 = TT3[spi[c]]
        base = c * O
        for o in range(O):
            ok, comp, leg1, leg2 = _singleton(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                c_speed[c], c_off[c], cur_pt[c], cur_t[c], dispatch, o,
            )
            if ok:
                v = np.int32(leg1 + leg2) if full_leg == 1 else np.int32(leg1)
                _pool_insert(head, tail, nxt, prv, counts, blocks, val, base + o, v)
                total += 1

    while total > 0:
        k_rcl = int(math.ceil(alpha * total))
        if k_rcl < 1:
            k_rcl = 1
        rng_state, draw = _sm64_next(rng_state)
        j = np.int64(draw % np.uint64(k_rcl))
        idx = _pool_select(head, nxt, counts, blocks, j)
        c = idx // O
        o = idx % O

        seqs[c, lens[c]] = o
        lens[c] += 1
        for c2 in range(C):
            idx2 = c2 * O + o
            if val[idx2] >= 0:
                _pool_remove(head, tail, nxt, prv, counts, blocks, val, idx2)
                total -= 1
        pos = alive_pos[o]
        last = alive[n_alive - 1]
        alive[pos] = last
        alive_pos[last] = pos
        n_alive -= 1

        if static_mode == 0:
            TT2 = TT3[spi[c]]
            ok, comp, leg1, leg2 = _singleton(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                c_speed[c], c_off[c], cur_pt[c], cur_t[c], dispatch, o,
            )
            cur_pt[c] = o_user_pt[o]
            cur_t[c] = comp
            base = c * O
            for k in range(n_alive):
                o2 = alive[k]
                idx2 = base + o2
                if val[idx2] >= 0:
                    _pool_remove(head, tail, nxt, prv, counts, blocks, val, idx2)
                    total -= 1
                ok, comp, leg1, leg2 = _singleton(
                    TT2, D, use_tt,
                    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                    c_speed[c], c_off[c], cur_pt[c], cur_t[c], dispatch, o2,
                )
                if ok:
                    v = np.int32(leg1 + leg2) if full_leg == 1 else np.int32(leg1)
                    _pool_insert(head, tail, nxt, prv, counts, blocks, val, idx2, v)
                    total += 1
    return rng_state


@njit(cache=True, nogil=True)
def _repair_static(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    seqs, lens,
):
    """Drop orders that break the singleton chain (static construction only)."""
    C = c_pos_pt.shape[0]
    for c in range(C):
        TT2 = TT3[spi[c]]
        cur_pt = np.int32(c_pos_pt[c])
        cur_t = c_avail[c]
        w = 0
        for k in range(lens[c]):
            o = seqs[c, k]
            ok, comp, leg1, leg2 = _singleton(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                c_speed[c], c_off[c], cur_pt, cur_t, dispatch, o,
            )
            if ok:
                seqs[c, w] = o
                w += 1
                cur_pt = o_user_pt[o]
                cur_t = comp
        lens[c] = w


@njit(cache=True, nogil=True)
def _rebuild_r_rows(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    seqs, lens, slot_base, aord, R, c,
):
    """Refresh courier c's R rows: plan cost with one position replaced.

    Both walks over the unchanged sequence are done once: the greedy walk
    snapshots, for every position p, the state before the bundle holding
    p - 1 (a replacement at p can reshape that bundle but nothing earlier),
    and the singleton walk snapshots the chain state before p for the
    fallback. Each (position, incoming order) entry then re-walks only the
    affected tail.
    """
    L = lens[c]
    if L == 0:
        return
    TT2 = TT3[spi[c]]
    speed = c_speed[c]
    off_t = c_off[c]
    seq = seqs[c]
    n_assigned = aord.shape[0]

    bs_start = np.empty(L, np.int32)
    bs_pt = np.empty(L, np.int32)
    bs_t = np.empty(L, np.int64)
    bs_cost = np.empty(L, np.int64)
    bs_ok = np.empty(L, np.uint8)
    bs_multi = np.empty(L, np.uint8)

    cur_pt = np.int32(c_pos_pt[c])
    cur_t = c_avail[c]
    cost = np.int64(0)
    all_ok = True
    any_multi = False
    bs_start[0] = 0
    bs_pt[0] = cur_pt
    bs_t[0] = cur_t
    bs_cost[0] = 0
    bs_ok[0] = 1
    bs_multi[0] = 0
    i = 0
    while i < L:
        base = seq[i]
        bsize = 1
        ok = False
        comp = np.int64(0)
        endp = np.int32(0)
        rt = np.int64(0)
        while bsize < 3 and i + bsize < L and o_rest_pt[seq[i + bsize]] == o_rest_pt[base]:
            b2 = seq[i + 2] if bsize == 2 else np.int32(0)
            mok, mcomp, mendp, mrt = _schedule_bundle(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                speed, off_t, cur_pt, cur_t, dispatch,
                base, seq[i + 1], b2, bsize + 1,
            )
            if not mok:
                break
            ok, comp, endp, rt = mok, mcomp, mendp, mrt
            bsize += 1
        if bsize == 1:
            ok, comp, endp, rt = _schedule_bundle(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                speed, off_t, cur_pt, cur_t, dispatch,
                base, np.int32(0), np.int32(0), 1,
            )
        for p in range(i + 1, i + bsize + 1):
            if p < L:
                bs_start[p] = i
                bs_pt[p] = cur_pt
                bs_t[p] = cur_t
                bs_cost[p] = cost
                bs_ok[p] = 1 if all_ok else 0
                bs_multi[p] = 1 if any_multi else 0
        if bsize > 1:
            any_multi = True
        if not ok:
            all_ok = False
        cost += rt
        cur_pt = endp
        cur_t = comp
        i += bsize

    sg_pt = np.empty(L, np.int32)
    sg_t = np.empty(L, np.int64)
    sg_cost = np.empty(L, np.int64)
    sg_ok = np.empty(L, np.uint8)
    cur_pt = np.int32(c_pos_pt[c])
    cur_t = c_avail[c]
    cost = np.int64(0)
    all_ok = True
    for p in range(L):
        sg_pt[p] = cur_pt
        sg_t[p] = cur_t
        sg_cost[p] = cost
        sg_ok[p] = 1 if all_ok else 0
        ok, comp, endp, rt = _schedule_bundle(
            TT2, D, use_tt,
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            speed, off_t, cur_pt, cur_t, dispatch,
            seq[p], np.int32(0), np.int32(0), 1,
        )
        if not ok:
            all_ok = False
        cost += rt
        cur_pt = endp
        cur_t = comp

    for i in range(L):
        row = R[slot_base[c] + i]
        for t in range(n_assigned):
            w = aord[t]
            tcost, tok, tmulti = _bundled_tail(
                TT2, D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                speed, off_t, dispatch,
                seq, L, i, w, bs_start[i], bs_pt[i], bs_t[i],
            )
            feas = bs_ok[i] == 1 and tok
            multi = bs_multi[i] == 1 or tmulti
            if feas:
                row[t] = bs_cost[i] + tcost
            elif not multi:
                row[t] = -1
            else:
                scost, sok = _singleton_tail(
                    TT2, D, use_tt,
                    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                    speed, off_t, dispatch,
                    seq, L, i, w, i, sg_pt[i], sg_t[i],
                )
                row[t] = sg_cost[i] + scost if sg_ok[i] == 1 and sok else -1


@njit(inline="always")
def _pair_best_tbl(seqs, lens, slot_base, aslot, R, cost, a, b):
    """Best improving swap between couriers a and b from the R table."""
    best = np.int64(0)
    bi1 = np.int32(-1)
    bi2 = np.int32(-1)
    base_cost = cost[a] + cost[b]
    for i1 in range(lens[a]):
        ra = R[slot_base[a] + i1]
        ta = aslot[seqs[a, i1]]
        for i2 in range(lens[b]):
            ca2 = ra[aslot[seqs[b, i2]]]
            if ca2 < 0:
                continue
            cb2 = R[slot_base[b] + i2, ta]
            if cb2 < 0:
                continue
            delta = ca2 + cb2 - base_cost
            if delta < best:
                best = delta
                bi1 = np.int32(i1)
                bi2 = np.int32(i2)
    return best, bi1, bi2


@njit(cache=True, nogil=True)
def _local_search(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    seqs, lens, full_descent,
):
    """Swap descent over courier pairs, in place. Returns total cost."""
    C = c_pos_pt.shape[0]
    O = o_rest_pt.shape[0]
    cost = np.empty(C, np.int64)
    n_assigned = 0
    for c in range(C):
        cc, ok = _eval_repl(
            TT3[spi[c]], D, use_tt,
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            c_speed[c], c_off[c], np.int32(c_pos_pt[c]), c_avail[c], dispatch,
            seqs[c], lens[c], -1, np.int32(0),
        )
        cost[c] = cc
        n_assigned += lens[c]

    total = np.int64(0)
    for c in range(C):
        total += cost[c]
    if n_assigned == 0:
        return total
    if n_assigned > _LS_MAX_ASSIGNED or C > _LS_MAX_COURIERS:
        raise ValueError(
            "snapshot too large for the swap local search; dispatch in epochs instead"
        )

    # slot s = (courier, position); aord lists assigned orders by slot,
    # aslot inverts it (assigned order -> table column)
    slot_base = np.empty(C, np.int32)
    aord = np.empty(n_assigned, np.int32)
    aslot = np.full(O, -1, np.int32)
    s = 0
    for c in range(C):
        slot_base[c] = s
        for i in range(lens[c]):
            aord[s] = seqs[c, i]
            aslot[seqs[c, i]] = s
            s += 1
    R = np.empty((n_assigned, n_assigned), np.int64)
    for c in range(C):
        _rebuild_r_rows(
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
            seqs, lens, slot_base, aord, R, c,
        )

    pd = np.zeros((C, C), np.int64)
    pi1 = np.empty((C, C), np.int32)
    pi2 = np.empty((C, C), np.int32)
    for a in range(C):
        for b in range(a + 1, C):
            d, i1, i2 = _pair_best_tbl(seqs, lens, slot_base, aslot, R, cost, a, b)
            pd[a, b] = d
            pi1[a, b] = i1
            pi2[a, b] = i2

    while True:
        gbest = np.int64(0)
        ga = -1
        gb = -1
        for a in range(C):
            for b in range(a + 1, C):
                if pd[a, b] < gbest:
                    gbest = pd[a, b]
                    ga = a
                    gb = b
        if ga < 0:
            break
        i1 = pi1[ga, gb]
        i2 = pi2[ga, gb]
        o1 = seqs[ga, i1]
        seqs[ga, i1] = seqs[gb, i2]
        seqs[gb, i2] = o1
        for c in (ga, gb):
            cc, ok = _eval_repl(
                TT3[spi[c]], D, use_tt,
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                c_speed[c], c_off[c], np.int32(c_pos_pt[c]), c_avail[c], dispatch,
                seqs[c], lens[c], -1, np.int32(0),
            )
            cost[c] = cc
        if full_descent == 0:
            break
        for c in (ga, gb):
            _rebuild_r_rows(
                o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
                c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
                seqs, lens, slot_base, aord, R, c,
            )
        for x in range(C):
            if x != ga:
                a = x if x < ga else ga
                b = ga if x < ga else x
                d, i1, i2 = _pair_best_tbl(seqs, lens, slot_base, aslot, R, cost, a, b)
                pd[a, b] = d
                pi1[a, b] = i1
                pi2[a, b] = i2
            if x != gb and x != ga:
                a = x if x < gb else gb
                b = gb if x < gb else x
                d, i1, i2 = _pair_best_tbl(seqs, lens, slot_base, aslot, R, cost, a, b)
                pd[a, b] = d
                pi1[a, b] = i1
                pi2[a, b] = i2

    total = np.int64(0)
    for c in range(C):
        total += cost[c]
    return total


@njit(cache=True, nogil=True)
def _one_iteration(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    alpha, seed, iteration, full_descent, static_mode, full_leg,
    seqs, lens,
):
    """Construct + improve one multi-start round; fills seqs/lens.

    Returns (constructed fulfilled, constructed cost, fulfilled, cost).
    """
    C = c_pos_pt.shape[0]
    lens[:] = 0
    rng_state = seed + np.uint64(iteration)
    _construct(
        o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
        c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
        alpha, rng_state, static_mode, full_leg,
        seqs, lens,
    )
    if static_mode == 1:
        _repair_static(
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
            seqs, lens,
        )
    fulfilled = np.int64(0)
    constructed_cost = np.int64(0)
    for c in range(C):
        fulfilled += lens[c]
        cc, ok = _eval_repl(
            TT3[spi[c]], D, use_tt,
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            c_speed[c], c_off[c], np.int32(c_pos_pt[c]), c_avail[c], dispatch,
            seqs[c], lens[c], -1, np.int32(0),
        )
        constructed_cost += cc
    cost = _local_search(
        o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
        c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
        seqs, lens, full_descent,
    )
    return fulfilled, constructed_cost, fulfilled, cost


@njit(cache=True, nogil=True)
def run_iterations(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    alpha, seed, start, stop, full_descent, static_mode, full_leg,
):
    """Objective statistics for iterations [start, stop): one row per
    iteration, (constructed fulfilled, constructed cost, fulfilled, cost)."""
    C = c_pos_pt.shape[0]
    O = o_rest_pt.shape[0]
    out = np.empty((stop - start, 4), np.int64)
    seqs = np.empty((C, max(O, 1)), np.int32)
    lens = np.zeros(C, np.int32)
    for it in range(start, stop):
        cf, ccost, f, cost = _one_iteration(
            o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
            c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
            alpha, seed, it, full_descent, static_mode, full_leg,
            seqs, lens,
        )
        out[it - start, 0] = cf
        out[it - start, 1] = ccost
        out[it - start, 2] = f
        out[it - start, 3] = cost
    return out


@njit(cache=True, nogil=True)
def extract_solution(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    alpha, seed, iteration, full_descent, static_mode, full_leg,
):
    """Re-run a single iteration and return its sequences (seqs, lens)."""
    C = c_pos_pt.shape[0]
    O = o_rest_pt.shape[0]
    seqs = np.empty((C, max(O, 1)), np.int32)
    lens = np.zeros(C, np.int32)
    _one_iteration(
        o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
        c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
        alpha, seed, iteration, full_descent, static_mode, full_leg,
        seqs, lens,
    )
    return seqs, lens


@njit(cache=True, nogil=True)
def local_search_inplace(
    o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
    c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
    seqs, lens, full_descent,
):
    return _local_search(
        o_rest_pt, o_user_pt, o_ready, o_dead, o_psrv, o_dsrv,
        c_pos_pt, c_avail, c_off, c_speed, spi, TT3, use_tt, D, dispatch,
        seqs, lens, full_descent,
    )
