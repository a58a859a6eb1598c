"""Numba kernels shared by the search, landscape and estimation code.

Conventions
-----------
``order[k, p]``  job at position p of machine k (the orientation).
``opof[j, k]``   operation of job j on machine k; ``op = j * m + routing position``.
``mprev/mnext``  machine predecessor/successor of every op (-1 at the ends).
``mpos[op]``     position of op in its machine sequence.

A workspace ``ws`` is the tuple returned by :func:`workspace`; kernels
mutate it in place.  Randomness comes from numba's global generator, which
callers seed through :func:`seed`.
"""

import numpy as np
from numba import njit

M1 = np.uint64(0x5555555555555555)
M2 = np.uint64(0x3333333333333333)
M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
H01 = np.uint64(0x0101010101010101)
ONE = np.uint64(1)
U56 = np.uint64(56)

CLOSER, EQUAL, FARTHER = 0, 1, 2


@njit(cache=True)
def seed(s):
    np.random.seed(s)


@njit(cache=True)
def popcount(x):
    x = x - ((x >> ONE) & M1)
    x = (x & M2) + ((x >> np.uint64(2)) & M2)
    x = (x + (x >> np.uint64(4))) & M4
    return np.int64((x * H01) >> U56)


@njit(cache=True)
def hamming(a, b):
    d = 0
    for w in range(a.shape[0]):
        d += popcount(a[w] ^ b[w])
    return d


@njit(cache=True)
def pair_index(n, k, a, b):
    """Bit index of (machine k, jobs a < b)."""
    P = n * (n - 1) // 2
    return k * P + a * (2 * n - a - 1) // 2 + (b - a - 1)


@njit(cache=True)
def pack_bits(order, nwords):
    m, n = order.shape
    bits = np.zeros(nwords, dtype=np.uint64)
    pos = np.empty(n, dtype=np.int64)
    for k in range(m):
        for p in range(n):
            pos[order[k, p]] = p
        for a in range(n - 1):
            for b in range(a + 1, n):
                if pos[a] < pos[b]:
                    idx = pair_index(n, k, a, b)
                    bits[idx >> 6] |= ONE << np.uint64(idx & 63)
    return bits


@njit(cache=True)
def unpack_bits(bits, n, m):
    """Inverse of pack_bits; returns -1 in order[0, 0] when the bits encode
    a cyclic (non-permutation) machine order."""
    order = np.empty((m, n), dtype=np.int64)
    for k in range(m):
        # rank of job a = number of jobs preceding it
        rank = np.zeros(n, dtype=np.int64)
        for a in range(n - 1):
            for b in range(a + 1, n):
                idx = pair_index(n, k, a, b)
                if (bits[idx >> 6] >> np.uint64(idx & 63)) & ONE:
                    rank[b] += 1
                else:
                    rank[a] += 1
        seen = np.zeros(n, dtype=np.bool_)
        for a in range(n):
            r = rank[a]
            if seen[r]:
                order[0, 0] = -1
                return order
            seen[r] = True
            order[k, r] = a
    return order


@njit(cache=True)
def workspace(n, m):
    N = n * m
    heads = np.zeros(N, dtype=np.int64)
    tails = np.zeros(N, dtype=np.int64)
    topo = np.zeros(N, dtype=np.int64)
    indeg = np.zeros(N, dtype=np.int64)
    h2 = np.zeros(N, dtype=np.int64)
    mprev = np.zeros(N, dtype=np.int64)
    mnext = np.zeros(N, dtype=np.int64)
    mpos = np.zeros(N, dtype=np.int64)
    nmax = m * max(n - 1, 1)
    mvk = np.zeros(nmax, dtype=np.int64)
    mvp = np.zeros(nmax, dtype=np.int64)
    mvc = np.zeros(nmax, dtype=np.int64)
    cnt = np.zeros(N, dtype=np.float64)
    path = np.zeros(N, dtype=np.int64)
    return (heads, tails, topo, indeg, h2, mprev, mnext, mpos, mvk, mvp, mvc, cnt, path)


@njit(cache=True)
def set_links(order, opof, ws):
    mprev, mnext, mpos = ws[5], ws[6], ws[7]
    m, n = order.shape
    for k in range(m):
        prev = -1
        for p in range(n):
            op = opof[order[k, p], k]
            mprev[op] = prev
            mpos[op] = p
            if prev >= 0:
                mnext[prev] = op
            prev = op
        mnext[prev] = -1


@njit(cache=True)
def _swap_links(ws, u, v):
    """u immediately precedes v on their machine; make v precede u."""
    mprev, mnext, mpos = ws[5], ws[6], ws[7]
    a = mprev[u]
    b = mnext[v]
    if a >= 0:
        mnext[a] = v
    if b >= 0:
        mprev[b] = u
    mprev[v] = a
    mnext[v] = u
    mprev[u] = v
    mnext[u] = b
    pu = mpos[u]
    mpos[u] = mpos[v]
    mpos[v] = pu


@njit(cache=True)
def _topo_heads(dur, m, ws, heads):
    """Kahn pass filling ``heads``; returns makespan or -1 on a cycle."""
    topo, indeg, mprev, mnext = ws[2], ws[3], ws[5], ws[6]
    N = dur.shape[0]
    qt = 0
    for op in range(N):
        d = 0
        if op % m != 0:
            d += 1
        if mprev[op] >= 0:
            d += 1
        indeg[op] = d
        if d == 0:
            topo[qt] = op
            qt += 1
    qh = 0
    cmax = 0
    while qh < qt:
        u = topo[qh]
        qh += 1
        h = 0
        if u % m != 0:
            h = heads[u - 1] + dur[u - 1]
        mp = mprev[u]
        if mp >= 0:
            x = heads[mp] + dur[mp]
            if x > h:
                h = x
        heads[u] = h
        if h + dur[u] > cmax:
            cmax = h + dur[u]
        if (u + 1) % m != 0:
            indeg[u + 1] -= 1
            if indeg[u + 1] == 0:
                topo[qt] = u + 1
                qt += 1
        v = mnext[u]
        if v >= 0:
            indeg[v] -= 1
            if indeg[v] == 0:
                topo[qt] = v
                qt += 1
    if qt < N:
        return -1
    return cmax


@njit(cache=True)
def longest_paths(dur, m, ws):
    """Heads and tails of the current orientation; returns makespan or -1."""
    heads, tails, topo, mnext = ws[0], ws[1], ws[2], ws[6]
    cmax = _topo_heads(dur, m, ws, heads)
    if cmax < 0:
        return -1
    N = dur.shape[0]
    for idx in range(N - 1, -1, -1):
        u = topo[idx]
        t = 0
        if (u + 1) % m != 0:
            t = dur[u + 1] + tails[u + 1]
        v = mnext[u]
        if v >= 0:
            x = dur[v] + tails[v]
            if x > t:
                t = x
        tails[u] = t
    return cmax


@njit(cache=True)
def swap_cmax(dur, m, ws, u, v):
    """Makespan after swapping adjacent u -> v (state restored afterwards)."""
    _swap_links(ws, u, v)
    c = _topo_heads(dur, m, ws, ws[4])
    _swap_links(ws, v, u)
    return c


@njit(cache=True)
def apply_swap(order, opof, ws, k, p):
    """Swap positions p, p+1 of machine k; returns (job before, job after)
    as they were prior to the swap."""
    a = order[k, p]
    b = order[k, p + 1]
    _swap_links(ws, opof[a, k], opof[b, k])
    order[k, p] = b
    order[k, p + 1] = a
    return a, b


@njit(cache=True)
def is_critical(dur, ws, cmax, u):
    return ws[0][u] + dur[u] + ws[1][u] == cmax


@njit(cache=True)
def n1_moves(order, opof, dur, ws, cmax):
    """Fill ws move buffers with every tight critical machine arc; returns count."""
    heads, tails, mvk, mvp = ws[0], ws[1], ws[8], ws[9]
    m, n = order.shape
    c = 0
    for k in range(m):
        for p in range(n - 1):
            u = opof[order[k, p], k]
            v = opof[order[k, p + 1], k]
            if heads[u] + dur[u] == heads[v] and heads[u] + dur[u] + tails[u] == cmax \
                    and heads[v] + dur[v] + tails[v] == cmax:
                mvk[c] = k
                mvp[c] = p
                c += 1
    return c


@njit(cache=True)
def _tight_succ_ok(dur, ws, cmax, u, v):
    heads, tails = ws[0], ws[1]
    return heads[u] + dur[u] == heads[v] and heads[v] + dur[v] + tails[v] == cmax


@njit(cache=True)
def random_critical_path(dur, m, ws, cmax):
    """Sample a critical path uniformly among all critical paths; returns
    its length, ops written into ws path buffer."""
    heads, tails, topo, mnext, cnt, path = ws[0], ws[1], ws[2], ws[6], ws[11], ws[12]
    N = dur.shape[0]
    for idx in range(N - 1, -1, -1):
        u = topo[idx]
        c = 0.0
        if heads[u] + dur[u] + tails[u] == cmax:
            if tails[u] == 0:
                c = 1.0
            if (u + 1) % m != 0 and _tight_succ_ok(dur, ws, cmax, u, u + 1):
                c += cnt[u + 1]
            v = mnext[u]
            if v >= 0 and _tight_succ_ok(dur, ws, cmax, u, v):
                c += cnt[v]
        cnt[u] = c
    total = 0.0
    for u in range(N):
        if heads[u] == 0:
            total += cnt[u]
    r = np.random.random() * total
    u = -1
    for w in range(N):
        if heads[w] == 0 and cnt[w] > 0.0:
            u = w
            r -= cnt[w]
            if r < 0.0:
                break
    length = 0
    while True:
        path[length] = u
        length += 1
        r = np.random.random() * cnt[u]
        if tails[u] == 0:
            if r < 1.0:
                break
            r -= 1.0
        v = mnext[u]
        job_ok = (u + 1) % m != 0 and _tight_succ_ok(dur, ws, cmax, u, u + 1)
        mach_ok = v >= 0 and _tight_succ_ok(dur, ws, cmax, u, v)
        if job_ok and (r < cnt[u + 1] or not mach_ok):
            u = u + 1
        elif mach_ok:
            u = v
        else:
            break
    return length


@njit(cache=True)
def n5_moves(order, opof, mach, dur, m, ws, cmax):
    """Block-end swaps on one uniformly sampled critical path."""
    mpos, mvk, mvp, path = ws[7], ws[8], ws[9], ws[12]
    L = random_critical_path(dur, m, ws, cmax)
    # block boundaries
    nb = 0
    starts = np.empty(L, dtype=np.int64)
    ends = np.empty(L, dtype=np.int64)
    s = 0
    for i in range(1, L + 1):
        if i == L or mach[path[i]] != mach[path[s]]:
            starts[nb] = s
            ends[nb] = i - 1
            nb += 1
            s = i
    c = 0
    for b in range(nb):
        s = starts[b]
        e = ends[b]
        if e == s:
            continue
        # first block: last pair only; last block: first pair only;
        # interior (or a lone block): both
        want_first = b > 0 or nb == 1
        want_last = b < nb - 1 or nb == 1
        if want_first:
            u = path[s]
            mvk[c] = mach[u]
            mvp[c] = mpos[u]
            c += 1
        if want_last and not (want_first and e - s == 1):
            u = path[e - 1]
            mvk[c] = mach[u]
            mvp[c] = mpos[u]
            c += 1
    return c


@njit(cache=True)
def random_semi_active(n, m, mach, order):
    """Randomized dispatch: repeatedly pick a uniformly random job among
    those with unscheduled operations and append its next operation to its
    machine's sequence."""
    nextpos = np.zeros(n, dtype=np.int64)
    fill = np.zeros(m, dtype=np.int64)
    avail = np.arange(n)
    na = n
    while na > 0:
        i = np.random.randint(0, na)
        j = avail[i]
        k = mach[j * m + nextpos[j]]
        order[k, fill[k]] = j
        fill[k] += 1
        nextpos[j] += 1
        if nextpos[j] == m:
            na -= 1
            avail[i] = avail[na]
            avail[na] = j


@njit(cache=True)
def steepest_descent(order, opof, dur, m, ws):
    """Steepest descent under N1 with uniform tie-breaking; stops when no
    neighbor is strictly better.  Returns (steps, final makespan).  Links in
    ws must match ``order`` on entry."""
    mvk, mvp = ws[8], ws[9]
    steps = 0
    while True:
        cmax = longest_paths(dur, m, ws)
        nm = n1_moves(order, opof, dur, ws, cmax)
        best = cmax
        nt = 0
        chosen = -1
        for i in range(nm):
            k = mvk[i]
            p = mvp[i]
            c = swap_cmax(dur, m, ws, opof[order[k, p], k], opof[order[k, p + 1], k])
            if c < 0:
                continue
            if c < best:
                best = c
                nt = 1
                chosen = i
            elif c == best and chosen >= 0:
                nt += 1
                if np.random.random() * nt < 1.0:
                    chosen = i
        if chosen < 0:
            return steps, cmax
        apply_swap(order, opof, ws, mvk[chosen], mvp[chosen])
        steps += 1


@njit(cache=True)
def random_local_optimum(n, m, mach, opof, dur, order, ws):
    random_semi_active(n, m, mach, order)
    set_links(order, opof, ws)
    return steepest_descent(order, opof, dur, m, ws)[1]


@njit(cache=True)
def random_walk(order, opof, dur, m, ws, steps, flips):
    """Uniform N1 random walk; each applied swap is appended to ``flips``
    as (machine, job before, job after).  Returns steps taken."""
    mvk, mvp = ws[8], ws[9]
    done = 0
    for _ in range(steps):
        cmax = longest_paths(dur, m, ws)
        nm = n1_moves(order, opof, dur, ws, cmax)
        if nm == 0:
            break
        i = np.random.randint(0, nm)
        a, b = apply_swap(order, opof, ws, mvk[i], mvp[i])
        flips[done, 0] = mvk[i]
        flips[done, 1] = a
        flips[done, 2] = b
        done += 1
    return done


# --- tabu search ------------------------------------------------------------

# indices into the scalar state vector
IT, TEN, BEST, CUR, RPOS, RFILL, TRAP, HASH = 0, 1, 2, 3, 4, 5, 6, 7
RING = 200


@njit(cache=True)
def ts_state(cmax):
    st = np.zeros(8, dtype=np.int64)
    st[BEST] = cmax
    st[CUR] = cmax
    return st


@njit(cache=True)
def _ring_push(st, ring, h):
    """Record hash h; returns how often h occurs in the window."""
    ring[st[RPOS]] = h
    st[RPOS] = (st[RPOS] + 1) % RING
    if st[RFILL] < RING:
        st[RFILL] += 1
    c = 0
    for i in range(st[RFILL]):
        if ring[i] == h:
            c += 1
    return c


@njit(cache=True)
def zobrist_hash(order, zob):
    m, n = order.shape
    h = np.uint64(0)
    pos = np.empty(n, dtype=np.int64)
    for k in range(m):
        for p in range(n):
            pos[order[k, p]] = p
        for a in range(n - 1):
            for b in range(a + 1, n):
                if pos[a] < pos[b]:
                    h ^= zob[pair_index(n, k, a, b)]
    return h


@njit(cache=True)
def _flip_hash(n, zob, h, k, a, b):
    if a < b:
        return h ^ zob[pair_index(n, k, a, b)]
    return h ^ zob[pair_index(n, k, b, a)]


@njit(cache=True)
def ts_step(order, opof, mach, dur, ws, tabu, st, params, ring, zob, flips):
    """One tabu-search iteration.

    params = (l_min, l_max, resample_period, use_n5, trap_walk_length).
    ``tabu[k, a, b]`` is the last iteration at which re-establishing
    "a before b" on machine k is forbidden.  Applied swaps are written to
    ``flips``; returns their number (0 when no move is admissible).
    """
    m, n = order.shape
    mvk, mvp, mvc = ws[8], ws[9], ws[10]
    it = st[IT] + 1
    st[IT] = it
    if (it - 1) % params[2] == 0:
        st[TEN] = np.random.randint(params[0], params[1] + 1)
    cmax = longest_paths(dur, m, ws)
    use_n5 = params[3] != 0
    if use_n5:
        nm = n5_moves(order, opof, mach, dur, m, ws, cmax)
    else:
        nm = n1_moves(order, opof, dur, ws, cmax)
    if use_n5 and (nm == 0 or st[TRAP] != 0):
        done = random_walk(order, opof, dur, m, ws, params[4], flips)
        h = np.uint64(st[HASH])
        for i in range(done):
            h = _flip_hash(n, zob, h, flips[i, 0], flips[i, 1], flips[i, 2])
        st[HASH] = np.int64(h)
        st[TRAP] = 0
        st[RFILL] = 0
        st[RPOS] = 0
        c = longest_paths(dur, m, ws)
        st[CUR] = c
        if c < st[BEST]:
            st[BEST] = c
        return done
    best = st[BEST]
    sel = -1
    sel_c = 1 << 62
    sel_tabu = True
    nt = 0
    for i in range(nm):
        k = mvk[i]
        p = mvp[i]
        a = order[k, p]
        b = order[k, p + 1]
        c = swap_cmax(dur, m, ws, opof[a, k], opof[b, k])
        mvc[i] = c
        if c < 0:
            continue
        is_tabu = tabu[k, b, a] >= it
        if is_tabu and c >= best:
            continue
        if c < sel_c or (c == sel_c and sel_tabu and not is_tabu):
            sel = i
            sel_c = c
            sel_tabu = is_tabu
            nt = 1
        elif c == sel_c and is_tabu == sel_tabu:
            nt += 1
            if np.random.random() * nt < 1.0:
                sel = i
    if sel < 0:
        return 0
    k = mvk[sel]
    a, b = apply_swap(order, opof, ws, k, mvp[sel])
    tabu[k, a, b] = it + st[TEN]
    st[CUR] = sel_c
    if sel_c < st[BEST]:
        st[BEST] = sel_c
    flips[0, 0] = k
    flips[0, 1] = a
    flips[0, 2] = b
    if use_n5:
        h = _flip_hash(n, zob, np.uint64(st[HASH]), k, a, b)
        st[HASH] = np.int64(h)
        if _ring_push(st, ring, h) >= 3:
            st[TRAP] = 1
    return 1


@njit(cache=True)
def ts_init(order, opof, dur, m, ws, zob):
    set_links(order, opof, ws)
    cmax = longest_paths(dur, m, ws)
    st = ts_state(cmax)
    st[HASH] = np.int64(zobrist_hash(order, zob))
    return st


@njit(cache=True)
def ts_run(order, opof, mach, dur, target, params, cap, zob):
    """Tabu search until makespan <= target or ``cap`` iterations.
    Returns (iterations, best makespan)."""
    m, n = order.shape
    ws = workspace(n, m)
    tabu = np.zeros((m, n, n), dtype=np.int64)
    ring = np.zeros(RING, dtype=np.uint64)
    flips = np.zeros((max(params[4], 1), 3), dtype=np.int64)
    st = ts_init(order, opof, dur, m, ws, zob)
    while st[CUR] > target and st[IT] < cap:
        ts_step(order, opof, mach, dur, ws, tabu, st, params, ring, zob, flips)
    return st[IT], st[BEST]


@njit(cache=True)
def ts_cost_trials(n, m, mach, opof, dur, target, params, cap, zob, seeds):
    """One tabu run per seed, each from a fresh random local optimum.
    Returns (iterations, best makespan) arrays."""
    T = seeds.shape[0]
    iters = np.zeros(T, dtype=np.int64)
    bests = np.zeros(T, dtype=np.int64)
    order = np.empty((m, n), dtype=np.int64)
    ws = workspace(n, m)
    for t in range(T):
        seed(seeds[t])
        random_local_optimum(n, m, mach, opof, dur, order, ws)
        iters[t], bests[t] = ts_run(order, opof, mach, dur, target, params, cap, zob)
    return iters, bests


# --- distance tracking ------------------------------------------------------

@njit(cache=True)
def init_dist(bits, members, dist):
    best = 1 << 62
    for r in range(members.shape[0]):
        d = 0
        for w in range(bits.shape[0]):
            d += popcount(bits[w] ^ members[r, w])
        dist[r] = d
        if d < best:
            best = d
    return best


@njit(cache=True)
def flip_dist(n, bits, members, dist, k, a, b):
    """Apply the swap (a before b -> b before a on machine k) to ``bits``
    and the member distances; returns the new minimum distance."""
    if a < b:
        idx = pair_index(n, k, a, b)
        newbit = np.uint64(0)
    else:
        idx = pair_index(n, k, b, a)
        newbit = ONE
    w = idx >> 6
    s = np.uint64(idx & 63)
    bits[w] ^= ONE << s
    best = 1 << 62
    for r in range(members.shape[0]):
        if (members[r, w] >> s) & ONE == newbit:
            dist[r] -= 1
        else:
            dist[r] += 1
        if dist[r] < best:
            best = dist[r]
    return best


@njit(cache=True)
def nearest_distance(bits, members):
    best = 1 << 62
    for r in range(members.shape[0]):
        d = 0
        for w in range(bits.shape[0]):
            d += popcount(bits[w] ^ members[r, w])
        if d < best:
            best = d
    return best
