"""Exact minimum-weight perfect matching on a dense weight matrix.

This is the classic O(n^3) primal-dual blossom algorithm for maximum-weight
matching on a complete graph, specialized to non-negative integer weights,
which is all the decoder needs (defect separations are hop counts).
Minimization is reduced to maximization by reflecting weights about
(max + 1); with strictly positive weights on a complete graph the
maximum-weight matching is perfect.

All state lives in flat preallocated arrays and every traversal is iterative
(numba's cache cannot handle self-recursion), so the solver compiles and
caches cleanly. Scan orders are fixed: identical inputs give identical
matchings.

Node ids are 1-based: 1..n are vertices, ids above n are blossoms, 0 is the
null sentinel. The edge tables (eu, ev, ew) hold, for every pair of surface
nodes, the representative original-vertex edge between them.
"""

import numpy as np
from numba import njit

_INF = np.int64(1) << 60


@njit(cache=True)
def _q_push(x, n, flower, flower_len, queue, qt, pstack):
    """Append vertex x, or every vertex inside blossom x, to the queue."""
    sp = 0
    pstack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = pstack[sp]
        if y <= n:
            queue[qt] = y
            qt += 1
        else:
            for i in range(flower_len[y] - 1, -1, -1):
                pstack[sp] = flower[y, i]
                sp += 1
    return qt


@njit(cache=True)
def _set_st(x, b, n, st, flower, flower_len, pstack):
    sp = 0
    pstack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = pstack[sp]
        st[y] = b
        if y > n:
            for i in range(flower_len[y]):
                pstack[sp] = flower[y, i]
                sp += 1


@njit(cache=True)
def _get_pr(b, xr, flower, flower_len):
    """Position of sub-blossom xr in b's cycle, reversing to make it even."""
    pr = 0
    for i in range(flower_len[b]):
        if flower[b, i] == xr:
            pr = i
            break
    if pr % 2 == 1:
        lo = 1
        hi = flower_len[b] - 1
        while lo < hi:
            t = flower[b, lo]
            flower[b, lo] = flower[b, hi]
            flower[b, hi] = t
            lo += 1
            hi -= 1
        pr = flower_len[b] - pr
    return pr


@njit(cache=True)
def _set_match(u, v, n, match, eu, ev, flower, flower_len, flower_from,
               scratch, work):
    """Match surface node u along the representative edge toward node v."""
    work[0] = u
    work[1] = v
    wp = 1
    while wp > 0:
        wp -= 1
        nd = work[2 * wp]
        tw = work[2 * wp + 1]
        match[nd] = ev[nd, tw]
        if nd > n:
            xr = flower_from[nd, eu[nd, tw]]
            pr = _get_pr(nd, xr, flower, flower_len)
            for i in range(pr):
                work[2 * wp] = flower[nd, i]
                work[2 * wp + 1] = flower[nd, i ^ 1]
                wp += 1
            work[2 * wp] = xr
            work[2 * wp + 1] = tw
            wp += 1
            if pr > 0:
                fl = flower_len[nd]
                for i in range(fl):
                    scratch[i] = flower[nd, (i + pr) % fl]
                for i in range(fl):
                    flower[nd, i] = scratch[i]


@njit(cache=True)
def _augment(u, v, n, match, st, pa, eu, ev, flower, flower_len, flower_from,
             scratch, work):
    while True:
        xnv = st[match[u]]
        _set_match(u, v, n, match, eu, ev, flower, flower_len, flower_from,
                   scratch, work)
        if xnv == 0:
            return
        _set_match(xnv, st[pa[xnv]], n, match, eu, ev, flower, flower_len,
                   flower_from, scratch, work)
        u = st[pa[xnv]]
        v = xnv


@njit(cache=True)
def _get_lca(u, v, st, match, pa, vis, stamp):
    t = stamp
    while u != 0 or v != 0:
        if u != 0:
            if vis[u] == t:
                return u
            vis[u] = t
            u = st[match[u]]
            if u != 0:
                u = st[pa[u]]
        tmp = u
        u = v
        v = tmp
    return 0


@njit(cache=True)
def _update_slack(u, x, lab, ew, eu, ev, slack):
    du = lab[eu[u, x]] + lab[ev[u, x]] - 2 * ew[u, x]
    if slack[x] == 0:
        slack[x] = u
    else:
        s = slack[x]
        if du < lab[eu[s, x]] + lab[ev[s, x]] - 2 * ew[s, x]:
            slack[x] = u


@njit(cache=True)
def _set_slack(x, n, lab, ew, eu, ev, slack, st, s_lab):
    slack[x] = 0
    for u in range(1, n + 1):
        if ew[u, x] > 0 and st[u] != x and s_lab[st[u]] == 0:
            _update_slack(u, x, lab, ew, eu, ev, slack)


@njit(cache=True)
def _add_blossom(u, lca, v, n, n_x, lab, match, slack, st, pa, s_lab, flower,
                 flower_len, flower_from, ew, eu, ev, queue, qt, pstack):
    """Form a new blossom around odd cycle u..lca..v; returns (n_x, qt)."""
    b = n + 1
    while b <= n_x and st[b] != 0:
        b += 1
    if b > n_x:
        n_x += 1
    lab[b] = 0
    s_lab[b] = 0
    match[b] = match[lca]
    flower_len[b] = 1
    flower[b, 0] = lca
    x = u
    while x != lca:
        flower[b, flower_len[b]] = x
        flower_len[b] += 1
        y = st[match[x]]
        flower[b, flower_len[b]] = y
        flower_len[b] += 1
        qt = _q_push(y, n, flower, flower_len, queue, qt, pstack)
        x = st[pa[y]]
    lo = 1
    hi = flower_len[b] - 1
    while lo < hi:
        t = flower[b, lo]
        flower[b, lo] = flower[b, hi]
        flower[b, hi] = t
        lo += 1
        hi -= 1
    x = v
    while x != lca:
        flower[b, flower_len[b]] = x
        flower_len[b] += 1
        y = st[match[x]]
        flower[b, flower_len[b]] = y
        flower_len[b] += 1
        qt = _q_push(y, n, flower, flower_len, queue, qt, pstack)
        x = st[pa[y]]
    _set_st(b, b, n, st, flower, flower_len, pstack)
    for x in range(1, n_x + 1):
        ew[b, x] = 0
        ew[x, b] = 0
    for x in range(1, n + 1):
        flower_from[b, x] = 0
    for i in range(flower_len[b]):
        xs = flower[b, i]
        for x in range(1, n_x + 1):
            if ew[xs, x] > 0 and (
                    ew[b, x] == 0 or
                    lab[eu[xs, x]] + lab[ev[xs, x]] - 2 * ew[xs, x] <
                    lab[eu[b, x]] + lab[ev[b, x]] - 2 * ew[b, x]):
                ew[b, x] = ew[xs, x]
                eu[b, x] = eu[xs, x]
                ev[b, x] = ev[xs, x]
                ew[x, b] = ew[x, xs]
                eu[x, b] = eu[x, xs]
                ev[x, b] = ev[x, xs]
        for x in range(1, n + 1):
            if flower_from[xs, x] != 0:
                flower_from[b, x] = xs
    _set_slack(b, n, lab, ew, eu, ev, slack, st, s_lab)
    return n_x, qt


@njit(cache=True)
def _expand_blossom(b, n, lab, slack, st, pa, s_lab, flower, flower_len,
                    flower_from, ew, eu, ev, queue, qt, pstack):
    """Dissolve T-blossom b whose dual reached zero; returns qt."""
    for i in range(flower_len[b]):
        _set_st(flower[b, i], flower[b, i], n, st, flower, flower_len, pstack)
    xr = flower_from[b, eu[b, pa[b]]]
    pr = _get_pr(b, xr, flower, flower_len)
    i = 0
    while i < pr:
        xs = flower[b, i]
        xns = flower[b, i + 1]
        pa[xs] = eu[xns, xs]
        s_lab[xs] = 1
        s_lab[xns] = 0
        slack[xs] = 0
        _set_slack(xns, n, lab, ew, eu, ev, slack, st, s_lab)
        qt = _q_push(xns, n, flower, flower_len, queue, qt, pstack)
        i += 2
    s_lab[xr] = 1
    pa[xr] = pa[b]
    for i in range(pr + 1, flower_len[b]):
        xs = flower[b, i]
        s_lab[xs] = -1
        _set_slack(xs, n, lab, ew, eu, ev, slack, st, s_lab)
    st[b] = 0
    return qt


@njit(cache=True)
def _on_found_edge(u, v, n, n_x, lab, match, slack, st, pa, s_lab, vis,
                   flower, flower_len, flower_from, ew, eu, ev, queue, qt,
                   pstack, scratch, work, stamp):
    """Process tight edge (u, v); returns (augmented, n_x, qt, stamp)."""
    tu = st[u]
    tv = st[v]
    if tu == tv:
        return False, n_x, qt, stamp
    if s_lab[tv] == -1:
        pa[tv] = u
        s_lab[tv] = 1
        nu = st[match[tv]]
        slack[tv] = 0
        slack[nu] = 0
        s_lab[nu] = 0
        qt = _q_push(nu, n, flower, flower_len, queue, qt, pstack)
    elif s_lab[tv] == 0:
        stamp += 1
        lca = _get_lca(tu, tv, st, match, pa, vis, stamp)
        if lca == 0:
            _augment(tu, tv, n, match, st, pa, eu, ev, flower, flower_len,
                     flower_from, scratch, work)
            _augment(tv, tu, n, match, st, pa, eu, ev, flower, flower_len,
                     flower_from, scratch, work)
            return True, n_x, qt, stamp
        n_x, qt = _add_blossom(tu, lca, tv, n, n_x, lab, match, slack, st,
                               pa, s_lab, flower, flower_len, flower_from,
                               ew, eu, ev, queue, qt, pstack)
    return False, n_x, qt, stamp


@njit(cache=True)
def _solve(n, ew, eu, ev, lab, match, slack, st, pa, s_lab, vis, flower,
           flower_len, flower_from, queue, pstack, scratch, work):
    """Run the full solver; returns 0 on success, -1 if no perfect matching."""
    n_x = n
    stamp = 0
    while True:
        # ---------- start a phase: root every free surface node ----------
        for x in range(1, n_x + 1):
            s_lab[x] = -1
            slack[x] = 0
        qh = 0
        qt = 0
        have_free = False
        for x in range(1, n_x + 1):
            if st[x] == x and match[x] == 0:
                pa[x] = 0
                s_lab[x] = 0
                qt = _q_push(x, n, flower, flower_len, queue, qt, pstack)
                have_free = True
        if not have_free:
            return 0
        augmented = False
        while not augmented:
            # ---------- scan tight edges from queued S-vertices ----------
            while qh < qt and not augmented:
                u = queue[qh]
                qh += 1
                if s_lab[st[u]] == 1:
                    continue
                for v in range(1, n + 1):
                    if ew[u, v] <= 0 or st[u] == st[v]:
                        continue
                    if lab[u] + lab[v] - 2 * ew[u, v] == 0:
                        augmented, n_x, qt, stamp = _on_found_edge(
                            u, v, n, n_x, lab, match, slack, st, pa, s_lab,
                            vis, flower, flower_len, flower_from, ew, eu, ev,
                            queue, qt, pstack, scratch, work, stamp)
                        if augmented:
                            break
                    else:
                        _update_slack(u, st[v], lab, ew, eu, ev, slack)
            if augmented:
                break
            # ---------- dual adjustment ----------
            d = _INF
            for b in range(n + 1, n_x + 1):
                if st[b] == b and s_lab[b] == 1:
                    half = lab[b] // 2
                    if half < d:
                        d = half
            for x in range(1, n_x + 1):
                if st[x] == x and slack[x] != 0:
                    s = slack[x]
                    delta = lab[eu[s, x]] + lab[ev[s, x]] - 2 * ew[s, x]
                    if s_lab[x] == -1:
                        if delta < d:
                            d = delta
                    elif s_lab[x] == 0:
                        half = delta // 2
                        if half < d:
                            d = half
            if d >= _INF:
                return -1
            for u in range(1, n + 1):
                stu = s_lab[st[u]]
                if stu == 0:
                    lab[u] -= d
                    if lab[u] <= 0:
                        return -1
                elif stu == 1:
                    lab[u] += d
            for b in range(n + 1, n_x + 1):
                if st[b] == b:
                    if s_lab[b] == 0:
                        lab[b] += 2 * d
                    elif s_lab[b] == 1:
                        lab[b] -= 2 * d
            # ---------- re-examine now-tight slack edges ----------
            qh = 0
            qt = 0
            top = n_x
            for x in range(1, top + 1):
                if st[x] == x and slack[x] != 0 and st[slack[x]] != x:
                    s = slack[x]
                    if lab[eu[s, x]] + lab[ev[s, x]] - 2 * ew[s, x] == 0:
                        augmented, n_x, qt, stamp = _on_found_edge(
                            eu[s, x], ev[s, x], n, n_x, lab, match, slack,
                            st, pa, s_lab, vis, flower, flower_len,
                            flower_from, ew, eu, ev, queue, qt, pstack,
                            scratch, work, stamp)
                        if augmented:
                            break
            if augmented:
                break
            # ---------- expand exhausted T-blossoms ----------
            for b in range(n + 1, n_x + 1):
                if st[b] == b and s_lab[b] == 1 and lab[b] == 0:
                    qt = _expand_blossom(b, n, lab, slack, st, pa, s_lab,
                                         flower, flower_len, flower_from,
                                         ew, eu, ev, queue, qt, pstack)


def min_weight_perfect_matching(dist):
    """Exact minimum-weight perfect matching of a symmetric integer matrix.

    Parameters
    ----------
    dist : (n, n) array_like of non-negative integers, n even. Diagonal is
        ignored. Entry [i, j] is the cost of pairing i with j.

    Returns
    -------
    mate : (n,) int array, mate[i] = partner of i.
    total : int, summed cost of the matched pairs.
    """
    dist = np.asarray(dist)
    n = dist.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int32), 0
    if n % 2 != 0:
        raise ValueError(f"perfect matching needs an even node count, got {n}")
    if dist.ndim != 2 or dist.shape != (n, n):
        raise ValueError("distance matrix must be square")
    d64 = np.ascontiguousarray(dist, dtype=np.int64)
    if (d64 < 0).any():
        raise ValueError("negative weights are not supported")
    if not np.array_equal(d64, d64.T):
        raise ValueError("distance matrix must be symmetric")

    cap = 2 * n + 2
    wmax = int(d64.max()) if n > 1 else 0
    # reflect weights: strictly positive, so maximum matching is perfect
    ew = np.zeros((cap, cap), dtype=np.int64)
    w = (wmax + 1) - d64
    ew[1:n + 1, 1:n + 1] = w
    np.fill_diagonal(ew[1:n + 1, 1:n + 1], 0)
    idx = np.arange(cap, dtype=np.int32)
    eu = np.repeat(idx[:, None], cap, axis=1).copy()
    ev = np.repeat(idx[None, :], cap, axis=0).copy()
    lab = np.zeros(cap, dtype=np.int64)
    lab[1:n + 1] = wmax + 1
    match = np.zeros(cap, dtype=np.int32)
    slack = np.zeros(cap, dtype=np.int32)
    st = np.zeros(cap, dtype=np.int32)
    st[:n + 1] = np.arange(n + 1, dtype=np.int32)
    pa = np.zeros(cap, dtype=np.int32)
    s_lab = np.full(cap, -1, dtype=np.int8)
    vis = np.zeros(cap, dtype=np.int64)
    flower = np.zeros((cap, n + 2), dtype=np.int32)
    flower_len = np.zeros(cap, dtype=np.int32)
    flower_from = np.zeros((cap, n + 1), dtype=np.int32)
    for u in range(1, n + 1):
        flower_from[u, u] = u
    queue = np.zeros(max(16 * cap, n * n) + 16, dtype=np.int32)
    pstack = np.zeros(4 * cap + 16, dtype=np.int32)
    scratch = np.zeros(n + 2, dtype=np.int32)
    work = np.zeros(8 * n + 32, dtype=np.int32)

    rc = _solve(n, ew, eu, ev, lab, match, slack, st, pa, s_lab, vis, flower,
                flower_len, flower_from, queue, pstack, scratch, work)
    if rc != 0:
        raise RuntimeError("matching solver failed to find a perfect matching")
    mate = match[1:n + 1].astype(np.int32) - 1
    if (mate < 0).any():
        raise RuntimeError("matching solver returned an incomplete matching")
    total = 0
    for i in range(n):
        j = int(mate[i])
        if j > i:
            total += int(d64[i, j])
    return mate, total
