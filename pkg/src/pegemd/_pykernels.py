"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and the same results. The graph arrives in padded form:

``vn[v, :vd[v]]`` are the checks of variable ``v`` and ``cn[c, :cd[c]]`` the
variables of check ``c``.
"""

from collections import deque

import numpy as np


def _lists(nbrs, deg):
    return [row[:d] for row, d in zip(nbrs.tolist(), deg.tolist())]


def bfs(vn, vd, cn, cd, root, root_is_check, skip_v, skip_c, max_dist):
    """Edge distances from ``root`` to every variable and check (-1 = unreached).

    The edge ``(skip_v, skip_c)`` is ignored when ``skip_v >= 0``. Expansion
    stops at ``max_dist`` edges when ``max_dist >= 0``.
    """
    vadj = _lists(vn, vd)
    cadj = _lists(cn, cd)
    vdist = [-1] * len(vadj)
    cdist = [-1] * len(cadj)
    if root_is_check:
        cdist[root] = 0
    else:
        vdist[root] = 0
    queue = deque([(root, bool(root_is_check))])
    while queue:
        node, is_chk = queue.popleft()
        if is_chk:
            d = cdist[node]
            if 0 <= max_dist <= d:
                continue
            for v in cadj[node]:
                if vdist[v] < 0 and not (v == skip_v and node == skip_c):
                    vdist[v] = d + 1
                    queue.append((v, False))
        else:
            d = vdist[node]
            if 0 <= max_dist <= d:
                continue
            for c in vadj[node]:
                if cdist[c] < 0 and not (node == skip_v and c == skip_c):
                    cdist[c] = d + 1
                    queue.append((c, True))
    return np.array(vdist, dtype=np.int32), np.array(cdist, dtype=np.int32)


def peel(vn, vd, cn, cd, erased):
    """BEC peeling decoder. Returns the residual (unrecovered) mask."""
    vadj = _lists(vn, vd)
    cadj = _lists(cn, cd)
    left = [bool(x) for x in np.asarray(erased).tolist()]
    count = [0] * len(cadj)
    xor = [0] * len(cadj)
    for c, nbrs in enumerate(cadj):
        for v in nbrs:
            if left[v]:
                count[c] += 1
                xor[c] ^= v
    stack = [c for c in range(len(cadj)) if count[c] == 1]
    while stack:
        c = stack.pop()
        if count[c] != 1:
            continue
        v = xor[c]
        left[v] = False
        for c2 in vadj[v]:
            count[c2] -= 1
            xor[c2] ^= v
            if count[c2] == 1:
                stack.append(c2)
    return np.array(left, dtype=np.uint8)


def spa(vn, vd, cn, cd, llr, max_iter, early_stop, clamp, want_history):
    """Flooding log-domain sum-product over a batch of frames.

    ``llr`` has shape (frames, n_var). Returns ``(posterior, iterations,
    converged, history)``; ``history[f, t]`` is the hard decision after ``t``
    iterations, with 2 marking a bit whose posterior is exactly zero (empty
    when ``want_history`` is false). A frame converges once every check is
    satisfied and no bit is undecided.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    n_frames, n_var = llr.shape
    n_chk = cd.shape[0]
    dc = int(cd.max()) if n_chk else 0
    dv = int(vd.max()) if n_var else 0
    n_edges = int(cd.sum())

    # edges are numbered check-major; padding slots point at edge n_edges
    slot = np.full((n_chk, max(dc, 1)), n_edges, dtype=np.int64)
    edge_var = np.empty(n_edges, dtype=np.int64)
    var_edges = np.full((n_var, max(dv, 1)), n_edges, dtype=np.int64)
    fill = np.zeros(n_var, dtype=np.int64)
    e = 0
    for c in range(n_chk):
        for k in range(int(cd[c])):
            v = int(cn[c, k])
            slot[c, k] = e
            edge_var[e] = v
            var_edges[v, fill[v]] = e
            fill[v] += 1
            e += 1

    limit = np.tanh(clamp / 2.0)
    post = llr.copy()
    iters = np.zeros(n_frames, dtype=np.int32)
    conv = np.zeros(n_frames, dtype=np.uint8)
    hist = np.zeros((n_frames, max_iter + 1, n_var) if want_history else (0, 0, 0), dtype=np.uint8)

    chk_vars = _pad_var(slot, edge_var, n_var)

    def syndrome_ok(hard):
        bits = np.concatenate([hard, np.zeros((hard.shape[0], 1), dtype=np.uint8)], axis=1)
        return ~np.any(np.bitwise_xor.reduce(bits[:, chk_vars], axis=2), axis=1)

    hard = (post < 0).astype(np.uint8)
    active = np.ones(n_frames, dtype=bool)
    ok = syndrome_ok(hard) & (post != 0).all(axis=1)
    conv[:] = ok
    if want_history:
        hist[:, 0] = np.where(post == 0, 2, hard)
    if early_stop:
        active &= ~ok

    v2c = np.zeros((n_frames, n_edges + 1))
    v2c[:, :n_edges] = llr[:, edge_var]
    c2v = np.zeros((n_frames, n_edges + 1))
    for it in range(1, max_iter + 1):
        if not active.any():
            if want_history:
                hist[:, it:] = hist[:, it - 1 : it]
            break
        idx = np.flatnonzero(active)
        t = np.tanh(v2c[idx] / 2.0)
        t[:, n_edges] = 1.0
        tiles = t[:, slot]
        fwd = np.cumprod(np.concatenate([np.ones(tiles.shape[:2] + (1,)), tiles[:, :, :-1]], axis=2), axis=2)
        rev = tiles[:, :, ::-1]
        bwd = np.cumprod(np.concatenate([np.ones(rev.shape[:2] + (1,)), rev[:, :, :-1]], axis=2), axis=2)[:, :, ::-1]
        prod = fwd * bwd
        sat = np.abs(prod) >= limit
        with np.errstate(divide="ignore"):
            msg = np.where(sat, np.sign(prod) * clamp, 2.0 * np.arctanh(np.where(sat, 0.0, prod)))
        msg = np.clip(msg, -clamp, clamp)
        new_c2v = np.zeros((idx.size, n_edges + 1))
        new_c2v[:, slot.ravel()] = msg.reshape(idx.size, -1)
        new_c2v[:, n_edges] = 0.0
        c2v[idx] = new_c2v
        total = llr[idx] + new_c2v[:, var_edges].sum(axis=2)
        post[idx] = total
        v2c_new = total[:, edge_var] - new_c2v[:, :n_edges]
        v2c[idx, :n_edges] = v2c_new
        hard_a = (total < 0).astype(np.uint8)
        ok_a = syndrome_ok(hard_a) & (total != 0).all(axis=1)
        iters[idx] = it
        conv[idx] = ok_a
        if want_history:
            hist[:, it] = hist[:, it - 1]
            hist[idx, it] = np.where(total == 0, 2, hard_a)
        if early_stop:
            active[idx[ok_a]] = False
    return post, iters, conv, hist


def _pad_var(slot, edge_var, n_var):
    # variable index per (check, slot); padding maps to the zero column n_var
    ext = np.concatenate([edge_var, [n_var]])
    return ext[slot]


def count_cycles(vn, vd, cn, cd, max_len):
    """Simple-cycle counts by length (index = length) up to ``max_len``."""
    n_var = vd.shape[0]
    vadj = _lists(vn, vd)
    cadj = _lists(cn, cd)
    adj = [list(nb) for nb in ([[n_var + c for c in row] for row in vadj])]
    adj += [list(row) for row in cadj]
    n = len(adj)
    counts = [0] * (max_len + 1)
    for s in range(n):
        dist = _restricted_dist(adj, s, max_len)
        on_path = [False] * n
        on_path[s] = True
        stack = [(s, iter(adj[s]))]
        while stack:
            node, it = stack[-1]
            k = len(stack) - 1
            advanced = False
            for w in it:
                if w == s:
                    if k + 1 >= 4:
                        counts[k + 1] += 1
                    continue
                if w < s or on_path[w] or dist[w] < 0 or k + 1 + dist[w] > max_len:
                    continue
                on_path[w] = True
                stack.append((w, iter(adj[w])))
                advanced = True
                break
            if not advanced:
                on_path[node] = node == s
                stack.pop()
    return np.array([c // 2 for c in counts], dtype=np.int64)


def _restricted_dist(adj, s, max_len):
    dist = [-1] * len(adj)
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if dist[u] >= max_len:
            continue
        for w in adj[u]:
            if w > s and dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist
