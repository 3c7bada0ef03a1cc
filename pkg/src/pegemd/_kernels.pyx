# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Signatures and results match ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, atanh, fabs

cnp.import_array()


def bfs(const int[:, ::1] vn, const int[::1] vd, const int[:, ::1] cn, const int[::1] cd,
        int root, bint root_is_check, int skip_v, int skip_c, int max_dist):
    cdef Py_ssize_t n_var = vd.shape[0], n_chk = cd.shape[0]
    vdist_a = np.full(n_var, -1, dtype=np.int32)
    cdist_a = np.full(n_chk, -1, dtype=np.int32)
    cdef int[::1] vdist = vdist_a
    cdef int[::1] cdist = cdist_a
    # queue entries: node id, checks offset by n_var
    cdef cnp.ndarray[cnp.int64_t, ndim=1] qa = np.empty(n_var + n_chk + 1, dtype=np.int64)
    cdef long long[::1] q = qa
    cdef Py_ssize_t head = 0, tail = 0, k
    cdef long long node
    cdef int d, v, c
    if root_is_check:
        cdist[root] = 0
        q[tail] = n_var + root
    else:
        vdist[root] = 0
        q[tail] = root
    tail += 1
    while head < tail:
        node = q[head]
        head += 1
        if node >= n_var:
            c = <int>(node - n_var)
            d = cdist[c]
            if max_dist >= 0 and d >= max_dist:
                continue
            for k in range(cd[c]):
                v = cn[c, k]
                if vdist[v] < 0 and not (v == skip_v and c == skip_c):
                    vdist[v] = d + 1
                    q[tail] = v
                    tail += 1
        else:
            v = <int>node
            d = vdist[v]
            if max_dist >= 0 and d >= max_dist:
                continue
            for k in range(vd[v]):
                c = vn[v, k]
                if cdist[c] < 0 and not (v == skip_v and c == skip_c):
                    cdist[c] = d + 1
                    q[tail] = n_var + c
                    tail += 1
    return vdist_a, cdist_a


def peel(const int[:, ::1] vn, const int[::1] vd, const int[:, ::1] cn, const int[::1] cd,
         erased):
    cdef Py_ssize_t n_var = vd.shape[0], n_chk = cd.shape[0]
    left_a = np.array(erased, dtype=np.uint8, copy=True)
    cdef unsigned char[::1] left = left_a
    cdef int[::1] count = np.zeros(n_chk, dtype=np.int32)
    cdef int[::1] xr = np.zeros(n_chk, dtype=np.int32)
    cdef int[::1] stack = np.empty(n_chk + int(np.asarray(vd).sum()) + 1, dtype=np.int32)
    cdef Py_ssize_t top = 0, k
    cdef int c, c2, v
    for c in range(n_chk):
        for k in range(cd[c]):
            v = cn[c, k]
            if left[v]:
                count[c] += 1
                xr[c] ^= v
        if count[c] == 1:
            stack[top] = c
            top += 1
    while top > 0:
        top -= 1
        c = stack[top]
        if count[c] != 1:
            continue
        v = xr[c]
        left[v] = 0
        for k in range(vd[v]):
            c2 = vn[v, k]
            count[c2] -= 1
            xr[c2] ^= v
            if count[c2] == 1:
                stack[top] = c2
                top += 1
    return left_a


cdef inline bint _syndrome_ok(const int[::1] chk_ptr, const int[::1] edge_var,
                              const unsigned char[::1] hard, Py_ssize_t n_chk) noexcept nogil:
    cdef Py_ssize_t c, e
    cdef unsigned char s
    for c in range(n_chk):
        s = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            s ^= hard[edge_var[e]]
        if s:
            return False
    return True


def spa(const int[:, ::1] vn, const int[::1] vd, const int[:, ::1] cn, const int[::1] cd,
        llr_in, int max_iter, bint early_stop, double clamp, bint want_history):
    llr_a = np.ascontiguousarray(llr_in, dtype=np.float64)
    cdef const double[:, ::1] llr = llr_a
    cdef Py_ssize_t n_frames = llr.shape[0], n_var = llr.shape[1], n_chk = cd.shape[0]
    cdef Py_ssize_t c, k, e, v, f, t
    cdef int it
    chk_ptr_a = np.zeros(n_chk + 1, dtype=np.int32)
    cdef int[::1] chk_ptr = chk_ptr_a
    for c in range(n_chk):
        chk_ptr[c + 1] = chk_ptr[c] + cd[c]
    cdef Py_ssize_t n_edges = chk_ptr[n_chk]
    cdef int[::1] edge_var = np.empty(max(n_edges, 1), dtype=np.int32)
    cdef int[::1] var_ptr = np.zeros(n_var + 1, dtype=np.int32)
    cdef int[::1] var_edges = np.empty(max(n_edges, 1), dtype=np.int32)
    cdef int[::1] fill = np.zeros(n_var, dtype=np.int32)
    for v in range(n_var):
        var_ptr[v + 1] = var_ptr[v] + vd[v]
    for c in range(n_chk):
        for k in range(cd[c]):
            e = chk_ptr[c] + k
            v = cn[c, k]
            edge_var[e] = <int>v
            var_edges[var_ptr[v] + fill[v]] = <int>e
            fill[v] += 1

    post_a = llr_a.copy()
    cdef double[:, ::1] post = post_a
    iters_a = np.zeros(n_frames, dtype=np.int32)
    conv_a = np.zeros(n_frames, dtype=np.uint8)
    cdef int[::1] iters = iters_a
    cdef unsigned char[::1] conv = conv_a
    if want_history:
        hist_a = np.zeros((n_frames, max_iter + 1, n_var), dtype=np.uint8)
    else:
        hist_a = np.zeros((0, 0, 0), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] hist = hist_a

    cdef double[::1] v2c = np.empty(max(n_edges, 1))
    cdef double[::1] c2v = np.empty(max(n_edges, 1))
    cdef double[::1] tv = np.empty(max(n_edges, 1))
    cdef double[::1] fwd = np.empty(max(n_edges, 1) + 1)
    cdef unsigned char[::1] hard = np.empty(max(n_var, 1), dtype=np.uint8)
    cdef double limit = tanh(clamp / 2.0)
    cdef double p, acc, total, m
    cdef bint ok
    cdef Py_ssize_t lo, hi, undecided

    with nogil:
        for f in range(n_frames):
            undecided = 0
            for v in range(n_var):
                hard[v] = 1 if llr[f, v] < 0 else 0
                if llr[f, v] == 0:
                    undecided += 1
            ok = undecided == 0 and _syndrome_ok(chk_ptr, edge_var, hard, n_chk)
            conv[f] = ok
            if want_history:
                for v in range(n_var):
                    hist[f, 0, v] = 2 if llr[f, v] == 0 else hard[v]
            it = 0
            if not (early_stop and ok):
                for e in range(n_edges):
                    v2c[e] = llr[f, edge_var[e]]
                for it in range(1, max_iter + 1):
                    for e in range(n_edges):
                        tv[e] = tanh(v2c[e] / 2.0)
                    for c in range(n_chk):
                        lo = chk_ptr[c]
                        hi = chk_ptr[c + 1]
                        # exclusive products: forward pass stored, backward pass accumulated
                        acc = 1.0
                        for e in range(lo, hi):
                            fwd[e] = acc
                            acc = acc * tv[e]
                        acc = 1.0
                        for e in range(hi - 1, lo - 1, -1):
                            p = fwd[e] * acc
                            acc = acc * tv[e]
                            if fabs(p) >= limit:
                                m = clamp if p > 0 else -clamp
                            else:
                                m = 2.0 * atanh(p)
                                if m > clamp:
                                    m = clamp
                                elif m < -clamp:
                                    m = -clamp
                            c2v[e] = m
                    undecided = 0
                    for v in range(n_var):
                        total = llr[f, v]
                        for k in range(var_ptr[v], var_ptr[v + 1]):
                            total = total + c2v[var_edges[k]]
                        post[f, v] = total
                        hard[v] = 1 if total < 0 else 0
                        if total == 0:
                            undecided += 1
                        for k in range(var_ptr[v], var_ptr[v + 1]):
                            e = var_edges[k]
                            v2c[e] = total - c2v[e]
                    ok = undecided == 0 and _syndrome_ok(chk_ptr, edge_var, hard, n_chk)
                    conv[f] = ok
                    if want_history:
                        for v in range(n_var):
                            hist[f, it, v] = 2 if post[f, v] == 0 else hard[v]
                    if early_stop and ok:
                        break
                else:
                    it = max_iter
            iters[f] = it
            if want_history:
                for t in range(it + 1, max_iter + 1):
                    for v in range(n_var):
                        hist[f, t, v] = hist[f, it, v]
    return post_a, iters_a, conv_a, hist_a


def count_cycles(const int[:, ::1] vn, const int[::1] vd, const int[:, ::1] cn,
                 const int[::1] cd, int max_len):
    cdef Py_ssize_t n_var = vd.shape[0], n_chk = cd.shape[0]
    cdef Py_ssize_t n = n_var + n_chk
    cdef Py_ssize_t u, k, w, s
    # unified CSR adjacency: variables 0..n_var-1, checks n_var..n-1
    cdef long long[::1] ptr = np.zeros(n + 1, dtype=np.int64)
    for u in range(n_var):
        ptr[u + 1] = ptr[u] + vd[u]
    for u in range(n_chk):
        ptr[n_var + u + 1] = ptr[n_var + u] + cd[u]
    cdef int[::1] adj = np.empty(max(ptr[n], 1), dtype=np.int32)
    for u in range(n_var):
        for k in range(vd[u]):
            adj[ptr[u] + k] = <int>(n_var + vn[u, k])
    for u in range(n_chk):
        for k in range(cd[u]):
            adj[ptr[n_var + u] + k] = cn[u, k]

    counts_a = np.zeros(max_len + 1, dtype=np.int64)
    cdef long long[::1] counts = counts_a
    cdef int[::1] dist = np.empty(max(n, 1), dtype=np.int32)
    cdef int[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    cdef unsigned char[::1] on_path = np.zeros(max(n, 1), dtype=np.uint8)
    cdef int[::1] path = np.empty(max_len + 2, dtype=np.int32)
    cdef long long[::1] pos = np.empty(max_len + 2, dtype=np.int64)
    cdef Py_ssize_t head, tail, depth
    cdef int node
    with nogil:
        for s in range(n):
            for u in range(n):
                dist[u] = -1
            dist[s] = 0
            head = 0
            tail = 1
            queue[0] = <int>s
            while head < tail:
                u = queue[head]
                head += 1
                if dist[u] >= max_len:
                    continue
                for k in range(ptr[u], ptr[u + 1]):
                    w = adj[k]
                    if w > s and dist[w] < 0:
                        dist[w] = dist[u] + 1
                        queue[tail] = <int>w
                        tail += 1
            depth = 0
            path[0] = <int>s
            pos[0] = ptr[s]
            on_path[s] = 1
            while depth >= 0:
                node = path[depth]
                if pos[depth] < ptr[node + 1]:
                    w = adj[pos[depth]]
                    pos[depth] += 1
                    if w == s:
                        if depth + 1 >= 4:
                            counts[depth + 1] += 1
                        continue
                    if w < s or on_path[w] or dist[w] < 0 or depth + 1 + dist[w] > max_len:
                        continue
                    depth += 1
                    path[depth] = <int>w
                    pos[depth] = ptr[w]
                    on_path[w] = 1
                else:
                    on_path[node] = 0
                    depth -= 1
    for k in range(max_len + 1):
        counts[k] = counts[k] // 2
    return counts_a
