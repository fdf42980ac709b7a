# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration kernels.

Graphs arrive as two flat int64 arrays over half-edges: ``target[h]`` is the
vertex reached by traversing ``h`` and ``partner[h]`` is the reverse
half-edge. Half-edge ``h`` leaves vertex ``h // degree``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


cdef void _nb_dfs(const i64[::1] target, const i64[::1] partner, Py_ssize_t degree,
                  i64 v, i64 forbid, int depth, int kmax,
                  i64[:, ::1] counts) noexcept nogil:
    cdef Py_ssize_t j
    cdef i64 h, base
    counts[depth, v] += 1
    if depth == kmax:
        return
    base = v * degree
    if depth + 1 == kmax:
        for j in range(degree):
            h = base + j
            if h != forbid:
                counts[kmax, target[h]] += 1
        return
    for j in range(degree):
        h = base + j
        if h != forbid:
            _nb_dfs(target, partner, degree, target[h], partner[h], depth + 1, kmax, counts)


def nb_endpoint_counts(const i64[::1] target, const i64[::1] partner, Py_ssize_t degree,
                       i64 source, int kmax):
    """counts[k, y] = number of non-backtracking paths of length k from source to y."""
    cdef Py_ssize_t n = target.shape[0] // degree
    out = np.zeros((kmax + 1, n), dtype=np.int64)
    cdef i64[:, ::1] counts = out
    with nogil:
        _nb_dfs(target, partner, degree, source, -1, 0, kmax, counts)
    return out


cdef bint _is_periodic(const i64* seq, int length) noexcept nogil:
    cdef int d, i
    cdef bint same
    for d in range(1, length // 2 + 1):
        if length % d:
            continue
        same = True
        for i in range(d, length):
            if seq[i] != seq[i % d]:
                same = False
                break
        if same:
            return True
    return False


cdef void _cycle_dfs(const i64[::1] target, const i64[::1] partner, Py_ssize_t degree,
                     i64* seq, int depth, int kmax, i64 start_vertex,
                     i64[::1] closed, i64[::1] primitive) noexcept nogil:
    # seq[0..depth-1] is a non-backtracking edge sequence starting at seq[0]
    cdef i64 last = seq[depth - 1]
    cdef i64 v = target[last]
    cdef i64 forbid = partner[last]
    cdef Py_ssize_t j
    cdef i64 h, base
    if v == start_vertex and seq[0] != forbid:
        closed[depth] += 1
        if not _is_periodic(seq, depth):
            primitive[depth] += 1
    if depth == kmax:
        return
    base = v * degree
    for j in range(degree):
        h = base + j
        if h != forbid:
            seq[depth] = h
            _cycle_dfs(target, partner, degree, seq, depth + 1, kmax, start_vertex,
                       closed, primitive)


def nb_cycle_counts(const i64[::1] target, const i64[::1] partner, Py_ssize_t degree, int kmax):
    """Exhaustive tailless closed non-backtracking edge sequences.

    Returns ``(closed, primitive)`` indexed by length; a sequence is counted
    once per distinguished starting edge, and ``primitive`` keeps only those
    that are not a repetition of a shorter sequence.
    """
    cdef Py_ssize_t m = target.shape[0]
    closed_arr = np.zeros(kmax + 1, dtype=np.int64)
    prim_arr = np.zeros(kmax + 1, dtype=np.int64)
    seq_arr = np.zeros(kmax + 1, dtype=np.int64)
    cdef i64[::1] closed = closed_arr
    cdef i64[::1] primitive = prim_arr
    cdef i64[::1] seq = seq_arr
    cdef Py_ssize_t e
    if kmax < 1:
        return closed_arr, prim_arr
    with nogil:
        for e in range(m):
            seq[0] = e
            _cycle_dfs(target, partner, degree, &seq[0], 1, kmax, e // degree,
                       closed, primitive)
    return closed_arr, prim_arr


def bfs_distances(const i64[::1] target, Py_ssize_t degree, i64 source):
    """Hop distances from source; -1 marks unreachable vertices."""
    cdef Py_ssize_t n = target.shape[0] // degree
    dist_arr = np.full(n, -1, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] dist = dist_arr
    cdef i64[::1] queue = queue_arr
    with nogil:
        _bfs(target, degree, source, dist, queue)
    return dist_arr


cdef Py_ssize_t _bfs(const i64[::1] target, Py_ssize_t degree, i64 source,
                     i64[::1] dist, i64[::1] queue) noexcept nogil:
    cdef Py_ssize_t head = 0, tail = 1, j
    cdef i64 v, w, dv
    dist[source] = 0
    queue[0] = source
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v] + 1
        for j in range(degree):
            w = target[v * degree + j]
            if dist[w] < 0:
                dist[w] = dv
                queue[tail] = w
                tail += 1
    return tail


def bfs_summary(const i64[::1] target, Py_ssize_t degree, const i64[::1] sources, double radius):
    """Per source: eccentricity, number of vertices farther than radius, reached count.

    Unreachable vertices count as farther than any radius.
    """
    cdef Py_ssize_t n = target.shape[0] // degree
    cdef Py_ssize_t s_count = sources.shape[0]
    ecc_arr = np.zeros(s_count, dtype=np.int64)
    far_arr = np.zeros(s_count, dtype=np.int64)
    reach_arr = np.zeros(s_count, dtype=np.int64)
    dist_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] ecc = ecc_arr
    cdef i64[::1] far = far_arr
    cdef i64[::1] reach = reach_arr
    cdef i64[::1] dist = dist_arr
    cdef i64[::1] queue = queue_arr
    cdef Py_ssize_t s, i, reached
    cdef i64 emax, nfar
    with nogil:
        for s in range(s_count):
            for i in range(n):
                dist[i] = -1
            reached = _bfs(target, degree, sources[s], dist, queue)
            emax = 0
            nfar = n - reached
            for i in range(reached):
                if dist[queue[i]] > emax:
                    emax = dist[queue[i]]
                if dist[queue[i]] > radius:
                    nfar += 1
            ecc[s] = emax
            far[s] = nfar
            reach[s] = reached
    return ecc_arr, far_arr, reach_arr
