"""Pure numpy fallbacks for the compiled kernels in ``_kernels.pyx``.

Same signatures and results; path enumeration proceeds level by level over
explicit path states instead of by recursion, in chunks to bound memory.
"""
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

_CHUNK = 1 << 20


def _expand(target, partner, degree, verts, forbid):
    # every state spawns its degree candidate half-edges; drop the reversal
    hs = (verts[:, None] * degree + np.arange(degree)).ravel()
    keep = hs != np.repeat(forbid, degree)
    hs = hs[keep]
    return target[hs], partner[hs]


def nb_endpoint_counts(target, partner, degree, source, kmax):
    target = np.asarray(target, dtype=np.int64)
    partner = np.asarray(partner, dtype=np.int64)
    n = target.size // degree
    counts = np.zeros((kmax + 1, n), dtype=np.int64)

    def walk(verts, forbid, depth):
        counts[depth] += np.bincount(verts, minlength=n)
        if depth == kmax:
            return
        nv, nf = _expand(target, partner, degree, verts, forbid)
        for lo in range(0, nv.size, _CHUNK):
            walk(nv[lo:lo + _CHUNK], nf[lo:lo + _CHUNK], depth + 1)

    walk(np.array([source], dtype=np.int64), np.array([-1], dtype=np.int64), 0)
    return counts


def _periodic_mask(seqs):
    length = seqs.shape[1]
    mask = np.zeros(seqs.shape[0], dtype=bool)
    for d in range(1, length // 2 + 1):
        if length % d == 0:
            idx = np.arange(length) % d
            mask |= np.all(seqs == seqs[:, idx], axis=1)
    return mask


def nb_cycle_counts(target, partner, degree, kmax):
    target = np.asarray(target, dtype=np.int64)
    partner = np.asarray(partner, dtype=np.int64)
    m = target.size
    closed = np.zeros(kmax + 1, dtype=np.int64)
    primitive = np.zeros(kmax + 1, dtype=np.int64)
    if kmax < 1:
        return closed, primitive
    for e in range(m):
        start_vertex = e // degree
        seqs = np.array([[e]], dtype=np.int64)
        for depth in range(1, kmax + 1):
            last = seqs[:, -1]
            ok = (target[last] == start_vertex) & (seqs[:, 0] != partner[last])
            if ok.any():
                closing = seqs[ok]
                closed[depth] += closing.shape[0]
                primitive[depth] += int(np.count_nonzero(~_periodic_mask(closing)))
            if depth == kmax:
                break
            verts = target[last]
            forbid = partner[last]
            hs = verts[:, None] * degree + np.arange(degree)
            keep = hs != forbid[:, None]
            rows = np.repeat(np.arange(seqs.shape[0]), degree)[keep.ravel()]
            seqs = np.column_stack([seqs[rows], hs.ravel()[keep.ravel()]])
    return closed, primitive


def _csr(target, degree):
    n = target.size // degree
    rows = np.repeat(np.arange(n), degree)
    return csr_matrix((np.ones(target.size), (rows, target)), shape=(n, n))


def _distances(target, degree, sources):
    d = shortest_path(_csr(target, degree), unweighted=True, indices=sources)
    return np.atleast_2d(d)


def bfs_distances(target, degree, source):
    target = np.asarray(target, dtype=np.int64)
    d = _distances(target, degree, [source])[0]
    out = np.full(d.size, -1, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    return out


def bfs_summary(target, degree, sources, radius):
    target = np.asarray(target, dtype=np.int64)
    sources = np.asarray(sources, dtype=np.int64)
    ecc = np.zeros(sources.size, dtype=np.int64)
    far = np.zeros(sources.size, dtype=np.int64)
    reach = np.zeros(sources.size, dtype=np.int64)
    n = target.size // degree
    step = max(1, (1 << 24) // max(n, 1))
    for lo in range(0, sources.size, step):
        d = _distances(target, degree, sources[lo:lo + step])
        finite = np.isfinite(d)
        dd = np.where(finite, d, -1.0)
        ecc[lo:lo + step] = dd.max(axis=1).astype(np.int64)
        reach[lo:lo + step] = finite.sum(axis=1)
        far[lo:lo + step] = (~finite | (d > radius)).sum(axis=1)
    return ecc, far, reach
