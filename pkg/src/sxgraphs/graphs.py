"""Regular multigraphs as rotation systems.

Half-edge ``h`` belongs to vertex ``h // degree``; ``partner`` is an
involution pairing the two halves of every edge. A fixed point of
``partner`` is a half-loop, a loop that reverses onto itself. A full loop is
two distinct half-edges at the same vertex partnered with each other.
Non-backtracking means never following a half-edge by its partner.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DisconnectedGraphError
from .groups import (
    GeneratorSet, encode_array, matmul_array, prime_modulus,
    projective_normalize_array, sl2_elements_array,
)

GRAPH_FORMAT_VERSION = 1
# convention for self-paired generators, recorded in graph metadata
INVOLUTION_CONVENTION = "one_self_paired_half_edge_per_vertex"


@dataclass(frozen=True, eq=False)
class RegularMultigraph:
    n: int
    degree: int
    partner: np.ndarray
    labels: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        partner = np.ascontiguousarray(self.partner, dtype=np.int64)
        partner.setflags(write=False)
        object.__setattr__(self, "partner", partner)
        if self.labels is not None:
            labels = np.ascontiguousarray(self.labels, dtype=np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)
        self.validate()
        target = self.origin[partner]
        target.setflags(write=False)
        object.__setattr__(self, "target", target)

    @property
    def q(self) -> int:
        return self.degree - 1

    @property
    def m(self) -> int:
        """Number of half-edges (directed edges), n * degree."""
        return self.n * self.degree

    @property
    def origin(self) -> np.ndarray:
        return np.arange(self.m, dtype=np.int64) // self.degree

    def validate(self):
        if self.n < 1 or self.degree < 1:
            raise ValueError("graph needs at least one vertex and degree >= 1")
        p = self.partner
        if p.shape != (self.m,):
            raise ValueError(f"partner has length {p.size}, expected n*degree = {self.m}")
        if p.min() < 0 or p.max() >= self.m:
            raise ValueError("partner index out of range")
        if not np.array_equal(p[p], np.arange(self.m)):
            raise ValueError("partner is not an involution")
        if self.labels is not None and self.labels.shape != (self.m,):
            raise ValueError("labels must have one entry per half-edge")

    def neighbors(self, v: int) -> np.ndarray:
        return self.target[v * self.degree:(v + 1) * self.degree]

    @property
    def half_loops(self) -> int:
        return int(np.count_nonzero(self.partner == np.arange(self.m)))

    @property
    def full_loops(self) -> int:
        h = np.arange(self.m)
        loops = (self.target == self.origin) & (self.partner != h)
        return int(np.count_nonzero(loops)) // 2

    def adjacency(self) -> np.ndarray:
        """Dense (unnormalized) adjacency: entry (v, w) counts half-edges v -> w."""
        a = np.zeros((self.n, self.n))
        np.add.at(a, (self.origin, self.target), 1.0)
        return a

    def apply_adjacency(self, f: np.ndarray) -> np.ndarray:
        """Normalized adjacency A f, for a vector or a column-stacked matrix."""
        f = np.asarray(f, dtype=float)
        g = f[self.target]
        g = g.reshape((self.n, self.degree) + f.shape[1:])
        return g.sum(axis=1) / self.degree

    def to_json(self) -> dict:
        return {
            "version": GRAPH_FORMAT_VERSION,
            "n": self.n,
            "degree": self.degree,
            "origin": self.origin.tolist(),
            "partner": self.partner.tolist(),
            "labels": None if self.labels is None else self.labels.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data) -> RegularMultigraph:
        if isinstance(data, str):
            data = json.loads(data)
        if data.get("version") != GRAPH_FORMAT_VERSION:
            raise ValueError(f"unsupported graph format version {data.get('version')!r}")
        n, degree = int(data["n"]), int(data["degree"])
        partner = np.asarray(data["partner"], dtype=np.int64)
        labels = data.get("labels")
        labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        origin = np.asarray(data.get("origin", np.arange(n * degree) // degree), dtype=np.int64)
        if origin.shape != partner.shape:
            raise ValueError("origin and partner lengths differ")
        if np.bincount(origin, minlength=n).tolist() != [degree] * n:
            raise ValueError("every vertex must own exactly `degree` half-edges")
        # relabel half-edges so vertex v owns the block [v*degree, (v+1)*degree)
        order = np.argsort(origin, kind="stable")
        new_index = np.empty_like(order)
        new_index[order] = np.arange(order.size)
        partner = new_index[partner[order]]
        if labels is not None:
            labels = labels[order]
        return cls(n, degree, partner, labels, dict(data.get("meta") or {}))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> RegularMultigraph:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def from_edge_list(n: int, degree: int, edges, half_loops=(), meta=None) -> RegularMultigraph:
    """Build a rotation system from an edge list.

    ``edges`` are vertex pairs (a pair (v, v) is a full loop using two of v's
    half-edges); ``half_loops`` lists vertices carrying a half-loop. Half-edges
    are assigned to each vertex in order of appearance.
    """
    partner = np.full(n * degree, -1, dtype=np.int64)
    used = [0] * n

    def take(v):
        if used[v] >= degree:
            raise ValueError(f"vertex {v} has more than {degree} half-edges")
        h = v * degree + used[v]
        used[v] += 1
        return h

    for u, v in edges:
        hu = take(u)
        hv = take(v)
        partner[hu], partner[hv] = hv, hu
    for v in half_loops:
        h = take(v)
        partner[h] = h
    if used != [degree] * n:
        raise ValueError("graph is not regular of the requested degree")
    return RegularMultigraph(n, degree, partner, meta=dict(meta or {}))


def _group_graph(elements: np.ndarray, gens: GeneratorSet, act, meta) -> RegularMultigraph:
    """Half-edge (x, i) is partnered with (s_i x, pairing[i]); x ranges over ``elements``."""
    n, d = elements.shape[0], gens.degree
    t = gens.t
    codes = encode_array(elements, t) if elements.ndim == 2 and elements.shape[1] == 4 else elements
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    partner = np.empty((n, d), dtype=np.int64)
    gen_arr = gens.array()
    pairing = np.asarray(gens.inverse_pairing)
    for i in range(d):
        image = act(gen_arr[i], elements)
        pos = np.searchsorted(sorted_codes, image)
        if np.any(pos >= n) or np.any(sorted_codes[np.minimum(pos, n - 1)] != image):
            raise ValueError("element set is not closed under the generators")
        partner[:, i] = order[pos] * d + pairing[i]
    labels = np.tile(np.arange(d), n)
    return RegularMultigraph(n, d, partner.ravel(), labels, meta)


def group_elements_closure(gens: GeneratorSet) -> np.ndarray:
    """Elements reachable from the identity under ``gens``, sorted lexicographically."""
    t = gens.t
    normalize = gens.group != "SL2"
    ident = np.array([[1, 0, 0, 1]], dtype=np.int64)
    seen = {int(encode_array(ident, t)[0])}
    frontier = ident
    found = [ident]
    gen_arr = gens.array()
    while frontier.size:
        new = []
        for s in gen_arr:
            img = matmul_array(s, frontier, t)
            if normalize:
                img = projective_normalize_array(img, t)
            new.append(img)
        new = np.concatenate(new)
        codes = encode_array(new, t)
        _, first = np.unique(codes, return_index=True)
        fresh = [i for i in first if int(codes[i]) not in seen]
        seen.update(int(codes[i]) for i in fresh)
        frontier = new[fresh]
        if frontier.size:
            found.append(frontier)
    out = np.concatenate(found)
    return out[np.argsort(encode_array(out, t), kind="stable")]


def cayley_graph(elements, gens: GeneratorSet, meta=None) -> RegularMultigraph:
    """Cayley graph with vertex set ``elements`` (an (N, 4) residue array).

    ``elements`` defaults to all of SL2(F_t) in lexicographic order when
    ``None``; for projective generator sets it defaults to the generated group.
    """
    t = gens.t
    if elements is None:
        elements = sl2_elements_array(t) if gens.group == "SL2" else group_elements_closure(gens)
    elements = np.asarray([e.as_tuple() if hasattr(e, "as_tuple") else e for e in elements],
                          dtype=np.int64).reshape(-1, 4)
    normalize = gens.group != "SL2"

    def act(s, xs):
        img = matmul_array(s, xs, t)
        if normalize:
            img = projective_normalize_array(img, t)
        return encode_array(img, t)

    info = {"family": "cayley", "t": t, "generators": gens.label, "group": gens.group,
            "involutions": INVOLUTION_CONVENTION}
    info.update(meta or {})
    return _group_graph(elements, gens, act, info)


def cayley_sl2(t, gens: GeneratorSet) -> RegularMultigraph:
    return cayley_graph(None, gens, {"family": "cayley_sl2"})


def projective_points_array(t: int) -> np.ndarray:
    """P1(F_t) as (t+1, 2) canonical pairs: (0, 1), (1, 0), ..., (1, t-1)."""
    ys = np.arange(t, dtype=np.int64)
    return np.concatenate([[[0, 1]], np.stack([np.ones(t, dtype=np.int64), ys], axis=1)])


def point_index_array(x, y, t):
    """Canonical index of projective points given as vector arrays."""
    x = np.asarray(x, dtype=np.int64) % t
    y = np.asarray(y, dtype=np.int64) % t
    inv = np.zeros(t, dtype=np.int64)
    inv[1:] = [pow(int(v), -1, t) for v in range(1, t)]
    if np.any((x == 0) & (y == 0)):
        raise ValueError("zero vector is not a projective point")
    return np.where(x != 0, 1 + y * inv[x] % t, 0)


def schreier_graph(t, gens: GeneratorSet) -> RegularMultigraph:
    """Schreier graph of the generator action on P1(F_t).

    Vertex order is :func:`sxgraphs.groups.projective_line` order. Loops appear
    exactly where a generator fixes a point.
    """
    t = prime_modulus(t)
    if gens.t != t:
        raise ValueError("generator modulus differs from t")
    pts = projective_points_array(t)
    n, d = t + 1, gens.degree
    gen_arr = gens.array()
    pairing = np.asarray(gens.inverse_pairing)
    partner = np.empty((n, d), dtype=np.int64)
    for i in range(d):
        a, b, c, dd = gen_arr[i]
        img = point_index_array(a * pts[:, 0] + b * pts[:, 1], c * pts[:, 0] + dd * pts[:, 1], t)
        partner[:, i] = img * d + pairing[i]
    labels = np.tile(np.arange(d), n)
    meta = {"family": "schreier_p1", "t": t, "generators": gens.label,
            "involutions": INVOLUTION_CONVENTION}
    return RegularMultigraph(n, d, partner.ravel(), labels, meta)


def random_regular(n: int, degree: int, seed) -> RegularMultigraph:
    """Configuration model: a uniform perfect matching of the n*degree stubs.

    Loops and multi-edges are kept.
    """
    if n < 1 or degree < 1:
        raise ValueError("need n >= 1 and degree >= 1")
    if (n * degree) % 2:
        raise ValueError(f"n*degree = {n * degree} must be even")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n * degree)
    partner = np.empty(n * degree, dtype=np.int64)
    partner[perm[0::2]] = perm[1::2]
    partner[perm[1::2]] = perm[0::2]
    return RegularMultigraph(n, degree, partner,
                             meta={"family": "random_regular", "n": n, "degree": degree,
                                   "seed": seed})


def cycle_graph(n: int) -> RegularMultigraph:
    return from_edge_list(n, 2, [(i, (i + 1) % n) for i in range(n)],
                          meta={"family": "preset", "name": f"cycle_{n}"})


def preset_graph(name: str) -> RegularMultigraph:
    if name == "complete_k4":
        edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        return from_edge_list(4, 3, edges, meta={"family": "preset", "name": name})
    if name == "petersen":
        edges = [(i, (i + 1) % 5) for i in range(5)]
        edges += [(i, i + 5) for i in range(5)]
        edges += [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
        return from_edge_list(10, 3, edges, meta={"family": "preset", "name": name})
    if name == "two_vertex_triple":
        return from_edge_list(2, 3, [(0, 1)] * 3, meta={"family": "preset", "name": name})
    match = re.fullmatch(r"cycle_(\d+)", name)
    if match and int(match.group(1)) >= 3:
        return cycle_graph(int(match.group(1)))
    raise ValueError(f"unknown preset graph {name!r}")


def disjoint_union(graphs, meta=None) -> RegularMultigraph:
    degrees = {g.degree for g in graphs}
    if len(degrees) != 1:
        raise ValueError("all parts must have the same degree")
    parts, offset = [], 0
    for g in graphs:
        parts.append(g.partner + offset)
        offset += g.m
    n = sum(g.n for g in graphs)
    return RegularMultigraph(n, degrees.pop(), np.concatenate(parts), meta=dict(meta or {}))


# ---------------------------------------------------------------------------
# BFS geometry

@dataclass(frozen=True)
class DistanceField:
    source: int
    dist: np.ndarray  # -1 marks unreachable

    @property
    def reachable(self) -> bool:
        return bool(np.all(self.dist >= 0))


def bfs_distances(g: RegularMultigraph, source: int) -> DistanceField:
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} out of range")
    return DistanceField(int(source), kernels.bfs_distances(g.target, g.degree, int(source)))


def is_connected(g: RegularMultigraph) -> bool:
    return bfs_distances(g, 0).reachable


@dataclass(frozen=True)
class Bipartition:
    bipartite: bool
    coloring: np.ndarray | None
    odd_walk: list | None  # closed walk of odd length, as vertices, when not bipartite


def is_bipartite(g: RegularMultigraph) -> Bipartition:
    field_ = bfs_distances(g, 0)
    if not field_.reachable:
        raise DisconnectedGraphError("bipartiteness check needs a connected graph")
    dist = field_.dist
    color = dist % 2
    bad = np.flatnonzero(color[g.origin] == color[g.target])
    if bad.size == 0:
        return Bipartition(True, color, None)
    h = int(bad[0])
    u, v = int(g.origin[h]), int(g.target[h])
    walk = _path_to_root(g, dist, u)[::-1] + _path_to_root(g, dist, v)
    return Bipartition(False, None, walk)


def _path_to_root(g, dist, v):
    path = [v]
    while dist[v] > 0:
        nb = g.neighbors(v)
        v = int(nb[np.flatnonzero(dist[nb] == dist[v] - 1)[0]])
        path.append(v)
    return path


def eccentricities(g: RegularMultigraph, sources=None) -> np.ndarray:
    srcs = np.arange(g.n, dtype=np.int64) if sources is None else np.asarray(sources, dtype=np.int64)
    ecc, _, reach = kernels.bfs_summary(g.target, g.degree, srcs, float(g.n))
    if np.any(reach < g.n):
        raise DisconnectedGraphError("graph is disconnected")
    return ecc


def diameter(g: RegularMultigraph) -> int:
    return int(eccentricities(g).max())
