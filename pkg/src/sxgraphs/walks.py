"""Simple random walks: distributions, tree sphere coefficients, cutoff profiles and geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DisconnectedGraphError
from .graphs import RegularMultigraph, is_bipartite

TARGETS = ("pi", "pi_bipartite_adjusted")


def rw_distribution(g: RegularMultigraph, x0: int, k: int) -> np.ndarray:
    """A^k delta_x0: law of the simple random walk after k steps."""
    if k < 0:
        raise ValueError("k must be non-negative")
    f = np.zeros(g.n)
    f[x0] = 1.0
    for _ in range(k):
        f = g.apply_adjacency(f)
    return f


def rw_distributions(g: RegularMultigraph, x0: int, k_max: int):
    """Yield (k, A^k delta_x0) for k = 0..k_max."""
    f = np.zeros(g.n)
    f[x0] = 1.0
    yield 0, f
    for k in range(1, k_max + 1):
        f = g.apply_adjacency(f)
        yield k, f


@dataclass(frozen=True)
class TreeCoefficients:
    k: int
    alpha: np.ndarray  # alpha[i] weights the sphere operator A_i in A^k

    def drift(self) -> float:
        return float(np.dot(np.arange(self.k + 1), self.alpha))


def tree_coefficients(q: int, k: int) -> TreeCoefficients:
    """A^k = sum_i alpha_i A_i, the radial law of a walk on the (q+1)-regular tree."""
    if k < 0:
        raise ValueError("k must be non-negative")
    alpha = np.zeros(k + 1)
    alpha[0] = 1.0
    out = 1.0 / (q + 1)
    for step in range(k):
        new = np.zeros(k + 1)
        new[1] += alpha[0]
        new[2:step + 2] += alpha[1:step + 1] * (q * out)
        new[0:step] += alpha[1:step + 1] * out
        alpha = new
    return TreeCoefficients(k, alpha)


def stationary_target(g: RegularMultigraph, x0: int, k: int, kind: str,
                      coloring=None) -> np.ndarray:
    """pi, or pi + (-1)^k pi_- for bipartite graphs.

    pi_- is the projection of delta_x0 onto the -1 eigenvector: +1/n on the
    source's side and -1/n on the other, so the adjusted target puts mass
    2/n on the side the walk occupies after k steps.
    """
    pi = np.full(g.n, 1.0 / g.n)
    if kind == "pi":
        return pi
    if kind != "pi_bipartite_adjusted":
        raise ConfigError(f"unknown target {kind!r}")
    if coloring is None:
        return pi
    sigma = np.where(coloring == coloring[x0], 1.0, -1.0)
    return pi + (-1) ** k * sigma / g.n


@dataclass(frozen=True)
class WalkProfile:
    source: int
    ks: np.ndarray
    l1: np.ndarray
    target_kind: str

    @property
    def tv(self) -> np.ndarray:
        return self.l1 / 2

    def at(self, k: int) -> float:
        idx = np.flatnonzero(self.ks == k)
        if idx.size == 0:
            raise KeyError(k)
        return float(self.l1[idx[0]])

    def rows(self):
        return [(self.source, int(k), float(d), float(d) / 2) for k, d in zip(self.ks, self.l1)]


def cutoff_profile(g: RegularMultigraph, x0: int, k_range, target: str = "pi") -> WalkProfile:
    """L1 distance of A^k delta_x0 to the target for each k in k_range."""
    ks = np.array(sorted(set(int(k) for k in k_range)), dtype=np.int64)
    if ks.size == 0:
        raise ValueError("empty k range")
    if target not in TARGETS:
        raise ConfigError(f"unknown target {target!r}")
    bip = is_bipartite(g)  # raises on disconnected graphs
    if bip.bipartite and target == "pi":
        raise ConfigError("bipartite graph: the plain pi target never converges; "
                          "use pi_bipartite_adjusted")
    wanted = set(ks.tolist())
    l1 = []
    for k, f in rw_distributions(g, x0, int(ks[-1])):
        if k in wanted:
            tgt = stationary_target(g, x0, k, target, bip.coloring if bip.bipartite else None)
            l1.append(float(np.abs(f - tgt).sum()))
    return WalkProfile(int(x0), ks, np.array(l1), target)


def cutoff_window(profile: WalkProfile, hi: float = 1.8, lo: float = 0.2):
    """(largest k with l1 >= hi, smallest k with l1 <= lo)."""
    above = profile.ks[profile.l1 >= hi]
    below = profile.ks[profile.l1 <= lo]
    if above.size == 0 or below.size == 0:
        raise ValueError(f"profile does not cross both thresholds {hi} and {lo} in range")
    return int(above.max()), int(below.min())


def cutoff_center(q: int, n: int) -> float:
    """(q+1)/(q-1) log_q n."""
    return (q + 1) / (q - 1) * math.log(n) / math.log(q)


@dataclass(frozen=True)
class GeometryReport:
    source: int
    radius_threshold: float
    far_count: int
    diameter_bound_chung: int | None


def almost_diameter_stats(g: RegularMultigraph, eps: float, sources=None,
                          chung_bound: int | None = None) -> dict:
    """far_count = #{y : d(x0, y) > (1+eps) log_q n} for each source, with quantiles."""
    if g.q < 2:
        raise ValueError("almost-diameter statistics need q >= 2 (log base q)")
    radius = (1 + eps) * math.log(g.n) / math.log(g.q)
    srcs = np.arange(g.n, dtype=np.int64) if sources is None else np.asarray(sources, dtype=np.int64)
    _, far, reach = kernels.bfs_summary(g.target, g.degree, srcs, float(radius))
    if np.any(reach < g.n):
        raise DisconnectedGraphError("almost-diameter statistics need a connected graph")
    reports = [GeometryReport(int(x), radius, int(f), chung_bound) for x, f in zip(srcs, far)]
    frac = far / g.n
    return {
        "n": g.n, "eps": eps, "radius": radius, "reports": reports,
        "median_fraction": float(np.median(frac)),
        "quantiles": {str(p): float(np.quantile(frac, p)) for p in (0.1, 0.5, 0.9, 1.0)},
    }


def chung_diameter_bound(lam: float, n: int) -> int:
    """floor(acosh(n-1)/acosh(1/lambda)) + 1 for the largest nontrivial |lambda|."""
    if lam >= 1:
        raise ValueError("no spectral gap: the bound is undefined for lambda >= 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return math.floor(math.acosh(n - 1) / math.acosh(1 / lam)) + 1


def nontrivial_lambda(values, bipartite: bool) -> float:
    """Largest |lambda| over the spectrum with the trivial +1 (and -1 if bipartite) removed."""
    vals = np.sort(np.asarray(values))[::-1][1:]
    if bipartite:
        vals = vals[:-1]
    return float(np.max(np.abs(vals))) if vals.size else 0.0
