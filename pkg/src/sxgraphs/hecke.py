"""Hecke operators, exact non-backtracking path counts and the density/path equivalence."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BudgetExceeded
from .graphs import RegularMultigraph, cayley_graph, schreier_graph
from .groups import GeneratorSet, matmul_array
from .spectral import (
    DEFAULT_DENSE_LIMIT, Spectrum, eigenvalues, lambda_k_array, partial_sum_statistic,
    spectral_path_total,
)

DEFAULT_PATH_BUDGET = 10 ** 7
DEFAULT_EPS_GRID = (0.0, 0.05, 0.1)


def _nb_paths_total(q: int, k: int) -> int:
    """(q+1) q^(k-1) non-backtracking paths of length k leave every vertex."""
    return 1 if k == 0 else (q + 1) * q ** (k - 1)


def hecke_sequence(g: RegularMultigraph, f, k_max: int):
    """Yield A_0 f, A_1 f, ..., A_{k_max} f."""
    f = np.asarray(f, dtype=float)
    q = g.q
    prev = f
    yield prev
    if k_max == 0:
        return
    cur = g.apply_adjacency(f)
    yield cur
    for _ in range(1, k_max):
        prev, cur = cur, ((q + 1) * g.apply_adjacency(cur) - prev) / q
        yield cur


def hecke_apply(g: RegularMultigraph, k: int, f) -> np.ndarray:
    if k < 0:
        raise ValueError("k must be non-negative")
    for out in hecke_sequence(g, f, k):
        pass
    return out


def _check_budget(g, k, budget):
    paths = _nb_paths_total(g.q, k)
    if paths > budget:
        raise BudgetExceeded(f"(q+1)q^(k-1) = {paths} paths per source exceeds budget {budget}")


def nb_path_counts(g: RegularMultigraph, x0: int, k_max: int,
                   budget: int = DEFAULT_PATH_BUDGET) -> np.ndarray:
    """counts[k, y]: non-backtracking paths of length k from x0 to y, by enumeration."""
    _check_budget(g, k_max, budget)
    return kernels.nb_endpoint_counts(g.target, g.partner, g.degree, int(x0), int(k_max))


def nb_paths_brute(g: RegularMultigraph, k: int, x0: int, y0: int | None = None,
                   budget: int = DEFAULT_PATH_BUDGET) -> int:
    """Exact number of non-backtracking paths of length k from x0 to y0 (default x0)."""
    y0 = x0 if y0 is None else y0
    return int(nb_path_counts(g, x0, k, budget)[k, y0])


def closed_path_table(g: RegularMultigraph, k_max: int, budget: int = DEFAULT_PATH_BUDGET,
                      sources=None, threads: int = 1) -> np.ndarray:
    """table[k, x] = P(X, k, x) for the given sources (all vertices by default)."""
    _check_budget(g, k_max, budget)
    srcs = range(g.n) if sources is None else sources

    def one(x):
        return kernels.nb_endpoint_counts(g.target, g.partner, g.degree, int(x), int(k_max))[:, x]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            cols = list(pool.map(one, srcs))
    else:
        cols = [one(x) for x in srcs]
    return np.stack(cols, axis=1)


def path_count_spectral(s: Spectrum, k: int) -> float:
    return spectral_path_total(s, k)


@dataclass(frozen=True)
class PathCountReport:
    k: int
    per_vertex: np.ndarray
    total: int
    spectral_total: float | None
    method: str

    @property
    def delta(self) -> float | None:
        if self.spectral_total is None:
            return None
        return abs(self.total - self.spectral_total)

    def agrees(self, rtol: float = 1e-6) -> bool:
        return self.delta is not None and self.delta <= rtol * max(1.0, self.total)

    def summary(self) -> dict:
        return {"k": self.k, "total": self.total, "spectral_total": self.spectral_total,
                "delta": self.delta, "budget_hit": False}

    def rows(self):
        """(k, vertex, count) per vertex."""
        return [(self.k, v, int(c)) for v, c in enumerate(self.per_vertex)]


def path_count_reports(g: RegularMultigraph, k_max: int, spectrum: Spectrum | None = None,
                       budget: int = DEFAULT_PATH_BUDGET, threads: int = 1):
    """Brute-force closed path counts for k = 0..k_max, with spectral totals when given."""
    table = closed_path_table(g, k_max, budget, threads=threads)
    reports = []
    for k in range(k_max + 1):
        spec = None if spectrum is None else path_count_spectral(spectrum, k)
        reports.append(PathCountReport(k, table[k], int(table[k].sum()), spec,
                                       "brute" if spectrum is None else "both"))
    return reports


def _log_q(x, q):
    return math.log(x) / math.log(q)


def top_even_length(n: int, q: int, A: float) -> int:
    """k = 2 floor(A log_q n)."""
    if q < 2:
        raise ValueError("density checks need q >= 2 (log base q)")
    return 2 * math.floor(A * _log_q(n, q) + 1e-12)


def path_totals(g: RegularMultigraph, ks, spectrum: Spectrum | None = None,
                budget: int = DEFAULT_PATH_BUDGET, dense_limit: int = DEFAULT_DENSE_LIMIT):
    """P(X, k) for each k: brute force within budget, otherwise spectral."""
    ks = list(ks)
    out = {}
    k_max = max(ks) if ks else 0
    if _nb_paths_total(g.q, k_max) * g.n <= 20 * budget:
        table = closed_path_table(g, k_max, budget)
        for k in ks:
            out[k] = (float(table[k].sum()), "brute")
        return out
    if spectrum is None:
        spectrum = eigenvalues(g, dense_limit)
    for k in ks:
        out[k] = (spectral_path_total(spectrum, k), "spectral")
    return out


@dataclass(frozen=True)
class WitnessReport:
    n: int
    q: int
    A: float
    k_top: int
    eps_grid: tuple
    rows: list = field(default_factory=list)  # dicts: k, P, method, even, C[eps]

    def constant(self, eps: float = 0.0, k: int | None = None) -> float:
        """Witness constant at the top even length (or at k)."""
        k = self.k_top if k is None else k
        for row in self.rows:
            if row["k"] == k:
                return row["C"][eps]
        raise KeyError(k)

    def max_even_constant(self, eps: float = 0.0) -> float:
        vals = [r["C"][eps] for r in self.rows if r["even"] and r["k"] > 0]
        return max(vals) if vals else 0.0


def weak_injective_radius_check(g: RegularMultigraph, A: float, eps_grid=DEFAULT_EPS_GRID,
                                spectrum: Spectrum | None = None,
                                budget: int = DEFAULT_PATH_BUDGET,
                                dense_limit: int = DEFAULT_DENSE_LIMIT) -> WitnessReport:
    """C(k, eps) = P(X, k)/(n^(1+eps) q^(k/2)) for 1 <= k <= 2 floor(A log_q n).

    Odd lengths are reported with ``even = False``; only even lengths carry
    the equivalence with eigenvalue density.
    """
    n, q = g.n, g.q
    k_top = top_even_length(n, q, A)
    ks = list(range(1, k_top + 1))
    totals = path_totals(g, ks, spectrum, budget, dense_limit) if ks else {}
    rows = []
    for k in ks:
        P, method = totals[k]
        consts = {float(e): P / (n ** (1 + e) * q ** (k / 2)) for e in eps_grid}
        rows.append({"k": k, "P": P, "method": method, "even": k % 2 == 0, "C": consts})
    return WitnessReport(n, q, A, k_top, tuple(float(e) for e in eps_grid), rows)


def local_sx_check(g: RegularMultigraph, x0: int, A: float, eps_grid=DEFAULT_EPS_GRID,
                   budget: int = DEFAULT_PATH_BUDGET) -> WitnessReport:
    """P(X, k, x0)/(n^eps q^(k/2)) for 1 <= k <= 2 A log_q n."""
    n, q = g.n, g.q
    k_max = math.floor(2 * A * _log_q(n, q) + 1e-12)
    counts = nb_path_counts(g, x0, k_max, budget) if k_max >= 1 else None
    rows = []
    for k in range(1, k_max + 1):
        P = float(counts[k, x0])
        consts = {float(e): P / (n ** e * q ** (k / 2)) for e in eps_grid}
        rows.append({"k": k, "P": P, "method": "brute", "even": k % 2 == 0, "C": consts})
    return WitnessReport(n, q, A, k_max, tuple(float(e) for e in eps_grid), rows)


# ---------------------------------------------------------------------------
# density <-> path counting

def equivalence_chain(g: RegularMultigraph, A: float, spectrum: Spectrum | None = None,
                      budget: int = DEFAULT_PATH_BUDGET,
                      dense_limit: int = DEFAULT_DENSE_LIMIT) -> dict:
    """Both sides of the density/path-count equivalence, evaluated on one graph.

    At k = 2 floor(A log_q n) with A_eff = k/(2 log_q n):
      forward:  P = (q+1)q^(k-1) sum lambda^(k) <= (q+1)q^(k-1) sum |lambda^(k)|
                <= (q+1)q^(k-1)(k+1) sum q^(-k/p_i) = (q+1)/q (k+1) n^(1+A_eff) D_{A_eff}
      reverse:  sum_{p_i>2} q^(-k/p_i) <= tr A_k + (k+1) q^(-k/2) #{p_i = 2}
    """
    s = spectrum if spectrum is not None else eigenvalues(g, dense_limit)
    n, q = g.n, g.q
    k = max(top_even_length(n, q, A), 2)
    a_eff = k / (2 * _log_q(n, q))
    lk = lambda_k_array(s.values, q, k)
    scale = (q + 1) * q ** (k - 1)
    p_spectral = scale * float(lk.sum())
    totals = path_totals(g, [k], s, budget, dense_limit)
    p_count, method = totals[k]
    step1 = scale * float(np.abs(lk).sum())
    step2 = scale * (k + 1) * float(np.sum(q ** (-k * s.inv_p)))
    d_eff = partial_sum_statistic(s, min(a_eff, 1.0)) if a_eff > 0 else float("nan")
    step3 = (q + 1) / q * (k + 1) * n ** (1 + a_eff) * d_eff
    nontemp = s.inv_p < 0.5
    rev_lhs = float(np.sum(q ** (-k * s.inv_p[nontemp])))
    rev_rhs = float(lk.sum()) + (k + 1) * q ** (-k / 2) * int(np.count_nonzero(~nontemp))
    C = p_count / (n * q ** (k / 2))
    return {
        "n": n, "q": q, "A": A, "k": k, "A_eff": a_eff,
        "P_count": p_count, "P_method": method, "P_spectral": p_spectral,
        "trace_rel_delta": abs(p_count - p_spectral) / max(1.0, abs(p_count)),
        "D_A": partial_sum_statistic(s, A), "C": C,
        "forward": [p_spectral, step1, step2, step3],
        "forward_holds": bool(p_spectral <= step1 * (1 + 1e-12) + 1e-9
                              and step1 <= step2 * (1 + 1e-9) + 1e-9
                              and math.isclose(step2, step3, rel_tol=1e-9)),
        "forward_constant": step3 / (n * q ** (k / 2)),
        "reverse": [rev_lhs, rev_rhs],
        "reverse_holds": bool(rev_lhs <= rev_rhs * (1 + 1e-9) + 1e-12),
        "reverse_constant": rev_lhs * q ** k / n ** (1 + a_eff),
    }


def equivalence_experiment(corpus, A: float, budget: int = DEFAULT_PATH_BUDGET,
                           dense_limit: int = DEFAULT_DENSE_LIMIT) -> list[dict]:
    rows = []
    for g in corpus:
        row = equivalence_chain(g, A, budget=budget, dense_limit=dense_limit)
        row["meta"] = dict(g.meta)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Cayley -> Schreier quotient

def reduced_words(pairing, k: int):
    """All reduced words of length k: no letter followed by its paired inverse."""
    d = len(pairing)
    if k == 0:
        yield ()
        return
    stack = [(i,) for i in range(d - 1, -1, -1)]
    while stack:
        w = stack.pop()
        if len(w) == k:
            yield w
            continue
        bad = pairing[w[-1]]
        for j in range(d - 1, -1, -1):
            if j != bad:
                stack.append(w + (j,))


def word_fixed_point_census(gens: GeneratorSet, k: int, budget: int = DEFAULT_PATH_BUDGET) -> dict:
    """Evaluate every reduced word of length k and classify its image.

    A word (i_1, ..., i_k) acts as s_{i_k} ... s_{i_1}, matching a
    non-backtracking walk that applies i_1 first.
    """
    if gens.group != "SL2":
        raise ValueError("word census needs an SL2 generator set")
    t = gens.t
    if _nb_paths_total(gens.degree - 1, k) > budget:
        raise BudgetExceeded(f"word enumeration at k={k} exceeds budget {budget}")
    words = np.array(list(reduced_words(gens.inverse_pairing, k)), dtype=np.int64)
    gen_arr = gens.array()
    mats = np.tile(np.array([1, 0, 0, 1], dtype=np.int64), (max(len(words), 1), 1))
    if k > 0:
        for j in range(k):
            mats = matmul_array(gen_arr[words[:, j]], mats, t)
    ident = np.all(mats == [1, 0, 0, 1], axis=1)
    neg = np.all(mats == [t - 1, 0, 0, t - 1], axis=1)
    fixed = _fixed_point_counts(mats, t)
    return {
        "k": k,
        "words": int(mats.shape[0]),
        "M": int(fixed.sum()),
        "identity": int(ident.sum()),
        "minus_identity": int(neg.sum()),
        "other": int((~ident & ~neg).sum()),
        "max_fixed_other": int(fixed[~ident & ~neg].max()) if np.any(~ident & ~neg) else 0,
    }


def _fixed_point_counts(mats, t):
    """Number of points of P1(F_t) fixed by each matrix, by direct evaluation."""
    from .graphs import point_index_array, projective_points_array

    pts = projective_points_array(t)
    idx = np.arange(t + 1)
    out = np.zeros(mats.shape[0], dtype=np.int64)
    for a in range(0, mats.shape[0], 4096):
        m = mats[a:a + 4096]
        x = m[:, 0:1] * pts[:, 0] + m[:, 1:2] * pts[:, 1]
        y = m[:, 2:3] * pts[:, 0] + m[:, 3:4] * pts[:, 1]
        out[a:a + 4096] = (point_index_array(x, y, t) == idx).sum(axis=1)
    return out


def quotient_density_experiment(t_list, S_builder, A: float, k_max: int = 6,
                                budget: int = DEFAULT_PATH_BUDGET,
                                dense_limit: int = DEFAULT_DENSE_LIMIT) -> list[dict]:
    """Cayley graph X_t versus Schreier quotient Y_t on P1(F_t), for each t.

    Verifies the fixed-point bound
      |M_{t,k}| <= (t+1) #{phi(w) = I} + 2 #{phi(w) != +-I} + (t+1) #{phi(w) = -I}
    and the double count |M_{t,k}| = P(Y_t, k), P(X_t, k) = |X_t| #{phi(w) = I}.
    """
    out = []
    for t in t_list:
        gens = S_builder(t)
        X = cayley_graph(None, gens, {"family": "cayley_sl2"})
        Y = schreier_graph(t, gens)
        wx = weak_injective_radius_check(X, A, budget=budget, dense_limit=dense_limit)
        wy = weak_injective_radius_check(Y, min(1.0, 3 * A), budget=budget,
                                         dense_limit=dense_limit)
        y_table = closed_path_table(Y, k_max, budget)
        x_counts = nb_path_counts(X, 0, k_max, budget)[:, 0]
        per_k = []
        for k in range(k_max + 1):
            c = word_fixed_point_census(gens, k, budget)
            bound = (t + 1) * c["identity"] + 2 * c["other"] + (t + 1) * c["minus_identity"]
            c.update({
                "bound": bound,
                "bound_holds": c["M"] <= bound,
                "P_Y": int(y_table[k].sum()),
                "P_X": int(x_counts[k]) * X.n,
                "M_equals_P_Y": c["M"] == int(y_table[k].sum()),
                "P_X_equals_census": int(x_counts[k]) == c["identity"],
            })
            per_k.append(c)
        out.append({"t": t, "n_X": X.n, "n_Y": Y.n, "A_X": A, "A_Y": min(1.0, 3 * A),
                    "witness_X": wx, "witness_Y": wy, "census": per_k})
    return out
