"""Non-backtracking edge operator, cycle counts and the Ihara spectrum correspondence."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sympy import divisors, mobius

from . import kernels
from .errors import SizeGateError
from .graphs import INVOLUTION_CONVENTION, RegularMultigraph
from .spectral import Spectrum

DENSE_EDGE_LIMIT = 4000
RESIDUE_WARN = 1e-6
RESIDUE_FAIL = 1e-3
# columns of the identity pushed through H at once in exact trace powering
_BLOCK = 512


@dataclass(frozen=True, eq=False)
class EdgeOperator:
    """H f(e) = sum of f(e') over e' leaving t(e) with e' != reverse(e).

    Half-edges double as directed edges: e leaves origin(e) and enters
    target(e). A half-loop (partner(e) = e) excludes only itself.
    """
    n: int
    degree: int
    target: np.ndarray
    partner: np.ndarray

    @property
    def m(self) -> int:
        return self.n * self.degree

    @property
    def q(self) -> int:
        return self.degree - 1

    @property
    def meta(self) -> dict:
        return {"loop_convention": INVOLUTION_CONVENTION, "m": self.m}

    def apply(self, f):
        """Apply H to a vector or to the columns of an (m, c) array."""
        f = np.asarray(f)
        shape = (self.n, self.degree) + f.shape[1:]
        S = f.reshape(shape).sum(axis=1)
        return S[self.target] - f[self.partner]

    def dense(self, limit: int = DENSE_EDGE_LIMIT) -> np.ndarray:
        if self.m > limit:
            raise SizeGateError(f"m={self.m} exceeds dense edge-operator limit {limit}")
        return self.apply(np.eye(self.m, dtype=np.int64))

    def row_sums(self) -> np.ndarray:
        return self.apply(np.ones(self.m, dtype=np.int64))


def hashimoto_build(g: RegularMultigraph) -> EdgeOperator:
    return EdgeOperator(g.n, g.degree, np.asarray(g.target), np.asarray(g.partner))


@dataclass(frozen=True)
class CycleCount:
    k: int
    N: int
    residue: float


def cycle_counts(op: EdgeOperator, k_max: int, block: int = _BLOCK) -> list[CycleCount]:
    """N_X(k) = tr H^k for k = 1..k_max by exact integer block powering.

    Integer arithmetic makes the residue identically zero; it is kept in
    the output so every count carries the same columns as a float trace.
    Counts are bounded by m q^k, so int64 is safe while that stays below 2^63.
    """
    if k_max < 1:
        raise ValueError("k must be at least 1")
    if op.m * max(op.q, 1) ** k_max >= 2 ** 62:
        raise OverflowError("tr H^k would overflow int64")
    traces = np.zeros(k_max + 1, dtype=np.int64)
    for a in range(0, op.m, block):
        cols = np.arange(a, min(a + block, op.m))
        X = np.zeros((op.m, cols.size), dtype=np.int64)
        X[cols, np.arange(cols.size)] = 1
        for k in range(1, k_max + 1):
            X = op.apply(X)
            traces[k] += X[cols, np.arange(cols.size)].sum()
    return [CycleCount(k, int(traces[k]), 0.0) for k in range(1, k_max + 1)]


def cycle_count(op: EdgeOperator, k: int) -> int:
    return cycle_counts(op, k)[-1].N


def round_count(x: float) -> CycleCount:
    """Round a floating trace; residues above RESIDUE_FAIL signal numerical failure."""
    r = round(float(np.real(x)))
    res = abs(complex(x) - r)
    if res > RESIDUE_FAIL * max(1.0, abs(r)):
        raise ArithmeticError(f"trace {x} is not close to an integer (residue {res})")
    return CycleCount(-1, int(r), float(res))


def hashimoto_spectrum_predicted(s: Spectrum, m: int | None = None) -> np.ndarray:
    """Both roots of theta^2 - (q+1) lambda theta + q for every lambda, plus +-1.

    Each of +1 and -1 carries multiplicity m/2 - n = n(q-1)/2.
    """
    q, n = s.q, s.n
    m = n * (q + 1) if m is None else m
    lam = s.values.astype(complex)
    b = (q + 1) * lam
    r = np.sqrt(b * b - 4 * q)
    extra = m // 2 - n
    return np.concatenate([(b + r) / 2, (b - r) / 2, np.ones(extra), -np.ones(extra)])


def hashimoto_spectrum_computed(op: EdgeOperator, limit: int = DENSE_EDGE_LIMIT) -> np.ndarray:
    return np.linalg.eigvals(op.dense(limit).astype(float))


def match_spectra(predicted, computed):
    """Minimal-cost one-to-one matching; returns (rows, max distance).

    rows are (predicted, matched, distance) with complex values as [re, im].
    """
    predicted = np.asarray(predicted, dtype=complex)
    computed = np.asarray(computed, dtype=complex)
    if predicted.size != computed.size:
        raise ValueError(f"multiset sizes differ: {predicted.size} vs {computed.size}")
    cost = np.abs(predicted[:, None] - computed[None, :])
    ri, ci = linear_sum_assignment(cost)
    d = cost[ri, ci]
    rows = [([p.real, p.imag], [c.real, c.imag], float(x))
            for p, c, x in zip(predicted[ri], computed[ci], d)]
    return rows, float(d.max()) if d.size else 0.0


def primitive_from_counts(N: dict, k: int) -> int:
    """pi_X(k) = (1/k) sum_{d | k} mu(k/d) N_X(d)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    total = sum(int(mobius(k // d)) * int(N[d]) for d in divisors(k))
    if total % k or total < 0:
        raise ArithmeticError(f"inconsistent cycle counts: Moebius sum {total} at k={k}")
    return total // k


def primitive_count(op: EdgeOperator, k: int) -> int:
    N = {c.k: c.N for c in cycle_counts(op, k)}
    return primitive_from_counts(N, k)


def primitive_counts(N: dict) -> dict:
    return {k: primitive_from_counts(N, k) for k in sorted(N)}


def counts_from_primitive(pi: dict, k: int) -> int:
    """N_X(k) = sum_{d | k} d pi_X(d)."""
    return sum(d * pi[d] for d in divisors(k))


def exhaustive_cycles(g: RegularMultigraph, k_max: int):
    """(closed, primitive) tailless non-backtracking cycle counts by enumeration."""
    closed, prim = kernels.nb_cycle_counts(g.target, g.partner, g.degree, int(k_max))
    return closed, prim


def spectral_cycle_count(s: Spectrum, k: int) -> float:
    """N_X(k) = sum of theta^k over the predicted edge spectrum."""
    return float(np.real(np.sum(hashimoto_spectrum_predicted(s) ** k)))


def cycle_table(g: RegularMultigraph, k_max: int, s: Spectrum | None = None,
                exact_budget: float = 5e9) -> list[dict]:
    """Rows (k, N, pi, residue); exact powering within budget, else the spectrum."""
    op = hashimoto_build(g)
    exact = op.m * op.m * k_max * 2 <= exact_budget and op.m * max(op.q, 1) ** k_max < 2 ** 62
    if exact:
        counts = cycle_counts(op, k_max)
    else:
        if s is None:
            raise SizeGateError("cycle counts beyond the exact budget need a spectrum")
        counts = []
        for k in range(1, k_max + 1):
            c = round_count(spectral_cycle_count(s, k))
            counts.append(CycleCount(k, c.N, c.residue))
    N = {c.k: c.N for c in counts}
    return [{"k": c.k, "N": c.N, "pi": primitive_from_counts(N, c.k), "residue": c.residue,
             "method": "exact" if exact else "spectral"} for c in counts]


def zeta_density_check(g: RegularMultigraph, s: Spectrum | None, A: float) -> dict:
    """Witness constants for N_X(k) and pi_X(k) at k = 2 floor(A log_q n), k >= 2."""
    n, q = g.n, g.q
    if q < 2:
        raise ValueError("density checks need q >= 2 (log base q)")
    k = max(2, 2 * math.floor(A * math.log(n) / math.log(q) + 1e-12))
    rows = cycle_table(g, k, s)
    row = rows[-1]
    norm = n * q ** (k / 2)
    return {
        "n": n, "q": q, "A": A, "k": k, "N": row["N"], "pi": row["pi"],
        "C_N": row["N"] / norm, "C_pi": row["pi"] / norm,
        "C_bridge": abs(row["pi"] - row["N"] / k) / norm,
        "rotation_bound_holds": row["N"] >= k * row["pi"],
        "method": row["method"], "rows": rows,
    }
