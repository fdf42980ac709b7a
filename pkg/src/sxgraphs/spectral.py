"""Spectra of the normalized adjacency operator and their p-value parametrization.

Every eigenvalue lambda of a (q+1)-regular graph is written as
lambda = (theta + q/theta)/(q+1). Tempered eigenvalues (|lambda| <= 2 sqrt(q)/(q+1))
have |theta| = sqrt(q) and p = 2; the others have real theta with
|theta| = q^(1 - 1/p). p-values are stored as ``inv_p = 1/p`` so that
p = infinity is the regular value 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import SizeGateError

DEFAULT_DENSE_LIMIT = 6000
TEMPERED_TOL = 1e-9
DEFAULT_P_GRID = (2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0, math.inf)


@dataclass(frozen=True, eq=False)
class Spectrum:
    q: int
    values: np.ndarray  # descending, clamped to [-1, 1]
    inv_p: np.ndarray = field(init=False)
    theta_abs: np.ndarray = field(init=False)

    def __post_init__(self):
        vals = np.clip(np.sort(np.asarray(self.values, dtype=float))[::-1], -1.0, 1.0)
        object.__setattr__(self, "values", vals)
        notes = [p_value(v, self.q) for v in vals]
        object.__setattr__(self, "inv_p", np.array([a.inv_p for a in notes]))
        object.__setattr__(self, "theta_abs", np.array([a.theta_abs for a in notes]))

    @property
    def n(self) -> int:
        return self.values.size

    def to_rows(self):
        return [(i, float(v), float(th), float(ip))
                for i, (v, th, ip) in enumerate(zip(self.values, self.theta_abs, self.inv_p))]


def normalized_adjacency(g) -> np.ndarray:
    return g.adjacency() / g.degree


def eigenvalues(g, dense_limit: int = DEFAULT_DENSE_LIMIT) -> Spectrum:
    """All eigenvalues of the normalized adjacency operator, descending."""
    if g.n > dense_limit:
        raise SizeGateError(f"n={g.n} exceeds dense eigensolve limit {dense_limit}")
    vals = np.linalg.eigvalsh(normalized_adjacency(g))
    return Spectrum(g.q, vals)


def tempered_bound(q: int) -> float:
    """2 sqrt(q)/(q+1), the edge of the tree spectrum."""
    return 2.0 * math.sqrt(q) / (q + 1)


@dataclass(frozen=True)
class PValueAnnotation:
    lam: float
    theta_abs: float
    theta_sign: int  # +1/-1 for real theta, 0 marks complex theta (tempered case)
    inv_p: float

    @property
    def p(self) -> float:
        return math.inf if self.inv_p == 0 else 1.0 / self.inv_p


def p_value(lam: float, q: int, tol: float = TEMPERED_TOL) -> PValueAnnotation:
    a = abs(float(lam))
    if a > 1 + tol:
        raise ValueError(f"|lambda| = {a} exceeds 1")
    a = min(a, 1.0)
    sign = 1 if lam >= 0 else -1
    if q == 1:
        # q^(1/p) + q^(1-1/p) = 2 for every p: only the trivial values +-1 separate
        if a >= 1 - tol:
            return PValueAnnotation(float(lam), 1.0, sign, 0.0)
        return PValueAnnotation(float(lam), 1.0, 0, 0.5)
    if a <= tempered_bound(q) + tol:
        return PValueAnnotation(float(lam), math.sqrt(q), 0, 0.5)
    s = (q + 1) * a
    theta = (s + math.sqrt(max(s * s - 4 * q, 0.0))) / 2
    inv_p = min(max(1.0 - math.log(theta) / math.log(q), 0.0), 0.5)
    return PValueAnnotation(float(lam), theta, sign, inv_p)


def lambda_from_inv_p(inv_p: float, q: int) -> float:
    return (q ** inv_p + q ** (1 - inv_p)) / (q + 1)


def _theta(lam: float, q: int) -> complex:
    """Root of theta^2 - (q+1) lam theta + q = 0 with the larger modulus."""
    s = (q + 1) * lam
    disc = s * s - 4 * q
    if disc >= 0:
        r = math.sqrt(disc)
        return complex((s + r) / 2 if s >= 0 else (s - r) / 2)
    return (s + cmath.sqrt(disc)) / 2


def lambda_k_closed(lam: float, q: int, k: int) -> float:
    """Eigenvalue of the Hecke operator A_k on a lambda-eigenvector, from theta."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return 1.0
    theta = _theta(lam, q)
    total = theta ** k + (q / theta) ** k
    total += (1 - 1 / q) * sum(q ** i * theta ** (k - 2 * i) for i in range(1, k))
    val = total / ((q + 1) * q ** (k - 1))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"imaginary residue {val.imag} in lambda^({k})")
    return float(val.real)


def lambda_k_recursive(lam: float, q: int, k: int) -> float:
    """Same quantity by A A_k = q/(q+1) A_{k+1} + 1/(q+1) A_{k-1}."""
    if k < 0:
        raise ValueError("k must be non-negative")
    prev, cur = 1.0, float(lam)
    if k == 0:
        return prev
    for _ in range(1, k):
        prev, cur = cur, ((q + 1) * lam * cur - prev) / q
    return cur


def lambda_k_array(values, q: int, k: int) -> np.ndarray:
    """Vectorized recursion over many eigenvalues."""
    lam = np.asarray(values, dtype=float)
    prev = np.ones_like(lam)
    if k == 0:
        return prev
    cur = lam.copy()
    for _ in range(1, k):
        prev, cur = cur, ((q + 1) * lam * cur - prev) / q
    return cur


def corollary_bounds_check(lam: float, q: int, k: int, rtol: float = 1e-9) -> bool:
    """Upper, lower and sign bounds on lambda^(k) in terms of the p-value."""
    note = p_value(lam, q)
    lk = lambda_k_recursive(lam, q, k)
    upper = (k + 1) * q ** (-k * note.inv_p)
    slack = rtol * max(1.0, upper)
    if abs(lk) > upper + slack:
        return False
    if note.inv_p < 0.5:
        lower = q ** (-k * note.inv_p)
        if (k % 2 == 0 or lam > 0) and abs(lk) < lower - rtol * lower:
            return False
        if k % 2 == 0 and lk <= 0:
            return False
        if k % 2 == 1 and np.sign(lk) != np.sign(lam):
            return False
    return True


@dataclass(frozen=True)
class DensityProfile:
    grid: tuple
    counts: tuple
    n: int
    positive_only: bool = False
    partial_sums: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.grid, self.counts))


def _count_at_least(inv_p, p_grid):
    inv_p = np.asarray(inv_p)
    return tuple(int(np.count_nonzero(inv_p <= 1.0 / p + 1e-12)) for p in p_grid)


def density_profile(s: Spectrum, p_grid=DEFAULT_P_GRID, A_values=()) -> DensityProfile:
    """#{i : p_i >= p} on a grid of p values (trivial eigenvalues included)."""
    grid = tuple(float(p) for p in p_grid)
    sums = {float(A): partial_sum_statistic(s, A) for A in A_values}
    return DensityProfile(grid, _count_at_least(s.inv_p, grid), s.n, False, sums)


def positive_only_profile(s: Spectrum, p_grid=DEFAULT_P_GRID) -> DensityProfile:
    grid = tuple(float(p) for p in p_grid)
    return DensityProfile(grid, _count_at_least(s.inv_p[s.values > 0], grid), s.n, True)


def partial_sum_statistic(s: Spectrum, A: float) -> float:
    """D_A = sum_i n^(-1 + A(1 - 2/p_i))."""
    if not 0 < A <= 1:
        raise ValueError("A must lie in (0, 1]")
    n = s.n
    return float(np.sum(np.exp(math.log(n) * (-1 + A * (1 - 2 * s.inv_p)))))


def trace_hecke(s: Spectrum, k: int) -> float:
    """tr A_k = sum_i lambda_i^(k)."""
    return float(np.sum(lambda_k_array(s.values, s.q, k)))


def spectral_path_total(s: Spectrum, k: int) -> float:
    """P(X, k) = (q+1) q^(k-1) tr A_k (and n for k = 0)."""
    if k == 0:
        return float(s.n)
    return (s.q + 1) * s.q ** (k - 1) * trace_hecke(s, k)


# ---------------------------------------------------------------------------
# Benjamini-Schramm diagnostics

def kesten_mckay_cdf(x, q: int):
    """CDF of the tree spectral measure for the normalized operator.

    Parametrizing (q+1)x = 2 sqrt(q) cos(phi) gives the smooth density
    (q+1) 4q sin^2(phi) / (2 pi ((q+1)^2 - 4q cos^2(phi))) in phi.
    """
    rho = tempered_bound(q)

    def dens(phi):
        c = math.cos(phi)
        return (q + 1) * 4 * q * math.sin(phi) ** 2 / (2 * math.pi * ((q + 1) ** 2 - 4 * q * c * c))

    def one(v):
        if v <= -rho:
            return 0.0
        if v >= rho:
            return 1.0
        phi0 = math.acos(v / rho)
        return integrate.quad(dens, phi0, math.pi, epsabs=1e-12, epsrel=1e-10)[0]

    if np.ndim(x) == 0:
        return one(float(x))
    return np.array([one(float(v)) for v in np.ravel(x)])


def kesten_mckay_distance(s: Spectrum) -> float:
    """Kolmogorov distance between the empirical spectral CDF and Kesten-McKay."""
    vals = np.sort(s.values)
    n = vals.size
    uniq, counts = np.unique(vals, return_counts=True)
    cdf_after = np.cumsum(counts) / n
    cdf_before = cdf_after - counts / n
    km = kesten_mckay_cdf(uniq, s.q)
    return float(max(np.max(np.abs(cdf_after - km)), np.max(np.abs(cdf_before - km))))


@dataclass(frozen=True)
class BSReport:
    path_density: dict  # k -> P(X, k)/n
    large_fraction: float
    eps: float
    km_distance: float


def bs_diagnostics(g, s: Spectrum, eps: float = 0.1, k_max: int = 6) -> BSReport:
    """Finite-size versions of the Benjamini-Schramm equivalent conditions.

    The large-eigenvalue threshold is (1+eps) 2 sqrt(q)/(q+1), the normalized
    form of the tree spectral radius.
    """
    dens = {k: spectral_path_total(s, k) / s.n for k in range(1, k_max + 1)}
    thresh = (1 + eps) * tempered_bound(s.q)
    frac = float(np.count_nonzero(np.abs(s.values) > thresh)) / s.n
    return BSReport(dens, frac, eps, kesten_mckay_distance(s))
