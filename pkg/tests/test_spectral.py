import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from sxgraphs.errors import SizeGateError
from sxgraphs.experiments import standard_corpus
from sxgraphs.graphs import from_edge_list, preset_graph, random_regular
from sxgraphs.hecke import closed_path_table
from sxgraphs.spectral import (
    TEMPERED_TOL, Spectrum, bs_diagnostics, corollary_bounds_check, density_profile, eigenvalues,
    kesten_mckay_cdf, kesten_mckay_distance, lambda_from_inv_p, lambda_k_array, lambda_k_closed,
    lambda_k_recursive, p_value, partial_sum_statistic, positive_only_profile,
    spectral_path_total, tempered_bound, trace_hecke,
)


def test_eigenvalue_examples():
    s = eigenvalues(preset_graph("complete_k4"))
    assert np.allclose(s.values, [1, -1 / 3, -1 / 3, -1 / 3])
    c = eigenvalues(preset_graph("cycle_6"))
    assert np.allclose(c.values, [1, .5, .5, -.5, -.5, -1])
    with pytest.raises(SizeGateError):
        eigenvalues(random_regular(100, 4, 0), dense_limit=50)


def test_trace_identity_with_loops():
    g = from_edge_list(3, 4, [(0, 1), (1, 2), (2, 0), (0, 0), (1, 2)], half_loops=[1, 2])
    s = eigenvalues(g)
    assert g.half_loops == 2 and g.full_loops == 1
    assert s.values.sum() == pytest.approx((g.half_loops + 2 * g.full_loops) / g.degree, abs=1e-9)
    assert s.values[0] == pytest.approx(1.0)


def test_eigen_residuals():
    g = random_regular(200, 4, 3)
    a = g.adjacency() / g.degree
    w, v = np.linalg.eigh(a)
    assert np.max(np.linalg.norm(a @ v - v * w, axis=0)) <= 1e-8


def test_p_value_examples():
    a = p_value(1.0, 2)
    assert a.inv_p == 0 and a.theta_abs == pytest.approx(2) and a.p == math.inf
    b = p_value(2 * math.sqrt(2) / 3, 2)
    assert b.inv_p == 0.5 and b.theta_abs == pytest.approx(math.sqrt(2))
    lam3 = (2 ** (2 / 3) + 2 ** (1 / 3)) / 3
    assert lam3 == pytest.approx(0.94911, abs=1e-5)
    assert p_value(lam3, 2).inv_p == pytest.approx(1 / 3, abs=1e-10)
    assert p_value(-lam3, 2).theta_sign == -1
    with pytest.raises(ValueError):
        p_value(1.01, 3)


@settings(max_examples=300, deadline=None)
@given(st.floats(2.0, 64.0), st.integers(2, 13))
def test_p_value_roundtrip(p, q):
    lam = lambda_from_inv_p(1 / p, q)
    note = p_value(lam, q)
    rho = tempered_bound(q)
    if lam - rho > TEMPERED_TOL:
        # away from the boundary the inversion is well conditioned
        tol = 1e-8 if p >= 2.01 else 2 * math.sqrt(2 * TEMPERED_TOL / (math.log(q) ** 2 * rho))
        assert note.inv_p == pytest.approx(1 / p, abs=tol)
    else:
        # lambda - rho ~ (log q)^2 rho delta^2 / 2 at inv_p = 1/2 - delta: such
        # values sit inside the classification band and are tempered
        assert note.inv_p == 0.5
        assert 0.5 - 1 / p <= math.sqrt(2 * TEMPERED_TOL / (math.log(q) ** 2 * rho)) + 1e-12
    if p >= 2.01:
        assert note.theta_abs == pytest.approx(q ** (1 - 1 / p), rel=1e-8)


def test_p_value_exact_p2():
    for q in (2, 3, 7):
        assert p_value(lambda_from_inv_p(0.5, q), q).inv_p == 0.5


def test_p_value_monotone():
    q = 3
    lams = np.linspace(tempered_bound(q) + 1e-6, 1, 500)
    inv = [p_value(x, q).inv_p for x in lams]
    assert np.all(np.diff(inv) <= 1e-12)


def test_lambda_k_examples():
    assert lambda_k_closed(0.3, 2, 0) == 1
    assert lambda_k_closed(0.3, 2, 1) == pytest.approx(0.3)
    for k in range(12):
        assert lambda_k_closed(1.0, 2, k) == pytest.approx(1.0)
    assert lambda_k_recursive(-1 / 3, 2, 2) == pytest.approx(-1 / 3)
    assert lambda_k_recursive(-1 / 3, 2, 3) == pytest.approx(1 / 3)
    assert lambda_k_closed(-1 / 3, 2, 2) == pytest.approx(-1 / 3)
    assert lambda_k_closed(-1 / 3, 2, 3) == pytest.approx(1 / 3)
    assert lambda_k_recursive(0.0, 2, 2) == pytest.approx(-0.5)
    lam, q = 0.7, 4
    assert lambda_k_recursive(lam, q, 2) == pytest.approx(((q + 1) * lam ** 2 - 1) / q)


def test_closed_matches_recursive():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        lam = rng.uniform(-1, 1)
        q = int(rng.integers(2, 6))
        k = int(rng.integers(0, 31))
        assert abs(lambda_k_closed(lam, q, k) - lambda_k_recursive(lam, q, k)) <= 1e-10
    for k in (40, 50, 60):
        for lam in (-0.99, -0.5, 0.1, 0.8, 1.0):
            assert abs(lambda_k_closed(lam, 3, k) - lambda_k_recursive(lam, 3, k)) <= 1e-10


def test_lambda_k_array_matches_scalar():
    vals = np.linspace(-1, 1, 21)
    arr = lambda_k_array(vals, 3, 9)
    assert np.allclose(arr, [lambda_k_recursive(v, 3, 9) for v in vals], atol=1e-14)


def test_corollary_examples():
    q = 2
    lam = 2 * math.sqrt(2) / 3
    assert abs(lambda_k_recursive(lam, q, 4)) <= 5 * 2 ** -2
    assert corollary_bounds_check(lam, q, 4)
    note = p_value(0.96, q)
    l6 = lambda_k_recursive(0.96, q, 6)
    assert q ** (-6 * note.inv_p) <= l6 <= 7 * q ** (-6 * note.inv_p)
    assert np.sign(lambda_k_recursive(-0.96, q, 5)) == -1
    assert corollary_bounds_check(-0.96, q, 5)


def test_corollary_on_corpus():
    for g in standard_corpus():
        if g.q < 2:
            continue
        s = eigenvalues(g)
        for lam in s.values:
            for k in range(0, 21, 2):
                assert corollary_bounds_check(lam, g.q, k), (g.meta, lam, k)


def test_density_profile_examples():
    k4 = eigenvalues(preset_graph("complete_k4"))
    prof = density_profile(k4, (2.0, 2.01, 3.0, math.inf), A_values=(1.0,))
    assert prof.counts[0] == 4
    assert prof.counts[1] == 1
    assert prof.counts[-1] >= 1
    assert all(a >= b for a, b in zip(prof.counts, prof.counts[1:]))
    assert prof.partial_sums[1.0] == pytest.approx(1.75)
    pos = positive_only_profile(k4, (2.0, 2.01))
    assert pos.counts == (1, 1)
    c6 = eigenvalues(preset_graph("cycle_6"))
    assert positive_only_profile(c6, (2.0, 2.01)).counts == (3, 1)
    g = eigenvalues(random_regular(300, 4, 1))
    full, posp = density_profile(g), positive_only_profile(g)
    assert full.counts[0] == g.n
    assert all(a <= b for a, b in zip(posp.counts, full.counts))


def test_partial_sum():
    # Ramanujan-like: every nontrivial eigenvalue tempered, non-bipartite
    n, q = 50, 3
    vals = np.concatenate([[1.0], np.linspace(-0.8, 0.8, n - 1) * tempered_bound(q)])
    s = Spectrum(q, vals)
    for A in (0.3, 0.7, 1.0):
        assert partial_sum_statistic(s, A) == pytest.approx(n ** (A - 1) + (n - 1) / n)
        assert partial_sum_statistic(s, A) <= 2
    g = eigenvalues(random_regular(200, 4, 2))
    ds = [partial_sum_statistic(g, A) for A in np.linspace(0.05, 1, 20)]
    assert all(b >= a - 1e-12 for a, b in zip(ds, ds[1:]))
    with pytest.raises(ValueError):
        partial_sum_statistic(g, 0)


def test_trace_identity_spectral_vs_brute():
    for g in standard_corpus():
        s = eigenvalues(g)
        table = closed_path_table(g, 12, budget=10 ** 8)
        for k in range(13):
            brute = table[k].sum()
            assert spectral_path_total(s, k) == pytest.approx(brute, rel=1e-6, abs=1e-6)
            if k:
                assert trace_hecke(s, k) * (g.q + 1) * g.q ** (k - 1) == pytest.approx(
                    brute, rel=1e-6, abs=1e-6)


def _km_oracle(x, q):
    d = q + 1
    r = 2 * math.sqrt(q)

    def f(mu):
        return d * math.sqrt(max(4 * q - mu * mu, 0.0)) / (2 * math.pi * (d * d - mu * mu))

    return integrate.quad(f, -r, min(max(x * d, -r), r), limit=200)[0]


def test_kesten_mckay_cdf():
    for q in (2, 3, 5):
        rho = tempered_bound(q)
        assert kesten_mckay_cdf(0.0, q) == pytest.approx(0.5, abs=1e-10)
        assert kesten_mckay_cdf(rho, q) == 1.0
        assert kesten_mckay_cdf(-rho - 1e-3, q) == 0.0
        for x in np.linspace(-rho, rho, 9):
            assert kesten_mckay_cdf(x, q) == pytest.approx(_km_oracle(x, q), abs=1e-8)


def test_bs_examples():
    k4 = preset_graph("complete_k4")
    r = bs_diagnostics(k4, eigenvalues(k4), k_max=3)
    assert r.path_density[3] == pytest.approx(6.0)
    g = random_regular(1000, 4, 0)
    r = bs_diagnostics(g, eigenvalues(g), eps=0.1)
    assert r.large_fraction <= 0.02


def test_kesten_mckay_trend():
    med = []
    for n in (100, 400, 1600):
        ds = [kesten_mckay_distance(eigenvalues(random_regular(n, 4, seed))) for seed in range(10)]
        med.append(float(np.median(ds)))
    assert med[0] > med[1] > med[2]
