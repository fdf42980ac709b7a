import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from sxgraphs.errors import BudgetExceeded
from sxgraphs.graphs import cayley_graph, is_connected
from sxgraphs.groups import (
    GeneratorSet, IntegerMatrix, MatrixSL2, ProjectivePoint, congruence_lattice_count,
    encode_array, four_square_solutions, lps_generator_set, mobius_act, normalized_quaternions,
    operator_norm, preset_generators, prime_modulus, projective_fixed_points, projective_line,
    quad_form_representations, random_generator_set, reduce_mod_t, sample_sl2_array,
    sl2_elements, sl2_elements_array, sl2_inv, sl2_mul, sl2_order,
)


def rand_sl2(t, rng):
    row = sample_sl2_array(t, 1, rng)[0]
    return MatrixSL2(*map(int, row), t)


def test_prime_modulus():
    assert prime_modulus(7) == 7
    for bad in (2, 1, 9, -5):
        with pytest.raises(ValueError):
            prime_modulus(bad)


def test_mul_examples():
    t = 5
    g = MatrixSL2(2, 1, 3, 2, t)
    assert sl2_mul(MatrixSL2.identity(t), g) == g
    u = MatrixSL2(1, 1, 0, 1, t)
    assert sl2_mul(u, u) == MatrixSL2(1, 2, 0, 1, t)
    with pytest.raises(ValueError):
        sl2_mul(u, MatrixSL2(1, 1, 0, 1, 7))
    with pytest.raises(ValueError):
        MatrixSL2(1, 1, 1, 1, 5)


def test_inverse_examples():
    rng = np.random.default_rng(0)
    t = 101
    for _ in range(100):
        g = rand_sl2(t, rng)
        assert sl2_mul(g, sl2_inv(g)) == MatrixSL2.identity(t)
        assert sl2_inv(sl2_inv(g)) == g
    assert sl2_inv(MatrixSL2.identity(7)) == MatrixSL2.identity(7)
    assert sl2_inv(MatrixSL2(1, 1, 0, 1, 7)) == MatrixSL2(1, 6, 0, 1, 7)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from([3, 5, 7, 11, 101]))
def test_group_axioms(seed, t):
    rng = np.random.default_rng(seed)
    x, y, z = (rand_sl2(t, rng) for _ in range(3))
    assert (x @ y) @ z == x @ (y @ z)
    assert x @ MatrixSL2.identity(t) == x
    assert x.inv() @ x == MatrixSL2.identity(t)


def test_reduce_mod_t():
    assert reduce_mod_t(IntegerMatrix(1, 2, 0, 1), 3).as_tuple() == (1, 2, 0, 1)
    assert reduce_mod_t(IntegerMatrix(1, -2, 0, 1), 5).as_tuple() == (1, 3, 0, 1)
    with pytest.raises(ValueError):
        reduce_mod_t(IntegerMatrix(1, 0, 2, 1), 2)
    with pytest.raises(ValueError):
        reduce_mod_t(IntegerMatrix(2, 0, 0, 1), 5)


def test_mobius_examples():
    t = 7
    for p in projective_line(t):
        assert mobius_act(MatrixSL2.identity(t), p) == p
    w = MatrixSL2(0, -1, 1, 0, t)
    assert mobius_act(w, ProjectivePoint(1, 0, t)) == ProjectivePoint(0, 1, t)
    # orbit of (1, 0) under pm2 covers P1
    gens = preset_generators("pm2", t).matrices()
    seen, frontier = {ProjectivePoint(1, 0, t)}, [ProjectivePoint(1, 0, t)]
    while frontier:
        nxt = []
        for p in frontier:
            for s in gens:
                r = mobius_act(s, p)
                if r not in seen:
                    seen.add(r)
                    nxt.append(r)
        frontier = nxt
    assert len(seen) == t + 1


def test_mobius_left_action():
    rng = np.random.default_rng(1)
    t = 13
    pts = projective_line(t)
    for _ in range(1000):
        g, h = rand_sl2(t, rng), rand_sl2(t, rng)
        p = pts[rng.integers(len(pts))]
        assert mobius_act(g @ h, p) == mobius_act(g, mobius_act(h, p))


def test_projective_line():
    assert len(projective_line(5)) == 6
    assert [p.coords for p in projective_line(3)] == [(0, 1), (1, 0), (1, 1), (1, 2)]
    for p in projective_line(11):
        assert ProjectivePoint(*p.coords, 11) == p
        assert ProjectivePoint(3 * p.x, 3 * p.y, 11) == p
    assert [p.index for p in projective_line(7)] == list(range(8))
    with pytest.raises(ValueError):
        ProjectivePoint(0, 0, 5)


def test_fixed_point_examples():
    t = 7
    assert projective_fixed_points(MatrixSL2.identity(t)) == 8
    assert projective_fixed_points(MatrixSL2(t - 1, 0, 0, t - 1, t)) == 8
    assert projective_fixed_points(MatrixSL2(1, 1, 0, 1, t)) == 1


@pytest.mark.parametrize("t", [3, 5, 7])
def test_fixed_point_values_exhaustive(t):
    for g in sl2_elements(t):
        f = projective_fixed_points(g)
        assert f in (0, 1, 2, t + 1)
        assert (f == t + 1) == (g.is_scalar())


def test_sl2_enumeration():
    for t in (3, 5, 7):
        arr = sl2_elements_array(t)
        assert arr.shape == (sl2_order(t), 4)
        assert np.all((arr[:, 0] * arr[:, 3] - arr[:, 1] * arr[:, 2]) % t == 1)
        codes = encode_array(arr, t)
        assert np.all(np.diff(codes) > 0)
        brute = [m for m in itertools.product(range(t), repeat=4)
                 if (m[0] * m[3] - m[1] * m[2]) % t == 1]
        assert [tuple(r) for r in arr] == brute


def test_random_generator_set_uniform():
    t = 5
    rng = np.random.default_rng(2024)
    samples = sample_sl2_array(t, 100_000, rng)
    assert np.all((samples[:, 0] * samples[:, 3] - samples[:, 1] * samples[:, 2]) % t == 1)
    codes = encode_array(samples, t)
    universe = encode_array(sl2_elements_array(t), t)
    counts = np.array([np.count_nonzero(codes == c) for c in universe])
    assert counts.sum() == 100_000
    expected = 100_000 / 120
    sigma = math.sqrt(100_000 * (1 / 120) * (1 - 1 / 120))
    assert np.all(np.abs(counts - expected) <= 5 * sigma)
    assert chisquare(counts).pvalue > 0.001


def test_random_generator_set_structure():
    gs = random_generator_set(11, 3, 42)
    assert gs.degree == 6
    assert gs.inverse_pairing == (3, 4, 5, 0, 1, 2)
    assert random_generator_set(11, 3, 42) == gs
    assert random_generator_set(11, 3, 43) != gs
    for i, j in enumerate(gs.inverse_pairing):
        assert gs.matrices()[i] @ gs.matrices()[j] == MatrixSL2.identity(11)


def test_presets():
    gs = preset_generators("pm2", 7)
    assert gs.elements == ((1, 2, 0, 1), (1, 5, 0, 1), (1, 0, 2, 1), (1, 0, 5, 1))
    assert gs.degree == 4
    assert preset_generators("pm1", 7).elements[0] == (1, 1, 0, 1)
    assert preset_generators("pm3", 7).elements[1] == (1, 4, 0, 1)
    with pytest.raises(ValueError):
        preset_generators("pm4", 7)


def test_generator_set_validation_and_json():
    with pytest.raises(ValueError):
        GeneratorSet(5, ((1, 1, 0, 1), (1, 1, 0, 1)), (1, 0))
    with pytest.raises(ValueError):
        GeneratorSet(5, ((1, 1, 0, 1), (1, 4, 0, 1)), (0, 0))
    gs = preset_generators("pm2", 11)
    assert GeneratorSet.from_json(gs.to_json()) == gs


def test_operator_norm():
    assert operator_norm(IntegerMatrix(1, 0, 0, 1)) == pytest.approx(1.0)
    n = operator_norm(IntegerMatrix(1, 2, 0, 1))
    # characteristic polynomial of m^T m = (1,2;2,5): x^2 - 6x + 1
    assert n * n == pytest.approx((6 + math.sqrt(32)) / 2, rel=1e-12)
    assert n == pytest.approx(1 + math.sqrt(2), rel=1e-12)
    assert n * n <= 6 <= 9
    assert operator_norm(IntegerMatrix(1, 3, 0, 1)) > 3
    m = np.array([[2, 7], [1, 4]])
    assert operator_norm(IntegerMatrix(2, 7, 1, 4)) == pytest.approx(np.linalg.norm(m, 2))


def brute_lattice(t, T):
    rng = range(-T, T + 1)
    count = 0
    for a, b, c, d in itertools.product(rng, repeat=4):
        if a * d - b * c == 1 and (a - 1) % t == 0 and (d - 1) % t == 0 \
                and b % t == 0 and c % t == 0:
            count += 1
    return count


def test_congruence_lattice_small():
    for t in (3, 5, 7):
        for T in range(1, t):
            assert congruence_lattice_count(t, T) == 1
    assert congruence_lattice_count(3, 20) == brute_lattice(3, 20)
    assert congruence_lattice_count(5, 0) == 0
    vals = [congruence_lattice_count(5, T) for T in range(0, 60, 5)]
    assert vals == sorted(vals)
    with pytest.raises(BudgetExceeded):
        congruence_lattice_count(3, 10 ** 6, budget=100)


def brute_quad(q, t, k):
    target = q ** k
    r0 = math.isqrt(target)
    r1 = math.isqrt(target // (4 * t * t))
    count = 0
    for x0 in range(-r0, r0 + 1):
        for x1, x2, x3 in itertools.product(range(-r1, r1 + 1), repeat=3):
            if x0 * x0 + 4 * t * t * (x1 * x1 + x2 * x2 + x3 * x3) == target:
                count += 1
    return count


def test_quad_form_examples():
    assert quad_form_representations(5, 13, 0) == 2
    assert quad_form_representations(5, 13, 2) == brute_quad(5, 13, 2)
    for q, t, k in [(5, 3, 4), (13, 5, 4), (5, 7, 6), (3, 5, 8)]:
        s = quad_form_representations(q, t, k)
        assert s == brute_quad(q, t, k)
        h = q ** (k / 2)
        # shape bound with a generous constant and eps = 0.1
        assert s <= 16 * (h / t ** 2 + 1) * (h / t + 1) ** 1.1
    with pytest.raises(BudgetExceeded):
        quad_form_representations(5, 13, 30, budget=10 ** 6)


def test_lps():
    sols = four_square_solutions(5)
    assert len(sols) == 48
    quats, rule = normalized_quaternions(5)
    assert len(quats) == 6 and rule == "x0_odd_positive"
    gs = lps_generator_set(5, 13)
    assert gs.group == "PGL2" and gs.degree == 6
    arr = gs.array()
    t = 13
    for i, j in enumerate(gs.inverse_pairing):
        p = arr[i]
        r = arr[j]
        prod = ((p[0] * r[0] + p[1] * r[2]) % t, (p[0] * r[1] + p[1] * r[3]) % t,
                (p[2] * r[0] + p[3] * r[2]) % t, (p[2] * r[1] + p[3] * r[3]) % t)
        assert prod[1] == prod[2] == 0 and prod[0] == prod[3] != 0
    g = cayley_graph(None, gs)
    assert g.degree == 6 and is_connected(g)
    assert g.n == 13 * (13 ** 2 - 1)  # 5 is not a square mod 13: all of PGL2
    q3, rule3 = normalized_quaternions(3)
    assert len(q3) == 4 and rule3 == "one_per_sign_pair"
