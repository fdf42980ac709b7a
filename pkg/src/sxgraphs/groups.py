"""Exact arithmetic in SL2(F_t), PGL2(F_t) and on the projective line P1(F_t).

Residues are always stored in ``[0, t)``. Scalar operations work on small
immutable dataclasses; the ``*_array`` helpers are vectorized numpy versions
used by the graph constructors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from sympy.ntheory import isprime, sqrt_mod


def prime_modulus(t) -> int:
    """Validate a field modulus: a prime greater than 2."""
    t = int(t)
    if t <= 2 or not isprime(t):
        raise ValueError(f"modulus must be a prime > 2, got {t}")
    return t


@dataclass(frozen=True)
class IntegerMatrix:
    a: int
    b: int
    c: int
    d: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: IntegerMatrix) -> IntegerMatrix:
        return IntegerMatrix(
            self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d,
        )

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class MatrixSL2:
    """2x2 matrix over F_t with determinant 1."""

    a: int
    b: int
    c: int
    d: int
    t: int

    def __post_init__(self):
        t = self.t
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) % t)
        if (self.a * self.d - self.b * self.c) % t != 1:
            raise ValueError(f"determinant of {self.as_tuple()} is not 1 mod {t}")

    @classmethod
    def identity(cls, t: int) -> MatrixSL2:
        return cls(1, 0, 0, 1, t)

    def __matmul__(self, other: MatrixSL2) -> MatrixSL2:
        return sl2_mul(self, other)

    def inv(self) -> MatrixSL2:
        return sl2_inv(self)

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def is_scalar(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d


@dataclass(frozen=True)
class ProjectivePoint:
    """Point of P1(F_t) in canonical form (1, y) or (0, 1)."""

    x: int
    y: int
    t: int

    def __post_init__(self):
        x, y = canonical_point(self.x, self.y, self.t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def coords(self):
        return (self.x, self.y)

    @property
    def index(self) -> int:
        """Position in :func:`projective_line` order."""
        return 0 if self.x == 0 else 1 + self.y


def canonical_point(x: int, y: int, t: int):
    x %= t
    y %= t
    if x:
        return 1, y * pow(x, -1, t) % t
    if y:
        return 0, 1
    raise ValueError("(0, 0) is not a projective point")


def sl2_mul(x: MatrixSL2, y: MatrixSL2) -> MatrixSL2:
    if x.t != y.t:
        raise ValueError(f"modulus mismatch: {x.t} vs {y.t}")
    t = x.t
    return MatrixSL2(
        (x.a * y.a + x.b * y.c) % t, (x.a * y.b + x.b * y.d) % t,
        (x.c * y.a + x.d * y.c) % t, (x.c * y.b + x.d * y.d) % t, t,
    )


def sl2_inv(x: MatrixSL2) -> MatrixSL2:
    return MatrixSL2(x.d, -x.b, -x.c, x.a, x.t)


def reduce_mod_t(m: IntegerMatrix, t) -> MatrixSL2:
    t = prime_modulus(t)
    if m.det != 1:
        raise ValueError(f"{m.as_tuple()} is not unimodular (det={m.det})")
    return MatrixSL2(m.a, m.b, m.c, m.d, t)


def mobius_act(g: MatrixSL2, p: ProjectivePoint) -> ProjectivePoint:
    if g.t != p.t:
        raise ValueError(f"modulus mismatch: {g.t} vs {p.t}")
    return ProjectivePoint(g.a * p.x + g.b * p.y, g.c * p.x + g.d * p.y, g.t)


def projective_line(t) -> list[ProjectivePoint]:
    t = prime_modulus(t)
    return [ProjectivePoint(0, 1, t)] + [ProjectivePoint(1, y, t) for y in range(t)]


def projective_fixed_points(g: MatrixSL2) -> int:
    return sum(mobius_act(g, p) == p for p in projective_line(g.t))


# ---------------------------------------------------------------------------
# vectorized helpers: matrices as (N, 4) int64 arrays of residues (a, b, c, d)

def matmul_array(s, g, t):
    """Row-wise product ``s @ g`` mod t; either side may be a single row."""
    s = np.asarray(s, dtype=np.int64)
    g = np.asarray(g, dtype=np.int64)
    a = s[..., 0] * g[..., 0] + s[..., 1] * g[..., 2]
    b = s[..., 0] * g[..., 1] + s[..., 1] * g[..., 3]
    c = s[..., 2] * g[..., 0] + s[..., 3] * g[..., 2]
    d = s[..., 2] * g[..., 1] + s[..., 3] * g[..., 3]
    return np.stack([a, b, c, d], axis=-1) % t


def projective_normalize_array(m, t):
    """Scale each row so its first nonzero entry is 1 (PGL2 representative)."""
    m = np.asarray(m, dtype=np.int64) % t
    lead = np.where(m[:, 0] != 0, m[:, 0], m[:, 1])
    inv = np.array([pow(int(x), -1, t) for x in range(1, t)], dtype=np.int64)
    return m * inv[lead - 1][:, None] % t


def encode_array(m, t):
    m = np.asarray(m, dtype=np.int64)
    return ((m[..., 0] * t + m[..., 1]) * t + m[..., 2]) * t + m[..., 3]


def sl2_elements_array(t) -> np.ndarray:
    """All of SL2(F_t) as an (t(t^2-1), 4) array in lexicographic (a,b,c,d) order."""
    t = prime_modulus(t)
    r = np.arange(t, dtype=np.int64)
    inv = np.zeros(t, dtype=np.int64)
    inv[1:] = [pow(int(x), -1, t) for x in range(1, t)]
    # a != 0: d = (1 + bc) / a
    a, b, c = (x.ravel() for x in np.meshgrid(r[1:], r, r, indexing="ij"))
    d = (1 + b * c) * inv[a] % t
    block1 = np.stack([a, b, c, d], axis=1)
    # a == 0: -bc = 1, so b != 0 and c = -1/b, d free
    b, d = (x.ravel() for x in np.meshgrid(r[1:], r, indexing="ij"))
    c = (-inv[b]) % t
    block0 = np.stack([np.zeros_like(b), b, c, d], axis=1)
    out = np.concatenate([block0, block1])
    return out[np.argsort(encode_array(out, t), kind="stable")]


def sl2_elements(t) -> list[MatrixSL2]:
    t = prime_modulus(t)
    return [MatrixSL2(*map(int, row), t) for row in sl2_elements_array(t)]


def sl2_order(t: int) -> int:
    """|SL2(F_t)| = t(t^2 - 1)."""
    return t * (t * t - 1)


# ---------------------------------------------------------------------------
# generator sets

@dataclass(frozen=True)
class GeneratorSet:
    """Symmetric generating set with an explicit inverse pairing.

    ``elements`` are residue 4-tuples. ``group`` is ``"SL2"`` for determinant-one
    matrices or ``"PGL2"`` for projective representatives (first nonzero entry 1),
    where inverses are taken up to scalars.
    """

    t: int
    elements: tuple
    inverse_pairing: tuple
    label: str = ""
    group: str = "SL2"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        els = tuple(tuple(int(x) % self.t for x in e) for e in self.elements)
        object.__setattr__(self, "elements", els)
        object.__setattr__(self, "inverse_pairing", tuple(int(i) for i in self.inverse_pairing))
        self.validate()

    def __len__(self):
        return len(self.elements)

    @property
    def degree(self) -> int:
        return len(self.elements)

    def matrices(self) -> list[MatrixSL2]:
        if self.group != "SL2":
            raise ValueError("projective generator sets have no SL2 matrices")
        return [MatrixSL2(*e, self.t) for e in self.elements]

    def array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64).reshape(-1, 4)

    def validate(self):
        k = len(self.elements)
        pairing = self.inverse_pairing
        if len(pairing) != k:
            raise ValueError("inverse_pairing length differs from element count")
        for i, j in enumerate(pairing):
            if not 0 <= j < k or pairing[j] != i:
                raise ValueError("inverse_pairing is not an involution")
        t = self.t
        for i, j in enumerate(pairing):
            prod = matmul_array(self.elements[i], self.elements[j], t)
            a, b, c, d = (int(x) for x in prod)
            if self.group == "SL2":
                ok = (a, b, c, d) == (1, 0, 0, 1)
            else:
                ok = b == 0 and c == 0 and a == d and a != 0
            if not ok:
                raise ValueError(f"element {j} is not the inverse of element {i}")

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "label": self.label,
            "group": self.group,
            "elements": [list(e) for e in self.elements],
            "inverse_pairing": list(self.inverse_pairing),
        }

    @classmethod
    def from_json(cls, data) -> GeneratorSet:
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            t=prime_modulus(data["t"]),
            elements=tuple(tuple(e) for e in data["elements"]),
            inverse_pairing=tuple(data["inverse_pairing"]),
            label=data.get("label", ""),
            group=data.get("group", "SL2"),
        )


def sample_sl2_array(t: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from SL2(F_t) by the column method.

    The first column is uniform over nonzero vectors, the second uniform over
    the t completions with determinant 1.
    """
    col = rng.integers(1, t * t, size=size)
    a, c = col // t, col % t
    s = rng.integers(0, t, size=size)
    inv = np.zeros(t, dtype=np.int64)
    inv[1:] = [pow(int(x), -1, t) for x in range(1, t)]
    # particular solution of a*d - b*c = 1
    b0 = np.where(a != 0, 0, (-inv[c]) % t)
    d0 = np.where(a != 0, inv[a], 0)
    b = (b0 + s * a) % t
    d = (d0 + s * c) % t
    return np.stack([a, b, c, d], axis=1).astype(np.int64)


def random_generator_set(t, l: int, seed) -> GeneratorSet:
    """l uniform random elements of SL2(F_t) together with their inverses.

    Element ``i`` is paired with element ``i + l``.
    """
    t = prime_modulus(t)
    if l < 1:
        raise ValueError("need at least one random generator")
    rng = np.random.default_rng(seed)
    gens = [MatrixSL2(*map(int, row), t) for row in sample_sl2_array(t, l, rng)]
    elements = [g.as_tuple() for g in gens] + [g.inv().as_tuple() for g in gens]
    pairing = [i + l for i in range(l)] + list(range(l))
    return GeneratorSet(t, tuple(elements), tuple(pairing), label=f"random_l{l}_seed{seed}",
                        meta={"seed": seed, "l": l})


PRESETS = {"pm1": 1, "pm2": 2, "pm3": 3}


def preset_integer_generators(name: str) -> list[IntegerMatrix]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    s = PRESETS[name]
    return [IntegerMatrix(1, s, 0, 1), IntegerMatrix(1, -s, 0, 1),
            IntegerMatrix(1, 0, s, 1), IntegerMatrix(1, 0, -s, 1)]


def preset_generators(name: str, t) -> GeneratorSet:
    """The elementary matrices (1, +-s; 0, 1), (1, 0; +-s, 1) reduced mod t."""
    t = prime_modulus(t)
    mats = [reduce_mod_t(m, t) for m in preset_integer_generators(name)]
    return GeneratorSet(t, tuple(m.as_tuple() for m in mats), (1, 0, 3, 2), label=name)


def operator_norm(m: IntegerMatrix) -> float:
    """Largest singular value, from the closed-form top eigenvalue of m^T m."""
    p = m.a * m.a + m.c * m.c
    r = m.b * m.b + m.d * m.d
    tr = p + r
    det = m.det ** 2
    return math.sqrt((tr + math.sqrt(max(tr * tr - 4 * det, 0))) / 2)


# ---------------------------------------------------------------------------
# counting oracles

DEFAULT_LATTICE_BUDGET = 10_000
DEFAULT_QUAD_BUDGET = 10 ** 12


def congruence_lattice_count(t, T: int, budget: int = DEFAULT_LATTICE_BUDGET) -> int:
    """#{g in SL2(Z) : g = I mod t, max|entry| <= T}.

    Enumerates the diagonal (a, d) with a = d = 1 mod t and a + d = 2 mod t^2,
    then the factorizations bc = ad - 1 with t | b, c.
    """
    from .errors import BudgetExceeded

    t = prime_modulus(t)
    if T > budget:
        raise BudgetExceeded(f"T={T} exceeds lattice enumeration budget {budget}")
    if T < 0:
        return 0
    diag = [x for x in range(-T, T + 1) if (x - 1) % t == 0]
    offdiag = [x for x in range(-T, T + 1) if x % t == 0 and x != 0]
    n_mult = 2 * (T // t) + 1  # multiples of t in [-T, T], zero included
    total = 0
    for a in diag:
        for d in diag:
            if (a + d - 2) % (t * t):
                continue
            prod = a * d - 1
            if prod == 0:
                # b*c = 0: b = 0 with c free, or c = 0 with b free
                total += 2 * n_mult - 1
                continue
            for b in offdiag:
                if prod % b == 0:
                    c = prod // b
                    if abs(c) <= T and c % t == 0:
                        total += 1
    return total


def _sum_three_squares_count(m: int) -> int:
    """Number of integer (x1, x2, x3) with x1^2 + x2^2 + x3^2 = m."""
    if m < 0:
        return 0
    count = 0
    r = math.isqrt(m)
    for x1 in range(-r, r + 1):
        rem1 = m - x1 * x1
        r2 = math.isqrt(rem1)
        for x2 in range(-r2, r2 + 1):
            rem2 = rem1 - x2 * x2
            x3 = math.isqrt(rem2)
            if x3 * x3 == rem2:
                count += 1 if x3 == 0 else 2
    return count


def quad_form_representations(q: int, t, k: int, budget: int = DEFAULT_QUAD_BUDGET) -> int:
    """Number of integer solutions of x0^2 + 4t^2(x1^2 + x2^2 + x3^2) = q^k."""
    from .errors import BudgetExceeded

    t = prime_modulus(t)
    target = q ** k
    if target > budget:
        raise BudgetExceeded(f"q^k={target} exceeds representation budget {budget}")
    modulus = 4 * t * t
    total = 0
    r = math.isqrt(target)
    for x0 in range(-r, r + 1):
        rem = target - x0 * x0
        if rem % modulus == 0:
            total += _sum_three_squares_count(rem // modulus)
    return total


# ---------------------------------------------------------------------------
# LPS-style generators

def four_square_solutions(q: int) -> list[tuple[int, int, int, int]]:
    r = math.isqrt(q)
    rng = range(-r, r + 1)
    return [v for v in product(rng, repeat=4) if sum(x * x for x in v) == q]


def normalized_quaternions(q: int):
    """The q+1 normalized solutions of x0^2+x1^2+x2^2+x3^2 = q, plus the rule used.

    For q = 1 mod 4 these are x0 > 0 odd, x1..x3 even. Otherwise one
    representative per pair {a, -a} with x0 even and x1..x3 odd.
    """
    sols = four_square_solutions(q)
    if q % 4 == 1:
        chosen = [v for v in sols if v[0] > 0 and v[0] % 2 == 1 and all(x % 2 == 0 for x in v[1:])]
        return chosen, "x0_odd_positive"
    chosen = []
    for v in sols:
        if v[0] % 2 or any(x % 2 == 0 for x in v[1:]):
            continue
        first = next(x for x in v if x != 0)
        if first > 0:
            chosen.append(v)
    return chosen, "one_per_sign_pair"


def lps_generator_set(q: int, t) -> GeneratorSet:
    """Quaternion generators of norm q mapped to PGL2(F_t).

    Uses x^2 + y^2 = -1 mod t and
    a -> [[a0 + a1 x + a3 y, -a1 y + a2 + a3 x], [-a1 y - a2 + a3 x, a0 - a1 x - a3 y]],
    whose determinant is the quaternion norm q.
    """
    t = prime_modulus(t)
    if q <= 2 or not isprime(q):
        raise ValueError(f"q must be an odd prime, got {q}")
    if q == t:
        raise ValueError("q and t must differ")
    quats, rule = normalized_quaternions(q)
    if len(quats) != q + 1:
        raise ValueError(f"no valid normalization for (q, t) = ({q}, {t})")
    x, y = _sum_two_squares_minus_one(t)
    mats = []
    for a0, a1, a2, a3 in quats:
        mats.append((a0 + a1 * x + a3 * y, -a1 * y + a2 + a3 * x,
                     -a1 * y - a2 + a3 * x, a0 - a1 * x - a3 * y))
    arr = projective_normalize_array(np.array(mats, dtype=np.int64) % t, t)
    codes = encode_array(arr, t)
    conj = [(a0, -a1, -a2, -a3) for a0, a1, a2, a3 in quats]
    pairing = []
    for i, cq in enumerate(conj):
        # the conjugate is the inverse up to the scalar q
        cm = np.array([[cq[0] + cq[1] * x + cq[3] * y, -cq[1] * y + cq[2] + cq[3] * x,
                        -cq[1] * y - cq[2] + cq[3] * x, cq[0] - cq[1] * x - cq[3] * y]]) % t
        code = encode_array(projective_normalize_array(cm, t), t)[0]
        matches = np.flatnonzero(codes == code)
        if matches.size != 1:
            raise ValueError(f"no valid normalization for (q, t) = ({q}, {t})")
        pairing.append(int(matches[0]))
    residue = pow(q, (t - 1) // 2, t) == 1
    return GeneratorSet(
        t, tuple(tuple(map(int, r)) for r in arr), tuple(pairing), label=f"lps_q{q}_t{t}",
        group="PGL2",
        meta={"q": q, "normalization": rule, "target": "PSL2" if residue else "PGL2"},
    )


def _sum_two_squares_minus_one(t: int):
    """Some (x, y) with x^2 + y^2 = -1 mod t."""
    root = sqrt_mod(t - 1, t)
    if root is not None:
        return int(root), 0
    for x in range(t):
        y = sqrt_mod((-1 - x * x) % t, t)
        if y is not None:
            return x, int(y)
    raise AssertionError("unreachable: -1 is a sum of two squares mod every prime")


def generator_from_json(path) -> GeneratorSet:
    with open(path, encoding="utf-8") as fh:
        return GeneratorSet.from_json(json.load(fh))
