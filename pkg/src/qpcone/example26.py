"""A non-threshold initial segment of a linear order on 26 atoms.

Eighteen base atoms get weights ``201^(i-1)`` (rescaled into ``(0, 1]``).
An 8x18 zero-one matrix ``M`` is built from one member of each pair
``{x, 1-x}`` of the 36 vectors in ``{0,1}^8`` with two ones in each half;
its rows are the base sets ``A_1..A_4, B_1..B_4``.  Eight heavy atoms
19..26 extend them to ``A'_i, B'_j`` all of weight exactly ``N``.  Untying
the 28 ties in the order ``A'_1 < ... < A'_4 < B'_1 < ... < B'_4`` gives a
linear qualitative probability order whose initial segment below ``B'_1``
contains every ``A'_i`` and no ``B'_j``: a length-4 trading transform
certifying the complex is not threshold.

The complex is never materialised.  :func:`delta_membership` decides a set
from its weight and, on the boundary, from the list of kept tie vectors.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .cancellation import find_cck_star_violation
from .complexes import PredicateComplex
from .core import Subset, TernaryVector, TradingTransform, format_rational, is_compatible, parse_rational, restricted_sum
from .feasibility import exact_rank

RADIX = 201
BASE = 18
ATOMS = 26
NAMES = ("A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4")
# B'_j picks up atom J_COLUMN[j] from the 19..22 block (the permutation J)
J_COLUMN = {1: 22, 2: 19, 3: 20, 4: 21}
SEARCH_BOX = 5


class ConstructionError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# -- the 36 vectors ---------------------------------------------------------


@dataclass(frozen=True)
class USet:
    """The 36 vectors and their 18 complementary pairs ``(smaller, larger)``."""

    vectors: tuple[tuple[int, ...], ...]
    pairs: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


def _bar(x: Sequence[int]) -> tuple[int, ...]:
    return tuple(1 - v for v in x)


def build_u_set() -> USet:
    vectors = tuple(
        v for v in itertools.product((0, 1), repeat=8) if sum(v[:4]) == 2 and sum(v[4:]) == 2
    )
    pairs = tuple(sorted({tuple(sorted((v, _bar(v)))) for v in vectors}))
    return USet(vectors, pairs)


# -- the construction -------------------------------------------------------


@dataclass(frozen=True)
class Construction:
    """Matrix, sets and (once solved) weights of the 26-atom example.

    ``weights`` holds all 26 weights; ``n_big`` and ``k_big`` are ``N`` and
    ``K`` (``w_26 = K``).  ``xprime`` lists ``chi(C, D)`` for the 28 pairs with
    ``D`` earlier than ``C`` in ``A'_1, ..., A'_4, B'_1, ..., B'_4``.
    """

    selector: int
    m: tuple[tuple[int, ...], ...]
    weights: tuple[Fraction, ...] | None = None
    n_big: Fraction | None = None
    k_big: Fraction | None = None
    xprime: tuple[TernaryVector, ...] = field(default=())

    @property
    def base_sets(self) -> tuple[Subset, ...]:
        return tuple(Subset(BASE, sum(1 << c for c in range(BASE) if row[c])) for row in self.m)

    @property
    def m_prime(self) -> tuple[tuple[int, ...], ...]:
        rows = []
        for r, row in enumerate(self.m):
            ext = [0] * 8
            if r < 4:
                ext[r] = 1
                ext[4 + r] = 1
            else:
                j = r - 3
                ext[J_COLUMN[j] - 19] = 1
                ext[4 + j - 1] = 1
            rows.append(tuple(row) + tuple(ext))
        return tuple(rows)

    @property
    def ext_sets(self) -> tuple[Subset, ...]:
        return tuple(Subset(ATOMS, sum(1 << c for c in range(ATOMS) if row[c])) for row in self.m_prime)

    @property
    def transform(self) -> TradingTransform:
        s = self.ext_sets
        return TradingTransform(s[:4], s[4:])

    @property
    def solved(self) -> bool:
        return self.weights is not None

    def to_json(self) -> dict:
        out = {
            "selector": f"{self.selector:05x}",
            "M": [list(r) for r in self.m],
            "M_prime": [list(r) for r in self.m_prime],
            "sets": {name: s.to_json() for name, s in zip(NAMES, self.ext_sets)},
            "Xprime": [v.to_json() for v in self.xprime],
        }
        if self.solved:
            out["weights"] = [format_rational(w) for w in self.weights]
            out["N"] = format_rational(self.n_big)
            out["K"] = format_rational(self.k_big)
        return out

    @classmethod
    def from_json(cls, data: dict) -> Construction:
        m = tuple(tuple(int(v) for v in row) for row in data["M"])
        c = cls(int(data["selector"], 16), m)
        c = replace(c, xprime=tuple(TernaryVector.from_entries(v) for v in data["Xprime"]))
        if "weights" in data:
            c = replace(
                c,
                weights=tuple(parse_rational(w) for w in data["weights"]),
                n_big=parse_rational(data["N"]),
                k_big=parse_rational(data["K"]),
            )
        if c.to_json()["M_prime"] != data.get("M_prime", c.to_json()["M_prime"]):
            raise ConstructionError("stored M_prime does not match M")
        return c


def _xprime(ext: Sequence[Subset]) -> tuple[TernaryVector, ...]:
    out = []
    for d in range(8):
        for c in range(d + 1, 8):
            a, b = ext[c], ext[d]
            out.append(TernaryVector(ATOMS, a.bits & ~b.bits, b.bits & ~a.bits))
    return tuple(out)


def choose_m(selector: int = 0) -> Construction:
    """Column ``i`` is the smaller member of pair ``i``, or the larger if bit ``i-1`` is set."""
    if not 0 <= selector < 1 << 18:
        raise ValueError("selector must fit in 18 bits")
    u = build_u_set()
    cols = [pair[selector >> i & 1] for i, pair in enumerate(u.pairs)]
    m = tuple(tuple(col[r] for col in cols) for r in range(8))
    c = Construction(selector, m)
    c = replace(c, xprime=_xprime(c.ext_sets))
    bad = cross_pair_violation(c.base_sets)
    if bad is not None:
        raise ConstructionError("base sets violate the trading/non-compatibility properties", bad)
    return c


def cross_pair_violation(sets: Sequence[Subset]):
    """``None`` if the sets form a trading transform with no compatible cross pairs."""
    a, b = sets[:4], sets[4:]
    try:
        TradingTransform(a, b)
    except ValueError:
        return ("not a trading transform",)
    for i, k in itertools.permutations(range(4), 2):
        for j, m in itertools.permutations(range(4), 2):
            if is_compatible((a[i], b[j]), (a[k], b[m])):
                return ("compatible", NAMES[i], NAMES[4 + j], NAMES[k], NAMES[4 + m])
    return None


# -- weights ----------------------------------------------------------------


def default_base_weights() -> tuple[Fraction, ...]:
    top = RADIX ** (BASE - 1)
    return tuple(Fraction(RADIX**i, top) for i in range(BASE))


def _form_of_set(s: Subset) -> list[int]:
    return [0, 0] + [1 if s.bits >> i & 1 else 0 for i in range(BASE)]


def _sub(*terms) -> list[int]:
    head, *rest = terms
    out = list(head)
    for t in rest:
        out = [x - y for x, y in zip(out, t)]
    return out


def _add(*terms) -> list[int]:
    return [sum(xs) for xs in zip(*terms)]


NFORM = [1, 0] + [0] * BASE
KFORM = [0, 1] + [0] * BASE


def heavy_forms_by_substitution(base: Sequence[Subset]) -> dict[int, list[int]]:
    """``w_19..w_26`` over the basis ``(N, K, w_1..w_18)``, row by row from ``w_26 = K``."""
    a1, a2, a3, a4, b1, b2, b3, b4 = (_form_of_set(s) for s in base)
    f = {26: KFORM}
    f[22] = _sub(NFORM, a4, f[26])
    f[23] = _sub(NFORM, b1, f[22])
    f[19] = _sub(NFORM, a1, f[23])
    f[24] = _sub(NFORM, b2, f[19])
    f[20] = _sub(NFORM, a2, f[24])
    f[25] = _sub(NFORM, b3, f[20])
    f[21] = _sub(NFORM, a3, f[25])
    if _add(f[21], f[26]) != _sub(NFORM, b4):
        raise ConstructionError("the B4 row is inconsistent with the others")
    return f


def heavy_forms_closed(base: Sequence[Subset]) -> dict[int, list[int]]:
    """The same forms written with the three differences ``chi(B1,A4), chi(B2,A1), chi(B3,A2)``."""
    a1, a2, a3, a4, b1, b2, b3, _ = (_form_of_set(s) for s in base)
    nk = _sub(NFORM, KFORM)
    d1, d2, d3 = _sub(b1, a4), _sub(b2, a1), _sub(b3, a2)
    zero = [0] * (BASE + 2)
    neg = lambda v: _sub(zero, v)  # noqa: E731
    return {
        19: _sub(nk, _add(neg(d1), a1)),
        20: _sub(nk, _add(neg(d1), neg(d2), a2)),
        21: _sub(nk, _add(neg(d1), neg(d2), neg(d3), a3)),
        22: _sub(nk, a4),
        23: _sub(KFORM, d1),
        24: _sub(KFORM, _add(d1, d2)),
        25: _sub(KFORM, _add(d1, d2, d3)),
        26: KFORM,
    }


def system_matrix() -> list[list[int]]:
    """Coefficients of ``w_19..w_26`` in the eight weight equations."""
    rows = []
    for r in range(8):
        row = [0] * 8
        if r < 4:
            row[r] = row[4 + r] = 1
        else:
            j = r - 3
            row[J_COLUMN[j] - 19] = 1
            row[4 + j - 1] = 1
        rows.append(row)
    return rows


def _evaluate(form: Sequence[int], n_big: Fraction, k_big: Fraction, base_w: Sequence[Fraction]) -> Fraction:
    return form[0] * n_big + form[1] * k_big + sum(c * w for c, w in zip(form[2:], base_w))


def solve_weights(
    c: Construction,
    base_w: Sequence[Fraction] | None = None,
    n_big: Fraction | None = None,
    k_big: Fraction | None = None,
) -> Construction:
    """Fill in ``w_19..w_26`` so that all eight extended sets weigh ``N``.

    Defaults: radix weights, ``K = 1000 * sum(w_1..w_18)``, ``N = 1000 * K``.
    """
    base_w = default_base_weights() if base_w is None else tuple(Fraction(w) for w in base_w)
    if len(base_w) != BASE or any(w <= 0 for w in base_w):
        raise ConstructionError("need 18 positive base weights")
    k_big = 1000 * sum(base_w) if k_big is None else Fraction(k_big)
    n_big = 1000 * k_big if n_big is None else Fraction(n_big)
    forms = heavy_forms_by_substitution(c.base_sets)
    heavy = [_evaluate(forms[a], n_big, k_big, base_w) for a in range(19, 27)]
    bad = next((19 + i for i, w in enumerate(heavy) if w <= 0), None)
    if bad is not None:
        raise ConstructionError(f"w_{bad} is not positive", (bad, heavy[bad - 19]))
    weights = base_w + tuple(heavy)
    solved = replace(c, weights=weights, n_big=n_big, k_big=k_big)
    for name, s in zip(NAMES, solved.ext_sets):
        got = sum(weights[a - 1] for a in s.atoms)
        if got != n_big:
            raise ConstructionError(f"{name}' weighs {got}, not N", (name, got))
    return solved


def default_construction(selector: int = 0) -> Construction:
    return solve_weights(choose_m(selector))


# -- the complex ------------------------------------------------------------


class _IntWeights:
    """Weights scaled to integers for fast exact sums."""

    def __init__(self, c: Construction):
        if not c.solved:
            raise ConstructionError("construction has no weights yet")
        den = lcm(*(w.denominator for w in (*c.weights, c.n_big)))
        self.w = [int(w * den) for w in c.weights]
        self.n_big = int(c.n_big * den)
        self.b1 = c.ext_sets[4].bits
        self.kept = {(v.pos, v.neg) for v in c.xprime}

    def weight(self, bits: int) -> int:
        total = 0
        i = 0
        while bits:
            if bits & 1:
                total += self.w[i]
            bits >>= 1
            i += 1
        return total

    def member(self, bits: int) -> bool:
        wx = self.weight(bits)
        if wx != self.n_big:
            return wx < self.n_big
        return (self.b1 & ~bits, bits & ~self.b1) in self.kept


def delta_membership(c: Construction, x: Subset) -> bool:
    """Whether ``x`` lies strictly below ``B'_1`` in the untied order."""
    if x.n != ATOMS:
        raise ValueError(f"expected a subset of [{ATOMS}]")
    return _IntWeights(c).member(x.bits)


def delta_complex(c: Construction) -> PredicateComplex:
    iw = _IntWeights(c)
    return PredicateComplex(ATOMS, iw.member)


# -- verification -----------------------------------------------------------


@dataclass
class CheckResult:
    ok: bool | None
    details: dict

    def to_json(self) -> dict:
        return {"ok": self.ok, **self.details}


@dataclass
class VerificationReport:
    checks: dict[str, CheckResult]

    @property
    def ok(self) -> bool:
        return all(r.ok is not False for r in self.checks.values()) and bool(self.checks)

    @property
    def conclusion(self) -> str:
        return "not threshold" if self.ok else "unverified"

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "conclusion": self.conclusion,
            "checks": {k: r.to_json() for k, r in self.checks.items()},
        }


def _vec(s: Subset) -> np.ndarray:
    return np.array([s.bits >> i & 1 for i in range(s.n)], dtype=np.int64)


def _tv(v: np.ndarray) -> TernaryVector:
    return TernaryVector.from_entries([int(x) for x in v])


def _base_x(base: Sequence[Subset]) -> list[np.ndarray]:
    """``chi(C, D)`` over ``[18]`` for ``D`` earlier than ``C``."""
    vs = [_vec(s) for s in base]
    return [vs[c] - vs[d] for d in range(8) for c in range(d + 1, 8)]


def _check_a(c: Construction) -> CheckResult:
    base_bad = cross_pair_violation(c.base_sets)
    ext_bad = cross_pair_violation(c.ext_sets)
    return CheckResult(base_bad is None and ext_bad is None, {"base": base_bad, "extended": ext_bad})


def _closure_failure(vectors: Sequence[TernaryVector]):
    members = set(vectors)
    defined = 0
    for u in vectors:
        for v in vectors:
            s = restricted_sum(u, v)
            if s is None:
                continue
            defined += 1
            if s not in members:
                return defined, (u.to_json(), v.to_json(), s.to_json())
    return defined, None


def _check_b(c: Construction) -> CheckResult:
    defined, bad = _closure_failure(c.xprime)
    return CheckResult(
        bad is None and len(set(c.xprime)) == 28,
        {"size": len(set(c.xprime)), "defined_sums": defined, "witness": bad},
    )


def _check_c(c: Construction) -> CheckResult:
    """Restricted-sum closure over ``[18]``; every defined sum is a telescoping chain."""
    base = c.base_sets
    vs = [_vec(s) for s in base]
    labelled = {}
    for d in range(8):
        for e in range(d + 1, 8):
            labelled[(e, d)] = _tv(vs[e] - vs[d])
    members = set(labelled.values())
    defined = []
    for (c1, d1), u in labelled.items():
        for (c2, d2), v in labelled.items():
            s = restricted_sum(u, v)
            if s is None:
                continue
            # every defined sum telescopes: C1 > D1 = C2 > D2 or the reverse
            if s not in members or not (d1 == c2 or d2 == c1):
                return CheckResult(False, {"witness": [NAMES[c1], NAMES[d1], NAMES[c2], NAMES[d2]]})
            defined.append((c1, d1, c2, d2))
    mixed = sum(1 for q in defined if len({x < 4 for x in q}) > 1)
    return CheckResult(True, {"size": len(members), "defined_sums": len(defined), "cross_family_chains": mixed})


def _six_vectors(base: Sequence[Subset]) -> list[np.ndarray]:
    a1, a2, a3, a4, b1, b2, b3, _ = (_vec(s) for s in base)
    return [b1 - a4, b2 - a1, b3 - a2, a2 - a1, a3 - a1, a4 - a1]


def _check_d(c: Construction) -> CheckResult:
    rows = [[int(x) for x in v] for v in _six_vectors(c.base_sets)]
    r = exact_rank(rows)
    return CheckResult(r == 6, {"rank": r})


def _check_e(c: Construction) -> CheckResult:
    sub = heavy_forms_by_substitution(c.base_sets)
    closed = heavy_forms_closed(c.base_sets)
    agree = all(sub[a] == closed[a] for a in range(19, 27))
    r = exact_rank([sub[a] for a in range(19, 27)])
    sysm = system_matrix()
    sys_rank = exact_rank(sysm)
    rhs = [_sub(NFORM, _form_of_set(s)) for s in c.base_sets]
    aug_rank = exact_rank([row + list(f) for row, f in zip(sysm, rhs)])
    details = {"rank": r, "forms_agree": agree, "system_rank": sys_rank, "augmented_rank": aug_rank}
    if c.solved:
        w = c.weights
        details["heavy_positive"] = all(x > 0 for x in w[BASE:])
        details["K_bounds"] = 126 < c.k_big < c.n_big
        details["equal_weights"] = all(sum(w[a - 1] for a in s.atoms) == c.n_big for s in c.ext_sets)
    ok = r == 8 and agree and sys_rank == 7 and aug_rank == 7 and all(
        details.get(k, True) for k in ("heavy_positive", "K_bounds", "equal_weights")
    )
    return CheckResult(ok, details)


def _box() -> np.ndarray:
    rng = range(-SEARCH_BOX, SEARCH_BOX + 1)
    return np.array(list(itertools.product(rng, repeat=3)), dtype=np.int64)


_TRIPLES = np.array(list(itertools.combinations(range(BASE), 3)))


def _inverse_blocks(vs: np.ndarray):
    """Float inverses of every invertible 3x3 coordinate block of ``vs``."""
    blocks = np.transpose(vs[:, _TRIPLES], (1, 2, 0)).astype(float)
    good = np.abs(np.linalg.det(blocks)) > 0.5
    return _TRIPLES[good], np.abs(np.linalg.inv(blocks[good]))


def _box_bound(vs: np.ndarray, const: np.ndarray, blocks=None) -> Fraction | None:
    """Exact bound on ``max |a_q|`` over solutions of ``a @ vs + const`` in ``[-1,1]^18``.

    From ``y = R a + c`` on three independent coordinates:
    ``|a_q| <= sum_r |R^-1_qr| (1 + |c_r|)``.  The block is picked in
    floating point and the bound then recomputed exactly.
    """
    triples, absinv = _inverse_blocks(vs) if blocks is None else blocks
    if len(triples) == 0:
        return None
    slack = 1 + np.abs(const[triples])
    bounds = np.einsum("bqr,br->bq", absinv, slack).max(axis=1)
    p = triples[int(np.argmin(bounds))]
    m = [[Fraction(int(vs[q, pr])) for q in range(3)] for pr in p]
    inv = _inverse3(m)
    return max(sum(abs(inv[q][r]) * (1 + abs(int(const[p[r]]))) for r in range(3)) for q in range(3))


def _inverse3(m: list[list[Fraction]]) -> list[list[Fraction]]:
    (a, b, c), (d, e, f), (g, h, i) = m
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    adj = [
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return [[x / det for x in row] for row in adj]


def _solutions(vs: np.ndarray, const: np.ndarray, box: np.ndarray) -> set[tuple[int, ...]]:
    vals = box @ vs + const
    ok = (np.abs(vals) <= 1).all(axis=1)
    return {tuple(int(x) for x in a) for a in box[ok]}


SOLUTIONS_1 = {(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1), (1, 1, 1), (-1, -1, -1)}
SOLUTIONS_2 = {(0, 0, 0), (0, 1, 0), (0, 0, -1), (0, 1, -1)}
SOLUTIONS_3 = {(0, 0, 0), (1, 0, 0), (1, 1, 1), (2, 1, 1)}
SOLUTIONS_4: set = set()


def _box_instances(base: Sequence[Subset]):
    """Yield ``(system, indices, vs, const)`` over every index choice of the four bounded systems."""
    a = [_vec(s) for s in base[:4]]
    b = [_vec(s) for s in base[4:]]
    for j, m, s in itertools.permutations(range(4), 3):
        for i, k, t in itertools.permutations(range(4), 3):
            vs = np.stack([b[j] - a[i], b[m] - a[k], b[s] - a[t]])
            (p,) = set(range(4)) - {i, k, t}
            yield 1, (i, k, t, j, m, s), vs, np.zeros(BASE, dtype=np.int64)
            yield 2, (i, k, t, j, m, s), vs, a[k] - a[t]
            yield 3, (i, k, t, p, j, m, s), vs, a[i] - a[p]
            yield 4, (i, k, t, p, j, m, s), vs, (a[i] - a[p]) + (a[k] - a[t])


def _check_f(c: Construction) -> CheckResult:
    expected = {1: SOLUTIONS_1, 2: SOLUTIONS_2, 3: SOLUTIONS_3, 4: SOLUTIONS_4}
    box = _box()
    counts = {f: 0 for f in expected}
    worst_bound = Fraction(0)
    for system, idx, vs, const in _box_instances(c.base_sets):
        counts[system] += 1
        got = _solutions(vs, const, box)
        if got != expected[system]:
            return CheckResult(
                False,
                {"system": system, "indices": [i + 1 for i in idx], "found": sorted(got), "expected": sorted(expected[system])},
            )
        bound = _box_bound(vs, const)
        if bound is None or bound > SEARCH_BOX:
            return CheckResult(False, {"system": system, "indices": [i + 1 for i in idx], "box_bound": str(bound)})
        worst_bound = max(worst_bound, bound)
    return CheckResult(True, {"instances": counts, "box": SEARCH_BOX, "worst_bound": format_rational(worst_bound)})


def q_list() -> set[tuple[int, ...]]:
    """The listed list of coefficient vectors, signs expanded (paired signs move together)."""
    out = set()
    patterns = [
        (0, 0, 0, 0, 0), (1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 0),
        (1, 0, 0, 1, 0), (1, 1, 1, 1, 0), (2, 1, 1, 1, 0), (0, 0, 0, 0, 1), (0, 1, 0, 0, 1),
        (0, 0, -1, 0, 1), (0, 1, -1, 0, 1),
    ]
    for p in patterns:
        out.add(p)
        out.add(tuple(-x for x in p))
    out.add((1, 1, 1, 0, 0))
    return out


def _check_g(c: Construction) -> CheckResult:
    base = c.base_sets
    a = [_vec(s) for s in base[:4]]
    b = [_vec(s) for s in base[4:]]
    xs = {tuple(int(x) for x in v) for v in _base_x(base)}
    xs |= {tuple(-x for x in v) for v in xs}
    box = _box()
    found: set[tuple[int, ...]] = set()
    checked = 0
    for j, m, s in itertools.permutations(range(4), 3):
        for i, k, t, p in itertools.permutations(range(4)):
            vs = np.stack([b[j] - a[i], b[m] - a[k], b[s] - a[t]])
            blocks = _inverse_blocks(vs)
            for a4, a5 in itertools.product((-1, 0, 1), repeat=2):
                const = a4 * (a[i] - a[p]) + a5 * (a[k] - a[t])
                bound = _box_bound(vs, const, blocks)
                if bound is None or bound > SEARCH_BOX:
                    return CheckResult(False, {"indices": [i + 1, k + 1, t + 1, p + 1, j + 1, m + 1, s + 1], "box_bound": str(bound)})
                for sol in _solutions(vs, const, box):
                    checked += 1
                    v = tuple(int(x) for x in np.array(sol) @ vs + const)
                    if any(v) and v not in xs:
                        return CheckResult(False, {"coefficients": list(sol) + [a4, a5], "vector": list(v)})
                    found.add(sol + (a4, a5))
    listed = q_list()
    return CheckResult(
        True,
        {
            "solutions_checked": checked,
            "distinct_coefficients": len(found),
            "listed_not_found": sorted(listed - found),
            "found_not_listed": sorted(found - listed),
        },
    )


def _check_h(c: Construction) -> CheckResult:
    iw = _IntWeights(c)
    ext = c.ext_sets
    left_in = [iw.member(s.bits) for s in ext[:4]]
    right_out = [not iw.member(s.bits) for s in ext[4:]]
    try:
        TradingTransform(ext[:4], ext[4:])
        trading = True
    except ValueError:
        trading = False
    delta = PredicateComplex(ATOMS, iw.member)
    found = find_cck_star_violation(delta, 4, candidates=(ext, ext))
    ok = all(left_in) and all(right_out) and trading and found is not None
    return CheckResult(
        ok,
        {
            "left_in_delta": left_in,
            "right_out_of_delta": right_out,
            "trading_transform": trading,
            "search_witness": None if found is None else found.to_json(),
        },
    )


def _balanced_digits(x: int, count: int, radix: int) -> list[int] | None:
    digits = []
    for _ in range(count):
        x, d = divmod(x, radix)
        if d > radix // 2:
            d -= radix
            x += 1
        digits.append(d)
    return digits if x == 0 else None


def tie_census(c: Construction) -> list[TernaryVector] | None:
    """Every nonzero ``v`` in ``{-1,0,1}^26`` with ``v . w = 0``.

    Exact for radix base weights: a signed sum of distinct base weights has
    a unique balanced base-201 expansion, so each of the ``3^8`` sign
    patterns on the heavy atoms fixes the base part.  ``None`` when the base
    weights are not of that form.
    """
    if not c.solved or c.weights[:BASE] != default_base_weights():
        return None
    scale = RADIX ** (BASE - 1)
    heavy = [w * scale for w in c.weights[BASE:]]
    if any(h.denominator != 1 for h in heavy):
        return None
    heavy_int = [int(h) for h in heavy]
    ties = []
    for signs in itertools.product((-1, 0, 1), repeat=8):
        if not any(signs):
            continue
        target = -sum(s * h for s, h in zip(signs, heavy_int))
        digits = _balanced_digits(target, BASE, RADIX)
        if digits is None or any(abs(d) > 1 for d in digits):
            continue
        ties.append(TernaryVector.from_entries(digits + list(signs)))
    return ties


def _check_ties(c: Construction) -> CheckResult:
    ties = tie_census(c)
    if ties is None:
        return CheckResult(None, {"skipped": "base weights are not radix weights"})
    expected = set(c.xprime) | {-v for v in c.xprime}
    got = set(ties)
    missing = sorted((v.to_json() for v in expected - got))
    extra = sorted((v.to_json() for v in got - expected))
    return CheckResult(not missing and not extra, {"ties": len(got), "missing": missing[:1], "extra": extra[:1]})


CHECKS = {
    "a_trading_and_noncompatibility": _check_a,
    "b_xprime_closed": _check_b,
    "c_base_case_analysis": _check_c,
    "d_six_vectors_rank_6": _check_d,
    "e_heavy_forms_rank_8": _check_e,
    "f_bounded_solution_sets": _check_f,
    "g_coefficient_list": _check_g,
    "h_cc4_star_witness": _check_h,
    "ties_are_exactly_xprime": _check_ties,
}


def verify_construction(c: Construction) -> VerificationReport:
    """Run the checks in order, stopping at the first failure."""
    if not c.solved:
        raise ConstructionError("solve the weights before verifying")
    results: dict[str, CheckResult] = {}
    for name, check in CHECKS.items():
        results[name] = check(c)
        if results[name].ok is False:
            break
    return VerificationReport(results)


def sample_monotonicity(c: Construction, samples: int, seed: int = 0):
    """Random ``X`` inside ``Y`` with ``Y`` in the complex and ``X`` not, or ``None``.

    Half the ``Y`` are uniform; half start from one of the eight special
    sets with one atom toggled, to land near the boundary weight ``N``.
    """
    iw = _IntWeights(c)
    rng = random.Random(seed)
    special = [s.bits for s in c.ext_sets]
    for r in range(samples):
        if r % 2:
            y = rng.choice(special) ^ (1 << rng.randrange(ATOMS))
        else:
            y = rng.getrandbits(ATOMS)
        x = y & rng.getrandbits(ATOMS)
        if x == y:
            x = y & ~(y & -y) if y else y
        if iw.member(y) and not iw.member(x):
            return Subset(ATOMS, x), Subset(ATOMS, y)
    return None


def save(c: Construction, path: str, report: VerificationReport | None = None) -> None:
    data = c.to_json()
    if report is not None:
        data["report"] = report.to_json()
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load(path: str) -> Construction:
    with open(path) as fh:
        return Construction.from_json(json.load(fh))
