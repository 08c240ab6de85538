"""Qualitative probability orders and their discrete cones.

An order is kept as a ranking of tie-classes over all of ``2^[n]``.  Its cone
is the set of characteristic vectors ``chi(A, B)`` with ``B <= A``, collected
over all ``4^n`` pairs so that rankings breaking the axioms are seen as they
are.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .complexes import SimpleGame, SimplicialComplex
from .core import DimensionError, Subset, TernaryVector, atoms_of, parse_rational, restricted_sum, format_rational

MAX_ORDER_ATOMS = 20
MAX_CONE_ATOMS = 12


class OrderError(ValueError):
    pass


class UntieError(ValueError):
    """An untying set fails a hypothesis of the construction; ``witness`` says which."""

    def __init__(self, message: str, witness: tuple = ()):
        super().__init__(message)
        self.witness = witness


def _subset_sums(weights: Sequence[Fraction]) -> list[Fraction]:
    n = len(weights)
    sums = [Fraction(0)] * (1 << n)
    for b in range(1, 1 << n):
        low = (b & -b).bit_length() - 1
        sums[b] = sums[b & (b - 1)] + weights[low]
    return sums


@dataclass(frozen=True, eq=False)
class QPOrder:
    """A total preorder on ``2^[n]`` given as a ranked list of tie-classes.

    ``classes[0]`` is the bottom class.  Each class is a sorted tuple of
    bitsets.
    """

    n: int
    classes: tuple[tuple[int, ...], ...]
    rank: tuple[int, ...] = field(repr=False)

    @classmethod
    def from_classes(cls, n: int, classes: Iterable[Iterable[int | Subset]]) -> QPOrder:
        if not 1 <= n <= MAX_ORDER_ATOMS:
            raise DimensionError(f"orders are materialised only for 1 <= n <= {MAX_ORDER_ATOMS}")
        norm = []
        rank = [-1] * (1 << n)
        for k, c in enumerate(classes):
            members = sorted(s.bits if isinstance(s, Subset) else s for s in c)
            if not members:
                raise OrderError(f"tie-class {k} is empty")
            for b in members:
                if not 0 <= b < 1 << n:
                    raise DimensionError(f"bitset {b:#x} outside 2^[{n}]")
                if rank[b] != -1:
                    raise OrderError(f"{atoms_of(b)} appears in two classes")
                rank[b] = k
            norm.append(tuple(members))
        missing = [b for b in range(1 << n) if rank[b] == -1]
        if missing:
            raise OrderError(f"classes do not cover 2^[n]; missing {atoms_of(missing[0])}")
        return cls(n, tuple(norm), tuple(rank))

    @classmethod
    def from_ranks(cls, n: int, rank: Sequence) -> QPOrder:
        """Group subsets by any comparable key; equal keys become ties."""
        keys = sorted(set(rank[b] for b in range(1 << n)))
        where = {k: i for i, k in enumerate(keys)}
        classes: list[list[int]] = [[] for _ in keys]
        for b in range(1 << n):
            classes[where[rank[b]]].append(b)
        return cls.from_classes(n, classes)

    def leq(self, a: Subset | int, b: Subset | int) -> bool:
        return self.rank[_bits(a)] <= self.rank[_bits(b)]

    def prec(self, a: Subset | int, b: Subset | int) -> bool:
        return self.rank[_bits(a)] < self.rank[_bits(b)]

    def sim(self, a: Subset | int, b: Subset | int) -> bool:
        return self.rank[_bits(a)] == self.rank[_bits(b)]

    def is_linear(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def ties(self) -> list[list[Subset]]:
        return [[Subset(self.n, b) for b in c] for c in self.classes if len(c) > 1]

    def to_json(self) -> dict:
        return {"n": self.n, "classes": [[atoms_of(b) for b in c] for c in self.classes]}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QPOrder) and self.n == other.n and self.classes == other.classes

    def __hash__(self) -> int:
        return hash((self.n, self.classes))

    def describe(self, limit: int | None = None) -> str:
        """Human-readable ranking, e.g. ``0 < 5 < 4 < 3~45 < ...``."""
        parts = []
        for c in self.classes[:limit]:
            parts.append("~".join(_label(b) for b in c))
        return " < ".join(parts)


def _label(bits: int) -> str:
    return "".join(map(str, atoms_of(bits))) or "0"


def _bits(x: Subset | int) -> int:
    return x.bits if isinstance(x, Subset) else x


def order_from_weights(weights: Sequence) -> QPOrder:
    """The representable order ``A <= B iff w(A) <= w(B)``."""
    w = [parse_rational(x) for x in weights]
    n = len(w)
    if n == 0:
        raise DimensionError("need at least one weight")
    if n > MAX_ORDER_ATOMS:
        raise DimensionError(f"order materialisation is limited to n <= {MAX_ORDER_ATOMS}")
    if any(x <= 0 for x in w):
        raise OrderError("weights must be strictly positive")
    return QPOrder.from_ranks(n, _subset_sums(w))


def load_order(data: dict) -> QPOrder:
    """Read ``{"n", "weights"}`` or ``{"n", "classes"}`` JSON."""
    n = data["n"]
    if "weights" in data:
        if len(data["weights"]) != n:
            raise OrderError(f"expected {n} weights, got {len(data['weights'])}")
        return order_from_weights(data["weights"])
    return QPOrder.from_classes(n, [[Subset.of(n, s) for s in c] for c in data["classes"]])


@dataclass(frozen=True)
class DiscreteCone:
    n: int
    vectors: frozenset[TernaryVector]

    def __contains__(self, v: TernaryVector) -> bool:
        return v in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def without(self, drop: Iterable[TernaryVector]) -> DiscreteCone:
        return DiscreteCone(self.n, self.vectors - frozenset(drop))


def _disjoint_pairs(n: int):
    """All ``(P, Q)`` with ``P & Q == 0``, i.e. every vector of ``T^n``."""
    for digits in product((0, 1, 2), repeat=n):
        p = q = 0
        for i, d in enumerate(digits):
            if d == 1:
                p |= 1 << i
            elif d == 2:
                q |= 1 << i
        yield p, q


def all_ternary(n: int) -> list[TernaryVector]:
    return [TernaryVector(n, p, q) for p, q in _disjoint_pairs(n)]


def cone_pairs(order: QPOrder, strict: bool = False) -> list[tuple[int, int]]:
    """Sorted ``(A - B, B - A)`` over all pairs with ``B <= A`` (``B < A`` if ``strict``).

    All ``4^n`` pairs are scanned, not just disjoint ones: for a ranking that
    breaks de Finetti's axiom the two differ.
    """
    n = order.n
    if n > MAX_CONE_ATOMS:
        raise DimensionError(f"cones are enumerated only for n <= {MAX_CONE_ATOMS}")
    size = 1 << n
    rank = np.asarray(order.rank)
    idx = np.arange(size, dtype=np.int64)
    seen = np.zeros(size * size, dtype=bool)
    for a in range(size):
        b = idx[rank < rank[a]] if strict else idx[rank <= rank[a]]
        seen[(a & ~b) * size + (b & ~a)] = True
    return [(int(c) >> n, int(c) & (size - 1)) for c in np.flatnonzero(seen)]


def cone_of(order: QPOrder) -> DiscreteCone:
    """``{chi(A, B) : B <= A}``, the zero vector included."""
    n = order.n
    return DiscreteCone(n, frozenset(TernaryVector(n, p, q) for p, q in cone_pairs(order)))


@dataclass
class ConeReport:
    d1: bool
    d2: bool
    d3: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.d1 and self.d2 and self.d3

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"D1": self.d1, "D2": self.d2, "D3": self.d3, "witnesses": _witness_json(self.witnesses)}


def _witness_json(witnesses: dict) -> dict:
    def one(x):
        return x.to_json() if hasattr(x, "to_json") else x

    return {k: [one(x) for x in v] for k, v in witnesses.items()}


def verify_cone_axioms(cone: DiscreteCone) -> ConeReport:
    """Check D1-D3 exhaustively and keep the first counterexample of each."""
    n = cone.n
    vecs = cone.vectors
    witnesses: dict = {}
    d1 = True
    for i in range(1, n + 1):
        e = TernaryVector.basis(n, i)
        if e not in vecs:
            d1 = False
            witnesses["D1"] = ("missing", e)
            break
        if -e in vecs:
            d1 = False
            witnesses["D1"] = ("contains negative", -e)
            break
    d2 = True
    for x in all_ternary(n):
        if x not in vecs and -x not in vecs:
            d2 = False
            witnesses["D2"] = (x,)
            break
    d3 = True
    members = sorted(vecs, key=lambda v: (v.pos, v.neg))
    for a, x in enumerate(members):
        for y in members[a:]:
            s = restricted_sum(x, y)
            if s is not None and s not in vecs:
                d3 = False
                witnesses["D3"] = (x, y, s)
                break
        if not d3:
            break
    return ConeReport(d1, d2, d3, witnesses)


@dataclass
class QPAxiomReport:
    nontrivial: bool
    definetti: bool
    cone: ConeReport | None
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.nontrivial and self.definetti and self.cone is not None and self.cone.ok

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {
            "nontrivial": self.nontrivial,
            "definetti": self.definetti,
            "cone": None if self.cone is None else self.cone.to_json(),
            "witnesses": _witness_json(self.witnesses),
        }


def check_qp_axioms(order: QPOrder) -> QPAxiomReport:
    """Full axiom check with witnesses.

    Besides D1-D3 on the cone, every pair ``(A, B)`` must compare the same
    way as ``(A \\ B, B \\ A)``; that is de Finetti's axiom, and it is what
    makes the cone a faithful encoding of the order.
    """
    n = order.n
    r = order.rank
    witnesses: dict = {}
    nontrivial = True
    for b in range(1, 1 << n):
        if r[b] < r[0]:
            nontrivial = False
            witnesses["nontrivial"] = (Subset(n, b),)
            break
    definetti = True
    for a in range(1 << n):
        for b in range(1 << n):
            common = a & b
            if common and (r[a] <= r[b]) != (r[a & ~common] <= r[b & ~common]):
                definetti = False
                witnesses["definetti"] = (Subset(n, a), Subset(n, b), Subset(n, common))
                break
        if not definetti:
            break
    cone = cone_of(order) if n <= MAX_CONE_ATOMS else None
    report = verify_cone_axioms(cone) if cone is not None else None
    return QPAxiomReport(nontrivial, definetti, report, witnesses)


def verify_qp_axioms(order: QPOrder) -> bool:
    return check_qp_axioms(order).ok


def initial_segment(order: QPOrder, t: Subset) -> SimplicialComplex:
    """``{X : X < T}`` (strictly below)."""
    if t.n != order.n:
        raise DimensionError("threshold set lives over a different n")
    rt = order.rank[t.bits]
    return SimplicialComplex(order.n, frozenset(b for b in range(1 << order.n) if order.rank[b] < rt))


def terminal_segment(order: QPOrder, t: Subset) -> SimpleGame:
    """The game whose winning coalitions are ``{X : T <= X}``."""
    return SimpleGame(initial_segment(order, t))


def hyperplane_section(order: QPOrder, weights: Sequence) -> frozenset[TernaryVector]:
    """``S``: cone vectors orthogonal to ``weights``."""
    w = [parse_rational(x) for x in weights]
    return frozenset(v for v in cone_of(order).vectors if v.dot(w) == 0)


def order_from_cone(n: int, cone: DiscreteCone, coarse: QPOrder | None = None) -> QPOrder:
    """Rebuild the order ``B <= A iff chi(A, B) in cone``.

    If ``coarse`` is given, the new order is assumed to refine it, so only
    members of the same coarse class are compared against each other.
    """
    vecs = cone.vectors

    def cmp(a: int, b: int) -> int:
        le = TernaryVector(n, b & ~a, a & ~b) in vecs
        ge = TernaryVector(n, a & ~b, b & ~a) in vecs
        if le and ge:
            return 0
        return -1 if le else 1

    groups = coarse.classes if coarse is not None else (tuple(range(1 << n)),)
    classes: list[list[int]] = []
    for g in groups:
        ordered = sorted(g, key=cmp_to_key(cmp))
        run = [ordered[0]]
        for b in ordered[1:]:
            if cmp(run[0], b) == 0:
                run.append(b)
            else:
                classes.append(run)
                run = [b]
        classes.append(run)
    return QPOrder.from_classes(n, classes)


def untie(order: QPOrder, keep: Iterable[TernaryVector], weights: Sequence) -> QPOrder:
    """Drop ``S \\ keep`` from the cone of a representable order.

    ``weights`` must represent ``order``.  ``keep`` has to lie in the
    hyperplane section ``S``, meet every pair ``{s, -s}`` of it, and be
    closed under restricted sum; otherwise :class:`UntieError` is raised with
    a witness.  The result almost agrees with ``weights``.
    """
    w = [parse_rational(x) for x in weights]
    n = order.n
    if len(w) != n:
        raise DimensionError(f"expected {n} weights")
    if order != order_from_weights(w):
        raise UntieError("weights do not represent the order")
    keep = frozenset(keep) | {TernaryVector.zero(n)}
    cone = cone_of(order)
    section = frozenset(v for v in cone.vectors if v.dot(w) == 0)
    for x in sorted(keep, key=_vkey):
        if x not in section:
            raise UntieError(f"{x} is not in the hyperplane section", (x,))
    witness = closure_violation(keep)
    if witness is not None:
        x, y, s = witness
        raise UntieError(f"{x} (+) {y} = {s} is not kept", witness)
    for s in sorted(section, key=_vkey):
        if s not in keep and -s not in keep:
            raise UntieError(f"neither {s} nor its negative is kept", (s,))
    new_cone = cone.without(section - keep)
    report = verify_cone_axioms(new_cone)
    if not report.ok:
        raise UntieError("untied set is not a discrete cone", tuple(report.witnesses.items()))
    return order_from_cone(n, new_cone, coarse=order)


def _vkey(v: TernaryVector) -> tuple[int, int]:
    return (v.pos, v.neg)


def closure_violation(vectors: Iterable[TernaryVector]):
    """A triple ``(x, y, x (+) y)`` with the restricted sum defined but missing, or ``None``.

    Sums whose negation is present are reported first: no enlargement of
    the set can repair those.
    """
    vs = sorted(set(vectors), key=_vkey)
    present = set(vs)
    fallback = None
    for a, x in enumerate(vs):
        for y in vs[a:]:
            s = restricted_sum(x, y)
            if s is None or s in present:
                continue
            if -s in present:
                return x, y, s
            if fallback is None:
                fallback = (x, y, s)
    return fallback


def complete_untying_set(section: Iterable[TernaryVector], seed: Iterable[TernaryVector]) -> frozenset[TernaryVector] | None:
    """Extend ``seed`` to a restricted-sum-closed set meeting every ``{s, -s}``.

    Backtracking over the sign of each remaining pair with closure
    propagation; pairs are decided in a fixed order, so the answer is
    deterministic.  Returns ``None`` if no such extension exists.
    """
    section = frozenset(section)
    pairs = sorted({min(s, -s, key=_vkey) for s in section if not s.is_zero()}, key=_vkey)

    def propagate(chosen: set[TernaryVector]) -> set[TernaryVector] | None:
        chosen = set(chosen)
        frontier = list(chosen)
        while frontier:
            x = frontier.pop()
            for y in list(chosen):
                s = restricted_sum(x, y)
                if s is None or s in chosen:
                    continue
                if s not in section or -s in chosen:
                    return None
                chosen.add(s)
                frontier.append(s)
        return chosen

    def search(chosen: set[TernaryVector], idx: int) -> set[TernaryVector] | None:
        while idx < len(pairs) and (pairs[idx] in chosen or -pairs[idx] in chosen):
            idx += 1
        if idx == len(pairs):
            return chosen
        for pick in (pairs[idx], -pairs[idx]):
            nxt = propagate(chosen | {pick})
            if nxt is not None:
                found = search(nxt, idx + 1)
                if found is not None:
                    return found
        return None

    start = propagate(set(seed))
    if start is None:
        return None
    zero = [s for s in section if s.is_zero()]
    result = search(start, 0)
    return None if result is None else frozenset(result | set(zero))


def weights_json(weights: Sequence) -> list[str]:
    return [format_rational(parse_rational(x)) for x in weights]


def load_order_file(path: str) -> QPOrder:
    with open(path) as fh:
        return load_order(json.load(fh))
