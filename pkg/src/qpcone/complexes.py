"""Simplicial complexes, their dual simple games, and shiftedness."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .core import DimensionError, Subset, atoms_of, bits_of

MAX_EXPLICIT_ATOMS = 20


class Complex:
    """Anything that can answer face membership over ``[n]``.

    :class:`SimplicialComplex` stores its faces; :class:`PredicateComplex`
    asks a callable, which is the only option once ``2^n`` is too big to
    materialise.
    """

    n: int

    def contains_bits(self, bits: int) -> bool:
        raise NotImplementedError

    def __contains__(self, item: Subset | int) -> bool:
        if isinstance(item, Subset):
            if item.n != self.n:
                raise DimensionError(f"subset over n={item.n}, complex over n={self.n}")
            return self.contains_bits(item.bits)
        return self.contains_bits(item)


@dataclass(frozen=True)
class PredicateComplex(Complex):
    """A complex given by a membership predicate on bitsets.

    Downward closure is the caller's responsibility.
    """

    n: int
    predicate: Callable[[int], bool] = field(compare=False)

    def contains_bits(self, bits: int) -> bool:
        return self.predicate(bits)


@dataclass(frozen=True)
class SimplicialComplex(Complex):
    """A downward-closed family of subsets of ``[n]``, stored explicitly."""

    n: int
    faces: frozenset[int]

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_EXPLICIT_ATOMS:
            raise DimensionError(f"explicit complexes need 1 <= n <= {MAX_EXPLICIT_ATOMS}")
        object.__setattr__(self, "faces", frozenset(self.faces))
        bad = next((f for f in self.faces if not is_down_closed_at(self.faces, f)), None)
        if bad is not None:
            raise ValueError(f"family is not downward closed at {atoms_of(bad)}")

    def contains_bits(self, bits: int) -> bool:
        return bits in self.faces

    def __len__(self) -> int:
        return len(self.faces)

    def face_subsets(self) -> list[Subset]:
        return [Subset(self.n, b) for b in sorted(self.faces)]

    @property
    def maximal_faces(self) -> list[Subset]:
        return [Subset(self.n, b) for b in _maximal(self.faces, self.n)]

    @property
    def minimal_nonfaces(self) -> list[Subset]:
        return [Subset(self.n, b) for b in _minimal_nonfaces(self.faces, self.n)]

    def dual_game(self) -> SimpleGame:
        return SimpleGame(self)

    def to_json(self) -> dict:
        return {"n": self.n, "generators": [s.to_json() for s in self.maximal_faces]}

    @classmethod
    def from_json(cls, data: dict) -> SimplicialComplex:
        n = data["n"]
        return from_generators(n, [Subset.of(n, g) for g in data["generators"]])

    @classmethod
    def load(cls, path: str) -> SimplicialComplex:
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def is_down_closed_at(faces: frozenset[int] | set[int], f: int) -> bool:
    """Whether every facet-minus-one-atom of ``f`` is present."""
    rest = f
    while rest:
        low = rest & -rest
        if f & ~low not in faces:
            return False
        rest ^= low
    return True


def _maximal(faces: Iterable[int], n: int) -> list[int]:
    faces = set(faces)
    out = []
    for f in sorted(faces):
        if not any(f | (1 << i) in faces for i in range(n) if not f >> i & 1):
            out.append(f)
    return out


def _minimal_nonfaces(faces: frozenset[int], n: int) -> list[int]:
    """Non-faces all of whose one-smaller subsets are faces."""
    out = []
    for b in range(1 << n):
        if b in faces:
            continue
        if is_down_closed_at(faces, b):
            out.append(b)
    return out


@dataclass(frozen=True)
class SimpleGame:
    """The simple game whose losing coalitions are the faces of a complex."""

    losing: SimplicialComplex

    @property
    def n(self) -> int:
        return self.losing.n

    def is_winning(self, item: Subset | int) -> bool:
        return item not in self.losing

    def winning_bits(self) -> set[int]:
        return {b for b in range(1 << self.n) if b not in self.losing.faces}

    @property
    def minimal_winning(self) -> list[Subset]:
        return self.losing.minimal_nonfaces

    @classmethod
    def from_winning(cls, n: int, winning: Iterable[Subset | int]) -> SimpleGame:
        win = {w.bits if isinstance(w, Subset) else w for w in winning}
        return cls(SimplicialComplex(n, frozenset(b for b in range(1 << n) if b not in win)))


def from_generators(n: int, generators: Sequence[Subset]) -> SimplicialComplex:
    """Smallest complex containing every generator.

    An empty generator list gives the empty family; ask for ``[∅]`` to get
    the complex ``{∅}``.
    """
    faces: set[int] = set()
    for g in generators:
        if g.n != n:
            raise DimensionError(f"generator over n={g.n}, expected n={n}")
        stack = [g.bits]
        while stack:
            f = stack.pop()
            if f in faces:
                continue
            faces.add(f)
            rest = f
            while rest:
                low = rest & -rest
                stack.append(f & ~low)
                rest ^= low
    return SimplicialComplex(n, frozenset(faces))


def shift_closure(n: int, generators: Sequence[Subset], vertex_order: Sequence[int] | None = None) -> SimplicialComplex:
    """Smallest complex containing the generators that is shifted w.r.t. ``vertex_order``.

    ``vertex_order`` lists the atoms from earliest to latest; replacing any
    vertex of a face by an earlier vertex must give a face again.
    """
    order = list(range(1, n + 1)) if vertex_order is None else list(vertex_order)
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError("vertex_order must be a permutation of 1..n")
    position = {a: k for k, a in enumerate(order)}
    earlier = {a: bits_of(order[: position[a]], n) for a in order}

    faces: set[int] = set()
    stack = []
    for g in generators:
        if g.n != n:
            raise DimensionError(f"generator over n={g.n}, expected n={n}")
        stack.append(g.bits)
    while stack:
        f = stack.pop()
        if f in faces:
            continue
        faces.add(f)
        for a in atoms_of(f):
            without = f & ~(1 << (a - 1))
            stack.append(without)
            for b in atoms_of(earlier[a] & ~f):
                stack.append(without | 1 << (b - 1))
    return SimplicialComplex(n, frozenset(faces))


def isbell_leq(game: SimpleGame, j: int, i: int) -> bool:
    """``j <=_I i``: swapping ``j`` out for ``i`` never turns a win into a loss."""
    n = game.n
    if i == j:
        raise ValueError("isbell_leq compares two distinct players")
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    faces = game.losing.faces
    rest = ((1 << n) - 1) & ~(bi | bj)
    x = rest
    while True:
        # X+j winning and X+i losing breaks the implication
        if (x | bj) not in faces and (x | bi) in faces:
            return False
        if x == 0:
            return True
        x = (x - 1) & rest


def _isbell_matrix(delta: SimplicialComplex) -> dict[tuple[int, int], bool]:
    game = delta.dual_game()
    atoms = range(1, delta.n + 1)
    return {(j, i): isbell_leq(game, j, i) for j in atoms for i in atoms if i != j}


def is_shifted(delta: SimplicialComplex) -> list[int] | None:
    """A shifting vertex order (earliest first) if the complex is shifted, else ``None``.

    The complex is shifted iff Isbell's relation on its dual game is total;
    the witness is its linear extension with smallest-atom-first tie-breaking.
    """
    n = delta.n
    leq = _isbell_matrix(delta)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if not (leq[i, j] or leq[j, i]):
                return None
    # Kahn's algorithm over the strict part
    preds = {a: {b for b in range(1, n + 1) if b != a and leq[b, a] and not leq[a, b]} for a in range(1, n + 1)}
    ready = [a for a in range(1, n + 1) if not preds[a]]
    heapq.heapify(ready)
    order = []
    while ready:
        a = heapq.heappop(ready)
        order.append(a)
        for b in range(1, n + 1):
            if a in preds[b]:
                preds[b].discard(a)
                if not preds[b]:
                    heapq.heappush(ready, b)
    return order


def shifting_violation(delta: Complex, vertex_order: Sequence[int] | None = None):
    """``(i, j, F)`` with ``i`` before ``j``, ``F + j`` a face and ``F + i`` not; ``None`` if shifted.

    This is shiftedness with respect to the given order specifically.
    """
    n = delta.n
    order = list(range(1, n + 1)) if vertex_order is None else list(vertex_order)
    full = (1 << n) - 1
    for p, i in enumerate(order):
        for j in order[p + 1 :]:
            bi, bj = 1 << (i - 1), 1 << (j - 1)
            for x in sorted(_submask_list(full & ~(bi | bj))):
                if delta.contains_bits(x | bj) and not delta.contains_bits(x | bi):
                    return i, j, Subset(n, x)
    return None


def has_shift_obstruction(delta: Complex, vertex_order: Sequence[int] | None = None):
    """Find ``(i, j, A, B)`` with ``A+i, B+j`` faces and ``B+i, A+j`` non-faces.

    ``i`` is the earlier of the two atoms in ``vertex_order`` and neither
    ``A`` nor ``B`` contains ``i`` or ``j``.  Such a configuration rules out
    every shifting order at once, so ``None`` means the complex is shifted.
    """
    n = delta.n
    order = list(range(1, n + 1)) if vertex_order is None else list(vertex_order)
    full = (1 << n) - 1
    for p, i in enumerate(order):
        for j in order[p + 1 :]:
            bi, bj = 1 << (i - 1), 1 << (j - 1)
            rest = full & ~(bi | bj)
            a_found = b_found = None
            for x in sorted(_submask_list(rest)):
                in_i, in_j = delta.contains_bits(x | bi), delta.contains_bits(x | bj)
                if a_found is None and in_i and not in_j:
                    a_found = x
                if b_found is None and in_j and not in_i:
                    b_found = x
                if a_found is not None and b_found is not None:
                    return i, j, Subset(n, a_found), Subset(n, b_found)
    return None


def _submask_list(mask: int) -> list[int]:
    out = []
    sub = mask
    while True:
        out.append(sub)
        if sub == 0:
            return out
        sub = (sub - 1) & mask


def all_complexes(n: int, include_void: bool = False) -> list[SimplicialComplex]:
    """Every downward-closed family on ``[n]``, each containing ``∅`` unless ``include_void``.

    Built by deciding subsets in order of increasing size, so a set can be
    added only when all of its one-smaller subsets already are.
    """
    if n > 5:
        raise DimensionError("enumerating all complexes is only sensible for n <= 5")
    subsets = sorted(range(1 << n), key=lambda b: (b.bit_count(), b))
    out: list[SimplicialComplex] = []

    def go(idx: int, faces: set[int]) -> None:
        if idx == len(subsets):
            out.append(SimplicialComplex(n, frozenset(faces)))
            return
        b = subsets[idx]
        go(idx + 1, faces)
        if is_down_closed_at(faces, b):
            faces.add(b)
            go(idx + 1, faces)
            faces.discard(b)

    go(1, {0})
    if include_void:
        out.append(SimplicialComplex(n, frozenset()))
    return out
