"""Subsets, ternary vectors, rationals and trading transforms.

Everything here is an immutable value.  A subset of ``[n] = {1, ..., n}`` is
stored as an integer bitset (bit ``i - 1`` set iff atom ``i`` is a member) and
a ternary vector in ``{-1, 0, 1}^n`` as a pair of disjoint bitsets holding its
``+1`` and ``-1`` coordinates.  With that encoding the characteristic vector
``chi(A, B)`` is just ``(A \\ B, B \\ A)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

MAX_ATOMS = 64


class DimensionError(ValueError):
    """Operands live over different ground sets, or an atom is out of range."""


class ShapeError(ValueError):
    """Sequences that must have equal length do not."""


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_ATOMS:
        raise DimensionError(f"atom count must be in 1..{MAX_ATOMS}, got {n}")


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def atoms_of(bits: int) -> list[int]:
    """Sorted 1-based atoms of a bitset."""
    out = []
    i = 1
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return out


def bits_of(atoms: Iterable[int], n: int) -> int:
    bits = 0
    for a in atoms:
        if not 1 <= a <= n:
            raise DimensionError(f"atom {a} outside 1..{n}")
        bits |= 1 << (a - 1)
    return bits


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True, slots=True)
class Subset:
    """A subset of ``[n]`` backed by an integer bitset."""

    n: int
    bits: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if self.bits < 0 or self.bits >> self.n:
            raise DimensionError(f"bits {self.bits:#x} do not fit in n={self.n}")

    @classmethod
    def of(cls, n: int, atoms: Iterable[int] = ()) -> Subset:
        return cls(n, bits_of(atoms, n))

    @classmethod
    def full(cls, n: int) -> Subset:
        return cls(n, (1 << n) - 1)

    @property
    def atoms(self) -> list[int]:
        return atoms_of(self.bits)

    def __len__(self) -> int:
        return popcount(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.atoms)

    def __contains__(self, atom: int) -> bool:
        return 1 <= atom <= self.n and bool(self.bits >> (atom - 1) & 1)

    def __lt__(self, other: Subset) -> bool:
        return self.bits < other.bits

    def _same(self, other: Subset) -> None:
        if self.n != other.n:
            raise DimensionError(f"n mismatch: {self.n} vs {other.n}")

    def __or__(self, other: Subset) -> Subset:
        self._same(other)
        return Subset(self.n, self.bits | other.bits)

    def __and__(self, other: Subset) -> Subset:
        self._same(other)
        return Subset(self.n, self.bits & other.bits)

    def __sub__(self, other: Subset) -> Subset:
        self._same(other)
        return Subset(self.n, self.bits & ~other.bits)

    def complement(self) -> Subset:
        return Subset(self.n, ((1 << self.n) - 1) & ~self.bits)

    def issubset(self, other: Subset) -> bool:
        self._same(other)
        return self.bits & ~other.bits == 0

    def isdisjoint(self, other: Subset) -> bool:
        self._same(other)
        return self.bits & other.bits == 0

    def to_json(self) -> list[int]:
        return self.atoms

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.atoms)) + "}"

    def __repr__(self) -> str:
        return f"Subset(n={self.n}, {self})"


@dataclass(frozen=True, slots=True)
class TernaryVector:
    """An element of ``{-1, 0, 1}^n`` stored as disjoint ``pos``/``neg`` bitsets."""

    n: int
    pos: int
    neg: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if self.pos & self.neg:
            raise ValueError("a coordinate cannot be both +1 and -1")
        if (self.pos | self.neg) >> self.n:
            raise DimensionError(f"vector does not fit in n={self.n}")

    @classmethod
    def from_entries(cls, entries: Sequence[int]) -> TernaryVector:
        pos = neg = 0
        for i, e in enumerate(entries):
            if e == 1:
                pos |= 1 << i
            elif e == -1:
                neg |= 1 << i
            elif e != 0:
                raise ValueError(f"entry {e} at position {i + 1} is not in {{-1,0,1}}")
        return cls(len(entries), pos, neg)

    @classmethod
    def zero(cls, n: int) -> TernaryVector:
        return cls(n, 0, 0)

    @classmethod
    def basis(cls, n: int, i: int) -> TernaryVector:
        """The standard basis vector ``e_i`` (1-based)."""
        return cls(n, 1 << (i - 1), 0)

    @property
    def entries(self) -> tuple[int, ...]:
        return tuple(
            1 if self.pos >> i & 1 else -1 if self.neg >> i & 1 else 0 for i in range(self.n)
        )

    def is_zero(self) -> bool:
        return self.pos == 0 and self.neg == 0

    def __neg__(self) -> TernaryVector:
        return TernaryVector(self.n, self.neg, self.pos)

    def dot(self, weights: Sequence) -> Fraction | int:
        return sum(weights[i - 1] for i in atoms_of(self.pos)) - sum(
            weights[i - 1] for i in atoms_of(self.neg)
        )

    def to_json(self) -> list[int]:
        return list(self.entries)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.entries)) + ")"


def characteristic_vector(a: Subset, b: Subset) -> TernaryVector:
    """``chi(A, B) = chi(A) - chi(B)``."""
    if a.n != b.n:
        raise DimensionError(f"n mismatch: {a.n} vs {b.n}")
    return TernaryVector(a.n, a.bits & ~b.bits, b.bits & ~a.bits)


def restricted_sum(u: TernaryVector, v: TernaryVector) -> TernaryVector | None:
    """Coordinatewise sum if it stays in ``{-1,0,1}^n``, otherwise ``None``."""
    if u.n != v.n:
        raise DimensionError(f"n mismatch: {u.n} vs {v.n}")
    if u.pos & v.pos or u.neg & v.neg:
        return None
    return TernaryVector(u.n, (u.pos | v.pos) & ~(u.neg | v.neg), (u.neg | v.neg) & ~(u.pos | v.pos))


def _column_counts(sets: Sequence[Subset], n: int) -> list[int]:
    counts = [0] * n
    for s in sets:
        for a in s.atoms:
            counts[a - 1] += 1
    return counts


def is_trading_transform(left: Sequence[Subset], right: Sequence[Subset]) -> bool:
    """True iff every atom occurs equally often on both sides."""
    if len(left) != len(right):
        raise ShapeError(f"left has {len(left)} sets, right has {len(right)}")
    if not left:
        return True
    n = left[0].n
    if any(s.n != n for s in (*left, *right)):
        raise DimensionError("all sets of a trading transform must share n")
    return _column_counts(left, n) == _column_counts(right, n)


@dataclass(frozen=True)
class TradingTransform:
    """``(A_1, ..., A_k; B_1, ..., B_k)`` with matching atom multiplicities.

    Repeated sets are allowed.
    """

    left: tuple[Subset, ...]
    right: tuple[Subset, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        if not is_trading_transform(self.left, self.right):
            raise ValueError("atom multiplicities differ between the two sides")

    def __len__(self) -> int:
        return len(self.left)

    @property
    def n(self) -> int:
        return self.left[0].n

    def canonical(self) -> TradingTransform:
        return TradingTransform(tuple(sorted(self.left)), tuple(sorted(self.right)))

    def to_json(self) -> dict:
        return {
            "left": [s.to_json() for s in self.left],
            "right": [s.to_json() for s in self.right],
        }

    @classmethod
    def from_json(cls, n: int, data: dict) -> TradingTransform:
        return cls(
            tuple(Subset.of(n, s) for s in data["left"]),
            tuple(Subset.of(n, s) for s in data["right"]),
        )

    def __str__(self) -> str:
        return "(" + ", ".join(map(str, self.left)) + "; " + ", ".join(map(str, self.right)) + ")"


def is_compatible(pair1: tuple[Subset, Subset], pair2: tuple[Subset, Subset]) -> bool:
    """Whether two pairs ``(A_1, B_1)`` and ``(A_2, B_2)`` are compatible.

    Compatible means every atom shared by ``A_1`` and ``A_2`` lies in
    ``B_1 | B_2``, and every atom shared by ``B_1`` and ``B_2`` lies in
    ``A_1 | A_2``.
    """
    (a1, b1), (a2, b2) = pair1, pair2
    n = a1.n
    if any(s.n != n for s in (b1, a2, b2)):
        raise DimensionError("pairs must share n")
    left_clash = a1.bits & a2.bits & ~(b1.bits | b2.bits)
    right_clash = b1.bits & b2.bits & ~(a1.bits | a2.bits)
    return left_clash == 0 and right_clash == 0


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` (or an integer) into an exact ``Fraction``."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    text = text.strip()
    if not text or any(c in text for c in ".eE"):
        raise ValueError(f"not an exact rational literal: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError as exc:
        raise ValueError(f"zero denominator: {text!r}") from exc


def format_rational(r: Fraction | int) -> str:
    r = Fraction(r)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"
