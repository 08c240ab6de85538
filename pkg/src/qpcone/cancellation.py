"""Searching for violated cancellation conditions.

``CC_k*`` for a complex: a length-``k`` trading transform with every left set
a face and every right set a non-face.  ``CC_k`` for an order: a length-``k``
trading transform with ``A_i <= B_i`` for all ``i``, strictly for one.

Two engines are provided.

``dfs``
    Depth-first over multisets of candidate sets in nondecreasing bitset
    order, pruned on the residual atom counts.  The first hit is the
    canonically smallest witness.  Respects the node budget and raises
    :class:`Inconclusive` when it runs out.

``grid``
    Dense reachability over the box of atom-count vectors with numpy.  For
    complexes it works with maximal faces and minimal non-faces only: a
    ``CC_k*`` violation exists iff ``k`` maximal faces dominate ``k`` minimal
    non-faces coordinatewise (shrink the faces to restore equality).  Exact
    and budget-free, but limited by the box size.

``auto`` takes the grid whenever the box fits and the complex is explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import Complex, SimplicialComplex
from .core import Subset, TradingTransform, atoms_of, is_compatible, is_trading_transform
from .qporder import QPOrder, cone_pairs

GRID_CELLS = 4_000_000


class Inconclusive(RuntimeError):
    """The node budget ran out before the search space was exhausted."""

    def __init__(self, nodes: int):
        super().__init__(f"search budget exhausted after {nodes} nodes")
        self.nodes = nodes


@dataclass(frozen=True)
class SearchLimits:
    max_k: int = 8
    max_set_size: int | None = None
    node_budget: int = 5_000_000
    deterministic_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_k < 1 or self.node_budget < 1:
            raise ValueError("search limits must be positive")
        if self.max_set_size is not None and self.max_set_size < 0:
            raise ValueError("max_set_size must be non-negative")


DEFAULT_LIMITS = SearchLimits()


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise Inconclusive(self.used)


# -- complexes -------------------------------------------------------------


def find_cck_star_violation(
    delta: Complex,
    k: int,
    limits: SearchLimits = DEFAULT_LIMITS,
    candidates: tuple[Sequence[Subset], Sequence[Subset]] | None = None,
    engine: str = "auto",
) -> TradingTransform | None:
    """A ``CC_k*`` witness ``(A_1..A_k; B_1..B_k)`` or ``None``.

    ``candidates`` restricts the left and right sets (required for
    predicate-backed complexes); they are filtered by membership anyway.
    ``engine`` is ``"dfs"``, ``"grid"`` or ``"auto"``.
    """
    if k < 2:
        raise ValueError("CC_k* is defined for k >= 2")
    if k > limits.max_k:
        raise ValueError(f"k={k} exceeds max_k={limits.max_k}")
    n = delta.n
    if candidates is None:
        if not isinstance(delta, SimplicialComplex):
            raise ValueError("predicate-backed complexes need explicit candidates")
        left = sorted(delta.faces)
        right = [b for b in range(1 << n) if b not in delta.faces]
    else:
        left = sorted({s.bits for s in candidates[0] if delta.contains_bits(s.bits)})
        right = sorted({s.bits for s in candidates[1] if not delta.contains_bits(s.bits)})
    if limits.max_set_size is not None:
        left = [b for b in left if b.bit_count() <= limits.max_set_size]
        right = [b for b in right if b.bit_count() <= limits.max_set_size]

    if engine == "auto":
        use_grid = (
            candidates is None
            and limits.max_set_size is None
            and isinstance(delta, SimplicialComplex)
            and (k + 1) ** n <= GRID_CELLS
        )
        engine = "grid" if use_grid else "dfs"
    if engine == "grid":
        if not isinstance(delta, SimplicialComplex) or candidates is not None:
            raise ValueError("the grid engine needs an explicit complex and no candidate list")
        found = _star_grid(delta, k)
    elif engine == "dfs":
        found = _star_dfs(n, left, right, k, _Budget(limits.node_budget))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if found is None:
        return None
    a, b = found
    return TradingTransform(tuple(Subset(n, x) for x in a), tuple(Subset(n, x) for x in b))


def _star_dfs(n: int, left: list[int], right: list[int], k: int, budget: _Budget):
    right_set = set(right)
    right_atoms = [atoms_of(b) for b in right]
    left_atoms = [atoms_of(a) for a in left]
    counts = [0] * (n + 1)

    def pick_right(start: int, remaining: int, chosen: list[int]):
        budget.tick()
        if remaining == 1:
            if any(c > 1 for c in counts):
                return None
            last = sum(1 << (i - 1) for i in range(1, n + 1) if counts[i] == 1)
            if last in right_set and last >= right[start]:
                return chosen + [last]
            return None
        for j in range(start, len(right)):
            atoms = right_atoms[j]
            if any(counts[i] == 0 for i in atoms):
                continue
            for i in atoms:
                counts[i] -= 1
            if max(counts) <= remaining - 1:
                got = pick_right(j, remaining - 1, chosen + [right[j]])
                if got is not None:
                    return got
            for i in atoms:
                counts[i] += 1
        return None

    def pick_left(start: int, remaining: int, chosen: list[int]):
        budget.tick()
        if remaining == 0:
            got = pick_right(0, k, [])
            return None if got is None else (chosen, got)
        for j in range(start, len(left)):
            for i in left_atoms[j]:
                counts[i] += 1
            got = pick_left(j, remaining - 1, chosen + [left[j]])
            if got is not None:
                return got
            for i in left_atoms[j]:
                counts[i] -= 1
        return None

    if not left or not right:
        return None
    return pick_left(0, k, [])


def _codes(sets: Sequence[int], n: int, base: int) -> list[int]:
    return [sum(base**i for i in range(n) if s >> i & 1) for s in sets]


def _shift_or(dst: np.ndarray, src: np.ndarray, c: int) -> None:
    if c == 0:
        dst |= src
    elif c > 0:
        dst[c:] |= src[:-c]
    else:
        dst[:c] |= src[-c:]


def _layers(start_code: int, steps: int, shifts: Sequence[int], size: int) -> list[np.ndarray]:
    layers = [np.zeros(size, dtype=bool)]
    layers[0][start_code] = True
    for _ in range(steps):
        nxt = np.zeros(size, dtype=bool)
        for c in shifts:
            _shift_or(nxt, layers[-1], c)
        layers.append(nxt)
    return layers


def _digits(code: int, n: int, base: int) -> list[int]:
    out = []
    for _ in range(n):
        code, d = divmod(code, base)
        out.append(d)
    return out


def _decompose(layers: list[np.ndarray], target: int, items: Sequence[int], codes: Sequence[int], valid) -> list[int]:
    """Peel ``len(layers) - 1`` items off ``target``, smallest item first."""
    out = []
    for j in range(len(layers) - 1, 0, -1):
        for item, c in zip(items, codes):
            prev = target - c
            if 0 <= prev < layers[j - 1].size and valid(target, item) and layers[j - 1][prev]:
                out.append(item)
                target = prev
                break
        else:  # pragma: no cover - layers guarantee a predecessor
            raise AssertionError("inconsistent reachability layers")
    return sorted(out)


def _star_grid(delta: SimplicialComplex, k: int):
    n = delta.n
    base = k + 1
    size = base**n
    if size > GRID_CELLS:
        raise ValueError(f"grid of {size} cells is too large")
    maximal = [f.bits for f in delta.maximal_faces]
    minimal = [b.bits for b in delta.minimal_nonfaces]
    if not delta.faces or not minimal:
        return None
    cmax, cmin = _codes(maximal, n, base), _codes(minimal, n, base)
    up = _layers(0, k, cmax, size)
    down = _layers(0, k, cmin, size)
    dominated = up[k].reshape((base,) * n)
    for ax in range(n):
        flipped = np.flip(dominated, axis=ax)
        dominated = np.flip(np.logical_or.accumulate(flipped, axis=ax), axis=ax)
    hit = np.flatnonzero(down[k] & dominated.reshape(-1))
    if hit.size == 0:
        return None
    v = int(hit[0])

    def fits(code: int, s: int) -> bool:
        d = _digits(code, n, base)
        return all(d[i] >= 1 for i in range(n) if s >> i & 1)

    bs = _decompose(down, v, minimal, cmin, fits)
    vd = np.array(_digits(v, n, base))
    tops = np.flatnonzero(up[k])
    digs = np.stack([(tops // base**i) % base for i in range(n)], axis=1)
    a_code = int(tops[np.flatnonzero((digs >= vd).all(axis=1))[0]])
    as_ = _decompose(up, a_code, maximal, cmax, fits)
    # remove surplus atoms from the faces; subsets of faces are faces
    surplus = [x - y for x, y in zip(_digits(a_code, n, base), vd)]
    shrunk = []
    for a in as_:
        for i in range(n):
            if surplus[i] and a >> i & 1:
                a &= ~(1 << i)
                surplus[i] -= 1
        shrunk.append(a)
    return sorted(shrunk), bs


# -- orders ----------------------------------------------------------------


def _representative(order: QPOrder, v: tuple[int, int], strict: bool) -> tuple[int, int]:
    """The pair ``(q | C, p | C)`` with smallest ``C`` that is ordered (strictly, if asked)."""
    p, q = v
    rest = ((1 << order.n) - 1) & ~(p | q)
    for want_strict in (True, False) if strict else (False,):
        c = 0
        while True:
            lo, hi = order.rank[q | c], order.rank[p | c]
            if lo < hi or (lo == hi and not want_strict):
                return q | c, p | c
            c = (c - rest) & rest
            if c == 0:
                break
    raise AssertionError("cone vector without a representative pair")


def find_cck_violation(
    order: QPOrder,
    k: int,
    limits: SearchLimits = DEFAULT_LIMITS,
    engine: str = "auto",
) -> TradingTransform | None:
    """A ``CC_k`` witness with ``A_i <= B_i`` for all ``i``, one strictly, or ``None``.

    Searches for ``k`` cone vectors (zero allowed, so a shorter violation
    pads out with ``(empty; empty)`` pairs) summing to zero with at least
    one member coming from a strictly ordered pair.  Pairs are not assumed
    to depend only on their disjoint parts, so a ranking that breaks the
    axioms is searched as given.
    """
    if k < 2:
        raise ValueError("CC_k is checked for k >= 2")
    if k > limits.max_k:
        raise ValueError(f"k={k} exceeds max_k={limits.max_k}")
    n = order.n
    nonzero = [v for v in cone_pairs(order) if v != (0, 0)]
    strict = [v for v in cone_pairs(order, strict=True) if v != (0, 0)]
    if not strict:
        return None
    if engine == "auto":
        engine = "grid" if (2 * k + 1) ** n <= GRID_CELLS else "dfs"
    if engine == "grid":
        found = _order_grid(n, k, nonzero, strict)
    elif engine == "dfs":
        found = _order_dfs(n, k, nonzero, set(strict), _Budget(limits.node_budget))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if found is None:
        return None
    # x = chi(A, B) in the cone means B <= A: B goes left, A goes right
    strict_set = set(strict)
    pairs = [_representative(order, v, v in strict_set) for v in found] + [(0, 0)] * (k - len(found))
    return TradingTransform(tuple(Subset(n, b) for b, _ in pairs), tuple(Subset(n, a) for _, a in pairs))


def _vcode(v: tuple[int, int], n: int, base: int) -> int:
    p, q = v
    return sum(base**i * ((p >> i & 1) - (q >> i & 1)) for i in range(n))


def _order_grid(n: int, k: int, nonzero, strict):
    base = 2 * k + 1
    size = base**n
    origin = sum(k * base**i for i in range(n))
    codes = [_vcode(v, n, base) for v in nonzero]
    layers = _layers(origin, k - 1, [0] + codes, size)
    top = layers[k - 1]
    for s in strict:
        target = origin - _vcode(s, n, base)
        if top[target]:
            # peel nonzero vectors off -s, allowing idle (zero) steps
            rest = []
            cur = target
            for j in range(k - 1, 0, -1):
                if layers[j - 1][cur]:
                    continue
                for v, c in zip(nonzero, codes):
                    prev = cur - c
                    if 0 <= prev < size and layers[j - 1][prev]:
                        rest.append(v)
                        cur = prev
                        break
            return [s] + rest
    return None


def _order_dfs(n: int, k: int, nonzero, strict: set, budget: _Budget):
    """Multisets of nonzero cone vectors (at most ``k``) summing to zero."""
    vec = [[(p >> i & 1) - (q >> i & 1) for i in range(n)] for p, q in nonzero]
    is_strict = [v in strict for v in nonzero]
    total = [0] * n

    def go(start: int, used: int, chosen: list[int], has_strict: bool):
        budget.tick()
        if chosen and has_strict and not any(total):
            return chosen
        remaining = k - used
        if remaining == 0 or any(abs(t) > remaining for t in total):
            return None
        for j in range(start, len(vec)):
            v = vec[j]
            for i in range(n):
                total[i] += v[i]
            got = go(j, used + 1, chosen + [j], has_strict or is_strict[j])
            for i in range(n):
                total[i] -= v[i]
            if got is not None:
                return got
        return None

    found = go(0, 0, [], False)
    return None if found is None else [nonzero[j] for j in found]


# -- shortening ------------------------------------------------------------


def reduce_transform(t: TradingTransform, context: QPOrder | Complex) -> TradingTransform | None:
    """Merge one compatible pair of pairs into a transform one shorter.

    ``context`` fixes the side condition.  For an order, every left set must
    lie strictly below every right set (the shape ``A_i < T <= B_j`` with
    ``T`` the lowest right set).  For a complex, every left set must be a face
    and every right set a non-face.  Returns ``None`` when no two pairs
    ``(A_i, B_k), (A_j, B_l)`` with ``i != j`` and ``k != l`` are compatible.
    """
    if not is_trading_transform(t.left, t.right):
        raise ValueError("input is not a trading transform")
    if isinstance(context, Complex):
        if not all(a in context for a in t.left):
            raise ValueError("every left set must be a face")
        if any(b in context for b in t.right):
            raise ValueError("every right set must be a non-face")
    else:
        top_left = max(context.rank[a.bits] for a in t.left)
        low_right = min(context.rank[b.bits] for b in t.right)
        if not top_left < low_right:
            raise ValueError("every left set must lie strictly below every right set")
    s = len(t)
    for i in range(s):
        for j in range(i + 1, s):
            for kk in range(s):
                for ll in range(s):
                    if kk == ll:
                        continue
                    ai, aj, bk, bl = t.left[i], t.left[j], t.right[kk], t.right[ll]
                    if not is_compatible((ai, bk), (aj, bl)):
                        continue
                    merged_left = (ai - bk) | (aj - bl)
                    merged_right = (bk - ai) | (bl - aj)
                    rest_left = [t.left[m] for m in range(s) if m not in (i, j)]
                    rest_right = [t.right[m] for m in range(s) if m not in (kk, ll)]
                    return TradingTransform((merged_left, *rest_left), (merged_right, *rest_right))
    return None
