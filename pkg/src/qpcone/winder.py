"""Winder's desirability relation and strong acyclicity.

``A <=_W B`` holds when, for every ``Z`` avoiding the symmetric difference,
``(A\\B) | Z`` being a non-face forces ``(B\\A) | Z`` to be a non-face too.
``A <_W B`` is the negation of ``B <=_W A``: some ``Z`` has ``(A\\B) | Z`` a
face and ``(B\\A) | Z`` a non-face.  Both depend only on the two
differences, so everything is tabulated over disjoint pairs ``(P, Q)``.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

import networkx as nx

from .complexes import SimplicialComplex, is_down_closed_at
from .core import DimensionError, Subset, submasks
from .qporder import QPOrder, _disjoint_pairs, initial_segment, verify_qp_axioms

MAX_WINDER_ATOMS = 12
MAX_DIGRAPH_ATOMS = 10


def _check(delta: SimplicialComplex, limit: int) -> None:
    if not isinstance(delta, SimplicialComplex):
        raise TypeError("the Winder relations need an explicit complex")
    if delta.n > limit:
        raise DimensionError(f"n={delta.n} exceeds the limit {limit}")


def _exists_witness(faces: frozenset[int], p: int, q: int, n: int) -> bool:
    """Some ``Z`` avoiding ``p | q`` with ``p | Z`` a face and ``q | Z`` not."""
    rest = ((1 << n) - 1) & ~(p | q)
    return any((p | z) in faces and (q | z) not in faces for z in submasks(rest))


def winder_leq(delta: SimplicialComplex, a: Subset, b: Subset) -> bool:
    _check(delta, MAX_WINDER_ATOMS)
    return not _exists_witness(delta.faces, b.bits & ~a.bits, a.bits & ~b.bits, delta.n)


def winder_prec(delta: SimplicialComplex, a: Subset, b: Subset) -> bool:
    return not winder_leq(delta, b, a)


def prec_table(delta: SimplicialComplex) -> set[tuple[int, int]]:
    """All disjoint ``(P, Q)`` with ``P <_W Q``."""
    _check(delta, MAX_WINDER_ATOMS)
    return {(p, q) for q, p in _disjoint_pairs(delta.n) if p != q and _exists_witness(delta.faces, p, q, delta.n)}


def winder_digraph(delta: SimplicialComplex) -> nx.DiGraph:
    _check(delta, MAX_DIGRAPH_ATOMS)
    n = delta.n
    table = prec_table(delta)
    g = nx.DiGraph()
    g.add_nodes_from(range(1 << n))
    g.add_edges_from((a, b) for a in range(1 << n) for b in range(1 << n) if (a & ~b, b & ~a) in table)
    return g


@dataclass(frozen=True)
class AcyclicityReport:
    acyclic: bool
    cycle: tuple[Subset, ...] | None
    edges: int

    def to_json(self) -> dict:
        return {
            "verdict": "strongly acyclic" if self.acyclic else "cycle",
            "edges": self.edges,
            "cycle": None if self.cycle is None else [s.to_json() for s in self.cycle],
        }


def _shortest_cycle(g: nx.DiGraph, nodes: set[int]) -> list[int]:
    best: list[int] | None = None
    for start in sorted(nodes):
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            u = queue.popleft()
            for v in sorted(g.successors(u)):
                if v == start:
                    found = u
                    break
                if v in nodes and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if found is None:
            continue
        path = []
        u = found
        while u is not None:
            path.append(u)
            u = parent[u]
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
        if len(best) == 2:
            break
    assert best is not None
    return best


def is_strongly_acyclic(delta: SimplicialComplex) -> AcyclicityReport:
    """Cycle detection on the full ``<_W`` digraph; the witness is a shortest cycle."""
    g = winder_digraph(delta)
    cyclic = [c for c in nx.strongly_connected_components(g) if len(c) > 1]
    if not cyclic:
        return AcyclicityReport(True, None, g.number_of_edges())
    comp = min(cyclic, key=lambda c: (len(c), min(c)))
    cycle = _shortest_cycle(g, comp)
    return AcyclicityReport(False, tuple(Subset(delta.n, b) for b in cycle), g.number_of_edges())


# -- a 3x3 grid example -------------------------------------------------------

MAGIC_SQUARE = (2, 7, 6, 9, 5, 1, 4, 3, 8)
GRID_ROWS = ((1, 2, 3), (4, 5, 6), (7, 8, 9))
GRID_COLUMNS = ((1, 4, 7), (2, 5, 8), (3, 6, 9))


def grid_game_complex(weights=MAGIC_SQUARE) -> SimplicialComplex:
    """Sets lighter than a row, plus the three columns and their subsets.

    ``weights`` must give every row and every column the same total; the
    complex is then the initial segment below the rows of the intended order
    with all three columns strictly below all three rows.
    """
    n = 9
    bits = [sum(1 << (a - 1) for a in line) for line in GRID_ROWS + GRID_COLUMNS]
    totals = {sum(weights[a - 1] for a in line) for line in GRID_ROWS + GRID_COLUMNS}
    if len(totals) != 1:
        raise ValueError("rows and columns must all weigh the same")
    (line_weight,) = totals
    faces = set()
    for x in range(1 << n):
        if sum(weights[i] for i in range(n) if x >> i & 1) < line_weight:
            faces.add(x)
    for col in bits[3:]:
        faces.update(submasks(col))
    return SimplicialComplex(n, frozenset(faces))


# -- extension probe ---------------------------------------------------------


@dataclass(frozen=True)
class ExtensionProbe:
    acyclic: bool
    layers: int | None
    order_valid: bool | None
    reproduces_complex: bool | None

    def to_json(self) -> dict:
        return {
            "acyclic": self.acyclic,
            "layers": self.layers,
            "order_valid": self.order_valid,
            "reproduces_complex": self.reproduces_complex,
        }


def probe_extension(delta: SimplicialComplex) -> ExtensionProbe:
    """Layer the ``<_W`` digraph by longest path and test the resulting weak order.

    Reports whether the layering is a qualitative probability order and
    whether the complex is one of its initial segments.  No claim is made
    when it is not; a different extension might still exist.
    """
    g = winder_digraph(delta)
    if not nx.is_directed_acyclic_graph(g):
        return ExtensionProbe(False, None, None, None)
    depth = {}
    for v in nx.topological_sort(g):
        depth[v] = max((depth[u] + 1 for u in g.predecessors(v)), default=0)
    order = QPOrder.from_ranks(delta.n, [depth[b] for b in range(1 << delta.n)])
    valid = verify_qp_axioms(order)
    reproduces = valid and any(initial_segment(order, Subset(delta.n, t)).faces == delta.faces for t in range(1 << delta.n))
    return ExtensionProbe(True, len(order.classes), valid, reproduces)


def random_complex(n: int, rng: random.Random, density: float = 0.5) -> SimplicialComplex:
    """Grow a complex by adding random sets whose facets are all present."""
    faces = {0}
    for b in sorted(range(1, 1 << n), key=lambda b: (b.bit_count(), rng.random())):
        if is_down_closed_at(faces, b) and rng.random() < density:
            faces.add(b)
    return SimplicialComplex(n, frozenset(faces))
