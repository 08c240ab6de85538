"""Exact rational linear programming and the recognition problems built on it.

The solver is a dense two-phase primal simplex over ``Fraction`` with
Bland's smallest-index rule, so it always terminates.  Strict inequalities in
the recognition problems are handled by maximising a common slack ``t``:
the strict system is feasible iff the optimum ``t*`` is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .complexes import SimplicialComplex
from .core import format_rational
from .qporder import QPOrder, _subset_sums

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class LinearProgram:
    """Maximise ``objective . x`` subject to ``constraints``.

    Variables are non-negative unless their index is in ``free``.
    """

    variables: int
    objective: tuple[Fraction, ...]
    constraints: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...]
    free: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "objective", tuple(Fraction(c) for c in self.objective))
        rows = []
        for coeffs, rel, rhs in self.constraints:
            if rel not in (LE, EQ, GE):
                raise ValueError(f"unknown relation {rel!r}")
            if len(coeffs) != self.variables:
                raise ValueError("constraint width differs from variable count")
            rows.append((tuple(Fraction(c) for c in coeffs), rel, Fraction(rhs)))
        object.__setattr__(self, "constraints", tuple(rows))
        object.__setattr__(self, "free", frozenset(self.free))
        if len(self.objective) != self.variables:
            raise ValueError("objective width differs from variable count")

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        if any(x[j] < 0 for j in range(self.variables) if j not in self.free):
            return False
        for coeffs, rel, rhs in self.constraints:
            lhs = sum(c * v for c, v in zip(coeffs, x) if c)
            if (rel == LE and lhs > rhs) or (rel == GE and lhs < rhs) or (rel == EQ and lhs != rhs):
                return False
        return True


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows  # last entry of each row is the right-hand side
        self.basis = basis
        self.obj: list[Fraction] = []

    def set_objective(self, cost: Sequence[Fraction]) -> None:
        # reduced costs d_j = c_B B^-1 a_j - c_j; rhs slot holds the objective value
        width = len(self.rows[0]) if self.rows else len(cost) + 1
        obj = [-Fraction(c) for c in cost] + [Fraction(0)] * (width - len(cost))
        for row, b in zip(self.rows, self.basis):
            cb = cost[b] if b < len(cost) else 0
            if cb:
                obj = [o + cb * r for o, r in zip(obj, row)]
        self.obj = obj

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            prow = [v / piv for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for k, row in enumerate(self.rows):
            if k != r:
                f = row[c]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        f = self.obj[c]
        if f:
            for j in nz:
                self.obj[j] -= f * prow[j]
        self.basis[r] = c

    def run(self, allowed: int) -> str:
        """Maximise with Bland's rule over the first ``allowed`` columns."""
        while True:
            enter = next((j for j in range(allowed) if self.obj[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    key = (row[-1] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)


def lp_solve(lp: LinearProgram) -> LPResult:
    """Solve exactly; the returned point satisfies every constraint exactly."""
    # split free variables into positive and negative parts
    cols: list[tuple[int, int]] = []
    for j in range(lp.variables):
        cols.append((j, 1))
        if j in lp.free:
            cols.append((j, -1))
    nx = len(cols)

    shaped = []
    for coeffs, rel, rhs in lp.constraints:
        row = [coeffs[j] * s for j, s in cols]
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        shaped.append((row, rel, rhs))

    n_slack = sum(1 for _, rel, _ in shaped if rel != EQ)
    n_art = sum(1 for _, rel, _ in shaped if rel != LE)
    width = nx + n_slack + n_art
    rows, basis = [], []
    s_idx, a_idx = nx, nx + n_slack
    for row, rel, rhs in shaped:
        full = row + [Fraction(0)] * (n_slack + n_art) + [rhs]
        if rel == LE:
            full[s_idx] = Fraction(1)
            basis.append(s_idx)
            s_idx += 1
        else:
            if rel == GE:
                full[s_idx] = Fraction(-1)
                s_idx += 1
            full[a_idx] = Fraction(1)
            basis.append(a_idx)
            a_idx += 1
        rows.append(full)

    tab = _Tableau(rows, basis)
    first_art = nx + n_slack
    if n_art:
        tab.set_objective([Fraction(0)] * first_art + [Fraction(-1)] * n_art)
        tab.run(width)
        if tab.obj[-1] != 0:
            return LPResult("infeasible")
        # drive remaining artificials out of the basis, dropping redundant rows
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] >= first_art:
                c = next((j for j in range(first_art) if tab.rows[r][j] != 0), None)
                if c is None:
                    del tab.rows[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, c)
            r += 1
        tab.rows = [row[:first_art] + [row[-1]] for row in tab.rows]

    cost = [lp.objective[j] * s for j, s in cols] + [Fraction(0)] * n_slack
    tab.set_objective(cost)
    status = tab.run(first_art)
    if status == "unbounded":
        return LPResult("unbounded")
    values = [Fraction(0)] * first_art
    for row, b in zip(tab.rows, tab.basis):
        values[b] = row[-1]
    x = [Fraction(0)] * lp.variables
    for k, (j, s) in enumerate(cols):
        x[j] += s * values[k]
    point = tuple(x)
    value = sum((c * v for c, v in zip(lp.objective, point)), Fraction(0))
    return LPResult("optimal", value, point)


def exact_rank(rows: Sequence[Sequence]) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    m = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    width = len(m[0]) if m else 0
    for c in range(width):
        p = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[rank], m[p] = m[p], m[rank]
        piv = m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / piv[c]
                m[i] = [a - f * b for a, b in zip(m[i], piv)]
        rank += 1
    return rank


@dataclass(frozen=True)
class Certificate:
    """Outcome of a recognition problem.

    ``kind`` is one of ``weights-and-threshold``, ``representing-measure``,
    ``almost-representing-measure`` or ``infeasible``.  ``slack`` is the
    optimal margin ``t*`` when the problem maximises one.
    """

    kind: str
    weights: tuple[Fraction, ...] | None = None
    threshold: Fraction | None = None
    slack: Fraction | None = None
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def feasible(self) -> bool:
        return self.kind != "infeasible"

    def __bool__(self) -> bool:
        return self.feasible

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.weights is not None:
            out["weights"] = [format_rational(w) for w in self.weights]
        if self.threshold is not None:
            out["threshold"] = format_rational(self.threshold)
        if self.slack is not None:
            out["slack"] = format_rational(self.slack)
        return out


def _simplex_lp(n: int, rows: list[tuple[list[int], str, int]]) -> LinearProgram:
    """Variables ``w_1..w_n >= 0`` and a free margin ``t`` (last), ``sum w = 1``, ``t <= 1``."""
    cons = [([1] * n + [0], EQ, 1), ([0] * n + [1], LE, 1)]
    cons.extend(rows)
    return LinearProgram(n + 1, tuple([0] * n + [1]), tuple(cons), free=frozenset({n}))


def _chi_row(n: int, plus: int, minus: int) -> list[int]:
    return [(plus >> i & 1) - (minus >> i & 1) for i in range(n)]


def is_threshold(delta: SimplicialComplex) -> Certificate:
    """Find non-negative weights and ``q`` with ``A in delta iff w(A) < q``.

    Only maximal faces and minimal non-faces are constrained; the margin
    ``t`` on either side of ``q`` is maximised.
    """
    if not isinstance(delta, SimplicialComplex):
        raise TypeError("is_threshold needs an explicit complex")
    n = delta.n
    if not delta.faces:
        # q = 0: no set weighs less than nothing
        return Certificate("weights-and-threshold", tuple(Fraction(1, n) for _ in range(n)), Fraction(0))
    maximal = [f.bits for f in delta.maximal_faces]
    minimal = [b.bits for b in delta.minimal_nonfaces]
    if not minimal:
        w = tuple(Fraction(1, n) for _ in range(n))
        return Certificate("weights-and-threshold", w, Fraction(2), Fraction(1))
    # variables w_1..w_n, q, t: w(F) + t <= q <= w(B) - t
    rows = [([1] * n + [0, 0], EQ, 1), ([0] * n + [0, 1], LE, 1)]
    rows += [(_chi_row(n, a, 0) + [-1, 1], LE, 0) for a in maximal]
    rows += [(_chi_row(n, b, 0) + [-1, -1], GE, 0) for b in minimal]
    lp = LinearProgram(n + 2, tuple([0] * (n + 1) + [1]), tuple(rows), free=frozenset({n + 1}))
    res = lp_solve(lp)
    if res.status != "optimal" or res.value <= 0:
        return Certificate("infeasible", slack=res.value)
    w, q = res.point[:n], res.point[n]
    return Certificate("weights-and-threshold", tuple(w), q, res.value)


def verify_threshold_certificate(delta: SimplicialComplex, cert: Certificate) -> bool:
    """Substitute the weights into every subset of ``[n]``."""
    if cert.kind != "weights-and-threshold" or cert.threshold is None:
        return False
    w = cert.weights
    if any(x < 0 for x in w):
        return False
    sums = _subset_sums(list(w))
    return all((sums[b] < cert.threshold) == (b in delta.faces) for b in range(1 << delta.n))


def is_representable(order: QPOrder) -> Certificate:
    """Find a measure ``p`` with ``A <= B iff p(A) <= p(B)``.

    Ties are equalities between neighbours inside a class; consecutive class
    representatives must increase by at least the margin.
    """
    n = order.n
    rows = []
    for cls in order.classes:
        for a, b in zip(cls, cls[1:]):
            rows.append((_chi_row(n, a & ~b, b & ~a) + [0], EQ, 0))
    for lo, hi in zip(order.classes, order.classes[1:]):
        a, b = lo[0], hi[0]
        rows.append((_chi_row(n, b & ~a, a & ~b) + [-1], GE, 0))
    res = lp_solve(_simplex_lp(n, rows))
    if res.status != "optimal" or res.value <= 0:
        return Certificate("infeasible", slack=res.value)
    return Certificate("representing-measure", tuple(res.point[:n]), slack=res.value)


def verify_representing_measure(order: QPOrder, p: Sequence[Fraction]) -> bool:
    """``p`` must be non-negative, constant on classes and strictly increasing across them."""
    if any(x < 0 for x in p):
        return False
    sums = _subset_sums(list(p))
    prev = None
    for cls in order.classes:
        vals = {sums[b] for b in cls}
        if len(vals) != 1:
            return False
        v = vals.pop()
        if prev is not None and not prev < v:
            return False
        prev = v
    return True


def is_almost_representable(order: QPOrder) -> Certificate:
    """Find a measure ``p`` with ``A <= B => p(A) <= p(B)``.

    For a ranking this is: equal within each class, non-decreasing between
    consecutive classes.
    """
    n = order.n
    rows = []
    for cls in order.classes:
        for a, b in zip(cls, cls[1:]):
            rows.append((_chi_row(n, a & ~b, b & ~a), EQ, 0))
    for lo, hi in zip(order.classes, order.classes[1:]):
        a, b = lo[0], hi[0]
        rows.append((_chi_row(n, b & ~a, a & ~b), GE, 0))
    cons = [([1] * n, EQ, 1)] + rows
    res = lp_solve(LinearProgram(n, tuple([0] * n), tuple(cons)))
    if res.status != "optimal":
        return Certificate("infeasible")
    return Certificate("almost-representing-measure", tuple(res.point))


def verify_almost_representing_measure(order: QPOrder, p: Sequence[Fraction]) -> bool:
    if any(x < 0 for x in p) or sum(p) != 1:
        return False
    sums = _subset_sums(list(p))
    prev = None
    for cls in order.classes:
        vals = {sums[b] for b in cls}
        if len(vals) != 1:
            return False
        v = vals.pop()
        if prev is not None and v < prev:
            return False
        prev = v
    return True
