import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpcone.complexes import (
    SimpleGame,
    SimplicialComplex,
    all_complexes,
    from_generators,
    has_shift_obstruction,
    is_down_closed_at,
    is_shifted,
    isbell_leq,
    shift_closure,
    shifting_violation,
)
from qpcone.core import DimensionError, Subset, is_trading_transform
from qpcone.feasibility import is_threshold
from qpcone.qporder import initial_segment, order_from_weights

from conftest import S, random_weights

SHIFTED7 = [S(7, 1, 5, 7), S(7, 2, 3, 4, 6)]


def downward_closed(delta):
    return all(sub in delta.faces for f in delta.faces for sub in range(1 << delta.n) if sub & ~f == 0)


def shifted_wrt(delta, order):
    """Brute force: swapping any vertex for an earlier absent one keeps a face."""
    pos = {a: k for k, a in enumerate(order)}
    for f in delta.faces:
        for a in Subset(delta.n, f).atoms:
            for b in range(1, delta.n + 1):
                if pos[b] < pos[a] and not f >> (b - 1) & 1:
                    if (f & ~(1 << (a - 1))) | 1 << (b - 1) not in delta.faces:
                        return False
    return True


def test_from_generators_small():
    assert sorted(from_generators(3, [S(3, 1, 2)]).faces) == [0, 1, 2, 3]


def test_from_generators_empty_conventions():
    assert len(from_generators(1, [])) == 0
    assert sorted(from_generators(1, [S(1)]).faces) == [0]


def test_from_generators_two_generators():
    delta = from_generators(7, SHIFTED7)
    # 8 subsets of a triple plus 16 of a quadruple, sharing only the empty set
    assert len(delta) == 8 + 16 - 1
    assert downward_closed(delta)


def test_from_generators_rejects_wrong_n():
    with pytest.raises(DimensionError):
        from_generators(3, [S(4, 4)])


def test_shift_closure_examples():
    assert sorted(shift_closure(2, [S(2, 1)]).faces) == [0, 1]
    assert sorted(shift_closure(2, [S(2, 2)]).faces) == [0, 1, 2]
    delta = shift_closure(7, SHIFTED7)
    assert all(g in delta for g in SHIFTED7)
    assert S(7, 3, 4, 7) not in delta and S(7, 1, 2, 5, 6) not in delta
    assert downward_closed(delta)
    assert shifted_wrt(delta, range(1, 8))


def test_shift_closure_is_smallest():
    delta = shift_closure(7, SHIFTED7)
    # every face is forced: dropping any maximal face breaks containment or shiftedness
    for m in delta.maximal_faces:
        smaller = SimplicialComplex(7, delta.faces - {m.bits})
        assert not all(g in smaller for g in SHIFTED7) or not shifted_wrt(smaller, range(1, 8))


def test_shift_closure_other_vertex_order():
    order = [7, 6, 5, 4, 3, 2, 1]
    delta = shift_closure(7, SHIFTED7, order)
    assert shifted_wrt(delta, order)
    assert shifting_violation(delta, order) is None


def test_isbell_examples():
    dictator = SimpleGame.from_winning(2, [S(2, 1), S(2, 1, 2)])
    assert isbell_leq(dictator, 2, 1)
    assert not isbell_leq(dictator, 1, 2)
    majority = SimpleGame.from_winning(3, [b for b in range(8) if bin(b).count("1") >= 2])
    assert all(isbell_leq(majority, i, j) for i in range(1, 4) for j in range(1, 4) if i != j)


def test_isbell_on_shifted_n7():
    game = shift_closure(7, SHIFTED7).dual_game()
    losing = game.losing.faces

    def brute(j, i):
        rest = [a for a in range(1, 8) if a not in (i, j)]
        for r in range(len(rest) + 1):
            for xs in itertools.combinations(rest, r):
                x = sum(1 << (a - 1) for a in xs)
                if (x | 1 << (j - 1)) not in losing and (x | 1 << (i - 1)) in losing:
                    return False
        return True

    for i in range(1, 8):
        for j in range(1, 8):
            if i != j:
                assert isbell_leq(game, j, i) == brute(j, i)
    # earlier vertices are the weaker players in a shifted complex
    assert isbell_leq(game, 1, 7)
    assert not isbell_leq(game, 7, 1)


def test_is_shifted_examples():
    assert is_shifted(shift_closure(7, SHIFTED7)) == list(range(1, 8))
    assert is_shifted(from_generators(4, [S(4, 1, 4), S(4, 2, 3)])) is None
    assert is_shifted(from_generators(3, [S(3, 1, 2, 3)])) == [1, 2, 3]


def test_is_shifted_matches_brute_force_on_all_small_complexes():
    for n in range(1, 5):
        for delta in all_complexes(n):
            brute = any(shifted_wrt(delta, p) for p in itertools.permutations(range(1, n + 1)))
            got = is_shifted(delta)
            assert (got is not None) == brute
            if got is not None:
                assert shifted_wrt(delta, got)
                assert shifting_violation(delta, got) is None


def test_shift_obstruction_examples():
    delta = from_generators(4, [S(4, 1, 4), S(4, 2, 3)])
    i, j, a, b = has_shift_obstruction(delta, [1, 2, 3, 4])
    assert (i, j, a, b) == (1, 2, S(4, 4), S(4, 3))
    assert has_shift_obstruction(from_generators(3, [S(3)])) is None


def test_obstruction_gives_trading_transform():
    for n in range(2, 5):
        for delta in all_complexes(n):
            found = has_shift_obstruction(delta)
            assert (found is None) == (is_shifted(delta) is not None)
            if found is None:
                continue
            i, j, a, b = found
            ai, bj = a | S(n, i), b | S(n, j)
            bi, aj = b | S(n, i), a | S(n, j)
            assert ai in delta and bj in delta and bi not in delta and aj not in delta
            assert is_trading_transform([ai, bj], [bi, aj])


def test_threshold_complexes_have_no_obstruction():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(2, 6)
        w = random_weights(rng, n)
        delta = initial_segment(order_from_weights(w), Subset(n, rng.getrandbits(n)))
        assert has_shift_obstruction(delta) is None
        light_first = sorted(range(1, n + 1), key=lambda a: (-w[a - 1], a))
        assert shifting_violation(delta, light_first[::-1]) is None


def test_all_complexes_counts():
    # numbers of abstract complexes containing the empty set on 1..4 labelled vertices
    assert [len(all_complexes(n)) for n in range(1, 5)] == [2, 5, 19, 167]
    assert len(all_complexes(2, include_void=True)) == 6


def test_maximal_faces_and_nonfaces():
    delta = from_generators(3, [S(3, 1, 2), S(3, 3)])
    assert sorted(f.bits for f in delta.maximal_faces) == [0b011, 0b100]
    assert sorted(f.bits for f in delta.minimal_nonfaces) == [0b101, 0b110]


def test_json_round_trip(tmp_path):
    delta = shift_closure(7, SHIFTED7)
    assert SimplicialComplex.from_json(delta.to_json()).faces == delta.faces


def test_is_down_closed_at():
    assert is_down_closed_at({0, 1, 2}, 3)
    assert not is_down_closed_at({0, 1}, 3)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=5))))
def test_generated_complex_closed_and_dual_round_trip(data):
    n, gens = data
    delta = from_generators(n, [Subset(n, g) for g in gens])
    assert downward_closed(delta)
    game = delta.dual_game()
    assert game.winning_bits() == set(range(1 << n)) - set(delta.faces)
    back = SimpleGame.from_winning(n, game.winning_bits()).losing
    assert back.faces == delta.faces
