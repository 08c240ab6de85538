import itertools
import json
import random

import pytest

from qpcone.cancellation import (
    Inconclusive,
    SearchLimits,
    find_cck_star_violation,
    find_cck_violation,
    reduce_transform,
)
from qpcone.complexes import SimplicialComplex, all_complexes, from_generators, shift_closure
from qpcone.core import Subset, TradingTransform, is_trading_transform
from qpcone.feasibility import is_threshold
from qpcone.qporder import QPOrder, initial_segment, load_order, order_from_weights
from qpcone.winder import random_complex

from conftest import FIXTURES, S, random_weights

SHIFTED7 = shift_closure(7, [S(7, 1, 5, 7), S(7, 2, 3, 4, 6)])


def star_witness_ok(delta, t, k):
    return (
        len(t) == k
        and is_trading_transform(t.left, t.right)
        and all(a in delta for a in t.left)
        and not any(b in delta for b in t.right)
    )


def order_witness_ok(order, t, k):
    return (
        len(t) == k
        and is_trading_transform(t.left, t.right)
        and all(order.leq(a, b) for a, b in zip(t.left, t.right))
        and any(order.prec(a, b) for a, b in zip(t.left, t.right))
    )


def brute_star(delta, k):
    """Exhaustive CC_k* check over multisets of faces and non-faces."""
    n = delta.n
    faces = sorted(delta.faces)
    non = [b for b in range(1 << n) if b not in delta.faces]
    counts = {}
    for combo in itertools.combinations_with_replacement(non, k):
        key = tuple(sum(b >> i & 1 for b in combo) for i in range(n))
        counts[key] = True
    for combo in itertools.combinations_with_replacement(faces, k):
        key = tuple(sum(b >> i & 1 for b in combo) for i in range(n))
        if key in counts:
            return True
    return False


def test_search_limits_validation():
    with pytest.raises(ValueError):
        SearchLimits(node_budget=0)
    with pytest.raises(ValueError):
        SearchLimits(max_k=0)
    with pytest.raises(ValueError):
        find_cck_star_violation(SHIFTED7, 1)
    with pytest.raises(ValueError):
        find_cck_star_violation(SHIFTED7, 5, SearchLimits(max_k=4))
    with pytest.raises(ValueError):
        find_cck_violation(order_from_weights([1, 2]), 1)


def test_shifted_n7_has_cc2_star_violation():
    for engine in ("dfs", "grid"):
        t = find_cck_star_violation(SHIFTED7, 2, engine=engine)
        assert t is not None and star_witness_ok(SHIFTED7, t, 2)


def test_reference_transform_is_a_witness():
    t = TradingTransform((S(7, 1, 5, 7), S(7, 2, 3, 4, 6)), (S(7, 3, 4, 7), S(7, 1, 2, 5, 6)))
    assert star_witness_ok(SHIFTED7, t, 2)


def test_threshold_complexes_have_no_violation():
    rng = random.Random(8)
    for _ in range(25):
        n = rng.randint(2, 6)
        delta = initial_segment(order_from_weights(random_weights(rng, n)), Subset(n, rng.getrandbits(n)))
        for k in (2, 3):
            assert find_cck_star_violation(delta, k) is None


def test_engines_agree_with_brute_force_small():
    for n in range(1, 4):
        for delta in all_complexes(n, include_void=True):
            for k in (2, 3):
                expected = brute_star(delta, k)
                for engine in ("dfs", "grid"):
                    t = find_cck_star_violation(delta, k, engine=engine)
                    assert (t is not None) == expected
                    if t is not None:
                        assert star_witness_ok(delta, t, k)


def test_engines_agree_random_complexes():
    rng = random.Random(21)
    for _ in range(40):
        n = rng.randint(3, 6)
        delta = random_complex(n, rng, rng.choice((0.3, 0.5, 0.7)))
        for k in (2, 3):
            a = find_cck_star_violation(delta, k, engine="dfs")
            b = find_cck_star_violation(delta, k, engine="grid")
            assert (a is None) == (b is None)
            for t in (a, b):
                if t is not None:
                    assert star_witness_ok(delta, t, k)


def test_dfs_witness_is_deterministic():
    runs = {find_cck_star_violation(SHIFTED7, 2, engine="dfs").to_json().__repr__() for _ in range(3)}
    assert len(runs) == 1


def test_dfs_budget_exhaustion_is_inconclusive():
    with pytest.raises(Inconclusive) as err:
        find_cck_star_violation(SHIFTED7, 3, SearchLimits(node_budget=5), engine="dfs")
    assert err.value.nodes > 5


def test_max_set_size_limit():
    assert find_cck_star_violation(SHIFTED7, 2, SearchLimits(max_set_size=2), engine="dfs") is None


def test_predicate_complex_needs_candidates():
    from qpcone.complexes import PredicateComplex

    pc = PredicateComplex(3, lambda b: b.bit_count() <= 1)
    with pytest.raises(ValueError):
        find_cck_star_violation(pc, 2)
    assert find_cck_star_violation(pc, 2, candidates=([S(3, 1)], [S(3, 1, 2)])) is None


def test_swapped_order_fails_cc4():
    order = load_order(json.loads((FIXTURES / "swapped_order_n5.json").read_text()))
    for engine in ("grid", "dfs"):
        assert find_cck_violation(order, 2, engine=engine) is None
        assert find_cck_violation(order, 3, engine=engine) is None
        t = find_cck_violation(order, 4, engine=engine)
        assert t is not None and order_witness_ok(order, t, 4)


def test_weight_orders_satisfy_cc_k():
    rng = random.Random(12)
    for _ in range(15):
        order = order_from_weights(random_weights(rng, rng.randint(2, 5), 12))
        for k in (2, 3, 4):
            assert find_cck_violation(order, k) is None


def test_non_qp_ranking_fails_cc2():
    # {1,2} below {1} contradicts adding atom 2 to both sides of empty < {2}
    bad = load_order(json.loads((FIXTURES / "bad_ranking.json").read_text()))
    t = find_cck_violation(bad, 2, engine="dfs")
    assert t is not None and order_witness_ok(bad, t, 2)


def test_reduce_transform_complex_context():
    left = (S(6, 1, 2), S(6, 3, 4), S(6, 5, 6))
    right = (S(6, 1, 3), S(6, 2, 5), S(6, 4, 6))
    delta = from_generators(6, list(left))
    t = reduce_transform(TradingTransform(left, right), delta)
    assert t is not None and len(t) == 2
    assert is_trading_transform(t.left, t.right)


def test_reduce_transform_order_context():
    # an arbitrary ranking (not a QP order) with every left set below every right set
    left = (S(6, 1, 2), S(6, 3, 4), S(6, 5, 6))
    right = (S(6, 1, 3), S(6, 2, 5), S(6, 4, 6))
    low = {s.bits for s in left}
    rank = [0 if b in low else 1 for b in range(64)]
    t = reduce_transform(TradingTransform(left, right), QPOrder.from_ranks(6, rank))
    assert t is not None and len(t) == 2 and is_trading_transform(t.left, t.right)


def test_reduce_transform_without_compatible_pairs():
    left = (S(2, 1), S(2, 1))
    right = (S(2, 1), S(2, 1))
    delta = from_generators(2, [S(2, 1)])
    with pytest.raises(ValueError):
        reduce_transform(TradingTransform(left, right), delta)
    with pytest.raises(ValueError):
        reduce_transform(TradingTransform((S(2, 1),), (S(2, 2),)), delta)
