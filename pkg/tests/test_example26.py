import itertools
import json
import random
from dataclasses import replace
from fractions import Fraction

import pytest

from qpcone import example26 as ex
from qpcone.cancellation import find_cck_star_violation, reduce_transform
from qpcone.core import Subset, is_compatible, is_trading_transform, restricted_sum
from qpcone.feasibility import exact_rank

from conftest import FIXTURES


@pytest.fixture(scope="module")
def built():
    return ex.default_construction()


@pytest.fixture(scope="module")
def report(built):
    return ex.verify_construction(built)


def test_u_set():
    u = ex.build_u_set()
    assert len(u.vectors) == 36
    assert len(u.pairs) == 18
    assert all(sum(v[:4]) == 2 and sum(v[4:]) == 2 for v in u.vectors)
    assert ((0, 0, 1, 1, 1, 1, 0, 0), (1, 1, 0, 0, 0, 0, 1, 1)) in u.pairs
    flat = [v for p in u.pairs for v in p]
    assert sorted(flat) == sorted(u.vectors)
    assert all(tuple(1 - x for x in a) == b for a, b in u.pairs)


def test_choose_m_default_sets():
    c = ex.choose_m(0)
    assert len(c.m) == 8 and all(len(r) == 18 for r in c.m)
    sizes = [len(s) for s in c.base_sets]
    # each column has two ones among rows 1-4 and two among rows 5-8
    assert sum(sizes[:4]) == sum(sizes[4:]) == 36
    assert sizes == [0, 12, 12, 12, 9, 9, 9, 9]
    assert ex.cross_pair_violation(c.base_sets) is None


def test_base_sets_cross_pairs_incompatible(built):
    a, b = built.base_sets[:4], built.base_sets[4:]
    assert is_trading_transform(a, b)
    for i, k in itertools.permutations(range(4), 2):
        for j, m in itertools.permutations(range(4), 2):
            assert not is_compatible((a[i], b[j]), (a[k], b[m]))


def test_random_selectors_valid():
    rng = random.Random(1)
    for _ in range(100):
        c = ex.choose_m(rng.getrandbits(18))
        assert ex.cross_pair_violation(c.base_sets) is None
        assert ex.cross_pair_violation(c.ext_sets) is None


def test_selector_range():
    with pytest.raises(ValueError):
        ex.choose_m(1 << 18)


def test_m_prime_blocks(built):
    mp = built.m_prime
    heavy = [row[18:] for row in mp]
    for r in range(4):
        assert heavy[r] == tuple(int(c == r or c == 4 + r) for c in range(8))
    for j in range(1, 5):
        row = heavy[3 + j]
        assert row[4 + j - 1] == 1
        assert row[ex.J_COLUMN[j] - 19] == 1
        assert sum(row) == 2
    # the J block permutes the first four heavy columns
    assert sorted(ex.J_COLUMN.values()) == [19, 20, 21, 22]


def test_weights(built):
    w, n_big, k_big = built.weights, built.n_big, built.k_big
    assert len(w) == 26
    assert all(x > 0 for x in w)
    assert w[25] == k_big
    assert 126 < k_big < n_big
    for s in built.ext_sets:
        assert sum(w[a - 1] for a in s.atoms) == n_big
    base = ex.default_base_weights()
    assert base == tuple(Fraction(201**i, 201**17) for i in range(18))
    assert k_big == 1000 * sum(base) and n_big == 1000 * k_big


def test_system_rank():
    assert exact_rank(ex.system_matrix()) == 7


def test_heavy_forms_agree(built):
    assert ex.heavy_forms_by_substitution(built.base_sets) == ex.heavy_forms_closed(built.base_sets)


def test_transform_and_xprime(built):
    t = built.transform
    assert is_trading_transform(t.left, t.right)
    assert len(built.xprime) == 28 and len(set(built.xprime)) == 28


def test_delta_membership_examples(built):
    s = built.ext_sets
    for a in s[:4]:
        assert ex.delta_membership(built, a)
    for b in s[4:]:
        assert not ex.delta_membership(built, b)
    assert ex.delta_membership(built, Subset(26, 0))
    assert not ex.delta_membership(built, Subset.full(26))


def test_default_report_passes(report):
    assert report.ok and report.conclusion == "not threshold"
    assert all(r.ok for r in report.checks.values())
    assert report.checks["d_six_vectors_rank_6"].details["rank"] == 6
    assert report.checks["e_heavy_forms_rank_8"].details["rank"] == 8
    assert report.checks["b_xprime_closed"].details["size"] == 28
    h = report.checks["h_cc4_star_witness"].details
    assert all(h["left_in_delta"]) and all(h["right_out_of_delta"]) and h["trading_transform"]


def test_xprime_closed_by_direct_check(built):
    xs = set(built.xprime)
    for x, y in itertools.product(xs, repeat=2):
        s = restricted_sum(x, y)
        assert s is None or s in xs


def test_cc4_star_search_over_special_sets(built):
    delta = ex.delta_complex(built)
    ext = built.ext_sets
    t = find_cck_star_violation(delta, 4, candidates=(ext, ext))
    assert t is not None
    assert sorted(a.bits for a in t.left) == sorted(a.bits for a in ext[:4])
    assert sorted(b.bits for b in t.right) == sorted(b.bits for b in ext[4:])
    # distinct sides, as forced for initial segments
    assert len(set(t.left)) == 4 and len(set(t.right)) == 4
    assert find_cck_star_violation(delta, 3, candidates=(ext, ext)) is None


def test_transform_does_not_shorten(built):
    assert reduce_transform(built.transform, ex.delta_complex(built)) is None


def test_mutated_xprime_fails(built):
    bad = replace(built, xprime=built.xprime[1:])
    rep = ex.verify_construction(bad)
    assert not rep.ok
    failed = [k for k, r in rep.checks.items() if r.ok is False]
    assert failed == ["b_xprime_closed"]


def test_mutated_weights_fail(built):
    w = list(built.weights)
    w[0] += 1
    rep = ex.verify_construction(replace(built, weights=tuple(w)))
    assert not rep.ok


def test_unsolved_construction_rejected():
    with pytest.raises(ex.ConstructionError):
        ex.verify_construction(ex.choose_m(0))


def test_other_selectors_pass():
    for sel in (0x3FFFF, 0x15A5A):
        assert ex.verify_construction(ex.default_construction(sel)).ok


def test_monotone_sampling(built):
    assert ex.sample_monotonicity(built, 100_000, seed=0) is None


def test_untying_consistency(built):
    w = built.weights
    for x in built.xprime:
        assert x.dot(w) == 0
    census = ex.tie_census(built)
    assert census is not None
    assert set(census) == set(built.xprime) | {-x for x in built.xprime}


def test_json_round_trip_and_determinism(built, tmp_path):
    path = tmp_path / "c.json"
    ex.save(built, str(path))
    again = ex.load(str(path))
    assert again.to_json() == built.to_json()
    assert ex.default_construction().to_json() == built.to_json()
    stored = json.loads((FIXTURES / "example26.json").read_text())
    assert ex.Construction.from_json(stored).to_json() == built.to_json()
