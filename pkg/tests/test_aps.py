import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apcert.aps import (
    ColoringError,
    ap_from_witness,
    ap_table,
    as_coloring,
    coloring_from_code,
    count_monochromatic_direct,
    count_monochromatic_indicator,
    enumerate_aps,
    evaluate_pg,
    format_coloring,
    pair_coefficients,
    parse_coloring,
)
from apcert.groups import SizeLimitError, build_cyclic, build_symmetric, parse_group_spec

SMALL = ["Z1", "Z3", "Z4", "Z5", "Z8", "Z9", "S3", "D8", "Q8", "Z2xZ4", "Z3xZ3", "D10", "S4"]


def brute_aps(G, k):
    """Sets {a, ba, ..., b^(k-1) a} of k distinct elements, by plain loops."""
    out = set()
    for a in range(G.n):
        for b in range(G.n):
            seq = [a]
            for _ in range(k - 1):
                seq.append(G.product(b, seq[-1]))
            if len(set(seq)) == k:
                out.add(tuple(sorted(seq)))
    return out


@pytest.mark.parametrize("spec", SMALL)
@pytest.mark.parametrize("k", [3, 4, 5])
def test_enumeration_matches_brute_force(spec, k):
    G = parse_group_spec(spec)
    tab = ap_table(G, k)
    assert {tuple(r) for r in tab.elements.tolist()} == brute_aps(G, k)
    orders = G.element_orders()
    # every (a, b) with ord(b) >= k is a witness of exactly one set
    assert tab.witness_count.sum() == G.n * int((orders >= k).sum())


@pytest.mark.parametrize("spec, count", [("Z3", 1), ("Z4", 4), ("Z5", 10), ("S3", 2), ("Z1", 0), ("Z2", 0)])
def test_known_counts(spec, count):
    assert len(ap_table(parse_group_spec(spec), 3)) == count


def test_witnesses_generate_their_set():
    G = parse_group_spec("D10")
    for ap in enumerate_aps(G, 3):
        assert ap.witnesses
        for a, b in ap.witnesses:
            assert ap_from_witness(G, a, b, 3) == ap.elements


def test_order_three_sets_have_six_witnesses():
    # a 3-AP inside a cyclic subgroup of order 3 is reached from each start and both generators
    tab = ap_table(build_cyclic(3), 3)
    assert tab.witness_count.tolist() == [6]
    tab5 = ap_table(build_cyclic(5), 3)
    assert set(tab5.witness_count.tolist()) == {2}


def test_enumeration_limit(monkeypatch):
    monkeypatch.setenv("APCERT_ENUM_LIMIT", "10")
    G = build_cyclic(11)
    with pytest.raises(SizeLimitError):
        ap_table(G, 3)
    assert len(ap_table(G, 3, force=True)) == 55


@pytest.mark.parametrize("spec", ["Z8", "Z9", "S3", "D8"])
@pytest.mark.parametrize("k", [3, 4, 5])
def test_indicator_equals_direct_random(spec, k):
    G = parse_group_spec(spec)
    rng = np.random.default_rng(k * 100 + G.n)
    for _ in range(300):
        chi = rng.choice([-1, 1], size=G.n)
        assert count_monochromatic_indicator(G, chi, k) == count_monochromatic_direct(G, chi, k)


@given(st.sampled_from(["Z7", "Z10", "D8", "Q8", "S3", "Z3xZ3"]), st.data())
def test_pair_identity_on_colorings(spec, data):
    # 4 * (monochromatic count) = p_G(chi) + T for every +-1 coloring
    G = parse_group_spec(spec)
    chi = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=G.n, max_size=G.n))
    T = len(ap_table(G, 3))
    assert 4 * count_monochromatic_direct(G, chi) == evaluate_pg(G, chi) + T


def test_pair_coefficients_count_containing_sets():
    G = parse_group_spec("D8")
    pc = pair_coefficients(G)
    sets = brute_aps(G, 3)
    for a, b in itertools.combinations(range(G.n), 2):
        assert pc[(a, b)] == sum(1 for s in sets if a in s and b in s)
    assert pc.pair_sum() == 3 * pc.total_aps
    with pytest.raises(KeyError):
        pc[(1, 1)]


def test_evaluate_pg_exact_and_box():
    G = build_cyclic(5)
    half = Fraction(1, 2)
    assert evaluate_pg(G, [half] * 5) == Fraction(30, 4)
    assert evaluate_pg(G, [1, 1, 1, 1, 1]) == 30
    assert evaluate_pg(G, [0.5] * 5) == pytest.approx(7.5)
    with pytest.raises(ValueError):
        evaluate_pg(G, [2, 0, 0, 0, 0])


def test_color_swap_preserves_count():
    G = parse_group_spec("D10")
    rng = np.random.default_rng(3)
    for _ in range(50):
        chi = rng.choice([-1, 1], size=G.n)
        assert count_monochromatic_direct(G, chi) == count_monochromatic_direct(G, -chi)


def test_coloring_parsing():
    assert parse_coloring("+-+").tolist() == [1, -1, 1]
    assert parse_coloring("[1, -1]").tolist() == [1, -1]
    assert format_coloring([1, -1, -1]) == "+--"
    assert coloring_from_code(0b101, 4).tolist() == [1, -1, 1, -1]
    with pytest.raises(ColoringError):
        parse_coloring("+x")
    with pytest.raises(ColoringError):
        as_coloring([1, 0, 1])
    with pytest.raises(ColoringError):
        count_monochromatic_direct(build_cyclic(5), "++")


def test_large_group_table_dedup():
    G = build_symmetric(5)
    tab = ap_table(G, 3)
    assert len(tab) == 4840
    assert len({tuple(r) for r in tab.elements.tolist()}) == 4840
