from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from apcert.aps import ap_table
from apcert.bounds import (
    bound_from_lambda,
    bound_term,
    format_table,
    k_set,
    table1,
    theorem1_bound,
    total_aps_proof_formula,
    total_aps_theorem_formula,
)
from apcert.groups import OrderProfile, build_cyclic, euler_phi, parse_group_spec

ORACLE_GROUPS = (
    [f"Z{n}" for n in range(4, 25)]
    + ["S3", "S4", "Q8", "Z2xZ4", "Z3xZ3", "Z2xZ2xZ2"]
    + [f"D{2 * n}" for n in range(3, 9)]
)


def test_k_set_rule():
    assert k_set(range(1, 40)) == [k for k in range(5, 40) if 4 * euler_phi(k) >= 3 * k]
    assert k_set([1, 2, 3, 4, 6, 8]) == []
    assert 5 in k_set([5]) and 15 not in k_set([15])


def test_bound_term_sign():
    assert bound_term(5, 4, 5) == Fraction(5 * 4, 8) * (1 - Fraction(3, 4))
    # k = 15 misses the K-set: the term would be negative
    assert bound_term(15, 8, 15) < 0


def test_small_bounds():
    assert theorem1_bound(build_cyclic(5)).bound == Fraction(5, 8)
    assert theorem1_bound(build_cyclic(5)).ceiling == 1
    assert theorem1_bound(build_cyclic(8)).bound == 0
    assert theorem1_bound(parse_group_spec("S3")).bound == 0


def test_table_rows_from_profiles():
    rows = {r.group: r for r in table1()}
    # rows with the reference totals
    assert (rows["S5"].total_aps_theorem, rows["S5"].bound) == (4540, 90)
    assert (rows["S6"].total_aps_theorem, rows["S6"].bound) == (205440, 3240)
    assert (rows["S7"].total_aps_theorem, rows["S7"].bound) == (11307660, 306180)
    assert rows["S8"].bound == 16208640
    # the profile of S8 gives this total under the N*N_3/24 variant
    assert rows["S8"].total_aps_theorem == 774681600
    assert rows["S8"].total_aps_proof == 780890880


def test_s5_proof_formula_matches_enumeration():
    G = parse_group_spec("S5")
    assert total_aps_proof_formula(G) == len(ap_table(G, 3)) == 4840


def test_s3_divide_by_24_variant_is_fractional():
    rep = theorem1_bound(parse_group_spec("S3"))
    assert rep.total_aps_theorem == Fraction(1, 2)
    assert rep.total_aps_proof == 2
    assert not rep.formulas_agree
    assert any("not an integer" in n for n in rep.notes)


@pytest.mark.parametrize("spec", ORACLE_GROUPS)
def test_proof_formula_counts_distinct_sets(spec):
    G = parse_group_spec(spec)
    assert total_aps_proof_formula(G) == len(ap_table(G, 3))


@given(st.integers(1, 80))
def test_formulas_agree_without_order_three(n):
    G = build_cyclic(n)
    same = total_aps_theorem_formula(G) == total_aps_proof_formula(G)
    assert same == (n % 3 != 0)


def test_bound_accepts_profile():
    prof = OrderProfile({1: 1, 5: 4})
    assert theorem1_bound(prof, name="Z5").bound == Fraction(5, 8)


def test_bound_from_lambda():
    G = build_cyclic(5)
    assert bound_from_lambda(G, Fraction(-15, 2)) == Fraction(5, 8)
    assert bound_from_lambda(None, -7.5, 10) == pytest.approx(0.625)


def test_format_table_layout():
    text = format_table(table1())
    lines = text.splitlines()
    assert lines[0].split(" | ")[0].strip() == "Group G"
    assert "Number of 3-APs" in lines[0] and "Lower bound for R(3,G,2)" in lines[0]
    assert [ln.split("|")[0].strip() for ln in lines[2:]] == ["S5", "S6", "S7", "S8"]
    assert "90" in lines[2] and "16208640" in lines[5]


def test_decimal_json():
    js = theorem1_bound(build_cyclic(5)).to_json(decimal=True)
    assert js["bound"] == pytest.approx(0.625)
    js = theorem1_bound(build_cyclic(5)).to_json()
    assert js["bound"] == "5/8"
