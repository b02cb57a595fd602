import itertools
import json
import math

import numpy as np
import pytest

from apcert import _kernels
from apcert.aps import ap_table, count_monochromatic_direct
from apcert.bounds import theorem1_bound
from apcert.groups import SizeLimitError, build_cyclic, parse_group_spec
from apcert.oracle import (
    ExactResult,
    counting_check,
    cyclic_interval,
    cyclic_table_check,
    dihedral_identity_check,
    exact_min,
    shard_layout,
    verify_bound,
    verify_suite,
)


def brute_min(G, k=3):
    """Plain loop over all 2^N colorings."""
    best = None
    for chi in itertools.product((1, -1), repeat=G.n):
        c = count_monochromatic_direct(G, chi, k)
        best = c if best is None else min(best, c)
    return best


@pytest.mark.parametrize("spec", ["Z4", "Z5", "Z6", "Z7", "Z8", "S3", "D8", "Q8", "Z9", "Z2xZ4", "Z10"])
def test_matches_brute_force(spec):
    G = parse_group_spec(spec)
    assert exact_min(G).exact_min == brute_min(G)


@pytest.mark.parametrize("spec, k", [("Z8", 4), ("Z9", 4), ("Z10", 5)])
def test_longer_progressions(spec, k):
    G = parse_group_spec(spec)
    assert exact_min(G, k).exact_min == brute_min(G, k)


@pytest.mark.parametrize("n, value", [(5, 1), (7, 3), (8, 0)])
def test_known_cyclic_values(n, value):
    assert exact_min(build_cyclic(n)).exact_min == value


def test_optimal_colorings_reproduce_minimum():
    G = build_cyclic(11)
    res = exact_min(G, cap=4)
    assert len(res.optimal_colorings) == min(4, res.optimal_count)
    for s in res.optimal_colorings:
        chi = [1 if c == "+" else -1 for c in s]
        assert chi[0] == 1
        assert count_monochromatic_direct(G, chi) == res.exact_min


def test_thread_count_does_not_change_output():
    G = build_cyclic(16)
    one = exact_min(G, threads=1)
    four = exact_min(G, threads=4)
    assert (one.exact_min, one.optimal_count, one.optimal_colorings) == (
        four.exact_min,
        four.optimal_count,
        four.optimal_colorings,
    )
    assert four.shards == 4


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("spec", ["Z13", "D10", "Z3xZ3"])
def test_backends_agree(spec):
    G = parse_group_spec(spec)
    a = exact_min(G, backend="numba")
    b = exact_min(G, backend="numpy")
    assert (a.exact_min, a.optimal_count, a.optimal_colorings) == (b.exact_min, b.optimal_count, b.optimal_colorings)


def test_checkpoint_resume(tmp_path):
    G = build_cyclic(14)
    ref = exact_min(G)
    first = exact_min(G, checkpoint=tmp_path)
    files = sorted(tmp_path.glob("*.json"))
    assert len(files) == 16
    # drop half the shards; the kept files are reused untouched
    for f in files[8:]:
        f.unlink()
    saved = json.loads(files[0].read_text())
    again = exact_min(G, checkpoint=tmp_path)
    assert again.exact_min == first.exact_min == ref.exact_min
    assert again.optimal_count == ref.optimal_count
    assert len(list(tmp_path.glob("*.json"))) == 16
    assert json.loads(files[0].read_text()) == saved


def test_results_cache(tmp_path):
    G = build_cyclic(12)
    path = tmp_path / "cache.json"
    res = exact_min(G, cache=path)
    data = json.loads(path.read_text())
    assert "Z12|k=3" in data
    data["Z12|k=3"]["result"]["elapsed"] = 123.0
    path.write_text(json.dumps(data))
    hit = exact_min(G, cache=path)
    assert hit.elapsed == 123.0 and hit.exact_min == res.exact_min
    # a different AP set under the same key is ignored
    data["Z12|k=3"]["ap_digest"] = "0" * 16
    path.write_text(json.dumps(data))
    assert exact_min(G, cache=path).elapsed != 123.0


def test_result_json_round_trip():
    res = exact_min(build_cyclic(7))
    assert ExactResult.from_json(json.loads(json.dumps(res.to_json()))).exact_min == 3


def test_gray_walk_running_count():
    G = build_cyclic(15)
    tab = ap_table(G, 3)
    ptr, idx = tab.incidence()
    rng = np.random.default_rng(0)
    checkpoints = np.sort(rng.choice(1 << (G.n - 1), size=1000, replace=False))
    codes, totals = _kernels.gray_trace(tab.elements, ptr, idx, G.n, checkpoints)
    assert np.array_equal(codes, checkpoints ^ (checkpoints >> 1))
    assert np.array_equal(totals, _kernels.count_codes_numpy(tab.elements, G.n, codes))


def test_size_limit():
    with pytest.raises(SizeLimitError):
        exact_min(build_cyclic(25))
    with pytest.raises(SizeLimitError):
        exact_min(build_cyclic(12), max_size=10)


def test_shard_layout():
    assert shard_layout(10, 1, False) == (0, 9)
    assert shard_layout(10, 3, False) == (2, 7)
    assert shard_layout(10, 1, True) == (4, 5)
    assert shard_layout(3, 8, True) == (2, 0)


def test_cyclic_interval_constants():
    # 5 = 5 mod 24: [25/8 - 5/2 + 3/8, same] = [1, 1]
    assert cyclic_interval(5) == (1, 1)
    assert cyclic_interval(8) == (0, 0)
    lo, hi = cyclic_interval(12)
    assert (lo, hi) == (-2, 16)


@pytest.mark.parametrize("n", [4, 6, 9, 11, 13])
def test_cyclic_table(n):
    assert cyclic_table_check(n).passed


@pytest.mark.parametrize("spec", ["Z5", "Z7", "Z11", "Z13"])
def test_bound_is_sharp_on_primes(spec):
    bc = verify_bound(parse_group_spec(spec))
    assert bc.passed and bc.sharp and bc.slack == 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_dihedral_identity(n):
    chk = dihedral_identity_check(n)
    assert chk.passed, chk.detail


def test_counting_check_flags_s3():
    chk = counting_check(parse_group_spec("S3"))
    assert chk.passed
    assert "discrepancy" in chk.detail and "non-integer" in chk.detail["discrepancy"]
    assert "discrepancy" not in counting_check(build_cyclic(5)).detail


def test_verify_suite_on_dihedral():
    checks = verify_suite(parse_group_spec("D10"))
    names = [c.name for c in checks]
    assert any("D10" in n and "2 R" in n for n in names)
    assert all(c.passed for c in checks)
    ceiling = math.ceil(theorem1_bound(parse_group_spec("D10")).bound)
    assert checks[0].detail["bound_ceiling"] == ceiling
