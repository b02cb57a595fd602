import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apcert import _config, _kernels
from apcert.aps import ap_table
from apcert.groups import build_cyclic, parse_group_spec

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("spec", ["Z12", "S4", "D10", "Q8"])
@pytest.mark.parametrize("k", [3, 4])
def test_ap_rows_parity(spec, k):
    G = parse_group_spec(spec)
    bs = np.array([b for b in range(G.n) if G.element_orders()[b] >= k], dtype=np.int64)
    a = _kernels.ap_rows_numba(G.mul, bs, k)
    b = _kernels.ap_rows_numpy(G.mul, bs, k)
    assert np.array_equal(a, b)


@settings(max_examples=15)
@given(st.integers(3, 12), st.integers(0, 3))
def test_gray_search_parity(n, shard_bits):
    G = build_cyclic(n)
    tab = ap_table(G, 3)
    ptr, idx = tab.incidence()
    bits = min(shard_bits, n - 1)
    free = n - 1 - bits
    for s in range(1 << bits):
        a = _kernels.gray_search_numba(tab.elements, ptr, idx, n, s << free, free, 8)
        b = _kernels.gray_search_numpy(tab.elements, ptr, idx, n, s << free, free, 8)
        assert a == b


def test_env_flag_selects_numpy():
    code = "from apcert import _kernels; print(_kernels.backend())"
    env = dict(os.environ, APCERT_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["APCERT_NO_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_config_reads_env(monkeypatch):
    monkeypatch.setenv("APCERT_NO_NUMBA", "1")
    assert not _config.use_numba()
    assert _kernels.get("gray_search") is _kernels.gray_search_numpy
    monkeypatch.delenv("APCERT_NO_NUMBA")
    assert _config.use_numba()
