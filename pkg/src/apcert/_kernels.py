"""Hot inner loops with a numba path and a pure-numpy path.

Each kernel exists twice: ``*_numba`` (compiled lazily with ``@njit``) and
``*_numpy`` (vectorised, no compilation).  :func:`get` returns the variant
selected by :func:`apcert._config.use_numba`, so ``APCERT_NO_NUMBA=1``
switches the whole package to the numpy path.

Colorings are encoded as integers: bit ``e - 1`` set means element ``e`` is
colored -1.  Element 0 (the identity) is never encoded and is always +1.
"""

from __future__ import annotations

import numpy as np

from . import _config

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# AP rows: rows[a * nb + j] = (a, b_j a, b_j^2 a, ..., b_j^(k-1) a)
# ---------------------------------------------------------------------------


def _ap_rows_py(mul, bs, k):
    n = mul.shape[0]
    nb = bs.shape[0]
    rows = np.empty((n * nb, k), dtype=np.int32)
    for a in range(n):
        for j in range(nb):
            b = bs[j]
            r = a * nb + j
            cur = a
            rows[r, 0] = cur
            for i in range(1, k):
                cur = mul[b, cur]
                rows[r, i] = cur
    return rows


_ap_rows_nb = njit(cache=True, nogil=True)(_ap_rows_py)


def ap_rows_numba(mul: np.ndarray, bs: np.ndarray, k: int) -> np.ndarray:
    return _ap_rows_nb(np.ascontiguousarray(mul), np.ascontiguousarray(bs, dtype=np.int64), k)


def ap_rows_numpy(mul: np.ndarray, bs: np.ndarray, k: int) -> np.ndarray:
    n = mul.shape[0]
    bs = np.asarray(bs, dtype=np.int64)
    out = np.empty((n, bs.size, k), dtype=np.int32)
    cur = np.broadcast_to(np.arange(n)[:, None], (n, bs.size)).copy()
    out[:, :, 0] = cur
    for i in range(1, k):
        cur = mul[bs[None, :], cur]
        out[:, :, i] = cur
    return out.reshape(n * bs.size, k)


# ---------------------------------------------------------------------------
# Exhaustive search over colorings
# ---------------------------------------------------------------------------


def _insert_sorted(opt, m, cap, code):
    # keep opt[:m] as the `cap` smallest optimal codes seen so far
    if m == cap and code >= opt[m - 1]:
        return m
    pos = m if m < cap else cap - 1
    while pos > 0 and opt[pos - 1] > code:
        if pos < cap:
            opt[pos] = opt[pos - 1]
        pos -= 1
    opt[pos] = code
    return m + 1 if m < cap else m


_insert_sorted_nb = njit(cache=True, nogil=True)(_insert_sorted)


@njit(cache=True, nogil=True)
def _gray_search_nb(aps, inc_ptr, inc_idx, n, prefix, free_bits, cap):
    T, k = aps.shape
    cnt = np.zeros(T, dtype=np.int32)
    minus = np.zeros(n, dtype=np.int8)
    for e in range(1, n):
        if (prefix >> (e - 1)) & 1:
            minus[e] = 1
    total = 0
    for t in range(T):
        c = 0
        for i in range(k):
            c += minus[aps[t, i]]
        cnt[t] = c
        if c == 0 or c == k:
            total += 1
    code = prefix
    best = total
    n_opt = 1
    opt = np.zeros(max(cap, 1), dtype=np.int64)
    m = 0
    if cap > 0:
        opt[0] = code
        m = 1
    limit = np.int64(1) << free_bits
    for it in range(1, limit):
        bit = 0
        while ((it >> bit) & 1) == 0:
            bit += 1
        e = bit + 1
        delta = 1 if minus[e] == 0 else -1
        minus[e] = 1 - minus[e]
        for p in range(inc_ptr[e], inc_ptr[e + 1]):
            t = inc_idx[p]
            c = cnt[t]
            if c == 0 or c == k:
                total -= 1
            c += delta
            cnt[t] = c
            if c == 0 or c == k:
                total += 1
        code ^= np.int64(1) << bit
        if total < best:
            best = total
            n_opt = 1
            m = 0
            if cap > 0:
                opt[0] = code
                m = 1
        elif total == best:
            n_opt += 1
            if cap > 0:
                m = _insert_sorted_nb(opt, m, cap, code)
    return best, n_opt, opt[:m].copy()


def gray_search_numba(aps, inc_ptr, inc_idx, n, prefix, free_bits, cap):
    """Gray-code walk over the low ``free_bits`` bits starting from ``prefix``.

    Returns ``(min_count, number_of_optimal_codes, smallest_optimal_codes)``.
    """
    best, n_opt, opt = _gray_search_nb(
        np.ascontiguousarray(aps, dtype=np.int32),
        np.ascontiguousarray(inc_ptr, dtype=np.int64),
        np.ascontiguousarray(inc_idx, dtype=np.int64),
        int(n),
        np.int64(prefix),
        int(free_bits),
        int(cap),
    )
    return int(best), int(n_opt), [int(c) for c in opt]


def count_codes_numpy(aps: np.ndarray, n: int, codes: np.ndarray) -> np.ndarray:
    """Monochromatic AP count for every coloring code in ``codes`` (from scratch)."""
    codes = np.asarray(codes, dtype=np.int64)
    k = aps.shape[1]
    shifts = np.arange(n, dtype=np.int64) - 1
    bits = np.zeros((n, codes.size), dtype=np.int8)
    if n > 1:
        bits[1:] = (codes[None, :] >> shifts[1:, None]) & 1
    total = np.zeros(codes.size, dtype=np.int64)
    step = max(1, (1 << 22) // max(codes.size, 1))
    for s in range(0, aps.shape[0], step):
        block = aps[s : s + step]
        c = bits[block[:, 0]].astype(np.int16)
        for i in range(1, k):
            c += bits[block[:, i]]
        total += ((c == 0) | (c == k)).sum(axis=0)
    return total


def gray_search_numpy(aps, inc_ptr, inc_idx, n, prefix, free_bits, cap, chunk_bits=16):
    """Same contract as :func:`gray_search_numba`, by batched recounting."""
    del inc_ptr, inc_idx
    aps = np.asarray(aps, dtype=np.int64)
    best = None
    n_opt = 0
    opt: list[int] = []
    span = 1 << int(free_bits)
    chunk = 1 << min(int(chunk_bits), int(free_bits))
    for start in range(0, span, chunk):
        codes = np.int64(prefix) + np.arange(start, min(start + chunk, span), dtype=np.int64)
        totals = count_codes_numpy(aps, n, codes)
        lo = int(totals.min())
        hits = codes[totals == lo]
        if best is None or lo < best:
            best = lo
            n_opt = int(hits.size)
            opt = [int(c) for c in hits[:cap]]
        elif lo == best:
            n_opt += int(hits.size)
            opt = sorted(opt + [int(c) for c in hits[:cap]])[:cap]
    return int(best), n_opt, opt


# ---------------------------------------------------------------------------
# Running-count trace (for the incremental-correctness check)
# ---------------------------------------------------------------------------


def _gray_trace_py(aps, inc_ptr, inc_idx, n, free_bits, checkpoints):
    T, k = aps.shape
    cnt = np.zeros(T, dtype=np.int32)
    minus = np.zeros(n, dtype=np.int8)
    total = T  # all +1: every AP monochromatic
    out_codes = np.zeros(checkpoints.shape[0], dtype=np.int64)
    out_totals = np.zeros(checkpoints.shape[0], dtype=np.int64)
    q = 0
    code = np.int64(0)
    while q < checkpoints.shape[0] and checkpoints[q] == 0:
        out_codes[q] = code
        out_totals[q] = total
        q += 1
    limit = np.int64(1) << free_bits
    for it in range(1, limit):
        if q >= checkpoints.shape[0]:
            break
        bit = 0
        while ((it >> bit) & 1) == 0:
            bit += 1
        e = bit + 1
        delta = 1 if minus[e] == 0 else -1
        minus[e] = 1 - minus[e]
        for p in range(inc_ptr[e], inc_ptr[e + 1]):
            t = inc_idx[p]
            c = cnt[t]
            if c == 0 or c == k:
                total -= 1
            c += delta
            cnt[t] = c
            if c == 0 or c == k:
                total += 1
        code ^= np.int64(1) << bit
        while q < checkpoints.shape[0] and checkpoints[q] == it:
            out_codes[q] = code
            out_totals[q] = total
            q += 1
    return out_codes, out_totals


_gray_trace_nb = njit(cache=True, nogil=True)(_gray_trace_py)


def gray_trace(aps, inc_ptr, inc_idx, n, checkpoints, compiled=None):
    """Codes and running totals of the Gray walk at the sorted iteration indices."""
    compiled = _config.use_numba() if compiled is None else compiled
    fn = _gray_trace_nb if (compiled and HAVE_NUMBA) else _gray_trace_py
    return fn(
        np.ascontiguousarray(aps, dtype=np.int32),
        np.ascontiguousarray(inc_ptr, dtype=np.int64),
        np.ascontiguousarray(inc_idx, dtype=np.int64),
        int(n),
        int(n - 1),
        np.ascontiguousarray(np.sort(checkpoints), dtype=np.int64),
    )


_REGISTRY = {
    "ap_rows": {"numba": ap_rows_numba, "numpy": ap_rows_numpy},
    "gray_search": {"numba": gray_search_numba, "numpy": gray_search_numpy},
}


def backend() -> str:
    return "numba" if (HAVE_NUMBA and _config.use_numba()) else "numpy"


def get(name: str, which: str | None = None):
    """Kernel ``name`` for backend ``which`` (default: the configured backend)."""
    return _REGISTRY[name][which or backend()]
