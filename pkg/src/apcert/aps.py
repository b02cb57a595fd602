"""Arithmetic progressions in finite groups and monochromatic counts.

A k-term AP is the *set* {a, b a, ..., b^(k-1) a} of k distinct elements.
Distinctness is equivalent to ord(b) >= k, so enumeration only visits such b.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

import numpy as np

from . import _config, _kernels
from .groups import FiniteGroup, SizeLimitError


class ColoringError(ValueError):
    pass


@dataclass(frozen=True)
class ApSet:
    elements: tuple[int, ...]
    witnesses: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "witnesses": [list(w) for w in self.witnesses]}


@dataclass(frozen=True)
class ApTable:
    """Array form of the distinct APs of one length.

    ``elements[t]`` is the sorted element tuple of AP ``t`` (rows sorted
    lexicographically).  ``witness_count[t]`` counts every generating pair,
    while ``witnesses`` keeps at most ``WITNESS_CAP`` of them in (a, b) order.
    """

    k: int
    n: int
    elements: np.ndarray
    witness_count: np.ndarray
    witnesses: tuple[tuple[tuple[int, int], ...], ...]

    def __len__(self) -> int:
        return self.elements.shape[0]

    def incidence(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR lists: APs containing element e are ``idx[ptr[e]:ptr[e+1]]``."""
        flat = self.elements.ravel()
        order = np.argsort(flat, kind="stable")
        ap_of = order // self.k
        counts = np.bincount(flat, minlength=self.n)
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        return ptr, ap_of.astype(np.int64)

    def sets(self) -> list[ApSet]:
        return [ApSet(tuple(int(x) for x in row), w) for row, w in zip(self.elements.tolist(), self.witnesses)]


def ap_table(G: FiniteGroup, k: int = 3, *, force: bool = False) -> ApTable:
    """Distinct k-APs of ``G`` (cached on the group)."""
    if k < 3:
        raise ValueError("arithmetic progressions need k >= 3")
    key = ("ap_table", k)
    if key in G._cache:
        return G._cache[key]
    limit = _config.enumeration_limit()
    if G.n > limit and not force:
        raise SizeLimitError(
            f"AP enumeration over a group of order {G.n} exceeds the budget ({limit}); pass force=True"
        )
    orders = G.element_orders()
    bs = np.flatnonzero(orders >= k).astype(np.int64)
    n = G.n
    if bs.size == 0:
        empty = ApTable(k, n, np.zeros((0, k), dtype=np.int64), np.zeros(0, dtype=np.int64), ())
        G._cache[key] = empty
        return empty
    rows = _kernels.get("ap_rows")(G.mul, bs, k).astype(np.int64)
    # row index r = a * len(bs) + j, so rows are already in (a, b) order
    wit_a = np.repeat(np.arange(n, dtype=np.int64), bs.size)
    wit_b = np.tile(bs, n)
    srt = np.sort(rows, axis=1)
    if float(n) ** k < 2**62:
        weights = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
        keys = srt @ weights
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    else:  # pragma: no cover - only for huge n**k
        _, first, inverse = np.unique(srt, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    elements = srt[first]
    counts = np.bincount(inverse, minlength=elements.shape[0])
    order = np.argsort(inverse, kind="stable")
    starts = np.zeros(elements.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    cap = _config.WITNESS_CAP
    witnesses = []
    for t in range(elements.shape[0]):
        sel = order[starts[t] : starts[t] + min(cap, counts[t])]
        witnesses.append(tuple((int(wit_a[r]), int(wit_b[r])) for r in sel))
    elements.setflags(write=False)
    table = ApTable(k, n, elements, counts, tuple(witnesses))
    G._cache[key] = table
    return table


def enumerate_aps(G: FiniteGroup, k: int = 3, *, force: bool = False) -> list[ApSet]:
    return ap_table(G, k, force=force).sets()


def ap_from_witness(G: FiniteGroup, a: int, b: int, k: int) -> tuple[int, ...]:
    """The sorted element set generated by the pair (a, b)."""
    out = [a]
    cur = a
    for _ in range(k - 1):
        cur = G.product(b, cur)
        out.append(cur)
    return tuple(sorted(out))


def write_aps_jsonl(aps: Iterable[ApSet], fh: IO[str]) -> int:
    count = 0
    for ap in aps:
        fh.write(json.dumps(ap.to_json()) + "\n")
        count += 1
    return count


# ---------------------------------------------------------------------------
# Colorings
# ---------------------------------------------------------------------------


def parse_coloring(text: str) -> np.ndarray:
    """Parse ``"++-+"`` or a JSON array of +-1 into an int8 array."""
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ColoringError(f"bad JSON coloring: {exc}") from exc
    else:
        table = {"+": 1, "-": -1}
        try:
            values = [table[c] for c in text]
        except KeyError as exc:
            raise ColoringError(f"coloring strings may only contain '+' and '-', got {exc.args[0]!r}") from None
    return as_coloring(values)


def as_coloring(chi, n: int | None = None) -> np.ndarray:
    if isinstance(chi, str):
        return as_coloring(parse_coloring(chi), n)
    arr = np.asarray(chi)
    if arr.ndim != 1:
        raise ColoringError("a coloring is a 1-d sequence")
    if n is not None and arr.size != n:
        raise ColoringError(f"coloring has {arr.size} entries, group has {n} elements")
    if not np.isin(arr, (-1, 1)).all():
        raise ColoringError("coloring entries must be -1 or +1")
    return arr.astype(np.int8)


def format_coloring(chi: Sequence[int]) -> str:
    return "".join("+" if c > 0 else "-" for c in chi)


def coloring_from_code(code: int, n: int) -> np.ndarray:
    """Decode the oracle's integer encoding (identity fixed to +1)."""
    chi = np.ones(n, dtype=np.int8)
    for e in range(1, n):
        if (code >> (e - 1)) & 1:
            chi[e] = -1
    return chi


def count_monochromatic_direct(G: FiniteGroup, chi, k: int = 3) -> int:
    chi = as_coloring(chi, G.n)
    tab = ap_table(G, k)
    if len(tab) == 0:
        return 0
    c = chi[tab.elements]
    return int(((c == 1).all(axis=1) | (c == -1).all(axis=1)).sum())


def count_monochromatic_indicator(G: FiniteGroup, chi, k: int = 3) -> int:
    """Sum of ((1+x_1)...(1+x_k) + (1-x_1)...(1-x_k)) / 2^k over the APs."""
    chi = as_coloring(chi, G.n)
    tab = ap_table(G, k)
    if len(tab) == 0:
        return 0
    x = chi[tab.elements].astype(np.int64)
    numer = int(np.prod(1 + x, axis=1).sum() + np.prod(1 - x, axis=1).sum())
    q, r = divmod(numer, 2**k)
    if r:
        raise ArithmeticError("indicator sum is not an integer")
    return q


# ---------------------------------------------------------------------------
# The quadratic form p_G
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairCoefficients:
    """Coefficients c_ab of x_a x_b in p_G, as a symmetric matrix with zero diagonal."""

    matrix: np.ndarray
    total_aps: int

    @property
    def coeffs(self) -> dict[tuple[int, int], int]:
        iu, ju = np.nonzero(np.triu(self.matrix, 1))
        return {(int(i), int(j)): int(self.matrix[i, j]) for i, j in zip(iu, ju)}

    def __getitem__(self, pair: tuple[int, int]) -> int:
        a, b = pair
        if a == b:
            raise KeyError("p_G has no diagonal terms")
        return int(self.matrix[a, b])

    def pair_sum(self) -> int:
        return int(np.triu(self.matrix, 1).sum())


def pair_coefficients(G: FiniteGroup) -> PairCoefficients:
    key = ("pair_coefficients",)
    if key in G._cache:
        return G._cache[key]
    tab = ap_table(G, 3)
    mat = np.zeros((G.n, G.n), dtype=np.int64)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        np.add.at(mat, (tab.elements[:, i], tab.elements[:, j]), 1)
    mat = mat + mat.T
    mat.setflags(write=False)
    pc = PairCoefficients(mat, len(tab))
    G._cache[key] = pc
    return pc


def evaluate_pg(G: FiniteGroup, x) -> float | Fraction:
    """p_G at ``x`` in the box [-1, 1]^n; exact when ``x`` holds ints/Fractions."""
    pc = pair_coefficients(G)
    vals = list(x) if not isinstance(x, np.ndarray) else x
    if len(vals) != G.n:
        raise ValueError(f"point has {len(vals)} coordinates, group has {G.n} elements")
    exact = all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in vals)
    if exact:
        if any(abs(v) > 1 for v in vals):
            raise ValueError("point outside the box [-1, 1]^n")
        return sum((Fraction(c) * vals[a] * vals[b] for (a, b), c in pc.coeffs.items()), Fraction(0))
    arr = np.asarray(vals, dtype=float)
    if np.any(np.abs(arr) > 1):
        raise ValueError("point outside the box [-1, 1]^n")
    return float(arr @ pc.matrix @ arr) / 2.0
