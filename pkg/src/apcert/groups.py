"""Finite groups as Cayley tables, element orders and order profiles."""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _config


class GroupError(ValueError):
    """Base class for invalid group input."""


class SizeLimitError(GroupError):
    pass


class LatinSquareError(GroupError):
    pass


class IdentityError(GroupError):
    pass


class InverseError(GroupError):
    pass


class AssociativityError(GroupError):
    pass


class GroupSpecError(GroupError):
    """Malformed group spec string; ``position`` is the 0-based column."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


def _check_size(n: int) -> None:
    limit = _config.max_order()
    if n > limit:
        raise SizeLimitError(
            f"group order {n} exceeds the configured ceiling {limit} (set APCERT_MAX_ORDER to raise it)"
        )


def _table_dtype(n: int):
    return np.int32 if n < 2**31 else np.int64


class FiniteGroup:
    """Immutable finite group with elements ``0..n-1`` and identity ``0``.

    Most groups carry a dense multiplication table.  Symmetric groups also keep
    their permutations, so orders and inverses are available without ever
    materialising the ``n x n`` table (needed for ``S8``); :attr:`mul` builds it
    on first access.
    """

    __slots__ = ("n", "name", "labels", "_mul", "_inv", "_perms", "_orders", "_cache")

    def __init__(
        self,
        n: int,
        mul: np.ndarray | None = None,
        *,
        inv: np.ndarray | None = None,
        labels: Sequence[str] | None = None,
        name: str = "",
        perms: np.ndarray | None = None,
    ):
        if mul is None and perms is None:
            raise GroupError("need a multiplication table or a permutation representation")
        self.n = int(n)
        self.name = name
        self.labels = tuple(labels) if labels is not None else None
        self._mul = None
        if mul is not None:
            mul = np.array(mul, dtype=_table_dtype(n))
            mul.setflags(write=False)
            self._mul = mul
        self._perms = perms
        if perms is not None:
            perms.setflags(write=False)
        self._orders = None
        self._cache: dict = {}
        if inv is None:
            inv = self._compute_inverses()
        inv = np.asarray(inv, dtype=np.int64)
        inv.setflags(write=False)
        self._inv = inv

    # -- structure ---------------------------------------------------------

    @property
    def identity(self) -> int:
        return 0

    @property
    def mul(self) -> np.ndarray:
        if self._mul is None:
            table = _perm_table(self._perms)
            table.setflags(write=False)
            self._mul = table
        return self._mul

    @property
    def has_table(self) -> bool:
        return self._mul is not None

    @property
    def inv(self) -> np.ndarray:
        return self._inv

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or '?'}, n={self.n})"

    def product(self, a: int, b: int) -> int:
        if self._mul is not None:
            return int(self._mul[a, b])
        p = self._perms
        return int(_perm_rank(p, p[a][p[b]][None, :])[0])

    def with_name(self, name: str) -> "FiniteGroup":
        return FiniteGroup(self.n, self._mul, inv=self._inv, labels=self.labels, name=name, perms=self._perms)

    def label(self, g: int) -> str:
        return self.labels[g] if self.labels is not None else str(g)

    def is_abelian(self) -> bool:
        m = self.mul
        return bool(np.array_equal(m, m.T))

    def _compute_inverses(self) -> np.ndarray:
        if self._perms is not None:
            p = self._perms
            inv_perm = np.argsort(p, axis=1)
            return _perm_rank(p, inv_perm)
        rows, cols = np.nonzero(self._mul == 0)
        inv = np.empty(self.n, dtype=np.int64)
        inv[rows] = cols
        return inv

    def element_orders(self) -> np.ndarray:
        """Order of every element, as an int array indexed by element."""
        if self._orders is None:
            self._orders = _orders(self)
            self._orders.setflags(write=False)
        return self._orders

    def power(self, g: int, e: int) -> int:
        e %= int(self.element_orders()[g])
        r = 0
        for _ in range(e):
            r = self.product(g, r)
        return r


def _perm_codes(perms: np.ndarray) -> np.ndarray:
    m = perms.shape[1]
    weights = m ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return perms.astype(np.int64) @ weights


def _perm_rank(all_perms: np.ndarray, query: np.ndarray) -> np.ndarray:
    # all_perms is in lexicographic order, so base-m codes are increasing
    codes = _perm_codes(all_perms)
    return np.searchsorted(codes, _perm_codes(query)).astype(np.int64)


def _perm_table(perms: np.ndarray) -> np.ndarray:
    n = perms.shape[0]
    _check_size(n)
    codes = _perm_codes(perms)
    m = perms.shape[1]
    weights = m ** np.arange(m - 1, -1, -1, dtype=np.int64)
    table = np.empty((n, n), dtype=_table_dtype(n))
    for i in range(n):
        # (g_i * g_j)(x) = g_i(g_j(x))
        composed = perms[i][perms]
        table[i] = np.searchsorted(codes, composed.astype(np.int64) @ weights)
    return table


def _orders(G: FiniteGroup) -> np.ndarray:
    n = G.n
    orders = np.zeros(n, dtype=np.int64)
    if G._perms is not None and G._mul is None:
        base = G._perms
        ident = np.arange(base.shape[1])
        cur = base.copy()
        k = 1
        todo = np.ones(n, dtype=bool)
        while todo.any():
            done = todo & (cur == ident).all(axis=1)
            orders[done] = k
            todo &= ~done
            cur = np.take_along_axis(base, cur, axis=1)
            k += 1
        return orders
    mul = G.mul
    idx = np.arange(n)
    cur = idx.copy()
    k = 1
    todo = np.ones(n, dtype=bool)
    while todo.any():
        done = todo & (cur == 0)
        orders[done] = k
        todo &= ~done
        cur = mul[cur, idx]
        k += 1
        if k > n + 1:
            raise GroupError("element order exceeds group order; table is not a group")
    return orders


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def _require_positive(n: int, what: str) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise GroupError(f"{what} must be a positive integer, got {n!r}")
    return int(n)


def build_cyclic(n: int) -> FiniteGroup:
    n = _require_positive(n, "cyclic order")
    _check_size(n)
    idx = np.arange(n)
    mul = (idx[:, None] + idx[None, :]) % n
    inv = (-idx) % n
    return FiniteGroup(n, mul, inv=inv, labels=[str(i) for i in range(n)], name=f"Z{n}")


def build_dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order ``2n``: index ``i`` is r^i, index ``n + i`` is s r^i."""
    n = _require_positive(n, "dihedral parameter")
    _check_size(2 * n)
    N = 2 * n
    mul = np.empty((N, N), dtype=np.int64)
    i = np.arange(n)
    a, b = i[:, None], i[None, :]
    mul[:n, :n] = (a + b) % n  # r^a r^b
    mul[:n, n:] = n + (b - a) % n  # r^a s r^b = s r^(b-a)
    mul[n:, :n] = n + (a + b) % n  # s r^a r^b
    mul[n:, n:] = (b - a) % n  # s r^a s r^b = r^(b-a)
    labels = [f"r^{k}" for k in range(n)] + [f"s r^{k}" for k in range(n)]
    return FiniteGroup(N, mul, labels=labels, name=f"D{N}")


def build_symmetric(m: int) -> FiniteGroup:
    """S_m on all m! permutations in lexicographic order (identity first)."""
    m = _require_positive(m, "symmetric degree")
    size = math.factorial(m)
    _check_size(size)
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int8).reshape(size, m)
    labels = ["[" + ",".join(map(str, p)) + "]" for p in perms.tolist()]
    return FiniteGroup(size, None, labels=labels, name=f"S{m}", perms=perms)


def build_direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Componentwise product; element ``(g, h)`` has index ``g * |H| + h``."""
    n = G.n * H.n
    _check_size(n)
    gm, hm = G.mul.astype(np.int64), H.mul.astype(np.int64)
    mul = gm[:, None, :, None] * H.n + hm[None, :, None, :]
    mul = mul.reshape(n, n)
    inv = (G.inv[:, None] * H.n + H.inv[None, :]).reshape(n)
    labels = [f"({G.label(g)},{H.label(h)})" for g in range(G.n) for h in range(H.n)]
    name = f"{G.name or '?'} x {H.name or '?'}"
    return FiniteGroup(n, mul, inv=inv, labels=labels, name=name)


def build_quaternion() -> FiniteGroup:
    """Q8 with elements 1, -1, i, -i, j, -j, k, -k."""
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    base = {("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
            ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")}

    def split(x):
        return (-1, x[1:]) if x.startswith("-") else (1, x)

    def times(x, y):
        sx, ux = split(x)
        sy, uy = split(y)
        s = sx * sy
        if ux == "1":
            u = uy
        elif uy == "1":
            u = ux
        elif ux == uy:
            s, u = -s, "1"
        else:
            t, u = base[(ux, uy)]
            s *= t
        return u if s == 1 else "-" + u

    table = [[names.index(times(x, y)) for y in names] for x in names]
    G, _ = from_cayley_table(table, labels=names)
    return G.with_name("Q8")


def from_cayley_table(table, labels: Sequence[str] | None = None) -> tuple[FiniteGroup, np.ndarray]:
    """Validate a Cayley table and renumber its identity to index 0.

    Returns ``(group, perm)`` where ``perm[new] = old`` is the relabelling.
    """
    try:
        mul = np.array(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise GroupError(f"table is not an integer matrix: {exc}") from exc
    if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
        raise GroupError(f"table must be a non-empty square matrix, got shape {mul.shape}")
    n = mul.shape[0]
    _check_size(n)
    if labels is not None and len(labels) != n:
        raise GroupError(f"{len(labels)} labels for a table of order {n}")
    if mul.min() < 0 or mul.max() >= n:
        raise LatinSquareError(f"entries must lie in 0..{n - 1}")
    target = np.arange(n)
    for axis, what in ((1, "row"), (0, "column")):
        ok = (np.sort(mul, axis=axis) == (target[None, :] if axis == 1 else target[:, None])).all(axis=axis)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise LatinSquareError(f"{what} {bad} is not a permutation of 0..{n - 1}")
    idx = np.arange(n)
    ids = [e for e in range(n) if (mul[e] == idx).all() and (mul[:, e] == idx).all()]
    if not ids:
        raise IdentityError("no two-sided identity element")
    e = ids[0]
    for g in range(n):
        right = np.flatnonzero(mul[g] == e)
        if right.size != 1 or mul[right[0], g] != e:
            raise InverseError(f"element {g} has no two-sided inverse")
    if n <= _config.ASSOCIATIVITY_CHECK_LIMIT:
        m32 = mul.astype(np.int32)
        left = m32[m32, :]  # left[i, j, k] = (i j) k
        right = m32[:, m32]  # right[i, j, k] = i (j k)
        diff = np.argwhere(left != right)
        if diff.size:
            i, j, k = map(int, diff[0])
            raise AssociativityError(f"({i}*{j})*{k} != {i}*({j}*{k})")
    perm = np.array([e] + [g for g in range(n) if g != e], dtype=np.int64)
    old2new = np.empty(n, dtype=np.int64)
    old2new[perm] = np.arange(n)
    new_mul = old2new[mul[np.ix_(perm, perm)]]
    new_labels = [labels[p] for p in perm] if labels is not None else None
    return FiniteGroup(n, new_mul, labels=new_labels, name="table"), perm


def load_cayley_json(path: str | Path) -> FiniteGroup:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or "mul" not in data:
        raise GroupError(f"{path}: expected an object with 'n' and 'mul'")
    if "n" in data and len(data["mul"]) != data["n"]:
        raise GroupError(f"{path}: 'n' = {data['n']} but table has {len(data['mul'])} rows")
    G, _ = from_cayley_table(data["mul"], labels=data.get("labels"))
    return G.with_name(f"@{path}")


# ---------------------------------------------------------------------------
# Orders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderProfile:
    """Counts N_k of elements of each order k."""

    counts: dict

    def __post_init__(self):
        counts = {int(k): int(v) for k, v in sorted(self.counts.items()) if v}
        object.__setattr__(self, "counts", counts)
        n = self.n
        if counts.get(1) != 1:
            raise GroupError("order profile must contain exactly one element of order 1")
        bad = [k for k in counts if n % k]
        if bad:
            raise GroupError(f"orders {bad} do not divide the group order {n}")

    @property
    def n(self) -> int:
        return sum(self.counts.values())

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.counts, 1)

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)

    def orders(self) -> list[int]:
        return list(self.counts)

    def to_json(self) -> dict:
        return {str(k): v for k, v in self.counts.items()}


def element_order(G: FiniteGroup, g: int) -> int:
    if not 0 <= g < G.n:
        raise IndexError(f"element {g} out of range for group of order {G.n}")
    return int(G.element_orders()[g])


def order_profile(G: FiniteGroup) -> OrderProfile:
    vals, counts = np.unique(G.element_orders(), return_counts=True)
    return OrderProfile(dict(zip(vals.tolist(), counts.tolist())))


def euler_phi(k: int) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"euler_phi needs a positive integer, got {k!r}")
    k = int(k)
    result = k
    m = k
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def generating_set(G: FiniteGroup) -> list[int]:
    """A small generating set, chosen greedily by element index."""
    mul = G.mul
    inside = np.zeros(G.n, dtype=bool)
    inside[0] = True
    gens: list[int] = []
    for g in range(G.n):
        if inside[g]:
            continue
        gens.append(g)
        frontier = np.flatnonzero(inside)
        while frontier.size:
            new = np.unique(mul[frontier][:, gens].ravel())
            new = new[~inside[new]]
            inside[new] = True
            frontier = new
        if inside.all():
            break
    return gens


# ---------------------------------------------------------------------------
# Spec mini-language: Z<n>, D<2n>, S<m>, Q8, @file.json, A x B
# ---------------------------------------------------------------------------

_ATOM = re.compile(r"\s*(?:(Z|D|S|Q)(\d+)|@(\S+))\s*")


def parse_group_spec(text: str) -> FiniteGroup:
    """Build a group from a spec such as ``"Z2 x Z4"`` or ``"@q8.json"``."""
    pos = 0
    factors: list[FiniteGroup] = []
    names: list[str] = []
    while True:
        m = _ATOM.match(text, pos)
        if not m:
            raise GroupSpecError("expected Z<n>, D<2n>, S<m>, Q8 or @file", text, pos)
        if m.group(3):
            path = m.group(3)
            try:
                factors.append(load_cayley_json(path))
            except OSError as exc:
                raise GroupSpecError(f"cannot read {path}: {exc.strerror}", text, m.start(3)) from exc
            names.append("@" + path)
        else:
            kind, num = m.group(1), int(m.group(2))
            where = m.start(2)
            if num < 1:
                raise GroupSpecError("order must be positive", text, where)
            if kind == "Z":
                factors.append(build_cyclic(num))
            elif kind == "D":
                if num % 2:
                    raise GroupSpecError("dihedral order must be even (D<2n>)", text, where)
                factors.append(build_dihedral(num // 2))
            elif kind == "S":
                factors.append(build_symmetric(num))
            else:
                if num != 8:
                    raise GroupSpecError("only Q8 is supported", text, where)
                factors.append(build_quaternion())
            names.append(f"{kind}{num}")
        pos = m.end()
        if pos == len(text):
            break
        sep = re.compile(r"\s*(x|×)\s*").match(text, pos)
        if not sep:
            raise GroupSpecError("expected 'x' between factors", text, pos)
        pos = sep.end()
    G = factors[0]
    for H in factors[1:]:
        G = build_direct_product(G, H)
    return G.with_name(" x ".join(names))
