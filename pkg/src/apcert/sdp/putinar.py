"""Degree-3 Putinar relaxation of min p_G over the box [-1, 1]^G.

With v = [1, x_0, ..., x_{N-1}] we look for PSD Q_0 and Q_g^+, Q_g^- with

    p_G - lam = v^T Q_0 v + sum_g v^T Q_g^+ v (1 + x_g) + v^T Q_g^- v (1 - x_g).

p_G has no constant term, so matching constants gives lam = -sum Q[0, 0]
over all blocks; lam is eliminated and the objective is -sum Q[0, 0].
One equality row per nonconstant monomial of degree <= 3.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from ..aps import pair_coefficients
from ..groups import FiniteGroup, SizeLimitError
from ..symmetry import orbit_basis, stabilizer_generators, symmetry_generators
from .problem import Block, SdpProblem

FULL_MODE_LIMIT = 64
SYMMETRIC_MODE_LIMIT = 512
HALF = Fraction(1, 2)


def monomial_count(n_vars: int, degree: int = 3) -> int:
    """Monomials of degree <= ``degree`` in ``n_vars`` variables, constant included."""
    return comb(n_vars + degree, degree)


class MonomialIndex:
    """Rows keyed by sorted variable tuples; () is the constant."""

    def __init__(self):
        self.index: dict[tuple[int, ...], int] = {}

    def row(self, mono: tuple[int, ...]) -> int:
        r = self.index.get(mono)
        if r is None:
            r = self.index[mono] = len(self.index)
        return r

    def __len__(self) -> int:
        return len(self.index)

    def monomials(self) -> list[tuple[int, ...]]:
        return sorted(self.index, key=self.index.get)


def _z_mono(u: int, v: int) -> tuple[int, ...]:
    """Monomial z_u z_v with z_0 = 1 and z_{g+1} = x_g, as sorted element ids."""
    return tuple(sorted(t - 1 for t in (u, v) if t))


def _accumulate(rows, index, block, u, v, mono, sign):
    r = index.row(mono)
    key = (block, u, v)
    rows.setdefault(r, {})
    rows[r][key] = rows[r].get(key, 0) + sign


def _equality_rows(basis, block: int):
    """Upper-triangle entry equalities tying each orbit to its least pair."""
    labels = basis.labels
    z = basis.z_size
    first: dict[int, tuple[int, int]] = {}
    out = []
    for u in range(z):
        for v in range(u, z):
            lab = int(labels[u, v])
            if lab not in first:
                first[lab] = (u, v)
                continue
            a, b = first[lab]
            # X[u, v] - X[a, b] = 0; off-diagonal sparse values count twice
            row = {}
            row[(block, u, v)] = 1 if u == v else HALF
            row[(block, a, b)] = -1 if a == b else -HALF
            out.append(row)
    return out


def build_putinar_degree3(G: FiniteGroup, symmetric: bool = False) -> SdpProblem:
    N = G.n
    limit = SYMMETRIC_MODE_LIMIT if symmetric else FULL_MODE_LIMIT
    if N > limit:
        mode = "symmetric" if symmetric else "full"
        raise SizeLimitError(f"{mode} relaxation supports |G| <= {limit}, got {N}")
    z = N + 1
    pc = pair_coefficients(G)
    index = MonomialIndex()
    index.row(())
    for i in range(N):
        index.row((i,))
    rows: dict[int, dict] = {}
    mul = G.mul

    if symmetric:
        blocks = [Block("Q0", z), Block("Q+", z), Block("Q-", z)]
        ut = [(u, v) for u in range(z) for v in range(u, z)]
        for u, v in ut:
            _accumulate(rows, index, 0, u, v, _z_mono(u, v), 1)
        for g in range(N):
            # Q_g = P Q P^T with P the left translation by g on Z
            perm = np.concatenate(([0], mul[g].astype(np.int64) + 1))
            for u, v in ut:
                pu, pv = int(perm[u]), int(perm[v])
                base = _z_mono(pu, pv)
                ext = tuple(sorted(base + (g,)))
                for b, sign in ((1, 1), (2, -1)):
                    _accumulate(rows, index, b, u, v, base, 1)
                    _accumulate(rows, index, b, u, v, ext, sign)
    else:
        blocks = [Block("Q0", z)]
        for g in range(N):
            blocks += [Block(f"Q+[{G.label(g)}]", z), Block(f"Q-[{G.label(g)}]", z)]
        for u in range(z):
            for v in range(u, z):
                base = _z_mono(u, v)
                _accumulate(rows, index, 0, u, v, base, 1)
                for g in range(N):
                    ext = tuple(sorted(base + (g,)))
                    for b, sign in ((1 + 2 * g, 1), (2 + 2 * g, -1)):
                        _accumulate(rows, index, b, u, v, base, 1)
                        _accumulate(rows, index, b, u, v, ext, sign)

    monomials = index.monomials()
    constraints, rhs, mono_rows = [], [], []
    for r, mono in enumerate(monomials):
        if mono == ():
            continue
        target = int(pc.matrix[mono[0], mono[1]]) if len(mono) == 2 and mono[0] != mono[1] else 0
        constraints.append(rows.get(r, {}))
        rhs.append(target)
        mono_rows.append(mono)

    meta = {
        "group": G.name,
        "order": N,
        "degree": 3,
        "mode": "symmetric" if symmetric else "full",
        "monomials": len(monomials),
        "monomial_rows": len(mono_rows),
        "monomial_list": mono_rows,
        "constant_row_eliminated": True,
        "multiplier_blocks": 2 * N,
        # sum over blocks of max (v^T v) * weight on the box: Q0 weight 1, multipliers up to 2 each
        "trace_bound": z * (1 + 4 * N),
    }
    if symmetric:
        h0 = orbit_basis(symmetry_generators(G))
        h1 = orbit_basis(stabilizer_generators(G))
        eq = _equality_rows(h0, 0) + _equality_rows(h1, 1) + _equality_rows(h1, 2)
        constraints += eq
        rhs += [0] * len(eq)
        meta["equality_rows"] = len(eq)
        meta["orbits"] = [h0.d, h1.d, h1.d]

    # each symmetric multiplier block stands for N translated copies
    weight = N if symmetric else 1
    objective = {(b, 0, 0): -(1 if b == 0 else weight) for b in range(len(blocks))}
    return SdpProblem(blocks, objective, constraints, rhs, meta)


def symmetric_bases(G: FiniteGroup):
    """Orbit bases matching the three symmetric-mode blocks."""
    h0 = orbit_basis(symmetry_generators(G))
    h1 = orbit_basis(stabilizer_generators(G))
    return [h0, h1, h1]


def hypercube_minimum(G: FiniteGroup) -> int:
    """min p_G over the 2^N sign vectors; p_G is even in x so x_0 = +1 suffices."""
    N = G.n
    if N > 22:
        raise SizeLimitError("hypercube enumeration is limited to |G| <= 22")
    if N <= 1:
        return 0
    M = pair_coefficients(G).matrix.astype(np.int64)
    best = 0
    chunk = 1 << min(N - 1, 16)
    bits = np.arange(N - 1, dtype=np.int64)
    for start in range(0, 1 << (N - 1), chunk):
        codes = np.arange(start, start + chunk, dtype=np.int64)
        X = np.ones((chunk, N), dtype=np.int64)
        X[:, 1:] = 1 - 2 * ((codes[:, None] >> bits) & 1)
        vals = np.einsum("ij,jk,ik->i", X, M, X) // 2
        best = min(best, int(vals.min()))
    return best
