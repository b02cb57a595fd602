"""Block-structured SDP container: maximize tr(C X) s.t. tr(A_i X) = b_i, X >= 0.

Matrices are stored sparsely as ``{(block, i, j): value}`` with ``i <= j``;
each entry stands for both (i, j) and (j, i) of a symmetric matrix, exactly as
in SDPA sparse files.  Values may be ints, Fractions or floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

Entries = dict  # {(block, i, j): value}, i <= j


class SdpShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    name: str
    dim: int
    diagonal: bool = False


def _normalise(entries: Entries, blocks: list[Block], what: str) -> Entries:
    out: Entries = {}
    for (b, i, j), v in entries.items():
        if not 0 <= b < len(blocks):
            raise SdpShapeError(f"{what}: block {b} out of range")
        if i > j:
            i, j = j, i
        dim = blocks[b].dim
        if not (0 <= i < dim and 0 <= j < dim):
            raise SdpShapeError(f"{what}: entry ({i},{j}) outside block {b} of size {dim}")
        if blocks[b].diagonal and i != j:
            raise SdpShapeError(f"{what}: off-diagonal entry in diagonal block {b}")
        key = (b, i, j)
        out[key] = out.get(key, 0) + v
    return {k: v for k, v in out.items() if v != 0}


@dataclass
class SdpProblem:
    blocks: list[Block]
    objective: Entries
    constraints: list[Entries]
    rhs: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.blocks = list(self.blocks)
        if len(self.constraints) != len(self.rhs):
            raise SdpShapeError(f"{len(self.constraints)} constraints but {len(self.rhs)} right-hand sides")
        self.objective = _normalise(self.objective, self.blocks, "objective")
        self.constraints = [_normalise(c, self.blocks, f"constraint {i}") for i, c in enumerate(self.constraints)]
        self.rhs = list(self.rhs)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def total_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def is_exact(self) -> bool:
        vals = list(self.objective.values()) + list(self.rhs)
        vals += [v for c in self.constraints for v in c.values()]
        return all(isinstance(v, (int, Fraction)) for v in vals)

    def dense(self, entries: Entries, dtype=float) -> list[np.ndarray]:
        """Per-block dense symmetric matrices for ``entries``."""
        mats = [np.zeros((b.dim, b.dim), dtype=dtype) for b in self.blocks]
        for (b, i, j), v in entries.items():
            mats[b][i, j] = v
            mats[b][j, i] = v
        return mats

    def objective_matrices(self, dtype=float) -> list[np.ndarray]:
        return self.dense(self.objective, dtype)

    def constraint_matrices(self, i: int, dtype=float) -> list[np.ndarray]:
        return self.dense(self.constraints[i], dtype)

    def inner(self, entries: Entries, X: Iterable[np.ndarray]):
        """tr(A X) for sparse ``A`` against block matrices ``X``."""
        X = list(X)
        total = 0
        for (b, i, j), v in entries.items():
            x = X[b][i, j] if i == j else X[b][i, j] + X[b][j, i]
            total = total + v * x
        return total

    def residuals(self, X) -> np.ndarray:
        return np.array([float(self.inner(c, X) - r) for c, r in zip(self.constraints, self.rhs)])

    def objective_value(self, X):
        return self.inner(self.objective, X)

    def summary(self) -> dict:
        return {
            "blocks": [[b.name, -b.dim if b.diagonal else b.dim] for b in self.blocks],
            "constraints": self.m,
            "metadata": {k: v for k, v in self.metadata.items() if isinstance(v, (str, int, float, bool))},
        }


def entry_functional(b: int, i: int, j: int, scale=1) -> Entries:
    """Sparse A with tr(A X) = scale * X[i, j] for symmetric X."""
    if i == j:
        return {(b, i, i): scale}
    return {(b, min(i, j), max(i, j)): Fraction(scale) / 2 if isinstance(scale, (int, Fraction)) else scale / 2}
