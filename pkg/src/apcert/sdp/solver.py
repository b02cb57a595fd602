"""Dense first-order SDP solver (alternating direction augmented Lagrangian on the dual).

Solves  max tr(C X)  s.t.  tr(A_i X) = b_i,  X PSD  by running the
Wen-Goldfarb-Yin iteration on  min <-C, X>.  Blocks are vectorized with
svec (off-diagonals scaled by sqrt 2) so inner products are plain dots.
Linearly dependent rows are dropped once up front after a consistency check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .problem import SdpProblem

MAX_TOTAL_DIM = 2000
MAX_DENSE_ENTRIES = 40_000_000
SQRT2 = math.sqrt(2.0)


class SolverLimitError(ValueError):
    pass


class InfeasibleError(ValueError):
    pass


class _Layout:
    def __init__(self, dims: list[int]):
        self.dims = dims
        self.offsets = np.cumsum([0] + [d * (d + 1) // 2 for d in dims])
        self.size = int(self.offsets[-1])
        self.iu = [np.triu_indices(d) for d in dims]
        self.scale = [np.where(i == j, 1.0, SQRT2) for i, j in self.iu]

    def position(self, b: int, i: int, j: int) -> int:
        d = self.dims[b]
        # row-major upper triangle index of (i, j), i <= j
        return int(self.offsets[b] + i * d - i * (i - 1) // 2 + (j - i))

    def svec_entries(self, entries: dict) -> np.ndarray:
        out = np.zeros(self.size)
        for (b, i, j), v in entries.items():
            out[self.position(b, i, j)] += float(v) * (1.0 if i == j else SQRT2)
        return out

    def svec(self, mats: list[np.ndarray]) -> np.ndarray:
        return np.concatenate([M[iu] * s for M, iu, s in zip(mats, self.iu, self.scale)])

    def smat(self, vec: np.ndarray) -> list[np.ndarray]:
        out = []
        for b, d in enumerate(self.dims):
            seg = vec[self.offsets[b] : self.offsets[b + 1]] / self.scale[b]
            M = np.zeros((d, d))
            M[self.iu[b]] = seg
            out.append(M + np.triu(M, 1).T)
        return out


@dataclass
class SdpSolution:
    status: str
    iterations: int
    primal_objective: float
    dual_objective: float
    X: list[np.ndarray]
    y: np.ndarray
    S: list[np.ndarray]
    primal_infeasibility: float
    dual_infeasibility: float
    relative_gap: float
    elapsed: float
    dropped_rows: list[int] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "CONVERGED"

    def to_json(self, include_blocks: bool = True) -> dict:
        out = {
            "status": self.status,
            "iterations": self.iterations,
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "relative_gap": self.relative_gap,
            "elapsed_seconds": round(self.elapsed, 3),
            "dropped_rows": len(self.dropped_rows),
        }
        if include_blocks:
            out["blocks"] = [M.tolist() for M in self.X]
        return out


def _independent_rows(A: np.ndarray, b: np.ndarray, tol: float):
    """Indices of a maximal independent row subset; raises if b is inconsistent."""
    if A.shape[0] == 0:
        return np.arange(0)
    _, R, piv = sla.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    cutoff = tol * max(1.0, diag[0] if diag.size else 1.0)
    rank = int((diag > cutoff).sum())
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(A.shape[0]), keep)
    if drop.size:
        Ak = A[keep]
        W = np.linalg.lstsq(Ak.T, A[drop].T, rcond=None)[0].T
        mismatch = np.abs(W @ b[keep] - b[drop])
        if mismatch.size and mismatch.max() > 1e-7 * (1.0 + np.abs(b).max()):
            raise InfeasibleError(
                f"dependent constraint rows have inconsistent right-hand sides (mismatch {mismatch.max():.3g})"
            )
    return keep


def _psd_split(V: list[np.ndarray]):
    pos, neg = [], []
    for M in V:
        w, Q = np.linalg.eigh((M + M.T) / 2)
        pos.append((Q * np.maximum(w, 0)) @ Q.T)
        neg.append((Q * np.minimum(w, 0)) @ Q.T)
    return pos, neg


def solve_small(
    problem: SdpProblem,
    tol: float = 1e-6,
    max_iters: int = 20000,
    seed: int = 0,
    mu: float = 1.0,
    check_every: int = 10,
) -> SdpSolution:
    """ADMM solve; returns the best iterate flagged NOT CONVERGED when ``max_iters`` runs out."""
    t0 = time.perf_counter()
    dims = [b.dim for b in problem.blocks]
    if sum(dims) > MAX_TOTAL_DIM:
        raise SolverLimitError(f"total matrix dimension {sum(dims)} exceeds {MAX_TOTAL_DIM}; export and use an external solver")
    lay = _Layout(dims)
    if problem.m * lay.size > MAX_DENSE_ENTRIES:
        raise SolverLimitError(f"{problem.m} x {lay.size} constraint matrix is too large for the dense solver")
    A_full = np.array([lay.svec_entries(c) for c in problem.constraints]).reshape(problem.m, lay.size)
    b_full = np.array([float(r) for r in problem.rhs])
    keep = _independent_rows(A_full, b_full, 1e-10)
    dropped = sorted(set(range(problem.m)) - set(keep.tolist()))
    A = A_full[keep]
    b = b_full[keep]
    c = -lay.svec_entries(problem.objective)  # minimize <c, x>
    m = A.shape[0]
    chol = sla.cho_factor(A @ A.T) if m else None

    def solve_normal(rhs):
        return sla.cho_solve(chol, rhs) if m else np.zeros(0)

    rng = np.random.default_rng(seed)
    X = []
    for d in dims:
        R = rng.standard_normal((d, d)) * 1e-3
        X.append(np.eye(d) + R @ R.T)
    x = lay.svec(X)
    s = np.zeros(lay.size)
    y = np.zeros(m)
    bnorm = 1.0 + np.linalg.norm(b)
    cnorm = 1.0 + np.linalg.norm(c)

    best = None
    drift = 0.0
    status = "NOT CONVERGED"
    it = 0
    pinf = dinf = gap = math.inf
    for it in range(1, max_iters + 1):
        y = solve_normal(mu * (b - A @ x) - A @ (s - c))
        Aty = A.T @ y if m else np.zeros(lay.size)
        V = lay.smat(c - Aty - mu * x)
        pos, neg = _psd_split(V)
        s = lay.svec(pos)
        x = -lay.svec(neg) / mu
        if it % check_every and it != max_iters:
            continue
        pobj = float(c @ x)
        dobj = float(b @ y)
        pinf = float(np.linalg.norm(A @ x - b) / bnorm) if m else 0.0
        dinf = float(np.linalg.norm(Aty + s - c) / cnorm)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        score = max(pinf, dinf, gap)
        if best is None or score < best[0]:
            best = (score, it, x.copy(), y.copy(), s.copy(), pinf, dinf, gap)
        if score <= tol:
            status = "CONVERGED"
            break
        # a larger mu weights primal feasibility in the y-step; the smoothed
        # log ratio keeps mu from flipping between two values every check
        drift = 0.9 * drift + 0.1 * math.log((pinf + 1e-300) / (dinf + 1e-300))
        if drift > 1.0:
            mu = min(mu * 1.5, 1e6)
            drift = 0.0
        elif drift < -1.0:
            mu = max(mu / 1.5, 1e-6)
            drift = 0.0

    score, best_it, x, y, s, pinf, dinf, gap = best
    Xb = lay.smat(x)
    return SdpSolution(
        status=status,
        iterations=it if status == "CONVERGED" else best_it,
        primal_objective=-float(c @ x),
        dual_objective=-float(b @ y),
        X=Xb,
        y=y,
        S=lay.smat(s),
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
        relative_gap=gap,
        elapsed=time.perf_counter() - t0,
        dropped_rows=dropped,
    )
