"""Permutation symmetry of the AP problem and commutant-based SDP reduction.

Monomial indices are Z = {const} ∪ G with index 0 for the constant and
index g + 1 for element g.  Every admitted map fixes the constant.

Orbits of the diagonal action on Z × Z give the {0,1} basis E_i of the
commutant.  With B_i = E_i / sqrt(|E_i|) and B_i B_j = sum_k lam[i,j,k] B_k,
the map X = sum x_i B_i  ->  L(X) = sum x_i L_i, (L_k)_{ij} = lam[k,j,i], is an
injective *-homomorphism, so X is PSD iff L(X) is.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _config
from .aps import ap_table
from .groups import FiniteGroup, generating_set


class SymmetryError(ValueError):
    pass


class BudgetError(SymmetryError):
    pass


class InvarianceError(SymmetryError):
    pass


@dataclass(frozen=True)
class PermAction:
    z_size: int
    generators: tuple[np.ndarray, ...]
    names: tuple[str, ...]
    rejected: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for name, p in zip(self.names, self.generators):
            if p.shape != (self.z_size,) or not np.array_equal(np.sort(p), np.arange(self.z_size)):
                raise SymmetryError(f"generator {name} is not a permutation of {self.z_size} points")

    def closure(self, limit: int = 100_000) -> np.ndarray:
        """All group elements as rows (small actions only; for tests and averaging)."""
        ident = np.arange(self.z_size)
        seen = {ident.tobytes(): ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for p in frontier:
                for g in self.generators:
                    q = g[p]
                    key = q.tobytes()
                    if key not in seen:
                        if len(seen) >= limit:
                            raise BudgetError(f"symmetry group exceeds {limit} elements")
                        seen[key] = q
                        nxt.append(q)
            frontier = nxt
        return np.array(sorted(seen.values(), key=lambda r: tuple(r)))


def _ap_keys(rows: np.ndarray, n: int) -> np.ndarray:
    srt = np.sort(rows, axis=1)
    return np.sort(srt @ (n ** np.arange(srt.shape[1] - 1, -1, -1, dtype=np.int64)))


def preserves_aps(G: FiniteGroup, perm_g: np.ndarray, k: int = 3) -> bool:
    """True when the element permutation maps the set of k-APs onto itself."""
    tab = ap_table(G, k)
    if len(tab) == 0:
        return True
    return bool(np.array_equal(_ap_keys(tab.elements, G.n), _ap_keys(perm_g[tab.elements], G.n)))


def _lift(perm_g: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], perm_g + 1)).astype(np.int64)


def _power_map(G: FiniteGroup, e: int) -> np.ndarray:
    mul = G.mul
    out = np.zeros(G.n, dtype=np.int64)  # identity
    base = np.arange(G.n, dtype=np.int64)
    while e:
        if e & 1:
            out = mul[out, base].astype(np.int64)
        base = mul[base, base].astype(np.int64)
        e >>= 1
    return out


def _candidate_maps(G: FiniteGroup, stabilizer: bool, include_inversion: bool, include_automorphisms: bool):
    mul = G.mul
    gens = [g for g in generating_set(G) if g != 0]
    ident = np.arange(G.n, dtype=np.int64)
    if stabilizer:
        inv = G.inv
        for g in gens:
            # x -> g x g^-1
            yield f"conj[{G.label(g)}]", mul[mul[g, ident], inv[g]].astype(np.int64), True
    else:
        for g in gens:
            yield f"left[{G.label(g)}]", mul[g, ident].astype(np.int64), True
        if not G.is_abelian():
            for g in gens:
                yield f"right[{G.label(g)}]", mul[ident, g].astype(np.int64), True
    if include_inversion:
        yield "inv", G.inv.astype(np.int64), True
    if include_automorphisms and G.n > 2:
        exp = int(np.lcm.reduce(G.element_orders()))
        for b in range(2, exp):
            if math.gcd(b, exp) == 1:
                yield f"pow[{b}]", _power_map(G, b), False


def _build_action(G, stabilizer, include_inversion, include_automorphisms) -> PermAction:
    gens, names, rejected = [], [], []
    for name, perm, proven in _candidate_maps(G, stabilizer, include_inversion, include_automorphisms):
        if not np.array_equal(np.sort(perm), np.arange(G.n)):
            rejected.append((name, "not a bijection of the group"))
            continue
        if not preserves_aps(G, perm):
            if proven:
                raise SymmetryError(f"{name} should preserve 3-APs but does not; the group table is inconsistent")
            rejected.append((name, "does not map 3-APs onto 3-APs"))
            continue
        lifted = _lift(perm)
        if np.array_equal(lifted, np.arange(G.n + 1)):
            continue
        gens.append(lifted)
        names.append(name)
    if not gens:
        gens, names = [np.arange(G.n + 1)], ["id"]
    return PermAction(G.n + 1, tuple(gens), tuple(names), tuple(rejected))


def symmetry_generators(G: FiniteGroup, include_inversion: bool = True, include_automorphisms: bool = True) -> PermAction:
    """AP-preserving maps of G lifted to Z: translations, inversion, admitted power maps."""
    return _build_action(G, False, include_inversion, include_automorphisms)


def stabilizer_generators(G: FiniteGroup, include_inversion: bool = True, include_automorphisms: bool = True) -> PermAction:
    """AP-preserving maps fixing the identity: conjugations, inversion, admitted power maps."""
    return _build_action(G, True, include_inversion, include_automorphisms)


def trivial_action(z_size: int) -> PermAction:
    return PermAction(z_size, (np.arange(z_size),), ("id",))


# ---------------------------------------------------------------------------
# Orbit basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitBasis:
    """Orbits of Z × Z; ``labels[u, v]`` is the orbit id of the pair (u, v)."""

    z_size: int
    labels: np.ndarray
    transpose_map: np.ndarray
    norms: np.ndarray
    _members: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def d(self) -> int:
        return self.norms.size

    def pairs(self, i: int) -> np.ndarray:
        """(|E_i|, 2) array of the ordered pairs in orbit i."""
        if i not in self._members:
            u, v = np.nonzero(self.labels == i)
            self._members[i] = np.stack([u, v], axis=1)
        return self._members[i]

    def E(self, i: int) -> np.ndarray:
        return (self.labels == i).astype(float)

    def B(self, i: int) -> np.ndarray:
        return self.E(i) / math.sqrt(self.norms[i])

    @property
    def diagonal_orbits(self) -> np.ndarray:
        return np.unique(self.labels[np.arange(self.z_size), np.arange(self.z_size)])

    def identity_coordinates(self) -> np.ndarray:
        """c with I = sum c_i B_i."""
        c = np.zeros(self.d)
        diag = self.diagonal_orbits
        c[diag] = np.sqrt(self.norms[diag])
        return c

    def coordinates(self, X: np.ndarray) -> np.ndarray:
        """x_i = tr(B_i^T X); exact inverse of the expansion on the commutant."""
        sums = np.bincount(self.labels.ravel(), weights=np.asarray(X, float).ravel(), minlength=self.d)
        return sums / np.sqrt(self.norms)

    def expand(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, float) / np.sqrt(self.norms))[self.labels]

    def project(self, M: np.ndarray) -> np.ndarray:
        """Orbit average of M: the Reynolds projection onto the commutant."""
        sums = np.bincount(self.labels.ravel(), weights=np.asarray(M, float).ravel(), minlength=self.d)
        return (sums / self.norms)[self.labels]

    def invariance_violation(self, M: np.ndarray) -> tuple[float, int]:
        """Largest deviation of M from its orbit average, and the orbit where it occurs."""
        dev = np.abs(np.asarray(M, float) - self.project(M))
        flat = int(np.argmax(dev))
        return float(dev.ravel()[flat]), int(self.labels.ravel()[flat])

    def to_json(self) -> dict:
        return {
            "z_size": self.z_size,
            "d": self.d,
            "orbits": {str(i): self.pairs(i).tolist() for i in range(self.d)},
            "transpose_map": self.transpose_map.tolist(),
            "norms": self.norms.tolist(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def orbit_basis(action: PermAction, budget: int | None = None) -> OrbitBasis:
    """Orbits of the diagonal action on Z × Z, numbered by least pair (row-major)."""
    z = action.z_size
    budget = _config.DEFAULT_ORBIT_BUDGET if budget is None else budget
    if z * z > budget:
        raise BudgetError(f"{z * z} index pairs exceed the orbit budget {budget}")
    flat = np.arange(z * z, dtype=np.int64)
    u, v = np.divmod(flat, z)
    src, dst = [], []
    for g in action.generators:
        src.append(flat)
        dst.append(g[u] * z + g[v])
    src = np.concatenate(src)
    dst = np.concatenate(dst)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(z * z, z * z))
    ncomp, comp = connected_components(graph, directed=True, connection="weak")
    least = np.full(ncomp, z * z, dtype=np.int64)
    np.minimum.at(least, comp, flat)
    rank = np.empty(ncomp, dtype=np.int64)
    rank[np.argsort(least)] = np.arange(ncomp)
    labels = rank[comp].reshape(z, z)
    norms = np.bincount(labels.ravel(), minlength=ncomp).astype(np.int64)
    tmap = np.empty(ncomp, dtype=np.int64)
    tmap[labels.ravel()] = labels.T.ravel()
    labels.setflags(write=False)
    return OrbitBasis(z, labels, tmap, norms)


# ---------------------------------------------------------------------------
# Structure constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplicationTable:
    p: np.ndarray  # int64 (d, d, d): E_i E_j = sum_k p[i, j, k] E_k
    lam: np.ndarray
    L: np.ndarray  # L[k] is the d x d matrix L_k

    @property
    def d(self) -> int:
        return self.p.shape[0]

    def image(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(x, float), self.L, axes=1)


def structure_constants(basis: OrbitBasis, k: int, rep: int = 0) -> np.ndarray:
    """p[:, :, k] counted from the ``rep``-th pair of orbit k."""
    u, v = basis.pairs(k)[rep]
    out = np.zeros((basis.d, basis.d), dtype=np.int64)
    np.add.at(out, (basis.labels[u, :], basis.labels[:, v]), 1)
    return out


def multiplication_table(basis: OrbitBasis, budget: int | None = None) -> MultiplicationTable:
    d, z = basis.d, basis.z_size
    budget = _config.DEFAULT_ORBIT_BUDGET * 50 if budget is None else budget
    if d * z > budget or d**3 > budget:
        raise BudgetError(f"multiplication table of dimension {d} over |Z| = {z} exceeds the budget {budget}")
    p = np.zeros((d, d, d), dtype=np.int64)
    for k in range(d):
        p[:, :, k] = structure_constants(basis, k)
    rn = np.sqrt(basis.norms.astype(float))
    lam = p * rn[None, None, :] / (rn[:, None, None] * rn[None, :, None])
    # (L_k)_{ij} = lam[k, j, i]
    L = np.transpose(lam, (0, 2, 1)).copy()
    for arr in (p, lam, L):
        arr.setflags(write=False)
    return MultiplicationTable(p, lam, L)


def representative_independence(basis: OrbitBasis, table: MultiplicationTable, reps: int = 5) -> bool:
    for k in range(basis.d):
        members = basis.pairs(k)
        for r in range(min(reps, len(members))):
            if not np.array_equal(structure_constants(basis, k, r), table.p[:, :, k]):
                return False
    return True


def star_isomorphism_check(basis: OrbitBasis, table: MultiplicationTable, trials: int = 20, tol: float = 1e-8, seed: int = 0):
    """Compare signs of min eigenvalues of sum x_i B_i and sum x_i L_i on random symmetric x.

    Returns (passed, list of (min_eig_B, min_eig_L)).  Coefficients are
    symmetrized over the transpose map so both sides are Hermitian; each trial
    is shifted by a multiple of the identity that lands its spectrum near 0.
    """
    rng = np.random.default_rng(seed)
    c = basis.identity_coordinates()
    out = []
    ok = True
    for _ in range(trials):
        x = rng.standard_normal(basis.d)
        x = (x + x[basis.transpose_map]) / 2
        X = basis.expand(x)
        shift = np.linalg.eigvalsh(X)[0] + rng.uniform(-1.0, 1.0)
        x = x - shift * c
        eB = float(np.linalg.eigvalsh(basis.expand(x))[0])
        Y = table.image(x)
        eL = float(np.linalg.eigvalsh((Y + Y.T) / 2)[0])
        out.append((eB, eL))
        if (eB >= -tol) != (eL >= -tol):
            ok = False
    return ok, out


# ---------------------------------------------------------------------------
# Problem transforms
# ---------------------------------------------------------------------------


def _block_dense(entries: dict, block: int, dim: int) -> np.ndarray:
    M = np.zeros((dim, dim))
    for (b, i, j), v in entries.items():
        if b == block:
            M[i, j] = float(v)
            M[j, i] = float(v)
    return M


def _sparse(block: int, M: np.ndarray, tol: float = 0.0) -> dict:
    iu, ju = np.nonzero(np.triu(np.abs(M) > tol))
    return {(block, int(i), int(j)): float(M[i, j]) for i, j in zip(iu, ju)}


def symmetrize_problem(problem, bases: list, tol: float = 1e-12):
    """Replace every matrix by its orbit average on blocks with a basis.

    Restricted to invariant X this changes no trace, so the optimum over
    invariant solutions is unchanged.  Rows that vanish are dropped; a
    vanishing row with nonzero right-hand side means the invariant problem is
    infeasible.
    """
    from .sdp.problem import SdpProblem

    def proj(entries):
        out = {k: v for k, v in entries.items() if bases[k[0]] is None}
        for b, basis in enumerate(bases):
            if basis is None or not any(k[0] == b for k in entries):
                continue
            out.update(_sparse(b, basis.project(_block_dense(entries, b, basis.z_size)), tol))
        return out

    _check_bases(problem, bases)
    cons, rhs, kept = [], [], []
    for idx, (c, r) in enumerate(zip(problem.constraints, problem.rhs)):
        pc = proj(c)
        if not pc:
            if abs(float(r)) > tol:
                raise InvarianceError(f"constraint {idx} vanishes under averaging but has rhs {r}")
            continue
        cons.append(pc)
        rhs.append(float(r))
        kept.append(idx)
    meta = dict(problem.metadata)
    meta["symmetrized"] = True
    meta["kept_rows"] = kept
    return SdpProblem(problem.blocks, proj(problem.objective), cons, rhs, meta)


def _check_bases(problem, bases):
    if len(bases) != len(problem.blocks):
        raise SymmetryError(f"{len(bases)} bases for {len(problem.blocks)} blocks")
    for b, basis in enumerate(bases):
        if basis is not None and basis.z_size != problem.blocks[b].dim:
            raise SymmetryError(f"block {b} has dimension {problem.blocks[b].dim}, basis acts on {basis.z_size} points")


def reduce_sdp(problem, bases: list, tables: list, tol: float = 1e-9):
    """Rewrite an invariant SDP over Y_b = L(X_b) (one d_b x d_b block per basis).

    The reduced variable is tied to the algebra by Y = sum_j x_j(Y) L_j with
    x(Y) = Y c, c the identity coordinates; Y PSD iff X = sum x_j B_j PSD.
    Blocks whose basis is None pass through unchanged.
    """
    from .sdp.problem import Block, SdpProblem

    _check_bases(problem, bases)
    mats = [("objective", problem.objective)] + [(f"constraint {i}", c) for i, c in enumerate(problem.constraints)]
    for what, entries in mats:
        for b, basis in enumerate(bases):
            if basis is None:
                continue
            M = _block_dense(entries, b, basis.z_size)
            worst, orbit = basis.invariance_violation(M)
            if worst > tol:
                raise InvarianceError(f"{what} is not constant on orbit {orbit} of block {b} (deviation {worst:.3g})")

    blocks, funcs = [], []
    for b, (blk, basis, table) in enumerate(zip(problem.blocks, bases, tables)):
        if basis is None:
            blocks.append(blk)
            funcs.append(None)
            continue
        c = basis.identity_coordinates()
        d = basis.d
        # F[j] represents the functional Y -> (Y c)_j on symmetric Y
        F = np.zeros((d, d, d))
        for j in range(d):
            F[j, j, :] += c / 2
            F[j, :, j] += c / 2
        blocks.append(Block(f"{blk.name}/reduced", d))
        funcs.append((basis, table, F))

    def reduce_entries(entries):
        out = {}
        for b, f in enumerate(funcs):
            if f is None:
                out.update({k: v for k, v in entries.items() if k[0] == b})
                continue
            basis, _, F = f
            M = _block_dense(entries, b, basis.z_size)
            if not M.any():
                continue
            # tr(M X) = sum_j m_j x_j with m_j = tr(M B_j)
            m = basis.coordinates(M)
            out.update(_sparse(b, np.tensordot(m, F, axes=1), 1e-15))
        return out

    cons = [reduce_entries(c) for c in problem.constraints]
    rhs = [float(r) for r in problem.rhs]
    for b, f in enumerate(funcs):
        if f is None:
            continue
        basis, table, F = f
        d = basis.d
        for a in range(d):
            for e in range(d):
                K = -np.tensordot(table.L[:, a, e], F, axes=1)
                K[a, e] += 0.5
                K[e, a] += 0.5
                cons.append(_sparse(b, K, 1e-15))
                rhs.append(0.0)
    keep = [i for i, c in enumerate(cons) if c or abs(rhs[i]) > 0]
    meta = dict(problem.metadata)
    meta["reduced"] = True
    meta["reduced_from"] = [blk.dim for blk in problem.blocks]
    meta["original_rows"] = problem.m
    return SdpProblem(blocks, reduce_entries(problem.objective), [cons[i] for i in keep], [rhs[i] for i in keep], meta)


def expand_reduced(blocks: list[np.ndarray], bases: list) -> list[np.ndarray]:
    """Map reduced blocks Y_b back to X_b = sum_j (Y_b c)_j B_j."""
    out = []
    for Y, basis in zip(blocks, bases):
        if basis is None:
            out.append(Y)
        else:
            out.append(basis.expand(Y @ basis.identity_coordinates()))
    return out


def group_average(X: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """(1/|H|) sum_h P_h X P_h^T over explicit permutation rows ``perms``."""
    acc = np.zeros_like(np.asarray(X, float))
    for p in perms:
        Y = np.empty_like(acc)
        Y[np.ix_(p, p)] = X
        acc += Y
    return acc / len(perms)
