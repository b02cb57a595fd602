"""Checking Putinar certificates and turning them into rigorous bounds.

A certificate (lam, Gram blocks) for a relaxation built by
``build_putinar_degree3`` claims p_G - lam = sum of weighted squares.  On the
box every monomial has |m(x)| <= 1 and every square term v^T Q v g(x) is at
least min_eig * |v|^2 * g(x), so

    p_G >= lam - residual * (monomial count) - max(0, -min_eig) * trace_bound

holds whatever the numerical quality of the blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..bounds import fraction_str
from ..certificate import build_certificate, check_regime
from ..groups import FiniteGroup
from .problem import SdpProblem


class CertificateShapeError(ValueError):
    pass


@dataclass
class PutinarCertificate:
    lam: float | Fraction
    blocks: list[np.ndarray]
    mode: str = "full"

    @property
    def exact(self) -> bool:
        return isinstance(self.lam, (int, Fraction)) and all(B.dtype == object for B in self.blocks)


@dataclass
class ValidationReport:
    valid: bool
    trivial: bool
    residual: float
    constant_residual: float
    min_eig: float
    exact_psd: bool | None
    epsilon: float | Fraction
    lam: float | Fraction
    rigorous_bound: float | Fraction
    trivial_bound: float | Fraction
    monomials: int
    trace_bound: int

    @property
    def status(self) -> str:
        if not self.valid:
            return "INVALID"
        return "VALID (trivial bound)" if self.trivial else "VALID"

    def to_json(self) -> dict:
        def num(v):
            return fraction_str(v) if isinstance(v, (int, Fraction)) else float(v)

        return {
            "status": self.status,
            "lambda": num(self.lam),
            "residual": float(self.residual),
            "constant_residual": float(self.constant_residual),
            "min_eig": float(self.min_eig),
            "exact_psd": self.exact_psd,
            "epsilon": num(self.epsilon),
            "rigorous_bound": num(self.rigorous_bound),
            "trivial_bound": num(self.trivial_bound),
            "monomials": self.monomials,
            "trace_bound": self.trace_bound,
        }


def extract_certificate(problem: SdpProblem, solution) -> PutinarCertificate:
    """Certificate from a solver run: lam is the primal objective of the returned blocks."""
    blocks = [np.asarray(B, float) for B in solution.X]
    lam = float(problem.objective_value(blocks))
    return PutinarCertificate(lam, blocks, problem.metadata.get("mode", "full"))


def exact_psd(M) -> bool:
    """Exact PSD test for a rational symmetric matrix by symmetric Gaussian elimination."""
    A = [[Fraction(v) for v in row] for row in np.asarray(M, dtype=object).tolist()]
    n = len(A)
    for p in range(n):
        piv = A[p][p]
        if piv < 0:
            return False
        if piv == 0:
            if any(A[p][j] != 0 for j in range(p + 1, n)):
                return False
            continue
        for i in range(p + 1, n):
            f = A[i][p] / piv
            if f:
                row_p = A[p]
                row_i = A[i]
                for j in range(p + 1, n):
                    row_i[j] -= f * row_p[j]
    return True


def validate_certificate(
    problem: SdpProblem, cert: PutinarCertificate, tol_res: float = 1e-5, tol_eig: float = 1e-8
) -> ValidationReport:
    if len(cert.blocks) != len(problem.blocks):
        raise CertificateShapeError(f"certificate has {len(cert.blocks)} blocks, problem has {len(problem.blocks)}")
    for B, blk in zip(cert.blocks, problem.blocks):
        if np.shape(B) != (blk.dim, blk.dim):
            raise CertificateShapeError(f"block {blk.name} should be {blk.dim}x{blk.dim}, got {np.shape(B)}")
    n_rows = problem.metadata.get("monomial_rows", problem.m)
    monomials = problem.metadata.get("monomials", n_rows + 1)
    trace_bound = problem.metadata.get("trace_bound", sum(b.dim for b in problem.blocks))
    exact = cert.exact and problem.is_exact()

    res = [problem.inner(problem.constraints[i], cert.blocks) - problem.rhs[i] for i in range(n_rows)]
    # constant coefficient: 0 - lam = sum of block constants = -tr(C X)
    const_res = cert.lam - problem.objective_value(cert.blocks)
    abs_res = [abs(r) for r in res] + [abs(const_res)]
    residual = max(abs_res) if abs_res else 0
    # |p_G| <= sum |c| on the box
    trivial_bound = -sum(abs(r) for r in problem.rhs[:n_rows])

    eigs = [float(np.linalg.eigvalsh(np.asarray(B, float))[0]) for B in cert.blocks if np.size(B)]
    min_eig = min(eigs) if eigs else 0.0
    psd_exact = all(exact_psd(B) for B in cert.blocks) if exact else None

    if exact:
        eig_part = 0 if psd_exact else Fraction(max(0.0, -min_eig)) * trace_bound
        epsilon = Fraction(residual) * monomials + eig_part
        bound = Fraction(cert.lam) - epsilon
    else:
        neg = 0.0 if psd_exact else max(0.0, -min_eig)
        epsilon = float(residual) * monomials + neg * trace_bound
        bound = float(cert.lam) - epsilon
    trivial = bound <= trivial_bound
    rigorous = max(bound, trivial_bound)
    eig_ok = psd_exact if psd_exact is not None else min_eig >= -tol_eig
    valid = bool((float(residual) <= tol_res and eig_ok) or cert.lam <= trivial_bound)
    return ValidationReport(
        valid=valid,
        trivial=trivial,
        residual=float(residual),
        constant_residual=float(abs(const_res)),
        min_eig=min_eig,
        exact_psd=psd_exact,
        epsilon=epsilon,
        lam=cert.lam,
        rigorous_bound=rigorous,
        trivial_bound=trivial_bound,
        monomials=monomials,
        trace_bound=trace_bound,
    )


def zero_certificate(problem: SdpProblem) -> PutinarCertificate:
    n_rows = problem.metadata.get("monomial_rows", problem.m)
    lam = -sum(abs(Fraction(r)) for r in problem.rhs[:n_rows])
    blocks = [np.full((b.dim, b.dim), Fraction(0), dtype=object) for b in problem.blocks]
    return PutinarCertificate(lam, blocks, problem.metadata.get("mode", "full"))


# ---------------------------------------------------------------------------
# Exact lift of the per-order certificate
# ---------------------------------------------------------------------------


def cyclic_subgroups(G: FiniteGroup) -> list[tuple[int, ...]]:
    """Nontrivial cyclic subgroups as element tuples b^0, b^1, ... for a fixed generator."""
    seen = set()
    out = []
    for b in range(1, G.n):
        powers = [0]
        cur = b
        while cur != 0:
            powers.append(cur)
            cur = G.product(b, cur)
        key = frozenset(powers)
        if key not in seen:
            seen.add(key)
            out.append(tuple(powers))
    return out


def lift_certificate(G: FiniteGroup) -> PutinarCertificate:
    """Exact full-mode certificate assembled coset by coset.

    Needs every nonidentity order k odd, >= 5 and prime to 3.  Then p_G is
    the sum over right cosets of cyclic subgroups of the per-order pair form,
    and each coset's identity becomes rank-one Gram terms; the 1 - x^2
    pieces go to the multipliers through
    2 (1 - x^2) = (1 - x)^2 (1 + x) + (1 + x)^2 (1 - x).
    """
    orders = G.element_orders()
    for k in sorted(set(orders[1:].tolist())):
        check_regime(int(k))
    N = G.n
    z = N + 1
    zero = Fraction(0)
    Q0 = np.full((z, z), zero, dtype=object)
    Qp = [np.full((z, z), zero, dtype=object) for _ in range(N)]
    Qm = [np.full((z, z), zero, dtype=object) for _ in range(N)]
    lam = Fraction(0)
    mul = G.mul

    def add_outer(M, vec: dict, c):
        keys = list(vec)
        for a in keys:
            for b in keys:
                M[a, b] += c * vec[a] * vec[b]

    for powers in cyclic_subgroups(G):
        k = len(powers)
        cert = build_certificate(k)
        c_i2, c_i3, c_i1 = cert.coeff_I2, cert.coeff_I3, cert.coeff_I1
        seen = set()
        for a in range(N):
            coset = tuple(int(mul[p, a]) for p in powers)
            if coset[0] in seen:
                continue
            seen.update(coset)
            # Z index of coset element i
            u = [g + 1 for g in coset]
            add_outer(Q0, {ui: 1 for ui in u}, c_i2)
            for j in cert.offsets:
                half = c_i3 / 2
                for i in range(k):
                    add_outer(Q0, {u[i]: 1, u[(i + j) % k]: -1}, half)
            for i, g in enumerate(coset):
                add_outer(Qp[g], {0: 1, u[i]: -1}, c_i1 / 2)
                add_outer(Qm[g], {0: 1, u[i]: 1}, c_i1 / 2)
            lam += cert.constant_shift
    blocks = [Q0]
    for g in range(N):
        blocks += [Qp[g], Qm[g]]
    return PutinarCertificate(lam, blocks, "full")

