"""Closed-form AP totals and the order-profile lower bound on R(3, G, 2).

Everything here is exact rational arithmetic.  The bound only needs the
order profile, so it also runs on groups too large to enumerate (S8).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .groups import FiniteGroup, OrderProfile, build_symmetric, euler_phi, order_profile


def _profile(G: FiniteGroup | OrderProfile) -> OrderProfile:
    return G if isinstance(G, OrderProfile) else order_profile(G)


def k_set(orders: Iterable[int]) -> list[int]:
    """Orders k >= 5 with 4 phi(k) >= 3 k."""
    return sorted({int(k) for k in orders if k >= 5 and 4 * euler_phi(int(k)) >= 3 * int(k)})


def bound_term(N: int, Nk: int, k: int) -> Fraction:
    """(N N_k / 8) (1 - 3 (k - phi(k)) / phi(k)); may be negative outside the K-set."""
    phi = euler_phi(k)
    return Fraction(N * Nk, 8) * (1 - Fraction(3 * (k - phi), phi))


def total_aps_theorem_formula(G: FiniteGroup | OrderProfile) -> Fraction:
    """Sum_{k>=4} N N_k / 2 + N N_3 / 24 (the variant behind the S5..S8 table)."""
    prof = _profile(G)
    N = prof.n
    big = sum(v for k, v in prof.counts.items() if k >= 4)
    return Fraction(N * big, 2) + Fraction(N * prof[3], 24)


def total_aps_proof_formula(G: FiniteGroup | OrderProfile) -> Fraction:
    """Sum_{k>=4} N N_k / 2 + N N_3 / 6: the number of distinct 3-AP sets."""
    prof = _profile(G)
    N = prof.n
    big = sum(v for k, v in prof.counts.items() if k >= 4)
    return Fraction(N * big, 2) + Fraction(N * prof[3], 6)


@dataclass(frozen=True)
class BoundReport:
    group: str
    n: int
    profile: OrderProfile
    k_set: list[int]
    per_k: dict[int, Fraction]
    bound: Fraction
    total_aps_theorem: Fraction
    total_aps_proof: Fraction
    notes: list[str] = field(default_factory=list)

    @property
    def ceiling(self) -> int:
        return math.ceil(self.bound)

    @property
    def formulas_agree(self) -> bool:
        return self.total_aps_theorem == self.total_aps_proof

    def to_json(self, decimal: bool = False) -> dict:
        fmt = (lambda q: float(q)) if decimal else fraction_str
        return {
            "group": self.group,
            "n": self.n,
            "profile": self.profile.to_json(),
            "k_set": self.k_set,
            "per_k": {str(k): fmt(v) for k, v in self.per_k.items()},
            "bound": fmt(self.bound),
            "bound_ceiling": self.ceiling,
            "total_aps_theorem": fmt(self.total_aps_theorem),
            "total_aps_proof": fmt(self.total_aps_proof),
            "formulas_agree": self.formulas_agree,
            "notes": list(self.notes),
        }


def fraction_str(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def theorem1_bound(G: FiniteGroup | OrderProfile, name: str | None = None) -> BoundReport:
    prof = _profile(G)
    N = prof.n
    ks = k_set(prof.orders())
    per_k = {k: bound_term(N, prof[k], k) for k in ks}
    bound = sum(per_k.values(), Fraction(0))
    theorem = total_aps_theorem_formula(prof)
    proof = total_aps_proof_formula(prof)
    notes = []
    if theorem != proof:
        notes.append(
            f"total-AP formulas disagree: N*N_3/24 variant gives {fraction_str(theorem)}, "
            f"N*N_3/6 variant gives {fraction_str(proof)}"
        )
    if theorem.denominator != 1:
        notes.append(f"N*N_3/24 variant is not an integer ({fraction_str(theorem)})")
    if name is None:
        name = getattr(G, "name", "") or f"order {N}"
    return BoundReport(name, N, prof, ks, per_k, bound, theorem, proof, notes)


def bound_from_lambda(G: FiniteGroup | None, lam, total=None):
    """(lambda + T) / 4: lower bound on R(3, G, 2) from a certified p_G >= lambda.

    ``total`` defaults to the enumerated number of distinct 3-APs of ``G``.
    The result is exact when both inputs are rational.
    """
    if total is None:
        from .aps import ap_table

        total = len(ap_table(G, 3))
    if isinstance(lam, float) or isinstance(total, float):
        return (float(lam) + float(total)) / 4.0
    return (Fraction(lam) + Fraction(total)) / 4


TABLE1_GROUPS = (5, 6, 7, 8)


def table1() -> list[BoundReport]:
    """Bound reports for S5..S8 (order profiles only, no tables built)."""
    return [theorem1_bound(build_symmetric(m), name=f"S{m}") for m in TABLE1_GROUPS]


def format_table(reports: list[BoundReport], decimal: bool = False) -> str:
    fmt = (lambda q: f"{float(q):.6g}") if decimal else fraction_str
    head = ("Group G", "Number of 3-APs", "Lower bound for R(3,G,2)")
    rows = [(r.group, fmt(r.total_aps_theorem), fmt(r.bound)) for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(head)]
    lines = [" | ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    lines += [" | ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(lines)
