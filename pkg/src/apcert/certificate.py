"""Exact sum-of-squares certificate for the per-order bound.

Quadratic forms here are circulant in variables X_0..X_{k-1} indexed by Z_k:

    value = a + b_0 * sum_i X_i^2 + sum over unordered pairs {i, j} of b_{j-i} X_i X_j

with b_t = b_{k-t}.  Each unordered pair is counted once.  Under this
convention I1, I2, I3^j and the certificate identity all hold as written.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bounds import fraction_str
from .groups import euler_phi


class RegimeError(ValueError):
    """k is even or divisible by 3, where no certificate of this shape exists."""


@dataclass(frozen=True)
class QuadForm:
    k: int
    constant: Fraction = Fraction(0)
    diag: Fraction = Fraction(0)
    offdiag: dict = field(default_factory=dict)

    def __post_init__(self):
        k = self.k
        if k < 1:
            raise ValueError("QuadForm needs k >= 1")
        off: dict[int, Fraction] = {}
        for t, v in self.offdiag.items():
            t = int(t) % k
            if t == 0:
                raise ValueError("offset 0 is the diagonal; use diag")
            v = Fraction(v)
            for s in (t, (k - t) % k):
                if s in off and off[s] != v:
                    raise ValueError(f"b_{t} and b_{k - t} must agree")
                off[s] = v
        object.__setattr__(self, "offdiag", {t: v for t, v in sorted(off.items()) if v != 0})
        object.__setattr__(self, "constant", Fraction(self.constant))
        object.__setattr__(self, "diag", Fraction(self.diag))

    def b(self, t: int) -> Fraction:
        t %= self.k
        return self.diag if t == 0 else self.offdiag.get(t, Fraction(0))

    def pair_classes(self) -> range:
        """Offsets 1..floor(k/2); offset t and k-t name the same pair class."""
        return range(1, self.k // 2 + 1)

    def __add__(self, other: "QuadForm") -> "QuadForm":
        if other.k != self.k:
            raise ValueError("cannot add forms over different Z_k")
        keys = set(self.offdiag) | set(other.offdiag)
        return QuadForm(
            self.k,
            self.constant + other.constant,
            self.diag + other.diag,
            {t: self.b(t) + other.b(t) for t in keys},
        )

    @staticmethod
    def combine(k: int, terms) -> "QuadForm":
        """sum of c * form over ``(c, form)`` pairs, accumulated in one pass."""
        const = Fraction(0)
        diag = Fraction(0)
        off: dict[int, Fraction] = {}
        for c, form in terms:
            if form.k != k:
                raise ValueError("cannot add forms over different Z_k")
            c = Fraction(c)
            const += c * form.constant
            diag += c * form.diag
            for t in form.pair_classes():
                v = form.offdiag.get(t)
                if v is not None:
                    off[t] = off.get(t, Fraction(0)) + c * v
        return QuadForm(k, const, diag, off)

    def scale(self, c) -> "QuadForm":
        c = Fraction(c)
        return QuadForm(self.k, c * self.constant, c * self.diag, {t: c * v for t, v in self.offdiag.items()})

    def shift(self, c) -> "QuadForm":
        return QuadForm(self.k, self.constant + Fraction(c), self.diag, dict(self.offdiag))

    def __call__(self, X: Sequence) -> Fraction:
        k = self.k
        if len(X) != k:
            raise ValueError(f"expected {k} values, got {len(X)}")
        X = [x if isinstance(x, float) else Fraction(x) for x in X]
        val = self.constant + self.diag * sum(x * x for x in X)
        for t in self.pair_classes():
            bt = self.b(t)
            if bt == 0:
                continue
            # when 2t == k, i and i + t give each pair twice over a full sweep
            stop = t if 2 * t == k else k
            val += bt * sum(X[i] * X[(i + t) % k] for i in range(stop))
        return val

    def coefficient_vector(self) -> tuple:
        """(constant, b_0, b_1, ..., b_floor(k/2)) for coefficientwise comparison."""
        return (self.constant, self.diag) + tuple(self.b(t) for t in self.pair_classes())


def i1(k: int) -> QuadForm:
    """sum (1 - X_i^2)."""
    return QuadForm(k, constant=k, diag=-1)


def i2(k: int) -> QuadForm:
    """(sum X_i)^2."""
    return QuadForm(k, diag=1, offdiag={t: 2 for t in range(1, k)})


def i3(k: int, j: int) -> QuadForm:
    """(1/2) sum (X_i - X_{i+j})^2."""
    if not 1 <= j <= k - 1:
        raise ValueError(f"offset j={j} must lie in 1..{k - 1}")
    return QuadForm(k, diag=1, offdiag={j: -2 if 2 * j == k else -1})


def check_regime(k: int) -> None:
    if k < 5 or k % 2 == 0 or k % 3 == 0:
        raise RegimeError(f"k={k}: certificate needs k >= 5, k odd and 3 not dividing k")


def build_pk1b(k: int) -> QuadForm:
    """Pair-count form of one coset: 3 on offsets coprime to k, 0 elsewhere."""
    check_regime(k)
    return QuadForm(k, offdiag={t: 3 for t in range(1, k) if math.gcd(t, k) == 1})


@dataclass(frozen=True)
class ProofCertificate:
    k: int
    phi: int
    coeff_I2: Fraction
    offsets: tuple[int, ...]
    coeff_I3: Fraction
    coeff_I1: Fraction
    constant_shift: Fraction

    def reconstruct(self) -> QuadForm:
        k = self.k
        terms = [(self.coeff_I2, i2(k)), (self.coeff_I1, i1(k))]
        terms += [(self.coeff_I3, i3(k, j)) for j in self.offsets]
        return QuadForm.combine(k, terms).shift(self.constant_shift)

    @property
    def bound(self) -> Fraction:
        """Lower bound on p_k^{(1,b)} over the box."""
        return self.constant_shift

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "phi": self.phi,
            "offsets": list(self.offsets),
            "coefficients": {
                "I2": fraction_str(self.coeff_I2),
                "I3": fraction_str(self.coeff_I3),
                "I1": fraction_str(self.coeff_I1),
                "constant": fraction_str(self.constant_shift),
            },
            "bound": fraction_str(self.bound),
        }


def build_certificate(k: int) -> ProofCertificate:
    if k < 5:
        raise ValueError("certificates are defined for k >= 5")
    phi = euler_phi(k)
    three_halves = Fraction(3, 2)
    offsets = tuple(j for j in range(1, k) if math.gcd(j, k) > 1)
    return ProofCertificate(
        k=k,
        phi=phi,
        coeff_I2=three_halves,
        offsets=offsets,
        coeff_I3=three_halves,
        coeff_I1=three_halves * (k - phi),
        constant_shift=-three_halves * (k - phi) * k,
    )


@dataclass(frozen=True)
class VerificationReport:
    k: int
    holds: bool
    mismatch: tuple | None
    bound: Fraction
    bound_matches: bool

    @property
    def passed(self) -> bool:
        return self.holds and self.bound_matches

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "status": "PASS" if self.passed else "FAIL",
            "identity_holds": self.holds,
            "first_mismatch": None
            if self.mismatch is None
            else {"term": self.mismatch[0], "certificate": fraction_str(self.mismatch[1]), "target": fraction_str(self.mismatch[2])},
            "bound": fraction_str(self.bound),
        }


def verify_certificate(k: int) -> VerificationReport:
    """Compare the reconstructed certificate with p_k^{(1,b)} coefficient by coefficient."""
    target = build_pk1b(k)
    cert = build_certificate(k)
    got = cert.reconstruct()
    names = ["constant", "b0"] + [f"b{t}" for t in got.pair_classes()]
    mismatch = None
    for name, g, want in zip(names, got.coefficient_vector(), target.coefficient_vector()):
        if g != want:
            mismatch = (name, g, want)
            break
    expected = -Fraction(3, 2) * (k - euler_phi(k)) * k
    return VerificationReport(k, mismatch is None, mismatch, cert.bound, cert.bound == expected)


def certificate_bound(k: int, N: int, Nk: int) -> Fraction:
    """Lower bound on N N_k / 2 + p_k, clamped at the trivial bound 0."""
    check_regime(k)
    phi = euler_phi(k)
    val = Fraction(N * Nk, 2) * (1 - Fraction(3 * (k - phi), phi))
    return max(val, Fraction(0))
