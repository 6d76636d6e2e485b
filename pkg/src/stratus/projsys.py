"""Rank-one projective systems on the punctured line and diagonal groups.

A rank-one system is a chain R e_0 > R^p e_1 > R^{p^2} e_2 > ... with
e_n = (t^{p^n})^{b_n} e_{n+1} and bits b_n in {0, 1}.  Unwinding the chain
gives e_0 = t^{-a_n} e_n with a_n = sum_{k<n} b_k p^k, and e_n is horizontal
for all divided derivations of order < p^n, so the system compiles to
E(-a) with a = sum b_k p^k in Z_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ffalg import GF, INF_POINT, RatFn
from .padic import DigitProfile, PAdicRat, check_prime
from .stratmod import StratModule, e_alpha

__all__ = [
    "RankOneProjSys",
    "GroupDescription",
    "compile_system",
    "compile_oracle",
    "group_of_diagonal",
    "group_of_windows",
]


@dataclass(frozen=True)
class RankOneProjSys:
    p: int
    bits: DigitProfile

    def __post_init__(self):
        check_prime(self.p)
        bits = self.bits
        if isinstance(bits, str):
            bits = DigitProfile.parse(bits)
        if any(b not in (0, 1) for b in bits.preperiod + bits.period):
            raise ValueError("projective system bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def finite(cls, p: int, bits) -> RankOneProjSys:
        """Finitely many bits followed by zeros."""
        return cls(p, DigitProfile(tuple(bits), (0,)))

    def alpha(self) -> PAdicRat:
        """sum b_k p^k as a rational p-adic integer."""
        return PAdicRat(self.bits.value(self.p), self.p)

    def partial_sum(self, n: int) -> int:
        return sum(b * self.p**k for k, b in enumerate(self.bits.digits(n)))

    def __str__(self):
        return f"{self.bits}@{self.p}"


def compile_system(sys: RankOneProjSys, N: int) -> StratModule:
    """The stratified module E(-a) of the system, a = sum b_k p^k."""
    if N < 1:
        raise ValueError("order bound must be positive")
    return e_alpha(-sys.alpha(), N, sys.p, coordinate="t")


def compile_oracle(sys: RankOneProjSys, N: int) -> StratModule:
    """Independent compilation by finite truncation.

    Picks n with p^n > N and differentiates e_0 = t^{-a_n} e_n directly:
    A_m = D^(m)(t^{-a_n}) t^{a_n} = c_m t^{-m}, where the constants c_m come
    from the Leibniz rule applied to t^{a_n} t^{-a_n} = 1 with plain integer
    binomials.
    """
    if N < 1:
        raise ValueError("order bound must be positive")
    p = sys.p
    n = 0
    while p**n <= N:
        n += 1
    a = sys.partial_sum(n)
    c = [1]
    for m in range(1, N + 1):
        c.append(-sum(math.comb(a, i) * c[m - i] for i in range(1, m + 1)) % p)
    F = GF(p)
    mats = tuple(((RatFn.local_power(F, 0, -m) * c[m],),) for m in range(1, N + 1))
    return StratModule(p, 1, N, mats, frozenset({0, INF_POINT}), "t")


# -- diagonal groups ----------------------------------------------------------


@dataclass(frozen=True)
class GroupDescription:
    """Diag(X) for X generated by exponents in Z_p/Z.

    ``kind`` is one of "trivial", "finite-diag", "Gm-detected", "undetermined";
    a finite-diag group is the cyclic group mu_order.
    """

    kind: str
    generators: tuple = ()
    order: int | None = None
    precision_note: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def name(self) -> str:
        if self.kind == "trivial":
            return "trivial"
        if self.kind == "finite-diag":
            return f"mu_{self.order}"
        if self.kind == "Gm-detected":
            return "Gm"
        return "undetermined"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "name": self.name, "order": self.order,
               "generators": [str(g) for g in self.generators]}
        if self.precision_note:
            out["precision_note"] = self.precision_note
        return out


def group_of_diagonal(exponents, p: int | None = None) -> GroupDescription:
    """Group of a diagonal module with rational exponents.

    X is the subgroup of Q/Z generated by the exponents mod 1; it is cyclic
    of order the lcm of their denominators, all prime to p.
    """
    fracs = []
    for e in exponents:
        if isinstance(e, PAdicRat):
            if p is not None and e.p != p:
                raise ValueError("exponent prime does not match")
            p = e.p
            e = e.value
        fracs.append(Fraction(e) % 1)
    if p is not None:
        check_prime(p)
        if any(f.denominator % p == 0 for f in fracs):
            raise ValueError("exponents must be p-adic integers")
    gens = tuple(sorted({f for f in fracs if f}))
    order = math.lcm(*(f.denominator for f in gens)) if gens else 1
    if order == 1:
        return GroupDescription("trivial", (), 1)
    return GroupDescription("finite-diag", gens, order)


def _has_period(window, q: int) -> bool:
    """Some suffix of the window is q-periodic over at least two full periods."""
    L = len(window)
    for s in range(0, L - 2 * q + 1):
        if all(window[i] == window[i + q] for i in range(s, L - q)):
            return True
    return False


def group_of_windows(windows, p: int, bound: int) -> GroupDescription:
    """Diagnostic from finite digit windows of the exponents.

    Reports Gm-detected when some window fits no eventual period q <= bound;
    the exponent then cannot be a rational with such a short digit period.
    Otherwise nothing is decided.
    """
    check_prime(p)
    windows = [tuple(w) for w in windows]
    L = min((len(w) for w in windows), default=0)
    note = f"{L} digits, periods up to {bound}"
    for w in windows:
        if not any(_has_period(w, q) for q in range(1, bound + 1)):
            return GroupDescription("Gm-detected", precision_note=note,
                                    extra={"window": list(w)})
    return GroupDescription("undetermined", precision_note=note)
