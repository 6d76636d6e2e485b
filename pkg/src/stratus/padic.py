"""Rational p-adic integers with exact digit streams.

A :class:`PAdicRat` is a rational number ``num/den`` with ``p`` not dividing
``den``, i.e. an element of Z_(p) inside Z_p.  Its base-p digit stream is
eventually periodic, so questions of the form "for all large k" about the
digits reduce to a finite check over :class:`DigitProfile`.

Valuations that may be infinite use :data:`INF` (``math.inf``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import isprime

INF = math.inf


def check_prime(p) -> int:
    """Return ``p`` as an int, raising ValueError unless it is a prime."""
    if isinstance(p, bool) or not isinstance(p, int):
        raise TypeError(f"prime must be an int, got {type(p).__name__}")
    if p < 2 or not isprime(p):
        raise ValueError(f"{p} is not a prime")
    return p


def int_valuation(n: int, p: int) -> float | int:
    """v_p of an integer; INF for zero."""
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def base_digits(n: int, p: int) -> list[int]:
    """Base-p digits of a nonnegative integer, least significant first."""
    out = []
    while n:
        n, r = divmod(n, p)
        out.append(r)
    return out


@lru_cache(maxsize=None)
def _small_binom_table(p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(math.comb(a, b) % p for b in range(p)) for a in range(p))


def lucas(m: int, n: int, p: int) -> int:
    """C(m, n) mod p for integers m and n >= 0, by Lucas' theorem.

    Negative ``m`` is read through its p-adic digits, which agrees with the
    polynomial binomial C(m, n) = m(m-1)...(m-n+1)/n!.
    """
    if n < 0:
        return 0
    table = _small_binom_table(p)
    # only the digits of m in positions where n has digits matter
    width = 1
    while width <= n:
        width *= p
    m %= width
    result = 1
    while n:
        n, nd = divmod(n, p)
        m, md = divmod(m, p)
        if nd > md:
            return 0
        result = result * table[md][nd] % p
    return result


_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"num"`` or ``"num/den"`` into a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    m = _RAT_RE.match(str(text))
    if not m:
        raise ValueError(f"malformed rational: {text!r}")
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(m.group(1)), den)


@dataclass(frozen=True)
class DigitProfile:
    """Eventually periodic digit sequence ``preperiod`` followed by ``period`` repeated."""

    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(self.preperiod))
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period:
            raise ValueError("period must be nonempty")

    def digit(self, k: int) -> int:
        if k < len(self.preperiod):
            return self.preperiod[k]
        return self.period[(k - len(self.preperiod)) % len(self.period)]

    def digits(self, count: int) -> list[int]:
        return [self.digit(k) for k in range(count)]

    def canonical(self) -> DigitProfile:
        """Shortest presentation: primitive period, minimal preperiod."""
        per = self.period
        n = len(per)
        for d in range(1, n + 1):
            if n % d == 0 and per == per[:d] * (n // d):
                per = per[:d]
                break
        pre = list(self.preperiod)
        while pre and pre[-1] == per[-1]:
            per = (pre.pop(),) + per[:-1]
        return DigitProfile(tuple(pre), per)

    def value(self, p: int) -> Fraction:
        """The rational p-adic integer with this digit stream."""
        check_prime(p)
        if any(not 0 <= d < p for d in self.preperiod + self.period):
            raise ValueError(f"digits must lie in [0, {p})")
        head = sum(d * p**i for i, d in enumerate(self.preperiod))
        block = sum(d * p**i for i, d in enumerate(self.period))
        # repeated block: block * (1 + p^P + p^2P + ...) = block / (1 - p^P)
        tail = Fraction(block, 1 - p ** len(self.period))
        return head + p ** len(self.preperiod) * tail

    def __str__(self):
        wide = any(d > 9 for d in self.preperiod + self.period)
        sep = "," if wide else ""
        pre = sep.join(map(str, self.preperiod))
        per = sep.join(map(str, self.period))
        return f"[{pre}]({per})"

    @classmethod
    def parse(cls, text: str) -> DigitProfile:
        m = re.fullmatch(r"\s*\[([\d,\s]*)\]\(([\d,\s]+)\)\s*", text)
        if not m:
            raise ValueError(f"malformed digit profile: {text!r}")

        def split(s):
            s = s.strip()
            if not s:
                return ()
            if "," in s:
                return tuple(int(x) for x in s.split(","))
            return tuple(int(c) for c in s if not c.isspace())

        return cls(split(m.group(1)), split(m.group(2)))


class PAdicRat:
    """An element of Z_(p): a rational number whose denominator is prime to p."""

    __slots__ = ("p", "value", "precision_hint")

    def __init__(self, value, p: int, precision_hint: int = 20):
        self.p = check_prime(p)
        value = parse_rational(value)
        if value.denominator % p == 0:
            raise ValueError(f"{value} is not p-adically integral for p={p}")
        if precision_hint < 1:
            raise ValueError("precision_hint must be positive")
        self.value = value
        self.precision_hint = precision_hint

    @classmethod
    def from_profile(cls, profile: DigitProfile, p: int) -> PAdicRat:
        return cls(profile.value(p), p)

    @classmethod
    def parse(cls, text: str) -> PAdicRat:
        m = re.fullmatch(r"\s*([^@]+)@\s*(\d+)\s*(?::\s*(\d+))?\s*", text)
        if not m:
            raise ValueError(f"malformed p-adic rational: {text!r}")
        hint = int(m.group(3)) if m.group(3) else 20
        return cls(parse_rational(m.group(1)), int(m.group(2)), hint)

    @property
    def num(self) -> int:
        return self.value.numerator

    @property
    def den(self) -> int:
        return self.value.denominator

    def __str__(self):
        return f"{self.value}@{self.p}"

    def __repr__(self):
        return f"PAdicRat({str(self.value)!r}, p={self.p})"

    def __eq__(self, other):
        if isinstance(other, PAdicRat):
            return self.p == other.p and self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.value))

    def _coerce(self, other) -> Fraction:
        if isinstance(other, PAdicRat):
            if other.p != self.p:
                raise ValueError("mismatched primes")
            return other.value
        return parse_rational(other)

    def __add__(self, other):
        return PAdicRat(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return PAdicRat(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return PAdicRat(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return PAdicRat(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return PAdicRat(-self.value, self.p)

    def is_integer(self) -> bool:
        return self.value.denominator == 1

    def valuation(self):
        return int_valuation(self.num, self.p)

    def truncation(self, k: int) -> int:
        """sum_{i<k} a_i p^i, the residue of the value mod p^k in [0, p^k)."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        if k == 0:
            return 0
        mod = self.p**k
        return self.num * pow(self.den, -1, mod) % mod

    def digit(self, k: int) -> int:
        return self.truncation(k + 1) // self.p**k

    def digits(self, count: int) -> list[int]:
        t = self.truncation(count)
        out = []
        for _ in range(count):
            t, r = divmod(t, self.p)
            out.append(r)
        return out

    def profile(self) -> DigitProfile:
        return digit_profile(self)


def _as_padic(x, p=None) -> PAdicRat:
    if isinstance(x, PAdicRat):
        return x
    if p is None:
        raise TypeError("a prime is required to interpret a plain rational")
    return PAdicRat(x, p)


def digit(x: PAdicRat, k: int) -> int:
    return x.digit(k)


def truncation(x: PAdicRat, k: int) -> int:
    return x.truncation(k)


def digit_profile(x: PAdicRat) -> DigitProfile:
    """Exact preperiod and primitive period of the digit stream.

    Iterates x -> (x - a)/p on exact rationals; the states have a fixed
    denominator and bounded numerators, so a state repeats.
    """
    p = x.p
    den = x.den
    inv = pow(den, -1, p)
    seen: dict[int, int] = {}
    digits: list[int] = []
    num = x.num
    while num not in seen:
        seen[num] = len(digits)
        a = num * inv % p
        digits.append(a)
        num = (num - a * den) // p
    start = seen[num]
    return DigitProfile(tuple(digits[:start]), tuple(digits[start:]))


def binom_mod_p(x: PAdicRat, n: int) -> int:
    """C(x, n) mod p via Lucas on the digits of x."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = x.p
    width = 1
    k = 0
    while width <= n:
        width *= p
        k += 1
    return lucas(x.truncation(k), n, p)


def pochhammer_val(x: PAdicRat, n: int):
    """v_p of the rising factorial x(x+1)...(x+n-1), via digit truncations.

    For a unit x the count of terms divisible by p^k is
    floor((n - 1 + x_k) / p^k) with x_k the k-digit truncation; otherwise
    v_p((x)_n) = v_p(x) + v_p((1 + x)_{n-1}).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0
    v = x.value
    if v.denominator == 1 and v <= 0 and -v < n:
        return INF
    p = x.p
    if x.digit(0) == 0:
        return x.valuation() + pochhammer_val(x + 1, n - 1)
    total = 0
    k = 1
    pk = p
    while True:
        term = (n - 1 + x.truncation(k)) // pk
        if term == 0:
            return total
        total += term
        k += 1
        pk *= p


def pochhammer_val_oracle(x: PAdicRat, n: int):
    """sum_{i<n} v_p(x + i), by direct exact valuation of each factor."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    p = x.p
    num, den = x.num, x.den
    total = 0
    for i in range(n):
        v = int_valuation(num + i * den, p)
        if v == INF:
            return INF
        total += v
    return total


def factorial_val(n: int, p: int) -> int:
    """v_p(n!) by Legendre's formula."""
    total = 0
    pk = p
    while pk <= n:
        total += n // pk
        pk *= p
    return total
