"""Exact univariate algebra over F_p (and Q) with Hasse derivatives.

Three value types share one coefficient field:

* :class:`Poly` -- dense polynomial, ascending coefficient tuple, no trailing zeros.
* :class:`RatFn` -- reduced fraction with monic denominator, so equality is syntactic.
* :class:`Series` -- truncated Laurent series carrying an absolute precision.

The divided (Hasse) derivation is the standard one, ``D^(m) t^n = C(n, m) t^(n-m)``.
Over F_p the binomials are taken mod p by Lucas' theorem, which also covers
negative exponents through their p-adic digits.

The field of rational numbers (:data:`QQ`) is supported for polynomials and
rational functions because the hypergeometric divided matrices are built in
characteristic zero before being reduced.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

from .padic import INF, check_prime, int_valuation, lucas

__all__ = [
    "GF",
    "QQ",
    "Poly",
    "RatFn",
    "Series",
    "PrecisionError",
    "NonIntegralError",
    "hasse_poly",
    "hasse_ratfn",
    "hasse_series",
    "parse_poly",
    "parse_ratfn",
    "parse_series",
]

INF_POINT = "inf"


class PrecisionError(ArithmeticError):
    """Raised when a series operation would need coefficients beyond the stored precision."""


class NonIntegralError(ArithmeticError):
    """A rational coefficient has negative p-adic valuation and cannot be reduced mod p."""

    def __init__(self, message, coefficient=None, valuation=None):
        super().__init__(message)
        self.coefficient = coefficient
        self.valuation = valuation


class PrimeField:
    """The prime field F_p; elements are plain ints in [0, p)."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        self.p = check_prime(p)

    @property
    def char(self) -> int:
        return self.p

    def __call__(self, x) -> int:
        if isinstance(x, int):
            return x % self.p
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise ZeroDivisionError(f"{x} has no reduction mod {self.p}")
        return x.numerator * pow(x.denominator, -1, self.p) % self.p

    def inv(self, x: int) -> int:
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p)

    def binom(self, m: int, n: int) -> int:
        return lucas(m, n, self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"GF({self.p})"


class RationalField:
    """The field Q; elements are Fractions."""

    char = 0

    def __call__(self, x) -> Fraction:
        return Fraction(x)

    def inv(self, x) -> Fraction:
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(x)

    def binom(self, m: int, n: int) -> int:
        if n < 0:
            return 0
        if m >= 0:
            return math.comb(m, n)
        return (-1) ** n * math.comb(n - m - 1, n)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def _trim(coeffs) -> tuple:
    n = len(coeffs)
    while n and not coeffs[n - 1]:
        n -= 1
    return tuple(coeffs[:n])


class Poly:
    """Dense univariate polynomial over GF(p) or QQ."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field, coeffs=()):
        self.field = field
        self.coeffs = _trim([field(c) for c in coeffs])
        self._hash = None

    @classmethod
    def _raw(cls, field, coeffs) -> Poly:
        # coeffs already reduced and trimmed
        obj = object.__new__(cls)
        obj.field = field
        obj.coeffs = coeffs
        obj._hash = None
        return obj

    @classmethod
    def const(cls, field, c) -> Poly:
        return cls(field, (c,))

    @classmethod
    def monomial(cls, field, n: int, c=1) -> Poly:
        return cls(field, (0,) * n + (c,))

    @classmethod
    def linear(cls, field, root) -> Poly:
        """The polynomial z - root."""
        return cls(field, (-root, 1))

    # -- basic queries -----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self):
        return self.coeffs[-1] if self.coeffs else self.field(0)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field == other.field and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly(self.field, (other,)).coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.coeffs))
        return self._hash

    def __repr__(self):
        return f"Poly({self.field!r}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    def __getitem__(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.field(0)

    # -- arithmetic --------------------------------------------------------

    def _lift(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.field != self.field:
                raise ValueError(f"field mismatch: {self.field!r} vs {other.field!r}")
            return other
        return Poly(self.field, (other,))

    def __add__(self, other):
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return self._finish(out)

    __radd__ = __add__

    def __neg__(self):
        return self._finish([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def _finish(self, out) -> Poly:
        f = self.field
        if f.char:
            p = f.char
            out = [c % p for c in out]
        return Poly._raw(f, _trim(out))

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self.field(other)
            return self._finish([c * a for a in self.coeffs])
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly._raw(self.field, ())
        if len(a) < len(b):
            a, b = b, a
        out = [0] * (len(a) + len(b) - 1)
        for j, bj in enumerate(b):
            if bj:
                for i, ai in enumerate(a):
                    out[i + j] += ai * bj
        return self._finish(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly._raw(self.field, (self.field(1),))
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c) -> Poly:
        return self * c

    def shift(self, k: int) -> Poly:
        """Multiply by z^k (k >= 0)."""
        if not self.coeffs:
            return self
        return Poly._raw(self.field, (self.field(0),) * k + self.coeffs)

    def monic(self) -> Poly:
        if not self.coeffs:
            return self
        return self * self.field.inv(self.coeffs[-1])

    def __divmod__(self, other):
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.field
        rem = list(self.coeffs)
        db = other.degree
        inv_lc = f.inv(other.coeffs[-1])
        if len(rem) <= db:
            return Poly._raw(f, ()), self
        quo = [0] * (len(rem) - db)
        b = other.coeffs
        p = f.char
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i]
            if p:
                c %= p
            if not c:
                continue
            q = c * inv_lc
            if p:
                q %= p
            quo[i - db] = q
            for j in range(db + 1):
                rem[i - db + j] -= q * b[j]
        return self._finish(quo), self._finish(rem[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> Poly:
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError("division is not exact")
        return q

    def __call__(self, x):
        """Evaluate at a field element (Horner)."""
        acc = self.field(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return self.field(acc)

    def compose(self, g) -> Poly:
        """self(g) for a polynomial g."""
        acc = Poly._raw(self.field, ())
        for c in reversed(self.coeffs):
            acc = acc * g + c
        return acc

    def taylor_shift(self, c) -> Poly:
        """self(z + c)."""
        return self.compose(Poly(self.field, (c, 1)))

    def valuation_at_zero(self):
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return INF

    def hasse(self, n: int) -> Poly:
        """Divided derivative D^(n): sum c_k C(k, n) z^(k-n)."""
        if n == 0:
            return self
        if n < 0:
            raise ValueError("order must be nonnegative")
        binom = self.field.binom
        return self._finish([c * binom(k, n) for k, c in enumerate(self.coeffs[n:], start=n)])

    def derivative(self) -> Poly:
        return self.hasse(1)

    def content_valuation(self, p: int):
        """min_k v_p(c_k) for a polynomial over QQ."""
        vals = [int_valuation(c.numerator, p) - int_valuation(c.denominator, p) for c in self.coeffs if c]
        return min(vals) if vals else INF

    def reduce_mod(self, p: int) -> Poly:
        """Coefficientwise reduction of a QQ polynomial with p-integral coefficients."""
        F = GF(p)
        out = []
        for c in self.coeffs:
            c = Fraction(c)
            if c.denominator % p == 0:
                raise NonIntegralError(f"coefficient {c} is not {p}-integral", c,
                                       -int_valuation(c.denominator, p))
            out.append(F(c))
        return Poly(F, out)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_xgcd(a: Poly, b: Poly):
    """(g, s, t) with s*a + t*b = g monic."""
    f = a.field
    zero, one = Poly._raw(f, ()), Poly._raw(f, (f(1),))
    r0, r1, s0, s1, t0, t1 = a, b, one, zero, zero, one
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    c = f.inv(r0.lc())
    return r0 * c, s0 * c, t0 * c


def _field_of(x):
    return x.field


class RatFn:
    """Reduced rational function num/den with monic den."""

    __slots__ = ("field", "num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None):
        field = num.field
        if den is None:
            den = Poly._raw(field, (field(1),))
        if den.field != field:
            raise ValueError("field mismatch")
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            num, den = num, Poly._raw(field, (field(1),))
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
            c = field.inv(den.lc())
            if c != 1:
                num, den = num * c, den * c
        self.field = field
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _raw(cls, num, den) -> RatFn:
        obj = object.__new__(cls)
        obj.field = num.field
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def const(cls, field, c) -> RatFn:
        return cls(Poly(field, (c,)))

    @classmethod
    def zero(cls, field) -> RatFn:
        return cls._raw(Poly._raw(field, ()), Poly._raw(field, (field(1),)))

    @classmethod
    def one(cls, field) -> RatFn:
        return cls._raw(Poly._raw(field, (field(1),)), Poly._raw(field, (field(1),)))

    @classmethod
    def variable(cls, field) -> RatFn:
        return cls._raw(Poly(field, (0, 1)), Poly._raw(field, (field(1),)))

    @classmethod
    def local_power(cls, field, point, k: int) -> RatFn:
        """(z - point)^k, or z^-k when point is infinity (local parameter 1/z)."""
        if point == INF_POINT:
            k = -k
            base = Poly(field, (0, 1))
        else:
            base = Poly(field, (-point, 1))
        if k >= 0:
            return cls._raw(base**k, Poly._raw(field, (field(1),)))
        return cls._raw(Poly._raw(field, (field(1),)), base ** (-k))

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def __eq__(self, other):
        if isinstance(other, RatFn):
            return self.field == other.field and self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self == RatFn.const(self.field, other)
        if isinstance(other, Poly):
            return self == RatFn(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self):
        return f"RatFn({self.field!r}, {format_ratfn(self)!r})"

    def __str__(self):
        return format_ratfn(self)

    # -- arithmetic --------------------------------------------------------

    def _lift(self, other) -> RatFn:
        if isinstance(other, RatFn):
            if other.field != self.field:
                raise ValueError(f"field mismatch: {self.field!r} vs {other.field!r}")
            return other
        if isinstance(other, Poly):
            return RatFn(other)
        return RatFn.const(self.field, other)

    def __add__(self, other):
        other = self._lift(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return RatFn(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        if g.degree == 0:
            return RatFn._normalized(self.num * other.den + other.num * self.den, self.den * other.den)
        d1 = self.den // g
        d2 = other.den // g
        return RatFn(self.num * d2 + other.num * d1, d1 * other.den)

    __radd__ = __add__

    @classmethod
    def _normalized(cls, num, den):
        # den monic, gcd(num, den) = 1 already known
        if num.is_zero():
            return cls.zero(num.field)
        return cls._raw(num, den)

    def __neg__(self):
        return RatFn._raw(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = self.field(other)
            if not c:
                return RatFn.zero(self.field)
            return RatFn._raw(self.num * c, self.den)
        other = self._lift(other)
        if self.num.is_zero() or other.num.is_zero():
            return RatFn.zero(self.field)
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1, d2 = (self.num // g1, other.den // g1) if g1.degree > 0 else (self.num, other.den)
        n2, d1 = (other.num // g2, self.den // g2) if g2.degree > 0 else (other.num, self.den)
        den = d1 * d2
        num = n1 * n2
        c = self.field.inv(den.lc())
        if c != 1:
            num, den = num * c, den * c
        return RatFn._raw(num, den)

    __rmul__ = __mul__

    def inverse(self) -> RatFn:
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFn(self.den, self.num)

    def __truediv__(self, other):
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return RatFn._raw(self.num**e, self.den**e) if e else RatFn.one(self.field)

    # -- analytic structure -----------------------------------------------

    def order_at(self, point):
        """Order of vanishing at a point of F_p or at infinity (negative for poles)."""
        if self.num.is_zero():
            return INF
        if point == INF_POINT:
            return self.den.degree - self.num.degree
        return _order_at(self.num, point) - _order_at(self.den, point)

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return self.field(self.num(x) * self.field.inv(d))

    def value_at(self, point):
        """Value at a point of P^1 where this function has no pole."""
        if point == INF_POINT:
            if self.num.degree > self.den.degree:
                raise ZeroDivisionError("pole at infinity")
            if self.num.is_zero() or self.num.degree < self.den.degree:
                return self.field(0)
            return self.field(self.num.lc() * self.field.inv(self.den.lc()))
        return self(point)

    def compose(self, g: RatFn) -> RatFn:
        """self(g): substitute the coordinate by the rational function g."""
        g = self._lift(g)
        n = max(self.num.degree, self.den.degree)
        if n < 0:
            return self
        # homogenize: num(g) = sum a_k gn^k gd^(n-k) / gd^n
        gn, gd = g.num, g.den

        def hom(poly):
            acc = Poly._raw(self.field, ())
            powers_d = [Poly._raw(self.field, (self.field(1),))]
            for _ in range(n):
                powers_d.append(powers_d[-1] * gd)
            pn = Poly._raw(self.field, (self.field(1),))
            for k in range(n + 1):
                c = poly[k]
                if c:
                    acc = acc + pn * powers_d[n - k] * c
                pn = pn * gn
            return acc

        return RatFn(hom(self.num), hom(self.den))

    def to_local(self, point) -> RatFn:
        """Rewrite in the local parameter t at ``point`` (z = t + c, or z = 1/t)."""
        f = self.field
        if point == INF_POINT:
            return self.compose(RatFn(Poly._raw(f, (f(1),)), Poly(f, (0, 1))))
        if point == 0:
            return self
        return RatFn(self.num.taylor_shift(point), self.den.taylor_shift(point))

    def hasse(self, n: int) -> RatFn:
        return self.hasse_all(n)[n]

    def hasse_all(self, n_max: int) -> list[RatFn]:
        """[D^(0) h, ..., D^(n_max) h].

        Writing D^(n) h = P_n / den^(n+1), the Leibniz rule applied to
        num = h * den gives P_n = den^n D^(n) num - sum_{a<n} P_a den^(n-1-a) D^(n-a) den.
        """
        return _hasse_all_cached(self, n_max)

    def reduce_mod(self, p: int) -> RatFn:
        """Reduce a QQ rational function mod p after Gauss-normalizing the denominator."""
        if self.field != QQ:
            raise TypeError("reduce_mod applies to rational functions over QQ")
        m = self.den.content_valuation(p)
        scale = Fraction(p) ** (-m)
        num = self.num * scale
        den = self.den * scale
        v = num.content_valuation(p)
        if v < 0:
            bad = next(c for c in num.coeffs if c and (Fraction(c).denominator % p == 0))
            raise NonIntegralError(f"{self} has a coefficient of {p}-adic valuation {v}", bad, v)
        return RatFn(num.reduce_mod(p), den.reduce_mod(p))


def _order_at(poly: Poly, point) -> int:
    if poly.is_zero():
        return INF
    lin = Poly.linear(poly.field, point)
    k = 0
    while True:
        q, r = divmod(poly, lin)
        if not r.is_zero():
            return k
        poly = q
        k += 1


@lru_cache(maxsize=4096)
def _hasse_all_cached(h: RatFn, n_max: int) -> list[RatFn]:
    num, den = h.num, h.den
    if den.degree == 0:
        return [RatFn(num.hasse(n)) for n in range(n_max + 1)]
    dden = [den.hasse(k) for k in range(n_max + 1)]
    den_pows = [Poly._raw(h.field, (h.field(1),))]
    for _ in range(n_max + 1):
        den_pows.append(den_pows[-1] * den)
    P = [num]
    out = [h]
    for n in range(1, n_max + 1):
        acc = den_pows[n] * num.hasse(n)
        for a in range(n):
            if dden[n - a]:
                acc = acc - P[a] * den_pows[n - 1 - a] * dden[n - a]
        P.append(acc)
        out.append(RatFn(acc, den_pows[n + 1]))
    return out


class Series:
    """Truncated Laurent series sum_{k >= val} c_k t^k + O(t^absprec)."""

    __slots__ = ("field", "start", "coeffs", "absprec")

    def __init__(self, field, start: int, coeffs, absprec: int | None = None):
        self.field = field
        coeffs = [field(c) for c in coeffs]
        if absprec is None:
            absprec = start + len(coeffs)
        coeffs = coeffs[: max(0, absprec - start)]
        # strip leading zeros so that start is the valuation when nonzero
        i = 0
        while i < len(coeffs) and not coeffs[i]:
            i += 1
        if i == len(coeffs):
            self.start = absprec
            self.coeffs = ()
        else:
            self.start = start + i
            self.coeffs = tuple(coeffs[i:])
        self.absprec = absprec
        # pad to absprec
        missing = absprec - self.start - len(self.coeffs)
        if missing > 0:
            self.coeffs = self.coeffs + (field(0),) * missing

    @property
    def valuation(self):
        return self.start if self.coeffs else INF

    @property
    def precision(self) -> int:
        """Number of known coefficients from the valuation on."""
        return self.absprec - self.start

    def is_zero(self) -> bool:
        """Zero to the stored precision."""
        return not self.coeffs

    def __getitem__(self, k: int):
        if k >= self.absprec:
            raise PrecisionError(f"coefficient of t^{k} is beyond O(t^{self.absprec})")
        if k < self.start:
            return self.field(0)
        return self.coeffs[k - self.start]

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (self.field == other.field and self.absprec == other.absprec
                and self.start == other.start and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.field, self.start, self.coeffs, self.absprec))

    def agrees_with(self, other: Series) -> bool:
        """Equal on the common window of known coefficients."""
        top = min(self.absprec, other.absprec)
        lo = min(self.start, other.start)
        return all(self[k] == other[k] for k in range(lo, top))

    def __repr__(self):
        return f"Series({self.field!r}, {format_series(self)!r})"

    def __str__(self):
        return format_series(self)

    @classmethod
    def from_poly(cls, poly: Poly, absprec: int) -> Series:
        return cls(poly.field, 0, poly.coeffs[:absprec], absprec)

    @classmethod
    def from_ratfn(cls, f: RatFn, absprec: int) -> Series:
        """Laurent expansion at t = 0 up to O(t^absprec)."""
        field = f.field
        if f.num.is_zero():
            return cls(field, absprec, (), absprec)
        vd = f.den.valuation_at_zero()
        vn = f.num.valuation_at_zero()
        num = f.num.coeffs[vn:]
        den = f.den.coeffs[vd:]
        start = vn - vd
        n = absprec - start
        if n <= 0:
            return cls(field, absprec, (), absprec)
        inv0 = field.inv(den[0])
        out = []
        for k in range(n):
            acc = num[k] if k < len(num) else 0
            for j in range(1, min(k, len(den) - 1) + 1):
                acc -= den[j] * out[k - j]
            out.append(field(acc * inv0))
        return cls(field, start, out, absprec)

    def _check(self, other):
        if not isinstance(other, Series):
            raise TypeError("expected a Series")
        if other.field != self.field:
            raise ValueError("field mismatch")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Series(self.field, 0, (other,), self.absprec)
        self._check(other)
        top = min(self.absprec, other.absprec)
        lo = min(self.start, other.start)
        return Series(self.field, lo, [self[k] + other[k] for k in range(lo, top)] if lo < top else [], top)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.field, self.start, [-c for c in self.coeffs], self.absprec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        field = self.field
        if isinstance(other, (int, Fraction)):
            c = field(other)
            return Series(field, self.start, [c * a for a in self.coeffs], self.absprec)
        self._check(other)
        va, vb = self.start, other.start
        top = min(va + other.absprec, vb + self.absprec)
        n = top - va - vb
        if n <= 0:
            return Series(field, top, (), top)
        a, b = self.coeffs, other.coeffs
        out = [0] * n
        for i in range(min(n, len(a))):
            ai = a[i]
            if ai:
                for j in range(min(n - i, len(b))):
                    out[i + j] += ai * b[j]
        return Series(field, va + vb, out, top)

    __rmul__ = __mul__

    def inverse(self) -> Series:
        if not self.coeffs:
            raise PrecisionError("cannot invert a series that is zero to its precision")
        field = self.field
        n = len(self.coeffs)
        a = self.coeffs
        inv0 = field.inv(a[0])
        out = []
        for k in range(n):
            acc = field(1) if k == 0 else 0
            for j in range(1, k + 1):
                acc -= a[j] * out[k - j]
            out.append(field(acc * inv0))
        return Series(field, -self.start, out, -self.start + n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * self.field.inv(self.field(other))
        return self * other.inverse()

    def shift(self, k: int) -> Series:
        """Multiply by t^k."""
        return Series(self.field, self.start + k, self.coeffs, self.absprec + k)

    def truncate(self, absprec: int) -> Series:
        if absprec > self.absprec:
            raise PrecisionError("cannot raise precision by truncation")
        return Series(self.field, self.start, self.coeffs, absprec)

    def hasse(self, n: int) -> Series:
        """Termwise D^(n); the exponent window shifts down by n."""
        if n == 0:
            return self
        binom = self.field.binom
        out = [c * binom(k, n) for k, c in enumerate(self.coeffs, start=self.start)]
        return Series(self.field, self.start - n, out, self.absprec - n)

    def derivative(self) -> Series:
        return self.hasse(1)


# -- operation-level entry points --------------------------------------------


def hasse_poly(f: Poly, n: int) -> Poly:
    return f.hasse(n)


def hasse_ratfn(h: RatFn, n: int) -> RatFn:
    return h.hasse(n)


def hasse_series(s: Series, n: int) -> Series:
    return s.hasse(n)


# -- text formats -------------------------------------------------------------


def _fmt_coeff(c) -> str:
    return str(c)


def _fmt_term(c, k: int, var: str) -> str:
    if k == 0:
        return _fmt_coeff(c)
    mon = var if k == 1 else f"{var}^{k}"
    if c == 1:
        return mon
    if c == -1:
        return "-" + mon
    return f"{_fmt_coeff(c)}*{mon}"


def _join_terms(terms) -> str:
    out = ""
    for t in terms:
        if not out:
            out = t
        elif t.startswith("-"):
            out += " - " + t[1:]
        else:
            out += " + " + t
    return out


def format_poly(f: Poly, var: str = "z") -> str:
    if f.is_zero():
        return "0"
    terms = [_fmt_term(c, k, var) for k, c in reversed(list(enumerate(f.coeffs))) if c]
    return _join_terms(terms)


def format_ratfn(h: RatFn, var: str = "z") -> str:
    num = format_poly(h.num, var)
    if h.den.degree == 0:
        return num
    if len([c for c in h.num.coeffs if c]) > 1:
        num = f"({num})"
    return f"{num}/({format_poly(h.den, var)})"


def format_series(s: Series, var: str = "z") -> str:
    terms = [_fmt_term(c, k, var) for k, c in enumerate(s.coeffs, start=s.start) if c]
    terms.append(f"O({var}^{s.absprec})")
    return _join_terms(terms)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


class _Parser:
    """Recursive-descent parser for univariate polynomial/rational expressions."""

    def __init__(self, text: str, field, var: str | None):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"unexpected character at {pos} in {text!r}")
            pos = m.end()
            if m.group(1):
                self.toks.append(("num", int(m.group(1))))
            elif m.group(2):
                self.toks.append(("var", m.group(2)))
            elif m.group(3):
                op = "^" if m.group(3) == "**" else m.group(3)
                self.toks.append(("op", op))
        self.i = 0
        self.field = field
        self.var = var
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ValueError(f"expected {op!r} in {self.text!r}")

    def parse(self) -> RatFn:
        if not self.toks:
            raise ValueError("empty expression")
        val = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing input in {self.text!r}")
        return val

    def expr(self):
        kind, val = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term() * sign
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def term(self):
        acc = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.power()
                acc = acc * rhs if val == "*" else acc / rhs
            elif kind in ("num", "var") or (kind == "op" and val == "("):
                acc = acc * self.power()
            else:
                return acc

    def power(self):
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                sign = -1 if val == "-" else 1
            kind, val = self.take()
            if kind != "num":
                raise ValueError(f"exponent must be an integer in {self.text!r}")
            return base ** (sign * val)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return RatFn.const(self.field, val)
        if kind == "var":
            if self.var is None:
                self.var = val
            elif val != self.var:
                raise ValueError(f"unexpected variable {val!r}, expected {self.var!r}")
            return RatFn.variable(self.field)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ValueError(f"unexpected token {val!r} in {self.text!r}")


def parse_ratfn(text: str, field, var: str | None = None) -> RatFn:
    """Parse e.g. ``"(z + 1)/(z^2 - 1)"``; the variable name is inferred if not given."""
    return _Parser(text, field, var).parse()


def parse_poly(text: str, field, var: str | None = None) -> Poly:
    h = parse_ratfn(text, field, var)
    if not h.is_poly():
        raise ValueError(f"{text!r} is not a polynomial")
    return h.num * field.inv(h.den.lc())


def parse_series(text: str, field, var: str | None = None) -> Series:
    """Parse ``"t^-1 + 2*t + O(t^5)"``."""
    m = re.search(r"O\(\s*([A-Za-z_]\w*)\s*(?:\^\s*([+-]?\d+))?\s*\)\s*$", text)
    if not m:
        raise ValueError(f"series {text!r} needs an O(...) term")
    if var is not None and m.group(1) != var:
        raise ValueError(f"unexpected variable {m.group(1)!r}")
    var = m.group(1)
    absprec = int(m.group(2)) if m.group(2) else 1
    body = text[: m.start()].rstrip()
    body = re.sub(r"[+-]\s*$", "", body).strip()
    if not body:
        return Series(field, absprec, (), absprec)
    h = parse_ratfn(body, field, var)
    # a Laurent polynomial: denominator is a power of the variable
    vd = h.den.valuation_at_zero()
    if h.den.degree != vd:
        raise ValueError(f"{body!r} is not a Laurent polynomial")
    lo = -vd
    coeffs = [h.num[k] for k in range(max(0, absprec - lo))]
    return Series(field, lo, coeffs, absprec)
