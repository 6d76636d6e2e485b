"""Mod-p reduction of the Gauss hypergeometric equation.

The equation z(z-1)F'' + ((a+b+1)z - c)F' + ab F = 0 with p-adically integral
rational parameters is turned into its divided system (1/n!)(d/dz)^n y = A_n y
over Q(z), checked for p-integrality and reduced to a stratified module over
F_p(z).  The digit criterion max(a_k, b_k) >= c_k (k large) on base-p
truncations predicts when the standard solutions have bounded coefficients.

Truncation convention: a truncation x_k that vanishes is replaced by p^k.
This keeps floor((n - 1 + x_k)/p^k) equal to the number of terms of
x, x+1, ..., x+n-1 divisible by p^k, and changes nothing when the leading
digit is nonzero.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ffalg import GF, INF_POINT, QQ, NonIntegralError, Poly, RatFn, Series
from .padic import (
    INF,
    PAdicRat,
    binom_mod_p,
    digit_profile,
    factorial_val,
    int_valuation,
    pochhammer_val,
)
from .stratmod import (
    StratModule,
    check_iterative,
    dual,
    e_alpha,
    gauge,
    local_exponents,
    tensor,
)

__all__ = [
    "HGParams",
    "CriterionResult",
    "ReductionError",
    "digit_criterion",
    "floor_inequality_check",
    "floor_expression",
    "floor_minimum",
    "coefficient_valuations",
    "correction_bound",
    "divided_matrices",
    "divided_numerators",
    "first_nonintegral",
    "reduce_mod_p",
    "hypergeometric_module",
    "split_module",
    "expected_exponents",
    "reduced_exponents",
    "reduced_series",
    "SolutionReport",
    "reduced_solution_check",
    "hypergeometric_report",
]


@dataclass(frozen=True)
class HGParams:
    p: int
    alpha: PAdicRat
    beta: PAdicRat
    gamma: PAdicRat

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not isinstance(v, PAdicRat):
                v = PAdicRat(v, self.p)
            elif v.p != self.p:
                raise ValueError(f"{name} lives over p={v.p}, expected {self.p}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, p, alpha, beta, gamma) -> HGParams:
        return cls(p, PAdicRat(alpha, p), PAdicRat(beta, p), PAdicRat(gamma, p))

    def second(self) -> HGParams:
        """Parameters (1-a, 1-b, 2-c) of the series in the second standard solution."""
        return HGParams(self.p, 1 - self.alpha, 1 - self.beta, 2 - self.gamma)

    def values(self):
        return self.alpha.value, self.beta.value, self.gamma.value

    def __str__(self):
        a, b, c = self.values()
        return f"HG({a}, {b}; {c}) over p={self.p}"


# -- digit criterion ----------------------------------------------------------


def effective_truncation(x: PAdicRat, k: int) -> int:
    t = x.truncation(k)
    return t if t else x.p**k


def _criterion_level(h: HGParams, k: int) -> bool:
    if k == 0:
        return True
    a = effective_truncation(h.alpha, k)
    b = effective_truncation(h.beta, k)
    c = effective_truncation(h.gamma, k)
    return max(a, b) >= c


@dataclass(frozen=True)
class CriterionResult:
    """Decision of max(a_k, b_k) >= c_k for all large k.

    ``tail_start`` and ``period`` describe where the level outcomes become
    periodic; ``tail_failures`` lists the failing levels in one period from
    ``tail_start`` on, so the violations are exactly those k plus multiples
    of ``period``.
    """

    holds: bool
    k0: int | None
    tail_start: int
    period: int
    prefix_failures: tuple
    tail_failures: tuple

    def fails_at(self, k: int) -> bool:
        if k < self.tail_start:
            return k in self.prefix_failures
        r = self.tail_start + (k - self.tail_start) % self.period
        return r in self.tail_failures

    def witness(self):
        if self.holds:
            return None
        return {"levels": list(self.tail_failures), "period": self.period,
                "prefix_levels": list(self.prefix_failures)}

    def to_json(self) -> dict:
        return {"holds": self.holds, "k0": self.k0, "witness": self.witness()}


def digit_criterion(h: HGParams) -> CriterionResult:
    profiles = [digit_profile(x) for x in (h.alpha, h.beta, h.gamma)]
    S = max(len(pr.preperiod) for pr in profiles)
    P = math.lcm(*(len(pr.period) for pr in profiles))
    start = max(S + P, 1)
    outcome = {k: _criterion_level(h, k) for k in range(1, start + P)}
    prefix = tuple(k for k in range(1, start) if not outcome[k])
    tail = tuple(k for k in range(start, start + P) if not outcome[k])
    if tail:
        return CriterionResult(False, None, start, P, prefix, tail)
    if h.gamma == h.alpha or h.gamma == h.beta:
        k0 = 0
    else:
        k0 = max(prefix) + 1 if prefix else 1
    return CriterionResult(True, k0, start, P, prefix, ())


# -- floor inequality ---------------------------------------------------------


def _level_fractions(h: HGParams, k: int):
    pk = h.p**k
    return (Fraction(effective_truncation(h.alpha, k), pk),
            Fraction(effective_truncation(h.beta, k), pk),
            Fraction(effective_truncation(h.gamma, k), pk),
            Fraction(1, pk))


def floor_expression(h: HGParams, k: int, x) -> int:
    """[x + a_k/p^k] + [x + b_k/p^k] - [x + c_k/p^k] - [x + 1/p^k]."""
    x = Fraction(x)
    A, B, G, U = _level_fractions(h, k)
    return (math.floor(x + A) + math.floor(x + B) - math.floor(x + G) - math.floor(x + U))


def floor_minimum(h: HGParams, k: int):
    """(minimum over real x, an x in [0, 1) attaining it).

    The expression is 1-periodic, piecewise constant and right-continuous,
    so its values are attained at the breakpoints -A, -B, -G, -1/p^k mod 1.
    """
    pts = sorted({(-f) % 1 for f in _level_fractions(h, k)} | {Fraction(0)})
    best = None
    for x in pts:
        v = floor_expression(h, k, x)
        if best is None or v < best[0]:
            best = (v, x)
    return best


def floor_inequality_check(h: HGParams, k: int) -> bool:
    return floor_minimum(h, k)[0] >= 0


def correction_bound(h: HGParams) -> int | None:
    """B with v_p(c_n) >= -B for all n, or None when the criterion fails.

    Levels k >= k0 contribute nonnegatively; the levels below k0 contribute
    at least their floor minimum.
    """
    res = digit_criterion(h)
    if not res.holds:
        return None
    return sum(max(0, -floor_minimum(h, k)[0]) for k in range(1, max(res.k0, 1)))


# -- coefficient valuations ---------------------------------------------------


def _ratio_valuation(top, bottom):
    if bottom == INF:
        return None if top == INF else -INF
    if top == INF:
        return INF
    return top - bottom


def series_coefficient_valuation(a: PAdicRat, b: PAdicRat, c: PAdicRat, n: int):
    """v_p((a)_n (b)_n / ((c)_n n!)); INF for a vanishing coefficient, -INF for a
    pole ((c)_n = 0), None when both vanish."""
    va, vb = pochhammer_val(a, n), pochhammer_val(b, n)
    top = INF if INF in (va, vb) else va + vb
    bottom = pochhammer_val(c, n)
    if bottom != INF:
        bottom += factorial_val(n, a.p)
    return _ratio_valuation(top, bottom)


def _oracle_rows(a, b, c, n_max):
    """Incremental sum of v_p(x + i) with exact integer valuations."""
    p = a.p
    out = []
    va = vb = vc = vf = 0
    for n in range(n_max + 1):
        top = INF if INF in (va, vb) else va + vb
        bottom = INF if vc == INF else vc + vf
        out.append(_ratio_valuation(top, bottom))
        for x, name in ((a, "a"), (b, "b"), (c, "c")):
            v = int_valuation(x.num + n * x.den, p)
            if name == "a":
                va = INF if INF in (va, v) else va + v
            elif name == "b":
                vb = INF if INF in (vb, v) else vb + v
            else:
                vc = INF if INF in (vc, v) else vc + v
        vf += int_valuation(n + 1, p)
    return out


@dataclass(frozen=True)
class ValuationTable:
    rows: tuple  # (n, v_first, v_second)

    def minimum(self, which: int = 1):
        vals = [r[which] for r in self.rows if r[which] is not None]
        return min(vals) if vals else INF

    def first_below(self, bound: int, which: int = 1):
        for r in self.rows:
            v = r[which]
            if v is not None and v < bound:
                return r[0]
        return None

    def to_json(self):
        def enc(v):
            if v is None:
                return None
            if v == INF:
                return "inf"
            if v == -INF:
                return "-inf"
            return v

        return [[n, enc(v1), enc(v2)] for n, v1, v2 in self.rows]


def coefficient_valuations(h: HGParams, n_max: int, cross_check: bool = True) -> ValuationTable:
    """v_p of the coefficients of both standard solutions for n <= n_max.

    With ``cross_check`` every entry is recomputed by direct summation of
    factor valuations and must agree.
    """
    s = h.second()
    rows = []
    for n in range(n_max + 1):
        v1 = series_coefficient_valuation(h.alpha, h.beta, h.gamma, n)
        v2 = series_coefficient_valuation(s.alpha, s.beta, s.gamma, n)
        rows.append((n, v1, v2))
    if cross_check:
        o1 = _oracle_rows(h.alpha, h.beta, h.gamma, n_max)
        o2 = _oracle_rows(s.alpha, s.beta, s.gamma, n_max)
        for (n, v1, v2), w1, w2 in zip(rows, o1, o2):
            if v1 != w1 or v2 != w2:
                raise AssertionError(f"valuation mismatch at n={n}: {(v1, v2)} vs oracle {(w1, w2)}")
    return ValuationTable(tuple(rows))


# -- divided matrices over Q(z) -----------------------------------------------


def _poly_mat_mul(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)] for i in range(2)]


def divided_numerators(h_or_values, N: int):
    """Polynomial matrices P_n with A_n = P_n / (z(z-1))^n, n = 1..N.

    From A_{n+1} = (A_n' + A_n A_1)/(n+1):
    P_{n+1} = (P_n' D - n D' P_n + P_n P_1)/(n+1), D = z(z-1).
    """
    if isinstance(h_or_values, HGParams):
        a, b, c = h_or_values.values()
    else:
        a, b, c = (Fraction(v) for v in h_or_values)
    zero = Poly(QQ, ())
    D = Poly(QQ, (0, -1, 1))
    dD = Poly(QQ, (-1, 2))
    P1 = [[zero, D], [Poly(QQ, (-a * b,)), Poly(QQ, (c, -(a + b + 1)))]]
    out = [P1]
    P = P1
    for n in range(1, N):
        prod = _poly_mat_mul(P, P1)
        P = [[(P[i][j].derivative() * D - dD * P[i][j] * n + prod[i][j]) * Fraction(1, n + 1)
              for j in range(2)] for i in range(2)]
        out.append(P)
    return out


def _cancel_root(P: Poly, root, limit: int):
    """(P / (z - root)^j, j) with j <= limit maximal."""
    j = 0
    while j < limit and not P.is_zero() and P(root) == 0:
        P = P // Poly(QQ, (-root, 1))
        j += 1
    return P, j


def divided_matrices(h, N: int):
    """The exact family A_1..A_N over Q(z), as tuples of RatFn.

    The denominator of A_n divides (z(z-1))^n, so reducing the fractions
    only needs the powers of z and z - 1 dividing the numerators; this
    avoids Euclid over Q and its coefficient growth.
    """
    z, zm1 = Poly(QQ, (0, 1)), Poly(QQ, (-1, 1))
    out = []
    for n, P in enumerate(divided_numerators(h, N), start=1):
        mat = []
        for row in P:
            r = []
            for x in row:
                if x.is_zero():
                    r.append(RatFn.zero(QQ))
                    continue
                x, i = _cancel_root(x, 0, n)
                x, j = _cancel_root(x, 1, n)
                r.append(RatFn._raw(x, z ** (n - i) * zm1 ** (n - j)))
            mat.append(tuple(r))
        out.append(tuple(mat))
    return tuple(out)


class ReductionError(ArithmeticError):
    """A divided matrix has a coefficient with negative p-adic valuation."""

    def __init__(self, n, entry, coefficient, valuation):
        super().__init__(f"non-integral coefficient at (n={n}, entry={entry}): "
                         f"{coefficient} has valuation {valuation}")
        self.n = n
        self.entry = entry
        self.coefficient = coefficient
        self.valuation = valuation

    def to_json(self):
        return {"n": self.n, "entry": list(self.entry), "coefficient": str(self.coefficient),
                "valuation": self.valuation}


def reduce_mod_p(mats, p: int, coordinate: str = "z") -> StratModule:
    """Reduce an exact family over Q(z) to a stratified module over F_p(z).

    Every entry must be p-integral after Gauss-normalizing its denominator;
    otherwise ReductionError names the first offending (n, entry).
    """
    F = GF(p)
    red = []
    for n, mat in enumerate(mats, start=1):
        rows = []
        for i, row in enumerate(mat):
            r = []
            for j, x in enumerate(row):
                try:
                    r.append(x.reduce_mod(p))
                except NonIntegralError as exc:
                    raise ReductionError(n, (i + 1, j + 1), exc.coefficient, exc.valuation) from None
            rows.append(tuple(r))
        red.append(tuple(rows))
    M = StratModule(p, len(mats[0]), len(mats), tuple(red), frozenset({0, 1, INF_POINT}), coordinate)
    if any(x.field != F for m in red for row in m for x in row):
        raise AssertionError("reduction left the prime field")
    return M


def hypergeometric_module(h: HGParams, N: int) -> StratModule:
    return reduce_mod_p(divided_matrices(h, N), h.p)


def first_nonintegral(h: HGParams, N: int):
    """The ReductionError reduce_mod_p would raise on divided_matrices(h, N), or None.

    Works on the numerators P_n directly: (z(z-1))^n has unit content, so by
    Gauss's lemma an entry is p-integral iff its numerator is.
    """
    p = h.p
    for n, P in enumerate(divided_numerators(h, N), start=1):
        for i in range(2):
            for j in range(2):
                for c in P[i][j].coeffs:
                    c = Fraction(c)
                    if c.denominator % p == 0:
                        v = int_valuation(c.numerator, p) - int_valuation(c.denominator, p)
                        return ReductionError(n, (i + 1, j + 1), c, v)
    return None


# -- split bases and exponents ------------------------------------------------

def shear_matrix(field, pt):
    """P with (F, F') = P (F, t F').

    t is z - 1 at 1 and z at 0 and at infinity; this turns the companion
    basis into a split lattice at pt.
    """
    t = RatFn(Poly(field, (-1, 1) if pt == 1 else (0, 1)))
    one, zero = RatFn.one(field), RatFn.zero(field)
    return ((one, zero), (zero, t.inverse()))


def split_module(M: StratModule, pt) -> StratModule:
    """M in the sheared basis (F, t F') adapted to pt."""
    return gauge(M, shear_matrix(M.field, pt))


def expected_exponents(h: HGParams) -> dict:
    """{0: (0, 1-c), 1: (0, c-a-b), inf: (a, b)} as exact rationals."""
    a, b, c = h.values()
    return {0: (Fraction(0), 1 - c), 1: (Fraction(0), c - a - b), INF_POINT: (a, b)}


def reduced_exponents(M: StratModule, digits: int | None = None) -> dict:
    """ExponentReport at 0, 1 and inf, each taken in its split basis."""
    return {pt: local_exponents(split_module(M, pt), pt, digits) for pt in (0, 1, INF_POINT)}


# -- reduced solutions --------------------------------------------------------


class SeriesReductionError(ArithmeticError):
    """A standard series has a coefficient that does not reduce mod p."""

    def __init__(self, n, reason):
        super().__init__(f"coefficient {n}: {reason}")
        self.n = n
        self.reason = reason


def _mod_p(x: Fraction, p: int) -> int:
    if x.denominator % p == 0:
        raise ZeroDivisionError(f"{x} is not p-integral")
    return x.numerator * pow(x.denominator, -1, p) % p


def reduced_series(a, b, c, p: int, length: int) -> Series:
    """sum (a)_n (b)_n / ((c)_n n!) z^n reduced mod p, to O(z^length)."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    coeffs = []
    term = Fraction(1)
    for n in range(length):
        if term.denominator % p == 0:
            raise SeriesReductionError(n, "not p-integral")
        coeffs.append(_mod_p(term, p))
        top = (a + n) * (b + n)
        if top == 0:
            coeffs.extend([0] * (length - n - 1))
            break
        if c + n == 0:
            raise SeriesReductionError(n + 1, "pole of the series")
        term = term * top / ((c + n) * (n + 1))
    return Series(GF(p), 0, coeffs, length)


def binomial_series(e: PAdicRat, length: int) -> Series:
    """(1 - z)^e reduced mod p: coefficients (-1)^n C(e, n) via Lucas."""
    p = e.p
    coeffs = [(-1) ** n * binom_mod_p(e, n) % p for n in range(length)]
    return Series(GF(p), 0, coeffs, length)


def _first_mismatch(lhs: Series, rhs: Series):
    top = min(lhs.absprec, rhs.absprec)
    for k in range(min(lhs.start, rhs.start), top):
        if lhs[k] != rhs[k]:
            return k
    return None


def check_series_solution(mats, w, precision: int):
    """First (n, row, k) where D^(n) w != A_n w, or None.

    ``w`` is a vector of power series known to O(z^precision).
    """
    for n, A in enumerate(mats, start=1):
        for i, row in enumerate(A):
            lhs = w[i].hasse(n)
            rhs = None
            for x, s in zip(row, w):
                term = Series.from_ratfn(x, precision) * s
                rhs = term if rhs is None else rhs + term
            k = _first_mismatch(lhs, rhs)
            if k is not None:
                return (n, i + 1, k)
    return None


@dataclass(frozen=True)
class SolutionReport:
    """Outcome of the three reduced-solution checks.

    Each status is "pass", "fail" or "skipped"; ``details`` holds the first
    offending (n, row, series exponent) or the reason for a skip.
    """

    first_solution: str
    second_solution: str
    exponents_at_zero: str
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(s != "fail" for s in (self.first_solution, self.second_solution,
                                         self.exponents_at_zero))

    def to_json(self) -> dict:
        return {"ok": self.ok, "first_solution": self.first_solution,
                "second_solution": self.second_solution,
                "exponents_at_zero": self.exponents_at_zero, "details": self.details}


def reduced_solution_check(h: HGParams, M: StratModule, precision: int | None = None) -> SolutionReport:
    """Check the reduced standard solutions against the reduced module M.

    (i) (F1, F1') solves M; (ii) (G, G' + tau G/z) solves M twisted by the
    dual of E(tau), tau = 1 - c, where z^tau G is the second solution;
    (iii) the exponents of M at 0 are {0, tau}.
    """
    p = h.p
    if precision is None:
        precision = p**3
    if precision <= M.order_bound + 1:
        raise ValueError("series precision must exceed the order bound by at least 2")
    a, b, c = h.values()
    details = {}

    try:
        F = reduced_series(a, b, c, p, precision)
        bad = check_series_solution(M.matrices, (F, F.hasse(1)), precision)
        first = "pass" if bad is None else "fail"
        if bad:
            details["first_solution"] = list(bad)
    except SeriesReductionError as exc:
        first = "skipped"
        details["first_solution"] = str(exc)

    tau = PAdicRat(1 - c, p)
    try:
        G = reduced_series(1 - a, 1 - b, 2 - c, p, precision)
        G = G * binomial_series(PAdicRat(c - a - b, p), precision)
        W = (G, G.hasse(1) + G.shift(-1) * tau.digit(0))
        twisted = tensor(M, dual(e_alpha(tau, M.order_bound, p)))
        bad = check_series_solution(twisted.matrices, W, precision)
        second = "pass" if bad is None else "fail"
        if bad:
            details["second_solution"] = list(bad)
    except SeriesReductionError as exc:
        second = "skipped"
        details["second_solution"] = str(exc)

    try:
        rep = local_exponents(split_module(M, 0), 0)
        exps = "pass" if rep.matches((0, tau)) else "fail"
        if exps == "fail":
            details["exponents_at_zero"] = rep.to_json()
    except ValueError as exc:
        exps = "fail"
        details["exponents_at_zero"] = str(exc)
    return SolutionReport(first, second, exps, details)


# -- report -------------------------------------------------------------------


def module_ref(M: StratModule) -> str:
    """Short content hash of the module's canonical JSON."""
    text = json.dumps(M.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def hypergeometric_report(h: HGParams, N: int | None = None, n_max: int | None = None) -> dict:
    """Criterion, valuations, reduction and exponents as one JSON-ready dict."""
    p = h.p
    if N is None:
        N = p * p
    if n_max is None:
        n_max = p**3
    crit = digit_criterion(h)
    table = coefficient_valuations(h, n_max)
    report = {
        "params": {"p": p, "alpha": str(h.alpha.value), "beta": str(h.beta.value),
                   "gamma": str(h.gamma.value)},
        "criterion": crit.to_json(),
        "correction_bound": correction_bound(h),
        "valuations": [[n, enc] for n, enc, _ in table.to_json()],
        "second_valuations": [[n, enc] for n, _, enc in table.to_json()],
    }
    bad = first_nonintegral(h, N)
    if bad is not None:
        report["reduction"] = {"ok": False, "module_ref": None, "order": N, "error": bad.to_json()}
        report["exponents"] = None
        return report
    M = hypergeometric_module(h, N)
    report["reduction"] = {"ok": True, "module_ref": module_ref(M), "order": N,
                           "iterative": check_iterative(M).ok}
    expo = {}
    for pt, rep in _safe_exponents(M).items():
        key = "inf" if pt == INF_POINT else str(pt)
        expo[key] = rep if isinstance(rep, str) else rep.to_json()
    report["exponents"] = expo
    return report


def _safe_exponents(M):
    out = {}
    for pt in (0, 1, INF_POINT):
        try:
            out[pt] = local_exponents(split_module(M, pt), pt)
        except ValueError as exc:
            out[pt] = f"error: {exc}"
    return out
