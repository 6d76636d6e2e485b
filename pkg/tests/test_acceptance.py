"""Acceptance criteria 1 to 10, one PASS/FAIL line each."""

import math
import random
import time
from fractions import Fraction

from conftest import ACCEPTANCE_LINES
from oracles import int_binom_mod, valuation
from stratus.ffalg import GF, Poly, RatFn
from stratus.hypergeom import (
    HGParams,
    ReductionError,
    coefficient_valuations,
    digit_criterion,
    divided_matrices,
    floor_inequality_check,
    hypergeometric_module,
    reduce_mod_p,
    reduced_exponents,
)
from stratus.padic import PAdicRat, binom_mod_p, pochhammer_val, pochhammer_val_oracle
from stratus.projsys import RankOneProjSys, compile_oracle, compile_system, group_of_diagonal
from stratus.stratmod import (
    RankOneSymbol,
    StratModule,
    check_iterative,
    dual,
    e_alpha,
    from_symbol,
    kummer_pullback,
    local_exponents,
    tensor,
)

SEED = 20240917


def verdict(num, title, failures, elapsed, limit=None):
    ok = not failures and (limit is None or elapsed < limit)
    timing = f"{elapsed:.1f}s" + (f" (limit {limit}s)" if limit else "")
    if ok:
        detail = ""
    elif failures:
        detail = " | " + "; ".join(map(str, failures[:5]))
    else:
        detail = " | too slow"
    line = f"{'PASS' if ok else 'FAIL'} {num}: {title} [{timing}]{detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def rand_rational(rng, p, num=60, den=30):
    d = rng.choice([d for d in range(1, den + 1) if d % p])
    return Fraction(rng.randint(-num, num), d)


def rand_ratfn(rng, p):
    F = GF(p)
    num = Poly(F, [rng.randrange(p) for _ in range(rng.randint(1, 5))])
    den = Poly(F, [rng.randrange(p) for _ in range(rng.randint(1, 5))])
    if den.is_zero():
        den = Poly(F, (1,))
    return RatFn(num, den)


def test_1_hasse_axioms():
    rng = random.Random(SEED + 1)
    start = time.time()
    bad = []
    for idx in range(500):
        p = (2, 3, 5, 7)[idx % 4]
        f, g = rand_ratfn(rng, p), rand_ratfn(rng, p)
        zero = RatFn.zero(f.field)
        hf, hg, hfg = f.hasse_all(12), g.hasse_all(12), (f * g).hasse_all(12)
        for n in range(13):
            if hfg[n] != sum((hf[a] * hg[n - a] for a in range(n + 1)), zero):
                bad.append(("leibniz", p, str(f), str(g), n))
        for m in range(13):
            inner = hf[m].hasse_all(12 - m)
            for n in range(13 - m):
                if inner[n] != hf[n + m] * (math.comb(n + m, n) % p):
                    bad.append(("composition", p, str(f), n, m))
    verdict(1, "Hasse Leibniz and composition, 500 functions, n+m <= 12", bad,
            time.time() - start, 60)


def test_2_lucas_oracle():
    start = time.time()
    bad = []
    for p in (2, 3, 5):
        for a in range(-200, 201):
            x = PAdicRat(a, p)
            for n in range(501):
                if binom_mod_p(x, n) != int_binom_mod(a, n, p):
                    bad.append((p, a, n))
    verdict(2, "binom_mod_p against integer binomials, |alpha| <= 200, n <= 500", bad,
            time.time() - start, 30)


def test_3_pochhammer():
    rng = random.Random(SEED + 3)
    start = time.time()
    bad = []
    for p in (2, 3, 5, 7):
        for _ in range(1000):
            x = PAdicRat(rand_rational(rng, p, 500, 40), p)
            n = rng.randint(0, 10**4)
            if pochhammer_val(x, n) != pochhammer_val_oracle(x, n):
                bad.append((p, str(x.value), n))
    verdict(3, "Pochhammer valuation formula, 1000 pairs per prime, n <= 10^4", bad,
            time.time() - start)


def test_4_positive_case():
    start = time.time()
    h = HGParams.of(3, Fraction(1, 2), Fraction(1, 2), 1)
    bad = []
    res = digit_criterion(h)
    if not (res.holds and res.k0 == 1):
        bad.append(f"criterion holds={res.holds} k0={res.k0}")
    table = coefficient_valuations(h, 3**6)
    if table.minimum(1) < 0:
        bad.append(f"v_3(c_n) < 0 at n={table.first_below(0)}")
    try:
        M = reduce_mod_p(divided_matrices(h, 9), 3)
    except ReductionError as exc:
        bad.append(f"reduce_mod_p: {exc}")
        bad.append("iterativity and exponents not reached")
    else:
        if not check_iterative(M):
            bad.append("reduced module not iterative")
        exps = reduced_exponents(M, 3)
        if not exps["0"].matches([0, 0]):
            bad.append(f"exponents at 0: {exps['0'].exponents}")
        if not exps["inf"].matches([Fraction(1, 2), Fraction(1, 2)]):
            bad.append(f"exponents at inf: {exps['inf'].exponents}")
    verdict(4, "positive case p=3 (1/2, 1/2, 1)", bad, time.time() - start, 120)


def test_5_negative_case():
    start = time.time()
    h = HGParams.of(5, Fraction(-1, 2), Fraction(-1, 2), Fraction(1, 2))
    bad = []
    res = digit_criterion(h)
    w = res.witness()
    if res.holds or not w:
        bad.append("criterion unexpectedly holds")
    elif not all(res.fails_at(k) for k in range(1, res.tail_start + 4 * res.period)):
        bad.append("some level k >= 1 passes")
    table = coefficient_valuations(h, 5**4)
    if table.minimum(1) > -1:
        bad.append("no coefficient with v_5 <= -1")
    try:
        reduce_mod_p(divided_matrices(h, 25), 5)
        bad.append("reduce_mod_p succeeded")
    except ReductionError as exc:
        if not (exc.valuation < 0 and exc.n >= 1 and exc.entry):
            bad.append(f"weak witness {exc.to_json()}")
    verdict(5, "negative case p=5 (-1/2, -1/2, 1/2)", bad, time.time() - start)


def test_6_criterion_floor():
    rng = random.Random(SEED + 6)
    start = time.time()
    bad = []
    for p in (2, 3, 5, 7):
        for _ in range(200):
            h = HGParams.of(p, *(rand_rational(rng, p, 40, 20) for _ in range(3)))
            res = digit_criterion(h)
            period = range(res.tail_start, res.tail_start + res.period)
            floors = all(floor_inequality_check(h, k) for k in period)
            if res.holds != floors:
                bad.append((p, *map(str, h.values())))
    verdict(6, "digit criterion tail equals floor inequality, 200 triples per prime", bad,
            time.time() - start)


def test_7_functor_identities():
    rng = random.Random(SEED + 7)
    start = time.time()
    bad = []
    for idx in range(100):
        p = (3, 5)[idx % 2]
        N = p**3
        a = PAdicRat(rand_rational(rng, p, 30, 12), p)
        b = PAdicRat(rand_rational(rng, p, 30, 12), p)
        e = rng.choice([e for e in (2, 3, 4) if e % p])
        Ea = e_alpha(a, N)
        if not tensor(Ea, e_alpha(b, N)).same_matrices(e_alpha(a + b, N)):
            bad.append(("tensor", p, str(a), str(b)))
        if not dual(Ea).same_matrices(e_alpha(-a, N)):
            bad.append(("dual", p, str(a)))
        if not kummer_pullback(Ea, e).same_matrices(e_alpha(a * e, N)):
            bad.append(("kummer", p, str(a), e))
    verdict(7, "tensor, dual and Kummer pullback of E(alpha), 100 cases, order p^3", bad,
            time.time() - start)


def test_8_symbol_exponents():
    rng = random.Random(SEED + 8)
    start = time.time()
    bad = []
    for idx in range(100):
        p = (3, 5, 7)[idx % 3]
        a0, a1 = rand_rational(rng, p, 30, 12), rand_rational(rng, p, 30, 12)
        M = from_symbol(RankOneSymbol(p, ((0, a0), (1, a1))), p * p)
        for pt, want in ((0, a0), (1, a1), ("inf", -a0 - a1)):
            rep = local_exponents(M, pt, digits=3)
            if rep.certified_digits != 3 or not rep.matches([want]):
                bad.append((p, str(a0), str(a1), pt))
    verdict(8, "symbol exponents at 0, 1, inf, 100 pairs, 3 digits", bad, time.time() - start)


def test_9_projective_systems():
    start = time.time()
    bad = []
    for p in (2, 3):
        N = p**3
        for length in range(11):
            for code in range(2**length):
                bits = [(code >> k) & 1 for k in range(length)]
                s = RankOneProjSys.finite(p, bits)
                if not compile_system(s, N).same_matrices(compile_oracle(s, N)):
                    bad.append((p, bits))
    s = RankOneProjSys(2, "[](10)")
    M = compile_system(s, 8)
    if abs(s.alpha().value) != Fraction(1, 3) or not local_exponents(M, 0).matches([Fraction(1, 3)]):
        bad.append("exponent of (10) over p=2")
    if group_of_diagonal([-s.alpha()]).name != "mu_3":
        bad.append("group of (10) over p=2")
    verdict(9, "projective systems: compile equals oracle, (10) over p=2 gives mu_3", bad,
            time.time() - start)


def test_10_mutation_sensitivity():
    rng = random.Random(SEED + 10)
    start = time.time()
    pool = [
        e_alpha(PAdicRat(Fraction(2, 3), 5), 30),
        e_alpha(PAdicRat(Fraction(-1, 4), 3), 27),
        e_alpha(PAdicRat(Fraction(1, 6), 7), 49),
        from_symbol(RankOneSymbol(5, ((0, Fraction(1, 2)), (1, Fraction(-2, 3)))), 25),
        hypergeometric_module(HGParams.of(5, 0, 2, Fraction(-3, 8)), 25),
        hypergeometric_module(HGParams.of(3, 1, 0, Fraction(1, 8)), 12),
    ]
    bad = [i for i, M in enumerate(pool) if not check_iterative(M)]
    missed = []
    for _ in range(100):
        M = rng.choice(pool)
        n = rng.randint(1, M.order_bound)
        i, j = rng.randrange(M.rank), rng.randrange(M.rank)
        delta = RatFn.local_power(M.field, 0, rng.randint(-3, 3)) * rng.randint(1, M.p - 1)
        mats = [[list(row) for row in A] for A in M.matrices]
        mats[n - 1][i][j] = mats[n - 1][i][j] + delta
        mats = tuple(tuple(tuple(row) for row in A) for A in mats)
        B = StratModule(M.p, M.rank, M.order_bound, mats, M.singularities, M.coordinate)
        if check_iterative(B):
            missed.append((M.p, M.order_bound, n, (i, j)))
    if bad:
        bad = [f"pool module {i} not iterative" for i in bad]
    if len(missed) > 5:
        bad.append(f"{len(missed)} undetected: {missed}")
    verdict(10, f"mutation sensitivity, {100 - len(missed)}/100 detected", bad, time.time() - start)
