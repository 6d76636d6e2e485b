"""Stratified (iterative differential) modules over F_p(z).

A module of rank d is presented by its divided-derivation matrices
``A_1, ..., A_N``: a solution vector y satisfies ``D^(n) y = A_n y``.
``A_0`` is the identity and is never stored.  Everything is exact, so every
claim about a module holds "to order N" with no tolerance.

Composition of divided derivations, ``D^(n) D^(m) = C(n+m, n) D^(n+m)``,
becomes the matrix identity

    sum_{a+b=n} D^(a)(A_m) A_b = C(n+m, n) A_{n+m}

which is what :func:`check_iterative` verifies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ffalg import GF, INF_POINT, Poly, RatFn, format_ratfn, parse_ratfn
from .padic import PAdicRat, binom_mod_p, check_prime, lucas

__all__ = [
    "StratModule",
    "RankOneSymbol",
    "ExponentReport",
    "IterativityReport",
    "NotSplitError",
    "e_alpha",
    "trivial_module",
    "from_symbol",
    "check_iterative",
    "tensor",
    "dual",
    "direct_sum",
    "conjugate",
    "gauge",
    "pullback",
    "kummer_pullback",
    "local_matrices",
    "is_regular_singular_at",
    "local_exponents",
    "isomorphic_rank_one",
]


class NotSplitError(ValueError):
    """The residue matrices at a point do not commute or are not diagonalizable over F_p."""


# -- points -------------------------------------------------------------------


def parse_point(text, p: int):
    if text == INF_POINT or str(text).strip().lower() in ("inf", "infinity", "oo"):
        return INF_POINT
    return int(text) % p


def format_point(pt) -> str:
    return INF_POINT if pt == INF_POINT else str(pt)


def _point_key(pt):
    return (1, 0) if pt == INF_POINT else (0, pt)


# -- small matrix helpers over RatFn ------------------------------------------


def mat_identity(field, d):
    one, zero = RatFn.one(field), RatFn.zero(field)
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def mat_zero(field, d):
    zero = RatFn.zero(field)
    return tuple(tuple(zero for _ in range(d)) for _ in range(d))


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a, c):
    return tuple(tuple(x * c for x in row) for row in a)


def mat_mul(a, b):
    d_out, d_mid, d_in = len(a), len(b), len(b[0])
    field = a[0][0].field
    out = []
    for i in range(d_out):
        row = []
        for j in range(d_in):
            acc = RatFn.zero(field)
            for k in range(d_mid):
                x, y = a[i][k], b[k][j]
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_transpose(a):
    return tuple(zip(*a))


def mat_kron(a, b):
    da, db = len(a), len(b)
    return tuple(
        tuple(a[i // db][j // db] * b[i % db][j % db] for j in range(da * db))
        for i in range(da * db)
    )


def mat_block(a, b):
    field = a[0][0].field
    zero = RatFn.zero(field)
    da, db = len(a), len(b)
    rows = [tuple(a[i]) + (zero,) * db for i in range(da)]
    rows += [(zero,) * da + tuple(b[i]) for i in range(db)]
    return tuple(rows)


def mat_is_zero(a) -> bool:
    return all(x.is_zero() for row in a for x in row)


# -- F_p linear algebra for residues ------------------------------------------


def _rref_nullspace(rows, ncols, p):
    """Basis of {x : rows x = 0} over F_p."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-m[i][fc]) % p
        basis.append(v)
    return basis


def _matvec_cols(mat, cols, p):
    """mat @ [cols] where cols is a list of column vectors; returns rows of the product."""
    d = len(mat)
    r = len(cols)
    return [[sum(mat[i][k] * cols[j][k] for k in range(d)) % p for j in range(r)] for i in range(d)]


def _joint_eigenspaces(residues, p, d):
    """Split F_p^d into joint eigenspaces of commuting residue matrices.

    Returns a list of (eigenvalue tuple, dimension).  Raises NotSplitError if
    some residue is not diagonalizable on a joint eigenspace.
    """
    spaces = [((), [[int(i == j) for i in range(d)] for j in range(d)])]
    for k, R in enumerate(residues):
        refined = []
        for vals, basis in spaces:
            found = 0
            for lam in range(p):
                shifted = [[(R[i][j] - (lam if i == j else 0)) % p for j in range(d)] for i in range(d)]
                rows = _matvec_cols(shifted, basis, p)
                coeffs = _rref_nullspace(rows, len(basis), p)
                if coeffs:
                    vecs = [[sum(c[j] * basis[j][i] for j in range(len(basis))) % p for i in range(d)]
                            for c in coeffs]
                    refined.append((vals + (lam,), vecs))
                    found += len(vecs)
            if found != len(basis):
                raise NotSplitError(
                    f"residue matrix of D^(p^{k}) is not diagonalizable over F_{p} on a joint eigenspace"
                )
        spaces = refined
    return [(vals, len(basis)) for vals, basis in spaces]


# -- the module type ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StratModule:
    """Rank-d stratified module presented to order N over F_p(coordinate)."""

    p: int
    rank: int
    order_bound: int
    matrices: tuple
    singularities: frozenset = field(default_factory=frozenset)
    coordinate: str = "z"

    def __post_init__(self):
        check_prime(self.p)
        if self.rank < 1:
            raise ValueError("rank must be positive")
        if self.order_bound < 1:
            raise ValueError("order bound must be positive")
        if len(self.matrices) != self.order_bound:
            raise ValueError(f"expected {self.order_bound} matrices, got {len(self.matrices)}")
        F = GF(self.p)
        for n, mat in enumerate(self.matrices, start=1):
            if len(mat) != self.rank or any(len(row) != self.rank for row in mat):
                raise ValueError(f"A_{n} is not {self.rank}x{self.rank}")
            if any(x.field != F for row in mat for x in row):
                raise ValueError(f"A_{n} has entries outside F_{self.p}(z)")
        object.__setattr__(self, "singularities", frozenset(self.singularities))
        stray = self.undeclared_poles()
        if stray:
            raise ValueError(f"poles at undeclared points {sorted(stray)}")

    @property
    def field(self):
        return GF(self.p)

    def A(self, n: int):
        if n == 0:
            return mat_identity(self.field, self.rank)
        if not 1 <= n <= self.order_bound:
            raise IndexError(f"A_{n} is outside the order bound {self.order_bound}")
        return self.matrices[n - 1]

    def truncated(self, order_bound: int) -> StratModule:
        if order_bound > self.order_bound:
            raise ValueError("cannot extend a module beyond its order bound")
        return StratModule(self.p, self.rank, order_bound, self.matrices[:order_bound],
                           self.singularities, self.coordinate)

    def same_matrices(self, other: StratModule) -> bool:
        """Matrix-for-matrix equality (ignores the declared singular set)."""
        return (self.p == other.p and self.rank == other.rank
                and self.order_bound == other.order_bound and self.matrices == other.matrices)

    def __eq__(self, other):
        if not isinstance(other, StratModule):
            return NotImplemented
        return (self.same_matrices(other) and self.coordinate == other.coordinate
                and self.singularities == other.singularities)

    def __hash__(self):
        return hash((self.p, self.rank, self.order_bound, self.matrices))

    def undeclared_poles(self) -> set:
        """Finite points outside the declared set where some entry has a pole."""
        allowed = [c for c in self.singularities if c != INF_POINT]
        seen = set()
        out = set()
        for mat in self.matrices:
            for row in mat:
                for x in row:
                    den = x.den
                    if den.degree < 1 or den in seen:
                        continue
                    seen.add(den)
                    for c in allowed:
                        lin = Poly.linear(den.field, c)
                        while den.degree > 0 and den(c) == 0:
                            den = den // lin
                    if den.degree > 0:
                        out.update(c for c in range(self.p) if den(c) == 0)
        return out

    def pole_points(self) -> set:
        """Finite points where some stored entry has a pole."""
        pts = set()
        for mat in self.matrices:
            for row in mat:
                for x in row:
                    for c in range(self.p):
                        if x.den(c) == 0:
                            pts.add(c)
        return pts

    def to_json(self) -> dict:
        var = self.coordinate
        return {
            "p": self.p,
            "coordinate": var,
            "rank": self.rank,
            "order_bound": self.order_bound,
            "matrices": {
                str(n): [[format_ratfn(x, var) for x in row] for row in mat]
                for n, mat in enumerate(self.matrices, start=1)
            },
            "singularities": [format_point(pt) for pt in sorted(self.singularities, key=_point_key)],
        }

    @classmethod
    def from_json(cls, data) -> StratModule:
        if isinstance(data, str):
            data = json.loads(data)
        p = check_prime(int(data["p"]))
        var = data.get("coordinate", "z")
        rank = int(data["rank"])
        N = int(data["order_bound"])
        F = GF(p)
        mats = []
        for n in range(1, N + 1):
            raw = data["matrices"].get(str(n))
            if raw is None:
                raise ValueError(f"missing matrix A_{n}")
            mats.append(tuple(tuple(parse_ratfn(str(s), F, var) for s in row) for row in raw))
        sing = frozenset(parse_point(s, p) for s in data.get("singularities", []))
        return cls(p, rank, N, tuple(mats), sing, var)

    def __repr__(self):
        return f"<StratModule p={self.p} rank={self.rank} N={self.order_bound} sing={sorted(map(format_point, self.singularities))}>"


def _check_compatible(*mods):
    p = mods[0].p
    coord = mods[0].coordinate
    for m in mods[1:]:
        if m.p != p:
            raise ValueError(f"prime mismatch: {p} vs {m.p}")
        if m.coordinate != coord:
            raise ValueError(f"coordinate mismatch: {coord!r} vs {m.coordinate!r}")
    return p, coord, min(m.order_bound for m in mods)


# -- constructors -------------------------------------------------------------


def _as_exponent(alpha, p) -> PAdicRat:
    if isinstance(alpha, PAdicRat):
        if alpha.p != p:
            raise ValueError("exponent prime does not match")
        return alpha
    return PAdicRat(alpha, p)


def trivial_module(p: int, N: int, rank: int = 1, coordinate: str = "z") -> StratModule:
    F = GF(p)
    return StratModule(p, rank, N, tuple(mat_zero(F, rank) for _ in range(N)), frozenset(), coordinate)


def e_alpha(alpha, N: int, p: int | None = None, coordinate: str = "z") -> StratModule:
    """E(alpha): rank one with A_n = C(alpha, n) z^-n."""
    if p is None:
        p = alpha.p
    alpha = _as_exponent(alpha, p)
    if N < 1:
        raise ValueError("order bound must be positive")
    F = GF(p)
    mats = tuple(((RatFn.local_power(F, 0, -n) * binom_mod_p(alpha, n),),) for n in range(1, N + 1))
    return StratModule(p, 1, N, mats, frozenset({0, INF_POINT}), coordinate)


@dataclass(frozen=True)
class RankOneSymbol:
    """The formal product prod_i (z - c_i)^alpha_i."""

    p: int
    factors: tuple

    def __post_init__(self):
        check_prime(self.p)
        facs = tuple((int(c) % self.p, _as_exponent(a, self.p)) for c, a in self.factors)
        pts = [c for c, _ in facs]
        if len(set(pts)) != len(pts):
            raise ValueError("symbol points must be pairwise distinct")
        object.__setattr__(self, "factors", facs)

    def exponent_sum(self) -> PAdicRat:
        return sum((a for _, a in self.factors), PAdicRat(0, self.p))


def from_symbol(symbol: RankOneSymbol, N: int, coordinate: str = "z") -> StratModule:
    """Rank-one module of the symbol, f_n = sum over n_1+...+n_r = n of prod C(alpha_i, n_i)(z - c_i)^-n_i."""
    if N < 1:
        raise ValueError("order bound must be positive")
    p = symbol.p
    F = GF(p)
    coeffs = [RatFn.one(F)] + [RatFn.zero(F)] * N
    for c, alpha in symbol.factors:
        factor = [RatFn.local_power(F, c, -j) * binom_mod_p(alpha, j) for j in range(N + 1)]
        coeffs = [
            sum((coeffs[i] * factor[n - i] for i in range(n + 1) if coeffs[i] and factor[n - i]),
                RatFn.zero(F))
            for n in range(N + 1)
        ]
    mats = tuple(((coeffs[n],),) for n in range(1, N + 1))
    sing = frozenset({c for c, _ in symbol.factors} | {INF_POINT})
    return StratModule(p, 1, N, mats, sing, coordinate)


# -- iterativity --------------------------------------------------------------


@dataclass(frozen=True)
class IterativityReport:
    ok: bool
    n: int | None = None
    m: int | None = None
    discrepancy: tuple | None = None

    def __bool__(self):
        return self.ok

    def to_json(self, coordinate="z") -> dict:
        if self.ok:
            return {"ok": True}
        return {
            "ok": False,
            "n": self.n,
            "m": self.m,
            "discrepancy": [[format_ratfn(x, coordinate) for x in row] for row in self.discrepancy],
        }


def hasse_matrix_table(mats, N):
    """table[m][a] = D^(a)(A_m) entrywise, for a + m <= N."""
    table = {}
    for m, mat in enumerate(mats, start=1):
        top = N - m
        if top < 0:
            break
        cols = [[x.hasse_all(top) for x in row] for row in mat]
        table[m] = [tuple(tuple(cols[i][j][a] for j in range(len(mat))) for i in range(len(mat)))
                    for a in range(top + 1)]
    return table


def check_iterative_matrices(mats, p: int, N: int | None = None) -> IterativityReport:
    """Verify sum_{a+b=n} D^(a)(A_m) A_b = C(n+m, n) A_{n+m} for 1 <= n, m and n + m <= N."""
    if N is None:
        N = len(mats)
    if N < 2:
        return IterativityReport(True)
    d = len(mats[0])
    F = mats[0][0][0].field
    ident = mat_identity(F, d)
    A = [ident] + list(mats[:N])
    table = hasse_matrix_table(mats[: N - 1], N)
    for total in range(2, N + 1):
        for m in range(1, total):
            n = total - m
            lhs = mat_zero(F, d)
            for a in range(n + 1):
                term = table[m][a] if n - a == 0 else mat_mul(table[m][a], A[n - a])
                lhs = mat_add(lhs, term)
            c = lucas(n + m, n, p) if F.char else math.comb(n + m, n)
            rhs = mat_scale(A[n + m], c)
            if lhs != rhs:
                return IterativityReport(False, n, m, mat_sub(lhs, rhs))
    return IterativityReport(True)


def check_iterative(M: StratModule) -> IterativityReport:
    return check_iterative_matrices(M.matrices, M.p, M.order_bound)


# -- functors -----------------------------------------------------------------


def tensor(M1: StratModule, M2: StratModule) -> StratModule:
    """A_n = sum_{a+b=n} A_a (x) B_b."""
    p, coord, N = _check_compatible(M1, M2)
    F = GF(p)
    d = M1.rank * M2.rank
    mats = []
    for n in range(1, N + 1):
        acc = mat_zero(F, d)
        for a in range(n + 1):
            acc = mat_add(acc, mat_kron(M1.A(a), M2.A(n - a)))
        mats.append(acc)
    return StratModule(p, d, N, tuple(mats), M1.singularities | M2.singularities, coord)


def dual(M: StratModule) -> StratModule:
    """Matrices B_n with sum_{a+b=n} B_a^T A_b = 0 for n >= 1, so that w^T y is horizontal."""
    F = M.field
    d = M.rank
    Bt = [mat_identity(F, d)]
    for n in range(1, M.order_bound + 1):
        acc = mat_zero(F, d)
        for a in range(n):
            acc = mat_add(acc, mat_mul(Bt[a], M.A(n - a)))
        Bt.append(mat_scale(acc, -1))
    mats = tuple(mat_transpose(b) for b in Bt[1:])
    return StratModule(M.p, d, M.order_bound, mats, M.singularities, M.coordinate)


def direct_sum(M1: StratModule, M2: StratModule) -> StratModule:
    p, coord, N = _check_compatible(M1, M2)
    mats = tuple(mat_block(M1.A(n), M2.A(n)) for n in range(1, N + 1))
    return StratModule(p, M1.rank + M2.rank, N, mats, M1.singularities | M2.singularities, coord)


def conjugate(M: StratModule, B) -> StratModule:
    """Constant change of basis y = B w, giving B^-1 A_n B."""
    F = M.field
    p = M.p
    d = M.rank
    Bm = [[int(x) % p for x in row] for row in B]
    Binv = _inverse_mod_p(Bm, p)
    Br = tuple(tuple(RatFn.const(F, x) for x in row) for row in Bm)
    Bir = tuple(tuple(RatFn.const(F, x) for x in row) for row in Binv)
    mats = tuple(mat_mul(mat_mul(Bir, M.A(n)), Br) for n in range(1, M.order_bound + 1))
    return StratModule(p, d, M.order_bound, mats, M.singularities, M.coordinate)


def gauge(M: StratModule, P) -> StratModule:
    """Change of basis y = P w with P an invertible matrix of rational functions.

    The new matrices are sum_{a+b=n} D^(a)(P^-1) A_b P.
    """
    F = M.field
    d = M.rank
    N = M.order_bound
    P = tuple(tuple(x if isinstance(x, RatFn) else RatFn.const(F, x) for x in row) for row in P)
    Pinv = _inverse_ratfn(P)
    dPinv = [[x.hasse_all(N) for x in row] for row in Pinv]
    mats = []
    for n in range(1, N + 1):
        acc = mat_zero(F, d)
        for a in range(n + 1):
            Qa = tuple(tuple(dPinv[i][j][a] for j in range(d)) for i in range(d))
            acc = mat_add(acc, mat_mul(Qa, M.A(n - a)))
        mats.append(mat_mul(acc, P))
    return StratModule(M.p, d, N, tuple(mats), M.singularities, M.coordinate)


def _inverse_mod_p(B, p):
    d = len(B)
    aug = [list(row) + [int(i == j) for j in range(d)] for i, row in enumerate(B)]
    for c in range(d):
        piv = next((i for i in range(c, d) if aug[i][c] % p), None)
        if piv is None:
            raise ValueError("matrix is singular mod p")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = pow(aug[c][c], -1, p)
        aug[c] = [x * inv % p for x in aug[c]]
        for i in range(d):
            if i != c and aug[i][c] % p:
                f = aug[i][c]
                aug[i] = [(x - f * y) % p for x, y in zip(aug[i], aug[c])]
    return [row[d:] for row in aug]


def _inverse_ratfn(P):
    d = len(P)
    F = P[0][0].field
    one, zero = RatFn.one(F), RatFn.zero(F)
    aug = [list(row) + [one if i == j else zero for j in range(d)] for i, row in enumerate(P)]
    for c in range(d):
        piv = next((i for i in range(c, d) if aug[i][c]), None)
        if piv is None:
            raise ValueError("matrix is not invertible")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = aug[c][c].inverse()
        aug[c] = [x * inv for x in aug[c]]
        for i in range(d):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return tuple(tuple(row[d:]) for row in aug)


def pullback_matrices(M: StratModule, g: RatFn, N: int | None = None):
    """Matrices of M after substituting z = g(t).

    Taylor: y(g(t + T)) = sum_m A_m(g(t)) u(T)^m y(g(t)) with
    u(T) = g(t + T) - g(t) = sum_{k>=1} D^(k) g(t) T^k.
    """
    if N is None:
        N = M.order_bound
    F = M.field
    d = M.rank
    dg = g.hasse_all(N)
    if all(x.is_zero() for x in dg[1:2]):
        raise ValueError("substitution has vanishing first derivative (inseparable)")
    # powers[m][n]: coefficient of T^n in u(T)^m; polynomial g stays in Poly
    poly = g.is_poly()
    one = Poly(F, (1,)) if poly else RatFn.one(F)
    zero = Poly(F, ()) if poly else RatFn.zero(F)
    u = {k: (dg[k].num if poly else dg[k]) for k in range(1, N + 1) if dg[k]}
    powers = [[one] + [zero] * N]
    for m in range(1, N + 1):
        prev = powers[-1]
        nxt = [zero] * (N + 1)
        for i in range(m - 1, N + 1):
            if prev[i]:
                for k, uk in u.items():
                    if i + k <= N:
                        nxt[i + k] = nxt[i + k] + prev[i] * uk
        powers.append(nxt)
    if poly:
        powers = [[RatFn(c) for c in row] for row in powers]
    subst = [tuple(tuple(x.compose(g) for x in row) for row in M.A(m)) for m in range(1, N + 1)]
    mats = []
    for n in range(1, N + 1):
        acc = mat_zero(F, d)
        for m in range(1, n + 1):
            c = powers[m][n]
            if c:
                acc = mat_add(acc, mat_scale(subst[m - 1], c))
        mats.append(acc)
    return tuple(mats)


def pullback(M: StratModule, g: RatFn, singularities, coordinate: str = "t") -> StratModule:
    mats = pullback_matrices(M, g)
    return StratModule(M.p, M.rank, M.order_bound, mats, frozenset(singularities), coordinate)


def kummer_pullback(M: StratModule, e: int, coordinate: str | None = None) -> StratModule:
    """Base change along the tame covering z = t^e (p does not divide e)."""
    p = M.p
    if e < 1:
        raise ValueError("degree must be positive")
    if e % p == 0:
        raise ValueError(f"wild covering: {p} divides {e}")
    if e == 1:
        return M
    F = M.field
    sing = set()
    for pt in M.singularities:
        if pt in (0, INF_POINT):
            sing.add(pt)
            continue
        roots = [t for t in range(1, p) if pow(t, e, p) == pt]
        if len(roots) < e:
            raise ValueError(f"singular point {pt} has preimages outside F_{p}")
        sing.update(roots)
    g = RatFn(Poly.monomial(F, e))
    if coordinate is None:
        coordinate = M.coordinate
    return pullback(M, g, sing, coordinate)


# -- local analysis -----------------------------------------------------------


def local_matrices(M: StratModule, pt):
    """Matrices of M in the local parameter at pt (z - c, or 1/z at infinity)."""
    F = M.field
    if pt == INF_POINT:
        g = RatFn(Poly.const(F, 1), Poly.monomial(F, 1))
        return pullback_matrices(M, g)
    pt = int(pt) % M.p
    if pt == 0:
        return M.matrices
    return tuple(tuple(tuple(x.to_local(pt) for x in row) for row in mat) for mat in M.matrices)


def _regular_in(mats) -> bool:
    for n, mat in enumerate(mats, start=1):
        for row in mat:
            for x in row:
                if not x.is_zero() and x.order_at(0) < -n:
                    return False
    return True


def is_regular_singular_at(M: StratModule, pt) -> bool:
    """True iff t^n A_n has no pole at t = 0 for every stored n, t the local parameter."""
    return _regular_in(local_matrices(M, pt))


@dataclass(frozen=True)
class ExponentReport:
    """Local exponents at a point as digit windows a_0, ..., a_{K-1}, one per eigenline."""

    point: object
    exponents: tuple
    certified_digits: int
    p: int

    def truncations(self) -> list[int]:
        return [sum(d * self.p**i for i, d in enumerate(w)) for w in self.exponents]

    def matches(self, values) -> bool:
        """Multiset comparison against exact exponents, digitwise over the certified window."""
        want = sorted(tuple(_as_exponent(v, self.p).digits(self.certified_digits)) for v in values)
        return want == sorted(self.exponents)

    def to_json(self) -> dict:
        return {
            "point": format_point(self.point),
            "certified_digits": self.certified_digits,
            "digits": [list(w) for w in self.exponents],
        }


def certified_digit_count(p: int, N: int) -> int:
    """floor(log_p N) + 1: the number of k with p^k <= N."""
    k = 0
    pk = 1
    while pk * p <= N:
        pk *= p
        k += 1
    return k + 1


def residue_matrices(mats, p: int, K: int):
    """R_k = (t^{p^k} A_{p^k}) evaluated at t = 0, for k < K."""
    out = []
    for k in range(K):
        n = p**k
        mat = mats[n - 1]
        R = []
        for row in mat:
            r = []
            for x in row:
                if x.is_zero():
                    r.append(0)
                    continue
                y = x * RatFn.local_power(x.field, 0, n)
                r.append(int(y.value_at(0)))
            R.append(r)
        out.append(R)
    return out


def local_exponents(M: StratModule, pt, digits: int | None = None) -> ExponentReport:
    """Digits of the local exponents at pt from the residues of t^{p^k} A_{p^k}.

    The presented basis must be a split lattice at pt: the residues must
    commute and be simultaneously diagonalizable over F_p.
    """
    mats = local_matrices(M, pt)
    if not _regular_in(mats):
        raise ValueError(f"module is not regular singular at {format_point(pt)} in the presented basis")
    p = M.p
    K = certified_digit_count(p, M.order_bound)
    if digits is not None:
        if digits > K:
            raise ValueError(f"order bound {M.order_bound} certifies only {K} digits")
        K = digits
    R = residue_matrices(mats, p, K)
    for i in range(K):
        for j in range(i + 1, K):
            if _matmul_int(R[i], R[j], p) != _matmul_int(R[j], R[i], p):
                raise NotSplitError(f"residues at levels {i} and {j} do not commute")
    spaces = _joint_eigenspaces(R, p, M.rank)
    windows = []
    for vals, dim in spaces:
        windows.extend([vals] * dim)
    return ExponentReport(pt, tuple(sorted(windows)), K, p)


def _matmul_int(a, b, p):
    d = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(d)) % p for j in range(d)] for i in range(d)]


def isomorphic_rank_one(alpha, beta) -> bool:
    """E(alpha) and E(beta) are isomorphic iff alpha - beta is an integer."""
    a = alpha.value if isinstance(alpha, PAdicRat) else Fraction(alpha)
    b = beta.value if isinstance(beta, PAdicRat) else Fraction(beta)
    return (a - b).denominator == 1
