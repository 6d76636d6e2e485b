"""Stratified modules over F_p(z) and mod-p reduction of hypergeometric equations."""

from .ffalg import GF, QQ, INF_POINT, Poly, RatFn, Series, parse_ratfn, parse_series
from .padic import INF, DigitProfile, PAdicRat, binom_mod_p, pochhammer_val
from .stratmod import (
    StratModule,
    check_iterative,
    dual,
    e_alpha,
    from_symbol,
    kummer_pullback,
    local_exponents,
    tensor,
)
from .hypergeom import HGParams, digit_criterion, hypergeometric_module, reduce_mod_p
from .projsys import RankOneProjSys, compile_system, group_of_diagonal

__version__ = "0.1.0"
