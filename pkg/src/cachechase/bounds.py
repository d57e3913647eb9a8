"""Closed-form depth and cache bounds, thresholds and regime flags.

Every ceiling is computed on integers: ``ceil(log2 n / w)`` equals
``ceil(ceil_log2(n) / w)`` because ``log2 n <= B*w`` iff ``n <= 2**(B*w)``.
Probabilities are exact ``Fraction`` values.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .constructions import pd_schedule
from .errors import InvalidParameter
from .qengine import ceil_log2


def _cdiv(a: int, b: int) -> int:
    return -(-a // b)


def bandwidth_factor(n: int, width: int) -> int:
    """ceil(log2 n / width) for integer n >= 1, width >= 1."""
    return _cdiv(ceil_log2(n), width)


@dataclass(frozen=True)
class BoundsReport:
    n: int
    k: int
    s: int
    H: int
    m: int
    p: int
    W: int
    B: int
    lower_max: int
    lower_max_prop: int
    lower_product: int
    lower_product_conjectural: bool
    upper: int
    upper_serial: int
    upper_windowed: int
    s_star: Fraction
    barrier_regime: bool
    product_regime: bool
    min_cache_L: int
    min_cache_for_L: float
    min_cache_conjectural: bool

    @property
    def gap_ratio(self) -> Fraction:
        """upper / lower_product, reported rather than asserted."""
        return Fraction(self.upper, self.lower_product)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["s_star"] = float(self.s_star)
        d["s_star_exact"] = str(self.s_star)
        d["gap_ratio"] = float(self.gap_ratio)
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def bounds_report(n: int, k: int, s: int, H: int = 1, m: int = 8, p: int = 4,
                  L: int | None = None) -> BoundsReport:
    """Evaluate every bound for one parameter tuple.

    ``lower_max_prop`` is the unconditional max-bound with the ``ceil((k-1)/s)``
    reachability term.  Inside the product regime the reachability term is
    the sharper ``ceil(k/s)`` (sequential windows), and ``lower_max`` uses it.
    ``min_cache_for_L`` is evaluated at ``L`` (default: the upper bound).
    """
    for name, v in (("n", n), ("k", k), ("s", s), ("H", H), ("m", m), ("p", p)):
        if v < 1:
            raise InvalidParameter(f"{name} must be >= 1")
    hmp = H * m * p
    W = _cdiv(k, s)
    B = bandwidth_factor(n, hmp)
    product_regime = 16 * s * s <= n and n >= 4 * k
    barrier_regime = ceil_log2(n) <= hmp
    reach_prop = _cdiv(k - 1, s)
    reach = W if product_regime else reach_prop
    lower_max_prop = max(reach_prop, B)
    lower_max = max(reach, B)
    upper_windowed = W * ceil_log2(2 * s)
    sub = bandwidth_factor(n, m * p)
    upper = min(k, upper_windowed) * sub
    Lc = upper if L is None else L
    if Lc < 1:
        raise InvalidParameter("min-cache formula needs L >= 1")
    min_cache = max(k / Lc, k * math.log2(n) / (Lc * hmp))
    return BoundsReport(
        n=n, k=k, s=s, H=H, m=m, p=p, W=W, B=B,
        lower_max=lower_max, lower_max_prop=lower_max_prop,
        lower_product=W * B, lower_product_conjectural=True,
        upper=upper, upper_serial=k * sub, upper_windowed=upper_windowed * sub,
        s_star=Fraction(n * ceil_log2(k), k),
        barrier_regime=barrier_regime, product_regime=product_regime,
        min_cache_L=Lc, min_cache_for_L=min_cache, min_cache_conjectural=True,
    )


@dataclass(frozen=True)
class ObliviousBound:
    main: Fraction
    error: Fraction
    main_dominates: bool

    @property
    def total(self) -> Fraction:
        return self.main + self.error

    @property
    def vacuous(self) -> bool:
        return self.total >= 1


def main_term_dominates(n: int, s: int, T: int) -> bool:
    return s ** T >= 2 * T ** 3 * n ** (T - 1)


def oblivious_prob_bound(n: int, s: int, T: int) -> ObliviousBound:
    """(s/(n-T))^T + 2T^3/n for oblivious caches."""
    if T < 1:
        raise InvalidParameter("need T >= 1")
    if n <= T:
        raise InvalidParameter("need n >= T + 1")
    if s < 0:
        raise InvalidParameter("need s >= 0")
    return ObliviousBound(
        main=Fraction(s, n - T) ** T,
        error=Fraction(2 * T ** 3, n),
        main_dominates=main_term_dominates(n, s, T),
    )


def adaptive_prob(n: int, s: int) -> Fraction:
    if not 1 <= s <= n:
        raise InvalidParameter("need 1 <= s <= n")
    return Fraction(s, n)


def separation_ratio(n: int, s: int, T: int) -> tuple[Fraction, str]:
    """Lower bound on adaptive/oblivious success ratio and its regime."""
    if n < T + 1:
        raise InvalidParameter("need n >= T + 1")
    if main_term_dominates(n, s, T) and 4 * T * T <= n:
        return Fraction(n, s) ** (T - 1) / 4, "main-term-regime"
    return Fraction(s, 4 * T ** 3), "error-term-regime"


def depth_cache_curves(ks=(4, 8, 16), s_grid=(1, 2, 4, 8, 16), n: int = 16) -> list[dict]:
    """Rows of the depth-cache tradeoff: lower ceil(k/s), windowed doubling
    depth, and the serial depth k."""
    rows = []
    for k in ks:
        for s in s_grid:
            rows.append({
                "k": k, "s": s,
                "lower": _cdiv(k, s),
                "upper": pd_schedule(n, k, s).depth,
                "serial": k,
            })
    return rows


def bounds_table(report: BoundsReport) -> str:
    """Aligned text summary in the style of an architecture comparison."""
    r = report
    rows = [
        ("quantity", "value", "note"),
        ("W = ceil(k/s)", str(r.W), ""),
        ("B = ceil(log2 n / Hmp)", str(r.B), "barrier regime" if r.barrier_regime else "narrow regime"),
        ("lower (max, unconditional)", str(r.lower_max),
         "sequential windows" if r.product_regime else "max-bound"),
        ("lower (product)", str(r.lower_product), "conjectural"),
        ("upper (windowed doubling)", str(r.upper_windowed), ""),
        ("upper (serial, Theta(k))", str(r.upper_serial), ""),
        ("upper (min of the two)", str(r.upper), ""),
        ("s* = n ceil(log2 k)/k", f"{float(r.s_star):g}", ""),
        (f"min cache at L={r.min_cache_L}", f"{r.min_cache_for_L:.3f}", "conjectural, no constant"),
        ("product regime", str(r.product_regime), "s <= sqrt(n)/4 and n >= 4k"),
    ]
    w0 = max(len(a) for a, _, _ in rows)
    w1 = max(len(b) for _, b, _ in rows)
    head = f"n={r.n} k={r.k} s={r.s} H={r.H} m={r.m} p={r.p}"
    lines = [head] + [f"{a:<{w0}}  {b:>{w1}}  {c}".rstrip() for a, b, c in rows]
    return "\n".join(lines) + "\n"
