"""Explicit quantitative bounds behind the randomized VC and ladder theorems.

The bound for randomized shattering runs as follows.  Shrink the threshold
gap by a quarter on each side, cap the alternation of an indiscernible
sequence through the VC dimension, pick the least even length m that
outruns that cap, and ask Ramsey for an indiscernible m-sub-array.  Every
step is written out in ``BoundReport.derivation``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dividing_lines import IndexResult, randomized_vc, vc_dim
from .indiscernibles import RamseyOverflow, ramsey_upper_bound
from .structures import FormulaTable, format_rational

_BIG_EXPONENT = 256


def alternation_cap(d: int) -> int:
    """Safe upper bound on alternation along an indiscernible sequence when vc_dim = d.

    Alternation 2(d+1)-1 would shatter d+1 points, so 2d is already a bound;
    2d+2 keeps a margin.
    """
    if d < 0:
        raise ValueError("d must be non-negative")
    return 2 * d + 2


def _count_json(log2: int):
    return 1 << log2 if log2 <= _BIG_EXPONENT else f"2^{log2}"


@dataclass(frozen=True)
class BoundReport:
    vc_d: int
    r: Fraction
    s: Fraction
    k: int
    epsilon_adj: Fraction
    r_prime: Fraction
    s_prime: Fraction
    K_alt: int
    m_even: int
    n_ramsey: int
    color_count_log2: int
    N_bound: int | None  # None: the Ramsey bound passed 2^63
    derivation: tuple[str, ...] = field(default=(), compare=False)
    kind: str = "randomized_vc"

    @property
    def color_count(self) -> int:
        return 1 << self.color_count_log2

    @property
    def overflow(self) -> bool:
        return self.N_bound is None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "vc_d": self.vc_d,
            "r": format_rational(self.r),
            "s": format_rational(self.s),
            "k": self.k,
            "epsilon_adj": format_rational(self.epsilon_adj),
            "r_prime": format_rational(self.r_prime),
            "s_prime": format_rational(self.s_prime),
            "K_alt": self.K_alt,
            "m_even": self.m_even,
            "n_ramsey": self.n_ramsey,
            "color_count": _count_json(self.color_count_log2),
            "color_count_log2": self.color_count_log2,
            "N_bound": "overflow" if self.N_bound is None else self.N_bound,
            "derivation": list(self.derivation),
        }


def _thresholds(r, s) -> tuple[Fraction, Fraction]:
    r, s = Fraction(r), Fraction(s)
    if r >= s:
        raise ValueError(f"need r < s, got r={r}, s={s}")
    return r, s


def _ramsey_or_none(colors: int, n: int, m: int) -> int | None:
    try:
        return ramsey_upper_bound(colors, n, m)
    except RamseyOverflow:
        return None


def main_theorem_bound(d: int, r, s, k: int) -> BoundReport:
    """Length N that no (r, s)-shattered sequence of k-averages can reach when vc_dim = d.

    d = 0 is accepted: the cap K = 2 still bounds alternation along
    indiscernible sequences of a formula that shatters nothing.
    """
    r, s = _thresholds(r, s)
    if d < 0 or k < 1:
        raise ValueError("need d >= 0 and k >= 1")
    eps = (s - r) / 8
    rp, sp = r + 2 * eps, s - 2 * eps
    K = alternation_cap(d)
    gap = sp - rp
    # least even m with (m - 1) * gap > K
    m = int(K / gap) + 1
    while (m - 1) * gap <= K:
        m += 1
    if m % 2:
        m += 1
    n = m // 2
    log2 = 2 * k * 3**n
    N = _ramsey_or_none(1 << log2, n, m) if log2 <= 4096 else None
    steps = (
        f"epsilon = (s - r)/8 = {format_rational(eps)}",
        f"r' = r + 2*epsilon = {format_rational(rp)}, s' = s - 2*epsilon = {format_rational(sp)}",
        f"K = 2*d + 2 = {K} caps the alternation along a {d + 1}-indiscernible sequence",
        f"m = {m}: least even m with (m - 1)*(s' - r') = {format_rational((m - 1) * gap)} > {K}",
        f"n = m/2 = {n}",
        f"colours <= 2^(2*k*3^n) = 2^{log2}: one exists/forall bit per (E, F) pair and column position",
        "N = ramsey_upper_bound(colours, n, m) = " + ("overflow" if N is None else str(N)),
    )
    return BoundReport(d, r, s, k, eps, rp, sp, K, m, n, log2, N, steps)


def stability_bound(d_ladder: int, r, s, k: int) -> BoundReport:
    """Ladder length forced by an indiscernible extraction of size d_ladder + 1.

    With n = m = d_ladder + 1 the Ramsey step is trivial, so N = d_ladder + 1.
    """
    r, s = _thresholds(r, s)
    if d_ladder < 0 or k < 1:
        raise ValueError("need d_ladder >= 0 and k >= 1")
    eps = (s - r) / 8
    n = m = d_ladder + 1
    log2 = k * 2 ** (n + 1)
    N = _ramsey_or_none(1 << log2, n, m) if log2 <= 4096 else m
    steps = (
        f"n = m = d_ladder + 1 = {n}",
        f"colours <= 2^(k*2^(n+1)) = 2^{log2}: one exists/forall bit per subset I and tuple position",
        f"N = ramsey_upper_bound(colours, n, m) = {N} (m = n, a single n-set is monochromatic)",
    )
    return BoundReport(d_ladder, r, s, k, eps, r + 2 * eps, s - 2 * eps, 0, m, n, log2, N, steps,
                       kind="randomized_ladder")


@dataclass(frozen=True)
class BoundVerdict:
    status: str  # "ok", "ok (capped)" or "VIOLATION"
    vc_d: int
    report: BoundReport
    search: IndexResult
    n_max: int

    @property
    def violation(self) -> bool:
        return self.status == "VIOLATION"

    def to_json(self) -> dict:
        return {"status": self.status, "vc_d": self.vc_d, "n_max": self.n_max,
                "bound": self.report.to_json(), "search": self.search.to_json()}


def verify_bound(table: FormulaTable, r, s, k: int, t_max: int, search_cap: int = 8) -> BoundVerdict:
    """Check randomized_vc against main_theorem_bound(vc_dim(table), ...).

    The search runs up to min(N_bound, search_cap).  Reaching N_bound is a
    VIOLATION; reaching only the search cap leaves the verdict "ok (capped)".
    """
    d = vc_dim(table).value
    report = main_theorem_bound(d, r, s, k)
    N = report.N_bound
    n_max = search_cap if N is None else min(N, search_cap)
    res = randomized_vc(table, r, s, k, t_max, n_max)
    if N is not None and res.value >= N:
        status = "VIOLATION"
    elif res.capped:
        status = "ok (capped)"
    else:
        status = "ok"
    return BoundVerdict(status, d, report, res, n_max)
