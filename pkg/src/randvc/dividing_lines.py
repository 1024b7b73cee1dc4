"""Brute-force indices for IP, OP and SOP and their averaged analogues.

Every search returns a witness that can be re-verified against the table,
and the capped searches say so instead of silently truncating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Sequence

from .measures import AverageMeasure, Side
from .structures import FormulaTable, format_rational


def _check_thresholds(r, s) -> tuple[Fraction, Fraction]:
    r, s = Fraction(r), Fraction(s)
    if r >= s:
        raise ValueError(f"need r < s, got r={r}, s={s}")
    return r, s


def _fset(x) -> list[int]:
    return sorted(x)


# -- witnesses ---------------------------------------------------------------


@dataclass(frozen=True)
class ShatterWitness:
    rows: tuple[int, ...]
    witness_cols: dict  # frozenset of positions -> column

    def verify(self, table: FormulaTable) -> bool:
        n = len(self.rows)
        if len(self.witness_cols) != 1 << n:
            return False
        for I, col in self.witness_cols.items():
            for pos, a in enumerate(self.rows):
                if (table[a, col] == 1) != (pos in I):
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "rows": list(self.rows),
            "witness_cols": [
                {"subset": _fset(I), "col": c}
                for I, c in sorted(self.witness_cols.items(), key=lambda it: (len(it[0]), _fset(it[0])))
            ],
        }


@dataclass(frozen=True)
class LadderWitness:
    """phi(rows[i]; cols[j]) <= r for i < j and >= s for i >= j."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    r: Fraction
    s: Fraction

    def __len__(self) -> int:
        return len(self.rows)

    def verify(self, table: FormulaTable) -> bool:
        if len(self.rows) != len(self.cols):
            return False
        for i, a in enumerate(self.rows):
            for j, b in enumerate(self.cols):
                v = table[a, b]
                if (i < j and v > self.r) or (i >= j and v < self.s):
                    return False
        return True

    def to_json(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols),
                "r": format_rational(self.r), "s": format_rational(self.s)}


@dataclass(frozen=True)
class SOPChain:
    """Pointwise-monotone column chain with epsilon-strict steps.

    ``strict_witnesses[i]`` is a row b with phi(b; cols[i]) + eps <= phi(b; cols[i+1]).
    """

    cols: tuple[int, ...]
    strict_witnesses: tuple[int, ...]
    epsilon: Fraction

    def __len__(self) -> int:
        return len(self.cols)

    def verify(self, table: FormulaTable) -> bool:
        if len(self.strict_witnesses) != len(self.cols) - 1:
            return False
        for c, d, b in zip(self.cols, self.cols[1:], self.strict_witnesses):
            if any(table[x, c] > table[x, d] for x in range(table.rows)):
                return False
            if table[b, c] + self.epsilon > table[b, d]:
                return False
        return True

    def full_strictness(self, table: FormulaTable) -> bool:
        """The all-pairs form: phi(b_j; a_i) + eps <= phi(b_{i+1}; a_j) for i < j.

        Here a_i = cols[i] and b_{i+1} = strict_witnesses[i].  Implied by the
        step form on classical tables with eps = 1, not in general.
        """
        a, b = self.cols, (None,) + self.strict_witnesses
        m = len(a)
        for i in range(m):
            for j in range(i + 1, m):
                if table[b[j], a[i]] + self.epsilon > table[b[i + 1], a[j]]:
                    return False
        return True

    def to_json(self) -> dict:
        return {"cols": list(self.cols), "strict_witnesses": list(self.strict_witnesses),
                "epsilon": format_rational(self.epsilon)}


@dataclass(frozen=True)
class RandomShatterWitness:
    """Uniform measures (k-multisets of rows) shattered by averages of columns."""

    measures: tuple[tuple[int, ...], ...]
    witnesses: dict  # frozenset of positions -> tuple of columns (length t_I)
    r: Fraction
    s: Fraction

    def average_measures(self, table: FormulaTable) -> list[AverageMeasure]:
        return [AverageMeasure.uniform(table, ms, Side.ROW) for ms in self.measures]

    def verify(self, table: FormulaTable) -> bool:
        n = len(self.measures)
        if len(self.witnesses) != 1 << n:
            return False
        mus = self.average_measures(table)
        for I, cols in self.witnesses.items():
            for pos, mu in enumerate(mus):
                v = sum((mu(b) for b in cols), Fraction(0)) / len(cols)
                if (pos in I and v > self.r) or (pos not in I and v < self.s):
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "measures": [list(m) for m in self.measures],
            "witnesses": [
                {"subset": _fset(I), "cols": list(c)}
                for I, c in sorted(self.witnesses.items(), key=lambda it: (len(it[0]), _fset(it[0])))
            ],
            "r": format_rational(self.r),
            "s": format_rational(self.s),
        }


@dataclass(frozen=True)
class MeasureLadderWitness:
    """Ladder between averaged rows and (averaged) columns.

    Each entry of ``rows``/``cols`` is a multiset of table indices read as a
    uniform measure; a column of length 1 is a plain parameter.
    """

    rows: tuple[tuple[int, ...], ...]
    cols: tuple[tuple[int, ...], ...]
    r: Fraction
    s: Fraction

    def __len__(self) -> int:
        return len(self.rows)

    def value(self, table: FormulaTable, i: int, j: int) -> Fraction:
        mu, nu = self.rows[i], self.cols[j]
        tot = sum((table[a, b] for a in mu for b in nu), Fraction(0))
        return tot / (len(mu) * len(nu))

    def verify(self, table: FormulaTable) -> bool:
        n = len(self.rows)
        if len(self.cols) != n:
            return False
        for i in range(n):
            for j in range(n):
                v = self.value(table, i, j)
                if (i < j and v > self.r) or (i >= j and v < self.s):
                    return False
        return True

    def to_json(self) -> dict:
        return {"row_measures": [list(m) for m in self.rows], "col_measures": [list(m) for m in self.cols],
                "r": format_rational(self.r), "s": format_rational(self.s)}


@dataclass(frozen=True)
class IndexResult:
    """Outcome of a capped search: ``value`` is exact unless ``capped``."""

    index_name: str
    value: int
    capped: bool
    witness: object
    params: dict

    def to_json(self) -> dict:
        return {
            "index_name": self.index_name,
            "value": self.value,
            "capped": self.capped,
            "witness": self.witness.to_json() if self.witness is not None else None,
            "params": self.params,
        }


# -- shattering --------------------------------------------------------------


def _max_shattered(size: int, shattered: Callable[[tuple[int, ...]], bool], cap: int | None):
    """Largest shattered subset of range(size), lexicographically least among the largest.

    Shattered sets are closed under subsets, so candidates of size d+1 are
    joins of size-d survivors sharing a prefix whose every d-subset survived.
    Returns (size, set, capped).
    """
    level = [()] if shattered(()) else []
    if not level:
        return -1, None, False
    d = 0
    while level:
        if cap is not None and d >= cap:
            return d, level[0], True
        alive = set(level)
        nxt = []
        for x, a in enumerate(level):
            for b in level[x + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = a + (b[-1],)
                if d >= 1 and any(cand[:i] + cand[i + 1:] not in alive for i in range(d - 1)):
                    continue
                if shattered(cand):
                    nxt.append(cand)
        if d == 0:
            nxt = [(i,) for i in range(size) if shattered((i,))]
        if not nxt:
            return d, level[0], False
        level = nxt
        d += 1
    raise AssertionError("unreachable")


def vc_dim(table: FormulaTable, n_max: int | None = None) -> IndexResult:
    """VC dimension of the column family over the rows, with a shatter witness."""
    if not table.is_classical:
        raise ValueError("vc_dim needs a classical table; use randomized_vc with thresholds")
    masks = sorted(set(table.col_masks))

    def shattered(S):
        sm = 0
        for a in S:
            sm |= 1 << a
        return len({c & sm for c in masks}) == 1 << len(S)

    d, S, capped = _max_shattered(table.rows, shattered, n_max)
    wit = _shatter_witness(table, S)
    return IndexResult("vc_dim", d, capped, wit, {"n_max": n_max})


def _shatter_witness(table: FormulaTable, rows: Sequence[int]) -> ShatterWitness:
    first: dict[frozenset, int] = {}
    for j in range(table.cols):
        I = frozenset(p for p, a in enumerate(rows) if table[a, j] == 1)
        first.setdefault(I, j)
    return ShatterWitness(tuple(rows), first)


# -- ladders -----------------------------------------------------------------


def _longest_ladder(high_rows: Sequence[int], high_cols: Sequence[int], low_rows: Sequence[int],
                    n_rows: int, n_cols: int, cap: int | None):
    """Longest (a_i, b_i) sequence with value(a_i, b_j) low for i < j, high for i >= j.

    ``high_rows[a]`` is the bitmask of columns b with value(a, b) >= s,
    ``high_cols[b]`` the rows a with value(a, b) >= s and ``low_rows[a]``
    the columns with value(a, b) <= r.  Returns (length, rows, cols, capped).
    """
    limit = min(n_rows, n_cols) if cap is None else min(n_rows, n_cols, cap)

    @lru_cache(maxsize=None)
    def best(R: int, C: int) -> int:
        bound = min(R.bit_count(), C.bit_count(), limit)
        top = 0
        a_mask = R
        while a_mask and top < bound:
            a = (a_mask & -a_mask).bit_length() - 1
            a_mask &= a_mask - 1
            b_mask = high_rows[a] & C
            while b_mask and top < bound:
                b = (b_mask & -b_mask).bit_length() - 1
                b_mask &= b_mask - 1
                v = 1 + best(R & high_cols[b], C & low_rows[a]) if bound > 1 else 1
                if v > top:
                    top = v
        return min(top, limit)

    R, C = (1 << n_rows) - 1, (1 << n_cols) - 1
    n = best(R, C)
    rows, cols = [], []
    need = n
    # least (a, b) at each step that still reaches the optimum
    while need:
        done = False
        for a in range(n_rows):
            if not R >> a & 1:
                continue
            b_mask = high_rows[a] & C
            for b in range(n_cols):
                if not b_mask >> b & 1:
                    continue
                rest = best(R & high_cols[b], C & low_rows[a]) if need > 1 else 0
                if 1 + rest >= need:
                    rows.append(a)
                    cols.append(b)
                    R, C = R & high_cols[b], C & low_rows[a]
                    done = True
                    break
            if done:
                break
        assert done
        need -= 1
    capped = cap is not None and n >= cap
    return n, rows, cols, capped


def _ladder_masks(value: Callable[[int, int], Fraction], n_rows: int, n_cols: int, r, s):
    high_rows, low_rows = [0] * n_rows, [0] * n_rows
    high_cols = [0] * n_cols
    for a in range(n_rows):
        for b in range(n_cols):
            v = value(a, b)
            if v >= s:
                high_rows[a] |= 1 << b
                high_cols[b] |= 1 << a
            elif v <= r:
                low_rows[a] |= 1 << b
    return high_rows, high_cols, low_rows


def ladder_index(table: FormulaTable, r=0, s=1, n_max: int | None = None) -> IndexResult:
    """Longest half-graph pattern phi(a_i; b_j) <= r iff i < j (>= s otherwise)."""
    r, s = _check_thresholds(r, s)
    vals = table.values
    masks = _ladder_masks(lambda a, b: vals[a][b], table.rows, table.cols, r, s)
    n, rows, cols, capped = _longest_ladder(*masks, table.rows, table.cols, n_max)
    wit = LadderWitness(tuple(rows), tuple(cols), r, s)
    return IndexResult("ladder_index", n, capped, wit,
                       {"r": format_rational(r), "s": format_rational(s), "n_max": n_max})


def multisets(size: int, k: int) -> list[tuple[int, ...]]:
    """k-multisets of range(size) as sorted tuples, lexicographically."""
    return list(combinations_with_replacement(range(size), k))


def measure_ladder(table: FormulaTable, r, s, k: int, n_max: int | None = None) -> IndexResult:
    """Ladder between uniform k-multiset row measures and single columns."""
    r, s = _check_thresholds(r, s)
    if k < 1:
        raise ValueError("need k >= 1")
    mus = multisets(table.rows, k)
    vals = table.values
    sums = [[sum(vals[a][b] for a in mu) for b in range(table.cols)] for mu in mus]
    masks = _ladder_masks(lambda i, b: Fraction(sums[i][b]) / k, len(mus), table.cols, r, s)
    n, rows, cols, capped = _longest_ladder(*masks, len(mus), table.cols, n_max)
    wit = MeasureLadderWitness(tuple(mus[i] for i in rows), tuple((b,) for b in cols), r, s)
    return IndexResult("measure_ladder", n, capped, wit,
                       {"r": format_rational(r), "s": format_rational(s), "k": k, "n_max": n_max})


def randomized_ladder(table: FormulaTable, r, s, k: int, n_max: int | None = None) -> IndexResult:
    """Ladder for mu_i (x) nu_j with uniform k-multiset measures on both sides."""
    r, s = _check_thresholds(r, s)
    if k < 1:
        raise ValueError("need k >= 1")
    mus = multisets(table.rows, k)
    nus = multisets(table.cols, k)
    vals = table.values
    # partial sums over nu first: colsum[a][y] = sum_{b in nu_y} phi(a; b)
    colsum = [[sum(vals[a][b] for b in nu) for nu in nus] for a in range(table.rows)]
    k2 = k * k

    def value(i, y):
        return Fraction(sum(colsum[a][y] for a in mus[i])) / k2

    masks = _ladder_masks(value, len(mus), len(nus), r, s)
    n, rows, cols, capped = _longest_ladder(*masks, len(mus), len(nus), n_max)
    wit = MeasureLadderWitness(tuple(mus[i] for i in rows), tuple(nus[y] for y in cols), r, s)
    return IndexResult("randomized_ladder", n, capped, wit,
                       {"r": format_rational(r), "s": format_rational(s), "k": k, "n_max": n_max})


# -- strict order ------------------------------------------------------------


def sop_chain(table: FormulaTable, epsilon=1) -> IndexResult:
    """Longest path in the strict-dominance DAG on columns.

    c -> d when phi(b; c) <= phi(b; d) for every row b and some row gains at
    least epsilon.  Column sums strictly increase along edges, which gives
    the topological order.  The witness is the lexicographically least
    longest chain.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    cols = [table.column(j) for j in range(table.cols)]
    n = table.cols

    def edge(c, d):
        x, y = cols[c], cols[d]
        return all(u <= v for u, v in zip(x, y)) and any(u + epsilon <= v for u, v in zip(x, y))

    succ = [[d for d in range(n) if d != c and edge(c, d)] for c in range(n)]
    order = sorted(range(n), key=lambda c: sum(cols[c]), reverse=True)
    longest = [1] * n
    for c in order:
        if succ[c]:
            longest[c] = 1 + max(longest[d] for d in succ[c])
    top = max(longest)
    chain = [min(c for c in range(n) if longest[c] == top)]
    while longest[chain[-1]] > 1:
        cur = chain[-1]
        chain.append(min(d for d in succ[cur] if longest[d] == longest[cur] - 1))
    strict = tuple(
        min(b for b in range(table.rows) if table[b, c] + epsilon <= table[b, d])
        for c, d in zip(chain, chain[1:])
    )
    wit = SOPChain(tuple(chain), strict, epsilon)
    return IndexResult("sop_chain", top, False, wit, {"epsilon": format_rational(epsilon)})


# -- averaged shattering -----------------------------------------------------


def randomized_vc(table: FormulaTable, r, s, k: int, t_max: int, n_max: int | None = None) -> IndexResult:
    """Longest sequence of uniform k-multiset measures (r, s)-shattered by
    averages of at most ``t_max`` columns.

    Distinct measures are required (a repeated measure cannot be split), so
    the search runs over sets of sorted multisets.  For a column tuple B and
    a set S of measures, B realises the subset I of S when the measures in I
    average <= r and the rest >= s; S is shattered when all 2^|S| subsets
    are realised.
    """
    r, s = _check_thresholds(r, s)
    if k < 1 or t_max < 1:
        raise ValueError("need k, t_max >= 1")
    mus = multisets(table.rows, k)
    vals = table.values
    sums = [[sum(vals[a][b] for a in mu) for b in range(table.cols)] for mu in mus]
    concepts: dict[tuple[int, int], tuple[int, ...]] = {}
    for t in range(1, t_max + 1):
        lo, hi = r * k * t, s * k * t
        for B in combinations_with_replacement(range(table.cols), t):
            low = high = 0
            for i, row in enumerate(sums):
                v = sum(row[b] for b in B)
                if v <= lo:
                    low |= 1 << i
                elif v >= hi:
                    high |= 1 << i
            concepts.setdefault((low, high), B)
    pairs = [(low, low | high) for low, high in concepts]

    def shattered(S):
        sm = 0
        for i in S:
            sm |= 1 << i
        return len({low & sm for low, cover in pairs if cover & sm == sm}) == 1 << len(S)

    d, S, capped = _max_shattered(len(mus), shattered, n_max)
    wit = None
    if d >= 0:
        chosen = [mus[i] for i in S]
        witnesses: dict[frozenset, tuple[int, ...]] = {}
        for (low, high), B in concepts.items():
            if all((low | high) >> i & 1 for i in S):
                I = frozenset(p for p, i in enumerate(S) if low >> i & 1)
                prev = witnesses.get(I)
                if prev is None or (len(B), B) < (len(prev), prev):
                    witnesses[I] = B
        wit = RandomShatterWitness(tuple(chosen), witnesses, r, s)
    return IndexResult("randomized_vc", max(d, 0), capped, wit,
                       {"r": format_rational(r), "s": format_rational(s), "k": k,
                        "t_max": t_max, "n_max": n_max})


# -- constructive reductions -------------------------------------------------


def ladder_from_shatter(w: ShatterWitness) -> LadderWitness:
    """A shattered n-set gives a ladder of length n: column j cuts out {i >= j}."""
    n = len(w.rows)
    cols = tuple(w.witness_cols[frozenset(range(j, n))] for j in range(n))
    return LadderWitness(w.rows, cols, Fraction(0), Fraction(1))


def ladder_from_sop(chain: SOPChain) -> LadderWitness:
    """An epsilon=1 chain of length m gives a ladder of length m-1.

    Witness row w_t sits below cols[t-1] and above cols[t]; reading both
    sequences backwards turns 'high iff column index >= t' into the ladder
    pattern 'high iff i >= j'.
    """
    m = len(chain.cols)
    w = (None,) + chain.strict_witnesses
    rows = tuple(w[m - 1 - p] for p in range(m - 1))
    cols = tuple(chain.cols[m - 1 - q] for q in range(m - 1))
    return LadderWitness(rows, cols, Fraction(0), Fraction(1))
