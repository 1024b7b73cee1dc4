"""phi-n-types, indiscernible arrays, average-threshold types and Ramsey extraction."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from typing import Callable, Hashable, NamedTuple, Sequence

from .structures import FormulaTable


class Quantifier(str, Enum):
    EXISTS = "exists"
    FORALL = "forall"


class Verdict(NamedTuple):
    holds: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.holds


def _disjoint_pairs(n: int):
    """All (E, F) with E, F disjoint subsets of range(n), as bitmasks."""
    for assign in product(range(3), repeat=n):
        e = f = 0
        for i, a in enumerate(assign):
            if a == 0:
                e |= 1 << i
            elif a == 1:
                f |= 1 << i
        yield e, f


def _mask_to_set(mask: int) -> frozenset[int]:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def column_patterns(table: FormulaTable, rows: Sequence[int]) -> frozenset[int]:
    """Set of bit patterns (bit i = phi(rows[i]; b)) realised by the columns b.

    On classical tables this set determines the phi-n-type of ``rows`` and
    is recovered from it by the exists-entries with E | F = everything.
    """
    vals = table.values
    pats = set()
    for j in range(table.cols):
        p = 0
        for i, a in enumerate(rows):
            if vals[a][j]:
                p |= 1 << i
        pats.add(p)
    return frozenset(pats)


@dataclass(frozen=True, eq=False)
class PhiNType:
    """Truth values of every phi-n-formula on a fixed n-tuple of rows.

    Keys are ``(E, F, quantifier)`` with E, F disjoint frozensets of positions.
    """

    n: int
    entries: dict

    def __getitem__(self, key) -> bool:
        e, f, q = key
        return self.entries[(frozenset(e), frozenset(f), Quantifier(q))]

    @property
    def key(self) -> tuple[bool, ...]:
        return tuple(v for _, v in sorted(self.entries.items(), key=_entry_order))

    def __eq__(self, other):
        return isinstance(other, PhiNType) and self.entries == other.entries

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return len(self.entries)


def _entry_order(item):
    (e, f, q), _ = item
    return (sorted(e), sorted(f), q.value)


def phi_n_type(rows: Sequence[int], table: FormulaTable) -> PhiNType:
    if not table.is_classical:
        raise ValueError("phi-n-types need a classical table; use a_type for continuous tables")
    n = len(rows)
    if n < 1:
        raise ValueError("need n >= 1")
    for a in rows:
        table.check_row(a)
    pats = column_patterns(table, rows)
    full = (1 << n) - 1
    entries = {}
    for e, f in _disjoint_pairs(n):
        E, F = _mask_to_set(e), _mask_to_set(f)
        entries[(E, F, Quantifier.EXISTS)] = any(p & e == e and p & f == 0 for p in pats)
        # every column satisfies  OR_{E} phi  OR  OR_{F} not phi
        entries[(E, F, Quantifier.FORALL)] = all(p & e or ~p & full & f for p in pats)
    return PhiNType(n, entries)


# -- arrays ------------------------------------------------------------------


@dataclass(frozen=True)
class RowArray:
    """An (m, k)-array of row indices of ``table``."""

    cells: tuple[tuple[int, ...], ...]
    table: FormulaTable

    def __post_init__(self):
        cells = tuple(tuple(int(c) for c in row) for row in self.cells)
        object.__setattr__(self, "cells", cells)
        if not cells or not cells[0]:
            raise ValueError("array needs m >= 1 and k >= 1")
        k = len(cells[0])
        for row in cells:
            if len(row) != k:
                raise ValueError("ragged array")
            for c in row:
                self.table.check_row(c)

    @property
    def m(self) -> int:
        return len(self.cells)

    @property
    def k(self) -> int:
        return len(self.cells[0])

    @classmethod
    def sequence(cls, rows: Sequence[int], table: FormulaTable) -> RowArray:
        """The (m, 1)-array of a sequence of rows."""
        return cls(tuple((a,) for a in rows), table)

    def sub(self, indices: Sequence[int]) -> RowArray:
        return RowArray(tuple(self.cells[i] for i in indices), self.table)


def format_array(arr: RowArray) -> str:
    lines = [f"array v1 {arr.m} {arr.k}"]
    lines += [" ".join(str(c) for c in row) for row in arr.cells]
    return "\n".join(lines) + "\n"


def parse_array(text: str, table: FormulaTable) -> RowArray:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    m = re.match(r"^array\s+v1\s+(\d+)\s+(\d+)$", lines[0]) if lines else None
    if m is None:
        raise ValueError("malformed array header")
    rows, k = int(m.group(1)), int(m.group(2))
    body = [tuple(int(x) for x in ln.replace(",", " ").split()) for ln in lines[1:]]
    if len(body) != rows or any(len(r) != k for r in body):
        raise ValueError(f"array body does not match header {rows}x{k}")
    return RowArray(tuple(body), table)


def _check_n(arr: RowArray, n: int) -> None:
    if n < 1:
        raise ValueError("need n >= 1")
    if n > arr.m:
        raise ValueError(f"n={n} exceeds array length m={arr.m}")


def _phi_key(table: FormulaTable) -> Callable[[tuple[int, ...]], Hashable]:
    if not table.is_classical:
        raise ValueError("phi-n-indiscernibility needs a classical table")

    @lru_cache(maxsize=None)
    def key(rows):
        return column_patterns(table, rows)

    return key


def is_indiscernible(arr: RowArray, n: int) -> Verdict:
    """phi-k-n-indiscernibility with column-synchronised comparison.

    Witness on failure: ``(i_tuple, j_tuple, l)`` whose l-th column types differ.
    """
    _check_n(arr, n)
    key = _phi_key(arr.table)
    for l in range(arr.k):
        ref_idx = None
        ref = None
        for idx in combinations(range(arr.m), n):
            tp = key(tuple(arr.cells[i][l] for i in idx))
            if ref_idx is None:
                ref_idx, ref = idx, tp
            elif tp != ref:
                return Verdict(False, (ref_idx, idx, l))
    return Verdict(True)


def _strong_check(arr: RowArray, n: int, key) -> Verdict:
    ref_idx = tuple(range(n))
    ref = key(tuple(arr.cells[i][0] for i in ref_idx))
    for idx in combinations(range(arr.m), n):
        for f in product(range(arr.k), repeat=n):
            tp = key(tuple(arr.cells[i][c] for i, c in zip(idx, f)))
            if tp != ref:
                return Verdict(False, (ref_idx, idx, f))
    return Verdict(True)


def is_strongly_indiscernible(arr: RowArray, n: int) -> Verdict:
    """Every (i_1<...<i_n, f) selection has the type of the first-column reference.

    Witness on failure: ``(reference_tuple, j_tuple, f)``.
    """
    _check_n(arr, n)
    return _strong_check(arr, n, _phi_key(arr.table))


# -- average-threshold types -------------------------------------------------


@dataclass(frozen=True, eq=False)
class AType:
    """Truth values of the A-conditions: keys ``(I, quantifier)``, I a frozenset of positions."""

    n: int
    k: int
    r: Fraction
    s: Fraction
    t: int
    entries: dict

    def __getitem__(self, key) -> bool:
        i, q = key
        return self.entries[(frozenset(i), Quantifier(q))]

    @property
    def key(self) -> tuple[bool, ...]:
        return tuple(v for _, v in sorted(self.entries.items(), key=lambda it: (sorted(it[0][0]), it[0][1].value)))

    def __eq__(self, other):
        return isinstance(other, AType) and self.entries == other.entries

    def __hash__(self):
        return hash(self.key)


def _category_vectors(table: FormulaTable, tuples, r: Fraction, s: Fraction, t: int) -> frozenset:
    """(low mask, high mask) for every t-multiset of columns."""
    vals = table.values
    k = len(tuples[0])
    sums = [[sum((vals[a][j] for a in tup), Fraction(0)) for j in range(table.cols)] for tup in tuples]
    lo, hi = r * k * t, s * k * t
    out = set()
    for cols in combinations_with_replacement(range(table.cols), t):
        low = high = 0
        for i, row in enumerate(sums):
            v = sum(row[j] for j in cols)
            if v <= lo:
                low |= 1 << i
            elif v >= hi:
                high |= 1 << i
        out.add((low, high))
    return frozenset(out)


def _atype_entries(n: int, vectors) -> dict:
    full = (1 << n) - 1
    entries = {}
    for I in range(1 << n):
        S = _mask_to_set(I)
        comp = full & ~I
        entries[(S, Quantifier.EXISTS)] = any(lo & I == I and hi & comp == comp for lo, hi in vectors)
        entries[(S, Quantifier.FORALL)] = all(lo & I or hi & comp for lo, hi in vectors)
    return entries


def a_type(tuples: Sequence[Sequence[int]], table: FormulaTable, r, s, t: int | None = None) -> AType:
    """A-type of n k-tuples of rows against t-tuples of columns.

    Position i is averaged over its k-tuple and over the t columns; it is
    'low' when the average is <= r and 'high' when >= s.  The exists-entry
    for I asks for a column tuple making I low and the rest high; the
    forall-entry asks that every column tuple make some i in I low or some
    i outside I high.  ``t`` defaults to k.
    """
    r, s = Fraction(r), Fraction(s)
    if r >= s:
        raise ValueError(f"need r < s, got r={r}, s={s}")
    tuples = [tuple(tup) for tup in tuples]
    if not tuples or not tuples[0]:
        raise ValueError("need n >= 1 nonempty tuples")
    k = len(tuples[0])
    if any(len(tup) != k for tup in tuples):
        raise ValueError("tuples must share one length k")
    for tup in tuples:
        for a in tup:
            table.check_row(a)
    t = k if t is None else t
    if t < 1:
        raise ValueError("need t >= 1")
    n = len(tuples)
    return AType(n, k, r, s, t, _atype_entries(n, _category_vectors(table, tuples, r, s, t)))


def _a_key(table: FormulaTable, r, s, t: int):
    r, s = Fraction(r), Fraction(s)
    if r >= s:
        raise ValueError(f"need r < s, got r={r}, s={s}")

    @lru_cache(maxsize=None)
    def key(tuples):
        n = len(tuples)
        return tuple(sorted(_atype_entries(n, _category_vectors(table, tuples, r, s, t)).items(),
                            key=lambda it: (it[0][1].value, sorted(it[0][0]))))

    return key


def is_strongly_a_indiscernible(arr: RowArray, n: int, r, s, t: int | None = None) -> Verdict:
    """Strong indiscernibility with A-types of single elements (witness length t, default k)."""
    _check_n(arr, n)
    key = _a_key(arr.table, r, s, arr.k if t is None else t)
    return _strong_check(arr, n, lambda rows: key(tuple((a,) for a in rows)))


def is_a_indiscernible(arr: RowArray, n: int, r, s, t: int = 1) -> Verdict:
    """Sequence indiscernibility of the array's k-tuples under A-types."""
    _check_n(arr, n)
    key = _a_key(arr.table, r, s, t)
    ref_idx = ref = None
    for idx in combinations(range(arr.m), n):
        tp = key(tuple(arr.cells[i] for i in idx))
        if ref_idx is None:
            ref_idx, ref = idx, tp
        elif tp != ref:
            return Verdict(False, (ref_idx, idx))
    return Verdict(True)


# -- Ramsey extraction -------------------------------------------------------

FLAVORS = ("plain", "strong", "a_type", "a_tuple")


def subset_color(arr: RowArray, n: int, flavor: str = "plain", r=0, s=1, t: int | None = None):
    """Colour function on n-subsets (sorted index tuples) of the array's rows.

    A sub-array passes the flavor's indiscernibility check iff all its
    n-subsets share one colour and that colour is admissible (see
    ``color_admissible``).
    """
    table = arr.table
    cells = arr.cells
    if flavor == "plain":
        key = _phi_key(table)
        return lambda idx: tuple(key(tuple(cells[i][l] for i in idx)) for l in range(arr.k))
    if flavor == "a_tuple":
        key = _a_key(table, r, s, 1 if t is None else t)
        return lambda idx: key(tuple(cells[i] for i in idx))
    if flavor == "strong":
        key = _phi_key(table)
    elif flavor == "a_type":
        akey = _a_key(table, r, s, arr.k if t is None else t)
        key = lambda rows: akey(tuple((a,) for a in rows))  # noqa: E731
    else:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    fs = list(product(range(arr.k), repeat=n))
    # colour = (first-column type, set of all selection types)
    return lambda idx: (
        key(tuple(cells[i][0] for i in idx)),
        frozenset(key(tuple(cells[i][c] for i, c in zip(idx, f))) for f in fs),
    )


def color_admissible(flavor: str, color) -> bool:
    if flavor in ("strong", "a_type"):
        first, every = color
        return every == frozenset([first])
    return True


def array_colors(arr: RowArray, n: int, flavor: str = "plain", r=0, s=1, t: int | None = None) -> set:
    """Distinct colours over all n-subsets of rows."""
    color = subset_color(arr, n, flavor, r, s, t)
    return {color(idx) for idx in combinations(range(arr.m), n)}


@dataclass(frozen=True)
class Extraction:
    indices: tuple[int, ...]
    array: RowArray


def ramsey_extract(arr: RowArray, n: int, m: int, flavor: str = "plain", *, r=0, s=1,
                   t: int | None = None) -> Extraction | None:
    """Lexicographically least m-subsequence whose sub-array is indiscernible.

    Depth-first search in lexicographic order; a prefix is abandoned as soon
    as one of its n-subsets breaks the condition, which cannot be repaired
    by adding rows.  Returns None when no subsequence qualifies.
    """
    if not 1 <= n <= m <= arr.m:
        raise ValueError(f"need 1 <= n <= m <= array length, got n={n}, m={m}, length={arr.m}")
    color = subset_color(arr, n, flavor, r, s, t)
    chosen: list[int] = []
    ref = [None]

    def extend(start: int) -> bool:
        if len(chosen) == m:
            return True
        # leave room for the remaining picks
        for x in range(start, arr.m - (m - len(chosen)) + 1):
            ok = True
            saved = ref[0]
            if len(chosen) >= n - 1:
                for rest in combinations(chosen, n - 1):
                    c = color(rest + (x,))
                    if ref[0] is None:
                        if not color_admissible(flavor, c):
                            ok = False
                            break
                        ref[0] = c
                    elif c != ref[0]:
                        ok = False
                        break
            if ok:
                chosen.append(x)
                if extend(x + 1):
                    return True
                chosen.pop()
            ref[0] = saved
        return False

    if not extend(0):
        return None
    idx = tuple(chosen)
    return Extraction(idx, arr.sub(idx))


class RamseyOverflow(OverflowError):
    def __init__(self):
        super().__init__("bound exceeds 2^63")


_LIMIT = 2**63
_TIGHT_BUDGET = 200_000
_TIGHT_DEPTH = 300


def _tight_bound(n: int, ms: tuple[int, ...]) -> int:
    """Off-diagonal hypergraph Ramsey upper bound by vertex-deletion induction.

    R_n(m_1..m_c) <= R_{n-1}(R_n(m - e_1), ..., R_n(m - e_c)) + 1, with
    R_1(m_1..m_c) = sum(m_i - 1) + 1 and R_n(...) = m_i whenever m_i < n.
    Raises RamseyOverflow past 2^63 and _BudgetExceeded past the call budget.
    """
    calls = [0]

    @lru_cache(maxsize=None)
    def rec(n: int, ms: tuple[int, ...]) -> int:
        calls[0] += 1
        # recursion depth grows with sum(ms); leave deep cases to the stepping bound
        if calls[0] > _TIGHT_BUDGET or sum(ms) > _TIGHT_DEPTH:
            raise _BudgetExceeded
        small = [x for x in ms if x < n]
        if small:
            return min(small)
        if n == 1:
            val = sum(x - 1 for x in ms) + 1
        else:
            inner = []
            for i in range(len(ms)):
                dec = list(ms)
                dec[i] -= 1
                inner.append(rec(n, tuple(sorted(dec))))
            val = rec(n - 1, tuple(sorted(inner))) + 1
        if val > _LIMIT:
            raise RamseyOverflow
        return val

    return rec(n, tuple(sorted(ms)))


class _BudgetExceeded(Exception):
    pass


def _stepping_bound(colors: int, n: int, m: int) -> int:
    """Diagonal bound through end-homogeneous sequences (any number of colours).

    An end-homogeneous sequence of length L = R_{n-1}(m-1) + 1 contains a
    monochromatic m-set.  It is built greedily: after choosing j points the
    candidate pool splits into colors^C(j, n-2) classes and the largest one
    is kept, so pool sizes S_j = (S_{j+1} - 1) * colors^C(j, n-2) + 2
    backwards from S_{L-1} = 1 give N = S_0.
    """
    L = ramsey_upper_bound(colors, n - 1, m - 1) + 1
    S = 1
    bits = math.log2(colors)
    for j in range(L - 2, -1, -1):
        e = math.comb(j, n - 2)
        if e * bits > 64:
            raise RamseyOverflow
        S = (S - 1) * colors**e + 2
        if S > _LIMIT:
            raise RamseyOverflow
    return S


def ramsey_upper_bound(colors: int, n: int, m: int) -> int:
    """N such that every colouring of the n-subsets of an N-set with ``colors``
    colours has a monochromatic m-subset.

    Pigeonhole for n = 1, ``m`` when m = n or colors = 1; otherwise the
    smaller of the off-diagonal induction (when cheap to evaluate) and the
    end-homogeneous stepping bound.  Raises RamseyOverflow past 2^63.
    """
    if colors < 1 or not 1 <= n <= m:
        raise ValueError(f"need colors >= 1 and 1 <= n <= m, got {colors}, {n}, {m}")
    if n == 1:
        val = colors * (m - 1) + 1
        if val > _LIMIT:
            raise RamseyOverflow
        return val
    if m == n or colors == 1:
        return m
    candidates = []
    if colors <= 8:
        try:
            candidates.append(_tight_bound(n, (m,) * colors))
        except (RamseyOverflow, _BudgetExceeded):
            pass
    try:
        candidates.append(_stepping_bound(colors, n, m))
    except RamseyOverflow:
        pass
    if not candidates:
        raise RamseyOverflow
    return min(candidates)


def find_monochromatic(coloring: Callable[[tuple[int, ...]], Hashable], N: int, n: int, m: int):
    """Brute force: first m-subset of range(N) whose n-subsets share one colour."""
    for S in combinations(range(N), m):
        colors = {coloring(T) for T in combinations(S, n)}
        if len(colors) <= 1:
            return S
    return None


# -- alternation and the shattering lemma ------------------------------------


def alternation(table: FormulaTable, seq: Sequence[int], col: int) -> Fraction:
    """Total variation of phi(a_i; b) along the sequence."""
    if len(seq) < 2:
        raise ValueError("alternation needs a sequence of length >= 2")
    table.check_col(col)
    vals = table.values
    return sum((abs(vals[b][col] - vals[a][col]) for a, b in zip(seq, seq[1:])), Fraction(0))


class LemmaVerdict(str, Enum):
    PREMISES_FAIL = "premises-fail"
    SHATTERED = "shattered"
    COUNTEREXAMPLE = "COUNTEREXAMPLE"


@dataclass(frozen=True)
class LemmaCheck:
    verdict: LemmaVerdict
    column: int | None = None  # the high-alternation parameter, when premises hold
    missing: frozenset | None = None  # an unrealised subset, for counterexamples


def shatter_witnesses(table: FormulaTable, rows: Sequence[int]) -> dict[frozenset, int] | None:
    """For each subset I of positions, the least column cutting out exactly I; None if some I is missed."""
    n = len(rows)
    found: dict[int, int] = {}
    vals = table.values
    for j in range(table.cols):
        p = 0
        for i, a in enumerate(rows):
            if vals[a][j]:
                p |= 1 << i
        # a repeated row can never be split, so its patterns never complete
        found.setdefault(p, j)
    if any(p not in found for p in range(1 << n)):
        return None
    return {_mask_to_set(p): found[p] for p in range(1 << n)}


def lemma_shatter_check(table: FormulaTable, seq: Sequence[int], n: int) -> LemmaCheck:
    """If ``seq`` is phi-1-n-indiscernible and some column alternates at least
    2n-1 times along it, its first n elements must be shattered."""
    if not table.is_classical:
        raise ValueError("lemma_shatter_check needs a classical table")
    seq = tuple(seq)
    if n < 1 or 2 * n > len(seq):
        raise ValueError(f"need 1 <= n and 2n <= m, got n={n}, m={len(seq)}")
    if not is_indiscernible(RowArray.sequence(seq, table), n):
        return LemmaCheck(LemmaVerdict.PREMISES_FAIL)
    col = next((j for j in range(table.cols) if alternation(table, seq, j) >= 2 * n - 1), None)
    if col is None:
        return LemmaCheck(LemmaVerdict.PREMISES_FAIL)
    head = seq[:n]
    pats = column_patterns(table, head)
    missing = [p for p in range(1 << n) if p not in pats]
    if missing:
        return LemmaCheck(LemmaVerdict.COUNTEREXAMPLE, col, _mask_to_set(missing[0]))
    return LemmaCheck(LemmaVerdict.SHATTERED, col)
