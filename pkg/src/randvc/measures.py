"""Finitely supported average measures over the rows or columns of a table."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations_with_replacement, islice
from typing import Iterable, Sequence

import numpy as np

from .structures import FormulaTable, format_rational, parse_rational


class Side(str, Enum):
    ROW = "row"
    COLUMN = "column"


class Threshold(str, Enum):
    LOW = "low"
    HIGH = "high"
    NEITHER = "neither"


@dataclass(frozen=True)
class AverageMeasure:
    """Rational-weighted distribution on the rows (or columns) of ``table``.

    ``support`` is kept sorted by index with duplicates merged, so two
    measures with the same weights compare equal.
    """

    side: Side
    support: tuple[tuple[int, Fraction], ...]
    table: FormulaTable

    def __post_init__(self):
        side = Side(self.side)
        object.__setattr__(self, "side", side)
        merged: dict[int, Fraction] = {}
        for idx, w in self.support:
            w = Fraction(w)
            if w <= 0:
                raise ValueError(f"weight {w} on index {idx} is not positive")
            merged[int(idx)] = merged.get(int(idx), Fraction(0)) + w
        if not merged:
            raise ValueError("empty support")
        bound = self.table.rows if side is Side.ROW else self.table.cols
        for idx in merged:
            if not 0 <= idx < bound:
                raise IndexError(f"{side.value} index {idx} out of range 0..{bound - 1}")
        if sum(merged.values()) != 1:
            raise ValueError(f"weights sum to {sum(merged.values())}, not 1")
        object.__setattr__(self, "support", tuple(sorted(merged.items())))

    @classmethod
    def uniform(cls, table: FormulaTable, indices: Iterable[int], side=Side.ROW) -> AverageMeasure:
        """Ave(a_1, ..., a_k): uniform over a multiset of indices."""
        indices = list(indices)
        if not indices:
            raise ValueError("empty support")
        w = Fraction(1, len(indices))
        return cls(side, tuple((i, w) for i in indices), table)

    @classmethod
    def point(cls, table: FormulaTable, index: int, side=Side.ROW) -> AverageMeasure:
        return cls(side, ((index, Fraction(1)),), table)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.support)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(w for _, w in self.support)

    def __call__(self, other: int) -> Fraction:
        """Measure of phi(x; b) at column ``other`` (or phi(a; y) at row ``other``)."""
        t = self.table
        if self.side is Side.ROW:
            t.check_col(other)
            return sum((w * t.values[i][other] for i, w in self.support), Fraction(0))
        t.check_row(other)
        row = t.values[other]
        return sum((w * row[j] for j, w in self.support), Fraction(0))

    def values(self) -> list[Fraction]:
        """The measure evaluated at every index of the opposite side."""
        t = self.table
        n = t.cols if self.side is Side.ROW else t.rows
        return [self(j) for j in range(n)]

    def mix(self, other: AverageMeasure, lam) -> AverageMeasure:
        """Convex combination lam*self + (1-lam)*other."""
        lam = Fraction(lam)
        if self.side is not other.side or self.table != other.table:
            raise ValueError("mixing measures of different sides or tables")
        parts = [(i, lam * w) for i, w in self.support] + [(i, (1 - lam) * w) for i, w in other.support]
        return AverageMeasure(self.side, tuple((i, w) for i, w in parts if w), self.table)


def eval_measure(mu: AverageMeasure, col: int) -> Fraction:
    """Sum of weight_i * entry(i, col) for a row measure."""
    if mu.side is not Side.ROW:
        raise ValueError("eval_measure expects a row measure")
    return mu(col)


def ave_threshold(table: FormulaTable, a: int, cols: Sequence[int], r, s) -> Threshold:
    r, s = Fraction(r), Fraction(s)
    if r >= s:
        raise ValueError(f"need r < s, got r={r}, s={s}")
    if not cols:
        raise ValueError("empty column tuple")
    table.check_row(a)
    for j in cols:
        table.check_col(j)
    v = sum((table[a, j] for j in cols), Fraction(0)) / len(cols)
    if v <= r:
        return Threshold.LOW
    if v >= s:
        return Threshold.HIGH
    return Threshold.NEITHER


def product_measure(mu: AverageMeasure, nu: AverageMeasure) -> Fraction:
    """mu (x) nu applied to phi(x;y) for a row measure mu and column measure nu."""
    if mu.side is not Side.ROW or nu.side is not Side.COLUMN:
        raise ValueError("product_measure expects (row measure, column measure)")
    if mu.table != nu.table:
        raise ValueError("measures live on different tables")
    vals = mu.table.values
    return sum(
        (wi * vj * vals[i][j] for i, wi in mu.support for j, vj in nu.support),
        Fraction(0),
    )


def sup_error(mu: AverageMeasure, sample: Sequence[int]) -> Fraction:
    """sup over columns of |mu(phi(x;b)) - Ave(sample)(phi(x;b))|, exact."""
    t = mu.table
    n = len(sample)
    worst = Fraction(0)
    for j in range(t.cols):
        ave = Fraction(sum(t.values[i][j] for i in sample)) / n
        worst = max(worst, abs(mu(j) - ave))
    return worst


# -- sample search -----------------------------------------------------------

_CHUNK = 4096


def _first_sample(mu: AverageMeasure, epsilon: Fraction, n: int, budget: int | None):
    """Lexicographically least n-multiset of support rows within epsilon, or None.

    Raises ``_BudgetExceeded`` when the number of multisets exceeds ``budget``.
    All comparisons are done on integers scaled by the common denominators.
    """
    if mu.side is not Side.ROW:
        raise ValueError("sample search expects a row measure")
    support = mu.indices
    k = len(support)
    total = math.comb(n + k - 1, n)
    if budget is not None and total > budget:
        raise _BudgetExceeded(total)
    scaled, L = mu.table.scaled()
    sub = scaled[list(support), :]
    D = 1
    for w in mu.weights:
        D = math.lcm(D, w.denominator)
    wD = [w.numerator * (D // w.denominator) for w in mu.weights]
    p, q = epsilon.numerator, epsilon.denominator
    big = q * 2 * n * L * D >= 2**62 or sub.dtype == object
    dtype = object if big else np.int64
    sub = sub.astype(dtype)
    mu_scaled = np.array(wD, dtype=dtype) @ sub  # mu(col) * L * D
    lhs_base = n * mu_scaled
    rhs = p * n * L * D
    pos = {row: idx for idx, row in enumerate(support)}
    it = combinations_with_replacement(support, n)
    while True:
        chunk = list(islice(it, _CHUNK))
        if not chunk:
            return None
        counts = np.zeros((len(chunk), k), dtype=dtype)
        for r, combo in enumerate(chunk):
            for row in combo:
                counts[r, pos[row]] += 1
        diff = np.abs(lhs_base[None, :] - D * (counts @ sub))
        ok = np.all(q * diff <= rhs, axis=1)
        hits = np.flatnonzero(ok)
        if hits.size:
            return tuple(chunk[int(hits[0])])


class _BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class ApproxCertificate:
    sample: tuple[int, ...]
    epsilon: Fraction
    achieved_error: Fraction
    exhaustive: bool = True

    @property
    def size(self) -> int:
        return len(self.sample)

    def to_json(self) -> dict:
        return {
            "sample": list(self.sample),
            "size": self.size,
            "epsilon": format_rational(self.epsilon),
            "achieved_error": format_rational(self.achieved_error),
            "exhaustive": self.exhaustive,
        }


def proportional_sample(mu: AverageMeasure) -> tuple[int, ...]:
    """Support rows repeated proportionally to their weights (error 0)."""
    D = 1
    for w in mu.weights:
        D = math.lcm(D, w.denominator)
    out: list[int] = []
    for i, w in mu.support:
        out.extend([i] * int(w * D))
    return tuple(out)


def approximate_measure(mu: AverageMeasure, epsilon, budget: int = 2_000_000) -> ApproxCertificate:
    """Smallest uniform sample from the support approximating mu within epsilon.

    Sample sizes are tried in increasing order and multisets in lexicographic
    order, so the witness is deterministic.  Sizes whose multiset count
    exceeds ``budget`` are not enumerated; the weight-proportional sample
    (error 0) is returned instead with ``exhaustive=False``.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    fallback = proportional_sample(mu)
    for n in range(1, len(fallback) + 1):
        try:
            found = _first_sample(mu, epsilon, n, budget)
        except _BudgetExceeded:
            break
        if found is not None:
            return ApproxCertificate(found, epsilon, sup_error(mu, found))
    return ApproxCertificate(fallback, epsilon, sup_error(mu, fallback), exhaustive=False)


def min_support_oracle(mu: AverageMeasure, epsilon, n_max: int) -> int | None:
    """Least n <= n_max admitting an n-multiset of support rows within epsilon.

    Returns None when no size up to ``n_max`` works.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    for n in range(1, n_max + 1):
        if _first_sample(mu, epsilon, n, None) is not None:
            return n
    return None


# -- serialization -----------------------------------------------------------

_MEASURE = re.compile(r"^measure\s+v1\s+(row|column)((?:\s+\d+:\S+)+)\s*$")


def format_measure(mu: AverageMeasure) -> str:
    body = " ".join(f"{i}:{format_rational(w)}" for i, w in mu.support)
    return f"measure v1 {mu.side.value} {body}"


def parse_measure(line: str, table: FormulaTable) -> AverageMeasure:
    m = _MEASURE.match(line.strip())
    if m is None:
        raise ValueError(f"malformed measure line: {line!r}")
    support = []
    for item in m.group(2).split():
        idx, _, w = item.partition(":")
        support.append((int(idx), parse_rational(w)))
    return AverageMeasure(Side(m.group(1)), tuple(support), table)
