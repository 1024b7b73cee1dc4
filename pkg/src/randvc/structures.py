"""Finite formula tables.

A table stores a partitioned formula phi(x;y) extensionally: rows are the
elements a of a finite structure, columns are parameters b, and entry (i, j)
is phi(a_i; b_j) as an exact rational in [0, 1].  All indices are 0-based.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

ZERO = Fraction(0)
ONE = Fraction(1)


class Mode(str, Enum):
    CLASSICAL = "classical"
    CONTINUOUS = "continuous"


class TableFormatError(ValueError):
    """Raised for malformed table documents; carries the offending position."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        where = ""
        if row is not None:
            where = f" at row {row}" + (f", col {col}" if col is not None else "")
        super().__init__(message + where)
        self.row = row
        self.col = col


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q``, an integer or a decimal literal exactly."""
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class FormulaTable:
    values: tuple[tuple[Fraction, ...], ...]
    mode: Mode = Mode.CLASSICAL
    row_labels: tuple[str, ...] | None = field(default=None, compare=False)
    col_labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        values = tuple(tuple(Fraction(v) for v in row) for row in self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mode", Mode(self.mode))
        if not values or not values[0]:
            raise TableFormatError("table needs at least one row and one column")
        width = len(values[0])
        for i, row in enumerate(values):
            if len(row) != width:
                raise TableFormatError(f"expected {width} entries, got {len(row)}", row=i)
            for j, v in enumerate(row):
                if v < 0 or v > 1:
                    raise TableFormatError(f"entry {v} outside [0,1]", row=i, col=j)
                if self.mode is Mode.CLASSICAL and v not in (ZERO, ONE):
                    raise TableFormatError(f"non-boolean entry {v}", row=i, col=j)
        if self.row_labels is not None and len(self.row_labels) != len(values):
            raise TableFormatError("row label count mismatch")
        if self.col_labels is not None and len(self.col_labels) != width:
            raise TableFormatError("column label count mismatch")

    @property
    def rows(self) -> int:
        return len(self.values)

    @property
    def cols(self) -> int:
        return len(self.values[0])

    @property
    def is_classical(self) -> bool:
        return self.mode is Mode.CLASSICAL

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.values[i][j]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.values)

    @cached_property
    def col_masks(self) -> tuple[int, ...]:
        """Bitmask per column of the rows where the entry equals 1."""
        masks = []
        for j in range(self.cols):
            m = 0
            for i in range(self.rows):
                if self.values[i][j] == ONE:
                    m |= 1 << i
            masks.append(m)
        return tuple(masks)

    @cached_property
    def row_masks(self) -> tuple[int, ...]:
        """Bitmask per row of the columns where the entry equals 1."""
        masks = []
        for row in self.values:
            m = 0
            for j, v in enumerate(row):
                if v == ONE:
                    m |= 1 << j
            masks.append(m)
        return tuple(masks)

    @cached_property
    def denominator(self) -> int:
        """Least common denominator of all entries."""
        d = 1
        for row in self.values:
            for v in row:
                d = math.lcm(d, v.denominator)
        return d

    def scaled(self) -> tuple[np.ndarray, int]:
        """Integer matrix ``values * L`` together with ``L``."""
        d = self.denominator
        dtype = np.int64 if d < 2**31 else object
        data = [[v.numerator * (d // v.denominator) for v in row] for row in self.values]
        return np.array(data, dtype=dtype), d

    def transpose(self) -> FormulaTable:
        """The opposite formula phi^opp(y;x) = phi(x;y)."""
        return FormulaTable(
            tuple(zip(*self.values)), self.mode, self.col_labels, self.row_labels
        )

    def check_row(self, i: int) -> None:
        if not 0 <= i < self.rows:
            raise IndexError(f"row index {i} out of range 0..{self.rows - 1}")

    def check_col(self, j: int) -> None:
        if not 0 <= j < self.cols:
            raise IndexError(f"column index {j} out of range 0..{self.cols - 1}")


def table_from_rows(rows: Iterable[Iterable], mode: Mode | str = Mode.CLASSICAL) -> FormulaTable:
    return FormulaTable(tuple(tuple(Fraction(v) for v in r) for r in rows), Mode(mode))


# -- file format -------------------------------------------------------------

_HEADER = re.compile(r"^table\s+v1\s+(\d+)\s+(\d+)\s+(classical|continuous)\s*$")


def load_table(text: str) -> FormulaTable:
    """Parse a ``table v1`` document.

    Line 1 (after comments) is ``table v1 <rows> <cols> <classical|continuous>``,
    followed by ``rows`` lines of ``cols`` comma-separated rationals.  Lines
    starting with ``#`` and blank lines are ignored.
    """
    lines = [
        (n, ln.strip())
        for n, ln in enumerate(text.splitlines(), start=1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise TableFormatError("empty document")
    m = _HEADER.match(lines[0][1])
    if m is None:
        raise TableFormatError(f"malformed header on line {lines[0][0]}: {lines[0][1]!r}")
    nrows, ncols, mode = int(m.group(1)), int(m.group(2)), Mode(m.group(3))
    if nrows < 1 or ncols < 1:
        raise TableFormatError("header declares an empty table")
    body = lines[1:]
    if len(body) != nrows:
        raise TableFormatError(f"header declares {nrows} rows, found {len(body)}")
    values = []
    for i, (_, ln) in enumerate(body):
        cells = ln.split(",")
        if len(cells) != ncols:
            raise TableFormatError(f"expected {ncols} entries, got {len(cells)}", row=i)
        row = []
        for j, cell in enumerate(cells):
            try:
                v = parse_rational(cell)
            except ValueError:
                raise TableFormatError(f"non-rational entry {cell.strip()!r}", row=i, col=j) from None
            row.append(v)
        values.append(tuple(row))
    return FormulaTable(tuple(values), mode)


def dump_table(table: FormulaTable) -> str:
    head = f"table v1 {table.rows} {table.cols} {table.mode.value}"
    body = (",".join(str(v) for v in row) for row in table.values)
    return "\n".join([head, *body]) + "\n"


def read_table(path) -> FormulaTable:
    with open(path, encoding="utf-8") as fh:
        return load_table(fh.read())


def write_table(table: FormulaTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_table(table))


# -- canonical generators ----------------------------------------------------


def gen_halfgraph(n: int) -> FormulaTable:
    """n x n half graph: entry (i, j) is 1 iff i >= j."""
    if n < 1:
        raise ValueError("halfgraph needs n >= 1")
    return table_from_rows([[int(i >= j) for j in range(n)] for i in range(n)])


def gen_powerset(n: int) -> FormulaTable:
    """n x 2^n table whose column c is the subset encoded by the bits of c.

    Row i belongs to column c iff bit i of c is set, so columns follow binary
    counting: for n = 2 they are {}, {0}, {1}, {0, 1}.
    """
    if not 1 <= n <= 20:
        raise ValueError("powerset needs 1 <= n <= 20")
    return table_from_rows([[(c >> i) & 1 for c in range(1 << n)] for i in range(n)])


def interval_columns(n: int) -> list[tuple[int, int]]:
    """Intervals [i, j] (0-based, inclusive) in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def gen_intervals(n: int) -> FormulaTable:
    """Points 0..n-1 against all closed intervals, intervals ordered lexicographically."""
    if n < 1:
        raise ValueError("intervals needs n >= 1")
    cols = interval_columns(n)
    return table_from_rows([[int(i <= p <= j) for (i, j) in cols] for p in range(n)])


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for a 64-bit seed; children are split off via SeedSequence."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def gen_random(rows: int, cols: int, density, seed: int) -> FormulaTable:
    """Classical table with i.i.d. entries, 1 with probability ``density``.

    For density p/q each entry draws an integer u uniform on [0, q) from PCG64
    seeded with ``seed`` and is 1 iff u < p, so the probability is exact.
    """
    if rows < 1 or cols < 1:
        raise ValueError("random table needs rows, cols >= 1")
    density = Fraction(density)
    if not 0 <= density <= 1:
        raise ValueError(f"density {density} outside [0,1]")
    if density.denominator >= 2**63:
        raise ValueError("density denominator too large")
    rng = make_rng(seed)
    draws = rng.integers(0, density.denominator, size=(rows, cols))
    return table_from_rows((draws < density.numerator).astype(int).tolist())


def parse_generator(spec: str, seed: int = 0) -> FormulaTable:
    """Build a table from ``name:params``, e.g. ``halfgraph:6`` or ``random:5,5,1/2``."""
    name, _, params = spec.partition(":")
    name = name.strip().lower()
    args = [p.strip() for p in params.split(",")] if params.strip() else []
    try:
        if name == "halfgraph" and len(args) == 1:
            return gen_halfgraph(int(args[0]))
        if name == "powerset" and len(args) == 1:
            return gen_powerset(int(args[0]))
        if name == "intervals" and len(args) == 1:
            return gen_intervals(int(args[0]))
        if name == "random" and len(args) == 3:
            return gen_random(int(args[0]), int(args[1]), parse_rational(args[2]), seed)
    except ValueError as exc:
        raise ValueError(f"bad generator {spec!r}: {exc}") from None
    raise ValueError(f"unknown generator {spec!r}")


def check_rows(table: FormulaTable, rows: Sequence[int]) -> None:
    for i in rows:
        table.check_row(i)
