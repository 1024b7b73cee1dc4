"""Simple randomizations over finite atomic probability spaces.

A random element is a step function from the atoms of a space to the rows
(or columns) of a table.  Atom refinement leaves every bracket probability
unchanged, which is what lets a finite atomic space stand in for an
atomless one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .measures import AverageMeasure, Side, product_measure
from .structures import FormulaTable, format_rational, parse_rational


@dataclass(frozen=True)
class ProbSpace:
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        masses = tuple(Fraction(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if not masses:
            raise ValueError("a probability space needs at least one atom")
        if any(m <= 0 for m in masses):
            raise ValueError("atom masses must be positive")
        if sum(masses) != 1:
            raise ValueError(f"atom masses sum to {sum(masses)}, not 1")

    @classmethod
    def uniform(cls, n: int) -> ProbSpace:
        return cls((Fraction(1, n),) * n)

    def __len__(self) -> int:
        return len(self.masses)

    def split(self, atom: int, parts: int = 2) -> tuple[ProbSpace, tuple[int, ...]]:
        """Refine ``atom`` into ``parts`` equal pieces.

        Returns the refined space and the map from new atoms to old atoms.
        """
        masses, parent = [], []
        for a, m in enumerate(self.masses):
            pieces = parts if a == atom else 1
            masses += [m / pieces] * pieces
            parent += [a] * pieces
        return ProbSpace(tuple(masses)), tuple(parent)


@dataclass(frozen=True)
class RandomElement:
    """f: atoms -> indices; ``assignment[t]`` is f at atom t."""

    space: ProbSpace
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(x) for x in self.assignment))
        if len(self.assignment) != len(self.space):
            raise ValueError("assignment must be total on the atoms")
        if any(x < 0 for x in self.assignment):
            raise IndexError("negative index in assignment")

    @classmethod
    def constant(cls, space: ProbSpace, index: int) -> RandomElement:
        return cls(space, (index,) * len(space))

    def pullback(self, space: ProbSpace, parent: Sequence[int]) -> RandomElement:
        """The same step function read on a refinement with atom map ``parent``."""
        return RandomElement(space, tuple(self.assignment[p] for p in parent))


@dataclass(frozen=True)
class Event:
    space: ProbSpace
    atoms: frozenset[int]

    def __post_init__(self):
        atoms = frozenset(int(a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if any(not 0 <= a < len(self.space) for a in atoms):
            raise IndexError("event atom out of range")


def _same_space(*things) -> ProbSpace:
    space = things[0].space
    if any(x.space != space for x in things[1:]):
        raise ValueError("random elements or events live on different spaces")
    return space


def bracket_prob(f: RandomElement, g: RandomElement, table: FormulaTable) -> Fraction:
    """P[[phi(f; g)]] = sum over atoms of mass * phi(f(t); g(t))."""
    space = _same_space(f, g)
    for a in f.assignment:
        table.check_row(a)
    for b in g.assignment:
        table.check_col(b)
    vals = table.values
    return sum(
        (m * vals[a][b] for m, a, b in zip(space.masses, f.assignment, g.assignment)),
        Fraction(0),
    )


def to_measure(f: RandomElement, table: FormulaTable, side: Side | str = Side.ROW) -> AverageMeasure:
    """Pushforward of the atom masses along f."""
    return AverageMeasure(Side(side), tuple(zip(f.assignment, f.space.masses)), table)


def lift_product(f: RandomElement, g: RandomElement) -> tuple[RandomElement, RandomElement]:
    """Read f and g as independent elements on the product of their spaces.

    Atom (a, b) of the product has index a * |g.space| + b and mass m_a * m_b;
    the preimages of f and g become rectangles.
    """
    n2 = len(g.space)
    masses = tuple(ma * mb for ma in f.space.masses for mb in g.space.masses)
    prod = ProbSpace(masses)
    fa = tuple(f.assignment[t // n2] for t in range(len(masses)))
    gb = tuple(g.assignment[t % n2] for t in range(len(masses)))
    return RandomElement(prod, fa), RandomElement(prod, gb)


def transfer_identity_check(f: RandomElement, g: RandomElement, table: FormulaTable) -> bool:
    """Bracket of the independent lift equals mu_f (x) nu_g."""
    F, G = lift_product(f, g)
    lhs = bracket_prob(F, G, table)
    rhs = product_measure(to_measure(f, table, Side.ROW), to_measure(g, table, Side.COLUMN))
    return lhs == rhs


def d_K(f: RandomElement, g: RandomElement) -> Fraction:
    space = _same_space(f, g)
    return sum((m for m, a, b in zip(space.masses, f.assignment, g.assignment) if a != b), Fraction(0))


def event_measure(E: Event) -> Fraction:
    return sum((E.space.masses[a] for a in E.atoms), Fraction(0))


def d_B(E1: Event, E2: Event) -> Fraction:
    _same_space(E1, E2)
    return event_measure(Event(E1.space, E1.atoms ^ E2.atoms))


# -- serialization -----------------------------------------------------------


def format_space(space: ProbSpace) -> str:
    return "space v1 " + " ".join(format_rational(m) for m in space.masses)


def format_relem(f: RandomElement, space_id: int) -> str:
    return f"relem v1 {space_id} " + " ".join(str(a) for a in f.assignment)


def parse_randomization(text: str) -> tuple[list[ProbSpace], list[RandomElement]]:
    """Read ``space v1 m1 m2 ...`` and ``relem v1 <space-id> i1 i2 ...`` lines.

    Spaces are numbered from 0 in order of appearance.
    """
    spaces: list[ProbSpace] = []
    elems: list[RandomElement] = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if m := re.match(r"^space\s+v1\s+(.+)$", ln):
            spaces.append(ProbSpace(tuple(parse_rational(x) for x in m.group(1).split())))
        elif m := re.match(r"^relem\s+v1\s+(\d+)\s+(.+)$", ln):
            sid = int(m.group(1))
            if sid >= len(spaces):
                raise ValueError(f"relem refers to unknown space {sid}")
            elems.append(RandomElement(spaces[sid], tuple(int(x) for x in m.group(2).split())))
        else:
            raise ValueError(f"unrecognised line: {ln!r}")
    return spaces, elems
