"""The Peres-Mermin square: construction, exact structure check, no-go search.

Layout (row, column), 1-based::

    X1     X2     X1X2
    Y2     Y1     Y1Y2
    X1Y2   Y1X2   Z1Z2

Every row and the first two columns multiply to +I, the last column to -I.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .quantum import IDENTITY, Operator4, commutes, pauli


class PMLabel(enum.Enum):
    X1 = (1, 1)
    X2 = (1, 2)
    X1X2 = (1, 3)
    Y2 = (2, 1)
    Y1 = (2, 2)
    Y1Y2 = (2, 3)
    X1Y2 = (3, 1)
    Y1X2 = (3, 2)
    Z1Z2 = (3, 3)

    @property
    def row(self) -> int:
        return self.value[0]

    @property
    def col(self) -> int:
        return self.value[1]

    @classmethod
    def at(cls, row: int, col: int) -> "PMLabel":
        return cls((row, col))


# Pauli factors of each entry, in display order.
_FACTORS = {
    PMLabel.X1: ((1, "x"),),
    PMLabel.X2: ((2, "x"),),
    PMLabel.X1X2: ((1, "x"), (2, "x")),
    PMLabel.Y2: ((2, "y"),),
    PMLabel.Y1: ((1, "y"),),
    PMLabel.Y1Y2: ((1, "y"), (2, "y")),
    PMLabel.X1Y2: ((1, "x"), (2, "y")),
    PMLabel.Y1X2: ((1, "y"), (2, "x")),
    PMLabel.Z1Z2: ((1, "z"), (2, "z")),
}


@dataclass(frozen=True)
class Line:
    name: str
    labels: tuple[PMLabel, PMLabel, PMLabel]
    target: int


def _lines() -> tuple[Line, ...]:
    rows = [
        Line(f"row{r}", tuple(PMLabel.at(r, c) for c in (1, 2, 3)), +1) for r in (1, 2, 3)
    ]
    cols = [
        Line(f"col{c}", tuple(PMLabel.at(r, c) for r in (1, 2, 3)), -1 if c == 3 else +1)
        for c in (1, 2, 3)
    ]
    return tuple(rows + cols)


LINES = _lines()
LINES_BY_NAME = {line.name: line for line in LINES}


@dataclass(frozen=True)
class PMSquare:
    entries: Mapping[PMLabel, Operator4]
    lines: tuple[Line, ...] = LINES

    def __getitem__(self, label: PMLabel) -> Operator4:
        return self.entries[label]

    def at(self, row: int, col: int) -> Operator4:
        return self.entries[PMLabel.at(row, col)]


def entry_operator(label: PMLabel) -> Operator4:
    op = IDENTITY
    for spin, axis in _FACTORS[label]:
        op = op @ pauli(spin, axis)
    return op


def build_square(negate: PMLabel | None = None) -> PMSquare:
    """Construct the square. ``negate`` flips the sign of one entry (negative control)."""
    entries = {label: entry_operator(label) for label in PMLabel}
    if negate is not None:
        entries[negate] = -entries[negate]
    return PMSquare(entries=entries)


@dataclass
class LineCheck:
    name: str
    labels: list[str]
    pairs_commute: dict[str, bool]
    product_sign: int | None  # +1 / -1 if the product is +-I exactly, else None
    target: int

    @property
    def ok(self) -> bool:
        return all(self.pairs_commute.values()) and self.product_sign == self.target

    def to_dict(self) -> dict:
        return {
            "line": self.name,
            "labels": self.labels,
            "pairs_commute": self.pairs_commute,
            "product_sign": self.product_sign,
            "target": self.target,
            "ok": self.ok,
        }


@dataclass
class StructureReport:
    lines: list[LineCheck]

    @property
    def passed(self) -> bool:
        return all(line.ok for line in self.lines)

    @property
    def failures(self) -> list[str]:
        return [line.name for line in self.lines if not line.ok]

    @property
    def commutation_checks(self) -> int:
        return sum(len(line.pairs_commute) for line in self.lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "commutation_checks": self.commutation_checks,
            "failures": self.failures,
            "lines": [line.to_dict() for line in self.lines],
        }


def verify_structure(square: PMSquare) -> StructureReport:
    checks = []
    for line in square.lines:
        ops = [square[label] for label in line.labels]
        pairs = {
            f"{line.labels[i].name}|{line.labels[j].name}": commutes(ops[i], ops[j])
            for i, j in itertools.combinations(range(3), 2)
        }
        prod = ops[0] @ ops[1] @ ops[2]
        if prod == IDENTITY:
            sign = 1
        elif prod == -IDENTITY:
            sign = -1
        else:
            sign = None
        checks.append(
            LineCheck(line.name, [lab.name for lab in line.labels], pairs, sign, line.target)
        )
    return StructureReport(checks)


# -- classical value assignments -------------------------------------------

Assignment = Mapping[PMLabel, int]


def all_assignments():
    """Yield all 512 total +-1 assignments, in a fixed order."""
    labels = list(PMLabel)
    for values in itertools.product((1, -1), repeat=len(labels)):
        yield dict(zip(labels, values))


def line_value(assignment: Assignment, line: Line) -> int:
    a, b, c = (assignment[label] for label in line.labels)
    return a * b * c


def satisfied_lines(assignment: Assignment, lines=LINES) -> list[str]:
    return [line.name for line in lines if line_value(assignment, line) == line.target]


def score_assignment(assignment: Assignment, lines=LINES) -> int:
    return len(satisfied_lines(assignment, lines))


def parity_defect(assignment: Assignment, lines=LINES) -> int:
    """Product over lines of achieved/target parity. Always -1 for the real square."""
    out = 1
    for line in lines:
        out *= line_value(assignment, line) * line.target
    return out


@dataclass
class NoGoReport:
    total_assignments: int
    all_six_satisfiable: int
    max_satisfied: int
    witness: dict[PMLabel, int] = field(default_factory=dict)
    histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_assignments": self.total_assignments,
            "all_six_satisfiable": self.all_six_satisfiable,
            "max_satisfied": self.max_satisfied,
            "witness": {label.name: v for label, v in self.witness.items()},
            "witness_satisfied": satisfied_lines(self.witness) if self.witness else [],
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def exhaustive_assignment_search(square: PMSquare) -> NoGoReport:
    """Score every one of the 2^9 assignments against the six line parities."""
    n_lines = len(square.lines)
    total = 0
    perfect = 0
    best, witness = -1, {}
    hist: dict[int, int] = {}
    for assignment in all_assignments():
        total += 1
        s = score_assignment(assignment, square.lines)
        hist[s] = hist.get(s, 0) + 1
        if s == n_lines:
            perfect += 1
        if s > best:
            best, witness = s, assignment
    return NoGoReport(total, perfect, best, witness, hist)
