"""Hidden-value tables for the two measurement contexts of the protocol.

A contextual table is sampled as an oracle: the two joint values of the
context Alice will eventually measure are drawn from the Born rule, Z1Z2
follows from the parity of the line holding that pair, and the four single
spins are any completion consistent with the product values factorizing.
Joint observables of the other context are left out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .peres_mermin import (
    LINES,
    LINES_BY_NAME,
    Line,
    PMLabel,
    build_square,
    exhaustive_assignment_search,
    score_assignment,
    line_value,
)
from .quantum import (
    OrthonormalBasis4,
    TwoQubitState,
    bell_basis_xxyy,
    bell_basis_xyyx,
    born_probabilities,
    sample_index,
)

STEP1_LABELS = (PMLabel.X1, PMLabel.X2, PMLabel.Y1, PMLabel.Y2, PMLabel.Z1Z2)


class MissingLabelError(KeyError):
    pass


def make_rng(seed_or_rng) -> tuple[np.random.Generator, int | None]:
    """Accept an int seed or a ready Generator; return (generator, seed or None)."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng, None
    seed = int(seed_or_rng)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(seed), seed


class ContextChoice(enum.Enum):
    XXYY = "XXYY"
    XYYX = "XYYX"

    @property
    def joint_labels(self) -> tuple[PMLabel, PMLabel]:
        if self is ContextChoice.XXYY:
            return PMLabel.X1X2, PMLabel.Y1Y2
        return PMLabel.X1Y2, PMLabel.Y1X2

    @property
    def factors(self) -> tuple[tuple[PMLabel, PMLabel], tuple[PMLabel, PMLabel]]:
        """Single-spin factors of each joint label, in the same order."""
        if self is ContextChoice.XXYY:
            return (PMLabel.X1, PMLabel.X2), (PMLabel.Y1, PMLabel.Y2)
        return (PMLabel.X1, PMLabel.Y2), (PMLabel.Y1, PMLabel.X2)

    @property
    def line(self) -> Line:
        """The square line holding both joint labels and Z1Z2."""
        return LINES_BY_NAME["col3" if self is ContextChoice.XXYY else "row3"]

    @property
    def implied_bit(self) -> int:
        return 1 if self is ContextChoice.XXYY else 0

    def basis(self) -> OrthonormalBasis4:
        return bell_basis_xxyy() if self is ContextChoice.XXYY else bell_basis_xyyx()

    @property
    def other(self) -> "ContextChoice":
        return ContextChoice.XYYX if self is ContextChoice.XXYY else ContextChoice.XXYY

    @classmethod
    def parse(cls, text: str) -> "ContextChoice":
        return cls(text.upper())


class Provenance(enum.Enum):
    SAMPLED = "sampled"
    DERIVED = "derived"
    FREE_BIT = "free-bit"


@dataclass(frozen=True)
class HiddenValue:
    value: int
    provenance: Provenance


@dataclass(frozen=True)
class HiddenValueTable:
    values: Mapping[PMLabel, HiddenValue]
    context: ContextChoice
    seed: int | None = None

    def value(self, label: PMLabel) -> int:
        try:
            return self.values[label].value
        except KeyError:
            raise MissingLabelError(f"table has no value for {label.name}") from None

    def plain(self) -> dict[PMLabel, int]:
        return {label: hv.value for label, hv in self.values.items()}

    @property
    def joint_values(self) -> tuple[int, int]:
        a, b = self.context.joint_labels
        return self.value(a), self.value(b)

    def violations(self) -> list[str]:
        """Every broken table invariant, as text. Empty means valid."""
        out = []
        for label in STEP1_LABELS:
            if label not in self.values:
                out.append(f"missing step-1 label {label.name}")
        for label, hv in self.values.items():
            if hv.value not in (1, -1):
                out.append(f"{label.name} has non +-1 value {hv.value}")
        for label in self.context.joint_labels:
            hv = self.values.get(label)
            if hv is None:
                out.append(f"missing context label {label.name}")
            elif hv.provenance is not Provenance.SAMPLED:
                out.append(f"context label {label.name} is not sampled")
        for label in self.context.other.joint_labels:
            if label in self.values:
                out.append(f"off-context label {label.name} present")
        if out:
            return out
        if not check_factorization(self):
            out.append("factorization fails")
        if line_value(self.plain(), self.context.line) != self.context.line.target:
            out.append(f"parity of {self.context.line.name} fails")
        return out

    def to_dict(self) -> dict:
        return {
            "context": self.context.value,
            "seed": self.seed,
            "values": {
                label.name: {"value": hv.value, "provenance": hv.provenance.value}
                for label, hv in sorted(self.values.items(), key=lambda kv: kv[0].value)
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HiddenValueTable":
        values = {
            PMLabel[name]: HiddenValue(int(v["value"]), Provenance(v["provenance"]))
            for name, v in data["values"].items()
        }
        return cls(values, ContextChoice(data["context"]), data.get("seed"))


def completions(context: ContextChoice, m1: int, m2: int) -> list[dict[PMLabel, int]]:
    """The four single-spin assignments whose products give (m1, m2) in ``context``."""
    (p1, p2), (q1, q2) = context.factors
    out = []
    for u in (1, -1):
        for w in (1, -1):
            out.append({p1: u, p2: m1 * u, q1: w, q2: m2 * w})
    return out


def sample_contextual_table(state: TwoQubitState, context: ContextChoice, rng) -> HiddenValueTable:
    rng, seed = make_rng(rng)
    basis = context.basis()
    probs = born_probabilities(state, basis)
    m1, m2 = basis.labels[sample_index(probs, rng)]
    line = context.line
    z = line.target * m1 * m2
    singles = completions(context, m1, m2)[int(rng.integers(4))]

    j1, j2 = context.joint_labels
    values = {
        j1: HiddenValue(m1, Provenance.SAMPLED),
        j2: HiddenValue(m2, Provenance.SAMPLED),
        PMLabel.Z1Z2: HiddenValue(z, Provenance.DERIVED),
    }
    for label, v in singles.items():
        values[label] = HiddenValue(v, Provenance.FREE_BIT)
    return HiddenValueTable(values, context, seed)


def check_factorization(table: HiddenValueTable) -> bool:
    for joint, (f1, f2) in zip(table.context.joint_labels, table.context.factors):
        if table.value(joint) != table.value(f1) * table.value(f2):
            return False
    return True


def strict_completion(table: HiddenValueTable) -> tuple[dict[PMLabel, int], list[str]]:
    """Fill the off-context joint labels by factorization and list failing lines.

    The result always breaks at least one of the six lines; this is the
    table-level face of contextuality.
    """
    values = table.plain()
    for joint, (f1, f2) in zip(table.context.other.joint_labels, table.context.other.factors):
        values[joint] = values[f1] * values[f2]
    broken = [line.name for line in LINES if line_value(values, line) != line.target]
    return values, broken


@dataclass
class NonContextualFailure:
    all_six_satisfiable: bool
    max_satisfied: int
    witness: dict[PMLabel, int]
    attempted: dict[PMLabel, int]
    attempted_score: int
    obstruction: str = field(
        default="product over the six lines of the target parities is -1, "
        "while any +-1 assignment makes the product of line values +1"
    )

    def to_dict(self) -> dict:
        return {
            "all_six_satisfiable": self.all_six_satisfiable,
            "max_satisfied": self.max_satisfied,
            "witness": {k.name: v for k, v in self.witness.items()},
            "attempted": {k.name: v for k, v in self.attempted.items()},
            "attempted_score": self.attempted_score,
            "obstruction": self.obstruction,
        }


def attempt_noncontextual_table(rng) -> NonContextualFailure:
    """Try to build one context-free assignment; always fails.

    A random candidate is drawn and scored for illustration, then the
    exhaustive search settles the question.
    """
    rng, _ = make_rng(rng)
    draws = rng.choice((1, -1), size=len(PMLabel))
    attempted = {label: int(v) for label, v in zip(PMLabel, draws)}
    report = exhaustive_assignment_search(build_square())
    return NonContextualFailure(
        all_six_satisfiable=report.all_six_satisfiable > 0,
        max_satisfied=report.max_satisfied,
        witness=dict(report.witness),
        attempted=attempted,
        attempted_score=score_assignment(attempted),
    )
