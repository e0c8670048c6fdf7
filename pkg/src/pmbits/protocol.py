"""The three-step signalling protocol as an auditable state machine.

1. read the hidden values of X1, X2, Y1, Y2 and Z1Z2;
2. b = 0 if their product is +1, else b = 1;
3. pick a context and perform its Bell-type measurement.

The table's joint values come first and the measurement reproduces them.
``sweep`` also draws independent measurements so the sampled joint values
can be compared against plain Born statistics.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .hidden_variables import (
    STEP1_LABELS,
    ContextChoice,
    HiddenValueTable,
    make_rng,
    sample_contextual_table,
)
from .peres_mermin import PMLabel, line_value
from .quantum import TwoQubitState, born_probabilities, measure_in_basis, random_state


def five_value_product(table: HiddenValueTable) -> int:
    out = 1
    for label in STEP1_LABELS:
        out *= table.value(label)
    return out


def compute_bit(table: HiddenValueTable) -> int:
    return 0 if five_value_product(table) == 1 else 1


@dataclass
class ProtocolTranscript:
    state: TwoQubitState
    table: HiddenValueTable
    bit_b: int
    context: ContextChoice
    outcome_index: int
    measurement_outcome: tuple[int, int]
    consistent: bool
    seed: int | None
    events: list[dict] = field(default_factory=list)

    @property
    def bit_matches_context(self) -> bool:
        return self.bit_b == self.context.implied_bit

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_pairs(),
            "context": self.context.value,
            "table": self.table.to_dict(),
            "bit": self.bit_b,
            "outcome": list(self.measurement_outcome),
            "outcome_index": self.outcome_index,
            "consistent": self.consistent,
            "seed": self.seed,
            "events": self.events,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def run_protocol(state: TwoQubitState, context: ContextChoice, rng) -> ProtocolTranscript:
    rng, seed = make_rng(rng)
    table = sample_contextual_table(state, context, rng)
    table = HiddenValueTable(table.values, table.context, seed)
    events = [
        {
            "step": 1,
            "event": "read_hidden_values",
            "values": {label.name: table.value(label) for label in STEP1_LABELS},
        }
    ]

    product = five_value_product(table)
    bit = 0 if product == 1 else 1
    events.append({"step": 2, "event": "compute_bit", "product": product, "bit": bit})

    basis = context.basis()
    events.append(
        {"step": 3, "event": "choose_context", "context": context.value, "observables": list(basis.names)}
    )
    # the ontology fixes the outcome; the measurement only reveals it
    expected = table.joint_values
    k = basis.index_of(expected)
    probs = born_probabilities(state, basis)
    outcome = basis.labels[k]
    consistent = probs[k] > 0 and tuple(outcome) == tuple(expected)
    events.append(
        {
            "step": 3,
            "event": "measure",
            "outcome_index": k,
            "outcome": list(outcome),
            "born_probability": float(probs[k]),
        }
    )
    return ProtocolTranscript(
        state=state,
        table=table,
        bit_b=bit,
        context=context,
        outcome_index=k,
        measurement_outcome=tuple(outcome),
        consistent=bool(consistent),
        seed=seed,
        events=events,
    )


def binomial_z(count: int, n: int, p: float) -> float:
    """|observed - expected| in units of the binomial standard deviation."""
    if n == 0:
        return 0.0
    freq = count / n
    sd = math.sqrt(p * (1 - p) / n)
    if sd == 0.0:
        return 0.0 if freq == p else math.inf
    return abs(freq - p) / sd


@dataclass
class SweepReport:
    n_states: int
    trials_per_state: int
    n_runs: int = 0
    n_bit_matches: int = 0
    n_consistent: int = 0
    max_table_z: float = 0.0
    max_measurement_z: float = 0.0
    outcome_counts: dict[str, dict[str, list[int]]] = field(default_factory=dict)

    @property
    def match_fraction(self) -> float | None:
        return self.n_bit_matches / self.n_runs if self.n_runs else None

    @property
    def consistency_fraction(self) -> float | None:
        return self.n_consistent / self.n_runs if self.n_runs else None

    def to_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "trials_per_state": self.trials_per_state,
            "n_runs": self.n_runs,
            "match_fraction": self.match_fraction,
            "consistency_fraction": self.consistency_fraction,
            "max_table_born_z": self.max_table_z,
            "max_measurement_born_z": self.max_measurement_z,
            "outcome_counts": self.outcome_counts,
        }


def sweep(states: Sequence[TwoQubitState], trials_per_state: int, rng) -> SweepReport:
    """Run both contexts ``trials_per_state`` times for every state.

    Per-run seeds are drawn from ``rng`` state by state, so the report is
    deterministic for a given stream and each run can be replayed from its
    own seed. Each run is also paired with an independent measurement of
    the state so table statistics can be compared with plain Born sampling.
    """
    if trials_per_state < 1:
        raise ValueError("trials_per_state must be >= 1")
    rng, _ = make_rng(rng)
    report = SweepReport(n_states=len(states), trials_per_state=trials_per_state)
    contexts = (ContextChoice.XXYY, ContextChoice.XYYX)
    for si, state in enumerate(states):
        seeds = rng.integers(0, 2**63, size=(trials_per_state, len(contexts)), dtype=np.int64)
        counts = {}
        for ci, context in enumerate(contexts):
            basis = context.basis()
            table_counts = np.zeros(4, dtype=int)
            meas_counts = np.zeros(4, dtype=int)
            for t in range(trials_per_state):
                run_seed = int(seeds[t, ci])
                tr = run_protocol(state, context, run_seed)
                report.n_runs += 1
                report.n_bit_matches += tr.bit_matches_context
                report.n_consistent += tr.consistent
                table_counts[tr.outcome_index] += 1
                # independent check: a fresh measurement with a derived stream
                k, _, _ = measure_in_basis(state, basis, np.random.default_rng([run_seed, 1]))
                meas_counts[k] += 1
            probs = born_probabilities(state, basis)
            for k, p in enumerate(probs):
                report.max_table_z = max(report.max_table_z, binomial_z(table_counts[k], trials_per_state, p))
                report.max_measurement_z = max(
                    report.max_measurement_z, binomial_z(meas_counts[k], trials_per_state, p)
                )
            counts[context.value] = {"table": table_counts.tolist(), "measurement": meas_counts.tolist()}
        report.outcome_counts[str(si)] = counts
    return report


def tables_valid_for_both_contexts() -> list[dict[PMLabel, int]]:
    """Assignments to every label either context touches that satisfy both contexts.

    A table valid for both would need all four factorization equations plus
    the parities of column 3 and row 3. The search covers all 2^9 values of
    the nine labels involved and returns the survivors (there are none).
    """
    labels = list(PMLabel)
    found = []
    for vals in itertools.product((1, -1), repeat=len(labels)):
        a = dict(zip(labels, vals))
        ok = True
        for context in ContextChoice:
            for joint, (f1, f2) in zip(context.joint_labels, context.factors):
                if a[joint] != a[f1] * a[f2]:
                    ok = False
            if line_value(a, context.line) != context.line.target:
                ok = False
        if ok:
            found.append(a)
    return found


def random_states(n: int, rng) -> list[TwoQubitState]:
    rng, _ = make_rng(rng)
    return [random_state(rng) for _ in range(n)]


def iter_runs(states: Iterable[TwoQubitState], contexts: Iterable[ContextChoice], seeds: Iterable[int]):
    for state in states:
        for context in contexts:
            for seed in seeds:
                yield run_protocol(state, context, seed)
