"""Behavioral comparison of mutants against proof-of-vulnerability tests.

A mutant's observable behavior is summarized by its failing-test set.
Comparing that set against the failing-test set of the known
vulnerability (its PoV tests) yields an Ochiai score and one of four
labels describing how closely the mutant mimics the vulnerability.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Sequence

from .errors import EmptyPoV

MIMICKING = "mimicking"
COUPLED = "coupled"
KILLED_UNRELATED = "killed-unrelated"
SURVIVED = "survived"

LABELS = (MIMICKING, COUPLED, KILLED_UNRELATED, SURVIVED)


def ochiai(a: AbstractSet[str], b: AbstractSet[str]) -> float:
    """Ochiai coefficient |a∩b| / sqrt(|a|·|b|); 0.0 if either set is empty."""
    if not a or not b:
        return 0.0
    inter = len(a & b)
    return inter / math.sqrt(len(a) * len(b))


def label(mutant_failing: AbstractSet[str], pov_failing: AbstractSet[str]) -> str:
    """Classify a mutant by how its failing tests relate to the PoV tests.

    survived: nothing failed. mimicking: exactly the PoV tests failed.
    coupled: partial overlap. killed-unrelated: disjoint failures.
    """
    if not pov_failing:
        raise EmptyPoV("vulnerability has no proof-of-vulnerability tests")
    if not mutant_failing:
        return SURVIVED
    score = ochiai(mutant_failing, pov_failing)
    if score == 1.0:
        return MIMICKING
    if score > 0.0:
        return COUPLED
    return KILLED_UNRELATED


@dataclass(frozen=True)
class VulnerabilityRecord:
    """A known vulnerability: its project and the tests that prove it."""

    project: str
    pov_tests: tuple[str, ...]
    cve_id: str | None = None

    def __post_init__(self) -> None:
        if not self.pov_tests:
            raise EmptyPoV(f"vulnerability in {self.project!r} lists no PoV tests")


@dataclass(frozen=True)
class LabelRecord:
    mutant_id: str
    project: str
    label: str
    ochiai: float
    mutant_failing: tuple[str, ...]
    pov_failing: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "mutant_id": self.mutant_id,
            "project": self.project,
            "label": self.label,
            "ochiai": self.ochiai,
            "mutant_failing": list(self.mutant_failing),
            "pov_failing": list(self.pov_failing),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LabelRecord":
        return cls(
            mutant_id=obj["mutant_id"],
            project=obj["project"],
            label=obj["label"],
            ochiai=float(obj["ochiai"]),
            mutant_failing=tuple(obj["mutant_failing"]),
            pov_failing=tuple(obj["pov_failing"]),
        )


def make_label_record(
    mutant_id: str,
    project: str,
    mutant_failing: AbstractSet[str],
    pov_failing: AbstractSet[str],
) -> LabelRecord:
    """Score and label one mutant, normalizing the failing sets to sorted tuples."""
    return LabelRecord(
        mutant_id=mutant_id,
        project=project,
        label=label(mutant_failing, pov_failing),
        ochiai=ochiai(mutant_failing, pov_failing),
        mutant_failing=tuple(sorted(mutant_failing)),
        pov_failing=tuple(sorted(pov_failing)),
    )


def write_labels(path, records: Iterable[LabelRecord]) -> None:
    rows = sorted(records, key=lambda r: r.mutant_id)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in rows:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def read_labels(path) -> list[LabelRecord]:
    out: list[LabelRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(LabelRecord.from_json(json.loads(line)))
    return out


def label_counts(records: Sequence[LabelRecord]) -> dict[str, int]:
    counts = {name: 0 for name in LABELS}
    for rec in records:
        counts[rec.label] += 1
    return counts
