from __future__ import annotations

from pathlib import Path
from typing import Callable, Iterable

import pytest

from reliance_lens.ingest import DataFormat, TrialRecord, dump_dataset

RecordFactory = Callable[..., list[TrialRecord]]

# (ai_correct, adhered) per reliance cell, in (a_correct, a_wrong, o_correct, o_wrong) order.
_CELLS = ((True, True), (False, True), (False, False), (True, False))

PERFECT = (7, 0, 3, 0)
WORST = (4, 3, 0, 3)
# Three conditions under a 70% AI: a non-discerning baseline at A=50%, a
# quality-improving intervention and a quantity-driven one.
STUDY = {
    "control": (7, 3, 3, 7),
    "blue": (6, 0, 6, 8),
    "purple": (12, 6, 0, 2),
}


def records_from_counts(
    condition: str, counts: Iterable[int], participant: str | None = None, start: int = 1
) -> list[TrialRecord]:
    records = []
    trial = start
    for (ai_correct, adhered), count in zip(_CELLS, counts):
        for _ in range(count):
            records.append(TrialRecord(condition, f"t{trial}", ai_correct, adhered, participant))
            trial += 1
    return records


@pytest.fixture
def make_records() -> RecordFactory:
    return records_from_counts


@pytest.fixture
def write_dataset(tmp_path: Path) -> Callable[..., Path]:
    def _write(records: list[TrialRecord], name: str = "study.csv") -> Path:
        path = tmp_path / name
        path.write_bytes(dump_dataset(records, DataFormat.from_path(path)))
        return path

    return _write


@pytest.fixture
def perfect_records() -> list[TrialRecord]:
    return records_from_counts("perfect", PERFECT)


@pytest.fixture
def study_records() -> list[TrialRecord]:
    return [r for condition, counts in STUDY.items() for r in records_from_counts(condition, counts)]
