"""Experiment logs to trial records, per-condition counts and reliance profiles.

Two schemas are understood, each as CSV (comma separated, header row, UTF-8)
or as a JSON array of objects with the same field names:

    derived:  condition,trial,ai_correct,adhered
    raw:      condition,trial,ai_decision,human_decision,ground_truth

An optional ``participant`` column enables per-participant aggregation.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, BinaryIO, Iterable, Iterator, NamedTuple

from loguru import logger
from typing_extensions import Self

from reliance_lens.config import TOLERANCE
from reliance_lens.core import RelianceProfile, check_ai_accuracy, profile_from_counts
from reliance_lens.errors import (
    DuplicateTrial,
    EmptyCondition,
    EmptyDataset,
    IngestError,
    LabelError,
    ParseError,
)


class DataFormat(str, Enum):
    csv = "csv"
    json = "json"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_path(cls, path: str | Path) -> DataFormat:
        return cls.json if Path(path).suffix.lower() == ".json" else cls.csv


class Schema(str, Enum):
    derived = "derived"
    raw = "raw"

    def __str__(self) -> str:
        return self.value

    @property
    def columns(self) -> tuple[str, ...]:
        return SCHEMA_COLUMNS[self]


SCHEMA_COLUMNS = {
    Schema.derived: ("condition", "trial", "ai_correct", "adhered"),
    Schema.raw: ("condition", "trial", "ai_decision", "human_decision", "ground_truth"),
}
PARTICIPANT_COLUMN = "participant"


class RelianceCell(str, Enum):
    correct_adherence = "correct_adherence"
    wrong_adherence = "wrong_adherence"
    correct_override = "correct_override"
    wrong_override = "wrong_override"

    def __str__(self) -> str:
        return self.value


class TrialRecord(NamedTuple):
    """One decision: was the AI right, and did the human go along with it."""

    condition_id: str
    trial_id: str
    ai_correct: bool
    adhered: bool
    participant: str | None = None

    @property
    def cell(self) -> RelianceCell:
        if self.adhered:
            return RelianceCell.correct_adherence if self.ai_correct else RelianceCell.wrong_adherence
        return RelianceCell.wrong_override if self.ai_correct else RelianceCell.correct_override

    @classmethod
    def from_row(cls, row: dict[str, Any], index: int) -> Self:
        """Parse a derived-schema row into a TrialRecord."""
        return cls(
            condition_id=_text(row, "condition", index),
            trial_id=_text(row, "trial", index),
            ai_correct=_flag(row, "ai_correct", index),
            adhered=_flag(row, "adhered", index),
            participant=_participant(row, index),
        )


class RawDecisionRecord(NamedTuple):
    """One decision as logged by an experiment platform, before reduction."""

    condition_id: str
    trial_id: str
    ai_decision: str
    human_decision: str
    ground_truth: str
    participant: str | None = None

    @classmethod
    def from_row(cls, row: dict[str, Any], index: int) -> Self:
        return cls(
            condition_id=_text(row, "condition", index),
            trial_id=_text(row, "trial", index),
            ai_decision=_label(row, "ai_decision", index),
            human_decision=_label(row, "human_decision", index),
            ground_truth=_label(row, "ground_truth", index),
            participant=_participant(row, index),
        )

    @property
    def labels(self) -> set[str]:
        return {self.ai_decision, self.human_decision, self.ground_truth}

    def to_trial(self) -> TrialRecord:
        return TrialRecord(
            condition_id=self.condition_id,
            trial_id=self.trial_id,
            ai_correct=self.ai_decision == self.ground_truth,
            adhered=self.human_decision == self.ai_decision,
            participant=self.participant,
        )


def _missing(row: dict[str, Any], name: str, index: int) -> Any:
    value = row.get(name)
    if value is None:
        raise ParseError(f"missing field {name!r}", index)
    return value


def _text(row: dict[str, Any], name: str, index: int) -> str:
    value = _missing(row, name, index)
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(f"field {name!r} must be text, got {value!r}", index)
    text = str(value).strip()
    if not text:
        raise ParseError(f"field {name!r} is empty", index)
    return text


def _flag(row: dict[str, Any], name: str, index: int) -> bool:
    value = _missing(row, name, index)
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return value.strip() == "1"
    raise ParseError(f"field {name!r} must be 0 or 1, got {value!r}", index)


def _label(row: dict[str, Any], name: str, index: int) -> str:
    value = _missing(row, name, index)
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if not isinstance(value, str):
        raise ParseError(f"field {name!r} must be a label, got {value!r}", index)
    label = value.strip()
    if not label:
        # No abstain cell exists in the reliance taxonomy.
        raise ParseError(f"field {name!r} is empty; abstained decisions are not accepted", index)
    return label


def _participant(row: dict[str, Any], index: int) -> str | None:
    value = row.get(PARTICIPANT_COLUMN)
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    return _text(row, PARTICIPANT_COLUMN, index)


def _csv_rows(text: str, schema: Schema) -> Iterator[tuple[int, dict[str, Any]]]:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    header = reader.fieldnames or []
    missing = [c for c in schema.columns if c not in header]
    if missing:
        raise ParseError(f"header is missing column(s) {', '.join(missing)} for the {schema} schema", 1)
    extra = [c for c in header if c not in schema.columns and c != PARTICIPANT_COLUMN]
    if extra:
        logger.warning(f"Ignoring unknown column(s): {', '.join(extra)}")
    for row in reader:
        if None in row:
            raise ParseError("row has more fields than the header", reader.line_num)
        yield reader.line_num, row


def _json_rows(text: str) -> Iterator[tuple[int, dict[str, Any]]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e
    if not isinstance(data, list):
        raise ParseError("JSON dataset must be an array of objects")
    for i, item in enumerate(data, start=1):
        if not isinstance(item, dict):
            raise ParseError(f"expected an object, got {type(item).__name__}", i)
        yield i, item


def _read_text(source: bytes | str | BinaryIO) -> str:
    if isinstance(source, str):
        return source
    data = source if isinstance(source, bytes) else source.read()
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise ParseError(f"input is not valid UTF-8: {e}") from e


def _check_alphabet(raws: list[tuple[int, RawDecisionRecord]], labels: tuple[str, str] | None) -> None:
    if labels is not None:
        allowed = set(labels)
        for index, raw in raws:
            stray = raw.labels - allowed
            if stray:
                raise LabelError(
                    f"record {index}: label(s) {', '.join(sorted(stray))} outside the declared "
                    f"alphabet {{{', '.join(labels)}}}"
                )
        return

    seen: set[str] = set()
    for index, raw in raws:
        seen |= raw.labels
        if len(seen) > 2:
            raise LabelError(
                f"record {index}: binary decisions expected, found labels {', '.join(sorted(seen))}"
            )


def parse_dataset(
    source: bytes | str | BinaryIO,
    fmt: DataFormat = DataFormat.csv,
    schema: Schema = Schema.derived,
    labels: tuple[str, str] | None = None,
) -> list[TrialRecord]:
    """Parse a dataset into trial records, preserving row order.

    For the raw schema, ``labels`` declares the two-value alphabet; when omitted
    it is inferred and more than two distinct labels is an error.
    """
    text = _read_text(source)
    rows = _json_rows(text) if fmt == DataFormat.json else _csv_rows(text, schema)

    if schema == Schema.raw:
        raws = [(index, RawDecisionRecord.from_row(row, index)) for index, row in rows]
        _check_alphabet(raws, labels)
        records = [raw.to_trial() for _, raw in raws]
    else:
        records = [TrialRecord.from_row(row, index) for index, row in rows]

    seen: set[tuple[str, str]] = set()
    for record in records:
        key = (record.condition_id, record.trial_id)
        if key in seen:
            raise DuplicateTrial(*key)
        seen.add(key)

    logger.debug(f"Parsed {len(records)} {schema} records from {fmt}")
    return records


def load_dataset(
    path: str | Path,
    fmt: DataFormat | None = None,
    schema: Schema = Schema.derived,
    labels: tuple[str, str] | None = None,
) -> list[TrialRecord]:
    path = Path(path)
    fmt = fmt or DataFormat.from_path(path)
    logger.info(f"Loading {schema} dataset {path} ({fmt})")
    try:
        data = path.read_bytes()
    except OSError as e:
        raise IngestError(f"cannot read {path}: {e.strerror}") from e
    return parse_dataset(data, fmt, schema, labels)


def dump_dataset(records: Iterable[TrialRecord], fmt: DataFormat = DataFormat.csv) -> bytes:
    """Serialize records in the derived schema; flags are written as 0/1."""
    records = list(records)
    with_participant = any(r.participant is not None for r in records)
    columns = list(Schema.derived.columns) + ([PARTICIPANT_COLUMN] if with_participant else [])

    rows = []
    for r in records:
        row: dict[str, Any] = {
            "condition": r.condition_id,
            "trial": r.trial_id,
            "ai_correct": int(r.ai_correct),
            "adhered": int(r.adhered),
        }
        if with_participant:
            row[PARTICIPANT_COLUMN] = r.participant or ""
        rows.append(row)

    if fmt == DataFormat.json:
        return (json.dumps(rows, indent=2) + "\n").encode("utf-8")

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


@dataclass(frozen=True)
class ConditionAggregate:
    condition_id: str
    n_a_correct: int
    n_a_wrong: int
    n_o_correct: int
    n_o_wrong: int
    participant: str | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise EmptyCondition(f"condition {self.condition_id!r} has no trials")

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return self.n_a_correct, self.n_a_wrong, self.n_o_correct, self.n_o_wrong

    @property
    def n(self) -> int:
        return sum(self.counts)

    @classmethod
    def from_records(cls, condition_id: str, records: Iterable[TrialRecord], participant: str | None = None) -> Self:
        cells = Counter(r.cell for r in records)
        return cls(
            condition_id=condition_id,
            n_a_correct=cells[RelianceCell.correct_adherence],
            n_a_wrong=cells[RelianceCell.wrong_adherence],
            n_o_correct=cells[RelianceCell.correct_override],
            n_o_wrong=cells[RelianceCell.wrong_override],
            participant=participant,
        )


def group_by_condition(records: Iterable[TrialRecord]) -> dict[str, list[TrialRecord]]:
    """Records per condition, conditions in lexicographic order."""
    groups: dict[str, list[TrialRecord]] = defaultdict(list)
    for record in records:
        groups[record.condition_id].append(record)
    return {condition: groups[condition] for condition in sorted(groups)}


def aggregate(records: Iterable[TrialRecord]) -> list[ConditionAggregate]:
    groups = group_by_condition(records)
    if not groups:
        raise EmptyDataset("dataset contains no trials")
    return [ConditionAggregate.from_records(condition, group) for condition, group in groups.items()]


def has_participants(records: Iterable[TrialRecord]) -> bool:
    records = list(records)
    return bool(records) and all(r.participant is not None for r in records)


def aggregate_by_participant(records: Iterable[TrialRecord]) -> dict[str, list[ConditionAggregate]]:
    """Per-participant aggregates for every condition."""
    groups = group_by_condition(records)
    if not groups:
        raise EmptyDataset("dataset contains no trials")

    result = {}
    for condition, group in groups.items():
        by_participant: dict[str, list[TrialRecord]] = defaultdict(list)
        for record in group:
            if record.participant is None:
                raise IngestError(
                    f"condition {condition!r} trial {record.trial_id!r} has no participant; "
                    f"per-participant aggregation needs the column on every row"
                )
            by_participant[record.participant].append(record)
        result[condition] = [
            ConditionAggregate.from_records(condition, by_participant[p], participant=p)
            for p in sorted(by_participant)
        ]
    return result


def to_profile(agg: ConditionAggregate, tol: float = TOLERANCE) -> RelianceProfile:
    """Reduce counts to a profile, rejecting AIs that are no better than chance."""
    profile = profile_from_counts(*agg.counts)
    check_ai_accuracy(profile.ai_accuracy, tol)
    logger.debug(
        f"{agg.condition_id}: n={agg.n} A={profile.adherence:.4f} "
        f"Acc_AI={profile.ai_accuracy:.4f} Acc_final={profile.final_accuracy:.4f}"
    )
    return profile
