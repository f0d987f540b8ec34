"""Per-condition metric bundles and baseline comparisons, as JSON or rich tables.

JSON keys come out in a fixed order and fractions are rounded to 9 decimals,
so reports diff cleanly. Percent strings only appear in the table views.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

import numpy as np
from loguru import logger
from rich.table import Table

from reliance_lens.bootstrap import ConditionIntervals
from reliance_lens.config import Settings
from reliance_lens.core import (
    AccuracyEnvelope,
    InterventionEffect,
    RelianceClass,
    RelianceProfile,
    classify,
    compare_conditions,
    discernment_gap,
    envelope,
    expected_accuracy_nondiscerning,
    profile_from_counts,
    quality,
)
from reliance_lens.errors import DomainError, OutOfScopeAiAccuracy, UnknownCondition
from reliance_lens.ingest import ConditionAggregate, to_profile

DECIMALS = 9


def _round(value: float | None) -> float | None:
    return None if value is None else round(value, DECIMALS)


def _pct(value: float | None) -> str:
    return "undefined" if value is None else f"{value * 100:.1f}%"


def _signed_pct(value: float | None) -> str:
    return "undefined" if value is None else f"{value * 100:+.1f} pp"


@dataclass(frozen=True)
class ParticipantSummary:
    """Metrics averaged over participants instead of pooled over trials."""

    participants: int
    adherence: float
    final_accuracy: float
    quality: float | None
    quality_participants: int

    @classmethod
    def from_aggregates(cls, aggregates: Sequence[ConditionAggregate], tol: float) -> ParticipantSummary:
        profiles = [profile_from_counts(*agg.counts) for agg in aggregates]
        qualities = []
        for agg, profile in zip(aggregates, profiles):
            try:
                q = quality(profile, tol)
            except OutOfScopeAiAccuracy:
                logger.warning(
                    f"{agg.condition_id}/{agg.participant}: participant-level Acc_AI="
                    f"{profile.ai_accuracy:.3f} is out of scope; left out of the macro quality"
                )
                continue
            if q is not None:
                qualities.append(q)
        return cls(
            participants=len(profiles),
            adherence=float(np.mean([p.adherence for p in profiles])),
            final_accuracy=float(np.mean([p.final_accuracy for p in profiles])),
            quality=float(np.mean(qualities)) if qualities else None,
            quality_participants=len(qualities),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "participants": self.participants,
            "adherence": _round(self.adherence),
            "final_accuracy": _round(self.final_accuracy),
            "quality": _round(self.quality),
            "quality_participants": self.quality_participants,
        }


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    n: int
    counts: tuple[int, int, int, int]
    profile: RelianceProfile
    quality: float | None
    classification: RelianceClass
    envelope: AccuracyEnvelope
    expected_nondiscerning_accuracy: float
    discernment_gap: float
    participants: ParticipantSummary | None = None
    intervals: ConditionIntervals | None = None

    @property
    def adherence(self) -> float:
        return self.profile.adherence

    @property
    def ai_accuracy(self) -> float:
        return self.profile.ai_accuracy

    @property
    def final_accuracy(self) -> float:
        return self.profile.final_accuracy

    def to_dict(self) -> dict[str, Any]:
        a_correct, a_wrong, o_correct, o_wrong = self.counts
        out: dict[str, Any] = {
            "condition_id": self.condition_id,
            "n": self.n,
            "counts": {
                "a_correct": a_correct,
                "a_wrong": a_wrong,
                "o_correct": o_correct,
                "o_wrong": o_wrong,
            },
            "decomposition": {
                "a_correct": _round(self.profile.a_correct),
                "a_wrong": _round(self.profile.a_wrong),
                "o_correct": _round(self.profile.o_correct),
                "o_wrong": _round(self.profile.o_wrong),
            },
            "adherence": _round(self.adherence),
            "ai_accuracy": _round(self.ai_accuracy),
            "final_accuracy": _round(self.final_accuracy),
            "quality": _round(self.quality),
            "classification": {
                "tag": str(self.classification.tag),
                "complementarity_feasible": self.classification.complementarity_feasible,
            },
            "envelope": {
                "lo": _round(self.envelope.lo),
                "hi": _round(self.envelope.hi),
                "width": _round(self.envelope.width),
            },
            "expected_nondiscerning_accuracy": _round(self.expected_nondiscerning_accuracy),
            "discernment_gap": _round(self.discernment_gap),
        }
        if self.participants is not None:
            out["participants"] = self.participants.to_dict()
        if self.intervals is not None:
            iv = self.intervals
            out["intervals"] = {
                "replicates": iv.replicates,
                "level": iv.level,
                "adherence": [_round(v) for v in iv.adherence],
                "final_accuracy": [_round(v) for v in iv.final_accuracy],
                "quality": None if iv.quality is None else [_round(v) for v in iv.quality],
            }
        return out


def build_condition_report(
    agg: ConditionAggregate,
    settings: Settings = Settings(),
    participants: Sequence[ConditionAggregate] | None = None,
    intervals: ConditionIntervals | None = None,
) -> ConditionReport:
    """Every metric of one condition, recomputed from its four counts."""
    tol = settings.tolerance
    profile = to_profile(agg, tol)
    return ConditionReport(
        condition_id=agg.condition_id,
        n=agg.n,
        counts=agg.counts,
        profile=profile,
        quality=quality(profile, tol),
        classification=classify(profile, tol),
        envelope=envelope(profile.ai_accuracy, profile.adherence, tol),
        expected_nondiscerning_accuracy=expected_accuracy_nondiscerning(profile.ai_accuracy, profile.adherence, tol),
        discernment_gap=discernment_gap(profile, tol),
        participants=ParticipantSummary.from_aggregates(participants, tol) if participants else None,
        intervals=intervals,
    )


class NarrativeTag(str, Enum):
    """How an intervention moved accuracy: through adherence quantity or reliance quality."""

    quality_driven = "QualityDriven"
    quantity_driven = "QuantityDriven"
    mixed = "Mixed"
    mixed_degenerate = "Mixed-degenerate"

    def __str__(self) -> str:
        return self.value


def narrative_tag(effect: InterventionEffect, settings: Settings = Settings()) -> NarrativeTag:
    tol = settings.tolerance
    dq, da = effect.delta_quality, effect.delta_adherence
    # Nothing moved, e.g. a condition compared with itself.
    if abs(da) <= tol and abs(effect.delta_final_accuracy) <= tol and (dq is None or abs(dq) <= tol):
        return NarrativeTag.mixed_degenerate
    if dq is None:
        return NarrativeTag.mixed
    if dq > settings.quality_threshold and da <= tol:
        return NarrativeTag.quality_driven
    if da > settings.quantity_threshold and dq <= tol:
        return NarrativeTag.quantity_driven
    return NarrativeTag.mixed


@dataclass(frozen=True)
class TreatmentComparison:
    report: ConditionReport
    effect: InterventionEffect
    tag: NarrativeTag

    def to_dict(self) -> dict[str, Any]:
        return {
            "report": self.report.to_dict(),
            "deltas": {
                "adherence": _round(self.effect.delta_adherence),
                "final_accuracy": _round(self.effect.delta_final_accuracy),
                "quality": _round(self.effect.delta_quality),
                "discernment_gap": _round(self.effect.delta_discernment_gap),
            },
            "tag": str(self.tag),
        }


@dataclass(frozen=True)
class CompareReport:
    baseline: ConditionReport
    treatments: list[TreatmentComparison]

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline": self.baseline.to_dict(),
            "treatments": [t.to_dict() for t in self.treatments],
        }


def build_compare_report(
    reports: Sequence[ConditionReport], baseline_id: str, settings: Settings = Settings()
) -> CompareReport:
    by_id = {r.condition_id: r for r in reports}
    if baseline_id not in by_id:
        raise UnknownCondition(baseline_id, sorted(by_id))
    if len(by_id) < 2:
        raise DomainError("comparing conditions needs at least two conditions in the dataset")

    baseline = by_id[baseline_id]
    treatments = []
    for report in reports:
        if report.condition_id == baseline_id:
            continue
        effect = compare_conditions(baseline.profile, report.profile, settings.tolerance)
        tag = narrative_tag(effect, settings)
        logger.info(
            f"{report.condition_id} vs {baseline_id}: dA={effect.delta_adherence:+.3f} "
            f"dAcc={effect.delta_final_accuracy:+.3f} dQ={effect.delta_quality} -> {tag}"
        )
        treatments.append(TreatmentComparison(report=report, effect=effect, tag=tag))
    return CompareReport(baseline=baseline, treatments=treatments)


def to_json(payload: Any) -> str:
    if isinstance(payload, (ConditionReport, CompareReport)):
        payload = payload.to_dict()
    elif isinstance(payload, list):
        payload = [p.to_dict() for p in payload]
    return json.dumps(payload, indent=2) + "\n"


def reports_table(reports: Sequence[ConditionReport]) -> Table:
    table = Table(title="Reliance by condition")
    for column in ("condition", "n", "A", "Acc_AI", "Acc_final", "envelope", "Q", "class", "complementarity"):
        table.add_column(column, justify="left" if column in ("condition", "class") else "right")
    for r in reports:
        table.add_row(
            r.condition_id,
            str(r.n),
            _pct(r.adherence),
            _pct(r.ai_accuracy),
            _pct(r.final_accuracy),
            f"[{_pct(r.envelope.lo)}, {_pct(r.envelope.hi)}]",
            "undefined" if r.quality is None else f"{r.quality:.3f}",
            str(r.classification.tag),
            "[green]feasible[/]" if r.classification.complementarity_feasible else "[red]infeasible[/]",
        )
    return table


def compare_table(report: CompareReport) -> Table:
    table = Table(title=f"Interventions vs {report.baseline.condition_id}")
    for column in ("condition", "ΔA", "ΔAcc_final", "ΔQ", "tag"):
        table.add_column(column, justify="left" if column in ("condition", "tag") else "right")
    for t in report.treatments:
        table.add_row(
            t.report.condition_id,
            _signed_pct(t.effect.delta_adherence),
            _signed_pct(t.effect.delta_final_accuracy),
            "undefined" if t.effect.delta_quality is None else f"{t.effect.delta_quality:+.3f}",
            f"[bold]{t.tag}[/]",
        )
    return table
