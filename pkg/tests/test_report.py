from __future__ import annotations

import json

import pytest

from reliance_lens.config import Settings
from reliance_lens.core import (
    InterventionEffect,
    RelianceClass,
    RelianceTag,
    compare_conditions,
    nondiscerning_profile,
    profile_from_counts,
)
from reliance_lens.errors import AiAccuracyMismatch, DomainError, UnknownCondition
from reliance_lens.ingest import ConditionAggregate, aggregate, aggregate_by_participant
from reliance_lens.report import (
    NarrativeTag,
    ParticipantSummary,
    build_compare_report,
    build_condition_report,
    narrative_tag,
    to_json,
)
from tests.conftest import PERFECT, WORST, STUDY, records_from_counts

TOL = 1e-9


def study_reports():
    return [build_condition_report(ConditionAggregate(name, *counts)) for name, counts in STUDY.items()]


def effect(delta_adherence: float, delta_quality: float | None) -> InterventionEffect:
    cls = RelianceClass(RelianceTag.under_reliance, complementarity_feasible=True)
    return InterventionEffect(delta_adherence, 0.0, delta_quality, 0.0, cls, cls)


class TestConditionReport:
    def test_perfect(self):
        report = build_condition_report(ConditionAggregate("perfect", *PERFECT))
        assert report.quality == pytest.approx(1.0, abs=TOL)
        assert report.final_accuracy == pytest.approx(1.0, abs=TOL)
        assert report.classification.tag == RelianceTag.matched_adherence

    def test_worst(self):
        report = build_condition_report(ConditionAggregate("worst", *WORST))
        assert report.quality == pytest.approx(0.0, abs=TOL)
        assert report.final_accuracy == pytest.approx(0.4, abs=TOL)

    @pytest.mark.parametrize("name", sorted(STUDY))
    def test_recomputes_from_counts(self, name):
        report = build_condition_report(ConditionAggregate(name, *STUDY[name]))
        profile = profile_from_counts(*report.counts)
        assert report.profile == profile
        assert report.adherence == pytest.approx(profile.a_correct + profile.a_wrong, abs=TOL)
        assert report.envelope.contains(report.final_accuracy)
        assert report.discernment_gap == pytest.approx(
            report.final_accuracy - report.expected_nondiscerning_accuracy, abs=TOL
        )

    @pytest.mark.parametrize(
        "name, quality, gap, tag, feasible",
        [
            ("control", 0.5, 0.0, RelianceTag.under_reliance, True),
            ("blue", 1.0, 0.18, RelianceTag.under_reliance, False),
            ("purple", 0.0, -0.06, RelianceTag.over_reliance, True),
        ],
    )
    def test_study_metrics(self, name, quality, gap, tag, feasible):
        report = build_condition_report(ConditionAggregate(name, *STUDY[name]))
        assert report.quality == pytest.approx(quality, abs=1e-7)
        assert report.discernment_gap == pytest.approx(gap, abs=1e-7)
        assert report.classification.tag == tag
        assert report.classification.complementarity_feasible is feasible

    def test_undefined_quality_at_full_adherence(self):
        report = build_condition_report(ConditionAggregate("always", 7, 3, 0, 0))
        assert report.quality is None
        assert report.to_dict()["quality"] is None

    def test_json_key_order(self):
        report = build_condition_report(ConditionAggregate("perfect", *PERFECT))
        (payload,) = json.loads(to_json([report]))
        assert list(payload) == [
            "condition_id",
            "n",
            "counts",
            "decomposition",
            "adherence",
            "ai_accuracy",
            "final_accuracy",
            "quality",
            "classification",
            "envelope",
            "expected_nondiscerning_accuracy",
            "discernment_gap",
        ]
        assert payload["counts"] == {"a_correct": 7, "a_wrong": 0, "o_correct": 3, "o_wrong": 0}
        assert payload["classification"] == {"tag": "matched_adherence", "complementarity_feasible": True}


class TestParticipantSummary:
    def test_macro_average(self):
        records = (
            records_from_counts("arm", PERFECT, participant="p1")
            + records_from_counts("arm", WORST, participant="p2", start=100)
            + records_from_counts("arm", (5, 5, 0, 0), participant="p3", start=200)
        )
        (aggs,) = aggregate_by_participant(records).values()
        summary = ParticipantSummary.from_aggregates(aggs, TOL)
        assert summary.participants == 3
        assert summary.adherence == pytest.approx((0.7 + 0.7 + 1.0) / 3)
        assert summary.final_accuracy == pytest.approx((1.0 + 0.4 + 0.5) / 3)
        # p3 ran with a coin-flip AI and is left out of the quality average.
        assert summary.quality == pytest.approx(0.5)
        assert summary.quality_participants == 2

    def test_attached_to_report(self):
        records = records_from_counts("arm", PERFECT, participant="p1") + records_from_counts(
            "arm", WORST, participant="p2", start=100
        )
        (agg,) = aggregate(records)
        report = build_condition_report(agg, participants=aggregate_by_participant(records)["arm"])
        assert report.to_dict()["participants"]["participants"] == 2


class TestNarrativeTag:
    @pytest.mark.parametrize(
        "delta_adherence, delta_quality, expected",
        [
            (-0.2, 0.5, NarrativeTag.quality_driven),
            (0.0, 0.1, NarrativeTag.quality_driven),
            (0.4, -0.5, NarrativeTag.quantity_driven),
            (0.1, 0.0, NarrativeTag.quantity_driven),
            (0.2, 0.2, NarrativeTag.mixed),
            (-0.1, -0.1, NarrativeTag.mixed),
            (0.03, -0.2, NarrativeTag.mixed),
            (0.3, None, NarrativeTag.mixed),
            (0.0, 0.0, NarrativeTag.mixed_degenerate),
            (0.0, None, NarrativeTag.mixed_degenerate),
        ],
    )
    def test_default_thresholds(self, delta_adherence, delta_quality, expected):
        assert narrative_tag(effect(delta_adherence, delta_quality)) == expected

    def test_custom_threshold(self):
        settings = Settings(quantity_threshold=0.01)
        assert narrative_tag(effect(0.03, -0.2), settings) == NarrativeTag.quantity_driven

    @pytest.mark.parametrize("adherence", [0.5, 1.0])
    def test_condition_against_itself(self, adherence):
        p = nondiscerning_profile(0.7, adherence)
        same = compare_conditions(p, p)
        assert (same.delta_adherence, same.delta_final_accuracy, same.delta_discernment_gap) == (0.0, 0.0, 0.0)
        assert same.delta_quality in (0.0, None)
        assert narrative_tag(same) == NarrativeTag.mixed_degenerate
        assert str(narrative_tag(same)) == "Mixed-degenerate"


class TestCompareReport:
    def test_study(self):
        comparison = build_compare_report(study_reports(), "control")
        by_id = {t.report.condition_id: t for t in comparison.treatments}
        assert comparison.baseline.condition_id == "control"
        assert set(by_id) == {"blue", "purple"}

        blue, purple = by_id["blue"], by_id["purple"]
        assert blue.effect.delta_adherence == pytest.approx(-0.2, abs=1e-7)
        assert blue.effect.delta_final_accuracy == pytest.approx(0.1, abs=1e-7)
        assert blue.effect.delta_quality == pytest.approx(0.5, abs=1e-7)
        assert blue.tag == NarrativeTag.quality_driven
        assert purple.effect.delta_adherence == pytest.approx(0.4, abs=1e-7)
        assert purple.effect.delta_final_accuracy == pytest.approx(0.1, abs=1e-7)
        assert purple.effect.delta_quality == pytest.approx(-0.5, abs=1e-7)
        assert purple.tag == NarrativeTag.quantity_driven

    def test_json(self):
        payload = json.loads(to_json(build_compare_report(study_reports(), "control")))
        assert list(payload) == ["baseline", "treatments"]
        assert [t["tag"] for t in payload["treatments"]] == ["QualityDriven", "QuantityDriven"]
        assert list(payload["treatments"][0]["deltas"]) == ["adherence", "final_accuracy", "quality", "discernment_gap"]

    def test_unknown_baseline(self):
        with pytest.raises(UnknownCondition):
            build_compare_report(study_reports(), "placebo")

    def test_needs_two_conditions(self):
        with pytest.raises(DomainError):
            build_compare_report(study_reports()[:1], "control")

    def test_ai_accuracy_mismatch(self):
        reports = [
            build_condition_report(ConditionAggregate("perfect", *PERFECT)),
            build_condition_report(ConditionAggregate("stronger", 8, 0, 2, 0)),
        ]
        with pytest.raises(AiAccuracyMismatch):
            build_compare_report(reports, "perfect")
