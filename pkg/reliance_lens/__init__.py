"""Reliance behavior metrics, simulation and visual framework for AI-assisted binary decisions."""

from reliance_lens.core import (
    AccuracyEnvelope,
    InterventionEffect,
    Interval,
    RelianceClass,
    RelianceProfile,
    RelianceTag,
    classify,
    compare_conditions,
    discernment_gap,
    envelope,
    envelope_width,
    expected_accuracy_nondiscerning,
    extremal_profiles,
    invert_accuracy,
    is_perfect_reliance,
    nondiscerning_profile,
    profile_from_counts,
    quality,
)

__all__ = [
    "AccuracyEnvelope",
    "InterventionEffect",
    "Interval",
    "RelianceClass",
    "RelianceProfile",
    "RelianceTag",
    "classify",
    "compare_conditions",
    "discernment_gap",
    "envelope",
    "envelope_width",
    "expected_accuracy_nondiscerning",
    "extremal_profiles",
    "invert_accuracy",
    "is_perfect_reliance",
    "nondiscerning_profile",
    "profile_from_counts",
    "quality",
]
