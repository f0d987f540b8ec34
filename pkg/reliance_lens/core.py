"""Reliance decomposition, attainable-accuracy envelope and reliance quality.

All quantities are fractions in [0, 1]; percentages only show up when results
are formatted for people. Every function here is pure.

The four reliance cells for binary decisions:

                        AI correct           AI wrong
    adhere to AI        correct adherence    wrong adherence
    override AI         wrong override       correct override

so that, by construction,

    A       = a_correct + a_wrong
    O       = o_correct + o_wrong = 1 - A
    Acc_AI  = a_correct + o_wrong
    Acc_fin = a_correct + o_correct
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, TypeAlias

from reliance_lens.config import TOLERANCE
from reliance_lens.errors import AiAccuracyMismatch, DomainError, EmptyCondition, OutOfScopeAiAccuracy

# Unitless value in [0, 1].
Fraction: TypeAlias = float


def check_fraction(name: str, value: float, tol: float = TOLERANCE) -> Fraction:
    """Validate ``value`` as a fraction, snapping float noise within ``tol`` onto [0, 1]."""
    value = float(value)
    if not -tol <= value <= 1 + tol:
        raise DomainError(f"{name} must lie in [0, 1], got {value:.9g}")
    return min(max(value, 0.0), 1.0)


def check_ai_accuracy(acc: float, tol: float = TOLERANCE) -> Fraction:
    acc = check_fraction("AI accuracy", acc, tol)
    if acc - 0.5 <= tol:
        raise OutOfScopeAiAccuracy(acc)
    return acc


def _clip(value: float) -> Fraction:
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class RelianceProfile:
    """The four-way adherence/override decomposition of one condition."""

    a_correct: Fraction
    a_wrong: Fraction
    o_correct: Fraction
    o_wrong: Fraction

    def __post_init__(self) -> None:
        for name in ("a_correct", "a_wrong", "o_correct", "o_wrong"):
            value = getattr(self, name)
            if not -TOLERANCE <= value <= 1 + TOLERANCE:
                raise DomainError(f"{name} must lie in [0, 1], got {value:.9g}")
        total = self.a_correct + self.a_wrong + self.o_correct + self.o_wrong
        if abs(total - 1) > TOLERANCE:
            raise DomainError(f"reliance cells must sum to 1, got {total:.12g}")

    @property
    def adherence(self) -> Fraction:
        return self.a_correct + self.a_wrong

    @property
    def override(self) -> Fraction:
        return self.o_correct + self.o_wrong

    @property
    def ai_accuracy(self) -> Fraction:
        return self.a_correct + self.o_wrong

    @property
    def final_accuracy(self) -> Fraction:
        return self.a_correct + self.o_correct

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self.a_correct, self.a_wrong, self.o_correct, self.o_wrong


def profile_from_counts(n_a_correct: int, n_a_wrong: int, n_o_correct: int, n_o_wrong: int) -> RelianceProfile:
    counts = (n_a_correct, n_a_wrong, n_o_correct, n_o_wrong)
    if any(c < 0 for c in counts):
        raise DomainError(f"counts must be non-negative, got {counts}")
    n = sum(counts)
    if n == 0:
        raise EmptyCondition("cannot build a reliance profile from zero trials")
    return RelianceProfile(*(c / n for c in counts))


@dataclass(frozen=True)
class AccuracyEnvelope:
    """Range ``[lo, hi]`` of final accuracies attainable at a fixed adherence."""

    adherence: Fraction
    lo: Fraction
    hi: Fraction
    width: Fraction

    def contains(self, final_accuracy: float, tol: float = TOLERANCE) -> bool:
        return self.lo - tol <= final_accuracy <= self.hi + tol


def envelope(acc: float, adherence: float, tol: float = TOLERANCE) -> AccuracyEnvelope:
    acc = check_ai_accuracy(acc, tol)
    a = check_fraction("adherence", adherence, tol)
    if a <= 1 - acc:
        lo, hi = 1 - acc - a, 1 - acc + a
    elif a <= acc:
        lo, hi = acc + a - 1, 1 - acc + a
    else:
        lo, hi = acc + a - 1, 1 + acc - a
    lo, hi = _clip(lo), _clip(hi)
    return AccuracyEnvelope(adherence=a, lo=lo, hi=hi, width=hi - lo)


def envelope_width(acc: float, adherence: float, tol: float = TOLERANCE) -> Fraction:
    acc = check_ai_accuracy(acc, tol)
    a = check_fraction("adherence", adherence, tol)
    if a <= 1 - acc:
        return 2 * a
    if a <= acc:
        return 2 * (1 - acc)
    return 2 * (1 - a)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @classmethod
    def empty(cls) -> Interval:
        return cls(lo=1.0, hi=0.0)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    def contains(self, value: float, tol: float = TOLERANCE) -> bool:
        return not self.is_empty and self.lo - tol <= value <= self.hi + tol


def invert_accuracy(acc: float, final_accuracy: float, tol: float = TOLERANCE) -> Interval:
    """Adherence levels whose envelope contains ``final_accuracy``.

    The attainable region is symmetric about the diagonal, so the inverse is the
    envelope evaluated at the accuracy itself. The candidate ends are checked
    against the forward envelope and an empty interval is returned if either
    fails.
    """
    acc = check_ai_accuracy(acc, tol)
    x = check_fraction("final accuracy", final_accuracy, tol)
    candidate = envelope(acc, x, tol)
    for end in (candidate.lo, candidate.hi):
        if not envelope(acc, end, tol).contains(x, tol):
            return Interval.empty()
    return Interval(lo=candidate.lo, hi=candidate.hi)


def expected_accuracy_nondiscerning(acc: float, adherence: float, tol: float = TOLERANCE) -> Fraction:
    """Expected final accuracy when adherence is independent of AI correctness."""
    acc = check_ai_accuracy(acc, tol)
    a = check_fraction("adherence", adherence, tol)
    return (1 - acc) + (2 * acc - 1) * a


def nondiscerning_profile(acc: float, adherence: float, tol: float = TOLERANCE) -> RelianceProfile:
    acc = check_ai_accuracy(acc, tol)
    a = check_fraction("adherence", adherence, tol)
    return RelianceProfile(
        a_correct=a * acc,
        a_wrong=a * (1 - acc),
        o_correct=(1 - a) * (1 - acc),
        o_wrong=(1 - a) * acc,
    )


def quality(p: RelianceProfile, tol: float = TOLERANCE) -> Fraction | None:
    """Position of the final accuracy inside the envelope, 0 at the bottom and 1 at the top.

    Returns ``None`` where the envelope has zero width (A = 0 or A = 1).
    """
    acc = check_ai_accuracy(p.ai_accuracy, tol)
    env = envelope(acc, p.adherence, tol)
    if env.width <= tol:
        return None
    return _clip((p.final_accuracy - env.lo) / env.width)


def discernment_gap(p: RelianceProfile, tol: float = TOLERANCE) -> float:
    """Signed distance of the final accuracy from the non-discernment line.

    Positive above the line, negative below it (worse than adhering at random).
    """
    acc = check_ai_accuracy(p.ai_accuracy, tol)
    return p.final_accuracy - expected_accuracy_nondiscerning(acc, p.adherence, tol)


class RelianceTag(str, Enum):
    under_reliance = "under_reliance"
    over_reliance = "over_reliance"
    matched_adherence = "matched_adherence"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RelianceClass:
    tag: RelianceTag
    complementarity_feasible: bool


def complementarity_threshold(acc: float, tol: float = TOLERANCE) -> Fraction:
    """Adherence above which final accuracy can exceed the AI accuracy."""
    return 2 * check_ai_accuracy(acc, tol) - 1


def classify(p: RelianceProfile, tol: float = TOLERANCE) -> RelianceClass:
    acc = check_ai_accuracy(p.ai_accuracy, tol)
    a = p.adherence
    if abs(a - acc) <= tol:
        tag = RelianceTag.matched_adherence
    elif a < acc:
        tag = RelianceTag.under_reliance
    else:
        tag = RelianceTag.over_reliance
    # Strict: at the threshold itself the best attainable accuracy only equals the AI's.
    feasible = a - complementarity_threshold(acc, tol) > tol
    return RelianceClass(tag=tag, complementarity_feasible=feasible)


class ExtremalProfiles(NamedTuple):
    best: RelianceProfile
    worst: RelianceProfile


def extremal_profiles(acc: float, adherence: float, tol: float = TOLERANCE) -> ExtremalProfiles:
    """Reliance behaviors reaching the top and the bottom of the envelope."""
    acc = check_ai_accuracy(acc, tol)
    a = check_fraction("adherence", adherence, tol)
    o = 1 - a

    if a <= acc:
        # Every adherence goes to a correct recommendation.
        best = RelianceProfile(a, 0.0, 1 - acc, _clip(acc - a))
    else:
        # Every override corrects a wrong recommendation.
        best = RelianceProfile(acc, _clip(1 - acc - o), o, 0.0)

    if a <= 1 - acc:
        # Every adherence goes to a wrong recommendation.
        worst = RelianceProfile(0.0, a, _clip(1 - acc - a), acc)
    else:
        # Every override discards a correct recommendation.
        worst = RelianceProfile(_clip(acc - o), 1 - acc, 0.0, o)

    return ExtremalProfiles(best=best, worst=worst)


def is_perfect_reliance(p: RelianceProfile, tol: float = TOLERANCE) -> bool:
    return p.a_wrong <= tol and p.o_wrong <= tol


@dataclass(frozen=True)
class InterventionEffect:
    """Movement of a treatment condition relative to a baseline under the same AI."""

    delta_adherence: float
    delta_final_accuracy: float
    delta_quality: float | None
    delta_discernment_gap: float
    baseline_class: RelianceClass
    treatment_class: RelianceClass


def compare_conditions(
    baseline: RelianceProfile, treatment: RelianceProfile, tol: float = TOLERANCE
) -> InterventionEffect:
    base_acc = check_ai_accuracy(baseline.ai_accuracy, tol)
    treat_acc = check_ai_accuracy(treatment.ai_accuracy, tol)
    if abs(base_acc - treat_acc) > tol:
        raise AiAccuracyMismatch(base_acc, treat_acc, tol)

    base_q, treat_q = quality(baseline, tol), quality(treatment, tol)
    delta_q = None if base_q is None or treat_q is None else treat_q - base_q
    return InterventionEffect(
        delta_adherence=treatment.adherence - baseline.adherence,
        delta_final_accuracy=treatment.final_accuracy - baseline.final_accuracy,
        delta_quality=delta_q,
        delta_discernment_gap=discernment_gap(treatment, tol) - discernment_gap(baseline, tol),
        baseline_class=classify(baseline, tol),
        treatment_class=classify(treatment, tol),
    )
