"""Percentile bootstrap intervals for adherence, final accuracy and reliance quality.

Trials are resampled with replacement within a condition. Each condition gets
its own child seed of ``SeedSequence(seed)``, in lexicographic condition order.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple, Sequence

import numpy as np
from loguru import logger

from reliance_lens.config import TOLERANCE
from reliance_lens.core import profile_from_counts, quality
from reliance_lens.errors import ConfigError, OutOfScopeAiAccuracy
from reliance_lens.ingest import RelianceCell, TrialRecord
from reliance_lens.simulate import make_rng

_CELL_ORDER = (
    RelianceCell.correct_adherence,
    RelianceCell.wrong_adherence,
    RelianceCell.correct_override,
    RelianceCell.wrong_override,
)


class ConfidenceInterval(NamedTuple):
    lo: float
    hi: float


class ConditionIntervals(NamedTuple):
    replicates: int
    level: float
    adherence: ConfidenceInterval
    final_accuracy: ConfidenceInterval
    quality: ConfidenceInterval | None


def _percentiles(values: Sequence[float], level: float) -> ConfidenceInterval:
    tail = (1 - level) / 2
    lo, hi = np.quantile(np.asarray(values, dtype=float), [tail, 1 - tail])
    return ConfidenceInterval(float(lo), float(hi))


def condition_intervals(
    records: Sequence[TrialRecord],
    replicates: int,
    rng: np.random.Generator,
    level: float = 0.95,
    tol: float = TOLERANCE,
) -> ConditionIntervals:
    codes = np.array([_CELL_ORDER.index(r.cell) for r in records], dtype=np.int64)
    n = len(codes)
    samples = codes[rng.integers(0, n, size=(replicates, n))]
    counts = np.stack([(samples == c).sum(axis=1) for c in range(4)], axis=1)

    adherence, final, qualities = [], [], []
    skipped = 0
    for row in counts:
        profile = profile_from_counts(*(int(c) for c in row))
        adherence.append(profile.adherence)
        final.append(profile.final_accuracy)
        try:
            q = quality(profile, tol)
        except OutOfScopeAiAccuracy:
            skipped += 1
            continue
        if q is not None:
            qualities.append(q)

    if skipped:
        logger.warning(
            f"{records[0].condition_id}: {skipped}/{replicates} bootstrap resamples had Acc_AI <= 0.5 "
            f"and were left out of the quality interval"
        )
    return ConditionIntervals(
        replicates=replicates,
        level=level,
        adherence=_percentiles(adherence, level),
        final_accuracy=_percentiles(final, level),
        quality=_percentiles(qualities, level) if qualities else None,
    )


def bootstrap_intervals(
    groups: Mapping[str, Sequence[TrialRecord]],
    replicates: int,
    seed: int,
    level: float = 0.95,
    tol: float = TOLERANCE,
) -> dict[str, ConditionIntervals]:
    if replicates < 1:
        raise ConfigError(f"bootstrap replicates must be at least 1, got {replicates}")
    if not 0 < level < 1:
        raise ConfigError(f"confidence level must lie in (0, 1), got {level}")

    conditions = sorted(groups)
    children = np.random.SeedSequence(seed).spawn(len(conditions))
    logger.info(f"Bootstrapping {len(conditions)} condition(s) with {replicates} replicates, seed={seed}")
    return {
        condition: condition_intervals(groups[condition], replicates, make_rng(child), level, tol)
        for condition, child in zip(conditions, children)
    }
