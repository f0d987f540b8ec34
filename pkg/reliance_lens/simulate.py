"""Synthetic reliance behavior and an exhaustive oracle for the envelope bounds."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np
from loguru import logger

from reliance_lens.config import TOLERANCE
from reliance_lens.core import RelianceProfile, check_ai_accuracy, envelope
from reliance_lens.errors import ConfigError, DomainError
from reliance_lens.ingest import TrialRecord

# Part of the output contract: regression values depend on this exact generator.
RNG_NAME = "numpy.random.PCG64"

MAX_ORACLE_N = 20


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class BehaviorModel:
    """Probabilities of adhering to a correct and to a wrong AI recommendation."""

    p_adhere_given_correct: float
    p_adhere_given_wrong: float

    def __post_init__(self) -> None:
        for name in ("p_adhere_given_correct", "p_adhere_given_wrong"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")

    @classmethod
    def nondiscerning(cls, adherence: float) -> BehaviorModel:
        return cls(adherence, adherence)

    @property
    def is_nondiscerning(self) -> bool:
        return abs(self.p_adhere_given_correct - self.p_adhere_given_wrong) <= TOLERANCE


class Composition(str, Enum):
    """How many AI recommendations are correct in a simulated batch."""

    bernoulli = "bernoulli"
    fixed = "fixed"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SimConfig:
    acc: float
    model: BehaviorModel
    n_trials: int
    seed: int = 0
    composition: Composition = Composition.fixed
    condition_id: str = "sim"

    def __post_init__(self) -> None:
        check_ai_accuracy(self.acc)
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be at least 1, got {self.n_trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.composition == Composition.fixed:
            exact = self.n_trials * self.acc
            if abs(exact - round(exact)) > TOLERANCE * self.n_trials:
                raise ConfigError(
                    f"fixed composition needs n_trials * acc to be an integer, "
                    f"got {self.n_trials} * {self.acc} = {exact:.9g}"
                )

    @property
    def correct_count(self) -> int:
        return round(self.n_trials * self.acc)


def simulate(config: SimConfig) -> list[TrialRecord]:
    """Draw trial records for a behavior model; identical configs give identical records."""
    logger.info(
        f"Simulating {config.n_trials} trials ({config.composition}) with {RNG_NAME} seed={config.seed}"
    )
    rng = make_rng(config.seed)
    n = config.n_trials

    if config.composition == Composition.fixed:
        ai_correct = np.zeros(n, dtype=bool)
        ai_correct[: config.correct_count] = True
        ai_correct = rng.permutation(ai_correct)
    else:
        ai_correct = rng.random(n) < config.acc

    p_adhere = np.where(
        ai_correct, config.model.p_adhere_given_correct, config.model.p_adhere_given_wrong
    )
    adhered = rng.random(n) < p_adhere

    return [
        TrialRecord(config.condition_id, f"t{i + 1}", bool(correct), bool(adhere))
        for i, (correct, adhere) in enumerate(zip(ai_correct, adhered))
    ]


def simulate_replications(config: SimConfig, count: int) -> list[list[TrialRecord]]:
    """Independent replications with seeds spawned from ``config.seed``."""
    if count < 1:
        raise ConfigError(f"replication count must be at least 1, got {count}")
    children = np.random.SeedSequence(config.seed).spawn(count)
    replications = []
    for i, child in enumerate(children):
        seed = int(child.generate_state(1, dtype=np.uint64)[0])
        replica = replace(config, seed=seed, condition_id=f"{config.condition_id}-r{i}")
        replications.append(simulate(replica))
    return replications


def expected_profile(acc: float, model: BehaviorModel) -> RelianceProfile:
    acc = check_ai_accuracy(acc)
    p_c, p_w = model.p_adhere_given_correct, model.p_adhere_given_wrong
    return RelianceProfile(
        a_correct=acc * p_c,
        a_wrong=(1 - acc) * p_w,
        o_correct=(1 - acc) * (1 - p_w),
        o_wrong=acc * (1 - p_c),
    )


@dataclass(frozen=True)
class OracleResult:
    """Every attainable count of correct decisions, per adherence count ``k``."""

    n: int
    acc_numerator: int
    per_adherence: dict[int, frozenset[int]]

    def extremes(self, k: int) -> tuple[int, int]:
        attainable = self.per_adherence[k]
        return min(attainable), max(attainable)


def enumerate_attainable(n: int, acc_numerator: int) -> OracleResult:
    """Brute force all reliance configurations of ``n`` decisions.

    ``acc_numerator`` of the recommendations are correct. For each number ``k``
    of adherences, every split into correct and wrong adherences is tried.
    """
    if not 1 <= n <= MAX_ORACLE_N:
        raise DomainError(f"oracle n must lie in [1, {MAX_ORACLE_N}], got {n}")
    if not 0 <= acc_numerator <= n:
        raise DomainError(f"acc_numerator must lie in [0, {n}], got {acc_numerator}")
    if 2 * acc_numerator <= n:
        raise DomainError(
            f"AI with {acc_numerator}/{n} correct is not better than chance; "
            f"the framework assumes 0.5 < Acc_AI <= 1"
        )

    n_wrong_ai = n - acc_numerator
    per_adherence = {}
    for k in range(n + 1):
        attainable = set()
        for a_c in range(min(k, acc_numerator) + 1):
            a_w = k - a_c
            if a_w > n_wrong_ai:
                continue
            o_c = n_wrong_ai - a_w
            attainable.add(a_c + o_c)
        per_adherence[k] = frozenset(attainable)
    return OracleResult(n=n, acc_numerator=acc_numerator, per_adherence=per_adherence)


class OracleRow(NamedTuple):
    k: int
    attainable: tuple[int, ...]
    lo: int
    hi: int
    envelope_lo: float
    envelope_hi: float
    passed: bool


def check_against_envelope(result: OracleResult, tol: float = TOLERANCE) -> list[OracleRow]:
    """Compare the integer extremes to the analytic envelope scaled by ``n``."""
    acc = result.acc_numerator / result.n
    rows = []
    for k, attainable in sorted(result.per_adherence.items()):
        lo, hi = result.extremes(k)
        env = envelope(acc, k / result.n, tol)
        passed = abs(lo - env.lo * result.n) <= tol * result.n and abs(hi - env.hi * result.n) <= tol * result.n
        if not passed:
            logger.warning(f"Oracle mismatch at k={k}: [{lo}, {hi}] vs envelope [{env.lo}, {env.hi}]")
        rows.append(OracleRow(k, tuple(sorted(attainable)), lo, hi, env.lo, env.hi, passed))
    return rows
