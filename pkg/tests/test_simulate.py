from __future__ import annotations

import itertools
import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reliance_lens.core import profile_from_counts
from reliance_lens.errors import ConfigError, DomainError, OutOfScopeAiAccuracy
from reliance_lens.ingest import ConditionAggregate
from reliance_lens.simulate import (
    MAX_ORACLE_N,
    BehaviorModel,
    Composition,
    SimConfig,
    check_against_envelope,
    enumerate_attainable,
    expected_profile,
    simulate,
    simulate_replications,
)

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def counts_of(records) -> tuple[int, int, int, int]:
    return ConditionAggregate.from_records("sim", records).counts


class TestBehaviorModel:
    @pytest.mark.parametrize("p_correct, p_wrong", [(1.2, 0.0), (0.5, -0.1), (-0.01, 1.0)])
    def test_probabilities_out_of_range(self, p_correct, p_wrong):
        with pytest.raises(ConfigError):
            BehaviorModel(p_correct, p_wrong)

    def test_nondiscerning(self):
        model = BehaviorModel.nondiscerning(0.4)
        assert model.p_adhere_given_correct == model.p_adhere_given_wrong == 0.4
        assert model.is_nondiscerning
        assert not BehaviorModel(0.9, 0.1).is_nondiscerning


class TestSimConfig:
    def test_fixed_composition_needs_integer_count(self):
        with pytest.raises(ConfigError):
            SimConfig(acc=0.7, model=BehaviorModel(1, 0), n_trials=15)

    def test_bernoulli_accepts_any_n(self):
        config = SimConfig(acc=0.7, model=BehaviorModel(1, 0), n_trials=15, composition=Composition.bernoulli)
        assert config.n_trials == 15

    def test_chance_level_ai_rejected(self):
        with pytest.raises(OutOfScopeAiAccuracy):
            SimConfig(acc=0.5, model=BehaviorModel(1, 0), n_trials=10)

    @pytest.mark.parametrize("kwargs", [{"n_trials": 0}, {"seed": -1}, {"seed": 2**64}])
    def test_bad_values(self, kwargs):
        params = {"acc": 0.7, "model": BehaviorModel(1, 0), "n_trials": 10} | kwargs
        with pytest.raises(ConfigError):
            SimConfig(**params)


class TestSimulate:
    def test_perfect_reliance_counts(self):
        records = simulate(SimConfig(acc=0.7, model=BehaviorModel(1, 0), n_trials=10))
        assert counts_of(records) == (7, 0, 3, 0)

    def test_never_adhere_counts(self):
        records = simulate(SimConfig(acc=0.7, model=BehaviorModel(0, 0), n_trials=10))
        assert counts_of(records) == (0, 0, 3, 7)

    def test_records_are_labelled(self):
        records = simulate(SimConfig(acc=0.7, model=BehaviorModel(1, 0), n_trials=10, condition_id="arm"))
        assert {r.condition_id for r in records} == {"arm"}
        assert [r.trial_id for r in records] == [f"t{i}" for i in range(1, 11)]

    def test_nondiscerning_bernoulli_matches_line(self):
        config = SimConfig(
            acc=0.7,
            model=BehaviorModel.nondiscerning(0.7),
            n_trials=100_000,
            seed=42,
            composition=Composition.bernoulli,
        )
        profile = profile_from_counts(*counts_of(simulate(config)))
        assert profile.final_accuracy == pytest.approx(0.58, abs=0.01)

    def test_seed_42_counts_are_frozen(self):
        config = SimConfig(
            acc=0.7,
            model=BehaviorModel.nondiscerning(0.7),
            n_trials=100_000,
            seed=42,
            composition=Composition.bernoulli,
        )
        counts = list(counts_of(simulate(config)))
        golden = GOLDEN_DIR / "bernoulli_seed42.json"
        if not golden.exists():
            golden.write_text(json.dumps({"counts": counts}) + "\n")
            pytest.skip(f"recorded {counts} to {golden.name}")
        assert counts == json.loads(golden.read_text())["counts"]

    @pytest.mark.parametrize(
        "acc, p_correct, p_wrong",
        [(0.7, 0.9, 0.2), (0.8, 0.5, 0.5), (0.95, 0.3, 0.8)],
    )
    def test_monte_carlo_matches_expected_profile(self, acc, p_correct, p_wrong):
        model = BehaviorModel(p_correct, p_wrong)
        config = SimConfig(acc=acc, model=model, n_trials=50_000, seed=7, composition=Composition.bernoulli)
        observed = profile_from_counts(*counts_of(simulate(config)))
        expected = expected_profile(acc, model)
        for got, want in zip(observed.as_tuple(), expected.as_tuple()):
            assert got == pytest.approx(want, abs=0.01)

    def test_deterministic(self):
        config = SimConfig(acc=0.8, model=BehaviorModel(0.6, 0.3), n_trials=50, seed=1234)
        assert simulate(config) == simulate(config)

    def test_seed_changes_draws(self):
        base = SimConfig(acc=0.8, model=BehaviorModel(0.5, 0.5), n_trials=200, seed=1)
        other = SimConfig(acc=0.8, model=BehaviorModel(0.5, 0.5), n_trials=200, seed=2)
        assert simulate(base) != simulate(other)

    @given(seed=st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=25)
    def test_fixed_composition_exact(self, seed):
        records = simulate(SimConfig(acc=0.75, model=BehaviorModel(0.5, 0.5), n_trials=20, seed=seed))
        assert sum(r.ai_correct for r in records) == 15


class TestReplications:
    def test_replications(self):
        config = SimConfig(acc=0.7, model=BehaviorModel(0.8, 0.3), n_trials=20, seed=3, condition_id="arm")
        replicas = simulate_replications(config, 3)
        assert len(replicas) == 3
        assert [replica[0].condition_id for replica in replicas] == ["arm-r0", "arm-r1", "arm-r2"]
        assert all(len(replica) == 20 for replica in replicas)
        assert simulate_replications(config, 3) == replicas

    def test_count_must_be_positive(self):
        with pytest.raises(ConfigError):
            simulate_replications(SimConfig(acc=0.7, model=BehaviorModel(1, 0), n_trials=10), 0)


class TestExpectedProfile:
    @pytest.mark.parametrize(
        "acc, model, expected",
        [
            (0.9, BehaviorModel(0.8, 0.4), (0.72, 0.04, 0.06, 0.18)),
            (0.7, BehaviorModel(1, 0), (0.7, 0.0, 0.3, 0.0)),
            (0.7, BehaviorModel(0, 0), (0.0, 0.0, 0.3, 0.7)),
            (0.7, BehaviorModel.nondiscerning(0.5), (0.35, 0.15, 0.15, 0.35)),
        ],
    )
    def test_examples(self, acc, model, expected):
        assert expected_profile(acc, model).as_tuple() == pytest.approx(expected)

    def test_out_of_scope(self):
        with pytest.raises(OutOfScopeAiAccuracy):
            expected_profile(0.4, BehaviorModel(1, 0))


def brute_force(n: int, c: int) -> dict[int, set[int]]:
    ai_correct = [True] * c + [False] * (n - c)
    attainable: dict[int, set[int]] = {k: set() for k in range(n + 1)}
    for adhered in itertools.product((False, True), repeat=n):
        correct = sum(a == truth for a, truth in zip(adhered, ai_correct))
        attainable[sum(adhered)].add(correct)
    return attainable


class TestOracle:
    @pytest.mark.parametrize("k, expected", [(7, {4, 6, 8, 10}), (10, {7}), (0, {3})])
    def test_ten_trials(self, k, expected):
        assert enumerate_attainable(10, 7).per_adherence[k] == expected

    def test_four_trials(self):
        assert enumerate_attainable(4, 3).per_adherence[2] == {1, 3}

    @pytest.mark.parametrize("n, c", [(4, 3), (5, 3), (6, 5), (8, 8), (9, 6)])
    def test_matches_brute_force(self, n, c):
        result = enumerate_attainable(n, c)
        assert {k: set(v) for k, v in result.per_adherence.items()} == brute_force(n, c)

    @pytest.mark.parametrize("n", range(4, 13))
    def test_extremes_match_envelope(self, n):
        for c in range(n // 2 + 1, n + 1):
            rows = check_against_envelope(enumerate_attainable(n, c))
            assert all(row.passed for row in rows), (n, c)

    @pytest.mark.parametrize("n, c", [(10, 7), (12, 9), (7, 4)])
    def test_attainable_values_step_by_two(self, n, c):
        for attainable in enumerate_attainable(n, c).per_adherence.values():
            values = sorted(attainable)
            assert values == list(range(values[0], values[-1] + 1, 2))

    @pytest.mark.parametrize("n, c", [(10, 5), (10, 3), (MAX_ORACLE_N + 1, 15), (0, 0), (10, 11)])
    def test_invalid_inputs(self, n, c):
        with pytest.raises(DomainError):
            enumerate_attainable(n, c)

    def test_rows_report_envelope(self):
        rows = check_against_envelope(enumerate_attainable(10, 7))
        row = rows[7]
        assert row.k == 7
        assert row.attainable == (4, 6, 8, 10)
        assert (row.lo, row.hi) == (4, 10)
        assert (row.envelope_lo, row.envelope_hi) == pytest.approx((0.4, 1.0))
