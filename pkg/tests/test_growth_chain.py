import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from config import Config, TreeStatistic
from errors import CapExceededError, DomainError
from exact_combinatorics import GAMMA, split_prob
from growth_chain import (GrowthState, TrajectoryRecord, end_state_counts, grow_replicas,
                          mass_concentration_profile, mixing_correlation, records_frame, run,
                          step, summarize, uniformity_pushforward_exact)
from streams import StreamPurpose, make_rng
from tree_core import enumerate_words


@pytest.mark.parametrize("n", range(0, Config.PUSHFORWARD_CAP + 1))
def test_pushforward_of_uniform_is_uniform(n):
    assert uniformity_pushforward_exact(n) == Fraction(0)


def test_pushforward_is_capped():
    with pytest.raises(CapExceededError):
        uniformity_pushforward_exact(Config.PUSHFORWARD_CAP + 1)


def test_end_states_are_uniform_at_size_four():
    rng = make_rng(2024, 0, StreamPurpose.GROWTH)
    chains = 28_000
    counts = end_state_counts(4, chains, rng)
    words = enumerate_words(4)
    assert sum(counts.values()) == chains
    assert chisquare([counts[w] for w in words]).pvalue > 1e-3


def test_root_profile_at_size_one_hundred():
    chains = 2_000
    runs = grow_replicas(seed=9, replicas=chains, n_target=100, checkpoints=[100])
    assert all(len(records) == 1 and records[0].n == 100 for records in runs)
    fractions = np.array([records[0].left_fraction for records in runs])
    for a in (0, 99):
        p = float(split_prob(a, 99 - a))
        observed = np.mean(np.isclose(fractions * 100, a))
        assert abs(observed - p) <= 3 * math.sqrt(p * (1 - p) / chains) + 1e-12


def test_step_grows_by_one():
    state = GrowthState(rng=make_rng(1, 0, StreamPurpose.GROWTH))
    for expected in range(1, 30):
        step(state)
        assert state.n == expected
        assert state.tree.n_internal == expected
    state.tree.validate()
    assert [record.n for record in state.records] == list(range(29))
    assert state.records[0].log_mass == 0.0


def test_run_records_checkpoints_in_order():
    rng = make_rng(3, 0, StreamPurpose.GROWTH)
    records = run(200, [200, 10, 50, 10], rng, track_max_mass=True)
    assert [record.n for record in records] == [10, 50, 200]
    for record in records:
        assert record.log_mass >= 0.0
        assert record.max_log_mass is not None
        assert record.max_log_mass <= record.log_mass + 1e-12
        assert 0 <= record.leaf_height <= record.height


def test_run_rejects_out_of_range_checkpoints():
    rng = make_rng(3, 0, StreamPurpose.GROWTH)
    with pytest.raises(DomainError):
        run(10, [11], rng)
    with pytest.raises(DomainError):
        run(10, [-1], rng)


def test_replicas_do_not_depend_on_scheduling():
    serial = grow_replicas(seed=5, replicas=4, n_target=60, checkpoints=[30, 60], threads=1)
    pooled = grow_replicas(seed=5, replicas=4, n_target=60, checkpoints=[30, 60], threads=2)
    assert serial == pooled


def test_summary_columns():
    runs = grow_replicas(seed=1, replicas=8, n_target=100, checkpoints=[1, 10, 100])
    summary = summarize(runs)
    assert list(summary["n"]) == [10, 100]
    assert set(summary.columns) >= {"replicas", "gamma_mean", "gamma_std", "gamma_q25", "gamma_q75",
                                    "gamma_iqr", "height_scaled_mean", "gamma_target"}
    assert (summary["replicas"] == 8).all()
    assert (summary["gamma_iqr"] >= 0).all()
    assert summary["gamma_target"].iloc[0] == GAMMA
    frame = records_frame(runs)
    assert len(frame) == 24
    assert frame["replica"].max() == 7


def test_record_statistics():
    record = TrajectoryRecord(n=100, log_mass=3.0, leaf_height=5, path_length=2000, height=30,
                              left_fraction=0.25)
    assert record.statistic(TreeStatistic.PATH_LENGTH) == pytest.approx(2.0)
    assert record.statistic(TreeStatistic.HEIGHT) == pytest.approx(3.0)
    assert record.statistic(TreeStatistic.LEFT_FRACTION) == 0.25


def test_mass_concentration_is_a_fraction():
    value = mass_concentration_profile(500, replicas=4, eps=0.3, seed=2)
    assert 0.0 <= value <= 1.0
    assert mass_concentration_profile(500, replicas=4, eps=0.0, seed=2) <= value
    with pytest.raises(DomainError):
        mass_concentration_profile(1, replicas=4, eps=0.1, seed=2)


def test_mixing_correlation():
    same = mixing_correlation(50, 50, replicas=10, seed=1)
    assert same.correlation == 1.0
    near = mixing_correlation(95, 100, replicas=40, seed=1, statistic=TreeStatistic.HEIGHT)
    assert near.correlation > 0.5
    assert near.replicas == 40
    with pytest.raises(DomainError):
        mixing_correlation(10, 5, replicas=10, seed=1)
    with pytest.raises(DomainError):
        mixing_correlation(5, 10, replicas=2, seed=1)


def test_mixing_correlation_decays_with_the_size_ratio():
    correlations = [mixing_correlation(20, n, replicas=400, seed=4).correlation for n in (40, 160, 640)]
    assert correlations[0] > correlations[1] > correlations[2]


@pytest.mark.slow
def test_far_apart_sizes_are_nearly_uncorrelated():
    result = mixing_correlation(200, 20_000, replicas=2_000, seed=12, threads=4)
    assert abs(result.correlation) < 0.1


@pytest.mark.slow
def test_mass_concentrates_around_the_typical_exponent():
    small = mass_concentration_profile(1_000, replicas=200, eps=0.3, seed=3, threads=4)
    large = mass_concentration_profile(10_000, replicas=200, eps=0.3, seed=3, threads=4)
    assert large >= small
    narrow = mass_concentration_profile(10_000, replicas=50, eps=0.05, seed=3, threads=4)
    assert 0.0 < narrow < 1.0


@pytest.mark.slow
def test_typical_exponent_at_ten_thousand():
    runs = grow_replicas(seed=11, replicas=200, n_target=10_000, checkpoints=[10_000], threads=4)
    summary = summarize(runs).set_index("n")
    assert summary.loc[10_000, "gamma_mean"] == pytest.approx(GAMMA, abs=0.08)
    expected_height = math.gamma(2.5) / math.sqrt(2.0)
    assert summary.loc[10_000, "height_scaled_mean"] == pytest.approx(expected_height, rel=0.05)
