import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.stats import chisquare

from config import Config
from errors import CapExceededError
from exact_combinatorics import c_weight
from leaf_measure import (compute_measure, global_min_mass, mass_extremes, node_log_masses,
                          sample_leaf_descent, sample_leaf_token_game, spine_trajectory,
                          subtree_masses, to_csv_frame, token_game_law, token_game_piles,
                          uniform_measure)
from streams import StreamPurpose, make_rng
from tree_core import decode, enumerate_all, remy_sample
from strategies import trees


def test_single_leaf_has_all_the_mass():
    measure = compute_measure(decode("()"))
    assert measure.exact_mass == {0: Fraction(1)}
    assert measure.total() == pytest.approx(1.0)


def test_cherry_on_the_left():
    tree = decode("((()())())")
    measure = compute_measure(tree, exact=True)
    left = c_weight(1, 0)
    expected = [left / 2, left / 2, 1 - left]
    assert [measure.exact_mass[leaf] for leaf in measure.leaves] == expected


@given(trees(max_size=Config.EXACT_MEASURE_CAP))
@settings(max_examples=50, deadline=None)
def test_exact_masses_sum_to_one(tree):
    measure = compute_measure(tree, exact=True)
    assert measure.exact_total() == 1
    for leaf in measure.leaves:
        assert measure.mass(leaf) == pytest.approx(float(measure.exact_mass[leaf]), rel=1e-12)


def test_log_masses_sum_to_one_on_a_large_tree(rng):
    tree = remy_sample(5_000, rng)
    measure = compute_measure(tree)
    assert measure.exact_mass is None
    assert measure.total() == pytest.approx(1.0, abs=1e-10)


def test_exact_mode_is_capped():
    tree = remy_sample(Config.EXACT_MEASURE_CAP + 1, np.random.default_rng(1))
    with pytest.raises(CapExceededError):
        compute_measure(tree, exact=True)
    with pytest.raises(ValueError):
        compute_measure(tree, exact=False).exact_total()


def test_subtree_masses_add_up(rng):
    tree = remy_sample(200, rng)
    masses = subtree_masses(tree)
    for v in tree.preorder():
        if not tree.is_leaf(v):
            lc, rc = tree.children(v)
            assert masses[lc] + masses[rc] == pytest.approx(masses[v], rel=1e-12)
    assert masses[tree.root] == 1.0


def test_uniform_measure():
    tree = decode("((()())())")
    measure = uniform_measure(tree)
    assert measure.exact_total() == 1
    assert all(value == pytest.approx(1 / 3) for value in measure.masses().values())


def test_descent_on_size_one_is_fair():
    tree = decode("(()())")
    rng = make_rng(11, 0, StreamPurpose.TREE)
    draws = 100_000
    lefts = sum(sample_leaf_descent(tree, rng)[0] == tree.left[tree.root] for _ in range(draws))
    assert abs(lefts / draws - 0.5) <= 3 * math.sqrt(0.25 / draws)


def test_descent_matches_the_measure(rng):
    tree = remy_sample(6, rng)
    measure = compute_measure(tree, exact=True)
    draws = 30_000
    counts = Counter(sample_leaf_descent(tree, rng)[0] for _ in range(draws))
    observed = [counts[leaf] for leaf in measure.leaves]
    expected = [draws * float(measure.exact_mass[leaf]) for leaf in measure.leaves]
    assert chisquare(observed, expected).pvalue > 1e-4


def test_descent_reports_the_log_mass_on_deep_trees(rng):
    # left comb: one path of depth 400
    word = "(" * 400 + "()" + "())" * 400
    tree = decode(word)
    log_mass = node_log_masses(tree)
    for _ in range(50):
        leaf, value = sample_leaf_descent(tree, rng)
        assert tree.is_leaf(leaf)
        assert value == pytest.approx(log_mass[leaf], abs=1e-9)


def test_token_game_law_equals_the_measure():
    for n in range(6):
        for tree in enumerate_all(n):
            assert token_game_law(tree) == compute_measure(tree, exact=True).exact_mass


def test_token_game_samples_the_measure():
    tree = decode("((()())(()()))")
    rng = make_rng(5, 0, StreamPurpose.TOKEN_GAME)
    measure = compute_measure(tree, exact=True)
    draws = 20_000
    counts = Counter(sample_leaf_token_game(tree, rng) for _ in range(draws))
    observed = [counts[leaf] for leaf in measure.leaves]
    expected = [draws * float(measure.exact_mass[leaf]) for leaf in measure.leaves]
    assert chisquare(observed, expected).pvalue > 1e-4


@given(trees(max_size=40))
@settings(max_examples=30, deadline=None)
def test_token_piles_track_subtree_sizes(tree):
    piles = token_game_piles(tree, make_rng(0, 0, StreamPurpose.TOKEN_GAME))
    assert piles == {v: 2 * tree.size[v] + 1 for v in tree.preorder()}


def test_mass_extremes(rng):
    tree = remy_sample(300, rng)
    extremes = mass_extremes(tree)
    masses = compute_measure(tree).mass_array()
    assert extremes.max_mass == pytest.approx(masses.max())
    assert extremes.min_mass == pytest.approx(masses.min())
    assert tree.is_leaf(extremes.argmin) and tree.is_leaf(extremes.argmax)


def test_global_min_mass_is_attained():
    smallest = global_min_mass(4)
    masses = [m for tree in enumerate_all(4) for m in compute_measure(tree, exact=True).exact_mass.values()]
    assert smallest == min(masses)
    assert global_min_mass(0) == 1


@pytest.mark.parametrize("n", range(1, 8))
def test_global_min_mass_sits_beside_the_largest_subtree(n):
    assert global_min_mass(n) == c_weight(0, n - 1)


def test_global_min_mass_values():
    assert global_min_mass(2) == Fraction(1, 5)
    assert global_min_mass(5) == Fraction(1, 22)


def test_spine_trajectory(rng):
    tree = remy_sample(100, rng)
    measure = compute_measure(tree)
    leaf = measure.leaves[17]
    mu, nu = spine_trajectory(tree, leaf)
    assert len(mu) == len(nu) == tree.depth[leaf] + 1
    assert mu[0] == 1.0 and nu[0] == 1.0
    assert mu[-1] == pytest.approx(1 / 201)
    assert nu[-1] == pytest.approx(measure.mass(leaf), rel=1e-12)
    assert np.all(np.diff(mu) < 0)


def test_density_frame(rng):
    tree = remy_sample(64, rng)
    frame = to_csv_frame(compute_measure(tree), tree)
    assert list(frame.columns) == ["leaf_index", "node_id", "depth", "mass", "log_mass", "density"]
    assert len(frame) == 65
    assert frame["density"].mean() == pytest.approx(1.0)
    assert frame["mass"].sum() == pytest.approx(1.0)
