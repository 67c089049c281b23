from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.stats import chisquare

from errors import CapExceededError, TreeError, TreeParseError
from exact_combinatorics import catalan
from tree_core import (NONE, PlaneBinaryTree, decode, encode, enumerate_all, enumerate_words, grow,
                       profile, remy_sample, single_leaf, to_dot)
from strategies import trees


def test_single_leaf():
    tree = single_leaf()
    assert tree.n_internal == 0
    assert tree.leaves() == [tree.root]
    assert encode(tree) == "()"
    assert tree.height == 0 and tree.path_length == 0


def test_profile_of_leaf_only_tree_is_an_error():
    with pytest.raises(TreeError):
        profile(single_leaf())


@pytest.mark.parametrize("n", range(0, 9))
def test_enumeration_counts_are_catalan(n):
    words = enumerate_words(n)
    assert len(words) == catalan(n)
    assert len(set(words)) == len(words)


def test_enumeration_is_capped():
    with pytest.raises(CapExceededError):
        enumerate_words(13)


def test_enumerated_words_decode_to_themselves():
    for tree in enumerate_all(6):
        tree.validate()
        assert tree.n_internal == 6
        assert decode(tree.encode()) == tree


def test_grow_attaches_a_cherry():
    tree = decode("(()())")
    leaf = tree.leaves()[1]
    grown = grow(tree, leaf)
    assert encode(grown) == "(()(()()))"
    assert encode(tree) == "(()())"
    grown.validate()
    assert grown.height == 2
    assert profile(grown).as_tuple() == (0, 1)


def test_grow_rejects_internal_nodes_and_strangers():
    tree = decode("(()())")
    with pytest.raises(TreeError):
        tree.grow(tree.root)
    with pytest.raises(TreeError):
        tree.grow(17)


@given(trees(max_size=25))
@settings(max_examples=60, deadline=None)
def test_growth_keeps_caches_consistent(tree):
    for leaf in tree.leaves()[:3]:
        grown = grow(tree, leaf)
        grown.validate()
        assert grown.n_internal == tree.n_internal + 1
        assert grown.recompute_sizes() == grown.size


@given(trees(max_size=40))
@settings(max_examples=60, deadline=None)
def test_depth_statistics(tree):
    tree.validate()
    internal = [v for v in tree.preorder() if not tree.is_leaf(v)]
    assert tree.path_length == sum(tree.depth[v] for v in internal)
    assert tree.height == max(tree.depth[v] for v in tree.preorder())
    assert len(tree.leaves()) == tree.n_internal + 1
    assert tree.ancestors(tree.root) == [tree.root]


@pytest.mark.parametrize("word, position", [
    ("", 0),
    ("(()", 3),
    ("())", 2),
    ("()()", 2),
    ("(x)", 1),
    ("((()()()))", 6),
])
def test_decode_reports_position(word, position):
    with pytest.raises(TreeParseError) as info:
        decode(word)
    assert info.value.position == position


def test_decode_ignores_surrounding_whitespace():
    assert decode("  (()())\n").n_internal == 1


def test_equality_is_structural():
    assert decode("((()())())") == decode("((()())())")
    assert decode("((()())())") != decode("(()(()()))")


def test_remy_is_uniform_on_size_four():
    rng = np.random.default_rng(7)
    draws = 14_000
    counts = Counter(remy_sample(4, rng).encode() for _ in range(draws))
    words = enumerate_words(4)
    assert set(counts) <= set(words)
    observed = [counts[w] for w in words]
    assert chisquare(observed).pvalue > 1e-4


def test_remy_sizes():
    rng = np.random.default_rng(3)
    for n in (0, 1, 2, 50, 500):
        tree = remy_sample(n, rng)
        tree.validate()
        assert tree.n_internal == n
        assert tree.parent[tree.root] == NONE


def test_copy_is_independent():
    tree = decode("(()())")
    clone = tree.copy()
    clone.grow(clone.leaves()[0])
    assert tree.n_internal == 1
    assert clone.n_internal == 2


def test_dot_export_annotates_leaves():
    tree = decode("((()())())")
    masses = {leaf: 1.0 / 3 for leaf in tree.leaves()}
    dot = to_dot(tree, masses)
    assert dot.startswith("digraph tree {")
    assert dot.count('leaf="true"') == 3
    assert dot.count("mass=") == 3
    assert dot.count("->") == 2 * tree.n_internal


def test_repr_is_short_for_large_trees():
    tree = remy_sample(20, np.random.default_rng(0))
    assert "n=20" in repr(tree)
    assert repr(decode("(()())")) == "PlaneBinaryTree('(()())')"


def test_plane_binary_tree_hash_is_disabled():
    with pytest.raises(TypeError):
        hash(PlaneBinaryTree())
