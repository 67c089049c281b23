"""
The leaf-growth measure on a plane binary tree

The mass of a leaf is the product of C(a_i, b_i) along its ancestral path,
where a_i is the size of the subtree entered at depth i and b_i the size of
its sibling subtree. Growing a uniform size-n tree at a leaf drawn from this
measure yields a uniform size-(n+1) tree.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from config import Config
from errors import CapExceededError
from exact_combinatorics import c_weight, log_c_weight
from tree_core import NONE, PlaneBinaryTree, enumerate_all

# a fresh uniform is drawn once the current one has been rescaled by this much
_REFRESH_WIDTH = math.log(1e-6)


@dataclass
class LeafMeasure:
    """Per-leaf masses, log-domain always, exact Fractions for small trees"""
    leaves: List[int]
    leaf_log_mass: Dict[int, float]
    exact_mass: Optional[Dict[int, Fraction]] = None
    n_internal: int = field(default=0)

    def mass(self, leaf: int) -> float:
        return math.exp(self.leaf_log_mass[leaf])

    def masses(self) -> Dict[int, float]:
        return {leaf: math.exp(value) for leaf, value in self.leaf_log_mass.items()}

    def log_mass_array(self) -> np.ndarray:
        """Log masses in preorder leaf order"""
        return np.array([self.leaf_log_mass[leaf] for leaf in self.leaves])

    def mass_array(self) -> np.ndarray:
        return np.exp(self.log_mass_array())

    def total(self) -> float:
        """Sum of masses, by log-sum-exp"""
        values = self.log_mass_array()
        top = values.max()
        return float(math.exp(top) * np.exp(values - top).sum())

    def exact_total(self) -> Fraction:
        if self.exact_mass is None:
            raise ValueError("measure was computed without exact masses")
        return sum(self.exact_mass.values(), Fraction(0))


class MassExtremes(NamedTuple):
    min_mass: float
    max_mass: float
    argmin: int
    argmax: int


def node_log_masses(tree: PlaneBinaryTree) -> List[float]:
    """log nu(T_v) for every node v, indexed by node id"""
    log_mass = [0.0] * tree.n_nodes
    left, right, size = tree.left, tree.right, tree.size
    for v in tree.preorder():
        lc = left[v]
        if lc == NONE:
            continue
        rc = right[v]
        a, b = size[lc], size[rc]
        log_mass[lc] = log_mass[v] + log_c_weight(a, b)
        log_mass[rc] = log_mass[v] + log_c_weight(b, a)
    return log_mass


def subtree_masses(tree: PlaneBinaryTree) -> np.ndarray:
    """nu-mass of the subtree rooted at every node, indexed by node id"""
    return np.exp(np.array(node_log_masses(tree)))


def _exact_masses(tree: PlaneBinaryTree) -> Dict[int, Fraction]:
    mass: Dict[int, Fraction] = {tree.root: Fraction(1)}
    result: Dict[int, Fraction] = {}
    for v in tree.preorder():
        if tree.is_leaf(v):
            result[v] = mass[v]
            continue
        lc, rc = tree.children(v)
        weight = c_weight(tree.size[lc], tree.size[rc])
        mass[lc] = mass[v] * weight
        mass[rc] = mass[v] * (1 - weight)
    return result


def compute_measure(tree: PlaneBinaryTree, exact: Optional[bool] = None) -> LeafMeasure:
    """
    Leaf-growth measure of a tree

    Args:
        tree (PlaneBinaryTree): The tree, with cached sizes
        exact (bool): True to also compute Fractions (requires the exact cap),
            False for log masses only, None to decide from the cap

    Returns:
        LeafMeasure: masses keyed by leaf id
    """
    n = tree.n_internal
    if exact is None:
        exact = n <= Config.EXACT_MEASURE_CAP
    elif exact and n > Config.EXACT_MEASURE_CAP:
        raise CapExceededError("n", n, Config.EXACT_MEASURE_CAP)

    log_mass = node_log_masses(tree)
    leaves = tree.leaves()
    measure = LeafMeasure(
        leaves=leaves,
        leaf_log_mass={leaf: log_mass[leaf] for leaf in leaves},
        n_internal=n,
    )
    if exact:
        measure.exact_mass = _exact_masses(tree)
    return measure


def uniform_measure(tree: PlaneBinaryTree) -> LeafMeasure:
    """Uniform measure on the n + 1 leaves"""
    n = tree.n_internal
    leaves = tree.leaves()
    value = -math.log(n + 1)
    exact = None
    if n <= Config.EXACT_MEASURE_CAP:
        exact = {leaf: Fraction(1, n + 1) for leaf in leaves}
    return LeafMeasure(leaves=leaves, leaf_log_mass={leaf: value for leaf in leaves},
                       exact_mass=exact, n_internal=n)


def sample_leaf_descent(tree: PlaneBinaryTree, rng: np.random.Generator) -> Tuple[int, float]:
    """
    Draw a leaf from the leaf-growth measure by descending from the root

    One uniform is rescaled into the chosen branch at every internal node
    and replaced by a fresh draw after it has been narrowed by 1e-6.

    Returns:
        tuple: (leaf id, log mass of that leaf)
    """
    left, right, size = tree.left, tree.right, tree.size
    v = tree.root
    log_mass = 0.0
    anchor = 0.0
    u = rng.random()
    while left[v] != NONE:
        lc, rc = left[v], right[v]
        a, b = size[lc], size[rc]
        s = a + b
        weight = (a + 1) * (2 * a + 1) * (a + 3 * b + 3) / ((s + 1) * (s + 2) * (2 * s + 3))
        if u < weight:
            u /= weight
            log_mass += math.log(weight)
            v = lc
        else:
            u = (u - weight) / (1.0 - weight)
            log_mass += log_c_weight(b, a)
            v = rc
        if log_mass - anchor < _REFRESH_WIDTH:
            u = rng.random()
            anchor = log_mass
    return v, log_mass


def _play_token_game(tree: PlaneBinaryTree, rng: np.random.Generator,
                     piles: Optional[Dict[int, int]] = None) -> int:
    label: Dict[int, int] = {}
    tokens: Dict[int, int] = {}
    for v in reversed(list(tree.preorder())):
        if tree.is_leaf(v):
            label[v] = v
            tokens[v] = 1
        else:
            lc, rc = tree.children(v)
            lt, rt = tokens.pop(lc), tokens.pop(rc)
            wins = 0
            for _ in range(3):
                if rng.random() * (lt + rt) < lt:
                    lt += 1
                    wins += 1
                else:
                    rt += 1
            left_label, right_label = label.pop(lc), label.pop(rc)
            label[v] = left_label if wins >= 2 else right_label
            tokens[v] = lt + rt - 2
        if piles is not None:
            piles[v] = tokens[v]
    return label[tree.root]


def sample_leaf_token_game(tree: PlaneBinaryTree, rng: np.random.Generator) -> int:
    """
    Draw a leaf by the token game

    Each leaf starts with one token carrying its own label. Vertices are
    resolved in postorder: the two movable piles of the children meet, a
    best-of-three is played, the winner's label is kept and two tokens are
    destroyed. The label left at the root is the chosen leaf.
    """
    return _play_token_game(tree, rng)


def token_game_piles(tree: PlaneBinaryTree, rng: np.random.Generator) -> Dict[int, int]:
    """Size of the movable pile formed at every vertex during one game"""
    piles: Dict[int, int] = {}
    _play_token_game(tree, rng, piles)
    return piles


def _match_win_probability(left_tokens: int, right_tokens: int) -> Fraction:
    """Exact probability that the left pile wins at least two of three matches"""
    total = Fraction(0)
    for outcome in itertools.product((True, False), repeat=3):
        lt, rt = left_tokens, right_tokens
        prob = Fraction(1)
        for left_wins in outcome:
            if left_wins:
                prob *= Fraction(lt, lt + rt)
                lt += 1
            else:
                prob *= Fraction(rt, lt + rt)
                rt += 1
        if sum(outcome) >= 2:
            total += prob
    return total


def token_game_law(tree: PlaneBinaryTree) -> Dict[int, Fraction]:
    """Exact leaf law of the token game, by dynamic programming over match outcomes"""
    Config.check_cap("n", tree.n_internal, "EXACT_MEASURE_CAP")
    law: Dict[int, Dict[int, Fraction]] = {}
    for v in reversed(list(tree.preorder())):
        if tree.is_leaf(v):
            law[v] = {v: Fraction(1)}
            continue
        lc, rc = tree.children(v)
        p_left = _match_win_probability(2 * tree.size[lc] + 1, 2 * tree.size[rc] + 1)
        merged = {leaf: p_left * p for leaf, p in law.pop(lc).items()}
        merged.update({leaf: (1 - p_left) * p for leaf, p in law.pop(rc).items()})
        law[v] = merged
    return law[tree.root]


def mass_extremes(tree: PlaneBinaryTree, measure: Optional[LeafMeasure] = None) -> MassExtremes:
    """Smallest and largest leaf masses with their leaf ids"""
    if measure is None:
        measure = compute_measure(tree, exact=False)
    argmin = min(measure.leaves, key=measure.leaf_log_mass.__getitem__)
    argmax = max(measure.leaves, key=measure.leaf_log_mass.__getitem__)
    return MassExtremes(measure.mass(argmin), measure.mass(argmax), argmin, argmax)


def global_min_mass(n: int) -> Fraction:
    """Smallest exact leaf mass over every tree of size n"""
    best = None
    for tree in enumerate_all(n):
        smallest = min(_exact_masses(tree).values())
        if best is None or smallest < best:
            best = smallest
    return best


def spine_trajectory(tree: PlaneBinaryTree, leaf: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Subtree masses along the ancestral path of a leaf

    Returns:
        tuple: (mu, nu) arrays indexed by depth; mu is (2|t^v| + 1)/(2n + 1)
        and nu the leaf-growth mass of the subtree rooted at depth k
    """
    path = tree.ancestors(leaf)
    n = tree.n_internal
    mu = np.array([(2 * tree.size[v] + 1) / (2 * n + 1) for v in path])
    log_nu = [0.0]
    for parent, child in zip(path, path[1:]):
        lc, rc = tree.children(parent)
        a, b = tree.size[lc], tree.size[rc]
        log_nu.append(log_nu[-1] + (log_c_weight(a, b) if child == lc else log_c_weight(b, a)))
    return mu, np.exp(np.array(log_nu))


def to_csv_frame(measure: LeafMeasure, tree: PlaneBinaryTree) -> pd.DataFrame:
    """Density series of the measure against the uniform one, in preorder"""
    log_mass = measure.log_mass_array()
    n_leaves = len(measure.leaves)
    return pd.DataFrame({
        "leaf_index": np.arange(n_leaves),
        "node_id": measure.leaves,
        "depth": [tree.depth[leaf] for leaf in measure.leaves],
        "mass": np.exp(log_mass),
        "log_mass": log_mass,
        "density": np.exp(log_mass + math.log(n_leaves)),
    })
