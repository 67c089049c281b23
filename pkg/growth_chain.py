"""
The uniform growth chain T_n -> T_{n+1}

Each step draws a leaf of the current tree from the leaf-growth measure by
descent and attaches a cherry to it. Started from the single leaf, T_n is
uniform on size-n trees for every n.
"""

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from config import Config, TreeStatistic
from errors import DomainError
from exact_combinatorics import GAMMA, catalan
from leaf_measure import compute_measure, node_log_masses, sample_leaf_descent
from streams import StreamPurpose, make_rng, run_replicas
from tree_core import PlaneBinaryTree, enumerate_all, enumerate_words, grow, remy_sample

logger = logging.getLogger(__name__)

SQRT8 = 2.0 * math.sqrt(2.0)


@dataclass
class TrajectoryRecord:
    """Statistics of T_n and of the leaf L_n grown out of it"""
    n: int
    log_mass: float
    leaf_height: int
    path_length: int
    height: int
    left_fraction: float
    max_log_mass: Optional[float] = None

    def statistic(self, which: TreeStatistic) -> float:
        """Tree statistic standardized by its natural scale"""
        if which is TreeStatistic.PATH_LENGTH:
            return self.path_length / max(self.n, 1) ** 1.5
        if which is TreeStatistic.HEIGHT:
            return self.height / math.sqrt(max(self.n, 1))
        return self.left_fraction


@dataclass
class GrowthState:
    """Current tree of one chain plus the records taken so far"""
    tree: PlaneBinaryTree = field(default_factory=PlaneBinaryTree)
    n: int = 0
    rng: Optional[np.random.Generator] = None
    records: List[TrajectoryRecord] = field(default_factory=list)
    track_max_mass: bool = False


def _left_fraction(tree: PlaneBinaryTree) -> float:
    n = tree.n_internal
    if n == 0:
        return 0.0
    return tree.size[tree.left[tree.root]] / n


def _max_log_mass(tree: PlaneBinaryTree) -> Optional[float]:
    if tree.n_internal > Config.FULL_MEASURE_CAP:
        return None
    log_mass = node_log_masses(tree)
    return -max(log_mass[leaf] for leaf in tree.leaves())


def step(state: GrowthState, record: bool = True) -> GrowthState:
    """
    Advance the chain by one grow

    Args:
        state (GrowthState): Chain with a live rng
        record (bool): Whether to append a TrajectoryRecord for this n

    Returns:
        GrowthState: the same state, one size larger
    """
    tree = state.tree
    leaf, log_mass = sample_leaf_descent(tree, state.rng)
    if record:
        state.records.append(TrajectoryRecord(
            n=state.n,
            log_mass=-log_mass,
            leaf_height=tree.depth[leaf],
            path_length=tree.path_length,
            height=tree.height,
            left_fraction=_left_fraction(tree),
            max_log_mass=_max_log_mass(tree) if state.track_max_mass else None,
        ))
    tree.grow(leaf)
    state.n += 1
    return state


def run(n_target: int, checkpoints: Iterable[int], rng: np.random.Generator,
        track_max_mass: bool = False) -> List[TrajectoryRecord]:
    """
    Grow from the single leaf to size n_target

    A record is taken at every checkpoint n in [0, n_target] from T_n; the
    checkpoint n_target draws its leaf without growing.

    Returns:
        list: one TrajectoryRecord per checkpoint, in increasing n
    """
    Config.check_cap("n_target", n_target, "GROWTH_MAX")
    marks = sorted(set(checkpoints))
    if marks and (marks[0] < 0 or marks[-1] > n_target):
        raise DomainError(f"checkpoints must lie in [0, {n_target}]")

    state = GrowthState(rng=rng, track_max_mass=track_max_mass)
    wanted = set(marks)
    while state.n < n_target:
        step(state, record=state.n in wanted)
    if n_target in wanted:
        # peek at T_{n_target} without growing it
        tree = state.tree
        leaf, log_mass = sample_leaf_descent(tree, rng)
        state.records.append(TrajectoryRecord(
            n=n_target, log_mass=-log_mass, leaf_height=tree.depth[leaf],
            path_length=tree.path_length, height=tree.height,
            left_fraction=_left_fraction(tree),
            max_log_mass=_max_log_mass(tree) if track_max_mass else None,
        ))
    return state.records


def run_replica(seed: int, replica: int, n_target: int, checkpoints: Sequence[int],
                track_max_mass: bool = False) -> List[TrajectoryRecord]:
    """One seeded chain; module-level so it can cross a process boundary"""
    rng = make_rng(seed, replica, StreamPurpose.GROWTH)
    return run(n_target, checkpoints, rng, track_max_mass)


def grow_replicas(seed: int, replicas: int, n_target: int, checkpoints: Sequence[int],
                  threads: int = 1, track_max_mass: bool = False) -> List[List[TrajectoryRecord]]:
    """Independent chains, one list of records per replica in replica order"""
    jobs = [(seed, r, n_target, tuple(checkpoints), track_max_mass) for r in range(replicas)]
    logger.debug("growing %d chains to n=%d", replicas, n_target)
    return run_replicas(run_replica, jobs, threads)


def records_frame(runs: List[List[TrajectoryRecord]]) -> pd.DataFrame:
    """Long table of every record with its replica index"""
    rows = []
    for replica, records in enumerate(runs):
        for record in records:
            row = asdict(record)
            row["replica"] = replica
            rows.append(row)
    columns = ["replica", "n", "log_mass", "leaf_height", "path_length", "height",
               "left_fraction", "max_log_mass"]
    return pd.DataFrame(rows, columns=columns)


def summarize(runs: List[List[TrajectoryRecord]]) -> pd.DataFrame:
    """
    Per-checkpoint summary across replicas

    Columns: n, replicas, gamma_mean, gamma_std, gamma_q25, gamma_q75,
    gamma_iqr (all of -log M_n / log n) and height_scaled_mean, the mean
    grown-leaf height over 2 sqrt(2) sqrt(n).
    """
    frame = records_frame(runs)
    frame = frame[frame["n"] >= 2].copy()
    frame["gamma_hat"] = frame["log_mass"] / np.log(frame["n"])
    frame["height_scaled"] = frame["leaf_height"] / (SQRT8 * np.sqrt(frame["n"]))
    grouped = frame.groupby("n")
    summary = pd.DataFrame({
        "replicas": grouped["gamma_hat"].count(),
        "gamma_mean": grouped["gamma_hat"].mean(),
        "gamma_std": grouped["gamma_hat"].std(ddof=1),
        "gamma_q25": grouped["gamma_hat"].quantile(0.25),
        "gamma_q75": grouped["gamma_hat"].quantile(0.75),
        "height_scaled_mean": grouped["height_scaled"].mean(),
    })
    summary["gamma_iqr"] = summary["gamma_q75"] - summary["gamma_q25"]
    summary["gamma_target"] = GAMMA
    return summary.reset_index()


def uniformity_pushforward_exact(n: int) -> Fraction:
    """
    Push (uniform T_n) x nu through grow and compare with uniform T_{n+1}

    Returns:
        Fraction: max over size-(n+1) trees of |pushforward - 1/Cat(n+1)|
    """
    Config.check_cap("n", n, "PUSHFORWARD_CAP")
    weight = 1 / catalan(n)
    pushed: Dict[str, Fraction] = {}
    for tree in enumerate_all(n):
        measure = compute_measure(tree, exact=True)
        for leaf, mass in measure.exact_mass.items():
            word = grow(tree, leaf).encode()
            pushed[word] = pushed.get(word, Fraction(0)) + weight * mass

    target = 1 / catalan(n + 1)
    words = enumerate_words(n + 1)
    deviation = max(abs(pushed.pop(word, Fraction(0)) - target) for word in words)
    if pushed:
        # mass landed outside the enumerated targets
        deviation = max(deviation, max(abs(value) for value in pushed.values()))
    return deviation


def end_state_counts(n: int, chains: int, rng: np.random.Generator) -> Counter:
    """Encodings of T_n over independent chains, counted"""
    counts: Counter = Counter()
    for _ in range(chains):
        tree = PlaneBinaryTree()
        for _ in range(n):
            leaf, _ = sample_leaf_descent(tree, rng)
            tree.grow(leaf)
        counts[tree.encode()] += 1
    return counts


def _concentration_replica(seed: int, replica: int, n: int, eps: float) -> float:
    rng = make_rng(seed, replica, StreamPurpose.CONCENTRATION)
    tree = remy_sample(n, rng)
    log_mass = compute_measure(tree, exact=False).log_mass_array()
    log_n = math.log(n)
    inside = (log_mass >= -(GAMMA + eps) * log_n) & (log_mass <= -(GAMMA - eps) * log_n)
    return float(np.exp(log_mass[inside]).sum())


def mass_concentration_profile(n: int, replicas: int, eps: float, seed: int,
                               threads: int = 1) -> float:
    """
    Average nu-mass of the leaves whose mass lies in [n^(-gamma-eps), n^(-gamma+eps)]

    The trees are drawn uniformly by Remy's algorithm, which has the same
    law as the chain at size n.
    """
    Config.check_cap("n", n, "FULL_MEASURE_CAP")
    if n < 2:
        raise DomainError("concentration profile needs n >= 2")
    if eps < 0:
        raise DomainError("eps must be non-negative")
    jobs = [(seed, r, n, eps) for r in range(replicas)]
    return float(np.mean(run_replicas(_concentration_replica, jobs, threads)))


class MixingResult(NamedTuple):
    correlation: float
    standard_error: float
    replicas: int


def _mixing_replica(seed: int, replica: int, m: int, n: int,
                    statistic: TreeStatistic) -> tuple:
    rng = make_rng(seed, replica, StreamPurpose.MIXING)
    records = run(n, (m, n), rng)
    by_n = {record.n: record.statistic(statistic) for record in records}
    return by_n[m], by_n[n]


def mixing_correlation(m: int, n: int, replicas: int, seed: int,
                       statistic: TreeStatistic = TreeStatistic.PATH_LENGTH,
                       threads: int = 1) -> MixingResult:
    """
    Sample correlation of a standardized statistic between T_m and T_n of one chain

    Args:
        m (int): Earlier size
        n (int): Later size, n >= m
        replicas (int): Number of independent chains
        statistic (TreeStatistic): Witness statistic

    Returns:
        MixingResult: correlation with its large-sample standard error
    """
    if m > n:
        raise DomainError("mixing needs m <= n")
    if replicas < 3:
        raise DomainError("mixing needs at least 3 replicas")
    if m == n:
        return MixingResult(1.0, 0.0, replicas)
    jobs = [(seed, r, m, n, statistic) for r in range(replicas)]
    pairs = np.array(run_replicas(_mixing_replica, jobs, threads))
    correlation = float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])
    stderr = (1.0 - correlation ** 2) / math.sqrt(replicas - 1)
    logger.debug("mixing m=%d n=%d corr=%.4f +- %.4f", m, n, correlation, stderr)
    return MixingResult(correlation, stderr, replicas)
