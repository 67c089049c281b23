"""Hypothesis strategies shared by the test modules"""

import numpy as np
from hypothesis import strategies as st

from tree_core import remy_sample

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def trees(max_size: int = 30, min_size: int = 0):
    """Uniform trees of a drawn size, built by Remy's algorithm from a drawn seed"""
    return st.tuples(st.integers(min_size, max_size), seeds).map(
        lambda pair: remy_sample(pair[0], np.random.default_rng(pair[1])))


profiles = st.tuples(st.integers(0, 60), st.integers(0, 60))
