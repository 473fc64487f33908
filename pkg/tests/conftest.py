import math

import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from dist import DiscreteDistribution

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

LN2 = math.log(2.0)
LN3 = math.log(3.0)


@st.composite
def distributions(draw, max_atoms=8):
    """Small laws on integer atoms with masses bounded away from 0"""
    values = draw(st.lists(st.integers(-20, 20), min_size=1, max_size=max_atoms, unique=True))
    weights = draw(
        st.lists(st.floats(0.05, 1.0), min_size=len(values), max_size=len(values))
    )
    return DiscreteDistribution.from_samples(values, weights)


@st.composite
def interior_thresholds(draw, max_atoms=8):
    """(d, a) with a an atom of d and 0 < F(a) < 1"""
    values = draw(st.lists(st.integers(-20, 20), min_size=2, max_size=max_atoms, unique=True))
    weights = draw(
        st.lists(st.floats(0.05, 1.0), min_size=len(values), max_size=len(values))
    )
    d = DiscreteDistribution.from_samples(values, weights)
    a = draw(st.sampled_from(d.values[:-1].tolist()))
    return d, a


def uniform(*values):
    return DiscreteDistribution.from_samples(list(values))


@pytest.fixture
def uniform01():
    return uniform(0, 1)


@pytest.fixture
def uniform1234():
    return uniform(1, 2, 3, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
