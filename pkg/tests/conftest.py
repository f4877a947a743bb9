import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from fixpoint.spaces import C0Box, RealInterval, Scalar, Seq  # noqa: E402


@pytest.fixture
def box():
    return C0Box()


@pytest.fixture
def ray():
    return RealInterval(1)


def box_points(max_index=30):
    """Hypothesis strategy for points of the c0 box."""
    return st.dictionaries(
        st.integers(1, max_index),
        st.floats(0, 1, allow_nan=False),
        max_size=8,
    ).map(lambda d: Seq({k: v * k for k, v in d.items()}))


def ray_points(hi=1e6):
    return st.floats(1, hi, allow_nan=False).map(Scalar)
