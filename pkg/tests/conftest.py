import numpy as np
import pytest
from hypothesis import strategies as st

from qrgsquare.geometry import make_metric
from qrgsquare.scalars import EXACT, exact

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)
sitefns = st.lists(complexes, min_size=4, max_size=4).map(lambda v: np.array(v, dtype=complex))
forms = st.tuples(sitefns, sitefns).map(np.stack)
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)
gaussian = st.builds(lambda re, im: exact(re) + exact(im) * exact(1j), rationals, rationals)
exact_sitefns = st.lists(gaussian, min_size=4, max_size=4).map(lambda v: EXACT.array(v))


def random_symmetric_values(rng, low=0.1, high=10.0):
    return tuple(rng.uniform(low, high, 4))


def symmetric_metric(a00, a01, b00, b10, regime=None):
    return make_metric([a00, a01, a00, a01], [b00, b00, b10, b10], regime)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
