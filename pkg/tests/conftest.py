import pathlib

import numpy as np
import pytest
from hypothesis import strategies as st

from uniharm.core import HarmonicComponent, PolyZZbar

CORPUS = pathlib.Path(__file__).parent / "data" / "corpus"

Z = HarmonicComponent((0, 1), (0,))


def random_poly(rng: np.random.Generator, degree: int) -> PolyZZbar:
    """All terms z^m zbar^n with m + n <= degree, coefficients uniform in [-1, 1]^2."""
    terms = []
    for m in range(degree + 1):
        for n in range(degree + 1 - m):
            re, im = rng.uniform(-1, 1, 2)
            terms.append((m, n, complex(re, im)))
    return PolyZZbar(terms)


def random_disk_points(rng: np.random.Generator, k: int, rmax: float = 1.0) -> np.ndarray:
    r = rmax * np.sqrt(rng.uniform(0, 1, k))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, k))


coeff = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
term = st.tuples(st.integers(0, 6), st.integers(0, 6), coeff).filter(lambda t: t[0] + t[1] <= 6)
polys = st.lists(term, min_size=1, max_size=8).map(PolyZZbar)
harmonics = st.builds(
    HarmonicComponent,
    st.lists(coeff, min_size=1, max_size=5).map(tuple),
    st.lists(coeff, min_size=1, max_size=5).map(tuple),
)
disk_points = st.builds(
    lambda r, t: r * np.exp(1j * t),
    st.floats(0, 0.9), st.floats(0, 2 * np.pi),
)


@pytest.fixture
def corpus_dir():
    return CORPUS
