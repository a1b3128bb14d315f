import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kpcm.mdo import MicroDiffOp
from kpcm.scalars import Scalar
from kpcm.series import TruncatedSeries


@pytest.fixture
def rng():
    return random.Random(20240811)


def random_fraction(rng, small=6):
    num = rng.randint(-small, small)
    den = rng.randint(1, small)
    return Fraction(num, den)


def random_exact_poly(rng, max_deg=3, small=6):
    deg = rng.randint(0, max_deg)
    return TruncatedSeries.exact_poly(
        [random_fraction(rng, small) for _ in range(deg + 1)]
    )


def random_exact_mdo(rng, floor=-6, top=2, max_deg=3, density=0.7):
    """Random finite operator with exact rational polynomial coefficients."""
    terms = {}
    for d in range(floor, top + 1):
        if rng.random() < density:
            terms[d] = random_exact_poly(rng, max_deg=max_deg)
    if not terms:
        terms[0] = TruncatedSeries.one()
    return MicroDiffOp.from_terms(terms)


def random_truncated_mdo(rng, floor=-6, top=2, order=8, density=0.7):
    terms = {}
    for d in range(floor, top + 1):
        if rng.random() < density:
            coeffs = [Scalar.exact(random_fraction(rng)) for _ in range(order + 1)]
            terms[d] = TruncatedSeries(coeffs, order=order)
    if not terms:
        terms[0] = TruncatedSeries.one(order=order)
    return MicroDiffOp.from_terms(terms, exact_floor=False, order=order)
