import random
from fractions import Fraction

import pytest

from apfree.torus import TorusVec


@pytest.fixture
def rnd():
    return random.Random(0xA5F00D)


def random_point(rnd: random.Random, q: int, pairs: int) -> TorusVec:
    return TorusVec(tuple(rnd.randrange(q) for _ in range(2 * pairs)), q)


def frac(s: str) -> Fraction:
    return Fraction(s)
