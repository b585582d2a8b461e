import random
from fractions import Fraction

import pytest

from itmlab import make_map


@pytest.fixture
def fig_map():
    """Three-branch map whose attractor has two interval components and a
    rotation return map; the main worked fixture throughout the suite."""
    return make_map(["0", "1/3", "2/3", "1"], ["1/3", "1/7", "-1/2"])


def random_itm(rng: random.Random, r: int, max_den: int):
    """A uniform-ish valid random map with rational parameters."""
    while True:
        cuts = sorted(
            {Fraction(rng.randint(1, max_den - 1), max_den) for _ in range(r - 1)}
        )
        if len(cuts) != r - 1:
            continue
        beta = [Fraction(0)] + cuts + [Fraction(1)]
        gamma = []
        ok = True
        for s in range(r):
            lo = -beta[s]
            hi = 1 - beta[s + 1]
            num_lo = lo * max_den
            num_hi = hi * max_den
            g = Fraction(rng.randint(int(num_lo), int(num_hi)), max_den)
            if g < lo or g > hi:
                ok = False
                break
            gamma.append(g)
        if not ok:
            continue
        return make_map(beta, gamma)


def random_iet3(rng: random.Random, max_den: int = 64):
    """A bijective 3-branch map: pick lengths and a nontrivial permutation."""
    while True:
        a = Fraction(rng.randint(1, max_den - 2), max_den)
        b = Fraction(rng.randint(1, max_den - 1 - a.numerator), max_den)
        c = 1 - a - b
        if c <= 0:
            continue
        lengths = [a, b, c]
        # permutations that keep all three branch translations distinct
        # (the 3-cycles collapse to plain rotations)
        perm = list(rng.choice([[2, 1, 0], [0, 2, 1], [1, 0, 2]]))
        # image order perm: branch s is placed at slot perm[s]
        starts = [Fraction(0)] * 3
        cursor = Fraction(0)
        for slot in range(3):
            for s in range(3):
                if perm[s] == slot:
                    starts[s] = cursor
                    cursor += lengths[s]
        beta = [Fraction(0), a, a + b, Fraction(1)]
        gamma = [starts[s] - beta[s] for s in range(3)]
        m = make_map(beta, gamma)
        if m.is_valid():
            return m
