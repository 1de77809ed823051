"""Shared generators for solver tests."""

import random

from vclab import catalog
from vclab.words import Coef, MixedWord, Var, reduce

SMALL_GROUPS = ["z2", "z3", "z4", "z2xz2", "s3", "z6", "q8", "d4", "z8", "z2xz4"]


def random_system(rng: random.Random):
    """A random system of 1-3 equations in at most 3 variables over a group of order <= 8."""
    H = catalog.get(rng.choice(SMALL_GROUPS))
    nvars = rng.randint(1, 3)
    eqs = []
    for _ in range(rng.randint(1, 3)):
        letters = []
        for _ in range(rng.randint(1, 6)):
            if rng.random() < 0.25:
                letters.append(Coef(rng.randrange(1, H.order) if H.order > 1 else 0))
            else:
                letters.append(Var(rng.randrange(nvars), rng.choice((1, -1))))
        eqs.append(reduce(MixedWord(tuple(letters), nvars), H))
    return H, nvars, eqs
