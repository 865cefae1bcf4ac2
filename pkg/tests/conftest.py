"""Shared instance builders for the test suite.

Random weights are drawn as empirical weights of random (homomorphism,
labeling) pairs, which guarantees the shared-marginal axiom by construction
and covers zero-mass symbols naturally.
"""

import numpy as np

from fgel import (Homomorphism, Labeling, MarkovMeasure, atomic_alphabet,
                  empirical_weight, product_alphabet, uniform_hom)

BIN = atomic_alphabet(["0", "1"])
BIN_B = atomic_alphabet(["u", "v"])
JOINT = product_alphabet(BIN, BIN_B)


def rand_hom(rng, n, r):
    return uniform_hom(n, r, rng)


def rand_labeling(rng, alphabet, n):
    return Labeling(alphabet, rng.integers(len(alphabet), size=n).astype(np.int64))


def rand_denom_weight(rng, size, r, n, alphabet=None):
    """Random denominator-n weight via a random realized pair."""
    alphabet = alphabet or atomic_alphabet([str(i) for i in range(size)])
    sigma = rand_hom(rng, n, r)
    y = rand_labeling(rng, alphabet, n)
    return empirical_weight(sigma, y, 0)


def rand_weight(rng, size, r, denom_range=(8, 60), alphabet=None):
    n = int(rng.integers(*denom_range))
    return rand_denom_weight(rng, size, r, n, alphabet).weight


def rand_joint_weight(rng, r, denom_range=(8, 60)):
    return rand_weight(rng, 4, r, denom_range, alphabet=JOINT)


def rand_joint_markov(rng, r, denom_range=(8, 60)):
    return MarkovMeasure(rand_joint_weight(rng, r, denom_range))


def rand_markov(rng, size, r, denom_range=(8, 60)):
    return MarkovMeasure(rand_weight(rng, size, r, denom_range))


def full_support_markov(rng, size, r, denom=40):
    """Markov measure with strictly positive entries (mix toward uniform)."""
    from fractions import Fraction

    from fgel import validate_weight
    alphabet = atomic_alphabet([str(i) for i in range(size)])
    w = rand_denom_weight(rng, size, r, denom, alphabet).weight
    u = Fraction(1, size * size)
    edges = []
    for d in w.edges:
        mat = {}
        for a in range(size):
            for ap in range(size):
                mat[(a, ap)] = (d.get((a, ap), Fraction(0)) + u) / 2
        edges.append(mat)
    return MarkovMeasure(validate_weight(r, alphabet, edges))
