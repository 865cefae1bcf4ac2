"""Built-in exact-oracle checks, printed as one PASS/FAIL line each.

These are condensed versions of the dual-route guarantees: every closed-form
count is replayed against literal enumeration, every construction against its
defining identity, on freshly drawn random instances.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import census, markov, realize, sampler, weights


def _random_denominator_weight(rng, size: int, rank: int, n: int):
    sigma = sampler.uniform_hom(n, rank, rng)
    alph = weights.atomic_alphabet([str(i) for i in range(size)])
    y = realize.Labeling(alph, rng.integers(size, size=n).astype(np.int64))
    return census.empirical_weight(sigma, y, 0), sigma, y


def _random_joint_weight(rng, na: int, nb: int, rank: int, n: int):
    alph = weights.product_alphabet(
        weights.atomic_alphabet([str(i) for i in range(na)]),
        weights.atomic_alphabet([chr(ord("u") + i) for i in range(nb)]))
    sigma = sampler.uniform_hom(n, rank, rng)
    z = realize.Labeling(alph, rng.integers(na * nb, size=n).astype(np.int64))
    return census.empirical_weight(sigma, z, 0)


def run_selftest(fast: bool = False) -> bool:
    rng = np.random.default_rng(20240811)
    checks = []

    def check(label, fn):
        checks.append((label, fn))

    reps = 3 if fast else 10

    def pair_counts():
        for _ in range(reps):
            n = int(rng.integers(2, 5))
            r = int(rng.integers(1, 3))
            w, _, _ = _random_denominator_weight(rng, 2, r, n)
            if census.z_n(w) != census.z_n_bruteforce(w):
                return False
        return True
    check("pair count closed form == literal enumeration", pair_counts)

    def planted_counts():
        for _ in range(reps):
            n = int(rng.integers(2, 5))
            w_ab = _random_joint_weight(rng, 2, 2, 1, n)
            exact = census.expected_planted_count_exact(w_ab)
            w_b = weights.project_b_counts(w_ab)
            total, fiber = Fraction(0), 0
            import itertools
            y = realize.realize_weight(w_b)[1]
            for combo in itertools.permutations(range(n)):
                sigma = realize.hom_from_lists([list(combo)])
                if census.empirical_weight(sigma, y, 0) != w_b:
                    continue
                fiber += 1
                cnt = 0
                for xv in itertools.product(range(2), repeat=n):
                    lab = realize.Labeling(
                        w_ab.alphabet,
                        np.asarray(xv, dtype=np.int64) * 2 + y.values)
                    if census.empirical_weight(sigma, lab, 0) == w_ab:
                        cnt += 1
                total += cnt
            if fiber and exact != Fraction(total, fiber):
                return False
        return True
    check("expected planted count == brute-force fiber average", planted_counts)

    def realize_roundtrip():
        for _ in range(reps * 3):
            n = int(rng.integers(2, 40))
            r = int(rng.integers(1, 4))
            w, _, _ = _random_denominator_weight(rng, int(rng.integers(2, 4)), r, n)
            sigma, x = realize.realize_weight(w, rng)
            if census.empirical_weight(sigma, x, 0) != w:
                return False
        return True
    check("realized pair reproduces its weight exactly", realize_roundtrip)

    def rounding():
        for _ in range(reps * 2):
            n = int(rng.integers(3, 30))
            m = int(rng.integers(10, 60))
            w_ab = _random_joint_weight(rng, 2, 2, int(rng.integers(1, 3)), m).weight
            w_b = realize.round_denominator_n(weights.project_b(w_ab), n)
            delta = weights.weight_distance(weights.project_b(w_ab), w_b.weight)
            out = realize.round_with_marginal(w_ab, w_b, n)
            if weights.project_b_counts(out) != w_b:
                return False
            bound = realize.marginal_rounding_bound(w_ab.rank, len(w_ab.alphabet),
                                                    n, delta)
            if weights.weight_distance(w_ab, out.weight) > bound:
                return False
        return True
    check("marginal-pinned rounding: exact marginal and distance bound", rounding)

    def dstar_routes():
        for _ in range(reps):
            n = int(rng.integers(4, 20))
            k = int(rng.integers(0, 3))
            wm, _, _ = _random_denominator_weight(rng, 2, 2, int(rng.integers(8, 20)))
            meas = markov.MarkovMeasure(wm.weight)
            sigma = sampler.uniform_hom(n, 2, rng)
            alph = wm.alphabet
            x = realize.Labeling(alph, rng.integers(2, size=n).astype(np.int64))
            a = census.dstar_empirical(sigma, x, meas, k)
            b = census.dstar_via_ball_pairs(sigma, x, meas, k)
            if a != b:
                return False
        return True
    check("empirical distance: union-atom route == ball-pair route", dstar_routes)

    ok = True
    for label, fn in checks:
        good = False
        try:
            good = fn()
        except Exception as exc:  # noqa: BLE001 - selftest reports, never raises
            label = f"{label} ({type(exc).__name__}: {exc})"
        ok &= good
        print(f"{'PASS' if good else 'FAIL'}  {label}")
    return ok
