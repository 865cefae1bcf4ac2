"""Random homomorphisms: uniform, and block models pinned to exact statistics.

All samplers draw from numpy Generators; experiments key their streams by
(seed, trial) so parallel trials are reproducible independent of scheduling.
Every emitted block-model sample is checked against its defining constraint
before being returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .errors import (EmptyFiber, FrequencyMismatch, RejectBudgetExceeded,
                     ShapeMismatch)
from .realize import (Homomorphism, Labeling, contingency_permutation,
                      labeling_class_positions, require_matching_frequencies)
from .weights import DenominatorNWeight, project_root, pushforward_counts
from .words import Word, ball_index, reduce_word

DEFAULT_ENUM_BUDGET = 10 ** 7
DEFAULT_REJECT_BUDGET = 200_000


def rng_for(seed: int, *stream) -> np.random.Generator:
    """Counter-style stream: one Generator per (seed, stream indices)."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)])


def uniform_hom(n: int, rank: int, rng: np.random.Generator) -> Homomorphism:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Homomorphism(n, tuple(rng.permutation(n) for _ in range(rank)))


@dataclass(frozen=True)
class SBMSpec:
    """Block-model fiber: homomorphisms with W_{sigma, y^k} equal to ``target``.

    ``sigma0``, when given, witnesses that the fiber is nonempty (and is the
    walk's starting point for the chain sampler).
    """

    y: Labeling
    k: int
    target: DenominatorNWeight
    sigma0: Optional[Homomorphism] = None

    def __post_init__(self):
        if self.target.n != self.y.n:
            raise ShapeMismatch("target denominator must equal the number of points")
        vertex = self.target.weight
        root = project_root(vertex) if self.k > 0 else vertex
        if root.alphabet.symbols != self.y.alphabet.symbols:
            raise ShapeMismatch("target root alphabet does not match the labeling")
        freqs = tuple(int(c) for c in self.y.frequency_counts())
        root_counts = [Fraction(0)] * len(root.alphabet)
        for a, v in enumerate(root.vertex):
            root_counts[a] = v * self.y.n
        if tuple(int(c) for c in root_counts) != freqs or any(
                c.denominator != 1 for c in root_counts):
            raise FrequencyMismatch("target root vertex measure does not match p_y")

    @property
    def n(self) -> int:
        return self.y.n

    @property
    def rank(self) -> int:
        return self.target.rank


def _level0_counts(spec: SBMSpec) -> DenominatorNWeight:
    if spec.k == 0:
        return spec.target
    alph = spec.target.alphabet
    index_map = [alph.ball_tuple(c)[0] for c in range(len(alph))]
    return pushforward_counts(spec.target, alph.base, index_map)


def _satisfies(spec: SBMSpec, sigma: Homomorphism) -> bool:
    from .census import empirical_weight
    return empirical_weight(sigma, spec.y, spec.k) == spec.target


def sbm_sample_k0(y: Labeling, w: DenominatorNWeight,
                  rng: np.random.Generator) -> Homomorphism:
    """Exactly uniform over {sigma : W_{sigma,y} = w}.

    Per generator, each label class is split uniformly into sub-blocks of the
    prescribed sizes and sub-blocks are matched by uniform bijections; the
    preimage count of any fiber element is the same, so the draw is uniform,
    independently across generators.
    """
    require_matching_frequencies(y, w)
    classes = labeling_class_positions(y)
    size = len(y.alphabet)
    perms = tuple(contingency_permutation(classes, w.counts[i], size, y.n, rng)
                  for i in range(w.rank))
    sigma = Homomorphism(y.n, perms)
    spec = SBMSpec(y, 0, w)
    assert _satisfies(spec, sigma)
    return sigma


def enumerate_fiber(spec: SBMSpec, enum_budget: int = DEFAULT_ENUM_BUDGET) -> list:
    """All fiber elements by exhaustive filtering; exact but tiny-n only."""
    import math
    n, r = spec.n, spec.rank
    total = math.factorial(n) ** r
    if total > enum_budget:
        from .errors import BudgetExceeded
        raise BudgetExceeded(f"(n!)^r = {total} exceeds the budget of {enum_budget}")
    out = []
    perms = [np.asarray(p, dtype=np.int64) for p in itertools.permutations(range(n))]
    for combo in itertools.product(perms, repeat=r):
        sigma = Homomorphism(n, tuple(combo))
        if _satisfies(spec, sigma):
            out.append(sigma)
    if not out:
        raise EmptyFiber("no homomorphism realizes the target statistics")
    return out


def sbm_sample(spec: SBMSpec, rng: np.random.Generator, method: str = "auto",
               enum_budget: int = DEFAULT_ENUM_BUDGET,
               reject_budget: int = DEFAULT_REJECT_BUDGET,
               burnin: int = 500, stride: int = 50,
               state: Optional[Homomorphism] = None) -> Homomorphism:
    """One draw from the fiber.

    k = 0 is exact by construction; ``enumerate`` and ``reject`` are exactly
    uniform for k >= 1; ``mcmc`` walks the fiber with transposition proposals
    and is heuristic (stationary on its reachable component, connectivity
    unknown).
    """
    import math
    if method not in ("auto", "enumerate", "reject", "mcmc"):
        raise ValueError(f"unknown method {method!r}")
    if spec.k == 0 and method in ("auto",):
        return sbm_sample_k0(spec.y, spec.target, rng)
    if method == "auto":
        method = "enumerate" if math.factorial(spec.n) ** spec.rank <= min(enum_budget, 10 ** 5) \
            else "reject"

    if method == "enumerate":
        fiber = enumerate_fiber(spec, enum_budget)
        return fiber[int(rng.integers(len(fiber)))]

    if method == "reject":
        base = _level0_counts(spec)
        for _ in range(reject_budget):
            sigma = sbm_sample_k0(spec.y, base, rng)
            if spec.k == 0 or _satisfies(spec, sigma):
                return sigma
        raise RejectBudgetExceeded(f"no acceptance within {reject_budget} proposals")

    # mcmc
    sigma = state if state is not None else spec.sigma0
    if sigma is None:
        raise ValueError("mcmc needs a witness sigma0 (or an explicit state) on the fiber")
    if not _satisfies(spec, sigma):
        raise ValueError("mcmc starting point is not on the fiber")
    current = [p.copy() for p in sigma.perms]
    n, r = spec.n, spec.rank
    steps = burnin if state is None else stride
    for _ in range(steps):
        i = int(rng.integers(r))
        u, v = rng.choice(n, size=2, replace=False)
        prop = current[i].copy()
        prop[u], prop[v] = prop[v], prop[u]
        candidate = Homomorphism(n, tuple(prop if j == i else current[j]
                                          for j in range(r)))
        if _satisfies(spec, candidate):
            current[i] = prop
    result = Homomorphism(n, tuple(p.copy() for p in current))
    assert _satisfies(spec, result)
    return result


def sbm_sample_many(spec: SBMSpec, rng: np.random.Generator, count: int,
                    method: str = "auto", **kwargs) -> list:
    """Draw several samples, amortizing enumeration / chaining the walk."""
    import math
    if method == "auto" and spec.k > 0:
        method = "enumerate" if math.factorial(spec.n) ** spec.rank <= 10 ** 5 else "reject"
    if method == "enumerate" and spec.k > 0:
        fiber = enumerate_fiber(spec, kwargs.get("enum_budget", DEFAULT_ENUM_BUDGET))
        return [fiber[int(rng.integers(len(fiber)))] for _ in range(count)]
    if method == "mcmc":
        out = []
        state = None
        for _ in range(count):
            state = sbm_sample(spec, rng, "mcmc", state=state, **kwargs)
            out.append(state)
        return out
    return [sbm_sample(spec, rng, method, **kwargs) for _ in range(count)]


@dataclass(frozen=True)
class SoficResult:
    sofic: bool
    fraction: Fraction

    def __iter__(self):
        return iter((self.sofic, self.fraction))


def is_sofic(sigma: Homomorphism, words: Iterable[Word], delta) -> SoficResult:
    """Fraction of points moved by every non-identity word of D, versus 1 - delta."""
    from .weights import to_fraction
    n = sigma.n
    moved_all = np.ones(n, dtype=bool)
    ident = np.arange(n)
    for w in words:
        w = reduce_word(w)
        if not w:
            continue
        moved_all &= sigma.word_perm(w) != ident
    frac = Fraction(int(moved_all.sum()), n)
    return SoficResult(frac > 1 - to_fraction(delta), frac)


def ball_words_without_identity(rank: int, radius: int) -> list:
    return [w for w in ball_index(rank, radius).words if w]
