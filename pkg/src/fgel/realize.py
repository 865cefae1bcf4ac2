"""Denominator-n rounding and exact realization of weights on n points.

The rounding construction proceeds in three stages (vertex measure, b-side
half-marginal, edge measure), each time flooring free entries and back-filling
distinguished rows/columns so the prescribed b-marginal is hit exactly, then
repairing any negative entries by unit moves that preserve all marginals
fixed so far.  Distinguished symbols are the first symbols of each alphabet;
repairs scan negative entries lexicographically and draw from the largest
positive entry (ties broken lexicographically), so the whole construction is
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import FrequencyMismatch, Inconsistent, InfeasibleRepair, ShapeMismatch
from .weights import (Alphabet, DenominatorNWeight, Weight, atomic_alphabet,
                      ball_alphabet, product_alphabet, to_fraction,
                      weight_from_counts)
from .words import BallIndex, Word, ball_index


# ---------------------------------------------------------------------------
# Homomorphisms and labelings
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Homomorphism:
    """Images of the free generators as permutations of {0..n-1}."""

    n: int
    perms: tuple  # tuple[np.ndarray, ...]

    def __post_init__(self):
        for p in self.perms:
            if p.shape != (self.n,) or not np.array_equal(np.sort(p), np.arange(self.n)):
                raise ShapeMismatch("each generator image must be a permutation of [n]")

    @property
    def rank(self) -> int:
        return len(self.perms)

    @cached_property
    def inverses(self) -> tuple:
        out = []
        for p in self.perms:
            inv = np.empty_like(p)
            inv[p] = np.arange(self.n)
            out.append(inv)
        return tuple(out)

    def letter_perm(self, letter: int) -> np.ndarray:
        return self.perms[letter - 1] if letter > 0 else self.inverses[-letter - 1]

    def word_perm(self, word: Word) -> np.ndarray:
        """sigma(word) as an array; letters act right-to-left."""
        out = np.arange(self.n)
        for letter in reversed(word):
            out = self.letter_perm(letter)[out]
        return out

    def word_perms(self, tree) -> list:
        """sigma(w) for every word of a subtree, sharing suffixes.

        Tree parents drop the first letter t, so sigma(w) = sigma(t) o sigma(parent).
        """
        out: list = [np.arange(self.n)]
        for pos in range(1, len(tree)):
            letter = tree.gen[pos] * tree.dirn[pos]
            out.append(self.letter_perm(letter)[out[tree.parent[pos]]])
        return out

    def key(self) -> tuple:
        return tuple(p.tobytes() for p in self.perms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Homomorphism):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __hash__(self):
        return hash((self.n, self.key()))


def identity_hom(n: int, rank: int) -> Homomorphism:
    return Homomorphism(n, tuple(np.arange(n) for _ in range(rank)))


def hom_from_lists(perms: Sequence[Sequence[int]]) -> Homomorphism:
    arrays = tuple(np.asarray(p, dtype=np.int64) for p in perms)
    if not arrays:
        raise ShapeMismatch("at least one generator required")
    return Homomorphism(len(arrays[0]), arrays)


@dataclass(frozen=True, eq=False)
class Labeling:
    """A point of A^n: symbol indices into ``alphabet``."""

    alphabet: Alphabet
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values)

    def frequency_counts(self) -> np.ndarray:
        return np.bincount(self.values, minlength=len(self.alphabet))

    def symbols(self) -> list:
        return [self.alphabet.symbols[v] for v in self.values]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Labeling):
            return NotImplemented
        return (self.alphabet.symbols == other.alphabet.symbols
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.alphabet.symbols, self.values.tobytes()))


def labeling_from_symbols(alphabet: Alphabet, symbols: Sequence[str]) -> Labeling:
    return Labeling(alphabet, np.asarray([alphabet.index(s) for s in symbols], dtype=np.int64))


@dataclass(frozen=True, eq=False)
class BallLabeling:
    """Per-element maps B(e,k) -> base alphabet, as an (n, |ball|) index array."""

    base_alphabet: Alphabet
    ball: BallIndex
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def radius(self) -> int:
        return self.ball.radius

    def root_labeling(self) -> Labeling:
        return Labeling(self.base_alphabet, self.entries[:, 0].copy())

    def as_labeling(self) -> Labeling:
        """View over the ball alphabet (radius 0 collapses to the base)."""
        if self.radius == 0:
            return self.root_labeling()
        alph = ball_alphabet(self.base_alphabet, self.ball.rank, self.radius)
        radix = _ball_radix(len(self.base_alphabet), self.entries.shape[1])
        return Labeling(alph, self.entries @ radix)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BallLabeling):
            return NotImplemented
        return (self.base_alphabet.symbols == other.base_alphabet.symbols
                and self.ball.radius == other.ball.radius
                and np.array_equal(self.entries, other.entries))


def _ball_radix(base_size: int, length: int) -> np.ndarray:
    radix = base_size ** np.arange(length - 1, -1, -1, dtype=object)
    if base_size ** length <= (1 << 62):
        radix = radix.astype(np.int64)
    return radix


def ball_refine(sigma: Homomorphism, x: Labeling, k: int) -> BallLabeling:
    """Entry j sends word g to x[sigma(g) j]."""
    if k < 0:
        raise ValueError("radius must be >= 0")
    bi = ball_index(sigma.rank, k)
    perms = sigma.word_perms(bi.tree)
    entries = np.empty((x.n, len(bi)), dtype=np.int64)
    for pos, perm in enumerate(perms):
        entries[:, pos] = x.values[perm]
    return BallLabeling(x.alphabet, bi, entries)


def check_ball_consistency(sigma: Homomorphism, ball_labeling: BallLabeling) -> Labeling:
    """Return the root labeling after verifying the ball refinement roundtrip."""
    x = ball_labeling.root_labeling()
    again = ball_refine(sigma, x, ball_labeling.radius)
    if not np.array_equal(again.entries, ball_labeling.entries):
        bad = np.argwhere(again.entries != ball_labeling.entries)
        j, pos = int(bad[0][0]), int(bad[0][1])
        raise Inconsistent(j, ball_labeling.ball.words[pos])
    return x


# ---------------------------------------------------------------------------
# Denominator-n rounding with a prescribed marginal
# ---------------------------------------------------------------------------

def _floor_times_n(x: Fraction, n: int) -> int:
    return math.floor(x * n)


def _first_negative(entries) -> Optional[tuple]:
    for key in sorted(entries):
        if entries[key] < 0:
            return key
    return None


def _best_donor(candidates) -> Optional[tuple]:
    """Largest positive entry; ties go to the lexicographically first key."""
    best_key, best_val = None, 0
    for key in sorted(candidates):
        v = candidates[key]
        if v > best_val:
            best_key, best_val = key, v
    return best_key


def _repair_vertex(v, na: int, nb: int) -> None:
    while True:
        neg = _first_negative({(a, b): v[a][b] for a in range(na) for b in range(nb)})
        if neg is None:
            return
        a_neg, b = neg
        donor = _best_donor({(a,): v[a][b] for a in range(na)})
        if donor is None:
            raise InfeasibleRepair("vertex repair found no positive entry in the column")
        v[donor[0]][b] -= 1
        v[a_neg][b] += 1


def _repair_half(hm, na: int, nb: int) -> None:
    # hm[b][a2][b2]; moves preserve the b-marginal and the vertex column sums
    while True:
        neg = _first_negative({(b, a2, b2): hm[b][a2][b2]
                               for b in range(nb) for a2 in range(na) for b2 in range(nb)})
        if neg is None:
            return
        b_neg, a2_neg, b2 = neg
        donor_a = _best_donor({(a2,): hm[b_neg][a2][b2] for a2 in range(na)})
        donor_b = _best_donor({(b,): hm[b][a2_neg][b2] for b in range(nb)})
        if donor_a is None or donor_b is None:
            raise InfeasibleRepair("half-marginal repair found no positive entry")
        a2_plus, b_plus = donor_a[0], donor_b[0]
        hm[b_neg][a2_neg][b2] += 1
        hm[b_plus][a2_plus][b2] += 1
        hm[b_neg][a2_plus][b2] -= 1
        hm[b_plus][a2_neg][b2] -= 1


def _repair_edge(e, na: int, nb: int) -> None:
    # e[a][b][a2][b2]; moves preserve row sums (vertex) and half-marginal sums
    while True:
        neg = _first_negative({(a, b, a2, b2): e[a][b][a2][b2]
                               for a in range(na) for b in range(nb)
                               for a2 in range(na) for b2 in range(nb)})
        if neg is None:
            return
        a_neg, b, a2_neg, b2_neg = neg
        donor_t = _best_donor({(a2, b2): e[a_neg][b][a2][b2]
                               for a2 in range(na) for b2 in range(nb)})
        donor_s = _best_donor({(a,): e[a][b][a2_neg][b2_neg] for a in range(na)})
        if donor_t is None or donor_s is None:
            raise InfeasibleRepair("edge repair found no positive entry")
        (a2_plus, b2_plus), a_plus = donor_t, donor_s[0]
        e[a_neg][b][a2_neg][b2_neg] += 1
        e[a_plus][b][a2_plus][b2_plus] += 1
        e[a_neg][b][a2_plus][b2_plus] -= 1
        e[a_plus][b][a2_neg][b2_neg] -= 1


def round_with_marginal(w: Weight, w_b: DenominatorNWeight, n: int) -> DenominatorNWeight:
    """Denominator-n approximation of a product-alphabet weight with exact b-marginal.

    The output is a valid denominator-n weight over the same product alphabet
    whose b-pushforward equals ``w_b`` exactly, within distance
    265 r (delta + |AxB|^2/n) of ``w`` whenever the caller's marginal satisfies
    d(pi_B w, w_b) < delta.
    """
    if w.alphabet.kind != "product":
        raise ShapeMismatch("round_with_marginal needs a product-alphabet weight")
    alph_a, alph_b = w.alphabet.factors
    if w_b.alphabet.symbols != alph_b.symbols:
        raise ShapeMismatch("marginal alphabet does not match the b factor")
    if w_b.n != n:
        raise ShapeMismatch(f"marginal has denominator {w_b.n}, expected {n}")
    if w.rank != w_b.rank:
        raise ShapeMismatch("ranks differ")
    na, nb, r = len(alph_a), len(alph_b), w.rank
    pair = w.alphabet.pair_index

    def wfull(i, a, b, a2, b2) -> Fraction:
        return w.edge(i, pair(a, b), pair(a2, b2))

    wvert = [[w.vertex[pair(a, b)] for b in range(nb)] for a in range(na)]
    vb = list(w_b.vertex_counts)
    eb = [[[0] * nb for _ in range(nb)] for _ in range(r)]
    for i in range(r):
        for (b, b2), c in w_b.counts[i].items():
            eb[i][b][b2] = c

    # stage 1: vertex counts, column a0 back-filled from the prescribed marginal
    v = [[0] * nb for _ in range(na)]
    for a in range(1, na):
        for b in range(nb):
            v[a][b] = _floor_times_n(wvert[a][b], n)
    for b in range(nb):
        v[0][b] = vb[b] - sum(v[a][b] for a in range(1, na))
    _repair_vertex(v, na, nb)

    # stage 2: half-marginals sum_a W((a,b),(a2,b2);i), per generator
    half = []
    for i in range(r):
        whalf = [[[sum(wfull(i, a, b, a2, b2) for a in range(na))
                   for b2 in range(nb)] for a2 in range(na)] for b in range(nb)]
        hm = [[[0] * nb for _ in range(na)] for _ in range(nb)]
        for b in range(1, nb):
            for b2 in range(nb):
                for a2 in range(1, na):
                    hm[b][a2][b2] = _floor_times_n(whalf[b][a2][b2], n)
                hm[b][0][b2] = eb[i][b][b2] - sum(hm[b][a2][b2] for a2 in range(1, na))
        for a2 in range(na):
            for b2 in range(nb):
                hm[0][a2][b2] = v[a2][b2] - sum(hm[b][a2][b2] for b in range(1, nb))
        _repair_half(hm, na, nb)
        half.append(hm)

    # stage 3: edge counts, back-filled against the half-marginal and the vertex
    counts = []
    for i in range(r):
        hm = half[i]
        e = [[[[0] * nb for _ in range(na)] for _ in range(nb)] for _ in range(na)]
        for a in range(1, na):
            for b in range(nb):
                for a2 in range(na):
                    for b2 in range(nb):
                        if (a2, b2) != (0, 0):
                            e[a][b][a2][b2] = _floor_times_n(wfull(i, a, b, a2, b2), n)
        for b in range(nb):
            for a2 in range(na):
                for b2 in range(nb):
                    if (a2, b2) != (0, 0):
                        e[0][b][a2][b2] = hm[b][a2][b2] - sum(e[a][b][a2][b2]
                                                              for a in range(1, na))
        for a in range(na):
            for b in range(nb):
                e[a][b][0][0] = v[a][b] - sum(e[a][b][a2][b2]
                                              for a2 in range(na) for b2 in range(nb)
                                              if (a2, b2) != (0, 0))
        _repair_edge(e, na, nb)
        d = {}
        for a in range(na):
            for b in range(nb):
                for a2 in range(na):
                    for b2 in range(nb):
                        c = e[a][b][a2][b2]
                        if c:
                            d[(pair(a, b), pair(a2, b2))] = c
        counts.append(d)

    out = weight_from_counts(r, w.alphabet, n, counts)
    # the construction guarantees the exact marginal; check it anyway
    from .weights import project_b_counts
    if project_b_counts(out) != w_b:
        raise InfeasibleRepair("rounded weight lost the prescribed marginal")
    return out


def marginal_rounding_bound(rank: int, product_size: int, n: int, delta) -> Fraction:
    """265 r (delta + |AxB|^2 / n), the guaranteed rounding distance."""
    return 265 * rank * (to_fraction(delta) + Fraction(product_size ** 2, n))


_STAR = atomic_alphabet(["*"])


def round_denominator_n(w: Weight, n: int) -> DenominatorNWeight:
    """Denominator-n approximation of a weight (no marginal constraint).

    Runs the marginal construction against the trivial one-point factor, so
    the distance satisfies the same 265 r bound with delta = 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alph = product_alphabet(w.alphabet, _STAR)
    size = len(w.alphabet)
    edges = []
    for d in w.edges:
        edges.append({(alph.pair_index(a, 0), alph.pair_index(ap, 0)): val
                      for (a, ap), val in d.items()})
    lifted = Weight(w.rank, alph, tuple(edges), tuple(w.vertex))
    trivial = weight_from_counts(w.rank, _STAR, n, [{(0, 0): n}] * w.rank)
    rounded = round_with_marginal(lifted, trivial, n)
    counts = []
    for d in rounded.counts:
        counts.append({(alph.split_index(a)[0], alph.split_index(ap)[0]): c
                       for (a, ap), c in d.items()})
    return weight_from_counts(w.rank, w.alphabet, n, counts)


# ---------------------------------------------------------------------------
# Realization: (sigma, x) with the exact empirical weight
# ---------------------------------------------------------------------------

def contingency_permutation(class_positions: Sequence[np.ndarray], counts,
                            size: int, n: int, rng=None) -> np.ndarray:
    """A permutation sending exactly counts[a][a2] elements of class a into class a2.

    With an rng, source and target classes are shuffled before cutting into
    blocks, which makes the draw uniform over all permutations with the given
    contingency table; without one, blocks are cut in position order.
    """
    perm = np.empty(n, dtype=np.int64)
    src = []
    tgt = []
    for a in range(size):
        pos = class_positions[a]
        src.append(rng.permutation(pos) if rng is not None else pos)
        pos2 = class_positions[a]
        tgt.append(rng.permutation(pos2) if rng is not None else pos2)
    tgt_offsets = [0] * size
    tgt_blocks: dict = {}
    for a in range(size):
        for a2 in range(size):
            c = counts.get((a, a2), 0) if isinstance(counts, dict) else counts[a][a2]
            if c:
                off = tgt_offsets[a2]
                tgt_blocks[(a, a2)] = tgt[a2][off:off + c]
                tgt_offsets[a2] = off + c
    src_offsets = [0] * size
    for a in range(size):
        for a2 in range(size):
            block = tgt_blocks.get((a, a2))
            if block is None:
                continue
            off = src_offsets[a]
            perm[src[a][off:off + len(block)]] = block
            src_offsets[a] = off + len(block)
    return perm


def realize_weight(w: DenominatorNWeight, rng=None) -> tuple:
    """(sigma, x) with empirical weight exactly ``w``.

    Labels are assigned in blocks by vertex counts; for each generator the
    weight axiom makes the contingency table feasible, with sub-blocks matched
    deterministically or uniformly at random.
    """
    n = w.n
    size = len(w.alphabet)
    vcounts = w.vertex_counts
    values = np.repeat(np.arange(size, dtype=np.int64), vcounts)
    x = Labeling(w.alphabet, values)
    class_positions = [np.flatnonzero(values == a) for a in range(size)]
    perms = tuple(contingency_permutation(class_positions, w.counts[i], size, n, rng)
                  for i in range(w.rank))
    return Homomorphism(n, perms), x


def labeling_class_positions(x: Labeling) -> list:
    return [np.flatnonzero(x.values == a) for a in range(len(x.alphabet))]


def require_matching_frequencies(x: Labeling, w: DenominatorNWeight) -> None:
    freq = x.frequency_counts()
    if tuple(int(c) for c in freq) != tuple(w.vertex_counts):
        raise FrequencyMismatch(
            f"labeling frequencies {tuple(int(c) for c in freq)} do not match "
            f"vertex counts {tuple(w.vertex_counts)}")
