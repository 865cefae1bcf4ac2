"""Exact edge-measure systems ("weights") over finite alphabets.

A weight of rank r over an alphabet A is a family of r probability measures
on A x A (one per free generator) whose row marginals agree with the column
marginals across all generators; the common marginal is the vertex measure.
Entries are exact rationals throughout.  Entropy-valued functionals are the
only place floats appear, and they are computed from exact entries at the
last step (0 log 0 = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from .errors import AxiomViolation, MarginalNotDenominatorN, NotNormalized, ShapeMismatch
from .words import BallIndex, ball_index, ball_size

ZERO = Fraction(0)
ONE = Fraction(1)

PRODUCT_SEP = "|"
BALL_SEP = ","


def to_fraction(x) -> Fraction:
    """Coerce to an exact rational; floats are read as their shortest decimal form."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    raise TypeError(f"cannot interpret {x!r} as a rational")


def entropy_nats(probs: Iterable[Fraction]) -> float:
    h = 0.0
    for p in probs:
        if p:
            fp = float(p)
            h -= fp * math.log(fp)
    return h


def binary_entropy_nats(p) -> float:
    fp = float(p)
    h = 0.0
    if 0.0 < fp:
        h -= fp * math.log(fp)
    if fp < 1.0:
        h -= (1.0 - fp) * math.log(1.0 - fp)
    return h


# ---------------------------------------------------------------------------
# Alphabets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet, optionally carrying product or ball structure.

    ``product`` alphabets name symbols "a|b" in A-major order; ``ball``
    alphabets index assignments B(e,k) -> base by the canonical ball word
    order, most significant digit at the identity.
    """

    symbols: tuple
    kind: str = "atomic"
    factors: tuple = ()
    base: Optional["Alphabet"] = None
    ball: Optional[BallIndex] = None

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols) or not self.symbols:
            raise ValueError("alphabet symbols must be distinct and nonempty")

    def __len__(self) -> int:
        return len(self.symbols)

    @cached_property
    def _index(self) -> dict:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet") from None

    # product structure -----------------------------------------------------
    def split_index(self, c: int) -> tuple:
        a_size, b_size = len(self.factors[0]), len(self.factors[1])
        assert 0 <= c < a_size * b_size
        return divmod(c, b_size)

    def pair_index(self, ia: int, ib: int) -> int:
        return ia * len(self.factors[1]) + ib

    # ball structure --------------------------------------------------------
    def ball_tuple(self, c: int) -> tuple:
        """Decode a ball symbol index to base-symbol indices in ball word order."""
        nb = len(self.base)
        m = len(self.ball)
        digits = [0] * m
        for pos in range(m - 1, -1, -1):
            c, digits[pos] = divmod(c, nb)
        return tuple(digits)

    def ball_code(self, digits: Sequence[int]) -> int:
        nb = len(self.base)
        c = 0
        for d in digits:
            c = c * nb + d
        return c


def atomic_alphabet(symbols: Iterable[str]) -> Alphabet:
    return Alphabet(tuple(str(s) for s in symbols))


def product_alphabet(a: Alphabet, b: Alphabet) -> Alphabet:
    for s in a.symbols + b.symbols:
        if PRODUCT_SEP in s:
            raise ValueError(f"symbol {s!r} contains the reserved separator {PRODUCT_SEP!r}")
    symbols = tuple(f"{sa}{PRODUCT_SEP}{sb}" for sa in a.symbols for sb in b.symbols)
    return Alphabet(symbols, kind="product", factors=(a, b))


_BALL_ALPHABET_CACHE: dict = {}


def ball_alphabet(base: Alphabet, rank: int, radius: int) -> Alphabet:
    """A^{B(e,k)}; radius 0 returns the base alphabet unchanged."""
    if radius == 0:
        return base
    key = (base.symbols, rank, radius)
    if key in _BALL_ALPHABET_CACHE:
        return _BALL_ALPHABET_CACHE[key]
    for s in base.symbols:
        if BALL_SEP in s:
            raise ValueError(f"symbol {s!r} contains the reserved separator {BALL_SEP!r}")
    bi = ball_index(rank, radius)
    m = len(bi)
    nb = len(base)
    names = []
    digits = [0] * m
    for _ in range(nb ** m):
        names.append(BALL_SEP.join(base.symbols[d] for d in digits))
        for pos in range(m - 1, -1, -1):
            digits[pos] += 1
            if digits[pos] < nb:
                break
            digits[pos] = 0
    alph = Alphabet(tuple(names), kind="ball", base=base, ball=bi)
    _BALL_ALPHABET_CACHE[key] = alph
    return alph


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

EdgeDict = Mapping  # Mapping[tuple[int, int], Fraction], zero entries omitted


@dataclass(frozen=True, eq=False)
class Weight:
    """Validated weight: build through :func:`validate_weight`."""

    rank: int
    alphabet: Alphabet
    edges: tuple            # tuple[dict[(int, int), Fraction], ...]
    vertex: tuple           # tuple[Fraction, ...], cached common marginal

    def edge(self, i: int, a: int, ap: int) -> Fraction:
        return self.edges[i].get((a, ap), ZERO)

    def vertex_fraction(self, a: int) -> Fraction:
        return self.vertex[a]

    def edge_matrix(self, i: int) -> list:
        n = len(self.alphabet)
        m = [[ZERO] * n for _ in range(n)]
        for (a, ap), v in self.edges[i].items():
            m[a][ap] = v
        return m

    def __eq__(self, other) -> bool:
        if not isinstance(other, Weight):
            return NotImplemented
        return (self.rank == other.rank
                and self.alphabet.symbols == other.alphabet.symbols
                and all(dict(e1) == dict(e2) for e1, e2 in zip(self.edges, other.edges)))

    def __hash__(self):
        return hash((self.rank, self.alphabet.symbols,
                     tuple(tuple(sorted(e.items())) for e in self.edges)))


@dataclass(frozen=True, eq=False)
class DenominatorNWeight:
    """A weight all of whose entries are integer multiples of 1/n."""

    weight: Weight
    n: int
    counts: tuple           # tuple[dict[(int, int), int], ...]

    @property
    def rank(self) -> int:
        return self.weight.rank

    @property
    def alphabet(self) -> Alphabet:
        return self.weight.alphabet

    @cached_property
    def vertex_counts(self) -> tuple:
        out = [0] * len(self.alphabet)
        for (a, _), c in self.counts[0].items():
            out[a] += c
        return tuple(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenominatorNWeight):
            return NotImplemented
        return self.n == other.n and self.weight == other.weight

    def __hash__(self):
        return hash((self.n, self.weight))


def _as_sparse(edges_in, size: int):
    """Accept dense rows or sparse dicts; return zero-stripped dicts of Fractions."""
    out = []
    for mat in edges_in:
        d: dict = {}
        if isinstance(mat, Mapping):
            items = mat.items()
            for (a, ap), v in items:
                v = to_fraction(v)
                if not (0 <= a < size and 0 <= ap < size):
                    raise ShapeMismatch(f"index ({a},{ap}) outside alphabet of size {size}")
                if v:
                    d[(a, ap)] = v
        else:
            rows = list(mat)
            if len(rows) != size or any(len(list(r)) != size for r in rows):
                raise ShapeMismatch(f"edge matrix is not {size}x{size}")
            for a, row in enumerate(rows):
                for ap, v in enumerate(row):
                    v = to_fraction(v)
                    if v:
                        d[(a, ap)] = v
        out.append(d)
    return tuple(out)


def validate_weight(rank: int, alphabet: Alphabet, edges) -> Weight:
    """Check normalization, nonnegativity and the shared-marginal axiom.

    Raises NotNormalized if some matrix does not sum to exactly 1, and
    AxiomViolation (naming the offending generators and symbol) if row and
    column marginals disagree or an entry is negative.
    """
    if rank < 1:
        raise ShapeMismatch("rank must be >= 1")
    size = len(alphabet)
    sparse = _as_sparse(edges, size)
    if len(sparse) != rank:
        raise ShapeMismatch(f"expected {rank} edge matrices, got {len(sparse)}")
    for i, d in enumerate(sparse):
        neg = [(k, v) for k, v in d.items() if v < 0]
        if neg:
            (a, ap), v = neg[0]
            raise AxiomViolation(f"edge_{i + 1}[{alphabet.symbols[a]},{alphabet.symbols[ap]}] = {v} < 0")
        total = sum(d.values(), ZERO)
        if total != 1:
            raise NotNormalized(f"edge matrix {i + 1} sums to {total}, not 1")
    rows = []
    cols = []
    for d in sparse:
        row = [ZERO] * size
        col = [ZERO] * size
        for (a, ap), v in d.items():
            row[a] += v
            col[ap] += v
        rows.append(row)
        cols.append(col)
    vertex = rows[0]
    for i in range(rank):
        for j in range(rank):
            for a in range(size):
                if rows[i][a] != cols[j][a]:
                    raise AxiomViolation(
                        f"marginal mismatch at symbol {alphabet.symbols[a]!r}: "
                        f"row sum of generator {i + 1} is {rows[i][a]}, "
                        f"column sum of generator {j + 1} is {cols[j][a]}")
    return Weight(rank, alphabet, sparse, tuple(vertex))


def weight_from_counts(rank: int, alphabet: Alphabet, n: int, counts) -> DenominatorNWeight:
    """Build a denominator-n weight from integer pair counts (each matrix sums to n)."""
    size = len(alphabet)
    sparse_counts = []
    frac_edges = []
    for mat in counts:
        d: dict = {}
        if isinstance(mat, Mapping):
            for k, c in mat.items():
                if c:
                    d[k] = int(c)
        else:
            for a, row in enumerate(mat):
                for ap, c in enumerate(row):
                    if c:
                        d[(a, ap)] = int(c)
        total = sum(d.values())
        if total != n:
            raise MarginalNotDenominatorN(f"counts sum to {total}, expected {n}")
        sparse_counts.append(d)
        frac_edges.append({k: Fraction(c, n) for k, c in d.items()})
    w = validate_weight(rank, alphabet, frac_edges)
    return DenominatorNWeight(w, n, tuple(sparse_counts))


def as_denominator_n(w: Weight, n: int) -> DenominatorNWeight:
    """View a weight as denominator n; raises MarginalNotDenominatorN if it is not."""
    counts = []
    for d in w.edges:
        cd = {}
        for k, v in d.items():
            c = v * n
            if c.denominator != 1:
                raise MarginalNotDenominatorN(f"entry {v} is not a multiple of 1/{n}")
            cd[k] = int(c)
        counts.append(cd)
    return DenominatorNWeight(w, n, tuple(counts))


def weight_distance(w1: Weight, w2: Weight) -> Fraction:
    """Sum over generators of the total variation distance between edge measures.

    This is the half-l1 convention; it is the only distance exposed anywhere.
    """
    if w1.rank != w2.rank:
        raise ShapeMismatch(f"ranks differ: {w1.rank} vs {w2.rank}")
    if w1.alphabet.symbols != w2.alphabet.symbols:
        raise ShapeMismatch("alphabets differ")
    total = ZERO
    for d1, d2 in zip(w1.edges, w2.edges):
        keys = d1.keys() | d2.keys()
        for k in keys:
            total += abs(d1.get(k, ZERO) - d2.get(k, ZERO))
    return total / 2


def F_of_weight(w: Weight) -> float:
    """(1-2r) H(vertex) + sum_i H(edge_i), natural-log entropy."""
    h_vertex = entropy_nats(w.vertex)
    h_edges = sum(entropy_nats(d.values()) for d in w.edges)
    return (1 - 2 * w.rank) * h_vertex + h_edges


def pushforward_weight(w: Weight, target: Alphabet, index_map: Sequence[int]) -> Weight:
    """Image weight under a total map between alphabets, given per-index targets."""
    if len(index_map) != len(w.alphabet):
        raise ShapeMismatch("index map must cover the whole source alphabet")
    size = len(target)
    edges = []
    for d in w.edges:
        out: dict = {}
        for (a, ap), v in d.items():
            k = (index_map[a], index_map[ap])
            if not (0 <= k[0] < size and 0 <= k[1] < size):
                raise ShapeMismatch("index map leaves the target alphabet")
            out[k] = out.get(k, ZERO) + v
        edges.append(out)
    return validate_weight(w.rank, target, edges)


def pushforward_by_symbol_map(w: Weight, target: Alphabet, symbol_map: Mapping) -> Weight:
    index_map = [target.index(symbol_map[s]) for s in w.alphabet.symbols]
    return pushforward_weight(w, target, index_map)


def pushforward_counts(w: DenominatorNWeight, target: Alphabet,
                       index_map: Sequence[int]) -> DenominatorNWeight:
    counts = []
    for d in w.counts:
        out: dict = {}
        for (a, ap), c in d.items():
            k = (index_map[a], index_map[ap])
            out[k] = out.get(k, 0) + c
        counts.append(out)
    return weight_from_counts(w.rank, target, w.n, counts)


# -- structural projections -------------------------------------------------

def _require_product(alph: Alphabet) -> None:
    if alph.kind != "product":
        raise ShapeMismatch("weight is not over a product alphabet")


def project_a(w: Weight) -> Weight:
    _require_product(w.alphabet)
    alph = w.alphabet
    index_map = [alph.split_index(c)[0] for c in range(len(alph))]
    return pushforward_weight(w, alph.factors[0], index_map)


def project_b(w: Weight) -> Weight:
    _require_product(w.alphabet)
    alph = w.alphabet
    index_map = [alph.split_index(c)[1] for c in range(len(alph))]
    return pushforward_weight(w, alph.factors[1], index_map)


def project_b_counts(w: DenominatorNWeight) -> DenominatorNWeight:
    _require_product(w.alphabet)
    alph = w.alphabet
    index_map = [alph.split_index(c)[1] for c in range(len(alph))]
    return pushforward_counts(w, alph.factors[1], index_map)


def _ball_truncation_map(alph: Alphabet, m: int) -> tuple:
    """Ball words are length-sorted, so radius-m truncation keeps a prefix."""
    if alph.kind != "ball":
        raise ShapeMismatch("weight is not over a ball alphabet")
    bi = alph.ball
    if not 0 <= m <= bi.radius:
        raise ValueError(f"truncation radius {m} outside [0, {bi.radius}]")
    keep = ball_size(bi.rank, m)
    target = ball_alphabet(alph.base, bi.rank, m)
    index_map = []
    for c in range(len(alph)):
        digits = alph.ball_tuple(c)[:keep]
        index_map.append(target.ball_code(digits) if m > 0 else digits[0])
    return target, index_map


def project_radius(w: Weight, m: int) -> Weight:
    """pi_m: restrict a ball-alphabet weight to the radius-m sub-ball (pi_e for m=0)."""
    target, index_map = _ball_truncation_map(w.alphabet, m)
    return pushforward_weight(w, target, index_map)


def project_root(w: Weight) -> Weight:
    return project_radius(w, 0)


def project_radii(w: Weight, m_a: int, m_b: int) -> Weight:
    """pi_{m,m'} on a product of two ball alphabets."""
    _require_product(w.alphabet)
    fa, fb = w.alphabet.factors
    ta, map_a = _ball_truncation_map(fa, m_a) if fa.kind == "ball" else (fa, list(range(len(fa))))
    tb, map_b = _ball_truncation_map(fb, m_b) if fb.kind == "ball" else (fb, list(range(len(fb))))
    target = product_alphabet(ta, tb)
    index_map = []
    for c in range(len(w.alphabet)):
        ia, ib = w.alphabet.split_index(c)
        index_map.append(target.pair_index(map_a[ia], map_b[ib]))
    return pushforward_weight(w, target, index_map)


# -- constructions on pairs of weights ---------------------------------------

def product_weight(wa: Weight, wb: Weight) -> Weight:
    """Independent coupling: entries multiply; the B-process stays Markov."""
    if wa.rank != wb.rank:
        raise ShapeMismatch("ranks differ")
    alph = product_alphabet(wa.alphabet, wb.alphabet)
    edges = []
    for da, db in zip(wa.edges, wb.edges):
        d = {}
        for (a, ap), va in da.items():
            for (b, bp), vb in db.items():
                d[(alph.pair_index(a, b), alph.pair_index(ap, bp))] = va * vb
        edges.append(d)
    return validate_weight(wa.rank, alph, edges)


def diagonal_weight(w: Weight) -> Weight:
    """Self-coupling concentrated on the diagonal of A x A."""
    alph = product_alphabet(w.alphabet, w.alphabet)
    edges = []
    for d in w.edges:
        out = {(alph.pair_index(a, a), alph.pair_index(ap, ap)): v for (a, ap), v in d.items()}
        edges.append(out)
    return validate_weight(w.rank, alph, edges)
