"""Reduced words in the rank-r free group and finite subtrees of its Cayley tree.

A word is a tuple of nonzero ints: +i stands for the i-th generator s_i,
-i for its inverse (i is 1-based).  Multiplication appends on the right and
cancels.

Shifts of itineraries act by right translation, which preserves the edges
{g, s_i g} of the left Cayley tree; Markov factorizations therefore run along
those edges, and the parent of a nonempty reduced word is the word with its
FIRST letter removed.  Balls around the identity are suffix-closed, hence
subtrees.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

Word = tuple  # tuple[int, ...], reduced

IDENTITY: Word = ()


def reduce_word(letters: Iterable[int]) -> Word:
    out: list[int] = []
    for l in letters:
        if l == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def mul(w1: Word, w2: Word) -> Word:
    return reduce_word(list(w1) + list(w2))


def inverse(w: Word) -> Word:
    return tuple(-l for l in reversed(w))


_LETTER_RE = re.compile(r"([sS])(\d+)")


def parse_word(text: str, rank: Optional[int] = None) -> Word:
    """Parse strings like "s1S2s1": lowercase s = generator, capital S = inverse."""
    text = text.strip()
    if text in ("", "e"):
        return IDENTITY
    pos = 0
    letters = []
    for m in _LETTER_RE.finditer(text):
        if m.start() != pos:
            raise ValueError(f"cannot parse word {text!r} at offset {pos}")
        i = int(m.group(2))
        if i < 1 or (rank is not None and i > rank):
            raise ValueError(f"generator index {i} out of range in {text!r}")
        letters.append(i if m.group(1) == "s" else -i)
        pos = m.end()
    if pos != len(text):
        raise ValueError(f"cannot parse word {text!r} at offset {pos}")
    return reduce_word(letters)


def word_str(w: Word) -> str:
    if not w:
        return "e"
    return "".join(("s" if l > 0 else "S") + str(abs(l)) for l in w)


def _letter_key(l: int) -> tuple:
    return (abs(l), 0 if l > 0 else 1)


def _word_key(w: Word) -> tuple:
    return (len(w), tuple(_letter_key(l) for l in w))


def ball_size(rank: int, radius: int) -> int:
    """|B(e,k)| = 1 + sum_{j<=k} 2r(2r-1)^(j-1)."""
    n = 1
    for j in range(1, radius + 1):
        n += 2 * rank * (2 * rank - 1) ** (j - 1)
    return n


@dataclass(frozen=True)
class SubTree:
    """A finite suffix-closed set of reduced words, parents before children.

    The tree edge joins ``words[i]`` to its parent ``words[i]`` minus its
    first letter t: ``gen[i]`` = |t| and ``dirn[i]`` = sign(t), so a + edge
    means child = s_gen . parent.  Entry 0 is the identity.
    """

    rank: int
    words: tuple
    parent: tuple = field(compare=False)
    gen: tuple = field(compare=False)
    dirn: tuple = field(compare=False)
    index: dict = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.words)

    @staticmethod
    def from_words(rank: int, words: Iterable[Word]) -> "SubTree":
        ordered = sorted(set(words), key=_word_key)
        if not ordered or ordered[0] != IDENTITY:
            raise ValueError("subtree must contain the identity")
        index = {w: i for i, w in enumerate(ordered)}
        parent, gen, dirn = [-1], [0], [0]
        for w in ordered[1:]:
            p = w[1:]
            if p not in index:
                raise ValueError(f"word set is not suffix-closed: missing parent of {word_str(w)}")
            parent.append(index[p])
            gen.append(abs(w[0]))
            dirn.append(1 if w[0] > 0 else -1)
        return SubTree(rank, tuple(ordered), tuple(parent), tuple(gen), tuple(dirn), index)

    def children(self) -> list:
        out: list[list[int]] = [[] for _ in self.words]
        for i in range(1, len(self.words)):
            out[self.parent[i]].append(i)
        return out

    def generator_edge_counts(self) -> list:
        counts = [0] * self.rank
        for i in range(1, len(self.words)):
            counts[self.gen[i] - 1] += 1
        return counts


@dataclass(frozen=True)
class BallIndex:
    """Words of B(e,k) in (length, letter) order, with the Cayley-tree structure."""

    rank: int
    radius: int
    tree: SubTree = field(compare=False)

    @property
    def words(self) -> tuple:
        return self.tree.words

    def __len__(self) -> int:
        return len(self.tree.words)

    @staticmethod
    def build(rank: int, radius: int) -> "BallIndex":
        if rank < 1 or radius < 0:
            raise ValueError("rank must be >= 1 and radius >= 0")
        words = [IDENTITY]
        frontier = [IDENTITY]
        for _ in range(radius):
            nxt = []
            for w in frontier:
                for i in range(1, rank + 1):
                    for l in (i, -i):
                        if not w or w[-1] != -l:
                            nxt.append(w + (l,))
            words.extend(nxt)
            frontier = nxt
        tree = SubTree.from_words(rank, words)
        assert len(tree) == ball_size(rank, radius)
        return BallIndex(rank, radius, tree)

    def union_with_shift(self, i: int) -> "ShiftedUnion":
        """Subtree on B(e,k) u B(e,k)s_i, with the position maps used by edge measures."""
        shift = (i,)
        all_words = set(self.words) | {mul(w, shift) for w in self.words}
        tree = SubTree.from_words(self.rank, all_words)
        ball_pos = tuple(tree.index[w] for w in self.words)
        shifted_pos = tuple(tree.index[mul(w, shift)] for w in self.words)
        return ShiftedUnion(generator=i, tree=tree, ball_positions=ball_pos,
                            shifted_positions=shifted_pos)


@dataclass(frozen=True)
class ShiftedUnion:
    """B(e,k) u B(e,k)s_i as a subtree.

    ``ball_positions[p]`` is where ball word p lives in the union; a labeling A
    of the union splits into the pair (A restricted to the ball, w -> A(w s_i)).
    """

    generator: int
    tree: SubTree
    ball_positions: tuple
    shifted_positions: tuple


_BALL_CACHE: dict = {}


def ball_index(rank: int, radius: int) -> BallIndex:
    key = (rank, radius)
    if key not in _BALL_CACHE:
        _BALL_CACHE[key] = BallIndex.build(rank, radius)
    return _BALL_CACHE[key]
