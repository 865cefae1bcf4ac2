"""Shift-invariant Markov measures on labelings of the free group.

A weight determines a unique shift-invariant measure whose marginal on any
finite subtree factorizes as the vertex mass at the root times one conditional
per tree edge.  Marginals on subtrees are exact rationals; entropies of
observables (including coarsened, hidden-component ones) are computed by exact
enumeration of the observed patterns, summing hidden components with rational
arithmetic, and only converted to floats inside the final entropy sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BudgetExceeded, ShapeMismatch
from .weights import (Alphabet, Weight, ZERO, ball_alphabet, entropy_nats,
                      F_of_weight, project_b, validate_weight)
from .words import SubTree, ball_index

DEFAULT_ATOM_BUDGET = 1 << 20

FULL, A_ONLY, B_ONLY, HIDDEN = "full", "a", "b", "hidden"


@dataclass(frozen=True)
class MarkovMeasure:
    """Markov measure with one-step statistics given by ``weight``.

    States of zero vertex mass automatically carry zero edge mass (forced by
    the weight axiom), so conditionals are only ever evaluated at positive
    states.
    """

    weight: Weight

    @property
    def rank(self) -> int:
        return self.weight.rank

    @property
    def alphabet(self) -> Alphabet:
        return self.weight.alphabet

    @property
    def is_joint(self) -> bool:
        return self.alphabet.kind == "product"

    def conditional(self, i: int, parent: int, child: int, dirn: int) -> Fraction:
        """P(child | parent) across generator i, oriented by the tree edge direction."""
        v = self.weight.vertex[parent]
        if not v:
            return ZERO
        if dirn > 0:
            return self.weight.edge(i - 1, parent, child) / v
        return self.weight.edge(i - 1, child, parent) / v


@dataclass(frozen=True)
class Observable:
    """Coordinate observations at prescribed radii.

    For a joint measure on A x B, ``a_radius``/``b_radius`` give the ball
    radius on which each component is read (None = not read at all).  For a
    plain measure only ``a_radius`` is meaningful.
    """

    a_radius: Optional[int] = 0
    b_radius: Optional[int] = None

    @staticmethod
    def identity() -> "Observable":
        return Observable(0, 0)

    @staticmethod
    def coord_a() -> "Observable":
        return Observable(0, None)

    @staticmethod
    def coord_b() -> "Observable":
        return Observable(None, 0)

    @staticmethod
    def ball(k: int) -> "Observable":
        return Observable(k, None)

    @staticmethod
    def pair(k1: int, k2: int) -> "Observable":
        return Observable(k1, k2)

    @staticmethod
    def constant() -> "Observable":
        return Observable(None, None)

    @property
    def max_radius(self) -> int:
        return max((k for k in (self.a_radius, self.b_radius) if k is not None), default=0)


# ---------------------------------------------------------------------------
# Exact subtree marginals
# ---------------------------------------------------------------------------

def subtree_marginal(m: MarkovMeasure, words, atom_budget: int = DEFAULT_ATOM_BUDGET) -> dict:
    """Exact distribution of labelings of a connected subtree containing e.

    Returns {labeling tuple (symbol indices in sorted word order): mass},
    positive atoms only, in a deterministic order.
    """
    tree = words if isinstance(words, SubTree) else SubTree.from_words(m.rank, words)
    return _tree_atoms(m, tree, atom_budget)


def _tree_atoms(m: MarkovMeasure, tree: SubTree, atom_budget: int) -> dict:
    size = len(m.alphabet)
    if size ** len(tree) > atom_budget:
        raise BudgetExceeded(
            f"{size}^{len(tree)} atoms exceed the budget of {atom_budget}")
    atoms: dict = {}
    labels = [0] * len(tree)
    vertex = m.weight.vertex

    def rec(pos: int, mass: Fraction) -> None:
        if pos == len(tree):
            atoms[tuple(labels)] = mass
            return
        if pos == 0:
            for c in range(size):
                p = vertex[c]
                if p:
                    labels[0] = c
                    rec(1, p)
            return
        parent_label = labels[tree.parent[pos]]
        for c in range(size):
            q = m.conditional(tree.gen[pos], parent_label, c, tree.dirn[pos])
            if q:
                labels[pos] = c
                rec(pos + 1, mass * q)

    rec(0, ZERO)
    return atoms


def atom_mass(m: MarkovMeasure, tree: SubTree, labels) -> Fraction:
    """Mass of a single subtree labeling (zero-safe)."""
    mass = m.weight.vertex[labels[0]]
    if not mass:
        return ZERO
    for pos in range(1, len(tree)):
        q = m.conditional(tree.gen[pos], labels[tree.parent[pos]], labels[pos], tree.dirn[pos])
        if not q:
            return ZERO
        mass *= q
    return mass


# ---------------------------------------------------------------------------
# Ball weights
# ---------------------------------------------------------------------------

def ball_weight(m: MarkovMeasure, k: int,
                atom_budget: int = DEFAULT_ATOM_BUDGET) -> Weight:
    """The weight of the radius-k ball observable, materialized sparsely.

    Entry (A, A'; i) is the exact mass of the labelings of B(e,k) u B(e,k)s_i
    restricting to A on the ball and to A' after the s_i shift; incompatible
    pairs vanish.
    """
    if k == 0:
        return m.weight
    base = m.alphabet
    alph = ball_alphabet(base, m.rank, k)
    bi = ball_index(m.rank, k)
    edges = []
    for i in range(1, m.rank + 1):
        union = bi.union_with_shift(i)
        atoms = _tree_atoms(m, union.tree, atom_budget)
        d: dict = {}
        for labels, mass in atoms.items():
            ca = alph.ball_code([labels[p] for p in union.ball_positions])
            cb = alph.ball_code([labels[p] for p in union.shifted_positions])
            d[(ca, cb)] = mass
        edges.append(d)
    return validate_weight(m.rank, alph, edges)


def _tree_entropy_fully_observed(m: MarkovMeasure, tree: SubTree) -> float:
    """Entropy of a fully observed subtree marginal via the chain rule.

    Each edge across generator i contributes H(edge_i) - H(vertex) regardless
    of orientation, by the shared-marginal axiom.
    """
    h_vertex = entropy_nats(m.weight.vertex)
    h = h_vertex
    for i, c in enumerate(tree.generator_edge_counts()):
        if c:
            h += c * (entropy_nats(m.weight.edges[i].values()) - h_vertex)
    return h


def F_truncated(m: MarkovMeasure, k: int) -> float:
    """F of the radius-k ball observable, via exact tree-entropy decomposition.

    Agrees with F_of_weight(ball_weight(m, k)) but needs no materialization,
    so it stays cheap at radii where the ball weight itself would not fit in
    any atom budget.  For a Markov measure it is independent of k.
    """
    bi = ball_index(m.rank, k)
    h_ball = _tree_entropy_fully_observed(m, bi.tree)
    total = (1 - 2 * m.rank) * h_ball
    for i in range(1, m.rank + 1):
        total += _tree_entropy_fully_observed(m, bi.union_with_shift(i).tree)
    return total


def f_markov(m: MarkovMeasure) -> float:
    """The growth functional of a Markov measure equals F of its weight."""
    return F_of_weight(m.weight)


# ---------------------------------------------------------------------------
# Entropies of coarsened observables (hidden components summed exactly)
# ---------------------------------------------------------------------------

def _component_maps(m: MarkovMeasure):
    alph = m.alphabet
    if alph.kind == "product":
        na, nb = len(alph.factors[0]), len(alph.factors[1])
        comp_a = tuple(alph.split_index(c)[0] for c in range(len(alph)))
        comp_b = tuple(alph.split_index(c)[1] for c in range(len(alph)))
        return comp_a, comp_b, na, nb
    size = len(alph)
    ident = tuple(range(size))
    return ident, None, size, None


def _token_count(code: str, size: int, na: int, nb) -> int:
    if code == FULL:
        return size
    if code == A_ONLY:
        return na
    if code == B_ONLY:
        return nb
    return 1


def _pattern_distribution(m: MarkovMeasure, tree: SubTree, codes,
                          atom_budget: int) -> dict:
    """Joint law of per-vertex observation tokens; hidden parts summed exactly.

    ``codes[pos]`` says what is read at each tree vertex.  Patterns are flat
    tuples in DFS order rooted at the identity.
    """
    comp_a, comp_b, na, nb = _component_maps(m)
    size = len(m.alphabet)
    est = 1
    for code in codes:
        est *= _token_count(code, size, na, nb)
        if est > atom_budget:
            raise BudgetExceeded(
                f"observed pattern count exceeds the budget of {atom_budget}")
    children = tree.children()
    vertex = m.weight.vertex

    def token(code: str, c: int):
        if code == FULL:
            return c
        if code == A_ONLY:
            return comp_a[c]
        if code == B_ONLY:
            return comp_b[c]
        return 0

    def msg(v: int) -> dict:
        # pattern fragment -> likelihood vector over the hidden symbol at v
        cur: dict = {}
        code = codes[v]
        for c in range(size):
            t = token(code, c)
            vec = cur.get((t,))
            if vec is None:
                vec = [ZERO] * size
                cur[(t,)] = vec
            vec[c] = ZERO + 1
        for w in children[v]:
            child = msg(w)
            gen, dirn = tree.gen[w], tree.dirn[w]
            lifted: dict = {}
            for pat, vec in child.items():
                out = [ZERO] * size
                nonzero = False
                for c in range(size):
                    if not vertex[c]:
                        continue
                    acc = ZERO
                    for cp in range(size):
                        if vec[cp]:
                            q = m.conditional(gen, c, cp, dirn)
                            if q:
                                acc += q * vec[cp]
                    if acc:
                        out[c] = acc
                        nonzero = True
                if nonzero:
                    lifted[pat] = out
            nxt: dict = {}
            for pat0, vec0 in cur.items():
                for pat1, vec1 in lifted.items():
                    prod = [ZERO] * size
                    nonzero = False
                    for c in range(size):
                        if vec0[c] and vec1[c]:
                            prod[c] = vec0[c] * vec1[c]
                            nonzero = True
                    if nonzero:
                        nxt[pat0 + pat1] = prod
            cur = nxt
        return cur

    dist: dict = {}
    for pat, vec in msg(0).items():
        mass = ZERO
        for c in range(size):
            if vertex[c] and vec[c]:
                mass += vertex[c] * vec[c]
        if mass:
            dist[pat] = mass
    return dist


def _codes_for_tree(tree: SubTree, in_a, in_b, joint: bool):
    codes = []
    for pos in range(len(tree)):
        a_obs = in_a[pos]
        b_obs = joint and in_b[pos]
        if joint:
            if a_obs and b_obs:
                codes.append(FULL)
            elif a_obs:
                codes.append(A_ONLY)
            elif b_obs:
                codes.append(B_ONLY)
            else:
                codes.append(HIDDEN)
        else:
            codes.append(FULL if a_obs else HIDDEN)
    return codes


def _vertex_tree_entropy(m: MarkovMeasure, k1, k2, atom_budget: int) -> float:
    radii = [k for k in (k1, k2) if k is not None]
    if not radii:
        return 0.0
    kmax = max(radii)
    tree = ball_index(m.rank, kmax).tree
    in_a = [k1 is not None and len(w) <= k1 for w in tree.words]
    in_b = [k2 is not None and len(w) <= k2 for w in tree.words]
    codes = _codes_for_tree(tree, in_a, in_b, m.is_joint)
    if all(c == FULL for c in codes):
        return _tree_entropy_fully_observed(m, tree)
    dist = _pattern_distribution(m, tree, codes, atom_budget)
    return entropy_nats(dist.values())


def _edge_tree_entropy(m: MarkovMeasure, i: int, k1, k2, atom_budget: int) -> float:
    radii = [k for k in (k1, k2) if k is not None]
    if not radii:
        return 0.0
    kmax = max(radii)
    union = ball_index(m.rank, kmax).union_with_shift(i)
    tree = union.tree

    def within(word, k) -> bool:
        if k is None:
            return False
        if len(word) <= k:
            return True
        # in B(e,k)s_i iff removing a trailing s_i lands in B(e,k)
        if word and word[-1] == i and len(word) - 1 <= k:
            return True
        return False

    in_a = [within(w, k1) for w in tree.words]
    in_b = [within(w, k2) for w in tree.words]
    codes = _codes_for_tree(tree, in_a, in_b, m.is_joint)
    if all(c == FULL for c in codes):
        return _tree_entropy_fully_observed(m, tree)
    dist = _pattern_distribution(m, tree, codes, atom_budget)
    return entropy_nats(dist.values())


def entropy_of_observable(m: MarkovMeasure, obs: Observable,
                          atom_budget: int = DEFAULT_ATOM_BUDGET) -> float:
    """Shannon entropy of the pushforward of m under the observable."""
    if not m.is_joint and obs.b_radius is not None and obs.a_radius is None:
        raise ShapeMismatch("component observable requires a product-alphabet measure")
    return _vertex_tree_entropy(m, obs.a_radius, obs.b_radius, atom_budget)


def F_observable(m: MarkovMeasure, k1, k2,
                 atom_budget: int = DEFAULT_ATOM_BUDGET) -> float:
    """F of the (a-ball k1, b-ball k2) observable; None drops a component."""
    h = _vertex_tree_entropy(m, k1, k2, atom_budget)
    total = (1 - 2 * m.rank) * h
    for i in range(1, m.rank + 1):
        total += _edge_tree_entropy(m, i, k1, k2, atom_budget)
    return total


def F_rel(m: MarkovMeasure, k1: int, k2: int,
          atom_budget: int = DEFAULT_ATOM_BUDGET) -> float:
    """Conditional truncation F(a-ball k1 | b-ball k2) = F(joint) - F(b side)."""
    if not m.is_joint:
        raise ShapeMismatch("relative F requires a product-alphabet measure")
    return (F_observable(m, k1, k2, atom_budget)
            - F_observable(m, None, k2, atom_budget))


def f_rel_bracket(m: MarkovMeasure, K: int,
                  atom_budget: int = DEFAULT_ATOM_BUDGET) -> tuple:
    """(F_rel(K, K), F_rel(1, K)): monotone envelope of the relative functional
    at truncation depth K.  F_rel decreases in the first radius and increases
    in the second, so the pair brackets what is reachable at depth K; when the
    b-marginal process is itself Markov the second radius is irrelevant and
    the lower end is the depth-K truncated value.
    """
    if K < 1:
        raise ValueError("bracket depth K must be >= 1")
    lower = F_rel(m, K, K, atom_budget)
    upper = F_rel(m, 1, K, atom_budget)
    return lower, upper


def conditional_entropy_level0(m: MarkovMeasure,
                               atom_budget: int = DEFAULT_ATOM_BUDGET) -> float:
    """H(a | b) at the identity coordinate of a joint measure."""
    if not m.is_joint:
        raise ShapeMismatch("conditional entropy requires a product-alphabet measure")
    h_joint = entropy_of_observable(m, Observable.identity(), atom_budget)
    h_b = entropy_of_observable(m, Observable.coord_b(), atom_budget)
    return h_joint - h_b


def markov_from_weight(w: Weight) -> MarkovMeasure:
    return MarkovMeasure(w)


def b_marginal_measure(m: MarkovMeasure) -> MarkovMeasure:
    """Markov measure of the one-step b-statistics (the b-process itself need
    not be Markov; this is only its weight-level marginal)."""
    return MarkovMeasure(project_b(m.weight))
