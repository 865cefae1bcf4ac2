"""Exact counting of labelings and homomorphisms, and growth-rate experiments.

Counts are exact big integers (with literal-enumeration oracles alongside);
distances between empirical and measure-side statistics are exact rationals,
evaluated support-sparsely so radii whose ball weights would never fit in
memory stay cheap.  Monte-Carlo estimates report means over trials with
normal confidence intervals, and growth rates are log-of-mean, matching the
expectation-then-log order of the quantities they approximate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, EmptyFiber, NonIntegerResult, ShapeMismatch
from .markov import (DEFAULT_ATOM_BUDGET, MarkovMeasure, atom_mass, ball_weight,
                     f_markov, f_rel_bracket)
from .realize import (Homomorphism, Labeling, ball_refine, realize_weight,
                      round_denominator_n)
from .weights import (DenominatorNWeight, Weight, project_b, to_fraction,
                      weight_distance, weight_from_counts)
from .words import ball_index

DEFAULT_ENUM_BUDGET = 10 ** 7


# ---------------------------------------------------------------------------
# Empirical weights and the d* pseudometrics
# ---------------------------------------------------------------------------

def empirical_weight(sigma: Homomorphism, x: Labeling, k: int = 0,
                     atom_budget: int = DEFAULT_ATOM_BUDGET) -> DenominatorNWeight:
    """Pair statistics of the radius-k ball refinement of (sigma, x)."""
    n = x.n
    if k == 0:
        codes = x.values
        alph = x.alphabet
    else:
        if len(x.alphabet) ** len(ball_index(sigma.rank, k)) > atom_budget:
            raise BudgetExceeded("ball alphabet exceeds the atom budget")
        refined = ball_refine(sigma, x, k)
        lab = refined.as_labeling()
        codes, alph = lab.values, lab.alphabet
    counts = []
    for i in range(sigma.rank):
        d: dict = {}
        dest = codes[sigma.perms[i]]
        for a, ap in zip(codes.tolist(), dest.tolist()):
            key = (a, ap)
            d[key] = d.get(key, 0) + 1
        counts.append(d)
    return weight_from_counts(sigma.rank, alph, n, counts)


def _union_value_rows(sigma: Homomorphism, values: np.ndarray, union) -> np.ndarray:
    perms = sigma.word_perms(union.tree)
    rows = np.empty((len(values), len(union.tree)), dtype=np.int64)
    for pos, perm in enumerate(perms):
        rows[:, pos] = values[perm]
    return rows


def dstar_empirical(sigma: Homomorphism, x: Labeling, m: MarkovMeasure,
                    k: int = 0) -> Fraction:
    """d*_k between the empirical distribution of (sigma, x) and the measure.

    Exact rational.  Per generator, the empirical law of the shifted-union
    labelings has at most n atoms, so the total-variation sum only ever
    evaluates the measure at observed atoms plus its (unit) total mass; no
    ball weight is materialized and no atom budget is needed.
    """
    if x.alphabet.symbols != m.alphabet.symbols:
        raise ShapeMismatch("labeling alphabet does not match the measure")
    n = x.n
    bi = ball_index(sigma.rank, k)
    total = Fraction(0)
    for i in range(1, sigma.rank + 1):
        union = bi.union_with_shift(i)
        rows = _union_value_rows(sigma, x.values, union)
        counts: dict = {}
        for row in map(tuple, rows.tolist()):
            counts[row] = counts.get(row, 0) + 1
        observed_mass = Fraction(0)
        l1 = Fraction(0)
        for row, c in counts.items():
            mu = atom_mass(m, union.tree, row)
            observed_mass += mu
            l1 += abs(Fraction(c, n) - mu)
        l1 += 1 - observed_mass
        total += l1 / 2
    return total


def dstar_via_ball_pairs(sigma: Homomorphism, x: Labeling, m: MarkovMeasure,
                         k: int, atom_budget: int = DEFAULT_ATOM_BUDGET) -> Fraction:
    """The weight-distance formulation: d(W_{sigma,x^k}, ball weight of m).

    Goes through the empirical ball-pair counts and reconstructs, per pair,
    the shifted-union labeling it pins down, evaluating the measure there;
    compatible pairs not seen empirically contribute the remaining mass.
    """
    emp = empirical_weight(sigma, x, k, atom_budget)
    alph = emp.alphabet
    bi = ball_index(sigma.rank, k)
    total = Fraction(0)
    for i in range(1, sigma.rank + 1):
        union = bi.union_with_shift(i)
        usize = len(union.tree)
        observed_mass = Fraction(0)
        l1 = Fraction(0)
        for (ca, cb), c in emp.counts[i - 1].items():
            da = alph.ball_tuple(ca) if k > 0 else (ca,)
            db = alph.ball_tuple(cb) if k > 0 else (cb,)
            labels = [-1] * usize
            ok = True
            for pos, lab in zip(union.ball_positions, da):
                labels[pos] = lab
            for pos, lab in zip(union.shifted_positions, db):
                if labels[pos] >= 0 and labels[pos] != lab:
                    ok = False
                    break
                labels[pos] = lab
            mu = atom_mass(m, union.tree, labels) if ok else Fraction(0)
            observed_mass += mu
            l1 += abs(Fraction(c, emp.n) - mu)
        l1 += 1 - observed_mass
        total += l1 / 2
    return total


def dstar_via_materialized(sigma: Homomorphism, x: Labeling, m: MarkovMeasure,
                           k: int, atom_budget: int = DEFAULT_ATOM_BUDGET) -> Fraction:
    """Same quantity through fully materialized weights (small radii only)."""
    return weight_distance(empirical_weight(sigma, x, k, atom_budget).weight,
                           ball_weight(m, k, atom_budget))


# ---------------------------------------------------------------------------
# Good-model counting
# ---------------------------------------------------------------------------

def _pair_labeling(x_vals: np.ndarray, y: Labeling, joint_alphabet) -> Labeling:
    vals = x_vals * len(joint_alphabet.factors[1]) + y.values
    return Labeling(joint_alphabet, vals)


def enumerate_good_models(sigma: Homomorphism, m: MarkovMeasure, k: int, eps,
                          planted: Optional[Labeling] = None,
                          enum_budget: int = DEFAULT_ENUM_BUDGET) -> int:
    """|{x in A^n : d*_k < eps}|, exactly; with ``planted`` y, the pair (x, y)
    is tested against the joint measure instead."""
    eps = to_fraction(eps)
    if planted is not None:
        if not m.is_joint:
            raise ShapeMismatch("planted counting needs a joint measure")
        alph_a = m.alphabet.factors[0]
    else:
        alph_a = m.alphabet
    na = len(alph_a)
    n = sigma.n
    if na ** n > enum_budget:
        raise BudgetExceeded(f"{na}^{n} labelings exceed the budget of {enum_budget}")
    if k == 0:
        return _count_good_k0(sigma, m, eps, planted)
    count = 0
    for combo in itertools.product(range(na), repeat=n):
        x_vals = np.asarray(combo, dtype=np.int64)
        lab = (_pair_labeling(x_vals, planted, m.alphabet) if planted is not None
               else Labeling(alph_a, x_vals))
        if dstar_empirical(sigma, lab, m, k) < eps:
            count += 1
    return count


def _digit_matrix(na: int, n: int) -> np.ndarray:
    # all labelings of [n] as rows, symbol of position j in column j
    ids = np.arange(na ** n)
    out = np.empty((na ** n, n), dtype=np.int64)
    for j in range(n):
        out[:, j] = (ids // na ** (n - 1 - j)) % na
    return out


_DIGITS_CACHE: dict = {}


def _digits(na: int, n: int) -> np.ndarray:
    key = (na, n)
    if key not in _DIGITS_CACHE:
        _DIGITS_CACHE[key] = _digit_matrix(na, n)
    return _DIGITS_CACHE[key]


def _count_good_k0(sigma: Homomorphism, m: MarkovMeasure, eps: Fraction,
                   planted: Optional[Labeling]) -> int:
    """Vectorized exact count at radius 0.

    Distances are compared in integers: with q the common denominator of the
    target entries, 2nq d(x) is an integer, so d(x) < eps becomes an exact
    int64 comparison.
    """
    w = m.weight
    size = len(w.alphabet)
    n = sigma.n
    na = len(m.alphabet.factors[0]) if planted is not None else size
    digits = _digits(na, n)
    if planted is not None:
        nb = len(m.alphabet.factors[1])
        codes = digits * nb + planted.values[np.newaxis, :]
    else:
        codes = digits
    q = 1
    for d in w.edges:
        for v in d.values():
            q = q * v.denominator // math.gcd(q, v.denominator)
    targets = []
    for i in range(sigma.rank):
        t = np.zeros(size * size, dtype=np.int64)
        for (a, ap), v in w.edges[i].items():
            t[a * size + ap] = int(v * n * q)
        targets.append(t)
    num_x = codes.shape[0]
    dist = np.zeros(num_x, dtype=np.int64)
    for i in range(sigma.rank):
        dest = codes[:, sigma.perms[i]]
        cell = codes * size + dest
        flat = (np.arange(num_x)[:, np.newaxis] * (size * size) + cell).ravel()
        counts = np.bincount(flat, minlength=num_x * size * size).reshape(num_x, -1)
        dist += np.abs(counts * q - targets[i]).sum(axis=1)
    # d(x) = dist / (2 n q); d(x) < eps  <=>  dist * eps.den < 2 n q * eps.num
    lhs = dist.astype(object) * eps.denominator
    rhs = 2 * n * q * eps.numerator
    return int(np.sum(lhs < rhs))


# ---------------------------------------------------------------------------
# Exact pair counts
# ---------------------------------------------------------------------------

def z_n(w: DenominatorNWeight) -> int:
    """Number of (sigma, y) pairs realizing the weight, in closed form.

    n! prod_b (n W(b))!^(2r-1) / prod_{i,b,b'} (n W(b,b';i))!; the division is
    exact for valid weights and checked.
    """
    n, r = w.n, w.rank
    num = math.factorial(n)
    for c in w.vertex_counts:
        num *= math.factorial(c) ** (2 * r - 1)
    den = 1
    for d in w.counts:
        for c in d.values():
            den *= math.factorial(c)
    q, rem = divmod(num, den)
    if rem:
        raise NonIntegerResult("pair count came out fractional; weight axiom violated")
    return q


def z_n_bruteforce(w: DenominatorNWeight,
                   enum_budget: int = DEFAULT_ENUM_BUDGET) -> int:
    """Literal enumeration of {(sigma, y) : W_{sigma,y} = w}; oracle for z_n."""
    n, r = w.n, w.rank
    size = len(w.alphabet)
    total = math.factorial(n) ** r * size ** n
    if total > enum_budget:
        raise BudgetExceeded(f"{total} pairs exceed the budget of {enum_budget}")
    perms = [np.asarray(p, dtype=np.int64) for p in itertools.permutations(range(n))]
    count = 0
    target = [dict(d) for d in w.counts]
    for y in itertools.product(range(size), repeat=n):
        yv = np.asarray(y, dtype=np.int64)
        for combo in itertools.product(perms, repeat=r):
            ok = True
            for i in range(r):
                got: dict = {}
                dest = yv[combo[i]]
                for a, ap in zip(y, dest.tolist()):
                    got[(a, ap)] = got.get((a, ap), 0) + 1
                if got != target[i]:
                    ok = False
                    break
            if ok:
                count += 1
    return count


@dataclass(frozen=True)
class ZBoundsResult:
    passed: bool
    log_slack_lower: float
    log_slack_upper: float


def _log_factorial(k: int) -> float:
    return sum(math.log(j) for j in range(2, k + 1))


def zbounds_check(w: DenominatorNWeight) -> ZBoundsResult:
    """Check (3 sqrt n)^(-r|B|^2) <= Z_n / (e^{Fn} (n!)^r n^{(1-r)/2}) <= (3 sqrt n)^(r|B|^2).

    Evaluated in log space with exact summed log-factorials; returns the two
    slacks (both nonnegative iff the bounds hold).
    """
    from .weights import F_of_weight
    n, r = w.n, w.rank
    size = len(w.alphabet)
    log_z = _log_factorial(n)
    for c in w.vertex_counts:
        log_z += (2 * r - 1) * _log_factorial(c)
    for d in w.counts:
        for c in d.values():
            log_z -= _log_factorial(c)
    center = F_of_weight(w.weight) * n + r * _log_factorial(n) + (1 - r) / 2 * math.log(n)
    half_width = r * size * size * math.log(3 * math.sqrt(n))
    deviation = log_z - center
    return ZBoundsResult(abs(deviation) <= half_width,
                         deviation + half_width,
                         half_width - deviation)


def expected_planted_count_exact(w_ab: DenominatorNWeight,
                                 witness: Optional[tuple] = None) -> Fraction:
    """Exact expected number of x completing a planted y to the joint statistics.

    Equals Z_n(joint) / Z_n(b-marginal) as a big rational; ``witness`` may be
    a (sigma0, y0) pair certifying that the b-fiber is nonempty (the ratio is
    the conditional expectation only in that case).
    """
    if w_ab.alphabet.kind != "product":
        raise ShapeMismatch("expected count needs a product-alphabet weight")
    from .weights import project_b_counts
    w_b = project_b_counts(w_ab)
    if witness is not None:
        sigma0, y0 = witness
        k = (w_b.alphabet.ball.radius if w_b.alphabet.kind == "ball" else 0)
        if empirical_weight(sigma0, y0, k) != w_b:
            raise EmptyFiber("witness does not certify a nonempty fiber")
    return Fraction(z_n(w_ab), z_n(w_b))


# ---------------------------------------------------------------------------
# Growth-rate experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountReport:
    """One grid cell of a counting experiment."""

    n: int
    k: int
    epsilon: Fraction
    trials: int
    mean_count: float
    ci_low: float
    ci_high: float
    growth_rate: Optional[float]
    reference_value: Optional[float]
    reference_kind: str
    sampler: str
    seed: int
    exact: Optional[object] = None

    def csv_row(self) -> list:
        fmt = lambda v: "" if v is None else repr(float(v))
        return [self.n, self.k, str(self.epsilon), self.trials,
                fmt(self.mean_count), fmt(self.ci_low), fmt(self.ci_high),
                fmt(self.growth_rate), fmt(self.reference_value),
                self.reference_kind, self.sampler, self.seed]


CSV_COLUMNS = ["n", "k", "epsilon", "trials", "mean_count", "ci_low", "ci_high",
               "growth_rate", "reference_value", "reference_kind", "sampler", "seed"]


def _summarize(counts: Sequence[int]):
    arr = np.asarray(counts, dtype=float)
    mean = float(arr.mean())
    if len(arr) > 1:
        se = float(arr.std(ddof=1)) / math.sqrt(len(arr))
    else:
        se = 0.0
    return mean, max(mean - 1.96 * se, 0.0), mean + 1.96 * se


def _growth(mean: float, n: int) -> Optional[float]:
    return math.log(mean) / n if mean > 0 else None


def plant_good_pair(m_joint: MarkovMeasure, n: int, level: int = 0,
                    atom_budget: int = DEFAULT_ATOM_BUDGET):
    """Rounded b-side statistics and a realized (sigma, y) carrying them.

    At level 0 the rounded one-step weight is realized exactly.  At level
    m > 0 the radius-m ball weight of the b-marginal is rounded and realized
    over the ball alphabet; the root labeling's own level-m statistics are
    then within (1 + 2r|B(e,m)|) times the rounding distance of the target.
    """
    w_b = project_b(m_joint.weight)
    if level == 0:
        rounded = round_denominator_n(w_b, n)
        sigma0, y = realize_weight(rounded)
        return rounded, sigma0, y
    m_b = MarkovMeasure(w_b)
    w_ball = ball_weight(m_b, level, atom_budget)
    rounded = round_denominator_n(w_ball, n)
    sigma0, y_ball = realize_weight(rounded)
    alph = rounded.alphabet
    root_vals = np.asarray([alph.ball_tuple(c)[0] for c in y_ball.values.tolist()],
                           dtype=np.int64)
    y = Labeling(w_b.alphabet, root_vals)
    return rounded, sigma0, y


def _planting_level(sbm_level, n: int) -> int:
    if sbm_level == "loglog":
        return max(0, math.floor(math.log(math.log(n)))) if n > 2 else 0
    return int(sbm_level)


def growth_rate_experiment(m: MarkovMeasure, sampler: str, k: int, eps_list,
                           n_list, trials: int, seed: int,
                           enum_budget: int = DEFAULT_ENUM_BUDGET,
                           atom_budget: int = DEFAULT_ATOM_BUDGET,
                           bracket_depth: int = 1, sbm_level=0) -> list:
    """Monte-Carlo table of good-model counts across an (n, eps) grid.

    ``sampler`` is "uniform" (plain good models for the measure itself) or
    "sbm" (a joint measure with its b-side planted by rounding + realization,
    counting completions x of the planted y).  ``sbm_level`` pins the planted
    statistics at a ball radius (or "loglog" for the floor(log log n)
    schedule); levels above 0 sample the fiber by exact rejection from the
    level-0 block model.  Joint references are reported as the two ends of
    the relative bracket, one row per end.
    """
    from .sampler import SBMSpec, rng_for, sbm_sample, sbm_sample_k0, uniform_hom
    if sampler not in ("uniform", "sbm"):
        raise ValueError(f"unknown sampler {sampler!r}")
    if sampler == "sbm" and not m.is_joint:
        raise ShapeMismatch("sbm growth experiments need a joint measure")
    eps_values = [to_fraction(e) for e in eps_list]
    rows: list = []
    for n in n_list:
        planted = None
        spec = None
        sampler_tag = sampler
        if sampler == "sbm":
            level = _planting_level(sbm_level, n)
            w_b_rounded, sigma0, y = plant_good_pair(m, n, level, atom_budget)
            target = (w_b_rounded if level == 0
                      else empirical_weight(sigma0, y, level, atom_budget))
            spec = SBMSpec(y, level, target, sigma0)
            planted = y
            if level > 0:
                sampler_tag = f"sbm_m{level}"
        per_eps: dict = {e: [] for e in eps_values}
        rank = m.rank
        for t in range(trials):
            rng = rng_for(seed, n, t)
            if sampler == "uniform":
                sigma = uniform_hom(n, rank, rng)
            elif spec.k == 0:
                sigma = sbm_sample_k0(spec.y, spec.target, rng)
            else:
                sigma = sbm_sample(spec, rng, method="reject")
            for e in eps_values:
                per_eps[e].append(enumerate_good_models(sigma, m, k, e,
                                                        planted=planted,
                                                        enum_budget=enum_budget))
        for e in eps_values:
            mean, lo, hi = _summarize(per_eps[e])
            if sampler == "uniform":
                refs = [(f_markov(m), "f_markov")]
            else:
                low, high = f_rel_bracket(m, max(1, bracket_depth), atom_budget)
                refs = [(low, "f_bracket_low"), (high, "f_bracket_high")]
            for val, kind in refs:
                rows.append(CountReport(n=n, k=k, epsilon=e, trials=trials,
                                        mean_count=mean, ci_low=lo, ci_high=hi,
                                        growth_rate=_growth(mean, n),
                                        reference_value=val, reference_kind=kind,
                                        sampler=sampler_tag, seed=seed))
    return rows


# ---------------------------------------------------------------------------
# Joining search (lower bounds on the relative growth supremum)
# ---------------------------------------------------------------------------

@dataclass
class JoiningSearchResult:
    value: float
    coupling: Weight
    product_value: float
    diagonal_value: Optional[float]
    evaluations: int
    note: str = "lower bound; hill-climb over one-step couplings"


def _coupling_objective(w_c: Weight, depth: int, atom_budget: int) -> float:
    """F(coupling) minus the depth-K upper bound on the b-side growth term."""
    from .weights import F_of_weight
    m = MarkovMeasure(w_c)
    return F_of_weight(w_c) - _hidden_b_F_float(m, depth)


def _hidden_b_F_float(m: MarkovMeasure, depth: int) -> float:
    """Float twin of F_observable(m, None, depth) for fast search loops."""
    from .markov import F_observable
    if depth == 0:
        from .weights import F_of_weight
        return F_of_weight(project_b(m.weight))
    return F_observable(m, None, depth)


def _feasible_moves(w_c: Weight):
    """Elementary null moves of the coupling polytope at fixed marginals.

    Fixing the source a and target b' (or symmetrically source b, target a')
    and rocking a 2x2 pattern across (b1,b2) x (a1',a2') leaves both one-step
    marginals and the vertex measure unchanged.
    """
    alph = w_c.alphabet
    na, nb = len(alph.factors[0]), len(alph.factors[1])
    pair = alph.pair_index
    moves = []
    for i in range(w_c.rank):
        for a in range(na):
            for b1 in range(nb):
                for b2 in range(b1 + 1, nb):
                    for a1p in range(na):
                        for a2p in range(a1p + 1, na):
                            for bp in range(nb):
                                moves.append((i,
                                              (pair(a, b1), pair(a1p, bp)),
                                              (pair(a, b1), pair(a2p, bp)),
                                              (pair(a, b2), pair(a1p, bp)),
                                              (pair(a, b2), pair(a2p, bp))))
        for b in range(nb):
            for a1 in range(na):
                for a2 in range(a1 + 1, na):
                    for b1p in range(nb):
                        for b2p in range(b1p + 1, nb):
                            for ap in range(na):
                                moves.append((i,
                                              (pair(a1, b), pair(ap, b1p)),
                                              (pair(a1, b), pair(ap, b2p)),
                                              (pair(a2, b), pair(ap, b1p)),
                                              (pair(a2, b), pair(ap, b2p))))
    return moves


def _apply_move(w_c: Weight, move, delta: Fraction) -> Optional[Weight]:
    i, kpp, kpm, kmp, kmm = move
    d = dict(w_c.edges[i])
    inc = [(kpp, delta), (kmm, delta), (kpm, -delta), (kmp, -delta)]
    for key, step in inc:
        v = d.get(key, Fraction(0)) + step
        if v < 0:
            return None
        if v:
            d[key] = v
        else:
            d.pop(key, None)
    edges = tuple(dict(e) if j != i else d for j, e in enumerate(w_c.edges))
    return Weight(w_c.rank, w_c.alphabet, edges, w_c.vertex)


def joining_search(m_a: MarkovMeasure, m_b: MarkovMeasure, depth: int = 1,
                   restarts: int = 3, iters: int = 200, seed: int = 0,
                   atom_budget: int = DEFAULT_ATOM_BUDGET) -> JoiningSearchResult:
    """Hill-climb over one-step couplings of the two measures.

    Reports a lower bound for the supremum of the relative growth functional
    over joinings: every evaluated coupling gives F(coupling) minus a depth-K
    upper bound for its b-side term.  The product coupling is always
    evaluated (value f of m_a); the diagonal coupling is evaluated whenever
    the measures coincide.
    """
    from .sampler import rng_for
    from .weights import diagonal_weight, product_weight
    if m_a.rank != m_b.rank:
        raise ShapeMismatch("ranks differ")
    w_prod = product_weight(m_a.weight, m_b.weight)
    evaluations = 0

    def objective(w_c: Weight) -> float:
        nonlocal evaluations
        evaluations += 1
        return _coupling_objective(w_c, depth, atom_budget)

    product_value = objective(w_prod)
    best_w, best_val = w_prod, product_value
    diagonal_value = None
    if m_a.weight == m_b.weight:
        w_diag = diagonal_weight(m_a.weight)
        diagonal_value = objective(w_diag)
        if diagonal_value > best_val:
            best_w, best_val = w_diag, diagonal_value
    moves = _feasible_moves(w_prod)
    steps = [Fraction(1, 2 ** t) for t in range(2, 9)]
    starts = [w_prod] * max(1, restarts)
    if diagonal_value is not None:
        starts[0] = diagonal_weight(m_a.weight)
    for restart, start in enumerate(starts):
        rng = rng_for(seed, restart)
        cur_w, cur_val = start, objective(start)
        for _ in range(iters):
            move = moves[int(rng.integers(len(moves)))] if moves else None
            if move is None:
                break
            delta = steps[int(rng.integers(len(steps)))]
            if int(rng.integers(2)):
                delta = -delta
            cand = _apply_move(cur_w, move, delta)
            if cand is None:
                continue
            val = objective(cand)
            if val > cur_val:
                cur_w, cur_val = cand, val
        if cur_val > best_val:
            best_w, best_val = cur_w, cur_val
    return JoiningSearchResult(best_val, best_w, product_value, diagonal_value,
                               evaluations)
