"""JSON schemas for weights, measures, homomorphisms, labelings and SBM specs.

Rationals are "p/q" strings (always with an explicit denominator on output),
permutation images are 1-based in JSON and 0-based internally, and product
alphabets name their symbols "a|b" in a-major order.  Round-tripping
parse -> serialize -> parse is bit-exact.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .realize import Homomorphism, Labeling
from .sampler import SBMSpec
from .weights import (Alphabet, BALL_SEP, DenominatorNWeight, PRODUCT_SEP,
                      as_denominator_n, atomic_alphabet, ball_alphabet,
                      product_alphabet, validate_weight)


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text) -> Fraction:
    if isinstance(text, str):
        return Fraction(text)
    if isinstance(text, int):
        return Fraction(text)
    raise ValidationError(f"expected a rational string, got {text!r}")


def _infer_alphabet(symbols, rank: int) -> Alphabet:
    """Recover product / ball structure from canonical symbol names."""
    symbols = tuple(symbols)
    if all(s.count(PRODUCT_SEP) == 1 for s in symbols) and len(symbols) > 1:
        lefts, rights = [], []
        for s in symbols:
            l, r = s.split(PRODUCT_SEP)
            if l not in lefts:
                lefts.append(l)
            if r not in rights:
                rights.append(r)
        cand = product_alphabet(_infer_alphabet(tuple(lefts), rank),
                                _infer_alphabet(tuple(rights), rank))
        if cand.symbols == symbols:
            return cand
    if all(BALL_SEP in s for s in symbols):
        from .words import ball_size
        base_names = []
        for s in symbols:
            head = s.split(BALL_SEP)[0]
            if head not in base_names:
                base_names.append(head)
        base = atomic_alphabet(base_names)
        width = symbols[0].count(BALL_SEP) + 1
        for radius in range(1, 8):
            size = ball_size(rank, radius)
            if size > width:
                break
            if size == width and len(base) ** width == len(symbols):
                cand = ball_alphabet(base, rank, radius)
                if cand.symbols == symbols:
                    return cand
    return Alphabet(symbols)


def weight_to_json(w) -> dict:
    if isinstance(w, DenominatorNWeight):
        out = weight_to_json(w.weight)
        out["n"] = w.n
        return out
    mats = []
    for i in range(w.rank):
        mat = w.edge_matrix(i)
        mats.append([[fraction_str(v) for v in row] for row in mat])
    return {"rank": w.rank, "alphabet": list(w.alphabet.symbols), "edges": mats}


def weight_from_json(data: dict):
    try:
        rank = int(data["rank"])
        symbols = [str(s) for s in data["alphabet"]]
        edges = [[[parse_fraction(v) for v in row] for row in mat]
                 for mat in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed weight JSON: {exc}") from exc
    alphabet = _infer_alphabet(symbols, rank)
    w = validate_weight(rank, alphabet, edges)
    if "n" in data:
        return as_denominator_n(w, int(data["n"]))
    return w


def measure_from_json(data: dict):
    from .markov import MarkovMeasure
    if data.get("type", "markov") != "markov":
        raise ValidationError(f"unknown measure type {data.get('type')!r}")
    body = {k: v for k, v in data.items() if k != "type"}
    w = weight_from_json(body)
    if isinstance(w, DenominatorNWeight):
        w = w.weight
    return MarkovMeasure(w)


def measure_to_json(m) -> dict:
    out = weight_to_json(m.weight)
    out["type"] = "markov"
    return out


def hom_to_json(sigma: Homomorphism) -> dict:
    return {"n": sigma.n,
            "perms": [[int(v) + 1 for v in p] for p in sigma.perms]}


def hom_from_json(data: dict) -> Homomorphism:
    try:
        n = int(data["n"])
        perms = [np.asarray(p, dtype=np.int64) - 1 for p in data["perms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed homomorphism JSON: {exc}") from exc
    for p in perms:
        if p.min(initial=0) < 0:
            raise ValidationError("permutation images are 1-based in JSON")
    return Homomorphism(n, tuple(perms))


def labeling_to_json(x: Labeling) -> dict:
    return {"symbols": x.symbols()}


def labeling_from_json(data: dict, alphabet: Alphabet) -> Labeling:
    try:
        symbols = [str(s) for s in data["symbols"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed labeling JSON: {exc}") from exc
    values = np.asarray([alphabet.index(s) for s in symbols], dtype=np.int64)
    return Labeling(alphabet, values)


def sbm_spec_to_json(spec: SBMSpec) -> dict:
    out = {"y": labeling_to_json(spec.y),
           "k": spec.k,
           "target": weight_to_json(spec.target)}
    if spec.sigma0 is not None:
        out["sigma0"] = hom_to_json(spec.sigma0)
    return out


def sbm_spec_from_json(data: dict) -> SBMSpec:
    try:
        k = int(data["k"])
        target = weight_from_json(data["target"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed SBM spec JSON: {exc}") from exc
    if not isinstance(target, DenominatorNWeight):
        raise ValidationError("SBM target must carry its denominator n")
    alph = target.alphabet
    base = alph.base if alph.kind == "ball" else alph
    y = labeling_from_json(data["y"], base)
    sigma0 = hom_from_json(data["sigma0"]) if "sigma0" in data else None
    return SBMSpec(y, k, target, sigma0)


def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
