"""Command-line front end: wires JSON configs to library calls.

Exit codes: 0 ok, 1 selftest failure, 2 validation error, 3 budget error,
64 usage error, 65 malformed JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import census, jsonio, markov, realize, sampler, weights
from .errors import BudgetError, FgelError, ValidationError

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64
EXIT_BADJSON = 65


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_int_list(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            pieces = part.split("..")
            if len(pieces) == 2:
                lo, hi, step = int(pieces[0]), int(pieces[1]), 1
            elif len(pieces) == 3:
                lo, hi, step = int(pieces[0]), int(pieces[1]), int(pieces[2])
            else:
                raise _UsageError(f"bad range {part!r}")
            out.extend(range(lo, hi + 1, step))
        elif part:
            out.append(int(part))
    if not out:
        raise _UsageError("empty integer list")
    return out


def _parse_fraction_list(text: str) -> list:
    return [weights.to_fraction(part.strip()) for part in text.split(",") if part.strip()]


def _load(path: str) -> dict:
    try:
        return jsonio.load_json(path)
    except (json.JSONDecodeError, OSError) as exc:
        raise _BadJson(f"{path}: {exc}") from exc


class _BadJson(Exception):
    pass


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rng(seed: int) -> np.random.Generator:
    return sampler.rng_for(seed)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args) -> int:
    w = jsonio.weight_from_json(_load(args.weight))
    base = w.weight if isinstance(w, weights.DenominatorNWeight) else w
    payload = jsonio.weight_to_json(w)
    payload["vertex"] = [jsonio.fraction_str(v) for v in base.vertex]
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _cmd_fw(args) -> int:
    w = jsonio.weight_from_json(_load(args.weight))
    base = w.weight if isinstance(w, weights.DenominatorNWeight) else w
    _emit(repr(weights.F_of_weight(base)) + "\n", args.out)
    return EXIT_OK


def _cmd_round(args) -> int:
    w = jsonio.weight_from_json(_load(args.weight))
    base = w.weight if isinstance(w, weights.DenominatorNWeight) else w
    rounded = realize.round_denominator_n(base, args.n)
    payload = jsonio.weight_to_json(rounded)
    payload["distance"] = jsonio.fraction_str(
        weights.weight_distance(base, rounded.weight))
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _cmd_round_marginal(args) -> int:
    w = jsonio.weight_from_json(_load(args.weight))
    base = w.weight if isinstance(w, weights.DenominatorNWeight) else w
    wb = jsonio.weight_from_json(_load(args.marginal))
    if not isinstance(wb, weights.DenominatorNWeight):
        from .errors import MarginalNotDenominatorN
        raise MarginalNotDenominatorN("marginal JSON must carry its denominator n")
    rounded = realize.round_with_marginal(base, wb, args.n)
    delta = weights.weight_distance(weights.project_b(base), wb.weight)
    payload = jsonio.weight_to_json(rounded)
    payload["distance"] = jsonio.fraction_str(
        weights.weight_distance(base, rounded.weight))
    payload["delta"] = jsonio.fraction_str(delta)
    payload["bound"] = jsonio.fraction_str(realize.marginal_rounding_bound(
        base.rank, len(base.alphabet), args.n, delta))
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _cmd_realize(args) -> int:
    w = jsonio.weight_from_json(_load(args.weight))
    if not isinstance(w, weights.DenominatorNWeight):
        from .errors import MarginalNotDenominatorN
        raise MarginalNotDenominatorN("realize needs a denominator-n weight (field n)")
    rng = None if args.deterministic else _rng(args.seed)
    sigma, x = realize.realize_weight(w, rng)
    payload = {"sigma": jsonio.hom_to_json(sigma),
               "labeling": jsonio.labeling_to_json(x)}
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _cmd_sample_uniform(args) -> int:
    rng = _rng(args.seed)
    lines = []
    for _ in range(args.count):
        sigma = sampler.uniform_hom(args.n, args.rank, rng)
        lines.append(json.dumps(jsonio.hom_to_json(sigma), sort_keys=True))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_sample_sbm(args) -> int:
    spec = jsonio.sbm_spec_from_json(_load(args.spec))
    rng = _rng(args.seed)
    out = sampler.sbm_sample_many(spec, rng, args.count, method=args.method,
                                  burnin=args.burnin, stride=args.stride,
                                  reject_budget=args.max_rejects)
    lines = [json.dumps(jsonio.hom_to_json(s), sort_keys=True) for s in out]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_sofic(args) -> int:
    sigma = jsonio.hom_from_json(_load(args.hom))
    if args.ball_radius is not None:
        from .words import ball_index
        words = [w for w in ball_index(sigma.rank, args.ball_radius).words if w]
    else:
        from .words import parse_word
        words = [parse_word(t, sigma.rank) for t in args.words.split(",")]
    res = sampler.is_sofic(sigma, words, weights.to_fraction(args.delta))
    payload = {"sofic": res.sofic, "fraction": jsonio.fraction_str(res.fraction)}
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _require_denominator(w):
    if not isinstance(w, weights.DenominatorNWeight):
        from .errors import MarginalNotDenominatorN
        raise MarginalNotDenominatorN("weight JSON must carry its denominator n")
    return w


def _cmd_zn(args) -> int:
    w = _require_denominator(jsonio.weight_from_json(_load(args.weight)))
    _emit(str(census.z_n(w)) + "\n", args.out)
    return EXIT_OK


def _cmd_zbounds(args) -> int:
    w = _require_denominator(jsonio.weight_from_json(_load(args.weight)))
    res = census.zbounds_check(w)
    payload = {"pass": res.passed,
               "log_slack_lower": res.log_slack_lower,
               "log_slack_upper": res.log_slack_upper}
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _cmd_expected_count(args) -> int:
    w = _require_denominator(jsonio.weight_from_json(_load(args.joint)))
    witness = None
    if args.witness:
        data = _load(args.witness)
        sigma0 = jsonio.hom_from_json(data["sigma"])
        alph = w.alphabet.factors[1]
        base = alph.base if alph.kind == "ball" else alph
        y0 = jsonio.labeling_from_json(data["labeling"], base)
        witness = (sigma0, y0)
    val = census.expected_planted_count_exact(w, witness)
    _emit(jsonio.fraction_str(val) + "\n", args.out)
    return EXIT_OK


def _cmd_good_models(args) -> int:
    sigma = jsonio.hom_from_json(_load(args.hom))
    m = jsonio.measure_from_json(_load(args.measure))
    planted = None
    if args.planted:
        alph = m.alphabet.factors[1] if m.is_joint else m.alphabet
        planted = jsonio.labeling_from_json(_load(args.planted), alph)
    count = census.enumerate_good_models(sigma, m, args.k,
                                         weights.to_fraction(args.eps),
                                         planted=planted,
                                         enum_budget=args.budget_enum)
    _emit(json.dumps({"count": count}) + "\n", args.out)
    return EXIT_OK


def _cmd_growth(args) -> int:
    m = jsonio.measure_from_json(_load(args.measure))
    sbm_level = "loglog" if args.sbm_level == "loglog" else int(args.sbm_level)
    rows = census.growth_rate_experiment(
        m, args.sampler, args.k, _parse_fraction_list(args.eps),
        _parse_int_list(args.n), args.trials, args.seed,
        enum_budget=args.budget_enum, atom_budget=args.budget_atoms,
        bracket_depth=args.bracket_depth, sbm_level=sbm_level)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(census.CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_row())
    _emit(buf.getvalue(), args.out)
    if args.plot_dir:
        from .plots import render_growth_figure
        render_growth_figure(rows, args.plot_dir)
    return EXIT_OK


def _cmd_join_search(args) -> int:
    m_a = jsonio.measure_from_json(_load(args.measure_a))
    m_b = jsonio.measure_from_json(_load(args.measure_b))
    res = census.joining_search(m_a, m_b, depth=args.depth,
                                restarts=args.restarts, iters=args.iters,
                                seed=args.seed, atom_budget=args.budget_atoms)
    payload = {"value": res.value,
               "product_value": res.product_value,
               "diagonal_value": res.diagonal_value,
               "evaluations": res.evaluations,
               "note": res.note,
               "coupling": jsonio.weight_to_json(res.coupling)}
    _emit(jsonio.dump_json(payload), args.out)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest
    ok = run_selftest(fast=args.fast)
    return EXIT_OK if ok else EXIT_SELFTEST


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    p = _Parser(prog="fgel", description="exact weight calculus, block-model "
                "samplers and good-model counting experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--budget-atoms", type=int, default=markov.DEFAULT_ATOM_BUDGET)
        sp.add_argument("--budget-enum", type=int, default=census.DEFAULT_ENUM_BUDGET)
        return sp

    sp = add("validate", _cmd_validate, help="validate a weight JSON file")
    sp.add_argument("--weight", required=True)

    sp = add("fw", _cmd_fw, help="evaluate the growth functional F of a weight")
    sp.add_argument("--weight", required=True)

    sp = add("round", _cmd_round, help="denominator-n rounding")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--n", type=int, required=True)

    sp = add("round-marginal", _cmd_round_marginal,
             help="denominator-n rounding with an exact prescribed marginal")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--marginal", required=True)
    sp.add_argument("--n", type=int, required=True)

    sp = add("realize", _cmd_realize, help="realize a denominator-n weight on n points")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--deterministic", action="store_true")

    sp = add("sample-uniform", _cmd_sample_uniform, help="uniform homomorphisms")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1)

    sp = add("sample-sbm", _cmd_sample_sbm, help="block-model homomorphisms")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--method", default="auto",
                    choices=["auto", "enumerate", "reject", "mcmc"])
    sp.add_argument("--burnin", type=int, default=500)
    sp.add_argument("--stride", type=int, default=50)
    sp.add_argument("--max-rejects", type=int, default=sampler.DEFAULT_REJECT_BUDGET)

    sp = add("sofic", _cmd_sofic, help="test a homomorphism for (D,delta)-freeness")
    sp.add_argument("--hom", required=True)
    sp.add_argument("--words", default="",
                    help='comma list like "s1,S1,s2s1" (capital = inverse)')
    sp.add_argument("--ball-radius", type=int, default=None,
                    help="use all non-identity words of this ball instead")
    sp.add_argument("--delta", required=True)

    sp = add("zn", _cmd_zn, help="exact pair count of a denominator-n weight")
    sp.add_argument("--weight", required=True)

    sp = add("zbounds", _cmd_zbounds, help="check the pair-count sandwich bounds")
    sp.add_argument("--weight", required=True)

    sp = add("expected-count", _cmd_expected_count,
             help="exact expected planted-completion count (ratio of pair counts)")
    sp.add_argument("--joint", required=True)
    sp.add_argument("--witness", help="JSON with sigma/labeling certifying the fiber")

    sp = add("good-models", _cmd_good_models, help="exact good-model count")
    sp.add_argument("--hom", required=True)
    sp.add_argument("--measure", required=True)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--eps", required=True)
    sp.add_argument("--planted", help="labeling JSON for planted pair counting")

    sp = add("growth", _cmd_growth, help="Monte-Carlo growth-rate experiment (CSV)")
    sp.add_argument("--measure", required=True)
    sp.add_argument("--sampler", default="uniform", choices=["uniform", "sbm"])
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--eps", default="0.05,0.1,0.2")
    sp.add_argument("--n", default="6,8,10,12",
                    help='comma list or ranges, e.g. "6..12..2"')
    sp.add_argument("--trials", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bracket-depth", type=int, default=1)
    sp.add_argument("--sbm-level", default="0",
                    help='planting radius, or "loglog" for floor(log log n)')
    sp.add_argument("--plot-dir", help="also render growth figures here")

    sp = add("join-search", _cmd_join_search,
             help="lower-bound search over one-step couplings")
    sp.add_argument("--measure-a", required=True)
    sp.add_argument("--measure-b", required=True)
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--restarts", type=int, default=3)
    sp.add_argument("--iters", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("selftest", _cmd_selftest, help="run the exact-oracle self checks")
    sp.add_argument("--fast", action="store_true")

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _BadJson as exc:
        print(f"malformed JSON: {exc}", file=sys.stderr)
        return EXIT_BADJSON
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FgelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
