"""Command-line front end. Every command prints one JSON object on stdout.

Exit codes: 0 when a verdict was computed (whatever it is), 1 when
``--expect-invariant`` was given and invariance failed, 2 on usage or input
errors, 3 when a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from . import synth
from .corpus import GeneratorError, GeneratorSpec, generate
from .epsilon import BranchCap, MinOracle, eliminate_epsilon, \
    epsilon_to_local_order, evaluate_epsilon, is_epsilon_invariant, least_witness_provider
from .experiments import EXPERIMENTS, gurevich, gurevich_local, gurevich_local_exhaustive
from .games import GameCapExceeded, ef_game
from .logic import CNFTooLarge, EvaluationError, Evaluator, FormulaSyntaxError, parse_formula, to_text
from .logic.ast import size as formula_size
from .schemes import (DEFAULT_CAP, SCHEME_NAMES, Expansion, ExpansionCap, NotAPresentation, builtin_scheme,
                      is_invariant)
from .structures import (StructureError, Vocabulary, hanf_signature, is_isomorphic, parse_structure,
                         serialize_structure)

SEEDED = {"invariance", "invariant-eval", "gurevich", "gen"}
CAP_ERRORS = (ExpansionCap, BranchCap, GameCapExceeded, CNFTooLarge)


class UsageError(Exception):
    pass


# -- input helpers -----------------------------------------------------------

def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _structures(args, count=None):
    paths = args.structure or []
    if count is not None and len(paths) != count:
        raise UsageError(f"expected {count} structure file(s) via -s, got {len(paths)}")
    return [parse_structure(_read(p)) for p in paths]


def _formula(args, required=True):
    text = args.formula
    if text is None:
        if required:
            raise UsageError("a formula is required (-f EXPR or -f @FILE)")
        return None
    if text.startswith("@"):
        text = _read(text[1:])
    return parse_formula(text)


def _check_relations(f, s, extra=()):
    stray = f.relations - set(s.vocab.names) - set(extra)
    if stray:
        raise UsageError(f"relations {sorted(stray)} are not in the structure's vocabulary")


def _vocab(args, structures=()):
    if structures:
        return structures[0].vocab
    return Vocabulary.of(*args.vocab.split())


# -- commands ----------------------------------------------------------------

def cmd_eval(args):
    (s,) = _structures(args, 1)
    f = _formula(args)
    if args.expansion:
        extra = json.loads(args.expansion)
        arities = {name: len(ts[0]) if ts else 0 for name, ts in extra.items()}
        for name in arities:
            if not extra[name]:
                arities[name] = _arity_hint(f, name)
        s = s.expand({n: (arities[n], [tuple(t) for t in ts]) for n, ts in extra.items()})
    _check_relations(f, s)
    if f.has_eps:
        if args.oracle:
            decisions = {frozenset(d["set"]): d["choice"] for d in json.loads(args.oracle)}
            oracle = _ReplayOracle(decisions)
        else:
            oracle = MinOracle()
        return {"result": evaluate_epsilon(s, f, oracle)}
    return {"result": Evaluator(s).holds(f)}


class _ReplayOracle:
    """Recorded choices, falling back to the least element for other sets."""

    def __init__(self, decisions):
        self.decisions = decisions
        self.fallback = MinOracle()

    def __call__(self, witnesses):
        if witnesses in self.decisions:
            return self.decisions[witnesses]
        return self.fallback(witnesses)


def _arity_hint(f, name):
    from .logic.ast import Atom, children
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom) and g.rel == name:
            return len(g.args)
        stack.extend(children(g))
    raise UsageError(f"cannot tell the arity of empty relation {name}")


def cmd_invariance(args):
    (s,) = _structures(args, 1)
    f = _formula(args)
    if args.scheme == "epsilon":
        _check_relations(f, s)
        mode = args.mode if args.mode in ("backtracking", "full") else "backtracking"
        res = is_epsilon_invariant(s, f, mode, cap=args.cap)
        out = res.to_json()
    else:
        if args.mode not in ("exhaustive", "sampled"):
            raise UsageError("--mode must be exhaustive or sampled for presentation schemes")
        scheme = _scheme(args)
        res = is_invariant(f, scheme, s, args.mode, args.samples, args.seed, args.cap, args.jobs)
        out = {"scheme": scheme.name, **res.to_json()}
    return out, (not res.invariant and args.expect_invariant)


def cmd_invariant_eval(args):
    out, violated = cmd_invariance(args)
    if not out["invariant"]:
        return {"error": "not invariant", **out}, args.expect_invariant
    return {"result": out["value"], "invariant": True, "expansions": out.get("expansions", out.get("explored"))}, False


def _scheme(args):
    if not args.scheme:
        raise UsageError("--scheme is required")
    try:
        return builtin_scheme(args.scheme)
    except ValueError as e:
        raise UsageError(str(e)) from None


SYNTH_NAMES = ("eta", "beta", "sphere", "lambda", "local-order-axiom", "linear-order-axiom", "phi-ba",
               "even-le", "even-lo", "successor", "hanf-sentence", "eliminate", "epsilon-local")


def cmd_synth(args):
    structures = _structures(args) if args.structure else []
    vocab = _vocab(args, structures)
    name = args.name
    if name == "eta":
        f = synth.eta(vocab, "x", "y")
    elif name == "beta":
        f = synth.beta(vocab, args.r, "x", "y")
    elif name == "sphere":
        f = synth.sphere(vocab, args.r, "x", "y")
    elif name == "lambda":
        f = synth.lambda_chain(vocab, args.r, synth.LO, "x", "y", "z")
    elif name == "local-order-axiom":
        f = synth.local_order_axiom(vocab, synth.LO)
    elif name == "linear-order-axiom":
        f = synth.linear_order_axiom(synth.LE)
    elif name == "phi-ba":
        f = synth.boolean_algebra_axiom(synth.SUB)
    elif name in ("even-le", "even-lo"):
        _, lo, le = synth.gurevich_even_atoms(prenex=args.prenex)
        f = le if name == "even-le" else lo
    elif name == "successor":
        lib = synth.successor_library(args.k)
        return {"name": name, "formulas": {k: to_text(v) for k, v in lib.items()}}
    elif name == "hanf-sentence":
        if not structures:
            raise UsageError("hanf-sentence needs -s with the structures whose signatures to accept")
        types = synth.realized_types(structures, args.r) if args.realized else \
            synth.enumerate_types(vocab, args.d, args.r, simple_graph=args.simple)
        sigs = {hanf_signature(s, args.r, args.t) for s in structures}
        f = synth.hanf_sentence(sorted(sigs, key=lambda g: synth.signature_vector(g, types)), types, vocab, args.t)
    elif name == "eliminate":
        f = eliminate_epsilon(_formula(args), least_witness_provider())
    elif name == "epsilon-local":
        types = synth.realized_types(structures, args.r) if structures else None
        f = epsilon_to_local_order(_formula(args), args.d, args.r, vocab, types=types,
                                   simple_graph=args.simple).sentence
    else:
        raise UsageError(f"unknown synth name {name!r}; choose from {', '.join(SYNTH_NAMES)}")
    return {"name": name, "formula": to_text(f), "size": formula_size(f)}


def cmd_hanf(args):
    structures = _structures(args)
    if not structures:
        raise UsageError("hanf needs at least one -s")
    sigs = [hanf_signature(s, args.r, args.t) for s in structures]
    out = {"r": args.r, "t": args.t,
           "signatures": [[{"type_size": tp.size, "count": c} for tp, c in g.counts] for g in sigs]}
    if len(sigs) > 1:
        out["equivalent"] = all(g == sigs[0] for g in sigs[1:])
    return out


def cmd_iso(args):
    a, b = _structures(args, 2)
    ok, witness = is_isomorphic(a, b, with_witness=True)
    return {"isomorphic": ok, "mapping": None if witness is None else [witness[i] for i in range(a.size)]}


def cmd_ef(args):
    a, b = _structures(args, 2)
    return ef_game(a, b, args.k, cap=args.cap).to_json()


def cmd_gen(args):
    kind = args.kind
    try:
        if kind == "cycle":
            spec = GeneratorSpec("cycle", {"n": args.n})
        elif kind == "path":
            spec = GeneratorSpec("path", {"n": args.n})
        elif kind == "ba":
            spec = GeneratorSpec("boolean_algebra", {"atoms": args.atoms})
        elif kind == "unary":
            counts = {}
            for item in args.counts or []:
                key, _, val = item.partition("=")
                labels = tuple(x for x in key.split("+") if x and x != "none")
                counts[labels] = int(val)
            names = sorted({x for k in counts for x in k})
            spec = GeneratorSpec("unary", {"counts": counts, "names": names})
        else:
            spec = GeneratorSpec("random_bounded_degree", {"n": args.n, "d": args.d, "seed": args.seed,
                                                          "p": args.p})
        s = generate(spec)
    except (GeneratorError, TypeError, ValueError) as e:
        raise UsageError(str(e)) from None
    text = serialize_structure(s)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        return {"written": args.output, "size": s.size}
    return {"structure": text, "size": s.size}


def cmd_gurevich(args):
    if args.local:
        if args.mode == "exhaustive" and args.atoms <= 2:
            return gurevich_local_exhaustive(args.atoms)
        return gurevich_local(args.atoms, samples=args.samples if args.mode == "sampled" else 0, seed=args.seed)
    return gurevich(args.atoms, args.mode, args.samples, args.seed)


def cmd_experiment(args):
    if args.name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {', '.join(EXPERIMENTS)}")
    params = {}
    for item in args.param or []:
        key, _, val = item.partition("=")
        params[key.replace("-", "_")] = int(val)
    try:
        return EXPERIMENTS[args.name](**params).to_json()
    except TypeError as e:
        raise UsageError(str(e)) from None


def cmd_schemes(args):
    if args.action != "list":
        raise UsageError("only 'schemes list' is supported")
    return {"schemes": list(SCHEME_NAMES) + ["epsilon"]}


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-s", "--structure", action="append", help="structure file (repeat for two)")
    common.add_argument("-f", "--formula", help="formula text, or @FILE")
    common.add_argument("--scheme", help="presentation scheme name, or 'epsilon'")
    common.add_argument("--mode", default="exhaustive",
                        choices=["exhaustive", "sampled", "backtracking", "full"])
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help=f"expansion/branch cap (default {DEFAULT_CAP})")
    common.add_argument("--expect-invariant", action="store_true", help="exit 1 if not invariant")

    p = argparse.ArgumentParser(prog="invlogic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate a formula on a structure")
    e.add_argument("--expansion", help="JSON object of extra relations, e.g. a replayed counterexample")
    e.add_argument("--oracle", help="JSON list of {set, choice} epsilon decisions to replay")
    e.set_defaults(run=cmd_eval)

    for name, fn in (("invariance", cmd_invariance), ("invariant-eval", cmd_invariant_eval)):
        q = sub.add_parser(name, parents=[common])
        q.set_defaults(run=fn)

    q = sub.add_parser("synth", parents=[common], help="print a synthesized formula")
    q.add_argument("name", help=", ".join(SYNTH_NAMES))
    q.add_argument("--vocab", default="E/2", help="vocabulary when no -s is given")
    q.add_argument("--r", type=int, default=1)
    q.add_argument("--d", type=int, default=2)
    q.add_argument("--t", type=int, default=2)
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--simple", action="store_true", help="types of simple graphs only")
    q.add_argument("--realized", action="store_true", help="only types realized in the -s structures")
    q.add_argument("--prenex", action="store_true")
    q.set_defaults(run=cmd_synth)

    q = sub.add_parser("hanf", parents=[common], help="Hanf signatures and equivalence")
    q.add_argument("--r", type=int, default=1)
    q.add_argument("--t", type=int, default=1)
    q.set_defaults(run=cmd_hanf)

    q = sub.add_parser("iso", parents=[common], help="isomorphism test of two structures")
    q.set_defaults(run=cmd_iso)

    q = sub.add_parser("ef", parents=[common], help="Ehrenfeucht-Fraisse game")
    q.add_argument("-k", "--rounds", dest="k", type=int, required=True)
    q.set_defaults(run=cmd_ef)

    q = sub.add_parser("gen", help="generate a structure")
    q.add_argument("kind", choices=["cycle", "path", "ba", "unary", "rand"])
    q.add_argument("--n", type=int)
    q.add_argument("--atoms", type=int)
    q.add_argument("--counts", nargs="*", help="LABELS=COUNT with labels joined by '+', 'none' for no label")
    q.add_argument("--d", type=int)
    q.add_argument("--p", type=float, default=0.5)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_gen)

    q = sub.add_parser("gurevich", parents=[common], help="even number of atoms on a Boolean algebra")
    q.add_argument("--atoms", type=int, required=True)
    q.add_argument("--local", action="store_true", help="use the local-order translation")
    q.set_defaults(run=cmd_gurevich)

    q = sub.add_parser("experiment", help="run a named end-to-end experiment")
    q.add_argument("name", help=", ".join(EXPERIMENTS))
    q.add_argument("--param", action="append", help="KEY=INT experiment parameter")
    q.set_defaults(run=cmd_experiment)

    q = sub.add_parser("schemes", help="list presentation schemes")
    q.add_argument("action", choices=["list"])
    q.set_defaults(run=cmd_schemes)
    return p


def run(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    t0 = time.time()
    code = 0
    try:
        result = args.run(args)
        if isinstance(result, tuple):
            result, failed = result
            code = 1 if failed else 0
        report = {"command": argv, **result}
        if args.command in SEEDED:
            report.setdefault("seed", args.seed)
    except CAP_ERRORS as e:
        report, code = {"command": argv, "error": "resource cap", "detail": str(e)}, 3
    except (UsageError, StructureError, FormulaSyntaxError, EvaluationError, NotAPresentation,
            ValueError, KeyError, json.JSONDecodeError) as e:
        report, code = {"command": argv, "error": "usage", "detail": str(e)}, 2
    report["wall_time_s"] = round(time.time() - t0, 4)
    json.dump(report, out, default=_json_default)
    out.write("\n")
    return code


def _json_default(x):
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, Expansion):
        return x.to_json()
    return str(x)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
